//! Wire messages. HTTP bodies and line-protocol records share these
//! encodings; every message is one compact JSON object.

use bigboard_core::command::{Command, Role};
use bigboard_core::ids::ClientId;
use bigboard_core::overlay::{BoardView, MenuEntry};
use bigboard_core::sequencer::{Delta, Outcome, Snapshot};
use bigboard_core::state::StateDigest;
use serde::{Deserialize, Serialize};

/// Client to server, one per line on the stream listener.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    /// Must be the first line of a connection.
    Hello { token: String },
    Submit { command: Command },
    Checkout,
    /// Turns the connection into a delta feed starting after `from`.
    Subscribe { from: u64 },
    Health,
}

/// Server to client on the stream listener.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reply", rename_all = "snake_case")]
pub enum Reply {
    Welcome { client_id: Option<ClientId>, role: Role, seq: u64 },
    Outcome { outcome: Outcome },
    Snapshot { snapshot: Snapshot },
    Delta { delta: Delta },
    Health { health: Health },
    Error { error: WireError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Missing or unknown token.
    Unauthenticated,
    /// Undecodable request.
    Malformed,
    /// The token may not act as the claimed identity.
    Forbidden,
    /// Subscription starts past the current version.
    Future,
    /// Subscription starts before retained history; check out again.
    Expired,
    /// The journal failed; the board stopped acknowledging.
    Unavailable,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unauthenticated => "unauthenticated",
            Self::Malformed => "malformed",
            Self::Forbidden => "forbidden",
            Self::Future => "future",
            Self::Expired => "expired",
            Self::Unavailable => "unavailable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{}: {message}", class.as_str())]
pub struct WireError {
    pub class: ErrorClass,
    pub message: String,
}

impl WireError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Self {
            class,
            message: message.into(),
        }
    }
}

/// Error body on the HTTP side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: WireError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub network_name: String,
    pub seq: u64,
    pub digest: StateDigest,
    pub tick_ms: u64,
    pub window_size: usize,
}

/// Derived layers at one version plus the menu slice for a scroll tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewReply {
    pub seq: u64,
    pub digest: StateDigest,
    pub tick: u64,
    pub window_size: usize,
    pub view: BoardView,
    pub menu_window: Vec<MenuEntry>,
}

pub fn encode_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("wire types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use bigboard_core::command::{ClientIdentity, CommandBody};

    #[test]
    fn request_lines() {
        let r: Request = serde_json::from_str(r#"{"op":"subscribe","from":7}"#).unwrap();
        assert_eq!(r, Request::Subscribe { from: 7 });
        let cmd = Command::new("c", ClientIdentity::member("x"), 5, CommandBody::ResolveAlert { alert_id: "a".into() });
        let line = encode_line(&Request::Submit { command: cmd.clone() });
        assert!(line.starts_with(r#"{"op":"submit","command":{"command_id":"c","#), "{line}");
        assert_eq!(serde_json::from_str::<Request>(&line).unwrap(), Request::Submit { command: cmd });
        let e = WireError::new(ErrorClass::Expired, "re-checkout");
        assert_eq!(e.to_string(), "expired: re-checkout");
    }
}
