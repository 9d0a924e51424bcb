//! Blocking HTTP access to a running board.

use bigboard_core::command::Command;
use bigboard_core::sequencer::{Delta, Outcome, Snapshot};
use bigboard_server::protocol::{ErrorBody, Health};
use reqwest::blocking::{Client, RequestBuilder, Response};
use serde::de::DeserializeOwned;

use crate::{CliError, Conn};

pub struct Remote {
    base: String,
    token: String,
    http: Client,
}

impl Remote {
    pub fn new(conn: &Conn) -> Result<Self, CliError> {
        let addr = conn
            .connect
            .as_deref()
            .ok_or_else(|| CliError::Usage("no server address: pass --connect or set BIGBOARD_ADDR".into()))?;
        let token = conn
            .token
            .clone()
            .ok_or_else(|| CliError::Usage("no token: pass --token or set BIGBOARD_TOKEN".into()))?;
        let base = if addr.contains("://") {
            addr.trim_end_matches('/').to_string()
        } else {
            format!("http://{addr}")
        };
        Ok(Self { base, token, http: Client::new() })
    }

    fn send(&self, req: RequestBuilder) -> Result<Response, CliError> {
        req.bearer_auth(&self.token)
            .send()
            .map_err(|e| CliError::Connection(format!("{}: {e}", self.base)))
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, CliError> {
        let r = self.send(self.http.get(format!("{}{path}", self.base)))?;
        if !r.status().is_success() {
            return Err(refusal(r));
        }
        r.json().map_err(|e| CliError::Connection(format!("bad reply from {path}: {e}")))
    }

    pub fn health(&self) -> Result<Health, CliError> {
        self.get("/health")
    }

    pub fn snapshot(&self) -> Result<Snapshot, CliError> {
        self.get("/snapshot")
    }

    /// The topology document, verbatim.
    pub fn topology(&self) -> Result<String, CliError> {
        let r = self.send(self.http.get(format!("{}/topology", self.base)))?;
        if !r.status().is_success() {
            return Err(refusal(r));
        }
        r.text().map_err(|e| CliError::Connection(e.to_string()))
    }

    pub fn submit(&self, cmd: &Command) -> Result<Delta, CliError> {
        let r = self.send(self.http.post(format!("{}/command", self.base)).json(cmd))?;
        let status = r.status();
        let text = r.text().map_err(|e| CliError::Connection(e.to_string()))?;
        match serde_json::from_str::<Outcome>(&text) {
            Ok(Outcome::Accepted { delta }) => Ok(delta),
            Ok(Outcome::Rejected { reason }) => {
                let line = reason.to_string();
                let (class, message) = line.split_once(": ").unwrap_or(("rejected", &line));
                Err(CliError::Refused { class: class.into(), message: message.into() })
            }
            Err(_) => Err(wire_error(status, &text)),
        }
    }
}

fn refusal(r: Response) -> CliError {
    let status = r.status();
    let text = r.text().unwrap_or_default();
    wire_error(status, &text)
}

fn wire_error(status: reqwest::StatusCode, body: &str) -> CliError {
    match serde_json::from_str::<ErrorBody>(body) {
        Ok(ErrorBody { error }) if error.class == bigboard_server::protocol::ErrorClass::Unavailable => {
            CliError::Connection(error.to_string())
        }
        Ok(ErrorBody { error }) => CliError::Refused { class: error.class.as_str().into(), message: error.message },
        Err(_) => CliError::Connection(format!("unexpected HTTP {status}")),
    }
}
