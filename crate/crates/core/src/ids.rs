//! String identifier newtypes for the board's domain objects.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Top-level panel zone.
    ZoneId
);
string_id!(
    /// Geographic or functional subdivision of a zone.
    SubZoneId
);
string_id!(
    /// Individual monitored system.
    AssetId
);
string_id!(
    /// Enterprise mission area.
    MissionId
);
string_id!(
    /// Alert idempotency key, supplied by the event source.
    AlertId
);
string_id!(
    /// Live inter-sub-zone bandwidth problem.
    PipeId
);
string_id!(
    /// Saved functional query.
    QueryId
);
string_id!(TicketId);
string_id!(ClientId);
string_id!(
    /// Per-issuer command idempotency key.
    CommandId
);
