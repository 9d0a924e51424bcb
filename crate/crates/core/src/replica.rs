//! Checked-out local copy of the board. A replica starts from a snapshot
//! and applies the server's delta stream, verifying the digest after every
//! step.

use std::sync::Arc;

use thiserror::Error;

use crate::overlay::BoardView;
use crate::sequencer::{Delta, Snapshot};
use crate::state::{BoardError, BoardState, StateDigest};
use crate::topology::Topology;

#[derive(Debug, Error, PartialEq)]
pub enum ReplicaError {
    #[error("delta gap: expected seq {expected}, got {got}; re-checkout required")]
    Gap { expected: u64, got: u64 },
    #[error("accepted delta {seq} failed locally: {source}")]
    Apply { seq: u64, source: BoardError },
    #[error("digest diverged at seq {seq}")]
    Diverged { seq: u64 },
    #[error(transparent)]
    Snapshot(#[from] BoardError),
}

#[derive(Debug, Clone)]
pub struct Replica {
    state: BoardState,
    seq: u64,
}

impl Replica {
    pub fn checkout(topology: Arc<Topology>, snapshot: &Snapshot) -> Result<Self, ReplicaError> {
        let state = BoardState::from_snapshot(topology, &snapshot.state)?;
        if state.digest() != snapshot.digest {
            return Err(ReplicaError::Diverged { seq: snapshot.seq });
        }
        Ok(Self {
            state,
            seq: snapshot.seq,
        })
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub fn digest(&self) -> StateDigest {
        self.state.digest()
    }

    pub fn state(&self) -> &BoardState {
        &self.state
    }

    pub fn view(&self) -> BoardView {
        self.state.view()
    }

    /// Applies the next delta. Deltas at or below the current seq are
    /// ignored and reported as `Ok(false)`.
    pub fn apply(&mut self, delta: &Delta) -> Result<bool, ReplicaError> {
        if delta.seq <= self.seq {
            return Ok(false);
        }
        if delta.seq != self.seq + 1 {
            return Err(ReplicaError::Gap {
                expected: self.seq + 1,
                got: delta.seq,
            });
        }
        let cmd = &delta.command;
        self.state
            .apply(&cmd.body, cmd.issuer.client_id.as_str(), cmd.at)
            .map_err(|source| ReplicaError::Apply {
                seq: delta.seq,
                source,
            })?;
        self.seq = delta.seq;
        if self.state.digest() != delta.digest {
            return Err(ReplicaError::Diverged { seq: delta.seq });
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::{AlertCategory, AlertSubject};
    use crate::command::{ClientIdentity, Command, CommandBody};
    use crate::sequencer::Sequencer;
    use crate::sim::fixture::generate_fixture;

    #[test]
    fn follows_the_server_and_detects_gaps() {
        let topo = Arc::new(generate_fixture(200).unwrap());
        let mut server = Sequencer::new(Arc::clone(&topo));
        let mut replica = Replica::checkout(Arc::clone(&topo), &server.checkout()).unwrap();
        for i in 0..4 {
            server
                .submit(Command::new(
                    format!("c{i}"),
                    ClientIdentity::member("t"),
                    i,
                    CommandBody::RaiseAlert {
                        alert_id: format!("a{i}").into(),
                        category: AlertCategory::Security,
                        subject: AlertSubject::SubZone("dns".into()),
                        summary: "probe".into(),
                    },
                ))
                .unwrap();
        }
        let deltas = server.deltas_since(0).unwrap();
        assert!(replica.apply(&deltas[0]).unwrap());
        assert!(!replica.apply(&deltas[0]).unwrap());
        assert_eq!(
            replica.apply(&deltas[2]),
            Err(ReplicaError::Gap { expected: 2, got: 3 })
        );
        for d in &deltas[1..] {
            replica.apply(d).unwrap();
        }
        assert_eq!(replica.digest(), server.digest());

        let mut forged = server.deltas_since(3).unwrap()[0].clone();
        forged.seq = 5;
        forged.command.command_id = "c9".into();
        if let CommandBody::RaiseAlert { alert_id, .. } = &mut forged.command.body {
            *alert_id = "a9".into();
        }
        assert_eq!(replica.apply(&forged), Err(ReplicaError::Diverged { seq: 5 }));
    }
}
