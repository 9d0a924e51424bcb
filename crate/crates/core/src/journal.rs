//! Append-only journal: one JSON record per line, each a command record
//! extended with its sequencing outcome.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::Command;
use crate::state::StateDigest;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal io: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt journal record at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("journal unavailable after an earlier write failure; restart to recover")]
    Poisoned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectClass {
    Authorization,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub class: RejectClass,
    pub message: String,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let class = match self.class {
            RejectClass::Authorization => "authorization",
            RejectClass::Validation => "validation",
        };
        write!(f, "{class}: {}", self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    /// Version after this record; rejections keep the previous version.
    pub seq: u64,
    #[serde(flatten)]
    pub command: Command,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<StateDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<Rejection>,
}

impl JournalRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Parses journal bytes. A final segment without a trailing newline is a
/// torn write and is dropped; any other unparseable line is fatal.
///
/// Returns the records and the byte length of the valid prefix.
pub fn parse_journal(bytes: &[u8]) -> Result<(Vec<JournalRecord>, usize), JournalError> {
    let mut records = Vec::new();
    let mut offset = 0;
    for (line_no, chunk) in bytes.split_inclusive(|&b| b == b'\n').enumerate() {
        if chunk.last() != Some(&b'\n') {
            break;
        }
        let body = &chunk[..chunk.len() - 1];
        if !body.iter().all(u8::is_ascii_whitespace) {
            let record = serde_json::from_slice(body).map_err(|e| JournalError::Corrupt {
                line: line_no + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        offset += chunk.len();
    }
    Ok((records, offset))
}

pub fn read_journal(path: &Path) -> Result<Vec<JournalRecord>, JournalError> {
    let bytes = std::fs::read(path)?;
    Ok(parse_journal(&bytes)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsyncPolicy {
    /// fsync after every record.
    Always,
    /// fsync after every n records.
    Every(u32),
    /// Write through to the OS on every record, never fsync.
    #[default]
    Never,
}

impl FromStr for FsyncPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always" => Ok(Self::Always),
            "never" => Ok(Self::Never),
            other => other
                .strip_prefix("every:")
                .and_then(|n| n.parse().ok())
                .filter(|&n| n > 0)
                .map(Self::Every)
                .ok_or_else(|| format!("invalid fsync policy {other:?} (always|never|every:<n>)")),
        }
    }
}

pub trait JournalSink: Send {
    fn append(&mut self, record: &JournalRecord) -> Result<(), JournalError>;
}

/// In-memory sink, mostly for tests and embedded use.
#[derive(Debug, Default, Clone)]
pub struct MemoryJournal {
    pub lines: Vec<String>,
}

impl JournalSink for MemoryJournal {
    fn append(&mut self, record: &JournalRecord) -> Result<(), JournalError> {
        self.lines.push(record.to_line());
        Ok(())
    }
}

pub struct FileJournal {
    file: File,
    policy: FsyncPolicy,
    unsynced: u32,
}

impl FileJournal {
    /// Opens (or creates) a journal, drops any torn tail and returns the
    /// surviving records together with a writer positioned after them.
    pub fn open(path: &Path, policy: FsyncPolicy) -> Result<(Self, Vec<JournalRecord>), JournalError> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let (records, valid) = parse_journal(&bytes)?;
        if valid < bytes.len() {
            file.set_len(valid as u64)?;
        }
        file.seek(SeekFrom::Start(valid as u64))?;
        Ok((
            Self {
                file,
                policy,
                unsynced: 0,
            },
            records,
        ))
    }
}

impl JournalSink for FileJournal {
    fn append(&mut self, record: &JournalRecord) -> Result<(), JournalError> {
        let mut line = record.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        match self.policy {
            FsyncPolicy::Always => self.file.sync_data()?,
            FsyncPolicy::Every(n) => {
                self.unsynced += 1;
                if self.unsynced >= n {
                    self.file.sync_data()?;
                    self.unsynced = 0;
                }
            }
            FsyncPolicy::Never => {}
        }
        Ok(())
    }
}
