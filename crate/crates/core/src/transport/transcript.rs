//! Ordered record of every message of a session.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    P1,
    P2,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::P1 => Party::P2,
            Party::P2 => Party::P1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub round: u64,
    pub from: Party,
    #[serde(rename = "type")]
    pub msg_type: String,
    #[serde(rename = "payload_hex", with = "hex::serde")]
    pub payload: Vec<u8>,
}

/// A transcript. When disabled, recording is skipped entirely so large
/// payloads are never copied.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    enabled: bool,
    records: Vec<Record>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript { enabled: true, records: Vec::new() }
    }

    pub fn disabled() -> Self {
        Transcript { enabled: false, records: Vec::new() }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn record(&mut self, from: Party, msg_type: u8, payload: impl FnOnce() -> Vec<u8>) {
        if self.enabled {
            self.push(from, msg_type, &payload());
        }
    }

    pub fn push(&mut self, from: Party, msg_type: u8, payload: &[u8]) {
        if !self.enabled {
            return;
        }
        let round = self.records.len() as u64;
        let name = super::msg::name(msg_type).map(str::to_owned).unwrap_or_else(|| format!("0x{msg_type:02x}"));
        self.records.push(Record { round, from, msg_type: name, payload: payload.to_vec() });
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("records serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let records = serde_json::from_str(s).map_err(|e| Error::Param(format!("bad transcript: {e}")))?;
        Ok(Transcript { enabled: true, records })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Session(format!("writing transcript: {e}")))
    }
}
