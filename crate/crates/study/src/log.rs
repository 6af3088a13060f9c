//! Line-delimited session logs: a header record followed by one record per
//! event, appended in order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{SessionEvent, SessionHeader};

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("log is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A header and its events, as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub header: SessionHeader,
    pub events: Vec<SessionEvent>,
}

impl SessionLog {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for e in &self.events {
            write_event(&mut w, e)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, LogError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(l) if l.trim().is_empty()));
        let (_, first) = lines.next().ok_or(LogError::Empty)?;
        let header = serde_json::from_str(&first?).map_err(|source| LogError::Parse { line: 1, source })?;
        let mut events = Vec::new();
        for (i, line) in lines {
            let e = serde_json::from_str(&line?).map_err(|source| LogError::Parse { line: i + 1, source })?;
            events.push(e);
        }
        Ok(Self { header, events })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        Self::read_from(text.as_bytes())
    }
}

/// Appends one event record.
pub fn write_event<W: Write>(mut w: W, event: &SessionEvent) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, event)?;
    w.write_all(b"\n")
}
