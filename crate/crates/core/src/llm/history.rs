use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub const DEFAULT_HISTORY_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub user_command: String,
    pub generated_code: String,
}

/// Prior (command, validated code) pairs, oldest first. Entries are never
/// edited; once the cap is reached the oldest one is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeHistory {
    cap: usize,
    entries: VecDeque<Exchange>,
}

impl ExchangeHistory {
    pub fn new(cap: usize) -> Self {
        Self {
            cap: cap.max(1),
            entries: VecDeque::new(),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &Exchange> + '_ {
        self.entries.iter()
    }

    /// Owned copy for readers outside the session loop.
    pub fn snapshot(&self) -> Vec<Exchange> {
        self.entries.iter().cloned().collect()
    }

    /// Append one exchange. `code` should be the pretty-printed validated
    /// program, not the raw completion.
    pub fn append(&mut self, command: impl Into<String>, code: impl Into<String>) {
        if self.entries.len() == self.cap {
            self.entries.pop_front();
        }
        self.entries.push_back(Exchange {
            user_command: command.into(),
            generated_code: code.into(),
        });
    }
}

impl Default for ExchangeHistory {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY_CAP)
    }
}
