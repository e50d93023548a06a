use serde::{Deserialize, Serialize};

use super::{parity, BitString};

/// Code the outcome strings must belong to after exclusion.
///
/// Only the membership predicate matters to the commitment; the default
/// accepts every string.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Code {
    #[default]
    All,
    /// Linear code `{c : H c = 0 (mod 2)}` given by the rows of `H`.
    ParityCheck { rows: Vec<BitString> },
}

impl Code {
    pub fn contains(&self, word: &BitString) -> bool {
        match self {
            Code::All => true,
            Code::ParityCheck { rows } => rows
                .iter()
                .all(|row| parity(row, word).map(|p| p == 0).unwrap_or(false)),
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Code::All)
    }

    pub fn name(&self) -> String {
        match self {
            Code::All => "all".to_string(),
            Code::ParityCheck { rows } => format!("parity_check[{}]", rows.len()),
        }
    }
}
