//! Size guards for exhaustive enumerations.

use crate::error::{Error, Result};

pub const DEFAULT_CONFIG_CAP: u64 = 1 << 26;
pub const DEFAULT_COVER_CAP: u64 = 1 << 24;

/// Upper bounds on the raw configuration space and on the number of covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub config: u64,
    pub cover: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { config: DEFAULT_CONFIG_CAP, cover: DEFAULT_COVER_CAP }
    }
}

impl Caps {
    /// Defaults overridden by `GCB_CONFIG_CAP` and `GCB_COVER_CAP` when set.
    pub fn from_env() -> Self {
        let read = |key: &str, default: u64| {
            std::env::var(key)
                .ok()
                .and_then(|v| v.trim().parse::<u64>().ok())
                .unwrap_or(default)
        };
        Caps {
            config: read("GCB_CONFIG_CAP", DEFAULT_CONFIG_CAP),
            cover: read("GCB_COVER_CAP", DEFAULT_COVER_CAP),
        }
    }

    pub(crate) fn check_config(&self, size: Option<u128>) -> Result<()> {
        check(self.config, size, "configuration space")
    }

    pub(crate) fn check_cover(&self, size: Option<u128>) -> Result<()> {
        check(self.cover, size, "cover set")
    }
}

fn check(cap: u64, size: Option<u128>, what: &'static str) -> Result<()> {
    match size {
        Some(s) if s <= cap as u128 => Ok(()),
        Some(s) => Err(Error::CapExceeded { what, size: s.to_string(), cap }),
        None => Err(Error::CapExceeded { what, size: "> 2^128".into(), cap }),
    }
}
