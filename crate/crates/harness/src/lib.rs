//! Command line and HTTP front end for the `gts-core` lab.
//!
//! * [`cli`] implements the `gtt` binary (`render`, `measure`, `scale`,
//!   `simulate`, `sweep`, `serve`, `analyze`, `selftest`).
//! * [`service`] serves discrimination-test sessions over HTTP/JSON.
//! * [`log`] is the append-only session log both of them write and replay.
//! * [`manifest`] loads the stimulus set a service draws trials from.
//!
//! ```bash
//! cargo run --release -p gts-harness --example session_service
//! cargo run --release -p gts-harness --example selftest
//! ```

pub mod cli;
pub mod log;
pub mod manifest;
pub mod report;
pub mod selftest;
pub mod service;

use gts_core::distsim::SimError;
use gts_core::protocol::ProtocolError;
use gts_core::render::RenderError;
use gts_core::scale::ScaleError;
use thiserror::Error;

/// Errors split by who has to fix them. The CLI maps [`HarnessError::User`]
/// to exit code 1 and [`HarnessError::Internal`] to 2.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::User(_) => 1,
            HarnessError::Internal(_) => 2,
        }
    }
}

impl From<ProtocolError> for HarnessError {
    fn from(e: ProtocolError) -> Self {
        HarnessError::User(e.to_string())
    }
}

impl From<ScaleError> for HarnessError {
    fn from(e: ScaleError) -> Self {
        HarnessError::User(e.to_string())
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        HarnessError::User(e.to_string())
    }
}

impl From<RenderError> for HarnessError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::Encode(..) | RenderError::Internal(_) => HarnessError::Internal(e.to_string()),
            _ => HarnessError::User(e.to_string()),
        }
    }
}

/// Milliseconds since the Unix epoch.
pub(crate) fn now_ms() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}
