//! The discrimination test: subjects see a shuffled mix of real and rendered
//! images and label each one. The rendering passes when the labels are no
//! better than chance under a one-sided exact binomial test.

mod binomial;
mod observer;
mod plan;
mod session;

use thiserror::Error;

pub use self::binomial::{binomial_p_value, critical_k};
pub use self::observer::{mean_abs_difference, simulate_subject, ObserverMode, SimulatedObserver};
pub use self::plan::{plan_trials, plan_trials_with, Design, Kind, PlannedTrial, Stimulus, TrialPlan};
pub use self::session::{
    evaluate, Response, SessionRecord, SessionStatus, TestResult, Verdict, DEFAULT_ALPHA, VERDICT_CAVEAT,
};

/// Default number of trials per session.
pub const DEFAULT_TRIALS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("image {0}: {1}")]
    Image(String, String),
}

/// Verifies the stimulus image decodes.
pub fn check_stimulus(stimulus: &Stimulus) -> Result<(), ProtocolError> {
    observer::load_rgb8(&stimulus.image_path).map(|_| ())
}
