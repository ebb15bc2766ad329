use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::plan::{Kind, Stimulus, TrialPlan};
use super::session::SessionRecord;
use super::ProtocolError;

/// How a simulated subject decides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ObserverMode {
    /// Answers correctly with independent probability `q` per trial.
    Accuracy { q: f64 },
    /// Calls a stimulus synthetic when its mean absolute 8-bit difference from
    /// the paired reference image (in `[0, 1]`) exceeds `tau`.
    Threshold { tau: f64, references: HashMap<String, PathBuf> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedObserver {
    pub mode: ObserverMode,
    pub seed: u64,
}

impl SimulatedObserver {
    pub fn with_accuracy(q: f64, seed: u64) -> Result<Self, ProtocolError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(ProtocolError::InvalidArgument(format!("accuracy q must lie in [0, 1], got {q}")));
        }
        Ok(Self { mode: ObserverMode::Accuracy { q }, seed })
    }

    pub fn with_threshold(tau: f64, references: HashMap<String, PathBuf>) -> Result<Self, ProtocolError> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(ProtocolError::InvalidArgument(format!("threshold must be finite and >= 0, got {tau}")));
        }
        Ok(Self { mode: ObserverMode::Threshold { tau, references }, seed: 0 })
    }
}

/// Mean absolute difference of two images' 8-bit RGB values, scaled to `[0, 1]`.
pub fn mean_abs_difference(a: &Path, b: &Path) -> Result<f64, ProtocolError> {
    let ia = load_rgb8(a)?;
    let ib = load_rgb8(b)?;
    if ia.dimensions() != ib.dimensions() {
        return Err(ProtocolError::InvalidArgument(format!("{} and {} differ in size", a.display(), b.display())));
    }
    let total: u64 = ia.as_raw().iter().zip(ib.as_raw()).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    Ok(total as f64 / (ia.as_raw().len().max(1) as f64 * 255.0))
}

pub(crate) fn load_rgb8(path: &Path) -> Result<image::RgbImage, ProtocolError> {
    Ok(image::open(path).map_err(|e| ProtocolError::Image(path.display().to_string(), e.to_string()))?.to_rgb8())
}

/// Runs `observer` through every trial of `plan`, in order. Response
/// timestamps are the trial index (a logical clock).
pub fn simulate_subject(
    observer: &SimulatedObserver,
    plan: &TrialPlan,
    pool: &[Stimulus],
) -> Result<SessionRecord, ProtocolError> {
    let by_id: HashMap<&str, &Stimulus> = pool.iter().map(|s| (s.id.as_str(), s)).collect();
    let stimulus = |i: usize| -> Result<&Stimulus, ProtocolError> {
        let id = plan
            .stimulus_for(i)
            .ok_or_else(|| ProtocolError::InvalidArgument(format!("trial {i} missing from plan")))?;
        by_id.get(id).copied().ok_or_else(|| ProtocolError::InvalidArgument(format!("stimulus {id} not in pool")))
    };

    let mut session = SessionRecord::new(plan.clone());
    match &observer.mode {
        ObserverMode::Accuracy { q } => {
            let mut rng = ChaCha8Rng::seed_from_u64(observer.seed);
            for i in 0..plan.n {
                let truth = stimulus(i)?.kind;
                let correct = rng.random::<f64>() < *q;
                session.record_response(i, if correct { truth } else { truth.other() }, i as u64)?;
            }
        }
        ObserverMode::Threshold { tau, references } => {
            let mut cache: HashMap<&str, f64> = HashMap::new();
            for i in 0..plan.n {
                let s = stimulus(i)?;
                let diff = match cache.get(s.id.as_str()) {
                    Some(d) => *d,
                    None => {
                        let reference = references.get(&s.id).ok_or_else(|| {
                            ProtocolError::InvalidArgument(format!("no paired reference image for stimulus {}", s.id))
                        })?;
                        let d = mean_abs_difference(&s.image_path, reference)?;
                        cache.insert(s.id.as_str(), d);
                        d
                    }
                };
                let choice = if diff > *tau { Kind::Synthetic } else { Kind::Real };
                session.record_response(i, choice, i as u64)?;
            }
        }
    }
    Ok(session)
}
