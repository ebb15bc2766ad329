//! End-to-end run of the test protocol with a simulated subject.
//!
//! Two stimuli are rendered from the Cornell preset: a converged render
//! standing in for the photograph, and a 4-sample render as the synthetic
//! image. A threshold observer compares each against an independently
//! seeded converged render. The session goes through the same log the
//! service writes, and the result is recomputed from the file alone.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use gts_core::protocol::{
    critical_k, evaluate, mean_abs_difference, plan_trials, simulate_subject, Kind, SimulatedObserver, Stimulus,
    TestResult, Verdict,
};
use gts_core::render::{presets, render, RenderConfig};
use serde::Serialize;

use crate::log::{read_log, replay, LogRecord, SessionLog, LOG_FILE_NAME};
use crate::manifest::StimulusManifest;
use crate::HarnessError;

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub out_dir: PathBuf,
    pub size: u32,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Accuracy-mode calibration run after the end-to-end flow.
    pub calibration: Option<Calibration>,
}

impl SelftestOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self { out_dir: out_dir.into(), size: 32, trials: 8, alpha: 0.05, seed: 1, calibration: None }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Calibration {
    pub accuracy: f64,
    pub seeds: u64,
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CalibrationSummary {
    pub accuracy: f64,
    pub trials: usize,
    pub seeds: u64,
    pub passed: u64,
    pub passed_fraction: f64,
    /// Probability that one session passes, from the binomial distribution.
    pub expected_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub session_id: String,
    pub log_path: PathBuf,
    pub manifest_path: PathBuf,
    pub real_difference: f64,
    pub synthetic_difference: f64,
    pub threshold: f64,
    pub result: TestResult,
    pub replayed: TestResult,
    pub replay_identical: bool,
    pub calibration: Option<CalibrationSummary>,
}

/// P[session passes] for an observer of accuracy `q`: P[K < k_crit] with
/// K ~ Binomial(n, q).
pub fn pass_probability(n: usize, q: f64, alpha: f64) -> Result<f64, HarnessError> {
    let k_crit = match critical_k(n as u64, alpha)? {
        Some(k) => k as usize,
        None => return Ok(1.0),
    };
    let term = |k: usize| -> f64 {
        let ln_choose: f64 = (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum();
        let (a, b) = (k as f64 * q.ln(), (n - k) as f64 * (1.0 - q).ln());
        // 0 * ln 0 is 0 here.
        let a = if k == 0 { 0.0 } else { a };
        let b = if k == n { 0.0 } else { b };
        (ln_choose + a + b).exp()
    };
    Ok((0..k_crit).map(term).sum::<f64>().min(1.0))
}

pub fn calibrate(pool: &[Stimulus], c: Calibration, alpha: f64) -> Result<CalibrationSummary, HarnessError> {
    if c.seeds == 0 {
        return Err(HarnessError::User("calibration needs at least one seed".into()));
    }
    let mut passed = 0;
    for seed in 0..c.seeds {
        let plan = plan_trials(pool, c.trials, seed)?;
        let observer = SimulatedObserver::with_accuracy(c.accuracy, seed ^ 0xA5A5_5A5A_0F0F_F0F0)?;
        let session = simulate_subject(&observer, &plan, pool)?;
        if evaluate(&session, pool, alpha)?.verdict == Verdict::Passed {
            passed += 1;
        }
    }
    Ok(CalibrationSummary {
        accuracy: c.accuracy,
        trials: c.trials,
        seeds: c.seeds,
        passed,
        passed_fraction: passed as f64 / c.seeds as f64,
        expected_fraction: pass_probability(c.trials, c.accuracy, alpha)?,
    })
}

fn render_to(path: &Path, size: u32, spp: u32, seed: u64) -> Result<(), HarnessError> {
    let scene = presets::cornell_box();
    let camera = presets::cornell_camera(size, size);
    render(&scene, &camera, &RenderConfig::new(spp, 8, seed))?.image.save(path)?;
    Ok(())
}

pub fn run(opts: &SelftestOptions) -> Result<SelftestReport, HarnessError> {
    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::User(format!("{}: {e}", dir.display())))?;
    let stimuli_dir = dir.join("stimuli");
    std::fs::create_dir_all(&stimuli_dir).map_err(|e| HarnessError::User(format!("{}: {e}", stimuli_dir.display())))?;

    let converged = 256;
    render_to(&stimuli_dir.join("real.png"), opts.size, converged, opts.seed.wrapping_mul(3))?;
    render_to(&stimuli_dir.join("synthetic.png"), opts.size, 4, opts.seed.wrapping_mul(3) + 1)?;
    render_to(&stimuli_dir.join("reference.png"), opts.size, converged, opts.seed.wrapping_mul(3) + 2)?;

    let manifest = StimulusManifest::new(
        "stimuli",
        vec![
            Stimulus {
                id: "real".into(),
                kind: Kind::Real,
                image_path: "real.png".into(),
                provenance: format!("converged render, {converged} spp, standing in for a photograph"),
            },
            Stimulus {
                id: "synthetic".into(),
                kind: Kind::Synthetic,
                image_path: "synthetic.png".into(),
                provenance: "4 spp render".into(),
            },
        ],
    );
    let manifest_path = dir.join("manifest.toml");
    std::fs::write(&manifest_path, manifest.to_toml())
        .map_err(|e| HarnessError::Internal(format!("{}: {e}", manifest_path.display())))?;
    let pool = StimulusManifest::load(&manifest_path)?.pool();

    let reference = stimuli_dir.join("reference.png");
    let real_difference = mean_abs_difference(&pool[0].image_path, &reference)?;
    let synthetic_difference = mean_abs_difference(&pool[1].image_path, &reference)?;
    let threshold = 0.5 * (real_difference + synthetic_difference);
    let references: HashMap<String, PathBuf> = pool.iter().map(|s| (s.id.clone(), reference.clone())).collect();
    let observer = SimulatedObserver::with_threshold(threshold, references)?;

    let mut plan = plan_trials(&pool, opts.trials, opts.seed)?;
    let session_id = format!("selftest-{:016x}", opts.seed);
    plan.session_id = session_id.clone();
    let session = simulate_subject(&observer, &plan, &pool)?;
    let result = evaluate(&session, &pool, opts.alpha)?;

    let log_path = dir.join(LOG_FILE_NAME);
    if log_path.exists() {
        std::fs::remove_file(&log_path).map_err(|e| HarnessError::User(format!("{}: {e}", log_path.display())))?;
    }
    let mut log = SessionLog::open(&log_path)?;
    log.append(&LogRecord::PlanCreated {
        session_id: session_id.clone(),
        alpha: opts.alpha,
        plan: plan.clone(),
        stimuli: pool.clone(),
    })?;
    for r in &session.responses {
        log.append(&LogRecord::Response {
            session_id: session_id.clone(),
            trial_index: r.trial_index,
            choice: r.choice,
            timestamp_ms: r.timestamp_ms,
        })?;
    }
    log.append(&LogRecord::Evaluation { session_id: session_id.clone(), result: result.clone() })?;
    drop(log);

    let replayed_sessions = replay(&read_log(&log_path)?)?;
    let replayed = match replayed_sessions.as_slice() {
        [one] => one.result()?,
        other => return Err(HarnessError::Internal(format!("log replays to {} sessions", other.len()))),
    };
    let bytes = |r: &TestResult| serde_json::to_vec(r).expect("results serialize");
    let replay_identical = bytes(&result) == bytes(&replayed);

    let calibration = opts.calibration.map(|c| calibrate(&pool, c, opts.alpha)).transpose()?;
    Ok(SelftestReport {
        session_id,
        log_path,
        manifest_path,
        real_difference,
        synthetic_difference,
        threshold,
        result,
        replayed,
        replay_identical,
        calibration,
    })
}
