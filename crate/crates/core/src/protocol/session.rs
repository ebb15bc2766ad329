use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::binomial::binomial_p_value;
use super::plan::{Kind, Stimulus, TrialPlan};
use super::ProtocolError;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Printed alongside every verdict.
pub const VERDICT_CAVEAT: &str = "PASSED reports absence of evidence of discrimination at alpha; \
it does not prove that real and rendered scenes are indistinguishable.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionStatus {
    Open,
    Complete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub trial_index: usize,
    pub choice: Kind,
    /// Milliseconds since the Unix epoch (or a logical clock for simulated subjects).
    pub timestamp_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub plan: TrialPlan,
    pub responses: Vec<Response>,
    pub status: SessionStatus,
}

impl SessionRecord {
    pub fn new(plan: TrialPlan) -> Self {
        Self { plan, responses: Vec::new(), status: SessionStatus::Open }
    }

    pub fn is_complete(&self) -> bool {
        self.status == SessionStatus::Complete
    }

    pub fn response_for(&self, trial_index: usize) -> Option<&Response> {
        self.responses.iter().find(|r| r.trial_index == trial_index)
    }

    /// Lowest trial index without a response.
    pub fn first_unanswered(&self) -> Option<usize> {
        (0..self.plan.n).find(|&i| self.response_for(i).is_none())
    }

    /// Appends a response. Trials may be answered in any order; the session
    /// completes when every trial has exactly one response.
    pub fn record_response(
        &mut self,
        trial_index: usize,
        choice: Kind,
        timestamp_ms: u64,
    ) -> Result<(), ProtocolError> {
        if self.is_complete() {
            return Err(ProtocolError::State(format!("session {} is complete", self.plan.session_id)));
        }
        if trial_index >= self.plan.n {
            return Err(ProtocolError::InvalidArgument(format!(
                "trial {trial_index} out of range for {} trials",
                self.plan.n
            )));
        }
        if self.response_for(trial_index).is_some() {
            return Err(ProtocolError::Conflict(format!("trial {trial_index} already answered")));
        }
        self.responses.push(Response { trial_index, choice, timestamp_ms });
        if self.responses.len() == self.plan.n {
            self.status = SessionStatus::Complete;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// No above-chance discrimination demonstrated.
    #[serde(rename = "PASSED")]
    Passed,
    /// The subject told real from synthetic better than chance.
    #[serde(rename = "FAILED")]
    Failed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Passed => "PASSED (indistinguishable)",
            Verdict::Failed => "FAILED (distinguishable)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub n: u64,
    pub k_correct: u64,
    pub p_value: f64,
    pub alpha: f64,
    pub verdict: Verdict,
}

impl TestResult {
    /// Runs the one-sided binomial test on `k_correct` of `n`.
    pub fn from_counts(n: u64, k_correct: u64, alpha: f64) -> Result<Self, ProtocolError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ProtocolError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let p_value = binomial_p_value(n, k_correct)?;
        let verdict = if p_value > alpha { Verdict::Passed } else { Verdict::Failed };
        Ok(Self { n, k_correct, p_value, alpha, verdict })
    }
}

/// Scores a complete session against the stimuli's true kinds.
pub fn evaluate(session: &SessionRecord, pool: &[Stimulus], alpha: f64) -> Result<TestResult, ProtocolError> {
    if !session.is_complete() {
        return Err(ProtocolError::State(format!(
            "session {} has {} of {} responses",
            session.plan.session_id,
            session.responses.len(),
            session.plan.n
        )));
    }
    let kinds: HashMap<&str, Kind> = pool.iter().map(|s| (s.id.as_str(), s.kind)).collect();
    let mut correct = 0u64;
    for r in &session.responses {
        let id = session
            .plan
            .stimulus_for(r.trial_index)
            .ok_or_else(|| ProtocolError::InvalidArgument(format!("trial {} not in plan", r.trial_index)))?;
        let truth =
            kinds.get(id).ok_or_else(|| ProtocolError::InvalidArgument(format!("stimulus {id} not in pool")))?;
        if *truth == r.choice {
            correct += 1;
        }
    }
    TestResult::from_counts(session.plan.n as u64, correct, alpha)
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;
    use crate::protocol::plan::{plan_trials, PlannedTrial};

    fn pool() -> Vec<Stimulus> {
        vec![
            Stimulus {
                id: "photo".into(),
                kind: Kind::Real,
                image_path: PathBuf::from("p.ppm"),
                provenance: String::new(),
            },
            Stimulus {
                id: "render".into(),
                kind: Kind::Synthetic,
                image_path: PathBuf::from("r.ppm"),
                provenance: String::new(),
            },
        ]
    }

    fn truth(plan: &TrialPlan, i: usize) -> Kind {
        if plan.trials[i].stimulus_id == "photo" {
            Kind::Real
        } else {
            Kind::Synthetic
        }
    }

    #[test]
    fn one_trial_completes() {
        let plan = plan_trials(&pool(), 1, 0).unwrap();
        let mut s = SessionRecord::new(plan);
        s.record_response(0, Kind::Real, 1).unwrap();
        assert!(s.is_complete());
        assert!(matches!(s.record_response(0, Kind::Real, 2), Err(ProtocolError::State(_))));
    }

    #[test]
    fn duplicate_and_out_of_range() {
        let mut s = SessionRecord::new(plan_trials(&pool(), 3, 0).unwrap());
        s.record_response(0, Kind::Real, 1).unwrap();
        assert!(matches!(s.record_response(0, Kind::Synthetic, 2), Err(ProtocolError::Conflict(_))));
        assert!(matches!(s.record_response(3, Kind::Real, 2), Err(ProtocolError::InvalidArgument(_))));
        assert_eq!(s.responses.len(), 1);
    }

    #[test]
    fn any_answer_order() {
        let mut s = SessionRecord::new(plan_trials(&pool(), 2, 0).unwrap());
        assert_eq!(s.first_unanswered(), Some(0));
        s.record_response(1, Kind::Real, 1).unwrap();
        assert_eq!(s.first_unanswered(), Some(0));
        assert!(!s.is_complete());
        s.record_response(0, Kind::Real, 2).unwrap();
        assert!(s.is_complete());
        assert_eq!(s.first_unanswered(), None);
    }

    #[test]
    fn all_correct_fails_the_graphics() {
        let plan = plan_trials(&pool(), 20, 3).unwrap();
        let mut s = SessionRecord::new(plan.clone());
        for i in 0..20 {
            s.record_response(i, truth(&plan, i), i as u64).unwrap();
        }
        let r = evaluate(&s, &pool(), DEFAULT_ALPHA).unwrap();
        assert_eq!((r.n, r.k_correct), (20, 20));
        assert_eq!(r.p_value, 2f64.powi(-20));
        assert_eq!(r.verdict, Verdict::Failed);
    }

    #[test]
    fn chance_performance_passes() {
        let plan = plan_trials(&pool(), 20, 3).unwrap();
        let mut s = SessionRecord::new(plan.clone());
        for i in 0..20 {
            let t = truth(&plan, i);
            s.record_response(i, if i % 2 == 0 { t } else { t.other() }, 0).unwrap();
        }
        let r = evaluate(&s, &pool(), DEFAULT_ALPHA).unwrap();
        assert_eq!(r.k_correct, 10);
        assert!(r.p_value > 0.5);
        assert_eq!(r.verdict, Verdict::Passed);
    }

    #[test]
    fn incomplete_session_cannot_be_evaluated() {
        let s = SessionRecord::new(plan_trials(&pool(), 2, 0).unwrap());
        assert!(matches!(evaluate(&s, &pool(), 0.05), Err(ProtocolError::State(_))));
    }

    #[test]
    fn unknown_stimulus_is_reported() {
        let plan = TrialPlan {
            session_id: "x".into(),
            seed: 0,
            n: 1,
            design: Default::default(),
            trials: vec![PlannedTrial { trial_index: 0, stimulus_id: "ghost".into() }],
        };
        let mut s = SessionRecord::new(plan);
        s.record_response(0, Kind::Real, 0).unwrap();
        assert!(evaluate(&s, &pool(), 0.05).is_err());
    }

    #[test]
    fn verdict_serializes_in_upper_case() {
        let r = TestResult::from_counts(10, 10, 0.05).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"verdict\":\"FAILED\""), "{json}");
        assert!(TestResult::from_counts(10, 5, 0.0).is_err());
        assert!(TestResult::from_counts(10, 5, 1.0).is_err());
    }
}
