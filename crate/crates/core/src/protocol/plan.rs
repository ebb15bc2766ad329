use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;

/// Ground truth of a stimulus, and the two answers a subject may give.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Synthetic,
}

impl Kind {
    pub fn other(self) -> Kind {
        match self {
            Kind::Real => Kind::Synthetic,
            Kind::Synthetic => Kind::Real,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Real => "real",
            Kind::Synthetic => "synthetic",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = ProtocolError;
    fn from_str(s: &str) -> Result<Self, ProtocolError> {
        match s {
            "real" => Ok(Kind::Real),
            "synthetic" => Ok(Kind::Synthetic),
            other => Err(ProtocolError::InvalidArgument(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub id: String,
    pub kind: Kind,
    pub image_path: PathBuf,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// Real and synthetic counts differ by at most one.
    #[default]
    Balanced,
    /// Each trial's kind is an independent fair coin.
    Bernoulli,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTrial {
    pub trial_index: usize,
    pub stimulus_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub session_id: String,
    pub seed: u64,
    pub n: usize,
    #[serde(default)]
    pub design: Design,
    pub trials: Vec<PlannedTrial>,
}

impl TrialPlan {
    pub fn stimulus_for(&self, trial_index: usize) -> Option<&str> {
        self.trials.get(trial_index).map(|t| t.stimulus_id.as_str())
    }
}

/// Balanced plan; see [`plan_trials_with`].
pub fn plan_trials(pool: &[Stimulus], n: usize, seed: u64) -> Result<TrialPlan, ProtocolError> {
    plan_trials_with(pool, n, seed, Design::Balanced)
}

/// Draws `n` trials from `pool` with a ChaCha8 stream seeded by `seed`.
///
/// The per-trial kinds are fixed first (balanced: `n/2` of one kind and the
/// rest of the other, the odd one out chosen by coin; Bernoulli: a coin per
/// trial), then shuffled. Stimuli of each kind are dealt from a shuffled copy
/// of that kind's pool, reshuffling whenever it runs out.
pub fn plan_trials_with(pool: &[Stimulus], n: usize, seed: u64, design: Design) -> Result<TrialPlan, ProtocolError> {
    if n == 0 {
        return Err(ProtocolError::InvalidArgument("trial count must be >= 1".into()));
    }
    let reals: Vec<&Stimulus> = pool.iter().filter(|s| s.kind == Kind::Real).collect();
    let synths: Vec<&Stimulus> = pool.iter().filter(|s| s.kind == Kind::Synthetic).collect();
    if reals.is_empty() || synths.is_empty() {
        return Err(ProtocolError::InvalidArgument(
            "stimulus pool needs at least one real and one synthetic stimulus".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<Kind> = match design {
        Design::Balanced => {
            let (mut first, mut second) = (Kind::Real, Kind::Synthetic);
            if rng.random::<bool>() {
                std::mem::swap(&mut first, &mut second);
            }
            let half = n / 2;
            std::iter::repeat_n(first, half).chain(std::iter::repeat_n(second, n - half)).collect()
        }
        Design::Bernoulli => (0..n).map(|_| if rng.random::<bool>() { Kind::Real } else { Kind::Synthetic }).collect(),
    };
    kinds.shuffle(&mut rng);

    let mut real_deck = Deck::new(reals);
    let mut synth_deck = Deck::new(synths);
    let trials = kinds
        .iter()
        .enumerate()
        .map(|(trial_index, kind)| {
            let deck = match kind {
                Kind::Real => &mut real_deck,
                Kind::Synthetic => &mut synth_deck,
            };
            PlannedTrial { trial_index, stimulus_id: deck.deal(&mut rng).id.clone() }
        })
        .collect();

    Ok(TrialPlan { session_id: format!("plan-{seed:016x}-{n}"), seed, n, design, trials })
}

struct Deck<'a> {
    cards: Vec<&'a Stimulus>,
    next: usize,
}

impl<'a> Deck<'a> {
    fn new(cards: Vec<&'a Stimulus>) -> Self {
        let next = cards.len();
        Self { cards, next }
    }

    fn deal(&mut self, rng: &mut ChaCha8Rng) -> &'a Stimulus {
        if self.next == self.cards.len() {
            self.cards.shuffle(rng);
            self.next = 0;
        }
        self.next += 1;
        self.cards[self.next - 1]
    }
}
