//! Tabular Q-learning over [`AbstractState`].
//!
//! The game pays only at termination, so an episode's steps are buffered and
//! updated in one backward sweep once the reward is known.
//!
//! Value tables are stored as tab-separated text, one entry per line:
//!
//! ```text
//! state<TAB>act<TAB>value
//! g=0010;c=mid;o=prop_features;t=0<TAB>propose_1<TAB>0.4375
//! ```
//!
//! Lines starting with `#` are comments. Values use Rust's shortest
//! round-trip float formatting, so save followed by load is lossless.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AbstractState, Agent, AgentRng, EpisodeContext, Observation, Phase};
use crate::game::{ActKind, DialogueAct};

/// The learner's action alphabet. Payloads are filled in from the observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AbstractAct {
    Accept,
    /// Agree to every slot that holds an unagreed value.
    PartialAccept,
    /// Propose the own `n`-th cheapest valid option in full.
    Propose(u8),
    AskRepeat,
    /// Ask for the opponent-proposed slots heard below the upper confidence
    /// threshold, or all of them when none is.
    AskPartialRepeat,
    EndDial,
}

impl AbstractAct {
    /// Acts available in `obs`, in canonical order.
    pub fn available(obs: &Observation, max_proposals: usize) -> Vec<AbstractAct> {
        let mut acts = Vec::new();
        if obs.can_accept() {
            acts.push(AbstractAct::Accept);
        }
        if obs.legal.allows(ActKind::PartialAccept) {
            acts.push(AbstractAct::PartialAccept);
        }
        let proposals = obs.params.costs.ranked_options().len().min(max_proposals);
        acts.extend((0..proposals).map(|r| AbstractAct::Propose(r as u8)));
        if obs.legal.allows(ActKind::AskRepeat) {
            acts.push(AbstractAct::AskRepeat);
        }
        if obs.legal.allows(ActKind::AskPartialRepeat) {
            acts.push(AbstractAct::AskPartialRepeat);
        }
        acts.push(AbstractAct::EndDial);
        acts
    }

    /// The concrete act this stands for in `obs`.
    pub fn concretise(self, obs: &Observation, theta_hi: f64) -> DialogueAct {
        match self {
            AbstractAct::Accept => DialogueAct::Accept,
            AbstractAct::PartialAccept => {
                DialogueAct::PartialAccept(obs.legal.acceptable_slots.iter().copied().collect())
            }
            AbstractAct::Propose(r) => {
                let ranked = obs.ranked_options();
                obs.full_proposal(&ranked[r as usize].0)
            }
            AbstractAct::AskRepeat => DialogueAct::AskRepeat,
            AbstractAct::AskPartialRepeat => {
                let repeatable = &obs.legal.repeatable_slots;
                let doubtful: std::collections::BTreeSet<usize> = repeatable
                    .iter()
                    .copied()
                    .filter(|&k| obs.ledger[k].confidence.is_some_and(|c| c < theta_hi))
                    .collect();
                if doubtful.is_empty() {
                    DialogueAct::AskPartialRepeat(repeatable.iter().copied().collect())
                } else {
                    DialogueAct::AskPartialRepeat(doubtful)
                }
            }
            AbstractAct::EndDial => DialogueAct::EndDial,
        }
    }
}

impl fmt::Display for AbstractAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractAct::Accept => f.write_str("accept"),
            AbstractAct::PartialAccept => f.write_str("partial_accept"),
            AbstractAct::Propose(r) => write!(f, "propose_{r}"),
            AbstractAct::AskRepeat => f.write_str("ask_repeat"),
            AbstractAct::AskPartialRepeat => f.write_str("ask_partial_repeat"),
            AbstractAct::EndDial => f.write_str("end_dial"),
        }
    }
}

impl FromStr for AbstractAct {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "accept" => AbstractAct::Accept,
            "partial_accept" => AbstractAct::PartialAccept,
            "ask_repeat" => AbstractAct::AskRepeat,
            "ask_partial_repeat" => AbstractAct::AskPartialRepeat,
            "end_dial" => AbstractAct::EndDial,
            _ => {
                let rank = s
                    .strip_prefix("propose_")
                    .and_then(|r| r.parse().ok())
                    .ok_or_else(|| format!("unknown act key {s:?}"))?;
                AbstractAct::Propose(rank)
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the training episodes over which epsilon decays linearly.
    pub decay_fraction: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Number of own cheapest options the learner may propose.
    pub max_proposals: usize,
    /// Value of table entries never updated.
    pub initial_value: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            discount: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            decay_fraction: 0.8,
            theta_lo: 0.33,
            theta_hi: 0.66,
            max_proposals: 4,
            initial_value: 0.0,
        }
    }
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1], got {x}"))
            }
        };
        unit("learning_rate", self.learning_rate)?;
        unit("discount", self.discount)?;
        unit("epsilon_start", self.epsilon_start)?;
        unit("epsilon_end", self.epsilon_end)?;
        unit("decay_fraction", self.decay_fraction)?;
        unit("theta_lo", self.theta_lo)?;
        unit("theta_hi", self.theta_hi)?;
        if self.theta_lo > self.theta_hi {
            return Err(format!("theta_lo {} exceeds theta_hi {}", self.theta_lo, self.theta_hi));
        }
        if self.max_proposals == 0 || self.max_proposals > u8::MAX as usize {
            return Err(format!("max_proposals must lie in 1..=255, got {}", self.max_proposals));
        }
        if !self.initial_value.is_finite() {
            return Err("initial_value must be finite".into());
        }
        Ok(())
    }

    /// Exploration rate for training episode `index` of `total`.
    pub fn epsilon(&self, index: u64, total: u64) -> f64 {
        let span = self.decay_fraction * total as f64;
        if span <= 0.0 || index as f64 >= span {
            return self.epsilon_end;
        }
        let progress = index as f64 / span;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * progress
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QTableError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One decision of an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub state: AbstractState,
    /// Acts that were available in `state`.
    pub available: Vec<AbstractAct>,
    pub act: AbstractAct,
}

/// Action values keyed by abstract state. Entries absent from the table hold
/// the default value passed to the accessors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QTable {
    entries: BTreeMap<AbstractState, BTreeMap<AbstractAct, f64>>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, state: &AbstractState, act: AbstractAct) -> Option<f64> {
        self.entries.get(state)?.get(&act).copied()
    }

    pub fn set(&mut self, state: AbstractState, act: AbstractAct, value: f64) {
        self.entries.entry(state).or_default().insert(act, value);
    }

    pub fn value(&self, state: &AbstractState, act: AbstractAct, default: f64) -> f64 {
        self.get(state, act).unwrap_or(default)
    }

    /// Highest value among `acts` and the first act attaining it.
    pub fn best(&self, state: &AbstractState, acts: &[AbstractAct], default: f64) -> Option<(AbstractAct, f64)> {
        let mut best: Option<(AbstractAct, f64)> = None;
        for &a in acts {
            let q = self.value(state, a, default);
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((a, q));
            }
        }
        best
    }

    /// Highest stored value in `state`, if any entry exists.
    pub fn greedy_value(&self, state: &AbstractState) -> Option<f64> {
        self.entries.get(state)?.values().copied().reduce(f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AbstractState, AbstractAct, f64)> {
        self.entries
            .iter()
            .flat_map(|(s, acts)| acts.iter().map(move |(&a, &q)| (s, a, q)))
    }

    /// Backward sweep over one finished episode. The last step's target is
    /// `reward`; every earlier step bootstraps from the best available act
    /// of the step after it.
    pub fn update(&mut self, trajectory: &[Step], reward: f64, learning_rate: f64, discount: f64, default: f64) {
        let mut target = reward;
        for (i, step) in trajectory.iter().enumerate().rev() {
            if i + 1 < trajectory.len() {
                let next = &trajectory[i + 1];
                let (_, best) = self
                    .best(&next.state, &next.available, default)
                    .expect("a recorded step has at least one available act");
                target = discount * best;
            }
            let q = self.value(&step.state, step.act, default);
            self.set(step.state, step.act, q + learning_rate * (target - q));
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# state\tact\tvalue\n");
        for (s, a, q) in self.iter() {
            out.push_str(&format!("{s}\t{a}\t{q:?}\n"));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, QTableError> {
        let mut table = QTable::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let parse_err = |reason: String| QTableError::Parse { line: line_no, reason };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, a, q] = fields[..] else {
                return Err(parse_err(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            let state: AbstractState = s.parse().map_err(|e: super::abstraction::ParseStateError| parse_err(e.to_string()))?;
            let act: AbstractAct = a.parse().map_err(parse_err)?;
            let value: f64 = q.parse().map_err(|_| parse_err(format!("bad value {q:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(format!("non-finite value {q:?}")));
            }
            table.set(state, act, value);
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<(), QTableError> {
        std::fs::write(path, self.to_tsv()).map_err(|source| QTableError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, QTableError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| QTableError::Io { path: path.to_path_buf(), source })?;
        Self::from_tsv(&text)
    }
}

/// Epsilon-greedy tabular learner. Learns during training episodes and acts
/// greedily, without updating, during evaluation.
#[derive(Clone, Debug)]
pub struct QLearningAgent {
    config: QLearningConfig,
    table: QTable,
    trajectory: Vec<Step>,
    epsilon: f64,
    learning: bool,
}

impl QLearningAgent {
    pub fn new(config: QLearningConfig) -> Self {
        Self::with_table(config, QTable::new())
    }

    pub fn with_table(config: QLearningConfig, table: QTable) -> Self {
        Self { config, table, trajectory: Vec::new(), epsilon: 0.0, learning: false }
    }

    pub fn config(&self) -> &QLearningConfig {
        &self.config
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Value of the best known act in `state`.
    pub fn greedy_value(&self, state: &AbstractState) -> Option<f64> {
        self.table.greedy_value(state)
    }

    pub fn abstract_state(&self, obs: &Observation) -> AbstractState {
        AbstractState::from_observation(obs, self.config.theta_lo, self.config.theta_hi)
    }
}

impl Agent for QLearningAgent {
    fn name(&self) -> &str {
        "q_learning"
    }

    fn begin_episode(&mut self, ctx: &EpisodeContext) {
        self.trajectory.clear();
        match ctx.phase {
            Phase::Train => {
                self.learning = true;
                self.epsilon = self.config.epsilon(ctx.index, ctx.total);
            }
            Phase::Eval => {
                self.learning = false;
                self.epsilon = 0.0;
            }
        }
    }

    fn act(&mut self, obs: &Observation, rng: &mut AgentRng) -> DialogueAct {
        if let Some(forced) = &obs.legal.forced {
            return forced.clone();
        }
        let state = self.abstract_state(obs);
        let available = AbstractAct::available(obs, self.config.max_proposals);
        let act = if self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon {
            *available.choose(rng).expect("EndDial is always available")
        } else {
            self.table
                .best(&state, &available, self.config.initial_value)
                .expect("EndDial is always available")
                .0
        };
        if self.learning {
            self.trajectory.push(Step { state, available, act });
        }
        act.concretise(obs, self.config.theta_hi)
    }

    fn end_episode(&mut self, reward: f64) {
        if self.learning && !self.trajectory.is_empty() {
            let c = &self.config;
            self.table
                .update(&self.trajectory, reward, c.learning_rate, c.discount, c.initial_value);
        }
        self.trajectory.clear();
    }

    fn value_table(&self) -> Option<&QTable> {
        Some(&self.table)
    }
}
