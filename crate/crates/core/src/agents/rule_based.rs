//! A handcrafted negotiator, usable as a fixed simulated user.
//!
//! In order of priority it:
//! 1. leaves once `patience` of its proposals have been met with a counter-proposal;
//! 2. asks for a repeat of opponent-proposed values heard with confidence below `theta`
//!    (the whole last utterance when that covers exactly those slots);
//! 3. accepts a fully grounded option whose own cost is within `kappa` times its
//!    cheapest cost;
//! 4. otherwise proposes its cheapest valid option that differs from the one on
//!    the table.

use serde::{Deserialize, Serialize};

use super::{Agent, AgentRng, Observation};
use crate::game::{ActKind, DialogueAct, Mode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleBasedConfig {
    /// Accept when own cost <= kappa * own cheapest cost. May be infinite.
    pub kappa: f64,
    /// Minimum confidence for trusting a heard value.
    pub theta: f64,
    /// Counter-proposals tolerated before leaving.
    pub patience: u32,
    /// Propose only the slots that differ from the current table instead of a full option.
    pub partial_proposals: bool,
}

impl Default for RuleBasedConfig {
    fn default() -> Self {
        Self { kappa: 1.5, theta: 0.5, patience: 3, partial_proposals: false }
    }
}

impl RuleBasedConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.kappa.is_nan() || self.kappa < 1.0 {
            return Err(format!("kappa must be >= 1, got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(format!("theta must lie in [0, 1], got {}", self.theta));
        }
        Ok(())
    }
}

/// Deterministic decision of the rule-based policy, given how many of its
/// proposals were already rejected.
pub fn rule_based_policy(obs: &Observation, config: &RuleBasedConfig, rejections: u32) -> DialogueAct {
    if let Some(forced) = &obs.legal.forced {
        return forced.clone();
    }
    if rejections >= config.patience {
        return DialogueAct::EndDial;
    }

    let me = obs.player;
    let doubtful: Vec<usize> = obs
        .ledger
        .iter()
        .enumerate()
        .filter(|(_, s)| s.proposer == Some(me.other()) && s.confidence.is_some_and(|c| c < config.theta))
        .map(|(k, _)| k)
        .collect();
    if !doubtful.is_empty() {
        let last_named = obs
            .last_heard
            .as_ref()
            .filter(|u| u.act.carries_values())
            .map(|u| u.act.named_slots());
        let whole = obs.mode == Mode::Simple || last_named.as_deref() == Some(doubtful.as_slice());
        if whole && obs.legal.allows(ActKind::AskRepeat) {
            return DialogueAct::AskRepeat;
        }
        if !whole && obs.legal.allows(ActKind::AskPartialRepeat) {
            return DialogueAct::AskPartialRepeat(doubtful.into_iter().collect());
        }
    }

    let ranked = obs.ranked_options();
    let cheapest = ranked.first().map(|(_, c)| *c).expect("cost tables hold a valid option");
    let believed = obs.believed_option();
    if obs.can_accept() {
        let opt = believed.as_ref().expect("accept implies grounding");
        let cost = obs.params.option_cost(opt);
        let affordable = config.kappa.is_infinite() || cost <= config.kappa * cheapest;
        let trusted = obs
            .ledger
            .iter()
            .all(|s| s.proposer != Some(me.other()) || s.confidence.is_none_or(|c| c >= config.theta));
        if affordable && trusted {
            return DialogueAct::Accept;
        }
    }

    let target = ranked
        .iter()
        .map(|(opt, _)| opt)
        .find(|opt| believed.as_ref() != Some(*opt))
        .unwrap_or(&ranked[0].0);
    if config.partial_proposals && obs.mode == Mode::Compounded {
        let diff: std::collections::BTreeMap<usize, usize> = target
            .values()
            .iter()
            .enumerate()
            .filter(|&(k, &v)| obs.ledger[k].value != Some(v))
            .map(|(k, &v)| (k, v))
            .collect();
        if !diff.is_empty() {
            return DialogueAct::PropFeatures(diff);
        }
    }
    obs.full_proposal(target)
}

#[derive(Clone, Debug, Default)]
pub struct RuleBasedAgent {
    config: RuleBasedConfig,
    rejections: u32,
}

impl RuleBasedAgent {
    pub fn new(config: RuleBasedConfig) -> Self {
        Self { config, rejections: 0 }
    }

    pub fn config(&self) -> &RuleBasedConfig {
        &self.config
    }

    pub fn rejections(&self) -> u32 {
        self.rejections
    }
}

impl Agent for RuleBasedAgent {
    fn name(&self) -> &str {
        "rule_based"
    }

    fn begin_episode(&mut self, _ctx: &super::EpisodeContext) {
        self.rejections = 0;
    }

    fn act(&mut self, obs: &Observation, _rng: &mut AgentRng) -> DialogueAct {
        let proposed_last = obs.own_last_act.as_ref().is_some_and(DialogueAct::carries_values);
        let countered = obs.last_heard.as_ref().is_some_and(|u| u.act.carries_values());
        if proposed_last && countered {
            self.rejections += 1;
        }
        rule_based_policy(obs, &self.config, self.rejections)
    }
}
