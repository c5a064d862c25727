use rand::seq::IndexedRandom;
use rand::Rng;

use super::{Agent, AgentRng, Observation};
use crate::game::{ActKind, DialogueAct, OptionDescriptor};

/// Uniform baseline: picks a legal act type uniformly, then a uniform payload.
#[derive(Clone, Debug, Default)]
pub struct RandomAgent;

impl RandomAgent {
    pub fn new() -> Self {
        Self
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, obs: &Observation, rng: &mut AgentRng) -> DialogueAct {
        if let Some(forced) = &obs.legal.forced {
            return forced.clone();
        }
        let kinds: Vec<ActKind> = obs
            .legal
            .kinds
            .iter()
            .copied()
            .filter(|&k| k != ActKind::Accept || obs.can_accept())
            .collect();
        let kind = *kinds.choose(rng).expect("EndDial is always legal");
        match kind {
            ActKind::Accept => DialogueAct::Accept,
            ActKind::EndDial => DialogueAct::EndDial,
            ActKind::AskRepeat => DialogueAct::AskRepeat,
            ActKind::PartialAccept => {
                DialogueAct::PartialAccept(random_subset(&obs.legal.acceptable_slots, rng))
            }
            ActKind::AskPartialRepeat => {
                DialogueAct::AskPartialRepeat(random_subset(&obs.legal.repeatable_slots, rng))
            }
            ActKind::RefProp => DialogueAct::RefProp(OptionDescriptor(
                obs.domain_sizes.iter().map(|&d| rng.random_range(0..d)).collect(),
            )),
            ActKind::PropFeatures => {
                let slots: Vec<usize> = (0..obs.slot_count()).collect();
                DialogueAct::PropFeatures(
                    random_subset(&slots, rng)
                        .into_iter()
                        .map(|k| (k, rng.random_range(0..obs.domain_sizes[k])))
                        .collect(),
                )
            }
        }
    }
}

/// Uniform draw among the non-empty subsets of `items`.
fn random_subset<T: Copy + Ord>(items: &[T], rng: &mut AgentRng) -> std::collections::BTreeSet<T> {
    assert!(!items.is_empty() && items.len() < 64);
    let mask: u64 = rng.random_range(1..(1u64 << items.len()));
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &x)| x)
        .collect()
}
