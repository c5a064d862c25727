//! Players: the agent interface, what an agent gets to see, and three
//! reference policies.

mod abstraction;
mod qlearning;
mod random;
mod rule_based;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{
    ActKind, DialogueAct, Game, GameError, GameState, LegalActs, Mode, OptionDescriptor, Player,
    PlayerParams,
};
use crate::perception::PerceivedUtterance;

pub use abstraction::{AbstractState, ConfidenceBucket, TURN_BUCKETS};
pub use qlearning::{AbstractAct, QLearningAgent, QLearningConfig, QTable, QTableError, Step};
pub use random::RandomAgent;
pub use rule_based::{rule_based_policy, RuleBasedAgent, RuleBasedConfig};

/// Random stream handed to agents.
pub type AgentRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Train,
    Eval,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Eval => "eval",
        }
    }
}

/// Where an episode sits in a benchmark run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpisodeContext {
    pub phase: Phase,
    pub index: u64,
    /// Number of episodes in this phase.
    pub total: u64,
}

impl EpisodeContext {
    pub fn eval() -> Self {
        Self { phase: Phase::Eval, index: 0, total: 1 }
    }
}

/// A decision maker for one side of the dialogue.
pub trait Agent {
    fn name(&self) -> &str;

    fn begin_episode(&mut self, _ctx: &EpisodeContext) {}

    /// Chooses the next act. Must return a legal act and never accept an
    /// option whose own cost is infinite.
    fn act(&mut self, obs: &Observation, rng: &mut AgentRng) -> DialogueAct;

    /// Terminal reward of the episode that just ended.
    fn end_episode(&mut self, _reward: f64) {}

    /// Learned value table, for agents that have one.
    fn value_table(&self) -> Option<&QTable> {
        None
    }
}

/// One feature slot as the observing player sees it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotView {
    /// The value this player holds for the slot.
    pub value: Option<usize>,
    pub proposer: Option<Player>,
    pub agreed: bool,
    /// Score attached to `value` when it was heard from the other player.
    pub confidence: Option<f64>,
}

/// Everything a player legitimately knows when it has to act: its own
/// parameters, its own view of the grounding ledger and what it last heard.
/// Never the opponent's costs or the true content of misheard utterances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub player: Player,
    pub mode: Mode,
    pub turn: u32,
    pub t_max: u32,
    pub domain_sizes: Vec<usize>,
    pub params: PlayerParams,
    pub ledger: Vec<SlotView>,
    /// The opponent's most recent utterance as this player perceived it.
    pub last_heard: Option<PerceivedUtterance>,
    pub own_last_act: Option<DialogueAct>,
    pub legal: LegalActs,
}

impl Observation {
    /// Builds `player`'s view. `slot_confidence` holds, per slot, the score
    /// with which the player heard its current value (None for values it
    /// proposed itself).
    pub fn build(
        game: &Game,
        state: &GameState,
        player: Player,
        slot_confidence: &[Option<f64>],
        last_heard: Option<&PerceivedUtterance>,
    ) -> Result<Self, GameError> {
        let legal = game.legal_acts(state, player)?;
        let ledger = state
            .slots()
            .iter()
            .zip(slot_confidence)
            .map(|(slot, &confidence)| SlotView {
                value: slot.heard[player.index()],
                proposer: slot.proposer,
                agreed: slot.agreed,
                confidence,
            })
            .collect();
        Ok(Self {
            player,
            mode: game.mode(),
            turn: state.turn(),
            t_max: game.t_max(),
            domain_sizes: game.space().domain_sizes(),
            params: game.params(player).clone(),
            ledger,
            last_heard: last_heard.cloned(),
            own_last_act: state.last_spoken(player).cloned(),
            legal,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.ledger.len()
    }

    pub fn believed_option(&self) -> Option<OptionDescriptor> {
        self.ledger
            .iter()
            .map(|s| s.value)
            .collect::<Option<Vec<_>>>()
            .map(OptionDescriptor)
    }

    /// Accept is legal and the believed option is valid for this player.
    pub fn can_accept(&self) -> bool {
        self.legal.allows(ActKind::Accept)
            && self
                .believed_option()
                .is_some_and(|opt| self.params.option_cost(&opt).is_finite())
    }

    /// Own valid options, cheapest first.
    pub fn ranked_options(&self) -> Vec<(OptionDescriptor, f64)> {
        self.params.costs.ranked_options()
    }

    /// Proposal of the whole option `opt` in the act form of the current mode.
    pub fn full_proposal(&self, opt: &OptionDescriptor) -> DialogueAct {
        match self.mode {
            Mode::Simple => DialogueAct::RefProp(opt.clone()),
            Mode::Compounded => DialogueAct::propose_option(opt),
        }
    }
}
