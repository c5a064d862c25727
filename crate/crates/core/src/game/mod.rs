//! Game rules: feature spaces and costs, the dialogue-act alphabet, terminal
//! rewards, legality, the transition function and an exact solver.

mod act;
mod reward;
mod solve;
mod space;
mod state;

pub use act::{ActKind, DialogueAct};
pub use reward::{
    agreement_rewards, classify_game, misunderstanding_rewards, Disposition, GameClass, GameKind,
};
pub use solve::{estimated_tree_size, solve_exhaustive, Solution, MAX_TREE_NODES};
pub use space::{option_cost, CostTable, Feature, FeatureSpace, OptionDescriptor, PlayerParams};
pub use state::{
    EpisodeOutcome, Game, GameState, LegalActs, Mode, OutcomeKind, Player, RepeatRequest,
    SlotLedger, Transition, Utterance, DEFAULT_T_MAX,
};

/// Contract violations and invalid inputs raised by the game rules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GameError {
    #[error("invalid feature space: {0}")]
    InvalidSpace(String),
    #[error("invalid cost table: {0}")]
    InvalidCosts(String),
    #[error("invalid player parameters: {0}")]
    InvalidParams(String),
    #[error("malformed act {act}: {reason}")]
    MalformedAct { act: String, reason: String },
    #[error("illegal act {act} by {player} at turn {turn}")]
    IllegalAct { player: Player, turn: u32, act: String },
    #[error("{player} is not the active player")]
    NotActive { player: Player },
    #[error("the dialogue is already over")]
    TerminalState,
    #[error("option {option:?} has infinite cost for player {player}")]
    InfiniteCost { player: usize, option: OptionDescriptor },
    #[error("the exhaustive solver needs a noiseless game (all error rates 0)")]
    NoisyConfiguration,
    #[error("estimated game tree of {estimate:.3e} nodes exceeds the limit of {limit:.0e}")]
    TreeTooLarge { estimate: f64, limit: f64 },
}
