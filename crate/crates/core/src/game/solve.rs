//! Exact backward induction over the noiseless game tree.
//!
//! Each player maximises its own terminal reward (a general-sum best
//! response; for zero-sum games this is minimax). Ties keep the first act in
//! the canonical order of [`Game::enumerate_acts`]. Accepting an option the
//! accepter itself knows to be invalid is never considered, mirroring the
//! restriction every agent obeys.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::act::DialogueAct;
use super::state::{Game, GameState, Player, Transition};
use super::GameError;

/// Largest estimated tree the solver agrees to search.
pub const MAX_TREE_NODES: f64 = 1e7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub first: Player,
    pub horizon: u32,
    /// Game value per player, indexed by [`Player::index`].
    pub values: [f64; 2],
    pub root_act: DialogueAct,
    /// Distinct states expanded.
    pub states: usize,
}

/// Estimated number of nodes in the full tree of depth `horizon`.
pub fn estimated_tree_size(game: &Game, horizon: u32) -> f64 {
    let b = game.max_branching() as f64;
    (0..=horizon).map(|t| b.powi(t as i32)).sum()
}

/// Solves `game` up to `horizon` turns, starting with `first`. Dialogues that
/// reach the horizon time out with zero rewards.
pub fn solve_exhaustive(game: &Game, horizon: u32, first: Player) -> Result<Solution, GameError> {
    if !game.is_noiseless() {
        return Err(GameError::NoisyConfiguration);
    }
    let estimate = estimated_tree_size(game, horizon);
    if estimate > MAX_TREE_NODES {
        return Err(GameError::TreeTooLarge { estimate, limit: MAX_TREE_NODES });
    }
    let game = game.with_t_max(horizon.max(1))?;
    let mut solver = Solver { game: &game, memo: HashMap::new() };
    let root = game.initial_state(first);
    let (values, act) = solver.value(&root)?;
    Ok(Solution {
        first,
        horizon,
        values,
        root_act: act.expect("a non-terminal root has at least one act"),
        states: solver.memo.len(),
    })
}

type Node = ([f64; 2], Option<DialogueAct>);

struct Solver<'g> {
    game: &'g Game,
    memo: HashMap<GameState, Node>,
}

impl Solver<'_> {
    fn value(&mut self, state: &GameState) -> Result<Node, GameError> {
        if let Some(node) = self.memo.get(state) {
            return Ok(node.clone());
        }
        let mover = state.active();
        let me = mover.index();
        let mut best: Option<Node> = None;
        for act in self.game.enumerate_acts(state)? {
            if act == DialogueAct::Accept && !self.accepter_can_afford(state, mover) {
                continue;
            }
            let values = match self.game.apply_act(state, &act, &act)? {
                Transition::Terminal(_, outcome) => [outcome.rewards[0], outcome.rewards[1]],
                Transition::Ongoing(next) => self.value(&next)?.0,
            };
            if best.as_ref().is_none_or(|(v, _)| values[me] > v[me]) {
                best = Some((values, Some(act)));
            }
        }
        let node = best.expect("EndDial is always legal");
        self.memo.insert(state.clone(), node.clone());
        Ok(node)
    }

    fn accepter_can_afford(&self, state: &GameState, accepter: Player) -> bool {
        state
            .believed_option(accepter)
            .is_some_and(|opt| self.game.params(accepter).option_cost(&opt).is_finite())
    }
}
