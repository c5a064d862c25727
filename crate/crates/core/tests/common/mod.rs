//! Shared fixtures and reference implementations for the integration tests.
//!
//! The enumerator below re-states the turn rules on its own small state type
//! and walks every play sequence without memoisation, so it shares no search
//! or bookkeeping code with the library solver.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use negotiation_game::agents::{Agent, AgentRng, Observation};
use negotiation_game::game::{
    CostTable, DialogueAct, FeatureSpace, Game, Mode, OptionDescriptor, PlayerParams,
};

/// Raw description of a two-player instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub sizes: Vec<usize>,
    pub mode: Mode,
    pub omega: [f64; 2],
    pub alpha: [f64; 2],
    /// Per player, indexed by option (slot 0 most significant).
    pub option_costs: [Vec<f64>; 2],
    /// Per player, per slot, per value.
    pub feature_costs: [Vec<Vec<f64>>; 2],
}

impl Instance {
    pub fn option_count(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn option(&self, mut index: usize) -> Vec<usize> {
        let mut values = vec![0; self.sizes.len()];
        for slot in (0..self.sizes.len()).rev() {
            values[slot] = index % self.sizes[slot];
            index /= self.sizes[slot];
        }
        values
    }

    pub fn index(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.sizes).fold(0, |acc, (&v, &d)| acc * d + v)
    }

    /// Option cost: own term plus one term per feature value, summed left to right.
    pub fn cost(&self, player: usize, values: &[usize]) -> f64 {
        let own = self.option_costs[player][self.index(values)];
        if own.is_infinite() {
            return f64::INFINITY;
        }
        let mut total = own;
        for (slot, &v) in values.iter().enumerate() {
            total += self.feature_costs[player][slot][v];
        }
        total
    }

    pub fn agreement(&self, values: &[usize]) -> [f64; 2] {
        let s = [self.omega[0] - self.cost(0, values), self.omega[1] - self.cost(1, values)];
        [s[0] + self.alpha[0] * s[1], s[1] + self.alpha[1] * s[0]]
    }

    pub fn misagreement(&self, believed: [&[usize]; 2]) -> [f64; 2] {
        let c = [self.cost(0, believed[0]), self.cost(1, believed[1])];
        [-c[0] - self.alpha[0] * c[1], -c[1] - self.alpha[1] * c[0]]
    }

    pub fn game(&self, t_max: u32) -> Game {
        let space = FeatureSpace::with_sizes(&self.sizes).unwrap();
        let players = (0..2)
            .map(|i| {
                let costs =
                    CostTable::new(&space, self.option_costs[i].clone(), self.feature_costs[i].clone()).unwrap();
                PlayerParams { omega: self.omega[i], alpha: self.alpha[i], ..PlayerParams::new(costs) }
            })
            .collect();
        Game::new(space, players, self.mode, t_max).unwrap()
    }

    /// Random costs in [0, 1), omega in [0.5, 1.5), alpha in [-1, 1], with
    /// options invalid for both players at rate `invalid` (never all).
    pub fn random<R: Rng>(rng: &mut R, sizes: &[usize], mode: Mode, invalid: f64) -> Self {
        let n: usize = sizes.iter().product();
        let mut mask: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < invalid).collect();
        if mask.iter().all(|&m| m) {
            mask[rng.random_range(0..n)] = false;
        }
        let mut option_costs = [Vec::new(), Vec::new()];
        let mut feature_costs = [Vec::new(), Vec::new()];
        for i in 0..2 {
            option_costs[i] = mask
                .iter()
                .map(|&m| if m { f64::INFINITY } else { rng.random() })
                .collect();
            feature_costs[i] = sizes.iter().map(|&d| (0..d).map(|_| rng.random::<f64>() * 0.5).collect()).collect();
        }
        Self {
            sizes: sizes.to_vec(),
            mode,
            omega: [rng.random_range(0.5..1.5), rng.random_range(0.5..1.5)],
            alpha: [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)],
            option_costs,
            feature_costs,
        }
    }
}

#[derive(Clone, Debug)]
enum Pending {
    None,
    Whole,
    Slots(BTreeSet<usize>),
}

/// Noiseless dialogue state: both players hold the same values.
#[derive(Clone, Debug)]
struct Node {
    turn: u32,
    mover: usize,
    values: Vec<Option<usize>>,
    proposer: Vec<Option<usize>>,
    agreed: Vec<bool>,
    last: [Option<DialogueAct>; 2],
    pending: Pending,
}

/// Result of the reference enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Enumerated {
    pub values: [f64; 2],
    pub root_act: DialogueAct,
    pub leaves: u64,
}

/// Plays out every act sequence of at most `horizon` turns. Each mover picks
/// the act maximising its own reward; the first act in canonical order wins
/// ties. Accepting an option invalid for the accepter is never tried.
pub fn enumerate(inst: &Instance, horizon: u32, first: usize) -> Enumerated {
    let ell = inst.sizes.len();
    let root = Node {
        turn: 0,
        mover: first,
        values: vec![None; ell],
        proposer: vec![None; ell],
        agreed: vec![false; ell],
        last: [None, None],
        pending: Pending::None,
    };
    let mut leaves = 0;
    let (values, act) = search(inst, horizon.max(1), &root, &mut leaves);
    Enumerated { values, root_act: act.unwrap(), leaves }
}

fn search(inst: &Instance, horizon: u32, node: &Node, leaves: &mut u64) -> ([f64; 2], Option<DialogueAct>) {
    let me = node.mover;
    let mut best: Option<([f64; 2], DialogueAct)> = None;
    for act in moves(inst, node) {
        let values = match step(inst, horizon, node, &act) {
            Ok(rewards) => {
                *leaves += 1;
                rewards
            }
            Err(next) => search(inst, horizon, &next, leaves).0,
        };
        if best.as_ref().is_none_or(|(v, _)| values[me] > v[me]) {
            best = Some((values, act));
        }
    }
    let (v, a) = best.unwrap();
    (v, Some(a))
}

fn nonempty_subsets(items: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << items.len()) {
        out.push((0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect());
    }
    out
}

fn moves(inst: &Instance, node: &Node) -> Vec<DialogueAct> {
    let me = node.mover;
    let ell = inst.sizes.len();
    match &node.pending {
        Pending::Whole => return vec![node.last[me].clone().unwrap()],
        Pending::Slots(ks) => {
            return vec![DialogueAct::PropFeatures(ks.iter().map(|&k| (k, node.values[k].unwrap())).collect())]
        }
        Pending::None => {}
    }
    let grounded = node.values.iter().all(Option::is_some);
    let other_spoke = node.last[1 - me].is_some();
    let mut acts = Vec::new();
    if grounded {
        let believed: Vec<usize> = node.values.iter().map(|v| v.unwrap()).collect();
        if inst.cost(me, &believed).is_finite() {
            acts.push(DialogueAct::Accept);
        }
    }
    match inst.mode {
        Mode::Simple => {
            for i in 0..inst.option_count() {
                acts.push(DialogueAct::RefProp(OptionDescriptor(inst.option(i))));
            }
            if other_spoke {
                acts.push(DialogueAct::AskRepeat);
            }
        }
        Mode::Compounded => {
            let open: Vec<usize> = (0..ell).filter(|&k| node.values[k].is_some() && !node.agreed[k]).collect();
            acts.extend(nonempty_subsets(&open).into_iter().map(DialogueAct::PartialAccept));
            // Digit 0 leaves the slot out, digit v + 1 proposes value v.
            let radix: Vec<usize> = inst.sizes.iter().map(|d| d + 1).collect();
            let total: usize = radix.iter().product();
            for code in 1..total {
                let mut digits = vec![0; ell];
                let mut rest = code;
                for k in (0..ell).rev() {
                    digits[k] = rest % radix[k];
                    rest /= radix[k];
                }
                let assign: BTreeMap<usize, usize> =
                    (0..ell).filter(|&k| digits[k] > 0).map(|k| (k, digits[k] - 1)).collect();
                acts.push(DialogueAct::PropFeatures(assign));
            }
            if other_spoke {
                acts.push(DialogueAct::AskRepeat);
                let theirs: Vec<usize> = (0..ell).filter(|&k| node.proposer[k] == Some(1 - me)).collect();
                acts.extend(nonempty_subsets(&theirs).into_iter().map(DialogueAct::AskPartialRepeat));
            }
        }
    }
    acts.push(DialogueAct::EndDial);
    acts
}

/// `Ok(rewards)` at a terminal, `Err(next)` otherwise.
fn step(inst: &Instance, horizon: u32, node: &Node, act: &DialogueAct) -> Result<[f64; 2], Box<Node>> {
    let me = node.mover;
    let mut next = Box::new(node.clone());
    next.pending = Pending::None;
    match act {
        DialogueAct::Accept => {
            let believed: Vec<usize> = node.values.iter().map(|v| v.unwrap()).collect();
            return Ok(inst.agreement(&believed));
        }
        DialogueAct::EndDial => return Ok([0.0, 0.0]),
        DialogueAct::RefProp(opt) => {
            for (k, &v) in opt.0.iter().enumerate() {
                next.values[k] = Some(v);
                next.proposer[k] = Some(me);
                next.agreed[k] = false;
            }
        }
        DialogueAct::PropFeatures(assign) => {
            for (&k, &v) in assign {
                next.values[k] = Some(v);
                next.proposer[k] = Some(me);
                next.agreed[k] = false;
            }
        }
        DialogueAct::PartialAccept(ks) => {
            for &k in ks {
                next.agreed[k] = true;
            }
        }
        DialogueAct::AskRepeat => next.pending = Pending::Whole,
        DialogueAct::AskPartialRepeat(ks) => next.pending = Pending::Slots(ks.clone()),
    }
    next.last[me] = Some(act.clone());
    next.turn += 1;
    next.mover = 1 - me;
    if next.turn >= horizon {
        return Ok([0.0, 0.0]);
    }
    Err(next)
}

/// Empirical probability that a score from `right` beats one from `wrong`,
/// ties counting one half.
pub fn paired_auc(right: &[f64], wrong: &[f64]) -> f64 {
    assert_eq!(right.len(), wrong.len());
    let wins: f64 = right
        .iter()
        .zip(wrong)
        .map(|(r, w)| if r > w { 1.0 } else if r == w { 0.5 } else { 0.0 })
        .sum();
    wins / right.len() as f64
}

/// Accepts as soon as it can, otherwise proposes its cheapest option in full.
pub struct EagerAccepter;

impl Agent for EagerAccepter {
    fn name(&self) -> &str {
        "eager"
    }

    fn act(&mut self, obs: &Observation, _rng: &mut AgentRng) -> DialogueAct {
        if let Some(forced) = &obs.legal.forced {
            return forced.clone();
        }
        if obs.can_accept() {
            return DialogueAct::Accept;
        }
        obs.full_proposal(&obs.ranked_options()[0].0)
    }
}
