//! Terminal payoffs and the cooperation-based classification of games.
//!
//! Reward formulas are written for any number of players even though the
//! dialogue itself is two-party.

use serde::{Deserialize, Serialize};

use super::space::{OptionDescriptor, PlayerParams};
use super::GameError;

/// Rewards when every player ends up on the same option.
///
/// `R_i = (omega_i - c_i) + alpha_i * sum_{j != i} (omega_j - c_j)`.
pub fn agreement_rewards(
    params: &[PlayerParams],
    agreed: &OptionDescriptor,
) -> Result<Vec<f64>, GameError> {
    let surplus = params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cost = p.option_cost(agreed);
            if cost.is_finite() {
                Ok(p.omega - cost)
            } else {
                Err(GameError::InfiniteCost { player: i, option: agreed.clone() })
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(weighted(params, &surplus))
}

/// Rewards when players believe they agreed on different options: nobody
/// collects the agreement utility and each pays for the option it believes in.
///
/// `R_i = -c_i(tau_i) - alpha_i * sum_{j != i} c_j(tau_j)`.
///
/// A believed option that is invalid for its believer is charged that
/// player's most expensive valid option, keeping every reward finite.
pub fn misunderstanding_rewards(params: &[PlayerParams], believed: &[OptionDescriptor]) -> Vec<f64> {
    debug_assert_eq!(params.len(), believed.len());
    let costs: Vec<f64> = params
        .iter()
        .zip(believed)
        .map(|(p, opt)| {
            let cost = p.option_cost(opt);
            if cost.is_finite() {
                cost
            } else {
                p.costs.worst_valid_cost()
            }
        })
        .collect();
    params
        .iter()
        .enumerate()
        .map(|(i, p)| -costs[i] - p.alpha * others_sum(&costs, i))
        .collect()
}

fn weighted(params: &[PlayerParams], own: &[f64]) -> Vec<f64> {
    params
        .iter()
        .enumerate()
        .map(|(i, p)| own[i] + p.alpha * others_sum(own, i))
        .collect()
}

fn others_sum(xs: &[f64], skip: usize) -> f64 {
    xs.iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .fold(0.0, |acc, (_, x)| acc + x)
}

/// How a player weighs the others' payoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    Antagonist,
    SelfCentred,
    Cooperative,
}

impl Disposition {
    pub fn of(alpha: f64) -> Self {
        if alpha < 0.0 {
            Disposition::Antagonist
        } else if alpha == 0.0 {
            Disposition::SelfCentred
        } else {
            Disposition::Cooperative
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    ZeroSum,
    FullyCooperative,
    GeneralSum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameClass {
    pub players: Vec<Disposition>,
    pub kind: GameKind,
}

/// Tags each player by the sign of its cooperation weight, and the game as
/// zero-sum (two players, both weights -1), fully cooperative (all weights 1)
/// or general-sum.
pub fn classify_game(alphas: &[f64]) -> GameClass {
    let players = alphas.iter().map(|&a| Disposition::of(a)).collect();
    let kind = if alphas.len() == 2 && alphas.iter().all(|&a| a == -1.0) {
        GameKind::ZeroSum
    } else if !alphas.is_empty() && alphas.iter().all(|&a| a == 1.0) {
        GameKind::FullyCooperative
    } else {
        GameKind::GeneralSum
    };
    GameClass { players, kind }
}
