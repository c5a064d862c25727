//! Turning a scenario config into a concrete game.
//!
//! Sampling order, all from one stream: when any player's costs are
//! sampled, one uniform draw per option (in option index order) decides
//! whether that option is invalid for both players; then, for the system and
//! then the user, one draw per option for the option costs followed by one
//! draw per feature value (slot by slot) for the feature costs. Constant
//! distributions draw nothing.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::config::{CostDistribution, CostSpec, Preset, ScenarioConfig};
use super::{seed, HarnessError};
use crate::game::{CostTable, FeatureSpace, Game, Player, PlayerParams};

/// The config with its preset folded into the player specs.
pub fn apply_preset(config: &ScenarioConfig) -> ScenarioConfig {
    let mut c = config.clone();
    let Some(preset) = c.preset else { return c };
    for player in Player::BOTH {
        let spec = c.player_mut(player);
        match preset {
            Preset::Appointment => match &mut spec.costs {
                CostSpec::Sampled { feature, .. } => *feature = CostDistribution::Constant { value: 0.0 },
                CostSpec::Fixed { feature_value_costs, .. } => *feature_value_costs = None,
            },
            Preset::Furniture => match &mut spec.costs {
                CostSpec::Sampled { option, .. } => *option = CostDistribution::Constant { value: 0.0 },
                CostSpec::Fixed { option_costs, .. } => {
                    for c in option_costs.iter_mut().filter(|c| c.is_finite()) {
                        *c = 0.0;
                    }
                }
            },
            Preset::Zerosum => spec.alpha = -1.0,
            Preset::Coop => spec.alpha = 1.0,
        }
    }
    c
}

/// Builds the game of `config`, sampling costs from `rng`.
pub fn build_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Game, HarnessError> {
    config.validate()?;
    let config = apply_preset(config);
    let space = config.space.build()?;
    let n = space.option_count();

    let any_sampled = Player::BOTH
        .iter()
        .any(|&p| matches!(config.player(p).costs, CostSpec::Sampled { .. }));
    let invalid: Vec<bool> = if any_sampled {
        (0..n).map(|_| rng.random::<f64>() < config.invalid_probability).collect()
    } else {
        vec![false; n]
    };
    if invalid.iter().all(|&x| x) {
        return Err(HarnessError::Config("every option is invalid".into()));
    }

    let mut players = Vec::with_capacity(2);
    for player in Player::BOTH {
        let spec = config.player(player);
        let costs = match &spec.costs {
            CostSpec::Sampled { option, feature } => {
                let mut option_costs: Vec<f64> = (0..n).map(|_| sample(option, rng)).collect();
                for (c, _) in option_costs.iter_mut().zip(&invalid).filter(|(_, &inv)| inv) {
                    *c = f64::INFINITY;
                }
                let feature_costs = space
                    .domain_sizes()
                    .iter()
                    .map(|&d| (0..d).map(|_| sample(feature, rng)).collect())
                    .collect();
                CostTable::new(&space, option_costs, feature_costs)
            }
            CostSpec::Fixed { option_costs, feature_value_costs } => {
                let feature_costs = feature_value_costs.clone().unwrap_or_else(|| zero_features(&space));
                CostTable::new(&space, option_costs.clone(), feature_costs)
            }
        }
        .map_err(|e| HarnessError::Config(format!("{player}: {e}")))?;
        players.push(PlayerParams {
            omega: spec.omega,
            alpha: spec.alpha,
            costs,
            conf_centre_wrong: spec.conf_centre_wrong,
            conf_centre_right: spec.conf_centre_right,
            error_rate: spec.error_rate,
            slot_error_rates: spec.slot_error_rates.clone(),
        });
    }
    Ok(Game::new(space, players, config.mode, config.t_max)?)
}

/// Builds the game with the cost stream derived from the master seed.
pub fn build_seeded_scenario(config: &ScenarioConfig) -> Result<Game, HarnessError> {
    let mut rng = seed::environment_rng(seed::scenario_seed(config.seed));
    build_scenario(config, &mut rng)
}

fn zero_features(space: &FeatureSpace) -> Vec<Vec<f64>> {
    space.domain_sizes().iter().map(|&d| vec![0.0; d]).collect()
}

fn sample<R: Rng + ?Sized>(dist: &CostDistribution, rng: &mut R) -> f64 {
    match *dist {
        CostDistribution::Uniform { low, high } => {
            if low == high {
                low
            } else {
                rng.random_range(low..high)
            }
        }
        CostDistribution::Constant { value } => value,
        CostDistribution::Exponential { mean } => {
            Exp::new(1.0 / mean).expect("validated positive mean").sample(rng)
        }
    }
}
