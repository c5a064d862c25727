//! Scenario files.
//!
//! A scenario is a TOML document. Everything except `schema`, `seed`, the
//! feature space and the agents has a default:
//!
//! ```toml
//! schema = 1
//! name = "appointment"
//! seed = 7
//! mode = "compounded"          # or "simple"
//! t_max = 50
//! noise_spread = 0.2
//! first_speaker = "random"     # or "system", "user"
//! invalid_probability = 0.0    # chance that a sampled option is invalid for both players
//! preset = "appointment"       # optional: appointment, furniture, zerosum, coop
//!
//! [space]
//! domain_sizes = [3, 2]        # or: features = [{ name = "day", values = ["mon", "tue"] }]
//!
//! [system]
//! omega = 1.0
//! alpha = 0.0
//! error_rate = 0.2             # how often the system mishears a value said by the user
//! conf_centre_wrong = -1.0
//! conf_centre_right = 1.0
//! costs = { kind = "sampled", option = { family = "uniform", low = 0.0, high = 1.0 } }
//!
//! [user]
//! costs = { kind = "fixed", option_costs = [0.1, 0.5, 0.3, 0.2, 0.9, 0.4] }
//!
//! [agents]
//! system = { kind = "q_learning", learning_rate = 0.1 }
//! user = { kind = "rule_based", kappa = 1.5, theta = 0.5, patience = 3 }
//!
//! [episodes]
//! train = 10000
//! eval = 1000
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::{
    Agent, QLearningAgent, QLearningConfig, RandomAgent, RuleBasedAgent, RuleBasedConfig,
};
use crate::game::{Feature, FeatureSpace, GameError, Mode, Player, DEFAULT_T_MAX};
use crate::perception::NOISE_SPREAD;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    /// Master seed of the run.
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_t_max")]
    pub t_max: u32,
    #[serde(default = "default_spread")]
    pub noise_spread: f64,
    #[serde(default)]
    pub first_speaker: FirstSpeaker,
    #[serde(default)]
    pub invalid_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub space: SpaceSpec,
    pub system: PlayerSpec,
    pub user: PlayerSpec,
    pub agents: AgentsSpec,
    #[serde(default)]
    pub episodes: EpisodeCounts,
}

fn default_t_max() -> u32 {
    DEFAULT_T_MAX
}

fn default_spread() -> f64 {
    NOISE_SPREAD
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstSpeaker {
    /// Drawn from the episode's environment stream.
    #[default]
    Random,
    System,
    User,
}

/// Cost and cooperation templates from the task archetypes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Appointment scheduling: costs attach to whole options, feature values are free.
    Appointment,
    /// Furniture shopping: costs attach to feature values, options are free unless invalid.
    Furniture,
    /// Both players antagonistic, `alpha = -1`.
    Zerosum,
    /// Both players fully cooperative, `alpha = 1`.
    Coop,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Appointment, Preset::Furniture, Preset::Zerosum, Preset::Coop];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Appointment => "appointment",
            Preset::Furniture => "furniture",
            Preset::Zerosum => "zerosum",
            Preset::Coop => "coop",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset {s:?} (expected appointment, furniture, zerosum or coop)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Sizes { domain_sizes: Vec<usize> },
    Named { features: Vec<Feature> },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<FeatureSpace, GameError> {
        match self {
            SpaceSpec::Sizes { domain_sizes } => FeatureSpace::with_sizes(domain_sizes),
            SpaceSpec::Named { features } => FeatureSpace::new(features.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerSpec {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub error_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_error_rates: Option<Vec<f64>>,
    #[serde(default = "minus_one")]
    pub conf_centre_wrong: f64,
    #[serde(default = "one")]
    pub conf_centre_right: f64,
    #[serde(default)]
    pub costs: CostSpec,
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

impl Default for PlayerSpec {
    fn default() -> Self {
        Self {
            omega: 1.0,
            alpha: 0.0,
            error_rate: 0.0,
            slot_error_rates: None,
            conf_centre_wrong: -1.0,
            conf_centre_right: 1.0,
            costs: CostSpec::default(),
        }
    }
}

/// How a player's cost table is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    /// Per-option costs and per-value feature costs drawn independently.
    Sampled {
        #[serde(default)]
        option: CostDistribution,
        #[serde(default)]
        feature: CostDistribution,
    },
    /// Explicit tables; `inf` marks an invalid option. Feature costs default to zero.
    Fixed {
        option_costs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        feature_value_costs: Option<Vec<Vec<f64>>>,
    },
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::Sampled { option: CostDistribution::default(), feature: CostDistribution::default() }
    }
}

/// A distribution over non-negative costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostDistribution {
    Uniform { low: f64, high: f64 },
    Constant { value: f64 },
    Exponential { mean: f64 },
}

impl Default for CostDistribution {
    fn default() -> Self {
        CostDistribution::Uniform { low: 0.0, high: 1.0 }
    }
}

impl CostDistribution {
    fn validate(&self) -> Result<(), String> {
        match *self {
            CostDistribution::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && 0.0 <= low && low <= high) {
                    return Err(format!("uniform cost bounds need 0 <= low <= high, got [{low}, {high}]"));
                }
            }
            CostDistribution::Constant { value } => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(format!("constant cost must be finite and >= 0, got {value}"));
                }
            }
            CostDistribution::Exponential { mean } => {
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(format!("exponential cost mean must be finite and > 0, got {mean}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSpec {
    pub system: AgentSpec,
    pub user: AgentSpec,
}

impl AgentsSpec {
    pub fn get(&self, player: Player) -> &AgentSpec {
        match player {
            Player::System => &self.system,
            Player::User => &self.user,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Random,
    RuleBased(RuleBasedConfig),
    QLearning(QLearningConfig),
}

impl AgentSpec {
    pub fn build(&self) -> Box<dyn Agent> {
        match self {
            AgentSpec::Random => Box::new(RandomAgent::new()),
            AgentSpec::RuleBased(c) => Box::new(RuleBasedAgent::new(*c)),
            AgentSpec::QLearning(c) => Box::new(QLearningAgent::new(*c)),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            AgentSpec::Random => Ok(()),
            AgentSpec::RuleBased(c) => c.validate(),
            AgentSpec::QLearning(c) => c.validate(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeCounts {
    #[serde(default)]
    pub train: u64,
    #[serde(default)]
    pub eval: u64,
}

impl ScenarioConfig {
    /// A small appointment-style scenario with rule-based players.
    pub fn builtin() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            name: "default".into(),
            seed: 0,
            mode: Mode::Compounded,
            t_max: DEFAULT_T_MAX,
            noise_spread: NOISE_SPREAD,
            first_speaker: FirstSpeaker::Random,
            invalid_probability: 0.0,
            preset: Some(Preset::Appointment),
            space: SpaceSpec::Named {
                features: vec![
                    Feature { name: "day".into(), values: vec!["mon".into(), "tue".into(), "wed".into()] },
                    Feature { name: "moment".into(), values: vec!["morning".into(), "afternoon".into()] },
                ],
            },
            system: PlayerSpec { error_rate: 0.1, ..PlayerSpec::default() },
            user: PlayerSpec::default(),
            agents: AgentsSpec {
                system: AgentSpec::RuleBased(RuleBasedConfig::default()),
                user: AgentSpec::RuleBased(RuleBasedConfig::default()),
            },
            episodes: EpisodeCounts { train: 0, eval: 1000 },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs serialise to TOML")
    }

    pub fn player(&self, player: Player) -> &PlayerSpec {
        match player {
            Player::System => &self.system,
            Player::User => &self.user,
        }
    }

    pub fn player_mut(&mut self, player: Player) -> &mut PlayerSpec {
        match player {
            Player::System => &mut self.system,
            Player::User => &mut self.user,
        }
    }

    /// Copy with `preset` recorded; it takes effect when the scenario is built.
    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = Some(preset);
        self
    }

    /// Checks everything that can be checked before sampling costs.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (this build reads schema {SCHEMA_VERSION})", self.schema));
        }
        if self.t_max == 0 {
            return bad("t_max must be at least 1".into());
        }
        if !(self.noise_spread.is_finite() && self.noise_spread > 0.0) {
            return bad(format!("noise_spread must be finite and > 0, got {}", self.noise_spread));
        }
        if !(0.0..1.0).contains(&self.invalid_probability) {
            return bad(format!(
                "invalid_probability must lie in [0, 1), got {}",
                self.invalid_probability
            ));
        }
        self.space.build()?;
        for player in Player::BOTH {
            let spec = self.player(player);
            let ctx = |msg: String| HarnessError::Config(format!("{player}: {msg}"));
            if let CostSpec::Sampled { option, feature } = &spec.costs {
                option.validate().map_err(ctx)?;
                feature.validate().map_err(ctx)?;
            }
            if spec.slot_error_rates.is_some() && self.mode == Mode::Simple {
                return Err(ctx("slot_error_rates need compounded mode".into()));
            }
            self.agents.get(player).validate().map_err(ctx)?;
        }
        let user = &self.user;
        if user.error_rate != 0.0 || user.slot_error_rates.as_ref().is_some_and(|r| r.iter().any(|&x| x != 0.0)) {
            return bad("the user always hears the system correctly: user error rates must be 0".into());
        }
        if let (CostSpec::Fixed { option_costs: a, .. }, CostSpec::Fixed { option_costs: b, .. }) =
            (&self.system.costs, &self.user.costs)
        {
            let differ = a.iter().zip(b).any(|(x, y)| x.is_infinite() != y.is_infinite());
            if a.len() == b.len() && differ {
                return bad("fixed cost tables must mark the same options invalid".into());
            }
        }
        if self.invalid_probability > 0.0
            && Player::BOTH.iter().any(|&p| matches!(self.player(p).costs, CostSpec::Fixed { .. }))
        {
            return bad("invalid_probability applies to sampled costs only".into());
        }
        Ok(())
    }
}
