//! Feature spaces, options and per-player cost tables.
//!
//! An option is a full assignment of one value to every feature slot. Every
//! assignment is an option; options that make no sense in the task (a Sunday
//! appointment at a closed office) stay in the option set and carry an
//! infinite cost.

use serde::{Deserialize, Serialize};

use super::GameError;

/// One feature slot and its finite value domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub values: Vec<String>,
}

/// The ordered feature slots of a game. Induces the option set as the
/// cartesian product of the slot domains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Feature>", into = "Vec<Feature>")]
pub struct FeatureSpace {
    features: Vec<Feature>,
}

impl FeatureSpace {
    pub fn new(features: Vec<Feature>) -> Result<Self, GameError> {
        if features.is_empty() {
            return Err(GameError::InvalidSpace("at least one feature slot is required".into()));
        }
        for (slot, feature) in features.iter().enumerate() {
            if feature.values.len() < 2 {
                return Err(GameError::InvalidSpace(format!(
                    "feature slot {slot} ({}) has {} value(s); at least 2 are required",
                    feature.name,
                    feature.values.len()
                )));
            }
            let mut seen = feature.values.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != feature.values.len() {
                return Err(GameError::InvalidSpace(format!(
                    "feature slot {slot} ({}) has duplicate values",
                    feature.name
                )));
            }
        }
        Ok(Self { features })
    }

    /// Anonymous space with the given domain sizes; values are named `v0`, `v1`, ...
    pub fn with_sizes(sizes: &[usize]) -> Result<Self, GameError> {
        Self::new(
            sizes
                .iter()
                .enumerate()
                .map(|(slot, &size)| Feature {
                    name: format!("f{slot}"),
                    values: (0..size).map(|v| format!("v{v}")).collect(),
                })
                .collect(),
        )
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Number of feature slots.
    pub fn slot_count(&self) -> usize {
        self.features.len()
    }

    pub fn domain_size(&self, slot: usize) -> usize {
        self.features[slot].values.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.features.iter().map(|f| f.values.len()).collect()
    }

    /// Number of options, the product of all domain sizes.
    pub fn option_count(&self) -> usize {
        self.features.iter().map(|f| f.values.len()).product()
    }

    pub fn contains(&self, opt: &OptionDescriptor) -> bool {
        opt.0.len() == self.slot_count()
            && opt.0.iter().enumerate().all(|(slot, &v)| v < self.domain_size(slot))
    }

    /// Dense index of an option, slot 0 most significant.
    pub fn option_index(&self, opt: &OptionDescriptor) -> usize {
        mixed_radix_index(&self.domain_sizes(), opt.values())
    }

    pub fn option_at(&self, index: usize) -> OptionDescriptor {
        let sizes = self.domain_sizes();
        let mut values = vec![0; sizes.len()];
        let mut rest = index;
        for slot in (0..sizes.len()).rev() {
            values[slot] = rest % sizes[slot];
            rest /= sizes[slot];
        }
        OptionDescriptor(values)
    }

    pub fn options(&self) -> impl Iterator<Item = OptionDescriptor> + '_ {
        (0..self.option_count()).map(|i| self.option_at(i))
    }

    /// Human-readable rendering such as `day=tue, moment=pm`.
    pub fn describe(&self, opt: &OptionDescriptor) -> String {
        opt.0
            .iter()
            .zip(&self.features)
            .map(|(&v, f)| format!("{}={}", f.name, f.values[v]))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl TryFrom<Vec<Feature>> for FeatureSpace {
    type Error = GameError;

    fn try_from(features: Vec<Feature>) -> Result<Self, Self::Error> {
        Self::new(features)
    }
}

impl From<FeatureSpace> for Vec<Feature> {
    fn from(space: FeatureSpace) -> Self {
        space.features
    }
}

fn mixed_radix_index(sizes: &[usize], values: &[usize]) -> usize {
    sizes.iter().zip(values).fold(0, |acc, (&size, &v)| acc * size + v)
}

/// A full option: one value index per feature slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OptionDescriptor(pub Vec<usize>);

impl OptionDescriptor {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn value(&self, slot: usize) -> usize {
        self.0[slot]
    }
}

/// One player's private costs: a per-option term (infinite for invalid
/// options) plus a per-slot, per-value term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    domain_sizes: Vec<usize>,
    option_costs: Vec<f64>,
    feature_value_costs: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn new(
        space: &FeatureSpace,
        option_costs: Vec<f64>,
        feature_value_costs: Vec<Vec<f64>>,
    ) -> Result<Self, GameError> {
        if option_costs.len() != space.option_count() {
            return Err(GameError::InvalidCosts(format!(
                "{} option costs for {} options",
                option_costs.len(),
                space.option_count()
            )));
        }
        if feature_value_costs.len() != space.slot_count() {
            return Err(GameError::InvalidCosts(format!(
                "{} feature cost rows for {} slots",
                feature_value_costs.len(),
                space.slot_count()
            )));
        }
        for (i, &c) in option_costs.iter().enumerate() {
            if c.is_nan() || c < 0.0 {
                return Err(GameError::InvalidCosts(format!("option {i} has cost {c}")));
            }
        }
        for (slot, row) in feature_value_costs.iter().enumerate() {
            if row.len() != space.domain_size(slot) {
                return Err(GameError::InvalidCosts(format!(
                    "slot {slot} has {} value costs for {} values",
                    row.len(),
                    space.domain_size(slot)
                )));
            }
            if let Some(c) = row.iter().find(|c| !c.is_finite() || **c < 0.0) {
                return Err(GameError::InvalidCosts(format!(
                    "slot {slot} has feature value cost {c}; feature costs must be finite and non-negative"
                )));
            }
        }
        if option_costs.iter().all(|c| c.is_infinite()) {
            return Err(GameError::InvalidCosts("every option is invalid".into()));
        }
        Ok(Self {
            domain_sizes: space.domain_sizes(),
            option_costs,
            feature_value_costs,
        })
    }

    /// All-zero table over `space`.
    pub fn zeros(space: &FeatureSpace) -> Self {
        Self {
            domain_sizes: space.domain_sizes(),
            option_costs: vec![0.0; space.option_count()],
            feature_value_costs: space.domain_sizes().iter().map(|&d| vec![0.0; d]).collect(),
        }
    }

    pub fn option_costs(&self) -> &[f64] {
        &self.option_costs
    }

    pub fn feature_value_costs(&self) -> &[Vec<f64>] {
        &self.feature_value_costs
    }

    /// Full cost of agreeing on `opt`: the option's own term plus the cost of
    /// each of its feature values. Infinite for invalid options.
    pub fn option_cost(&self, opt: &OptionDescriptor) -> f64 {
        let own = self.option_costs[mixed_radix_index(&self.domain_sizes, opt.values())];
        if own.is_infinite() {
            return f64::INFINITY;
        }
        opt.values()
            .iter()
            .enumerate()
            .fold(own, |acc, (slot, &v)| acc + self.feature_value_costs[slot][v])
    }

    pub fn is_valid(&self, opt: &OptionDescriptor) -> bool {
        self.option_cost(opt).is_finite()
    }

    /// Valid options ordered by increasing cost, ties broken by option index.
    pub fn ranked_options(&self) -> Vec<(OptionDescriptor, f64)> {
        let n = self.option_costs.len();
        let mut ranked: Vec<(OptionDescriptor, f64)> = (0..n)
            .map(|i| {
                let opt = option_from_index(&self.domain_sizes, i);
                let cost = self.option_cost(&opt);
                (opt, cost)
            })
            .filter(|(_, c)| c.is_finite())
            .collect();
        // Stable sort keeps index order among equal costs.
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
        ranked
    }

    /// Cost of the most expensive valid option.
    pub fn worst_valid_cost(&self) -> f64 {
        (0..self.option_costs.len())
            .map(|i| self.option_cost(&option_from_index(&self.domain_sizes, i)))
            .filter(|c| c.is_finite())
            .fold(0.0, f64::max)
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }
}

fn option_from_index(sizes: &[usize], index: usize) -> OptionDescriptor {
    let mut values = vec![0; sizes.len()];
    let mut rest = index;
    for slot in (0..sizes.len()).rev() {
        values[slot] = rest % sizes[slot];
        rest /= sizes[slot];
    }
    OptionDescriptor(values)
}

/// Everything that characterises one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerParams {
    /// Utility of reaching an agreement.
    pub omega: f64,
    /// Cooperation weight on the other players' payoffs.
    pub alpha: f64,
    pub costs: CostTable,
    /// Confidence-score centre when the player misheard.
    pub conf_centre_wrong: f64,
    /// Confidence-score centre when the player heard correctly.
    pub conf_centre_right: f64,
    /// Listening error rate: per feature in compounded mode, per option in simple mode.
    pub error_rate: f64,
    /// Optional per-slot override of `error_rate` (compounded mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_error_rates: Option<Vec<f64>>,
}

impl PlayerParams {
    /// Noiseless, self-centred player with utility 1 and the given costs.
    pub fn new(costs: CostTable) -> Self {
        Self {
            omega: 1.0,
            alpha: 0.0,
            costs,
            conf_centre_wrong: -1.0,
            conf_centre_right: 1.0,
            error_rate: 0.0,
            slot_error_rates: None,
        }
    }

    pub fn validate(&self, space: &FeatureSpace) -> Result<(), GameError> {
        let bad = |msg: String| Err(GameError::InvalidParams(msg));
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return bad(format!("omega must be finite and >= 0, got {}", self.omega));
        }
        if !self.alpha.is_finite() {
            return bad(format!("alpha must be finite, got {}", self.alpha));
        }
        if !(self.conf_centre_wrong.is_finite() && self.conf_centre_right.is_finite()) {
            return bad("confidence centres must be finite".into());
        }
        if self.conf_centre_wrong >= self.conf_centre_right {
            return bad(format!(
                "conf_centre_wrong ({}) must be below conf_centre_right ({})",
                self.conf_centre_wrong, self.conf_centre_right
            ));
        }
        if !(0.0..=1.0).contains(&self.error_rate) {
            return bad(format!("error_rate must lie in [0, 1], got {}", self.error_rate));
        }
        if let Some(rates) = &self.slot_error_rates {
            if rates.len() != space.slot_count() {
                return bad(format!(
                    "{} slot error rates for {} slots",
                    rates.len(),
                    space.slot_count()
                ));
            }
            if let Some(r) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
                return bad(format!("slot error rate {r} outside [0, 1]"));
            }
        }
        if self.costs.domain_sizes() != space.domain_sizes().as_slice() {
            return bad("cost table does not match the feature space".into());
        }
        Ok(())
    }

    pub fn option_cost(&self, opt: &OptionDescriptor) -> f64 {
        self.costs.option_cost(opt)
    }

    /// Listening error rate applied to `slot`.
    pub fn slot_error_rate(&self, slot: usize) -> f64 {
        self.slot_error_rates
            .as_ref()
            .map_or(self.error_rate, |rates| rates[slot])
    }

    pub fn is_noiseless(&self) -> bool {
        self.error_rate == 0.0
            && self
                .slot_error_rates
                .as_ref()
                .is_none_or(|rates| rates.iter().all(|&r| r == 0.0))
    }
}

/// Cost of `opt` for `player`.
pub fn option_cost(player: &PlayerParams, opt: &OptionDescriptor) -> f64 {
    player.option_cost(opt)
}
