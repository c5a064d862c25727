//! The asymmetric noisy channel between the players.
//!
//! The system hears the user with a per-feature error rate: every value the
//! user transmits is independently replaced, with that probability, by a
//! uniformly drawn *different* value of the same slot. In simple mode the
//! whole option is replaced by one of the other options instead. The user
//! always hears the system correctly. Act types and slot names are never
//! corrupted.
//!
//! Each transmitted slot comes with a confidence score `1 / (1 + e^-X)`,
//! `X ~ Normal(c, spread)`, where `c` is the listener's "right" centre when
//! the value was heard correctly and its "wrong" centre otherwise.
//!
//! Random draws happen in a fixed order so that transcripts are reproducible
//! from a seed: for each named slot in ascending order, first the corruption
//! test (one uniform `f64` in `[0, 1)`, corrupted iff below the rate), then
//! the replacement index when corrupted, then the Gaussian for the score.
//! Slot names in `PartialAccept` and `AskPartialRepeat` only draw a score.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::game::{DialogueAct, FeatureSpace, Player, PlayerParams};

/// Standard deviation of the Gaussian behind confidence scores.
pub const NOISE_SPREAD: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    UserToSystem,
    SystemToUser,
}

impl Direction {
    pub fn from_speaker(speaker: Player) -> Self {
        match speaker {
            Player::User => Direction::UserToSystem,
            Player::System => Direction::SystemToUser,
        }
    }

    pub fn listener(self) -> Player {
        match self {
            Direction::UserToSystem => Player::System,
            Direction::SystemToUser => Player::User,
        }
    }
}

/// Logistic-of-Gaussian confidence generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub centre_wrong: f64,
    pub centre_right: f64,
    pub spread: f64,
}

impl ConfidenceModel {
    pub fn new(centre_wrong: f64, centre_right: f64) -> Self {
        Self { centre_wrong, centre_right, spread: NOISE_SPREAD }
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, correct: bool, rng: &mut R) -> f64 {
        let centre = if correct { self.centre_right } else { self.centre_wrong };
        let x = Normal::new(centre, self.spread)
            .expect("spread is finite and non-negative")
            .sample(rng);
        logistic(x)
    }
}

/// Confidence score with the default spread.
pub fn confidence_score<R: Rng + ?Sized>(correct: bool, c_wrong: f64, c_right: f64, rng: &mut R) -> f64 {
    ConfidenceModel::new(c_wrong, c_right).sample(correct, rng)
}

/// Logistic function clamped to the open interval (0, 1).
pub fn logistic(x: f64) -> f64 {
    let y = 1.0 / (1.0 + (-x).exp());
    y.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// One listening direction with the listener's noise parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub direction: Direction,
    pub error_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_error_rates: Option<Vec<f64>>,
    pub confidence: ConfidenceModel,
}

impl ChannelConfig {
    /// Channel into `listener`'s ears. System-to-user channels are always noiseless.
    pub fn new(direction: Direction, listener: &PlayerParams, spread: f64) -> Self {
        let confidence =
            ConfidenceModel::new(listener.conf_centre_wrong, listener.conf_centre_right).with_spread(spread);
        match direction {
            Direction::UserToSystem => Self {
                direction,
                error_rate: listener.error_rate,
                slot_error_rates: listener.slot_error_rates.clone(),
                confidence,
            },
            Direction::SystemToUser => Self {
                direction,
                error_rate: 0.0,
                slot_error_rates: None,
                confidence,
            },
        }
    }

    pub fn slot_error_rate(&self, slot: usize) -> f64 {
        self.slot_error_rates.as_ref().map_or(self.error_rate, |r| r[slot])
    }
}

/// The listener's rendering of an utterance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceivedUtterance {
    pub act: DialogueAct,
    /// One score per slot named by the act, in ascending slot order; a single
    /// score for a `RefProp`.
    pub confidences: Vec<f64>,
}

impl PerceivedUtterance {
    /// Confidence attached to `slot`, if the act named it.
    pub fn slot_confidence(&self, slot: usize) -> Option<f64> {
        match &self.act {
            DialogueAct::RefProp(_) => self.confidences.first().copied(),
            act => act
                .named_slots()
                .iter()
                .position(|&k| k == slot)
                .map(|i| self.confidences[i]),
        }
    }

    pub fn min_confidence(&self) -> Option<f64> {
        self.confidences.iter().copied().reduce(f64::min)
    }
}

/// Passes `spoken` through `channel`.
pub fn perceive<R: Rng + ?Sized>(
    spoken: &DialogueAct,
    space: &FeatureSpace,
    channel: &ChannelConfig,
    rng: &mut R,
) -> PerceivedUtterance {
    let conf = &channel.confidence;
    match spoken {
        DialogueAct::PropFeatures(assign) => {
            let mut heard = assign.clone();
            let mut confidences = Vec::with_capacity(assign.len());
            for (&slot, value) in heard.iter_mut() {
                let (v, correct) =
                    transmit(*value, space.domain_size(slot), channel.slot_error_rate(slot), rng);
                *value = v;
                confidences.push(conf.sample(correct, rng));
            }
            PerceivedUtterance { act: DialogueAct::PropFeatures(heard), confidences }
        }
        DialogueAct::RefProp(opt) => {
            let (index, correct) =
                transmit(space.option_index(opt), space.option_count(), channel.error_rate, rng);
            let heard = if correct { opt.clone() } else { space.option_at(index) };
            let score = conf.sample(correct, rng);
            PerceivedUtterance { act: DialogueAct::RefProp(heard), confidences: vec![score] }
        }
        DialogueAct::PartialAccept(ks) | DialogueAct::AskPartialRepeat(ks) => PerceivedUtterance {
            act: spoken.clone(),
            confidences: ks.iter().map(|_| conf.sample(true, rng)).collect(),
        },
        DialogueAct::Accept | DialogueAct::AskRepeat | DialogueAct::EndDial => {
            PerceivedUtterance { act: spoken.clone(), confidences: Vec::new() }
        }
    }
}

/// Sends one symbol out of `domain`; returns what arrives and whether it is intact.
fn transmit<R: Rng + ?Sized>(value: usize, domain: usize, rate: f64, rng: &mut R) -> (usize, bool) {
    let u: f64 = rng.random();
    if u < rate {
        let r = rng.random_range(0..domain - 1);
        (if r >= value { r + 1 } else { r }, false)
    } else {
        (value, true)
    }
}
