//! Finite state abstraction used by the tabular learner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Observation;
use crate::game::ActKind;

/// Turn buckets: `[0, 2)`, `[2, 4)`, `[4, 8)`, `[8, inf)`.
pub const TURN_BUCKETS: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceBucket {
    Low,
    Mid,
    High,
}

impl ConfidenceBucket {
    pub fn of(confidence: Option<f64>, theta_lo: f64, theta_hi: f64) -> Self {
        match confidence {
            Some(c) if c < theta_lo => ConfidenceBucket::Low,
            Some(c) if c < theta_hi => ConfidenceBucket::Mid,
            _ => ConfidenceBucket::High,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ConfidenceBucket::Low => "low",
            ConfidenceBucket::Mid => "mid",
            ConfidenceBucket::High => "high",
        }
    }
}

/// Grounding bitmask, confidence bucket of the last heard utterance (its
/// lowest score; `High` when it carried none), the type of the opponent's
/// last act and a turn bucket.
///
/// Bit `k` of `grounding` is set when slot `k` holds a value; bit `l + k`
/// when it is agreed, `l` being the slot count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractState {
    pub slots: u8,
    pub grounding: u32,
    pub confidence: ConfidenceBucket,
    pub opponent_act: Option<ActKind>,
    pub turn_bucket: u8,
}

impl AbstractState {
    pub fn from_observation(obs: &Observation, theta_lo: f64, theta_hi: f64) -> Self {
        let ell = obs.slot_count();
        assert!(ell <= 16, "state abstraction supports at most 16 slots");
        let mut grounding = 0u32;
        for (k, slot) in obs.ledger.iter().enumerate() {
            if slot.value.is_some() {
                grounding |= 1 << k;
            }
            if slot.agreed {
                grounding |= 1 << (ell + k);
            }
        }
        let last = obs.last_heard.as_ref();
        Self {
            slots: ell as u8,
            grounding,
            confidence: ConfidenceBucket::of(last.and_then(|u| u.min_confidence()), theta_lo, theta_hi),
            opponent_act: last.map(|u| u.act.kind()),
            turn_bucket: turn_bucket(obs.turn),
        }
    }

    /// The state of a player who opens the dialogue.
    pub fn opening(slots: usize) -> Self {
        Self {
            slots: slots as u8,
            grounding: 0,
            confidence: ConfidenceBucket::High,
            opponent_act: None,
            turn_bucket: 0,
        }
    }

    /// Number of abstract states for `slots` feature slots.
    pub fn space_size(slots: usize) -> usize {
        (1 << (2 * slots)) * 3 * (ActKind::ALL.len() + 1) * TURN_BUCKETS as usize
    }
}

fn turn_bucket(turn: u32) -> u8 {
    match turn {
        0..=1 => 0,
        2..=3 => 1,
        4..=7 => 2,
        _ => 3,
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = 2 * self.slots as usize;
        write!(
            f,
            "g={:0width$b};c={};o={};t={}",
            self.grounding,
            self.confidence.name(),
            self.opponent_act.map_or("none", ActKind::name),
            self.turn_bucket,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed abstract state key {0:?}")]
pub struct ParseStateError(pub String);

impl FromStr for AbstractState {
    type Err = ParseStateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseStateError(s.to_string());
        let mut parts = s.split(';');
        let mut field = |prefix: &str| {
            parts
                .next()
                .and_then(|p| p.strip_prefix(prefix))
                .ok_or_else(err)
        };
        let bits = field("g=")?;
        let confidence = match field("c=")? {
            "low" => ConfidenceBucket::Low,
            "mid" => ConfidenceBucket::Mid,
            "high" => ConfidenceBucket::High,
            _ => return Err(err()),
        };
        let opponent_act = match field("o=")? {
            "none" => None,
            name => Some(ActKind::from_name(name).ok_or_else(err)?),
        };
        let turn_bucket: u8 = field("t=")?.parse().map_err(|_| err())?;
        if bits.len() % 2 != 0 || bits.len() > 32 || turn_bucket >= TURN_BUCKETS {
            return Err(err());
        }
        Ok(Self {
            slots: (bits.len() / 2) as u8,
            grounding: u32::from_str_radix(bits, 2).map_err(|_| err())?,
            confidence,
            opponent_act,
            turn_bucket,
        })
    }
}
