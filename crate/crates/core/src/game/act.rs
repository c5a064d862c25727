//! The symbolic dialogue-act alphabet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::space::{FeatureSpace, OptionDescriptor};
use super::GameError;

/// A dialogue act. Slot indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "act", content = "args", rename_all = "snake_case")]
pub enum DialogueAct {
    /// Accept the currently grounded option. Ends the dialogue.
    Accept,
    /// Agree on the currently grounded values of the given slots.
    PartialAccept(BTreeSet<usize>),
    /// Refuse and propose a whole option (simple mode only).
    RefProp(OptionDescriptor),
    /// Propose values for some slots.
    PropFeatures(BTreeMap<usize, usize>),
    /// Ask the other player to repeat their last utterance.
    AskRepeat,
    /// Ask the other player to repeat the values of the given slots.
    AskPartialRepeat(BTreeSet<usize>),
    /// Leave the negotiation. Ends the dialogue.
    EndDial,
}

/// Payload-free act type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActKind {
    Accept,
    PartialAccept,
    RefProp,
    PropFeatures,
    AskRepeat,
    AskPartialRepeat,
    EndDial,
}

impl ActKind {
    pub const ALL: [ActKind; 7] = [
        ActKind::Accept,
        ActKind::PartialAccept,
        ActKind::RefProp,
        ActKind::PropFeatures,
        ActKind::AskRepeat,
        ActKind::AskPartialRepeat,
        ActKind::EndDial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActKind::Accept => "accept",
            ActKind::PartialAccept => "partial_accept",
            ActKind::RefProp => "ref_prop",
            ActKind::PropFeatures => "prop_features",
            ActKind::AskRepeat => "ask_repeat",
            ActKind::AskPartialRepeat => "ask_partial_repeat",
            ActKind::EndDial => "end_dial",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ActKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl DialogueAct {
    pub fn kind(&self) -> ActKind {
        match self {
            DialogueAct::Accept => ActKind::Accept,
            DialogueAct::PartialAccept(_) => ActKind::PartialAccept,
            DialogueAct::RefProp(_) => ActKind::RefProp,
            DialogueAct::PropFeatures(_) => ActKind::PropFeatures,
            DialogueAct::AskRepeat => ActKind::AskRepeat,
            DialogueAct::AskPartialRepeat(_) => ActKind::AskPartialRepeat,
            DialogueAct::EndDial => ActKind::EndDial,
        }
    }

    /// Proposal of every slot of `opt`.
    pub fn propose_option(opt: &OptionDescriptor) -> Self {
        DialogueAct::PropFeatures(opt.values().iter().copied().enumerate().collect())
    }

    /// Whether the act carries feature values that go through the noisy channel.
    pub fn carries_values(&self) -> bool {
        matches!(self, DialogueAct::PropFeatures(_) | DialogueAct::RefProp(_))
    }

    /// Slots named by the act, in ascending order. A `RefProp` names every slot.
    pub fn named_slots(&self) -> Vec<usize> {
        match self {
            DialogueAct::PartialAccept(ks) | DialogueAct::AskPartialRepeat(ks) => {
                ks.iter().copied().collect()
            }
            DialogueAct::PropFeatures(assign) => assign.keys().copied().collect(),
            DialogueAct::RefProp(opt) => (0..opt.values().len()).collect(),
            DialogueAct::Accept | DialogueAct::AskRepeat | DialogueAct::EndDial => Vec::new(),
        }
    }

    /// Checks that slot indices and values fit `space` and payloads are non-empty.
    pub fn check_well_formed(&self, space: &FeatureSpace) -> Result<(), GameError> {
        let malformed = |reason: &str| {
            Err(GameError::MalformedAct {
                act: self.to_string(),
                reason: reason.to_string(),
            })
        };
        let ell = space.slot_count();
        match self {
            DialogueAct::PartialAccept(ks) | DialogueAct::AskPartialRepeat(ks) => {
                if ks.is_empty() {
                    return malformed("empty slot set");
                }
                if ks.iter().any(|&k| k >= ell) {
                    return malformed("slot index out of range");
                }
            }
            DialogueAct::PropFeatures(assign) => {
                if assign.is_empty() {
                    return malformed("empty assignment");
                }
                for (&k, &v) in assign {
                    if k >= ell {
                        return malformed("slot index out of range");
                    }
                    if v >= space.domain_size(k) {
                        return malformed("value outside the slot domain");
                    }
                }
            }
            DialogueAct::RefProp(opt) => {
                if !space.contains(opt) {
                    return malformed("option outside the feature space");
                }
            }
            DialogueAct::Accept | DialogueAct::AskRepeat | DialogueAct::EndDial => {}
        }
        Ok(())
    }

    /// True when `other` is the same act with possibly different values:
    /// same kind and the same named slots.
    pub fn same_shape(&self, other: &DialogueAct) -> bool {
        match (self, other) {
            (DialogueAct::PropFeatures(a), DialogueAct::PropFeatures(b)) => a.keys().eq(b.keys()),
            (DialogueAct::RefProp(a), DialogueAct::RefProp(b)) => a.values().len() == b.values().len(),
            _ => self == other,
        }
    }
}

impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots = |ks: &BTreeSet<usize>| ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        match self {
            DialogueAct::Accept => write!(f, "Accept"),
            DialogueAct::PartialAccept(ks) => write!(f, "PartialAccept({})", slots(ks)),
            DialogueAct::RefProp(opt) => write!(
                f,
                "RefProp({})",
                opt.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
            DialogueAct::PropFeatures(assign) => write!(
                f,
                "PropFeatures({})",
                assign.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
            ),
            DialogueAct::AskRepeat => write!(f, "AskRepeat"),
            DialogueAct::AskPartialRepeat(ks) => write!(f, "AskPartialRepeat({})", slots(ks)),
            DialogueAct::EndDial => write!(f, "EndDial"),
        }
    }
}
