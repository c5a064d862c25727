//! Dialogue state, act legality and the deterministic transition function.
//!
//! The transition takes both the act as spoken and the act as the listener
//! perceived it; noise is injected upstream by the perception layer. Every
//! state is an immutable value: `apply_act` returns a new one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::act::{ActKind, DialogueAct};
use super::reward::{agreement_rewards, misunderstanding_rewards};
use super::space::{FeatureSpace, OptionDescriptor, PlayerParams};
use super::GameError;

pub const DEFAULT_T_MAX: u32 = 50;

/// The two dialogue participants. The system listens through a noisy
/// channel; the user hears the system perfectly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    System,
    User,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::System, Player::User];

    pub fn index(self) -> usize {
        match self {
            Player::System => 0,
            Player::User => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => Player::System,
            1 => Player::User,
            _ => panic!("player index {i} out of range"),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Player::System => Player::User,
            Player::User => Player::System,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::System => "system",
            Player::User => "user",
        })
    }
}

/// Simple mode negotiates whole options with `RefProp`; compounded mode
/// negotiates feature by feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simple,
    #[default]
    Compounded,
}

/// Grounding record of one feature slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotLedger {
    /// Last proposed value as each player holds it: spoken by the proposer,
    /// perceived by the listener. Indexed by [`Player::index`].
    pub heard: [Option<usize>; 2],
    pub proposer: Option<Player>,
    pub agreed: bool,
}

/// What a pending repeat request asks the active player to say again.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepeatRequest {
    Whole,
    Slots(BTreeSet<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Player,
    pub spoken: DialogueAct,
    pub perceived: DialogueAct,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    turn: u32,
    active: Player,
    slots: Vec<SlotLedger>,
    last_utterance: Option<Utterance>,
    last_spoken: [Option<DialogueAct>; 2],
    pending_repeat: Option<RepeatRequest>,
    terminal: bool,
}

impl GameState {
    pub fn turn(&self) -> u32 {
        self.turn
    }

    pub fn active(&self) -> Player {
        self.active
    }

    pub fn slots(&self) -> &[SlotLedger] {
        &self.slots
    }

    pub fn last_utterance(&self) -> Option<&Utterance> {
        self.last_utterance.as_ref()
    }

    pub fn last_spoken(&self, player: Player) -> Option<&DialogueAct> {
        self.last_spoken[player.index()].as_ref()
    }

    pub fn pending_repeat(&self) -> Option<&RepeatRequest> {
        self.pending_repeat.as_ref()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// The option `player` believes is on the table, if every slot has a value.
    pub fn believed_option(&self, player: Player) -> Option<OptionDescriptor> {
        self.slots
            .iter()
            .map(|s| s.heard[player.index()])
            .collect::<Option<Vec<_>>>()
            .map(OptionDescriptor)
    }

    pub fn fully_grounded(&self, player: Player) -> bool {
        self.slots.iter().all(|s| s.heard[player.index()].is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Agreement,
    Misagreement,
    /// Someone left with `EndDial`.
    Failure,
    Timeout,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::Agreement,
        OutcomeKind::Misagreement,
        OutcomeKind::Failure,
        OutcomeKind::Timeout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::Agreement => "agreement",
            OutcomeKind::Misagreement => "misagreement",
            OutcomeKind::Failure => "enddial",
            OutcomeKind::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub kind: OutcomeKind,
    /// Each player's believed option, for agreements and misagreements.
    pub believed: Option<Vec<OptionDescriptor>>,
    pub rewards: Vec<f64>,
}

impl EpisodeOutcome {
    fn failure(kind: OutcomeKind) -> Self {
        Self { kind, believed: None, rewards: vec![0.0; 2] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transition {
    Ongoing(GameState),
    Terminal(GameState, EpisodeOutcome),
}

impl Transition {
    pub fn state(&self) -> &GameState {
        match self {
            Transition::Ongoing(s) | Transition::Terminal(s, _) => s,
        }
    }

    pub fn outcome(&self) -> Option<&EpisodeOutcome> {
        match self {
            Transition::Ongoing(_) => None,
            Transition::Terminal(_, o) => Some(o),
        }
    }
}

/// The act templates open to the active player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalActs {
    /// Set when a repeat was requested: the only legal act is this re-utterance.
    pub forced: Option<DialogueAct>,
    pub kinds: Vec<ActKind>,
    /// Slots with a proposed, not yet agreed value (`PartialAccept` payloads).
    pub acceptable_slots: Vec<usize>,
    /// Slots last proposed by the other player (`AskPartialRepeat` payloads).
    pub repeatable_slots: Vec<usize>,
}

impl LegalActs {
    pub fn allows(&self, kind: ActKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// Whether `act`, payload included, is legal. Assumes `act` is well formed.
    pub fn permits(&self, act: &DialogueAct) -> bool {
        if let Some(forced) = &self.forced {
            return act == forced;
        }
        if !self.allows(act.kind()) {
            return false;
        }
        match act {
            DialogueAct::PartialAccept(ks) => ks.iter().all(|k| self.acceptable_slots.contains(k)),
            DialogueAct::AskPartialRepeat(ks) => ks.iter().all(|k| self.repeatable_slots.contains(k)),
            _ => true,
        }
    }
}

/// Rules of one game instance: the feature space, both players, the mode and
/// the turn limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game {
    space: FeatureSpace,
    players: Vec<PlayerParams>,
    mode: Mode,
    t_max: u32,
}

impl Game {
    pub fn new(
        space: FeatureSpace,
        players: Vec<PlayerParams>,
        mode: Mode,
        t_max: u32,
    ) -> Result<Self, GameError> {
        if players.len() != 2 {
            return Err(GameError::InvalidParams(format!(
                "the dialogue needs exactly 2 players, got {}",
                players.len()
            )));
        }
        if t_max == 0 {
            return Err(GameError::InvalidParams("t_max must be at least 1".into()));
        }
        for p in &players {
            p.validate(&space)?;
        }
        Ok(Self { space, players, mode, t_max })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn players(&self) -> &[PlayerParams] {
        &self.players
    }

    pub fn params(&self, player: Player) -> &PlayerParams {
        &self.players[player.index()]
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    /// Same game with a different turn limit.
    pub fn with_t_max(&self, t_max: u32) -> Result<Self, GameError> {
        Self::new(self.space.clone(), self.players.clone(), self.mode, t_max)
    }

    pub fn is_noiseless(&self) -> bool {
        self.players.iter().all(PlayerParams::is_noiseless)
    }

    pub fn initial_state(&self, first: Player) -> GameState {
        GameState {
            turn: 0,
            active: first,
            slots: vec![SlotLedger::default(); self.space.slot_count()],
            last_utterance: None,
            last_spoken: [None, None],
            pending_repeat: None,
            terminal: false,
        }
    }

    /// The act the active player must utter to honour a repeat request.
    pub fn forced_act(&self, state: &GameState) -> Option<DialogueAct> {
        let me = state.active;
        match state.pending_repeat.as_ref()? {
            RepeatRequest::Whole => state.last_spoken[me.index()].clone(),
            RepeatRequest::Slots(ks) => Some(DialogueAct::PropFeatures(
                ks.iter()
                    .filter_map(|&k| state.slots[k].heard[me.index()].map(|v| (k, v)))
                    .collect(),
            )),
        }
    }

    pub fn legal_acts(&self, state: &GameState, player: Player) -> Result<LegalActs, GameError> {
        if state.terminal {
            return Err(GameError::TerminalState);
        }
        if player != state.active {
            return Err(GameError::NotActive { player });
        }
        if let Some(forced) = self.forced_act(state) {
            return Ok(LegalActs {
                kinds: vec![forced.kind()],
                forced: Some(forced),
                acceptable_slots: Vec::new(),
                repeatable_slots: Vec::new(),
            });
        }
        let me = player.index();
        let other_spoke = state.last_spoken[player.other().index()].is_some();
        let mut kinds = Vec::new();
        if state.fully_grounded(player) {
            kinds.push(ActKind::Accept);
        }
        let mut acceptable_slots = Vec::new();
        let mut repeatable_slots = Vec::new();
        match self.mode {
            Mode::Simple => {
                kinds.push(ActKind::RefProp);
                if other_spoke {
                    kinds.push(ActKind::AskRepeat);
                }
            }
            Mode::Compounded => {
                for (k, slot) in state.slots.iter().enumerate() {
                    if slot.heard[me].is_some() && !slot.agreed {
                        acceptable_slots.push(k);
                    }
                    if slot.proposer == Some(player.other()) {
                        repeatable_slots.push(k);
                    }
                }
                if !acceptable_slots.is_empty() {
                    kinds.push(ActKind::PartialAccept);
                }
                kinds.push(ActKind::PropFeatures);
                if other_spoke {
                    kinds.push(ActKind::AskRepeat);
                    if !repeatable_slots.is_empty() {
                        kinds.push(ActKind::AskPartialRepeat);
                    }
                }
            }
        }
        kinds.push(ActKind::EndDial);
        Ok(LegalActs { forced: None, kinds, acceptable_slots, repeatable_slots })
    }

    /// Every concrete legal act, in canonical order: by [`ActKind`], then
    /// payload subsets by ascending bitmask over the eligible slots, options
    /// by index, and partial assignments by ascending mixed-radix code with
    /// slot 0 most significant (digit 0 = slot absent, `v + 1` = value `v`).
    pub fn enumerate_acts(&self, state: &GameState) -> Result<Vec<DialogueAct>, GameError> {
        let legal = self.legal_acts(state, state.active)?;
        if let Some(forced) = legal.forced {
            return Ok(vec![forced]);
        }
        let mut acts = Vec::new();
        for kind in &legal.kinds {
            match kind {
                ActKind::Accept => acts.push(DialogueAct::Accept),
                ActKind::PartialAccept => acts.extend(
                    subsets(&legal.acceptable_slots).into_iter().map(DialogueAct::PartialAccept),
                ),
                ActKind::RefProp => acts.extend(self.space.options().map(DialogueAct::RefProp)),
                ActKind::PropFeatures => {
                    acts.extend(partial_assignments(&self.space).into_iter().map(DialogueAct::PropFeatures))
                }
                ActKind::AskRepeat => acts.push(DialogueAct::AskRepeat),
                ActKind::AskPartialRepeat => acts.extend(
                    subsets(&legal.repeatable_slots).into_iter().map(DialogueAct::AskPartialRepeat),
                ),
                ActKind::EndDial => acts.push(DialogueAct::EndDial),
            }
        }
        Ok(acts)
    }

    /// Upper bound on the number of concrete acts available in any state.
    pub fn max_branching(&self) -> usize {
        let ell = self.space.slot_count() as u32;
        match self.mode {
            Mode::Simple => self.space.option_count() + 3,
            Mode::Compounded => {
                let assignments: usize =
                    self.space.domain_sizes().iter().map(|d| d + 1).product::<usize>() - 1;
                let slot_subsets = (1usize << ell) - 1;
                assignments + 2 * slot_subsets + 3
            }
        }
    }

    /// Advances the dialogue by one utterance of the active player.
    ///
    /// `perceived` is the listener's rendering of `spoken`; it must have the
    /// same shape (act kind and named slots) and may only differ in values.
    pub fn apply_act(
        &self,
        state: &GameState,
        spoken: &DialogueAct,
        perceived: &DialogueAct,
    ) -> Result<Transition, GameError> {
        let speaker = state.active;
        let legal = self.legal_acts(state, speaker)?;
        spoken.check_well_formed(&self.space)?;
        if !legal.permits(spoken) {
            return Err(GameError::IllegalAct {
                player: speaker,
                turn: state.turn,
                act: spoken.to_string(),
            });
        }
        perceived.check_well_formed(&self.space)?;
        if !spoken.same_shape(perceived) {
            return Err(GameError::MalformedAct {
                act: perceived.to_string(),
                reason: format!("perceived act does not match the shape of {spoken}"),
            });
        }

        let listener = speaker.other();
        let mut next = state.clone();
        next.pending_repeat = None;
        let mut ended = None;
        match (spoken, perceived) {
            (DialogueAct::PropFeatures(said), DialogueAct::PropFeatures(heard)) => {
                for ((&k, &v), &h) in said.iter().zip(heard.values()) {
                    next.propose(k, speaker, v, h);
                }
            }
            (DialogueAct::RefProp(said), DialogueAct::RefProp(heard)) => {
                for (k, (&v, &h)) in said.values().iter().zip(heard.values()).enumerate() {
                    next.propose(k, speaker, v, h);
                }
            }
            (DialogueAct::PartialAccept(ks), _) => {
                for &k in ks {
                    next.slots[k].agreed = true;
                }
            }
            (DialogueAct::AskRepeat, _) => next.pending_repeat = Some(RepeatRequest::Whole),
            (DialogueAct::AskPartialRepeat(ks), _) => {
                next.pending_repeat = Some(RepeatRequest::Slots(ks.clone()))
            }
            (DialogueAct::Accept, _) => ended = Some(self.settle(state, speaker)?),
            (DialogueAct::EndDial, _) => ended = Some(EpisodeOutcome::failure(OutcomeKind::Failure)),
            _ => unreachable!("shape checked above"),
        }

        next.last_spoken[speaker.index()] = Some(spoken.clone());
        next.last_utterance = Some(Utterance {
            speaker,
            spoken: spoken.clone(),
            perceived: perceived.clone(),
        });
        next.turn += 1;
        next.active = listener;

        if ended.is_none() && next.turn >= self.t_max {
            ended = Some(EpisodeOutcome::failure(OutcomeKind::Timeout));
        }
        Ok(match ended {
            Some(outcome) => {
                next.terminal = true;
                next.pending_repeat = None;
                Transition::Terminal(next, outcome)
            }
            None => Transition::Ongoing(next),
        })
    }

    /// Scores an `Accept` by `accepter`: each player believes the option in
    /// its own ledger.
    fn settle(&self, state: &GameState, accepter: Player) -> Result<EpisodeOutcome, GameError> {
        let believed = Player::BOTH
            .iter()
            .map(|&p| state.believed_option(p))
            .collect::<Option<Vec<_>>>()
            .ok_or(GameError::IllegalAct {
                player: accepter,
                turn: state.turn,
                act: "Accept before every slot is grounded".into(),
            })?;
        if believed[0] == believed[1] {
            let rewards = agreement_rewards(&self.players, &believed[0])?;
            Ok(EpisodeOutcome { kind: OutcomeKind::Agreement, believed: Some(believed), rewards })
        } else {
            let rewards = misunderstanding_rewards(&self.players, &believed);
            Ok(EpisodeOutcome { kind: OutcomeKind::Misagreement, believed: Some(believed), rewards })
        }
    }
}

impl GameState {
    fn propose(&mut self, slot: usize, speaker: Player, spoken: usize, perceived: usize) {
        let entry = &mut self.slots[slot];
        entry.heard[speaker.index()] = Some(spoken);
        entry.heard[speaker.other().index()] = Some(perceived);
        entry.proposer = Some(speaker);
        entry.agreed = false;
    }
}

fn subsets(items: &[usize]) -> Vec<BTreeSet<usize>> {
    (1u64..(1u64 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &k)| k)
                .collect()
        })
        .collect()
}

fn partial_assignments(space: &FeatureSpace) -> Vec<BTreeMap<usize, usize>> {
    let radix: Vec<usize> = space.domain_sizes().iter().map(|d| d + 1).collect();
    let total: usize = radix.iter().product();
    (1..total)
        .map(|code| {
            let mut digits = vec![0; radix.len()];
            let mut rest = code;
            for k in (0..radix.len()).rev() {
                digits[k] = rest % radix[k];
                rest /= radix[k];
            }
            digits
                .into_iter()
                .enumerate()
                .filter(|&(_, d)| d > 0)
                .map(|(k, d)| (k, d - 1))
                .collect()
        })
        .collect()
}
