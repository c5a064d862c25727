//! One seeded dialogue between two agents.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::FirstSpeaker;
use super::seed;
use crate::agents::{Agent, EpisodeContext, Observation, Phase};
use crate::game::{
    DialogueAct, Game, GameError, OptionDescriptor, OutcomeKind, Player, Transition,
};
use crate::perception::{perceive, ChannelConfig, Direction, PerceivedUtterance};

/// Episode-independent settings of the environment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSettings {
    pub first_speaker: FirstSpeaker,
    pub noise_spread: f64,
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self { first_speaker: FirstSpeaker::Random, noise_spread: crate::perception::NOISE_SPREAD }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: u32,
    pub speaker: Player,
    pub spoken: DialogueAct,
    pub perceived: DialogueAct,
    /// Listener-side scores, one per slot named by the act.
    pub confidences: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub phase: Phase,
    pub index: u64,
    pub seed: u64,
    pub first: Player,
    pub transcript: Vec<TurnRecord>,
    pub outcome: OutcomeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub believed: Option<Vec<OptionDescriptor>>,
    /// Indexed by [`Player::index`].
    pub rewards: Vec<f64>,
    pub length: u32,
}

impl EpisodeRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("episode records serialise to JSON")
    }
}

/// Plays one episode. `agents` is indexed by [`Player::index`]. The agents'
/// `begin_episode` and `end_episode` hooks are called here.
///
/// Fails when an agent emits an act that is malformed, illegal or accepts an
/// option invalid for itself.
pub fn run_episode(
    game: &Game,
    agents: [&mut dyn Agent; 2],
    seed: u64,
    ctx: &EpisodeContext,
    settings: &EpisodeSettings,
) -> Result<EpisodeRecord, GameError> {
    let mut agents = agents;
    let mut env = seed::environment_rng(seed);
    let mut agent_rngs = Player::BOTH.map(|p| seed::agent_rng(seed, p));
    let first = match settings.first_speaker {
        FirstSpeaker::Random => {
            if env.random::<bool>() {
                Player::System
            } else {
                Player::User
            }
        }
        FirstSpeaker::System => Player::System,
        FirstSpeaker::User => Player::User,
    };
    let channels = Player::BOTH.map(|speaker| {
        let direction = Direction::from_speaker(speaker);
        ChannelConfig::new(direction, game.params(direction.listener()), settings.noise_spread)
    });
    for a in agents.iter_mut() {
        a.begin_episode(ctx);
    }

    let ell = game.space().slot_count();
    let mut slot_confidence = [vec![None; ell], vec![None; ell]];
    let mut last_heard: [Option<PerceivedUtterance>; 2] = [None, None];
    let mut transcript = Vec::new();
    let mut state = game.initial_state(first);
    let outcome = loop {
        let speaker = state.active();
        let me = speaker.index();
        let obs = Observation::build(game, &state, speaker, &slot_confidence[me], last_heard[me].as_ref())?;
        let act = agents[me].act(&obs, &mut agent_rngs[me]);
        act.check_well_formed(game.space())?;
        if !obs.legal.permits(&act) {
            return Err(GameError::IllegalAct { player: speaker, turn: state.turn(), act: act.to_string() });
        }
        if act == DialogueAct::Accept && !obs.can_accept() {
            let option = obs.believed_option().expect("Accept is only legal once grounded");
            return Err(GameError::InfiniteCost { player: me, option });
        }

        let heard = perceive(&act, game.space(), &channels[me], &mut env);
        let listener = speaker.other().index();
        if act.carries_values() {
            for (i, slot) in act.named_slots().into_iter().enumerate() {
                slot_confidence[me][slot] = None;
                slot_confidence[listener][slot] = Some(match &heard.act {
                    DialogueAct::RefProp(_) => heard.confidences[0],
                    _ => heard.confidences[i],
                });
            }
        }
        transcript.push(TurnRecord {
            turn: state.turn(),
            speaker,
            spoken: act.clone(),
            perceived: heard.act.clone(),
            confidences: heard.confidences.clone(),
        });
        let transition = game.apply_act(&state, &act, &heard.act)?;
        last_heard[listener] = Some(heard);
        match transition {
            Transition::Ongoing(next) => state = next,
            Transition::Terminal(_, outcome) => break outcome,
        }
    };

    for (i, a) in agents.iter_mut().enumerate() {
        a.end_episode(outcome.rewards[i]);
    }
    Ok(EpisodeRecord {
        phase: ctx.phase,
        index: ctx.index,
        seed,
        first,
        length: transcript.len() as u32,
        transcript,
        outcome: outcome.kind,
        believed: outcome.believed,
        rewards: outcome.rewards,
    })
}
