//! Training and evaluation runs, metrics and artifact files.
//!
//! A run writes into its output directory:
//!
//! * `config.toml`: the scenario as given;
//! * `scenario.json`: the built game, costs included;
//! * `episodes.jsonl`: one [`EpisodeRecord`] per line, training episodes first;
//! * `summary.tsv`: one `key<TAB>value` pair per line (see [`BenchmarkSummary::to_table`]);
//! * `qtable.system.tsv` / `qtable.user.tsv`: value tables of learning agents.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Preset, ScenarioConfig};
use super::episode::{run_episode, EpisodeRecord, EpisodeSettings};
use super::scenario::build_seeded_scenario;
use super::{seed, HarnessError};
use crate::agents::{Agent, EpisodeContext, Phase};
use crate::game::{Game, Mode, OutcomeKind, Player};

/// Aggregates of one phase. Rates are fractions of `episodes`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub episodes: u64,
    /// Episode counts in [`OutcomeKind::ALL`] order.
    pub outcome_counts: [u64; 4],
    pub reward_sum: [f64; 2],
    /// Running mean and sum of squared deviations (Welford).
    pub reward_running_mean: [f64; 2],
    pub reward_m2: [f64; 2],
    pub length_sum: u64,
}

impl PhaseMetrics {
    pub fn record(&mut self, r: &EpisodeRecord) {
        self.episodes += 1;
        let k = OutcomeKind::ALL.iter().position(|&k| k == r.outcome).expect("known outcome");
        self.outcome_counts[k] += 1;
        let n = self.episodes as f64;
        for i in 0..2 {
            let x = r.rewards[i];
            self.reward_sum[i] += x;
            let delta = x - self.reward_running_mean[i];
            self.reward_running_mean[i] += delta / n;
            self.reward_m2[i] += delta * (x - self.reward_running_mean[i]);
        }
        self.length_sum += u64::from(r.length);
    }

    pub fn count(&self, kind: OutcomeKind) -> u64 {
        let k = OutcomeKind::ALL.iter().position(|&x| x == kind).expect("known outcome");
        self.outcome_counts[k]
    }

    pub fn rate(&self, kind: OutcomeKind) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.count(kind) as f64 / self.episodes as f64
        }
    }

    pub fn mean_reward(&self, player: Player) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.reward_sum[player.index()] / self.episodes as f64
        }
    }

    /// Population standard deviation.
    pub fn std_reward(&self, player: Player) -> f64 {
        if self.episodes == 0 {
            return 0.0;
        }
        (self.reward_m2[player.index()] / self.episodes as f64).sqrt()
    }

    pub fn mean_length(&self) -> f64 {
        if self.episodes == 0 {
            0.0
        } else {
            self.length_sum as f64 / self.episodes as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub name: String,
    pub seed: u64,
    pub mode: Mode,
    pub preset: Option<Preset>,
    pub noise_spread: f64,
    pub agents: [String; 2],
    pub train: PhaseMetrics,
    pub eval: PhaseMetrics,
}

/// Version of the `summary.tsv` layout.
pub const SUMMARY_FORMAT: u32 = 1;

impl BenchmarkSummary {
    pub fn phase(&self, phase: Phase) -> &PhaseMetrics {
        match phase {
            Phase::Train => &self.train,
            Phase::Eval => &self.eval,
        }
    }

    /// Ordered key/value pairs. Per phase `p` (`train`, `eval`): `p.episodes`,
    /// `p.<outcome>_count` and `p.<outcome>_rate` for agreement,
    /// misagreement, enddial and timeout, `p.mean_length`, and
    /// `p.mean_reward.<player>` / `p.std_reward.<player>` for system and user.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e: Vec<(String, String)> = vec![
            ("format".into(), SUMMARY_FORMAT.to_string()),
            ("name".into(), self.name.clone()),
            ("seed".into(), self.seed.to_string()),
            ("mode".into(), format!("{:?}", self.mode).to_lowercase()),
            ("preset".into(), self.preset.map_or("none".into(), |p| p.name().into())),
            // The spread is the standard deviation of the Gaussian behind confidence scores.
            ("noise_spread_std".into(), format!("{:?}", self.noise_spread)),
            ("agent.system".into(), self.agents[0].clone()),
            ("agent.user".into(), self.agents[1].clone()),
        ];
        for phase in [Phase::Train, Phase::Eval] {
            let m = self.phase(phase);
            let p = phase.name();
            e.push((format!("{p}.episodes"), m.episodes.to_string()));
            for kind in OutcomeKind::ALL {
                e.push((format!("{p}.{}_count", kind.name()), m.count(kind).to_string()));
            }
            for kind in OutcomeKind::ALL {
                e.push((format!("{p}.{}_rate", kind.name()), format!("{:?}", m.rate(kind))));
            }
            e.push((format!("{p}.mean_length"), format!("{:?}", m.mean_length())));
            for player in Player::BOTH {
                e.push((format!("{p}.mean_reward.{player}"), format!("{:?}", m.mean_reward(player))));
                e.push((format!("{p}.std_reward.{player}"), format!("{:?}", m.std_reward(player))));
            }
        }
        e
    }

    pub fn to_table(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }
}

/// What to do with episode records besides aggregating them.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for the artifact files; created if missing.
    pub out_dir: Option<PathBuf>,
    /// Keep every record in memory in [`BenchmarkRun::records`].
    pub keep_records: bool,
}

pub struct BenchmarkRun {
    pub game: Game,
    pub summary: BenchmarkSummary,
    /// Indexed by [`Player::index`], in their state after the run.
    pub agents: [Box<dyn Agent>; 2],
    pub records: Vec<EpisodeRecord>,
}

/// The environment of a run: the built game and its agents.
struct Runner {
    game: Game,
    settings: EpisodeSettings,
    master: u64,
    agents: [Box<dyn Agent>; 2],
}

impl Runner {
    fn new(config: &ScenarioConfig) -> Result<Self, HarnessError> {
        let game = build_seeded_scenario(config)?;
        Ok(Self {
            game,
            settings: EpisodeSettings { first_speaker: config.first_speaker, noise_spread: config.noise_spread },
            master: config.seed,
            agents: Player::BOTH.map(|p| config.agents.get(p).build()),
        })
    }

    fn episode(&mut self, phase: Phase, index: u64, total: u64) -> Result<EpisodeRecord, HarnessError> {
        let seed = seed::episode_seed(self.master, phase, index);
        let ctx = EpisodeContext { phase, index, total };
        let [a, b] = &mut self.agents;
        run_episode(&self.game, [a.as_mut(), b.as_mut()], seed, &ctx, &self.settings)
            .map_err(|source| HarnessError::Episode { phase, index, seed, source })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Runs the training episodes, with learning enabled, then the evaluation
/// episodes with frozen agents.
pub fn run_benchmark(config: &ScenarioConfig, options: &RunOptions) -> Result<BenchmarkRun, HarnessError> {
    config.validate()?;
    let mut runner = Runner::new(config)?;
    let mut summary = BenchmarkSummary {
        name: config.name.clone(),
        seed: config.seed,
        mode: config.mode,
        preset: config.preset,
        noise_spread: config.noise_spread,
        agents: [runner.agents[0].name().to_string(), runner.agents[1].name().to_string()],
        train: PhaseMetrics::default(),
        eval: PhaseMetrics::default(),
    };

    let mut log = match &options.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            let config_path = dir.join("config.toml");
            std::fs::write(&config_path, config.to_toml_string()).map_err(io_err(&config_path))?;
            let scenario_path = dir.join("scenario.json");
            let scenario = serde_json::to_string_pretty(&runner.game).expect("games serialise to JSON");
            std::fs::write(&scenario_path, scenario + "\n").map_err(io_err(&scenario_path))?;
            let log_path = dir.join("episodes.jsonl");
            let file = File::create(&log_path).map_err(io_err(&log_path))?;
            Some((log_path, BufWriter::new(file)))
        }
        None => None,
    };

    let mut records = Vec::new();
    let mut outcome = Ok(());
    'phases: for (phase, total) in [(Phase::Train, config.episodes.train), (Phase::Eval, config.episodes.eval)] {
        for index in 0..total {
            let record = match runner.episode(phase, index, total) {
                Ok(r) => r,
                Err(e) => {
                    outcome = Err(e);
                    break 'phases;
                }
            };
            match phase {
                Phase::Train => summary.train.record(&record),
                Phase::Eval => summary.eval.record(&record),
            }
            if let Some((path, w)) = &mut log {
                writeln!(w, "{}", record.to_json_line()).map_err(io_err(path))?;
            }
            if options.keep_records {
                records.push(record);
            }
        }
    }

    if let Some(dir) = &options.out_dir {
        if let Some((path, mut w)) = log {
            w.flush().map_err(io_err(&path))?;
        }
        let summary_path = dir.join("summary.tsv");
        std::fs::write(&summary_path, summary.to_table()).map_err(io_err(&summary_path))?;
        for player in Player::BOTH {
            if let Some(table) = runner.agents[player.index()].value_table() {
                table.save(&dir.join(format!("qtable.{player}.tsv")))?;
            }
        }
    }
    outcome?;
    Ok(BenchmarkRun { game: runner.game, summary, agents: runner.agents, records })
}

/// Re-executes episode `index` of `phase`. Training episodes before it (all
/// of them for an evaluation episode) are replayed first so that learning
/// agents are in the same state; evaluation episodes do not depend on each
/// other.
pub fn replay_episode(config: &ScenarioConfig, phase: Phase, index: u64) -> Result<EpisodeRecord, HarnessError> {
    config.validate()?;
    let counts = config.episodes;
    let total = match phase {
        Phase::Train => counts.train,
        Phase::Eval => counts.eval,
    };
    if index >= total {
        return Err(HarnessError::Config(format!(
            "{} episode {index} does not exist (the run has {total})",
            phase.name()
        )));
    }
    let mut runner = Runner::new(config)?;
    let warmup = match phase {
        Phase::Train => index,
        Phase::Eval => counts.train,
    };
    for i in 0..warmup {
        runner.episode(Phase::Train, i, counts.train)?;
    }
    runner.episode(phase, index, total)
}
