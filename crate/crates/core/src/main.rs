use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use negotiation_game::agents::Phase;
use negotiation_game::game::{solve_exhaustive, Player};
use negotiation_game::harness::{
    build_seeded_scenario, replay_episode, run_benchmark, EpisodeRecord, Preset, RunOptions,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "negobench", version, about = "Negotiation dialogue game benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate the configured agents.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of evaluation episodes.
        #[arg(long)]
        episodes: Option<u64>,
        /// Number of training episodes.
        #[arg(long)]
        train: Option<u64>,
        /// Directory for records, summary and value tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the noiseless scenario exactly by backward induction.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of turns searched.
        #[arg(long, default_value_t = 6)]
        horizon: u32,
        /// Set every error rate to zero before solving.
        #[arg(long)]
        noiseless: bool,
    },
    /// Re-execute a recorded episode and compare it with the record.
    Replay {
        /// Output directory of an earlier `run`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PhaseArg::Eval)]
        phase: PhaseArg,
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML). Defaults to a built-in appointment scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Appointment,
    Furniture,
    Zerosum,
    Coop,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Appointment => Preset::Appointment,
            PresetArg::Furniture => Preset::Furniture,
            PresetArg::Zerosum => Preset::Zerosum,
            PresetArg::Coop => Preset::Coop,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PhaseArg {
    Train,
    Eval,
}

impl From<PhaseArg> for Phase {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Train => Phase::Train,
            PhaseArg::Eval => Phase::Eval,
        }
    }
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::builtin(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(p) = self.preset {
            config = config.with_preset(p.into());
        }
        Ok(config)
    }
}

fn run(scenario: &ScenarioArgs, episodes: Option<u64>, train: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut config = scenario.load()?;
    if let Some(n) = episodes {
        config.episodes.eval = n;
    }
    if let Some(n) = train {
        config.episodes.train = n;
    }
    let options = RunOptions { out_dir: out.clone(), keep_records: false };
    let result = run_benchmark(&config, &options)?;
    print!("{}", result.summary.to_table());
    if let Some(dir) = out {
        eprintln!("artifacts written to {}", dir.display());
    }
    Ok(())
}

fn solve(scenario: &ScenarioArgs, horizon: u32, noiseless: bool) -> Result<()> {
    let mut config = scenario.load()?;
    if noiseless {
        for player in Player::BOTH {
            let spec = config.player_mut(player);
            spec.error_rate = 0.0;
            spec.slot_error_rates = None;
        }
    }
    let game = build_seeded_scenario(&config)?;
    for first in Player::BOTH {
        let sol = solve_exhaustive(&game, horizon, first)?;
        println!(
            "first={first}\thorizon={horizon}\tvalue.system={:?}\tvalue.user={:?}\troot_act={}\tstates={}",
            sol.values[0], sol.values[1], sol.root_act, sol.states
        );
    }
    Ok(())
}

fn find_record(path: &Path, phase: Phase, index: u64) -> Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    for (n, line) in text.lines().enumerate() {
        let record: EpisodeRecord =
            serde_json::from_str(line).with_context(|| format!("{}: line {}", path.display(), n + 1))?;
        if record.phase == phase && record.index == index {
            return Ok(line.to_string());
        }
    }
    bail!("{} has no {} episode {index}", path.display(), phase.name())
}

fn replay(out: &Path, phase: Phase, index: u64) -> Result<bool> {
    let config = ScenarioConfig::load(&out.join("config.toml"))?;
    let recorded = find_record(&out.join("episodes.jsonl"), phase, index)?;
    let replayed = replay_episode(&config, phase, index)?.to_json_line();
    if replayed == recorded {
        println!("{} episode {index}: identical", phase.name());
        Ok(true)
    } else {
        println!("{} episode {index}: DIFFERS", phase.name());
        println!("recorded: {recorded}");
        println!("replayed: {replayed}");
        Ok(false)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, episodes, train, out } => run(&scenario, episodes, train, out).map(|_| true),
        Command::Solve { scenario, horizon, noiseless } => solve(&scenario, horizon, noiseless).map(|_| true),
        Command::Replay { out, phase, index } => replay(&out, phase.into(), index),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
