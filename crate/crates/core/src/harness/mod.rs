//! Benchmark harness: scenario files, seeded episodes, training and
//! evaluation runs, metrics and records.

mod benchmark;
mod config;
mod episode;
mod scenario;
pub mod seed;

use std::path::PathBuf;

pub use benchmark::{
    replay_episode, run_benchmark, BenchmarkRun, BenchmarkSummary, PhaseMetrics, RunOptions,
    SUMMARY_FORMAT,
};
pub use config::{
    AgentSpec, AgentsSpec, CostDistribution, CostSpec, EpisodeCounts, FirstSpeaker, PlayerSpec,
    Preset, ScenarioConfig, SpaceSpec, SCHEMA_VERSION,
};
pub use episode::{run_episode, EpisodeRecord, EpisodeSettings, TurnRecord};
pub use scenario::{apply_preset, build_scenario, build_seeded_scenario};

use crate::agents::{Phase, QTableError};
use crate::game::GameError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{} episode {index} (seed {seed}): {source}", phase.name())]
    Episode {
        phase: Phase,
        index: u64,
        seed: u64,
        #[source]
        source: GameError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    QTable(#[from] QTableError),
}
