//! Simulator and benchmark harness for a negotiation dialogue game over
//! compounded options.
//!
//! Two players, a system and a user, negotiate an option described by
//! several feature values. They exchange symbolic dialogue acts; the system
//! hears the user through a noisy channel that corrupts feature values and
//! attaches a confidence score to each one. Terminal rewards depend on each
//! player's costs, its agreement utility and a cooperation weight, so the
//! same engine covers zero-sum, fully cooperative and general-sum games.
//!
//! * [`game`]: rules, rewards, legality, transitions and an exact solver.
//! * [`perception`]: the noisy channel and confidence scores.
//! * [`agents`]: random, rule-based and tabular Q-learning players.
//! * [`harness`]: scenarios, seeded episodes, benchmarks and records.

pub mod agents;
pub mod game;
pub mod harness;
pub mod perception;
