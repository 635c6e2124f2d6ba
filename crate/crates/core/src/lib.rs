//! A headless multi-agent wildfire benchmark: procedurally generated maps,
//! a stochastic fire automaton, heterogeneous embodied agents, scored task
//! levels, language-model coordination frameworks and score aggregation.

pub mod config;
pub mod episode;
pub mod fire;
pub mod frameworks;
pub mod harness;
pub mod levels;
pub mod lm;
pub mod metrics;
pub mod perception;
pub mod prompt;
pub mod rng;
pub mod runlog;
pub mod terrain;
pub mod translate;
pub mod world;
