//! Sliced optimal transport sampling on `S^d`, `H^d` and `P^d`.

mod config;
mod measure;
pub mod projective;
mod run;
pub mod targets;
mod weiszfeld;

pub use config::{default_decay, Pooling, RunTrace, SamplerConfig};
pub use measure::{subsample, DiscreteMeasure, Space};
pub use run::{
    init_rng, initial_subsample, mix_seed, nesots_run, nesots_run_from, projective_run, projective_run_from, slice_rng,
    RunOptions,
};
pub use weiszfeld::{geometric_median, geometric_median_into, median_objective, DEFAULT_MAX_ITER};
