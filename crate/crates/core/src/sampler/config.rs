//! Hyperparameters of the sliced optimizer and the per-run trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ot1d::Power;

/// How the per-slice directions of a point are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    Mean,
    GeometricMedian,
}

impl Pooling {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Pooling::Mean),
            "median" | "geometric-median" => Ok(Pooling::GeometricMedian),
            other => Err(Error::Parse(format!("unknown pooling `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Number of output samples.
    pub n: usize,
    /// Number of target atoms.
    pub m: usize,
    /// Iterations `K`.
    pub iterations: usize,
    /// Slices per iteration `L`.
    pub batch: usize,
    pub gamma0: f64,
    /// Per-iteration step multiplier.
    pub decay: f64,
    /// Weiszfeld smoothing and stopping threshold.
    pub tau: f64,
    /// Weiszfeld iteration cap per point.
    pub weiszfeld_max_iter: usize,
    pub p: Power,
    pub seed: u64,
    pub pooling: Pooling,
    /// Fixed probe slices for the energy trace; 0 disables the trace energy.
    pub trace_probes: usize,
}

/// Decay such that the last step is 5% of the first.
pub fn default_decay(iterations: usize) -> f64 {
    0.05f64.powf(1.0 / iterations.max(1) as f64)
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self::new(1024, 8192)
    }
}

impl SamplerConfig {
    /// Defaults: `K = 300`, `L = 32`, `gamma0 = 1`, `tau = 1e-7`, `p = 2`,
    /// geometric-median pooling.
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            iterations: 300,
            batch: 32,
            gamma0: 1.0,
            decay: default_decay(300),
            tau: 1e-7,
            weiszfeld_max_iter: 200,
            p: Power::Two,
            seed: 0,
            pooling: Pooling::GeometricMedian,
            trace_probes: 8,
        }
    }

    /// Sets `K` and resets the decay to its default for that horizon.
    pub fn with_iterations(mut self, k: usize) -> Self {
        self.iterations = k;
        self.decay = default_decay(k);
        self
    }

    pub fn with_batch(mut self, l: usize) -> Self {
        self.batch = l;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pooling(mut self, pooling: Pooling) -> Self {
        self.pooling = pooling;
        self
    }

    pub fn step(&self, j: usize) -> f64 {
        self.gamma0 * self.decay.powi(j as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.n > self.m {
            return Err(Error::InvalidConfig(format!("n = {} exceeds m = {}", self.n, self.m)));
        }
        self.validate_loop()
    }

    /// Checks the optimizer settings only, for runs whose sizes come from the
    /// measures themselves.
    pub fn validate_loop(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.iterations == 0 || self.batch == 0 {
            return bad("K and L must be at least 1".into());
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return bad(format!("gamma0 = {} must be positive", self.gamma0));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad(format!("decay = {} must lie in (0, 1]", self.decay));
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau = {} must be positive", self.tau));
        }
        if self.weiszfeld_max_iter == 0 {
            return bad("weiszfeld_max_iter must be positive".into());
        }
        Ok(())
    }

    /// Projective runs match `2n` antipodal copies against the target.
    pub fn validate_projective(&self) -> Result<()> {
        self.validate()?;
        if 2 * self.n > self.m {
            return Err(Error::InvalidConfig(format!(
                "projective mode needs 2n <= m, got n = {} and m = {}",
                self.n, self.m
            )));
        }
        Ok(())
    }
}

/// Per-iteration record of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// Sliced `W_p^p` to the full target after each iteration, on probe
    /// slices fixed for the whole run.
    pub energy: Vec<f64>,
    /// Mean optimal 1D cost per atom against the subsampled targets of the
    /// batch.
    pub batch_cost: Vec<f64>,
    /// Seconds per iteration.
    pub seconds: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    /// Means over consecutive windows of length `w` (the last partial window
    /// is dropped).
    pub fn windowed_means(&self, w: usize) -> Vec<f64> {
        self.energy
            .chunks_exact(w.max(1))
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect()
    }
}
