//! Seeded random-matrix ensembles.
//!
//! Every trial owns an independent ChaCha stream seeded from a stable 64-bit
//! mix of `(master_seed, trial)`, so results do not depend on the order in
//! which trials are executed.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{project, Operator, SubspaceTag, TracedAlgebra};
use crate::error::{Error, Result};

/// Mixed absolute/relative guard: `lhs <= rhs * (1 + rel) + abs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn bound_holds(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs * (1.0 + self.rel) + self.abs
    }

    pub fn residual_holds(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs + self.rel * scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub partition: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub tolerances: Tolerances,
}

impl EnsembleConfig {
    pub fn new(partition: Vec<usize>, trials: usize, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            n: partition.iter().sum(),
            partition,
            trials,
            master_seed,
            tolerances: Tolerances::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        TracedAlgebra::with_dimension(self.n, self.partition.clone())?;
        Ok(())
    }

    pub fn algebra(&self) -> Result<Arc<TracedAlgebra>> {
        Ok(Arc::new(TracedAlgebra::with_dimension(
            self.n,
            self.partition.clone(),
        )?))
    }

    pub fn sampler(&self, trial: usize) -> Result<TrialSampler> {
        Ok(TrialSampler::new(self.algebra()?, self.master_seed, trial))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// i.i.d. complex Gaussian entries of variance `1/n`.
    General,
    /// `(g + g*) / 2`.
    SelfAdjoint,
    /// `g* g`.
    Positive,
    /// `g` with the entries below the block diagonal removed.
    BlockUpper,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trial seed.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(master_seed) ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Draws the operators of one trial.
pub struct TrialSampler {
    algebra: Arc<TracedAlgebra>,
    rng: ChaCha8Rng,
}

impl TrialSampler {
    pub fn new(algebra: Arc<TracedAlgebra>, master_seed: u64, trial: usize) -> Self {
        Self {
            algebra,
            rng: ChaCha8Rng::seed_from_u64(trial_seed(master_seed, trial)),
        }
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    fn gaussian_matrix(&mut self) -> DMatrix<Complex64> {
        let n = self.algebra.n();
        let sd = (0.5 / n as f64).sqrt();
        DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            Complex64::new(re * sd, im * sd)
        })
    }

    pub fn draw(&mut self, kind: EnsembleKind) -> Operator {
        let g = Operator::wrap(self.algebra.clone(), self.gaussian_matrix());
        match kind {
            EnsembleKind::General => g,
            EnsembleKind::SelfAdjoint => g.real_part(),
            EnsembleKind::Positive => &g.adjoint() * &g,
            EnsembleKind::BlockUpper => project(&g, SubspaceTag::Hinf),
        }
    }

    /// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
    pub fn unitary(&mut self) -> Operator {
        let qr = self.gaussian_matrix().qr();
        let (mut q, r) = qr.unpack();
        let n = self.algebra.n();
        for c in 0..n {
            let d = r[(c, c)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, c)] *= phase;
            }
        }
        Operator::wrap(self.algebra.clone(), q)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }
}

/// First operator of the given kind in trial `trial`.
pub fn random_operator(cfg: &EnsembleConfig, kind: EnsembleKind, trial: usize) -> Result<Operator> {
    Ok(cfg.sampler(trial)?.draw(kind))
}
