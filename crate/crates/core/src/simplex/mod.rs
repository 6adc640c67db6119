//! Configurations on the energy simplex, the flat Dirichlet measure and its
//! marginals, exact moment oracles and the structural maps between simplices.

mod moments;
mod sampling;

pub use moments::{
    conditional_moment, dirichlet_real_moment, flat_moment, ln_gamma, marginal_moment,
    pair_weighted_moment, slice_weighted_moment, ConditionalOrder, DirichletMomentOracle,
    MarginalLaw, MomentValue, CONDITIONAL_CAPS,
};
pub use sampling::{
    rescale, sample_gamma_dirichlet, sample_marginal, sample_uniform, slice_map, stream_rng,
    SimRng,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the mean-energy constraint of a configuration.
pub const SUM_TOL: f64 = 1e-12;

/// A point of the simplex: `N` nonnegative energies with mean `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    energies: Vec<f64>,
    mean_energy: f64,
}

impl Configuration {
    pub fn new(energies: Vec<f64>, mean_energy: f64) -> Result<Self> {
        let c = Self { energies, mean_energy };
        c.validate()?;
        Ok(c)
    }

    /// Configuration whose mean is read off from the energies themselves.
    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let n = energies.len().max(1) as f64;
        let mean = energies.iter().sum::<f64>() / n;
        Self::new(energies, mean)
    }

    pub fn uniform_point(n: usize, mean_energy: f64) -> Result<Self> {
        Self::new(vec![mean_energy; n], mean_energy)
    }

    fn validate(&self) -> Result<()> {
        let n = self.energies.len();
        if n < 2 {
            return Err(Error::InvalidParam(format!("need at least 2 particles, got {n}")));
        }
        if !(self.mean_energy > 0.0 && self.mean_energy.is_finite()) {
            return Err(Error::InvalidParam(format!("mean energy must be positive, got {}", self.mean_energy)));
        }
        if let Some(&e) = self.energies.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParam(format!("negative or non-finite energy {e}")));
        }
        let mean = self.energies.iter().sum::<f64>() / n as f64;
        if (mean - self.mean_energy).abs() > SUM_TOL * self.mean_energy.max(1.0) {
            return Err(Error::InvalidParam(format!(
                "mean energy {mean} differs from declared {}",
                self.mean_energy
            )));
        }
        Ok(())
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_energy
    }

    pub fn n(&self) -> usize {
        self.energies.len()
    }

    pub fn total(&self) -> f64 {
        self.mean_energy * self.energies.len() as f64
    }

    /// Rescales all entries so they sum to `N * E` exactly up to rounding.
    pub fn renormalize(&mut self) {
        let s: f64 = self.energies.iter().sum();
        if s > 0.0 {
            let f = self.total() / s;
            self.energies.iter_mut().for_each(|e| *e *= f);
        }
    }

    pub(crate) fn energies_mut(&mut self) -> &mut [f64] {
        &mut self.energies
    }

    pub fn permuted(&self, perm: &[usize]) -> Configuration {
        Configuration {
            energies: perm.iter().map(|&p| self.energies[p]).collect(),
            mean_energy: self.mean_energy,
        }
    }
}

/// Model and numerical settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub n_particles: usize,
    pub mean_energy: f64,
    pub rng_seed: u64,
    pub abs_tol: f64,
    pub max_degree: usize,
}

impl ModelParams {
    pub fn new(gamma: f64, n_particles: usize, mean_energy: f64) -> Result<Self> {
        let p = Self {
            gamma,
            n_particles,
            mean_energy,
            rng_seed: 0,
            abs_tol: 1e-10,
            max_degree: 4,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_max_degree(mut self, d: usize) -> Result<Self> {
        self.max_degree = d;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParam(format!("gamma must lie in [0,1], got {}", self.gamma)));
        }
        if self.n_particles < 2 {
            return Err(Error::InvalidParam(format!("need N >= 2, got {}", self.n_particles)));
        }
        if !(self.mean_energy > 0.0 && self.mean_energy.is_finite()) {
            return Err(Error::InvalidParam(format!("mean energy must be positive, got {}", self.mean_energy)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParam("abs_tol must be positive".into()));
        }
        if self.max_degree < 1 {
            return Err(Error::InvalidParam("max_degree must be >= 1".into()));
        }
        Ok(())
    }

    /// Deterministic generator for the given stream of this run.
    pub fn rng(&self, stream: u64) -> SimRng {
        stream_rng(self.rng_seed, stream)
    }
}
