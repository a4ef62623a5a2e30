//! Spike-and-slab EM for the Gaussian profile model.
//!
//! Off-diagonal precision entries get a Laplace spike-and-slab prior driven
//! by per-level indicators `r_ij,x`, which are tied across levels through a
//! global edge indicator `gamma_ij` and the factor-effect indicators
//! `theta_i`. Mean offsets get a Normal spike-and-slab driven by `theta_i`.
//! The E-step produces the posterior means of the indicators, the M-step is a
//! ridge update for the offsets and a weighted graphical lasso per level.

mod estep;
mod fit;
mod mstep;

use serde::{Deserialize, Serialize};

pub use estep::{
    e_step, e_step_exact, e_step_with, log_marginal_posterior, EStepRule, DEFAULT_Q_MAX, EXACT_P_MAX, POSTERIOR_P_MAX,
};
pub use fit::{fit, log_q_objective, EmState, FitConfig, Init, TraceEntry};
pub use mstep::{m_step_beta, m_step_omega, omega_objective, OmegaSolverOptions};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Hyperparameters<T> {
    /// Prior inclusion probability of the global edge indicator.
    pub p1: T,
    /// Prior probability that a vertex responds to the factor.
    pub p2: T,
    /// Per-level edge probability when both endpoints respond to the factor.
    pub p3: T,
    /// Probability of the shared edge indicator otherwise.
    pub p4: T,
    pub nu0: T,
    pub nu1: T,
    pub lambda0: T,
    pub lambda1: T,
    pub tau: T,
    pub spectral_bound: T,
}

impl<T: Real> Default for Hyperparameters<T> {
    fn default() -> Self {
        Self {
            p1: T::of(0.5),
            p2: T::of(0.5),
            p3: T::of(0.5),
            p4: T::of(0.5),
            nu0: T::of(0.05),
            nu1: T::of(1.0),
            lambda0: T::of(0.05),
            lambda1: T::of(10.0),
            tau: T::of(0.1),
            spectral_bound: T::of(1e6),
        }
    }
}

impl<T: Real> Hyperparameters<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3), ("p4", self.p4)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::input(format!("{name} must lie strictly between 0 and 1, got {v}")));
            }
        }
        if !(self.nu0 > T::zero() && self.nu1 > self.nu0) {
            return Err(Error::input("need nu1 > nu0 > 0"));
        }
        if !(self.lambda0 > T::zero() && self.lambda1 > self.lambda0) {
            return Err(Error::input("need lambda1 > lambda0 > 0"));
        }
        if !(self.tau > T::zero()) {
            return Err(Error::input("tau must be positive"));
        }
        if !(self.spectral_bound > T::zero()) {
            return Err(Error::input("the spectral bound must be positive"));
        }
        Ok(())
    }

    /// Ridge weight `theta/lambda1 + (1 - theta)/lambda0` on an offset.
    pub fn beta_penalty(&self, theta: T) -> T {
        theta / self.lambda1 + (T::one() - theta) / self.lambda0
    }

    /// Lasso weight `r/nu1 + (1 - r)/nu0` on a precision entry.
    pub fn omega_penalty(&self, r: T) -> T {
        r / self.nu1 + (T::one() - r) / self.nu0
    }
}

/// Laplace density with scale `nu`.
pub fn laplace_density<T: Real>(w: T, nu: T) -> T {
    laplace_log_density(w, nu).exp()
}

pub fn laplace_log_density<T: Real>(w: T, nu: T) -> T {
    -w.abs() / nu - (T::two() * nu).ln()
}

/// Zero-mean Normal density with variance `lambda`.
pub fn normal_density<T: Real>(b: T, lambda: T) -> T {
    normal_log_density(b, lambda).exp()
}

pub fn normal_log_density<T: Real>(b: T, lambda: T) -> T {
    -T::half() * (b * b / lambda + (T::two() * T::PI() * lambda).ln())
}

/// Posterior means of the indicators. `gamma` and each `r[x]` are symmetric
/// `p × p` matrices with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PosteriorSummaries<T> {
    pub theta: Vec<T>,
    pub gamma: Matrix<T>,
    pub r: Vec<Matrix<T>>,
}

impl<T: Real> PosteriorSummaries<T> {
    pub fn p(&self) -> usize {
        self.theta.len()
    }

    pub fn q(&self) -> usize {
        self.r.len()
    }

    /// Every entry lies in `[0, 1]` and the shapes agree.
    pub fn check(&self) -> Result<()> {
        let p = self.p();
        let in_unit = |v: T| v >= T::zero() && v <= T::one();
        if self.gamma.rows() != p || self.gamma.cols() != p || self.r.iter().any(|m| m.rows() != p || m.cols() != p) {
            return Err(Error::input("posterior summaries have inconsistent shapes"));
        }
        let ok = self.theta.iter().all(|&v| in_unit(v))
            && self.gamma.as_slice().iter().all(|&v| in_unit(v))
            && self.r.iter().all(|m| m.as_slice().iter().all(|&v| in_unit(v)));
        if ok {
            Ok(())
        } else {
            Err(Error::input("posterior summaries must lie in [0, 1]"))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.check()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }
}
