use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    e_step_with, log_marginal_posterior, m_step_beta, m_step_omega, EStepRule, Hyperparameters, OmegaSolverOptions, PosteriorSummaries,
    DEFAULT_Q_MAX, POSTERIOR_P_MAX,
};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianProfileParams, ProfileDataset};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Starting point of the EM loop.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Init<T> {
    /// `Omega_x = (S_x + 0.1 I)^{-1}` about the level means, `beta_x` the
    /// level means of the centred data.
    #[default]
    Default,
    /// Start from the given parameters; `alpha` is replaced by the pooled means.
    Params(GaussianProfileParams<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<T> {
    pub max_iter: usize,
    /// Stop once `|Q_t - Q_{t-1}| <= tol * max(1, |Q_{t-1}|)`.
    pub tol: f64,
    pub init: Init<T>,
    pub rule: EStepRule,
    pub q_max: usize,
    pub omega_solver: OmegaSolverOptions,
    /// Record the marginal log posterior in the trace (needs `p <= POSTERIOR_P_MAX`).
    pub track_posterior: bool,
}

impl<T> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            tol: 1e-6,
            init: Init::Default,
            rule: EStepRule::Auto,
            q_max: DEFAULT_Q_MAX,
            omega_solver: OmegaSolverOptions::default(),
            track_posterior: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Objective at the parameters after this iteration's M-step, with the
    /// summaries that M-step used.
    pub q: f64,
    /// Objective at the previous parameters with the same summaries; `q`
    /// never falls below it when the M-step is exact.
    pub q_before: f64,
    pub max_delta_omega: f64,
    pub max_delta_beta: f64,
    /// Log posterior with the indicators summed out, when `p` is small
    /// enough to enumerate.
    pub log_posterior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmState<T> {
    pub params: GaussianProfileParams<T>,
    pub summaries: PosteriorSummaries<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Entry 0 is the starting point.
    pub trace: Vec<TraceEntry>,
}

/// Expected complete-data log posterior, keeping only the terms that depend
/// on the parameters:
///
/// `Σ_x [n_x/2 log det Ω_x − ½ Σ_k (y_k − α − β_x)ᵀ Ω_x (y_k − α − β_x)]
///  − ½ Σ_{x,i} β_ix² (θ_i/λ1 + (1−θ_i)/λ0)
///  − Σ_{x,i<j} |ω_ij,x| (r_ij,x/ν1 + (1−r_ij,x)/ν0) − τ Σ_{x,i} ω_ii,x`.
pub fn log_q_objective<T: Real>(
    params: &GaussianProfileParams<T>,
    summaries: &PosteriorSummaries<T>,
    data: &ProfileDataset<T>,
    hyper: &Hyperparameters<T>,
) -> Result<T> {
    let (p, q) = (params.p(), params.q());
    if data.p() != p || data.q() != q || summaries.p() != p || summaries.q() != q {
        return Err(Error::input("parameters, summaries and data disagree in shape"));
    }
    let mut total = T::zero();
    for x in 0..q {
        let omega = params.omega(x);
        let chol = omega
            .cholesky()
            .ok_or_else(|| Error::numerical(format!("precision at level {x} is not positive definite")))?;
        let center: Vec<T> = params.alpha().iter().zip(params.beta(x)).map(|(&a, &b)| a + b).collect();
        let s = data.scatter(x, &center);
        let n = T::of(data.n(x) as f64);
        total = total + n * T::half() * (chol.log_det() - s.trace_of_product(omega));
        for i in 0..p {
            let b = params.beta(x)[i];
            total = total - T::half() * b * b * hyper.beta_penalty(summaries.theta[i]);
            total = total - hyper.tau * omega[(i, i)];
            for j in (i + 1)..p {
                total = total - omega[(i, j)].abs() * hyper.omega_penalty(summaries.r[x][(i, j)]);
            }
        }
    }
    Ok(total)
}

fn posterior<T: Real>(
    params: &GaussianProfileParams<T>,
    data: &ProfileDataset<T>,
    hyper: &Hyperparameters<T>,
    config: &FitConfig<T>,
) -> Result<Option<f64>> {
    if !config.track_posterior || params.p() > POSTERIOR_P_MAX {
        return Ok(None);
    }
    Ok(Some(log_marginal_posterior(params, data, hyper)?.as_f64()))
}

fn with_context(e: Error, iteration: usize) -> Error {
    if e.is_numerical() {
        Error::numerical(format!("EM iteration {iteration}: {e}"))
    } else {
        e
    }
}

fn initial_params<T: Real>(
    centred: &ProfileDataset<T>,
    alpha: &[T],
    init: &Init<T>,
) -> Result<GaussianProfileParams<T>> {
    let q = centred.q();
    let (beta, omega) = match init {
        Init::Default => {
            let mut beta = Vec::with_capacity(q);
            let mut omega = Vec::with_capacity(q);
            for x in 0..q {
                let n = T::of(centred.n(x) as f64);
                let mean: Vec<T> = centred.column_sums(x).into_iter().map(|v| v / n).collect();
                let mut s = centred.scatter(x, &mean);
                s.add_diagonal(T::of(0.1));
                omega.push(s.spd_inverse().ok_or_else(|| Error::numerical("initial precision is singular"))?);
                beta.push(mean);
            }
            (beta, omega)
        }
        Init::Params(start) => {
            if start.p() != centred.p() || start.q() != q {
                return Err(Error::input("initial parameters do not match the data shape"));
            }
            // offsets are relative to the pooled means used here
            let beta = (0..q)
                .map(|x| {
                    start.beta(x).iter().zip(start.alpha()).zip(alpha).map(|((&b, &a0), &a)| b + a0 - a).collect()
                })
                .collect();
            (beta, start.omegas().to_vec())
        }
    };
    GaussianProfileParams::new(
        centred.levels().to_vec(),
        centred.vertices().to_vec(),
        alpha.to_vec(),
        beta,
        omega,
    )
}

fn max_delta<'a, T: Real>(a: impl Iterator<Item = &'a T>, b: impl Iterator<Item = &'a T>) -> f64 {
    a.zip(b).fold(0.0, |m, (&u, &v)| m.max((u - v).abs().as_f64()))
}

/// Runs EM from the configured start. The data are centred once by their
/// pooled column means, which become `alpha`; each iteration updates every
/// level's precision about its current offsets, then the offsets given the
/// new precision, then the summaries.
pub fn fit<T: Real>(data: &ProfileDataset<T>, hyper: &Hyperparameters<T>, config: &FitConfig<T>) -> Result<EmState<T>> {
    hyper.validate()?;
    if !(config.tol >= 0.0) {
        return Err(Error::input("tolerance must be non-negative"));
    }
    let (centred, alpha) = data.centered();
    let q = data.q();
    let mut params = initial_params(&centred, &alpha, &config.init)?;
    let mut summaries = e_step_with(&params, hyper, config.rule, config.q_max).map_err(|e| with_context(e, 0))?;
    let mut prev_q = log_q_objective(&params, &summaries, data, hyper)?;
    let mut trace = vec![TraceEntry { iteration: 0, q: prev_q.as_f64(), q_before: prev_q.as_f64(),
        max_delta_omega: 0.0,
        max_delta_beta: 0.0,
        log_posterior: posterior(&params, data, hyper, config)?,
    }];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        let t = iterations + 1;
        let updates: Vec<Result<(Vec<T>, Matrix<T>)>> = (0..q)
            .into_par_iter()
            .map(|x| {
                let s = centred.scatter(x, params.beta(x));
                let omega = m_step_omega(&s, centred.n(x), &summaries.r[x], hyper, &config.omega_solver)?;
                let beta = m_step_beta(centred.level(x), &omega, &summaries.theta, hyper)?;
                Ok((beta, omega))
            })
            .collect();
        let mut betas = Vec::with_capacity(q);
        let mut omegas = Vec::with_capacity(q);
        for u in updates {
            let (b, o) = u.map_err(|e| with_context(e, t))?;
            betas.push(b);
            omegas.push(o);
        }
        let next = params.with_updates(betas, omegas).map_err(|e| with_context(e, t))?;
        let value = log_q_objective(&next, &summaries, data, hyper)?;
        let before = log_q_objective(&params, &summaries, data, hyper)?;
        let d_omega = (0..q)
            .map(|x| next.omega(x).max_abs_diff(params.omega(x)).as_f64())
            .fold(0.0, f64::max);
        let d_beta = (0..q).map(|x| max_delta(next.beta(x).iter(), params.beta(x).iter())).fold(0.0, f64::max);
        trace.push(TraceEntry {
            iteration: t,
            q: value.as_f64(),
            q_before: before.as_f64(),
            max_delta_omega: d_omega,
            max_delta_beta: d_beta,
            log_posterior: posterior(&next, data, hyper, config)?,
        });
        params = next;
        summaries = e_step_with(&params, hyper, config.rule, config.q_max).map_err(|e| with_context(e, t))?;
        iterations = t;
        let change = (value - prev_q).abs().as_f64();
        prev_q = value;
        if change <= config.tol * prev_q.abs().as_f64().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(EmState { params, summaries, iterations, converged, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ProfileDataset<f64> {
        let l0 = Matrix::from_rows(&[
            vec![0.3, -1.2, 0.5],
            vec![1.1, 0.4, -0.2],
            vec![-0.7, 0.9, 1.4],
            vec![0.2, -0.3, -0.9],
            vec![1.5, 0.8, 0.1],
        ])
        .unwrap();
        let l1 = Matrix::from_rows(&[
            vec![2.1, 0.2, 0.4],
            vec![1.4, -0.6, 0.9],
            vec![2.8, 0.1, -0.3],
            vec![1.9, 1.0, 0.6],
        ])
        .unwrap();
        ProfileDataset::new(vec!["0".into(), "1".into()], vec!["a".into(), "b".into(), "c".into()], vec![l0, l1])
            .unwrap()
    }

    #[test]
    fn fit_runs_and_ascends() {
        let state = fit(&toy(), &Hyperparameters::default(), &FitConfig::default()).unwrap();
        assert!(state.converged);
        assert!(state.summaries.check().is_ok());
        assert!(state.trace[1].q >= state.trace[0].q - 1e-8);
    }

    #[test]
    fn single_row_levels_terminate() {
        let d = ProfileDataset::new(
            vec!["0".into(), "1".into()],
            vec!["a".into(), "b".into()],
            vec![Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap(), Matrix::from_rows(&[vec![-1.0, 0.5]]).unwrap()],
        )
        .unwrap();
        let cfg = FitConfig { max_iter: 50, ..FitConfig::default() };
        let state = fit(&d, &Hyperparameters::default(), &cfg).unwrap();
        assert!(state.iterations <= 50);
        assert!(state.params.omegas().iter().all(Matrix::is_positive_definite));
    }

    #[test]
    fn objective_is_deterministic() {
        let d = toy();
        let h = Hyperparameters::default();
        let state = fit(&d, &h, &FitConfig { max_iter: 3, ..FitConfig::default() }).unwrap();
        let a = log_q_objective(&state.params, &state.summaries, &d, &h).unwrap();
        let b = log_q_objective(&state.params, &state.summaries, &d, &h).unwrap();
        assert_eq!(a, b);
    }
}
