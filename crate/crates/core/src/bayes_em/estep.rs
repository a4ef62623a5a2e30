use super::{laplace_log_density, normal_log_density, Hyperparameters, PosteriorSummaries};
use crate::error::{Error, Result};
use crate::gaussian::{GaussianProfileParams, ProfileDataset};
use crate::linalg::Matrix;
use crate::scalar::{log_add_exp, log_sum_exp, logistic_ratio, Real};

/// Largest number of levels for which the mixed-indicator sums are enumerated.
pub const DEFAULT_Q_MAX: usize = 12;

/// Largest vertex count accepted by the exact E-step (it enumerates `2^p`
/// factor-effect configurations).
pub const EXACT_P_MAX: usize = 22;

/// How the indicator posteriors are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EStepRule {
    /// `Exact` when `p <= EXACT_P_MAX`, `Factorized` otherwise.
    #[default]
    Auto,
    /// Closed-form per-pair and per-vertex updates that treat the other
    /// indicators through their prior; linear in the number of pairs.
    Factorized,
    /// Exact marginals of the joint indicator posterior; exponential in `p`.
    Exact,
}

impl EStepRule {
    /// The rule actually used for `p` vertices.
    pub fn resolve(self, p: usize) -> EStepRule {
        match self {
            EStepRule::Auto if p <= EXACT_P_MAX => EStepRule::Exact,
            EStepRule::Auto => EStepRule::Factorized,
            other => other,
        }
    }
}

pub fn e_step_with<T: Real>(
    params: &GaussianProfileParams<T>,
    hyper: &Hyperparameters<T>,
    rule: EStepRule,
    q_max: usize,
) -> Result<PosteriorSummaries<T>> {
    match rule.resolve(params.p()) {
        EStepRule::Exact => e_step_exact(params, hyper),
        _ => e_step(params, hyper, q_max),
    }
}

/// Log densities of one pair's precision entries under slab and spike.
struct PairLogs<T> {
    l1: Vec<T>,
    l0: Vec<T>,
}

fn pair_logs<T: Real>(params: &GaussianProfileParams<T>, hyper: &Hyperparameters<T>, i: usize, j: usize) -> Result<PairLogs<T>> {
    let mut l1 = Vec::with_capacity(params.q());
    let mut l0 = Vec::with_capacity(params.q());
    for x in 0..params.q() {
        let w = params.omega(x)[(i, j)];
        let (a, b) = (laplace_log_density(w, hyper.nu1), laplace_log_density(w, hyper.nu0));
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite precision density for pair ({},{}) at level `{}`",
                params.vertices()[i],
                params.vertices()[j],
                params.levels()[x]
            )));
        }
        l1.push(a);
        l0.push(b);
    }
    Ok(PairLogs { l1, l0 })
}

/// `Σ_x log N(beta_ix; lambda)` for slab (`.0`) and spike (`.1`).
fn beta_logs<T: Real>(params: &GaussianProfileParams<T>, hyper: &Hyperparameters<T>) -> Result<Vec<(T, T)>> {
    (0..params.p())
        .map(|i| {
            let mut s1 = T::zero();
            let mut s0 = T::zero();
            for x in 0..params.q() {
                let b = params.beta(x)[i];
                s1 = s1 + normal_log_density(b, hyper.lambda1);
                s0 = s0 + normal_log_density(b, hyper.lambda0);
            }
            if s1.is_finite() && s0.is_finite() {
                Ok((s1, s0))
            } else {
                Err(Error::numerical(format!("non-finite offset density for vertex `{}`", params.vertices()[i])))
            }
        })
        .collect()
}

/// `log Σ_{k=1}^{q-1} p3^k (1-p3)^{q-k} Σ_{n ∈ A_q^(k)} Π_l P_{n_l}(ω_l)`,
/// enumerating every binary sequence with at least one slab and one spike.
fn log_mixed_sum<T: Real>(logs: &PairLogs<T>, ln_p3: T, ln_1m_p3: T) -> T {
    let q = logs.l1.len();
    let mut terms = Vec::with_capacity((1usize << q).saturating_sub(2));
    for mask in 1u64..(1u64 << q) - 1 {
        let mut t = T::zero();
        for l in 0..q {
            t = t + if mask & (1 << l) != 0 { ln_p3 + logs.l1[l] } else { ln_1m_p3 + logs.l0[l] };
        }
        terms.push(t);
    }
    log_sum_exp(&terms)
}

fn ln<T: Real>(v: T) -> T {
    v.ln()
}

/// Closed-form E-step.
///
/// `theta_i` combines the offset likelihoods with a sum over partners `j` of
/// the marginal density of `omega_ij,·`; `gamma_ij` integrates both endpoint
/// indicators against their offset likelihoods; `r_ij,x` mixes the
/// independent-level and tied-level posteriors, where the tied posterior is
/// the evidence from the other levels times the level's own odds.
pub fn e_step<T: Real>(params: &GaussianProfileParams<T>, hyper: &Hyperparameters<T>, q_max: usize) -> Result<PosteriorSummaries<T>> {
    hyper.validate()?;
    let (p, q) = (params.p(), params.q());
    if q > q_max {
        return Err(Error::TooManyLevels { levels: q, limit: q_max });
    }
    let (p1, p2, p3, p4) = (hyper.p1, hyper.p2, hyper.p3, hyper.p4);
    let one = T::one();
    let (ln_p3, ln_1m_p3) = (ln(p3), ln(one - p3));
    let qf = T::of(q as f64);
    let betas = beta_logs(params, hyper)?;

    // coefficients of the all-spike and all-slab products in P(omega_i. | theta_i)
    let c1_all0 = ln(p1 * p2 * (one - p3).powf(qf) + p1 * (one - p2) * (one - p4) + (one - p1) * p2);
    let c1_all1 = ln(p1 * p2 * p3.powf(qf) + p1 * (one - p2) * p4);
    let c1_mixed = ln(p1 * p2);
    let c0_all0 = ln(p1 * (one - p4) + (one - p1));
    let c0_all1 = ln(p1 * p4);

    let mut log_t1: Vec<Vec<T>> = vec![Vec::new(); p];
    let mut log_t0: Vec<Vec<T>> = vec![Vec::new(); p];
    let mut gamma = Matrix::zeros(p, p);
    let mut r = vec![Matrix::zeros(p, p); q];
    let mut pair_cache = Vec::with_capacity(p * (p.saturating_sub(1)) / 2);

    for i in 0..p {
        for j in (i + 1)..p {
            let logs = pair_logs(params, hyper, i, j)?;
            let sum1: T = logs.l1.iter().copied().sum();
            let sum0: T = logs.l0.iter().copied().sum();
            let mixed = log_mixed_sum(&logs, ln_p3, ln_1m_p3);
            let t1 = log_sum_exp(&[sum0 + c1_all0, sum1 + c1_all1, mixed + c1_mixed]);
            let t0 = log_add_exp(sum0 + c0_all0, sum1 + c0_all1);
            log_t1[i].push(t1);
            log_t1[j].push(t1);
            log_t0[i].push(t0);
            log_t0[j].push(t0);
            pair_cache.push((i, j, logs, sum0, sum1, mixed));
        }
    }

    let theta: Vec<T> = (0..p)
        .map(|i| {
            // no partners: the precision entries carry no information
            let (w1, w0) = if log_t1[i].is_empty() {
                (T::zero(), T::zero())
            } else {
                (log_sum_exp(&log_t1[i]), log_sum_exp(&log_t0[i]))
            };
            logistic_ratio(ln(p2) + w1 + betas[i].0, ln(one - p2) + w0 + betas[i].1)
        })
        .collect();

    let (ln_p2, ln_1m_p2) = (ln(p2), ln(one - p2));
    for (i, j, logs, sum0, sum1, mixed) in pair_cache {
        let (bi1, bi0) = betas[i];
        let (bj1, bj0) = betas[j];
        let both = T::two() * ln_p2 + bi1 + bj1;
        let not_both = log_sum_exp(&[
            T::two() * ln_1m_p2 + bi0 + bj0,
            ln_p2 + ln_1m_p2 + bi0 + bj1,
            ln_p2 + ln_1m_p2 + bi1 + bj0,
        ]);
        let log_g0 = sum0 + log_add_exp(both, not_both);
        let log_g1 = log_sum_exp(&[
            sum1 + log_add_exp(qf * ln_p3 + both, ln(p4) + not_both),
            sum0 + log_add_exp(qf * ln_1m_p3 + both, ln(one - p4) + not_both),
            both + mixed,
        ]);
        let g = logistic_ratio(ln(p1) + log_g1, ln(one - p1) + log_g0);
        gamma[(i, j)] = g;
        gamma[(j, i)] = g;

        let tt = theta[i] * theta[j];
        for x in 0..q {
            let h1 = logistic_ratio(logs.l1[x] + ln_p3, logs.l0[x] + ln_1m_p3);
            let h0 = logistic_ratio(logs.l1[x] + ln(p4), logs.l0[x] + ln(one - p4));
            let other1 = sum1 - logs.l1[x];
            let other0 = sum0 - logs.l0[x];
            let shared = logistic_ratio(other1 + ln(p4), other0 + ln(one - p4));
            let v = clamp_unit(g * (tt * h1 + shared * h0 * (one - tt)));
            r[x][(i, j)] = v;
            r[x][(j, i)] = v;
        }
    }
    Ok(PosteriorSummaries { theta, gamma, r })
}

fn clamp_unit<T: Real>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// Unary and pairwise log weights of the factor-effect configurations:
/// `log w(s) = base + Σ_{i∈s} unary_i + Σ_{i<j∈s} both_ij`.
struct ThetaModel<T> {
    base: T,
    unary: Vec<T>,
    both: Matrix<T>,
}

fn theta_model<T: Real>(params: &GaussianProfileParams<T>, hyper: &Hyperparameters<T>) -> Result<ThetaModel<T>> {
    let p = params.p();
    let one = T::one();
    let (ln_p2, ln_1m_p2) = (hyper.p2.ln(), (one - hyper.p2).ln());
    let mut base = T::zero();
    let mut unary = Vec::with_capacity(p);
    for &(b1, b0) in &beta_logs(params, hyper)? {
        base = base + ln_1m_p2 + b0;
        unary.push(ln_p2 + b1 - ln_1m_p2 - b0);
    }
    let mut both = Matrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let (tied, free) = pair_phi(&pair_logs(params, hyper, i, j)?, hyper);
            base = base + tied;
            both[(i, j)] = free - tied;
            both[(j, i)] = free - tied;
        }
    }
    Ok(ThetaModel { base, unary, both })
}

impl<T: Real> ThetaModel<T> {
    /// Visits every configuration in Gray-code order with its log weight.
    fn for_each(&self, mut f: impl FnMut(u64, T)) {
        let p = self.unary.len();
        let mut w = self.base;
        let mut state = 0u64;
        f(state, w);
        for k in 1u64..(1u64 << p) {
            let flip = k.trailing_zeros() as usize;
            let bit = 1u64 << flip;
            let mut delta = self.unary[flip];
            let mut rest = state & !bit;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                delta = delta + self.both[(flip, j)];
                rest &= rest - 1;
            }
            if state & bit != 0 {
                w = w - delta;
            } else {
                w = w + delta;
            }
            state ^= bit;
            f(state, w);
        }
    }

    fn log_normalizer(&self) -> T {
        let mut max = T::neg_infinity();
        let mut acc = T::zero();
        self.for_each(|_, w| {
            if w > max {
                acc = acc * (max - w).exp() + T::one();
                max = w;
            } else {
                acc = acc + (w - max).exp();
            }
        });
        max + acc.ln()
    }
}

/// Exact posterior marginals of the indicators given the parameters.
///
/// Given the factor-effect indicators, each pair's edge indicators are
/// independent of the rest, so the pair factors can be summed out in closed
/// form; the remaining `2^p` configurations are enumerated in Gray-code
/// order, accumulating the single and pairwise marginals of `theta`.
pub fn e_step_exact<T: Real>(params: &GaussianProfileParams<T>, hyper: &Hyperparameters<T>) -> Result<PosteriorSummaries<T>> {
    hyper.validate()?;
    let (p, q) = (params.p(), params.q());
    if p > EXACT_P_MAX {
        return Err(Error::Capacity { p, cap: EXACT_P_MAX });
    }
    let one = T::one();
    let (p1, p3, p4) = (hyper.p1, hyper.p3, hyper.p4);
    let model = theta_model(params, hyper)?;
    let log_z = model.log_normalizer();
    if !log_z.is_finite() {
        return Err(Error::numerical("indicator posterior has no finite normalizer"));
    }

    let mut theta = vec![T::zero(); p];
    // pair_both[(i, j)], i < j: posterior probability that both respond
    let mut pair_both = Matrix::zeros(p, p);
    let mut members = Vec::with_capacity(p);
    model.for_each(|state, w| {
        let pr = (w - log_z).exp();
        if pr == T::zero() {
            return;
        }
        members.clear();
        let mut rest = state;
        while rest != 0 {
            members.push(rest.trailing_zeros() as usize);
            rest &= rest - 1;
        }
        for (a, &i) in members.iter().enumerate() {
            theta[i] = theta[i] + pr;
            for &j in &members[a + 1..] {
                pair_both[(i, j)] = pair_both[(i, j)] + pr;
            }
        }
    });

    let mut gamma = Matrix::zeros(p, p);
    let mut r = vec![Matrix::zeros(p, p); q];
    for i in 0..p {
        for j in (i + 1)..p {
            let logs = pair_logs(params, hyper, i, j)?;
            let (tied, free) = pair_phi(&logs, hyper);
            let mix: Vec<T> =
                (0..q).map(|x| log_add_exp(p3.ln() + logs.l1[x], (one - p3).ln() + logs.l0[x])).collect();
            let sum_mix: T = mix.iter().copied().sum();
            let sum1: T = logs.l1.iter().copied().sum();
            let sum0: T = logs.l0.iter().copied().sum();
            let edge_tied = p1.ln() + log_add_exp(p4.ln() + sum1, (one - p4).ln() + sum0);
            let edge_free = p1.ln() + sum_mix;

            let pi_both = clamp_unit(pair_both[(i, j)]);
            let g = clamp_unit(pi_both * (edge_free - free).exp() + (one - pi_both) * (edge_tied - tied).exp());
            gamma[(i, j)] = g;
            gamma[(j, i)] = g;
            let tied_on = (p1.ln() + p4.ln() + sum1 - tied).exp();
            for x in 0..q {
                let free_on = (p1.ln() + p3.ln() + logs.l1[x] + sum_mix - mix[x] - free).exp();
                let v = clamp_unit(pi_both * free_on + (one - pi_both) * tied_on);
                r[x][(i, j)] = v;
                r[x][(j, i)] = v;
            }
        }
    }
    Ok(PosteriorSummaries { theta: theta.into_iter().map(clamp_unit).collect(), gamma, r })
}

/// Largest vertex count for [`log_marginal_posterior`].
pub const POSTERIOR_P_MAX: usize = 24;

/// Log posterior density of the parameters with every indicator summed out,
/// up to an additive constant that does not depend on the parameters:
///
/// `Σ_x [n_x/2 log det Ω_x − ½ Σ_k (y_k − α − β_x)ᵀ Ω_x (y_k − α − β_x)]
///  + Σ_{x,i} (log τ − τ ω_ii,x) + log Σ_θ P(θ) P(β | θ) Π_{i<j} P(ω_ij,· | θ_i, θ_j)`.
///
/// This is the quantity an EM iteration with an exact E-step cannot
/// decrease. The sum over `θ` is enumerated in Gray-code order, so the cost
/// is `2^p · p`.
pub fn log_marginal_posterior<T: Real>(
    params: &GaussianProfileParams<T>,
    data: &ProfileDataset<T>,
    hyper: &Hyperparameters<T>,
) -> Result<T> {
    hyper.validate()?;
    let (p, q) = (params.p(), params.q());
    if p > POSTERIOR_P_MAX {
        return Err(Error::Capacity { p, cap: POSTERIOR_P_MAX });
    }
    if data.p() != p || data.q() != q {
        return Err(Error::input("parameters and data disagree in shape"));
    }
    let mut total = T::zero();
    for x in 0..q {
        let omega = params.omega(x);
        let chol = omega
            .cholesky()
            .ok_or_else(|| Error::numerical(format!("precision at level {x} is not positive definite")))?;
        let center: Vec<T> = params.alpha().iter().zip(params.beta(x)).map(|(&a, &b)| a + b).collect();
        let n = T::of(data.n(x) as f64);
        total = total + n * T::half() * (chol.log_det() - data.scatter(x, &center).trace_of_product(omega));
        for i in 0..p {
            total = total + hyper.tau.ln() - hyper.tau * omega[(i, i)];
        }
    }

    let log_prior = theta_model(params, hyper)?.log_normalizer();
    if !log_prior.is_finite() {
        return Err(Error::numerical("marginal prior density is not finite"));
    }
    Ok(total + log_prior)
}

/// Log pair factors `(tied, free)` summed over the edge indicators, for the
/// cases "not both endpoints respond" and "both respond".
fn pair_phi<T: Real>(logs: &PairLogs<T>, hyper: &Hyperparameters<T>) -> (T, T) {
    let one = T::one();
    let (p1, p3, p4) = (hyper.p1, hyper.p3, hyper.p4);
    let sum1: T = logs.l1.iter().copied().sum();
    let sum0: T = logs.l0.iter().copied().sum();
    let sum_mix: T = logs.l1.iter().zip(&logs.l0).map(|(&a, &b)| log_add_exp(p3.ln() + a, (one - p3).ln() + b)).sum();
    let no_edge = (one - p1).ln() + sum0;
    let tied = log_add_exp(no_edge, p1.ln() + log_add_exp(p4.ln() + sum1, (one - p4).ln() + sum0));
    let free = log_add_exp(no_edge, p1.ln() + sum_mix);
    (tied, free)
}
