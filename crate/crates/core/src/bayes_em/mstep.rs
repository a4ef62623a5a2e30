use super::Hyperparameters;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Ridge update of one level's mean offsets:
/// `(n Ω + D)^{-1} Ω Σ_k y_k` with `D = diag(theta/lambda1 + (1-theta)/lambda0)`.
///
/// `data` must already be centred by the baseline means.
pub fn m_step_beta<T: Real>(
    data: &Matrix<T>,
    omega: &Matrix<T>,
    theta: &[T],
    hyper: &Hyperparameters<T>,
) -> Result<Vec<T>> {
    let p = omega.rows();
    if data.cols() != p || theta.len() != p {
        return Err(Error::input("dimension mismatch in the offset update"));
    }
    let n = T::of(data.rows() as f64);
    let mut sums = vec![T::zero(); p];
    for k in 0..data.rows() {
        for (s, &v) in sums.iter_mut().zip(data.row(k)) {
            *s = *s + v;
        }
    }
    let mut system = omega.scale(n);
    for (i, &t) in theta.iter().enumerate() {
        system[(i, i)] = system[(i, i)] + hyper.beta_penalty(t);
    }
    let chol = system.cholesky().ok_or_else(|| Error::numerical("offset system is not positive definite"))?;
    Ok(chol.solve(&omega.matvec(&sums)))
}

/// Controls for the precision sub-solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSolverOptions {
    pub max_sweeps: usize,
    pub max_inner: usize,
    /// Sweeps stop once no covariance entry moves by more than this, relative
    /// to the largest diagonal entry.
    pub tol: f64,
}

impl Default for OmegaSolverOptions {
    fn default() -> Self {
        Self { max_sweeps: 2000, max_inner: 10_000, tol: 1e-13 }
    }
}

/// `n/2 log det Ω − n/2 tr(SΩ) − τ Σ ω_ii − Σ_{i<j} w_ij |ω_ij|`; `None` if
/// `omega` is not positive definite.
pub fn omega_objective<T: Real>(omega: &Matrix<T>, scatter: &Matrix<T>, n: usize, weights: &Matrix<T>, tau: T) -> Option<T> {
    let chol = omega.cholesky()?;
    let half_n = T::of(n as f64) * T::half();
    let mut v = half_n * (chol.log_det() - scatter.trace_of_product(omega));
    let p = omega.rows();
    for i in 0..p {
        v = v - tau * omega[(i, i)];
        for j in (i + 1)..p {
            v = v - weights[(i, j)] * omega[(i, j)].abs();
        }
    }
    Some(v)
}

fn soft_threshold<T: Real>(z: T, t: T) -> T {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        T::zero()
    }
}

/// Weighted graphical lasso for one level.
///
/// Maximises [`omega_objective`] with weights `w_ij = r/nu1 + (1-r)/nu0`.
/// Dividing by `n/2` turns it into the usual form
/// `log det Ω − tr(S̃Ω) − Σ_{i≠j} ρ_ij |ω_ij|` with `S̃ = S + (2τ/n) I` and
/// `ρ = w/n`, solved by cyclic block coordinate descent over columns of the
/// covariance estimate with a lasso inner loop. The result is symmetrised,
/// diagonally loaded if it fails a Cholesky check, and its spectrum clipped
/// at the spectral bound.
pub fn m_step_omega<T: Real>(
    scatter: &Matrix<T>,
    n: usize,
    r: &Matrix<T>,
    hyper: &Hyperparameters<T>,
    opts: &OmegaSolverOptions,
) -> Result<Matrix<T>> {
    let p = scatter.rows();
    if scatter.cols() != p || r.rows() != p || r.cols() != p {
        return Err(Error::input("dimension mismatch in the precision update"));
    }
    if n == 0 {
        return Err(Error::input("precision update needs at least one observation"));
    }
    let nf = T::of(n as f64);
    let ridge = T::two() * hyper.tau / nf;
    let mut s = scatter.clone();
    s.add_diagonal(ridge);
    if (0..p).any(|i| !(s[(i, i)] > T::zero())) {
        return Err(Error::numerical("scatter matrix has a non-positive diagonal"));
    }
    let rho = Matrix::from_fn(p, p, |i, j| if i == j { T::zero() } else { hyper.omega_penalty(r[(i, j)]) / nf });

    let tol = T::of(opts.tol).max(T::epsilon() * T::of(16.0));
    let scale = (0..p).map(|i| s[(i, i)]).fold(T::zero(), T::max);
    let mut w = s.clone();
    // coefficients of each column's regression, indexed by full vertex index
    let mut coef = Matrix::zeros(p, p);
    let mut converged = p == 1;
    for _ in 0..opts.max_sweeps {
        if converged {
            break;
        }
        let mut moved = T::zero();
        for j in 0..p {
            let others: Vec<usize> = (0..p).filter(|&k| k != j).collect();
            // inner lasso: min ½ bᵀ W11 b − bᵀ s12 + Σ ρ_k |b_k|
            let mut b: Vec<T> = others.iter().map(|&k| coef[(k, j)]).collect();
            // running value of W11 b
            let mut wb: Vec<T> = others
                .iter()
                .map(|&k| others.iter().zip(&b).fold(T::zero(), |acc, (&l, &bl)| acc + w[(k, l)] * bl))
                .collect();
            for _ in 0..opts.max_inner {
                let mut delta = T::zero();
                for (a, &k) in others.iter().enumerate() {
                    let wkk = w[(k, k)];
                    let partial = wb[a] - wkk * b[a];
                    let nb = soft_threshold(s[(k, j)] - partial, rho[(k, j)]) / wkk;
                    let d = nb - b[a];
                    if d != T::zero() {
                        for (c, &l) in others.iter().enumerate() {
                            wb[c] = wb[c] + w[(l, k)] * d;
                        }
                        b[a] = nb;
                        delta = delta.max(d.abs() * wkk);
                    }
                }
                if delta <= tol * scale {
                    break;
                }
            }
            // recompute W11 b exactly to avoid drift from the running update
            for (a, &k) in others.iter().enumerate() {
                let v = others.iter().zip(&b).fold(T::zero(), |acc, (&l, &bl)| acc + w[(k, l)] * bl);
                moved = moved.max((v - w[(k, j)]).abs());
                w[(k, j)] = v;
                w[(j, k)] = v;
                coef[(k, j)] = b[a];
            }
        }
        converged = moved <= tol * scale;
    }
    if !converged {
        return Err(Error::numerical(format!(
            "precision update did not converge within {} sweeps",
            opts.max_sweeps
        )));
    }

    let mut omega = Matrix::zeros(p, p);
    for j in 0..p {
        let mut dot = T::zero();
        for k in 0..p {
            if k != j {
                dot = dot + w[(k, j)] * coef[(k, j)];
            }
        }
        let wjj = w[(j, j)] - dot;
        if !(wjj > T::zero()) {
            return Err(Error::numerical(format!("precision update produced a non-positive pivot in column {j}")));
        }
        let d = T::one() / wjj;
        omega[(j, j)] = d;
        for k in 0..p {
            if k != j {
                omega[(k, j)] = -coef[(k, j)] * d;
            }
        }
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let (a, b) = (omega[(i, j)], omega[(j, i)]);
            let v = if a == T::zero() || b == T::zero() { T::zero() } else { (a + b) * T::half() };
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    safeguard(omega, hyper.spectral_bound)
}

/// Restores positive definiteness by diagonal loading and clips the
/// spectrum at `bound`.
fn safeguard<T: Real>(mut omega: Matrix<T>, bound: T) -> Result<Matrix<T>> {
    let mut load = T::epsilon().sqrt() * omega.diagonal().into_iter().fold(T::zero(), T::max);
    for _ in 0..60 {
        if omega.is_positive_definite() {
            break;
        }
        omega.add_diagonal(load);
        load = load * T::two();
    }
    if !omega.is_positive_definite() {
        return Err(Error::numerical("precision update could not be made positive definite"));
    }
    if omega.spectral_norm_symmetric() > bound {
        let clipped = omega.symmetric_eigen().reconstruct_with(|v| v.min(bound));
        omega = clipped;
        omega.symmetrize();
    }
    Ok(omega)
}
