//! Gaussian parameterisation of a profile model and its link to profile graphs.
//!
//! At level `x` the responses are `N(alpha + beta_x, Omega_x^{-1})`. The
//! factor's effect on the conditional means is `zeta_x = Omega_x beta_x`; a
//! vertex with `zeta_ax = 0` at every level is conditionally independent of
//! the factor, and `omega_ab,x = 0` encodes a missing edge at level `x`.

mod dataset;
mod extract;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use dataset::ProfileDataset;
pub use extract::{extract_profile_graph, Extraction};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::profile_graph::{ProfileGraph, VertexKind};
use crate::scalar::Real;

/// Relative asymmetry accepted when loading precision matrices.
const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProfileParams<T> {
    levels: Vec<String>,
    vertices: Vec<String>,
    alpha: Vec<T>,
    beta: Vec<Vec<T>>,
    omega: Vec<Matrix<T>>,
}

impl<T: Real> GaussianProfileParams<T> {
    /// Checks shapes, symmetry and positive definiteness of every `Omega_x`.
    pub fn new(
        levels: Vec<String>,
        vertices: Vec<String>,
        alpha: Vec<T>,
        beta: Vec<Vec<T>>,
        omega: Vec<Matrix<T>>,
    ) -> Result<Self> {
        let (p, q) = (vertices.len(), levels.len());
        if q == 0 || p == 0 {
            return Err(Error::input("parameters need at least one level and one vertex"));
        }
        if alpha.len() != p {
            return Err(Error::input(format!("alpha has length {}, expected {p}", alpha.len())));
        }
        if beta.len() != q || omega.len() != q {
            return Err(Error::input(format!("expected {q} beta vectors and precision matrices")));
        }
        for (x, (b, o)) in beta.iter().zip(&omega).enumerate() {
            let level = &levels[x];
            if b.len() != p {
                return Err(Error::input(format!("beta at level `{level}` has length {}, expected {p}", b.len())));
            }
            if o.rows() != p || o.cols() != p {
                return Err(Error::input(format!("precision at level `{level}` is not {p}x{p}")));
            }
            if !o.is_finite() || b.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("non-finite parameter at level `{level}`")));
            }
            let scale = o.max_abs().max(T::one());
            if o.asymmetry() > T::of(SYMMETRY_TOL) * scale {
                return Err(Error::input(format!("precision at level `{level}` is not symmetric")));
            }
            if !o.is_positive_definite() {
                return Err(Error::input(format!("precision at level `{level}` is not positive definite")));
            }
        }
        Ok(Self { levels, vertices, alpha, beta, omega })
    }

    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self, x: usize) -> &[T] {
        &self.beta[x]
    }

    pub fn betas(&self) -> &[Vec<T>] {
        &self.beta
    }

    pub fn omega(&self, x: usize) -> &Matrix<T> {
        &self.omega[x]
    }

    pub fn omegas(&self) -> &[Matrix<T>] {
        &self.omega
    }

    /// `Sigma_x = Omega_x^{-1}`.
    pub fn sigma(&self, x: usize) -> Matrix<T> {
        self.omega[x].spd_inverse().expect("precision matrices are positive definite by construction")
    }

    /// `zeta_x = Omega_x beta_x`.
    pub fn zeta(&self, x: usize) -> Vec<T> {
        self.omega[x].matvec(&self.beta[x])
    }

    /// Replaces the mean offsets and precisions, keeping names and `alpha`.
    pub fn with_updates(&self, beta: Vec<Vec<T>>, omega: Vec<Matrix<T>>) -> Result<Self> {
        Self::new(self.levels.clone(), self.vertices.clone(), self.alpha.clone(), beta, omega)
    }

    pub fn cast<U: Real>(&self) -> Result<GaussianProfileParams<U>> {
        GaussianProfileParams::new(
            self.levels.clone(),
            self.vertices.clone(),
            self.alpha.iter().map(|&v| U::of(v.as_f64())).collect(),
            self.beta.iter().map(|b| b.iter().map(|&v| U::of(v.as_f64())).collect()).collect(),
            self.omega.iter().map(Matrix::cast).collect(),
        )
    }

    pub fn to_document(&self) -> ParamsDocument<T> {
        ParamsDocument {
            levels: self.levels.clone(),
            vertices: Some(self.vertices.clone()),
            alpha: self.alpha.clone(),
            beta: self.levels.iter().cloned().zip(self.beta.iter().cloned()).collect(),
            omega: self.levels.iter().cloned().zip(self.omega.iter().map(Matrix::to_rows)).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ParamsDocument<T> = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("parameter documents always serialize")
    }
}

/// Serialized parameters; `beta` and `omega` are keyed by level name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ParamsDocument<T> {
    pub levels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    pub alpha: Vec<T>,
    pub beta: IndexMap<String, Vec<T>>,
    pub omega: IndexMap<String, Vec<Vec<T>>>,
}

impl<T: Real> TryFrom<ParamsDocument<T>> for GaussianProfileParams<T> {
    type Error = Error;

    fn try_from(mut doc: ParamsDocument<T>) -> Result<Self> {
        let p = doc.alpha.len();
        let vertices = doc.vertices.take().unwrap_or_else(|| (1..=p).map(|i| format!("y{i}")).collect());
        let mut beta = Vec::with_capacity(doc.levels.len());
        let mut omega = Vec::with_capacity(doc.levels.len());
        for level in &doc.levels {
            let b = doc.beta.swap_remove(level).ok_or_else(|| Error::input(format!("beta missing level `{level}`")))?;
            let rows = doc.omega.swap_remove(level).ok_or_else(|| Error::input(format!("omega missing level `{level}`")))?;
            let m = Matrix::from_rows(&rows).ok_or_else(|| Error::input(format!("omega at level `{level}` is ragged")))?;
            beta.push(b);
            omega.push(m);
        }
        if let Some(extra) = doc.beta.keys().chain(doc.omega.keys()).next() {
            return Err(Error::UnknownLevel(extra.clone()));
        }
        Self::new(doc.levels, vertices, doc.alpha, beta, omega)
    }
}

/// `Omega beta`, refusing matrices that are not symmetric positive definite.
pub fn zeta_from<T: Real>(beta: &[T], omega: &Matrix<T>) -> Result<Vec<T>> {
    if omega.rows() != beta.len() || omega.cols() != beta.len() {
        return Err(Error::input("dimension mismatch between beta and omega"));
    }
    if omega.asymmetry() > T::of(SYMMETRY_TOL) * omega.max_abs().max(T::one()) || !omega.is_positive_definite() {
        return Err(Error::input("omega is not symmetric positive definite"));
    }
    Ok(omega.matvec(beta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A square vertex whose conditional mean moves with the factor.
    Zeta { vertex: String, level: String, value: f64 },
    /// A nonzero precision entry at a level where the label says independent.
    Omega { a: String, b: String, level: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conformance {
    pub conforms: bool,
    pub violations: Vec<Violation>,
}

/// Checks the zero constraints a profile graph places on the parameters.
///
/// Precision entries are compared with `tol` directly; `zeta` entries may
/// additionally exceed it by the rounding error bound of `Omega_x beta_x`.
pub fn conforms_to_graph<T: Real>(params: &GaussianProfileParams<T>, g: &ProfileGraph, tol: T) -> Result<Conformance> {
    if params.p() != g.p() || params.q() != g.q() {
        return Err(Error::input(format!(
            "parameters are {}x{} (levels x vertices) but the graph is {}x{}",
            params.q(),
            params.p(),
            g.q(),
            g.p()
        )));
    }
    let mut violations = Vec::new();
    // `zeta` is a computed dot product, so a value within its rounding error
    // bound of zero is indistinguishable from an exact zero
    let gamma = T::of((params.p() + 1) as f64) * T::epsilon();
    for x in 0..params.q() {
        let zeta = params.zeta(x);
        let omega = params.omega(x);
        for (a, &z) in zeta.iter().enumerate() {
            let rounding = gamma * omega.row(a).iter().zip(params.beta(x)).map(|(&w, &b)| (w * b).abs()).sum::<T>();
            if g.kind(a) == VertexKind::Square && z.abs() > tol + rounding {
                violations.push(Violation::Zeta {
                    vertex: g.vertex_name(a).to_string(),
                    level: g.levels().name(x).to_string(),
                    value: z.as_f64(),
                });
            }
        }
    }
    for (a, b) in g.pairs() {
        for x in g.label(a, b).iter() {
            let w = params.omega(x)[(a, b)];
            if w.abs() > tol {
                violations.push(Violation::Omega {
                    a: g.vertex_name(a).to_string(),
                    b: g.vertex_name(b).to_string(),
                    level: g.levels().name(x).to_string(),
                    value: w.as_f64(),
                });
            }
        }
    }
    Ok(Conformance { conforms: violations.is_empty(), violations })
}
