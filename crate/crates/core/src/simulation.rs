//! Synthetic profile datasets with a known structure.
//!
//! The baseline precision is banded (diagonal `1..p`, first off-diagonal 0.5,
//! second 0.4). Other levels copy it or a randomly thinned version of it
//! according to the scenario, the factor moves the conditional means of the
//! first four responses only, and each level is sampled from
//! `N(Sigma_x zeta_x, Sigma_x)`.
//!
//! Randomness comes from ChaCha20 seeded with `seed`: stream 0 drives the
//! structure, stream `x + 1` the samples of level `x`, so the output does not
//! depend on the order in which levels are generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianProfileParams, ProfileDataset};
use crate::linalg::Matrix;
use crate::profile_graph::{LevelSet, ProfileGraph, StateSpace, VertexKind};
use crate::scalar::Real;

/// Number of responses the factor acts on.
pub const AFFECTED: usize = 4;

/// Eigenvalue floor below which a precision matrix is loaded.
const PD_FLOOR: f64 = 0.05;
const PD_MARGIN: f64 = 0.1;
const MAX_REPAIRS: usize = 50;

/// Which levels share a precision structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Every non-baseline level gets its own thinned structure.
    Independent = 1,
    /// The first half of the levels share the baseline, the rest share one
    /// thinned structure.
    TwoGroups = 2,
    /// Only the last level differs from the baseline.
    LastDiffers = 3,
    /// All levels share the baseline.
    Shared = 4,
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Scenario::Independent),
            2 => Ok(Scenario::TwoGroups),
            3 => Ok(Scenario::LastDiffers),
            4 => Ok(Scenario::Shared),
            _ => Err(Error::input(format!("scenario must be 1, 2, 3 or 4, got {v}"))),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s as u8
    }
}

/// Diagonal of the baseline precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// `omega_aa = a`, as in the published description of the design.
    #[default]
    Indexed,
    /// `omega_aa = 1`, the banded design of the earlier multiple-graph
    /// literature; its partial correlations do not fade with the index.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub p: usize,
    pub q: usize,
    /// Probability of switching on each zero off-diagonal pair of the baseline.
    pub s: f64,
    /// Observations per level.
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub baseline: Baseline,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < AFFECTED {
            return Err(Error::input(format!("need p >= {AFFECTED}, got {}", self.p)));
        }
        if self.q < 2 {
            return Err(Error::input(format!("need q >= 2, got {}", self.q)));
        }
        if self.n == 0 {
            return Err(Error::input("need at least one observation per level"));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::input(format!("s must lie in [0, 1], got {}", self.s)));
        }
        Ok(())
    }

    /// Group index of each level; levels in the same group share a precision.
    pub fn groups(&self) -> Vec<usize> {
        let q = self.q;
        match self.scenario {
            Scenario::Independent => (0..q).collect(),
            Scenario::TwoGroups => (0..q).map(|x| usize::from(x >= q.div_ceil(2))).collect(),
            Scenario::LastDiffers => (0..q).map(|x| usize::from(x + 1 == q)).collect(),
            Scenario::Shared => vec![0; q],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub params: GaussianProfileParams<T>,
    pub graph: ProfileGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<T> {
    pub dataset: ProfileDataset<T>,
    pub truth: GroundTruth<T>,
}

/// Banded baseline precision: diagonal `1, …, p`, 0.5 next to it, 0.4 two away.
pub fn baseline_precision<T: Real>(p: usize) -> Result<Matrix<T>> {
    baseline_precision_with(p, Baseline::Indexed)
}

pub fn baseline_precision_with<T: Real>(p: usize, baseline: Baseline) -> Result<Matrix<T>> {
    if p < 3 {
        return Err(Error::input(format!("baseline precision needs p >= 3, got {p}")));
    }
    let m = Matrix::from_fn(p, p, |i, j| match i.abs_diff(j) {
        0 => match baseline {
            Baseline::Indexed => T::of((i + 1) as f64),
            Baseline::Unit => T::one(),
        },
        1 => T::of(0.5),
        2 => T::of(0.4),
        _ => T::zero(),
    });
    if !m.is_positive_definite() {
        return Err(Error::Generation("baseline precision is not positive definite".into()));
    }
    Ok(m)
}

/// Loads the diagonal by `|lambda_min| + 0.1` while the smallest eigenvalue
/// is at most 0.05.
pub fn repair_pd<T: Real>(mut m: Matrix<T>) -> Result<Matrix<T>> {
    for _ in 0..MAX_REPAIRS {
        let lo = m.min_eigenvalue();
        if lo > T::of(PD_FLOOR) {
            return Ok(m);
        }
        m.add_diagonal(lo.abs() + T::of(PD_MARGIN));
    }
    Err(Error::Generation(format!("precision still not positive definite after {MAX_REPAIRS} repairs")))
}

fn thin<T: Real>(m: &Matrix<T>, rng: &mut impl Rng) -> Matrix<T> {
    let mut out = m.clone();
    let p = m.rows();
    for i in 0..p {
        for j in (i + 1)..p {
            if out[(i, j)] != T::zero() && rng.random_bool(0.5) {
                out[(i, j)] = T::zero();
                out[(j, i)] = T::zero();
            }
        }
    }
    out
}

fn augment<T: Real>(m: &Matrix<T>, s: f64, rng: &mut impl Rng) -> Matrix<T> {
    let mut out = m.clone();
    let p = m.rows();
    for i in 0..p {
        for j in (i + 1)..p {
            if out[(i, j)] == T::zero() && rng.random_bool(s) {
                let v = if rng.random_bool(0.5) { T::of(0.4) } else { T::of(-0.4) };
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
    }
    out
}

/// One precision per level following the scenario's sharing pattern.
///
/// Extra pairs are switched on with probability `s` in the baseline before
/// any thinning, so levels in a common group always stay equal and Scenario 4
/// returns `q` copies of the (augmented) baseline. Every distinct matrix is
/// repaired to be positive definite.
pub fn derive_level_precisions<T: Real>(omega0: &Matrix<T>, spec: &ScenarioSpec, rng: &mut impl Rng) -> Result<Vec<Matrix<T>>> {
    spec.validate()?;
    if omega0.rows() != spec.p || omega0.cols() != spec.p {
        return Err(Error::input("baseline precision does not match p"));
    }
    let base = if spec.s > 0.0 { repair_pd(augment(omega0, spec.s, rng))? } else { omega0.clone() };
    let groups = spec.groups();
    let n_groups = groups.iter().max().map_or(0, |g| g + 1);
    let mut per_group = Vec::with_capacity(n_groups);
    for g in 0..n_groups {
        // the group holding level 0 keeps the baseline
        if g == groups[0] {
            per_group.push(base.clone());
        } else {
            per_group.push(repair_pd(thin(&base, rng))?);
        }
    }
    Ok(groups.into_iter().map(|g| per_group[g].clone()).collect())
}

/// Canonical factor effect on the conditional means: zero at level 0, and
/// one on the first four responses at every other level.
pub fn truth_zeta<T: Real>(p: usize, q: usize) -> Result<Vec<Vec<T>>> {
    if p < AFFECTED {
        return Err(Error::input(format!("need p >= {AFFECTED}, got {p}")));
    }
    Ok((0..q)
        .map(|x| (0..p).map(|a| if x > 0 && a < AFFECTED { T::one() } else { T::zero() }).collect())
        .collect())
}

/// Vertex names used by generated data: `y1, …, yp`.
pub fn vertex_names(p: usize) -> Vec<String> {
    (1..=p).map(|a| format!("y{a}")).collect()
}

/// Graph read off exact zeros: `{a, b}` is labelled with the levels where
/// `omega_ab,x = 0`; vertices with `zeta_a = 0` at every level become squares
/// unless they touch a dotted edge.
pub fn truth_graph<T: Real>(levels: StateSpace, vertices: Vec<String>, omegas: &[Matrix<T>], zeta: &[Vec<T>]) -> Result<ProfileGraph> {
    let mut g = ProfileGraph::new(levels, vertices)?;
    let pairs: Vec<_> = g.pairs().collect();
    for (a, b) in pairs {
        let label = LevelSet::from_indices((0..omegas.len()).filter(|&x| omegas[x][(a, b)] == T::zero()));
        g.set_label(a, b, label)?;
    }
    for a in 0..g.p() {
        if zeta.iter().all(|z| z[a] == T::zero()) && !g.has_dotted_edge(a) {
            g.set_kind(a, VertexKind::Square)?;
        }
    }
    Ok(g)
}

fn level_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` draws from `N(mean, L Lᵀ)`.
fn sample<T: Real>(mean: &[T], chol_lower: &Matrix<T>, n: usize, rng: &mut impl Rng) -> Matrix<T> {
    let p = mean.len();
    let mut out = Matrix::zeros(n, p);
    let mut z = vec![T::zero(); p];
    for k in 0..n {
        for v in z.iter_mut() {
            *v = T::of(rng.sample::<f64, _>(StandardNormal));
        }
        let row = out.row_mut(k);
        for i in 0..p {
            let mut acc = mean[i];
            for j in 0..=i {
                acc = acc + chol_lower[(i, j)] * z[j];
            }
            row[i] = acc;
        }
    }
    out
}

pub fn generate<T: Real>(spec: &ScenarioSpec) -> Result<Simulation<T>> {
    spec.validate()?;
    let omega0 = baseline_precision_with::<T>(spec.p, spec.baseline)?;
    let mut rng = level_rng(spec.seed, 0);
    let omegas = derive_level_precisions(&omega0, spec, &mut rng)?;
    let zeta = truth_zeta::<T>(spec.p, spec.q)?;
    let levels: Vec<String> = (0..spec.q).map(|x| x.to_string()).collect();
    let vertices = vertex_names(spec.p);

    let per_level: Vec<Result<(Vec<T>, Matrix<T>)>> = (0..spec.q)
        .into_par_iter()
        .map(|x| {
            let sigma = omegas[x]
                .spd_inverse()
                .ok_or_else(|| Error::Generation(format!("precision at level {x} is singular")))?;
            let beta = sigma.matvec(&zeta[x]);
            let chol = sigma
                .cholesky()
                .ok_or_else(|| Error::Generation(format!("covariance at level {x} is not positive definite")))?;
            let mut rng = level_rng(spec.seed, x as u64 + 1);
            let data = sample(&beta, chol.lower(), spec.n, &mut rng);
            Ok((beta, data))
        })
        .collect();
    let mut betas = Vec::with_capacity(spec.q);
    let mut blocks = Vec::with_capacity(spec.q);
    for r in per_level {
        let (b, d) = r?;
        betas.push(b);
        blocks.push(d);
    }

    let graph = truth_graph(StateSpace::new(levels.clone())?, vertices.clone(), &omegas, &zeta)?;
    let params = GaussianProfileParams::new(levels.clone(), vertices.clone(), vec![T::zero(); spec.p], betas, omegas)?;
    let dataset = ProfileDataset::new(levels, vertices, blocks)?;
    Ok(Simulation { dataset, truth: GroundTruth { params, graph } })
}
