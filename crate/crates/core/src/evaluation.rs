//! Edge-recovery metrics and the subsampling robustness harness.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes_em::{fit, FitConfig, Hyperparameters};
use crate::error::{Error, Result};
use crate::gaussian::{extract_profile_graph, ProfileDataset};
use crate::linalg::Matrix;
use crate::profile_graph::{MultipleGraphs, StateSpace};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(self, o: Counts) -> Counts {
        Counts { tp: self.tp + o.tp, fp: self.fp + o.fp, tn: self.tn + o.tn, fn_: self.fn_ + o.fn_ }
    }
}

/// Edge counts over unordered pairs, per level and summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeConfusion {
    pub per_level: Vec<Counts>,
    pub pooled: Counts,
}

fn check_shapes(a: &MultipleGraphs, b: &MultipleGraphs) -> Result<()> {
    if a.vertices() != b.vertices() || a.levels() != b.levels() {
        return Err(Error::input("graphs do not share vertices and levels"));
    }
    Ok(())
}

/// Counts agreement of `estimate` with `truth`. With two estimates instead of
/// a truth this is the edge/no-edge cross tabulation of the pair.
pub fn confusion(truth: &MultipleGraphs, estimate: &MultipleGraphs) -> Result<EdgeConfusion> {
    check_shapes(truth, estimate)?;
    let p = truth.p();
    let per_level: Vec<Counts> = (0..truth.q())
        .map(|x| {
            let mut c = Counts::default();
            for a in 0..p {
                for b in (a + 1)..p {
                    match (truth.has_edge(x, a, b), estimate.has_edge(x, a, b)) {
                        (true, true) => c.tp += 1,
                        (false, true) => c.fp += 1,
                        (false, false) => c.tn += 1,
                        (true, false) => c.fn_ += 1,
                    }
                }
            }
            c
        })
        .collect();
    let pooled = per_level.iter().fold(Counts::default(), |acc, &c| acc.add(c));
    Ok(EdgeConfusion { per_level, pooled })
}

/// Ratios are `None` when their denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub balanced_accuracy: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &Counts) -> Metrics {
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        _ => None,
    };
    Metrics { accuracy: ratio(c.tp + c.tn, c.total()), sensitivity, specificity, balanced_accuracy }
}

/// Area under the ROC curve of `scores` (one symmetric matrix per level)
/// against the edges of `truth`, pooled over levels and unordered pairs.
/// Ties count one half. `None` when `truth` has only one class.
pub fn auc<T: Real>(scores: &[Matrix<T>], truth: &MultipleGraphs) -> Result<Option<f64>> {
    let p = truth.p();
    if scores.len() != truth.q() || scores.iter().any(|m| m.rows() != p || m.cols() != p) {
        return Err(Error::input("scores do not match the graph shape"));
    }
    let mut items: Vec<(f64, bool)> = Vec::with_capacity(truth.q() * p * p.saturating_sub(1) / 2);
    for (x, m) in scores.iter().enumerate() {
        for a in 0..p {
            for b in (a + 1)..p {
                let s = m[(a, b)].as_f64();
                if s.is_nan() {
                    return Err(Error::input(format!("score for pair ({a}, {b}) at level {x} is NaN")));
                }
                items.push((s, truth.has_edge(x, a, b)));
            }
        }
    }
    Ok(mann_whitney(&mut items))
}

/// `U / (n_pos n_neg)` from average ranks.
fn mann_whitney(items: &mut [(f64, bool)]) -> Option<f64> {
    let n_pos = items.iter().filter(|i| i.1).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        while j + 1 < items.len() && items[j + 1].0 == items[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * items[i..=j].iter().filter(|t| t.1).count() as f64;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Balanced accuracy, falling back to whichever of sensitivity and
/// specificity is defined when the reference lacks one class.
fn balanced_or_available(c: &Counts) -> f64 {
    let m = metrics(c);
    m.balanced_accuracy.or(m.sensitivity).or(m.specificity).unwrap_or(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub mean: f64,
    pub se: f64,
}

fn summarize(label: String, values: &[f64]) -> Summary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let se = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Summary { label, mean, se }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub fraction: f64,
    pub reps: usize,
    pub seed: u64,
    /// Balanced accuracy of each repetition per level (`[rep][level]`).
    pub per_rep: Vec<Vec<f64>>,
    pub overall_per_rep: Vec<f64>,
    pub levels: Vec<Summary>,
    pub overall: Summary,
}

impl RobustnessReport {
    /// Mean and standard error per level, then overall.
    pub fn render_table(&self) -> String {
        let width = self.levels.iter().map(|s| s.label.len()).chain([7]).max().unwrap_or(7);
        let mut out = format!("{:<width$}  {:>8}  {:>8}\n", "level", "Mean", "SE");
        for s in self.levels.iter().chain([&self.overall]) {
            let _ = writeln!(out, "{:<width$}  {:>8.4}  {:>8.4}", s.label, s.mean, s.se);
        }
        out
    }
}

/// Cut-offs turning posterior summaries into graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuts {
    pub edge: f64,
    pub vertex: f64,
}

impl Default for Cuts {
    fn default() -> Self {
        Self { edge: 0.5, vertex: 0.5 }
    }
}

fn fitted_graphs<T: Real>(
    data: &ProfileDataset<T>,
    hyper: &Hyperparameters<T>,
    config: &FitConfig<T>,
    cuts: Cuts,
) -> Result<MultipleGraphs> {
    let state = fit(data, hyper, config)?;
    let levels = StateSpace::new(data.levels().to_vec())?;
    let e = extract_profile_graph(&state.summaries, levels, data.vertices().to_vec(), T::of(cuts.edge), T::of(cuts.vertex))?;
    Ok(e.graph.induced_multiple_graphs())
}

/// Fits the full data once for reference graphs, then `reps` times drops
/// `floor(fraction * n_x)` rows of every level at random, refits and scores
/// the new graphs against the reference by balanced accuracy.
///
/// Repetition `k` draws its rows from ChaCha20 seeded with `seed` on stream
/// `k`, so the report does not depend on scheduling.
pub fn robustness_harness<T: Real>(
    data: &ProfileDataset<T>,
    hyper: &Hyperparameters<T>,
    config: &FitConfig<T>,
    cuts: Cuts,
    fraction: f64,
    reps: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::input(format!("fraction must lie in [0, 1), got {fraction}")));
    }
    if reps == 0 {
        return Err(Error::input("need at least one repetition"));
    }
    let drops: Vec<usize> = (0..data.q()).map(|x| (fraction * data.n(x) as f64).floor() as usize).collect();
    for (x, &d) in drops.iter().enumerate() {
        if data.n(x) - d < 1 {
            return Err(Error::input(format!("level `{}` would keep no rows", data.levels()[x])));
        }
    }
    let reference = fitted_graphs(data, hyper, config, cuts)?;
    let results: Vec<Result<(Vec<f64>, f64)>> = (0..reps)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let keep: Vec<Vec<usize>> = (0..data.q())
                .map(|x| {
                    let n = data.n(x);
                    let mut rows = rand::seq::index::sample(&mut rng, n, n - drops[x]).into_vec();
                    rows.sort_unstable();
                    rows
                })
                .collect();
            let sub = data.select_rows(&keep)?;
            let graphs = fitted_graphs(&sub, hyper, config, cuts)?;
            let conf = confusion(&reference, &graphs)?;
            Ok((conf.per_level.iter().map(balanced_or_available).collect(), balanced_or_available(&conf.pooled)))
        })
        .collect();
    let mut per_rep = Vec::with_capacity(reps);
    let mut overall_per_rep = Vec::with_capacity(reps);
    for r in results {
        let (levels, overall) = r?;
        per_rep.push(levels);
        overall_per_rep.push(overall);
    }
    let levels = (0..data.q())
        .map(|x| {
            let v: Vec<f64> = per_rep.iter().map(|r| r[x]).collect();
            summarize(data.levels()[x].clone(), &v)
        })
        .collect();
    let overall = summarize("overall".into(), &overall_per_rep);
    Ok(RobustnessReport { fraction, reps, seed, per_rep, overall_per_rep, levels, overall })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn graphs(edges: &[&[(usize, usize)]]) -> MultipleGraphs {
        let q = edges.len();
        let mut g = MultipleGraphs::empty(StateSpace::numbered(q).unwrap(), (0..4).map(|i| format!("v{i}")).collect());
        for (x, es) in edges.iter().enumerate() {
            for &(a, b) in *es {
                g.set_edge(x, a, b, true);
            }
        }
        g
    }

    #[test]
    fn identical_and_complement() {
        let t = graphs(&[&[(0, 1), (1, 2)], &[(2, 3)]]);
        let c = confusion(&t, &t).unwrap();
        assert_eq!((c.pooled.fp, c.pooled.fn_), (0, 0));
        assert_eq!(c.pooled.total(), 12);
        let mut comp = t.clone();
        for x in 0..2 {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    comp.set_edge(x, a, b, !t.has_edge(x, a, b));
                }
            }
        }
        let c = confusion(&t, &comp).unwrap();
        assert_eq!((c.pooled.tp, c.pooled.tn), (0, 0));
    }

    #[test]
    fn cross_tab_by_hand() {
        // level 0: a = {01, 02, 13}, b = {01, 23, 13}
        let a = graphs(&[&[(0, 1), (0, 2), (1, 3)]]);
        let b = graphs(&[&[(0, 1), (2, 3), (1, 3)]]);
        let c = confusion(&a, &b).unwrap();
        assert_eq!(c.per_level[0], Counts { tp: 2, fp: 1, tn: 2, fn_: 1 });
    }

    #[test]
    fn metric_arithmetic() {
        let m = metrics(&Counts { tp: 3, fn_: 1, tn: 10, fp: 2 });
        assert_abs_diff_eq!(m.sensitivity.unwrap(), 0.75);
        assert_abs_diff_eq!(m.specificity.unwrap(), 10.0 / 12.0);
        assert_abs_diff_eq!(m.balanced_accuracy.unwrap(), (0.75 + 10.0 / 12.0) / 2.0);
        assert_abs_diff_eq!(m.accuracy.unwrap(), 13.0 / 16.0);
        let none = metrics(&Counts { tp: 0, fn_: 0, tn: 5, fp: 1 });
        assert_eq!(none.sensitivity, None);
        assert_eq!(none.balanced_accuracy, None);
    }

    #[test]
    fn auc_cases() {
        let t = graphs(&[&[(0, 1), (1, 2)]]);
        let exact = Matrix::from_fn(4, 4, |a, b| if t.has_edge(0, a, b) { 1.0 } else { 0.0 });
        assert_eq!(auc(&[exact], &t).unwrap(), Some(1.0));
        assert_eq!(auc(&[Matrix::from_fn(4, 4, |_, _| 0.3)], &t).unwrap(), Some(0.5));
        assert_eq!(auc(&[Matrix::<f64>::zeros(4, 4)], &graphs(&[&[]])).unwrap(), None);
    }

    #[test]
    fn auc_matches_pairwise_count() {
        let t = graphs(&[&[(0, 1), (1, 2)]]);
        // pairs in order 01 02 03 12 13 23; positives 01, 12
        let vals = [0.9, 0.95, 0.1, 0.7, 0.2, 0.2];
        let mut m = Matrix::zeros(4, 4);
        let mut k = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                m[(a, b)] = vals[k];
                m[(b, a)] = vals[k];
                k += 1;
            }
        }
        let pos = [vals[0], vals[3]];
        let neg = [vals[1], vals[2], vals[4], vals[5]];
        let mut wins = 0.0;
        for &s in &pos {
            for &r in &neg {
                wins += if s > r { 1.0 } else if s == r { 0.5 } else { 0.0 };
            }
        }
        assert_abs_diff_eq!(auc(&[m], &t).unwrap().unwrap(), wins / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn table_layout() {
        let r = RobustnessReport {
            fraction: 0.1,
            reps: 2,
            seed: 0,
            per_rep: vec![vec![1.0], vec![0.5]],
            overall_per_rep: vec![1.0, 0.5],
            levels: vec![summarize("0".into(), &[1.0, 0.5])],
            overall: summarize("overall".into(), &[1.0, 0.5]),
        };
        let t = r.render_table();
        assert!(t.starts_with("level"));
        assert!(t.contains("overall    0.7500    0.2500"));
    }
}
