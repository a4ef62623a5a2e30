use crate::bayes_em::PosteriorSummaries;
use crate::error::{Error, Result};
use crate::profile_graph::{LevelSet, ProfileGraph, StateSpace, VertexKind};
use crate::scalar::Real;

/// A graph read off posterior summaries, plus the vertices that wanted to be
/// squares but touch a dotted edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub graph: ProfileGraph,
    pub demoted: Vec<String>,
}

/// Thresholds the summaries: `{i, j}` gets label `{x : r_ij,x <= edge_cut}`,
/// and `i` is a square when `theta_i <= vertex_cut` unless it is an endpoint
/// of a dotted edge, in which case it stays a circle and is listed in
/// `demoted`.
pub fn extract_profile_graph<T: Real>(
    summaries: &PosteriorSummaries<T>,
    levels: StateSpace,
    vertices: Vec<String>,
    edge_cut: T,
    vertex_cut: T,
) -> Result<Extraction> {
    summaries.check()?;
    if summaries.p() != vertices.len() || summaries.q() != levels.len() {
        return Err(Error::input(format!(
            "summaries are {}x{} but the graph has {} vertices and {} levels",
            summaries.p(),
            summaries.q(),
            vertices.len(),
            levels.len()
        )));
    }
    for (name, cut) in [("edge", edge_cut), ("vertex", vertex_cut)] {
        if !(cut > T::zero() && cut < T::one()) {
            return Err(Error::input(format!("{name} cut must lie strictly between 0 and 1")));
        }
    }
    let mut graph = ProfileGraph::new(levels, vertices)?;
    let pairs: Vec<_> = graph.pairs().collect();
    for (i, j) in pairs {
        let label = LevelSet::from_indices((0..summaries.q()).filter(|&x| summaries.r[x][(i, j)] <= edge_cut));
        graph.set_label(i, j, label)?;
    }
    let mut demoted = Vec::new();
    for i in 0..summaries.p() {
        if summaries.theta[i] <= vertex_cut {
            if graph.has_dotted_edge(i) {
                demoted.push(graph.vertex_name(i).to_string());
            } else {
                graph.set_kind(i, VertexKind::Square)?;
            }
        }
    }
    Ok(Extraction { graph, demoted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::profile_graph::EdgeClass;

    fn summaries(p: usize, q: usize, theta: f64) -> PosteriorSummaries<f64> {
        PosteriorSummaries { theta: vec![theta; p], gamma: Matrix::zeros(p, p), r: vec![Matrix::zeros(p, p); q] }
    }

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn all_zero_gives_empty_graph() {
        let s = summaries(3, 2, 0.9);
        let e = extract_profile_graph(&s, StateSpace::numbered(2).unwrap(), names(3), 0.5, 0.5).unwrap();
        assert!(e.graph.pairs().all(|(a, b)| e.graph.edge_class(a, b) == EdgeClass::Missing));
        assert!(e.demoted.is_empty());
    }

    #[test]
    fn one_full_edge() {
        let mut s = summaries(3, 2, 0.9);
        for m in &mut s.r {
            m[(0, 2)] = 1.0;
            m[(2, 0)] = 1.0;
        }
        let e = extract_profile_graph(&s, StateSpace::numbered(2).unwrap(), names(3), 0.5, 0.5).unwrap();
        assert_eq!(e.graph.edge_class(0, 2), EdgeClass::Full);
        assert_eq!(e.graph.edge_class(0, 1), EdgeClass::Missing);
        assert_eq!(e.graph.edge_class(1, 2), EdgeClass::Missing);
    }

    #[test]
    fn threshold_label_and_demotion() {
        let mut s = summaries(2, 4, 0.1);
        for (x, v) in [0.9, 0.9, 0.1, 0.1].into_iter().enumerate() {
            s.r[x][(0, 1)] = v;
            s.r[x][(1, 0)] = v;
        }
        let e = extract_profile_graph(&s, StateSpace::numbered(4).unwrap(), names(2), 0.5, 0.5).unwrap();
        assert_eq!(e.graph.label(0, 1), LevelSet::from_indices([2, 3]));
        assert_eq!(e.demoted, vec!["v0".to_string(), "v1".to_string()]);
        assert!(e.graph.validate().is_ok());
    }

    #[test]
    fn low_theta_without_dotted_edges_is_square() {
        let s = summaries(2, 2, 0.2);
        let e = extract_profile_graph(&s, StateSpace::numbered(2).unwrap(), names(2), 0.5, 0.5).unwrap();
        assert_eq!(e.graph.kinds(), &[VertexKind::Square, VertexKind::Square]);
    }
}
