use serde::{Deserialize, Serialize};

use super::{check_cap, IndependenceStatement, MaskGraph, Statement, VertexSet, Context, FactorStatement};
use crate::error::{Error, Result};
use crate::profile_graph::{EdgeClass, ProfileGraph, VertexKind};

/// Two-block LWF chain graph: an undirected graph on the responses plus
/// arrows from the factor into some of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainGraph {
    vertices: Vec<String>,
    adj: Vec<u64>,
    arrows: VertexSet,
}

impl ChainGraph {
    /// No undirected edges and no arrows.
    pub fn new(vertices: Vec<String>) -> Result<Self> {
        if vertices.len() > 64 {
            return Err(Error::Capacity { p: vertices.len(), cap: 64 });
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::input(format!("duplicate vertex `{v}`")));
            }
        }
        let p = vertices.len();
        Ok(Self { vertices, adj: vec![0; p], arrows: VertexSet::empty() })
    }

    /// Undirected part equal to the skeleton of `g` (every pair whose label
    /// is not the whole state space), with the given arrows.
    pub fn with_skeleton_of(g: &ProfileGraph, arrows: VertexSet) -> Self {
        let mut c = Self::new(g.vertices().to_vec()).expect("profile graphs have distinct vertices");
        for (a, b) in g.pairs() {
            if g.edge_class(a, b) != EdgeClass::Missing {
                c.set_edge(a, b, true);
            }
        }
        c.arrows = arrows;
        c
    }

    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] & (1 << b) != 0
    }

    /// Panics on a self-loop.
    pub fn set_edge(&mut self, a: usize, b: usize, present: bool) {
        assert_ne!(a, b, "chain graphs have no self-loops");
        if present {
            self.adj[a] |= 1 << b;
            self.adj[b] |= 1 << a;
        } else {
            self.adj[a] &= !(1 << b);
            self.adj[b] &= !(1 << a);
        }
    }

    pub fn arrows(&self) -> VertexSet {
        self.arrows
    }

    pub fn has_arrow(&self, a: usize) -> bool {
        self.arrows.contains(a)
    }

    pub fn set_arrow(&mut self, a: usize, present: bool) {
        let s = VertexSet::singleton(a);
        self.arrows = if present { self.arrows.union(s) } else { self.arrows.difference(s) };
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let p = self.p();
        (0..p).flat_map(|a| ((a + 1)..p).map(move |b| (a, b))).filter(|&(a, b)| self.has_edge(a, b)).collect()
    }

    pub(crate) fn mask_graph(&self) -> MaskGraph {
        MaskGraph::new(self.adj.clone())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChainDocument = serde_json::from_str(text)?;
        ChainGraph::try_from(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ChainDocument::from(self)).expect("chain documents always serialize")
    }
}

/// Serialized chain graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDocument {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub arrows: Vec<String>,
}

impl TryFrom<&ChainDocument> for ChainGraph {
    type Error = Error;

    fn try_from(doc: &ChainDocument) -> Result<Self> {
        let mut c = ChainGraph::new(doc.vertices.clone())?;
        for [a, b] in &doc.edges {
            let (ia, ib) = (c.vertex_index(a)?, c.vertex_index(b)?);
            if ia == ib {
                return Err(Error::input(format!("self-loop on `{a}`")));
            }
            c.set_edge(ia, ib, true);
        }
        for a in &doc.arrows {
            let ia = c.vertex_index(a)?;
            c.set_arrow(ia, true);
        }
        Ok(c)
    }
}

impl From<&ChainGraph> for ChainDocument {
    fn from(c: &ChainGraph) -> Self {
        ChainDocument {
            vertices: c.vertices.clone(),
            edges: c.edges().into_iter().map(|(a, b)| [c.vertices[a].clone(), c.vertices[b].clone()]).collect(),
            arrows: c.arrows.names(&c.vertices),
        }
    }
}

/// Extremes of the compatible class, plus the single member singled out by
/// the vertex kinds (arrows to circle vertices only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainClass {
    pub min: ChainGraph,
    pub max: ChainGraph,
    pub unique: ChainGraph,
}

pub fn induced_chain_class(g: &ProfileGraph) -> ChainClass {
    let mut dotted = VertexSet::empty();
    for (a, b) in g.pairs() {
        if g.edge_class(a, b) == EdgeClass::Dotted {
            dotted = dotted.union(VertexSet::from_indices([a, b]));
        }
    }
    let circles = VertexSet::from_indices((0..g.p()).filter(|&a| g.kind(a) == VertexKind::Circle));
    ChainClass {
        min: ChainGraph::with_skeleton_of(g, dotted),
        max: ChainGraph::with_skeleton_of(g, VertexSet::full(g.p())),
        unique: ChainGraph::with_skeleton_of(g, circles),
    }
}

/// Outcome of a compatibility check; `reasons` lists every violated condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Compatibility {
    pub compatible: bool,
    pub reasons: Vec<String>,
}

pub fn is_markov_compatible(chain: &ChainGraph, g: &ProfileGraph) -> Result<Compatibility> {
    if chain.vertices() != g.vertices() {
        return Err(Error::input("chain graph and profile graph have different vertex sets"));
    }
    let mut reasons = Vec::new();
    for (a, b) in g.pairs() {
        let (na, nb) = (g.vertex_name(a), g.vertex_name(b));
        let class = g.edge_class(a, b);
        let should = class != EdgeClass::Missing;
        if should != chain.has_edge(a, b) {
            let what = if should { "missing" } else { "present" };
            reasons.push(format!("undirected edge ({na},{nb}) is {what} but the profile label is {class:?}"));
        }
        if class == EdgeClass::Dotted {
            for (v, nv) in [(a, na), (b, nb)] {
                if !chain.has_arrow(v) {
                    reasons.push(format!("`{nv}` lies on dotted edge ({na},{nb}) but has no arrow from X"));
                }
            }
        }
    }
    reasons.dedup();
    Ok(Compatibility { compatible: reasons.is_empty(), reasons })
}

/// Statements of the LWF global property: component independences of every
/// disconnected set given the rest and the factor, and factor independence
/// of every nonempty set of unarrowed vertices.
pub fn lwf_gmp_statements(chain: &ChainGraph, cap: usize) -> Result<Vec<Statement>> {
    check_cap(chain.p(), cap)?;
    let all = VertexSet::full(chain.p()).bits();
    let m = chain.mask_graph();
    let mut out = Vec::new();
    for d in 1..=all {
        let comps = m.components(d);
        if comps.len() >= 2 {
            let blocks = comps.into_iter().map(VertexSet::from_bits).collect();
            out.push(Statement::Independence(IndependenceStatement::new(
                blocks,
                VertexSet::from_bits(all & !d),
                Context::GivenFactor,
            )));
        }
    }
    let unarrowed = VertexSet::full(chain.p()).difference(chain.arrows()).bits();
    let mut a = unarrowed;
    while a != 0 {
        out.push(Statement::Factor(FactorStatement {
            set: VertexSet::from_bits(a),
            given: VertexSet::from_bits(all & !a),
        }));
        a = (a - 1) & unarrowed;
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::DEFAULT_ENUMERATION_CAP;
    use crate::profile_graph::fixtures::figure_one;
    use crate::profile_graph::LevelSet;

    fn three_vertex() -> ProfileGraph {
        let mut g = ProfileGraph::with_names(&["0", "1"], &["a", "b", "c"]).unwrap();
        g.set_label(0, 1, LevelSet::singleton(0)).unwrap();
        g.set_label(0, 2, LevelSet::empty()).unwrap();
        g.set_label(1, 2, LevelSet::full(2)).unwrap();
        g
    }

    fn arrows(g: &ProfileGraph, names: &[&str]) -> VertexSet {
        VertexSet::from_indices(g.vertex_indices(names).unwrap())
    }

    #[test]
    fn three_vertex_class() {
        let g = three_vertex();
        let class = induced_chain_class(&g);
        assert_eq!(class.min.arrows(), arrows(&g, &["a", "b"]));
        assert_eq!(class.max.arrows(), arrows(&g, &["a", "b", "c"]));
        assert_eq!(class.min.edges(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn three_vertex_compatibility() {
        let g = three_vertex();
        let verdict = |names: &[&str]| {
            is_markov_compatible(&ChainGraph::with_skeleton_of(&g, arrows(&g, names)), &g).unwrap().compatible
        };
        assert!(!verdict(&["c"]));
        assert!(!verdict(&["b", "c"]));
        assert!(verdict(&["a", "b", "c"]));
        assert!(verdict(&["a", "b"]));
        let r = is_markov_compatible(&ChainGraph::with_skeleton_of(&g, arrows(&g, &["c"])), &g).unwrap();
        assert_eq!(r.reasons.len(), 2);
    }

    #[test]
    fn wrong_skeleton_is_incompatible() {
        let g = three_vertex();
        let mut c = ChainGraph::with_skeleton_of(&g, VertexSet::full(3));
        c.set_edge(1, 2, true);
        let r = is_markov_compatible(&c, &g).unwrap();
        assert!(!r.compatible);
        assert!(r.reasons[0].contains("(b,c)"));
    }

    #[test]
    fn figure_three_unique_chain() {
        let mut g = figure_one();
        g.set_kind(3, VertexKind::Square).unwrap();
        let unique = induced_chain_class(&g).unique;
        assert_eq!(unique.arrows(), arrows(&g, &["a", "b", "c"]));
        let st = lwf_gmp_statements(&unique, DEFAULT_ENUMERATION_CAP).unwrap();
        let d = arrows(&g, &["d"]);
        assert!(st.contains(&Statement::Factor(FactorStatement { set: d, given: arrows(&g, &["a", "b", "c"]) })));
        let ac_d = IndependenceStatement::pair(arrows(&g, &["a", "c"]), d, arrows(&g, &["b"]), Context::GivenFactor);
        assert!(st.contains(&Statement::Independence(ac_d)));
    }

    #[test]
    fn complete_chain_has_no_statements() {
        let mut c = ChainGraph::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            c.set_edge(a, b, true);
        }
        for a in 0..3 {
            c.set_arrow(a, true);
        }
        assert!(lwf_gmp_statements(&c, DEFAULT_ENUMERATION_CAP).unwrap().is_empty());
    }

    #[test]
    fn vertex_mismatch_is_input_error() {
        let g = three_vertex();
        let c = ChainGraph::new(vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(is_markov_compatible(&c, &g), Err(Error::Input(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = figure_one();
        let c = induced_chain_class(&g).min;
        assert_eq!(ChainGraph::from_json(&c.to_json()).unwrap(), c);
        assert!(ChainGraph::from_json(r#"{"vertices":["a"],"edges":[["a","z"]]}"#).is_err());
    }
}
