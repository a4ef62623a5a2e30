//! JSON form of a profile graph and its validation.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{EdgeClass, LevelSet, ProfileGraph, StateSpace, VertexKind};
use crate::error::{Error, Result};

/// Serialized graph. Pairs not listed in `edges` are missing edges; an edge
/// with an empty `label` is a full edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub levels: Vec<String>,
    pub vertices: Vec<String>,
    #[serde(default)]
    pub kinds: IndexMap<String, String>,
    #[serde(default)]
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub a: String,
    pub b: String,
    pub label: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    EmptyStateSpace,
    DuplicateLevel(String),
    DuplicateVertex(String),
    UnknownEndpoint(String),
    SelfLoop(String),
    DuplicatePair(String, String),
    LabelNotSubset { a: String, b: String, level: String },
    UnknownKindVertex(String),
    UnknownKind { vertex: String, kind: String },
    SquareOnDottedEdge(String),
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            EmptyStateSpace => write!(f, "state space is empty"),
            DuplicateLevel(l) => write!(f, "duplicate level `{l}`"),
            DuplicateVertex(v) => write!(f, "duplicate vertex `{v}`"),
            UnknownEndpoint(v) => write!(f, "edge endpoint `{v}` is not a vertex"),
            SelfLoop(v) => write!(f, "self-loop on `{v}`"),
            DuplicatePair(a, b) => write!(f, "pair ({a},{b}) listed more than once"),
            LabelNotSubset { a, b, level } => {
                write!(f, "label not subset of state space: ({a},{b}) carries unknown level `{level}`")
            }
            UnknownKindVertex(v) => write!(f, "kind given for unknown vertex `{v}`"),
            UnknownKind { vertex, kind } => write!(f, "vertex `{vertex}` has unknown kind `{kind}`"),
            SquareOnDottedEdge(v) => write!(f, "square vertex incident to dotted edge: `{v}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msg: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
            Err(Error::Input(msg.join("; ")))
        }
    }
}

fn parse_kind(s: &str) -> Option<VertexKind> {
    match s {
        "circle" => Some(VertexKind::Circle),
        "square" => Some(VertexKind::Square),
        _ => None,
    }
}

/// Checks a document against every graph invariant, collecting all issues.
pub fn validate_document(doc: &GraphDocument) -> ValidationReport {
    use ValidationIssue::*;
    let mut issues = Vec::new();
    if doc.levels.is_empty() {
        issues.push(EmptyStateSpace);
    }
    for (i, l) in doc.levels.iter().enumerate() {
        if doc.levels[..i].contains(l) {
            issues.push(DuplicateLevel(l.clone()));
        }
    }
    for (i, v) in doc.vertices.iter().enumerate() {
        if doc.vertices[..i].contains(v) {
            issues.push(DuplicateVertex(v.clone()));
        }
    }
    let mut seen_pairs: Vec<(&str, &str)> = Vec::new();
    for e in &doc.edges {
        for end in [&e.a, &e.b] {
            if !doc.vertices.contains(end) {
                issues.push(UnknownEndpoint(end.clone()));
            }
        }
        if e.a == e.b {
            issues.push(SelfLoop(e.a.clone()));
        }
        let key = if e.a <= e.b { (e.a.as_str(), e.b.as_str()) } else { (e.b.as_str(), e.a.as_str()) };
        if seen_pairs.contains(&key) {
            issues.push(DuplicatePair(key.0.to_string(), key.1.to_string()));
        }
        seen_pairs.push(key);
        for l in &e.label {
            if !doc.levels.contains(l) {
                issues.push(LabelNotSubset { a: e.a.clone(), b: e.b.clone(), level: l.clone() });
            }
        }
    }
    for (v, k) in &doc.kinds {
        if !doc.vertices.contains(v) {
            issues.push(UnknownKindVertex(v.clone()));
        }
        if parse_kind(k).is_none() {
            issues.push(UnknownKind { vertex: v.clone(), kind: k.clone() });
        }
    }
    if issues.is_empty() {
        // square rule needs a well-formed graph to evaluate labels
        let q = doc.levels.len();
        for (v, k) in &doc.kinds {
            if parse_kind(k) != Some(VertexKind::Square) {
                continue;
            }
            let dotted = doc.edges.iter().any(|e| {
                (&e.a == v || &e.b == v) && !e.label.is_empty() && {
                    let mut distinct = e.label.clone();
                    distinct.sort();
                    distinct.dedup();
                    distinct.len() < q
                }
            });
            if dotted {
                issues.push(SquareOnDottedEdge(v.clone()));
            }
        }
    }
    ValidationReport { issues }
}

impl TryFrom<&GraphDocument> for ProfileGraph {
    type Error = Error;

    fn try_from(doc: &GraphDocument) -> Result<Self> {
        validate_document(doc).into_result()?;
        let levels = StateSpace::new(doc.levels.clone())?;
        let mut g = ProfileGraph::new(levels, doc.vertices.clone())?;
        for e in &doc.edges {
            let (a, b) = (g.vertex_index(&e.a)?, g.vertex_index(&e.b)?);
            let label = g.levels().set_of(&e.label)?;
            g.set_label(a, b, label)?;
        }
        for (v, k) in &doc.kinds {
            let a = g.vertex_index(v)?;
            g.set_kind(a, parse_kind(k).expect("validated"))?;
        }
        Ok(g)
    }
}

impl From<&ProfileGraph> for GraphDocument {
    fn from(g: &ProfileGraph) -> Self {
        let kinds = g
            .vertices()
            .iter()
            .zip(g.kinds())
            .map(|(v, k)| (v.clone(), k.as_str().to_string()))
            .collect();
        let edges = g
            .pairs()
            .filter(|&(a, b)| g.edge_class(a, b) != EdgeClass::Missing)
            .map(|(a, b)| EdgeDocument {
                a: g.vertex_name(a).to_string(),
                b: g.vertex_name(b).to_string(),
                label: g.levels().names_of(g.label(a, b)),
            })
            .collect();
        GraphDocument { levels: g.levels().names().to_vec(), vertices: g.vertices().to_vec(), kinds, edges }
    }
}

impl ProfileGraph {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        ProfileGraph::try_from(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDocument::from(self)).expect("graph documents always serialize")
    }
}

impl LevelSet {
    /// Label names in state-space order.
    pub fn names(self, space: &StateSpace) -> Vec<String> {
        space.names_of(self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::figure_one;
    use super::*;

    fn figure_one_doc() -> GraphDocument {
        GraphDocument::from(&figure_one())
    }

    #[test]
    fn figure_one_is_valid() {
        assert!(validate_document(&figure_one_doc()).is_ok());
    }

    #[test]
    fn unknown_level_in_label() {
        let mut doc = figure_one_doc();
        let ab = doc.edges.iter_mut().find(|e| e.a == "a" && e.b == "b").unwrap();
        ab.label = vec!["5".into()];
        let report = validate_document(&doc);
        assert!(report.issues.iter().any(|i| matches!(i, ValidationIssue::LabelNotSubset { .. })));
        assert!(report.into_result().unwrap_err().to_string().contains("label not subset of state space"));
    }

    #[test]
    fn square_on_dotted_edge() {
        let mut doc = figure_one_doc();
        doc.kinds.insert("a".into(), "square".into());
        let report = validate_document(&doc);
        assert_eq!(report.issues, vec![ValidationIssue::SquareOnDottedEdge("a".into())]);
        assert!(report.into_result().unwrap_err().to_string().contains("square vertex incident to dotted edge"));
    }

    #[test]
    fn structural_issues_are_all_reported() {
        let doc = GraphDocument {
            levels: vec!["0".into()],
            vertices: vec!["a".into(), "a".into()],
            kinds: IndexMap::from([("z".to_string(), "hexagon".to_string())]),
            edges: vec![EdgeDocument { a: "a".into(), b: "q".into(), label: vec![] }],
        };
        let issues = validate_document(&doc).issues;
        assert!(issues.contains(&ValidationIssue::DuplicateVertex("a".into())));
        assert!(issues.contains(&ValidationIssue::UnknownEndpoint("q".into())));
        assert!(issues.contains(&ValidationIssue::UnknownKindVertex("z".into())));
    }

    #[test]
    fn json_round_trip() {
        let mut g = figure_one();
        g.set_kind(3, VertexKind::Square).unwrap();
        let back = ProfileGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }
}
