//! Profile undirected graphs: vertices joined by edges labelled with the set
//! of factor levels at which the endpoints are conditionally independent.
//!
//! A pair labelled with the whole state space is a missing edge, an empty
//! label is a full edge, and anything in between is a dotted edge. Every
//! connectivity query is taken "at level `x`", i.e. over the edges whose label
//! does not contain `x`.

mod document;
mod dot;
mod levels;

use std::collections::VecDeque;

pub use document::{validate_document, EdgeDocument, GraphDocument, ValidationIssue, ValidationReport};
pub use levels::{LevelSet, StateSpace, MAX_LEVELS};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Circle,
    Square,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Circle => "circle",
            VertexKind::Square => "square",
        }
    }
}

/// How a pair of vertices is joined, derived from its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    Missing,
    Dotted,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileGraph {
    levels: StateSpace,
    vertices: Vec<String>,
    labels: Vec<LevelSet>,
    kinds: Vec<VertexKind>,
}

impl ProfileGraph {
    /// Graph with every pair missing and every vertex a circle.
    pub fn new(levels: StateSpace, vertices: Vec<String>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::input(format!("duplicate vertex `{v}`")));
            }
        }
        let p = vertices.len();
        let full = levels.full_set();
        Ok(Self { levels, vertices, labels: vec![full; p * p], kinds: vec![VertexKind::Circle; p] })
    }

    /// Convenience constructor from string slices.
    pub fn with_names(levels: &[&str], vertices: &[&str]) -> Result<Self> {
        let space = StateSpace::new(levels.iter().map(|s| s.to_string()).collect())?;
        Self::new(space, vertices.iter().map(|s| s.to_string()).collect())
    }

    pub fn levels(&self) -> &StateSpace {
        &self.levels
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_name(&self, a: usize) -> &str {
        &self.vertices[a]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn vertex_indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.vertex_index(n)).collect()
    }

    pub fn level_index(&self, name: &str) -> Result<usize> {
        self.levels.index_of(name).ok_or_else(|| Error::UnknownLevel(name.to_string()))
    }

    pub fn label(&self, a: usize, b: usize) -> LevelSet {
        self.labels[a * self.p() + b]
    }

    pub fn edge_class(&self, a: usize, b: usize) -> EdgeClass {
        let z = self.label(a, b);
        if z.is_empty() {
            EdgeClass::Full
        } else if z == self.levels.full_set() {
            EdgeClass::Missing
        } else {
            EdgeClass::Dotted
        }
    }

    pub fn kind(&self, a: usize) -> VertexKind {
        self.kinds[a]
    }

    pub fn kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    pub fn set_label(&mut self, a: usize, b: usize, label: LevelSet) -> Result<()> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(Error::input(format!("self-loop on `{}`", self.vertices[a])));
        }
        if !label.is_subset(self.levels.full_set()) {
            return Err(Error::input("label not subset of state space"));
        }
        let p = self.p();
        self.labels[a * p + b] = label;
        self.labels[b * p + a] = label;
        Ok(())
    }

    /// Sets the label of `{a, b}` from level names.
    pub fn set_label_named(&mut self, a: &str, b: &str, label: &[&str]) -> Result<()> {
        let (a, b) = (self.vertex_index(a)?, self.vertex_index(b)?);
        let set = self.levels.set_of(label)?;
        self.set_label(a, b, set)
    }

    pub fn set_kind(&mut self, a: usize, kind: VertexKind) -> Result<()> {
        self.check_vertex(a)?;
        self.kinds[a] = kind;
        Ok(())
    }

    /// Unordered pairs `(a, b)` with `a < b`, in lexicographic index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.p();
        (0..p).flat_map(move |a| ((a + 1)..p).map(move |b| (a, b)))
    }

    /// Whether `a` is an endpoint of some dotted edge.
    pub fn has_dotted_edge(&self, a: usize) -> bool {
        (0..self.p()).any(|b| b != a && self.edge_class(a, b) == EdgeClass::Dotted)
    }

    /// Structural checks on an already-built graph (the square-vertex rule).
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for a in 0..self.p() {
            if self.kinds[a] == VertexKind::Square && self.has_dotted_edge(a) {
                issues.push(ValidationIssue::SquareOnDottedEdge(self.vertices[a].clone()));
            }
        }
        ValidationReport { issues }
    }

    fn check_vertex(&self, a: usize) -> Result<()> {
        if a < self.p() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{a}")))
        }
    }

    fn check_level(&self, x: usize) -> Result<()> {
        if x < self.q() {
            Ok(())
        } else {
            Err(Error::UnknownLevel(format!("#{x}")))
        }
    }

    fn check_vertices(&self, set: &[usize]) -> Result<()> {
        set.iter().try_for_each(|&a| self.check_vertex(a))
    }

    /// True when `{a, b}` is joined at level `x`, i.e. `x` is not in its label.
    pub fn joined_at(&self, a: usize, b: usize, x: usize) -> bool {
        a != b && !self.label(a, b).contains(x)
    }

    /// The `x`-neighbours of `a`, ascending.
    pub fn neighbours_x(&self, a: usize, x: usize) -> Result<Vec<usize>> {
        self.check_vertex(a)?;
        self.check_level(x)?;
        Ok((0..self.p()).filter(|&b| self.joined_at(a, b, x)).collect())
    }

    /// Whether an `x`-path joins `a` and `b`.
    pub fn x_path_exists(&self, a: usize, b: usize, x: usize) -> Result<bool> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        self.check_level(x)?;
        if a == b {
            return Err(Error::input("path endpoints must differ"));
        }
        let allowed = vec![true; self.p()];
        Ok(self.reach(&[a], &allowed, x)[b])
    }

    /// Maximal `x`-connected classes of `subset`, using only edges with both
    /// endpoints inside `subset`. Classes are sorted and ordered by their
    /// smallest member.
    pub fn x_connected_components(&self, subset: &[usize], x: usize) -> Result<Vec<Vec<usize>>> {
        if subset.is_empty() {
            return Err(Error::input("component query needs a nonempty vertex set"));
        }
        self.check_vertices(subset)?;
        self.check_level(x)?;
        let mut allowed = vec![false; self.p()];
        for &a in subset {
            allowed[a] = true;
        }
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut seen = vec![false; self.p()];
        let mut out = Vec::new();
        for &start in &sorted {
            if seen[start] {
                continue;
            }
            let reached = self.reach(&[start], &allowed, x);
            let comp: Vec<usize> = (0..self.p()).filter(|&v| reached[v]).collect();
            for &v in &comp {
                seen[v] = true;
            }
            out.push(comp);
        }
        Ok(out)
    }

    pub fn is_x_connected(&self, subset: &[usize], x: usize) -> Result<bool> {
        Ok(self.x_connected_components(subset, x)?.len() == 1)
    }

    /// Whether `c` intercepts every `x`-path from `a` to `b`. `c` may be empty.
    pub fn x_separates(&self, a: &[usize], b: &[usize], c: &[usize], x: usize) -> Result<bool> {
        self.check_vertices(a)?;
        self.check_vertices(b)?;
        self.check_vertices(c)?;
        self.check_level(x)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::input("separation needs nonempty A and B"));
        }
        let overlaps = |s: &[usize], t: &[usize]| s.iter().any(|v| t.contains(v));
        if overlaps(a, b) || overlaps(a, c) || overlaps(b, c) {
            return Err(Error::input("A, B and C must be pairwise disjoint"));
        }
        let mut allowed = vec![true; self.p()];
        for &v in c {
            allowed[v] = false;
        }
        let reached = self.reach(a, &allowed, x);
        Ok(!b.iter().any(|&v| reached[v]))
    }

    /// Breadth-first reachability at level `x` through `allowed` vertices.
    fn reach(&self, starts: &[usize], allowed: &[bool], x: usize) -> Vec<bool> {
        let p = self.p();
        let mut seen = vec![false; p];
        let mut queue = VecDeque::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for v in 0..p {
                if !seen[v] && allowed[v] && self.joined_at(u, v, x) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Per-level undirected graphs obtained by resolving every label at `x`.
    pub fn induced_multiple_graphs(&self) -> MultipleGraphs {
        let p = self.p();
        let mut graphs = MultipleGraphs::empty(self.levels.clone(), self.vertices.clone());
        for x in 0..self.q() {
            for a in 0..p {
                for b in (a + 1)..p {
                    if self.joined_at(a, b, x) {
                        graphs.set_edge(x, a, b, true);
                    }
                }
            }
        }
        graphs
    }

    /// Adjacency bitmasks at level `x`; requires `p <= 64`.
    pub(crate) fn adjacency_masks(&self, x: usize) -> Vec<u64> {
        let p = self.p();
        assert!(p <= 64, "bitmask adjacency supports at most 64 vertices");
        (0..p)
            .map(|a| (0..p).filter(|&b| self.joined_at(a, b, x)).fold(0u64, |m, b| m | (1 << b)))
            .collect()
    }
}

/// One symmetric adjacency relation per level over a shared vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipleGraphs {
    levels: StateSpace,
    vertices: Vec<String>,
    adjacency: Vec<Vec<bool>>,
}

impl MultipleGraphs {
    pub fn empty(levels: StateSpace, vertices: Vec<String>) -> Self {
        let p = vertices.len();
        let adjacency = vec![vec![false; p * p]; levels.len()];
        Self { levels, vertices, adjacency }
    }

    pub fn levels(&self) -> &StateSpace {
        &self.levels
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn p(&self) -> usize {
        self.vertices.len()
    }

    pub fn q(&self) -> usize {
        self.levels.len()
    }

    pub fn has_edge(&self, x: usize, a: usize, b: usize) -> bool {
        self.adjacency[x][a * self.p() + b]
    }

    /// Sets or clears `{a, b}` at level `x`; self-loops are ignored.
    pub fn set_edge(&mut self, x: usize, a: usize, b: usize, present: bool) {
        if a == b {
            return;
        }
        let p = self.p();
        self.adjacency[x][a * p + b] = present;
        self.adjacency[x][b * p + a] = present;
    }

    /// Edges at level `x` as `(a, b)` with `a < b`.
    pub fn edges(&self, x: usize) -> Vec<(usize, usize)> {
        let p = self.p();
        let mut out = Vec::new();
        for a in 0..p {
            for b in (a + 1)..p {
                if self.has_edge(x, a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self, x: usize) -> usize {
        self.edges(x).len()
    }

    /// Ordinary vertex separation in the level-`x` graph.
    pub fn separates(&self, x: usize, a: &[usize], b: &[usize], c: &[usize]) -> bool {
        let p = self.p();
        let mut seen = vec![false; p];
        let mut stack: Vec<usize> = Vec::new();
        for &s in a {
            seen[s] = true;
            stack.push(s);
        }
        while let Some(u) = stack.pop() {
            for v in 0..p {
                if !seen[v] && !c.contains(&v) && self.has_edge(x, u, v) {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        !b.iter().any(|&v| seen[v])
    }
}
