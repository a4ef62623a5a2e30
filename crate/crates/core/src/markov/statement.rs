use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::profile_graph::{LevelSet, StateSpace};

/// Set of vertex indices (at most 64 vertices), used by the enumeration code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VertexSet(u64);

impl VertexSet {
    pub const fn empty() -> Self {
        VertexSet(0)
    }

    pub fn full(p: usize) -> Self {
        if p == 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << p) - 1)
        }
    }

    pub fn singleton(a: usize) -> Self {
        VertexSet(1 << a)
    }

    pub const fn from_bits(bits: u64) -> Self {
        VertexSet(bits)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        VertexSet(indices.into_iter().fold(0, |m, a| m | (1 << a)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, a: usize) -> bool {
        a < 64 && self.0 & (1 << a) != 0
    }

    pub fn union(self, o: Self) -> Self {
        VertexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: Self) -> Self {
        VertexSet(self.0 & o.0)
    }

    pub fn difference(self, o: Self) -> Self {
        VertexSet(self.0 & !o.0)
    }

    pub fn is_disjoint(self, o: Self) -> bool {
        self.0 & o.0 == 0
    }

    pub fn is_subset(self, o: Self) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let a = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(a)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn names(self, vertices: &[String]) -> Vec<String> {
        self.iter().map(|a| vertices[a].clone()).collect()
    }
}

/// Lexicographic order on the ascending element lists.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Where an independence statement lives: inside the listed profiles, or in
/// the joint distribution conditional on the factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    Levels(LevelSet),
    GivenFactor,
}

/// Mutual independence `Y_{K1} ⟂ … ⟂ Y_{Kr} | Y_C` in a given context.
///
/// Blocks are kept sorted so two statements compare equal regardless of the
/// order their blocks were produced in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndependenceStatement {
    blocks: Vec<VertexSet>,
    given: VertexSet,
    context: Context,
}

impl IndependenceStatement {
    /// Panics unless there are at least two nonempty, pairwise disjoint
    /// blocks that avoid `given`.
    pub fn new(mut blocks: Vec<VertexSet>, given: VertexSet, context: Context) -> Self {
        assert!(blocks.len() >= 2, "a statement needs at least two blocks");
        let mut seen = given;
        for b in &blocks {
            assert!(!b.is_empty(), "blocks must be nonempty");
            assert!(b.is_disjoint(seen), "blocks and conditioning set must be disjoint");
            seen = seen.union(*b);
        }
        blocks.sort();
        Self { blocks, given, context }
    }

    pub fn pair(a: VertexSet, b: VertexSet, given: VertexSet, context: Context) -> Self {
        Self::new(vec![a, b], given, context)
    }

    pub fn blocks(&self) -> &[VertexSet] {
        &self.blocks
    }

    pub fn given(&self) -> VertexSet {
        self.given
    }

    pub fn context(&self) -> Context {
        self.context
    }

    pub fn levels(&self) -> Option<LevelSet> {
        match self.context {
            Context::Levels(l) => Some(l),
            Context::GivenFactor => None,
        }
    }

    /// One statement per level in a profile context; unchanged otherwise.
    pub fn per_level(&self) -> Vec<IndependenceStatement> {
        match self.context {
            Context::Levels(l) => l
                .iter()
                .map(|x| Self { context: Context::Levels(LevelSet::singleton(x)), ..self.clone() })
                .collect(),
            Context::GivenFactor => vec![self.clone()],
        }
    }

    /// Pairwise consequences `K_i ⟂ K_j | C` of a mutual statement.
    pub fn pairwise_expansion(&self) -> Vec<IndependenceStatement> {
        let mut out = Vec::new();
        for i in 0..self.blocks.len() {
            for j in (i + 1)..self.blocks.len() {
                out.push(Self::pair(self.blocks[i], self.blocks[j], self.given, self.context));
            }
        }
        out
    }

    /// Same blocks and conditioning set, with every level of `other` present here.
    pub fn covers(&self, other: &IndependenceStatement) -> bool {
        if self.blocks != other.blocks || self.given != other.given {
            return false;
        }
        match (self.context, other.context) {
            (Context::Levels(a), Context::Levels(b)) => b.is_subset(a),
            (Context::GivenFactor, Context::GivenFactor) => true,
            _ => false,
        }
    }

    pub fn render(&self, vertices: &[String], levels: &StateSpace) -> String {
        let set = |s: VertexSet| format!("{{{}}}", s.names(vertices).join(","));
        let blocks: Vec<String> = self.blocks.iter().map(|&b| set(b)).collect();
        let ctx = match self.context {
            Context::Levels(l) => format!(" @ {{{}}}", levels.names_of(l).join(",")),
            Context::GivenFactor => String::new(),
        };
        let mut given = self.given.names(vertices);
        if self.context == Context::GivenFactor {
            given.push("X".into());
        }
        format!("{} | {{{}}}{}", blocks.join(" _||_ "), given.join(","), ctx)
    }
}

/// `Y_A ⟂ X | Y_{rest}` for a set of vertices without arrows from the factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorStatement {
    pub set: VertexSet,
    pub given: VertexSet,
}

impl FactorStatement {
    pub fn render(&self, vertices: &[String]) -> String {
        format!(
            "{{{}}} _||_ X | {{{}}}",
            self.set.names(vertices).join(","),
            self.given.names(vertices).join(",")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statement {
    Independence(IndependenceStatement),
    Factor(FactorStatement),
}

impl Statement {
    pub fn render(&self, vertices: &[String], levels: &StateSpace) -> String {
        match self {
            Statement::Independence(s) => s.render(vertices, levels),
            Statement::Factor(s) => s.render(vertices),
        }
    }

    pub fn to_document(&self, vertices: &[String], levels: &StateSpace) -> StatementDocument {
        match self {
            Statement::Independence(s) => StatementDocument {
                blocks: s.blocks.iter().map(|b| b.names(vertices)).collect(),
                given: s.given.names(vertices),
                levels: s.levels().map(|l| levels.names_of(l)),
                given_factor: s.context == Context::GivenFactor,
                factor_independent: None,
            },
            Statement::Factor(s) => StatementDocument {
                blocks: vec![],
                given: s.given.names(vertices),
                levels: None,
                given_factor: false,
                factor_independent: Some(s.set.names(vertices)),
            },
        }
    }
}

/// JSON form of a statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementDocument {
    pub blocks: Vec<Vec<String>>,
    pub given: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub given_factor: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_independent: Option<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_canonical() {
        let a = VertexSet::from_indices([2]);
        let b = VertexSet::from_indices([0, 3]);
        let ctx = Context::Levels(LevelSet::singleton(1));
        let s1 = IndependenceStatement::pair(a, b, VertexSet::singleton(1), ctx);
        let s2 = IndependenceStatement::pair(b, a, VertexSet::singleton(1), ctx);
        assert_eq!(s1, s2);
        assert_eq!(s1.blocks()[0], b);
    }

    #[test]
    fn lexicographic_vertex_set_order() {
        let ac = VertexSet::from_indices([0, 2]);
        let b = VertexSet::from_indices([1]);
        let bd = VertexSet::from_indices([1, 3]);
        assert!(ac < b);
        assert!(b < bd);
    }

    #[test]
    fn per_level_and_cover() {
        let s = IndependenceStatement::pair(
            VertexSet::singleton(0),
            VertexSet::singleton(1),
            VertexSet::empty(),
            Context::Levels(LevelSet::from_indices([0, 2])),
        );
        let parts = s.per_level();
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| s.covers(p)));
        assert!(!parts[0].covers(&s));
    }

    #[test]
    #[should_panic]
    fn overlapping_blocks_rejected() {
        let a = VertexSet::from_indices([0, 1]);
        IndependenceStatement::pair(a, VertexSet::singleton(1), VertexSet::empty(), Context::GivenFactor);
    }
}
