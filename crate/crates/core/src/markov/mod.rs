//! Independence models of profile graphs and their LWF chain graphs.
//!
//! Statements are produced in canonical form (sorted blocks, merged level
//! sets, sorted output) so that enumerations are deterministic and can be
//! compared as sets. Subset enumeration is exponential in the number of
//! vertices and refuses graphs above a configurable cap.

mod chain;
mod statement;
mod theorem;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use chain::{
    induced_chain_class, is_markov_compatible, lwf_gmp_statements, ChainClass, ChainDocument, ChainGraph,
    Compatibility,
};
pub use statement::{Context, FactorStatement, IndependenceStatement, Statement, StatementDocument, VertexSet};
pub use theorem::{check_gmp_csmp_equivalence, verify_thm1, Counterexample, EquivalenceCertificate, Thm1Report};

use crate::error::{Error, Result};
use crate::profile_graph::{LevelSet, ProfileGraph};

/// Default largest vertex count accepted by subset enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// Adjacency of one level as bitmasks.
#[derive(Debug, Clone)]
pub(crate) struct MaskGraph {
    adj: Vec<u64>,
}

impl MaskGraph {
    pub(crate) fn new(adj: Vec<u64>) -> Self {
        Self { adj }
    }

    /// Vertices reachable from `start` moving only through `allowed`.
    pub(crate) fn reach(&self, start: u64, allowed: u64) -> u64 {
        let mut seen = start;
        let mut frontier = start;
        while frontier != 0 {
            let mut next = 0u64;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[v];
            }
            next &= allowed & !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Connected components of the subgraph induced on `d`, ordered by smallest member.
    pub(crate) fn components(&self, d: u64) -> Vec<u64> {
        let mut rest = d;
        let mut out = Vec::new();
        while rest != 0 {
            let start = rest & rest.wrapping_neg();
            let comp = self.reach(start, d);
            out.push(comp);
            rest &= !comp;
        }
        out
    }

    pub(crate) fn separates(&self, a: u64, b: u64, c: u64, all: u64) -> bool {
        self.reach(a, all & !c) & b == 0
    }

    pub(crate) fn neighbours(&self, v: usize) -> u64 {
        self.adj[v]
    }
}

pub(crate) fn level_masks(g: &ProfileGraph) -> Vec<MaskGraph> {
    (0..g.q()).map(|x| MaskGraph::new(g.adjacency_masks(x))).collect()
}

pub(crate) fn check_cap(p: usize, cap: usize) -> Result<()> {
    if p > cap || p > 63 {
        Err(Error::Capacity { p, cap: cap.min(63) })
    } else {
        Ok(())
    }
}

fn check_bitmask_size(p: usize) -> Result<()> {
    if p > 64 {
        Err(Error::Capacity { p, cap: 64 })
    } else {
        Ok(())
    }
}

/// Merges per-level statements with identical blocks into one level set.
#[derive(Default)]
struct Collector {
    map: BTreeMap<(Vec<VertexSet>, VertexSet), LevelSet>,
}

impl Collector {
    fn add(&mut self, mut blocks: Vec<VertexSet>, given: VertexSet, x: usize) {
        blocks.sort();
        self.map.entry((blocks, given)).or_default().insert(x);
    }

    fn add_levels(&mut self, mut blocks: Vec<VertexSet>, given: VertexSet, levels: LevelSet) {
        blocks.sort();
        let e = self.map.entry((blocks, given)).or_default();
        *e = e.union(levels);
    }

    fn merge(&mut self, other: Collector) {
        for ((blocks, given), levels) in other.map {
            self.add_levels(blocks, given, levels);
        }
    }

    fn finish(self) -> Vec<IndependenceStatement> {
        self.map
            .into_iter()
            .map(|((blocks, given), levels)| IndependenceStatement::new(blocks, given, Context::Levels(levels)))
            .collect()
    }
}

/// Pairwise property: one statement per pair with a nonempty label, holding
/// at the levels of that label given all other vertices.
pub fn pairwise_statements(g: &ProfileGraph) -> Result<Vec<IndependenceStatement>> {
    check_bitmask_size(g.p())?;
    let all = VertexSet::full(g.p());
    let mut out: Vec<_> = g
        .pairs()
        .filter(|&(a, b)| !g.label(a, b).is_empty())
        .map(|(a, b)| {
            let (sa, sb) = (VertexSet::singleton(a), VertexSet::singleton(b));
            let rest = all.difference(sa.union(sb));
            IndependenceStatement::pair(sa, sb, rest, Context::Levels(g.label(a, b)))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Local property: each vertex is independent of its non-neighbours given its
/// `x`-neighbours; empty remainders are skipped.
pub fn local_statements(g: &ProfileGraph) -> Result<Vec<IndependenceStatement>> {
    check_bitmask_size(g.p())?;
    let all = VertexSet::full(g.p());
    let masks = level_masks(g);
    let mut c = Collector::default();
    for a in 0..g.p() {
        for (x, m) in masks.iter().enumerate() {
            let nb = VertexSet::from_bits(m.neighbours(a));
            let sa = VertexSet::singleton(a);
            let rest = all.difference(nb.union(sa));
            if !rest.is_empty() {
                c.add(vec![sa, rest], nb, x);
            }
        }
    }
    Ok(c.finish())
}

/// Connected-set property: for each `x`-disconnected set, its `x`-components
/// are mutually independent given the complement.
pub fn csmp_statements(g: &ProfileGraph, cap: usize) -> Result<Vec<IndependenceStatement>> {
    check_cap(g.p(), cap)?;
    let all = VertexSet::full(g.p()).bits();
    let masks = level_masks(g);
    let mut c = Collector::default();
    for d in 1..=all {
        for (x, m) in masks.iter().enumerate() {
            let comps = m.components(d);
            if comps.len() >= 2 {
                let blocks = comps.into_iter().map(VertexSet::from_bits).collect();
                c.add(blocks, VertexSet::from_bits(all & !d), x);
            }
        }
    }
    Ok(c.finish())
}

/// Global property: every `(A, B, C)` with `C` separating `A` from `B` at
/// some level, merged over levels.
pub fn gmp_statements(g: &ProfileGraph, cap: usize) -> Result<Vec<IndependenceStatement>> {
    check_cap(g.p(), cap)?;
    let all = VertexSet::full(g.p()).bits();
    let masks = level_masks(g);
    let partials: Vec<Collector> = (0..=all)
        .into_par_iter()
        .map(|cset| {
            let mut col = Collector::default();
            let free = all & !cset;
            for_each_disjoint_pair(free, |a, b| {
                for (x, m) in masks.iter().enumerate() {
                    if m.separates(a, b, cset, all) {
                        col.add(vec![VertexSet::from_bits(a), VertexSet::from_bits(b)], VertexSet::from_bits(cset), x);
                    }
                }
            });
            col
        })
        .collect();
    let mut c = Collector::default();
    for part in partials {
        c.merge(part);
    }
    Ok(c.finish())
}

/// Calls `f(a, b)` for every pair of nonempty disjoint subsets of `free`
/// with `a` before `b` in canonical order.
pub(crate) fn for_each_disjoint_pair(free: u64, mut f: impl FnMut(u64, u64)) {
    let mut a = free;
    while a != 0 {
        let rest = free & !a;
        let mut b = rest;
        while b != 0 {
            if VertexSet::from_bits(a) < VertexSet::from_bits(b) {
                f(a, b);
            }
            b = (b - 1) & rest;
        }
        a = (a - 1) & free;
    }
}

/// Whether the graph's global property implies `stmt` at every level of its
/// context, checked by separation of each block from the others.
pub fn graph_implies(g: &ProfileGraph, stmt: &IndependenceStatement) -> bool {
    let Some(levels) = stmt.levels() else {
        return false;
    };
    let all = VertexSet::full(g.p()).bits();
    let masks = level_masks(g);
    let blocks = stmt.blocks();
    levels.iter().all(|x| {
        blocks.iter().enumerate().all(|(i, bi)| {
            let others = blocks
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(0u64, |m, (_, bj)| m | bj.bits());
            masks[x].separates(bi.bits(), others, stmt.given().bits(), all)
        })
    })
}
