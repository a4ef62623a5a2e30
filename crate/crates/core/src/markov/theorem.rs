use rayon::prelude::*;
use serde::Serialize;

use super::{check_cap, for_each_disjoint_pair, level_masks, VertexSet};
use crate::error::{Error, Result};
use crate::profile_graph::{LevelSet, ProfileGraph, StateSpace};

/// A triple where separation and the component criterion disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    pub level: String,
    pub separated: bool,
    pub split_by_components: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceCertificate {
    pub holds: bool,
    /// Number of `(A, B, C, x)` configurations compared.
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

/// Compares, for every `(A, B, C, x)`, path separation of `A` and `B` by `C`
/// with the criterion that no `x`-component of `V∖C` meets both sets.
pub fn check_gmp_csmp_equivalence(g: &ProfileGraph, cap: usize) -> Result<EquivalenceCertificate> {
    check_cap(g.p(), cap)?;
    let all = VertexSet::full(g.p()).bits();
    let masks = level_masks(g);
    let mut checked = 0u64;
    for (x, m) in masks.iter().enumerate() {
        for c in 0..=all {
            let free = all & !c;
            let comps = m.components(free);
            let mut found = None;
            for_each_disjoint_pair(free, |a, b| {
                if found.is_some() {
                    return;
                }
                checked += 1;
                let separated = m.separates(a, b, c, all);
                let split = comps.iter().all(|&k| k & a == 0 || k & b == 0);
                if separated != split {
                    found = Some((a, b, separated, split));
                }
            });
            if let Some((a, b, separated, split)) = found {
                let names = |s: u64| VertexSet::from_bits(s).names(g.vertices());
                return Ok(EquivalenceCertificate {
                    holds: false,
                    checked,
                    counterexample: Some(Counterexample {
                        a: names(a),
                        b: names(b),
                        c: names(c),
                        level: g.levels().name(x).to_string(),
                        separated,
                        split_by_components: split,
                    }),
                });
            }
        }
    }
    Ok(EquivalenceCertificate { holds: true, checked, counterexample: None })
}

/// Largest family size `verify_thm1` will enumerate.
pub const MAX_THM1_GRAPHS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Thm1Report {
    pub p: usize,
    pub q: usize,
    pub graphs: u64,
    pub holds: u64,
    /// Indices (in enumeration order) of graphs where the check failed.
    pub failures: Vec<u64>,
    pub configurations: u64,
}

impl Thm1Report {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty() && self.holds == self.graphs
    }
}

/// The profile graph with index `index` in the exhaustive family: each pair,
/// in `pairs()` order, takes label `index` digit in base `2^q`.
pub fn family_member(p: usize, q: usize, mut index: u64) -> Result<ProfileGraph> {
    let names: Vec<String> = (0..p).map(|i| format!("v{i}")).collect();
    let mut g = ProfileGraph::new(StateSpace::numbered(q)?, names)?;
    let base = 1u64 << q;
    let pairs: Vec<_> = g.pairs().collect();
    for (a, b) in pairs {
        g.set_label(a, b, LevelSet::from_bits(index % base))?;
        index /= base;
    }
    Ok(g)
}

/// Runs the separation/component equivalence on every profile graph with
/// `p` vertices and `q` levels.
pub fn verify_thm1(p: usize, q: usize) -> Result<Thm1Report> {
    if q == 0 || p == 0 {
        return Err(Error::input("p and q must be positive"));
    }
    let npairs = (p * (p - 1) / 2) as u32;
    let graphs = (q as u32)
        .checked_mul(npairs)
        .filter(|&bits| bits < 63)
        .map(|bits| 1u64 << bits)
        .filter(|&n| n <= MAX_THM1_GRAPHS)
        .ok_or_else(|| Error::input(format!("family for p={p}, q={q} exceeds {MAX_THM1_GRAPHS} graphs")))?;
    let results: Vec<(u64, EquivalenceCertificate)> = (0..graphs)
        .into_par_iter()
        .map(|i| {
            let g = family_member(p, q, i)?;
            Ok((i, check_gmp_csmp_equivalence(&g, usize::MAX)?))
        })
        .collect::<Result<_>>()?;
    let mut failures: Vec<u64> = results.iter().filter(|(_, c)| !c.holds).map(|(i, _)| *i).collect();
    failures.sort_unstable();
    Ok(Thm1Report {
        p,
        q,
        graphs,
        holds: graphs - failures.len() as u64,
        configurations: results.iter().map(|(_, c)| c.checked).sum(),
        failures,
    })
}
