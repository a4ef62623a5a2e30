use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of factor levels.
pub const MAX_LEVELS: usize = 64;

/// Subset of the factor levels, stored as a bitmask over level indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LevelSet(u64);

impl LevelSet {
    pub const fn empty() -> Self {
        LevelSet(0)
    }

    pub fn full(q: usize) -> Self {
        debug_assert!(q <= MAX_LEVELS);
        if q == 64 {
            LevelSet(u64::MAX)
        } else {
            LevelSet((1u64 << q) - 1)
        }
    }

    pub fn singleton(x: usize) -> Self {
        LevelSet(1 << x)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        LevelSet(indices.into_iter().fold(0, |m, x| m | (1 << x)))
    }

    pub const fn from_bits(bits: u64) -> Self {
        LevelSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, x: usize) -> bool {
        x < 64 && self.0 & (1 << x) != 0
    }

    pub fn insert(&mut self, x: usize) {
        self.0 |= 1 << x;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: LevelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: LevelSet) -> Self {
        LevelSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&x| self.contains(x))
    }
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The ordered levels of the external factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    levels: Vec<String>,
}

impl StateSpace {
    pub fn new(levels: Vec<String>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::input("state space needs at least one level"));
        }
        if levels.len() > MAX_LEVELS {
            return Err(Error::input(format!("at most {MAX_LEVELS} levels are supported")));
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(Error::input(format!("duplicate level `{l}`")));
            }
        }
        Ok(Self { levels })
    }

    /// Levels named `0, 1, …, q-1`.
    pub fn numbered(q: usize) -> Result<Self> {
        Self::new((0..q).map(|x| x.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.levels
    }

    pub fn name(&self, x: usize) -> &str {
        &self.levels[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == name)
    }

    pub fn full_set(&self) -> LevelSet {
        LevelSet::full(self.len())
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<LevelSet> {
        let mut set = LevelSet::empty();
        for n in names {
            let x = self.index_of(n.as_ref()).ok_or_else(|| Error::UnknownLevel(n.as_ref().to_string()))?;
            set.insert(x);
        }
        Ok(set)
    }

    pub fn names_of(&self, set: LevelSet) -> Vec<String> {
        set.iter().take_while(|&x| x < self.len()).map(|x| self.levels[x].clone()).collect()
    }
}
