//! Isomorphism types of finite abelian p-groups.
//!
//! A finite abelian p-group is, up to isomorphism, a direct sum
//! `Z/p^{l_1} + ... + Z/p^{l_r}` with `l_1 >= l_2 >= ... >= l_r > 0`.
//! The partition `(l_1, ..., l_r)` is the *type* of the group; the prime
//! itself is carried separately by the operations that need it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::Visitor;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Partition indexing the isomorphism type of a finite abelian p-group.
///
/// Parts are stored weakly decreasing.  The trivial group is the empty
/// partition.  The textual form is a bracketed list: `[3,1,1]`, `[]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GroupType {
    parts: Vec<u32>,
}

impl GroupType {
    /// Builds a type from weakly decreasing positive parts.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&x| x == 0) {
            return Err(Error::InvalidParameter("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "partition parts must be weakly decreasing".into(),
            ));
        }
        Ok(GroupType { parts })
    }

    /// Builds a type from arbitrary exponents, dropping zeros and sorting.
    pub fn from_unsorted(parts: impl IntoIterator<Item = u32>) -> Self {
        let mut parts: Vec<u32> = parts.into_iter().filter(|&x| x > 0).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        GroupType { parts }
    }

    /// The trivial group `[]`.
    pub fn trivial() -> Self {
        GroupType { parts: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of parts, i.e. the minimal number of generators.
    pub fn rank(&self) -> usize {
        self.parts.len()
    }

    /// Sum of parts; the group order is `p^weight`.
    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&x| u64::from(x)).sum()
    }

    /// Largest part, so the group exponent is `p^exponent`.  Zero for `[]`.
    pub fn exponent(&self) -> u32 {
        self.parts.first().copied().unwrap_or(0)
    }

    /// Rank of `p^{k-1} G`, i.e. the number of parts `>= k`.  `power_rank(1)`
    /// is the p-rank, `power_rank(2)` the p^2-rank.
    pub fn power_rank(&self, k: u32) -> usize {
        if k == 0 {
            return self.rank();
        }
        self.parts.iter().take_while(|&&x| x >= k).count()
    }

    /// Conjugate partition.  Its j-th part is the number of parts `>= j`.
    pub fn conjugate(&self) -> GroupType {
        let max = self.exponent();
        let parts = (1..=max).map(|j| self.power_rank(j) as u32).collect();
        GroupType { parts }
    }

    /// Multiplicity of each distinct part, largest part first.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &x in &self.parts {
            match out.last_mut() {
                Some((val, mult)) if *val == x => *mult += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }
}

/// Orders by weight, then within a weight so that `[w]` comes first and
/// `[1,...,1]` last.  The first few types are `[] [1] [2] [1,1] [3] [2,1]
/// [1,1,1] ...`, matching `enumerate_types`.
impl Ord for GroupType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| other.parts.cmp(&self.parts))
    }
}

impl PartialOrd for GroupType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for GroupType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Malformed(format!("group type must be bracketed: {s:?}")))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(GroupType::trivial());
        }
        let parts = inner
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Malformed(format!("bad partition part {tok:?} in {s:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        GroupType::new(parts).map_err(|_| {
            Error::Malformed(format!("parts must be positive and weakly decreasing: {s:?}"))
        })
    }
}

impl Serialize for GroupType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct GroupTypeVisitor;

impl Visitor<'_> for GroupTypeVisitor {
    type Value = GroupType;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a partition string like \"[2,1]\"")
    }

    fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<GroupType, E> {
        v.parse().map_err(|e| E::custom(format!("{e}")))
    }
}

impl<'de> Deserialize<'de> for GroupType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_str(GroupTypeVisitor)
    }
}

/// All types of weight at most `max_weight`, in the `Ord` order.
pub fn enumerate_types(max_weight: u32) -> Vec<GroupType> {
    let mut out = vec![GroupType::trivial()];
    for w in 1..=max_weight {
        let mut buf = Vec::new();
        partitions_into(w, w, &mut Vec::new(), &mut buf);
        out.extend(buf);
    }
    out
}

/// Appends all partitions of `w` with parts at most `max`, first part
/// largest, to `out` in lexicographically decreasing order.
fn partitions_into(w: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<GroupType>) {
    if w == 0 {
        out.push(GroupType { parts: prefix.clone() });
        return;
    }
    for first in (1..=max.min(w)).rev() {
        prefix.push(first);
        partitions_into(w - first, first, prefix, out);
        prefix.pop();
    }
}
