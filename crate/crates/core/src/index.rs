//! Index sets `ℕ`, `ℕ²`, disjoint unions and subsets, with their enumerations.
//!
//! `ℕ²` is enumerated in the square ordering: shell `k = max(i, j)` occupies
//! positions `(k-1)² .. k²`, walking `(1,k), (2,k), …, (k,k)` and then back
//! along `(k,k-1), …, (k,1)`. Disjoint unions interleave their sides.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Roots;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::weights::predicate::Predicate;

/// A single index. All coordinates are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Nat(u64),
    Pair(u64, u64),
    Left(Box<Index>),
    Right(Box<Index>),
}

impl Index {
    pub fn left(i: Index) -> Self {
        Index::Left(Box::new(i))
    }

    pub fn right(i: Index) -> Self {
        Index::Right(Box::new(i))
    }

    /// Position in the canonical enumeration of the index set this index belongs to.
    pub fn position(&self) -> u64 {
        match self {
            Index::Nat(j) => j - 1,
            Index::Pair(i, j) => square_position(*i, *j),
            Index::Left(x) => 2 * x.position(),
            Index::Right(x) => 2 * x.position() + 1,
        }
    }

    /// The last coordinate: `j` for `Nat(j)` and `Pair(_, j)`.
    pub fn coordinate(&self) -> u64 {
        match self {
            Index::Nat(j) | Index::Pair(_, j) => *j,
            Index::Left(x) | Index::Right(x) => x.coordinate(),
        }
    }

    /// The row `i` of a pair index.
    pub fn row(&self) -> Option<u64> {
        match self {
            Index::Pair(i, _) => Some(*i),
            Index::Nat(_) => None,
            Index::Left(x) | Index::Right(x) => x.row(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Index::Nat(_) => 0,
            Index::Pair(..) => 1,
            Index::Left(_) => 2,
            Index::Right(_) => 3,
        }
    }

    fn is_valid(&self) -> bool {
        match self {
            Index::Nat(j) => *j >= 1,
            Index::Pair(i, j) => *i >= 1 && *j >= 1,
            Index::Left(x) | Index::Right(x) => x.is_valid(),
        }
    }
}

/// Position of `(i, j)` in the square ordering (0-based).
pub fn square_position(i: u64, j: u64) -> u64 {
    let k = i.max(j);
    let base = (k - 1) * (k - 1);
    if j == k {
        base + i - 1
    } else {
        base + 2 * k - 1 - j
    }
}

/// Inverse of [`square_position`].
pub fn square_index(p: u64) -> (u64, u64) {
    let k = p.sqrt() + 1;
    let r = p - (k - 1) * (k - 1);
    if r < k {
        (r + 1, k)
    } else {
        (k, 2 * k - 1 - r)
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position()
            .cmp(&other.position())
            .then(self.rank().cmp(&other.rank()))
            .then_with(|| match (self, other) {
                (Index::Left(a), Index::Left(b)) | (Index::Right(a), Index::Right(b)) => a.cmp(b),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Nat(j) => write!(f, "{j}"),
            Index::Pair(i, j) => write!(f, "({i},{j})"),
            Index::Left(x) => write!(f, "L:{x}"),
            Index::Right(x) => write!(f, "R:{x}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Nat(u64),
    Pair(u64, u64),
    Left { left: Box<Index> },
    Right { right: Box<Index> },
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self.clone() {
            Index::Nat(j) => Repr::Nat(j),
            Index::Pair(i, j) => Repr::Pair(i, j),
            Index::Left(x) => Repr::Left { left: x },
            Index::Right(x) => Repr::Right { right: x },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Index {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let idx = match Repr::deserialize(d)? {
            Repr::Nat(j) => Index::Nat(j),
            Repr::Pair(i, j) => Index::Pair(i, j),
            Repr::Left { left } => Index::Left(left),
            Repr::Right { right } => Index::Right(right),
        };
        if !idx.is_valid() {
            return Err(serde::de::Error::custom("index coordinates are 1-based"));
        }
        Ok(idx)
    }
}

/// A countable index set with a fixed enumeration.
#[derive(Clone, Debug, PartialEq)]
pub enum IndexSet {
    Nat,
    NatSquared,
    DisjointUnion(Box<IndexSet>, Box<IndexSet>),
    /// Members of `base` satisfying `predicate`, enumerated in the order of `base`.
    Subset {
        base: Box<IndexSet>,
        predicate: Predicate,
    },
}

impl IndexSet {
    /// The index at an ambient position, ignoring subset filters.
    pub fn ambient_at(&self, pos: u64) -> Index {
        match self {
            IndexSet::Nat => Index::Nat(pos + 1),
            IndexSet::NatSquared => {
                let (i, j) = square_index(pos);
                Index::Pair(i, j)
            }
            IndexSet::DisjointUnion(l, r) => {
                if pos.is_multiple_of(2) {
                    Index::left(l.ambient_at(pos / 2))
                } else {
                    Index::right(r.ambient_at(pos / 2))
                }
            }
            IndexSet::Subset { base, .. } => base.ambient_at(pos),
        }
    }

    /// The member at an ambient position, if that position belongs to the set.
    pub fn at(&self, pos: u64) -> Option<Index> {
        let idx = self.ambient_at(pos);
        self.contains(&idx).then_some(idx)
    }

    pub fn contains(&self, idx: &Index) -> bool {
        match (self, idx) {
            (IndexSet::Nat, Index::Nat(j)) => *j >= 1,
            (IndexSet::NatSquared, Index::Pair(i, j)) => *i >= 1 && *j >= 1,
            (IndexSet::DisjointUnion(l, _), Index::Left(x)) => l.contains(x),
            (IndexSet::DisjointUnion(_, r), Index::Right(x)) => r.contains(x),
            (IndexSet::Subset { base, predicate }, _) => {
                base.contains(idx) && predicate.contains(idx)
            }
            _ => false,
        }
    }

    /// Members among the first `h` ambient positions, in enumeration order.
    pub fn prefix(&self, h: u64) -> Vec<Index> {
        (0..h).filter_map(|p| self.at(p)).collect()
    }

    /// Members of row `L_i` (pairs `(i, j)`) with `j <= h`; empty for non-grid sets.
    pub fn row_prefix(&self, i: u64, h: u64) -> Vec<Index> {
        if !self.is_grid() {
            return Vec::new();
        }
        (1..=h)
            .map(|j| Index::Pair(i, j))
            .filter(|x| self.contains(x))
            .collect()
    }

    /// Whether the ambient set is `ℕ²`.
    pub fn is_grid(&self) -> bool {
        match self {
            IndexSet::NatSquared => true,
            IndexSet::Subset { base, .. } => base.is_grid(),
            _ => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            IndexSet::Nat => "N".into(),
            IndexSet::NatSquared => "N^2".into(),
            IndexSet::DisjointUnion(l, r) => format!("({} + {})", l.describe(), r.describe()),
            IndexSet::Subset { base, predicate } => format!("{{{} | {}}}", base.describe(), predicate),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_ordering_prefix() {
        let got: Vec<_> = (0..9).map(square_index).collect();
        assert_eq!(
            got,
            vec![(1, 1), (1, 2), (2, 2), (2, 1), (1, 3), (2, 3), (3, 3), (3, 2), (3, 1)]
        );
    }

    #[test]
    fn disjoint_union_interleaves() {
        let s = IndexSet::DisjointUnion(Box::new(IndexSet::Nat), Box::new(IndexSet::NatSquared));
        let p = s.prefix(4);
        assert_eq!(
            p,
            vec![
                Index::left(Index::Nat(1)),
                Index::right(Index::Pair(1, 1)),
                Index::left(Index::Nat(2)),
                Index::right(Index::Pair(1, 2)),
            ]
        );
        for (k, x) in p.iter().enumerate() {
            assert_eq!(x.position(), k as u64);
        }
    }

    #[test]
    fn json_forms() {
        let x = Index::right(Index::Pair(2, 3));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"right":[2,3]}"#);
        assert_eq!(serde_json::from_str::<Index>(&s).unwrap(), x);
        assert_eq!(serde_json::to_string(&Index::Nat(4)).unwrap(), "4");
        assert!(serde_json::from_str::<Index>("0").is_err());
    }

    proptest! {
        #[test]
        fn square_ordering_is_a_bijection(p in 0u64..5_000_000) {
            let (i, j) = square_index(p);
            prop_assert_eq!(square_position(i, j), p);
        }

        #[test]
        fn ordering_follows_positions(a in 1u64..200, b in 1u64..200, c in 1u64..200, d in 1u64..200) {
            let x = Index::Pair(a, b);
            let y = Index::Pair(c, d);
            prop_assert_eq!(x.cmp(&y), x.position().cmp(&y.position()));
        }
    }
}
