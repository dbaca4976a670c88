//! Decidable subsets of index sets.
//!
//! Every predicate is built from atoms whose restriction to a single row of
//! `ℕ²` (or to `ℕ` itself) is eventually periodic with period two. That makes
//! row-wise finiteness and membership questions exactly decidable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::index::Index;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    All,
    Empty,
    /// Pairs `(n, n)`.
    Diagonal,
    /// Pairs `(i, j)` with `j <= i`.
    Triangular,
    /// The row `L_k = {(k, j)}`.
    Row(u64),
    /// Indices whose last coordinate equals `k`.
    Column(u64),
    Even,
    Odd,
    /// Indices whose last coordinate is at most `K`.
    UpTo(u64),
    /// The left side of a disjoint union.
    Left,
    Right,
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

/// Which side of a disjoint union.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The line being sliced: a row of `ℕ²`, or `ℕ` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Line {
    Row(u64),
    Nat,
}

/// An eventually 2-periodic subset of `ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSet {
    /// Membership of `j = 1..=prefix.len()`.
    prefix: Vec<bool>,
    /// Membership of `j > prefix.len()`, indexed by `j % 2`.
    tail: [bool; 2],
}

impl RowSet {
    fn constant(b: bool) -> Self {
        RowSet {
            prefix: Vec::new(),
            tail: [b, b],
        }
    }

    fn up_to(k: u64) -> Self {
        RowSet {
            prefix: vec![true; k as usize],
            tail: [false, false],
        }
    }

    fn single(k: u64) -> Self {
        let mut prefix = vec![false; k as usize];
        if k >= 1 {
            prefix[k as usize - 1] = true;
        }
        RowSet {
            prefix,
            tail: [false, false],
        }
    }

    pub fn contains(&self, j: u64) -> bool {
        if j >= 1 && (j as usize) <= self.prefix.len() {
            self.prefix[j as usize - 1]
        } else {
            self.tail[(j % 2) as usize]
        }
    }

    fn extended(&self, len: usize) -> Vec<bool> {
        (1..=len.max(self.prefix.len()) as u64)
            .map(|j| self.contains(j))
            .collect()
    }

    fn zip(&self, other: &RowSet, f: impl Fn(bool, bool) -> bool) -> RowSet {
        let len = self.prefix.len().max(other.prefix.len());
        let a = self.extended(len);
        let b = other.extended(len);
        RowSet {
            prefix: a.iter().zip(&b).map(|(x, y)| f(*x, *y)).collect(),
            tail: [
                f(self.tail[0], other.tail[0]),
                f(self.tail[1], other.tail[1]),
            ],
        }
    }

    fn complement(&self) -> RowSet {
        RowSet {
            prefix: self.prefix.iter().map(|b| !b).collect(),
            tail: [!self.tail[0], !self.tail[1]],
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.tail[0] && !self.tail[1]
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.prefix.iter().all(|b| !b)
    }

    /// Members `j <= h`.
    pub fn members_up_to(&self, h: u64) -> Vec<u64> {
        (1..=h).filter(|&j| self.contains(j)).collect()
    }

    /// All members of a finite set.
    pub fn finite_members(&self) -> Option<Vec<u64>> {
        self.is_finite()
            .then(|| self.members_up_to(self.prefix.len() as u64))
    }

    /// The smallest `j` not in the set.
    pub fn first_missing(&self) -> Option<u64> {
        let len = self.prefix.len() as u64;
        (1..=len + 2).find(|&j| !self.contains(j))
    }

    /// The smallest member `j >= from`.
    pub fn first_member_from(&self, from: u64) -> Option<u64> {
        let len = self.prefix.len() as u64;
        let end = from.max(len) + 2;
        (from.max(1)..=end).find(|&j| self.contains(j))
    }
}

/// Shape of a predicate over the rows of `ℕ²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridShape {
    /// Rows checked individually, `1..=explicit.len()`.
    pub explicit: Vec<RowSet>,
    /// Representatives for all later rows, by row parity (`generic[i % 2]`).
    pub generic: [RowSet; 2],
}

impl GridShape {
    /// A row with the same emptiness and finiteness as row `i`; its members are
    /// those of row `i` only for explicit rows. Use [`Predicate::line`] for members.
    pub fn row_class(&self, i: u64) -> &RowSet {
        if i >= 1 && (i as usize) <= self.explicit.len() {
            &self.explicit[i as usize - 1]
        } else {
            &self.generic[(i % 2) as usize]
        }
    }

    /// Whether infinitely many rows meet the set.
    pub fn infinitely_many_rows(&self) -> bool {
        self.generic.iter().any(|r| !r.is_empty())
    }

    /// Whether every row meets the set in a finite set.
    pub fn all_rows_finite(&self) -> bool {
        self.explicit.iter().all(RowSet::is_finite) && self.generic.iter().all(RowSet::is_finite)
    }

    /// The first row that meets the set in an infinite set.
    pub fn first_infinite_row(&self) -> Option<u64> {
        if let Some(k) = self.explicit.iter().position(|r| !r.is_finite()) {
            return Some(k as u64 + 1);
        }
        let n = self.explicit.len() as u64;
        (n + 1..=n + 2).find(|&i| !self.row_class(i).is_finite())
    }

    /// Whether the whole set is finite.
    pub fn is_finite(&self) -> bool {
        !self.infinitely_many_rows() && self.explicit.iter().all(RowSet::is_finite)
    }

    /// Rows `>= from` that meet the set, at most `count` of them.
    pub fn rows_meeting_from(&self, from: u64, count: usize) -> Vec<u64> {
        if !self.infinitely_many_rows() {
            return (from..=self.explicit.len() as u64)
                .filter(|&i| !self.row_class(i).is_empty())
                .take(count)
                .collect();
        }
        (from.max(1)..)
            .filter(|&i| !self.row_class(i).is_empty())
            .take(count)
            .collect()
    }
}

impl Predicate {
    pub fn negate(p: Predicate) -> Self {
        Predicate::Not(Box::new(p))
    }

    pub fn and(a: Predicate, b: Predicate) -> Self {
        Predicate::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Predicate, b: Predicate) -> Self {
        Predicate::Or(Box::new(a), Box::new(b))
    }

    pub fn contains(&self, idx: &Index) -> bool {
        match self {
            Predicate::Not(p) => !p.contains(idx),
            Predicate::And(a, b) => a.contains(idx) && b.contains(idx),
            Predicate::Or(a, b) => a.contains(idx) || b.contains(idx),
            Predicate::Left => matches!(idx, Index::Left(_)),
            Predicate::Right => matches!(idx, Index::Right(_)),
            atom => match idx {
                Index::Left(x) | Index::Right(x) => atom.contains(x),
                Index::Nat(j) => atom.atom_line(Line::Nat).contains(*j),
                Index::Pair(i, j) => atom.atom_line(Line::Row(*i)).contains(*j),
            },
        }
    }

    fn atom_line(&self, line: Line) -> RowSet {
        match (self, line) {
            (Predicate::All, _) => RowSet::constant(true),
            (Predicate::Empty, _) => RowSet::constant(false),
            (Predicate::Diagonal, Line::Row(i)) => RowSet::single(i),
            (Predicate::Triangular, Line::Row(i)) => RowSet::up_to(i),
            (Predicate::Row(k), Line::Row(i)) => RowSet::constant(*k == i),
            (Predicate::Diagonal | Predicate::Triangular | Predicate::Row(_), Line::Nat) => {
                RowSet::constant(false)
            }
            (Predicate::Column(k), _) => RowSet::single(*k),
            (Predicate::Even, _) => RowSet {
                prefix: Vec::new(),
                tail: [true, false],
            },
            (Predicate::Odd, _) => RowSet {
                prefix: Vec::new(),
                tail: [false, true],
            },
            (Predicate::UpTo(k), _) => RowSet::up_to(*k),
            (Predicate::Left | Predicate::Right, _) => RowSet::constant(false),
            _ => self.line(line),
        }
    }

    /// The slice of the predicate along a line, for indices not inside a union.
    pub fn line(&self, line: Line) -> RowSet {
        match self {
            Predicate::Not(p) => p.line(line).complement(),
            Predicate::And(a, b) => a.line(line).zip(&b.line(line), |x, y| x && y),
            Predicate::Or(a, b) => a.line(line).zip(&b.line(line), |x, y| x || y),
            atom => atom.atom_line(line),
        }
    }

    /// The largest constant appearing in the predicate.
    pub fn max_constant(&self) -> u64 {
        match self {
            Predicate::Row(k) | Predicate::Column(k) | Predicate::UpTo(k) => *k,
            Predicate::Not(p) => p.max_constant(),
            Predicate::And(a, b) | Predicate::Or(a, b) => a.max_constant().max(b.max_constant()),
            _ => 0,
        }
    }

    /// Row-by-row shape over `ℕ²`.
    pub fn grid_shape(&self) -> GridShape {
        let k = self.max_constant() + 2;
        let (a, b) = (k + 1, k + 2);
        let (even, odd) = if a % 2 == 0 { (a, b) } else { (b, a) };
        GridShape {
            explicit: (1..=k).map(|i| self.line(Line::Row(i))).collect(),
            generic: [self.line(Line::Row(even)), self.line(Line::Row(odd))],
        }
    }

    /// The predicate seen from one side of a disjoint union.
    pub fn project(&self, side: Side) -> Predicate {
        match self {
            Predicate::Left => {
                if side == Side::Left {
                    Predicate::All
                } else {
                    Predicate::Empty
                }
            }
            Predicate::Right => {
                if side == Side::Right {
                    Predicate::All
                } else {
                    Predicate::Empty
                }
            }
            Predicate::Not(p) => Predicate::negate(p.project(side)),
            Predicate::And(a, b) => Predicate::and(a.project(side), b.project(side)),
            Predicate::Or(a, b) => Predicate::or(a.project(side), b.project(side)),
            atom => atom.clone(),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::All => write!(f, "all"),
            Predicate::Empty => write!(f, "none"),
            Predicate::Diagonal => write!(f, "diagonal"),
            Predicate::Triangular => write!(f, "triangular"),
            Predicate::Row(k) => write!(f, "row({k})"),
            Predicate::Column(k) => write!(f, "col({k})"),
            Predicate::Even => write!(f, "even"),
            Predicate::Odd => write!(f, "odd"),
            Predicate::UpTo(k) => write!(f, "first({k})"),
            Predicate::Left => write!(f, "left"),
            Predicate::Right => write!(f, "right"),
            Predicate::Not(p) => write!(f, "not({p})"),
            Predicate::And(a, b) => write!(f, "and({a}, {b})"),
            Predicate::Or(a, b) => write!(f, "or({a}, {b})"),
        }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        super::parse::parse_predicate(s)
    }
}

impl Serialize for Predicate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
