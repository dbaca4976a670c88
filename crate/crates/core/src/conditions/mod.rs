//! Decision procedures for the weight conditions.
//!
//! Every checker returns a [`Verdict`]: `Holds` with a certificate, `Fails`
//! with a finite witness, or `Unknown` with the searched horizon and a reason.
//! Families are first normalized into direct sums of restricted base kinds;
//! each base kind is decided symbolically where a rule exists.

mod growth;
mod montel;
mod recheck;
mod w3;

pub use montel::{check_banach_rows, check_montel_obstruction};
pub use recheck::recheck;

use crate::error::Result;
use crate::index::{Index, IndexSet};
use crate::limits::Limits;
use crate::order::Order;
use crate::verdict::{Certificate, SumSide, Verdict, Witness};
use crate::weights::predicate::{GridShape, Line, Predicate, RowSet, Side};
use crate::weights::{simplify_and, Kind, WeightFamily};
use crate::xpos::XPos;

pub const CITE_W3: &str =
    "(W3): for every n some m has v_m/v_n^2 bounded; then coordinatewise multiplication is jointly continuous on k_p(V)";
pub const CITE_BOUNDED: &str = "V is eventually bounded: some v_n is bounded on I";
pub const CITE_LP: &str = "V is eventually in l_p: sum_i v_n(i)^p < inf for some n";
pub const CITE_C0: &str = "some v_n lies in c_0(I), so the constant sequence 1 belongs to k_0(V)";
pub const CITE_MONTEL: &str =
    "an infinite R in T with inf_R v_m/v_1 > 0 for every m shows that k_inf(T, V_T) is not Montel";
pub const CITE_BANACH: &str =
    "k_inf(S, V_S) is a Banach space iff S meets every row L_n in a finite set";

/// Largest level or index reached by galloping searches.
pub(crate) const SEARCH_LIMIT: u64 = 1 << 20;

/// Number of indices sampled per level for witnesses.
pub(crate) const SAMPLES: usize = 4;

/// Whether `V` satisfies (W3).
pub fn check_w3(f: &WeightFamily, limits: &Limits) -> Result<Verdict> {
    w3::check(&Node::of(f), limits)
}

/// Whether some `v_n` is bounded.
pub fn check_eventually_bounded(f: &WeightFamily, limits: &Limits) -> Result<Verdict> {
    growth::check(&Node::of(f), Order::Infinity, limits)
}

/// Whether some `v_n` lies in `c_0(I)`.
pub fn check_eventually_c0(f: &WeightFamily, limits: &Limits) -> Result<Verdict> {
    growth::check(&Node::of(f), Order::Zero, limits)
}

/// Whether `V` is eventually in `ℓ_p`; `p = ∞` asks for boundedness and `p = 0` for `c_0`.
pub fn check_eventually_lp(f: &WeightFamily, p: Order, limits: &Limits) -> Result<Verdict> {
    growth::check(&Node::of(f), p, limits)
}

/// A family normalized into direct sums of restricted base kinds.
#[derive(Clone, Debug)]
pub(crate) enum Node<'a> {
    Leaf(Leaf<'a>),
    Sum(Box<Node<'a>>, Box<Node<'a>>),
}

/// A base kind (phi, dual power series, grid or table) restricted to `subset`.
#[derive(Clone, Debug)]
pub(crate) struct Leaf<'a> {
    pub base: &'a WeightFamily,
    pub subset: Predicate,
}

impl<'a> Node<'a> {
    pub fn of(f: &'a WeightFamily) -> Node<'a> {
        match &f.kind {
            Kind::Restriction { base, subset } => Node::of(base).restrict(subset),
            Kind::DirectSum(l, r) => Node::Sum(Box::new(Node::of(l)), Box::new(Node::of(r))),
            _ => Node::Leaf(Leaf {
                base: f,
                subset: Predicate::All,
            }),
        }
    }

    pub fn restrict(self, p: &Predicate) -> Node<'a> {
        match self {
            Node::Leaf(l) => Node::Leaf(Leaf {
                base: l.base,
                subset: simplify_and(l.subset, p.clone()),
            }),
            Node::Sum(a, b) => Node::Sum(
                Box::new(a.restrict(&p.project(Side::Left))),
                Box::new(b.restrict(&p.project(Side::Right))),
            ),
        }
    }
}

impl<'a> Leaf<'a> {
    pub fn is_grid(&self) -> bool {
        matches!(self.base.index_set(), IndexSet::NatSquared)
    }

    pub fn v(&self, n: u32, idx: &Index) -> Result<XPos> {
        self.base.eval(n, idx)
    }

    /// Members of an index set on `ℕ`.
    pub fn nat_set(&self) -> RowSet {
        self.subset.line(Line::Nat)
    }

    pub fn shape(&self) -> GridShape {
        self.subset.grid_shape()
    }

    pub fn row(&self, i: u64) -> RowSet {
        self.subset.line(Line::Row(i))
    }

    /// All members, when the restricted set is finite.
    pub fn finite_members(&self) -> Option<Vec<Index>> {
        if self.is_grid() {
            let shape = self.shape();
            if !shape.is_finite() {
                return None;
            }
            let mut out = Vec::new();
            for i in 1..=shape.explicit.len() as u64 {
                for j in self.row(i).finite_members().unwrap_or_default() {
                    out.push(Index::Pair(i, j));
                }
            }
            out.sort();
            Some(out)
        } else {
            self.nat_set()
                .finite_members()
                .map(|v| v.into_iter().map(Index::Nat).collect())
        }
    }

    /// The first `count` members in enumeration order, scanning at most `h` positions.
    pub fn first_members(&self, count: usize, h: u64) -> Vec<Index> {
        if !self.is_grid() {
            let set = self.nat_set();
            let mut out = Vec::new();
            let mut j = 1;
            while out.len() < count {
                match set.first_member_from(j) {
                    Some(k) => {
                        out.push(Index::Nat(k));
                        j = k + 1;
                    }
                    None => break,
                }
            }
            return out;
        }
        (0..h)
            .map(|p| self.base.index_set().ambient_at(p))
            .filter(|i| self.subset.contains(i))
            .take(count)
            .collect()
    }

    /// Smallest member `j` of `set` (from a galloping sequence of starting points)
    /// with `pred(j)`; linear for `j <= 64`, then doubling.
    pub fn gallop(set: &RowSet, mut pred: impl FnMut(u64) -> Result<bool>) -> Result<Option<u64>> {
        let mut j = 1;
        while j <= 64 {
            match set.first_member_from(j) {
                Some(k) if k <= 64 => {
                    if pred(k)? {
                        return Ok(Some(k));
                    }
                    j = k + 1;
                }
                _ => break,
            }
        }
        let mut start = 128u64;
        while start <= SEARCH_LIMIT * SEARCH_LIMIT {
            if let Some(k) = set.first_member_from(start) {
                if pred(k)? {
                    return Ok(Some(k));
                }
            } else {
                return Ok(None);
            }
            start *= 2;
        }
        Ok(None)
    }
}

/// Smallest `n` in `from..=SEARCH_LIMIT` with `pred(n)`, assuming `pred` is monotone.
pub(crate) fn gallop_levels(
    from: u32,
    mut pred: impl FnMut(u32) -> Result<Option<bool>>,
) -> Result<std::result::Result<u32, crate::verdict::UnknownReason>> {
    use crate::verdict::UnknownReason;
    let mut lo = from;
    let mut step = 1u64;
    let mut hi = from as u64;
    loop {
        if hi > SEARCH_LIMIT {
            return Ok(Err(UnknownReason::Horizon));
        }
        match pred(hi as u32)? {
            Some(true) => break,
            Some(false) => {
                lo = hi as u32 + 1;
                hi += step;
                step *= 2;
            }
            None => return Ok(Err(UnknownReason::Tolerance)),
        }
    }
    let mut hi = hi as u32;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match pred(mid)? {
            Some(true) => hi = mid,
            Some(false) => lo = mid + 1,
            None => return Ok(Err(UnknownReason::Tolerance)),
        }
    }
    Ok(Ok(hi))
}

/// Smallest level `n <= limits.levels` at which every listed index has a finite weight.
pub(crate) fn first_finite_level(
    leaf: &Leaf,
    members: &[Index],
    limits: &Limits,
) -> Result<Option<u32>> {
    for n in 1..=limits.levels {
        let mut all = true;
        for i in members {
            if leaf.v(n, i)?.is_infinite() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `x^e` for an exponent that may be approximate.
pub(crate) fn powx(x: &XPos, e: &XPos) -> XPos {
    match e {
        XPos::Exact(q) => x.pow(q),
        XPos::Infinity => XPos::Infinity,
        XPos::Approx { value, tol } => {
            XPos::approx(x.to_f64().powf(*value), tol.max(x.tol()))
        }
    }
}

/// `x^(-e)`.
pub(crate) fn powx_neg(x: &XPos, e: &XPos) -> XPos {
    powx(x, e).recip()
}

/// Wraps the indices of a certificate into one side of a direct sum.
pub(crate) fn wrap_certificate(c: Certificate, side: SumSide) -> Certificate {
    match c {
        Certificate::MontelObstruction {
            points,
            lower_bounds,
        } => Certificate::MontelObstruction {
            points: points.into_iter().map(|i| side.wrap(i)).collect(),
            lower_bounds,
        },
        other => other,
    }
}

/// Combines the verdicts of two summands: both must hold for `Holds`.
pub(crate) fn both(
    l: Verdict,
    r: Verdict,
    citation: &str,
    limits: &Limits,
    merge: impl FnOnce(Certificate, Certificate) -> Certificate,
) -> Verdict {
    if l.is_fails() {
        return Verdict::fails(l.witness.expect("fails has witness"), citation, limits)
            .on_side(SumSide::Left);
    }
    if r.is_fails() {
        return Verdict::fails(r.witness.expect("fails has witness"), citation, limits)
            .on_side(SumSide::Right);
    }
    if l.is_unknown() {
        return l;
    }
    if r.is_unknown() {
        return r;
    }
    Verdict::holds(
        merge(
            l.certificate.expect("holds has certificate"),
            r.certificate.expect("holds has certificate"),
        ),
        citation,
        limits,
    )
}

/// Combines the verdicts of two summands: one holding side suffices.
pub(crate) fn either(l: Verdict, r: Verdict, citation: &str, limits: &Limits) -> Verdict {
    if l.is_holds() {
        let c = wrap_certificate(l.certificate.expect("holds has certificate"), SumSide::Left);
        return Verdict::holds(c, citation, limits);
    }
    if r.is_holds() {
        let c = wrap_certificate(r.certificate.expect("holds has certificate"), SumSide::Right);
        return Verdict::holds(c, citation, limits);
    }
    if l.is_fails() && r.is_fails() {
        return Verdict::fails(
            Witness::DirectSum {
                left: Box::new(l.witness.expect("fails has witness")),
                right: Box::new(r.witness.expect("fails has witness")),
            },
            citation,
            limits,
        );
    }
    if l.is_unknown() {
        l
    } else {
        r
    }
}

#[cfg(test)]
mod tests;
