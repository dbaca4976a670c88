//! Finite objects behind the amenability arguments: the cut-off `b^ε`, index
//! sequences along which every weight is large, and the no-split set `R`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::conditions::{check_banach_rows, check_eventually_bounded, check_w3, Leaf, Node};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::limits::Limits;
use crate::order::Order;
use crate::truncation::{abs2, FinSeq};
use crate::verdict::{Certificate, LevelBound};
use crate::weights::predicate::Predicate;
use crate::weights::{Kind, WeightFamily};
use crate::xpos::{Cmp3, XPos};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// A checked inequality `lhs relation rhs`; `exact` when both sides are exact rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: XPos,
    pub rhs: XPos,
    pub relation: Relation,
    pub exact: bool,
}

impl Inequality {
    /// Builds the record, failing unless the relation definitely holds.
    pub fn check(label: impl Into<String>, lhs: XPos, relation: Relation, rhs: XPos) -> Result<Self> {
        let ineq = Inequality {
            label: label.into(),
            exact: lhs.is_exact() && rhs.is_exact() || lhs.is_infinite() || rhs.is_infinite(),
            lhs,
            rhs,
            relation,
        };
        match ineq.holds() {
            Some(true) => Ok(ineq),
            Some(false) => Err(Error::Eval(format!("violated: {}", ineq.describe()))),
            None => Err(Error::Eval(format!("undecided within tolerance: {}", ineq.describe()))),
        }
    }

    /// Re-evaluates the relation from the recorded sides.
    pub fn holds(&self) -> Option<bool> {
        let c = self.lhs.cmp3(&self.rhs);
        if c == Cmp3::Indeterminate {
            return None;
        }
        match self.relation {
            Relation::Lt => c.lt(),
            Relation::Le => c.le(),
            Relation::Ge => c.ge(),
            Relation::Eq => Some(c == Cmp3::Equal),
        }
    }

    pub fn describe(&self) -> String {
        let rel = match self.relation {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        format!("{}: {} {rel} {}", self.label, self.lhs, self.rhs)
    }
}

/// `b^ε`: `a` cut down to the indices where `v_n >= t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub a: FinSeq,
    pub b: FinSeq,
    pub level: u32,
    /// The (W3) level `m` with `v_m <= C v_n^2`.
    pub m: u32,
    pub c: XPos,
    pub eps: XPos,
    pub a_norm: XPos,
    /// `t = ε/(2C‖a‖_{n,∞})`.
    pub threshold: XPos,
    /// `J₂ ∩ supp(a)`: support indices with `v_n < t`.
    pub dropped: Vec<Index>,
    /// `‖b‖_∞·ε <= 2C‖a‖²_{n,∞}` and `‖a - b‖_{m,∞} < ε`, both squared so that
    /// Gaussian-rational data give rational sides.
    pub inequalities: Vec<Inequality>,
    /// `a = 0`, where no threshold is defined and `b = 0`.
    pub trivial: bool,
}

/// `max_i |x_i|^2 v_n(i)^2`, or `max_i |x_i|^2` without a level; exact for exact weights.
fn sup_sq(f: &WeightFamily, n: Option<u32>, x: &FinSeq) -> Result<XPos> {
    let mut acc = XPos::zero();
    for (i, c) in x.iter() {
        let m = XPos::from_rational(abs2(c));
        acc = acc.max(match n {
            Some(n) => m.mul(&f.eval(n, i)?.powi(2)),
            None => m,
        });
    }
    Ok(acc)
}

fn w3_pair(f: &WeightFamily, n: u32, limits: &Limits) -> Result<(u32, XPos)> {
    let lim = Limits {
        levels: limits.levels.max(n),
        ..*limits
    };
    let v = check_w3(f, &lim)?;
    if let Some(Certificate::W3 { witness_map, .. }) = &v.certificate {
        if let Some(t) = witness_map.iter().find(|t| t.n == n) {
            return Ok((t.m, t.bound.clone()));
        }
    }
    Err(Error::NoW3Certificate(n))
}

/// The cut-off approximation of a finitely supported `a` at level `n`.
pub fn approx_binf(f: &WeightFamily, a: &FinSeq, n: u32, eps: &BigRational, limits: &Limits) -> Result<ApproxResult> {
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    a.check_in(f)?;
    let eps_x = XPos::from_rational(eps.clone());
    let eps_sq = eps_x.powi(2);
    let a_sq = sup_sq(f, Some(n), a)?;
    if a_sq.is_infinite() {
        return Err(Error::Precondition(format!("a is not in l_inf(v_{n}): its norm is infinite")));
    }
    let a_norm = a_sq.sqrt();
    let (m, c) = w3_pair(f, n, limits)?;
    if a.is_zero() {
        return Ok(ApproxResult {
            a: a.clone(),
            b: FinSeq::zero(),
            level: n,
            m,
            c,
            eps: eps_x,
            a_norm,
            threshold: XPos::Infinity,
            dropped: Vec::new(),
            inequalities: Vec::new(),
            trivial: true,
        });
    }
    let threshold = eps_x.div(&XPos::int(2).mul(&c).mul(&a_norm));
    // v_n(i) >= t  iff  4 C^2 |a|^2 v_n(i)^2 >= eps^2, all rational
    let scale = XPos::int(4).mul(&c.powi(2)).mul(&a_sq);
    let mut dropped = Vec::new();
    for i in a.support() {
        match scale.mul(&f.eval(n, i)?.powi(2)).cmp3(&eps_sq) {
            Cmp3::Less => dropped.push(i.clone()),
            Cmp3::Indeterminate => {
                return Err(Error::Eval(format!("v_{n}({i}) is too close to the threshold")))
            }
            _ => {}
        }
    }
    let b = a.filter(|i, _| !dropped.contains(i));
    let sup = Inequality::check(
        "sup bound, squared: |b|_inf^2 eps^2 <= 4 C^2 |a|_{n,inf}^4",
        sup_sq(f, None, &b)?.mul(&eps_sq),
        Relation::Le,
        scale.mul(&a_sq),
    )?;
    let tail = Inequality::check(
        format!("tail bound, squared: |a - b|_{{{m},inf}}^2 < eps^2"),
        sup_sq(f, Some(m), &a.sub(&b))?,
        Relation::Lt,
        eps_sq,
    )?;
    Ok(ApproxResult {
        a: a.clone(),
        b,
        level: n,
        m,
        c,
        eps: eps_x,
        a_norm,
        threshold,
        dropped,
        inequalities: vec![sup, tail],
        trivial: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GrowthMode {
    /// `v_k(j_l) >= 1` for `k <= l`; the homomorphism lands in `ℓ_p`.
    GeqOne,
    /// `v_k(j_l) >= 2^l` for `k <= l`; the homomorphism lands in `ℓ_1`.
    GeqPow2,
}

impl GrowthMode {
    pub fn for_order(p: Order) -> Self {
        if p.is_finite() {
            GrowthMode::GeqOne
        } else {
            GrowthMode::GeqPow2
        }
    }

    pub fn threshold(self, l: u32) -> XPos {
        match self {
            GrowthMode::GeqOne => XPos::one(),
            GrowthMode::GeqPow2 => XPos::pow2(l),
        }
    }
}

/// Indices `j_1 < j_2 < …` along which every weight is large, with the
/// continuity constants of `a ↦ (a_{j_l})_l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundedWitness {
    pub order: Order,
    pub mode: GrowthMode,
    pub indices: Vec<Index>,
    /// `C_k` for `k = 1..=L`.
    pub constants: Vec<LevelBound>,
    pub inequalities: Vec<Inequality>,
}

/// `C_k`: `max{1/v_k(j_l)^p : l <= k} + 1` for finite `p`, `Σ_{l<=k} 1/v_k(j_l) + 1` otherwise.
pub fn unbounded_constant(f: &WeightFamily, mode: GrowthMode, p: Order, k: u32, indices: &[Index]) -> Result<XPos> {
    let mut acc = XPos::zero();
    for j in indices.iter().take(k as usize) {
        let inv = f.eval(k, j)?.recip();
        acc = match (mode, p) {
            (GrowthMode::GeqOne, Order::Finite(e)) => acc.max(inv.powi(e)),
            (GrowthMode::GeqOne, _) => acc.max(inv),
            (GrowthMode::GeqPow2, _) => acc.add(&inv),
        };
    }
    Ok(acc.add(&XPos::one()))
}

fn bounded_level(c: &Certificate) -> Option<(u32, XPos)> {
    match c {
        Certificate::Bounded { level, bound } => Some((*level, bound.clone())),
        Certificate::DirectSum { left, right } => {
            let (a, x) = bounded_level(left)?;
            let (b, y) = bounded_level(right)?;
            Some((a.max(b), x.max(y)))
        }
        _ => None,
    }
}

/// Searches `j_1 < … < j_L` with `v_l(j_l)` above the growth threshold.
pub fn unbounded_witness(f: &WeightFamily, p: Order, len: u32, limits: &Limits) -> Result<UnboundedWitness> {
    let bounded = check_eventually_bounded(f, limits)?;
    if bounded.is_holds() {
        let (level, bound) = bounded
            .certificate
            .as_ref()
            .and_then(bounded_level)
            .unwrap_or((1, XPos::Infinity));
        return Err(Error::EventuallyBounded {
            level,
            bound: bound.to_string(),
        });
    }
    let mode = GrowthMode::for_order(p);
    let set = f.index_set();
    let mut indices: Vec<Index> = Vec::new();
    let mut pos = 0u64;
    for l in 1..=len {
        let target = mode.threshold(l);
        loop {
            if pos >= limits.horizon {
                return Err(Error::Precondition(format!(
                    "no index with v_{l} >= {target} among the first {} indices",
                    limits.horizon
                )));
            }
            let Some(i) = set.at(pos) else {
                pos += 1;
                continue;
            };
            pos += 1;
            if f.eval(l, &i)?.cmp3(&target).ge() == Some(true) {
                indices.push(i);
                break;
            }
        }
    }
    let mut inequalities = Vec::new();
    for (l, j) in (1..=len).zip(&indices) {
        for k in 1..=l {
            inequalities.push(Inequality::check(
                format!("v_{k}({j}) >= threshold for l = {l}"),
                f.eval(k, j)?,
                Relation::Ge,
                mode.threshold(l),
            )?);
        }
    }
    let constants = (1..=len)
        .map(|k| {
            Ok(LevelBound {
                level: k,
                bound: unbounded_constant(f, mode, p, k, &indices)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnboundedWitness {
        order: p,
        mode,
        indices,
        constants,
        inequalities,
    })
}

/// `R = {(n, j_n)}` in the complement `T` of `S`, with `v_m(n, j_n) = 1` for `n >= m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoSplitWitness {
    pub s: Predicate,
    pub points: Vec<Index>,
    /// `inf_R v_m/v_1` over the listed prefix, `m = 1..=m_max`.
    pub lower_bounds: Vec<LevelBound>,
    pub inequalities: Vec<Inequality>,
}

/// The Montel obstruction for `k_∞(T, V_T)`, on rows `1..=2·m_max`.
pub fn no_split_witness(f: &WeightFamily, s: &Predicate, m_max: u32, limits: &Limits) -> Result<NoSplitWitness> {
    let banach = check_banach_rows(f, s, limits)?;
    if !banach.is_holds() {
        return Err(Error::Precondition(
            "k_inf(S, V_S) must be a Banach space, i.e. S meets every row in a finite set".into(),
        ));
    }
    let node = Node::of(f).restrict(&Predicate::negate(s.clone()));
    let Node::Leaf(leaf) = node else {
        return Err(Error::Precondition("the no-split witness needs a grid family".into()));
    };
    debug_assert!(matches!(leaf.base.kind, Kind::Grid(_)));
    let rows = 2 * m_max as u64;
    let points = (1..=rows)
        .map(|n| first_in_row(&leaf, n))
        .collect::<Result<Vec<_>>>()?;
    let mut inequalities = Vec::new();
    let mut lower_bounds = Vec::new();
    for m in 1..=m_max {
        let mut lb = XPos::one();
        for p in &points {
            let n = p.row().expect("grid index");
            let vm = f.eval(m, p)?;
            if n >= m as u64 {
                inequalities.push(Inequality::check(format!("v_{m}{p}"), vm.clone(), Relation::Eq, XPos::one())?);
            }
            lb = lb.min(vm.div(&f.eval(1, p)?));
        }
        lower_bounds.push(LevelBound { level: m, bound: lb });
    }
    for p in &points {
        if s.contains(p) {
            return Err(Error::Eval(format!("{p} lies in S")));
        }
    }
    Ok(NoSplitWitness {
        s: s.clone(),
        points,
        lower_bounds,
        inequalities,
    })
}

fn first_in_row(leaf: &Leaf, n: u64) -> Result<Index> {
    leaf.row(n)
        .first_member_from(1)
        .map(|j| Index::Pair(n, j))
        .ok_or_else(|| Error::Precondition(format!("the complement of S misses row {n} entirely")))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::truncation::coeff;
    use crate::weights::parse::parse_predicate;
    use crate::weights::parse_family;

    fn fam(s: &str) -> WeightFamily {
        parse_family(s).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn approx_on_grid() {
        let f = fam("grid { c(j) = 1/j }");
        let a = FinSeq::from_entries([(Index::Pair(1, 1), coeff(1, 0)), (Index::Pair(1, 9), coeff(1, 0))]);
        let r = approx_binf(&f, &a, 2, &q(1, 10), &Limits::default()).unwrap();
        assert_eq!((r.m, r.c.clone()), (4, XPos::one()));
        assert_eq!(r.a_norm, XPos::one());
        assert_eq!(r.threshold, XPos::ratio(1, 20));
        // v_2(1, 9) = 1/81 < 1/20
        assert_eq!(r.dropped, vec![Index::Pair(1, 9)]);
        assert_eq!(r.b, FinSeq::basis(Index::Pair(1, 1)));
        assert!(r.inequalities.iter().all(|i| i.exact && i.holds() == Some(true)));
    }

    #[test]
    fn approx_keeps_everything_when_weights_are_large() {
        let f = fam("constant");
        let a = FinSeq::from_entries([(Index::Nat(1), coeff(2, 0)), (Index::Nat(7), coeff(0, 3))]);
        for eps in [q(1, 1), q(1, 100), q(50, 1)] {
            let r = approx_binf(&f, &a, 1, &eps, &Limits::default()).unwrap();
            if r.threshold.cmp3(&XPos::one()).le() == Some(true) {
                assert_eq!(r.b, a);
                assert!(r.dropped.is_empty());
            }
        }
        let z = approx_binf(&f, &FinSeq::zero(), 1, &q(1, 2), &Limits::default()).unwrap();
        assert!(z.trivial && z.b.is_zero());
        assert!(approx_binf(&f, &a, 1, &q(0, 1), &Limits::default()).is_err());
    }

    #[test]
    fn approx_needs_w3() {
        let f = fam("dual_power_series { R = 1/4; alpha(j) = j; r(n) = 1/4 + 1/n }");
        let a = FinSeq::basis(Index::Nat(1));
        assert!(matches!(
            approx_binf(&f, &a, 1, &q(1, 2), &Limits::new(6, 100)),
            Err(Error::NoW3Certificate(1))
        ));
    }

    #[test]
    fn unbounded_on_identity_weights() {
        let f = fam("table { v(n, j) = j; tail = monotone }");
        let w = unbounded_witness(&f, Order::Infinity, 10, &Limits::default()).unwrap();
        let expect: Vec<Index> = (1..=10).map(|l| Index::Nat(1 << l)).collect();
        assert_eq!(w.indices, expect);
        assert!(w.inequalities.iter().all(|i| i.holds() == Some(true)));
        let w1 = unbounded_witness(&f, Order::Finite(1), 5, &Limits::default()).unwrap();
        assert_eq!(w1.indices, (1..=5).map(Index::Nat).collect::<Vec<_>>());
        // C_k = max_{l <= k} 1/j_l + 1 = 2
        assert!(w1.constants.iter().all(|c| c.bound == XPos::int(2)));
    }

    #[test]
    fn unbounded_on_phi() {
        let f = fam("phi");
        let w = unbounded_witness(&f, Order::Finite(1), 5, &Limits::default()).unwrap();
        assert_eq!(w.indices, (1..=5).map(Index::Nat).collect::<Vec<_>>());
        let w = unbounded_witness(&f, Order::Infinity, 5, &Limits::default()).unwrap();
        assert_eq!(w.indices, (2..=6).map(Index::Nat).collect::<Vec<_>>());
    }

    #[test]
    fn bounded_families_have_no_unbounded_witness() {
        for src in ["restrict(grid { c(j) = 1/j }, row(1))", "constant", "grid"] {
            assert!(matches!(
                unbounded_witness(&fam(src), Order::Finite(1), 5, &Limits::default()),
                Err(Error::EventuallyBounded { .. })
            ));
        }
    }

    #[test]
    fn no_split_cases() {
        let f = fam("grid { c(j) = 1/j }");
        let lim = Limits::default();
        let w = no_split_witness(&f, &Predicate::Empty, 10, &lim).unwrap();
        assert!(w.points.iter().all(|p| p.coordinate() == 1));
        assert!(w.lower_bounds.iter().all(|b| b.bound == XPos::one()));
        let w = no_split_witness(&f, &Predicate::Diagonal, 10, &lim).unwrap();
        assert_eq!(w.points[0], Index::Pair(1, 2));
        assert_eq!(w.points[1], Index::Pair(2, 1));
        let upto = parse_predicate("and(triangular, first(20))").unwrap();
        let w = no_split_witness(&f, &upto, 10, &lim).unwrap();
        for (n, p) in (1..).zip(&w.points) {
            assert_eq!(*p, Index::Pair(n, n + 1));
        }
        assert!(w.inequalities.iter().all(|i| i.relation == Relation::Eq && i.exact));
        assert!(no_split_witness(&f, &parse_predicate("row(1)").unwrap(), 10, &lim).is_err());
        assert!(no_split_witness(&fam("phi"), &Predicate::Empty, 10, &lim).is_err());
    }

    #[test]
    fn witness_json() {
        let f = fam("grid { c(j) = 1/j }");
        let w = no_split_witness(&f, &Predicate::Diagonal, 3, &Limits::default()).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains(r#""relation":"=""#));
        assert_eq!(serde_json::from_str::<NoSplitWitness>(&s).unwrap(), w);
        let u = unbounded_witness(&fam("phi"), Order::Infinity, 3, &Limits::default()).unwrap();
        let s = serde_json::to_string(&u).unwrap();
        assert!(s.contains("GEQ_POW2"));
        assert_eq!(serde_json::from_str::<UnboundedWitness>(&s).unwrap(), u);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn shrinking_eps_grows_support(entries in prop::collection::vec((1u64..8, 1u64..30, -6i64..=6), 1..8)) {
            let f = fam("grid { c(j) = 1/j }");
            let a = FinSeq::from_entries(entries.into_iter().map(|(i, j, c)| (Index::Pair(i, j), coeff(c, 0))));
            let mut prev: Option<FinSeq> = None;
            for k in 0..6 {
                let eps = BigRational::new(1.into(), num_bigint::BigInt::from(1) << (2 * k));
                let r = approx_binf(&f, &a, 2, &eps, &Limits::new(4, 100)).unwrap();
                for i in &r.inequalities {
                    prop_assert_eq!(i.holds(), Some(true));
                }
                if let Some(p) = &prev {
                    prop_assert!(p.support().all(|i| r.b.support().any(|j| j == i)));
                }
                prev = Some(r.b);
            }
        }

        #[test]
        fn unbounded_constants_match_formula(len in 1u32..8, p in 1u32..3) {
            let f = fam("table { v(n, j) = j^2/n; tail = monotone }");
            let w = unbounded_witness(&f, Order::Finite(p), len, &Limits::new(6, 300)).unwrap();
            for c in &w.constants {
                let mut m = XPos::zero();
                for j in w.indices.iter().take(c.level as usize) {
                    m = m.max(f.eval(c.level, j).unwrap().powi(p).recip());
                }
                prop_assert_eq!(c.bound.clone(), m.add(&XPos::one()));
            }
        }
    }
}
