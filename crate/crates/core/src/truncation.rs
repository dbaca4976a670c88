//! Finitely supported elements of `k_p(V)` and their weighted norms.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conditions::{Leaf, Node};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::limits::Limits;
use crate::order::Order;
use crate::weights::{Kind, Tail, WeightFamily};
use crate::xpos::{format_rational, parse_rational, XPos};
use crate::Coeff;

/// A finitely supported sequence with exact Gaussian-rational coefficients.
///
/// Zero coefficients are never stored, so the support is exactly the key set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FinSeq {
    entries: BTreeMap<Index, Coeff>,
}

pub fn coeff(re: i64, im: i64) -> Coeff {
    Coeff::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

pub fn real(q: BigRational) -> Coeff {
    Coeff::new(q, BigRational::zero())
}

/// `|z|^2`.
pub fn abs2(z: &Coeff) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

impl FinSeq {
    pub fn zero() -> Self {
        FinSeq::default()
    }

    /// The unit vector `e_i`.
    pub fn basis(i: Index) -> Self {
        let mut s = FinSeq::zero();
        s.set(i, Coeff::one());
        s
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Index, Coeff)>) -> Self {
        let mut s = FinSeq::zero();
        for (i, c) in entries {
            let sum = s.get(&i) + c;
            s.set(i, sum);
        }
        s
    }

    pub fn set(&mut self, i: Index, c: Coeff) {
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn get(&self, i: &Index) -> Coeff {
        self.entries.get(i).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Index> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &Coeff)> {
        self.entries.iter()
    }

    pub fn add(&self, other: &FinSeq) -> FinSeq {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            let sum = out.get(i) + c;
            out.set(i.clone(), sum);
        }
        out
    }

    pub fn sub(&self, other: &FinSeq) -> FinSeq {
        self.add(&other.scale(&-Coeff::one()))
    }

    pub fn scale(&self, c: &Coeff) -> FinSeq {
        FinSeq::from_entries(self.iter().map(|(i, x)| (i.clone(), x * c)))
    }

    /// Keeps the entries whose index satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Index, &Coeff) -> bool) -> FinSeq {
        FinSeq {
            entries: self
                .entries
                .iter()
                .filter(|(i, c)| keep(i, c))
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    /// Every index of the support belongs to `f`'s index set.
    pub fn check_in(&self, f: &WeightFamily) -> Result<()> {
        for i in self.support() {
            if !f.index_set().contains(i) {
                return Err(Error::NotInIndexSet {
                    index: i.to_string(),
                    set: f.index_set().describe(),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn coeff_strings(c: &Coeff) -> (String, String) {
    (format_rational(&c.re), format_rational(&c.im))
}

pub(crate) fn parse_coeff<E: serde::de::Error>(re: &str, im: &str) -> std::result::Result<Coeff, E> {
    let p = |s: &str| parse_rational(s).ok_or_else(|| E::custom(format!("invalid rational {s:?}")));
    Ok(Coeff::new(p(re)?, p(im)?))
}

impl Serialize for FinSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(Index, String, String)> = self
            .iter()
            .map(|(i, c)| {
                let (re, im) = coeff_strings(c);
                (i.clone(), re, im)
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<(Index, String, String)>::deserialize(d)?;
        let mut out = FinSeq::zero();
        for (i, re, im) in rows {
            if out.entries.contains_key(&i) {
                return Err(serde::de::Error::custom(format!("duplicate index {i}")));
            }
            out.set(i, parse_coeff(&re, &im)?);
        }
        Ok(out)
    }
}

/// `|z|^k`, exact when `k` is even or `|z|` is rational.
fn abs_pow(z: &Coeff, k: u32) -> XPos {
    XPos::from_rational(abs2(z)).pow(&BigRational::new(k.into(), 2.into()))
}

fn sup_order(p: Order) -> Result<Option<u32>> {
    match p {
        Order::Infinity => Ok(None),
        Order::Finite(k) => Ok(Some(k)),
        Order::Zero => Err(Error::InvalidArgument(
            "norms are defined for p in [1, inf]; k_0 carries the sup norm, use p = inf".into(),
        )),
    }
}

/// `Σ |x_i|^p v_n(i)^p` for finite `p`, or `sup |x_i| v_n(i)` for `p = ∞`.
///
/// This is the quantity compared in exact mode; [`norm`] takes its `p`-th root.
pub fn norm_power(f: &WeightFamily, n: u32, p: Order, x: &FinSeq) -> Result<XPos> {
    x.check_in(f)?;
    let weights = x.support().map(|i| f.eval(n, i)).collect::<Result<Vec<_>>>()?;
    weighted_power(p, x.iter().map(|(_, c)| c).zip(&weights))
}

/// [`norm_power`] from coefficients paired with their weights.
pub(crate) fn weighted_power<'a>(
    p: Order,
    terms: impl Iterator<Item = (&'a Coeff, &'a XPos)>,
) -> Result<XPos> {
    let k = sup_order(p)?;
    let mut acc = XPos::zero();
    for (c, v) in terms {
        if c.is_zero() {
            continue;
        }
        if v.is_infinite() {
            return Ok(XPos::Infinity);
        }
        acc = match k {
            None => acc.max(abs_pow(c, 1).mul(v)),
            Some(k) => acc.add(&abs_pow(c, k).mul(&v.powi(k))),
        };
    }
    Ok(acc)
}

/// `‖x‖_{n,p}`; `∞` exactly when the support meets `{v_n = ∞}`.
pub fn norm(f: &WeightFamily, n: u32, p: Order, x: &FinSeq) -> Result<XPos> {
    let s = norm_power(f, n, p, x)?;
    Ok(match p {
        Order::Finite(k) if k > 1 => s.pow(&BigRational::new(1.into(), k.into())),
        _ => s,
    })
}

/// Least level `n <= N` with `‖x‖_{n,p} < ∞`.
pub fn min_level(f: &WeightFamily, p: Order, x: &FinSeq, limits: &Limits) -> Result<Option<u32>> {
    sup_order(p)?;
    x.check_in(f)?;
    'levels: for n in 1..=limits.levels {
        for i in x.support() {
            if f.eval(n, i)?.is_infinite() {
                continue 'levels;
            }
        }
        return Ok(Some(n));
    }
    Ok(None)
}

/// Quality of the inclusion `ℓ_p(v_n) → ℓ_p(v_m)`: `sup v_m/v_n` over the searched indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionBound {
    /// Supremum over indices with `v_n` finite among the first `H` positions.
    pub lower: XPos,
    /// Where the supremum was attained.
    pub argmax: Option<Index>,
    /// Whether `lower` is the supremum over the whole index set.
    pub exact: bool,
}

/// `sup_i v_m(i)/v_n(i)` over the first `h` indices where `v_n` is finite.
pub fn inclusion_bound(f: &WeightFamily, n: u32, m: u32, h: u64) -> Result<InclusionBound> {
    if m <= n {
        return Err(Error::InvalidArgument(format!("inclusion needs m > n, got n = {n}, m = {m}")));
    }
    let mut lower = XPos::zero();
    let mut argmax = None;
    for i in f.index_set().prefix(h) {
        let vn = f.eval(n, &i)?;
        if vn.is_infinite() {
            continue;
        }
        let r = f.eval(m, &i)?.div(&vn);
        if argmax.is_none() || r.cmp3(&lower).gt() == Some(true) {
            lower = r;
            argmax = Some(i);
        }
    }
    // (W2) gives v_m <= v_n, so a ratio of exactly 1 is the supremum
    let exact = lower == XPos::one() || attained(&Node::of(f), h);
    Ok(InclusionBound {
        lower,
        argmax,
        exact,
    })
}

/// Whether the ratio `v_m/v_n` provably takes no new values beyond the horizon.
fn attained(node: &Node, h: u64) -> bool {
    match node {
        Node::Sum(a, b) => attained(a, h.div_ceil(2)) && attained(b, h / 2),
        Node::Leaf(l) => leaf_attained(l, h),
    }
}

fn leaf_attained(l: &Leaf, h: u64) -> bool {
    if let Some(members) = l.finite_members() {
        return members.iter().all(|i| i.position() < h);
    }
    match &l.base.kind {
        // v_n is infinite beyond n, so the finite ratios all sit at j <= n
        Kind::Phi => true,
        // (r_m/r_n)^alpha_j is nonincreasing in j: the first member attains it
        Kind::DualPower(_) => !l.first_members(1, h).is_empty(),
        Kind::Table(t) => matches!(t.tail, Some(Tail::Constant(k)) if k <= h),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::weights::parse_family;

    fn fam(s: &str) -> WeightFamily {
        parse_family(s).unwrap()
    }

    #[test]
    fn phi_norms() {
        let f = fam("phi");
        let e3 = FinSeq::basis(Index::Nat(3));
        assert_eq!(norm(&f, 2, Order::Infinity, &e3).unwrap(), XPos::Infinity);
        assert_eq!(norm(&f, 3, Order::Finite(1), &e3).unwrap(), XPos::one());
        assert_eq!(norm(&f, 1, Order::Finite(2), &FinSeq::zero()).unwrap(), XPos::zero());
        assert!(norm(&f, 1, Order::Zero, &e3).is_err());
    }

    #[test]
    fn gaussian_moduli_are_exact() {
        let f = fam("constant");
        let x = FinSeq::from_entries([(Index::Nat(1), coeff(3, 4)), (Index::Nat(2), coeff(0, -1))]);
        assert_eq!(norm(&f, 1, Order::Infinity, &x).unwrap(), XPos::int(5));
        assert_eq!(norm(&f, 1, Order::Finite(1), &x).unwrap(), XPos::int(6));
        assert_eq!(norm_power(&f, 1, Order::Finite(2), &x).unwrap(), XPos::int(26));
        let y = FinSeq::basis(Index::Nat(1)).add(&FinSeq::from_entries([(Index::Nat(1), coeff(0, 1))]));
        assert!(!norm(&f, 1, Order::Finite(1), &y).unwrap().is_exact());
        assert_eq!(norm_power(&f, 1, Order::Finite(2), &y).unwrap(), XPos::int(2));
    }

    #[test]
    fn levels() {
        let lim = Limits::default();
        let f = fam("phi");
        assert_eq!(min_level(&f, Order::Finite(1), &FinSeq::basis(Index::Nat(3)), &lim).unwrap(), Some(3));
        assert_eq!(min_level(&f, Order::Finite(1), &FinSeq::zero(), &lim).unwrap(), Some(1));
        let g = fam("grid");
        assert_eq!(
            min_level(&g, Order::Infinity, &FinSeq::basis(Index::Pair(5, 2)), &lim).unwrap(),
            Some(1)
        );
        assert!(FinSeq::basis(Index::Nat(1)).check_in(&g).is_err());
    }

    #[test]
    fn inclusion_bounds() {
        let b = inclusion_bound(&fam("phi"), 1, 2, 100).unwrap();
        assert_eq!((b.lower, b.exact), (XPos::one(), true));
        let row = fam("restrict(grid { c(j) = 1/(j+1) }, row(1))");
        let b = inclusion_bound(&row, 2, 3, 1000).unwrap();
        assert_eq!(b.lower, XPos::ratio(1, 2));
        assert_eq!(b.argmax, Some(Index::Pair(1, 1)));
        let c = inclusion_bound(&fam("constant"), 1, 2, 10).unwrap();
        assert_eq!((c.lower, c.exact), (XPos::one(), true));
        let d = inclusion_bound(&fam("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }"), 1, 2, 50).unwrap();
        assert_eq!((d.lower, d.exact), (XPos::ratio(2, 3), true));
        assert!(inclusion_bound(&fam("phi"), 2, 2, 10).is_err());
    }

    #[test]
    fn json_form() {
        let x = FinSeq::from_entries([(Index::Pair(1, 2), coeff(1, -2)), (Index::Nat(4), real(BigRational::new(1.into(), 3.into())))]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"[[[1,2],"1","-2"],[4,"1/3","0"]]"#);
        assert_eq!(serde_json::from_str::<FinSeq>(&s).unwrap(), x);
        assert!(serde_json::from_str::<FinSeq>(r#"[[1,"1","0"],[1,"2","0"]]"#).is_err());
    }

    fn finseq(max_j: u64) -> impl Strategy<Value = FinSeq> {
        prop::collection::vec((1..=max_j, -5i64..=5, -5i64..=5), 0..6).prop_map(|v| {
            FinSeq::from_entries(v.into_iter().map(|(j, a, b)| (Index::Nat(j), coeff(a, b))))
        })
    }

    fn family() -> impl Strategy<Value = WeightFamily> {
        prop_oneof![
            Just(fam("phi")),
            Just(fam("constant")),
            Just(fam("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }")),
            Just(fam("dual_power_series { R = 1; alpha(j) = j; r(n) = 1 + 1/n }")),
            Just(fam("table { v(n, j) = if j > n then j else 1/j }")),
        ]
    }

    fn order() -> impl Strategy<Value = Order> {
        prop_oneof![Just(Order::Infinity), Just(Order::Finite(1)), Just(Order::Finite(2))]
    }

    proptest! {
        #[test]
        fn norm_decreases_in_level(f in family(), p in order(), x in finseq(12), n in 1u32..6) {
            let a = norm_power(&f, n, p, &x).unwrap();
            let b = norm_power(&f, n + 1, p, &x).unwrap();
            prop_assert_ne!(b.cmp3(&a), crate::xpos::Cmp3::Greater);
        }

        #[test]
        fn triangle_and_homogeneity(f in family(), p in order(), x in finseq(8), y in finseq(8), n in 1u32..6, k in 1i64..4) {
            let s = norm(&f, n, p, &x.add(&y)).unwrap();
            let t = norm(&f, n, p, &x).unwrap().add(&norm(&f, n, p, &y).unwrap());
            prop_assert_ne!(s.cmp3(&t), crate::xpos::Cmp3::Greater);
            let scaled = norm(&f, n, p, &x.scale(&coeff(k, 0))).unwrap();
            let expect = XPos::int(k).mul(&norm(&f, n, p, &x).unwrap());
            prop_assert_ne!(scaled.cmp3(&expect), crate::xpos::Cmp3::Greater);
            prop_assert_ne!(scaled.cmp3(&expect), crate::xpos::Cmp3::Less);
        }

        #[test]
        fn infinite_iff_support_meets_infinite_weight(f in family(), p in order(), x in finseq(12), n in 1u32..6) {
            let meets = x.support().any(|i| f.eval(n, i).unwrap().is_infinite());
            prop_assert_eq!(norm(&f, n, p, &x).unwrap().is_infinite(), meets);
        }

        #[test]
        fn min_level_monotone_in_support(f in family(), x in finseq(12), y in finseq(12)) {
            let lim = Limits::new(20, 100);
            let a = min_level(&f, Order::Infinity, &x, &lim).unwrap();
            let union = FinSeq::from_entries(x.iter().chain(y.iter()).map(|(i, _)| (i.clone(), Coeff::one())));
            let b = min_level(&f, Order::Infinity, &union, &lim).unwrap();
            prop_assert!(b.unwrap_or(u32::MAX) >= a.unwrap_or(u32::MAX));
        }
    }
}
