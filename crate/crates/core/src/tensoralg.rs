//! Coordinatewise multiplication, the product map `π`, the diagonal projection `P`
//! and the section `a ↦ Σ a_j e_j⊗e_j` on finite tensor truncations.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::order::Order;
use crate::truncation::{coeff_strings, norm, parse_coeff, weighted_power, FinSeq};
use crate::weights::WeightFamily;
use crate::xpos::XPos;
use crate::Coeff;

/// A finitely supported tensor `u = Σ u_ij e_i⊗e_j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TruncTensor {
    entries: BTreeMap<(Index, Index), Coeff>,
}

impl TruncTensor {
    pub fn zero() -> Self {
        TruncTensor::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((Index, Index), Coeff)>) -> Self {
        let mut t = TruncTensor::zero();
        for (k, c) in entries {
            let sum = t.get(&k.0, &k.1) + c;
            t.set(k.0, k.1, sum);
        }
        t
    }

    /// `x⊗y`.
    pub fn rank_one(x: &FinSeq, y: &FinSeq) -> Self {
        let mut t = TruncTensor::zero();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                t.set(i.clone(), j.clone(), a * b);
            }
        }
        t
    }

    pub fn get(&self, i: &Index, j: &Index) -> Coeff {
        self.entries
            .get(&(i.clone(), j.clone()))
            .cloned()
            .unwrap_or_else(Coeff::zero)
    }

    pub fn set(&mut self, i: Index, j: Index, c: Coeff) {
        if c.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Index, Index), &Coeff)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &TruncTensor) -> TruncTensor {
        let mut out = self.clone();
        for ((i, j), c) in other.iter() {
            let sum = out.get(i, j) + c;
            out.set(i.clone(), j.clone(), sum);
        }
        out
    }

    pub fn sub(&self, other: &TruncTensor) -> TruncTensor {
        let neg = TruncTensor::from_entries(other.iter().map(|(k, c)| (k.clone(), -c.clone())));
        self.add(&neg)
    }

    /// All diagonal entries vanish, i.e. `u` lies in the truncation of `ker π`.
    pub fn has_zero_diagonal(&self) -> bool {
        self.entries.keys().all(|(i, j)| i != j)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorRepr {
    entries: Vec<(Index, Index, String, String)>,
}

impl Serialize for TruncTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorRepr {
            entries: self
                .iter()
                .map(|((i, j), c)| {
                    let (re, im) = coeff_strings(c);
                    (i.clone(), j.clone(), re, im)
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TensorRepr::deserialize(d)?;
        let mut out = TruncTensor::zero();
        for (i, j, re, im) in repr.entries {
            if out.entries.contains_key(&(i.clone(), j.clone())) {
                return Err(serde::de::Error::custom(format!("duplicate entry ({i}, {j})")));
            }
            out.set(i, j, parse_coeff(&re, &im)?);
        }
        Ok(out)
    }
}

/// `(xy)_i = x_i y_i`.
pub fn multiply(x: &FinSeq, y: &FinSeq) -> FinSeq {
    FinSeq::from_entries(x.iter().map(|(i, a)| (i.clone(), a * y.get(i))))
}

/// `π(u) = Σ_i u_ii e_i`.
pub fn pi(u: &TruncTensor) -> FinSeq {
    FinSeq::from_entries(
        u.iter()
            .filter(|((i, j), _)| i == j)
            .map(|((i, _), c)| (i.clone(), c.clone())),
    )
}

/// `P(e_i⊗e_j) = δ_ij e_i⊗e_j`.
pub fn diagonal_projection(u: &TruncTensor) -> TruncTensor {
    TruncTensor::from_entries(
        u.iter()
            .filter(|((i, j), _)| i == j)
            .map(|(k, c)| (k.clone(), c.clone())),
    )
}

/// `Σ_j a_j e_j⊗e_j`, a preimage of `a` under `π`.
pub fn section(a: &FinSeq) -> TruncTensor {
    TruncTensor::from_entries(a.iter().map(|(i, c)| ((i.clone(), i.clone()), c.clone())))
}

/// The truncated basis `{e_i⊗e_j : i ≠ j}` of `ker π` over the given indices.
pub fn ker_pi_basis(indices: &[Index]) -> Vec<(Index, Index)> {
    let mut out = Vec::new();
    for i in indices {
        for j in indices {
            if i != j {
                out.push((i.clone(), j.clone()));
            }
        }
    }
    out
}

/// `Σ_ε 2^-J (Σ ε_j x_j e_j)⊗(Σ ε_j y_j e_j)` over all sign patterns `ε ∈ {±1}^J`.
///
/// Terms are produced on demand; pattern `k` has `ε_j = -1` exactly when bit `j` of `k` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub support: Vec<Index>,
    pub x: FinSeq,
    pub y: FinSeq,
}

impl Decomposition {
    /// `J`, the size of the common support.
    pub fn size(&self) -> u32 {
        self.support.len() as u32
    }

    /// Number of terms, `2^J`.
    pub fn len(&self) -> u64 {
        1u64 << self.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The common weight `2^-J` of every term.
    pub fn weight(&self) -> BigRational {
        BigRational::new(1.into(), (num_bigint::BigInt::one() << self.size()).clone())
    }

    fn sign(k: u64, j: usize) -> bool {
        k >> j & 1 == 1
    }

    fn flip(&self, s: &FinSeq, k: u64) -> FinSeq {
        FinSeq::from_entries(self.support.iter().enumerate().map(|(j, i)| {
            let c = s.get(i);
            (i.clone(), if Self::sign(k, j) { -c } else { c })
        }))
    }

    /// Term `k`: its weight and the two sign-flipped factors.
    pub fn term(&self, k: u64) -> (BigRational, FinSeq, FinSeq) {
        (self.weight(), self.flip(&self.x, k), self.flip(&self.y, k))
    }

    pub fn terms(&self) -> impl Iterator<Item = (BigRational, FinSeq, FinSeq)> + '_ {
        (0..self.len()).map(|k| self.term(k))
    }

    /// Exact expansion, through `Σ_ε w (ε∘x)⊗(ε∘y) = (x⊗y) ∘ (Σ_ε w εε^T)` with the
    /// sign sums `Σ_ε ε_a ε_b` accumulated as integers over all `2^J` patterns.
    pub fn expand(&self) -> TruncTensor {
        let n = self.support.len();
        let mut sums = vec![0i64; n * n];
        for k in 0..self.len() {
            for a in 0..n {
                let sa = if Self::sign(k, a) { -1 } else { 1 };
                for b in 0..n {
                    let sb = if Self::sign(k, b) { -1 } else { 1 };
                    sums[a * n + b] += sa * sb;
                }
            }
        }
        let w = self.weight();
        let mut out = TruncTensor::zero();
        for (a, i) in self.support.iter().enumerate() {
            for (b, j) in self.support.iter().enumerate() {
                let s = sums[a * n + b];
                if s != 0 {
                    let c = self.x.get(i) * self.y.get(j);
                    let f = &w * BigRational::from_integer(s.into());
                    out.set(i.clone(), j.clone(), Coeff::new(&c.re * &f, &c.im * &f));
                }
            }
        }
        out
    }

    /// Term-by-term expansion in rational arithmetic.
    pub fn expand_naive(&self) -> TruncTensor {
        let mut out = TruncTensor::zero();
        for (w, a, b) in self.terms() {
            let t = TruncTensor::rank_one(&a, &b);
            out = out.add(&TruncTensor::from_entries(
                t.iter()
                    .map(|(k, c)| (k.clone(), Coeff::new(&c.re * &w, &c.im * &w))),
            ));
        }
        out
    }
}

/// The Rademacher decomposition of `Σ_j x_j y_j e_j⊗e_j`, over the union of both supports.
pub fn rademacher_decomposition(x: &FinSeq, y: &FinSeq, j_max: u32) -> Result<Decomposition> {
    let support: Vec<Index> = x
        .support()
        .chain(y.support())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if support.len() > j_max as usize {
        return Err(Error::ResourceGuard {
            size: support.len(),
            j_max,
        });
    }
    Ok(Decomposition {
        support,
        x: x.clone(),
        y: y.clone(),
    })
}

/// `‖P(x⊗y)‖_π <= ‖x‖_{n,p}·‖y‖_{n,p}`, certified by a decomposition whose
/// terms all have factor norms equal to `‖x‖` and `‖y‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCertificate {
    pub level: u32,
    pub order: Order,
    pub bound: XPos,
    pub x_norm: XPos,
    pub y_norm: XPos,
    pub terms: u64,
    pub weight: String,
    pub decomposition: Decomposition,
}

pub fn projection_norm_certificate(
    f: &WeightFamily,
    n: u32,
    p: Order,
    x: &FinSeq,
    y: &FinSeq,
    j_max: u32,
) -> Result<ProjectionCertificate> {
    let d = rademacher_decomposition(x, y, j_max)?;
    let x_norm = norm(f, n, p, x)?;
    let y_norm = norm(f, n, p, y)?;
    verify_sign_invariance(f, n, p, &d)?;
    if d.expand() != section(&multiply(x, y)) {
        return Err(Error::Eval("Rademacher expansion differs from the diagonal tensor".into()));
    }
    Ok(ProjectionCertificate {
        level: n,
        order: p,
        bound: x_norm.mul(&y_norm),
        x_norm,
        y_norm,
        terms: d.len(),
        weight: crate::xpos::format_rational(&d.weight()),
        decomposition: d,
    })
}

/// Every sign pattern leaves both weighted norms unchanged, recomputed per pattern.
fn verify_sign_invariance(f: &WeightFamily, n: u32, p: Order, d: &Decomposition) -> Result<()> {
    let weights = d
        .support
        .iter()
        .map(|i| f.eval(n, i))
        .collect::<Result<Vec<_>>>()?;
    for s in [&d.x, &d.y] {
        let coeffs: Vec<Coeff> = d.support.iter().map(|i| s.get(i)).collect();
        let base = weighted_power(p, coeffs.iter().zip(&weights))?;
        let mut flipped = coeffs.clone();
        for k in 0..d.len() {
            for (j, c) in coeffs.iter().enumerate() {
                flipped[j] = if Decomposition::sign(k, j) { -c.clone() } else { c.clone() };
            }
            if weighted_power(p, flipped.iter().zip(&weights))? != base {
                return Err(Error::Eval(format!("sign pattern {k} changes a weighted norm")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::truncation::coeff;
    use crate::weights::parse_family;

    fn e(j: u64) -> FinSeq {
        FinSeq::basis(Index::Nat(j))
    }

    fn seq(v: &[(u64, i64)]) -> FinSeq {
        FinSeq::from_entries(v.iter().map(|&(j, c)| (Index::Nat(j), coeff(c, 0))))
    }

    fn nat(i: u64, j: u64) -> (Index, Index) {
        (Index::Nat(i), Index::Nat(j))
    }

    #[test]
    fn multiplication() {
        assert_eq!(multiply(&e(2), &e(2)), e(2));
        assert!(multiply(&e(2), &e(3)).is_zero());
        assert_eq!(multiply(&seq(&[(1, 1), (2, 1)]), &seq(&[(1, 2), (2, 3)])), seq(&[(1, 2), (2, 3)]));
    }

    #[test]
    fn pi_projection_section() {
        assert_eq!(pi(&TruncTensor::rank_one(&e(1), &e(1))), e(1));
        assert!(pi(&TruncTensor::rank_one(&e(1), &e(2))).is_zero());
        let u = TruncTensor::from_entries([(nat(1, 1), coeff(2, 0)), (nat(1, 2), coeff(5, 0))]);
        assert_eq!(pi(&u), seq(&[(1, 2)]));
        assert!(diagonal_projection(&TruncTensor::rank_one(&e(1), &e(2))).is_empty());
        let v = TruncTensor::from_entries([
            (nat(1, 1), coeff(1, 0)),
            (nat(1, 2), coeff(1, 0)),
            (nat(2, 2), coeff(4, 0)),
        ]);
        assert_eq!(
            diagonal_projection(&v),
            TruncTensor::from_entries([(nat(1, 1), coeff(1, 0)), (nat(2, 2), coeff(4, 0))])
        );
        assert_eq!(section(&e(5)), TruncTensor::rank_one(&e(5), &e(5)));
        assert!(section(&FinSeq::zero()).is_empty());
        let a = seq(&[(1, 2), (2, 3)]);
        assert_eq!(pi(&section(&a)), a);
        assert_eq!(ker_pi_basis(&[Index::Nat(1), Index::Nat(2)]), vec![nat(1, 2), nat(2, 1)]);
    }

    #[test]
    fn small_rademacher_cases() {
        let x = seq(&[(1, 3)]);
        let y = seq(&[(1, 5)]);
        let d = rademacher_decomposition(&x, &y, 16).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.expand_naive(), section(&seq(&[(1, 15)])));
        let ones = seq(&[(1, 1), (2, 1)]);
        let d = rademacher_decomposition(&ones, &ones, 16).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.expand(), section(&ones));
        assert_eq!(d.expand_naive(), section(&ones));
        let big = seq(&(1..=17).map(|j| (j, 1)).collect::<Vec<_>>());
        assert!(matches!(
            rademacher_decomposition(&big, &big, 16),
            Err(Error::ResourceGuard { size: 17, j_max: 16 })
        ));
    }

    #[test]
    fn projection_certificates() {
        let f = parse_family("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }").unwrap();
        let c = projection_norm_certificate(&f, 2, Order::Infinity, &e(1), &e(1), 16).unwrap();
        assert_eq!(c.bound, XPos::ratio(1, 9));
        assert_eq!(c.terms, 2);
        let z = projection_norm_certificate(&f, 2, Order::Finite(1), &FinSeq::zero(), &e(1), 16).unwrap();
        assert_eq!(z.bound, XPos::zero());
        let g = parse_family("grid { c(j) = 1/j }").unwrap();
        let x = FinSeq::from_entries([(Index::Pair(1, 1), coeff(1, 0)), (Index::Pair(1, 2), coeff(1, 0))]);
        let c = projection_norm_certificate(&g, 2, Order::Infinity, &x, &x, 16).unwrap();
        assert_eq!(c.bound, XPos::one());
        let c = projection_norm_certificate(&g, 2, Order::Finite(1), &x, &x, 16).unwrap();
        assert_eq!(c.bound, XPos::ratio(25, 16));
    }

    #[test]
    fn tensor_json() {
        let u = TruncTensor::from_entries([(nat(1, 2), Coeff::new(BigRational::new(1.into(), 2.into()), BigRational::from_integer((-3).into())))]);
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(s, r#"{"entries":[[1,2,"1/2","-3"]]}"#);
        assert_eq!(serde_json::from_str::<TruncTensor>(&s).unwrap(), u);
    }

    fn gauss() -> impl Strategy<Value = Coeff> {
        (-9i64..=9, 1i64..=4, -9i64..=9, 1i64..=4).prop_map(|(a, b, c, d)| {
            Coeff::new(BigRational::new(a.into(), b.into()), BigRational::new(c.into(), d.into()))
        })
    }

    fn finseq(max: usize) -> impl Strategy<Value = FinSeq> {
        prop::collection::vec((1u64..10, gauss()), 0..max)
            .prop_map(|v| FinSeq::from_entries(v.into_iter().map(|(j, c)| (Index::Nat(j), c))))
    }

    fn tensor() -> impl Strategy<Value = TruncTensor> {
        prop::collection::vec(((1u64..6, 1u64..6), gauss()), 0..12)
            .prop_map(|v| TruncTensor::from_entries(v.into_iter().map(|((i, j), c)| (nat(i, j), c))))
    }

    proptest! {
        #[test]
        fn projection_laws(u in tensor(), a in finseq(6)) {
            let p = diagonal_projection(&u);
            prop_assert_eq!(diagonal_projection(&p), p.clone());
            prop_assert_eq!(pi(&p), pi(&u));
            prop_assert_eq!(diagonal_projection(&section(&a)), section(&a));
            prop_assert!(u.sub(&p).has_zero_diagonal());
            prop_assert_eq!(pi(&section(&a)), a);
            prop_assert!(section(&pi(&u)).sub(&u).has_zero_diagonal());
        }

        #[test]
        fn multiplication_laws(x in finseq(6), y in finseq(6), z in finseq(6)) {
            prop_assert_eq!(multiply(&x, &y), multiply(&y, &x));
            prop_assert_eq!(multiply(&multiply(&x, &y), &z), multiply(&x, &multiply(&y, &z)));
            prop_assert_eq!(pi(&TruncTensor::rank_one(&x, &y)), multiply(&x, &y));
        }

        #[test]
        fn rademacher_identity(x in finseq(7), y in finseq(7)) {
            let d = rademacher_decomposition(&x, &y, 16).unwrap();
            let target = section(&multiply(&x, &y));
            prop_assert_eq!(d.expand(), target.clone());
            prop_assert_eq!(d.expand_naive(), target);
        }

        #[test]
        fn sign_flips_preserve_norms(x in finseq(6), k in 0u64..64, n in 1u32..5) {
            let f = parse_family("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }").unwrap();
            let d = rademacher_decomposition(&x, &x, 16).unwrap();
            let (_, fx, _) = d.term(k % d.len());
            for p in [Order::Infinity, Order::Finite(1), Order::Finite(2)] {
                prop_assert_eq!(
                    crate::truncation::norm_power(&f, n, p, &fx).unwrap(),
                    crate::truncation::norm_power(&f, n, p, &x).unwrap()
                );
            }
        }
    }
}
