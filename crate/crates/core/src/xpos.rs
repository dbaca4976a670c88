//! Extended nonnegative scalars.
//!
//! Every weight value and every norm in this crate is an [`XPos`]: an exact
//! rational, the symbol `+∞`, or a floating-point approximation that carries
//! its own relative tolerance. Comparisons that involve an approximation are
//! three-valued (see [`Cmp3`]).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default relative tolerance for approximate values.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Exact powers whose bit size would exceed this bound fall back to floats.
const MAX_EXACT_BITS: u64 = 1 << 14;

/// Outcome of comparing two extended scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp3 {
    Less,
    Equal,
    Greater,
    /// The values are within tolerance of each other.
    Indeterminate,
}

impl Cmp3 {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Cmp3::Less,
            Ordering::Equal => Cmp3::Equal,
            Ordering::Greater => Cmp3::Greater,
        }
    }

    /// `Some(true)` if `a <= b` is decided true, `Some(false)` if decided false.
    pub fn le(self) -> Option<bool> {
        match self {
            Cmp3::Less | Cmp3::Equal => Some(true),
            Cmp3::Greater => Some(false),
            Cmp3::Indeterminate => None,
        }
    }

    pub fn lt(self) -> Option<bool> {
        match self {
            Cmp3::Less => Some(true),
            Cmp3::Equal | Cmp3::Greater => Some(false),
            Cmp3::Indeterminate => None,
        }
    }

    pub fn ge(self) -> Option<bool> {
        self.reverse().le()
    }

    pub fn gt(self) -> Option<bool> {
        self.reverse().lt()
    }

    pub fn reverse(self) -> Self {
        match self {
            Cmp3::Less => Cmp3::Greater,
            Cmp3::Greater => Cmp3::Less,
            other => other,
        }
    }
}

/// A nonnegative extended real: exact rational, `+∞`, or an approximation.
///
/// Weights are always strictly positive; the value `0` only shows up as a
/// norm or as a ratio `x/∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum XPos {
    Exact(BigRational),
    Infinity,
    Approx { value: f64, tol: f64 },
}

impl XPos {
    pub fn zero() -> Self {
        XPos::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        XPos::Exact(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        XPos::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        XPos::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// Wraps a rational; panics on negative input.
    pub fn from_rational(r: BigRational) -> Self {
        assert!(!r.is_negative(), "XPos must be nonnegative, got {r}");
        XPos::Exact(r)
    }

    pub fn approx(value: f64, tol: f64) -> Self {
        if value.is_infinite() {
            return XPos::Infinity;
        }
        debug_assert!(value >= 0.0 && !value.is_nan(), "bad approx value {value}");
        XPos::Approx {
            value: value.max(0.0),
            tol,
        }
    }

    pub fn pow2(k: u32) -> Self {
        XPos::Exact(BigRational::from_integer(BigInt::one() << k))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            XPos::Exact(r) => r.is_zero(),
            XPos::Infinity => false,
            XPos::Approx { value, .. } => *value == 0.0,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, XPos::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    /// Exact rationals and `∞` are exact; approximations are not.
    pub fn is_exact(&self) -> bool {
        !matches!(self, XPos::Approx { .. })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            XPos::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn tol(&self) -> f64 {
        match self {
            XPos::Approx { tol, .. } => *tol,
            _ => 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            XPos::Exact(r) => rational_to_f64(r),
            XPos::Infinity => f64::INFINITY,
            XPos::Approx { value, .. } => *value,
        }
    }

    fn joint_tol(&self, other: &XPos) -> f64 {
        self.tol().max(other.tol())
    }

    /// Three-valued comparison.
    pub fn cmp3(&self, other: &XPos) -> Cmp3 {
        match (self, other) {
            (XPos::Exact(a), XPos::Exact(b)) => Cmp3::from_ordering(a.cmp(b)),
            (XPos::Infinity, XPos::Infinity) => Cmp3::Equal,
            (XPos::Infinity, _) => Cmp3::Greater,
            (_, XPos::Infinity) => Cmp3::Less,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let tol = self.joint_tol(other);
                let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                if (a - b).abs() <= tol * scale {
                    Cmp3::Indeterminate
                } else if a < b {
                    Cmp3::Less
                } else {
                    Cmp3::Greater
                }
            }
        }
    }

    /// Larger of two values; on an indeterminate comparison the larger float wins.
    pub fn max(self, other: XPos) -> XPos {
        match self.cmp3(&other) {
            Cmp3::Less => other,
            Cmp3::Indeterminate if other.to_f64() > self.to_f64() => other,
            _ => self,
        }
    }

    pub fn min(self, other: XPos) -> XPos {
        match self.cmp3(&other) {
            Cmp3::Greater => other,
            Cmp3::Indeterminate if other.to_f64() < self.to_f64() => other,
            _ => self,
        }
    }

    /// Product with the convention `0 · ∞ = 0`.
    pub fn mul(&self, other: &XPos) -> XPos {
        if self.is_zero() || other.is_zero() {
            return XPos::zero();
        }
        match (self, other) {
            (XPos::Infinity, _) | (_, XPos::Infinity) => XPos::Infinity,
            (XPos::Exact(a), XPos::Exact(b)) => XPos::Exact(a * b),
            _ => XPos::approx(self.to_f64() * other.to_f64(), self.joint_tol(other)),
        }
    }

    /// Quotient with `∞/∞ = 1`, `x/∞ = 0` for finite `x`, and `x/0 = ∞` for `x > 0`.
    pub fn div(&self, other: &XPos) -> XPos {
        match (self, other) {
            (XPos::Infinity, XPos::Infinity) => XPos::one(),
            (_, XPos::Infinity) => XPos::zero(),
            (XPos::Infinity, _) => XPos::Infinity,
            _ if self.is_zero() => XPos::zero(),
            _ if other.is_zero() => XPos::Infinity,
            (XPos::Exact(a), XPos::Exact(b)) => XPos::Exact(a / b),
            _ => XPos::approx(self.to_f64() / other.to_f64(), self.joint_tol(other)),
        }
    }

    pub fn add(&self, other: &XPos) -> XPos {
        match (self, other) {
            (XPos::Infinity, _) | (_, XPos::Infinity) => XPos::Infinity,
            (XPos::Exact(a), XPos::Exact(b)) => XPos::Exact(a + b),
            _ => XPos::approx(self.to_f64() + other.to_f64(), self.joint_tol(other)),
        }
    }

    /// `self - other`, or `None` when the difference would be negative or undefined.
    pub fn checked_sub(&self, other: &XPos) -> Option<XPos> {
        match (self, other) {
            (XPos::Infinity, XPos::Infinity) => None,
            (XPos::Infinity, _) => Some(XPos::Infinity),
            (_, XPos::Infinity) => None,
            (XPos::Exact(a), XPos::Exact(b)) => {
                let d = a - b;
                (!d.is_negative()).then_some(XPos::Exact(d))
            }
            _ => {
                let d = self.to_f64() - other.to_f64();
                (d >= 0.0).then(|| XPos::approx(d, self.joint_tol(other)))
            }
        }
    }

    pub fn recip(&self) -> XPos {
        XPos::one().div(self)
    }

    pub fn powi(&self, k: u32) -> XPos {
        match self {
            XPos::Exact(r) => pow_rational(r, &BigRational::from_integer(k.into()), DEFAULT_TOL),
            XPos::Infinity if k == 0 => XPos::one(),
            XPos::Infinity => XPos::Infinity,
            XPos::Approx { value, tol } => XPos::approx(value.powi(k as i32), *tol),
        }
    }

    /// `self^e` for a rational exponent; exact whenever the result is rational
    /// and small enough to compute.
    pub fn pow(&self, e: &BigRational) -> XPos {
        match self {
            XPos::Exact(r) => pow_rational(r, e, DEFAULT_TOL),
            XPos::Infinity => match e.cmp(&BigRational::zero()) {
                Ordering::Greater => XPos::Infinity,
                Ordering::Equal => XPos::one(),
                Ordering::Less => XPos::zero(),
            },
            XPos::Approx { value, tol } => {
                XPos::approx(value.powf(rational_to_f64(e)), *tol)
            }
        }
    }

    /// Square root; exact for perfect squares.
    pub fn sqrt(&self) -> XPos {
        self.pow(&BigRational::new(1.into(), 2.into()))
    }
}

impl fmt::Display for XPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XPos::Exact(r) => write!(f, "{}", format_rational(r)),
            XPos::Infinity => write!(f, "inf"),
            XPos::Approx { value, tol } => write!(f, "~{value:?}@{tol:?}"),
        }
    }
}

/// Errors from parsing textual scalars.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scalar {0:?}")]
pub struct ScalarParseError(pub String);

impl FromStr for XPos {
    type Err = ScalarParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "inf" {
            return Ok(XPos::Infinity);
        }
        if let Some(rest) = s.strip_prefix('~') {
            let (v, t) = rest.split_once('@').unwrap_or((rest, "1e-12"));
            let value: f64 = v.parse().map_err(|_| ScalarParseError(s.into()))?;
            let tol: f64 = t.parse().map_err(|_| ScalarParseError(s.into()))?;
            if value.is_nan() || tol.is_nan() || value < 0.0 || tol < 0.0 {
                return Err(ScalarParseError(s.into()));
            }
            return Ok(XPos::approx(value, tol));
        }
        let r = parse_rational(s).ok_or_else(|| ScalarParseError(s.into()))?;
        if r.is_negative() {
            return Err(ScalarParseError(s.into()));
        }
        Ok(XPos::Exact(r))
    }
}

impl Serialize for XPos {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for XPos {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(num, den));
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    let ln = ln_rational(r.abs());
    let v = ln.exp();
    if r.is_negative() {
        -v
    } else {
        v
    }
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(1.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational, robust for very large or small values.
pub fn ln_rational(r: BigRational) -> f64 {
    debug_assert!(r.is_positive());
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

/// `base^e` for `base >= 0` and rational `e`.
///
/// Exact when `e` is an integer (and the result is not astronomically large)
/// or when the required root is rational; otherwise an approximation with
/// relative tolerance `tol`.
pub fn pow_rational(base: &BigRational, e: &BigRational, tol: f64) -> XPos {
    pow_rational_capped(base, e, tol, MAX_EXACT_BITS)
}

/// [`pow_rational`] with an explicit bound on the bit size of exact results.
pub fn pow_rational_capped(base: &BigRational, e: &BigRational, tol: f64, max_bits: u64) -> XPos {
    assert!(!base.is_negative(), "pow_rational on negative base");
    if e.is_zero() {
        return XPos::one();
    }
    if base.is_zero() {
        return if e.is_positive() {
            XPos::zero()
        } else {
            XPos::Infinity
        };
    }
    if base.is_one() {
        return XPos::one();
    }
    let float = || {
        let ln = ln_rational(base.clone()) * rational_to_f64(e);
        XPos::approx(ln.exp(), tol)
    };
    let num_e = e.numer().abs();
    let den_e = e.denom();
    let (Some(k), Some(root)) = (num_e.to_u64(), den_e.to_u32()) else {
        return float();
    };
    let size = base.numer().bits().max(base.denom().bits());
    if size.saturating_mul(k) > max_bits {
        return float();
    }
    let (mut p, mut q) = (base.numer().clone(), base.denom().clone());
    if root > 1 {
        match (exact_root(&p, root), exact_root(&q, root)) {
            (Some(a), Some(b)) => {
                p = a;
                q = b;
            }
            _ => return float(),
        }
    }
    let p = num_traits::pow(p, k as usize);
    let q = num_traits::pow(q, k as usize);
    let r = if e.is_negative() {
        BigRational::new(q, p)
    } else {
        BigRational::new(p, q)
    };
    XPos::Exact(r)
}

/// Exact square root of a nonnegative rational, if it is rational.
pub fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let p = exact_root(r.numer(), 2)?;
    let q = exact_root(r.denom(), 2)?;
    Some(BigRational::new(p, q))
}
