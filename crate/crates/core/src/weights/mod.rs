//! Weight families `V = (v_n)` on countable index sets.

pub mod expr;
pub mod parse;
pub mod predicate;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::index::{Index, IndexSet};
use crate::limits::Limits;
use crate::xpos::{ln_rational, pow_rational, rational_to_f64, Cmp3, XPos};
use expr::{Expr, Shape, Val};
use parse::{syntax, Binding, BindingValue, Decl, SpecNode};
use predicate::Predicate;

/// Indices examined when validating monotonicity of symbolic sequences.
const SYMBOLIC_PREFIX: u64 = 1000;

/// Table entries are explicit per index, so validation samples a shorter prefix.
const TABLE_PREFIX: u64 = 256;

/// The sequence `r_n` of a dual power series family, given directly or by its logarithm.
#[derive(Clone, Debug, PartialEq)]
pub enum RSeq {
    Ratio(Expr),
    Log(Expr),
}

/// `v_n(j) = r_n^{α_j}` with `r_n` strictly decreasing to `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPower {
    pub limit: BigRational,
    pub alpha: Expr,
    pub alpha_shape: Shape,
    pub r: RSeq,
}

/// `v_n(i, j) = c_j^n` for `i < n` and `1` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub c: Expr,
    pub c_shape: Shape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// `v_n(j) = v_n(K)` for `j >= K`.
    Constant(u64),
    /// `v_n(j+1)/v_n(j)` is nonincreasing in `j`.
    Monotone,
}

/// Explicit weights `v(n, j)` on `ℕ` or `v(n, i, j)` on `ℕ²`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub arity: u8,
    pub v: Expr,
    pub tail: Option<Tail>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Phi,
    DualPower(DualPower),
    Grid(Grid),
    Table(Table),
    Restriction {
        base: Box<WeightFamily>,
        subset: Predicate,
    },
    DirectSum(Box<WeightFamily>, Box<WeightFamily>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFamily {
    pub label: String,
    pub kind: Kind,
    index_set: IndexSet,
    tol: f64,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl DualPower {
    pub fn r_value(&self, n: u32) -> Result<Val> {
        match &self.r {
            RSeq::Ratio(e) => e.eval_with(&[("n", n as u64)]),
            RSeq::Log(e) => Ok(match e.eval_with(&[("n", n as u64)])? {
                Val::Q(q) if q.is_zero() => Val::Q(BigRational::one()),
                v => Val::F(v.to_f64().exp()),
            }),
        }
    }

    /// `log r_n`.
    pub fn log_r(&self, n: u32) -> Result<Val> {
        match &self.r {
            RSeq::Log(e) => e.eval_with(&[("n", n as u64)]),
            RSeq::Ratio(e) => Ok(match e.eval_with(&[("n", n as u64)])? {
                Val::Q(q) if q.is_one() => Val::Q(BigRational::zero()),
                Val::Q(q) if q.is_positive() => Val::F(ln_rational(q)),
                v => Val::F(v.to_f64().ln()),
            }),
        }
    }

    /// Three-valued `r_m <= r_n^2`.
    pub fn r_le_square(&self, m: u32, n: u32) -> Result<Option<bool>> {
        match &self.r {
            RSeq::Ratio(_) => {
                let (a, b) = (self.r_value(m)?, self.r_value(n)?);
                Ok(match (a, b) {
                    (Val::Q(a), Val::Q(b)) => Some(a <= &b * &b),
                    (a, b) => float_le(a.to_f64(), b.to_f64() * b.to_f64()),
                })
            }
            RSeq::Log(_) => {
                let (a, b) = (self.log_r(m)?, self.log_r(n)?);
                Ok(match (a, b) {
                    (Val::Q(a), Val::Q(b)) => Some(a <= &b * rat(2)),
                    (a, b) => float_le(a.to_f64(), 2.0 * b.to_f64()),
                })
            }
        }
    }

    /// Three-valued comparison of `r_n` with a positive rational.
    pub fn r_cmp(&self, n: u32, x: &BigRational) -> Result<Cmp3> {
        match (&self.r, self.r_value(n)?) {
            (RSeq::Ratio(_), Val::Q(r)) => Ok(Cmp3::from_ordering(r.cmp(x))),
            (RSeq::Log(_), _) => {
                if x.is_one() {
                    if let Val::Q(l) = self.log_r(n)? {
                        return Ok(Cmp3::from_ordering(l.cmp(&BigRational::zero())));
                    }
                }
                let l = self.log_r(n)?.to_f64();
                Ok(float_cmp(l, ln_rational(x.clone())))
            }
            (_, v) => Ok(float_cmp(v.to_f64(), rational_to_f64(x))),
        }
    }

    pub fn eval(&self, n: u32, j: u64, tol: f64) -> Result<XPos> {
        let a = self.alpha.eval_with(&[("j", j)])?;
        if a.is_zero() {
            return Ok(XPos::one());
        }
        match &self.r {
            RSeq::Ratio(e) => match (e.eval_with(&[("n", n as u64)])?, &a) {
                (Val::Q(r), Val::Q(a)) => Ok(pow_rational(&r, a, tol)),
                (r, a) => Ok(approx_exp(a.to_f64() * r.to_f64().ln(), tol)),
            },
            RSeq::Log(e) => {
                let lam = e.eval_with(&[("n", n as u64)])?;
                if let (Shape::Log { coef, shift }, Val::Q(l)) = (&self.alpha_shape, &lam) {
                    if shift.is_zero() {
                        return Ok(pow_rational(&rat(j as i64), &(coef * l), tol));
                    }
                }
                if lam.is_zero() {
                    return Ok(XPos::one());
                }
                Ok(approx_exp(lam.to_f64() * a.to_f64(), tol))
            }
        }
    }
}

fn approx_exp(x: f64, tol: f64) -> XPos {
    let v = x.exp();
    if v.is_finite() {
        XPos::approx(v, tol)
    } else {
        XPos::approx(f64::MAX, 1.0)
    }
}

fn float_le(a: f64, b: f64) -> Option<bool> {
    float_cmp(a, b).le()
}

fn float_cmp(a: f64, b: f64) -> Cmp3 {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    if (a - b).abs() <= crate::xpos::DEFAULT_TOL * scale {
        Cmp3::Indeterminate
    } else if a < b {
        Cmp3::Less
    } else {
        Cmp3::Greater
    }
}

impl Grid {
    pub fn c_value(&self, j: u64) -> Result<Val> {
        self.c.eval_with(&[("j", j)])
    }

    pub fn eval(&self, n: u32, i: u64, j: u64, tol: f64) -> Result<XPos> {
        if i >= n as u64 {
            return Ok(XPos::one());
        }
        Ok(match self.c_value(j)? {
            Val::Q(c) => pow_rational(&c, &rat(n as i64), tol),
            v => XPos::approx(v.to_f64().powi(n as i32), tol),
        })
    }
}

impl Table {
    fn raw(&self, n: u32, idx: &Index) -> Result<Val> {
        match (self.arity, idx) {
            (1, Index::Nat(j)) => {
                let j = match self.tail {
                    Some(Tail::Constant(k)) if *j > k => k,
                    _ => *j,
                };
                self.v.eval_with(&[("n", n as u64), ("j", j)])
            }
            (2, Index::Pair(i, j)) => self.v.eval_with(&[("n", n as u64), ("i", *i), ("j", *j)]),
            _ => Err(Error::Eval(format!("index {idx} does not match the table arity"))),
        }
    }

    pub fn eval(&self, n: u32, idx: &Index, tol: f64) -> Result<XPos> {
        let v = self.raw(n, idx)?;
        if v.cmp_val(&Val::int(0)) != std::cmp::Ordering::Greater {
            return Err(Error::NonPositive {
                level: n,
                index: idx.to_string(),
                value: v.to_string(),
            });
        }
        v.to_xpos(tol)
    }

    /// Indices covered by the explicit data up to horizon `h`.
    pub fn data_prefix(&self, h: u64) -> Vec<Index> {
        match (self.arity, self.tail) {
            (1, Some(Tail::Constant(k))) => (1..=k.min(h)).map(Index::Nat).collect(),
            (1, _) => (1..=h).map(Index::Nat).collect(),
            _ => IndexSet::NatSquared.prefix(h),
        }
    }
}

impl WeightFamily {
    pub fn phi() -> Self {
        WeightFamily {
            label: "phi".into(),
            kind: Kind::Phi,
            index_set: IndexSet::Nat,
            tol: crate::xpos::DEFAULT_TOL,
        }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `v_n(i)`.
    pub fn eval(&self, n: u32, idx: &Index) -> Result<XPos> {
        if n == 0 {
            return Err(Error::InvalidArgument("levels are numbered from 1".into()));
        }
        let not_in = || Error::NotInIndexSet {
            index: idx.to_string(),
            set: self.index_set.describe(),
        };
        match (&self.kind, idx) {
            (Kind::Phi, Index::Nat(j)) if *j >= 1 => Ok(if *j <= n as u64 {
                XPos::one()
            } else {
                XPos::Infinity
            }),
            (Kind::DualPower(d), Index::Nat(j)) if *j >= 1 => d.eval(n, *j, self.tol),
            (Kind::Grid(g), Index::Pair(i, j)) if *i >= 1 && *j >= 1 => g.eval(n, *i, *j, self.tol),
            (Kind::Table(t), _) if self.index_set.contains(idx) => t.eval(n, idx, self.tol),
            (Kind::Restriction { base, subset }, _) => {
                if subset.contains(idx) {
                    base.eval(n, idx)
                } else {
                    Err(not_in())
                }
            }
            (Kind::DirectSum(l, _), Index::Left(x)) => l.eval(n, x),
            (Kind::DirectSum(_, r), Index::Right(x)) => r.eval(n, x),
            _ => Err(not_in()),
        }
    }

    /// Restriction `V_S` to the indices satisfying `subset`.
    pub fn restrict(self, subset: Predicate) -> WeightFamily {
        if subset == Predicate::All {
            return self;
        }
        let label = format!("restrict({}, {})", self.label, subset);
        let tol = self.tol;
        let index_set = IndexSet::Subset {
            base: Box::new(self.index_set.clone()),
            predicate: subset.clone(),
        };
        WeightFamily {
            label,
            kind: Kind::Restriction {
                base: Box::new(self),
                subset,
            },
            index_set,
            tol,
        }
    }

    /// The family `u_n` on the disjoint union of the two index sets.
    pub fn direct_sum(left: WeightFamily, right: WeightFamily) -> WeightFamily {
        WeightFamily {
            label: format!("dsum({}, {})", left.label, right.label),
            index_set: IndexSet::DisjointUnion(
                Box::new(left.index_set.clone()),
                Box::new(right.index_set.clone()),
            ),
            tol: left.tol.max(right.tol),
            kind: Kind::DirectSum(Box::new(left), Box::new(right)),
        }
    }

    /// Name of the family kind.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::Phi => "phi",
            Kind::DualPower(_) => "dual_power_series",
            Kind::Grid(_) => "grid",
            Kind::Table(_) => "table",
            Kind::Restriction { .. } => "restriction",
            Kind::DirectSum(..) => "direct_sum",
        }
    }

    /// The grid family underneath restrictions, with the accumulated subset.
    pub fn grid_base(&self) -> Option<(&Grid, Predicate)> {
        match &self.kind {
            Kind::Grid(g) => Some((g, Predicate::All)),
            Kind::Restriction { base, subset } => base
                .grid_base()
                .map(|(g, p)| (g, simplify_and(p, subset.clone()))),
            _ => None,
        }
    }

    fn validate(&self, limits: &Limits) -> Result<()> {
        match &self.kind {
            Kind::Phi | Kind::Restriction { .. } | Kind::DirectSum(..) => Ok(()),
            Kind::DualPower(d) => validate_dual_power(d, limits),
            Kind::Grid(g) => validate_grid(g, limits),
            Kind::Table(t) => validate_table(self, t, limits),
        }
    }
}

pub(crate) fn simplify_and(a: Predicate, b: Predicate) -> Predicate {
    match (a, b) {
        (Predicate::All, p) | (p, Predicate::All) => p,
        (a, b) => Predicate::and(a, b),
    }
}

fn validate_dual_power(d: &DualPower, limits: &Limits) -> Result<()> {
    if d.limit.is_negative() {
        return Err(Error::InvalidFamily("R must be nonnegative".into()));
    }
    let levels = limits.levels + 1;
    for n in 1..=levels {
        let above = if d.limit.is_zero() {
            match (&d.r, d.r_value(n)?) {
                (RSeq::Log(_), _) => Cmp3::Greater,
                (_, v) => Cmp3::from_ordering(v.cmp_val(&Val::int(0))),
            }
        } else {
            d.r_cmp(n, &d.limit)?
        };
        if above.gt() != Some(true) {
            return Err(Error::InvalidFamily(format!(
                "r_{n} must exceed R = {}",
                crate::xpos::format_rational(&d.limit)
            )));
        }
        if n < levels {
            let decreasing = match (d.log_r(n + 1)?, d.log_r(n)?) {
                (Val::Q(a), Val::Q(b)) => a < b,
                (a, b) => match (d.r_value(n + 1)?, d.r_value(n)?) {
                    (Val::Q(x), Val::Q(y)) => x < y,
                    _ => a.to_f64() < b.to_f64(),
                },
            };
            if !decreasing {
                return Err(Error::InvalidFamily(format!(
                    "r_n must be strictly decreasing (fails at n = {n})"
                )));
            }
        }
    }
    let mut prev: Option<Val> = None;
    for j in 1..=limits.horizon.min(SYMBOLIC_PREFIX) {
        let a = d.alpha.eval_with(&[("j", j)])?;
        if a.cmp_val(&Val::int(0)) == std::cmp::Ordering::Less {
            return Err(Error::InvalidFamily(format!("alpha_{j} must be nonnegative")));
        }
        if let Some(p) = &prev {
            if a.cmp_val(p) == std::cmp::Ordering::Less {
                return Err(Error::InvalidFamily(format!(
                    "alpha must be nondecreasing (fails at j = {j})"
                )));
            }
        }
        prev = Some(a);
    }
    Ok(())
}

fn validate_grid(g: &Grid, limits: &Limits) -> Result<()> {
    for j in 1..=limits.horizon.min(SYMBOLIC_PREFIX) {
        let c = g.c_value(j)?;
        if c.cmp_val(&Val::int(0)) != std::cmp::Ordering::Greater
            || c.cmp_val(&Val::int(1)) == std::cmp::Ordering::Greater
        {
            return Err(Error::InvalidFamily(format!("c_{j} = {c} is not in (0, 1]")));
        }
    }
    if g.c_shape.tends_to_zero() == Some(false) {
        return Err(Error::InvalidFamily("c_j must tend to 0".into()));
    }
    Ok(())
}

fn validate_table(f: &WeightFamily, t: &Table, limits: &Limits) -> Result<()> {
    let prefix = t.data_prefix(limits.horizon.min(TABLE_PREFIX));
    let levels = limits.levels;
    let mut rows: Vec<Vec<XPos>> = Vec::with_capacity(levels as usize);
    for n in 1..=levels {
        rows.push(
            prefix
                .iter()
                .map(|i| t.eval(n, i, f.tol))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    for (k, idx) in prefix.iter().enumerate() {
        for n in 1..levels as usize {
            if rows[n][k].cmp3(&rows[n - 1][k]) == Cmp3::Greater {
                return Err(Error::W2 {
                    level: n as u32,
                    index: idx.to_string(),
                });
            }
        }
        if rows.iter().all(|r| r[k].is_infinite()) {
            return Err(Error::W1 {
                index: idx.to_string(),
                levels,
            });
        }
    }
    if t.tail == Some(Tail::Monotone) {
        for (n, row) in rows.iter().enumerate() {
            let mut seen_finite = false;
            let mut last_ratio: Option<XPos> = None;
            for k in 0..row.len() {
                if row[k].is_finite() {
                    seen_finite = true;
                } else if seen_finite {
                    return Err(Error::InvalidFamily(format!(
                        "monotone tail: v_{}({}) is infinite after a finite value",
                        n + 1,
                        k + 1
                    )));
                }
                if k + 1 < row.len() && row[k].is_finite() && row[k + 1].is_finite() {
                    let ratio = row[k + 1].div(&row[k]);
                    if let Some(prev) = &last_ratio {
                        if ratio.cmp3(prev) == Cmp3::Greater {
                            return Err(Error::InvalidFamily(format!(
                                "monotone tail: ratio v_{n1}({j2})/v_{n1}({j1}) increases",
                                n1 = n + 1,
                                j1 = k + 1,
                                j2 = k + 2
                            )));
                        }
                    }
                    last_ratio = Some(ratio);
                }
            }
        }
    }
    Ok(())
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Parses a file of family declarations, validating each with default limits.
pub fn parse_file(src: &str) -> Result<Vec<WeightFamily>> {
    parse_file_with(src, &Limits::default())
}

/// Parses a file of family declarations, validating up to the given limits.
pub fn parse_file_with(src: &str, limits: &Limits) -> Result<Vec<WeightFamily>> {
    parse::parse_decls(src)?
        .iter()
        .map(|d| build_decl(src, d, limits))
        .collect()
}

/// Parses a single family; the leading `family` keyword is optional.
pub fn parse_family(src: &str) -> Result<WeightFamily> {
    parse_family_with(src, &Limits::default())
}

pub fn parse_family_with(src: &str, limits: &Limits) -> Result<WeightFamily> {
    let text = if src.trim_start().starts_with("family") {
        src.to_string()
    } else {
        format!("family {src}")
    };
    let mut all = parse_file_with(&text, limits)?;
    if all.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected exactly one family, found {}",
            all.len()
        )));
    }
    Ok(all.remove(0))
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn build_decl(src: &str, decl: &Decl, limits: &Limits) -> Result<WeightFamily> {
    let fam = build(src, &decl.spec, limits)?;
    Ok(match &decl.label {
        Some(l) => fam.with_label(l.clone()),
        None => fam,
    })
}

fn spec_span(node: &SpecNode) -> (usize, usize) {
    match node {
        SpecNode::Kind { span, .. } | SpecNode::Restrict { span, .. } | SpecNode::DSum { span, .. } => *span,
    }
}

fn build(src: &str, node: &SpecNode, limits: &Limits) -> Result<WeightFamily> {
    let label = collapse(&src[spec_span(node).0..spec_span(node).1]);
    match node {
        SpecNode::Restrict { base, predicate, .. } => {
            let b = build(src, base, limits)?;
            Ok(b.restrict(predicate.clone()).with_label(label))
        }
        SpecNode::DSum { left, right, .. } => {
            let l = build(src, left, limits)?;
            let r = build(src, right, limits)?;
            Ok(WeightFamily::direct_sum(l, r).with_label(label))
        }
        SpecNode::Kind { name, bindings, span } => {
            let b = Bindings::new(src, bindings)?;
            let tol = limits.tol;
            let (kind, index_set) = match name.as_str() {
                "phi" => {
                    b.allow(&[])?;
                    (Kind::Phi, IndexSet::Nat)
                }
                "constant" => {
                    b.allow(&["value"])?;
                    let v = b.expr("value", &[])?.unwrap_or_else(|| Expr::num(BigRational::one()));
                    (
                        Kind::Table(Table {
                            arity: 1,
                            v,
                            tail: Some(Tail::Constant(1)),
                        }),
                        IndexSet::Nat,
                    )
                }
                "dual_power_series" | "dual_power" => {
                    b.allow(&["R", "alpha", "r", "log_r"])?;
                    let limit = match b.expr("R", &[])? {
                        Some(e) => match e.eval_const()? {
                            Val::Q(q) => q,
                            _ => return Err(b.error("R", "R must be an exact rational")),
                        },
                        None => BigRational::zero(),
                    };
                    let alpha = b.expr("alpha", &["j"])?.unwrap_or_else(|| Expr::var("j"));
                    let r = match (b.expr("r", &["n"])?, b.expr("log_r", &["n"])?) {
                        (Some(_), Some(_)) => {
                            return Err(b.error("log_r", "give either r(n) or log_r(n), not both"))
                        }
                        (Some(e), None) => RSeq::Ratio(e),
                        (None, Some(e)) => RSeq::Log(e),
                        (None, None) => RSeq::Ratio(Expr::bin(
                            expr::BinOp::Add,
                            Expr::num(limit.clone()),
                            Expr::bin(expr::BinOp::Div, Expr::num(BigRational::one()), Expr::var("n")),
                        )),
                    };
                    let alpha_shape = Shape::of(&alpha, "j");
                    (
                        Kind::DualPower(DualPower {
                            limit,
                            alpha,
                            alpha_shape,
                            r,
                        }),
                        IndexSet::Nat,
                    )
                }
                "grid" => {
                    b.allow(&["c"])?;
                    let c = b.expr("c", &["j"])?.unwrap_or_else(|| {
                        Expr::bin(expr::BinOp::Div, Expr::num(BigRational::one()), Expr::var("j"))
                    });
                    let c_shape = Shape::of(&c, "j");
                    (Kind::Grid(Grid { c, c_shape }), IndexSet::NatSquared)
                }
                "table" => {
                    b.allow(&["v", "tail"])?;
                    let binding = b
                        .get("v")
                        .ok_or_else(|| syntax(src, *span, "table needs a binding v(n, j) or v(n, i, j)"))?;
                    let arity = match binding.params.len() {
                        2 => 1u8,
                        3 => 2u8,
                        _ => return Err(b.error("v", "v takes (n, j) or (n, i, j)")),
                    };
                    let names: &[&str] = if arity == 1 { &["n", "j"] } else { &["n", "i", "j"] };
                    let v = b.expr("v", names)?.expect("binding present");
                    let tail = match b.get("tail").map(|t| &t.value) {
                        Some(BindingValue::TailConstant(k)) => Some(Tail::Constant(*k)),
                        Some(BindingValue::TailMonotone) => Some(Tail::Monotone),
                        _ => None,
                    };
                    if arity == 2 && tail.is_some() {
                        return Err(b.error("tail", "tail rules apply to tables on N only"));
                    }
                    (
                        Kind::Table(Table { arity, v, tail }),
                        if arity == 1 { IndexSet::Nat } else { IndexSet::NatSquared },
                    )
                }
                other => {
                    return Err(syntax(
                        src,
                        *span,
                        format!(
                            "unknown family kind {other:?} (expected phi, constant, dual_power_series, grid, table, restrict or dsum)"
                        ),
                    ))
                }
            };
            let fam = WeightFamily {
                label,
                kind,
                index_set,
                tol,
            };
            fam.validate(limits)?;
            Ok(fam)
        }
    }
}

struct Bindings<'a> {
    src: &'a str,
    map: BTreeMap<&'a str, &'a Binding>,
}

impl<'a> Bindings<'a> {
    fn new(src: &'a str, list: &'a [Binding]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for b in list {
            if map.insert(b.name.as_str(), b).is_some() {
                return Err(syntax(src, b.span, format!("duplicate binding {:?}", b.name)));
            }
        }
        Ok(Bindings { src, map })
    }

    fn allow(&self, names: &[&str]) -> Result<()> {
        for (name, b) in &self.map {
            if !names.contains(name) {
                return Err(syntax(self.src, b.span, format!("unexpected binding {name:?}")));
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Option<&'a Binding> {
        self.map.get(name).copied()
    }

    fn error(&self, name: &str, msg: &str) -> Error {
        let span = self.get(name).map_or((0, 0), |b| b.span);
        syntax(self.src, span, msg)
    }

    /// The expression bound to `name`, with parameters renamed to `canonical`.
    fn expr(&self, name: &str, canonical: &[&str]) -> Result<Option<Expr>> {
        let Some(b) = self.get(name) else {
            return Ok(None);
        };
        let BindingValue::Expr(e) = &b.value else {
            return Err(self.error(name, "expected an expression"));
        };
        if b.params.len() != canonical.len() {
            return Err(self.error(
                name,
                &format!("{name} takes {} parameter(s)", canonical.len()),
            ));
        }
        let rename: BTreeMap<String, String> = b
            .params
            .iter()
            .zip(canonical)
            .map(|(p, c)| (p.clone(), c.to_string()))
            .collect();
        let mut free = Vec::new();
        e.free_vars(&mut free);
        if let Some(v) = free.iter().find(|v| !b.params.contains(v)) {
            return Err(syntax(self.src, e.span, format!("unbound variable {v:?}")));
        }
        Ok(Some(e.rename(&rename)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> XPos {
        XPos::ratio(n, d)
    }

    #[test]
    fn phi_values() {
        let f = parse_family("phi").unwrap();
        assert_eq!(f.eval(2, &Index::Nat(5)).unwrap(), XPos::Infinity);
        assert_eq!(f.eval(5, &Index::Nat(5)).unwrap(), XPos::one());
    }

    #[test]
    fn grid_values() {
        let f = parse_family("family grid { c(j) = 1/j }").unwrap();
        assert_eq!(f.eval(2, &Index::Pair(1, 5)).unwrap(), q(1, 25));
        assert_eq!(f.eval(3, &Index::Pair(7, 4)).unwrap(), XPos::one());
        assert!(f.eval(1, &Index::Nat(3)).is_err());
    }

    #[test]
    fn nonpositive_table_is_rejected() {
        let err = parse_family("family table { v(n,i) = 0 }").unwrap_err();
        assert!(matches!(err, Error::NonPositive { .. }), "{err:?}");
    }

    #[test]
    fn w2_violation_is_reported() {
        let err = parse_family_with("table { v(n,j) = n }", &Limits::new(4, 10)).unwrap_err();
        assert!(matches!(err, Error::W2 { level: 1, .. }), "{err:?}");
        let err = parse_family_with("table { v(n,j) = inf }", &Limits::new(4, 10)).unwrap_err();
        assert!(matches!(err, Error::W1 { .. }), "{err:?}");
    }

    #[test]
    fn restriction_and_sums() {
        let g = parse_family("grid").unwrap();
        let row = g.clone().restrict(Predicate::Row(1));
        assert_eq!(row.eval(1, &Index::Pair(1, 3)).unwrap(), XPos::one());
        assert_eq!(row.eval(2, &Index::Pair(1, 3)).unwrap(), q(1, 9));
        assert!(row.eval(2, &Index::Pair(2, 3)).is_err());
        let s = WeightFamily::direct_sum(WeightFamily::phi(), g);
        assert_eq!(s.eval(4, &Index::right(Index::Pair(2, 3))).unwrap(), q(1, 81));
        assert_eq!(s.eval(4, &Index::left(Index::Nat(5))).unwrap(), XPos::Infinity);
        let even = WeightFamily::phi().restrict(Predicate::Even);
        assert_eq!(even.index_set().prefix(6).len(), 3);
    }

    #[test]
    fn dual_power_exactness() {
        let f = parse_family("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }").unwrap();
        assert_eq!(f.eval(2, &Index::Nat(3)).unwrap(), q(1, 27));
        let s = parse_family("dual_power_series { R = 0; alpha(j) = log(j); log_r(n) = -n }").unwrap();
        assert_eq!(s.eval(2, &Index::Nat(3)).unwrap(), q(1, 9));
        let approx = parse_family("dual_power_series { R = 0; alpha(j) = log(j); r(n) = 1/(n+1) }").unwrap();
        assert!(!approx.eval(2, &Index::Nat(3)).unwrap().is_exact());
        assert!(parse_family("dual_power_series { R = 1; r(n) = 1/n }").is_err());
        assert!(parse_family("dual_power_series { alpha(j) = 5 - j }").is_err());
    }

    #[test]
    fn binding_errors() {
        assert!(matches!(
            parse_family("grid { d(j) = 1 }").unwrap_err(),
            Error::Syntax { .. }
        ));
        assert!(matches!(
            parse_family("grid { c(j) = 1/k }").unwrap_err(),
            Error::Syntax { .. }
        ));
        assert!(parse_family("grid { c(j) = 2 }").is_err());
        assert!(parse_family("blob").is_err());
    }
}
