//! Expressions of the family DSL: evaluation and shape recognition.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::xpos::{
    format_rational, ln_rational, pow_rational, pow_rational_capped, rational_to_f64, XPos,
};

/// Integer powers inside expressions stay exact up to this many bits.
const EXPR_EXACT_BITS: u64 = 1 << 17;

pub type Span = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(BigRational),
    Inf,
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    If(Box<Cond>, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cond {
    Bool(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

/// A signed extended value produced while evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Q(BigRational),
    F(f64),
    Inf,
}

pub type Env = BTreeMap<String, BigRational>;

impl Val {
    pub fn int(n: u64) -> Self {
        Val::Q(BigRational::from_integer(n.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Val::Q(q) => rational_to_f64(q),
            Val::F(x) => *x,
            Val::Inf => f64::INFINITY,
        }
    }

    fn sign(&self) -> Ordering {
        match self {
            Val::Q(q) => q.cmp(&BigRational::zero()),
            Val::F(x) => x.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
            Val::Inf => Ordering::Greater,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == Ordering::Equal
    }

    pub fn cmp_val(&self, other: &Val) -> Ordering {
        match (self, other) {
            (Val::Inf, Val::Inf) => Ordering::Equal,
            (Val::Inf, _) => Ordering::Greater,
            (_, Val::Inf) => Ordering::Less,
            (Val::Q(a), Val::Q(b)) => a.cmp(b),
            _ => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Converts to a weight value; `what` names the quantity in error messages.
    pub fn to_xpos(&self, tol: f64) -> Result<XPos> {
        match self {
            Val::Q(q) if q.is_negative() => Err(Error::Eval(format!("negative value {q}"))),
            Val::Q(q) => Ok(XPos::Exact(q.clone())),
            Val::F(x) if *x < 0.0 || x.is_nan() => Err(Error::Eval(format!("negative value {x}"))),
            Val::F(x) => Ok(XPos::approx(*x, tol)),
            Val::Inf => Ok(XPos::Infinity),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Val::Q(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Q(q) => write!(f, "{}", format_rational(q)),
            Val::F(x) => write!(f, "~{x}"),
            Val::Inf => write!(f, "inf"),
        }
    }
}

fn eval_err(span: Span, msg: impl Into<String>) -> Error {
    Error::Eval(format!("{} (at bytes {}..{})", msg.into(), span.0, span.1))
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn num(q: BigRational) -> Self {
        Expr::new(ExprKind::Num(q), (0, 0))
    }

    pub fn var(name: &str) -> Self {
        Expr::new(ExprKind::Var(name.into()), (0, 0))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Bin(op, Box::new(a), Box::new(b)), (0, 0))
    }

    /// Renames free variables, e.g. a binding parameter to the canonical `j`.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Expr {
        let kind = match &self.kind {
            ExprKind::Var(v) => ExprKind::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            ExprKind::Neg(e) => ExprKind::Neg(Box::new(e.rename(map))),
            ExprKind::Bin(op, a, b) => {
                ExprKind::Bin(*op, Box::new(a.rename(map)), Box::new(b.rename(map)))
            }
            ExprKind::Call(f, args) => {
                ExprKind::Call(f.clone(), args.iter().map(|a| a.rename(map)).collect())
            }
            ExprKind::If(c, a, b) => ExprKind::If(
                Box::new(c.rename(map)),
                Box::new(a.rename(map)),
                Box::new(b.rename(map)),
            ),
            other => other.clone(),
        };
        Expr::new(kind, self.span)
    }

    pub fn free_vars(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            ExprKind::Neg(e) => e.free_vars(out),
            ExprKind::Bin(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            ExprKind::If(c, a, b) => {
                c.free_vars(out);
                a.free_vars(out);
                b.free_vars(out);
            }
            _ => {}
        }
    }

    pub fn eval(&self, env: &Env) -> Result<Val> {
        match &self.kind {
            ExprKind::Num(q) => Ok(Val::Q(q.clone())),
            ExprKind::Inf => Ok(Val::Inf),
            ExprKind::Var(v) => env
                .get(v)
                .map(|q| Val::Q(q.clone()))
                .ok_or_else(|| eval_err(self.span, format!("unbound variable {v}"))),
            ExprKind::Neg(e) => match e.eval(env)? {
                Val::Q(q) => Ok(Val::Q(-q)),
                Val::F(x) => Ok(Val::F(-x)),
                Val::Inf => Err(eval_err(self.span, "negative infinity")),
            },
            ExprKind::Bin(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                binary(*op, x, y).map_err(|m| eval_err(self.span, m))
            }
            ExprKind::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>>>()?;
                call(f, vals).map_err(|m| eval_err(self.span, m))
            }
            ExprKind::If(c, a, b) => {
                if c.eval(env)? {
                    a.eval(env)
                } else {
                    b.eval(env)
                }
            }
        }
    }

    /// Evaluates with the given variable bindings.
    pub fn eval_with(&self, vars: &[(&str, u64)]) -> Result<Val> {
        let env: Env = vars
            .iter()
            .map(|(k, v)| (k.to_string(), BigRational::from_integer((*v).into())))
            .collect();
        self.eval(&env)
    }

    /// Evaluates an expression without free variables.
    pub fn eval_const(&self) -> Result<Val> {
        self.eval(&Env::new())
    }
}

impl Cond {
    fn rename(&self, map: &BTreeMap<String, String>) -> Cond {
        match self {
            Cond::Bool(b) => Cond::Bool(*b),
            Cond::Cmp(op, a, b) => Cond::Cmp(*op, a.rename(map), b.rename(map)),
            Cond::Not(c) => Cond::Not(Box::new(c.rename(map))),
            Cond::And(a, b) => Cond::And(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Cond::Or(a, b) => Cond::Or(Box::new(a.rename(map)), Box::new(b.rename(map))),
        }
    }

    fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Cond::Bool(_) => {}
            Cond::Cmp(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Cond::Not(c) => c.free_vars(out),
            Cond::And(a, b) | Cond::Or(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &Env) -> Result<bool> {
        Ok(match self {
            Cond::Bool(b) => *b,
            Cond::Cmp(op, a, b) => {
                let o = a.eval(env)?.cmp_val(&b.eval(env)?);
                match op {
                    CmpOp::Lt => o == Ordering::Less,
                    CmpOp::Le => o != Ordering::Greater,
                    CmpOp::Gt => o == Ordering::Greater,
                    CmpOp::Ge => o != Ordering::Less,
                    CmpOp::Eq => o == Ordering::Equal,
                    CmpOp::Ne => o != Ordering::Equal,
                }
            }
            Cond::Not(c) => !c.eval(env)?,
            Cond::And(a, b) => a.eval(env)? && b.eval(env)?,
            Cond::Or(a, b) => a.eval(env)? || b.eval(env)?,
        })
    }
}

fn binary(op: BinOp, x: Val, y: Val) -> std::result::Result<Val, String> {
    use Val::*;
    Ok(match op {
        BinOp::Add => match (x, y) {
            (Inf, _) | (_, Inf) => Inf,
            (Q(a), Q(b)) => Q(a + b),
            (a, b) => F(a.to_f64() + b.to_f64()),
        },
        BinOp::Sub => match (x, y) {
            (_, Inf) => return Err("subtraction of infinity".into()),
            (Inf, _) => Inf,
            (Q(a), Q(b)) => Q(a - b),
            (a, b) => F(a.to_f64() - b.to_f64()),
        },
        BinOp::Mul => {
            if x.is_zero() || y.is_zero() {
                return Ok(Q(BigRational::zero()));
            }
            match (x, y) {
                (Inf, v) | (v, Inf) => {
                    if v.sign() == Ordering::Less {
                        return Err("negative infinity".into());
                    }
                    Inf
                }
                (Q(a), Q(b)) => Q(a * b),
                (a, b) => F(a.to_f64() * b.to_f64()),
            }
        }
        BinOp::Div => match (x, y) {
            (Inf, Inf) => Q(BigRational::one()),
            (_, Inf) => Q(BigRational::zero()),
            (Inf, v) => {
                if v.sign() != Ordering::Greater {
                    return Err("division of infinity by a nonpositive value".into());
                }
                Inf
            }
            (_, v) if v.is_zero() => return Err("division by zero".into()),
            (Q(a), Q(b)) => Q(a / b),
            (a, b) => F(a.to_f64() / b.to_f64()),
        },
        BinOp::Pow => power(x, y)?,
    })
}

fn power(x: Val, y: Val) -> std::result::Result<Val, String> {
    use Val::*;
    match (x, y) {
        (_, Inf) => Err("infinite exponent".into()),
        (Inf, e) => Ok(match e.sign() {
            Ordering::Greater => Inf,
            Ordering::Equal => Q(BigRational::one()),
            Ordering::Less => Q(BigRational::zero()),
        }),
        (Q(b), Q(e)) => {
            if e.is_integer() {
                let k = e.to_integer();
                if b.is_zero() && k.is_negative() {
                    return Err("zero to a negative power".into());
                }
                let negative = b.is_negative() && (&k % 2u32) != 0.into();
                let r = pow_rational_capped(&b.abs(), &e, crate::xpos::DEFAULT_TOL, EXPR_EXACT_BITS);
                let r = match r {
                    XPos::Exact(q) => Q(q),
                    other => F(other.to_f64()),
                };
                Ok(if negative { negate(r) } else { r })
            } else if b.is_negative() {
                Err("fractional power of a negative number".into())
            } else {
                Ok(match pow_rational(&b, &e, crate::xpos::DEFAULT_TOL) {
                    XPos::Exact(q) => Q(q),
                    XPos::Infinity => Inf,
                    other => F(other.to_f64()),
                })
            }
        }
        (b, e) => {
            let (b, e) = (b.to_f64(), e.to_f64());
            if b < 0.0 && e.fract() != 0.0 {
                return Err("fractional power of a negative number".into());
            }
            Ok(F(b.powf(e)))
        }
    }
}

fn negate(v: Val) -> Val {
    match v {
        Val::Q(q) => Val::Q(-q),
        Val::F(x) => Val::F(-x),
        Val::Inf => Val::Inf,
    }
}

fn call(f: &str, args: Vec<Val>) -> std::result::Result<Val, String> {
    match (f, args.as_slice()) {
        ("log", [x]) => match x {
            Val::Inf => Ok(Val::Inf),
            v if v.sign() != Ordering::Greater => Err("log of a nonpositive value".into()),
            Val::Q(q) if q.is_one() => Ok(Val::Q(BigRational::zero())),
            Val::Q(q) => Ok(Val::F(ln_rational(q.clone()))),
            other => Ok(Val::F(other.to_f64().ln())),
        },
        ("min", [a, b]) => Ok(if a.cmp_val(b) == Ordering::Greater {
            b.clone()
        } else {
            a.clone()
        }),
        ("max", [a, b]) => Ok(if a.cmp_val(b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }),
        _ => Err(format!("unknown function {f}/{}", args.len())),
    }
}

/// Recognized closed forms of a one-variable expression `e(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Const(BigRational),
    /// `slope·x + intercept`
    Affine {
        slope: BigRational,
        intercept: BigRational,
    },
    /// `coef·x^exp + shift`, `exp ∉ {0, 1}`
    Power {
        coef: BigRational,
        exp: BigRational,
        shift: BigRational,
    },
    /// `coef·base^x + shift`
    Exp {
        coef: BigRational,
        base: BigRational,
        shift: BigRational,
    },
    /// `coef·log(x) + shift`
    Log {
        coef: BigRational,
        shift: BigRational,
    },
    Other,
}

impl Shape {
    fn scale(self, c: &BigRational) -> Shape {
        match self {
            Shape::Const(a) => Shape::Const(a * c),
            Shape::Affine { slope, intercept } => Shape::Affine {
                slope: slope * c,
                intercept: intercept * c,
            },
            Shape::Power { coef, exp, shift } => Shape::Power {
                coef: coef * c,
                exp,
                shift: shift * c,
            },
            Shape::Exp { coef, base, shift } => Shape::Exp {
                coef: coef * c,
                base,
                shift: shift * c,
            },
            Shape::Log { coef, shift } => Shape::Log {
                coef: coef * c,
                shift: shift * c,
            },
            Shape::Other => Shape::Other,
        }
        .normalize()
    }

    fn shift(self, c: &BigRational) -> Shape {
        match self {
            Shape::Const(a) => Shape::Const(a + c),
            Shape::Affine { slope, intercept } => Shape::Affine {
                slope,
                intercept: intercept + c,
            },
            Shape::Power { coef, exp, shift } => Shape::Power {
                coef,
                exp,
                shift: shift + c,
            },
            Shape::Exp { coef, base, shift } => Shape::Exp {
                coef,
                base,
                shift: shift + c,
            },
            Shape::Log { coef, shift } => Shape::Log {
                coef,
                shift: shift + c,
            },
            Shape::Other => Shape::Other,
        }
    }

    fn normalize(self) -> Shape {
        match self {
            Shape::Affine { slope, intercept } if slope.is_zero() => Shape::Const(intercept),
            Shape::Power { coef, shift, .. } if coef.is_zero() => Shape::Const(shift),
            Shape::Exp { coef, shift, .. } if coef.is_zero() => Shape::Const(shift),
            Shape::Log { coef, shift } if coef.is_zero() => Shape::Const(shift),
            Shape::Exp { coef, base, shift } if base.is_one() => Shape::Const(coef + shift),
            s => s,
        }
    }

    /// Recognizes `e` as a function of the variable `var`.
    pub fn of(e: &Expr, var: &str) -> Shape {
        let s = match &e.kind {
            ExprKind::Num(q) => Shape::Const(q.clone()),
            ExprKind::Var(v) if v == var => Shape::Affine {
                slope: BigRational::one(),
                intercept: BigRational::zero(),
            },
            ExprKind::Neg(a) => Shape::of(a, var).scale(&-BigRational::one()),
            ExprKind::Bin(op, a, b) => {
                let (sa, sb) = (Shape::of(a, var), Shape::of(b, var));
                match (op, sa, sb) {
                    (BinOp::Add, Shape::Const(c), s) | (BinOp::Add, s, Shape::Const(c)) => {
                        s.shift(&c)
                    }
                    (BinOp::Sub, s, Shape::Const(c)) => s.shift(&-c),
                    (BinOp::Sub, Shape::Const(c), s) => s.scale(&-BigRational::one()).shift(&c),
                    (
                        BinOp::Add,
                        Shape::Affine { slope: a1, intercept: b1 },
                        Shape::Affine { slope: a2, intercept: b2 },
                    ) => Shape::Affine {
                        slope: a1 + a2,
                        intercept: b1 + b2,
                    }
                    .normalize(),
                    (BinOp::Mul, Shape::Const(c), s) | (BinOp::Mul, s, Shape::Const(c)) => {
                        s.scale(&c)
                    }
                    (BinOp::Div, s, Shape::Const(c)) if !c.is_zero() => s.scale(&c.recip()),
                    (BinOp::Div, Shape::Const(c), s) => reciprocal(s).scale(&c),
                    (
                        BinOp::Pow,
                        Shape::Affine { slope, intercept },
                        Shape::Const(k),
                    ) if slope.is_one() && intercept.is_zero() => {
                        if k.is_zero() {
                            Shape::Const(BigRational::one())
                        } else if k.is_one() {
                            Shape::Affine {
                                slope,
                                intercept,
                            }
                        } else {
                            Shape::Power {
                                coef: BigRational::one(),
                                exp: k,
                                shift: BigRational::zero(),
                            }
                        }
                    }
                    (
                        BinOp::Pow,
                        Shape::Const(base),
                        Shape::Affine { slope, intercept },
                    ) if slope.is_one() && intercept.is_zero() && base.is_positive() => Shape::Exp {
                        coef: BigRational::one(),
                        base,
                        shift: BigRational::zero(),
                    }
                    .normalize(),
                    (BinOp::Pow, Shape::Const(b), Shape::Const(k)) => {
                        match binary(BinOp::Pow, Val::Q(b), Val::Q(k)) {
                            Ok(Val::Q(q)) => Shape::Const(q),
                            _ => Shape::Other,
                        }
                    }
                    _ => Shape::Other,
                }
            }
            ExprKind::Call(f, args) if f == "log" && args.len() == 1 => {
                match Shape::of(&args[0], var) {
                    Shape::Affine { slope, intercept } if slope.is_one() && intercept.is_zero() => {
                        Shape::Log {
                            coef: BigRational::one(),
                            shift: BigRational::zero(),
                        }
                    }
                    Shape::Const(c) if c.is_one() => Shape::Const(BigRational::zero()),
                    _ => Shape::Other,
                }
            }
            _ => Shape::Other,
        };
        s.normalize()
    }

    /// `Some(true)` if `e(x) → ∞`, `Some(false)` if bounded above, `None` if unknown.
    pub fn unbounded(&self) -> Option<bool> {
        match self {
            Shape::Const(_) => Some(false),
            Shape::Affine { slope, .. } => Some(slope.is_positive()),
            Shape::Power { coef, exp, .. } => Some(coef.is_positive() && exp.is_positive()),
            Shape::Exp { coef, base, .. } => Some(coef.is_positive() && base > &BigRational::one()),
            Shape::Log { coef, .. } => Some(coef.is_positive()),
            Shape::Other => None,
        }
    }

    /// Whether `e(x) → 0`.
    pub fn tends_to_zero(&self) -> Option<bool> {
        match self {
            Shape::Const(c) => Some(c.is_zero()),
            Shape::Affine { slope, intercept } => Some(slope.is_zero() && intercept.is_zero()),
            Shape::Power { coef, exp, shift } => Some(shift.is_zero() && (exp.is_negative() || coef.is_zero())),
            Shape::Exp { base, shift, .. } => Some(shift.is_zero() && base < &BigRational::one()),
            Shape::Log { .. } => Some(false),
            Shape::Other => None,
        }
    }

    /// A linear lower bound `a·x + b <= e(x)` for integers `x >= 1`, with `a > 0`.
    pub fn linear_lower_bound(&self) -> Option<(BigRational, BigRational)> {
        let one = BigRational::one();
        match self {
            Shape::Affine { slope, intercept } if slope.is_positive() => {
                Some((slope.clone(), intercept.clone()))
            }
            Shape::Power { coef, exp, shift } if coef.is_positive() && exp >= &one => {
                Some((coef.clone(), shift.clone()))
            }
            Shape::Exp { coef, base, shift } if coef.is_positive() && base > &one => {
                Some((coef * (base - &one), coef + shift))
            }
            _ => None,
        }
    }

}

fn reciprocal(s: Shape) -> Shape {
    match s {
        Shape::Const(c) if !c.is_zero() => Shape::Const(c.recip()),
        Shape::Affine { slope, intercept } if intercept.is_zero() => Shape::Power {
            coef: slope.recip(),
            exp: -BigRational::one(),
            shift: BigRational::zero(),
        },
        Shape::Power { coef, exp, shift } if shift.is_zero() => Shape::Power {
            coef: coef.recip(),
            exp: -exp,
            shift,
        },
        Shape::Exp { coef, base, shift } if shift.is_zero() => Shape::Exp {
            coef: coef.recip(),
            base: base.recip(),
            shift,
        },
        _ => Shape::Other,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(q) => {
                if q.is_negative() {
                    write!(f, "({})", format_rational(q))
                } else if q.is_integer() {
                    write!(f, "{}", format_rational(q))
                } else {
                    write!(f, "({})", format_rational(q))
                }
            }
            ExprKind::Inf => write!(f, "inf"),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            ExprKind::Call(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            ExprKind::If(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Bool(b) => write!(f, "{b}"),
            Cond::Cmp(op, a, b) => {
                let s = match op {
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                };
                write!(f, "{a} {s} {b}")
            }
            Cond::Not(c) => write!(f, "not ({c})"),
            Cond::And(a, b) => write!(f, "({a}) and ({b})"),
            Cond::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}
