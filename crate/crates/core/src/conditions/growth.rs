//! Eventual boundedness, eventual `c_0` and eventual `ℓ_p` membership.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{first_finite_level, gallop_levels, Leaf, Node, CITE_BOUNDED, CITE_C0, CITE_LP, SAMPLES};
use crate::error::Result;
use crate::index::Index;
use crate::limits::Limits;
use crate::order::Order;
use crate::verdict::{
    Certificate, DivergenceRow, GrowthSample, LevelIndex, LowerBound, SeriesBound, UnknownReason,
    Verdict, Witness,
};
use crate::weights::expr::{Shape, Val};
use crate::weights::{DualPower, Grid, Kind, Table, Tail};
use crate::xpos::{ln_rational, rational_to_f64, Cmp3, XPos};

/// Exact partial sums are formed only up to this many terms.
const EXACT_SUM_TERMS: usize = 512;

pub(super) fn check(node: &Node, p: Order, limits: &Limits) -> Result<Verdict> {
    match node {
        Node::Leaf(l) => leaf(l, p, limits),
        Node::Sum(a, b) => {
            let (l, r) = (check(a, p, limits)?, check(b, p, limits)?);
            Ok(super::both(l, r, cite(p), limits, |a, b| Certificate::DirectSum {
                left: Box::new(a),
                right: Box::new(b),
            }))
        }
    }
}

pub(crate) fn cite(p: Order) -> &'static str {
    match p {
        Order::Infinity => CITE_BOUNDED,
        Order::Zero => CITE_C0,
        Order::Finite(_) => CITE_LP,
    }
}

fn q(n: u64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `v^p`; `p = 0` and `p = ∞` leave `v` unchanged.
fn power(v: &XPos, p: Order) -> XPos {
    match p {
        Order::Finite(k) => v.powi(k),
        _ => v.clone(),
    }
}

fn p_exp(p: Order) -> u64 {
    match p {
        Order::Finite(k) => k as u64,
        _ => 1,
    }
}

struct Ctx<'a, 'b> {
    leaf: &'b Leaf<'a>,
    p: Order,
    limits: &'b Limits,
}

impl Ctx<'_, '_> {
    fn cite(&self) -> &'static str {
        cite(self.p)
    }

    fn unknown(&self, reason: UnknownReason, note: impl Into<String>) -> Verdict {
        Verdict::unknown(reason, self.cite(), note, self.limits)
    }

    fn holds(&self, c: Certificate) -> Verdict {
        Verdict::holds(c, self.cite(), self.limits)
    }

    fn fails(&self, w: Witness) -> Verdict {
        Verdict::fails(w, self.cite(), self.limits)
    }

    fn vanishing(&self, level: u32, reason: &str) -> Verdict {
        self.holds(Certificate::Vanishing {
            level,
            reason: reason.into(),
            samples: self.leaf.first_members(SAMPLES, self.limits.horizon),
        })
    }

    /// Fails by infinitely many terms bounded below at every level `n <= N`.
    fn diverges(
        &self,
        argument: &str,
        mut lower: impl FnMut(u32) -> Result<LowerBound>,
        mut points: impl FnMut(u32) -> Vec<Index>,
    ) -> Result<Verdict> {
        let mut rows = Vec::new();
        for n in 1..=self.limits.levels {
            rows.push(DivergenceRow {
                level: n,
                lower: lower(n)?,
                points: points(n),
            });
        }
        Ok(self.fails(Witness::Divergence {
            order: self.p,
            rows,
            argument: argument.into(),
        }))
    }
}

fn leaf(leaf: &Leaf, p: Order, limits: &Limits) -> Result<Verdict> {
    let cx = Ctx { leaf, p, limits };
    if let Some(members) = leaf.finite_members() {
        return finite(&cx, &members);
    }
    match &leaf.base.kind {
        Kind::Phi => {
            let set = leaf.nat_set();
            let points = (1..=limits.levels)
                .filter_map(|n| {
                    set.first_member_from(n as u64 + 1).map(|j| LevelIndex {
                        level: n,
                        index: Index::Nat(j),
                    })
                })
                .collect();
            Ok(cx
                .fails(Witness::InfiniteWeight { points })
                .with_note("v_n(j) = inf for every j > n"))
        }
        Kind::DualPower(d) => dual_power(&cx, d),
        Kind::Grid(g) => grid(&cx, g),
        Kind::Table(t) => table(&cx, t),
        Kind::Restriction { .. } | Kind::DirectSum(..) => unreachable!("normalized"),
    }
}

fn finite(cx: &Ctx, members: &[Index]) -> Result<Verdict> {
    let Some(n) = first_finite_level(cx.leaf, members, cx.limits)? else {
        return Ok(cx.unknown(
            UnknownReason::Horizon,
            "no searched level is finite on the whole finite index set",
        ));
    };
    let values = members
        .iter()
        .map(|i| cx.leaf.v(n, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(match cx.p {
        Order::Infinity => cx.holds(Certificate::Bounded {
            level: n,
            bound: values.into_iter().fold(XPos::one(), XPos::max),
        }),
        Order::Zero => cx.vanishing(n, "finite index set"),
        Order::Finite(_) => cx.holds(Certificate::Summable {
            level: n,
            order: cx.p,
            series: SeriesBound::Finite {
                terms: members.to_vec(),
                sum: sum(values.iter().map(|v| power(v, cx.p)), cx.limits),
            },
        }),
    })
}

fn sum(values: impl Iterator<Item = XPos>, limits: &Limits) -> XPos {
    let values: Vec<XPos> = values.collect();
    if values.len() <= EXACT_SUM_TERMS && values.iter().all(XPos::is_exact) {
        return values.iter().fold(XPos::zero(), |a, b| a.add(b));
    }
    let total: f64 = values.iter().map(XPos::to_f64).sum();
    let tol = limits.tol.max(values.len() as f64 * f64::EPSILON);
    XPos::approx(total * (1.0 + tol), tol)
}

fn dual_power(cx: &Ctx, d: &DualPower) -> Result<Verdict> {
    let leaf = cx.leaf;
    let set = leaf.nat_set();
    let first = leaf.first_members(SAMPLES, cx.limits.horizon);
    let at_first = |n: u32| leaf.v(n, &first[0]);
    if d.limit >= BigRational::one() {
        if cx.p == Order::Infinity {
            return match d.alpha_shape.unbounded() {
                Some(false) if matches!(d.alpha_shape, Shape::Const(_)) => {
                    Ok(cx.holds(Certificate::Bounded {
                        level: 1,
                        bound: at_first(1)?,
                    }))
                }
                Some(true) => {
                    let mut samples = Vec::new();
                    for n in 1..=cx.limits.levels {
                        for t in 1..=SAMPLES as u32 {
                            let target = XPos::pow2(t);
                            let hit = Leaf::gallop(&set, |j| {
                                Ok(leaf.v(n, &Index::Nat(j))?.cmp3(&target).ge() == Some(true))
                            })?;
                            if let Some(j) = hit {
                                samples.push(GrowthSample {
                                    level: n,
                                    index: Index::Nat(j),
                                    at_least: target,
                                });
                            }
                        }
                    }
                    Ok(cx
                        .fails(Witness::Growth { samples })
                        .with_note("r_n > R >= 1 and alpha_j -> inf, so r_n^alpha_j -> inf"))
                }
                _ => Ok(cx.unknown(UnknownReason::NoRule, "growth of alpha is not recognized")),
            };
        }
        return cx.diverges(
            "r_n > R >= 1 gives v_n(j) = r_n^alpha_j >= 1 for every j",
            |_| {
                Ok(LowerBound::Constant {
                    value: XPos::one(),
                })
            },
            |_| first.clone(),
        );
    }

    if cx.p == Order::Infinity {
        return match gallop_levels(1, |n| Ok(d.r_cmp(n, &BigRational::one())?.le()))? {
            Ok(n) => Ok(cx
                .holds(Certificate::Bounded {
                    level: n,
                    bound: XPos::one(),
                })
                .with_note(format!("r_{n} <= 1 and alpha >= 0"))),
            Err(reason) => Ok(cx.unknown(reason, "no level with r_n <= 1 was certified")),
        };
    }

    if let Shape::Const(_) = d.alpha_shape {
        let p = cx.p;
        return cx.diverges(
            "alpha is constant, so every v_n is a positive constant",
            |n| {
                Ok(LowerBound::Constant {
                    value: power(&at_first(n)?, p),
                })
            },
            |_| first.clone(),
        );
    }
    let below_one = |n: u32| Ok(d.r_cmp(n, &BigRational::one())?.lt());
    if cx.p == Order::Zero {
        if d.alpha_shape.unbounded() != Some(true) {
            return Ok(cx.unknown(UnknownReason::NoRule, "growth of alpha is not recognized"));
        }
        return match gallop_levels(1, below_one)? {
            Ok(n) => Ok(cx.vanishing(n, "r_n < 1 and alpha_j -> inf")),
            Err(reason) => Ok(cx.unknown(reason, "no level with r_n < 1 was certified")),
        };
    }

    let k = p_exp(cx.p);
    let tol = leaf.base.tol();
    if let Some((a, b)) = d.alpha_shape.linear_lower_bound() {
        let n = match gallop_levels(1, below_one)? {
            Ok(n) => n,
            Err(reason) => return Ok(cx.unknown(reason, "no level with r_n < 1 was certified")),
        };
        let r = d.r_value(n)?.to_xpos(tol)?;
        let kq = q(k);
        let first = r.pow(&(&kq * (&a + &b)));
        let ratio = r.pow(&(&kq * &a));
        let Some(gap) = XPos::one().checked_sub(&ratio).filter(|g| !g.is_zero()) else {
            return Ok(cx.unknown(UnknownReason::Tolerance, "geometric ratio is not below 1"));
        };
        let total = first.div(&gap);
        return Ok(cx.holds(Certificate::Summable {
            level: n,
            order: cx.p,
            series: SeriesBound::Geometric {
                first,
                ratio,
                multiplicity: 1,
                sum: total,
            },
        }));
    }
    if let Shape::Log { coef, shift } = &d.alpha_shape {
        return log_alpha(cx, d, coef, shift, k);
    }
    Ok(cx.unknown(
        UnknownReason::NoRule,
        "alpha is neither linearly bounded below nor logarithmic",
    ))
}

/// `alpha_j = c·log j + d`: `v_n(j)^p = e^(p·d·λ_n) · j^(-s_n)` with `s_n = -c·p·λ_n`.
fn log_alpha(cx: &Ctx, dp: &DualPower, c: &BigRational, d: &BigRational, k: u64) -> Result<Verdict> {
    let tol = cx.leaf.base.tol();
    let kq = q(k);
    let exponent = |n: u32| -> Result<XPos> {
        Ok(match dp.log_r(n)? {
            Val::Q(l) => {
                let s = -(c * &kq * l);
                if s.is_negative() {
                    XPos::zero()
                } else {
                    XPos::Exact(s)
                }
            }
            v => XPos::approx((-(rational_to_f64(c) * k as f64) * v.to_f64()).max(0.0), tol),
        })
    };
    let coef = |n: u32| -> Result<XPos> {
        if d.is_zero() {
            return Ok(XPos::one());
        }
        Ok(match dp.log_r(n)? {
            Val::Q(l) if l.is_zero() => XPos::one(),
            v => XPos::approx((v.to_f64() * rational_to_f64(d) * k as f64).exp(), tol),
        })
    };
    if dp.limit.is_positive() {
        let s_lim = -(rational_to_f64(c) * k as f64) * ln_rational(dp.limit.clone());
        match XPos::approx(s_lim.max(0.0), tol).cmp3(&XPos::one()) {
            Cmp3::Indeterminate => {
                return Ok(cx.unknown(
                    UnknownReason::Tolerance,
                    "the limiting exponent -c·p·log R is too close to 1",
                ))
            }
            Cmp3::Less | Cmp3::Equal => {
                let first = cx.leaf.first_members(SAMPLES, cx.limits.horizon);
                return cx.diverges(
                    "v_n(j)^p = coef·j^(-s_n) with s_n < -c·p·log R <= 1 on a set of positive density",
                    |n| {
                        Ok(LowerBound::PowerLaw {
                            coef: coef(n)?,
                            exponent: exponent(n)?,
                        })
                    },
                    |_| first.clone(),
                );
            }
            Cmp3::Greater => {}
        }
    }
    let n = match gallop_levels(1, |n| Ok(exponent(n)?.cmp3(&XPos::one()).gt()))? {
        Ok(n) => n,
        Err(reason) => {
            return Ok(cx.unknown(reason, "no level with exponent s_n > 1 was certified"))
        }
    };
    let s = exponent(n)?;
    let cf = coef(n)?;
    let total = p_series_sum(&cf, &s, 1);
    Ok(cx.holds(Certificate::Summable {
        level: n,
        order: cx.p,
        series: SeriesBound::PSeries {
            coef: cf,
            exponent: s,
            multiplicity: 1,
            sum: total,
        },
    }))
}

/// `mult · coef · s/(s-1)`, an upper bound for `mult · coef · ζ(s)`.
fn p_series_sum(coef: &XPos, s: &XPos, mult: u64) -> XPos {
    let s_minus_one = s.checked_sub(&XPos::one()).unwrap_or(XPos::zero());
    XPos::int(mult as i64).mul(coef).mul(&s.div(&s_minus_one))
}

fn grid(cx: &Ctx, g: &Grid) -> Result<Verdict> {
    if cx.p == Order::Infinity {
        return Ok(cx
            .holds(Certificate::Bounded {
                level: 1,
                bound: XPos::one(),
            })
            .with_note("v_1 = 1 on all of N^2"));
    }
    let leaf = cx.leaf;
    let shape = leaf.shape();
    if shape.infinitely_many_rows() {
        return cx.diverges(
            "v_n(i, j) = 1 for i >= n and the set meets infinitely many rows in nonempty sets",
            |_| {
                Ok(LowerBound::Constant {
                    value: XPos::one(),
                })
            },
            |n| {
                shape
                    .rows_meeting_from(n as u64, SAMPLES)
                    .into_iter()
                    .filter_map(|i| leaf.row(i).first_member_from(1).map(|j| Index::Pair(i, j)))
                    .collect()
            },
        );
    }
    let rows: Vec<u64> = shape.rows_meeting_from(1, usize::MAX);
    let last = rows.iter().copied().max().unwrap_or(0);
    let n0 = last as u32 + 1;
    let mult = rows.len() as u64;
    if cx.p == Order::Zero {
        return Ok(cx.vanishing(n0, "finitely many rows; v_n = c_j^n on them for n > last row, and c_j -> 0"));
    }
    let k = p_exp(cx.p);
    let tol = leaf.base.tol();
    match &g.c_shape {
        Shape::Power { coef, exp, shift } if shift.is_zero() && exp.is_negative() && coef.is_positive() => {
            let e = -exp.clone();
            let need = (BigRational::one() / (&e * q(k))).floor() + BigRational::one();
            let n = n0.max(need.to_integer().try_into().unwrap_or(u32::MAX));
            let nk = q(n as u64 * k);
            let cf = XPos::from_rational(coef.clone()).pow(&nk);
            let s = XPos::from_rational(&e * &nk);
            let total = p_series_sum(&cf, &s, mult);
            Ok(cx.holds(Certificate::Summable {
                level: n,
                order: cx.p,
                series: SeriesBound::PSeries {
                    coef: cf,
                    exponent: s,
                    multiplicity: mult,
                    sum: total,
                },
            }))
        }
        Shape::Exp { coef, base, shift }
            if shift.is_zero() && base < &BigRational::one() && base.is_positive() && coef.is_positive() =>
        {
            let nk = q(n0 as u64 * k);
            let first = XPos::from_rational(coef * base).pow(&nk);
            let ratio = XPos::from_rational(base.clone()).pow(&nk);
            let gap = XPos::one().checked_sub(&ratio).unwrap_or(XPos::approx(0.0, tol));
            let total = XPos::int(mult as i64).mul(&first).div(&gap);
            Ok(cx.holds(Certificate::Summable {
                level: n0,
                order: cx.p,
                series: SeriesBound::Geometric {
                    first,
                    ratio,
                    multiplicity: mult,
                    sum: total,
                },
            }))
        }
        _ => Ok(cx.unknown(
            UnknownReason::NoRule,
            "c_j is neither a power law nor geometric, so sum_j c_j^(np) is not decided",
        )),
    }
}

fn table(cx: &Ctx, t: &Table) -> Result<Verdict> {
    let leaf = cx.leaf;
    match (t.arity, t.tail) {
        (1, Some(Tail::Constant(k))) => {
            let set = leaf.nat_set();
            if cx.p == Order::Infinity {
                let mut points: Vec<Index> = set
                    .members_up_to(k.saturating_sub(1))
                    .into_iter()
                    .map(Index::Nat)
                    .collect();
                points.push(Index::Nat(k));
                return match first_finite_level(leaf, &points, cx.limits)? {
                    Some(n) => {
                        let bound = points
                            .iter()
                            .map(|i| leaf.v(n, i))
                            .collect::<Result<Vec<_>>>()?
                            .into_iter()
                            .fold(XPos::one(), XPos::max);
                        Ok(cx.holds(Certificate::Bounded { level: n, bound }))
                    }
                    None => Ok(cx.unknown(
                        UnknownReason::Horizon,
                        format!("v_n is infinite on j <= {k} for every searched level"),
                    )),
                };
            }
            let tail: Vec<Index> = {
                let mut out = Vec::new();
                let mut j = k;
                while out.len() < SAMPLES {
                    match set.first_member_from(j) {
                        Some(m) => {
                            out.push(Index::Nat(m));
                            j = m + 1;
                        }
                        None => break,
                    }
                }
                out
            };
            let p = cx.p;
            cx.diverges(
                "constant tail: v_n(j) = v_n(K) > 0 for infinitely many j in the set",
                |n| {
                    Ok(LowerBound::Constant {
                        value: power(&leaf.v(n, &Index::Nat(k))?, p),
                    })
                },
                |_| tail.clone(),
            )
        }
        (1, Some(Tail::Monotone)) => monotone(cx),
        _ => Ok(cx.unknown(
            UnknownReason::Horizon,
            "explicit data without a tail rule only fixes finitely many values",
        )),
    }
}

fn monotone(cx: &Ctx) -> Result<Verdict> {
    let leaf = cx.leaf;
    let h = cx.limits.horizon;
    if h < 2 {
        return Ok(cx.unknown(UnknownReason::Horizon, "horizon too short for a tail ratio"));
    }
    for n in 1..=cx.limits.levels {
        if leaf.v(n, &Index::Nat(1))?.is_infinite() {
            continue;
        }
        let last = leaf.v(n, &Index::Nat(h))?;
        let rho = last.div(&leaf.v(n, &Index::Nat(h - 1))?);
        let ok = match cx.p {
            Order::Infinity => rho.cmp3(&XPos::one()).le(),
            _ => rho.cmp3(&XPos::one()).lt(),
        };
        if ok != Some(true) {
            continue;
        }
        let values = (1..=h)
            .map(|j| leaf.v(n, &Index::Nat(j)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(match cx.p {
            Order::Infinity => cx
                .holds(Certificate::Bounded {
                    level: n,
                    bound: values.into_iter().fold(XPos::one(), XPos::max),
                })
                .with_note("declared monotone tail with last ratio <= 1"),
            Order::Zero => cx.vanishing(n, "declared monotone tail with last ratio < 1"),
            Order::Finite(k) => {
                let partial = sum(values[..values.len() - 1].iter().map(|v| v.powi(k)), cx.limits);
                let last_p = last.powi(k);
                let ratio = rho.powi(k);
                let gap = XPos::one()
                    .checked_sub(&ratio)
                    .unwrap_or(XPos::approx(0.0, cx.limits.tol));
                let total = partial.add(&last_p.div(&gap));
                cx.holds(Certificate::Summable {
                    level: n,
                    order: cx.p,
                    series: SeriesBound::TailGeometric {
                        from: h,
                        partial,
                        last: last_p,
                        ratio,
                        sum: total,
                    },
                })
                .with_note("declared monotone tail: v_n(j) <= v_n(H)·rho^(j-H) beyond the horizon")
            }
        });
    }
    Ok(cx.unknown(
        UnknownReason::Horizon,
        "no searched level is finite with a tail ratio below 1 at the horizon",
    ))
}
