use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{gallop_levels, Leaf, Node, CITE_W3, SAMPLES};
use crate::error::Result;
use crate::index::Index;
use crate::limits::Limits;
use crate::verdict::{Certificate, RatioSample, UnknownReason, Verdict, W3Triple, Witness};
use crate::weights::expr::{Shape, Val};
use crate::weights::{DualPower, Kind, RSeq, Tail};
use crate::xpos::{Cmp3, XPos};

pub(super) fn check(node: &Node, limits: &Limits) -> Result<Verdict> {
    match node {
        Node::Leaf(l) => leaf(l, limits),
        Node::Sum(a, b) => {
            let (l, r) = (check(a, limits)?, check(b, limits)?);
            Ok(super::both(l, r, CITE_W3, limits, merge))
        }
    }
}

fn merge(a: Certificate, b: Certificate) -> Certificate {
    match (a, b) {
        (
            Certificate::W3 {
                witness_map: x,
                rule: ra,
            },
            Certificate::W3 {
                witness_map: y,
                rule: rb,
            },
        ) => Certificate::W3 {
            witness_map: x
                .into_iter()
                .zip(y)
                .map(|(s, t)| W3Triple {
                    n: s.n,
                    m: s.m.max(t.m),
                    bound: s.bound.max(t.bound),
                })
                .collect(),
            rule: format!("direct sum: larger m and C of both summands ({ra}; {rb})"),
        },
        (a, b) => Certificate::DirectSum {
            left: Box::new(a),
            right: Box::new(b),
        },
    }
}

fn triples(limits: &Limits, mut f: impl FnMut(u32) -> Result<(u32, XPos)>) -> Result<Vec<W3Triple>> {
    (1..=limits.levels)
        .map(|n| f(n).map(|(m, bound)| W3Triple { n, m, bound }))
        .collect()
}

fn holds(witness_map: Vec<W3Triple>, rule: &str, limits: &Limits) -> Verdict {
    Verdict::holds(
        Certificate::W3 {
            witness_map,
            rule: rule.into(),
        },
        CITE_W3,
        limits,
    )
}

/// `v/v^2` with `∞/∞ = 1`.
fn self_ratio(v: &XPos) -> XPos {
    if v.is_infinite() {
        XPos::one()
    } else {
        v.recip()
    }
}

fn max_self_ratio(leaf: &Leaf, n: u32, points: &[Index]) -> Result<XPos> {
    let mut c = XPos::one();
    for i in points {
        c = c.max(self_ratio(&leaf.v(n, i)?));
    }
    Ok(c)
}

fn leaf(leaf: &Leaf, limits: &Limits) -> Result<Verdict> {
    if let Some(members) = leaf.finite_members() {
        let t = triples(limits, |n| Ok((n, max_self_ratio(leaf, n, &members)?)))?;
        return Ok(holds(t, "finite index set: m = n, C = max 1/v_n", limits));
    }
    match &leaf.base.kind {
        Kind::Phi => {
            let t = triples(limits, |n| Ok((n, XPos::one())))?;
            Ok(holds(t, "v_n/v_n^2 = 1 on {j <= n} and inf/inf = 1 beyond", limits))
        }
        Kind::Grid(_) => {
            let t = triples(limits, |n| Ok((2 * n, XPos::one())))?;
            Ok(holds(t, "v_2n <= v_n^2 pointwise", limits))
        }
        Kind::DualPower(d) => dual_power(leaf, d, limits),
        Kind::Table(t) => match t.tail {
            Some(Tail::Constant(k)) => {
                let points: Vec<Index> = (1..=k).map(Index::Nat).collect();
                let t = triples(limits, |n| Ok((n, max_self_ratio(leaf, n, &points)?)))?;
                Ok(holds(
                    t,
                    "constant tail: v_n/v_n^2 = 1/v_n takes finitely many values",
                    limits,
                ))
            }
            Some(Tail::Monotone) => Ok(Verdict::unknown(
                UnknownReason::NoRule,
                CITE_W3,
                "a monotone tail does not determine sup v_m/v_n^2",
                limits,
            )),
            None => Ok(Verdict::unknown(
                UnknownReason::Horizon,
                CITE_W3,
                "explicit data without a tail rule only fixes finitely many values",
                limits,
            )),
        },
        Kind::Restriction { .. } | Kind::DirectSum(..) => unreachable!("normalized"),
    }
}

fn dual_power(leaf: &Leaf, d: &DualPower, limits: &Limits) -> Result<Verdict> {
    let first = leaf.first_members(1, limits.horizon);
    if let Shape::Const(_) = d.alpha_shape {
        let t = triples(limits, |n| Ok((n, max_self_ratio(leaf, n, &first)?)))?;
        return Ok(holds(t, "alpha constant: each v_n is constant", limits));
    }
    if d.limit >= BigRational::one() {
        let t = triples(limits, |n| Ok((n, XPos::one())))?;
        return Ok(holds(t, "R >= 1: v_n >= 1, so v_n/v_n^2 <= 1", limits));
    }
    if d.limit.is_zero() {
        let mut out = Vec::new();
        for n in 1..=limits.levels {
            match gallop_levels(n, |m| d.r_le_square(m, n))? {
                Ok(m) => out.push(W3Triple {
                    n,
                    m,
                    bound: XPos::one(),
                }),
                Err(reason) => {
                    return Ok(Verdict::unknown(
                        reason,
                        CITE_W3,
                        format!("no level m with r_m <= r_{n}^2 was certified"),
                        limits,
                    ))
                }
            }
        }
        return Ok(holds(out, "R = 0: r_m <= r_n^2 gives (r_m/r_n^2)^alpha <= 1", limits));
    }
    match d.alpha_shape.unbounded() {
        Some(true) => {}
        _ => {
            return Ok(Verdict::unknown(
                UnknownReason::NoRule,
                CITE_W3,
                "0 < R < 1 and alpha is not recognized as unbounded",
                limits,
            ))
        }
    }
    let n0 = match gallop_levels(1, |n| r_square_le_limit(d, n))? {
        Ok(n) => n,
        Err(reason) => {
            return Ok(Verdict::unknown(
                reason,
                CITE_W3,
                "no level with r_n^2 <= R was certified",
                limits,
            ))
        }
    };
    let r_level = d.r_value(n0)?.to_xpos(leaf.base.tol())?;
    let set = leaf.nat_set();
    let mut samples = Vec::new();
    for m in 1..=limits.levels {
        for t in 1..=SAMPLES as u32 {
            let target = XPos::pow2(t);
            let hit = Leaf::gallop(&set, |j| {
                let idx = Index::Nat(j);
                let ratio = leaf.v(m, &idx)?.div(&leaf.v(n0, &idx)?.powi(2));
                Ok(ratio.cmp3(&target).ge() == Some(true))
            })?;
            if let Some(j) = hit {
                samples.push(RatioSample {
                    m,
                    index: Index::Nat(j),
                    at_least: target,
                });
            }
        }
    }
    Ok(Verdict::fails(
        Witness::RatioUnbounded {
            level: n0,
            r_level,
            limit: XPos::from_rational(d.limit.clone()),
            samples,
        },
        CITE_W3,
        limits,
    )
    .with_note(format!(
        "r_{n0}^2 <= R < r_m for every m, so v_m/v_{n0}^2 >= (r_m/R)^alpha_j is unbounded"
    )))
}

/// Three-valued `r_n^2 <= R`.
fn r_square_le_limit(d: &DualPower, n: u32) -> Result<Option<bool>> {
    match (&d.r, d.r_value(n)?) {
        (RSeq::Ratio(_), Val::Q(r)) => Ok(Some(&r * &r <= d.limit)),
        _ => {
            let two_log = 2.0 * d.log_r(n)?.to_f64();
            let log_limit = crate::xpos::ln_rational(d.limit.clone());
            let c = XPos::approx(two_log.exp(), leaf_tol()).cmp3(&XPos::approx(log_limit.exp(), leaf_tol()));
            Ok(match c {
                Cmp3::Indeterminate => None,
                c => c.le(),
            })
        }
    }
}

fn leaf_tol() -> f64 {
    crate::xpos::DEFAULT_TOL
}
