//! Montel obstructions and the Banach property of row-restricted grid families.

use super::{Leaf, Node, CITE_BANACH, CITE_MONTEL, SAMPLES};
use crate::error::{Error, Result};
use crate::index::Index;
use crate::limits::Limits;
use crate::verdict::{
    Certificate, DecaySample, GrowthSample, LevelBound, UnknownReason, Verdict, Witness,
};
use crate::weights::expr::Shape;
use crate::weights::predicate::Predicate;
use crate::weights::{Kind, Tail, WeightFamily};
use crate::xpos::XPos;

/// Searches for an infinite `R` in the complement `T` of `s` with `inf_R v_m/v_1 > 0`
/// for every `m`. `Holds` means an obstruction was found, so `k_∞(T, V_T)` is not Montel.
pub fn check_montel_obstruction(f: &WeightFamily, s: &Predicate, limits: &Limits) -> Result<Verdict> {
    let t = Node::of(f).restrict(&Predicate::negate(s.clone()));
    check(&t, limits)
}

fn check(node: &Node, limits: &Limits) -> Result<Verdict> {
    match node {
        Node::Leaf(l) => leaf(l, limits),
        Node::Sum(a, b) => {
            let (l, r) = (check(a, limits)?, check(b, limits)?);
            Ok(super::either(l, r, CITE_MONTEL, limits))
        }
    }
}

fn no_obstruction(argument: &str, samples: Vec<DecaySample>, limits: &Limits) -> Verdict {
    Verdict::fails(
        Witness::NoObstruction {
            argument: argument.into(),
            samples,
        },
        CITE_MONTEL,
        limits,
    )
}

/// Indices `j` in `set` with `v_m/v_1 <= 2^-t`, for a few `m` and `t`.
fn decay_samples(leaf: &Leaf, limits: &Limits, mut point: impl FnMut(u64) -> Index) -> Result<Vec<DecaySample>> {
    let set = if leaf.is_grid() { None } else { Some(leaf.nat_set()) };
    let mut out = Vec::new();
    for m in 2..=limits.levels.min(3) {
        for t in 1..=2u32 {
            let target = XPos::pow2(t).recip();
            let hit = match &set {
                Some(set) => Leaf::gallop(set, |j| {
                    let i = point(j);
                    let r = leaf.v(m, &i)?.div(&leaf.v(1, &i)?);
                    Ok(r.cmp3(&target).le() == Some(true))
                })?,
                None => None,
            };
            if let Some(j) = hit {
                out.push(DecaySample {
                    m,
                    index: point(j),
                    at_most: target,
                });
            }
        }
    }
    Ok(out)
}

fn leaf(leaf: &Leaf, limits: &Limits) -> Result<Verdict> {
    if leaf.finite_members().is_some() {
        return Ok(no_obstruction("T is finite, so it contains no infinite R", Vec::new(), limits));
    }
    match &leaf.base.kind {
        Kind::Phi => Ok(no_obstruction(
            "v_1 = inf off {1} while v_m(j) = 1 for j <= m, so any infinite R has inf_R v_m/v_1 = 0 once m exceeds a point of R beyond 1; bounded sets are finite-dimensional",
            Vec::new(),
            limits,
        )),
        Kind::DualPower(d) => match d.alpha_shape.unbounded() {
            Some(true) => Ok(no_obstruction(
                "r_m < r_1 and alpha_j -> inf, so v_m/v_1 = (r_m/r_1)^alpha_j -> 0 (Schwartz)",
                decay_samples(leaf, limits, Index::Nat)?,
                limits,
            )),
            Some(false) if matches!(d.alpha_shape, Shape::Const(_)) => {
                let points = leaf.first_members(SAMPLES * 2, limits.horizon);
                let lower_bounds = (1..=limits.levels)
                    .map(|m| {
                        Ok(LevelBound {
                            level: m,
                            bound: leaf.v(m, &points[0])?.div(&leaf.v(1, &points[0])?),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Verdict::holds(
                    Certificate::MontelObstruction {
                        points,
                        lower_bounds,
                    },
                    CITE_MONTEL,
                    limits,
                )
                .with_note("alpha is constant, so v_m/v_1 is constant in j"))
            }
            _ => Ok(Verdict::unknown(
                UnknownReason::NoRule,
                CITE_MONTEL,
                "growth of alpha is not recognized",
                limits,
            )),
        },
        Kind::Grid(_) => grid(leaf, limits),
        Kind::Table(t) => match (t.arity, t.tail) {
            (1, Some(Tail::Constant(k))) => {
                let v1 = leaf.v(1, &Index::Nat(k))?;
                if v1.is_infinite() {
                    return Ok(no_obstruction(
                        "v_1 = inf on the tail while some v_m is finite there, so v_m/v_1 = 0 on the tail",
                        Vec::new(),
                        limits,
                    ));
                }
                let set = leaf.nat_set();
                let mut points = Vec::new();
                let mut j = k;
                while points.len() < SAMPLES * 2 {
                    match set.first_member_from(j) {
                        Some(m) => {
                            points.push(Index::Nat(m));
                            j = m + 1;
                        }
                        None => break,
                    }
                }
                let lower_bounds = (1..=limits.levels)
                    .map(|m| {
                        Ok(LevelBound {
                            level: m,
                            bound: leaf.v(m, &Index::Nat(k))?.div(&v1),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Verdict::holds(
                    Certificate::MontelObstruction {
                        points,
                        lower_bounds,
                    },
                    CITE_MONTEL,
                    limits,
                )
                .with_note("constant tail: v_m/v_1 = v_m(K)/v_1(K) > 0 on the tail"))
            }
            _ => Ok(Verdict::unknown(
                UnknownReason::Horizon,
                CITE_MONTEL,
                "explicit data without a constant tail does not decide the ratios",
                limits,
            )),
        },
        Kind::Restriction { .. } | Kind::DirectSum(..) => unreachable!("normalized"),
    }
}

fn grid(leaf: &Leaf, limits: &Limits) -> Result<Verdict> {
    let shape = leaf.shape();
    if !shape.infinitely_many_rows() {
        let rows = shape.rows_meeting_from(1, usize::MAX);
        let last = rows.iter().copied().max().unwrap_or(0) as u32;
        let mut samples = Vec::new();
        if let Some(&i) = rows.iter().find(|&&i| !leaf.row(i).is_finite()) {
            let m = last + 1;
            let set = leaf.row(i);
            for t in 1..=2u32 {
                let target = XPos::pow2(t).recip();
                let hit = Leaf::gallop(&set, |j| {
                    let idx = Index::Pair(i, j);
                    Ok(leaf.v(m, &idx)?.div(&leaf.v(1, &idx)?).cmp3(&target).le() == Some(true))
                })?;
                if let Some(j) = hit {
                    samples.push(DecaySample {
                        m,
                        index: Index::Pair(i, j),
                        at_most: target,
                    });
                }
            }
        }
        return Ok(no_obstruction(
            "T lies in finitely many rows; beyond them v_m/v_1 = c_j^m -> 0 along any infinite R",
            samples,
            limits,
        ));
    }
    let rows = shape.rows_meeting_from(1, (2 * limits.levels) as usize);
    let points: Vec<Index> = rows
        .iter()
        .filter_map(|&i| leaf.row(i).first_member_from(1).map(|j| Index::Pair(i, j)))
        .collect();
    let mut lower_bounds = Vec::new();
    for m in 1..=limits.levels {
        let mut lb = XPos::one();
        for p in &points {
            if p.row().is_some_and(|i| i < m as u64) {
                lb = lb.min(leaf.v(m, p)?.div(&leaf.v(1, p)?));
            }
        }
        lower_bounds.push(LevelBound { level: m, bound: lb });
    }
    Ok(Verdict::holds(
        Certificate::MontelObstruction {
            points,
            lower_bounds,
        },
        CITE_MONTEL,
        limits,
    )
    .with_note("R = {(n, j_n)} with j_n the smallest admissible column; v_m(n, j_n) = v_1(n, j_n) = 1 for n >= m"))
}

/// Whether `k_∞(S, V_S)` is a Banach space, for `f` a (restricted) grid family.
pub fn check_banach_rows(f: &WeightFamily, s: &Predicate, limits: &Limits) -> Result<Verdict> {
    let node = Node::of(f).restrict(s);
    let Node::Leaf(leaf) = node else {
        return Err(Error::Precondition("the Banach row criterion needs a grid family".into()));
    };
    if !matches!(leaf.base.kind, Kind::Grid(_)) {
        return Err(Error::Precondition("the Banach row criterion needs a grid family".into()));
    }
    let shape = leaf.shape();
    if let Some(k) = shape.first_infinite_row() {
        let set = leaf.row(k);
        let n = k as u32 + 1;
        let mut samples = Vec::new();
        for t in 1..=SAMPLES as u32 {
            let target = XPos::pow2(t);
            let hit = Leaf::gallop(&set, |j| {
                let idx = Index::Pair(k, j);
                Ok(leaf.v(n, &idx)?.div(&leaf.v(n + 1, &idx)?).cmp3(&target).ge() == Some(true))
            })?;
            if let Some(j) = hit {
                samples.push(GrowthSample {
                    level: n,
                    index: Index::Pair(k, j),
                    at_least: target,
                });
            }
        }
        return Ok(Verdict::fails(
            Witness::InfiniteRow {
                row: k,
                level: n,
                samples,
            },
            CITE_BANACH,
            limits,
        )
        .with_note(format!(
            "S meets row {k} in an infinite set; v_n/v_(n+1) = 1/c_j there for n > {k}, unbounded as c_j -> 0"
        )));
    }
    let mut constants = Vec::new();
    for n in 1..=limits.levels {
        let mut c = XPos::one();
        for i in 1..=n as u64 {
            for j in leaf.row(i).finite_members().unwrap_or_default() {
                let idx = Index::Pair(i, j);
                c = c.max(leaf.v(n, &idx)?.div(&leaf.v(n + 1, &idx)?));
            }
        }
        constants.push(LevelBound { level: n, bound: c });
    }
    Ok(Verdict::holds(
        Certificate::BanachRows { constants },
        CITE_BANACH,
        limits,
    )
    .with_note("every row of S is finite; C_n = max(1, max over S_n of v_n/v_(n+1)), and v_n = v_(n+1) = 1 outside S_n"))
}
