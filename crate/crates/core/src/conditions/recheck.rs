//! Independent pointwise re-verification of certificates and witnesses.

use crate::index::Index;
use crate::order::Order;
use crate::verdict::{Certificate, LevelBound, LowerBound, SeriesBound, SumSide, Verdict, Witness};
use crate::weights::WeightFamily;
use crate::xpos::{Cmp3, XPos};

use super::powx_neg;

/// Largest number of enumerated indices inspected.
const RECHECK_INDICES: u64 = 2000;

/// Indices past the horizon inspected for a geometric tail bound.
const TAIL_SPAN: u64 = 50;

type Check = std::result::Result<(), String>;

/// Re-evaluates every claim of `v` against `f` on a finite sample.
///
/// For Montel verdicts pass the family restricted to the complement `T`,
/// for Banach verdicts the family restricted to `S`. Only definite violations
/// are reported; comparisons that tolerance cannot settle are accepted.
pub fn recheck(f: &WeightFamily, v: &Verdict, h: u64) -> Check {
    if !v.is_well_formed() {
        return Err("verdict is not well formed".into());
    }
    let samples = f.index_set().prefix(h.min(RECHECK_INDICES));
    let cx = Cx { f, samples };
    if let Some(c) = &v.certificate {
        cx.certificate(c, &[])?;
    }
    if let Some(w) = &v.witness {
        cx.witness(w, &[])?;
    }
    Ok(())
}

struct Cx<'a> {
    f: &'a WeightFamily,
    samples: Vec<Index>,
}

fn wrap(path: &[SumSide], idx: &Index) -> Index {
    path.iter().rev().fold(idx.clone(), |i, s| s.wrap(i))
}

fn on_path(path: &[SumSide], idx: &Index) -> bool {
    let mut cur = idx;
    for s in path {
        cur = match (s, cur) {
            (SumSide::Left, Index::Left(x)) | (SumSide::Right, Index::Right(x)) => x,
            _ => return false,
        };
    }
    true
}

fn violated(c: Cmp3, want_le: bool) -> bool {
    match c {
        Cmp3::Indeterminate => false,
        c if want_le => c.le() == Some(false),
        c => c.ge() == Some(false),
    }
}

fn power(v: &XPos, p: Order) -> XPos {
    match p {
        Order::Finite(k) => v.powi(k),
        _ => v.clone(),
    }
}

fn show(i: &Index) -> String {
    format!("{i}")
}

impl Cx<'_> {
    fn v(&self, n: u32, i: &Index) -> std::result::Result<XPos, String> {
        self.f.eval(n, i).map_err(|e| e.to_string())
    }

    fn on<'s>(&'s self, path: &'s [SumSide]) -> impl Iterator<Item = &'s Index> + 's {
        self.samples.iter().filter(move |i| on_path(path, i))
    }

    fn le(&self, a: &XPos, b: &XPos, what: impl FnOnce() -> String) -> Check {
        if violated(a.cmp3(b), true) {
            return Err(format!("{}: {} > {}", what(), a.to_f64(), b.to_f64()));
        }
        Ok(())
    }

    fn ge(&self, a: &XPos, b: &XPos, what: impl FnOnce() -> String) -> Check {
        if violated(a.cmp3(b), false) {
            return Err(format!("{}: {} < {}", what(), a.to_f64(), b.to_f64()));
        }
        Ok(())
    }

    fn certificate(&self, c: &Certificate, path: &[SumSide]) -> Check {
        match c {
            Certificate::W3 { witness_map, .. } => {
                for t in witness_map {
                    for i in self.on(path) {
                        let r = self.v(t.m, i)?.div(&self.v(t.n, i)?.powi(2));
                        self.le(&r, &t.bound, || format!("v_{}/v_{}^2 at {}", t.m, t.n, show(i)))?;
                    }
                }
            }
            Certificate::Bounded { level, bound } => {
                for i in self.on(path) {
                    self.le(&self.v(*level, i)?, bound, || format!("v_{level} at {}", show(i)))?;
                }
            }
            Certificate::Summable {
                level,
                order,
                series,
            } => self.series(*level, *order, series, path)?,
            Certificate::Vanishing { level, samples, .. } => {
                for i in samples {
                    let i = wrap(path, i);
                    if self.v(*level, &i)?.is_infinite() {
                        return Err(format!("v_{level} is infinite at {}", show(&i)));
                    }
                }
            }
            Certificate::MontelObstruction {
                points,
                lower_bounds,
            } => self.obstruction(points, lower_bounds)?,
            Certificate::BanachRows { constants } => {
                for c in constants {
                    let n = c.level;
                    for i in self.on(path) {
                        let r = self.v(n, i)?.div(&self.v(n + 1, i)?);
                        self.le(&r, &c.bound, || format!("v_{n}/v_{} at {}", n + 1, show(i)))?;
                    }
                }
            }
            Certificate::DirectSum { left, right } => {
                self.certificate(left, &[path, &[SumSide::Left]].concat())?;
                self.certificate(right, &[path, &[SumSide::Right]].concat())?;
            }
            Certificate::Rule { .. } => {}
        }
        Ok(())
    }

    fn obstruction(&self, points: &[Index], lower_bounds: &[LevelBound]) -> Check {
        if points.is_empty() {
            return Err("obstruction lists no points".into());
        }
        for lb in lower_bounds {
            for p in points {
                let r = self.v(lb.level, p)?.div(&self.v(1, p)?);
                self.ge(&r, &lb.bound, || format!("v_{}/v_1 at {}", lb.level, show(p)))?;
            }
        }
        Ok(())
    }

    fn series(&self, n: u32, p: Order, s: &SeriesBound, path: &[SumSide]) -> Check {
        match s {
            SeriesBound::Finite { terms, sum } => {
                let mut total = XPos::zero();
                for t in terms {
                    total = total.add(&power(&self.v(n, &wrap(path, t))?, p));
                }
                self.le(&total, sum, || "finite sum".into())?;
            }
            SeriesBound::Geometric { first, ratio, .. } => {
                for i in self.on(path) {
                    let j = i.coordinate() as u32;
                    let bound = first.mul(&ratio.powi(j - 1));
                    self.le(&power(&self.v(n, i)?, p), &bound, || {
                        format!("geometric term at {}", show(i))
                    })?;
                }
            }
            SeriesBound::PSeries { coef, exponent, .. } => {
                for i in self.on(path) {
                    let j = XPos::int(i.coordinate() as i64);
                    let bound = coef.mul(&powx_neg(&j, exponent));
                    self.le(&power(&self.v(n, i)?, p), &bound, || {
                        format!("power-law term at {}", show(i))
                    })?;
                }
            }
            SeriesBound::TailGeometric {
                from,
                partial,
                last,
                ratio,
                ..
            } => {
                let mut total = XPos::zero();
                for j in 1..*from {
                    total = total.add(&power(&self.v(n, &wrap(path, &Index::Nat(j)))?, p));
                }
                self.le(&total, partial, || "partial sum".into())?;
                for j in *from..*from + TAIL_SPAN {
                    let i = wrap(path, &Index::Nat(j));
                    let bound = last.mul(&ratio.powi((j - from) as u32));
                    self.le(&power(&self.v(n, &i)?, p), &bound, || {
                        format!("tail term at {}", show(&i))
                    })?;
                }
            }
        }
        Ok(())
    }

    fn witness(&self, w: &Witness, path: &[SumSide]) -> Check {
        match w {
            Witness::RatioUnbounded {
                level,
                r_level,
                limit,
                samples,
            } => {
                self.le(&r_level.powi(2), limit, || format!("r_{level}^2 against R"))?;
                for s in samples {
                    let i = wrap(path, &s.index);
                    let r = self.v(s.m, &i)?.div(&self.v(*level, &i)?.powi(2));
                    self.ge(&r, &s.at_least, || format!("v_{}/v_{level}^2 at {}", s.m, show(&i)))?;
                }
            }
            Witness::Growth { samples } => {
                for s in samples {
                    let i = wrap(path, &s.index);
                    self.ge(&self.v(s.level, &i)?, &s.at_least, || {
                        format!("v_{} at {}", s.level, show(&i))
                    })?;
                }
            }
            Witness::InfiniteWeight { points } => {
                for p in points {
                    let i = wrap(path, &p.index);
                    if !self.v(p.level, &i)?.is_infinite() {
                        return Err(format!("v_{} is finite at {}", p.level, show(&i)));
                    }
                }
            }
            Witness::Divergence { order, rows, .. } => {
                for r in rows {
                    for p in &r.points {
                        let i = wrap(path, p);
                        let lower = match &r.lower {
                            LowerBound::Constant { value } => value.clone(),
                            LowerBound::PowerLaw { coef, exponent } => {
                                coef.mul(&powx_neg(&XPos::int(i.coordinate() as i64), exponent))
                            }
                        };
                        self.ge(&power(&self.v(r.level, &i)?, *order), &lower, || {
                            format!("divergent term v_{} at {}", r.level, show(&i))
                        })?;
                    }
                }
            }
            Witness::InfiniteRow { level, samples, .. } => {
                for s in samples {
                    let i = wrap(path, &s.index);
                    let r = self.v(*level, &i)?.div(&self.v(level + 1, &i)?);
                    self.ge(&r, &s.at_least, || format!("v_{level}/v_{} at {}", level + 1, show(&i)))?;
                }
            }
            Witness::NoObstruction { samples, .. } => {
                for s in samples {
                    let i = wrap(path, &s.index);
                    let r = self.v(s.m, &i)?.div(&self.v(1, &i)?);
                    self.le(&r, &s.at_most, || format!("v_{}/v_1 at {}", s.m, show(&i)))?;
                }
            }
            Witness::Obstruction {
                points,
                lower_bounds,
            } => self.obstruction(points, lower_bounds)?,
            Witness::Side { side, witness } => self.witness(witness, &[path, &[*side]].concat())?,
            Witness::DirectSum { left, right } => {
                self.witness(left, &[path, &[SumSide::Left]].concat())?;
                self.witness(right, &[path, &[SumSide::Right]].concat())?;
            }
        }
        Ok(())
    }
}
