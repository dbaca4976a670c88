//! Randomized invariant suites over exact truncations.

use std::fmt::Write as _;

use kothe::tensoralg::{
    diagonal_projection, ker_pi_basis, multiply, pi, projection_norm_certificate, rademacher_decomposition, section,
    TruncTensor,
};
use kothe::truncation::FinSeq;
use kothe::weights::parse::parse_predicate;
use kothe::witnesses::{approx_binf, no_split_witness, unbounded_witness};
use kothe::{parse_family, Error, Index, Limits, Order, Predicate, WeightFamily, XPos};
use num_rational::BigRational;
use rand::Rng;

use crate::gen::{self, Gen};

pub const SUITES: [&str; 5] = ["rademacher", "section", "projection-bound", "approx", "witnesses"];

pub const GRID: &str = "grid: grid { c(j) = 1/j }";
pub const DUAL_POWER: &str = "dual_power: dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }";
pub const UNBOUNDED_ROW: &str = "unboundedrow: table { v(n, j) = j; tail = monotone }";

/// Built-in families addressable by name from the command line.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "grid" | "nn" => Some(GRID),
        "dual_power" | "dual_power_0" => Some(DUAL_POWER),
        "unboundedrow" => Some(UNBOUNDED_ROW),
        "phi" => Some("phi: phi"),
        "constant" => Some("constant: constant"),
        _ => None,
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Largest support size for the sign-pattern suite.
    pub j: u32,
    pub count: Option<u64>,
    pub families: Vec<WeightFamily>,
    pub eps: Option<BigRational>,
    pub limits: Limits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            j: 12,
            count: None,
            families: Vec::new(),
            eps: None,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub name: String,
    pub cases: u64,
    pub lines: Vec<String>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let _ = writeln!(s, "  {l}");
        }
        for f in self.failures.iter().filter(|f| !f.is_empty()) {
            let _ = writeln!(s, "  failure: {f}");
        }
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "{status} {} ({} cases, {} failures)",
            self.name,
            self.cases,
            self.failures.len()
        );
        s
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> kothe::Result<SuiteReport> {
    match name {
        "rademacher" => rademacher(cfg),
        "section" => Ok(section_algebra(cfg)),
        "projection-bound" => projection_bound(cfg),
        "approx" => approx(cfg),
        "witnesses" => witnesses(cfg),
        other => Err(Error::InvalidArgument(format!(
            "unknown suite {other:?} (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

fn family_or(cfg: &SuiteConfig, defaults: &[&str]) -> kothe::Result<Vec<WeightFamily>> {
    if !cfg.families.is_empty() {
        return Ok(cfg.families.clone());
    }
    defaults.iter().map(|s| parse_family(s)).collect()
}

/// Random support for `f`: pairs for grid-shaped index sets, naturals otherwise.
fn support_for(g: &mut Gen, f: &WeightFamily, size: usize) -> Vec<Index> {
    if f.index_set().is_grid() {
        gen::pair_support(g, size, 4, 12)
    } else {
        gen::nat_support(g, size, 10)
    }
}

/// The sign-pattern expansion of `x ⊗ y` equals `Σ x_j y_j e_j ⊗ e_j` exactly.
pub fn rademacher(cfg: &SuiteConfig) -> kothe::Result<SuiteReport> {
    let mut r = SuiteReport::new("rademacher");
    let count = cfg.count.unwrap_or(100);
    let mut g = gen::rng(cfg.seed);
    for size in 1..=cfg.j {
        let mut naive = 0;
        for _ in 0..count {
            let support = gen::nat_support(&mut g, size as usize, 3 * size as u64);
            let x = gen::finseq_on(&mut g, &support);
            let y = gen::finseq_on(&mut g, &support);
            let d = rademacher_decomposition(&x, &y, cfg.limits.j_max.max(cfg.j))?;
            let diag = section(&multiply(&x, &y));
            r.check(d.len() == 1 << size, || format!("J={size}: {} terms", d.len()));
            r.check(d.expand() == diag, || format!("J={size}: expansion differs from the diagonal tensor"));
            if size <= 6 {
                naive += 1;
                r.check(d.expand_naive() == diag, || format!("J={size}: term-by-term expansion differs"));
            }
            r.cases += 1;
        }
        r.lines.push(format!(
            "J={size}: {count} pairs, {} sign patterns each, exact equality ({naive} also term by term)",
            1u64 << size
        ));
    }
    Ok(r)
}

/// `P² = P`, `π∘P = π`, `π∘section = id`, `section(π(u)) - u` off-diagonal.
pub fn section_algebra(cfg: &SuiteConfig) -> SuiteReport {
    let mut r = SuiteReport::new("section");
    let count = cfg.count.unwrap_or(1000);
    let mut g = gen::rng(cfg.seed);
    for k in 0..count {
        let u = gen::tensor(&mut g, 8, 6);
        let p = diagonal_projection(&u);
        r.check(diagonal_projection(&p) == p, || format!("case {k}: P^2 != P"));
        r.check(pi(&p) == pi(&u), || format!("case {k}: pi(P u) != pi(u)"));
        let size = g.random_range(0..=6);
        let support = gen::nat_support(&mut g, size, 8);
        let a = gen::finseq_on(&mut g, &support);
        r.check(pi(&section(&a)) == a, || format!("case {k}: pi(section(a)) != a"));
        r.check(section(&pi(&u)).sub(&u).has_zero_diagonal(), || {
            format!("case {k}: section(pi(u)) - u has a diagonal entry")
        });
        let idx: Vec<Index> = (1..=3).map(Index::Nat).collect();
        let kernel = TruncTensor::from_entries(ker_pi_basis(&idx).into_iter().map(|ij| (ij, gen::gauss(&mut g))));
        r.check(pi(&kernel).is_zero(), || format!("case {k}: kernel element with nonzero product"));
        r.cases += 1;
    }
    r.lines.push(format!("{count} random tensors: P^2 = P, pi P = pi, pi section = id, section pi - id off-diagonal"));
    r
}

/// `‖P(x ⊗ y)‖ <= ‖x‖‖y‖` through the averaged sign-pattern representation.
pub fn projection_bound(cfg: &SuiteConfig) -> kothe::Result<SuiteReport> {
    let mut r = SuiteReport::new("projection-bound");
    let count = cfg.count.unwrap_or(100);
    let mut g = gen::rng(cfg.seed);
    for f in family_or(cfg, &[GRID, DUAL_POWER])? {
        let mut per_order = [0u64; 3];
        for k in 0..count {
            let size = g.random_range(1..=6);
            let support = support_for(&mut g, &f, size);
            let x = gen::finseq_on(&mut g, &support);
            let y = gen::finseq_on(&mut g, &support);
            let n = g.random_range(1..=4);
            let slot = g.random_range(0..3);
            let p = [Order::Finite(1), Order::Finite(2), Order::Infinity][slot];
            per_order[slot] += 1;
            match projection_norm_certificate(&f, n, p, &x, &y, cfg.limits.j_max) {
                Ok(c) => {
                    let product = c.x_norm.mul(&c.y_norm);
                    r.check(c.bound == product, || {
                        format!("{} case {k}: bound {} != {}", f.label, c.bound, product)
                    });
                }
                Err(e) => r.check(false, || format!("{} case {k}: {e}", f.label)),
            }
            r.cases += 1;
        }
        r.lines.push(format!(
            "{}: {count} pairs (p=1: {}, p=2: {}, p=inf: {}), every sign pattern preserves the norms",
            f.label, per_order[0], per_order[1], per_order[2]
        ));
    }
    Ok(r)
}

/// Bounds and monotonicity of the cut-off approximation `b^ε`.
pub fn approx(cfg: &SuiteConfig) -> kothe::Result<SuiteReport> {
    let mut r = SuiteReport::new("approx");
    let count = cfg.count.unwrap_or(100);
    let eps_list: Vec<BigRational> = match &cfg.eps {
        Some(e) => vec![e.clone()],
        None => ["1", "1/10", "1/100"]
            .iter()
            .map(|s| kothe::xpos::parse_rational(s).expect("literal"))
            .collect(),
    };
    let mut g = gen::rng(cfg.seed);
    for f in family_or(cfg, &[GRID, DUAL_POWER])? {
        let mut kept = vec![0usize; eps_list.len()];
        let mut untouched = vec![0u64; eps_list.len()];
        let mut exact = vec![0u64; eps_list.len()];
        for k in 0..count {
            let size = g.random_range(1..=6);
            let support = support_for(&mut g, &f, size);
            let a = gen::finseq_on(&mut g, &support);
            let n = g.random_range(1..=3);
            let mut prev: Option<FinSeq> = None;
            for (e, eps) in eps_list.iter().enumerate() {
                let res = match approx_binf(&f, &a, n, eps, &cfg.limits) {
                    Ok(res) => res,
                    Err(err) => {
                        r.check(false, || format!("{} case {k}: {err}", f.label));
                        continue;
                    }
                };
                let all_exact = res.inequalities.iter().all(|i| i.exact && i.holds() == Some(true));
                r.check(all_exact, || format!("{} case {k} eps={eps}: bound not exact or violated", f.label));
                exact[e] += all_exact as u64;
                if res.dropped.is_empty() {
                    untouched[e] += 1;
                    let same = res.b == a
                        && serde_json::to_string(&res.b).ok() == serde_json::to_string(&a).ok();
                    r.check(same, || format!("{} case {k}: empty J2 but b != a", f.label));
                }
                if let Some(p) = &prev {
                    let grows = p.support().all(|i| res.b.support().any(|j| j == i));
                    r.check(grows, || format!("{} case {k}: supp(b) shrank at eps={eps}", f.label));
                }
                kept[e] += res.b.len();
                prev = Some(res.b);
            }
            r.cases += 1;
        }
        for (e, eps) in eps_list.iter().enumerate() {
            r.lines.push(format!(
                "{} eps={}: {count} sequences, {} with exact bounds, {} with J2 empty, mean |supp b| = {:.2}",
                f.label,
                kothe::xpos::format_rational(eps),
                exact[e],
                untouched[e],
                kept[e] as f64 / count as f64
            ));
        }
    }
    Ok(r)
}

/// Unbounded and no-split witnesses, recomputed pointwise.
pub fn witnesses(cfg: &SuiteConfig) -> kothe::Result<SuiteReport> {
    let mut r = SuiteReport::new("witnesses");
    let lim = &cfg.limits;
    let row = parse_family(UNBOUNDED_ROW)?;
    let len = 10;
    let w = unbounded_witness(&row, Order::Infinity, len, lim)?;
    let increasing = w.indices.windows(2).all(|p| p[0] < p[1]);
    r.check(increasing && w.indices.len() == len as usize, || "indices not strictly increasing".into());
    for (l, j) in (1..=len).zip(&w.indices) {
        for k in 1..=l {
            let ok = row.eval(k, j)?.cmp3(&XPos::pow2(l)).ge() == Some(true);
            r.check(ok, || format!("v_{k}({j}) < 2^{l}"));
            r.cases += 1;
        }
    }
    r.lines.push(format!(
        "{}: L={len}, j_l = {}, v_k(j_l) >= 2^l for all k <= l",
        row.label,
        w.indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
    ));

    for src in ["constant: constant", GRID, "bounded: table { v(n, j) = 1/n + 1/j; tail = constant(50) }"] {
        let f = parse_family(src)?;
        let res = unbounded_witness(&f, Order::Finite(1), 5, lim);
        let ok = matches!(res, Err(Error::EventuallyBounded { .. }));
        r.check(ok, || format!("{}: expected the eventually bounded error", f.label));
        r.cases += 1;
        r.lines.push(format!("{}: eventually bounded, no unbounded witness", f.label));
    }

    let grid = parse_family(GRID)?;
    let m_max = 10;
    for s in ["none", "diagonal", "triangular"] {
        let pred: Predicate = parse_predicate(s)?;
        let w = no_split_witness(&grid, &pred, m_max, lim)?;
        for p in &w.points {
            r.check(!pred.contains(p), || format!("S={s}: {p} lies in S"));
        }
        let mut checked = 0;
        for m in 1..=m_max {
            for p in &w.points {
                if p.row().unwrap_or(0) >= m as u64 {
                    let ok = grid.eval(m, p)? == XPos::one();
                    r.check(ok, || format!("S={s}: v_{m}{p} != 1"));
                    checked += 1;
                }
            }
        }
        for b in &w.lower_bounds {
            r.check(b.bound.cmp3(&XPos::zero()).gt() == Some(true), || {
                format!("S={s}: inf v_{}/v_1 not positive", b.level)
            });
        }
        r.cases += checked;
        r.lines.push(format!(
            "S={s}: R = {} ..., {checked} equalities v_m(n, j_n) = 1 for n >= m, m <= {m_max}",
            w.points.iter().take(4).map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
        ));
    }
    Ok(r)
}
