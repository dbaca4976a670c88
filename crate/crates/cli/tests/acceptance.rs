//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use kothe::classify::{classify, ClassificationReport};
use kothe::conditions::{
    check_banach_rows, check_eventually_bounded, check_eventually_c0, check_eventually_lp, check_montel_obstruction,
    check_w3,
};
use kothe::verdict::{Certificate, Witness};
use kothe::weights::{parse_family_with, parse_file_with};
use kothe::witnesses::{approx_binf, no_split_witness, unbounded_witness, ApproxResult, NoSplitWitness, UnboundedWitness};
use kothe::xpos::{Cmp3, XPos};
use kothe::{Limits, Order, Outcome, Predicate, Verdict, WeightFamily};
use kothe_cli::gen;
use kothe_cli::suites::{run_suite, SuiteConfig, SuiteReport, DUAL_POWER, GRID};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Wall-clock budget per family in the classification table.
const CLASSIFY_BUDGET: Duration = Duration::from_secs(1);
/// Wall-clock budget of the full sign-pattern suite.
const RADEMACHER_BUDGET: Duration = Duration::from_secs(30);
/// Levels and indices of the base run in the horizon comparison.
const BASE_LEVELS: u32 = 10;
const BASE_HORIZON: u64 = 500;
const RANDOM_TABLES: usize = 20;
const ROUND_TRIPS: usize = 500;
const SEED: u64 = 2024;

struct Criterion {
    id: u32,
    name: &'static str,
    ok: bool,
    details: Vec<String>,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion {
            id,
            name,
            ok: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.ok = false;
            if self.details.len() < 10 {
                self.details.push(what());
            }
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    fn suite(&mut self, r: &SuiteReport) {
        self.check(r.passed(), || r.render());
        self.note(format!("{}: {} cases, {} failures", r.name, r.cases, r.failures.len()));
    }
}

fn families_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../families")
}

fn kothe(args: &[&str]) -> (Vec<u8>, Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_kothe"))
        .args(args)
        .current_dir(families_dir())
        .output()
        .expect("cannot run the kothe binary");
    (out.stdout, out.stderr, out.status.code().unwrap_or(-1))
}

fn outcome(r: &ClassificationReport, prop: &str) -> Option<Outcome> {
    r.entries()
        .into_iter()
        .find(|(name, _)| *name == prop)
        .map(|(_, p)| p.verdict.outcome)
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "classification table");
    let ta = "topologically_amenable";
    let mut cases: Vec<(&str, &str, &str, Outcome)> = vec![("phi", "1", ta, Outcome::Fails)];
    for fam in ["dual_power_1", "dual_power_2"] {
        for p in ["1", "2", "0", "inf"] {
            cases.push((fam, p, ta, Outcome::Fails));
        }
    }
    for p in ["inf", "1", "2"] {
        cases.push(("dual_power_0", p, "contractible", Outcome::Holds));
    }
    cases.extend([
        ("s_prime", "inf", "contractible", Outcome::Holds),
        ("hadamard_1", "inf", ta, Outcome::Fails),
        ("hadamard_0", "inf", "contractible", Outcome::Holds),
        ("dirsum_a1", "0", ta, Outcome::Holds),
        ("dirsum_a1", "0", "contractible", Outcome::Fails),
        ("dirsum_a2", "inf", ta, Outcome::Holds),
        ("dirsum_a2", "inf", "contractible", Outcome::Fails),
        ("nn", "inf", ta, Outcome::Holds),
        ("nn", "inf", "unital", Outcome::Holds),
        ("nn", "inf", "contractible", Outcome::Fails),
        ("nn", "0", ta, Outcome::Holds),
        ("nn", "0", "contractible", Outcome::Fails),
    ]);
    let mut slowest = Duration::ZERO;
    for (fam, p, prop, want) in &cases {
        let file = format!("{fam}.kf");
        let start = Instant::now();
        let (out, err, code) = kothe(&["classify", &file, "--p", p, "--json", "--levels", "20", "--horizon", "10000"]);
        let took = start.elapsed();
        slowest = slowest.max(took);
        c.check(code == 0, || format!("{fam} p={p}: exit {code}: {}", String::from_utf8_lossy(&err)));
        c.check(took < CLASSIFY_BUDGET, || format!("{fam} p={p}: {took:?}"));
        match serde_json::from_slice::<ClassificationReport>(&out) {
            Ok(r) => {
                let got = outcome(&r, prop);
                c.check(got == Some(*want), || format!("{fam} p={p}: {prop} = {got:?}, expected {want:?}"));
                c.check(r.check_invariants().is_ok(), || format!("{fam} p={p}: inconsistent report"));
            }
            Err(e) => c.check(false, || format!("{fam} p={p}: bad JSON: {e}")),
        }
    }
    c.note(format!("{} cases, slowest {:.0} ms", cases.len(), slowest.as_secs_f64() * 1e3));
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2, "rademacher identity");
    let cfg = SuiteConfig {
        seed: SEED,
        j: 12,
        count: Some(100),
        ..Default::default()
    };
    let start = Instant::now();
    match run_suite("rademacher", &cfg) {
        Ok(r) => {
            c.suite(&r);
            c.check(r.cases >= 1200, || format!("only {} cases", r.cases));
        }
        Err(e) => c.check(false, || e.to_string()),
    }
    let took = start.elapsed();
    c.check(took < RADEMACHER_BUDGET, || format!("took {took:?}"));
    c.note(format!("{:.1} s", took.as_secs_f64()));
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3, "section and projection algebra");
    let cfg = SuiteConfig {
        seed: SEED,
        count: Some(1000),
        ..Default::default()
    };
    for suite in ["section", "projection-bound"] {
        match run_suite(suite, &cfg) {
            Ok(r) => {
                c.suite(&r);
                c.check(r.cases >= 1000, || format!("{suite}: only {} cases", r.cases));
            }
            Err(e) => c.check(false, || e.to_string()),
        }
    }
    c
}

/// Sums the `N with J2 empty` counts reported by the approximation suite.
fn empty_j2_count(r: &SuiteReport) -> u64 {
    r.lines
        .iter()
        .filter_map(|l| {
            let head = l.split(" with J2 empty").next()?;
            head.rsplit(", ").next()?.parse::<u64>().ok()
        })
        .sum()
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new(4, "dense range approximation");
    let cfg = SuiteConfig {
        seed: SEED,
        count: Some(100),
        ..Default::default()
    };
    match run_suite("approx", &cfg) {
        Ok(r) => {
            c.suite(&r);
            let empty = empty_j2_count(&r);
            c.check(empty > 0, || "the empty J2 branch was never exercised".into());
            c.note(format!("{empty} runs with J2 empty"));
        }
        Err(e) => c.check(false, || e.to_string()),
    }
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new(5, "witness suites");
    let cfg = SuiteConfig {
        seed: SEED,
        ..Default::default()
    };
    match run_suite("witnesses", &cfg) {
        Ok(r) => c.suite(&r),
        Err(e) => c.check(false, || e.to_string()),
    }
    c
}

fn family(src: &str, limits: &Limits) -> WeightFamily {
    parse_family_with(src, limits).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new(6, "W3 certificates and Banach rows");
    let lim = Limits::default();
    for seq in ["1/j", "1/j^2", "1/2^j", "1/(j+1)", "2/(j+2)", "1/3^j"] {
        let f = family(&format!("g: grid {{ c(j) = {seq} }}"), &lim);
        let v = check_w3(&f, &lim).unwrap();
        let ok = match &v.certificate {
            Some(Certificate::W3 { witness_map, .. }) => {
                v.outcome == Outcome::Holds
                    && witness_map.len() == lim.levels as usize
                    && witness_map
                        .iter()
                        .enumerate()
                        .all(|(k, t)| t.n == k as u32 + 1 && t.m == 2 * t.n && t.bound.cmp3(&XPos::one()) == Cmp3::Equal)
            }
            _ => false,
        };
        c.check(ok, || format!("grid c(j) = {seq}: {v:?}"));
    }
    c.note("grid: (n, 2n, 1) for 6 sequences");

    let f = family("q: dual_power_series { R = 1/4; alpha(j) = j; r(n) = 1/4 + 1/n }", &lim);
    let v = check_w3(&f, &lim).unwrap();
    match &v.witness {
        Some(Witness::RatioUnbounded { r_level, .. }) if v.outcome == Outcome::Fails => {
            let above = r_level.cmp3(&XPos::ratio(1, 4)) == Cmp3::Greater;
            let below = r_level.mul(r_level).cmp3(&XPos::ratio(1, 4)).le() == Some(true);
            c.check(above && below, || format!("r = {r_level:?} outside (1/4, 1/2]"));
            c.note(format!("R = 1/4: fails with r = {}", r_level.to_f64()));
        }
        _ => c.check(false, || format!("R = 1/4: {v:?}")),
    }

    let grid = family(GRID, &lim);
    let v = check_banach_rows(&grid, &Predicate::Row(1), &lim).unwrap();
    c.check(v.outcome == Outcome::Fails, || format!("row 1: {:?}", v.outcome));
    let v = check_banach_rows(&grid, &Predicate::Diagonal, &lim).unwrap();
    let constants_ok = match &v.certificate {
        Some(Certificate::BanachRows { constants }) => {
            !constants.is_empty()
                && constants.iter().all(|b| {
                    let n = b.level as i64;
                    b.bound.cmp3(&XPos::int(n).powi(b.level + 1)) == Cmp3::Equal
                })
        }
        _ => false,
    };
    c.check(v.outcome == Outcome::Holds && constants_ok, || format!("diagonal: {v:?}"));
    c.note("Banach rows: row 1 fails, diagonal holds with C_n = n^(n+1)");
    c
}

fn random_tables() -> Vec<(String, WeightFamily)> {
    let mut g = gen::rng(SEED);
    let base = Limits::new(BASE_LEVELS, BASE_HORIZON);
    (0..RANDOM_TABLES)
        .map(|k| {
            let src = gen::table_source(&mut g, &format!("t{k}"));
            let f = family(&src, &base.doubled());
            (src, f)
        })
        .collect()
}

fn checkers(f: &WeightFamily, lim: &Limits) -> Vec<(&'static str, kothe::Result<Verdict>)> {
    vec![
        ("w3", check_w3(f, lim)),
        ("eventually_bounded", check_eventually_bounded(f, lim)),
        ("eventually_c0", check_eventually_c0(f, lim)),
        ("eventually_l1", check_eventually_lp(f, Order::Finite(1), lim)),
        ("eventually_l2", check_eventually_lp(f, Order::Finite(2), lim)),
        ("montel_obstruction", check_montel_obstruction(f, &Predicate::Empty, lim)),
    ]
}

fn flipped(a: Outcome, b: Outcome) -> bool {
    matches!((a, b), (Outcome::Holds, Outcome::Fails) | (Outcome::Fails, Outcome::Holds))
}

fn criterion_7(tables: &[(String, WeightFamily)]) -> Criterion {
    let mut c = Criterion::new(7, "monotone horizon");
    let base = Limits::new(BASE_LEVELS, BASE_HORIZON);
    let wide = base.doubled();
    let (mut decided, mut resolved) = (0, 0);
    for (src, f) in tables {
        for ((name, a), (_, b)) in checkers(f, &base).into_iter().zip(checkers(f, &wide)) {
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    c.check(!flipped(a.outcome, b.outcome), || {
                        format!("{src}: {name} {:?} -> {:?}", a.outcome, b.outcome)
                    });
                    decided += usize::from(a.outcome != Outcome::Unknown);
                    resolved += usize::from(a.outcome == Outcome::Unknown && b.outcome != Outcome::Unknown);
                }
                (Err(_), Err(_)) => {}
                (a, b) => c.check(false, || format!("{src}: {name} {:?} vs {:?}", a.err(), b.err())),
            }
        }
        for p in [Order::Zero, Order::Finite(1), Order::Infinity] {
            match (classify(f, p, &base), classify(f, p, &wide)) {
                (Ok(a), Ok(b)) => {
                    for ((name, x), (_, y)) in a.entries().into_iter().zip(b.entries()) {
                        c.check(!flipped(x.verdict.outcome, y.verdict.outcome), || {
                            format!("{src} p={p}: {name} {:?} -> {:?}", x.verdict.outcome, y.verdict.outcome)
                        });
                    }
                }
                (a, b) => c.check(false, || format!("{src} p={p}: {:?} / {:?}", a.err(), b.err())),
            }
        }
    }
    c.note(format!(
        "{} tables, {decided} decided checker runs at (N, H) = ({BASE_LEVELS}, {BASE_HORIZON}), {resolved} resolved by doubling",
        tables.len()
    ));
    c
}

fn round_trip<T: Serialize + DeserializeOwned + PartialEq>(value: &T) -> bool {
    let Ok(text) = serde_json::to_string_pretty(value) else {
        return false;
    };
    match serde_json::from_str::<T>(&text) {
        Ok(back) => back == *value && serde_json::to_string_pretty(&back).ok().as_deref() == Some(text.as_str()),
        Err(_) => false,
    }
}

fn criterion_8(tables: &[(String, WeightFamily)]) -> Criterion {
    let mut c = Criterion::new(8, "determinism and JSON round-trip");
    let seed = SEED.to_string();
    let runs: [&[&str]; 8] = [
        &["classify", "nn.kf", "--p", "0", "--json"],
        &["classify", "dirsum_a2.kf"],
        &["verify", "rademacher", "--J", "6", "--seed", &seed],
        &["verify", "section", "--seed", &seed, "--count", "200"],
        &["verify", "approx", "--seed", &seed, "--count", "20"],
        &["witness", "grid.kf", "nosplit", "--S", "triangular"],
        &["witness", "unboundedrow.kf", "unbounded", "-L", "8"],
        &["witness", "grid.kf", "approx", "--n", "2", "--a", r#"[[[1,3],"1/2","1"],[[2,1],"-3","0"]]"#],
    ];
    for args in runs {
        let first = kothe(args);
        let second = kothe(args);
        c.check(first == second, || format!("kothe {}: outputs differ", args.join(" ")));
        c.check(first.2 != 1, || format!("kothe {}: {}", args.join(" "), String::from_utf8_lossy(&first.1)));
    }
    c.note(format!("{} commands byte-identical across two runs", runs.len()));

    let lim = Limits::new(BASE_LEVELS, BASE_HORIZON);
    let orders = [Order::Zero, Order::Finite(1), Order::Finite(2), Order::Infinity];
    let mut count = 0usize;
    let tally = |c: &mut Criterion, count: &mut usize, ok: bool, what: &str| {
        *count += 1;
        c.check(ok, || format!("round trip failed: {what}"));
    };

    let mut builtins = Vec::new();
    for e in std::fs::read_dir(families_dir()).unwrap() {
        let src = std::fs::read_to_string(e.unwrap().path()).unwrap();
        builtins.extend(parse_file_with(&src, &lim).unwrap());
    }
    builtins.sort_by(|a, b| a.label.cmp(&b.label));
    for f in builtins.iter().chain(tables.iter().map(|(_, f)| f)) {
        for p in orders {
            let r: ClassificationReport = classify(f, p, &lim).unwrap();
            tally(&mut c, &mut count, round_trip(&r), &format!("report {} p={p}", f.label));
        }
    }

    let grid = family(GRID, &lim);
    let dual = family(DUAL_POWER, &lim);
    let unbounded_row = family(kothe_cli::suites::UNBOUNDED_ROW, &lim);
    for len in 1..=12 {
        for p in orders {
            let w: UnboundedWitness = unbounded_witness(&unbounded_row, p, len, &Limits::default()).unwrap();
            tally(&mut c, &mut count, round_trip(&w), &format!("unbounded L={len} p={p}"));
        }
    }
    for s in [Predicate::Empty, Predicate::Diagonal, Predicate::Triangular] {
        for m in 1..=10 {
            let w: NoSplitWitness = no_split_witness(&grid, &s, m, &lim).unwrap();
            tally(&mut c, &mut count, round_trip(&w), &format!("nosplit {s:?} m={m}"));
        }
    }
    let mut g = gen::rng(SEED);
    let eps = [
        BigRational::from_integer(BigInt::from(1)),
        BigRational::new(1.into(), 10.into()),
        BigRational::new(1.into(), 100.into()),
    ];
    let mut k = 0u64;
    while count < ROUND_TRIPS {
        let (f, support) = if k.is_multiple_of(2) {
            let size = 1 + (k % 6) as usize;
            (&grid, gen::pair_support(&mut g, size, 4, 12))
        } else {
            let size = 1 + (k % 5) as usize;
            (&dual, gen::nat_support(&mut g, size, 10))
        };
        let a = gen::finseq_on(&mut g, &support);
        let n = 1 + (k % 3) as u32;
        let e = &eps[(k % 3) as usize];
        let res: ApproxResult = approx_binf(f, &a, n, e, &lim).unwrap();
        tally(&mut c, &mut count, round_trip(&res), &format!("approx case {k}"));
        k += 1;
    }
    c.note(format!("{count} reports and witnesses round-tripped"));
    c
}

fn main() {
    let start = Instant::now();
    let tables = random_tables();
    let criteria: Vec<Box<dyn Fn() -> Criterion + '_>> = vec![
        Box::new(criterion_1),
        Box::new(criterion_2),
        Box::new(criterion_3),
        Box::new(criterion_4),
        Box::new(criterion_5),
        Box::new(criterion_6),
        Box::new(|| criterion_7(&tables)),
        Box::new(|| criterion_8(&tables)),
    ];
    let mut failed = 0;
    for run in criteria {
        let t = Instant::now();
        let c = run();
        let status = if c.ok { "PASS" } else { "FAIL" };
        println!("{status} [{}] {} ({:.2} s)", c.id, c.name, t.elapsed().as_secs_f64());
        for d in &c.details {
            for line in d.lines() {
                println!("       {line}");
            }
        }
        failed += usize::from(!c.ok);
    }
    println!(
        "acceptance: {} of 8 criteria passed in {:.1} s",
        8 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
