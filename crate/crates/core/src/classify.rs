//! Classification of `k_p(V)` from the weight conditions, with the chain of
//! implications behind every verdict.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_eventually_bounded, check_eventually_c0, check_eventually_lp, check_montel_obstruction, check_w3,
};
use crate::error::Result;
use crate::limits::Limits;
use crate::order::Order;
use crate::verdict::{Certificate, Horizon, Outcome, UnknownReason, Verdict, Witness};
use crate::weights::predicate::Predicate;
use crate::weights::{Kind, WeightFamily};

pub const SCHEMA_VERSION: u32 = 1;

pub const CITE_FINITE_ORDER: &str = "for 1 <= p < inf: k_p(V) topologically amenable iff amenable iff contractible \
     iff unital iff V eventually in l_1 iff (V eventually bounded and k_p(V) nuclear)";
pub const CITE_SUP_ORDER: &str = "for p in {0, inf}: k_p(V) topologically amenable iff V eventually bounded";
pub const CITE_UNITAL_INF: &str = "k_inf(V) is unital iff the constant sequence 1 lies in some l_inf(v_n)";
pub const CITE_UNITAL_ZERO: &str = "k_0(V) is unital iff the constant sequence 1 lies in some c_0(v_n)";
pub const CITE_CONTR_TA: &str = "every contractible algebra is topologically amenable";
pub const CITE_CONTR_UNITAL: &str = "every contractible algebra is unital";
pub const CITE_SCHWARTZ: &str = "a unital co-echelon algebra of order inf which is a Schwartz space is contractible; \
     dual power series spaces, their restrictions and finite direct sums are Schwartz spaces";
pub const CITE_MONTEL_CONTR: &str = "a contractible co-echelon algebra of order inf is a Montel space";
pub const CITE_CONTR_AMEN: &str = "every contractible algebra is amenable";
pub const CITE_AMEN_TA: &str = "every amenable algebra is topologically amenable";
pub const CITE_OPEN_AMEN: &str =
    "no criterion separating amenability from topological amenability is known for orders 0 and inf";
pub const CITE_OPEN_CONTR: &str = "contractibility at orders 0 and inf is decided only by the one-directional rules";
pub const CITE_NUCLEAR_SUP: &str = "if V is eventually in l_1 then k_p(V) = k_1(V) for all p, and k_1(V) is nuclear";
pub const CITE_NUCLEAR_GAP: &str = "nuclearity is only derived from eventual l_1 membership";
pub const CITE_NOT_ALGEBRA: &str = "the classification applies to co-echelon algebras, which requires (W3)";

pub const NOTE_K0_GRID: &str = "k_0 of this grid family is not complete (cited, not computed)";
pub const NOTE_KINF_GRID: &str = "conjectured: the underlying space of k_inf of this grid family is not a direct sum \
     of a normed algebra and a contractible co-echelon algebra";
pub const NOTE_DENSITY_ZERO: &str =
    "density of the unitization map at order 0 follows from the common Schauder basis (cited)";

/// A verdict together with the implications used to reach it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub verdict: Verdict,
    pub citation_chain: Vec<String>,
}

impl Property {
    fn base(v: Verdict) -> Self {
        let chain = vec![v.rule_citation.clone()];
        Property {
            verdict: v,
            citation_chain: chain,
        }
    }

    /// The outcome of `self` carried over by one more implication.
    fn then(&self, citation: &str) -> Self {
        let mut chain = self.citation_chain.clone();
        chain.push(citation.to_string());
        Property {
            verdict: self.verdict.derived(citation),
            citation_chain: chain,
        }
    }

    fn outcome(&self) -> Outcome {
        self.verdict.outcome
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub schema_version: u32,
    pub family: String,
    pub order: Order,
    pub horizon: Horizon,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_algebra: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unital: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eventually_bounded: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eventually_l1: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nuclear: Option<Property>,
    /// The sixth equivalent condition at finite order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded_and_nuclear: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montel_obstruction: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topologically_amenable: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amenable: Option<Property>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contractible: Option<Property>,
    #[serde(default)]
    pub annotations: Vec<String>,
}

impl ClassificationReport {
    pub fn empty(family: impl Into<String>, order: Order, limits: &Limits) -> Self {
        ClassificationReport {
            schema_version: SCHEMA_VERSION,
            family: family.into(),
            order,
            horizon: limits.into(),
            is_algebra: None,
            unital: None,
            eventually_bounded: None,
            eventually_l1: None,
            nuclear: None,
            bounded_and_nuclear: None,
            montel_obstruction: None,
            topologically_amenable: None,
            amenable: None,
            contractible: None,
            annotations: Vec::new(),
        }
    }

    /// Properties in display order.
    pub fn entries(&self) -> Vec<(&'static str, &Property)> {
        [
            ("is_algebra", &self.is_algebra),
            ("eventually_bounded", &self.eventually_bounded),
            ("eventually_l1", &self.eventually_l1),
            ("unital", &self.unital),
            ("nuclear", &self.nuclear),
            ("bounded_and_nuclear", &self.bounded_and_nuclear),
            ("montel_obstruction", &self.montel_obstruction),
            ("topologically_amenable", &self.topologically_amenable),
            ("amenable", &self.amenable),
            ("contractible", &self.contractible),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.as_ref().map(|p| (k, p)))
        .collect()
    }

    /// `2` when some verdict is open for lack of resources or rules, `0` otherwise.
    pub fn exit_code(&self) -> i32 {
        let open = self.entries().iter().any(|(_, p)| {
            p.verdict.is_unknown() && p.verdict.unknown_reason.is_none_or(UnknownReason::is_resolvable)
        });
        if open {
            2
        } else {
            0
        }
    }

    /// Checks the implications every report must satisfy.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let out = |p: &Option<Property>| p.as_ref().map(Property::outcome);
        let ta = out(&self.topologically_amenable);
        for (name, p) in [("contractible", &self.contractible), ("amenable", &self.amenable)] {
            if out(p) == Some(Outcome::Holds) && ta != Some(Outcome::Holds) {
                return Err(format!("{name} holds but topological amenability does not"));
            }
        }
        if out(&self.contractible) == Some(Outcome::Holds) && out(&self.amenable) != Some(Outcome::Holds) {
            return Err("contractible holds but amenable does not".into());
        }
        let algebra = out(&self.is_algebra) == Some(Outcome::Holds);
        if algebra && self.order.is_finite() {
            let six = [
                &self.topologically_amenable,
                &self.amenable,
                &self.contractible,
                &self.unital,
                &self.eventually_l1,
                &self.bounded_and_nuclear,
            ];
            if six.iter().any(|p| out(p) != ta) {
                return Err("the six finite-order properties disagree".into());
            }
        }
        if algebra && !self.order.is_finite() && ta != out(&self.eventually_bounded) {
            return Err("topological amenability differs from eventual boundedness".into());
        }
        for (name, p) in self.entries() {
            if !p.verdict.is_well_formed() {
                return Err(format!("{name} is not well formed"));
            }
        }
        Ok(())
    }
}

fn rule(statement: &str, chain: Vec<String>, limits: &Limits, outcome: Outcome) -> Property {
    let v = match outcome {
        Outcome::Holds => Verdict::holds(
            Certificate::Rule {
                statement: statement.into(),
            },
            statement,
            limits,
        ),
        _ => unreachable!("rule verdicts are positive"),
    };
    let mut chain = chain;
    chain.push(statement.into());
    Property {
        verdict: v,
        citation_chain: chain,
    }
}

fn open(reason: UnknownReason, citation: &str, note: &str, chain: Vec<String>, limits: &Limits) -> Property {
    let mut chain = chain;
    chain.push(citation.into());
    Property {
        verdict: Verdict::unknown(reason, citation, note, limits),
        citation_chain: chain,
    }
}

/// Unknown verdicts propagated through a rule keep their reason.
fn unknown_from(p: &Property, citation: &str, limits: &Limits) -> Property {
    let reason = p.verdict.unknown_reason.unwrap_or(UnknownReason::NoRule);
    open(
        reason,
        citation,
        p.verdict.note.as_deref().unwrap_or("undecided premise"),
        p.citation_chain.clone(),
        limits,
    )
}

/// Dual power series spaces, possibly restricted or summed.
fn schwartz_kind(f: &WeightFamily) -> bool {
    match &f.kind {
        Kind::DualPower(_) => true,
        Kind::Restriction { base, .. } => schwartz_kind(base),
        Kind::DirectSum(a, b) => schwartz_kind(a) && schwartz_kind(b),
        _ => false,
    }
}

fn is_grid(f: &WeightFamily) -> bool {
    matches!(f.kind, Kind::Grid(_))
}

pub fn classify(f: &WeightFamily, p: Order, limits: &Limits) -> Result<ClassificationReport> {
    limits.validate()?;
    let mut r = ClassificationReport::empty(f.label.clone(), p, limits);
    let w3 = Property::base(check_w3(f, limits)?);
    let w3_outcome = w3.outcome();
    r.is_algebra = Some(w3.clone());
    if w3_outcome == Outcome::Fails {
        return Ok(r);
    }
    let eb = Property::base(check_eventually_bounded(f, limits)?);
    let el1 = Property::base(check_eventually_lp(f, Order::Finite(1), limits)?);
    r.eventually_bounded = Some(eb.clone());
    r.eventually_l1 = Some(el1.clone());
    if w3_outcome == Outcome::Unknown {
        for slot in [
            &mut r.unital,
            &mut r.topologically_amenable,
            &mut r.amenable,
            &mut r.contractible,
        ] {
            *slot = Some(unknown_from(&w3, CITE_NOT_ALGEBRA, limits));
        }
        return Ok(r);
    }
    match p {
        Order::Finite(_) => classify_finite(&mut r, &eb, &el1, limits),
        Order::Zero | Order::Infinity => classify_sup(&mut r, f, &eb, &el1, limits)?,
    }
    if is_grid(f) {
        match p {
            Order::Zero => r.annotations.push(NOTE_K0_GRID.into()),
            Order::Infinity => r.annotations.push(NOTE_KINF_GRID.into()),
            _ => {}
        }
    }
    if p == Order::Zero && r.topologically_amenable.as_ref().map(Property::outcome) == Some(Outcome::Holds) {
        r.annotations.push(NOTE_DENSITY_ZERO.into());
    }
    Ok(r)
}

fn classify_finite(r: &mut ClassificationReport, eb: &Property, el1: &Property, limits: &Limits) {
    let eq = el1.then(CITE_FINITE_ORDER);
    r.topologically_amenable = Some(eq.clone());
    r.amenable = Some(eq.clone());
    r.contractible = Some(eq.clone());
    r.unital = Some(eq.clone());
    r.bounded_and_nuclear = Some(eq.clone());
    r.nuclear = Some(match (el1.outcome(), eb.outcome()) {
        (Outcome::Holds, _) => eq,
        // bounded but not eventually l_1 forces non-nuclearity
        (Outcome::Fails, Outcome::Holds) => el1.then(CITE_FINITE_ORDER),
        _ => open(
            UnknownReason::CitationGap,
            CITE_NUCLEAR_GAP,
            "V is neither eventually l_1 nor eventually bounded",
            el1.citation_chain.clone(),
            limits,
        ),
    });
}

fn classify_sup(
    r: &mut ClassificationReport,
    f: &WeightFamily,
    eb: &Property,
    el1: &Property,
    limits: &Limits,
) -> Result<()> {
    let p = r.order;
    let ta = eb.then(CITE_SUP_ORDER);
    let unital = if p == Order::Infinity {
        eb.then(CITE_UNITAL_INF)
    } else {
        Property::base(check_eventually_c0(f, limits)?).then(CITE_UNITAL_ZERO)
    };
    let montel = (p == Order::Infinity)
        .then(|| check_montel_obstruction(f, &Predicate::Empty, limits).map(Property::base))
        .transpose()?;

    let contractible = if ta.outcome() == Outcome::Fails {
        ta.then(CITE_CONTR_TA)
    } else if unital.outcome() == Outcome::Fails {
        unital.then(CITE_CONTR_UNITAL)
    } else if p == Order::Infinity && unital.outcome() == Outcome::Holds && schwartz_kind(f) {
        rule(CITE_SCHWARTZ, unital.citation_chain.clone(), limits, Outcome::Holds)
    } else if let Some(m) = montel.as_ref().and_then(montel_contradiction) {
        m
    } else if let Some(u) = [&ta, &unital]
        .into_iter()
        .chain(montel.as_ref())
        .find(|x| x.verdict.is_unknown() && x.verdict.unknown_reason.is_none_or(UnknownReason::is_resolvable))
    {
        unknown_from(u, CITE_OPEN_CONTR, limits)
    } else {
        open(
            UnknownReason::CitationGap,
            CITE_OPEN_CONTR,
            "no proved rule decides contractibility here",
            Vec::new(),
            limits,
        )
    };

    let amenable = match (contractible.outcome(), ta.outcome()) {
        (Outcome::Holds, _) => contractible.then(CITE_CONTR_AMEN),
        (_, Outcome::Fails) => ta.then(CITE_AMEN_TA),
        (_, Outcome::Unknown) => unknown_from(&ta, CITE_AMEN_TA, limits),
        _ => open(
            UnknownReason::CitationGap,
            CITE_OPEN_AMEN,
            "topologically amenable; amenability is open",
            ta.citation_chain.clone(),
            limits,
        ),
    };

    let nuclear = match el1.outcome() {
        Outcome::Holds => el1.then(CITE_NUCLEAR_SUP),
        _ => open(
            UnknownReason::CitationGap,
            CITE_NUCLEAR_GAP,
            "V is not shown to be eventually l_1",
            el1.citation_chain.clone(),
            limits,
        ),
    };

    r.topologically_amenable = Some(ta);
    r.unital = Some(unital);
    r.montel_obstruction = montel;
    r.contractible = Some(contractible);
    r.amenable = Some(amenable);
    r.nuclear = Some(nuclear);
    Ok(())
}

/// A Montel obstruction refutes contractibility; the obstruction is the witness.
fn montel_contradiction(m: &Property) -> Option<Property> {
    let Some(Certificate::MontelObstruction { points, lower_bounds }) = &m.verdict.certificate else {
        return None;
    };
    let mut chain = m.citation_chain.clone();
    chain.push(CITE_MONTEL_CONTR.into());
    let mut verdict = Verdict::fails(
        Witness::Obstruction {
            points: points.clone(),
            lower_bounds: lower_bounds.clone(),
        },
        CITE_MONTEL_CONTR,
        &Limits::default(),
    );
    verdict.horizon = m.verdict.horizon;
    Some(Property {
        verdict,
        citation_chain: chain,
    })
}

fn summarize_certificate(c: &Certificate) -> String {
    match c {
        Certificate::W3 { witness_map, rule } => {
            let triples: Vec<String> = witness_map
                .iter()
                .map(|t| format!("({}, {}, {})", t.n, t.m, t.bound))
                .collect();
            format!("v_m <= C v_n^2 with (n, m, C) = {} [{rule}]", triples.join(", "))
        }
        Certificate::Bounded { level, bound } => format!("v_{level} <= {bound}"),
        Certificate::Summable { level, order, series } => {
            format!("sum v_{level}^{order} <= {}", series.sum())
        }
        Certificate::Vanishing { level, reason, .. } => format!("v_{level} -> 0 ({reason})"),
        Certificate::MontelObstruction { points, lower_bounds } => {
            format!("{} listed points with v_m/v_1 bounded below at {} levels", points.len(), lower_bounds.len())
        }
        Certificate::BanachRows { constants } => format!("v_n <= C_n v_(n+1) at {} levels", constants.len()),
        Certificate::DirectSum { left, right } => {
            format!("left: {}; right: {}", summarize_certificate(left), summarize_certificate(right))
        }
        Certificate::Rule { statement } => format!("rule: {statement}"),
    }
}

fn summarize_witness(w: &Witness) -> String {
    match w {
        Witness::RatioUnbounded { level, r_level, limit, samples } => format!(
            "r_{level} = {r_level} with r_{level}^2 <= R = {limit}; {} growth samples of v_m/v_{level}^2",
            samples.len()
        ),
        Witness::Growth { samples } => match samples.last() {
            Some(s) => format!("v_{}({}) >= {} ({} samples)", s.level, s.index, s.at_least, samples.len()),
            None => "growth".into(),
        },
        Witness::InfiniteWeight { points } => match points.first() {
            Some(p) => format!("v_{}({}) = inf ({} points)", p.level, p.index, points.len()),
            None => "infinite weights".into(),
        },
        Witness::Divergence { order, rows, argument } => {
            format!("sum v_n^{order} diverges at {} levels: {argument}", rows.len())
        }
        Witness::InfiniteRow { row, level, .. } => format!("row {row} is infinite; v_{level}/v_{} unbounded", level + 1),
        Witness::NoObstruction { argument, .. } => format!("no obstruction: {argument}"),
        Witness::Obstruction { points, lower_bounds } => format!(
            "infinite set with v_m/v_1 bounded below ({} points, {} levels)",
            points.len(),
            lower_bounds.len()
        ),
        Witness::Side { side, witness } => format!("{side:?} summand: {}", summarize_witness(witness)),
        Witness::DirectSum { left, right } => {
            format!("left: {}; right: {}", summarize_witness(left), summarize_witness(right))
        }
    }
}

/// Deterministic text rendering of a report.
pub fn explain(r: &ClassificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "family {} at order p = {} (levels {}, horizon {})",
        r.family, r.order, r.horizon.levels, r.horizon.indices
    );
    for (name, p) in r.entries() {
        let v = &p.verdict;
        let outcome = match v.outcome {
            Outcome::Holds => "holds".to_string(),
            Outcome::Fails => "fails".to_string(),
            Outcome::Unknown => match v.unknown_reason {
                Some(UnknownReason::Horizon) => "unknown (horizon)".into(),
                Some(UnknownReason::Tolerance) => "unknown (tolerance)".into(),
                Some(UnknownReason::NoRule) => "unknown (no rule)".into(),
                Some(UnknownReason::CitationGap) | None => "unknown (citation gap)".into(),
            },
        };
        let _ = writeln!(s, "  {name}: {outcome}");
        for c in &p.citation_chain {
            let _ = writeln!(s, "    by: {c}");
        }
        if let Some(c) = &v.certificate {
            let _ = writeln!(s, "    certificate: {}", summarize_certificate(c));
        }
        if let Some(w) = &v.witness {
            let _ = writeln!(s, "    witness: {}", summarize_witness(w));
        }
        if let Some(n) = &v.note {
            let _ = writeln!(s, "    note: {n}");
        }
    }
    for a in &r.annotations {
        let _ = writeln!(s, "  note: {a}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::parse_family;

    fn run(src: &str, p: Order) -> ClassificationReport {
        let f = parse_family(src).unwrap();
        let r = classify(&f, p, &Limits::new(10, 2000)).unwrap();
        r.check_invariants().unwrap();
        r
    }

    fn outcome(p: &Option<Property>) -> Outcome {
        p.as_ref().unwrap().outcome()
    }

    const DP0: &str = "dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }";

    #[test]
    fn phi_is_not_amenable() {
        let r = run("phi", Order::Finite(1));
        assert_eq!(outcome(&r.topologically_amenable), Outcome::Fails);
        assert_eq!(r.exit_code(), 0);
        assert!(explain(&r).contains("contractible iff unital iff V eventually in l_1"));
    }

    #[test]
    fn dual_power_cases() {
        for p in [Order::Finite(1), Order::Finite(2), Order::Zero, Order::Infinity] {
            let r = run("dual_power_series { R = 1; alpha(j) = j; r(n) = 1 + 1/n }", p);
            assert_eq!(outcome(&r.topologically_amenable), Outcome::Fails, "{p}");
            assert_eq!(outcome(&r.contractible), Outcome::Fails);
            assert_eq!(r.exit_code(), 0);
        }
        for p in [Order::Finite(1), Order::Infinity] {
            let r = run(DP0, p);
            assert_eq!(outcome(&r.contractible), Outcome::Holds, "{p}");
            assert_eq!(outcome(&r.amenable), Outcome::Holds);
            assert_eq!(outcome(&r.nuclear), Outcome::Holds);
            assert_eq!(r.exit_code(), 0);
        }
        let s = run("dual_power_series { R = 0; alpha(j) = log(j); log_r(n) = -n }", Order::Infinity);
        assert_eq!(outcome(&s.contractible), Outcome::Holds);
    }

    #[test]
    fn grid_is_amenable_not_contractible() {
        let r = run("grid { c(j) = 1/j }", Order::Infinity);
        assert_eq!(outcome(&r.topologically_amenable), Outcome::Holds);
        assert_eq!(outcome(&r.unital), Outcome::Holds);
        assert_eq!(outcome(&r.montel_obstruction), Outcome::Holds);
        assert_eq!(outcome(&r.contractible), Outcome::Fails);
        assert_eq!(outcome(&r.amenable), Outcome::Unknown);
        assert_eq!(r.exit_code(), 0);
        let text = explain(&r);
        assert!(text.contains("(1, 2, 1), (2, 4, 1)"), "{text}");
        assert!(r.annotations.iter().any(|a| a.starts_with("conjectured")));

        let z = run("grid { c(j) = 1/j }", Order::Zero);
        assert_eq!(outcome(&z.topologically_amenable), Outcome::Holds);
        assert_eq!(outcome(&z.contractible), Outcome::Fails);
        assert!(z.annotations.contains(&NOTE_K0_GRID.to_string()));
        assert_eq!(z.exit_code(), 0);
    }

    #[test]
    fn direct_sums() {
        let a1 = run(&format!("dsum(constant, {DP0})"), Order::Zero);
        let a2 = run(&format!("dsum(constant, {DP0})"), Order::Infinity);
        for r in [&a1, &a2] {
            assert_eq!(outcome(&r.topologically_amenable), Outcome::Holds);
            assert_eq!(outcome(&r.contractible), Outcome::Fails);
            assert_eq!(r.exit_code(), 0);
        }
        assert_eq!(outcome(&a1.unital), Outcome::Fails);
        let both = run(&format!("dsum({DP0}, {DP0})"), Order::Infinity);
        assert_eq!(outcome(&both.contractible), Outcome::Holds);
    }

    #[test]
    fn non_algebra_stops_early() {
        let r = run("dual_power_series { R = 1/4; alpha(j) = j; r(n) = 1/4 + 1/n }", Order::Infinity);
        assert_eq!(outcome(&r.is_algebra), Outcome::Fails);
        assert_eq!(r.entries().len(), 1);
    }

    #[test]
    fn undecided_tables_exit_2() {
        let r = run("table { v(n, j) = 1/2^j; tail = monotone }", Order::Infinity);
        assert_eq!(outcome(&r.is_algebra), Outcome::Unknown);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn explain_headline_only_for_empty() {
        let r = ClassificationReport::empty("x", Order::Finite(1), &Limits::default());
        assert_eq!(explain(&r).lines().count(), 1);
    }

    #[test]
    fn report_json_round_trip() {
        let r = run("grid { c(j) = 1/j }", Order::Infinity);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"schema_version":1"#));
        assert_eq!(serde_json::from_str::<ClassificationReport>(&s).unwrap(), r);
    }
}
