use proptest::prelude::*;

use super::*;
use crate::verdict::{Outcome, SeriesBound, UnknownReason};
use crate::weights::parse_family;

fn lim() -> Limits {
    Limits::new(8, 400)
}

fn fam(src: &str) -> WeightFamily {
    parse_family(src).unwrap()
}

fn pred(src: &str) -> Predicate {
    crate::weights::parse::parse_predicate(src).unwrap()
}

fn sound(f: &WeightFamily, v: &Verdict) {
    assert!(v.is_well_formed(), "{v:?}");
    if let Err(e) = recheck(f, v, 400) {
        panic!("recheck failed: {e}\n{v:#?}");
    }
}

#[test]
fn grid_w3_uses_level_2n() {
    let f = fam("grid { c(j) = 1/j }");
    let v = check_w3(&f, &lim()).unwrap();
    assert!(v.is_holds());
    let Some(Certificate::W3 { witness_map, .. }) = &v.certificate else {
        panic!("{v:?}")
    };
    for t in witness_map {
        assert_eq!((t.m, t.bound.clone()), (2 * t.n, XPos::one()));
    }
    sound(&f, &v);
}

#[test]
fn dual_power_between_zero_and_one_fails_w3() {
    let f = fam("dual_power_series { R = 1/4; alpha(j) = j; r(n) = 1/4 + 1/n }");
    let v = check_w3(&f, &lim()).unwrap();
    assert!(v.is_fails(), "{v:?}");
    let Some(Witness::RatioUnbounded { level, samples, .. }) = &v.witness else {
        panic!("{v:?}")
    };
    // r_n^2 <= 1/4 iff r_n <= 1/2 iff n >= 4
    assert_eq!(*level, 4);
    assert!(!samples.is_empty());
    sound(&f, &v);
}

#[test]
fn dual_power_schwartz_and_large_limit() {
    let f = fam("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }");
    let v = check_w3(&f, &lim()).unwrap();
    assert!(v.is_holds());
    sound(&f, &v);
    let g = fam("dual_power_series { R = 2; alpha(j) = j; r(n) = 2 + 1/n }");
    let v = check_w3(&g, &lim()).unwrap();
    assert!(v.is_holds());
    sound(&g, &v);
    let b = check_eventually_bounded(&g, &lim()).unwrap();
    assert!(b.is_fails());
    sound(&g, &b);
}

#[test]
fn phi_is_unbounded_and_not_c0() {
    let f = fam("phi");
    assert!(check_w3(&f, &lim()).unwrap().is_holds());
    for v in [
        check_eventually_bounded(&f, &lim()).unwrap(),
        check_eventually_c0(&f, &lim()).unwrap(),
        check_eventually_lp(&f, Order::Finite(1), &lim()).unwrap(),
    ] {
        assert!(matches!(v.witness, Some(Witness::InfiniteWeight { .. })), "{v:?}");
        sound(&f, &v);
    }
}

#[test]
fn growth_certificates_recheck() {
    let cases = [
        ("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }", Order::Finite(1)),
        ("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }", Order::Zero),
        ("dual_power_series { R = 0; alpha(j) = log(j); log_r(n) = -n }", Order::Finite(1)),
        ("dual_power_series { R = 0; alpha(j) = log(j); log_r(n) = -n }", Order::Finite(2)),
        ("restrict(grid { c(j) = 1/j }, or(row(1), row(2)))", Order::Finite(1)),
        ("restrict(grid { c(j) = 1/2^j }, row(3))", Order::Finite(1)),
        ("restrict(grid { c(j) = 1/j }, and(row(2), first(5)))", Order::Finite(2)),
        ("table { v(n, j) = 1/2^j; tail = monotone }", Order::Finite(1)),
    ];
    for (src, p) in cases {
        let f = fam(src);
        let v = check_eventually_lp(&f, p, &lim()).unwrap();
        assert!(v.is_holds(), "{src} at {p:?}: {v:?}");
        sound(&f, &v);
    }
}

#[test]
fn log_alpha_uses_first_summable_level() {
    let f = fam("dual_power_series { R = 0; alpha(j) = log(j); log_r(n) = -n }");
    let v = check_eventually_lp(&f, Order::Finite(1), &lim()).unwrap();
    let Some(Certificate::Summable { level, series, .. }) = &v.certificate else {
        panic!("{v:?}")
    };
    assert_eq!(*level, 2);
    assert!(matches!(series, SeriesBound::PSeries { .. }));
}

#[test]
fn grid_with_infinitely_many_rows_diverges() {
    let f = fam("grid { c(j) = 1/j }");
    let v = check_eventually_lp(&f, Order::Finite(1), &lim()).unwrap();
    assert!(matches!(v.witness, Some(Witness::Divergence { .. })), "{v:?}");
    sound(&f, &v);
    let b = check_eventually_bounded(&f, &lim()).unwrap();
    assert!(b.is_holds());
    sound(&f, &b);
}

#[test]
fn direct_sum_blames_one_side() {
    let f = fam("dsum(constant, dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) })");
    let b = check_eventually_bounded(&f, &lim()).unwrap();
    assert!(b.is_holds());
    sound(&f, &b);
    let c = check_eventually_c0(&f, &lim()).unwrap();
    assert!(matches!(
        c.witness,
        Some(Witness::Side {
            side: SumSide::Left,
            ..
        })
    ));
    sound(&f, &c);
    let w = check_w3(&f, &lim()).unwrap();
    assert!(w.is_holds());
    sound(&f, &w);
}

#[test]
fn monotone_table_w3_has_no_rule() {
    let f = fam("table { v(n, j) = 1/2^j; tail = monotone }");
    let v = check_w3(&f, &lim()).unwrap();
    assert_eq!(v.unknown_reason, Some(UnknownReason::NoRule));
}

#[test]
fn banach_rows_on_row_and_diagonal() {
    let f = fam("grid { c(j) = 1/j }");
    let row = pred("row(1)");
    let v = check_banach_rows(&f, &row, &lim()).unwrap();
    let Some(Witness::InfiniteRow { row: k, level, .. }) = &v.witness else {
        panic!("{v:?}")
    };
    assert_eq!((*k, *level), (1, 2));
    sound(&f.clone().restrict(row), &v);

    let diag = pred("diagonal");
    let v = check_banach_rows(&f, &diag, &lim()).unwrap();
    let Some(Certificate::BanachRows { constants }) = &v.certificate else {
        panic!("{v:?}")
    };
    // on the diagonal v_n/v_(n+1) is 1/c_n^(n+1) = n^(n+1) at (n, n)
    assert_eq!(constants[1].bound, XPos::int(8));
    sound(&f.clone().restrict(diag), &v);

    assert!(check_banach_rows(&fam("phi"), &Predicate::All, &lim()).is_err());
}

#[test]
fn montel_obstruction_on_grid() {
    let f = fam("grid { c(j) = 1/j }");
    let s = pred("diagonal");
    let v = check_montel_obstruction(&f, &s, &lim()).unwrap();
    assert!(v.is_holds(), "{v:?}");
    sound(&f.clone().restrict(Predicate::negate(s)), &v);

    let s = pred("not(or(row(1), row(2)))");
    let v = check_montel_obstruction(&f, &s, &lim()).unwrap();
    assert!(v.is_fails(), "{v:?}");
    sound(&f.clone().restrict(Predicate::negate(s)), &v);

    let v = check_montel_obstruction(&f, &Predicate::All, &lim()).unwrap();
    assert!(v.is_fails());
}

#[test]
fn montel_on_sums_and_lines() {
    let f = fam("dsum(constant, dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) })");
    let v = check_montel_obstruction(&f, &Predicate::Empty, &lim()).unwrap();
    assert!(v.is_holds(), "{v:?}");
    sound(&f, &v);
    let g = fam("dual_power_series { R = 0; alpha(j) = j; r(n) = 1/(n+1) }");
    let v = check_montel_obstruction(&g, &Predicate::Empty, &lim()).unwrap();
    assert!(v.is_fails());
    sound(&g, &v);
    let phi = fam("phi");
    assert!(check_montel_obstruction(&phi, &Predicate::Empty, &lim()).unwrap().is_fails());
}

#[test]
fn verdict_outcomes_serialize() {
    let v = check_w3(&fam("phi"), &lim()).unwrap();
    assert_eq!(v.outcome, Outcome::Holds);
    let s = serde_json::to_string(&v).unwrap();
    assert_eq!(serde_json::from_str::<Verdict>(&s).unwrap(), v);
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("diagonal".to_string()),
        Just("triangular".to_string()),
        Just("even".to_string()),
        Just("odd".to_string()),
        (1u64..5).prop_map(|k| format!("row({k})")),
        (1u64..5).prop_map(|k| format!("col({k})")),
        (1u64..5).prop_map(|k| format!("first({k})")),
    ]
}

fn predicate() -> impl Strategy<Value = String> {
    atom().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| format!("not({p})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("and({a}, {b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("or({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_verdicts_recheck(p in predicate()) {
        let lim = Limits::new(5, 200);
        let f = fam("grid { c(j) = 1/j }");
        let s = pred(&p);
        let banach = check_banach_rows(&f, &s, &lim).unwrap();
        prop_assert!(banach.is_well_formed());
        prop_assert!(recheck(&f.clone().restrict(s.clone()), &banach, 200).is_ok());
        // Banach iff every row of S is finite
        let finite_rows = s.grid_shape().all_rows_finite();
        prop_assert_eq!(banach.is_holds(), finite_rows);

        let montel = check_montel_obstruction(&f, &s, &lim).unwrap();
        prop_assert!(!montel.is_unknown());
        prop_assert!(recheck(&f.clone().restrict(Predicate::negate(s.clone())), &montel, 200).is_ok());

        let restricted = f.clone().restrict(s);
        for v in [
            check_w3(&restricted, &lim).unwrap(),
            check_eventually_bounded(&restricted, &lim).unwrap(),
            check_eventually_c0(&restricted, &lim).unwrap(),
            check_eventually_lp(&restricted, Order::Finite(1), &lim).unwrap(),
        ] {
            prop_assert!(v.is_well_formed());
            let checked = recheck(&restricted, &v, 200);
            prop_assert!(checked.is_ok(), "{:?}", checked);
        }
    }

    #[test]
    fn dual_power_w3_matches_limit(num in 0u64..6, den in 1u64..6) {
        let lim = Limits::new(6, 200);
        let src = format!("dual_power_series {{ R = {num}/{den}; alpha(j) = j; r(n) = {num}/{den} + 1/n }}");
        let f = fam(&src);
        let v = check_w3(&f, &lim).unwrap();
        let r = num as f64 / den as f64;
        // (W3) holds exactly when R = 0 or R >= 1
        prop_assert_eq!(v.is_holds(), num == 0 || r >= 1.0);
        prop_assert!(recheck(&f, &v, 200).is_ok());
    }
}
