use std::path::PathBuf;

use kothe::classify::classify;
use kothe::{parse_file, Limits, Order, Outcome};

fn family(name: &str) -> kothe::WeightFamily {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../families").join(format!("{name}.kf"));
    let src = std::fs::read_to_string(&path).unwrap();
    let mut all = parse_file(&src).unwrap();
    assert_eq!(all.len(), 1);
    all.pop().unwrap()
}

#[test]
fn every_builtin_family_parses() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../families");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let src = std::fs::read_to_string(e.unwrap().path()).unwrap();
        assert!(!parse_file(&src).unwrap().is_empty());
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn builtin_classification_table() {
    let lim = Limits::default();
    let cases: &[(&str, Order, &str, Outcome)] = &[
        ("phi", Order::Finite(1), "ta", Outcome::Fails),
        ("dual_power_1", Order::Finite(1), "ta", Outcome::Fails),
        ("dual_power_1", Order::Infinity, "ta", Outcome::Fails),
        ("dual_power_2", Order::Zero, "ta", Outcome::Fails),
        ("dual_power_0", Order::Infinity, "contractible", Outcome::Holds),
        ("dual_power_0", Order::Finite(1), "contractible", Outcome::Holds),
        ("s_prime", Order::Infinity, "contractible", Outcome::Holds),
        ("hadamard_1", Order::Infinity, "ta", Outcome::Fails),
        ("hadamard_0", Order::Infinity, "contractible", Outcome::Holds),
        ("dirsum_a1", Order::Zero, "ta", Outcome::Holds),
        ("dirsum_a1", Order::Zero, "contractible", Outcome::Fails),
        ("dirsum_a2", Order::Infinity, "ta", Outcome::Holds),
        ("dirsum_a2", Order::Infinity, "contractible", Outcome::Fails),
        ("nn", Order::Infinity, "ta", Outcome::Holds),
        ("nn", Order::Infinity, "unital", Outcome::Holds),
        ("nn", Order::Infinity, "contractible", Outcome::Fails),
        ("nn", Order::Zero, "ta", Outcome::Holds),
        ("dual_power_quarter", Order::Infinity, "algebra", Outcome::Fails),
    ];
    for (name, p, prop, want) in cases {
        let r = classify(&family(name), *p, &lim).unwrap();
        r.check_invariants().unwrap();
        let got = match *prop {
            "ta" => &r.topologically_amenable,
            "contractible" => &r.contractible,
            "unital" => &r.unital,
            _ => &r.is_algebra,
        };
        assert_eq!(got.as_ref().unwrap().verdict.outcome, *want, "{name} at {p}: {prop}");
        assert_eq!(r.exit_code(), 0, "{name} at {p}");
    }
}
