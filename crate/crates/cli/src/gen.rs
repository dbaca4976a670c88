//! Seeded generators for the randomized suites.

use kothe::tensoralg::TruncTensor;
use kothe::truncation::FinSeq;
use kothe::{Coeff, Index};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Gen = ChaCha8Rng;

pub fn rng(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n/d` with `|n| <= 9`, `1 <= d <= 9`.
pub fn rational(g: &mut Gen) -> BigRational {
    BigRational::new(BigInt::from(g.random_range(-9i64..=9)), BigInt::from(g.random_range(1i64..=9)))
}

pub fn gauss(g: &mut Gen) -> Coeff {
    Coeff::new(rational(g), rational(g))
}

pub fn nonzero_gauss(g: &mut Gen) -> Coeff {
    loop {
        let c = gauss(g);
        if !(c.re == BigRational::from_integer(0.into()) && c.im == BigRational::from_integer(0.into())) {
            return c;
        }
    }
}

/// `size` distinct natural indices from `1..=max`.
pub fn nat_support(g: &mut Gen, size: usize, max: u64) -> Vec<Index> {
    let mut v: Vec<Index> = sample(g, max as usize, size)
        .into_iter()
        .map(|k| Index::Nat(k as u64 + 1))
        .collect();
    v.sort();
    v
}

/// `size` distinct pairs from `[1, rows] x [1, cols]`.
pub fn pair_support(g: &mut Gen, size: usize, rows: u64, cols: u64) -> Vec<Index> {
    let mut v: Vec<Index> = sample(g, (rows * cols) as usize, size)
        .into_iter()
        .map(|k| Index::Pair(k as u64 / cols + 1, k as u64 % cols + 1))
        .collect();
    v.sort();
    v
}

pub fn finseq_on(g: &mut Gen, support: &[Index]) -> FinSeq {
    FinSeq::from_entries(support.iter().map(|i| (i.clone(), nonzero_gauss(g))))
}

/// A tensor with up to `max_terms` entries over `Nat(1..=width)`, diagonal entries frequent.
pub fn tensor(g: &mut Gen, max_terms: usize, width: u64) -> TruncTensor {
    let n = g.random_range(0..=max_terms);
    TruncTensor::from_entries((0..n).map(|_| {
        let i = g.random_range(1..=width);
        let j = if g.random_bool(0.4) { i } else { g.random_range(1..=width) };
        ((Index::Nat(i), Index::Nat(j)), gauss(g))
    }))
}

/// Source of a random table family on `N`; `(W1)` and `(W2)` hold by construction.
pub fn table_source(g: &mut Gen, label: &str) -> String {
    let a = g.random_range(1..=3);
    let b = g.random_range(0..=3);
    let e = g.random_range(0..=2);
    let k = g.random_range(2..=40);
    let body = match g.random_range(0..6) {
        0 => format!("v(n, j) = ({a}/(n + {b}))^j; tail = monotone"),
        1 => format!("v(n, j) = j^{}/n^{e}; tail = monotone", e + 1),
        2 => format!("v(n, j) = ({a}/(n + {b}))^j * j^{e}; tail = monotone"),
        3 => format!("v(n, j) = 1/(n * j^{e}); tail = constant({k})"),
        4 => format!("v(n, j) = {a}/n + 1/j; tail = constant({k})"),
        _ => format!("v(n, j) = if j > n then j^{e} else 1/j; tail = constant({k})"),
    };
    format!("family {label}: table {{ {body} }}")
}
