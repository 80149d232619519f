//! Random maps and a plain-arithmetic orbit oracle shared by the test targets.
#![allow(dead_code)]

use pcim::{Map, Rational};
use num_traits::Signed;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Slope `±p/q` with `q` in `2..=8` and `0 < p/q <= 3/4`.
pub fn random_slope(rng: &mut impl Rng) -> Rational {
    let q = rng.gen_range(2..=8i64);
    let p = rng.gen_range(1..=(3 * q) / 4);
    let s = r(p, q);
    if rng.gen_bool(0.5) {
        -s
    } else {
        s
    }
}

/// A map on `[0, 1]` with `N` in `{2, 3, 4}` pieces, interior endpoints on the
/// grid `1/24`, nonzero slopes with `|s| <= 3/4` and images placed on the grid
/// `1/16` of the free room.
pub fn random_map(rng: &mut impl Rng) -> Map {
    let n = rng.gen_range(2..=4usize);
    let mut cuts: Vec<i64> = Vec::new();
    while cuts.len() < n - 1 {
        let c = rng.gen_range(1..24i64);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort();
    let mut endpoints = vec![r(0, 1)];
    endpoints.extend(cuts.iter().map(|&c| r(c, 24)));
    endpoints.push(r(1, 1));
    let branches = (0..n)
        .map(|i| {
            let (a, b) = (endpoints[i].clone(), endpoints[i + 1].clone());
            let s = random_slope(rng);
            let len = s.abs() * (b - &a);
            let left = (r(1, 1) - &len) * r(rng.gen_range(0..=16), 16);
            let at_a = if s > r(0, 1) { left } else { left + len };
            let intercept = at_a - s.clone() * a;
            (s, intercept)
        })
        .collect();
    Map::new(endpoints, branches, (false, false), None).expect("generated maps are valid")
}

/// `x -> lambda x + mu mod 1` with random `lambda` in `[1/4, 9/10]` and
/// `1 - lambda < mu < 1`.
pub fn random_rotation(rng: &mut impl Rng) -> Map {
    let q = rng.gen_range(4..=20i64);
    let lambda = r(rng.gen_range((q + 3) / 4..=(9 * q) / 10), q);
    let room = r(1, 1) - &lambda;
    // mu = 1 - lambda + lambda * k / m with 0 < k < m
    let m = rng.gen_range(3..=40i64);
    let mu = room + lambda.clone() * r(rng.gen_range(1..m), m);
    pcim::gallery::contracted_rotation(lambda, mu).expect("parameters are in range")
}

/// Piece containing `x`, or `None` on an interior endpoint. Closed ends.
pub fn piece_of(m: &Map, x: &Rational) -> Option<usize> {
    let e = m.partition().endpoints();
    let n = e.len() - 1;
    for i in 1..=n {
        let inside = (&e[i - 1] < x || (i == 1 && &e[0] == x)) && (x < &e[i] || (i == n && &e[n] == x));
        if inside {
            return Some(i);
        }
    }
    None
}

/// Exact orbit by direct evaluation. Stops before a state on an interior
/// endpoint. Returns states and the pieces of all states but possibly the last.
pub fn oracle_orbit(m: &Map, x: &Rational, steps: usize) -> (Vec<Rational>, Vec<usize>) {
    let mut states = vec![x.clone()];
    let mut word = Vec::new();
    for _ in 0..steps {
        let cur = states.last().unwrap();
        let Some(i) = piece_of(m, cur) else { break };
        let b = &m.branches()[i - 1];
        let next = b.slope.clone() * cur + &b.intercept;
        word.push(i);
        states.push(next);
    }
    (states, word)
}

/// Random rational in `[0, 1]` with denominator up to 1000.
pub fn random_point(rng: &mut impl Rng) -> Rational {
    let d = rng.gen_range(1..=1000i64);
    r(rng.gen_range(0..=d), d)
}
