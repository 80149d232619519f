//! Bundled example maps.

use crate::bigint::Int;
use num_integer::Roots;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::to_pq;
use crate::{Map, Rational};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn build(endpoints: &[(i64, i64)], branches: &[((i64, i64), (i64, i64))]) -> Map {
    Map::new(
        endpoints.iter().map(|&(n, d)| r(n, d)).collect(),
        branches.iter().map(|&((a, b), (c, d))| (r(a, b), r(c, d))).collect(),
        (false, false),
        None,
    )
    .expect("gallery maps are valid")
}

/// Two halving branches with attracting fixed points at both ends.
pub fn e1() -> Map {
    build(&[(0, 1), (1, 2), (1, 1)], &[((1, 2), (0, 1)), ((1, 2), (1, 2))])
}

/// The contracted rotation `x -> 9x/10 + 2/5 mod 1`.
pub fn e2() -> Map {
    contracted_rotation(r(9, 10), r(2, 5)).expect("valid parameters")
}

/// Four injective branches of alternating orientation on the quarters of
/// `[0, 1]`, attracted to a fixed point and an orbit of period 4.
pub fn four_piece() -> Map {
    build(
        &[(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)],
        &[
            ((1, 2), (3, 5)),
            ((-2, 3), (5, 7)),
            ((3, 4), (-1, 4)),
            ((-1, 2), (13, 14)),
        ],
    )
}

/// Three contracting tents on the thirds of `[0, 1]`, each split at its peak so
/// that every piece is monotone. All limits fall onto an orbit of period 5.
pub fn six_piece() -> Map {
    let tents = [((1, 2), (9, 13)), ((2, 3), (2, 7)), ((3, 4), (6, 11))];
    let mut branches = Vec::new();
    for (j, (s, v)) in tents.into_iter().enumerate() {
        let (s, v) = (r(s.0, s.1), r(v.0, v.1));
        let peak = r(2 * j as i64 + 1, 6);
        branches.push((s.clone(), v.clone() - s.clone() * &peak));
        branches.push((-s.clone(), v + s * &peak));
    }
    Map::new(
        [(0, 1), (1, 6), (1, 3), (1, 2), (2, 3), (5, 6), (1, 1)].iter().map(|&(n, d)| r(n, d)).collect(),
        branches,
        (false, false),
        None,
    )
    .expect("gallery maps are valid")
}

/// `x -> lambda x + mu mod 1` on `[0, 1]`, with a single discontinuity at
/// `(1 - mu) / lambda`. Requires `0 < lambda < 1` and `1 - lambda < mu < 1`.
pub fn contracted_rotation(lambda: Rational, mu: Rational) -> Result<Map> {
    let one = Rational::one();
    if lambda <= Rational::zero() || lambda >= one || mu >= one || lambda.clone() + &mu <= one {
        return Err(Error::Config(format!(
            "contracted rotation needs 0 < lambda < 1 and 1 - lambda < mu < 1, got lambda = {}, mu = {}",
            to_pq(&lambda),
            to_pq(&mu)
        )));
    }
    let c = (one.clone() - &mu) / &lambda;
    Map::new(
        vec![Rational::zero(), c, one.clone()],
        vec![(lambda.clone(), mu.clone()), (lambda, mu - one)],
        (false, false),
        None,
    )
}

/// `floor(j * (sqrt(5) - 1) / 2)`.
fn floor_golden(j: u64) -> u64 {
    ((5 * (j as u128) * (j as u128)).sqrt() as u64 - j) / 2
}

/// Truncation of the parameter series whose contracted rotation has the
/// golden rotation number:
///
/// `mu = (1 - lambda) * sum_{j=0}^{terms} a_j lambda^j`, with `a_0 = 1` and
/// `a_j = floor((j+1) theta) - floor(j theta)`.
pub fn golden_mu(lambda: &Rational, terms: usize) -> Rational {
    let (a, b) = (lambda.numer().clone(), lambda.denom().clone());
    let mut acc = Int::zero();
    let mut scale = Int::one();
    for j in (0..=terms as u64).rev() {
        let digit = if j == 0 { 1 } else { floor_golden(j + 1) - floor_golden(j) };
        acc = &acc * &a;
        if digit == 1 {
            acc += &scale;
        }
        scale *= &b;
    }
    // sum = acc / b^terms; scale = b^(terms + 1)
    let one_minus = Rational::one() - lambda;
    one_minus * Rational::new(acc * &b, scale)
}

pub fn golden_contracted_rotation(lambda: Rational, terms: usize) -> Result<Map> {
    let mu = golden_mu(&lambda, terms);
    contracted_rotation(lambda, mu)
}

/// Named gallery entries in a fixed order.
pub fn all() -> Vec<(&'static str, Map)> {
    vec![("E1", e1()), ("E2", e2()), ("four-piece", four_piece()), ("six-piece", six_piece())]
}
