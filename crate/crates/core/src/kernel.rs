//! Exact orbit state with a floating-point filter.
//!
//! Long exact orbits are dominated by the cost of keeping rationals in lowest
//! terms. For arbitrary-precision scalars the state is instead kept as an
//! integer combination of the start point and the branch intercepts,
//!
//! ```text
//! x = (m_0 x_0 + m_1 b_1 + ... + m_N b_N) / e,
//! ```
//!
//! so one step on a piece with slope `p/q` only multiplies big integers by
//! the small integers `p` and `q`. A shadow `f64` value with a rigorous error
//! bound decides almost every comparison. Orbits that pass extremely close to
//! a comparison point fall through to a 1024-bit fixed-point shadow, and only
//! then to the exact combination.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::map::{Location, MapSpec};
use crate::scalar::{to_pq, ExactInt, Scalar};

/// Relative error budget of one rounded operation, with slack.
const REL: f64 = 1.0 / (1u64 << 48) as f64;
/// Absolute slack covering subnormal underflow.
const TINY: f64 = 1e-300;
/// Fractional bits of the fixed-point shadow.
const FIX_BITS: usize = 1024;

/// `floor(r * 2^FIX_BITS)`.
fn to_fix<S: Scalar>(r: &S) -> S::Int {
    let two = S::Int::from_i64(2).expect("2 fits");
    let scale = num_traits::pow(two, FIX_BITS);
    r.numer().mul_ref(&scale).div_floor(r.denom())
}

/// A rational together with a certified `f64` enclosure.
#[derive(Clone, Debug)]
pub(crate) struct Probe<S: Scalar> {
    pub exact: S,
    f: f64,
    err: f64,
    /// Fixed-point value within one unit, for arbitrary-precision scalars.
    fix: Option<S::Int>,
}

impl<S: Scalar> Probe<S> {
    pub fn new(exact: S) -> Self {
        let f = exact.approx();
        let fix = (!<S::Int as ExactInt>::REDUCE_EAGERLY).then(|| to_fix(&exact));
        Self { err: REL * f.abs() + TINY, f, exact, fix }
    }
}

/// Per-map data shared by all trackers.
pub(crate) struct Kernel<S: Scalar> {
    n: usize,
    open_ends: (bool, bool),
    intercepts: Vec<S>,
    pq: Vec<(S::Int, S::Int)>,
    /// Slope numerator and denominator when both fit a machine word.
    pq_small: Vec<Option<(i64, i64)>>,
    slope_f: Vec<f64>,
    slope_hi: Vec<f64>,
    icpt_f: Vec<f64>,
    icpt_fix: Vec<S::Int>,
    endpoints: Vec<Probe<S>>,
}

impl<S: Scalar> Kernel<S> {
    pub fn new(spec: &MapSpec<S>) -> Self {
        let br = spec.branches();
        let slope_f: Vec<f64> = br.iter().map(|b| b.slope.approx()).collect();
        Self {
            n: spec.pieces(),
            open_ends: spec.open_ends(),
            intercepts: br.iter().map(|b| b.intercept.clone()).collect(),
            pq: br.iter().map(|b| (b.slope.numer().clone(), b.slope.denom().clone())).collect(),
            pq_small: br
                .iter()
                .map(|b| Some((b.slope.numer().to_i64()?, b.slope.denom().to_i64()?)))
                .collect(),
            slope_hi: slope_f.iter().map(|s| s.abs() * (1.0 + REL)).collect(),
            slope_f,
            icpt_f: br.iter().map(|b| b.intercept.approx()).collect(),
            icpt_fix: if <S::Int as ExactInt>::REDUCE_EAGERLY {
                Vec::new()
            } else {
                br.iter().map(|b| to_fix(&b.intercept)).collect()
            },
            endpoints: spec.partition().endpoints().iter().cloned().map(Probe::new).collect(),
        }
    }
}

enum State<S: Scalar> {
    Plain(S),
    Lin(Lin<S::Int>),
}

struct Lin<I> {
    m: Vec<I>,
    e: I,
    /// Common denominator of `x_0` and every intercept.
    dall: I,
    /// `x_0 * dall`, `b_i * dall`.
    k: Vec<I>,
    /// Cached `sum m_j k_j` for the current step.
    numer: Option<I>,
    /// Fixed-point shadow and its error in units of `2^-FIX_BITS`.
    fix: I,
    fix_err: f64,
}

impl<I: ExactInt> Lin<I> {
    fn numer(&mut self) -> &I {
        if self.numer.is_none() {
            let mut acc = I::zero();
            for (m, k) in self.m.iter().zip(&self.k) {
                if !m.is_zero() {
                    acc.add_assign_ref(&m.mul_ref(k));
                }
            }
            self.numer = Some(acc);
        }
        self.numer.as_ref().unwrap()
    }
}

pub(crate) struct Tracker<'k, S: Scalar> {
    kernel: &'k Kernel<S>,
    state: State<S>,
    xf: f64,
    err: f64,
    loc: Location,
    step: usize,
}

impl<'k, S: Scalar> Tracker<'k, S> {
    /// Start at `x0`. Fails only if `x0` lies outside the domain; starting on
    /// the boundary set is allowed and visible through [`Tracker::location`].
    pub fn new(kernel: &'k Kernel<S>, x0: &S) -> Result<Self> {
        if x0 < &kernel.endpoints[0].exact || x0 > &kernel.endpoints[kernel.n].exact {
            return Err(Error::OutsideDomain(to_pq(x0)));
        }
        let state = if <S::Int as ExactInt>::REDUCE_EAGERLY {
            State::Plain(x0.clone())
        } else {
            let mut dall = x0.denom().clone();
            for b in &kernel.intercepts {
                dall = dall.lcm(b.denom());
            }
            let scale = |v: &S| v.numer().mul_ref(&(dall.clone() / v.denom().clone()));
            let mut k = vec![scale(x0)];
            k.extend(kernel.intercepts.iter().map(scale));
            let mut m = vec![S::Int::zero(); kernel.n + 1];
            m[0] = S::Int::one();
            State::Lin(Lin { m, e: S::Int::one(), dall, k, numer: None, fix: to_fix(x0), fix_err: 1.0 })
        };
        let xf = x0.approx();
        let mut t = Self {
            kernel,
            state,
            xf,
            err: REL * xf.abs() + TINY,
            loc: Location::Piece(1),
            step: 0,
        };
        t.loc = t.locate();
        Ok(t)
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn location(&self) -> Location {
        self.loc
    }

    pub fn approx(&self) -> f64 {
        self.xf
    }

    pub fn value(&mut self) -> S {
        match &mut self.state {
            State::Plain(x) => x.clone(),
            State::Lin(l) => {
                let d = l.e.mul_ref(&l.dall);
                S::from_parts(l.numer().clone(), d)
            }
        }
    }

    pub fn cmp(&mut self, p: &Probe<S>) -> Ordering {
        let d = self.xf - p.f;
        let bound = self.err + p.err;
        if d > bound {
            return Ordering::Greater;
        }
        if d < -bound {
            return Ordering::Less;
        }
        if let (State::Lin(l), Some(pf)) = (&self.state, &p.fix) {
            let d = l.fix.sub_ref(pf);
            let bound = S::Int::from_f64(l.fix_err.ceil() + 1.0).expect("small error bound");
            if d > bound {
                return Ordering::Greater;
            }
            if d < -bound {
                return Ordering::Less;
            }
        }
        self.cmp_exact(&p.exact)
    }

    fn cmp_exact(&mut self, r: &S) -> Ordering {
        match &mut self.state {
            State::Plain(x) => (*x).cmp(r),
            State::Lin(l) => {
                let rhs = r.numer().mul_ref(&l.e).mul_ref(&l.dall);
                let lhs = l.numer().mul_ref(r.denom());
                lhs.cmp(&rhs)
            }
        }
    }

    /// `lo < x < hi`.
    pub fn strictly_between(&mut self, lo: &Probe<S>, hi: &Probe<S>) -> bool {
        self.cmp(lo) == Ordering::Greater && self.cmp(hi) == Ordering::Less
    }

    fn locate(&mut self) -> Location {
        // Branch images stay inside the domain, so the extremes only matter
        // when an end piece is open.
        let n = self.kernel.n;
        let eps = &self.kernel.endpoints;
        // smallest k in 1..n with c_k >= x, or n
        let (mut lo, mut hi) = (1usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.cmp(&eps[mid]) == Ordering::Greater {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        if k < n && self.cmp(&eps[k]) == Ordering::Equal {
            return Location::Boundary(k);
        }
        if k == 1 && self.kernel.open_ends.0 && self.cmp(&eps[0]) == Ordering::Equal {
            return Location::Boundary(0);
        }
        if k == n && self.kernel.open_ends.1 && self.cmp(&eps[n]) == Ordering::Equal {
            return Location::Boundary(n);
        }
        Location::Piece(k)
    }

    /// Apply the branch of the current piece. Must not be called on the
    /// boundary set.
    pub fn advance(&mut self) {
        match self.loc {
            Location::Piece(i) => self.advance_on(i),
            Location::Boundary(k) => panic!("advance from boundary point c_{k}"),
        }
    }

    /// Apply branch `i` regardless of where the state lies.
    pub fn advance_on(&mut self, i: usize) {
        let kern = self.kernel;
        match &mut self.state {
            State::Plain(x) => {
                let (p, q) = &kern.pq[i - 1];
                let b = &kern.intercepts[i - 1];
                let num = p
                    .mul_ref(x.numer())
                    .mul_ref(b.denom())
                    .add_ref(&q.mul_ref(x.denom()).mul_ref(b.numer()));
                let den = q.mul_ref(x.denom()).mul_ref(b.denom());
                *x = S::from_parts(num, den);
            }
            State::Lin(l) => {
                let (p, q) = &kern.pq[i - 1];
                l.numer = None;
                l.fix = match kern.pq_small[i - 1] {
                    Some((ps, qs)) => {
                        l.fix.mul_small(ps);
                        l.fix.div_floor(&S::Int::from_i64(qs).expect("i64 fits"))
                    }
                    None => l.fix.mul_ref(p).div_floor(q),
                };
                l.fix.add_assign_ref(&kern.icpt_fix[i - 1]);
                l.fix_err = l.fix_err * kern.slope_hi[i - 1] + 2.0;
                if p.is_zero() {
                    l.m.iter_mut().for_each(|m| *m = S::Int::zero());
                    l.m[i] = S::Int::one();
                    l.e = S::Int::one();
                } else if let Some((ps, qs)) = kern.pq_small[i - 1] {
                    if ps != 1 {
                        for m in l.m.iter_mut().filter(|m| !m.is_zero()) {
                            m.mul_small(ps);
                        }
                    }
                    if qs != 1 {
                        l.e.mul_small(qs);
                    }
                    let (m, e) = (&mut l.m[i], &l.e);
                    m.add_assign_ref(e);
                } else {
                    if !p.is_one() {
                        for m in l.m.iter_mut().filter(|m| !m.is_zero()) {
                            m.mul_assign_ref(p);
                        }
                    }
                    if !q.is_one() {
                        l.e.mul_assign_ref(q);
                    }
                    let (m, e) = (&mut l.m[i], &l.e);
                    m.add_assign_ref(e);
                }
            }
        }
        let t = kern.slope_f[i - 1] * self.xf;
        let b = kern.icpt_f[i - 1];
        let y = t + b;
        self.err = kern.slope_hi[i - 1] * self.err + REL * (t.abs() + b.abs() + y.abs()) + TINY;
        self.xf = y;
        self.step += 1;
        self.loc = self.locate();
    }
}

/// Float error of a tracker, exposed for tests.
#[cfg(test)]
impl<S: Scalar> Tracker<'_, S> {
    fn bound(&self) -> f64 {
        self.err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{gallery, Rational, Rational64};

    fn naive<S: Scalar>(spec: &MapSpec<S>, x0: &S, n: usize) -> Vec<S> {
        let mut out = vec![x0.clone()];
        let mut x = x0.clone();
        for _ in 0..n {
            match spec.apply(&x) {
                Ok((_, y)) => {
                    out.push(y.clone());
                    x = y;
                }
                Err(_) => break,
            }
        }
        out
    }

    #[test]
    fn tracker_matches_naive_iteration_big() {
        let spec = gallery::e2();
        let kern = Kernel::new(&spec);
        let x0 = Rational::new(2.into(), 5.into());
        let want = naive(&spec, &x0, 300);
        let mut t = Tracker::new(&kern, &x0).unwrap();
        for w in &want {
            assert_eq!(&t.value(), w);
            assert!((t.approx() - w.approx()).abs() <= t.bound());
            assert_eq!(t.location(), spec.locate(w).unwrap());
            if matches!(t.location(), Location::Boundary(_)) {
                break;
            }
            t.advance();
        }
    }

    #[test]
    fn tracker_matches_naive_iteration_fixed_width() {
        let spec: MapSpec<Rational64> = crate::map::validate_map(&gallery::e1().to_raw()).unwrap();
        let kern = Kernel::new(&spec);
        let x0 = Rational64::new(1, 3);
        let want = naive(&spec, &x0, 40);
        let mut t = Tracker::new(&kern, &x0).unwrap();
        for w in &want {
            assert_eq!(&t.value(), w);
            t.advance();
        }
    }

    #[test]
    fn exact_fallback_resolves_near_ties() {
        let spec = gallery::e1();
        let kern = Kernel::new(&spec);
        // x0 = 1/2 + 2^-80 is above c_1 by far less than the float resolution
        let tiny = Rational::new(1.into(), crate::Int::from(1) << 80usize);
        let x0 = Rational::new(1.into(), 2.into()) + &tiny;
        let t = Tracker::new(&kern, &x0).unwrap();
        assert_eq!(t.location(), Location::Piece(2));
        let x1 = Rational::new(1.into(), 2.into()) - &tiny;
        let t = Tracker::new(&kern, &x1).unwrap();
        assert_eq!(t.location(), Location::Piece(1));
        let t = Tracker::new(&kern, &Rational::new(1.into(), 2.into())).unwrap();
        assert_eq!(t.location(), Location::Boundary(1));
    }
}
