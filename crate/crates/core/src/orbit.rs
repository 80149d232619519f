//! Exact forward orbits, itineraries and certified periodic limits.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Probe, Tracker};
use crate::map::{Location, MapSpec};
use crate::scalar::{to_pq, Scalar};
use crate::symbolic::{least_rotation, primitive_period, ItineraryWord, Symbol};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSample<S: Scalar = Rational> {
    pub start: S,
    /// `states[k] = f^k(start)`.
    pub states: Vec<S>,
    /// `itinerary[k]` is the piece containing `states[k]`.
    pub itinerary: ItineraryWord,
    /// Index of the state that landed on the boundary set, if any.
    pub hit_delta_at: Option<usize>,
}

/// Exact orbit of `x` with at most `n` applications of the map, computed in
/// plain rational arithmetic.
pub fn iterate<S: Scalar>(spec: &MapSpec<S>, x: &S, n: usize) -> Result<OrbitSample<S>> {
    if let Location::Boundary(_) = spec.locate(x)? {
        return Err(Error::StartOnDelta(to_pq(x)));
    }
    let mut states = vec![x.clone()];
    let mut word = Vec::with_capacity(n);
    let mut hit = None;
    for k in 0..n {
        match spec.locate(&states[k])? {
            Location::Piece(i) => {
                word.push(i as Symbol);
                let next = spec.branch(i).eval(&states[k]);
                states.push(next);
            }
            Location::Boundary(_) => {
                hit = Some(k);
                break;
            }
        }
    }
    if hit.is_none() && spec.in_delta(&states[states.len() - 1]) {
        hit = Some(states.len() - 1);
    }
    Ok(OrbitSample { start: x.clone(), states, itinerary: ItineraryWord(word), hit_delta_at: hit })
}

pub(crate) enum ScanEnd {
    Stopped,
    HitDelta(usize),
    Exhausted,
}

/// Drive a tracker over the states `x_0, ..., x_{horizon-1}`, calling `visit`
/// on each state off the boundary set until it returns `true`.
pub(crate) fn scan<S: Scalar>(
    kernel: &Kernel<S>,
    x0: &S,
    horizon: usize,
    mut visit: impl FnMut(&mut Tracker<'_, S>, Symbol) -> bool,
) -> Result<ScanEnd> {
    let mut t = Tracker::new(kernel, x0)?;
    if let Location::Boundary(_) = t.location() {
        return Err(Error::StartOnDelta(to_pq(x0)));
    }
    if horizon == 0 {
        return Ok(ScanEnd::Exhausted);
    }
    loop {
        let i = match t.location() {
            Location::Piece(i) => i,
            Location::Boundary(_) => return Ok(ScanEnd::HitDelta(t.step())),
        };
        if visit(&mut t, i as Symbol) {
            return Ok(ScanEnd::Stopped);
        }
        if t.step() + 1 >= horizon {
            return Ok(ScanEnd::Exhausted);
        }
        t.advance();
    }
}

/// Itinerary of the first `n` states of the orbit of `x` and the index of a
/// boundary hit, if one occurs among them.
pub fn itinerary<S: Scalar>(spec: &MapSpec<S>, x: &S, n: usize) -> Result<(ItineraryWord, Option<usize>)> {
    let kernel = Kernel::new(spec);
    let mut word = Vec::with_capacity(n);
    let end = scan(&kernel, x, n, |_, s| {
        word.push(s);
        false
    })?;
    let hit = match end {
        ScanEnd::HitDelta(k) => Some(k),
        _ => None,
    };
    Ok((ItineraryWord(word), hit))
}

/// A periodic orbit in the complement of the boundary set's preimages,
/// certified by exact evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicOrbitCert<S: Scalar = Rational> {
    /// Primitive itinerary block of length `period`.
    pub word: ItineraryWord,
    /// The fixed point `x*` of the composed block.
    pub point: S,
    pub period: usize,
    pub preperiod: usize,
    /// Minimal distance from the orbit to the boundary set.
    pub separation: S,
    /// `orbit[j] = f^j(x*)`.
    pub orbit: Vec<S>,
    /// The composed block is `x -> slope * x + intercept`.
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> PeriodicOrbitCert<S> {
    /// The same orbit with its phase shifted by `k` steps.
    pub fn rotate_left(&self, k: usize) -> Self {
        let p = self.period;
        let k = k % p;
        let mut orbit = self.orbit.clone();
        orbit.rotate_left(k);
        let point = orbit[0].clone();
        let intercept = point.clone() * &(S::one() - &self.slope);
        Self {
            word: self.word.rotate_left(k),
            point,
            period: p,
            preperiod: self.preperiod,
            separation: self.separation.clone(),
            orbit,
            slope: self.slope.clone(),
            intercept,
        }
    }

    /// Orbit points in increasing order.
    pub fn sorted_orbit(&self) -> Vec<S> {
        let mut v = self.orbit.clone();
        v.sort();
        v
    }
}

/// Certify the periodic orbit with itinerary `word`, if it exists.
///
/// The block is reduced to its primitive root, so `(1,1)` certifies the
/// same fixed point as `(1)` with period 1.
pub fn word_fixed_point<S: Scalar>(spec: &MapSpec<S>, word: &ItineraryWord) -> Option<PeriodicOrbitCert<S>> {
    let kernel = Kernel::new(spec);
    Certifier::new(spec, &kernel).certify(word.symbols()).map(|c| (*c).clone())
}

pub(crate) struct Certifier<'a, S: Scalar> {
    spec: &'a MapSpec<S>,
    kernel: &'a Kernel<S>,
    cache: HashMap<Vec<Symbol>, Option<Arc<PeriodicOrbitCert<S>>>>,
}

impl<'a, S: Scalar> Certifier<'a, S> {
    pub fn new(spec: &'a MapSpec<S>, kernel: &'a Kernel<S>) -> Self {
        Self { spec, kernel, cache: HashMap::new() }
    }

    /// Results are cached per conjugacy class of the primitive root, so
    /// repeated blocks cost one lookup.
    pub fn certify(&mut self, word: &[Symbol]) -> Option<Arc<PeriodicOrbitCert<S>>> {
        let n = self.spec.pieces();
        if word.is_empty() || word.iter().any(|&s| s == 0 || s as usize > n) {
            return None;
        }
        let root = &word[..primitive_period(word)];
        let p = root.len();
        let k = least_rotation(root);
        let mut canon = root.to_vec();
        canon.rotate_left(k);
        let hit = match self.cache.get(&canon) {
            Some(c) => c.clone(),
            None => {
                let c = certify_canonical(self.spec, self.kernel, &canon).map(Arc::new);
                self.cache.insert(canon, c.clone());
                c
            }
        };
        hit.map(|c| if k == 0 { c } else { Arc::new(c.rotate_left(p - k)) })
    }
}

/// Cheap rejection: follow the block from an `f64` enclosure of its fixed
/// point and report `true` if some orbit point is certainly outside the piece
/// the block prescribes.
fn float_reject<S: Scalar>(spec: &MapSpec<S>, word: &[Symbol]) -> bool {
    const REL: f64 = 1.0 / (1u64 << 48) as f64;
    let br: Vec<(f64, f64)> = spec.branches().iter().map(|b| (b.slope.approx(), b.intercept.approx())).collect();
    let cs: Vec<f64> = spec.partition().endpoints().iter().map(|c| c.approx()).collect();
    let step = |x: f64, e: f64, i: usize| {
        let (s, b) = br[i - 1];
        let t = s * x;
        let y = t + b;
        (y, e * s.abs() * (1.0 + REL) + REL * (t.abs() + b.abs() + y.abs()) + 1e-300)
    };
    let (mut b, mut eb, mut s) = (0.0f64, 0.0f64, 1.0f64);
    for &w in word {
        (b, eb) = step(b, eb, w as usize);
        s *= br[w as usize - 1].0;
    }
    let es = s.abs() * REL * (word.len() as f64 + 2.0);
    let den = 1.0 - s;
    let slack = den.abs() - es;
    if !(slack > 0.0) {
        return false;
    }
    let mut x = b / den;
    let mut e = (eb + b.abs() * es / slack) / slack + REL * x.abs() * 4.0;
    if !x.is_finite() || !e.is_finite() {
        return false;
    }
    for &w in word {
        let i = w as usize;
        let lo = cs[i - 1] - REL * cs[i - 1].abs();
        let hi = cs[i] + REL * cs[i].abs();
        if x + e < lo || x - e > hi {
            return true;
        }
        (x, e) = step(x, e, i);
    }
    false
}

fn certify_canonical<S: Scalar>(spec: &MapSpec<S>, kernel: &Kernel<S>, word: &[Symbol]) -> Option<PeriodicOrbitCert<S>> {
    if float_reject(spec, word) {
        return None;
    }
    let p = word.len();
    let mut slope = S::one();
    for &s in word {
        slope = spec.branch(s as usize).slope.clone() * &slope;
    }
    // g(c_0) = slope * c_0 + intercept, evaluated on the fast path
    let c0 = spec.c(0).clone();
    let mut t = Tracker::new(kernel, &c0).ok()?;
    for &s in word {
        t.advance_on(s as usize);
    }
    let intercept = t.value() - &(slope.clone() * &c0);
    let point = intercept.clone() / &(S::one() - &slope);
    if &point < spec.c(0) || &point > spec.c(spec.pieces()) {
        return None;
    }
    let mut t = Tracker::new(kernel, &point).ok()?;
    for &s in word {
        if t.location() != Location::Piece(s as usize) {
            return None;
        }
        t.advance();
    }
    if t.cmp(&Probe::new(point.clone())) != std::cmp::Ordering::Equal {
        return None;
    }
    let mut orbit = Vec::with_capacity(p);
    let mut x = point.clone();
    for &s in word {
        let next = spec.branch(s as usize).eval(&x);
        orbit.push(x);
        x = next;
    }
    debug_assert!(x == point);
    let delta = spec.delta_points();
    let separation = orbit
        .iter()
        .flat_map(|o| delta.iter().map(move |c| (o.clone() - c).abs()))
        .min()
        .expect("boundary set is nonempty");
    Some(PeriodicOrbitCert {
        word: ItineraryWord(word.to_vec()),
        point,
        period: p,
        preperiod: 0,
        separation,
        orbit,
        slope,
        intercept,
    })
}

#[derive(Clone, Debug)]
pub struct PeriodicityConfig {
    pub horizon: usize,
    /// Longest itinerary block considered.
    pub max_period: usize,
}

impl Default for PeriodicityConfig {
    fn default() -> Self {
        Self { horizon: 100_000, max_period: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeriodicityOutcome<S: Scalar = Rational> {
    /// The orbit enters the basin of a certified periodic orbit at
    /// `cert.preperiod`; `cert.point` is aligned with that state.
    Periodic(PeriodicOrbitCert<S>),
    HitDelta { step: usize },
    Exhausted { steps: usize },
}

pub(crate) struct Candidate<S: Scalar> {
    cert: Arc<PeriodicOrbitCert<S>>,
    /// Time aligned with `cert.orbit[0]`.
    origin: usize,
    /// First time of the repeated itinerary segment that produced the block.
    seg_start: usize,
    lo: Vec<Probe<S>>,
    hi: Vec<Probe<S>>,
}

impl<S: Scalar> Candidate<S> {
    fn new(cert: Arc<PeriodicOrbitCert<S>>, origin: usize, seg_start: usize) -> Self {
        let r = &cert.separation;
        let lo = cert.orbit.iter().map(|o| Probe::new(o.clone() - r)).collect();
        let hi = cert.orbit.iter().map(|o| Probe::new(o.clone() + r)).collect();
        Self { cert, origin, seg_start, lo, hi }
    }

    fn phase(&self, m: usize) -> usize {
        (m as i64 - self.origin as i64).rem_euclid(self.cert.period as i64) as usize
    }

    fn close(&self, t: &mut Tracker<'_, S>) -> bool {
        let j = self.phase(t.step());
        t.strictly_between(&self.lo[j], &self.hi[j])
    }
}

/// Itinerary-block periodicity detector, fed one state at a time.
pub(crate) struct PeriodDetector<'a, S: Scalar> {
    certifier: Certifier<'a, S>,
    max_period: usize,
    history: Vec<Symbol>,
    run: Vec<usize>,
    active: Vec<Candidate<S>>,
    found: Option<Candidate<S>>,
}

impl<'a, S: Scalar> PeriodDetector<'a, S> {
    pub fn new(spec: &'a MapSpec<S>, kernel: &'a Kernel<S>, max_period: usize) -> Self {
        Self {
            certifier: Certifier::new(spec, kernel),
            max_period,
            history: Vec::new(),
            run: vec![0; max_period + 1],
            active: Vec::new(),
            found: None,
        }
    }

    /// Returns `true` once the current state is within the separation radius
    /// of a certified orbit in the matching phase.
    pub fn observe(&mut self, t: &mut Tracker<'_, S>, sym: Symbol) -> bool {
        let m = t.step();
        debug_assert_eq!(m, self.history.len());
        let mut k = 0;
        while k < self.active.len() {
            let c = &self.active[k];
            if c.cert.word.0[c.phase(m)] != sym {
                self.active.swap_remove(k);
                continue;
            }
            if c.close(t) {
                self.found = Some(self.active.swap_remove(k));
                return true;
            }
            k += 1;
        }
        self.history.push(sym);
        let top = self.max_period.min(m);
        for p in 1..=top {
            if self.history[m - p] == sym {
                self.run[p] += 1;
                if self.run[p] == 2 * p {
                    if let Some(c) = self.trigger(m, p) {
                        if c.close(t) {
                            self.found = Some(c);
                            return true;
                        }
                        self.active.push(c);
                    }
                }
            } else {
                self.run[p] = 0;
            }
        }
        false
    }

    fn trigger(&mut self, m: usize, p: usize) -> Option<Candidate<S>> {
        let block = &self.history[m + 1 - p..=m];
        let cert = self.certifier.certify(block)?;
        let origin = m + 1;
        let dup = self
            .active
            .iter()
            .any(|a| a.cert.period == cert.period && a.cert.orbit[a.phase(origin)] == cert.orbit[0]);
        if dup {
            return None;
        }
        Some(Candidate::new(cert, origin, m + 1 - 3 * p))
    }

    pub fn take(&mut self) -> Option<Candidate<S>> {
        self.found.take()
    }
}

/// Search the orbit of `x` for an itinerary block whose certified periodic
/// orbit captures it. The returned preperiod is the first time the orbit is
/// within the separation radius of the certified orbit.
pub fn detect_eventual_periodicity<S: Scalar>(
    spec: &MapSpec<S>,
    x: &S,
    cfg: &PeriodicityConfig,
) -> Result<PeriodicityOutcome<S>> {
    let kernel = Kernel::new(spec);
    let mut det = PeriodDetector::new(spec, &kernel, cfg.max_period);
    let end = scan(&kernel, x, cfg.horizon, |t, s| det.observe(t, s))?;
    Ok(match end {
        ScanEnd::Stopped => {
            let c = det.take().expect("stopped scans have a candidate");
            PeriodicityOutcome::Periodic(first_witness(&kernel, x, &c)?)
        }
        ScanEnd::HitDelta(step) => PeriodicityOutcome::HitDelta { step },
        ScanEnd::Exhausted => PeriodicityOutcome::Exhausted { steps: cfg.horizon },
    })
}

/// Replay the orbit to find the earliest state within the separation radius
/// of the candidate orbit, and align the certificate with it.
pub(crate) fn first_witness<S: Scalar>(
    kernel: &Kernel<S>,
    x: &S,
    c: &Candidate<S>,
) -> Result<PeriodicOrbitCert<S>> {
    let mut t = Tracker::new(kernel, x)?;
    while t.step() < c.seg_start {
        t.advance();
    }
    loop {
        if c.close(&mut t) {
            let m = t.step();
            let mut cert = c.cert.rotate_left(c.phase(m));
            cert.preperiod = m;
            return Ok(cert);
        }
        t.advance();
    }
}
