//! Piecewise contracting interval maps with affine branches.
//!
//! A map is given by a partition `c_0 < c_1 < ... < c_N` of the interval
//! `X = [c_0, c_N]` into pieces `X_1 = [c_0, c_1)`, `X_i = (c_{i-1}, c_i)`,
//! `X_N = (c_{N-1}, c_N]` and one affine branch per piece. The boundary set
//! holds the interior endpoints, plus `c_0` or `c_N` when the corresponding end
//! piece is declared open. The map is never evaluated on the boundary set; only
//! the one-sided limits of the branches there are used.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbit::{detect_eventual_periodicity, PeriodicityConfig, PeriodicityOutcome};
use crate::scalar::{max_of, min_of, parse_pq, to_pq, Scalar};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition<S: Scalar = Rational> {
    endpoints: Vec<S>,
}

impl<S: Scalar> Partition<S> {
    pub fn new(endpoints: Vec<S>) -> Result<Self> {
        if endpoints.len() < 3 {
            return Err(Error::BadPartition(format!(
                "need at least two pieces (three endpoints), got {} endpoints",
                endpoints.len()
            )));
        }
        if let Some(w) = endpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::BadPartition(format!(
                "endpoints must be strictly increasing: {} >= {}",
                to_pq(&w[0]),
                to_pq(&w[1])
            )));
        }
        Ok(Self { endpoints })
    }

    /// Number of pieces `N`.
    pub fn pieces(&self) -> usize {
        self.endpoints.len() - 1
    }

    /// Endpoint `c_k`, `k` in `0..=N`.
    pub fn c(&self, k: usize) -> &S {
        &self.endpoints[k]
    }

    pub fn endpoints(&self) -> &[S] {
        &self.endpoints
    }

    pub fn lo(&self) -> &S {
        &self.endpoints[0]
    }

    pub fn hi(&self) -> &S {
        &self.endpoints[self.pieces()]
    }

    pub fn diam(&self) -> S {
        self.hi().clone() - self.lo()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch<S: Scalar = Rational> {
    pub slope: S,
    pub intercept: S,
    /// Piece label in `1..=N`.
    pub piece: usize,
}

impl<S: Scalar> Branch<S> {
    pub fn eval(&self, x: &S) -> S {
        self.slope.clone() * x + &self.intercept
    }
}

/// Three-valued evidence for a semi-decidable property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tri {
    Verified,
    Refuted,
    UnknownAtHorizon,
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Verified => "verified",
            Tri::Refuted => "refuted",
            Tri::UnknownAtHorizon => "unknown-at-horizon",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub injective_per_piece: bool,
    pub increasing_per_piece: bool,
    #[serde(rename = "D_in_Xtilde")]
    pub d_in_xtilde: Tri,
}

/// Where a point sits relative to the partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    /// Inside piece `X_i`, `i` in `1..=N`.
    Piece(usize),
    /// Equal to the boundary point `c_k`, `k` in `0..=N`.
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapSpec<S: Scalar = Rational> {
    partition: Partition<S>,
    branches: Vec<Branch<S>>,
    lambda: S,
    open_ends: (bool, bool),
    pub flags: HypothesisFlags,
}

impl<S: Scalar> MapSpec<S> {
    /// Validate a map from its parts. `lambda` defaults to the largest
    /// absolute slope.
    pub fn new(
        endpoints: Vec<S>,
        branches: Vec<(S, S)>,
        open_ends: (bool, bool),
        lambda: Option<S>,
    ) -> Result<Self> {
        let partition = Partition::new(endpoints)?;
        let n = partition.pieces();
        if branches.len() != n {
            return Err(Error::BadPartition(format!(
                "{} pieces but {} branches",
                n,
                branches.len()
            )));
        }
        let one = S::one();
        let branches: Vec<Branch<S>> = branches
            .into_iter()
            .enumerate()
            .map(|(k, (slope, intercept))| Branch { slope, intercept, piece: k + 1 })
            .collect();
        let mut max_slope = S::zero();
        for b in &branches {
            let a = b.slope.abs();
            if a >= one {
                return Err(Error::NonContracting { piece: b.piece, slope: to_pq(&b.slope) });
            }
            max_slope = max_of(&max_slope, &a);
            let u = b.eval(partition.c(b.piece - 1));
            let v = b.eval(partition.c(b.piece));
            let (lo, hi) = (min_of(&u, &v), max_of(&u, &v));
            if &lo < partition.lo() || &hi > partition.hi() {
                return Err(Error::EscapesDomain { piece: b.piece, lo: to_pq(&lo), hi: to_pq(&hi) });
            }
        }
        let lambda = match lambda {
            Some(l) => {
                if l < max_slope || l >= one {
                    return Err(Error::BadLambda(format!(
                        "declared {} must satisfy max|slope| = {} <= lambda < 1",
                        to_pq(&l),
                        to_pq(&max_slope)
                    )));
                }
                l
            }
            None => max_slope,
        };
        let flags = HypothesisFlags {
            injective_per_piece: branches.iter().all(|b| !b.slope.is_zero()),
            increasing_per_piece: branches.iter().all(|b| b.slope.is_positive()),
            d_in_xtilde: Tri::UnknownAtHorizon,
        };
        Ok(Self { partition, branches, lambda, open_ends, flags })
    }

    pub fn partition(&self) -> &Partition<S> {
        &self.partition
    }

    pub fn pieces(&self) -> usize {
        self.partition.pieces()
    }

    pub fn c(&self, k: usize) -> &S {
        self.partition.c(k)
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    pub fn open_ends(&self) -> (bool, bool) {
        self.open_ends
    }

    /// Branch of piece `i`, `i` in `1..=N`.
    pub fn branch(&self, i: usize) -> &Branch<S> {
        &self.branches[i - 1]
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    /// Indices `k` with `c_k` in the boundary set, ascending.
    pub fn delta_indices(&self) -> Vec<usize> {
        let n = self.pieces();
        let mut out = Vec::with_capacity(n + 1);
        if self.open_ends.0 {
            out.push(0);
        }
        out.extend(1..n);
        if self.open_ends.1 {
            out.push(n);
        }
        out
    }

    pub fn delta_points(&self) -> Vec<S> {
        self.delta_indices().into_iter().map(|k| self.c(k).clone()).collect()
    }

    pub fn locate(&self, x: &S) -> Result<Location> {
        let n = self.pieces();
        if x < self.partition.lo() || x > self.partition.hi() {
            return Err(Error::OutsideDomain(to_pq(x)));
        }
        let eps = self.partition.endpoints();
        // first index k with c_k >= x
        let k = eps.partition_point(|c| c < x);
        if &eps[k] == x {
            return Ok(match k {
                0 if !self.open_ends.0 => Location::Piece(1),
                k if k == n && !self.open_ends.1 => Location::Piece(n),
                k => Location::Boundary(k),
            });
        }
        Ok(Location::Piece(k))
    }

    pub fn in_delta(&self, x: &S) -> bool {
        matches!(self.locate(x), Ok(Location::Boundary(_)))
    }

    /// One step of the map. Fails on the boundary set and outside `X`.
    pub fn apply(&self, x: &S) -> Result<(usize, S)> {
        match self.locate(x)? {
            Location::Piece(i) => Ok((i, self.branch(i).eval(x))),
            Location::Boundary(_) => Err(Error::StartOnDelta(to_pq(x))),
        }
    }

    pub fn to_raw(&self) -> RawMapSpec {
        RawMapSpec {
            endpoints: self.partition.endpoints().iter().map(to_pq).collect(),
            branches: self
                .branches
                .iter()
                .map(|b| RawBranch { slope: to_pq(&b.slope), intercept: to_pq(&b.intercept) })
                .collect(),
            open_ends: [self.open_ends.0, self.open_ends.1],
            lambda: Some(to_pq(&self.lambda)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMapSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        validate_map(&raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("plain data serializes")
    }
}

/// Map-spec file layout. All rationals are `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMapSpec {
    pub endpoints: Vec<String>,
    pub branches: Vec<RawBranch>,
    #[serde(default)]
    pub open_ends: [bool; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBranch {
    pub slope: String,
    pub intercept: String,
}

pub fn validate_map<S: Scalar>(raw: &RawMapSpec) -> Result<MapSpec<S>> {
    let endpoints = raw.endpoints.iter().map(|s| parse_pq(s)).collect::<Result<Vec<S>>>()?;
    let branches = raw
        .branches
        .iter()
        .map(|b| Ok((parse_pq(&b.slope)?, parse_pq(&b.intercept)?)))
        .collect::<Result<Vec<(S, S)>>>()?;
    let lambda = raw.lambda.as_deref().map(parse_pq).transpose()?;
    MapSpec::new(endpoints, branches, (raw.open_ends[0], raw.open_ends[1]), lambda)
}

/// Names of the one-sided limits `d_0`, `d_k^-`, `d_k^+`, `d_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DLabel {
    D0,
    Minus(usize),
    Plus(usize),
    DN,
}

impl DLabel {
    /// Sort key following `d_0, d_1^-, d_1^+, d_2^-, ..., d_N`.
    pub fn rank(&self) -> (usize, usize) {
        match *self {
            DLabel::D0 => (0, 0),
            DLabel::Minus(k) => (k, 0),
            DLabel::Plus(k) => (k, 1),
            DLabel::DN => (usize::MAX, 0),
        }
    }
}

impl fmt::Display for DLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLabel::D0 => write!(f, "d0"),
            DLabel::Minus(k) => write!(f, "d{k}-"),
            DLabel::Plus(k) => write!(f, "d{k}+"),
            DLabel::DN => write!(f, "dN"),
        }
    }
}

impl FromStr for DLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a one-sided limit label: {s:?}"));
        match s {
            "d0" => return Ok(DLabel::D0),
            "dN" => return Ok(DLabel::DN),
            _ => {}
        }
        let body = s.strip_prefix('d').ok_or_else(bad)?;
        let (digits, ctor): (&str, fn(usize) -> DLabel) = if let Some(d) = body.strip_suffix('-') {
            (d, DLabel::Minus)
        } else if let Some(d) = body.strip_suffix('+') {
            (d, DLabel::Plus)
        } else {
            return Err(bad());
        };
        let k: usize = digits.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(ctor(k))
    }
}

/// One-sided limits of the branches at the piece endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryData<S: Scalar = Rational> {
    pub d0: S,
    pub dn: S,
    /// `d_k^- = f_k(c_k)` at index `k - 1`.
    pub d_minus: Vec<S>,
    /// `d_k^+ = f_{k+1}(c_k)` at index `k - 1`.
    pub d_plus: Vec<S>,
}

impl<S: Scalar> BoundaryData<S> {
    pub fn get(&self, label: DLabel) -> Option<&S> {
        match label {
            DLabel::D0 => Some(&self.d0),
            DLabel::DN => Some(&self.dn),
            DLabel::Minus(k) => self.d_minus.get(k.checked_sub(1)?),
            DLabel::Plus(k) => self.d_plus.get(k.checked_sub(1)?),
        }
    }

    /// All labelled limits in canonical order.
    pub fn points(&self) -> Vec<(DLabel, S)> {
        let mut out = vec![(DLabel::D0, self.d0.clone())];
        for (k, (m, p)) in self.d_minus.iter().zip(&self.d_plus).enumerate() {
            out.push((DLabel::Minus(k + 1), m.clone()));
            out.push((DLabel::Plus(k + 1), p.clone()));
        }
        out.push((DLabel::DN, self.dn.clone()));
        out
    }

    /// `#D`, counting coincident values once.
    pub fn distinct_count(&self) -> usize {
        let mut vals: Vec<S> = self.points().into_iter().map(|(_, v)| v).collect();
        vals.sort();
        vals.dedup();
        vals.len()
    }
}

pub fn boundary_data<S: Scalar>(spec: &MapSpec<S>) -> BoundaryData<S> {
    let n = spec.pieces();
    BoundaryData {
        d0: spec.branch(1).eval(spec.c(0)),
        dn: spec.branch(n).eval(spec.c(n)),
        d_minus: (1..n).map(|k| spec.branch(k).eval(spec.c(k))).collect(),
        d_plus: (1..n).map(|k| spec.branch(k + 1).eval(spec.c(k))).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `f^(step-1)(d)` lies on the boundary set. Steps count applications of
    /// the map from the piece endpoint, so `d` itself is step 1.
    Refuted { step: usize },
    /// The orbit falls into the basin of a certified periodic orbit.
    Verified { period: usize, preperiod: usize },
    UnknownAtHorizon { horizon: usize },
}

#[derive(Clone, Debug)]
pub struct XtildeCheck<S: Scalar = Rational> {
    pub points: Vec<(DLabel, S, Membership)>,
    pub overall: Tri,
}

/// Decide, as far as `horizon` allows, whether every one-sided limit has an
/// orbit avoiding the boundary set.
///
/// Iteration alone can only refute membership; a point is reported verified
/// only when its orbit enters the basin of a certified periodic orbit.
pub fn check_d_in_xtilde<S: Scalar>(spec: &MapSpec<S>, horizon: usize) -> Result<XtildeCheck<S>> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let cfg = PeriodicityConfig { horizon, ..PeriodicityConfig::default() };
    let mut points = Vec::new();
    for (label, d) in boundary_data(spec).points() {
        let m = if spec.in_delta(&d) {
            Membership::Refuted { step: 1 }
        } else {
            match detect_eventual_periodicity(spec, &d, &cfg)? {
                PeriodicityOutcome::Periodic(cert) => {
                    Membership::Verified { period: cert.period, preperiod: cert.preperiod }
                }
                PeriodicityOutcome::HitDelta { step } => Membership::Refuted { step: step + 1 },
                PeriodicityOutcome::Exhausted { .. } => Membership::UnknownAtHorizon { horizon },
            }
        };
        points.push((label, d, m));
    }
    let overall = if points.iter().any(|p| matches!(p.2, Membership::Refuted { .. })) {
        Tri::Refuted
    } else if points.iter().all(|p| matches!(p.2, Membership::Verified { .. })) {
        Tri::Verified
    } else {
        Tri::UnknownAtHorizon
    };
    Ok(XtildeCheck { points, overall })
}
