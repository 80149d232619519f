//! Decomposition of the attractor into periodic orbits and Cantor pieces.
//!
//! Every one-sided limit `d` is classified from one pass over its orbit: a
//! certified periodic orbit whose basin the orbit enters, or left-right
//! recurrence evidence, or neither. Cantor evidence is attributed to a minimal
//! class of boundary points, and fragments sharing a periodic orbit or a
//! minimal class are merged into components.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::atoms::{attractor_enclosure, expand_atoms, merge_intervals, Interval};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, Probe, Tracker};
use crate::map::{boundary_data, DLabel, HypothesisFlags, Location, MapSpec};
use crate::orbit::{first_witness, scan, PeriodDetector, PeriodicOrbitCert, ScanEnd};
use crate::recurrence::{ClassGraph, DetectionConfig, LrDetector, LrRecurrenceReport, Subject};
use crate::scalar::{pow, to_pq, Scalar};
use crate::symbolic::{complexity, ComplexityProfile, ItineraryWord, DEFAULT_WINDOW};
use crate::Rational;

/// Longest factor length in the complexity annotation of a fragment.
pub const COMPLEXITY_N_MAX: usize = 30;

/// Analysis budget shared by all limits of one map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget<S: Scalar = Rational> {
    pub horizon: usize,
    pub max_period: usize,
    pub epsilon_schedule: Vec<S>,
    pub min_witnesses: usize,
    pub burn_in: usize,
    /// Atom depth of the enclosures.
    pub depth: usize,
}

impl<S: Scalar> Default for Budget<S> {
    fn default() -> Self {
        let d = DetectionConfig::<S>::default();
        Self {
            horizon: d.horizon,
            max_period: 1024,
            epsilon_schedule: d.epsilon_schedule,
            min_witnesses: d.min_witnesses,
            burn_in: d.burn_in,
            depth: 12,
        }
    }
}

impl<S: Scalar> Budget<S> {
    pub fn detection(&self) -> DetectionConfig<S> {
        DetectionConfig {
            horizon: self.horizon,
            epsilon_schedule: self.epsilon_schedule.clone(),
            min_witnesses: self.min_witnesses,
            burn_in: self.burn_in,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.detection().validate()?;
        if self.max_period == 0 || self.depth == 0 {
            return Err(Error::Config("max_period and depth must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FragmentKind<S: Scalar = Rational> {
    Periodic(PeriodicOrbitCert<S>),
    /// Some boundary point is lr-witnessed by the orbit.
    CantorEvidence,
    /// Horizon exhausted without a certificate or lr evidence.
    Undetermined,
    /// The orbit lands on the boundary set at this state index.
    HitsDelta { step: usize },
}

/// Classification of a single one-sided limit.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment<S: Scalar = Rational> {
    pub label: DLabel,
    pub point: S,
    pub kind: FragmentKind<S>,
    /// States examined.
    pub steps: usize,
    /// Present unless the orbit was certified periodic.
    pub lr: Option<LrRecurrenceReport<S>>,
    pub complexity: Option<ComplexityProfile>,
}

/// Classify the limit of the orbit of `d`.
pub fn classify_limit<S: Scalar>(spec: &MapSpec<S>, label: DLabel, d: &S, budget: &Budget<S>) -> Result<Fragment<S>> {
    budget.validate()?;
    let base = |kind, steps| Fragment { label, point: d.clone(), kind, steps, lr: None, complexity: None };
    if spec.in_delta(d) {
        return Ok(base(FragmentKind::HitsDelta { step: 0 }, 0));
    }
    let kernel = Kernel::new(spec);
    let cfg = budget.detection();
    let mut period = PeriodDetector::new(spec, &kernel, budget.max_period);
    let mut lr = LrDetector::new(spec, &cfg);
    let mut word = Vec::with_capacity(budget.horizon);
    let end = scan(&kernel, d, budget.horizon, |t, s| {
        word.push(s);
        lr.observe(t, s);
        period.observe(t, s)
    })?;
    let steps = word.len();
    if let ScanEnd::Stopped = end {
        let c = period.take().expect("stopped scans have a candidate");
        return Ok(base(FragmentKind::Periodic(first_witness(&kernel, d, &c)?), steps));
    }
    let hit = match end {
        ScanEnd::HitDelta(k) => Some(k),
        _ => None,
    };
    let report = lr.finish(Subject::Limit(label), d.clone(), &cfg, hit);
    let kind = match hit {
        Some(step) => FragmentKind::HitsDelta { step },
        None if report.witnessed().is_empty() => FragmentKind::Undetermined,
        None => FragmentKind::CantorEvidence,
    };
    let complexity = complexity(&ItineraryWord(word), COMPLEXITY_N_MAX, DEFAULT_WINDOW).ok();
    Ok(Fragment { label, point: d.clone(), kind, steps, lr: Some(report), complexity })
}

/// Fragments for every one-sided limit, computed once per distinct value.
pub fn classify_all<S: Scalar>(spec: &MapSpec<S>, budget: &Budget<S>) -> Result<Vec<Fragment<S>>> {
    let points = boundary_data(spec).points();
    let mut distinct: Vec<(DLabel, S)> = Vec::new();
    for (l, v) in &points {
        if !distinct.iter().any(|(_, w)| w == v) {
            distinct.push((*l, v.clone()));
        }
    }
    let done: Vec<Fragment<S>> = distinct
        .par_iter()
        .map(|(l, v)| classify_limit(spec, *l, v, budget))
        .collect::<Result<_>>()?;
    Ok(points
        .into_iter()
        .map(|(l, v)| {
            let mut f = done.iter().find(|f| f.point == v).expect("computed").clone();
            if f.label != l {
                f.label = l;
                if let Some(r) = &mut f.lr {
                    r.subject = Subject::Limit(l);
                }
            }
            f
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorChecks {
    /// `c_k` lies in the component enclosure.
    pub boundary_in_enclosure: bool,
    /// Every recorded state of `d_k^+` lies in `Lambda_n`.
    pub plus_in_attractor: bool,
    /// The orbit of `d_k^-` stays in the inflated enclosure; `None` when
    /// injectivity fails and the law does not apply.
    pub minus_in_enclosure: Option<bool>,
    /// Orbits of the other members, from step `n` on, stay in the inflated
    /// enclosure.
    pub members_in_enclosure: bool,
}

impl GeneratorChecks {
    pub fn all_pass(&self) -> bool {
        self.boundary_in_enclosure
            && self.plus_in_attractor
            && self.minus_in_enclosure.unwrap_or(true)
            && self.members_in_enclosure
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorEvidence<S: Scalar = Rational> {
    /// Minimal class, as boundary indices.
    pub class: Vec<usize>,
    pub generator: usize,
    pub generating_limits: Vec<DLabel>,
    /// Intervals of `Lambda_n` visited by the orbit of `d_k^+`.
    pub enclosure: Vec<Interval<S>>,
    pub horizon: usize,
    /// Finest radius at which a member orbit lr-witnessed the generator.
    pub epsilon: Option<S>,
    pub minimality_confirmed: bool,
    pub checks: GeneratorChecks,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentKind<S: Scalar = Rational> {
    Periodic(PeriodicOrbitCert<S>),
    CantorEvidence(CantorEvidence<S>),
    Undetermined { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentRecord<S: Scalar = Rational> {
    pub kind: ComponentKind<S>,
    pub members: Vec<DLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditStatus {
    Pass,
    Fail,
    /// Not every limit is determined or a hypothesis is unmet.
    Conditional,
    NotApplicable,
}

impl AuditStatus {
    pub fn name(&self) -> &'static str {
        match self {
            AuditStatus::Pass => "pass",
            AuditStatus::Fail => "fail",
            AuditStatus::Conditional => "conditional",
            AuditStatus::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundAudit {
    pub bound: String,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
    pub status: AuditStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport<S: Scalar = Rational> {
    pub components: Vec<ComponentRecord<S>>,
    pub n1: usize,
    pub n2: usize,
    pub undetermined_count: usize,
    /// `#D`.
    pub d_count: usize,
    pub pieces: usize,
    pub audits: Vec<BoundAudit>,
    pub flags: HypothesisFlags,
    /// `Lambda_n` at `depth`, within `error_bound` of the attractor.
    pub enclosure: Vec<Interval<S>>,
    pub depth: usize,
    pub error_bound: S,
    pub class_graph: Option<ClassGraph>,
    pub notes: Vec<String>,
}

impl<S: Scalar> DecompositionReport<S> {
    pub fn fully_determined(&self) -> bool {
        self.undetermined_count == 0
    }

    pub fn periodic(&self) -> impl Iterator<Item = &PeriodicOrbitCert<S>> {
        self.components.iter().filter_map(|c| match &c.kind {
            ComponentKind::Periodic(p) => Some(p),
            _ => None,
        })
    }

    pub fn cantor(&self) -> impl Iterator<Item = &CantorEvidence<S>> {
        self.components.iter().filter_map(|c| match &c.kind {
            ComponentKind::CantorEvidence(k) => Some(k),
            _ => None,
        })
    }
}

/// Sorted disjoint intervals tested against a tracker.
pub(crate) struct IntervalSet<S: Scalar> {
    lo_f: Vec<f64>,
    hi_f: Vec<f64>,
    lo: Vec<Probe<S>>,
    hi: Vec<Probe<S>>,
    open: bool,
}

impl<S: Scalar> IntervalSet<S> {
    /// `v` must be sorted and pairwise disjoint.
    pub fn new(v: &[Interval<S>], open: bool) -> Self {
        Self {
            lo_f: v.iter().map(|(a, _)| a.approx()).collect(),
            hi_f: v.iter().map(|(_, b)| b.approx()).collect(),
            lo: v.iter().map(|(a, _)| Probe::new(a.clone())).collect(),
            hi: v.iter().map(|(_, b)| Probe::new(b.clone())).collect(),
            open,
        }
    }

    /// Index of the interval containing the tracked state.
    pub fn find(&self, t: &mut Tracker<'_, S>) -> Option<usize> {
        let x = t.approx();
        let slack = 1e-9 * (1.0 + x.abs());
        let mut k = self.lo_f.partition_point(|&a| a <= x + slack);
        while k > 0 {
            k -= 1;
            if self.hi_f[k] < x - slack {
                break;
            }
            let (a, b) = (t.cmp(&self.lo[k]), t.cmp(&self.hi[k]));
            let inside = if self.open {
                a == Ordering::Greater && b == Ordering::Less
            } else {
                a != Ordering::Less && b != Ordering::Greater
            };
            if inside {
                return Some(k);
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }
}

/// Union of open intervals, merging only overlapping ones.
fn merge_open<S: Scalar>(mut v: Vec<Interval<S>>) -> Vec<Interval<S>> {
    v.sort();
    let mut out: Vec<Interval<S>> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some((_, h)) if a < *h => {
                if b > *h {
                    *h = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

fn inflate<S: Scalar>(v: &[Interval<S>], e: &S) -> Vec<Interval<S>> {
    merge_intervals(v.iter().map(|(a, b)| (a.clone() - e, b.clone() + e)).collect())
}

/// Run the orbit of `x` for `horizon` states and call `visit` from state
/// `from` on. Returns `false` if the orbit hits the boundary set.
fn follow<S: Scalar>(
    kernel: &Kernel<S>,
    x: &S,
    horizon: usize,
    from: usize,
    mut visit: impl FnMut(&mut Tracker<'_, S>),
) -> Result<bool> {
    let mut t = Tracker::new(kernel, x)?;
    for m in 0..horizon {
        if matches!(t.location(), Location::Boundary(_)) {
            return Ok(false);
        }
        if m >= from {
            visit(&mut t);
        }
        if m + 1 < horizon {
            t.advance();
        }
    }
    Ok(true)
}

/// Merge fragments into components, attribute Cantor evidence to minimal
/// classes, and audit the counting bounds.
///
/// Fails with [`Error::BoundViolation`] when every limit is determined, the
/// hypotheses hold, and a bound is still violated.
pub fn assemble<S: Scalar>(
    spec: &MapSpec<S>,
    fragments: Vec<Fragment<S>>,
    budget: &Budget<S>,
) -> Result<DecompositionReport<S>> {
    let n = spec.pieces();
    let bd = boundary_data(spec);
    let mut notes = Vec::new();
    let tree = expand_atoms(spec, budget.depth)?;
    let enclosure = attractor_enclosure(&tree);
    let error_bound = tree.error_bound(budget.depth);
    let mut components: Vec<ComponentRecord<S>> = Vec::new();

    // periodic components, keyed by the sorted orbit
    let mut periodic: Vec<(Vec<S>, ComponentRecord<S>)> = Vec::new();
    for f in &fragments {
        if let FragmentKind::Periodic(c) = &f.kind {
            let key = c.sorted_orbit();
            match periodic.iter_mut().find(|(k, _)| *k == key) {
                Some((_, rec)) => rec.members.push(f.label),
                None => periodic.push((key, ComponentRecord { kind: ComponentKind::Periodic(c.clone()), members: vec![f.label] })),
            }
        }
    }

    // order data on boundary points from the right limits
    let cantor: Vec<&Fragment<S>> = fragments.iter().filter(|f| f.kind == FragmentKind::CantorEvidence).collect();
    let mut domain = std::collections::BTreeSet::new();
    let mut relation = std::collections::BTreeSet::new();
    for f in &cantor {
        let w = f.lr.as_ref().expect("cantor fragments carry reports").witnessed();
        domain.extend(w.iter().copied().filter(|&k| k >= 1 && k < n));
        if let DLabel::Plus(j) = f.label {
            relation.extend(w.iter().filter(|&&i| i >= 1 && i < n).map(|&i| (i, j)));
        }
    }
    let domain: Vec<usize> = domain.into_iter().collect();
    let mut undetermined: Vec<(DLabel, String)> = Vec::new();
    let graph = if cantor.is_empty() {
        None
    } else {
        match ClassGraph::from_relation(&domain, &relation) {
            Ok(g) => Some(g),
            Err(e) => {
                notes.push(format!("Cantor evidence left undetermined: {e}"));
                for f in &cantor {
                    undetermined.push((f.label, format!("inconsistent order data: {e}")));
                }
                None
            }
        }
    };
    if let Some(g) = &graph {
        notes.extend(g.inconsistencies.iter().cloned());
        if g.nodes.iter().any(|nd| !nd.minimal) || g.minimal().len() > 1 {
            notes.push("incomparable or non-minimal classes may be comparable at a larger budget".into());
        }
    }

    // attribute Cantor fragments to minimal classes
    let mut by_class: BTreeMap<usize, Vec<&Fragment<S>>> = BTreeMap::new();
    let mut class_notes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    if let Some(g) = &graph {
        let minimal = g.minimal();
        for f in &cantor {
            let w = f.lr.as_ref().unwrap().witnessed();
            let direct: Vec<usize> =
                minimal.iter().copied().filter(|&m| g.nodes[m].members.iter().any(|i| w.contains(i))).collect();
            let chosen = match direct.as_slice() {
                [m] => Some(*m),
                [m, ..] => {
                    class_notes.entry(*m).or_default().push(format!(
                        "{} witnesses several minimal classes; attributed to the first",
                        f.label
                    ));
                    Some(*m)
                }
                [] => {
                    let below: Vec<usize> = minimal
                        .iter()
                        .copied()
                        .filter(|&m| w.iter().filter_map(|&k| g.class_of(k)).any(|b| g.leq(m, b)))
                        .collect();
                    if let Some(&m) = below.first() {
                        class_notes
                            .entry(m)
                            .or_default()
                            .push(format!("{} attributed through the order, not a direct witness", f.label));
                    }
                    below.first().copied()
                }
            };
            match chosen {
                Some(m) => by_class.entry(m).or_default().push(f),
                None => undetermined.push((f.label, "no minimal class below the witnessed boundary points".into())),
            }
        }
    }

    let kernel = Kernel::new(spec);
    let lambda_set = IntervalSet::new(&enclosure, false);
    for (m, members) in by_class {
        let g = graph.as_ref().unwrap();
        let node = &g.nodes[m];
        let plus_cantor = |i: usize| {
            fragments.iter().any(|f| f.label == DLabel::Plus(i) && f.kind == FragmentKind::CantorEvidence)
        };
        let generator = node.members.iter().copied().find(|&i| plus_cantor(i)).unwrap_or(node.members[0]);
        let mut cnotes = class_notes.remove(&m).unwrap_or_default();
        if !plus_cantor(generator) {
            cnotes.push(format!("d{generator}+ itself carries no Cantor evidence"));
        }
        let dplus = bd.d_plus[generator - 1].clone();
        let mut visited = vec![false; enclosure.len()];
        let mut plus_in_attractor = true;
        let plus_ok = !spec.in_delta(&dplus)
            && follow(&kernel, &dplus, budget.horizon, 0, |t| match lambda_set.find(t) {
                Some(k) => visited[k] = true,
                None => plus_in_attractor = false,
            })?;
        if !plus_ok {
            cnotes.push(format!("orbit of d{generator}+ meets the boundary set"));
        }
        let comp_enclosure: Vec<Interval<S>> =
            enclosure.iter().zip(&visited).filter(|(_, &v)| v).map(|(i, _)| i.clone()).collect();
        let inflated = IntervalSet::new(&inflate(&comp_enclosure, &error_bound), false);
        let boundary_in_enclosure = crate::atoms::intervals_contain(&comp_enclosure, spec.c(generator));
        let stays = |x: &S, from: usize| -> Result<bool> {
            if spec.in_delta(x) {
                return Ok(false);
            }
            let mut ok = true;
            let clean = follow(&kernel, x, budget.horizon, from, |t| {
                if ok && inflated.find(t).is_none() {
                    ok = false;
                }
            })?;
            Ok(ok && clean)
        };
        let minus_in_enclosure = if spec.flags.injective_per_piece {
            Some(stays(&bd.d_minus[generator - 1], 0)?)
        } else {
            cnotes.push("branches are not injective; the left-limit law is not checked".into());
            None
        };
        let mut members_in_enclosure = true;
        for f in &members {
            if f.label != DLabel::Plus(generator) && !stays(&f.point, budget.depth)? {
                members_in_enclosure = false;
            }
        }
        let epsilon = members
            .iter()
            .filter_map(|f| f.lr.as_ref())
            .flat_map(|r| r.visits.iter().filter(|v| v.index == generator))
            .filter_map(|v| match &v.status {
                crate::recurrence::LrStatus::LrWitnessed { epsilon, .. } => Some(epsilon.clone()),
                _ => None,
            })
            .min();
        let mut generating_limits = vec![DLabel::Plus(generator)];
        if spec.flags.injective_per_piece {
            generating_limits.push(DLabel::Minus(generator));
        }
        components.push(ComponentRecord {
            kind: ComponentKind::CantorEvidence(CantorEvidence {
                class: node.members.clone(),
                generator,
                generating_limits,
                enclosure: comp_enclosure,
                horizon: budget.horizon,
                epsilon,
                minimality_confirmed: node.minimality_confirmed,
                checks: GeneratorChecks {
                    boundary_in_enclosure,
                    plus_in_attractor: plus_in_attractor && plus_ok,
                    minus_in_enclosure,
                    members_in_enclosure,
                },
                notes: cnotes,
            }),
            members: members.iter().map(|f| f.label).collect(),
        });
    }
    let mut out: Vec<ComponentRecord<S>> = periodic.into_iter().map(|(_, r)| r).collect();
    out.append(&mut components);

    for f in &fragments {
        match f.kind {
            FragmentKind::Undetermined => undetermined.push((f.label, format!("no certificate or lr evidence in {} states", f.steps))),
            FragmentKind::HitsDelta { step } => undetermined.push((f.label, format!("orbit lands on the boundary set at state {step}"))),
            _ => {}
        }
    }
    undetermined.sort_by_key(|(l, _)| l.rank());
    let undetermined_count = undetermined.len();
    for (l, reason) in undetermined {
        out.push(ComponentRecord { kind: ComponentKind::Undetermined { reason }, members: vec![l] });
    }

    let n1 = out.iter().filter(|c| matches!(c.kind, ComponentKind::Periodic(_))).count();
    let n2 = out.iter().filter(|c| matches!(c.kind, ComponentKind::CantorEvidence(_))).count();
    let d_count = bd.distinct_count();
    let mut flags = spec.flags;
    if fragments.iter().any(|f| matches!(f.kind, FragmentKind::HitsDelta { .. })) {
        flags.d_in_xtilde = crate::map::Tri::Refuted;
    } else if fragments.iter().all(|f| matches!(f.kind, FragmentKind::Periodic(_))) {
        flags.d_in_xtilde = crate::map::Tri::Verified;
    }
    let hypotheses = flags.injective_per_piece && flags.d_in_xtilde != crate::map::Tri::Refuted;
    let determined = undetermined_count == 0;
    let audit = |bound: &str, lhs: usize, rhs: usize, applies: bool| {
        let holds = lhs <= rhs;
        let status = if !applies {
            AuditStatus::NotApplicable
        } else if !determined || !hypotheses {
            AuditStatus::Conditional
        } else if holds {
            AuditStatus::Pass
        } else {
            AuditStatus::Fail
        };
        BoundAudit { bound: bound.into(), lhs, rhs, holds, status }
    };
    let audits = vec![
        audit("N1 + N2 <= #D", n1 + n2, d_count, true),
        audit("N1 + 2 N2 <= 2(N - 1)", n1 + 2 * n2, 2 * (n - 1), true),
        audit("N1 + N2 <= N", n1 + n2, n, flags.increasing_per_piece),
    ];
    if !hypotheses {
        notes.push("map hypotheses unmet; audits are conditional".into());
    }
    if n2 > 0 {
        notes.push("left-sided classes are symmetric and not built separately".into());
    }
    if let Some(a) = audits.iter().find(|a| a.status == AuditStatus::Fail) {
        return Err(Error::BoundViolation(format!("{}: {} > {}", a.bound, a.lhs, a.rhs)));
    }
    Ok(DecompositionReport {
        components: out,
        n1,
        n2,
        undetermined_count,
        d_count,
        pieces: n,
        audits,
        flags,
        enclosure,
        depth: budget.depth,
        error_bound,
        class_graph: graph,
        notes,
    })
}

/// Classify every limit and assemble the report.
pub fn decompose<S: Scalar>(spec: &MapSpec<S>, budget: &Budget<S>) -> Result<DecompositionReport<S>> {
    let fragments = classify_all(spec, budget)?;
    assemble(spec, fragments, budget)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossValidation<S: Scalar = Rational> {
    pub grid: usize,
    pub tail: usize,
    pub burn_in: usize,
    /// Start points whose orbit avoided the boundary set.
    pub tested: usize,
    pub hit_delta: usize,
    pub covered: usize,
    /// Start with the most uncovered tail states, and that count.
    pub worst: Option<(S, usize)>,
}

impl<S: Scalar> CrossValidation<S> {
    pub fn fraction(&self) -> f64 {
        if self.tested == 0 {
            1.0
        } else {
            self.covered as f64 / self.tested as f64
        }
    }
}

/// Grid start `j` of `grid`, evenly spaced over `X` including both ends.
pub fn grid_point<S: Scalar>(spec: &MapSpec<S>, j: usize, grid: usize) -> S {
    if grid <= 1 {
        return spec.c(0).clone();
    }
    let d = spec.partition().diam();
    spec.c(0).clone() + d * S::from_i64s(j as i64, (grid - 1) as i64)
}

/// Check that orbit tails of grid points lie near the components of `report`:
/// within the separation radius of a periodic orbit, or inside a Cantor
/// enclosure inflated by the depth error.
pub fn cross_validate<S: Scalar>(
    spec: &MapSpec<S>,
    report: &DecompositionReport<S>,
    grid: usize,
    tail: usize,
    burn_in: usize,
) -> Result<CrossValidation<S>> {
    if grid == 0 || tail == 0 {
        return Err(Error::Config("grid and tail must be positive".into()));
    }
    let kernel = Kernel::new(spec);
    let mut nbhd = Vec::new();
    for c in report.periodic() {
        for o in &c.orbit {
            nbhd.push((o.clone() - &c.separation, o.clone() + &c.separation));
        }
    }
    let basins = IntervalSet::new(&merge_open(nbhd), true);
    let mut cantor = Vec::new();
    for k in report.cantor() {
        cantor.extend(inflate(&k.enclosure, &report.error_bound));
    }
    let cantor = IntervalSet::new(&merge_intervals(cantor), false);
    let results: Vec<Option<usize>> = (0..grid)
        .into_par_iter()
        .map(|j| -> Result<Option<usize>> {
            let x = grid_point(spec, j, grid);
            let mut t = Tracker::new(&kernel, &x)?;
            let mut uncovered = 0;
            for m in 0..tail {
                if matches!(t.location(), Location::Boundary(_)) {
                    return Ok(None);
                }
                if !basins.is_empty() && basins.find(&mut t).is_some() {
                    // inside the basin every later state stays close
                    return Ok(Some(uncovered));
                }
                if m >= burn_in && (cantor.is_empty() || cantor.find(&mut t).is_none()) {
                    uncovered += 1;
                }
                if m + 1 < tail {
                    t.advance();
                }
            }
            Ok(Some(uncovered))
        })
        .collect::<Result<_>>()?;
    let mut cv = CrossValidation { grid, tail, burn_in, tested: 0, hit_delta: 0, covered: 0, worst: None };
    for (j, r) in results.into_iter().enumerate() {
        match r {
            None => cv.hit_delta += 1,
            Some(u) => {
                cv.tested += 1;
                if u == 0 {
                    cv.covered += 1;
                } else if cv.worst.as_ref().is_none_or(|(_, w)| u > *w) {
                    cv.worst = Some((grid_point(spec, j, grid), u));
                }
            }
        }
    }
    Ok(cv)
}

/// `lambda^n * diam(X)` for a map.
pub fn depth_error<S: Scalar>(spec: &MapSpec<S>, n: usize) -> S {
    pow(spec.lambda(), n) * spec.partition().diam()
}

/// Short human-readable summary of a component.
pub fn describe<S: Scalar>(c: &ComponentRecord<S>) -> String {
    let members: Vec<String> = c.members.iter().map(|l| l.to_string()).collect();
    match &c.kind {
        ComponentKind::Periodic(p) => format!(
            "periodic orbit of period {} through {} (separation {}), limits {}",
            p.period,
            to_pq(&p.point),
            to_pq(&p.separation),
            members.join(" ")
        ),
        ComponentKind::CantorEvidence(k) => format!(
            "Cantor evidence generated by c{} (class {:?}), limits {}",
            k.generator,
            k.class,
            members.join(" ")
        ),
        ComponentKind::Undetermined { reason } => format!("undetermined {}: {reason}", members.join(" ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn small() -> Budget {
        Budget { horizon: 1000, ..Budget::default() }
    }

    #[test]
    fn e1_limits() {
        let m = gallery::e1();
        let f = classify_limit(&m, DLabel::Minus(1), &r(1, 4), &small()).unwrap();
        let FragmentKind::Periodic(c) = f.kind else { panic!() };
        assert_eq!(c.orbit, vec![r(0, 1)]);
        let f = classify_limit(&m, DLabel::Plus(1), &r(3, 4), &small()).unwrap();
        let FragmentKind::Periodic(c) = f.kind else { panic!() };
        assert_eq!(c.orbit, vec![r(1, 1)]);
    }

    #[test]
    fn e1_report() {
        let rep = decompose(&gallery::e1(), &small()).unwrap();
        assert_eq!((rep.n1, rep.n2, rep.undetermined_count, rep.d_count), (2, 0, 0, 4));
        assert!(rep.audits.iter().all(|a| a.status == AuditStatus::Pass));
        let cv = cross_validate(&gallery::e1(), &rep, 101, 200, 100).unwrap();
        assert_eq!((cv.tested, cv.hit_delta, cv.covered), (100, 1, 100));
    }

    #[test]
    fn grid_of_one_at_fixed_point() {
        let rep = decompose(&gallery::e1(), &small()).unwrap();
        let cv = cross_validate(&gallery::e1(), &rep, 1, 50, 10).unwrap();
        assert_eq!((cv.tested, cv.covered), (1, 1));
    }

    #[test]
    fn limit_on_boundary_is_undetermined() {
        let m = crate::Map::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![(r(1, 2), r(1, 2)), (r(1, 2), r(1, 2))], (false, false), None)
            .unwrap();
        let rep = decompose(&m, &small()).unwrap();
        assert!(rep.undetermined_count >= 1);
        assert_eq!(rep.flags.d_in_xtilde, crate::map::Tri::Refuted);
        assert!(rep.audits.iter().all(|a| a.status != AuditStatus::Pass));
    }
}
