//! Left-right recurrence of boundary points and the induced order on them.
//!
//! A boundary point `c_i` is left-right recurrently visited by the orbit of
//! `x` if the orbit comes arbitrarily close to `c_i` infinitely often from
//! inside `X_i` and from inside `X_{i+1}`. That property is not decidable from
//! a finite orbit, so [`detect_lr`] records approaches on a decreasing schedule
//! of radii and reports the smallest radius at which both sides were visited
//! at least `min_witnesses` times.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Probe, Tracker};
use crate::map::{boundary_data, DLabel, MapSpec};
use crate::orbit::{scan, ScanEnd};
use crate::scalar::{to_pq, Scalar};
use crate::symbolic::Symbol;
use crate::Rational;

/// Cap on the visit times kept per boundary point, side and level.
pub const TIMES_CAP: usize = 64;
/// Cap on the witness log of one report.
pub const LOG_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionConfig<S: Scalar = Rational> {
    pub horizon: usize,
    /// Strictly decreasing radii.
    pub epsilon_schedule: Vec<S>,
    /// Visits required on each side.
    pub min_witnesses: usize,
    /// Visits before this step are ignored.
    pub burn_in: usize,
}

impl<S: Scalar> Default for DetectionConfig<S> {
    fn default() -> Self {
        let mut eps = Vec::new();
        let mut d: i64 = 1;
        for _ in 0..6 {
            d *= 10;
            eps.push(S::from_i64s(1, d));
        }
        Self { horizon: 100_000, epsilon_schedule: eps, min_witnesses: 4, burn_in: 0 }
    }
}

impl<S: Scalar> DetectionConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.epsilon_schedule.is_empty() {
            return Err(Error::Config("epsilon schedule is empty".into()));
        }
        if !self.epsilon_schedule.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::Config("epsilon schedule must be strictly decreasing".into()));
        }
        if !self.epsilon_schedule.last().unwrap().is_positive() {
            return Err(Error::Config("epsilon schedule must stay positive".into()));
        }
        if self.min_witnesses < 2 {
            return Err(Error::Config("min_witnesses must be at least 2".into()));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::Config("burn-in must be shorter than the horizon".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Approach from the piece to the left of the boundary point.
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LrStatus<S: Scalar = Rational> {
    /// Both sides visited at least `min_witnesses` times within `epsilon`,
    /// the smallest schedule radius for which this holds.
    LrWitnessed { level: usize, epsilon: S },
    /// Approached, but not from both sides often enough at any radius.
    OneSidedOnly,
    NeverNear,
}

impl<S: Scalar> LrStatus<S> {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, LrStatus::LrWitnessed { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LrStatus::LrWitnessed { .. } => "lr-witnessed",
            LrStatus::OneSidedOnly => "one-sided-only",
            LrStatus::NeverNear => "never-near",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryVisits<S: Scalar = Rational> {
    /// Index `k` of the boundary point `c_k`.
    pub index: usize,
    pub status: LrStatus<S>,
    /// Visit counts per schedule level.
    pub left_counts: Vec<usize>,
    pub right_counts: Vec<usize>,
    /// First visit times per level, at most [`TIMES_CAP`] each.
    pub left_times: Vec<Vec<usize>>,
    pub right_times: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub step: usize,
    pub index: usize,
    pub side: Side,
    /// Number of schedule radii the visit falls within.
    pub depth: usize,
    /// Approximate distance to the boundary point.
    pub distance: f64,
}

/// Subject of a recurrence report.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Limit(DLabel),
    Point(String),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Limit(l) => write!(f, "{l}"),
            Subject::Point(p) => f.write_str(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrRecurrenceReport<S: Scalar = Rational> {
    pub subject: Subject,
    pub start: S,
    pub epsilon_schedule: Vec<S>,
    pub min_witnesses: usize,
    /// States examined, `x_0 .. x_{steps-1}`.
    pub steps: usize,
    pub hit_delta_at: Option<usize>,
    /// One entry per boundary point, ascending index.
    pub visits: Vec<BoundaryVisits<S>>,
    pub log: Vec<Witness>,
}

impl<S: Scalar> LrRecurrenceReport<S> {
    /// Indices of the lr-witnessed boundary points.
    pub fn witnessed(&self) -> Vec<usize> {
        self.visits.iter().filter(|v| v.status.is_witnessed()).map(|v| v.index).collect()
    }

    pub fn is_witnessed(&self, k: usize) -> bool {
        self.visits.iter().any(|v| v.index == k && v.status.is_witnessed())
    }
}

/// Per-orbit approach recorder, fed one state at a time.
pub(crate) struct LrDetector<S: Scalar> {
    n: usize,
    burn_in: usize,
    levels: usize,
    /// Boundary indices in the boundary set, ascending.
    indices: Vec<usize>,
    slot: Vec<Option<usize>>,
    /// `c_k - eps_l` and `c_k + eps_l` per slot and level.
    below: Vec<Vec<Probe<S>>>,
    above: Vec<Vec<Probe<S>>>,
    counts: Vec<[Vec<usize>; 2]>,
    times: Vec<[Vec<Vec<usize>>; 2]>,
    log: Vec<Witness>,
    c_f: Vec<f64>,
    steps: usize,
}

impl<S: Scalar> LrDetector<S> {
    pub fn new(spec: &MapSpec<S>, cfg: &DetectionConfig<S>) -> Self {
        let n = spec.pieces();
        let indices = spec.delta_indices();
        let mut slot = vec![None; n + 1];
        for (s, &k) in indices.iter().enumerate() {
            slot[k] = Some(s);
        }
        let levels = cfg.epsilon_schedule.len();
        let below = indices
            .iter()
            .map(|&k| cfg.epsilon_schedule.iter().map(|e| Probe::new(spec.c(k).clone() - e)).collect())
            .collect();
        let above = indices
            .iter()
            .map(|&k| cfg.epsilon_schedule.iter().map(|e| Probe::new(spec.c(k).clone() + e)).collect())
            .collect();
        let counts = indices.iter().map(|_| [vec![0; levels], vec![0; levels]]).collect();
        let times = indices.iter().map(|_| [vec![Vec::new(); levels], vec![Vec::new(); levels]]).collect();
        Self {
            n,
            burn_in: cfg.burn_in,
            levels,
            below,
            above,
            counts,
            times,
            log: Vec::new(),
            c_f: spec.partition().endpoints().iter().map(|c| c.approx()).collect(),
            indices,
            slot,
            steps: 0,
        }
    }

    pub fn observe(&mut self, t: &mut Tracker<'_, S>, sym: Symbol) {
        let m = t.step();
        self.steps = m + 1;
        if m < self.burn_in {
            return;
        }
        let i = sym as usize;
        // left approach to c_i from X_i
        if let Some(s) = self.slot[i] {
            let mut depth = 0;
            while depth < self.levels && t.cmp(&self.below[s][depth]) == std::cmp::Ordering::Greater {
                depth += 1;
            }
            self.record(s, Side::Left, depth, m, self.c_f[i] - t.approx());
        }
        // right approach to c_{i-1} from X_i
        if let Some(s) = self.slot[i - 1] {
            let mut depth = 0;
            while depth < self.levels && t.cmp(&self.above[s][depth]) == std::cmp::Ordering::Less {
                depth += 1;
            }
            self.record(s, Side::Right, depth, m, t.approx() - self.c_f[i - 1]);
        }
        debug_assert!(i <= self.n);
    }

    fn record(&mut self, s: usize, side: Side, depth: usize, m: usize, distance: f64) {
        if depth == 0 {
            return;
        }
        let sd = side as usize;
        for l in 0..depth {
            self.counts[s][sd][l] += 1;
            let ts = &mut self.times[s][sd][l];
            if ts.len() < TIMES_CAP {
                ts.push(m);
            }
        }
        if self.log.len() < LOG_CAP {
            self.log.push(Witness { step: m, index: self.indices[s], side, depth, distance: distance.abs() });
        }
    }

    pub fn finish(self, subject: Subject, start: S, cfg: &DetectionConfig<S>, hit: Option<usize>) -> LrRecurrenceReport<S> {
        let mut visits = Vec::with_capacity(self.indices.len());
        for (s, &k) in self.indices.iter().enumerate() {
            let [lc, rc] = &self.counts[s];
            let deepest = (0..self.levels)
                .rev()
                .find(|&l| lc[l] >= cfg.min_witnesses && rc[l] >= cfg.min_witnesses);
            let status = match deepest {
                Some(l) => LrStatus::LrWitnessed { level: l, epsilon: cfg.epsilon_schedule[l].clone() },
                None if lc[0] + rc[0] > 0 => LrStatus::OneSidedOnly,
                None => LrStatus::NeverNear,
            };
            let [lt, rt] = &self.times[s];
            visits.push(BoundaryVisits {
                index: k,
                status,
                left_counts: lc.clone(),
                right_counts: rc.clone(),
                left_times: lt.clone(),
                right_times: rt.clone(),
            });
        }
        LrRecurrenceReport {
            subject,
            start,
            epsilon_schedule: cfg.epsilon_schedule.clone(),
            min_witnesses: cfg.min_witnesses,
            steps: self.steps,
            hit_delta_at: hit,
            visits,
            log: self.log,
        }
    }
}

/// Record the approaches of the orbit of `x` to every boundary point.
pub fn detect_lr<S: Scalar>(
    spec: &MapSpec<S>,
    subject: Subject,
    x: &S,
    cfg: &DetectionConfig<S>,
) -> Result<LrRecurrenceReport<S>> {
    cfg.validate()?;
    let kernel = Kernel::new(spec);
    let mut det = LrDetector::new(spec, cfg);
    let end = scan(&kernel, x, cfg.horizon, |t, s| {
        det.observe(t, s);
        false
    })?;
    let hit = match end {
        ScanEnd::HitDelta(k) => Some(k),
        _ => None,
    };
    Ok(det.finish(subject, x.clone(), cfg, hit))
}

/// Reports for every right limit `d_k^+`, in index order.
pub fn detect_lr_right_limits<S: Scalar>(
    spec: &MapSpec<S>,
    cfg: &DetectionConfig<S>,
) -> Result<Vec<LrRecurrenceReport<S>>> {
    use rayon::prelude::*;
    let bd = boundary_data(spec);
    (1..spec.pieces())
        .into_par_iter()
        .map(|k| {
            let d = bd.d_plus[k - 1].clone();
            if spec.in_delta(&d) {
                return Ok(LrRecurrenceReport {
                    subject: Subject::Limit(DLabel::Plus(k)),
                    start: d,
                    epsilon_schedule: cfg.epsilon_schedule.clone(),
                    min_witnesses: cfg.min_witnesses,
                    steps: 0,
                    hit_delta_at: Some(0),
                    visits: LrDetector::new(spec, cfg)
                        .finish(Subject::Limit(DLabel::Plus(k)), S::zero(), cfg, None)
                        .visits,
                    log: Vec::new(),
                });
            }
            detect_lr(spec, Subject::Limit(DLabel::Plus(k)), &d, cfg)
        })
        .collect()
}

/// Class of boundary points under the mutual-witness equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassNode {
    /// Boundary indices, ascending.
    pub members: Vec<usize>,
    pub minimal: bool,
    /// For a minimal node: every witnessed `R(j, i)` with `i` in the class is
    /// matched by `R(i, j)`.
    pub minimality_confirmed: bool,
}

impl ClassNode {
    pub fn label(&self) -> String {
        let m: Vec<String> = self.members.iter().map(|k| format!("c{k}")).collect();
        format!("[{}]", m.join(","))
    }
}

/// Classes of lr-witnessed boundary points with the witnessed order.
///
/// `R(i, j)` means that `c_i` is lr-witnessed by the orbit of `d_j^+`. Two
/// points are equivalent when they coincide or witness each other; classes
/// are ordered by `[c_i] <= [c_j]` iff they are equal or `R(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGraph {
    pub nodes: Vec<ClassNode>,
    /// `leq[a][b]` for node indices.
    pub leq: Vec<Vec<bool>>,
    /// Covering pairs `(a, b)` with `a < b`.
    pub hasse: Vec<(usize, usize)>,
    pub relation: BTreeSet<(usize, usize)>,
    /// Places where the witnessed data depends on the choice of
    /// representatives.
    pub inconsistencies: Vec<String>,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }
}

impl ClassGraph {
    /// Build the classes and order on `domain` from witnessed pairs.
    /// Pairs with an endpoint outside `domain` are ignored.
    pub fn from_relation(domain: &[usize], relation: &BTreeSet<(usize, usize)>) -> Result<Self> {
        let dom: Vec<usize> = domain.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let pos: BTreeMap<usize, usize> = dom.iter().enumerate().map(|(p, &k)| (k, p)).collect();
        let rel: BTreeSet<(usize, usize)> =
            relation.iter().copied().filter(|(i, j)| pos.contains_key(i) && pos.contains_key(j)).collect();
        let r = |i: usize, j: usize| i == j || rel.contains(&(i, j));

        let mut dsu = Dsu::new(dom.len());
        for &(i, j) in &rel {
            if i != j && rel.contains(&(j, i)) {
                dsu.union(pos[&i], pos[&j]);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (p, &k) in dom.iter().enumerate() {
            groups.entry(dsu.find(p)).or_default().push(k);
        }
        let members: Vec<Vec<usize>> = groups.into_values().collect();
        let mut inconsistencies = Vec::new();
        for m in &members {
            for &a in m {
                for &b in m {
                    if a < b && !(r(a, b) && r(b, a)) {
                        inconsistencies.push(format!("c{a} ~ c{b} only through a chain of witnesses"));
                    }
                }
            }
        }
        let n = members.len();
        let mut leq = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    leq[a][b] = true;
                    continue;
                }
                let pairs: Vec<bool> =
                    members[a].iter().flat_map(|&i| members[b].iter().map(move |&j| r(i, j))).collect();
                let any = pairs.iter().any(|&x| x);
                if any && !pairs.iter().all(|&x| x) {
                    inconsistencies.push(format!(
                        "order between {} and {} depends on representatives",
                        label(&members[a]),
                        label(&members[b])
                    ));
                }
                leq[a][b] = any;
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(Error::OrderViolation(format!(
                        "{} and {} precede each other",
                        label(&members[a]),
                        label(&members[b])
                    )));
                }
                for c in 0..n {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(Error::OrderViolation(format!(
                            "{} <= {} <= {} but not {} <= {}",
                            label(&members[a]),
                            label(&members[b]),
                            label(&members[c]),
                            label(&members[a]),
                            label(&members[c])
                        )));
                    }
                }
            }
        }
        let lt = |a: usize, b: usize| a != b && leq[a][b];
        let mut hasse = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                    hasse.push((a, b));
                }
            }
        }
        let nodes = members
            .into_iter()
            .enumerate()
            .map(|(b, members)| {
                let minimal = !(0..n).any(|a| lt(a, b));
                let minimality_confirmed = minimal
                    && members.iter().all(|&i| {
                        rel.iter().filter(|&&(_, jj)| jj == i).all(|&(j, _)| {
                            // R(j, i) must be matched by R(i, j)
                            r(i, j)
                        })
                    });
                ClassNode { members, minimal, minimality_confirmed }
            })
            .collect();
        Ok(Self { nodes, leq, hasse, relation: rel, inconsistencies })
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node containing `c_k`.
    pub fn class_of(&self, k: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.members.contains(&k))
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn minimal(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&a| self.nodes[a].minimal).collect()
    }
}

fn label(m: &[usize]) -> String {
    let v: Vec<String> = m.iter().map(|k| format!("c{k}")).collect();
    format!("[{}]", v.join(","))
}

/// Relation data and class graph from recurrence reports.
///
/// `subjects` may include any orbits; their witnessed boundary points enlarge
/// the domain. `right_limits[k-1]` must be the report of `d_k^+`.
pub fn build_class_graph<S: Scalar>(
    spec: &MapSpec<S>,
    right_limits: &[LrRecurrenceReport<S>],
    subjects: &[LrRecurrenceReport<S>],
) -> Result<ClassGraph> {
    let n = spec.pieces();
    if right_limits.len() != n - 1 {
        return Err(Error::Config(format!(
            "need reports for all {} right limits, got {}",
            n - 1,
            right_limits.len()
        )));
    }
    for (k, r) in right_limits.iter().enumerate() {
        if r.subject != Subject::Limit(DLabel::Plus(k + 1)) {
            return Err(Error::Config(format!("report {} is not for d{}+", r.subject, k + 1)));
        }
    }
    let mut domain = BTreeSet::new();
    for r in right_limits.iter().chain(subjects) {
        domain.extend(r.witnessed().into_iter().filter(|&k| k >= 1 && k < n));
    }
    let mut rel = BTreeSet::new();
    for (jj, r) in right_limits.iter().enumerate() {
        for i in r.witnessed() {
            if i >= 1 && i < n {
                rel.insert((i, jj + 1));
            }
        }
    }
    let domain: Vec<usize> = domain.into_iter().collect();
    ClassGraph::from_relation(&domain, &rel)
}

/// The minimal classes, as lists of boundary indices.
pub fn minimal_classes(graph: &ClassGraph) -> Vec<Vec<usize>> {
    graph.minimal().into_iter().map(|a| graph.nodes[a].members.clone()).collect()
}

/// Boundary points and epsilon for display.
pub fn describe_status<S: Scalar>(s: &LrStatus<S>) -> String {
    match s {
        LrStatus::LrWitnessed { epsilon, .. } => format!("lr-witnessed at {}", to_pq(epsilon)),
        other => other.name().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn rel(pairs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn e1_quarter_is_never_recurrent() {
        let cfg = DetectionConfig { horizon: 1000, ..DetectionConfig::default() };
        let rep = detect_lr(&gallery::e1(), Subject::Point("1/4".into()), &Rational::new(1.into(), 4.into()), &cfg)
            .unwrap();
        assert!(rep.witnessed().is_empty());
        assert!(matches!(rep.visits[0].status, LrStatus::NeverNear | LrStatus::OneSidedOnly));
        assert_eq!(rep.visits[0].right_counts, vec![0; 6]);
    }

    #[test]
    fn truncated_at_delta_hit() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let m = crate::Map::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![(r(1, 4), r(1, 2)), (r(1, 2), r(1, 2))], (false, false), None)
            .unwrap();
        let cfg = DetectionConfig { horizon: 100, ..DetectionConfig::default() };
        let rep = detect_lr(&m, Subject::Point("0".into()), &r(0, 1), &cfg).unwrap();
        assert_eq!(rep.hit_delta_at, Some(1));
        assert_eq!(rep.steps, 1);
    }

    #[test]
    fn config_validation() {
        let mut c: DetectionConfig = DetectionConfig::default();
        assert!(c.validate().is_ok());
        c.min_witnesses = 1;
        assert!(c.validate().is_err());
        let mut c: DetectionConfig = DetectionConfig::default();
        c.epsilon_schedule.swap(0, 1);
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_graph() {
        let g = ClassGraph::from_relation(&[], &rel(&[])).unwrap();
        assert!(g.is_empty());
        assert!(minimal_classes(&g).is_empty());
    }

    #[test]
    fn single_self_witnessed_point() {
        let g = ClassGraph::from_relation(&[1], &rel(&[(1, 1)])).unwrap();
        assert_eq!(minimal_classes(&g), vec![vec![1]]);
        assert!(g.nodes[0].minimality_confirmed);
    }

    #[test]
    fn mutual_witnesses_merge() {
        let g = ClassGraph::from_relation(&[1, 2], &rel(&[(1, 2), (2, 1), (1, 1), (2, 2)])).unwrap();
        assert_eq!(minimal_classes(&g), vec![vec![1, 2]]);
        assert!(g.inconsistencies.is_empty());
    }

    #[test]
    fn chain_and_antichain() {
        let g = ClassGraph::from_relation(&[1, 2], &rel(&[(1, 1), (2, 2), (1, 2)])).unwrap();
        assert_eq!(minimal_classes(&g), vec![vec![1]]);
        assert_eq!(g.hasse, vec![(0, 1)]);
        let g = ClassGraph::from_relation(&[1, 2], &rel(&[(1, 1), (2, 2)])).unwrap();
        assert_eq!(minimal_classes(&g), vec![vec![1], vec![2]]);
    }

    #[test]
    fn intransitive_data_is_rejected() {
        let e = ClassGraph::from_relation(&[1, 2, 3], &rel(&[(1, 2), (2, 3)]));
        assert!(matches!(e, Err(Error::OrderViolation(_))));
    }

    #[test]
    fn one_way_witness_orders_classes() {
        let g = ClassGraph::from_relation(&[1, 2], &rel(&[(1, 1), (2, 1)])).unwrap();
        // [c2] <= [c1]: c2 is minimal, [c1] is not
        assert_eq!(minimal_classes(&g), vec![vec![2]]);
        assert!(g.nodes[1].minimality_confirmed);
    }
}
