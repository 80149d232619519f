//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use num_traits::{One, Signed, Zero};
use pcim::orbit::itinerary;
use pcim::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const SUITE_SEED: u64 = 0x5eed_2024;
const SUITE_SIZE: usize = 50;

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn suite() -> Vec<Map> {
    let mut g = rng(SUITE_SEED);
    (0..SUITE_SIZE).map(|_| random_map(&mut g)).collect()
}

fn suite_budget() -> Budget {
    Budget { depth: 20, ..Budget::default() }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    if e > limit {
        return Err(format!("{what} took {:.1} s, target {} s", e.as_secs_f64(), limit.as_secs()));
    }
    Ok(())
}

/// Distance from `x` to the nearest interior endpoint.
fn distance_to_delta(m: &Map, x: &Rational) -> Rational {
    (1..m.pieces()).map(|k| (x.clone() - m.c(k)).abs()).min().expect("at least two pieces")
}

fn oracle_d(m: &Map) -> BTreeSet<Rational> {
    let n = m.pieces();
    let b = m.branches();
    let mut d = BTreeSet::new();
    for i in 0..n {
        d.insert(b[i].slope.clone() * m.c(i) + &b[i].intercept);
        d.insert(b[i].slope.clone() * m.c(i + 1) + &b[i].intercept);
    }
    d
}

fn atom_diameter_law() -> Outcome {
    let t = Instant::now();
    let mut atoms = 0;
    for (k, m) in suite().iter().enumerate() {
        let tree = expand_atoms(m, 12).map_err(|e| format!("map {k}: {e}"))?;
        let diam = m.c(m.pieces()).clone() - m.c(0);
        let mut bound = diam;
        for n in 1..=12 {
            bound *= m.lambda();
            for a in tree.generation(n) {
                check!(a.hi.clone() - &a.lo <= bound, "map {k}, generation {n}: atom {} too wide", a.word);
            }
            atoms += tree.generation(n).len();
        }
    }
    within(t, Duration::from_secs(30), "atom expansion")?;
    Ok(format!("{SUITE_SIZE} maps, depth 12, {atoms} atoms, {:.1} s", t.elapsed().as_secs_f64()))
}

fn check_cert(m: &Map, c: &Cert) -> Result<(), String> {
    let (states, word) = oracle_orbit(m, &c.point, c.period);
    check!(states.len() == c.period + 1, "orbit of {} hits the boundary set", to_pq(&c.point));
    check!(states[c.period] == c.point, "f^p(x*) != x* for {}", to_pq(&c.point));
    let w: Vec<u16> = word.iter().map(|&s| s as u16).collect();
    check!(w == c.word.symbols(), "itinerary {:?} differs from word {}", w, c.word);
    check!(c.separation > Rational::zero(), "nonpositive separation");
    let rho = states[..c.period].iter().map(|x| distance_to_delta(m, x)).min().unwrap();
    check!(rho == c.separation, "separation {} but oracle gives {}", to_pq(&c.separation), to_pq(&rho));
    Ok(())
}

fn certification_soundness(reports: &[(Map, Report)]) -> Outcome {
    let mut certs = 0;
    for (k, (m, r)) in reports.iter().enumerate() {
        for c in r.periodic() {
            check_cert(m, c).map_err(|e| format!("map {k}: {e}"))?;
            certs += 1;
        }
        let mut g = rng(SUITE_SEED ^ k as u64);
        for _ in 0..5 {
            let x = random_point(&mut g);
            if piece_of(m, &x).is_none() {
                continue;
            }
            if let PeriodicityOutcome::Periodic(c) =
                detect_eventual_periodicity(m, &x, &PeriodicityConfig::default()).map_err(|e| e.to_string())?
            {
                check_cert(m, &c).map_err(|e| format!("map {k}, start {}: {e}", to_pq(&x)))?;
                certs += 1;
            }
        }
    }
    check!(certs > 0, "no certificates produced");
    Ok(format!("{certs} certificates verified exactly"))
}

fn bound_audits(reports: &[(Map, Report)]) -> Outcome {
    let mut determined = 0;
    for (k, (m, r)) in reports.iter().enumerate() {
        if !r.fully_determined() {
            continue;
        }
        determined += 1;
        let n1 = r.components.iter().filter(|c| matches!(c.kind, ComponentKind::Periodic(_))).count();
        let n2 = r.components.iter().filter(|c| matches!(c.kind, ComponentKind::CantorEvidence(_))).count();
        let d = oracle_d(m).len();
        let n = m.pieces();
        check!((r.n1, r.n2, r.d_count) == (n1, n2, d), "map {k}: report counts differ from oracle");
        check!(n1 + n2 <= d, "map {k}: N1 + N2 = {} > #D = {d}", n1 + n2);
        check!(n1 + 2 * n2 <= 2 * (n - 1), "map {k}: N1 + 2 N2 = {} > 2(N - 1)", n1 + 2 * n2);
        if m.flags.increasing_per_piece {
            check!(n1 + n2 <= n, "map {k}: increasing map with N1 + N2 = {} > N", n1 + n2);
        }
        for a in &r.audits {
            let ok = a.status == AuditStatus::Pass
                || (a.status == AuditStatus::NotApplicable && !m.flags.increasing_per_piece);
            check!(ok, "map {k}: audit {} is {}", a.bound, a.status.name());
        }
    }
    check!(determined > 0, "no fully determined report");
    Ok(format!("{determined}/{} reports fully determined, all audits pass", reports.len()))
}

fn dichotomy() -> Outcome {
    let mut g = rng(SUITE_SEED + 4);
    let (mut periodic, mut cantor, mut open) = (0, 0, 0);
    for k in 0..30 {
        let m = random_rotation(&mut g);
        let r = decompose(&m, &Budget::default()).map_err(|e| format!("rotation {k}: {e}"))?;
        if !r.fully_determined() {
            open += 1;
            continue;
        }
        match (r.n1, r.n2) {
            (1 | 2, 0) => periodic += 1,
            (0, 1) => cantor += 1,
            (a, b) => return Err(format!("rotation {k}: N1 = {a}, N2 = {b}")),
        }
    }
    check!(periodic + cantor > 0, "no rotation fully determined");
    Ok(format!("30 rotations: {periodic} periodic, {cantor} Cantor, {open} undetermined, no mixtures"))
}

fn sturmian_evidence() -> Outcome {
    let path = format!("{}/tests/golden/sturmian.json", env!("CARGO_MANIFEST_DIR"));
    let g: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let lambda: Rational = parse_pq(g["chosen"]["lambda"].as_str().unwrap()).unwrap();
    let terms = g["chosen"]["terms"].as_u64().unwrap() as usize;
    let m = gallery::golden_contracted_rotation(lambda, terms).map_err(|e| e.to_string())?;
    let mu = m.branch(1).intercept.clone();
    let (word, hit) = itinerary(&m, &mu, 100_000).map_err(|e| e.to_string())?;
    check!(hit.is_none() && word.len() == 100_000, "itinerary of d0 stopped early");
    let s = word.symbols();
    for n in 1..=30 {
        let count = s.windows(n).collect::<BTreeSet<_>>().len();
        check!(count == n + 1, "p({n}) = {count}");
    }
    let budget = Budget::default();
    let fragments = classify_all(&m, &budget).map_err(|e| e.to_string())?;
    check!(
        fragments.iter().all(|f| !matches!(f.kind, FragmentKind::Periodic(_))),
        "a limit was certified periodic"
    );
    let r = assemble(&m, fragments, &budget).map_err(|e| e.to_string())?;
    check!(r.periodic().next().is_none(), "periodic certificate emitted");
    check!((r.n1, r.n2) == (0, 1), "N1 = {}, N2 = {}", r.n1, r.n2);
    check!(r.components.iter().all(|c| matches!(c.kind, ComponentKind::CantorEvidence(_))), "non-Cantor component");
    Ok("p(n) = n + 1 for n <= 30, one cantor-evidence component, no periodic certificate".into())
}

fn cross_validation(reports: &[(Map, Report)]) -> Outcome {
    let e1 = gallery::e1();
    let tol = Rational::new(Int::one(), Int::from(2).pow(50));
    let mut tails = 0;
    for j in 0..=100 {
        let x = r(j, 100);
        let (states, _) = oracle_orbit(&e1, &x, 200);
        if states.len() < 201 {
            continue;
        }
        tails += 1;
        let end = &states[200];
        let d = min_of(end.abs(), (end.clone() - Rational::one()).abs());
        check!(d <= tol, "E1 tail from {} ends {} from the fixed points", to_pq(&x), d.approx());
    }
    let rep = decompose(&e1, &Budget { horizon: 1000, ..Budget::default() }).map_err(|e| e.to_string())?;
    let cv = cross_validate(&e1, &rep, 101, 200, 0).map_err(|e| e.to_string())?;
    check!(cv.tested == tails && cv.covered == tails, "E1 cross-validation {}/{} of {tails}", cv.covered, cv.tested);

    let t = Instant::now();
    let mut worst = 1.0f64;
    let mut maps = 0;
    for (k, (m, r)) in reports.iter().enumerate() {
        if !r.fully_determined() {
            continue;
        }
        maps += 1;
        let cv = cross_validate(m, r, 101, 10_000, 1_000).map_err(|e| format!("map {k}: {e}"))?;
        check!(cv.fraction() >= 0.99, "map {k}: coverage {:.3}", cv.fraction());
        worst = worst.min(cv.fraction());
    }
    within(t, Duration::from_secs(300), "suite cross-validation")?;
    Ok(format!(
        "E1 {tails}/{tails} tails within 2^-50; {maps} suite maps, worst coverage {:.3}, {:.1} s",
        worst,
        t.elapsed().as_secs_f64()
    ))
}

fn min_of(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

fn transitive_closure(n: usize, rel: &mut BTreeSet<(usize, usize)>) {
    for k in 1..=n {
        for i in 1..=n {
            for j in 1..=n {
                if rel.contains(&(i, k)) && rel.contains(&(k, j)) {
                    rel.insert((i, j));
                }
            }
        }
    }
}

fn poset_laws(g: &ClassGraph, rel: &BTreeSet<(usize, usize)>) -> Result<(), TestCaseError> {
    let n = g.nodes.len();
    let leq = |a: usize, b: usize| g.leq(a, b);
    for a in 0..n {
        prop_assert!(leq(a, a));
        for b in 0..n {
            prop_assert!(a == b || !(leq(a, b) && leq(b, a)));
            for c in 0..n {
                prop_assert!(!(leq(a, b) && leq(b, c)) || leq(a, c));
            }
        }
    }
    prop_assert!(n == 0 || g.nodes.iter().any(|x| x.minimal));
    for b in 0..n {
        let minimal = !(0..n).any(|a| a != b && leq(a, b));
        prop_assert_eq!(g.nodes[b].minimal, minimal);
        if minimal {
            let matched = g.nodes[b]
                .members
                .iter()
                .all(|&i| rel.iter().filter(|p| p.1 == i).all(|&(j, _)| j == i || rel.contains(&(i, j))));
            prop_assert_eq!(g.nodes[b].minimality_confirmed, matched);
        }
    }
    for a in 0..n {
        for b in 0..n {
            let covers = a != b && leq(a, b) && !(0..n).any(|c| c != a && c != b && leq(a, c) && leq(c, b));
            prop_assert_eq!(g.hasse.contains(&(a, b)), covers);
        }
    }
    Ok(())
}

fn poset() -> Outcome {
    let config = Config { cases: 2000, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (1usize..=8, prop::collection::btree_set((1usize..=8, 1usize..=8), 0..40));
    runner
        .run(&strategy, |(size, pairs)| {
            let mut rel: BTreeSet<(usize, usize)> = pairs.into_iter().filter(|&(i, j)| i <= size && j <= size).collect();
            transitive_closure(size, &mut rel);
            let domain: Vec<usize> = (1..=size).collect();
            let g = ClassGraph::from_relation(&domain, &rel).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(g.inconsistencies.is_empty());
            poset_laws(&g, &rel)?;
            prop_assert!(g.nodes.iter().filter(|x| x.minimal).all(|x| x.minimality_confirmed));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner
        .run(&prop::collection::btree_set((1usize..=6, 1usize..=6), 0..20), |rel| {
            let domain: Vec<usize> = (1..=6).collect();
            match ClassGraph::from_relation(&domain, &rel) {
                Ok(g) => poset_laws(&g, &rel),
                Err(Error::OrderViolation(_)) => Ok(()),
                Err(e) => Err(TestCaseError::fail(e.to_string())),
            }
        })
        .map_err(|e| e.to_string())?;
    Ok("2000 closed relations and 2000 arbitrary relations".into())
}

fn orbit_atom_consistency() -> Outcome {
    let mut g = rng(SUITE_SEED + 8);
    let mut checks = 0;
    for k in 0..20 {
        let m = random_map(&mut g);
        let tree = expand_atoms(&m, 12).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let x = random_point(&mut g);
            let (states, word) = oracle_orbit(&m, &x, 12);
            let w: Vec<u16> = word.iter().map(|&s| s as u16).collect();
            for end in 1..states.len() {
                for t in 0..end {
                    let atom = tree.find(&w[t..end]);
                    let ok = atom.is_some_and(|a| a.lo <= states[end] && states[end] <= a.hi);
                    check!(ok, "map {k}, x = {}: f^{end}(x) not in A({:?})", to_pq(&x), &w[t..end]);
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} memberships over 20 maps x 10 points"))
}

fn run(k: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let secs = t.elapsed().as_secs_f64();
    match out {
        Ok(detail) => {
            println!("criterion {k} PASS  {name}: {detail} [{secs:.1} s]");
            true
        }
        Err(e) => {
            println!("criterion {k} FAIL  {name}: {e} [{secs:.1} s]");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= run(1, "atom diameter law", atom_diameter_law);
    let t = Instant::now();
    let reports: Vec<(Map, Report)> = suite()
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            let r = decompose(&m, &suite_budget()).unwrap_or_else(|e| panic!("suite map {k}: {e}"));
            (m, r)
        })
        .collect();
    println!("suite: {SUITE_SIZE} decompositions at depth 20 in {:.1} s", t.elapsed().as_secs_f64());
    ok &= run(2, "periodic certification soundness", || certification_soundness(&reports));
    ok &= run(3, "bound audits", || bound_audits(&reports));
    ok &= run(4, "two-piece dichotomy", dichotomy);
    ok &= run(5, "Sturmian evidence", sturmian_evidence);
    ok &= run(6, "cross-validation coverage", || cross_validation(&reports));
    ok &= run(7, "poset laws", poset);
    ok &= run(8, "orbit-atom consistency", orbit_atom_consistency);
    if !ok {
        std::process::exit(1);
    }
}
