mod common;

use std::collections::{BTreeSet, HashSet};

use common::*;
use pcim::orbit::itinerary;
use pcim::*;
use num_traits::Signed;
use proptest::prelude::*;

fn map_strategy() -> impl Strategy<Value = Map> {
    any::<u64>().prop_map(|s| random_map(&mut rng(s)))
}

fn factors(w: &[u16], n: usize, ends: std::ops::RangeInclusive<usize>) -> HashSet<Vec<u16>> {
    ends.map(|e| w[e - n..e].to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branches_contract(m in map_strategy(), i in 0usize..4, a in 0u32..=1000, b in 0u32..=1000) {
        let i = i % m.pieces() + 1;
        let (lo, hi) = (m.c(i - 1).clone(), m.c(i).clone());
        let at = |t: u32| lo.clone() + (hi.clone() - &lo) * r(t as i64, 1000);
        let (x, y) = (at(a), at(b));
        let br = m.branch(i);
        prop_assert!((br.eval(&x) - br.eval(&y)).abs() <= m.lambda().clone() * (x - y).abs());
    }

    #[test]
    fn boundary_data_counts(m in map_strategy()) {
        let a = boundary_data(&m);
        prop_assert_eq!(&a, &boundary_data(&m));
        prop_assert!(a.distinct_count() <= 2 * m.pieces());
        prop_assert_eq!(a.points().len(), 2 * m.pieces());
    }

    #[test]
    fn xtilde_verified_only_with_certificate(m in map_strategy()) {
        let check = check_d_in_xtilde(&m, 2000).unwrap();
        for (_, d, mem) in &check.points {
            if let map::Membership::Verified { period, .. } = mem {
                let out = detect_eventual_periodicity(&m, d, &PeriodicityConfig { horizon: 2000, max_period: 1024 }).unwrap();
                match out {
                    PeriodicityOutcome::Periodic(c) => prop_assert_eq!(c.period, *period),
                    other => prop_assert!(false, "verified without certificate: {:?}", other),
                }
            }
        }
        if check.overall == Tri::Verified {
            let all = check.points.iter().all(|p| matches!(p.2, map::Membership::Verified { .. }));
            prop_assert!(all);
        }
    }

    #[test]
    fn certificates_shadow_orbits(m in map_strategy(), seed in any::<u64>()) {
        let x = random_point(&mut rng(seed));
        prop_assume!(piece_of(&m, &x).is_some());
        let out = detect_eventual_periodicity(&m, &x, &PeriodicityConfig { horizon: 3000, max_period: 256 }).unwrap();
        if let PeriodicityOutcome::Periodic(c) = out {
            let (states, word) = oracle_orbit(&m, &x, c.preperiod + 3 * c.period + 20);
            prop_assert_eq!(states.len(), c.preperiod + 3 * c.period + 21);
            let t = c.preperiod;
            let d0 = (states[t].clone() - &c.point).abs();
            prop_assert!(d0 < c.separation);
            let mut bound = d0;
            for k in 0..states.len() - t {
                prop_assert!((states[t + k].clone() - &c.orbit[k % c.period]).abs() <= bound);
                bound *= m.lambda();
            }
            let (cyc, cw) = oracle_orbit(&m, &c.point, c.period);
            prop_assert_eq!(&cyc[c.period], &c.point);
            prop_assert_eq!(&cyc[..c.period], &c.orbit[..]);
            prop_assert_eq!(cw.iter().map(|&s| s as u16).collect::<Vec<_>>(), c.word.symbols().to_vec());
            prop_assert_eq!(&word[t..t + c.period], &cw[..]);
        }
    }

    #[test]
    fn rotations_certify_together(m in map_strategy(), w in prop::collection::vec(1u16..=4, 1..7), k in 0usize..7) {
        let w: Vec<u16> = w.into_iter().map(|s| (s - 1) % m.pieces() as u16 + 1).collect();
        let k = k % w.len();
        let mut rot = w.clone();
        rot.rotate_left(k);
        let a = word_fixed_point(&m, &ItineraryWord(w));
        let b = word_fixed_point(&m, &ItineraryWord(rot));
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(&a.rotate_left(k).point, &b.point);
            let (s, _) = oracle_orbit(&m, &a.point, a.period);
            prop_assert_eq!(&s[a.period], &a.point);
            prop_assert!(a.separation > r(0, 1));
        }
    }

    #[test]
    fn complexity_laws(m in map_strategy(), seed in any::<u64>()) {
        let x = random_point(&mut rng(seed));
        prop_assume!(piece_of(&m, &x).is_some());
        let (w, hit) = itinerary(&m, &x, 600).unwrap();
        prop_assume!(hit.is_none());
        let n_max = 20;
        let p = complexity(&w, n_max, 8).unwrap();
        let len = w.len();
        let s = w.symbols();
        for n in 1..n_max + 8 {
            prop_assert!(p.p(n) <= p.p(n + 1));
            prop_assert!(p.p(n + 1) <= m.pieces() * p.p(n));
        }
        let ends = n_max + 8..=len;
        for n in 1..=n_max {
            let ln = factors(s, n, ends.clone());
            prop_assert_eq!(ln.len(), p.p(n));
            for f in factors(s, n + 1, ends.clone()) {
                prop_assert!(ln.contains(&f[1..]));
            }
        }
    }

    #[test]
    fn periodic_words_are_eventually_constant(m in map_strategy()) {
        for (_, d) in boundary_data(&m).points() {
            if let Ok(PeriodicityOutcome::Periodic(c)) = detect_eventual_periodicity(&m, &d, &PeriodicityConfig { horizon: 2000, max_period: 12 }) {
                let w: Vec<u16> = c.word.symbols().iter().copied().cycle().take(400).collect();
                let p = complexity(&ItineraryWord(w), 20, 8).unwrap();
                prop_assert_eq!(p.classification, ComplexityClass::EventuallyConstant);
                prop_assert!(p.p(20) <= c.period);
            }
        }
    }

    #[test]
    fn atoms_nest_and_shrink(m in map_strategy()) {
        let t = expand_atoms(&m, 8).unwrap();
        for n in 1..8 {
            for a in t.generation(n + 1) {
                let parent = t.find(&a.word.symbols()[1..]).expect("suffix atom exists");
                prop_assert!(parent.contains_interval(&a.lo, &a.hi));
            }
            prop_assert!(t.max_diam(n + 1) <= m.lambda().clone() * t.max_diam(n));
        }
    }

    #[test]
    fn atom_endpoints_come_from_limits(m in map_strategy()) {
        let depth = 6;
        let t = expand_atoms(&m, depth).unwrap();
        let mut reach: BTreeSet<Rational> = boundary_data(&m).points().into_iter().map(|(_, d)| d).collect();
        let mut layers = vec![reach.clone()];
        for _ in 1..depth {
            let mut next = reach.clone();
            for y in &reach {
                for b in m.branches() {
                    if m.c(b.piece - 1) <= y && y <= m.c(b.piece) {
                        next.insert(b.eval(y));
                    }
                }
            }
            reach = next;
            layers.push(reach.clone());
        }
        for n in 1..=depth {
            for a in t.generation(n) {
                prop_assert!(layers[n - 1].contains(&a.lo) && layers[n - 1].contains(&a.hi), "{}", a.word);
            }
        }
    }

    #[test]
    fn orbits_follow_atoms(m in map_strategy(), seed in any::<u64>()) {
        let depth = 10;
        let t = expand_atoms(&m, depth).unwrap();
        let x = random_point(&mut rng(seed));
        let (states, word) = oracle_orbit(&m, &x, depth);
        let w: Vec<u16> = word.iter().map(|&s| s as u16).collect();
        for end in 1..states.len() {
            for start in 0..end.min(w.len()) {
                let n = end - start;
                let atom = t.find(&w[start..end]).expect("itinerary atom exists");
                prop_assert!(atom.contains(&states[end]));
                prop_assert!(n <= depth);
            }
        }
    }

    #[test]
    fn lr_evidence_is_monotone(m in map_strategy()) {
        let cfg = DetectionConfig::<Rational> { horizon: 4000, ..DetectionConfig::default() };
        let longer = DetectionConfig { horizon: 8000, ..cfg.clone() };
        let mut finer = cfg.clone();
        finer.epsilon_schedule.push(r(1, 10_000_000));
        let bd = boundary_data(&m);
        for k in 1..m.pieces() {
            let d = bd.get(DLabel::Plus(k)).unwrap();
            let run = |c: &DetectionConfig| detect_lr(&m, Subject::Limit(DLabel::Plus(k)), d, c).unwrap();
            let (a, b, f) = (run(&cfg), run(&longer), run(&finer));
            for (va, (vb, vf)) in a.visits.iter().zip(b.visits.iter().zip(&f.visits)) {
                if let LrStatus::LrWitnessed { level, .. } = va.status {
                    match (&vb.status, &vf.status) {
                        (LrStatus::LrWitnessed { level: lb, .. }, LrStatus::LrWitnessed { level: lf, .. }) => {
                            prop_assert!(*lb >= level && *lf >= level);
                        }
                        other => prop_assert!(false, "lost witness at c{}: {:?}", va.index, other),
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_components_lie_in_enclosure(m in map_strategy()) {
        let budget = Budget { horizon: 3000, depth: 8, ..Budget::default() };
        let report = decompose(&m, &budget).unwrap();
        let t = expand_atoms(&m, 8).unwrap();
        for c in report.periodic() {
            for x in &c.orbit {
                for cover in &t.covers {
                    prop_assert!(cover.iter().any(|(a, b)| a <= x && x <= b));
                }
            }
        }
    }
}
