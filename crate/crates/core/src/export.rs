//! Text renderings of analysis results: CSV, JSON, SVG and DOT.
//!
//! Every rational is written as a `"p/q"` string. Outputs depend only on
//! their inputs.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::atoms::{AtomTree, Interval};
use crate::decomposition::{ComponentKind, CrossValidation, DecompositionReport};
use crate::map::{boundary_data, Location, MapSpec, Membership, XtildeCheck};
use crate::orbit::{OrbitSample, PeriodicOrbitCert, PeriodicityOutcome};
use crate::recurrence::{ClassGraph, LrRecurrenceReport, LrStatus};
use crate::scalar::{to_pq, Scalar};
use crate::symbolic::ComplexityProfile;

fn pq_list<S: Scalar>(v: &[S]) -> Vec<String> {
    v.iter().map(to_pq).collect()
}

fn intervals_json<S: Scalar>(v: &[Interval<S>]) -> Value {
    Value::Array(v.iter().map(|(a, b)| json!([to_pq(a), to_pq(b)])).collect())
}

/// `step,state,piece`; a state on the boundary set has piece `c<k>`.
pub fn orbit_csv<S: Scalar>(spec: &MapSpec<S>, orbit: &OrbitSample<S>) -> String {
    let mut out = String::from("step,state,piece\n");
    for (k, x) in orbit.states.iter().enumerate() {
        let piece = match spec.locate(x) {
            Ok(Location::Piece(i)) => i.to_string(),
            Ok(Location::Boundary(c)) => format!("c{c}"),
            Err(_) => "outside".into(),
        };
        let _ = writeln!(out, "{k},{},{piece}", to_pq(x));
    }
    out
}

pub fn cert_json<S: Scalar>(c: &PeriodicOrbitCert<S>) -> Value {
    json!({
        "word": c.word.to_string(),
        "point": to_pq(&c.point),
        "period": c.period,
        "preperiod": c.preperiod,
        "separation": to_pq(&c.separation),
        "orbit": pq_list(&c.orbit),
        "slope": to_pq(&c.slope),
        "intercept": to_pq(&c.intercept),
    })
}

pub fn periodicity_json<S: Scalar>(o: &PeriodicityOutcome<S>) -> Value {
    match o {
        PeriodicityOutcome::Periodic(c) => json!({ "outcome": "periodic", "certificate": cert_json(c) }),
        PeriodicityOutcome::HitDelta { step } => json!({ "outcome": "hit-delta", "step": step }),
        PeriodicityOutcome::Exhausted { steps } => json!({ "outcome": "exhausted", "steps": steps }),
    }
}

pub fn xtilde_json<S: Scalar>(x: &XtildeCheck<S>) -> Value {
    let points: Vec<Value> = x
        .points
        .iter()
        .map(|(l, d, m)| {
            let mut v = json!({ "label": l.to_string(), "value": to_pq(d) });
            match m {
                Membership::Refuted { step } => {
                    v["status"] = json!("refuted");
                    v["step"] = json!(step);
                }
                Membership::Verified { period, preperiod } => {
                    v["status"] = json!("verified");
                    v["period"] = json!(period);
                    v["preperiod"] = json!(preperiod);
                }
                Membership::UnknownAtHorizon { horizon } => {
                    v["status"] = json!("unknown-at-horizon");
                    v["horizon"] = json!(horizon);
                }
            }
            v
        })
        .collect();
    json!({ "overall": x.overall.to_string(), "points": points })
}

pub fn map_json<S: Scalar>(spec: &MapSpec<S>) -> Value {
    let bd = boundary_data(spec);
    let mut v: Value = serde_json::from_str(&spec.to_json()).expect("map json is valid");
    v["lambda"] = json!(to_pq(spec.lambda()));
    v["pieces"] = json!(spec.pieces());
    v["hypothesis_flags"] = serde_json::to_value(spec.flags).expect("flags serialize");
    v["boundary_data"] = Value::Object(bd.points().into_iter().map(|(l, d)| (l.to_string(), json!(to_pq(&d)))).collect());
    v["distinct_limits"] = json!(bd.distinct_count());
    v
}

/// `generation,word,left,right,degenerate`.
pub fn atoms_csv<S: Scalar>(tree: &AtomTree<S>) -> String {
    let mut out = String::from("generation,word,left,right,degenerate\n");
    for g in &tree.generations {
        for a in g {
            let _ = writeln!(out, "{},{},{},{},{}", a.generation(), a.word.to_string().replace(',', " "), to_pq(&a.lo), to_pq(&a.hi), a.degenerate);
        }
    }
    out
}

pub fn atoms_json<S: Scalar>(tree: &AtomTree<S>) -> Value {
    let gens: Vec<Value> = tree
        .generations
        .iter()
        .zip(&tree.covers)
        .enumerate()
        .map(|(k, (g, c))| {
            json!({
                "generation": k + 1,
                "atoms": g.len(),
                "max_diameter": to_pq(&tree.max_diam(k + 1)),
                "bound": to_pq(&tree.error_bound(k + 1)),
                "cover": intervals_json(c),
            })
        })
        .collect();
    json!({ "lambda": to_pq(&tree.lambda), "diameter": to_pq(&tree.diam), "generations": gens })
}

const SVG_W: f64 = 800.0;
const MARGIN: f64 = 40.0;

fn svg_open(h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{h}\" viewBox=\"0 0 {SVG_W} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (SVG_W - 2.0 * MARGIN)
    }
}

/// One row of bars per generation, `Lambda_n` top to bottom.
pub fn atoms_svg<S: Scalar>(tree: &AtomTree<S>, spec: &MapSpec<S>) -> String {
    let ax = Axis { lo: spec.c(0).approx(), hi: spec.c(spec.pieces()).approx() };
    let row = 18.0;
    let h = 2.0 * MARGIN + row * tree.depth() as f64;
    let mut out = svg_open(h);
    for c in spec.partition().endpoints() {
        let x = ax.x(c.approx());
        let _ = writeln!(out, "<line x1=\"{x:.3}\" y1=\"{:.3}\" x2=\"{x:.3}\" y2=\"{:.3}\" stroke=\"#bbb\" stroke-dasharray=\"3,3\"/>", MARGIN - 10.0, h - MARGIN + 10.0);
    }
    for (k, cover) in tree.covers.iter().enumerate() {
        let y = MARGIN + row * k as f64;
        let _ = writeln!(out, "<text x=\"4\" y=\"{:.3}\" font-size=\"10\">{}</text>", y + 11.0, k + 1);
        for (a, b) in cover {
            let (x0, x1) = (ax.x(a.approx()), ax.x(b.approx()));
            let _ = writeln!(out, "<rect x=\"{x0:.3}\" y=\"{y:.3}\" width=\"{:.3}\" height=\"12\" fill=\"#245\"/>", (x1 - x0).max(0.8));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// `n,p`.
pub fn complexity_csv(p: &ComplexityProfile) -> String {
    let mut out = String::from("n,p\n");
    for n in 1..=p.n_max() {
        let _ = writeln!(out, "{n},{}", p.p(n));
    }
    out
}

pub fn complexity_json(p: &ComplexityProfile) -> Value {
    serde_json::to_value(p).expect("profile serializes")
}

/// Complexity curve; for two symbols the line `p(n) = n + 1` is overlaid.
pub fn complexity_svg(p: &ComplexityProfile, pieces: usize) -> String {
    let h = 400.0;
    let n_max = p.n_max().max(1) as f64;
    let top = p.values.iter().copied().max().unwrap_or(1).max(p.n_max() + 1) as f64;
    let sx = |n: f64| MARGIN + (n - 1.0) / (n_max - 1.0).max(1.0) * (SVG_W - 2.0 * MARGIN);
    let sy = |v: f64| h - MARGIN - v / top * (h - 2.0 * MARGIN);
    let mut out = svg_open(h);
    let _ = writeln!(out, "<line x1=\"{MARGIN}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\"/>", h - MARGIN, SVG_W - MARGIN, h - MARGIN);
    let _ = writeln!(out, "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{:.3}\" stroke=\"black\"/>", h - MARGIN);
    if pieces == 2 {
        let _ = writeln!(
            out,
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"#c33\" stroke-dasharray=\"5,4\"/>",
            sx(1.0),
            sy(2.0),
            sx(n_max),
            sy(n_max + 1.0)
        );
    }
    let pts: Vec<String> = (1..=p.n_max()).map(|n| format!("{:.3},{:.3}", sx(n as f64), sy(p.p(n) as f64))).collect();
    let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"#245\" stroke-width=\"2\"/>", pts.join(" "));
    let _ = writeln!(out, "<text x=\"{MARGIN}\" y=\"20\" font-size=\"12\">p(n), n = 1..{} ({})</text>", p.n_max(), p.classification);
    out.push_str("</svg>\n");
    out
}

fn status_json<S: Scalar>(s: &LrStatus<S>) -> Value {
    match s {
        LrStatus::LrWitnessed { level, epsilon } => json!({ "status": s.name(), "level": level, "epsilon": to_pq(epsilon) }),
        _ => json!({ "status": s.name() }),
    }
}

pub fn lr_report_json<S: Scalar>(r: &LrRecurrenceReport<S>) -> Value {
    let visits: Vec<Value> = r
        .visits
        .iter()
        .map(|v| {
            let mut o = status_json(&v.status);
            o["boundary"] = json!(format!("c{}", v.index));
            o["left_counts"] = json!(v.left_counts);
            o["right_counts"] = json!(v.right_counts);
            o["left_times"] = json!(v.left_times);
            o["right_times"] = json!(v.right_times);
            o
        })
        .collect();
    let log: Vec<Value> = r
        .log
        .iter()
        .map(|w| json!({ "step": w.step, "boundary": format!("c{}", w.index), "side": w.side, "depth": w.depth, "distance": w.distance }))
        .collect();
    json!({
        "subject": r.subject.to_string(),
        "start": to_pq(&r.start),
        "epsilon_schedule": pq_list(&r.epsilon_schedule),
        "min_witnesses": r.min_witnesses,
        "steps": r.steps,
        "hit_delta_at": r.hit_delta_at,
        "visits": visits,
        "witness_log": log,
    })
}

/// Matrix of the relation `R(i, j)`: row `c_i`, column `d_j^+`.
pub fn relation_csv(g: &ClassGraph, pieces: usize) -> String {
    let mut out = String::from("c");
    for j in 1..pieces {
        let _ = write!(out, ",d{j}+");
    }
    out.push('\n');
    for i in 1..pieces {
        let _ = write!(out, "c{i}");
        for j in 1..pieces {
            let _ = write!(out, ",{}", u8::from(g.relation.contains(&(i, j))));
        }
        out.push('\n');
    }
    out
}

/// Hasse diagram, arrows from smaller to larger classes, minimal classes
/// filled.
pub fn hasse_dot(g: &ClassGraph) -> String {
    let mut out = String::from("digraph classes {\n  rankdir=BT;\n  node [shape=box];\n");
    for (k, n) in g.nodes.iter().enumerate() {
        let style = match (n.minimal, n.minimality_confirmed) {
            (true, true) => ", style=filled, fillcolor=\"#9cf\"",
            (true, false) => ", style=\"filled,dashed\", fillcolor=\"#ddd\"",
            _ => "",
        };
        let _ = writeln!(out, "  n{k} [label=\"{}\"{style}];", n.label());
    }
    for (a, b) in &g.hasse {
        let _ = writeln!(out, "  n{a} -> n{b};");
    }
    out.push_str("}\n");
    out
}

pub fn class_graph_json(g: &ClassGraph) -> Value {
    let nodes: Vec<Value> = g
        .nodes
        .iter()
        .map(|n| json!({ "class": n.members, "minimal": n.minimal, "minimality_confirmed": n.minimality_confirmed }))
        .collect();
    json!({
        "nodes": nodes,
        "hasse": g.hasse,
        "relation": g.relation.iter().collect::<Vec<_>>(),
        "inconsistencies": g.inconsistencies,
    })
}

pub fn report_json<S: Scalar>(r: &DecompositionReport<S>) -> Value {
    let components: Vec<Value> = r
        .components
        .iter()
        .map(|c| {
            let members: Vec<String> = c.members.iter().map(|l| l.to_string()).collect();
            match &c.kind {
                ComponentKind::Periodic(p) => json!({
                    "kind": "periodic",
                    "evidence": "certified",
                    "members": members,
                    "certificate": cert_json(p),
                }),
                ComponentKind::CantorEvidence(k) => json!({
                    "kind": "cantor-evidence",
                    "evidence": format!("lr-witnessed at horizon {}", k.horizon),
                    "members": members,
                    "class": k.class,
                    "generator": format!("c{}", k.generator),
                    "generating_limits": k.generating_limits.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                    "epsilon": k.epsilon.as_ref().map(to_pq),
                    "minimality_confirmed": k.minimality_confirmed,
                    "enclosure": intervals_json(&k.enclosure),
                    "generator_checks": {
                        "boundary_in_enclosure": k.checks.boundary_in_enclosure,
                        "plus_in_attractor": k.checks.plus_in_attractor,
                        "minus_in_enclosure": k.checks.minus_in_enclosure,
                        "members_in_enclosure": k.checks.members_in_enclosure,
                    },
                    "notes": k.notes,
                }),
                ComponentKind::Undetermined { reason } => json!({
                    "kind": "undetermined",
                    "members": members,
                    "reason": reason,
                }),
            }
        })
        .collect();
    let audits: Vec<Value> = r
        .audits
        .iter()
        .map(|a| json!({ "bound": a.bound, "lhs": a.lhs, "rhs": a.rhs, "holds": a.holds, "status": a.status.name() }))
        .collect();
    json!({
        "N1": r.n1,
        "N2": r.n2,
        "undetermined": r.undetermined_count,
        "distinct_limits": r.d_count,
        "pieces": r.pieces,
        "hypothesis_flags": serde_json::to_value(r.flags).expect("flags serialize"),
        "components": components,
        "bound_audit": audits,
        "enclosure": {
            "depth": r.depth,
            "error_bound": to_pq(&r.error_bound),
            "intervals": intervals_json(&r.enclosure),
        },
        "class_graph": r.class_graph.as_ref().map(class_graph_json),
        "notes": r.notes,
    })
}

/// The interval `X` with boundary ticks, periodic points as dots and Cantor
/// enclosures as bars.
pub fn report_svg<S: Scalar>(spec: &MapSpec<S>, r: &DecompositionReport<S>) -> String {
    let ax = Axis { lo: spec.c(0).approx(), hi: spec.c(spec.pieces()).approx() };
    let h = 200.0;
    let base = 100.0;
    let mut out = svg_open(h);
    let _ = writeln!(out, "<line x1=\"{MARGIN}\" y1=\"{base}\" x2=\"{:.3}\" y2=\"{base}\" stroke=\"black\"/>", SVG_W - MARGIN);
    for k in spec.delta_indices() {
        let x = ax.x(spec.c(k).approx());
        let _ = writeln!(out, "<line x1=\"{x:.3}\" y1=\"{:.3}\" x2=\"{x:.3}\" y2=\"{:.3}\" stroke=\"#c33\"/>", base - 12.0, base + 12.0);
        let _ = writeln!(out, "<text x=\"{x:.3}\" y=\"{:.3}\" font-size=\"10\" text-anchor=\"middle\">c{k}</text>", base + 26.0);
    }
    for (a, b) in &r.enclosure {
        let (x0, x1) = (ax.x(a.approx()), ax.x(b.approx()));
        let _ = writeln!(out, "<rect x=\"{x0:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"4\" fill=\"#ccc\"/>", base + 40.0, (x1 - x0).max(0.8));
    }
    let colors = ["#245", "#2a7", "#a52", "#76a", "#a27", "#880"];
    for (k, c) in r.components.iter().enumerate() {
        let color = colors[k % colors.len()];
        match &c.kind {
            ComponentKind::Periodic(p) => {
                for o in &p.orbit {
                    let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{base}\" r=\"4\" fill=\"{color}\"/>", ax.x(o.approx()));
                }
            }
            ComponentKind::CantorEvidence(e) => {
                for (a, b) in &e.enclosure {
                    let (x0, x1) = (ax.x(a.approx()), ax.x(b.approx()));
                    let _ = writeln!(out, "<rect x=\"{x0:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"10\" fill=\"{color}\"/>", base - 5.0, (x1 - x0).max(0.8));
                }
            }
            ComponentKind::Undetermined { .. } => {}
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"24\" font-size=\"12\">N1 = {}, N2 = {}, undetermined = {}</text>",
        r.n1, r.n2, r.undetermined_count
    );
    out.push_str("</svg>\n");
    out
}

pub fn cross_validation_json<S: Scalar>(c: &CrossValidation<S>) -> Value {
    json!({
        "grid": c.grid,
        "tail": c.tail,
        "burn_in": c.burn_in,
        "tested": c.tested,
        "hit_delta": c.hit_delta,
        "covered": c.covered,
        "fraction": c.fraction(),
        "worst": c.worst.as_ref().map(|(x, u)| json!({ "start": to_pq(x), "uncovered_states": u })),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{gallery, Budget};

    #[test]
    fn atoms_csv_rows() {
        let t = crate::expand_atoms(&gallery::e1(), 2).unwrap();
        let csv = atoms_csv(&t);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("2,1 1,0/1,1/8,false"));
    }

    #[test]
    fn report_round_trips_rationals() {
        let m = gallery::e1();
        let r = crate::decompose(&m, &Budget { horizon: 500, ..Budget::default() }).unwrap();
        let v = report_json(&r);
        assert_eq!(v["N1"], 2);
        let pt = v["components"][0]["certificate"]["point"].as_str().unwrap();
        assert_eq!(crate::parse_pq::<crate::Rational>(pt).unwrap(), crate::Rational::from_integer(0.into()));
        assert!(report_svg(&m, &r).contains("<circle"));
    }

    #[test]
    fn dot_marks_minimal() {
        let rel = [(1, 1), (2, 2), (1, 2)].into_iter().collect();
        let g = ClassGraph::from_relation(&[1, 2], &rel).unwrap();
        let dot = hasse_dot(&g);
        assert!(dot.contains("n0 -> n1"));
        assert!(dot.contains("fillcolor"));
        assert_eq!(relation_csv(&g, 3), "c,d1+,d2+\nc1,1,1\nc2,0,1\n");
    }
}
