//! `pcim`: command-line front end for the analysis library.
//!
//! Exit status: 0 on success, 2 on invalid input or configuration, 3 when a
//! budget ran out (partial artifacts are still written), 1 otherwise.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcim::export;
use pcim::map::boundary_data;
use pcim::orbit::itinerary;
use pcim::{
    assemble, check_d_in_xtilde, classify_all, complexity, cross_validate, detect_eventual_periodicity,
    detect_lr_right_limits, expand_atoms_capped, iterate, parse_pq, to_pq, Budget, DLabel, Error, FragmentKind, Map,
    PeriodicityConfig, Rational,
};
use serde_json::json;

const OUT_ENV: &str = "PCIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "pcim", version, about = "Analyse piecewise contracting interval maps over exact rationals")]
struct Cli {
    /// Output directory; defaults to $PCIM_OUT_DIR, then the working directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact formats to write, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv,json,svg,dot")]
    format: Vec<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    Dot,
}

impl Format {
    fn of(name: &str) -> Option<Self> {
        match Path::new(name).extension()?.to_str()? {
            "csv" => Some(Self::Csv),
            "json" => Some(Self::Json),
            "svg" => Some(Self::Svg),
            "dot" => Some(Self::Dot),
            _ => None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a map-spec file and report its hypothesis flags and one-sided limits.
    Validate {
        map: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
    /// Exact orbit of a start point or one-sided limit, with periodicity detection.
    Orbit {
        map: PathBuf,
        /// A rational `p/q` or a limit label such as `d1+`.
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 1024)]
        max_period: usize,
    },
    /// Atoms of generations 1..=depth and the unions Lambda_n.
    Atoms {
        map: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = pcim::atoms::DEFAULT_ATOM_CAP)]
        cap: usize,
    },
    /// Factor complexity of an itinerary.
    Complexity {
        map: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 100_000)]
        horizon: usize,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(long, default_value_t = pcim::symbolic::DEFAULT_WINDOW)]
        window: usize,
    },
    /// Left-right recurrence of the boundary points and the class order.
    Classes {
        map: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Full decomposition of the attractor with bound audits.
    Decompose {
        map: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check a decomposition against orbits from a grid of start points.
    CrossValidate {
        map: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 200)]
        tail: usize,
        /// Steps discarded before checking a tail.
        #[arg(long, default_value_t = 0)]
        tail_burn_in: usize,
    },
    /// Write the bundled example maps.
    Gallery,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 1024)]
    max_period: usize,
    /// Decreasing radii, comma separated `p/q` values.
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<String>>,
    #[arg(long, default_value_t = 4)]
    min_witnesses: usize,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Result<Budget, Failure> {
        let mut b = Budget {
            horizon: self.horizon,
            max_period: self.max_period,
            min_witnesses: self.min_witnesses,
            burn_in: self.burn_in,
            depth: self.depth,
            ..Budget::default()
        };
        if let Some(eps) = &self.epsilon {
            b.epsilon_schedule = eps.iter().map(|e| parse_pq(e)).collect::<Result<_, _>>()?;
        }
        b.validate()?;
        Ok(b)
    }
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Budget(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::BadPartition(_)
            | Error::NonContracting { .. }
            | Error::EscapesDomain { .. }
            | Error::BadLambda(_)
            | Error::StartOnDelta(_)
            | Error::OutsideDomain(_)
            | Error::Config(_) => Failure::Invalid(e.to_string()),
            Error::DepthBudgetExceeded { .. } | Error::WordTooShort { .. } => Failure::Budget(e.to_string()),
            Error::OrderViolation(_) | Error::BoundViolation(_) => Failure::Other(e.to_string()),
        }
    }
}

struct Sink {
    dir: PathBuf,
    formats: BTreeSet<Format>,
}

impl Sink {
    fn write(&self, name: &str, content: impl AsRef<str>) -> Result<(), Failure> {
        if Format::of(name).is_some_and(|f| !self.formats.contains(&f)) {
            return Ok(());
        }
        let path = self.dir.join(name);
        fs::write(&path, content.as_ref()).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
        Ok(())
    }

    fn json(&self, name: &str, v: &serde_json::Value) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
        text.push('\n');
        self.write(name, text)
    }
}

fn load(path: &Path) -> Result<Map, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(Map::from_json(&text)?)
}

fn start_point(spec: &Map, s: &str) -> Result<(Rational, String), Failure> {
    if let Ok(label) = s.parse::<DLabel>() {
        let bd = boundary_data(spec);
        let v = bd.get(label).ok_or_else(|| Failure::Invalid(format!("no limit {label} for {} pieces", spec.pieces())))?;
        return Ok((v.clone(), label.to_string()));
    }
    let x: Rational = parse_pq(s)?;
    Ok((x.clone(), to_pq(&x)))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let dir = cli.out.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::Other(format!("{}: {e}", dir.display())))?;
    let sink = Sink { dir, formats: cli.format.into_iter().collect() };
    match cli.command {
        Command::Validate { map, horizon } => {
            let spec = load(&map)?;
            let check = check_d_in_xtilde(&spec, horizon)?;
            let mut v = export::map_json(&spec);
            v["hypothesis_flags"]["D_in_Xtilde"] = json!(check.overall.to_string());
            v["D_in_Xtilde_check"] = export::xtilde_json(&check);
            sink.json("validate.json", &v)
        }
        Command::Orbit { map, start, horizon, max_period } => {
            let spec = load(&map)?;
            let (x, name) = start_point(&spec, &start)?;
            if horizon == 0 || max_period == 0 {
                return Err(Failure::Invalid("horizon and max-period must be positive".into()));
            }
            let orbit = iterate(&spec, &x, horizon - 1)?;
            let outcome = detect_eventual_periodicity(&spec, &x, &PeriodicityConfig { horizon, max_period })?;
            sink.write("orbit.csv", export::orbit_csv(&spec, &orbit))?;
            sink.json(
                "orbit.json",
                &json!({
                    "start": name,
                    "value": to_pq(&x),
                    "states": orbit.states.len(),
                    "itinerary": orbit.itinerary.to_string(),
                    "hit_delta_at": orbit.hit_delta_at,
                    "periodicity": export::periodicity_json(&outcome),
                }),
            )
        }
        Command::Atoms { map, depth, cap } => {
            let spec = load(&map)?;
            let (tree, exhausted) = match expand_atoms_capped(&spec, depth, cap) {
                Ok(t) => (t, None),
                Err(Error::DepthBudgetExceeded { generation, count, cap }) if generation > 1 => {
                    let t = expand_atoms_capped(&spec, generation - 1, cap)?;
                    let msg = Error::DepthBudgetExceeded { generation, count, cap }.to_string();
                    (t, Some(msg))
                }
                Err(e) => return Err(e.into()),
            };
            sink.write("atoms.csv", export::atoms_csv(&tree))?;
            sink.json("atoms.json", &export::atoms_json(&tree))?;
            sink.write("atoms.svg", export::atoms_svg(&tree, &spec))?;
            exhausted.map_or(Ok(()), |m| Err(Failure::Budget(format!("{m}; wrote {} generations", tree.depth()))))
        }
        Command::Complexity { map, start, horizon, n_max, window } => {
            let spec = load(&map)?;
            let (x, _) = start_point(&spec, &start)?;
            let (word, hit) = itinerary(&spec, &x, horizon)?;
            if let Some(k) = hit {
                eprintln!("orbit reached the boundary set at state {k}; using the itinerary before it");
            }
            let profile = complexity(&word, n_max, window)?;
            sink.write("complexity.csv", export::complexity_csv(&profile))?;
            sink.json("complexity.json", &export::complexity_json(&profile))?;
            sink.write("complexity.svg", export::complexity_svg(&profile, spec.pieces()))
        }
        Command::Classes { map, budget } => {
            let spec = load(&map)?;
            let b = budget.budget()?;
            let cfg = b.detection();
            let right = detect_lr_right_limits(&spec, &cfg)?;
            let graph = pcim::build_class_graph(&spec, &right, &right)?;
            sink.write("relation.csv", export::relation_csv(&graph, spec.pieces()))?;
            sink.write("classes.dot", export::hasse_dot(&graph))?;
            sink.json("classes.json", &export::class_graph_json(&graph))?;
            let reports: Vec<_> = right.iter().map(export::lr_report_json).collect();
            sink.json("lr.json", &json!(reports))
        }
        Command::Decompose { map, budget } => {
            let spec = load(&map)?;
            let b = budget.budget()?;
            decompose_and_write(&spec, &b, &sink).map(|_| ()).map_err(|(_, f)| f)
        }
        Command::CrossValidate { map, budget, grid, tail, tail_burn_in } => {
            let spec = load(&map)?;
            let b = budget.budget()?;
            if grid == 0 || tail == 0 {
                return Err(Failure::Invalid("grid and tail must be positive".into()));
            }
            let (report, exhausted) = match decompose_and_write(&spec, &b, &sink) {
                Ok(r) => (r, None),
                Err((Some(r), f)) => (*r, Some(f)),
                Err((None, f)) => return Err(f),
            };
            let cv = cross_validate(&spec, &report, grid, tail, tail_burn_in)?;
            sink.json("cross_validation.json", &export::cross_validation_json(&cv))?;
            exhausted.map_or(Ok(()), Err)
        }
        Command::Gallery => {
            for (name, spec) in pcim::gallery::all() {
                let mut text = spec.to_json();
                text.push('\n');
                sink.write(&format!("{name}.json"), text)?;
            }
            Ok(())
        }
    }
}

/// Writes the report; on budget exhaustion the report is still written and
/// returned with the failure.
fn decompose_and_write(spec: &Map, b: &Budget, sink: &Sink) -> Result<pcim::Report, (Option<Box<pcim::Report>>, Failure)> {
    let fragments = classify_all(spec, b).map_err(|e| (None, e.into()))?;
    let exhausted: Vec<String> = fragments
        .iter()
        .filter(|f| matches!(f.kind, FragmentKind::Undetermined))
        .map(|f| f.label.to_string())
        .collect();
    let report = assemble(spec, fragments, b).map_err(|e| (None, e.into()))?;
    let write = || -> Result<(), Failure> {
        sink.json("report.json", &export::report_json(&report))?;
        sink.write("report.svg", export::report_svg(spec, &report))?;
        if let Some(g) = &report.class_graph {
            sink.write("classes.dot", export::hasse_dot(g))?;
            sink.write("relation.csv", export::relation_csv(g, spec.pieces()))?;
        }
        Ok(())
    };
    if let Err(f) = write() {
        return Err((None, f));
    }
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    if exhausted.is_empty() {
        Ok(report)
    } else {
        let f = Failure::Budget(format!("horizon {} exhausted for {}", b.horizon, exhausted.join(", ")));
        Err((Some(Box::new(report)), f))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Invalid(m) => (2, "invalid input", m),
                Failure::Budget(m) => (3, "budget exhausted", m),
                Failure::Other(m) => (1, "error", m),
            };
            eprintln!("pcim: {kind}: {msg}");
            ExitCode::from(code)
        }
    }
}
