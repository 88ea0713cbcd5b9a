use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commsq::catalog::{self, dynkin, CatalogEntry};
use commsq::connection::SolverOptions;
use commsq::error::Error;
use commsq::flatness::{analyze, is_flat, Caps, FlatnessReport, PrincipalGraphResult};
use commsq::paths::{BipartiteGraph, Direction};
use commsq::square::{verify_commuting, CommutingReport, CommutingSquare};

mod input;

use input::Input;

const CLI_SCHEMA: &str = "commsq/cli/v1";

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "commsq", version, about = "Commuting squares, connections, relative commutants and principal graphs")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive_f64)]
    tol: f64,
    /// Highest relative commutant level computed.
    #[arg(long, global = true, default_value_t = 12, value_parser = positive_usize)]
    kmax: usize,
    /// Highest horizontal level used while solving for a commutant.
    #[arg(long, global = true, default_value_t = 12, value_parser = positive_usize)]
    lcap: usize,
    /// Seed of the connection solver.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restarts of the connection solver.
    #[arg(long, global = true, default_value_t = 20, value_parser = positive_usize)]
    restarts: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory holding catalog.json.
    #[arg(long, global = true, env = catalog::DATA_DIR_VAR)]
    data_dir: Option<PathBuf>,
    /// Only report warnings and errors on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Dir {
    Horizontal,
    Vertical,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Horizontal => Direction::Horizontal,
            Dir::Vertical => Direction::Vertical,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the commuting-square conditions of a square file.
    Verify { square: PathBuf },
    /// Principal graph of the horizontal or vertical subfactor.
    PrincipalGraph(Target),
    /// Decide flatness of the connection.
    Flat(Target),
    #[command(subcommand)]
    Catalog(CatalogCmd),
}

#[derive(Args, Debug)]
struct Target {
    /// Connection or square file, or a catalog entry name.
    input: String,
    #[arg(long, value_enum, default_value_t = Dir::Horizontal)]
    direction: Dir,
    /// Start multiplicities for a connection file, comma separated (default: the star vertex).
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<usize>>,
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    List,
    Show { name: String },
    /// Write the connection of an entry, or its square with `--square`.
    Export {
        name: String,
        #[arg(long)]
        square: bool,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

impl RunConfig {
    fn caps(&self) -> Caps {
        Caps { k_max: self.kmax, l_cap: self.lcap, tol: self.tol }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { seed: self.seed, restarts: self.restarts, ..SolverOptions::default() }
    }

    fn emit(&self, payload: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, payload).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().write_all(payload.as_bytes())?,
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Dynkin name of `g` when it is one.
fn identify(g: &BipartiteGraph) -> Option<String> {
    let n = g.n_vertices();
    let mut names = vec![format!("A{n}"), format!("D{n}")];
    if (6..=8).contains(&n) {
        names.push(format!("E{n}"));
    }
    names.into_iter().find(|name| dynkin(name).map(|d| d.is_isomorphic(g)).unwrap_or(false))
}

fn verify(run: &RunConfig, path: &PathBuf) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let sq = CommutingSquare::from_json(&value)?;
    let report = verify_commuting(&sq, run.tol);
    let payload = match run.format {
        Format::Text => verify_text(&report),
        Format::Json => {
            let mut v = serde_json::to_value(&report)?;
            v["schema"] = CLI_SCHEMA.into();
            v["kind"] = "verify".into();
            v["passes"] = report.passes().into();
            pretty(&v)
        }
        Format::Dot => bail!(input::InputError("verify has no DOT output".into())),
    };
    run.emit(&payload)?;
    Ok(if report.passes() { 0 } else { EXIT_FAILED })
}

fn verify_text(r: &CommutingReport) -> String {
    let mut s = String::new();
    for c in &r.conditions {
        s.push_str(&format!("{:<4} {:<24} residual {:.3e}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.residual));
    }
    s.push_str(&format!("square defect {:.3e}, tolerance {:.1e}\n", r.square_defect, r.tolerance));
    if !r.all_equivalent {
        s.push_str("warning: the conditions disagree\n");
    }
    s.push_str(if r.passes() { "commuting square\n" } else { "not a commuting square\n" });
    s
}

fn principal_graph(run: &RunConfig, t: &Target) -> anyhow::Result<u8> {
    let input = Input::resolve(&t.input, t.start.clone(), run)?;
    let ds = input.sequence(t.direction.into())?;
    let (tower, pg) = analyze(&ds, &run.caps())?;
    let payload = match run.format {
        Format::Text => pg_text(&input.name, &pg, &tower.dims()),
        Format::Json => {
            let mut v = pg.to_json();
            v["input"] = input.name.clone().into();
            v["direction"] = format!("{:?}", t.direction).to_lowercase().into();
            v["dynkin"] = identify(&pg.graph).into();
            v["dims"] = tower.dims().into();
            pretty(&v)
        }
        Format::Dot => pg.to_dot(&input.name),
    };
    run.emit(&payload)?;
    Ok(0)
}

fn pg_text(name: &str, pg: &PrincipalGraphResult, dims: &[usize]) -> String {
    let g = &pg.graph;
    let mut s = format!("{name}: principal graph with {} even and {} odd vertices", g.n_even(), g.n_odd());
    if let Some(d) = identify(g) {
        s.push_str(&format!(" ({d})"));
    }
    s.push('\n');
    s.push_str(&format!("depth {}\nindex {:.10}\nglobal index {:.10}\n", pg.depth, pg.index, pg.global_index));
    s.push_str(&format!("commutant dimensions {dims:?}\n"));
    let ls: Vec<String> = pg.l_star.iter().map(|l| l.map_or("-".into(), |l| l.to_string())).collect();
    s.push_str(&format!("stabilizing levels [{}]\n", ls.join(", ")));
    s
}

fn flat(run: &RunConfig, t: &Target) -> anyhow::Result<u8> {
    let input = Input::resolve(&t.input, t.start.clone(), run)?;
    let ds = input.sequence(t.direction.into())?;
    let report = is_flat(&ds, &run.caps())?;
    let payload = match run.format {
        Format::Text => flat_text(&input.name, &report),
        Format::Json => {
            let mut v = report.to_json();
            v["input"] = input.name.clone().into();
            pretty(&v)
        }
        Format::Dot => bail!(input::InputError("flat has no DOT output".into())),
    };
    run.emit(&payload)?;
    Ok(0)
}

fn flat_text(name: &str, r: &FlatnessReport) -> String {
    let mut s = format!("{name}: {}\n", if r.flat { "flat" } else { "not flat" });
    for (k, (c, a)) in r.dims.iter().enumerate() {
        s.push_str(&format!("  k={k}: dim C_k = {c}, dim A_k0 = {a}\n"));
    }
    if let Some(w) = &r.witness {
        let d: Vec<String> = w.defects.iter().map(|x| format!("{x:.2e}")).collect();
        s.push_str(&format!("witness at k={} with norm {:.3e}, defects by level [{}]\n", w.k, w.element.norm(), d.join(", ")));
    }
    s
}

fn entry_text(e: &CatalogEntry) -> String {
    let mut s = format!("{}\n  {}\n", e.name, e.description);
    let v = serde_json::to_value(&e.expected).expect("json values serialize");
    if let serde_json::Value::Object(m) = v {
        for (k, t) in m {
            s.push_str(&format!("  {k}: {} ({})\n", t["value"], t["provenance"].as_str().unwrap_or("")));
        }
    }
    s
}

fn catalog_cmd(run: &RunConfig, c: &CatalogCmd) -> anyhow::Result<u8> {
    let payload = match c {
        CatalogCmd::List => {
            let es = catalog::entries()?;
            match run.format {
                Format::Json => pretty(&serde_json::json!({
                    "schema": catalog::CATALOG_SCHEMA,
                    "entries": es,
                })),
                _ => es.iter().map(|e| format!("{:<12} {}\n", e.name, e.description)).collect(),
            }
        }
        CatalogCmd::Show { name } => {
            let e = catalog::entry(name)?;
            match run.format {
                Format::Json => pretty(&serde_json::to_value(&e)?),
                _ => entry_text(&e),
            }
        }
        CatalogCmd::Export { name, square } => {
            let f = catalog::build_named(name, &run.solver())?;
            if *square {
                match &f.square {
                    Some(sq) => pretty(&sq.to_json()),
                    None => bail!(input::InputError(format!("{name} is not built from a square"))),
                }
            } else {
                pretty(&f.connection.to_json())
            }
        }
    };
    run.emit(&payload)?;
    Ok(0)
}

fn undecided(run: &RunConfig, depth: usize, reason: &str, dims: &[Vec<usize>]) -> u8 {
    let payload = match run.format {
        Format::Json => pretty(&serde_json::json!({
            "schema": CLI_SCHEMA,
            "kind": "undecided",
            "depth": depth,
            "reason": reason,
            "dims": dims,
        })),
        _ => format!("undecided at depth {depth}: {reason}\ndimensions {dims:?}\n"),
    };
    if let Err(e) = run.emit(&payload) {
        eprintln!("error: {e:#}");
        return EXIT_INPUT;
    }
    EXIT_UNDECIDED
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<input::InputError>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some()
        || err.downcast_ref::<std::io::Error>().is_some()
    {
        return EXIT_INPUT;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Shape(_) | Error::Invalid(_) | Error::Disconnected(_) | Error::MissingCells(_))
        | Some(Error::Json(_) | Error::Io(_)) => EXIT_INPUT,
        Some(Error::Undecided { .. } | Error::DepthBound { .. }) => EXIT_UNDECIDED,
        _ => EXIT_FAILED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.run.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    if let Some(d) = &cli.run.data_dir {
        std::env::set_var(catalog::DATA_DIR_VAR, d);
    }
    let run = &cli.run;
    let result = match &cli.command {
        Command::Verify { square } => verify(run, square),
        Command::PrincipalGraph(t) => principal_graph(run, t),
        Command::Flat(t) => flat(run, t),
        Command::Catalog(c) => catalog_cmd(run, c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(Error::Undecided { depth, reason, dims }) = e.downcast_ref::<Error>() {
                log::warn!("{reason}");
                return ExitCode::from(undecided(run, *depth, reason, dims));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
