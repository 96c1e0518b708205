use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use strip_distances::curve::CurveModel;
use strip_distances::decompose::{decompose_group, DecomposeContext, DecompositionReport};
use strip_distances::error::{Error, Result};
use strip_distances::geometry::PointSet;
use strip_distances::harness::{build_instance, run_experiment, Construction, ExperimentConfig, Instance, InstanceParams};
use strip_distances::incidence::build_system;
use strip_distances::io::{parse_point_set, parse_witnesses, write_float_points, write_point_set, write_witnesses};
use strip_distances::rat::{parse_rat, Rat};
use strip_distances::stats::{DistanceTable, EnergyJson};

/// Distinct distances between points on a line and points on a strip.
#[derive(Parser)]
#[command(name = "strip-distances", version)]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports; without it results go to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an instance and write it as CSV.
    Generate(GenerateArgs),
    /// Distinct squared distances and their multiplicities.
    Delta(PairArgs),
    /// Distance energy, and proximity energy with --t.
    Energy {
        #[command(flatten)]
        sets: PairArgs,
        #[arg(long, value_parser = parse_rat_arg)]
        t: Option<Rat>,
    },
    /// Monotone decomposition of every distance (or one, with --delta-sq).
    Decompose {
        #[command(flatten)]
        sets: PairArgs,
        #[arg(long)]
        witnesses: PathBuf,
        /// Curve as JSON, e.g. '{"kind":"linear","slope":"1/2","s":"1"}'.
        #[arg(long)]
        curve: String,
        #[arg(long, value_parser = parse_rat_arg)]
        w: Rat,
        #[arg(long, value_parser = parse_rat_arg)]
        delta_sq: Option<Rat>,
        #[arg(long, default_value_t = 4096)]
        niceness_samples: usize,
    },
    /// Incidence system for parameter t.
    Incidence {
        #[command(flatten)]
        sets: PairArgs,
        #[arg(long, value_parser = parse_rat_arg)]
        t: Rat,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        /// Also write the points and curves as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run the experiment described by --config.
    Experiment,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    p1: PathBuf,
    #[arg(long)]
    p2: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    construction: Option<Construction>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_parser = parse_rat_arg)]
    w: Option<Rat>,
    /// Declared Lipschitz constant of the curve.
    #[arg(long, value_parser = parse_rat_arg)]
    s: Option<Rat>,
    /// Curve as JSON; overrides the configured one.
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    snap_bits: Option<u32>,
    /// Output path; `x.csv` produces `x.p1.csv`, `x.p2.csv` and, for strip
    /// instances, `x.witnesses.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rat_arg(s: &str) -> std::result::Result<Rat, String> {
    parse_rat(s).map_err(|e| e.to_string())
}

fn read_set(path: &Path) -> Result<PointSet> {
    parse_point_set(&std::fs::read_to_string(path)?)
}

fn emit(cli: &Cli, name: &str, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match &cli.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.json")), text)?;
        }
        None => to_stdout(&text)?,
    }
    Ok(())
}

/// A closed pipe (`| head`) is not an error.
fn to_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let (cm, cn) = cfg.sizes.first().copied().unwrap_or((16, 16));
    let mut spec = cfg.curve.clone();
    if let Some(json) = &a.curve {
        spec = serde_json::from_str(json).map_err(|e| Error::Config(format!("--curve: {e}")))?;
    }
    if let Some(s) = &a.s {
        spec.s = Some(s.to_string());
    }
    let params = InstanceParams {
        construction: a.construction.unwrap_or(cfg.construction),
        n: a.n.unwrap_or(cn),
        m: a.m.or(a.n).unwrap_or(cm),
        w: a.w.clone().unwrap_or(cfg.w.clone()),
        curve: CurveModel::from_spec(&spec)?,
        snap_bits: a.snap_bits.unwrap_or(cfg.snap_bits),
        seed: cfg.seeds[0],
    };
    let out = match (&a.out, &cli.out_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(d)) => d.join("instance.csv"),
        (None, None) => PathBuf::from("instance.csv"),
    };
    let base = out.with_extension("");
    let with = |suffix: &str| PathBuf::from(format!("{}.{suffix}.csv", base.display()));
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut files = vec![with("p1"), with("p2")];
    match build_instance(&params)? {
        Instance::Strip(s) => {
            std::fs::write(&files[0], write_point_set(&s.p1))?;
            std::fs::write(&files[1], write_point_set(&s.p2))?;
            files.push(with("witnesses"));
            std::fs::write(&files[2], write_witnesses(&s.witnesses))?;
        }
        Instance::Plain { p1, p2 } => {
            std::fs::write(&files[0], write_point_set(&p1))?;
            std::fs::write(&files[1], write_point_set(&p2))?;
        }
        Instance::Float { p1, p2 } => {
            std::fs::write(&files[0], write_float_points(&p1))?;
            std::fs::write(&files[1], write_float_points(&p2))?;
        }
    }
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Generate(a) => generate(cli, a),
        Cmd::Delta(sets) => {
            let (p1, p2) = (read_set(&sets.p1)?, read_set(&sets.p2)?);
            let prof = DistanceTable::new(&p1, &p2).profile();
            let entries: Vec<_> = prof.entries.iter().map(|(d, r)| json!([d.to_string(), r])).collect();
            emit(
                cli,
                "delta",
                &json!({"m": prof.m, "n": prof.n, "num_distances": prof.num_distances(), "profile": entries}),
            )
        }
        Cmd::Energy { sets, t } => {
            let (p1, p2) = (read_set(&sets.p1)?, read_set(&sets.p2)?);
            let table = DistanceTable::new(&p1, &p2);
            emit(cli, "energy", &serde_json::to_value(EnergyJson::build(&table, t.as_ref())?)?)
        }
        Cmd::Decompose { sets, witnesses, curve, w, delta_sq, niceness_samples } => {
            let (p1, p2) = (read_set(&sets.p1)?, read_set(&sets.p2)?);
            let wits = parse_witnesses(&std::fs::read_to_string(witnesses)?)?;
            let curve = CurveModel::from_json(curve)?;
            let ctx = DecomposeContext {
                curve: &curve,
                witnesses: &wits,
                w: w.clone(),
                s: curve.lipschitz().clone(),
                niceness_samples: *niceness_samples,
            };
            let table = DistanceTable::new(&p1, &p2);
            let groups: Vec<usize> = match delta_sq {
                Some(d) => vec![table
                    .group_of(d)
                    .ok_or_else(|| Error::Precondition(format!("delta^2 = {d} is not realized")))?],
                None => (0..table.num_distances()).collect(),
            };
            use rayon::prelude::*;
            let reports: Vec<DecompositionReport> = groups
                .par_iter()
                .map(|&g| decompose_group(&table, g, &ctx).map(|c| DecompositionReport::from(&c)))
                .collect::<Result<_>>()?;
            emit(cli, "decompose", &serde_json::to_value(reports)?)
        }
        Cmd::Incidence { sets, t, eta, dump } => {
            let (p1, p2) = (read_set(&sets.p1)?, read_set(&sets.p2)?);
            let sys = build_system(&p1, &p2, t)?;
            let et = DistanceTable::new(&p1, &p2).proximity_energy(t)?.energy;
            if let Some(path) = dump {
                std::fs::write(path, sys.to_csv())?;
            }
            let report = sys.report(et, *eta);
            if !report.reconciled {
                return Err(Error::Assertion(serde_json::to_string(&report)?));
            }
            emit(cli, "incidence", &serde_json::to_value(report)?)
        }
        Cmd::Experiment => {
            let cfg = load_config(cli)?;
            let rep = run_experiment(&cfg)?;
            match &cli.out_dir {
                Some(dir) => rep.write(dir),
                None => {
                    to_stdout(&(serde_json::to_string_pretty(&rep)? + "\n"))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_assertion() => {
            let dump = json!({"error": e.to_string(), "detail": failure_detail(&e)});
            let text = serde_json::to_string_pretty(&dump).unwrap_or_default();
            if let Some(dir) = &cli.out_dir {
                let _ = std::fs::create_dir_all(dir);
                let _ = std::fs::write(dir.join("failure.json"), format!("{text}\n"));
            }
            eprintln!("{text}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn failure_detail(e: &Error) -> serde_json::Value {
    match e {
        Error::Assertion(s) => serde_json::from_str(s).unwrap_or_else(|_| json!(s)),
        Error::MonotonicityViolation { delta_sq, list, tag, index, detail } => {
            json!({"delta_sq": delta_sq, "list": list, "tag": tag, "index": index, "detail": detail})
        }
        _ => json!(null),
    }
}
