use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use adagrid::bench::{emit_results, run_plan, ExperimentPlan};
use adagrid::oracle::{OracleSpec, Transform};
use adagrid::service::{preset, ServeConfig, Server};
use adagrid::session::{SessionStore, SliceRequest};
use adagrid::static_designs::{StaticDesignSpec, StaticKind};
use adagrid::strategy::{write_trace, Designer, StrategyKind, StrategySpec};
use adagrid::theory::{bound_reports, checks};
use adagrid::{uncertain_volume, Error, Label};
use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Adaptive grid designs for monotone binary simulations.
#[derive(Parser)]
#[command(name = "adagrid", version)]
struct Cli {
    /// Print summaries as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Directory holding session files.
    #[arg(long, global = true, env = "ADAGRID_DATA_DIR", default_value = "adagrid-data")]
    data_dir: PathBuf,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a static design as CSV.
    Design {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short)]
        p: usize,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sequential strategy against an in-process oracle.
    Run {
        #[arg(long)]
        strategy: StrategyKind,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Evaluation budget.
        #[arg(short)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Trace file (newline-delimited JSON); stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment plan and write CSV plus a JSON sidecar.
    Bench {
        plan: PathBuf,
        /// Use the plan's full-scale settings.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Check closed-form results against simulation.
    Theory {
        #[arg(long = "check")]
        checks: Vec<String>,
        #[arg(long)]
        all: bool,
        /// List check names.
        #[arg(long)]
        list: bool,
        /// Print the closed-form bounds for dimension P and budget N.
        #[arg(long, num_args = 2, value_names = ["P", "N"])]
        bounds: Option<Vec<u64>>,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8750")]
        bind: SocketAddr,
        /// Bearer token; required for non-loopback addresses.
        #[arg(long, env = "ADAGRID_TOKEN")]
        token: Option<String>,
    },
    /// Manage design sessions stored under --data-dir.
    Session {
        #[command(subcommand)]
        command: SessionCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sg,
    Si,
    Mc,
    Lhd,
}

impl From<Kind> for StaticKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sg => StaticKind::Sg,
            Kind::Si => StaticKind::Si,
            Kind::Mc => StaticKind::Mc,
            Kind::Lhd => StaticKind::Lhd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Illustration,
    Arctan,
    Halfspace,
    Staircase,
    UpperFace,
    Tabular,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    oracle: Option<OracleKind>,
    /// An oracle description in JSON; replaces --oracle.
    #[arg(long, conflicts_with = "oracle")]
    oracle_spec: Option<PathBuf>,
    #[arg(short, default_value_t = 2)]
    p: usize,
    /// Arctan contour level.
    #[arg(long)]
    mu: Option<f64>,
    /// Half-space threshold on the coordinate mean.
    #[arg(long)]
    level: Option<f64>,
    /// Staircase cells per axis.
    #[arg(long, default_value_t = 8)]
    resolution: usize,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    transform: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SessionCommand {
    /// Start a session.
    Create {
        #[arg(long)]
        strategy: StrategyKind,
        #[arg(short)]
        p: Option<usize>,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// identity, ice_breaking, crash_full_grid or crash_inner_grid.
        #[arg(long, conflicts_with = "transform")]
        preset: Option<String>,
        /// Transform JSON file.
        #[arg(long)]
        transform: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
    },
    List,
    Show { id: String },
    /// Print the point to evaluate next.
    Suggest { id: String },
    /// Record the outcome of the pending point.
    Outcome {
        id: String,
        #[arg(long, allow_negative_numbers = true)]
        label: i8,
    },
    /// Write the report JSON.
    Report {
        id: String,
        /// Two axes, e.g. `0,1`.
        #[arg(long, value_delimiter = ',')]
        slice_dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, value_delimiter = ',')]
        fixed: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct TheoryFailed;

impl std::fmt::Debug for TheoryFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("theory check failed")
    }
}
impl std::fmt::Display for TheoryFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("theory check failed")
    }
}
impl std::error::Error for TheoryFailed {}

fn seed_or_default(seed: Option<u64>, what: &str) -> u64 {
    seed.unwrap_or_else(|| {
        let s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos() as u64);
        log::info!("{what}: no --seed given, using seed {s}");
        s
    })
}

fn output(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn oracle_spec(a: &OracleArgs) -> anyhow::Result<OracleSpec> {
    if let Some(path) = &a.oracle_spec {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Ok(serde_json::from_str(&text).map_err(Error::from)?);
    }
    let kind = a
        .oracle
        .ok_or_else(|| Error::Usage("give --oracle or --oracle-spec".into()))?;
    Ok(match kind {
        OracleKind::Illustration => OracleSpec::Illustration,
        OracleKind::Arctan => {
            let mu = match a.mu {
                Some(mu) => mu,
                None => {
                    let (lo, hi) = adagrid::oracle::arctan_mu_range(a.p)
                        .ok_or_else(|| Error::Usage(format!("give --mu; no default range for p = {}", a.p)))?;
                    let mu = 0.5 * (lo + hi);
                    log::info!("no --mu given, using the mid-range value {mu}");
                    mu
                }
            };
            OracleSpec::ArctanContour { p: a.p, mu }
        }
        OracleKind::Halfspace => OracleSpec::HalfSpace { p: a.p, level: a.level },
        OracleKind::Staircase => OracleSpec::Staircase {
            p: a.p,
            resolution: a.resolution,
            seed: seed_or_default(None, "staircase oracle"),
        },
        OracleKind::UpperFace => OracleSpec::UpperFace { p: a.p },
        OracleKind::Tabular => OracleSpec::Tabular {
            table: a.table.clone().ok_or_else(|| Error::Usage("--table is required".into()))?,
            transform: a
                .transform
                .clone()
                .ok_or_else(|| Error::Usage("--transform is required".into()))?,
        },
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Design { kind, p, n, seed, out } => {
            let kind: StaticKind = kind.into();
            let seed = match kind {
                StaticKind::Mc | StaticKind::Lhd => seed_or_default(seed, "design"),
                _ => seed.unwrap_or(0),
            };
            let points = StaticDesignSpec { kind, dimension: p, n, seed }.generate()?;
            let mut w = csv::Writer::from_writer(output(out.as_ref())?);
            w.write_record((1..=p).map(|k| format!("x{k}")))?;
            for x in &points {
                w.write_record(x.coords().iter().map(f64::to_string))?;
            }
            w.flush()?;
            if out.is_some() {
                if cli.json {
                    print_json(&serde_json::json!({ "points": points.len(), "seed": seed }))?;
                } else {
                    println!("wrote {} points", points.len());
                }
            }
        }
        Command::Run { strategy, oracle, n, seed, out } => {
            let spec = oracle_spec(&oracle)?;
            let f = spec.build()?;
            let seed = seed_or_default(seed, "run");
            let mut d = Designer::for_oracle(StrategySpec::new(strategy, f.dimension(), n, seed), f.as_ref())?;
            let completion = d.run(f.as_ref())?;
            let mut w = output(out.as_ref())?;
            write_trace(&mut w, d.history())?;
            w.flush()?;
            drop(w);
            let v = uncertain_volume(d.state())?;
            let summary = serde_json::json!({
                "strategy": strategy,
                "oracle": f.id(),
                "evaluations": d.history().len(),
                "completion": completion,
                "seed": seed,
                "v_uncertain": v.v_uncertain,
            });
            let line = if cli.json {
                serde_json::to_string(&summary)?
            } else {
                format!(
                    "{} on {}: {} evaluations, {:?}, v_uncertain = {}",
                    strategy,
                    f.id(),
                    d.history().len(),
                    completion,
                    v.v_uncertain
                )
            };
            if out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Command::Bench { plan, full, out, parallelism } => {
            let mut plan = ExperimentPlan::from_file(&plan)?;
            if full {
                plan = plan.at_full_scale();
            }
            if let Some(k) = parallelism {
                plan.parallelism = k;
            }
            log::info!("bench: master seed {}", plan.master_seed);
            let results = run_plan(&plan)?;
            let meta = emit_results(&results, &plan, &out)?;
            if cli.json {
                print_json(&meta)?;
            } else {
                println!(
                    "wrote {} rows ({} errors) to {}; hash {}",
                    meta.rows,
                    meta.errors,
                    out.display(),
                    meta.determinism_hash
                );
            }
        }
        Command::Theory { checks: names, all, list, bounds } => {
            if list {
                for name in checks::CHECK_NAMES {
                    println!("{name}");
                }
                return Ok(());
            }
            if let Some(b) = bounds {
                let reports = bound_reports(b[0] as usize, b[1]);
                if cli.json {
                    print_json(&reports)?;
                } else {
                    for r in reports {
                        match r.value.value() {
                            Some(v) => println!("{:<28} {v}", r.name),
                            None => println!("{:<28} n/a", r.name),
                        }
                    }
                }
                return Ok(());
            }
            let names: Vec<String> = if all || names.is_empty() {
                checks::CHECK_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names
            };
            let mut failed = false;
            let mut outcomes = Vec::new();
            for name in &names {
                let o = checks::run_check(name)?;
                failed |= !o.passed;
                if !cli.json {
                    println!(
                        "{} {:<18} {} ({} ms)",
                        if o.passed { "PASS" } else { "FAIL" },
                        o.name,
                        o.detail,
                        o.elapsed_ms
                    );
                }
                outcomes.push(o);
            }
            if cli.json {
                print_json(&outcomes)?;
            }
            if failed {
                return Err(TheoryFailed.into());
            }
        }
        Command::Serve { bind, token } => {
            let config = ServeConfig {
                bind,
                data_dir: cli.data_dir,
                token,
            };
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(async move {
                let server = Server::bind(config).await?;
                let addr = server.local_addr()?;
                println!("listening on http://{addr}");
                server
                    .run(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
        Command::Session { command } => session(command, &cli.data_dir, cli.json)?,
    }
    Ok(())
}

fn session(command: SessionCommand, data_dir: &PathBuf, json: bool) -> anyhow::Result<()> {
    let store = SessionStore::open(data_dir)?;
    match command {
        SessionCommand::Create {
            strategy,
            p,
            budget,
            seed,
            preset: preset_name,
            transform,
            name,
        } => {
            let transform = match (transform, preset_name) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("cannot read {}", path.display()))?;
                    serde_json::from_str::<Transform>(&text).map_err(Error::from)?
                }
                (None, Some(name)) => preset(&name, p.unwrap_or(0))?,
                (None, None) => {
                    let p = p.ok_or_else(|| Error::Usage("give -p, --preset or --transform".into()))?;
                    Transform::identity(p)
                }
            };
            let p = p.unwrap_or(transform.dimension());
            let seed = seed_or_default(seed, "session");
            let s = store.create(transform, StrategySpec::new(strategy, p, budget, seed), name)?;
            if json {
                print_json(s.record())?;
            } else {
                println!("{}", s.id());
            }
        }
        SessionCommand::List => {
            let all = store.list()?;
            if json {
                print_json(&all)?;
            } else {
                for s in all {
                    println!(
                        "{}  {}  p={}  n={}  v={:.6}",
                        s.id, s.strategy, s.dimension, s.evaluations, s.v_uncertain
                    );
                }
            }
        }
        SessionCommand::Show { id } => print_json(store.load(&id)?.record())?,
        SessionCommand::Suggest { id } => {
            let mut s = store.load(&id)?;
            let out = s.suggest();
            store.save(&s)?;
            print_json(&out?)?;
        }
        SessionCommand::Outcome { id, label } => {
            Label::try_from(label)?;
            let mut s = store.load(&id)?;
            let out = s.record_outcome(label);
            store.save(&s)?;
            let out = out?;
            if json {
                print_json(&out)?;
            } else {
                println!(
                    "recorded run {}; v_uncertain = {}",
                    out.record.index, out.volume.v_uncertain
                );
            }
        }
        SessionCommand::Report {
            id,
            slice_dims,
            grid,
            fixed,
            out,
        } => {
            let s = store.load(&id)?;
            let slice = match slice_dims {
                Some(d) if d.len() != 2 => {
                    return Err(Error::Usage("--slice-dims takes two axes, e.g. 0,1".into()).into())
                }
                Some(d) => Some(SliceRequest {
                    dims: (d[0], d[1]),
                    grid,
                    fixed,
                }),
                None if fixed.is_some() || grid != 64 => Some(SliceRequest {
                    dims: (0, 1),
                    grid,
                    fixed,
                }),
                None => None,
            };
            let report = s.report(slice.as_ref())?;
            let mut w = output(out.as_ref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<TheoryFailed>().is_some() {
        return 3;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::Usage(_)
            | Error::DimensionMismatch { .. }
            | Error::Domain(_)
            | Error::Json(_)
            | Error::SessionNotFound(_)
            | Error::SessionState(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<TheoryFailed>().is_none() {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
