use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use skewdim::output::{curve_csv, curve_svg, fmt_float, metadata, zeroset_csv};
use skewdim::solver::usable_window;
use skewdim::{
    gamma_c, gamma_extremes, pressure_adaptive, pressure_collocation_adaptive, pressure_transfer, run_suite,
    trace_curve, zeroset_scan, Backend, Collocation, Error, ErrorClass, FibreParams, PotentialWindow, RunConfig,
    VerifyOptions,
};

#[derive(Parser)]
#[command(name = "skewdim", version, about = "Pressure, pullback graphs and the dimension curve D(t) of baker-driven skew products")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Partition parameter of the baker map, in (0, 1)
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Forcing constant in g(v) = c + cos(2 pi v), above 1
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Random seed for sampled commands (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Pressure discretization used by the solver
    #[arg(long, global = true, value_parser = parse_backend)]
    backend: Option<Backend>,
    /// Agreement required between successive pressure resolutions
    #[arg(long, global = true)]
    win_tol: Option<f64>,
    /// Newton tolerance on max(|Q|, |dQ/dq|)
    #[arg(long, global = true)]
    newton_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Trace D(t) over a grid and write CSV (and optionally SVG)
    Curve {
        #[arg(long, allow_negative_numbers = true)]
        t_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// CSV output path (stdout when absent)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Classify Lebesgue-random points as zero or positive at one t
    Zeroset {
        /// Fibre parameter
        #[arg(long, allow_negative_numbers = true, conflicts_with = "dt")]
        t: Option<f64>,
        /// Fibre parameter given as an offset from gamma_c
        #[arg(long, allow_negative_numbers = true)]
        dt: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Pullback steps per point
        #[arg(long)]
        n: Option<usize>,
        /// CSV output path for per-point records
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate Q(delta, q, t) and print it as JSON
    Pressure {
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Window length for the window backend; with --adaptive, the starting length
        #[arg(long, default_value_t = 8)]
        m: usize,
        /// Refine the window until successive values agree to --win-tol
        #[arg(long)]
        adaptive: bool,
        #[arg(long, default_value_t = 16)]
        m_max: usize,
    },
    /// Print gamma_c and the periodic-orbit extremes as JSON
    Gamma {
        #[arg(long)]
        max_period: Option<usize>,
    },
    /// Run the invariant suite and print a pass/fail table
    Verify {
        /// Only the deterministic checks
        #[arg(long)]
        skip_montecarlo: bool,
        /// Evaluate the Bowen closed form at this partition parameter (harness self-test)
        #[arg(long)]
        fault_a: Option<f64>,
        /// Print JSON instead of a tab-separated table
        #[arg(long)]
        json: bool,
    },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    match s {
        "collocation" => Ok(Backend::Collocation),
        "window" => Ok(Backend::Window),
        _ => Err(format!("unknown backend {s:?}, expected collocation or window")),
    }
}

enum Failure {
    Lib(Error),
    Io(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(a) = common.a {
        cfg.a = a;
    }
    if let Some(c) = common.c {
        cfg.c = c;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(backend) = common.backend {
        cfg.solver.backend = backend;
    }
    if let Some(tol) = common.win_tol {
        cfg.solver.win_tol = tol;
    }
    if let Some(tol) = common.newton_tol {
        cfg.solver.newton_tol = tol;
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Curve { t_min, t_max, steps, output, svg } => {
            cfg.t_min = t_min.or(cfg.t_min);
            cfg.t_max = t_max.or(cfg.t_max);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.output = output.or(cfg.output);
            cfg.svg = svg.or(cfg.svg);
            cfg.validate()?;
            curve(&cfg)
        }
        Command::Zeroset { t, dt, samples, n, output } => {
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.n = n.unwrap_or(cfg.n);
            cfg.output = output.or(cfg.output);
            cfg.validate()?;
            let gc = gamma_c(cfg.a, &cfg.forcing()?)?;
            let t = match (t, dt) {
                (Some(t), _) => t,
                (None, Some(dt)) => gc + dt,
                (None, None) => return Err(Error::InvalidParameter("zeroset needs --t or --dt".into()).into()),
            };
            zeroset(&cfg, t, gc)
        }
        Command::Pressure { q, delta, t, m, adaptive, m_max } => {
            cfg.validate()?;
            let result = match cfg.solver.backend {
                Backend::Window => {
                    let win = PotentialWindow::new(m, cfg.a, cfg.forcing()?)?;
                    if adaptive {
                        pressure_adaptive(q, delta, t, cfg.solver.win_tol, &win, m_max)?
                    } else {
                        pressure_transfer(q, delta, t, &win)?
                    }
                }
                Backend::Collocation => {
                    let s = &cfg.solver;
                    let grid = Collocation::new(cfg.a, cfg.forcing()?, s.nodes_start)?;
                    pressure_collocation_adaptive(q, delta, t, s.win_tol, &grid, s.nodes_step, s.nodes_max)?
                }
            };
            print_json(&result);
            Ok(())
        }
        Command::Gamma { max_period } => {
            cfg.max_period = max_period.unwrap_or(cfg.max_period);
            cfg.validate()?;
            print_json(&gamma_extremes(cfg.a, &cfg.forcing()?, cfg.max_period)?);
            Ok(())
        }
        Command::Verify { skip_montecarlo, fault_a, json } => {
            cfg.validate()?;
            let opts = VerifyOptions {
                a: cfg.a,
                c: cfg.c,
                seed: cfg.seed,
                skip_montecarlo,
                bowen_fault_a: fault_a,
                solver: cfg.solver,
                pullback: cfg.pullback,
            };
            let outcomes = run_suite(&opts)?;
            if json {
                print_json(&json!({ "seed": cfg.seed, "checks": outcomes }));
            } else {
                println!("check\tresult\tseconds\tdetail");
                for o in &outcomes {
                    println!("{}\t{}\t{:.3}\t{}", o.name, if o.passed { "pass" } else { "FAIL" }, o.seconds, o.detail);
                }
            }
            match outcomes.iter().find(|o| !o.passed) {
                Some(first) => Err(Failure::Checks(format!("first failing check: {}", first.name))),
                None => Ok(()),
            }
        }
    }
}

fn curve(cfg: &RunConfig) -> Result<(), Failure> {
    let model = cfg.model()?;
    let gc = gamma_c(cfg.a, &model.forcing)?;
    let (lo, hi) = cfg.t_range(gc);
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidParameter(format!("need t_min < t_max, got {lo} and {hi}")).into());
    }
    let grid = cfg.grid(gc);
    let gamma = gamma_extremes(cfg.a, &model.forcing, cfg.max_period)?;
    let resolution = (hi - lo) / (cfg.steps - 1) as f64;
    let bounds = usable_window(&gamma, cfg.margin_fraction, resolution)?;
    let points = trace_curve(&grid, &model, &cfg.solver, gc, Some(bounds))?;

    let meta = metadata(
        "curve",
        cfg.seed,
        &cfg.echo(),
        &[
            ("gamma_c", fmt_float(gc)),
            ("gamma_min_est", fmt_float(gamma.gamma_min_est)),
            ("gamma_max_est", fmt_float(gamma.gamma_max_est)),
        ],
    );
    let csv = curve_csv(&meta, &points);
    match &cfg.output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &cfg.svg {
        write_file(path, &curve_svg(&points, gc))?;
    }

    let converged = points.iter().filter(|p| p.converged).count();
    if let Some(best) = points.iter().filter(|p| p.converged).max_by(|x, y| x.d.total_cmp(&y.d)) {
        eprintln!("{converged}/{} points converged; max D = {:.9} at t = {:.6} (gamma_c = {gc:.9})", points.len(), best.d, best.t);
    }
    if 2 * converged < points.len() {
        return Err(Error::NonConvergence { what: "curve trace (fewer than half the grid points)", iterations: points.len() }.into());
    }
    Ok(())
}

fn zeroset(cfg: &RunConfig, t: f64, gc: f64) -> Result<(), Failure> {
    let params = FibreParams::new(cfg.a, t, cfg.forcing()?)?;
    let summary = zeroset_scan(&params, cfg.samples, cfg.n, cfg.seed, &cfg.pullback)?;
    if let Some(path) = &cfg.output {
        let meta = metadata("zeroset", cfg.seed, &cfg.echo(), &[("t", fmt_float(t)), ("gamma_c", fmt_float(gc))]);
        write_file(path, &zeroset_csv(&meta, &summary.records))?;
    }
    print_json(&json!({
        "t": summary.t,
        "gamma_c": gc,
        "samples": summary.samples,
        "n": summary.n,
        "seed": summary.seed,
        "zero": summary.zero,
        "positive": summary.positive,
        "undetermined": summary.undetermined,
        "fraction_zero": summary.fraction_zero,
        "trichotomy_agreement": summary.trichotomy_agreement(0.1),
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Numeric => 3,
                ErrorClass::Resource => 4,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::Checks(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
