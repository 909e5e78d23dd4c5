use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use local_lmo::harness::{self, ExperimentSpec};
use local_lmo::oracle::{check_trajectory, oracle_local_lmo, Claim};
use local_lmo::solvers::read_csv;
use local_lmo::{local_lmo, ConstraintSet, Error, LocalBall, Vector};

const SOLVER_ERROR: u8 = 1;
const CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "local-lmo",
    version,
    about = "Local linear minimization oracle experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in experiments.
    List,
    /// Run a built-in experiment or a TOML experiment file.
    Run {
        /// Built-in name or path to a config file.
        target: String,
        /// Output directory (default: $LOCAL_LMO_OUT or out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed applied to every run.
        #[arg(long)]
        seed: Option<u64>,
        /// Iteration budget applied to every run.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Re-check a trajectory CSV against invariant claims.
    Check {
        csv: PathBuf,
        /// Comma-separated claim names, e.g. fejer,boundary_step.
        #[arg(long, value_delimiter = ',', required = true)]
        claims: Vec<String>,
    },
    /// Compare the reference oracle with the closed-form local LMO.
    Oracle {
        /// TOML file holding one constraint set.
        set: PathBuf,
        /// Ball center, comma separated.
        center: String,
        radius: f64,
        /// Linear objective, comma separated.
        g: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn config(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: CONFIG_ERROR,
        message: e.to_string(),
    }
}

fn solver(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: SOLVER_ERROR,
        message: e.to_string(),
    }
}

fn parse_vector(s: &str) -> Result<Vector, Failure> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map(Vector::from)
        .map_err(|e| config(format!("bad vector {s:?}: {e}")))
}

fn load_experiment(target: &str) -> Result<ExperimentSpec, Failure> {
    if let Some(spec) = harness::builtin(target) {
        return Ok(spec);
    }
    let path = Path::new(target);
    if !path.is_file() {
        return Err(config(format!(
            "unknown experiment {target:?} (built-ins: {})",
            harness::builtin_names().join(", ")
        )));
    }
    ExperimentSpec::load(path).map_err(config)
}

fn list() -> Result<(), Failure> {
    for name in harness::builtin_names() {
        let spec = harness::builtin(name).expect("registered");
        println!("{name}\t{}", spec.description);
    }
    Ok(())
}

fn run(
    target: &str,
    out: Option<PathBuf>,
    seed: Option<u64>,
    iters: Option<usize>,
) -> Result<(), Failure> {
    let mut spec = load_experiment(target)?;
    spec.override_runs(seed, iters);
    let problems = spec.validate();
    if !problems.is_empty() {
        return Err(config(problems.join("; ")));
    }
    let out = out.unwrap_or_else(|| harness::default_out_dir(&spec.name));
    let report = harness::run_experiment(&spec, &out).map_err(|e| match e {
        Error::Config(_) | Error::Parse(_) => config(e),
        other => solver(other),
    })?;
    println!("{} -> {}", report.name, report.out_dir.display());
    for r in &report.runs {
        let checks = match (&r.error, &r.checks) {
            (Some(_), _) => "error",
            (None, None) => "-",
            (None, Some(c)) if c.all_pass() => "pass",
            _ => "fail",
        };
        let dist = r
            .final_dist_sq
            .map(|v| format!("{v:.3e}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "  {:<12} {:<12} iters={:<5} dist_sq={dist:<10} checks={checks}",
            r.label,
            r.method.to_string(),
            r.iterations
        );
        if let Some(e) = &r.error {
            eprintln!("  {}: {e}", r.label);
        }
        if let Some(c) = r.checks.as_ref().filter(|c| !c.all_pass()) {
            eprint!("{c}");
        }
    }
    if report.any_error() {
        return Err(solver("one or more runs failed"));
    }
    if !report.all_checks_pass() {
        return Err(solver("one or more invariant checks failed"));
    }
    Ok(())
}

fn check(path: &Path, claims: &[String]) -> Result<(), Failure> {
    let claims: Vec<Claim> = claims
        .iter()
        .map(|c| c.trim().parse::<Claim>())
        .collect::<Result<_, _>>()
        .map_err(config)?;
    let file = fs::File::open(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let traj = read_csv(BufReader::new(file)).map_err(config)?;
    let report = check_trajectory(&traj, None, &claims).map_err(|e| match e {
        Error::UnknownClaim(_) => config(e),
        other => solver(other),
    })?;
    print!("{report}");
    if report.all_pass() {
        Ok(())
    } else {
        Err(solver("claims failed"))
    }
}

fn oracle(set: &Path, center: &str, radius: f64, g: &str) -> Result<(), Failure> {
    let text = fs::read_to_string(set).map_err(|e| config(format!("{}: {e}", set.display())))?;
    let set: ConstraintSet = toml::from_str(&text).map_err(config)?;
    let set = set.validated().map_err(config)?;
    let ball = LocalBall::new(parse_vector(center)?, radius);
    let g = parse_vector(g)?;
    let reference = oracle_local_lmo(&set, &ball, &g).map_err(solver)?;
    let closed = local_lmo(&set, &ball, &g).map_err(solver)?;
    let value = closed.dot(&g);
    println!("method    = {:?}", reference.method_tag);
    println!(
        "oracle    = {:?}  <g,z> = {:.16e}",
        reference.point.as_slice(),
        reference.objective
    );
    println!("local_lmo = {:?}  <g,z> = {value:.16e}", closed.as_slice());
    println!("gap       = {:.3e}", value - reference.objective);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => list(),
        Command::Run {
            target,
            out,
            seed,
            iters,
        } => run(&target, out, seed, iters),
        Command::Check { csv, claims } => check(&csv, &claims),
        Command::Oracle {
            set,
            center,
            radius,
            g,
        } => oracle(&set, &center, radius, &g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
