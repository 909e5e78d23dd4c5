//! Experiment specifications, the built-in registry, and output writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, MEMBERSHIP_TOL};
use crate::objectives::{make_paper_quadratic, Objective};
use crate::oracle::{check_trajectory, CheckReport, Claim};
use crate::rules::{RadiusRule, StepsizeRule};
use crate::solvers::{self, write_csv, Method, Rule, SolverConfig, Trajectory};
use crate::vector::Vector;

/// Environment variable overriding the default output directory.
pub const OUT_ENV: &str = "LOCAL_LMO_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub set: ConstraintSet,
    pub objective: Objective,
    pub x0: Vector,
    /// When set, `x⋆` is recomputed for each run's set by this many PGD
    /// iterations with `γ = 1/L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_optimum_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub label: String,
    pub config: SolverConfig,
    /// Overrides the problem's set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<ConstraintSet>,
    /// Overrides the problem's start point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vector>,
    #[serde(default)]
    pub claims: Vec<Claim>,
}

/// A per-iteration metric collected across runs into one wide table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub metric: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub problem: ProblemSpec,
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
    /// Also write `bounds.csv` with the theoretical curves.
    #[serde(default)]
    pub bound_curves: bool,
}

const METRICS: [&str; 6] = [
    "dist_sq",
    "dist",
    "f_gap",
    "grad_diff_sq",
    "grad_map_norm",
    "fw_gap",
];

fn metric_value(traj: &Trajectory, k: usize, metric: &str) -> Option<f64> {
    let m = traj.metrics.get(k)?;
    match metric {
        "dist_sq" => m.dist_sq,
        "dist" => m.dist_sq.map(f64::sqrt),
        "f_gap" => m.f_gap,
        "grad_diff_sq" => m.grad_diff_sq,
        "grad_map_norm" => m.grad_map_norm,
        "fw_gap" => m.fw_gap,
        _ => None,
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        let problems = spec.validate();
        if problems.is_empty() {
            Ok(spec)
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.runs.is_empty() {
            out.push("no runs configured".into());
        }
        let mut labels = std::collections::HashSet::new();
        for r in &self.runs {
            if !labels.insert(r.label.as_str()) {
                out.push(format!("duplicate run label {:?}", r.label));
            }
            if r.label.is_empty() || r.label.contains(['/', '\\']) {
                out.push(format!("run label {:?} is not a plain file name", r.label));
            }
            out.extend(
                r.config
                    .validate()
                    .into_iter()
                    .map(|m| format!("{}: {m}", r.label)),
            );
            let set = r.set.as_ref().unwrap_or(&self.problem.set);
            out.extend(
                set.validate()
                    .into_iter()
                    .map(|m| format!("{}: {m}", r.label)),
            );
            let x0 = r.x0.as_ref().unwrap_or(&self.problem.x0);
            match set.contains(x0, MEMBERSHIP_TOL) {
                Ok(true) => {}
                Ok(false) => out.push(format!("{}: x0 is not feasible", r.label)),
                Err(e) => out.push(format!("{}: {e}", r.label)),
            }
            for c in &r.claims {
                if !c.applies_to(r.config.method) {
                    out.push(format!(
                        "{}: claim {c} does not apply to {}",
                        r.label, r.config.method
                    ));
                }
            }
        }
        if self.problem.solve_optimum_iters.is_none() {
            out.extend(self.problem.objective.validate());
        }
        for o in &self.outputs {
            if !METRICS.contains(&o.metric.as_str()) {
                out.push(format!("unknown output metric {:?}", o.metric));
            }
        }
        out
    }

    /// Applies CLI overrides to every run.
    pub fn override_runs(&mut self, seed: Option<u64>, iters: Option<usize>) {
        for r in &mut self.runs {
            if let Some(s) = seed {
                r.config.seed = s;
            }
            if let Some(k) = iters {
                r.config.max_iters = k;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub label: String,
    pub method: Method,
    pub status: Option<solvers::Status>,
    pub iterations: usize,
    pub final_dist_sq: Option<f64>,
    pub final_f_gap: Option<f64>,
    pub trajectory_file: Option<PathBuf>,
    pub checks: Option<CheckReport>,
    pub error: Option<String>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl RunOutcome {
    pub fn final_dist(&self) -> Option<f64> {
        self.final_dist_sq.map(f64::sqrt)
    }

    pub fn checks_pass(&self) -> bool {
        self.error.is_none() && self.checks.as_ref().is_none_or(|c| c.all_pass())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub out_dir: PathBuf,
    pub runs: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn run(&self, label: &str) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn any_error(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }

    pub fn all_checks_pass(&self) -> bool {
        self.runs.iter().all(|r| r.checks_pass())
    }
}

fn fmt17(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// Objective with optimum metadata for `set`, solving for it when asked.
fn objective_for(problem: &ProblemSpec, set: &ConstraintSet, x0: &Vector) -> Result<Objective> {
    let Some(iters) = problem.solve_optimum_iters else {
        return Ok(problem.objective.clone());
    };
    let obj = Objective {
        optimum: None,
        ..problem.objective.clone()
    };
    let cfg = SolverConfig::new(
        Method::PGD,
        Rule::Stepsize(StepsizeRule::InverseL),
        iters.max(1),
    );
    let traj = solvers::run_pgd(set, &obj, x0, &cfg)?;
    obj.with_optimum_at(traj.last().clone())
}

/// Default output directory for `name`.
pub fn default_out_dir(name: &str) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out").join(name))
}

fn execute(spec: &ExperimentSpec, run: &RunSpec) -> (Option<Objective>, Result<Trajectory>) {
    let set = run.set.as_ref().unwrap_or(&spec.problem.set);
    let x0 = run.x0.as_ref().unwrap_or(&spec.problem.x0);
    let obj = match objective_for(&spec.problem, set, x0) {
        Ok(o) => o,
        Err(e) => return (None, Err(e)),
    };
    let traj = solvers::run(set, &obj, x0, &run.config);
    (Some(obj), traj)
}

/// Runs every configured run (concurrently), writes one trajectory CSV per
/// run plus `summary.csv` and any requested metric tables into `out_dir`.
/// A failing run is recorded in the report and does not stop the others.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunReport> {
    let problems = spec.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    fs::create_dir_all(out_dir)?;
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = spec
            .runs
            .iter()
            .map(|r| s.spawn(move || execute(spec, r)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });

    let mut files = Vec::new();
    let mut runs = Vec::new();
    for (run, (obj, res)) in spec.runs.iter().zip(results) {
        let mut outcome = RunOutcome {
            label: run.label.clone(),
            method: run.config.method,
            status: None,
            iterations: 0,
            final_dist_sq: None,
            final_f_gap: None,
            trajectory_file: None,
            checks: None,
            error: None,
            trajectory: None,
        };
        match res {
            Ok(traj) => {
                let path = out_dir.join(format!("{}.csv", run.label));
                write_csv(&traj, fs::File::create(&path)?)?;
                files.push(path.clone());
                outcome.status = Some(traj.status);
                outcome.iterations = traj.len();
                outcome.final_dist_sq = traj.final_dist_sq();
                outcome.final_f_gap = traj.metrics.last().and_then(|m| m.f_gap);
                outcome.trajectory_file = Some(path);
                if !run.claims.is_empty() {
                    match check_trajectory(&traj, obj.as_ref(), &run.claims) {
                        Ok(rep) => outcome.checks = Some(rep),
                        Err(e) => outcome.error = Some(e.to_string()),
                    }
                }
                outcome.trajectory = Some(traj);
            }
            Err(e) => outcome.error = Some(e.to_string()),
        }
        runs.push(outcome);
    }

    let summary = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary)?;
    w.write_record([
        "label",
        "method",
        "status",
        "iterations",
        "final_dist_sq",
        "final_dist",
        "final_f_gap",
        "checks",
        "error",
    ])?;
    for r in &runs {
        let checks = match (&r.error, &r.checks) {
            (Some(_), _) => "error",
            (None, None) => "",
            (None, Some(c)) if c.all_pass() => "pass",
            _ => "fail",
        };
        w.write_record([
            r.label.clone(),
            r.method.to_string(),
            r.status.map(|s| format!("{s:?}")).unwrap_or_default(),
            r.iterations.to_string(),
            fmt17(r.final_dist_sq),
            fmt17(r.final_dist()),
            fmt17(r.final_f_gap),
            checks.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    files.push(summary);

    for o in &spec.outputs {
        let path = out_dir.join(&o.file);
        write_metric_table(&runs, &o.metric, &path)?;
        files.push(path);
    }

    let mut report = RunReport {
        name: spec.name.clone(),
        out_dir: out_dir.to_path_buf(),
        runs,
        files,
    };
    if spec.bound_curves {
        let path = emit_bound_curves(spec, &report, out_dir)?;
        report.files.push(path);
    }
    Ok(report)
}

fn write_metric_table(runs: &[RunOutcome], metric: &str, path: &Path) -> Result<()> {
    let trajs: Vec<(&str, &Trajectory)> = runs
        .iter()
        .filter_map(|r| r.trajectory.as_ref().map(|t| (r.label.as_str(), t)))
        .collect();
    let rows = trajs
        .iter()
        .map(|(_, t)| t.iterates.len())
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["k".to_string()];
    header.extend(trajs.iter().map(|(l, _)| l.to_string()));
    w.write_record(&header)?;
    for k in 0..rows {
        let mut row = vec![k.to_string()];
        row.extend(trajs.iter().map(|(_, t)| fmt17(metric_value(t, k, metric))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `((L − μ)/(L + μ))^{2k} d0`.
pub fn contraction_bound(l: f64, mu: f64, d0: f64, k: usize) -> f64 {
    ((l - mu) / (l + mu)).powi(2 * k as i32) * d0
}

/// `L² d0 / (k + 1)`.
pub fn smooth_bound(l: f64, d0: f64, k: usize) -> f64 {
    l * l * d0 / (k as f64 + 1.0)
}

/// Writes `bounds.csv`: the theoretical curves next to each run's observed
/// `dist_sq` and `grad_diff_sq`.
pub fn emit_bound_curves(
    spec: &ExperimentSpec,
    report: &RunReport,
    out_dir: &Path,
) -> Result<PathBuf> {
    let obj = &spec.problem.objective;
    let l = obj.lipschitz()?;
    let mu = obj.constants.mu;
    let x_star = &obj.optimum()?.x_star;
    let d0 = spec.problem.x0.dist_sq(x_star);
    let trajs: Vec<(&str, &Trajectory)> = report
        .runs
        .iter()
        .filter_map(|r| r.trajectory.as_ref().map(|t| (r.label.as_str(), t)))
        .collect();
    let rows = trajs
        .iter()
        .map(|(_, t)| t.iterates.len())
        .max()
        .unwrap_or(1);
    let path = out_dir.join("bounds.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["k".to_string(), "smooth_bound".to_string()];
    if mu.is_some() {
        header.push("contraction_bound".into());
    }
    for (label, _) in &trajs {
        header.push(format!("{label}_dist_sq"));
        header.push(format!("{label}_grad_diff_sq"));
    }
    w.write_record(&header)?;
    for k in 0..rows {
        let mut row = vec![k.to_string(), fmt17(Some(smooth_bound(l, d0, k)))];
        if let Some(mu) = mu {
            row.push(fmt17(Some(contraction_bound(l, mu, d0, k))));
        }
        for (_, t) in &trajs {
            row.push(fmt17(metric_value(t, k, "dist_sq")));
            row.push(fmt17(metric_value(t, k, "grad_diff_sq")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

fn reference_box() -> ConstraintSet {
    ConstraintSet::Box {
        lo: Vector::from([2.0, 2.0]),
        hi: Vector::from([4.0, 4.0]),
    }
}

fn run_spec(label: &str, method: Method, rule: Rule, iters: usize, claims: &[Claim]) -> RunSpec {
    RunSpec {
        label: label.into(),
        config: SolverConfig::new(method, rule, iters),
        set: None,
        x0: None,
        claims: claims.to_vec(),
    }
}

const LMO_CLAIMS: [Claim; 4] = [
    Claim::Fejer,
    Claim::BoundaryStep,
    Claim::RadiusBound,
    Claim::Contraction,
];

/// Local LMO, PGD and Frank–Wolfe on the rotated quadratic over `[2,4]²`.
pub fn paper_k_comparison() -> ExperimentSpec {
    ExperimentSpec {
        name: "paperK-comparison".into(),
        description:
            "Local LMO vs PGD vs Frank-Wolfe on the rotated quadratic over [2,4]^2, 100 iterations"
                .into(),
        problem: ProblemSpec {
            set: reference_box(),
            objective: make_paper_quadratic(),
            x0: Vector::from([4.0, 4.0]),
            solve_optimum_iters: None,
        },
        runs: vec![
            run_spec(
                "local_lmo",
                Method::LocalLMO,
                Rule::Radius(RadiusRule::StronglyConvexTheta),
                100,
                &[LMO_CLAIMS.as_slice(), &[Claim::SmoothRate]].concat(),
            ),
            run_spec(
                "pgd",
                Method::PGD,
                Rule::Stepsize(StepsizeRule::InverseL),
                100,
                &[
                    Claim::PgdDescent,
                    Claim::PgdFejer,
                    Claim::PgdValueRate,
                    Claim::PgdGradDiff,
                ],
            ),
            run_spec(
                "frank_wolfe",
                Method::FrankWolfe,
                Rule::Stepsize(StepsizeRule::FWClassic),
                100,
                &[Claim::FwGapNonneg],
            ),
        ],
        outputs: vec![
            OutputSpec {
                metric: "dist_sq".into(),
                file: "dist_sq.csv".into(),
            },
            OutputSpec {
                metric: "grad_diff_sq".into(),
                file: "grad_diff_sq.csv".into(),
            },
        ],
        bound_curves: true,
    }
}

/// The grid of `q` values of the geometric-schedule sweep.
pub fn q_grid() -> Vec<f64> {
    (0..10).map(|i| 0.8 + 0.15 * i as f64 / 9.0).collect()
}

/// Geometric radius schedules `θ‖x_0 − x⋆‖ q^k` against the adaptive rule.
pub fn paper_l_qsweep() -> ExperimentSpec {
    let mut runs = vec![run_spec(
        "adaptive",
        Method::LocalLMO,
        Rule::Radius(RadiusRule::StronglyConvexTheta),
        100,
        &LMO_CLAIMS,
    )];
    for q in q_grid() {
        runs.push(run_spec(
            &format!("q{q:.3}"),
            Method::LocalLMO,
            Rule::Radius(RadiusRule::GeometricSchedule { c: None, q }),
            100,
            &[Claim::BoundaryStep],
        ));
    }
    ExperimentSpec {
        name: "paperL-qsweep".into(),
        description:
            "Geometric radius schedules for q in [0.8, 0.95] vs the adaptive radius, 100 iterations"
                .into(),
        problem: ProblemSpec {
            set: reference_box(),
            objective: make_paper_quadratic(),
            x0: Vector::from([4.0, 4.0]),
            solve_optimum_iters: None,
        },
        runs,
        outputs: vec![OutputSpec {
            metric: "dist".into(),
            file: "dist.csv".into(),
        }],
        bound_curves: false,
    }
}

/// Local LMO over unit ℓ1, ℓ2 and ℓ∞ balls. The centers are chosen so that
/// the unconstrained minimizer (the origin) lies outside each set.
pub fn paper_m_geometries() -> ExperimentSpec {
    let mut obj = make_paper_quadratic();
    obj.optimum = None;
    let shapes = [
        (
            "l1",
            ConstraintSet::L1Ball {
                c: Vector::from([1.5, 1.5]),
                r: 1.0,
            },
            Vector::from([2.0, 2.0]),
        ),
        (
            "l2",
            ConstraintSet::EuclideanBall {
                c: Vector::from([2.0, 1.0]),
                r: 1.0,
            },
            Vector::from([2.6, 1.8]),
        ),
        (
            "linf",
            ConstraintSet::Box {
                lo: Vector::from([1.0, -2.0]),
                hi: Vector::from([3.0, 0.0]),
            },
            Vector::from([3.0, 0.0]),
        ),
    ];
    let runs = shapes
        .into_iter()
        .map(|(label, set, x0)| RunSpec {
            set: Some(set),
            x0: Some(x0),
            ..run_spec(
                label,
                Method::LocalLMO,
                Rule::Radius(RadiusRule::StronglyConvexTheta),
                100,
                &LMO_CLAIMS,
            )
        })
        .collect();
    ExperimentSpec {
        name: "paperM-geometries".into(),
        description: "Local LMO over unit l1, l2 and l-infinity balls, 100 iterations".into(),
        problem: ProblemSpec {
            set: reference_box(),
            objective: obj,
            x0: Vector::from([4.0, 4.0]),
            solve_optimum_iters: Some(20_000),
        },
        runs,
        outputs: vec![OutputSpec {
            metric: "dist_sq".into(),
            file: "dist_sq.csv".into(),
        }],
        bound_curves: false,
    }
}

/// Names of the built-in experiments.
pub fn builtin_names() -> [&'static str; 3] {
    ["paperK-comparison", "paperL-qsweep", "paperM-geometries"]
}

pub fn builtin(name: &str) -> Option<ExperimentSpec> {
    match name {
        "paperK-comparison" => Some(paper_k_comparison()),
        "paperL-qsweep" => Some(paper_l_qsweep()),
        "paperM-geometries" => Some(paper_m_geometries()),
        _ => None,
    }
}
