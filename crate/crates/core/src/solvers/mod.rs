//! Iteration drivers: Local LMO (deterministic, stochastic, nonsmooth), PGD
//! and Frank–Wolfe.

mod export;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{local_lmo, ConstraintSet, LocalBall, MEMBERSHIP_TOL};
use crate::objectives::{Constants, Objective, ObjectiveKind};
use crate::rules::{gradient_mapping_with, RadiusRule, StepsizeRule};
use crate::vector::Vector;

pub use export::{read_csv, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    LocalLMO,
    StochasticLocalLMO,
    NonsmoothLocalLMO,
    PGD,
    FrankWolfe,
}

impl Method {
    pub fn uses_radius(self) -> bool {
        matches!(
            self,
            Method::LocalLMO | Method::StochasticLocalLMO | Method::NonsmoothLocalLMO
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "LocalLMO" => Method::LocalLMO,
            "StochasticLocalLMO" => Method::StochasticLocalLMO,
            "NonsmoothLocalLMO" => Method::NonsmoothLocalLMO,
            "PGD" => Method::PGD,
            "FrankWolfe" => Method::FrankWolfe,
            other => return Err(Error::Parse(format!("unknown method {other:?}"))),
        })
    }
}

/// A radius rule (LMO methods) or a stepsize rule (PGD, FW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rule {
    Radius(RadiusRule),
    Stepsize(StepsizeRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub rule: Rule,
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stop_tol: f64,
}

impl SolverConfig {
    pub fn new(method: Method, rule: Rule, max_iters: usize) -> Self {
        SolverConfig {
            method,
            rule,
            max_iters,
            seed: 0,
            stop_tol: 0.0,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_iters == 0 {
            out.push("max_iters must be at least 1".into());
        }
        if !(self.stop_tol >= 0.0 && self.stop_tol.is_finite()) {
            out.push("stop_tol must be a finite non-negative number".into());
        }
        match (&self.rule, self.method.uses_radius()) {
            (Rule::Radius(r), true) => out.extend(r.validate()),
            (Rule::Stepsize(s), false) => out.extend(s.validate()),
            _ => out.push(format!("rule does not fit method {}", self.method)),
        }
        out
    }

    fn radius_rule(&self) -> Result<&RadiusRule> {
        match &self.rule {
            Rule::Radius(r) => Ok(r),
            Rule::Stepsize(_) => Err(Error::Config(format!(
                "{} needs a radius rule",
                self.method
            ))),
        }
    }

    fn stepsize_rule(&self) -> Result<&StepsizeRule> {
        match &self.rule {
            Rule::Stepsize(s) => Ok(s),
            Rule::Radius(_) => Err(Error::Config(format!(
                "{} needs a stepsize rule",
                self.method
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    MaxIters,
    Stationary,
    Converged,
}

/// Per-iterate diagnostics; absent entries were not computable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub dist_sq: Option<f64>,
    pub f_gap: Option<f64>,
    pub grad_diff_sq: Option<f64>,
    pub grad_map_norm: Option<f64>,
    pub fw_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    /// Stepsize used for `grad_map_norm`.
    pub gamma: f64,
    /// Constants of the objective the run was made on.
    pub constants: Constants,
    pub iterates: Vec<Vector>,
    /// `t_k` or `γ_k` used to go from iterate `k` to `k + 1`.
    pub steps: Vec<f64>,
    pub metrics: Vec<Metrics>,
    /// Sampled component indices (stochastic runs only).
    pub sampled: Vec<usize>,
    pub status: Status,
}

impl Trajectory {
    pub fn last(&self) -> &Vector {
        self.iterates.last().expect("trajectory is never empty")
    }

    pub fn final_dist_sq(&self) -> Option<f64> {
        self.metrics.last().and_then(|m| m.dist_sq)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn state_json(x: &Vector, extra: &[(&str, f64)]) -> String {
    let mut m = serde_json::Map::new();
    m.insert("x".into(), serde_json::to_value(x).unwrap_or_default());
    for (k, v) in extra {
        m.insert((*k).into(), serde_json::json!(v));
    }
    serde_json::Value::Object(m).to_string()
}

fn at(k: usize, x: &Vector, extra: &[(&str, f64)]) -> impl FnOnce(Error) -> Error {
    let state = state_json(x, extra);
    move |e| Error::AtIteration {
        k,
        state,
        source: Box::new(e),
    }
}

/// Default γ for the gradient-mapping diagnostic.
fn metric_gamma(cfg: &SolverConfig, obj: &Objective) -> f64 {
    match &cfg.rule {
        Rule::Radius(RadiusRule::GradientMapping { gamma })
        | Rule::Stepsize(StepsizeRule::ConstantGamma { gamma }) => *gamma,
        _ => obj.constants.l.map_or(1.0, |l| 1.0 / l),
    }
}

struct Recorder<'a> {
    set: &'a ConstraintSet,
    obj: &'a Objective,
    gamma: f64,
    subgradient: bool,
    fw: bool,
}

impl Recorder<'_> {
    fn direction(&self, x: &Vector) -> Result<Vector> {
        if self.subgradient {
            self.obj.subgradient(x)
        } else {
            self.obj.gradient(x)
        }
    }

    fn metrics(&self, x: &Vector) -> Metrics {
        let mut m = Metrics::default();
        let g = self.direction(x).ok();
        if let Some(opt) = &self.obj.optimum {
            m.dist_sq = Some(x.dist_sq(&opt.x_star));
            m.f_gap = self.obj.suboptimality(x).ok();
            m.grad_diff_sq = g.as_ref().map(|g| g.dist_sq(&opt.grad_star));
        }
        if let Some(g) = &g {
            m.grad_map_norm = gradient_mapping_with(self.set, x, g, self.gamma)
                .ok()
                .map(|v| v.norm());
            if self.fw && self.set.is_compact() {
                m.fw_gap = self.set.global_lmo(g).ok().map(|s| g.dot(&(x - &s)));
            }
        }
        let keep = |v: Option<f64>| v.filter(|v| v.is_finite());
        Metrics {
            dist_sq: keep(m.dist_sq),
            f_gap: keep(m.f_gap),
            grad_diff_sq: keep(m.grad_diff_sq),
            grad_map_norm: keep(m.grad_map_norm),
            fw_gap: keep(m.fw_gap),
        }
    }
}

fn start(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
    expect: &[Method],
) -> Result<()> {
    if !expect.contains(&cfg.method) {
        return Err(Error::Config(format!(
            "config method {} does not match the driver",
            cfg.method
        )));
    }
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    if let Some(d) = obj.dim() {
        x0.check_dim(d)?;
    }
    x0.check_dim(set.dim())?;
    if !set.contains(x0, MEMBERSHIP_TOL)? {
        return Err(Error::InfeasibleCenter {
            distance: set.distance(x0)?,
        });
    }
    Ok(())
}

fn trajectory(method: Method, gamma: f64, obj: &Objective, x0: &Vector, m0: Metrics) -> Trajectory {
    Trajectory {
        method,
        gamma,
        constants: obj.constants.clone(),
        iterates: vec![x0.clone()],
        steps: Vec::new(),
        metrics: vec![m0],
        sampled: Vec::new(),
        status: Status::MaxIters,
    }
}

fn push(traj: &mut Trajectory, rec: &Recorder, x: Vector, step: f64) {
    traj.metrics.push(rec.metrics(&x));
    traj.iterates.push(x);
    traj.steps.push(step);
}

fn lmo_loop(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
    subgradient: bool,
) -> Result<Trajectory> {
    let rule = cfg.radius_rule()?;
    rule.check_requirements(obj)?;
    let rule = rule.resolve(obj, x0)?;
    let rec = Recorder {
        set,
        obj,
        gamma: metric_gamma(cfg, obj),
        subgradient,
        fw: false,
    };
    let mut traj = trajectory(cfg.method, rec.gamma, obj, x0, rec.metrics(x0));
    let mut x = x0.clone();
    for k in 0..cfg.max_iters {
        let g = rec.direction(&x).map_err(at(k, &x, &[]))?;
        let t = if g.is_zero() {
            0.0
        } else {
            rule.radius_with(obj, set, &x, k, &g)
                .map_err(at(k, &x, &[]))?
        };
        if t == 0.0 {
            push(&mut traj, &rec, x.clone(), 0.0);
            traj.status = Status::Stationary;
            return Ok(traj);
        }
        let next =
            local_lmo(set, &LocalBall::new(x.clone(), t), &g).map_err(at(k, &x, &[("t", t)]))?;
        let moved = next.dist(&x);
        push(&mut traj, &rec, next.clone(), t);
        x = next;
        if cfg.stop_tol > 0.0 && moved <= cfg.stop_tol {
            traj.status = Status::Converged;
            break;
        }
    }
    Ok(traj)
}

/// Local LMO with radii from a [`RadiusRule`].
pub fn run_local_lmo(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    start(set, obj, x0, cfg, &[Method::LocalLMO])?;
    lmo_loop(set, obj, x0, cfg, false)
}

/// Local LMO driven by subgradients.
pub fn run_nonsmooth_local_lmo(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    start(set, obj, x0, cfg, &[Method::NonsmoothLocalLMO])?;
    if !obj.is_convex() {
        return Err(Error::Config(
            "the subgradient variant needs a convex objective".into(),
        ));
    }
    lmo_loop(set, obj, x0, cfg, true)
}

/// Index of the component sampled at iteration `k`; depends only on `(seed, k)`.
pub fn sample_index(seed: u64, k: usize, n: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one 16-word block per iteration
    rng.set_word_pos(16 * k as u128);
    rng.gen_range(0..n)
}

/// Stochastic Local LMO over a finite sum; the rule is applied to the sampled
/// component with that component's constants and optimum.
pub fn run_stochastic_local_lmo(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    start(set, obj, x0, cfg, &[Method::StochasticLocalLMO])?;
    if !matches!(obj.kind, ObjectiveKind::FiniteSum { .. }) {
        return Err(Error::Config(
            "stochastic runs need a FiniteSum objective".into(),
        ));
    }
    let comps = obj.components();
    let n = comps.len();
    let rule = cfg.radius_rule()?;
    let mut rules = Vec::with_capacity(n);
    for (i, c) in comps.iter().enumerate() {
        rule.check_requirements(c)
            .map_err(|e| Error::MissingConstant(format!("component {i}: {e}")))?;
        rules.push(rule.resolve(c, x0)?);
    }
    let rec = Recorder {
        set,
        obj,
        gamma: metric_gamma(cfg, obj),
        subgradient: false,
        fw: false,
    };
    let mut traj = trajectory(cfg.method, rec.gamma, obj, x0, rec.metrics(x0));
    let mut x = x0.clone();
    for k in 0..cfg.max_iters {
        let i = sample_index(cfg.seed, k, n);
        let comp = comps[i];
        let ctx = |x: &Vector, t: Option<f64>| {
            let mut extra = vec![("i", i as f64)];
            if let Some(t) = t {
                extra.push(("t", t));
            }
            at(k, x, &extra)
        };
        let g = comp.gradient(&x).map_err(ctx(&x, None))?;
        let t = if g.is_zero() {
            0.0
        } else {
            rules[i]
                .radius_with(comp, set, &x, k, &g)
                .map_err(ctx(&x, None))?
        };
        traj.sampled.push(i);
        if t == 0.0 {
            push(&mut traj, &rec, x.clone(), 0.0);
            if n == 1 {
                traj.status = Status::Stationary;
                return Ok(traj);
            }
            continue;
        }
        let next = local_lmo(set, &LocalBall::new(x.clone(), t), &g).map_err(ctx(&x, Some(t)))?;
        let moved = next.dist(&x);
        push(&mut traj, &rec, next.clone(), t);
        x = next;
        if cfg.stop_tol > 0.0 && moved <= cfg.stop_tol {
            traj.status = Status::Converged;
            break;
        }
    }
    Ok(traj)
}

/// Projected gradient descent.
pub fn run_pgd(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    start(set, obj, x0, cfg, &[Method::PGD])?;
    let rule = cfg.stepsize_rule()?;
    rule.check_requirements(obj)?;
    let rec = Recorder {
        set,
        obj,
        gamma: metric_gamma(cfg, obj),
        subgradient: false,
        fw: false,
    };
    let mut traj = trajectory(cfg.method, rec.gamma, obj, x0, rec.metrics(x0));
    let mut x = x0.clone();
    for k in 0..cfg.max_iters {
        let g = obj.gradient(&x).map_err(at(k, &x, &[]))?;
        let gamma = rule.stepsize(obj, &x, k).map_err(at(k, &x, &[]))?;
        let next = set
            .project(&x.axpy(-gamma, &g))
            .map_err(at(k, &x, &[("gamma", gamma)]))?;
        let moved = next.dist(&x);
        push(&mut traj, &rec, next.clone(), gamma);
        x = next;
        if cfg.stop_tol > 0.0 && moved <= cfg.stop_tol {
            traj.status = Status::Converged;
            break;
        }
    }
    Ok(traj)
}

/// Classical Frank–Wolfe; requires a compact set.
pub fn run_frank_wolfe(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    start(set, obj, x0, cfg, &[Method::FrankWolfe])?;
    let rule = cfg.stepsize_rule()?;
    rule.check_requirements(obj)?;
    let rec = Recorder {
        set,
        obj,
        gamma: metric_gamma(cfg, obj),
        subgradient: false,
        fw: true,
    };
    let mut traj = trajectory(cfg.method, rec.gamma, obj, x0, rec.metrics(x0));
    let mut x = x0.clone();
    for k in 0..cfg.max_iters {
        let g = obj.gradient(&x).map_err(at(k, &x, &[]))?;
        let s = set.global_lmo(&g).map_err(|e| Error::AtIteration {
            k,
            state: format!(
                "Frank-Wolfe requires a compact constraint set; {}",
                state_json(&x, &[])
            ),
            source: Box::new(e),
        })?;
        let gamma = rule.stepsize(obj, &x, k).map_err(at(k, &x, &[]))?;
        let next = x.axpy(gamma, &(&s - &x));
        let moved = next.dist(&x);
        push(&mut traj, &rec, next.clone(), gamma);
        x = next;
        if cfg.stop_tol > 0.0 && moved <= cfg.stop_tol {
            traj.status = Status::Converged;
            break;
        }
    }
    Ok(traj)
}

/// Dispatches on `cfg.method`.
pub fn run(
    set: &ConstraintSet,
    obj: &Objective,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    match cfg.method {
        Method::LocalLMO => run_local_lmo(set, obj, x0, cfg),
        Method::StochasticLocalLMO => run_stochastic_local_lmo(set, obj, x0, cfg),
        Method::NonsmoothLocalLMO => run_nonsmooth_local_lmo(set, obj, x0, cfg),
        Method::PGD => run_pgd(set, obj, x0, cfg),
        Method::FrankWolfe => run_frank_wolfe(set, obj, x0, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::make_paper_quadratic;

    fn k_box() -> ConstraintSet {
        ConstraintSet::Box {
            lo: Vector::from([2.0, 2.0]),
            hi: Vector::from([4.0, 4.0]),
        }
    }

    fn radius(r: RadiusRule, iters: usize) -> SolverConfig {
        SolverConfig::new(Method::LocalLMO, Rule::Radius(r), iters)
    }

    #[test]
    fn comparison_runs_reach_pinned_accuracy() {
        let q = make_paper_quadratic();
        let x0 = Vector::from([4.0, 4.0]);
        let lmo = run_local_lmo(
            &k_box(),
            &q,
            &x0,
            &radius(RadiusRule::StronglyConvexTheta, 100),
        )
        .unwrap();
        assert_eq!(lmo.iterates.len(), 101);
        assert!(lmo.final_dist_sq().unwrap() <= 1e-15);
        let pgd = run_pgd(
            &k_box(),
            &q,
            &x0,
            &SolverConfig::new(Method::PGD, Rule::Stepsize(StepsizeRule::InverseL), 100),
        )
        .unwrap();
        assert!(pgd.final_dist_sq().unwrap() <= 1e-19);
        let fw = run_frank_wolfe(
            &k_box(),
            &q,
            &x0,
            &SolverConfig::new(
                Method::FrankWolfe,
                Rule::Stepsize(StepsizeRule::FWClassic),
                100,
            ),
        )
        .unwrap();
        let d = fw.final_dist_sq().unwrap();
        assert!(d > 1.58e-5 / 2.0 && d < 1.58e-5 * 2.0, "{d}");
        assert!(fw.metrics.iter().all(|m| m.fw_gap.unwrap() >= -1e-12));
        assert!(lmo.metrics.iter().all(|m| m.fw_gap.is_none()));
    }

    #[test]
    fn whole_space_gradient_mapping_is_normalized_gd() {
        let q = make_paper_quadratic();
        let set = ConstraintSet::WholeSpace { dim: 2 };
        let x0 = Vector::from([1.0, -0.5]);
        let traj = run_local_lmo(
            &set,
            &q,
            &x0,
            &radius(RadiusRule::GradientMapping { gamma: 0.01 }, 20),
        )
        .unwrap();
        let mut x = x0;
        for k in 0..20 {
            let g = q.gradient(&x).unwrap();
            let t = 0.01 * g.norm();
            x = x.axpy(-t / g.norm(), &g);
            assert!(traj.iterates[k + 1].dist(&x) < 1e-12);
        }
    }

    #[test]
    fn counterexample_first_pgd_step() {
        let alpha = 3.0;
        let f = Objective::new(ObjectiveKind::CounterexampleAlpha { alpha });
        let set = ConstraintSet::Box {
            lo: Vector::from([-1e18, 0.0]),
            hi: Vector::from([1e18, 1e18]),
        };
        let cfg = SolverConfig::new(
            Method::PGD,
            Rule::Stepsize(StepsizeRule::ConstantGamma {
                gamma: 2.0 / (5.0 * alpha),
            }),
            1,
        );
        let traj = run_pgd(&set, &f, &Vector::from([1.0, 0.0]), &cfg).unwrap();
        assert!(traj.iterates[1].dist(&Vector::from([0.8, 0.0])) < 1e-15);
    }

    #[test]
    fn fixed_points() {
        let q = make_paper_quadratic();
        let xs = q.optimum().unwrap().x_star.clone();
        let pgd = run_pgd(
            &k_box(),
            &q,
            &xs,
            &SolverConfig::new(Method::PGD, Rule::Stepsize(StepsizeRule::InverseL), 1),
        )
        .unwrap();
        assert!(pgd.iterates[1].dist(&xs) < 1e-14);
        let lmo = run_local_lmo(
            &k_box(),
            &q,
            &xs,
            &radius(RadiusRule::StronglyConvexTheta, 5),
        )
        .unwrap();
        assert_eq!(lmo.status, Status::Stationary);
        assert_eq!(lmo.iterates.len(), 2);
        assert_eq!(lmo.steps, vec![0.0]);
    }

    #[test]
    fn frank_wolfe_full_first_step() {
        let q = make_paper_quadratic();
        let x0 = Vector::from([4.0, 4.0]);
        let s0 = k_box().global_lmo(&q.gradient(&x0).unwrap()).unwrap();
        let fw = run_frank_wolfe(
            &k_box(),
            &q,
            &x0,
            &SolverConfig::new(
                Method::FrankWolfe,
                Rule::Stepsize(StepsizeRule::FWClassic),
                1,
            ),
        )
        .unwrap();
        assert_eq!(fw.iterates[1], s0);
    }

    #[test]
    fn frank_wolfe_rejects_unbounded_sets() {
        let q = make_paper_quadratic();
        let err = run_frank_wolfe(
            &ConstraintSet::WholeSpace { dim: 2 },
            &q,
            &Vector::from([1.0, 1.0]),
            &SolverConfig::new(
                Method::FrankWolfe,
                Rule::Stepsize(StepsizeRule::FWClassic),
                3,
            ),
        )
        .unwrap_err();
        assert_eq!(err.root(), &Error::Unbounded);
        assert!(err.to_string().contains("compact"));
    }

    #[test]
    fn nonsmooth_examples() {
        let abs =
            Objective::new(ObjectiveKind::AbsoluteValue { dim: 1 }).with_constants(Constants {
                g: Some(1.0),
                ..Default::default()
            });
        let abs = Objective {
            optimum: Some(crate::objectives::Optimum {
                x_star: Vector::from([0.0]),
                f_star: 0.0,
                grad_star: Vector::from([0.0]),
            }),
            ..abs
        };
        let seg = ConstraintSet::Segment {
            a: Vector::from([-1.0]),
            b: Vector::from([1.0]),
        };
        let cfg = SolverConfig::new(
            Method::NonsmoothLocalLMO,
            Rule::Radius(RadiusRule::Polyak),
            10,
        );
        let traj = run_nonsmooth_local_lmo(&seg, &abs, &Vector::from([1.0]), &cfg).unwrap();
        assert_eq!(traj.iterates[1], Vector::from([0.0]));
        assert_eq!(traj.status, Status::Stationary);
        let at_opt = run_nonsmooth_local_lmo(&seg, &abs, &Vector::from([0.0]), &cfg).unwrap();
        assert_eq!(at_opt.status, Status::Stationary);
        assert_eq!(at_opt.steps, vec![0.0]);
    }

    #[test]
    fn mismatched_rule_is_a_config_error() {
        let q = make_paper_quadratic();
        let cfg = SolverConfig::new(Method::LocalLMO, Rule::Stepsize(StepsizeRule::InverseL), 3);
        assert!(matches!(
            run_local_lmo(&k_box(), &q, &Vector::from([4.0, 4.0]), &cfg),
            Err(Error::Config(_))
        ));
        let bad_x0 = run_local_lmo(
            &k_box(),
            &q,
            &Vector::from([5.0, 4.0]),
            &radius(RadiusRule::StronglyConvexTheta, 3),
        );
        assert!(matches!(bad_x0, Err(Error::InfeasibleCenter { .. })));
    }

    #[test]
    fn errors_carry_the_iteration() {
        let p = Objective::new(ObjectiveKind::PowerThreeHalves);
        // the unit ball around 0.5 leaves the domain of x^(3/2) in one step
        let set = ConstraintSet::WholeSpace { dim: 1 };
        let cfg = radius(RadiusRule::Constant { t: 1.0 }, 5);
        let err = run_local_lmo(&set, &p, &Vector::from([0.5]), &cfg).unwrap_err();
        match err {
            Error::AtIteration { k, ref source, .. } => {
                assert_eq!(k, 1);
                assert!(matches!(**source, Error::Domain(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampling_is_counter_based() {
        let a: Vec<_> = (0..50).map(|k| sample_index(7, k, 3)).collect();
        let b: Vec<_> = (0..50).map(|k| sample_index(7, k, 3)).collect();
        assert_eq!(a, b);
        assert_eq!(sample_index(7, 31, 3), a[31]);
        assert!(a.iter().any(|&i| i == 0) && a.iter().any(|&i| i == 2));
        assert_ne!(
            a,
            (0..50).map(|k| sample_index(8, k, 3)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn single_component_matches_deterministic() {
        let q = make_paper_quadratic();
        let sum = Objective {
            kind: ObjectiveKind::FiniteSum {
                components: vec![q.clone()],
            },
            constants: q.constants.clone(),
            optimum: q.optimum.clone(),
        };
        let x0 = Vector::from([4.0, 4.0]);
        let det = run_local_lmo(
            &k_box(),
            &q,
            &x0,
            &radius(RadiusRule::StronglyConvexTheta, 60),
        )
        .unwrap();
        for seed in [0, 1, 99] {
            let mut cfg = radius(RadiusRule::StronglyConvexTheta, 60);
            cfg.method = Method::StochasticLocalLMO;
            cfg.seed = seed;
            let st = run_stochastic_local_lmo(&k_box(), &sum, &x0, &cfg).unwrap();
            assert_eq!(st.iterates, det.iterates);
            assert_eq!(st.steps, det.steps);
        }
    }

    #[test]
    fn stop_tol_converges_early() {
        let q = make_paper_quadratic();
        let mut cfg = radius(RadiusRule::StronglyConvexTheta, 1000);
        cfg.stop_tol = 1e-6;
        let traj = run_local_lmo(&k_box(), &q, &Vector::from([4.0, 4.0]), &cfg).unwrap();
        assert_eq!(traj.status, Status::Converged);
        assert!(traj.len() < 1000);
    }
}
