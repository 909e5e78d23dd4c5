//! Brute-force reference solver for the local LMO subproblem, trajectory
//! invariant checks, and the PGD counterexample.
//!
//! Nothing here reuses the case analysis in `geometry::local`: planar
//! polygons are handled through their half-plane description, intervals by
//! bisection on membership, and everything else by Dykstra's alternating
//! projections onto the set and the ball.

mod claims;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, LocalBall, MEMBERSHIP_TOL};
use crate::objectives::{Objective, ObjectiveKind};
use crate::rules::StepsizeRule;
use crate::solvers::{run_pgd, Method, Rule, SolverConfig};
use crate::vector::Vector;

pub use claims::{check_trajectory, CheckReport, Claim, ClaimReport};

const DYKSTRA_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    CandidateEnum2D,
    PenalizedProjection,
    GridRefine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub point: Vector,
    pub objective: f64,
    pub method_tag: OracleMethod,
}

/// Reference minimizer of `<g, z>` over `set ∩ ball`, using the method the
/// instance calls for.
pub fn oracle_local_lmo(set: &ConstraintSet, ball: &LocalBall, g: &Vector) -> Result<OracleResult> {
    let method = match (set, set.dim()) {
        (_, 1) => OracleMethod::GridRefine,
        (ConstraintSet::Box { .. } | ConstraintSet::L1Ball { .. }, 2) => {
            OracleMethod::CandidateEnum2D
        }
        _ => OracleMethod::PenalizedProjection,
    };
    oracle_local_lmo_with(set, ball, g, method)
}

/// Same as [`oracle_local_lmo`] with an explicit method.
pub fn oracle_local_lmo_with(
    set: &ConstraintSet,
    ball: &LocalBall,
    g: &Vector,
    method: OracleMethod,
) -> Result<OracleResult> {
    let x = &ball.center;
    let t = ball.radius;
    x.check_dim(set.dim())?;
    g.check_dim(set.dim())?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::BadRadius(t));
    }
    let dist = set.distance(x)?;
    if dist > MEMBERSHIP_TOL {
        return Err(Error::InfeasibleCenter { distance: dist });
    }
    let point = if g.is_zero() {
        x.clone()
    } else {
        match method {
            OracleMethod::GridRefine => grid_refine(set, x, t, g)?,
            OracleMethod::CandidateEnum2D => {
                let planes = half_planes(set).ok_or_else(|| {
                    Error::Config("candidate enumeration needs a planar polygon".into())
                })?;
                candidate_enum(&planes, x, t, g)
            }
            OracleMethod::PenalizedProjection => penalized_projection(set, x, t, g)?,
        }
    };
    Ok(OracleResult {
        objective: g.dot(&point),
        point,
        method_tag: method,
    })
}

/// Largest `s ∈ [0, t]` with `x + s·dir` feasible, by bisection on membership.
fn farthest_along(set: &ConstraintSet, x: &Vector, dir: &Vector, t: f64) -> Result<f64> {
    let tol = 1e-13 * (1.0 + x.max_abs());
    if set.contains(&x.axpy(t, dir), tol)? {
        return Ok(t);
    }
    let (mut lo, mut hi) = (0.0, t);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if set.contains(&x.axpy(mid, dir), tol)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn grid_refine(set: &ConstraintSet, x: &Vector, t: f64, g: &Vector) -> Result<Vector> {
    if x.dim() != 1 {
        return Err(Error::Config(
            "bisection refinement works on intervals only".into(),
        ));
    }
    let dir = Vector::from([-g[0].signum()]);
    let s = farthest_along(set, x, &dir, t)?;
    Ok(x.axpy(s, &dir))
}

/// `(n, b)` pairs describing `{z : <n, z> <= b}`.
fn half_planes(set: &ConstraintSet) -> Option<Vec<([f64; 2], f64)>> {
    match set {
        ConstraintSet::Box { lo, hi } if lo.dim() == 2 => Some(vec![
            ([-1.0, 0.0], -lo[0]),
            ([1.0, 0.0], hi[0]),
            ([0.0, -1.0], -lo[1]),
            ([0.0, 1.0], hi[1]),
        ]),
        ConstraintSet::L1Ball { c, r } if c.dim() == 2 => Some(
            [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
                .into_iter()
                .map(|n: [f64; 2]| (n, r + n[0] * c[0] + n[1] * c[1]))
                .collect(),
        ),
        _ => None,
    }
}

fn candidate_enum(planes: &[([f64; 2], f64)], x: &Vector, t: f64, g: &Vector) -> Vector {
    // work in displacements u = z - x
    let shifted: Vec<([f64; 2], f64)> = planes
        .iter()
        .map(|(n, b)| (*n, b - n[0] * x[0] - n[1] * x[1]))
        .collect();
    let scale = t.max(1e-300);
    let feasible = |u: [f64; 2]| {
        u[0] * u[0] + u[1] * u[1] <= t * t * (1.0 + 1e-12)
            && shifted
                .iter()
                .all(|(n, b)| n[0] * u[0] + n[1] * u[1] <= b + 1e-12 * scale)
    };
    let gn = g.norm();
    let mut cands: Vec<[f64; 2]> = vec![[0.0, 0.0], [-t * g[0] / gn, -t * g[1] / gn]];
    for (i, (n1, b1)) in shifted.iter().enumerate() {
        // line ∩ circle
        let nn = n1[0] * n1[0] + n1[1] * n1[1];
        let foot = [n1[0] * b1 / nn, n1[1] * b1 / nn];
        let rem = t * t - (foot[0] * foot[0] + foot[1] * foot[1]);
        if rem >= 0.0 {
            let w = (rem / nn).sqrt();
            let tang = [-n1[1], n1[0]];
            for s in [-w, w] {
                cands.push([foot[0] + s * tang[0], foot[1] + s * tang[1]]);
            }
        }
        // line ∩ line
        for (n2, b2) in &shifted[i + 1..] {
            let det = n1[0] * n2[1] - n1[1] * n2[0];
            if det.abs() < 1e-300 {
                continue;
            }
            cands.push([
                (b1 * n2[1] - b2 * n1[1]) / det,
                (n1[0] * b2 - n2[0] * b1) / det,
            ]);
        }
    }
    // an angular sweep as a safety net
    for k in 0..64 {
        let a = std::f64::consts::TAU * k as f64 / 64.0;
        for frac in [0.25, 0.5, 1.0] {
            cands.push([frac * t * a.cos(), frac * t * a.sin()]);
        }
    }
    let mut best = [0.0, 0.0];
    let mut best_val = 0.0;
    for u in cands {
        if !feasible(u) {
            continue;
        }
        let val = g[0] * u[0] + g[1] * u[1];
        if val < best_val {
            best_val = val;
            best = u;
        }
    }
    Vector::from([x[0] + best[0], x[1] + best[1]])
}

/// Dykstra's projection of `y` (a displacement from `x`) onto
/// `(set - x) ∩ B(0, t)`. Returns the last iterate and whether the
/// iteration settled.
fn dykstra(set: &ConstraintSet, x: &Vector, t: f64, y: &Vector) -> Result<(Vector, bool)> {
    let d = y.dim();
    let mut z = y.clone();
    let mut p = Vector::zeros(d);
    let mut q = Vector::zeros(d);
    let ball = |v: &Vector| {
        let n = v.norm();
        if n <= t {
            v.clone()
        } else {
            v.scale(t / n)
        }
    };
    let mut change = f64::INFINITY;
    let mut scale = t;
    for _ in 0..DYKSTRA_MAX_ITERS {
        let a = &set.project(&(x + &(&z + &p)))? - x;
        p = &(&z + &p) - &a;
        let b = ball(&(&a + &q));
        q = &(&a + &q) - &b;
        change = b.dist(&z).max(b.dist(&a));
        z = b;
        // rounding floor of the sums above
        scale = t + x.max_abs() + p.norm() + q.norm();
        if change <= 1e-15 * scale {
            return Ok((z, true));
        }
    }
    Ok((z, change <= 1e-9 * scale))
}

fn penalized_projection(set: &ConstraintSet, x: &Vector, t: f64, g: &Vector) -> Result<Vector> {
    let gn = g.norm();
    let mut best: Option<(f64, Vector)> = None;
    let mut prev: Option<f64> = None;
    let mut settled = false;
    for j in 0..=8 {
        let lam = 10f64.powi(j) * t / (gn + f64::EPSILON);
        let (u, ok) = dykstra(set, x, t, &g.scale(-lam))?;
        settled |= ok;
        // projecting back onto the set cannot leave the ball since x is feasible
        let z = set.project(&(x + &u))?;
        let val = g.dot(&(&z - x));
        if best.as_ref().map_or(true, |(b, _)| val < *b) {
            best = Some((val, z));
        }
        if let Some(pv) = prev {
            if (val - pv).abs() <= 1e-12 * gn * t {
                break;
            }
        }
        prev = Some(val);
    }
    if !settled {
        return Err(Error::NonConvergence {
            iterations: DYKSTRA_MAX_ITERS,
        });
    }
    Ok(best.expect("the sweep runs at least once").1)
}

/// Values produced by the two-step PGD construction on `f_α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub x1: Vector,
    pub grad_diff_sq: Vec<f64>,
    pub min_grad_diff_sq: f64,
    pub hypothetical_bound: f64,
    pub violated: bool,
}

/// PGD on `f_α` over `R × R₊` from `(1, 0)` with `γ = 2/(5α)`, compared
/// against the hypothetical bound `C L ‖x_0 − x⋆‖² / 2` with `L = 5α/2`.
pub fn counterexample_e2(alpha: f64, c: f64) -> Result<CounterexampleReport> {
    if !(alpha > 0.0 && c > 0.0) {
        return Err(Error::Config("α and C must be positive".into()));
    }
    let l = 2.5 * alpha;
    let obj = Objective::new(ObjectiveKind::CounterexampleAlpha { alpha })
        .with_optimum_at(Vector::from([0.0, 0.0]))?;
    let set = ConstraintSet::Box {
        lo: Vector::from([-1e18, 0.0]),
        hi: Vector::from([1e18, 1e18]),
    };
    let x0 = Vector::from([1.0, 0.0]);
    let cfg = SolverConfig::new(
        Method::PGD,
        Rule::Stepsize(StepsizeRule::ConstantGamma {
            gamma: 2.0 / (5.0 * alpha),
        }),
        2,
    );
    let traj = run_pgd(&set, &obj, &x0, &cfg)?;
    let grad_diff_sq: Vec<f64> = traj.metrics[..2]
        .iter()
        .map(|m| m.grad_diff_sq.expect("optimum is attached"))
        .collect();
    let min_grad_diff_sq = grad_diff_sq.iter().cloned().fold(f64::INFINITY, f64::min);
    let hypothetical_bound = c * l * x0.dist_sq(&obj.optimum()?.x_star) / 2.0;
    Ok(CounterexampleReport {
        x1: traj.iterates[1].clone(),
        grad_diff_sq,
        min_grad_diff_sq,
        hypothetical_bound,
        violated: min_grad_diff_sq > hypothetical_bound * (1.0 + 16.0 * f64::EPSILON),
    })
}
