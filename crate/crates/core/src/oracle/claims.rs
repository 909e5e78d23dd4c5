//! Re-evaluation of convergence inequalities along a recorded trajectory.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rules::theta;
use crate::solvers::{Method, Metrics, Trajectory};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Fejer,
    BoundaryStep,
    RadiusBound,
    Contraction,
    SmoothRate,
    PolyakRate,
    AvgIterate,
    L0l1Rate,
    NonconvexDescent,
    NonconvexRate,
    ComponentContraction,
    PgdDescent,
    PgdFejer,
    PgdValueRate,
    PgdGradDiff,
    FwGapNonneg,
}

impl Claim {
    pub const ALL: [Claim; 16] = [
        Claim::Fejer,
        Claim::BoundaryStep,
        Claim::RadiusBound,
        Claim::Contraction,
        Claim::SmoothRate,
        Claim::PolyakRate,
        Claim::AvgIterate,
        Claim::L0l1Rate,
        Claim::NonconvexDescent,
        Claim::NonconvexRate,
        Claim::ComponentContraction,
        Claim::PgdDescent,
        Claim::PgdFejer,
        Claim::PgdValueRate,
        Claim::PgdGradDiff,
        Claim::FwGapNonneg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Claim::Fejer => "fejer",
            Claim::BoundaryStep => "boundary_step",
            Claim::RadiusBound => "radius_bound",
            Claim::Contraction => "contraction",
            Claim::SmoothRate => "smooth_rate",
            Claim::PolyakRate => "polyak_rate",
            Claim::AvgIterate => "avg_iterate",
            Claim::L0l1Rate => "l0l1_rate",
            Claim::NonconvexDescent => "nonconvex_descent",
            Claim::NonconvexRate => "nonconvex_rate",
            Claim::ComponentContraction => "component_contraction",
            Claim::PgdDescent => "pgd_descent",
            Claim::PgdFejer => "pgd_fejer",
            Claim::PgdValueRate => "pgd_value_rate",
            Claim::PgdGradDiff => "pgd_grad_diff",
            Claim::FwGapNonneg => "fw_gap_nonneg",
        }
    }

    /// Methods whose trajectories the claim speaks about.
    pub fn applies_to(self, m: Method) -> bool {
        use Claim::*;
        use Method::*;
        match self {
            Fejer | RadiusBound | PolyakRate => matches!(m, LocalLMO | NonsmoothLocalLMO),
            BoundaryStep => m.uses_radius(),
            Contraction | SmoothRate | L0l1Rate | NonconvexDescent | NonconvexRate => m == LocalLMO,
            AvgIterate => m == NonsmoothLocalLMO,
            ComponentContraction => m == StochasticLocalLMO,
            PgdDescent | PgdFejer | PgdValueRate | PgdGradDiff => m == PGD,
            FwGapNonneg => m == FrankWolfe,
        }
    }

    /// Tolerance on the worst slack.
    pub fn tolerance(self) -> f64 {
        use Claim::*;
        match self {
            Fejer | NonconvexDescent => 1e-10,
            BoundaryStep | RadiusBound | Contraction | ComponentContraction => 1e-9,
            PgdDescent | PgdFejer | PgdValueRate | PgdGradDiff => 1e-9,
            FwGapNonneg => 1e-12,
            SmoothRate | PolyakRate | AvgIterate | L0l1Rate | NonconvexRate => 1e-8,
        }
    }
}

impl FromStr for Claim {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Claim::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::UnknownClaim(s.to_string()))
    }
}

impl std::fmt::Display for Claim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: Claim,
    pub pass: bool,
    /// Largest `lhs − rhs` over the checked steps (negative means margin).
    pub worst_slack: f64,
    pub checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub claims: Vec<ClaimReport>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.claims {
            writeln!(
                f,
                "{:<22} {} worst_slack={:.3e} checked={}",
                c.claim.name(),
                if c.pass { "PASS" } else { "FAIL" },
                c.worst_slack,
                c.checked
            )?;
        }
        Ok(())
    }
}

fn column(
    traj: &Trajectory,
    name: &str,
    pick: impl Fn(&Metrics) -> Option<f64>,
) -> Result<Vec<f64>> {
    traj.metrics
        .iter()
        .map(pick)
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::MissingConstant(format!("trajectory column {name}")))
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingConstant(name.into()))
}

/// Accumulates `lhs − rhs` and checks it against a per-step allowance.
struct Slack {
    worst: f64,
    pass: bool,
    checked: usize,
}

impl Slack {
    fn new() -> Self {
        Slack {
            worst: f64::NEG_INFINITY,
            pass: true,
            checked: 0,
        }
    }

    fn add(&mut self, slack: f64, allowed: f64) {
        self.worst = self.worst.max(slack);
        self.pass &= slack <= allowed;
        self.checked += 1;
    }
}

/// Checks every named inequality at every step of `traj`. `obj` supplies
/// anything the recorded columns cannot (the objective at averaged iterates,
/// gradient bounds, per-component optima).
pub fn check_trajectory(
    traj: &Trajectory,
    obj: Option<&Objective>,
    claims: &[Claim],
) -> Result<CheckReport> {
    let mut out = Vec::new();
    for &claim in claims {
        if !claim.applies_to(traj.method) {
            return Err(Error::UnknownClaim(format!(
                "{} does not apply to {} runs",
                claim.name(),
                traj.method
            )));
        }
        let s = check_one(traj, obj, claim)?;
        out.push(ClaimReport {
            claim,
            pass: s.pass,
            worst_slack: if s.checked == 0 { 0.0 } else { s.worst },
            checked: s.checked,
        });
    }
    Ok(CheckReport { claims: out })
}

/// Bound on the (sub)gradient norm: declared `G`, otherwise the largest norm
/// seen along the run.
fn gradient_bound(traj: &Trajectory, obj: Option<&Objective>) -> Result<f64> {
    if let Some(g) = traj.constants.g {
        return Ok(g);
    }
    let obj = obj.ok_or_else(|| Error::MissingConstant("G".into()))?;
    let mut g: f64 = 0.0;
    for x in &traj.iterates {
        g = g.max(obj.subgradient(x)?.norm());
    }
    Ok(g)
}

fn check_one(traj: &Trajectory, obj: Option<&Objective>, claim: Claim) -> Result<Slack> {
    let tol = claim.tolerance();
    let xs = &traj.iterates;
    let ts = &traj.steps;
    let n = ts.len();
    let mut s = Slack::new();
    use Claim::*;
    match claim {
        Fejer => {
            let d = column(traj, "dist_sq", |m| m.dist_sq)?;
            for k in 0..n {
                if ts[k] > 0.0 {
                    s.add((d[k + 1] - (d[k] - ts[k] * ts[k])) / (1.0 + d[k]), tol);
                }
            }
        }
        BoundaryStep => {
            for k in 0..n {
                if ts[k] > 0.0 {
                    let step = xs[k + 1].dist(&xs[k]);
                    s.add((step - ts[k]).abs() / ts[k].max(1.0), tol);
                }
            }
        }
        RadiusBound => {
            let d = column(traj, "dist_sq", |m| m.dist_sq)?;
            for k in 0..n {
                s.add(ts[k] - d[k].sqrt(), tol);
            }
        }
        Contraction => {
            let (l, mu) = (need(traj.constants.l, "L")?, need(traj.constants.mu, "μ")?);
            let rho = (l - mu) / (l + mu);
            let d = column(traj, "dist_sq", |m| m.dist_sq)?;
            for k in 0..n {
                s.add(d[k + 1].sqrt() - rho * d[k].sqrt(), tol);
            }
        }
        SmoothRate => {
            let l = need(traj.constants.l, "L")?;
            let gd = column(traj, "grad_diff_sq", |m| m.grad_diff_sq)?;
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let mut best = f64::INFINITY;
            for k in 0..n {
                best = best.min(gd[k]);
                s.add(best - l * l * d0 / (k + 1) as f64, tol);
            }
        }
        PolyakRate => {
            let g = gradient_bound(traj, obj)?;
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let mut sum = 0.0;
            for k in 0..n {
                sum += gap[k] * gap[k];
                let kk = (k + 1) as f64;
                s.add(sum / kk - g * g * d0 / kk, tol);
            }
        }
        AvgIterate => {
            let obj = obj
                .ok_or_else(|| Error::MissingConstant("objective for averaged iterates".into()))?;
            let f_star = obj.optimum()?.f_star;
            let g = gradient_bound(traj, Some(obj))?;
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let mut sum = Vector::zeros(xs[0].dim());
            for k in 0..n {
                sum = &sum + &xs[k];
                let kk = (k + 1) as f64;
                let avg = sum.scale(1.0 / kk);
                s.add(obj.value(&avg)? - f_star - g * (d0 / kk).sqrt(), tol);
            }
        }
        L0l1Rate => {
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let mut sum = 0.0;
            for k in 0..n {
                sum += ts[k] * ts[k];
                let kk = (k + 1) as f64;
                s.add(sum / kk - d0 / kk, tol);
            }
        }
        NonconvexDescent => {
            let gamma = traj.gamma;
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            let gm = column(traj, "grad_map_norm", |m| m.grad_map_norm)?;
            for k in 0..n {
                s.add(gap[k + 1] - gap[k] + 0.5 * gamma * gm[k] * gm[k], tol);
            }
        }
        NonconvexRate => {
            let gamma = traj.gamma;
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            let gm = column(traj, "grad_map_norm", |m| m.grad_map_norm)?;
            let mut best = f64::INFINITY;
            for k in 0..n {
                best = best.min(gm[k] * gm[k]);
                s.add(best - 2.0 * gap[0] / (gamma * (k + 1) as f64), tol);
            }
        }
        ComponentContraction => {
            let obj = obj.ok_or_else(|| Error::MissingConstant("finite-sum objective".into()))?;
            let comps = obj.components();
            if traj.sampled.len() != n {
                return Err(Error::MissingConstant("sampled index sequence".into()));
            }
            for k in 0..n {
                let c = comps
                    .get(traj.sampled[k])
                    .ok_or_else(|| Error::Config("sampled index out of range".into()))?;
                let (l, mu) = (need(c.constants.l, "L_i")?, need(c.constants.mu, "μ_i")?);
                let rho = (1.0 - theta(mu, l).powi(2)).max(0.0).sqrt();
                let xs_i = &c.optimum()?.x_star;
                s.add(xs[k + 1].dist(xs_i) - rho * xs[k].dist(xs_i), tol);
            }
        }
        PgdDescent => {
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            for k in 0..n {
                let gm = xs[k].dist(&xs[k + 1]) / ts[k];
                s.add(gap[k + 1] - gap[k] + 0.5 * ts[k] * gm * gm, tol);
            }
        }
        PgdFejer => {
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            let d = column(traj, "dist_sq", |m| m.dist_sq)?;
            for k in 0..n {
                s.add(d[k + 1] - d[k] + 2.0 * ts[k] * gap[k + 1], tol);
            }
        }
        PgdValueRate => {
            let gap = column(traj, "f_gap", |m| m.f_gap)?;
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let gamma = ts.iter().cloned().fold(f64::INFINITY, f64::min);
            for k in 1..=n {
                s.add(gap[k] - d0 / (2.0 * gamma * k as f64), tol);
            }
        }
        PgdGradDiff => {
            let gd = column(traj, "grad_diff_sq", |m| m.grad_diff_sq)?;
            let d0 = column(traj, "dist_sq", |m| m.dist_sq)?[0];
            let gamma = ts.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut best = f64::INFINITY;
            for k in 0..n {
                best = best.min(gd[k]);
                s.add(best - d0 / (gamma * gamma * (k + 1) as f64), tol);
            }
        }
        FwGapNonneg => {
            let gaps = column(traj, "fw_gap", |m| m.fw_gap)?;
            for g in gaps {
                s.add(-g, tol);
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConstraintSet;
    use crate::objectives::make_paper_quadratic;
    use crate::rules::{RadiusRule, StepsizeRule};
    use crate::solvers::{run, Rule, SolverConfig};

    fn box_run(method: Method, rule: Rule) -> Trajectory {
        let q = make_paper_quadratic();
        let set = ConstraintSet::Box {
            lo: Vector::from([2.0, 2.0]),
            hi: Vector::from([4.0, 4.0]),
        };
        run(
            &set,
            &q,
            &Vector::from([4.0, 4.0]),
            &SolverConfig::new(method, rule, 100),
        )
        .unwrap()
    }

    #[test]
    fn local_lmo_claims_hold() {
        let traj = box_run(
            Method::LocalLMO,
            Rule::Radius(RadiusRule::StronglyConvexTheta),
        );
        let rep = check_trajectory(
            &traj,
            None,
            &[
                Claim::Fejer,
                Claim::BoundaryStep,
                Claim::Contraction,
                Claim::RadiusBound,
            ],
        )
        .unwrap();
        assert!(rep.all_pass(), "{rep}");
        assert!(rep.claims.iter().all(|c| c.worst_slack < 1e-10));
    }

    #[test]
    fn pgd_claims_hold() {
        let traj = box_run(Method::PGD, Rule::Stepsize(StepsizeRule::InverseL));
        let rep = check_trajectory(
            &traj,
            None,
            &[
                Claim::PgdDescent,
                Claim::PgdFejer,
                Claim::PgdValueRate,
                Claim::PgdGradDiff,
            ],
        )
        .unwrap();
        assert!(rep.all_pass(), "{rep}");
    }

    #[test]
    fn mismatched_claim_is_rejected() {
        let traj = box_run(Method::FrankWolfe, Rule::Stepsize(StepsizeRule::FWClassic));
        assert!(matches!(
            check_trajectory(&traj, None, &[Claim::Fejer]),
            Err(Error::UnknownClaim(_))
        ));
        let rep = check_trajectory(&traj, None, &[Claim::FwGapNonneg]).unwrap();
        assert!(rep.all_pass());
    }

    #[test]
    fn claim_names_round_trip() {
        for c in Claim::ALL {
            assert_eq!(c.name().parse::<Claim>().unwrap(), c);
        }
        assert!(matches!(
            "nope".parse::<Claim>(),
            Err(Error::UnknownClaim(_))
        ));
    }

    #[test]
    fn detects_a_violation() {
        let mut traj = box_run(
            Method::LocalLMO,
            Rule::Radius(RadiusRule::StronglyConvexTheta),
        );
        traj.steps[3] *= 2.0;
        let rep = check_trajectory(&traj, None, &[Claim::BoundaryStep]).unwrap();
        assert!(!rep.all_pass());
    }
}
