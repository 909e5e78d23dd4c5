//! Radius rules for Local LMO, stepsize rules for the baselines, and the
//! projected gradient mapping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConstraintSet;
use crate::objectives::Objective;
use crate::vector::Vector;

/// How the local ball radius `t_k` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum RadiusRule {
    /// `‖∇f(x) − ∇f(x⋆)‖ / L`.
    SmoothGradDiff,
    /// `θ ‖x − x⋆‖` with `θ = 2√(μL)/(L+μ)`.
    StronglyConvexTheta,
    /// `(f(x) − f⋆) / ‖∇f(x)‖`.
    Polyak,
    /// Averaged asymmetric (L0, L1) radius.
    AsymL0L1,
    /// `γ ‖G_γ(x)‖`.
    GradientMapping { gamma: f64 },
    /// `c q^k`; a missing `c` is resolved to `θ ‖x_0 − x⋆‖` at run start.
    GeometricSchedule {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        q: f64,
    },
    /// Fixed radius.
    Constant { t: f64 },
}

/// How the baseline stepsize `γ_k` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum StepsizeRule {
    ConstantGamma {
        gamma: f64,
    },
    InverseL,
    TwoOverLplusMu,
    /// `2 / (k + 2)`.
    FWClassic,
    PGDAsymL0L1,
}

/// `2√(μL) / (L + μ)`.
pub fn theta(mu: f64, l: f64) -> f64 {
    2.0 * (mu * l).sqrt() / (l + mu)
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingConstant(name.into()))
}

fn positive(v: f64, name: &str, out: &mut Vec<String>) {
    if !(v.is_finite() && v > 0.0) {
        out.push(format!("{name} must be positive and finite, got {v}"));
    }
}

/// `(x − Proj(x − γ g)) / γ` for an explicit direction `g`.
pub fn gradient_mapping_with(
    set: &ConstraintSet,
    x: &Vector,
    g: &Vector,
    gamma: f64,
) -> Result<Vector> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Config(format!("γ must be positive, got {gamma}")));
    }
    let p = set.project(&x.axpy(-gamma, g))?;
    Ok((x - &p).scale(1.0 / gamma))
}

/// The projected gradient mapping `G_γ(x)`.
pub fn gradient_mapping(
    set: &ConstraintSet,
    obj: &Objective,
    x: &Vector,
    gamma: f64,
) -> Result<Vector> {
    gradient_mapping_with(set, x, &obj.gradient(x)?, gamma)
}

impl RadiusRule {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            RadiusRule::GradientMapping { gamma } => positive(*gamma, "γ", &mut out),
            RadiusRule::GeometricSchedule { c, q } => {
                if let Some(c) = c {
                    positive(*c, "c", &mut out);
                }
                if !(*q > 0.0 && *q < 1.0) {
                    out.push(format!("q must lie in (0,1), got {q}"));
                }
            }
            RadiusRule::Constant { t } => positive(*t, "t", &mut out),
            _ => {}
        }
        out
    }

    /// Checks that `obj` declares everything this rule reads.
    pub fn check_requirements(&self, obj: &Objective) -> Result<()> {
        let c = &obj.constants;
        match self {
            RadiusRule::SmoothGradDiff => {
                need(c.l, "L")?;
                obj.optimum()?;
            }
            RadiusRule::StronglyConvexTheta => {
                need(c.l, "L")?;
                need(c.mu, "μ")?;
                obj.optimum()?;
            }
            RadiusRule::Polyak => {
                obj.optimum()?;
            }
            RadiusRule::AsymL0L1 => {
                need(c.l0, "L0")?;
                need(c.l1, "L1")?;
                obj.optimum()?;
            }
            RadiusRule::GeometricSchedule { c: None, .. } => {
                need(c.l, "L")?;
                need(c.mu, "μ")?;
                obj.optimum()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Fills in optimum-dependent parameters that are fixed for a whole run.
    pub fn resolve(&self, obj: &Objective, x0: &Vector) -> Result<RadiusRule> {
        match self {
            RadiusRule::GeometricSchedule { c: None, q } => {
                let th = theta(need(obj.constants.mu, "μ")?, need(obj.constants.l, "L")?);
                let c = th * x0.dist(&obj.optimum()?.x_star);
                Ok(RadiusRule::GeometricSchedule { c: Some(c), q: *q })
            }
            other => Ok(other.clone()),
        }
    }

    /// Radius at `x` for iteration `k`.
    pub fn radius(
        &self,
        obj: &Objective,
        set: &ConstraintSet,
        x: &Vector,
        k: usize,
    ) -> Result<f64> {
        let g = obj.gradient(x)?;
        self.radius_with(obj, set, x, k, &g)
    }

    /// Radius using a caller-supplied direction `g` (a gradient, subgradient,
    /// or component gradient of `obj`).
    pub fn radius_with(
        &self,
        obj: &Objective,
        set: &ConstraintSet,
        x: &Vector,
        k: usize,
        g: &Vector,
    ) -> Result<f64> {
        let c = &obj.constants;
        let t = match self {
            RadiusRule::SmoothGradDiff => {
                let l = need(c.l, "L")?;
                (g - &obj.optimum()?.grad_star).norm() / l
            }
            RadiusRule::StronglyConvexTheta => {
                let th = theta(need(c.mu, "μ")?, need(c.l, "L")?);
                th * x.dist(&obj.optimum()?.x_star)
            }
            RadiusRule::Polyak => {
                let gap = obj.suboptimality(x)?;
                if gap <= 0.0 {
                    0.0
                } else {
                    let gn = g.norm();
                    if gn == 0.0 {
                        return Err(Error::ZeroDenominator);
                    }
                    gap / gn
                }
            }
            RadiusRule::AsymL0L1 => {
                let (l0, l1) = (need(c.l0, "L0")?, need(c.l1, "L1")?);
                let gs = &obj.optimum()?.grad_star;
                let delta = (g - gs).norm();
                if delta == 0.0 {
                    0.0
                } else {
                    0.5 * (delta / (l0 + l1 * g.norm()) + delta / (l0 + l1 * gs.norm()))
                }
            }
            RadiusRule::GradientMapping { gamma } => {
                gamma * gradient_mapping_with(set, x, g, *gamma)?.norm()
            }
            RadiusRule::GeometricSchedule { c: sc, q } => {
                let sc = match sc {
                    Some(v) => *v,
                    None => {
                        let RadiusRule::GeometricSchedule { c: Some(v), .. } =
                            self.resolve(obj, x)?
                        else {
                            unreachable!()
                        };
                        // only meaningful at k = 0 where x is the start point
                        v
                    }
                };
                sc * q.powi(k as i32)
            }
            RadiusRule::Constant { t } => *t,
        };
        Ok(t)
    }
}

impl StepsizeRule {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let StepsizeRule::ConstantGamma { gamma } = self {
            positive(*gamma, "γ", &mut out);
        }
        out
    }

    pub fn check_requirements(&self, obj: &Objective) -> Result<()> {
        let c = &obj.constants;
        match self {
            StepsizeRule::InverseL => {
                need(c.l, "L")?;
            }
            StepsizeRule::TwoOverLplusMu => {
                need(c.l, "L")?;
                need(c.mu, "μ")?;
            }
            StepsizeRule::PGDAsymL0L1 => {
                need(c.l0, "L0")?;
                need(c.l1, "L1")?;
                obj.optimum()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Stepsize at `x` for iteration `k`.
    pub fn stepsize(&self, obj: &Objective, x: &Vector, k: usize) -> Result<f64> {
        let c = &obj.constants;
        Ok(match self {
            StepsizeRule::ConstantGamma { gamma } => *gamma,
            StepsizeRule::InverseL => 1.0 / need(c.l, "L")?,
            StepsizeRule::TwoOverLplusMu => 2.0 / (need(c.l, "L")? + need(c.mu, "μ")?),
            StepsizeRule::FWClassic => 2.0 / (k as f64 + 2.0),
            StepsizeRule::PGDAsymL0L1 => {
                let (l0, l1) = (need(c.l0, "L0")?, need(c.l1, "L1")?);
                let gs = obj.optimum()?.grad_star.norm();
                let gx = obj.gradient(x)?.norm();
                0.5 * (1.0 / (l0 + l1 * gx) + 1.0 / (l0 + l1 * gs))
            }
        })
    }
}
