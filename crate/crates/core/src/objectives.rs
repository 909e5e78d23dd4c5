//! Objective functions with declared constants and optional optimum metadata.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Tolerance used when checking declared optimum data and quadratic symmetry.
const METADATA_TOL: f64 = 1e-9;

/// Declared regularity constants. Any subset may be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

/// A constrained minimizer together with its value and gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub x_star: Vector,
    pub f_star: f64,
    pub grad_star: Vector,
}

/// The analytic form of an objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ObjectiveKind {
    /// `½ xᵀ Q x + bᵀ x + c0`, with `Q` given row by row.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        linear: Vector,
        offset: f64,
    },
    /// `x^{3/2}` on `x >= 0` (one-dimensional).
    PowerThreeHalves,
    /// `(α/4)(u + 2v)² + v` on R².
    CounterexampleAlpha { alpha: f64 },
    /// Uniform average of component objectives.
    FiniteSum { components: Vec<Objective> },
    /// Non-convex `¼(x₁² − 1)² + ½ Σ_{i≥2} x_i²`.
    QuarticDoubleWell { dim: usize },
    /// `Σ |x_i|`.
    AbsoluteValue { dim: usize },
    /// `Σ exp(x_i)`.
    ExpSum { dim: usize },
}

/// An objective plus its declared constants and optional optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    #[serde(flatten)]
    pub kind: ObjectiveKind,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<Optimum>,
}

fn fmt_point(x: &Vector) -> String {
    x.to_string()
}

impl Objective {
    pub fn new(kind: ObjectiveKind) -> Self {
        Objective {
            kind,
            constants: Constants::default(),
            optimum: None,
        }
    }

    pub fn quadratic(matrix: Vec<Vec<f64>>, linear: Vector, offset: f64) -> Self {
        Self::new(ObjectiveKind::Quadratic {
            matrix,
            linear,
            offset,
        })
    }

    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }

    /// Attaches optimum metadata, computing `f⋆` and `∇f(x⋆)` from `x_star`.
    pub fn with_optimum_at(mut self, x_star: Vector) -> Result<Self> {
        let f_star = self.value(&x_star)?;
        let grad_star = match self.gradient(&x_star) {
            Err(Error::NotDifferentiable(_)) => self.subgradient(&x_star)?,
            other => other?,
        };
        self.optimum = Some(Optimum {
            x_star,
            f_star,
            grad_star,
        });
        Ok(self)
    }

    /// Dimension of the domain, when fixed by the variant.
    pub fn dim(&self) -> Option<usize> {
        use ObjectiveKind::*;
        match &self.kind {
            Quadratic { linear, .. } => Some(linear.dim()),
            PowerThreeHalves => Some(1),
            CounterexampleAlpha { .. } => Some(2),
            FiniteSum { components } => components.first().and_then(|c| c.dim()),
            QuarticDoubleWell { dim } | AbsoluteValue { dim } | ExpSum { dim } => Some(*dim),
        }
    }

    /// Whether the variant is convex (for quadratics: positive semidefinite).
    pub fn is_convex(&self) -> bool {
        use ObjectiveKind::*;
        match &self.kind {
            Quadratic { matrix, .. } => symmetric_eigenvalues(matrix)
                .map(|e| e.iter().all(|&l| l >= -1e-12))
                .unwrap_or(false),
            FiniteSum { components } => components.iter().all(|c| c.is_convex()),
            QuarticDoubleWell { .. } => false,
            _ => true,
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if let Some(d) = self.dim() {
            x.check_dim(d)?;
        }
        Ok(())
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        use ObjectiveKind::*;
        Ok(match &self.kind {
            Quadratic {
                matrix,
                linear,
                offset,
            } => 0.5 * x.dot(&mat_vec(matrix, x)) + linear.dot(x) + offset,
            PowerThreeHalves => {
                if x[0] < 0.0 {
                    return Err(Error::Domain(format!("x^(3/2) needs x >= 0, got {}", x[0])));
                }
                x[0] * x[0].sqrt()
            }
            CounterexampleAlpha { alpha } => {
                let (u, v) = (x[0], x[1]);
                alpha / 4.0 * (u + 2.0 * v).powi(2) + v
            }
            FiniteSum { components } => {
                let mut acc = 0.0;
                for c in components {
                    acc += c.value(x)?;
                }
                acc / components.len() as f64
            }
            QuarticDoubleWell { .. } => {
                0.25 * (x[0] * x[0] - 1.0).powi(2)
                    + 0.5 * x.iter().skip(1).map(|v| v * v).sum::<f64>()
            }
            AbsoluteValue { .. } => x.iter().map(|v| v.abs()).sum(),
            ExpSum { .. } => x.iter().map(|v| v.exp()).sum(),
        })
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        use ObjectiveKind::*;
        Ok(match &self.kind {
            Quadratic { matrix, linear, .. } => &mat_vec(matrix, x) + linear,
            PowerThreeHalves => {
                if x[0] < 0.0 {
                    return Err(Error::Domain(format!("x^(3/2) needs x >= 0, got {}", x[0])));
                }
                // one-sided derivative 0 at the boundary
                Vector::from(vec![1.5 * x[0].sqrt()])
            }
            CounterexampleAlpha { alpha } => {
                let (u, v) = (x[0], x[1]);
                Vector::from(vec![
                    alpha / 2.0 * u + alpha * v,
                    alpha * u + 2.0 * alpha * v + 1.0,
                ])
            }
            FiniteSum { components } => {
                let mut acc = Vector::zeros(x.dim());
                for c in components {
                    acc = &acc + &c.gradient(x)?;
                }
                acc.scale(1.0 / components.len() as f64)
            }
            QuarticDoubleWell { .. } => {
                let mut g = x.clone();
                g[0] = x[0] * (x[0] * x[0] - 1.0);
                g
            }
            AbsoluteValue { .. } => {
                if x.iter().any(|&v| v == 0.0) {
                    return Err(Error::NotDifferentiable(fmt_point(x)));
                }
                x.map(f64::signum)
            }
            ExpSum { .. } => x.map(f64::exp),
        })
    }

    /// A subgradient; equals the gradient wherever the function is differentiable.
    pub fn subgradient(&self, x: &Vector) -> Result<Vector> {
        use ObjectiveKind::*;
        match &self.kind {
            AbsoluteValue { .. } => {
                self.check_dim(x)?;
                Ok(x.map(|v| if v == 0.0 { 0.0 } else { v.signum() }))
            }
            FiniteSum { components } => {
                self.check_dim(x)?;
                let mut acc = Vector::zeros(x.dim());
                for c in components {
                    acc = &acc + &c.subgradient(x)?;
                }
                Ok(acc.scale(1.0 / components.len() as f64))
            }
            QuarticDoubleWell { .. } => Err(Error::Domain(
                "subgradients are defined for convex objectives only".into(),
            )),
            _ => self.gradient(x),
        }
    }

    /// Returns the violated invariants (empty when consistent).
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        use ObjectiveKind::*;
        match &self.kind {
            Quadratic { matrix, linear, .. } => {
                let d = linear.dim();
                if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                    out.push(format!("matrix must be {d}x{d}"));
                    return out;
                }
                for i in 0..d {
                    for j in 0..i {
                        if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 {
                            out.push(format!("matrix not symmetric at ({i},{j})"));
                        }
                    }
                }
                if let Some(eig) = symmetric_eigenvalues(matrix) {
                    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if let Some(mu) = self.constants.mu {
                        if lo < mu - METADATA_TOL {
                            out.push(format!("λ_min = {lo} below declared μ = {mu}"));
                        }
                    }
                    if let Some(l) = self.constants.l {
                        if hi > l + METADATA_TOL {
                            out.push(format!("λ_max = {hi} above declared L = {l}"));
                        }
                    }
                }
            }
            CounterexampleAlpha { alpha } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    out.push("α must be positive".into());
                }
            }
            FiniteSum { components } => {
                if components.is_empty() {
                    out.push("finite sum needs at least one component".into());
                }
                let d = self.dim();
                for (i, c) in components.iter().enumerate() {
                    if c.dim() != d {
                        out.push(format!("component {i} has a different dimension"));
                    }
                    out.extend(
                        c.validate()
                            .into_iter()
                            .map(|m| format!("component {i}: {m}")),
                    );
                }
            }
            QuarticDoubleWell { dim } | AbsoluteValue { dim } | ExpSum { dim } => {
                if *dim == 0 {
                    out.push("dimension must be at least 1".into());
                }
            }
            PowerThreeHalves => {}
        }
        if let Some(opt) = &self.optimum {
            match (self.value(&opt.x_star), self.subgradient(&opt.x_star)) {
                (Ok(f), Ok(g)) => {
                    if (f - opt.f_star).abs() > METADATA_TOL {
                        out.push(format!(
                            "f(x⋆) = {f} differs from declared f⋆ = {}",
                            opt.f_star
                        ));
                    }
                    if g.dim() != opt.grad_star.dim() || g.dist(&opt.grad_star) > METADATA_TOL {
                        out.push("∇f(x⋆) differs from declared gradient".into());
                    }
                }
                (Err(e), _) | (_, Err(e)) => out.push(format!("optimum not evaluable: {e}")),
            }
        }
        out
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidObjective(v))
        }
    }

    pub fn optimum(&self) -> Result<&Optimum> {
        self.optimum
            .as_ref()
            .ok_or_else(|| Error::MissingConstant("optimum (x⋆, f⋆, ∇f(x⋆))".into()))
    }

    /// `f(x) − f⋆`, evaluated in displacement form where the variant allows
    /// it so that the gap keeps its relative accuracy near `x⋆`.
    pub fn suboptimality(&self, x: &Vector) -> Result<f64> {
        let opt = self.optimum()?;
        let offset = self.value(&opt.x_star)? - opt.f_star;
        Ok(self.increment(x, &opt.x_star)? + offset)
    }

    /// `f(x) − f(y)`.
    fn increment(&self, x: &Vector, y: &Vector) -> Result<f64> {
        match &self.kind {
            ObjectiveKind::Quadratic { matrix, linear, .. } => {
                self.check_dim(x)?;
                self.check_dim(y)?;
                let dx = x - y;
                let gy = &mat_vec(matrix, y) + linear;
                Ok(gy.dot(&dx) + 0.5 * dx.dot(&mat_vec(matrix, &dx)))
            }
            ObjectiveKind::FiniteSum { components } => {
                let mut acc = 0.0;
                for c in components {
                    acc += c.increment(x, y)?;
                }
                Ok(acc / components.len() as f64)
            }
            _ => Ok(self.value(x)? - self.value(y)?),
        }
    }

    pub fn lipschitz(&self) -> Result<f64> {
        self.constants
            .l
            .ok_or_else(|| Error::MissingConstant("L".into()))
    }

    pub fn strong_convexity(&self) -> Result<f64> {
        self.constants
            .mu
            .ok_or_else(|| Error::MissingConstant("μ".into()))
    }

    /// Components of a finite sum; a plain objective is its own single component.
    pub fn components(&self) -> Vec<&Objective> {
        match &self.kind {
            ObjectiveKind::FiniteSum { components } => components.iter().collect(),
            _ => vec![self],
        }
    }
}

fn mat_vec(m: &[Vec<f64>], x: &Vector) -> Vector {
    Vector::from(
        m.iter()
            .map(|row| row.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect::<Vec<f64>>(),
    )
}

/// Eigenvalues of a (numerically) symmetric matrix.
pub fn symmetric_eigenvalues(m: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = m.len();
    if m.iter().any(|r| r.len() != d) {
        return None;
    }
    let mat = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[i][j] + m[j][i]));
    Some(mat.symmetric_eigenvalues().iter().cloned().collect())
}

/// Maximum over coordinates of `|∇f_i − fd_i| / max(1, |∇f_i|)`, where `fd`
/// is the central difference with step `h`.
pub fn fd_gradient_check(obj: &Objective, x: &Vector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Config(
            "finite-difference step must be positive".into(),
        ));
    }
    let g = obj.gradient(x)?;
    let mut worst: f64 = 0.0;
    for i in 0..x.dim() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (obj.value(&xp)? - obj.value(&xm)?) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1.0));
    }
    Ok(worst)
}

/// Exact minimizer of a strictly convex quadratic over a box by active-set
/// enumeration over all `3^d` faces.
pub fn quadratic_box_minimizer(
    matrix: &[Vec<f64>],
    linear: &Vector,
    lo: &Vector,
    hi: &Vector,
) -> Result<Vector> {
    let d = linear.dim();
    let q = DMatrix::from_fn(d, d, |i, j| matrix[i][j]);
    let b = DVector::from_iterator(d, linear.iter().cloned());
    let mut best: Option<(f64, Vector)> = None;
    let faces = 3usize.pow(d as u32);
    for face in 0..faces {
        // 0 = free, 1 = at lo, 2 = at hi
        let mut code = face;
        let mut state = vec![0u8; d];
        for s in state.iter_mut() {
            *s = (code % 3) as u8;
            code /= 3;
        }
        let mut x = DVector::zeros(d);
        let free: Vec<usize> = (0..d).filter(|&i| state[i] == 0).collect();
        for i in 0..d {
            match state[i] {
                1 => x[i] = lo[i],
                2 => x[i] = hi[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            let nf = free.len();
            let qff = DMatrix::from_fn(nf, nf, |a, c| q[(free[a], free[c])]);
            let rhs = DVector::from_fn(nf, |a, _| {
                let i = free[a];
                let fixed: f64 = (0..d)
                    .filter(|j| state[*j] != 0)
                    .map(|j| q[(i, j)] * x[j])
                    .sum();
                -(b[i] + fixed)
            });
            let Some(sol) = qff.lu().solve(&rhs) else {
                continue;
            };
            for (a, &i) in free.iter().enumerate() {
                x[i] = sol[a];
            }
        }
        let feasible = (0..d).all(|i| x[i] >= lo[i] - 1e-12 && x[i] <= hi[i] + 1e-12);
        if !feasible {
            continue;
        }
        let grad = &q * &x + &b;
        let kkt = (0..d).all(|i| match state[i] {
            1 => grad[i] >= -1e-9,
            2 => grad[i] <= 1e-9,
            _ => true,
        });
        if !kkt {
            continue;
        }
        let val = 0.5 * x.dot(&(&q * &x)) + b.dot(&x);
        let xv = Vector::from(x.iter().cloned().collect::<Vec<_>>());
        if best.as_ref().is_none_or(|(v, _)| val < *v) {
            best = Some((val, xv));
        }
    }
    best.map(|(_, x)| x)
        .ok_or_else(|| Error::Config("no KKT point found on the box".into()))
}

/// The rotated ill-conditioned quadratic on the box `[2,4]²` with eigenvalues
/// 1 and 100, declared constants `L = 100`, `μ = 1`, and its constrained
/// minimizer attached.
pub fn make_paper_quadratic() -> Objective {
    let (s, c) = (std::f64::consts::FRAC_PI_6).sin_cos();
    // Q = R diag(1, 100) Rᵀ with R the rotation by π/6
    let off = -99.0 * 3.0_f64.sqrt() / 4.0;
    debug_assert!((off - (1.0 - 100.0) * s * c).abs() < 1e-12);
    let matrix = vec![vec![25.75, off], vec![off, 75.25]];
    let linear = Vector::zeros(2);
    let x_star = quadratic_box_minimizer(
        &matrix,
        &linear,
        &Vector::from([2.0, 2.0]),
        &Vector::from([4.0, 4.0]),
    )
    .expect("the box problem has a KKT point");
    Objective::quadratic(matrix, linear, 0.0)
        .with_constants(Constants {
            l: Some(100.0),
            mu: Some(1.0),
            ..Default::default()
        })
        .with_optimum_at(x_star)
        .expect("x⋆ is in the domain")
}
