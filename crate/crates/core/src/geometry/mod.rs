//! Constraint sets with membership, projection, global LMO and local LMO oracles.
//!
//! Every set here is nonempty, closed and convex. The local oracle
//! [`local_lmo`] minimizes a linear form over the intersection of a set with
//! a Euclidean ball centered at a feasible point; closed forms are used
//! wherever they exist.

mod local;
mod planar;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

pub use local::local_lmo;

/// Absolute membership tolerance used by the oracles.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Tolerance on unit norms and pairwise orthogonality of direction vectors.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// A nonempty closed convex subset of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ConstraintSet {
    WholeSpace {
        dim: usize,
    },
    Singleton {
        c: Vector,
    },
    /// `a + span(basis)` with an orthonormal basis.
    AffineSubspace {
        a: Vector,
        basis: Vec<Vector>,
    },
    /// `{z : <a, z> = b}`.
    Hyperplane {
        a: Vector,
        b: f64,
    },
    /// `a + span{v}` with `v` of unit length.
    AffineLine {
        a: Vector,
        v: Vector,
    },
    /// `a + {s v : s >= 0}` with `v` of unit length.
    Ray {
        a: Vector,
        v: Vector,
    },
    Segment {
        a: Vector,
        b: Vector,
    },
    EuclideanBall {
        c: Vector,
        r: f64,
    },
    Box {
        lo: Vector,
        hi: Vector,
    },
    /// `{z : l <= <a, z> <= r}`; `l` may be `-inf` and `r` may be `+inf`.
    Slab {
        a: Vector,
        l: f64,
        r: f64,
    },
    /// `{z : ||z - c||_1 <= r}`.
    L1Ball {
        c: Vector,
        r: f64,
    },
}

/// The closed ball `B(center, radius)` used by the local oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBall {
    pub center: Vector,
    pub radius: f64,
}

impl LocalBall {
    pub fn new(center: Vector, radius: f64) -> Self {
        LocalBall { center, radius }
    }

    pub fn contains(&self, z: &Vector, tol: f64) -> bool {
        self.center.dist(z) <= self.radius + tol
    }
}

fn is_unit(v: &Vector) -> bool {
    (v.norm() - 1.0).abs() <= ORTHONORMAL_TOL
}

impl ConstraintSet {
    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        use ConstraintSet::*;
        match self {
            WholeSpace { dim } => *dim,
            Singleton { c } | EuclideanBall { c, .. } | L1Ball { c, .. } => c.dim(),
            AffineSubspace { a, .. }
            | Hyperplane { a, .. }
            | AffineLine { a, .. }
            | Ray { a, .. }
            | Segment { a, .. }
            | Slab { a, .. } => a.dim(),
            Box { lo, .. } => lo.dim(),
        }
    }

    /// Returns the list of violated invariants; empty when the set is well formed.
    pub fn validate(&self) -> Vec<String> {
        use ConstraintSet::*;
        let mut out = Vec::new();
        let mut finite = |name: &str, v: &Vector| {
            if !v.is_finite() {
                out.push(format!("{name} has non-finite entries"));
            }
        };
        match self {
            WholeSpace { .. } => {}
            Singleton { c } => finite("c", c),
            AffineSubspace { a, basis } => {
                finite("a", a);
                for b in basis {
                    finite("basis vector", b);
                }
            }
            Hyperplane { a, .. } | Slab { a, .. } => finite("a", a),
            AffineLine { a, v } | Ray { a, v } => {
                finite("a", a);
                finite("v", v);
            }
            Segment { a, b } => {
                finite("a", a);
                finite("b", b);
            }
            EuclideanBall { c, .. } | L1Ball { c, .. } => finite("c", c),
            Box { lo, hi } => {
                finite("lo", lo);
                finite("hi", hi);
            }
        }

        let d = self.dim();
        if d == 0 {
            out.push("dimension must be at least 1".into());
        }
        let mut same_dim = |name: &str, v: &Vector| {
            if v.dim() != d {
                out.push(format!("{name} has dimension {} but set has {d}", v.dim()));
            }
        };
        match self {
            AffineSubspace { basis, .. } => basis.iter().for_each(|b| same_dim("basis vector", b)),
            AffineLine { v, .. } | Ray { v, .. } => same_dim("v", v),
            Segment { b, .. } => same_dim("b", b),
            Box { hi, .. } => same_dim("hi", hi),
            _ => {}
        }
        if !out.is_empty() {
            return out;
        }

        match self {
            AffineSubspace { basis, .. } => {
                if basis.len() > d {
                    out.push("basis has more vectors than the ambient dimension".into());
                }
                for (i, bi) in basis.iter().enumerate() {
                    if !is_unit(bi) {
                        out.push(format!("basis vector {i} is not unit length"));
                    }
                    for (j, bj) in basis.iter().enumerate().skip(i + 1) {
                        if bi.dot(bj).abs() > ORTHONORMAL_TOL {
                            out.push(format!("basis vectors {i} and {j} are not orthogonal"));
                        }
                    }
                }
            }
            Hyperplane { a, b } => {
                if a.is_zero() {
                    out.push("a≠0 violated".into());
                }
                if !b.is_finite() {
                    out.push("b must be finite".into());
                }
            }
            AffineLine { v, .. } | Ray { v, .. } => {
                if !is_unit(v) {
                    out.push("v must be a unit vector".into());
                }
            }
            Segment { a, b } => {
                if a == b {
                    out.push("a≠b violated".into());
                }
            }
            EuclideanBall { r, .. } | L1Ball { r, .. } => {
                if !(r.is_finite() && *r > 0.0) {
                    out.push("radius must be positive and finite".into());
                }
            }
            Box { lo, hi } => {
                if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                    out.push("lo≤hi violated".into());
                }
            }
            Slab { a, l, r } => {
                if a.is_zero() {
                    out.push("a≠0 violated".into());
                }
                if l.is_nan() || r.is_nan() || *l == f64::INFINITY || *r == f64::NEG_INFINITY {
                    out.push("slab bounds must be ordered reals".into());
                } else if l > r {
                    out.push("ℓ≤r violated".into());
                }
            }
            _ => {}
        }
        out
    }

    /// Validates and returns the set, for use at construction sites.
    pub fn validated(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidSet(v))
        }
    }

    /// True when the set is bounded (and hence compact).
    pub fn is_compact(&self) -> bool {
        use ConstraintSet::*;
        match self {
            Singleton { .. }
            | Segment { .. }
            | EuclideanBall { .. }
            | Box { .. }
            | L1Ball { .. } => true,
            AffineSubspace { basis, .. } => basis.is_empty(),
            _ => false,
        }
    }

    /// Membership test with tolerance: Euclidean distance for manifolds and
    /// balls, per-coordinate slack for boxes, signed distance for slabs.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        use ConstraintSet::*;
        Ok(match self {
            WholeSpace { .. } => true,
            Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(xi, (l, h))| *xi >= l - tol && *xi <= h + tol),
            Slab { a, l, r } => {
                let s = a.dot(x);
                let slack = tol * a.norm();
                s >= l - slack && s <= r + slack
            }
            EuclideanBall { c, r } => x.dist(c) <= r + tol,
            _ => self.project(x)?.dist(x) <= tol,
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok(self.project(x)?.dist(x))
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        use ConstraintSet::*;
        Ok(match self {
            WholeSpace { .. } => x.clone(),
            Singleton { c } => c.clone(),
            AffineSubspace { a, basis } => {
                let w = x - a;
                basis.iter().fold(a.clone(), |acc, b| acc.axpy(w.dot(b), b))
            }
            Hyperplane { a, b } => x.axpy(-(a.dot(x) - b) / a.norm_sq(), a),
            AffineLine { a, v } => a.axpy((x - a).dot(v), v),
            Ray { a, v } => a.axpy((x - a).dot(v).max(0.0), v),
            Segment { a, b } => {
                let d = b - a;
                let lam = ((x - a).dot(&d) / d.norm_sq()).clamp(0.0, 1.0);
                a.axpy(lam, &d)
            }
            EuclideanBall { c, r } => {
                let w = x - c;
                let n = w.norm();
                if n <= *r {
                    x.clone()
                } else {
                    c.axpy(r / n, &w)
                }
            }
            Box { lo, hi } => Vector::from(
                x.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(xi, (l, h))| xi.clamp(*l, *h))
                    .collect::<Vec<_>>(),
            ),
            Slab { a, l, r } => {
                let s = a.dot(x);
                if s < *l {
                    x.axpy((l - s) / a.norm_sq(), a)
                } else if s > *r {
                    x.axpy((r - s) / a.norm_sq(), a)
                } else {
                    x.clone()
                }
            }
            L1Ball { c, r } => project_l1(x, c, *r),
        })
    }

    /// Global linear minimization oracle `argmin_{z in set} <g, z>`.
    ///
    /// Ties are broken toward the lexicographically smallest minimizer when
    /// one exists; for flats with `g` orthogonal to every direction the base
    /// point is returned.
    pub fn global_lmo(&self, g: &Vector) -> Result<Vector> {
        g.check_dim(self.dim())?;
        if !g.is_finite() {
            return Err(Error::NonFinite);
        }
        use ConstraintSet::*;
        let d = self.dim();
        match self {
            WholeSpace { .. } => {
                if g.is_zero() {
                    Ok(Vector::zeros(d))
                } else {
                    Err(Error::Unbounded)
                }
            }
            Singleton { c } => Ok(c.clone()),
            AffineSubspace { a, basis } => {
                if basis.iter().all(|b| g.dot(b) == 0.0) {
                    Ok(a.clone())
                } else {
                    Err(Error::Unbounded)
                }
            }
            Hyperplane { a, b } => {
                let tangential = g.axpy(-a.dot(g) / a.norm_sq(), a);
                if tangential.norm() <= 1e-14 * g.norm() {
                    Ok(a.scale(b / a.norm_sq()))
                } else {
                    Err(Error::Unbounded)
                }
            }
            AffineLine { a, v } => {
                if g.dot(v) == 0.0 {
                    Ok(a.clone())
                } else {
                    Err(Error::Unbounded)
                }
            }
            Ray { a, v } => {
                if g.dot(v) >= 0.0 {
                    Ok(a.clone())
                } else {
                    Err(Error::Unbounded)
                }
            }
            Segment { a, b } => {
                let s = g.dot(&(b - a));
                Ok(if s > 0.0 {
                    a.clone()
                } else if s < 0.0 {
                    b.clone()
                } else {
                    lex_min([a.clone(), b.clone()])
                })
            }
            EuclideanBall { c, r } => {
                let n = g.norm();
                if n == 0.0 {
                    Ok(c.axpy(-r, &Vector::unit(d, 0)))
                } else {
                    Ok(c.axpy(-r / n, g))
                }
            }
            Box { lo, hi } => Ok(Vector::from(
                g.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(gi, (l, h))| if *gi < 0.0 { *h } else { *l })
                    .collect::<Vec<_>>(),
            )),
            Slab { a, l, r } => {
                if g.is_zero() {
                    return self.project(&Vector::zeros(d));
                }
                let an = a.norm_sq();
                let along = a.dot(g) / an;
                let tangential = g.axpy(-along, a);
                if tangential.norm() > 1e-14 * g.norm() {
                    return Err(Error::Unbounded);
                }
                let level = if along > 0.0 { *l } else { *r };
                if level.is_finite() {
                    Ok(a.scale(level / an))
                } else {
                    Err(Error::Unbounded)
                }
            }
            L1Ball { c, r } => {
                let m = g.max_abs();
                let candidates: Vec<Vector> = (0..d)
                    .filter(|&i| g[i].abs() == m)
                    .flat_map(|i| {
                        let e = Vector::unit(d, i);
                        if m == 0.0 {
                            vec![c.axpy(-r, &e), c.axpy(*r, &e)]
                        } else {
                            vec![c.axpy(-r * g[i].signum(), &e)]
                        }
                    })
                    .collect();
                Ok(lex_min(candidates))
            }
        }
    }

    /// A point known to lie in the set.
    pub fn anchor(&self) -> Vector {
        use ConstraintSet::*;
        match self {
            WholeSpace { dim } => Vector::zeros(*dim),
            Singleton { c } | EuclideanBall { c, .. } | L1Ball { c, .. } => c.clone(),
            AffineSubspace { a, .. } | AffineLine { a, .. } | Ray { a, .. } | Segment { a, .. } => {
                a.clone()
            }
            Box { lo, hi } => lo.zip_map(hi, |l, h| 0.5 * (l + h)),
            Hyperplane { .. } | Slab { .. } => self
                .project(&Vector::zeros(self.dim()))
                .expect("dimension matches"),
        }
    }
}

/// Lexicographically smallest vector of a nonempty collection.
pub(crate) fn lex_min(vs: impl IntoIterator<Item = Vector>) -> Vector {
    vs.into_iter()
        .reduce(|best, v| {
            if v.lex_cmp(&best) == std::cmp::Ordering::Less {
                v
            } else {
                best
            }
        })
        .expect("nonempty candidate list")
}

/// Projection onto the l1 ball via the sort-and-threshold rule.
fn project_l1(x: &Vector, c: &Vector, r: f64) -> Vector {
    let w = x - c;
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= r {
        return x.clone();
    }
    let mut mags: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, m) in mags.iter().enumerate() {
        cum += m;
        let candidate = (cum - r) / (j as f64 + 1.0);
        if *m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    c + &w.map(|v| v.signum() * (v.abs() - theta).max(0.0))
}
