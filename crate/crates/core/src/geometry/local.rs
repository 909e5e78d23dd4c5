//! The local linear minimization oracle over `set ∩ B(center, radius)`.

use super::{lex_min, planar, ConstraintSet, LocalBall, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Relative size below which a tangential gradient component counts as zero.
const TANGENT_ZERO: f64 = 1e-14;

/// Minimizes `<g, z>` over `set ∩ ball`.
///
/// Closed forms are used for every variant except boxes and l1 balls in
/// dimension three and above, which are solved along the projection arc
/// `λ ↦ Proj(center - λ g)`. A zero `g` returns the center.
pub fn local_lmo(set: &ConstraintSet, ball: &LocalBall, g: &Vector) -> Result<Vector> {
    let d = set.dim();
    ball.center.check_dim(d)?;
    g.check_dim(d)?;
    if !g.is_finite() || !ball.center.is_finite() {
        return Err(Error::NonFinite);
    }
    let t = ball.radius;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::BadRadius(t));
    }
    let x = &ball.center;
    let distance = set.distance(x)?;
    if distance > MEMBERSHIP_TOL {
        return Err(Error::InfeasibleCenter { distance });
    }
    let gn = g.norm();
    if gn == 0.0 {
        return Ok(x.clone());
    }
    let u = g.scale(1.0 / gn);

    use ConstraintSet::*;
    Ok(match set {
        WholeSpace { .. } => x.axpy(-t, &u),
        Singleton { c } => c.clone(),
        AffineSubspace { basis, .. } => {
            let pg = basis
                .iter()
                .fold(Vector::zeros(d), |acc, b| acc.axpy(g.dot(b), b));
            let pn = pg.norm();
            if pn <= TANGENT_ZERO * gn {
                x.clone()
            } else {
                x.axpy(-t / pn, &pg)
            }
        }
        Hyperplane { a, .. } => {
            let tangential = g.axpy(-a.dot(g) / a.norm_sq(), a);
            let tn = tangential.norm();
            if tn <= TANGENT_ZERO * gn {
                x.clone()
            } else {
                x.axpy(-t / tn, &tangential)
            }
        }
        AffineLine { v, .. } => {
            let s = g.dot(v);
            if s > 0.0 {
                x.axpy(-t, v)
            } else if s < 0.0 {
                x.axpy(t, v)
            } else {
                lex_min([x.axpy(-t, v), x.axpy(t, v)])
            }
        }
        Ray { a, v } => {
            let alpha_x = (x - a).dot(v).max(0.0);
            let low = (alpha_x - t).max(0.0);
            let high = alpha_x + t;
            let s = g.dot(v);
            let alpha = if s > 0.0 {
                low
            } else if s < 0.0 {
                high
            } else {
                return Ok(lex_min([a.axpy(low, v), a.axpy(high, v)]));
            };
            a.axpy(alpha, v)
        }
        Segment { a, b } => {
            let dir = b - a;
            let len = dir.norm();
            let lam_x = ((x - a).dot(&dir) / (len * len)).clamp(0.0, 1.0);
            let low = (lam_x - t / len).max(0.0);
            let high = (lam_x + t / len).min(1.0);
            let s = g.dot(&dir);
            let lam = if s > 0.0 {
                low
            } else if s < 0.0 {
                high
            } else {
                return Ok(lex_min([a.axpy(low, &dir), a.axpy(high, &dir)]));
            };
            a.axpy(lam, &dir)
        }
        EuclideanBall { c, r } => ball_ball(x, t, c, *r, &u),
        Slab { a, l, r } => slab(x, t, a, *l, *r, &u),
        Box { lo, hi } => match d {
            1 => interval(x[0], t, lo[0], hi[0], g[0]),
            2 => {
                let z = planar::box_disk_lmo(
                    [lo[0], lo[1]],
                    [hi[0], hi[1]],
                    [x[0], x[1]],
                    t,
                    [g[0], g[1]],
                );
                Vector::from(z.to_vec())
            }
            _ => projection_arc(set, x, t, g)?,
        },
        L1Ball { c, r } => match d {
            1 => interval(x[0], t, c[0] - r, c[0] + r, g[0]),
            2 => {
                let (c0, c1, r) = (c[0], c[1], *r);
                let verts = [[c0 + r, c1], [c0, c1 + r], [c0 - r, c1], [c0, c1 - r]];
                let inside = |p: [f64; 2]| (p[0] - c0).abs() + (p[1] - c1).abs() <= r;
                let z = planar::polygon_disk_lmo(&verts, inside, [x[0], x[1]], t, [g[0], g[1]]);
                Vector::from(z.to_vec())
            }
            _ => projection_arc(set, x, t, g)?,
        },
    })
}

fn interval(x: f64, t: f64, lo: f64, hi: f64, g: f64) -> Vector {
    let z = if g > 0.0 {
        (x - t).max(lo)
    } else {
        (x + t).min(hi)
    };
    Vector::from(vec![z])
}

/// Lexicographically smallest point of the sphere `{m + rho w : w ⟂ n, |w| = 1}`
/// (a sphere of radius `rho` inside the hyperplane through `m` with unit normal `n`).
fn lex_min_on_sphere(m: &Vector, rho: f64, n: &Vector) -> Vector {
    let d = m.dim();
    for j in 0..d {
        let ej = Vector::unit(d, j);
        let pe = ej.axpy(-n[j], n);
        let pn = pe.norm();
        if pn > 1e-12 {
            return m.axpy(-rho / pn, &pe);
        }
    }
    m.clone()
}

/// Three-case analysis for `B(c, R) ∩ B(x, t)`.
fn ball_ball(x: &Vector, t: f64, c: &Vector, big_r: f64, u: &Vector) -> Vector {
    let free = x.axpy(-t, u);
    if free.dist(c) <= big_r {
        return free;
    }
    let outer = c.axpy(-big_r, u);
    if outer.dist(x) <= t {
        return outer;
    }
    let dvec = c - x;
    let rho = dvec.norm();
    let e1 = dvec.scale(1.0 / rho);
    let alpha = (rho * rho + t * t - big_r * big_r) / (2.0 * rho);
    let s = (t * t - alpha * alpha).max(0.0).sqrt();
    let p = u.axpy(-u.dot(&e1), &e1);
    let pn = p.norm();
    let mid = x.axpy(alpha, &e1);
    if pn > 1e-15 {
        mid.axpy(-s / pn, &p)
    } else {
        lex_min_on_sphere(&mid, s, &e1)
    }
}

/// Slab `{l <= <a,z> <= r}`: free minimizer when feasible, otherwise drop to
/// the violated boundary hyperplane and spend the remaining radius along the
/// tangential part of `-u` inside it.
fn slab(x: &Vector, t: f64, a: &Vector, l: f64, r: f64, u: &Vector) -> Vector {
    let free = x.axpy(-t, u);
    let an = a.norm();
    let s = a.dot(&free);
    let level = if s < l {
        l
    } else if s > r {
        r
    } else {
        return free;
    };
    let n = a.scale(1.0 / an);
    // signed distance from x to the active boundary, along n
    let h = (a.dot(x) - level) / an;
    let foot = x.axpy(-h, &n);
    let rem = (t * t - h * h).max(0.0).sqrt();
    let tangential = u.axpy(-u.dot(&n), &n);
    let tn = tangential.norm();
    if tn > TANGENT_ZERO {
        foot.axpy(-rem / tn, &tangential)
    } else {
        lex_min_on_sphere(&foot, rem, &n)
    }
}

/// Generic solver for sets with a cheap projection: the KKT point has the
/// form `Proj(x - λ g)` with `λ` chosen so the ball constraint is tight,
/// and `||Proj(x - λ g) - x||` is nondecreasing in `λ`.
fn projection_arc(set: &ConstraintSet, x: &Vector, t: f64, g: &Vector) -> Result<Vector> {
    let gn = g.norm();
    let at = |lam: f64| -> Result<(Vector, f64)> {
        let z = set.project(&x.axpy(-lam, g))?;
        let dist = z.dist(x);
        Ok((z, dist))
    };
    // at λ = t/|g| the step is within the ball by nonexpansiveness
    let mut lo = t / gn;
    let (mut z_lo, d_lo) = at(lo)?;
    if d_lo >= t {
        return Ok(z_lo);
    }
    let floor = set.global_lmo(g).ok().map(|s| g.dot(&s));
    let mut hi = lo;
    loop {
        hi *= 2.0;
        let (z, dist) = at(hi)?;
        if dist >= t {
            break;
        }
        // the arc has reached a global minimizer: the ball constraint is inactive
        let slack = 4.0 * f64::EPSILON * gn * (z.norm() + 1.0);
        if floor.is_some_and(|v| g.dot(&z) <= v + slack) || hi > 1e300 {
            return Ok(z);
        }
        lo = hi;
        z_lo = z;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (z, dist) = at(mid)?;
        if dist <= t {
            lo = mid;
            z_lo = z;
        } else {
            hi = mid;
        }
    }
    Ok(z_lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ConstraintSet::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from(x.to_vec())
    }

    fn close(a: &Vector, b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn lmo(set: &ConstraintSet, c: &[f64], t: f64, g: &[f64]) -> Vector {
        local_lmo(set, &LocalBall::new(v(c), t), &v(g)).unwrap()
    }

    #[test]
    fn whole_space_step() {
        let z = lmo(&WholeSpace { dim: 2 }, &[0.0, 0.0], 1.0, &[3.0, 4.0]);
        assert!(close(&z, &[-0.6, -0.8], 1e-15));
    }

    #[test]
    fn hyperplane_tangential_step() {
        let set = Hyperplane {
            a: v(&[0.0, 1.0]),
            b: 0.0,
        };
        assert_eq!(lmo(&set, &[0.0, 0.0], 2.0, &[1.0, 1.0]), v(&[-2.0, 0.0]));
        // gradient normal to the plane: stay put
        assert_eq!(lmo(&set, &[1.0, 0.0], 2.0, &[0.0, 3.0]), v(&[1.0, 0.0]));
    }

    #[test]
    fn ray_clamps_at_origin() {
        let set = Ray {
            a: v(&[0.0, 0.0]),
            v: v(&[1.0, 0.0]),
        };
        assert_eq!(lmo(&set, &[0.5, 0.0], 2.0, &[1.0, 0.0]), v(&[0.0, 0.0]));
        assert_eq!(lmo(&set, &[0.5, 0.0], 2.0, &[-1.0, 0.0]), v(&[2.5, 0.0]));
        // orthogonal gradient: lexicographically smallest feasible endpoint
        assert_eq!(lmo(&set, &[0.5, 0.0], 2.0, &[0.0, 1.0]), v(&[0.0, 0.0]));
    }

    #[test]
    fn segment_and_line() {
        let seg = Segment {
            a: v(&[0.0, 0.0]),
            b: v(&[2.0, 0.0]),
        };
        assert_eq!(lmo(&seg, &[1.0, 0.0], 0.5, &[-1.0, 0.0]), v(&[1.5, 0.0]));
        assert_eq!(lmo(&seg, &[1.0, 0.0], 5.0, &[-1.0, 0.0]), v(&[2.0, 0.0]));
        let line = AffineLine {
            a: v(&[0.0, 1.0]),
            v: v(&[1.0, 0.0]),
        };
        assert_eq!(lmo(&line, &[3.0, 1.0], 1.0, &[2.0, 7.0]), v(&[2.0, 1.0]));
        assert_eq!(lmo(&line, &[3.0, 1.0], 1.0, &[0.0, 7.0]), v(&[2.0, 1.0]));
    }

    #[test]
    fn singleton_and_zero_gradient() {
        let set = Singleton { c: v(&[1.0, 2.0]) };
        assert_eq!(lmo(&set, &[1.0, 2.0], 3.0, &[1.0, 0.0]), v(&[1.0, 2.0]));
        let b = Box {
            lo: v(&[0.0, 0.0]),
            hi: v(&[1.0, 1.0]),
        };
        assert_eq!(lmo(&b, &[0.3, 0.4], 1.0, &[0.0, 0.0]), v(&[0.3, 0.4]));
    }

    #[test]
    fn error_paths() {
        let b = Box {
            lo: v(&[0.0, 0.0]),
            hi: v(&[1.0, 1.0]),
        };
        let g = v(&[1.0, 0.0]);
        assert!(matches!(
            local_lmo(&b, &LocalBall::new(v(&[2.0, 0.0]), 1.0), &g),
            Err(Error::InfeasibleCenter { .. })
        ));
        assert_eq!(
            local_lmo(&b, &LocalBall::new(v(&[0.5, 0.5]), 0.0), &g),
            Err(Error::BadRadius(0.0))
        );
        assert!(matches!(
            local_lmo(&b, &LocalBall::new(v(&[0.5, 0.5]), f64::NAN), &g),
            Err(Error::BadRadius(_))
        ));
    }

    #[test]
    fn euclidean_ball_cases() {
        let set = EuclideanBall {
            c: v(&[0.0, 0.0]),
            r: 1.0,
        };
        // free minimizer feasible
        assert!(close(
            &lmo(&set, &[0.0, 0.0], 0.5, &[1.0, 0.0]),
            &[-0.5, 0.0],
            1e-15
        ));
        // set minimizer inside the local ball
        assert!(close(
            &lmo(&set, &[0.0, 0.0], 3.0, &[1.0, 0.0]),
            &[-1.0, 0.0],
            1e-15
        ));
        // both active: from (1,0) heading left-down with t = 1
        let z = lmo(&set, &[1.0, 0.0], 1.0, &[0.0, 1.0]);
        assert!((z.norm() - 1.0).abs() < 1e-12);
        assert!((z.dist(&v(&[1.0, 0.0])) - 1.0).abs() < 1e-12);
        assert!(close(&z, &[0.5, -(0.75f64).sqrt()], 1e-12));
    }

    #[test]
    fn slab_active_boundary() {
        let set = Slab {
            a: v(&[0.0, 1.0]),
            l: 0.0,
            r: 1.0,
        };
        // from (0, 0.6), t = 1, g = (1, 1): boundary y = 0 active
        let z = lmo(&set, &[0.0, 0.6], 1.0, &[1.0, 1.0]);
        assert!(close(&z, &[-0.8, 0.0], 1e-15));
        // interior
        let z = lmo(&set, &[0.0, 0.5], 0.1, &[0.0, 1.0]);
        assert!(close(&z, &[0.0, 0.4], 1e-15));
        // gradient normal to the boundary: lexicographically smallest on the disk
        let z = lmo(&set, &[0.0, 0.6], 1.0, &[0.0, 1.0]);
        assert!(close(&z, &[-0.8, 0.0], 1e-15));
    }

    #[test]
    fn box_3d_projection_arc() {
        let set = Box {
            lo: v(&[0.0, 0.0, 0.0]),
            hi: v(&[1.0, 1.0, 1.0]),
        };
        // free minimizer feasible
        let z = lmo(&set, &[0.5, 0.5, 0.5], 0.1, &[1.0, 0.0, 0.0]);
        assert!(close(&z, &[0.4, 0.5, 0.5], 1e-14));
        // from a corner, first coordinate pinned at the bound
        let z = lmo(&set, &[0.0, 0.5, 0.5], 0.3, &[1.0, 1.0, 0.0]);
        assert!(close(&z, &[0.0, 0.2, 0.5], 1e-13), "{z}");
        // ball contains the whole box: global LMO
        let z = lmo(&set, &[0.5, 0.5, 0.5], 5.0, &[1.0, -1.0, 1.0]);
        assert!(close(&z, &[0.0, 1.0, 0.0], 1e-13), "{z}");
        // one coordinate with a tiny gradient still travels the full radius
        let z = lmo(&set, &[0.0, 0.5, 0.0], 1e-8, &[6.5, -2e-7, 16.7]);
        assert!((z.dist(&v(&[0.0, 0.5, 0.0])) - 1e-8).abs() < 1e-15, "{z}");
    }
}
