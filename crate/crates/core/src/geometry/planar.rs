//! Exact local LMO for planar polygons by boundary-candidate enumeration.
//!
//! The minimizer of a linear form over `polygon ∩ disk` is either the disk
//! minimizer (when it is inside the polygon), a polygon vertex inside the
//! disk, or a point where the circle crosses a polygon edge. Candidates are
//! kept as displacements from the disk center so that tiny radii do not
//! suffer cancellation against the absolute coordinates.

type P2 = [f64; 2];

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

struct Best {
    val: f64,
    point: P2,
}

/// Keeps the candidate with the smallest objective; near-ties (relative to
/// `tie_tol`) go to the lexicographically smallest point.
fn consider(best: &mut Option<Best>, x: P2, g: P2, disp: P2, tie_tol: f64) {
    let val = dot(g, disp);
    let point = [x[0] + disp[0], x[1] + disp[1]];
    match best {
        None => *best = Some(Best { val, point }),
        Some(b) => {
            let better = if (val - b.val).abs() <= tie_tol {
                (point[0], point[1]) < (b.point[0], b.point[1])
            } else {
                val < b.val
            };
            if better {
                *best = Some(Best { val, point });
            }
        }
    }
}

/// Disk minimizer when feasible, else the best vertex / edge-circle candidate.
/// The displacement form of each candidate is returned as a point.
pub(super) fn box_disk_lmo(lo: P2, hi: P2, x: P2, t: f64, g: P2) -> P2 {
    let gn = dot(g, g).sqrt();
    let free = [x[0] - t * g[0] / gn, x[1] - t * g[1] / gn];
    if free[0] >= lo[0] && free[0] <= hi[0] && free[1] >= lo[1] && free[1] <= hi[1] {
        return free;
    }
    let tie_tol = 1e-12 * gn * t;
    let t2 = t * t;
    let mut best = None;

    for &cx in &[lo[0], hi[0]] {
        for &cy in &[lo[1], hi[1]] {
            let disp = [cx - x[0], cy - x[1]];
            if dot(disp, disp) <= t2 {
                consider(&mut best, x, g, disp, tie_tol);
            }
        }
    }
    // horizontal edges y = const, then vertical edges x = const
    for axis in 0..2 {
        let other = 1 - axis;
        for &level in &[lo[other], hi[other]] {
            let off = level - x[other];
            let rem = t2 - off * off;
            if rem < 0.0 {
                continue;
            }
            let half = rem.sqrt();
            for s in [-half, half] {
                let along = x[axis] + s;
                if along < lo[axis] || along > hi[axis] {
                    continue;
                }
                let mut disp = [0.0; 2];
                disp[axis] = s;
                disp[other] = off;
                consider(&mut best, x, g, disp, tie_tol);
            }
        }
    }
    match best {
        Some(b) => b.point,
        // disk strictly inside the box cannot happen here (free point would be
        // feasible); fall back to the center for safety
        None => x,
    }
}

/// Same enumeration for a general convex polygon given by its vertices in
/// counter-clockwise order. `inside` decides exact membership of the disk
/// minimizer.
pub(super) fn polygon_disk_lmo(
    vertices: &[P2],
    inside: impl Fn(P2) -> bool,
    x: P2,
    t: f64,
    g: P2,
) -> P2 {
    let gn = dot(g, g).sqrt();
    let free = [x[0] - t * g[0] / gn, x[1] - t * g[1] / gn];
    if inside(free) {
        return free;
    }
    let tie_tol = 1e-12 * gn * t;
    let t2 = t * t;
    let mut best = None;
    let n = vertices.len();
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let rel = [p[0] - x[0], p[1] - x[1]];
        if dot(rel, rel) <= t2 {
            consider(&mut best, x, g, rel, tie_tol);
        }
        let d = [q[0] - p[0], q[1] - p[1]];
        let dd = dot(d, d);
        // foot of the perpendicular from x onto the edge line
        let s0 = -dot(rel, d) / dd;
        let foot = [rel[0] + s0 * d[0], rel[1] + s0 * d[1]];
        let rem = t2 - dot(foot, foot);
        if rem < 0.0 {
            continue;
        }
        let w = (rem / dd).sqrt();
        for s in [s0 - w, s0 + w] {
            if !(0.0..=1.0).contains(&s) {
                continue;
            }
            let ds = s - s0;
            let disp = [foot[0] + ds * d[0], foot[1] + ds * d[1]];
            consider(&mut best, x, g, disp, tie_tol);
        }
    }
    match best {
        Some(b) => b.point,
        None => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_minimizer_inside_box() {
        let z = box_disk_lmo([0.0, 0.0], [10.0, 10.0], [5.0, 5.0], 1.0, [3.0, 4.0]);
        assert!((z[0] - 4.4).abs() < 1e-15 && (z[1] - 4.2).abs() < 1e-15);
    }

    #[test]
    fn slides_down_the_right_edge() {
        let z = box_disk_lmo([2.0, 2.0], [4.0, 4.0], [4.0, 4.0], 0.5, [0.0, 1.0]);
        assert_eq!(z, [4.0, 3.5]);
    }

    #[test]
    fn corner_inside_disk_wins() {
        let z = box_disk_lmo([2.0, 2.0], [4.0, 4.0], [2.5, 2.5], 2.0, [1.0, 1.0]);
        assert_eq!(z, [2.0, 2.0]);
    }

    #[test]
    fn tie_on_an_edge_goes_left() {
        // g orthogonal to the bottom edge: both bottom candidates tie
        let z = box_disk_lmo([2.0, 2.0], [4.0, 4.0], [3.0, 2.0], 0.5, [0.0, 1.0]);
        assert_eq!(z, [2.5, 2.0]);
    }

    #[test]
    fn polygon_matches_box_path() {
        let verts = [[2.0, 2.0], [4.0, 2.0], [4.0, 4.0], [2.0, 4.0]];
        let inside = |p: P2| p[0] >= 2.0 && p[0] <= 4.0 && p[1] >= 2.0 && p[1] <= 4.0;
        for (x, t, g) in [
            ([4.0, 4.0], 0.7, [1.0, 2.0]),
            ([3.0, 2.1], 0.4, [-0.3, 1.0]),
            ([2.2, 3.9], 1.5, [1.0, -0.2]),
        ] {
            let a = box_disk_lmo([2.0, 2.0], [4.0, 4.0], x, t, g);
            let b = polygon_disk_lmo(&verts, inside, x, t, g);
            assert!(
                (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14,
                "{a:?} {b:?}"
            );
        }
    }
}
