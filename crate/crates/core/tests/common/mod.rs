#![allow(dead_code)]

use local_lmo::objectives::{Constants, Objective};
use local_lmo::{ConstraintSet, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FAMILIES: [&str; 11] = [
    "WholeSpace",
    "Singleton",
    "AffineSubspace",
    "Hyperplane",
    "AffineLine",
    "Ray",
    "Segment",
    "EuclideanBall",
    "Box",
    "Slab",
    "L1Ball",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vector {
    Vector::from((0..d).map(|_| rng.gen_range(lo..hi)).collect::<Vec<_>>())
}

pub fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    loop {
        let v = uniform(rng, d, -1.0, 1.0);
        let n = v.norm();
        if n > 0.1 {
            return v.scale(1.0 / n);
        }
    }
}

/// `k` orthonormal vectors by Gram-Schmidt.
pub fn orthonormal(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v = uniform(rng, d, -1.0, 1.0);
        for b in &basis {
            v = v.axpy(-v.dot(b), b);
        }
        for b in &basis {
            v = v.axpy(-v.dot(b), b);
        }
        let n = v.norm();
        if n > 0.1 {
            basis.push(v.scale(1.0 / n));
        }
    }
    basis
}

pub fn random_set(rng: &mut ChaCha8Rng, family: &str, d: usize) -> ConstraintSet {
    let p = |rng: &mut ChaCha8Rng| uniform(rng, d, -3.0, 3.0);
    let set = match family {
        "WholeSpace" => ConstraintSet::WholeSpace { dim: d },
        "Singleton" => ConstraintSet::Singleton { c: p(rng) },
        "AffineSubspace" => {
            let k = rng.gen_range(1..=d);
            ConstraintSet::AffineSubspace {
                a: p(rng),
                basis: orthonormal(rng, d, k),
            }
        }
        "Hyperplane" => ConstraintSet::Hyperplane {
            a: unit(rng, d).scale(rng.gen_range(0.5..2.0)),
            b: rng.gen_range(-2.0..2.0),
        },
        "AffineLine" => ConstraintSet::AffineLine {
            a: p(rng),
            v: unit(rng, d),
        },
        "Ray" => ConstraintSet::Ray {
            a: p(rng),
            v: unit(rng, d),
        },
        "Segment" => {
            let a = p(rng);
            let b = a.axpy(rng.gen_range(0.2..4.0), &unit(rng, d));
            ConstraintSet::Segment { a, b }
        }
        "EuclideanBall" => ConstraintSet::EuclideanBall {
            c: p(rng),
            r: rng.gen_range(0.2..3.0),
        },
        "Box" => {
            let lo = p(rng);
            let hi = lo.zip_map(&uniform(rng, d, 0.1, 3.0), |a, w| a + w);
            ConstraintSet::Box { lo, hi }
        }
        "Slab" => {
            let a = unit(rng, d).scale(rng.gen_range(0.5..2.0));
            let l = rng.gen_range(-2.0..1.0);
            let r = l + rng.gen_range(0.1..3.0);
            let (l, r) = match rng.gen_range(0..4) {
                0 => (f64::NEG_INFINITY, r),
                1 => (l, f64::INFINITY),
                _ => (l, r),
            };
            ConstraintSet::Slab { a, l, r }
        }
        "L1Ball" => ConstraintSet::L1Ball {
            c: p(rng),
            r: rng.gen_range(0.2..3.0),
        },
        other => panic!("unknown family {other}"),
    };
    set.validated().expect("generated set is valid")
}

/// A feasible point: either a random point that happens to be inside or the
/// projection of one.
pub fn feasible_point(rng: &mut ChaCha8Rng, set: &ConstraintSet) -> Vector {
    let d = set.dim();
    let p = uniform(rng, d, -5.0, 5.0);
    if rng.gen_bool(0.5) && set.contains(&p, 0.0).unwrap() {
        return p;
    }
    set.project(&p).unwrap()
}

/// Random symmetric matrix with spectrum in `[mu, l]`, both ends attained.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, mu: f64, l: f64) -> Vec<Vec<f64>> {
    let u = orthonormal(rng, d, d);
    let mut eig: Vec<f64> = (0..d).map(|_| rng.gen_range(mu..l)).collect();
    eig[0] = l;
    if d > 1 {
        eig[1] = mu;
    } else {
        eig[0] = l;
    }
    let mut m = vec![vec![0.0; d]; d];
    for (lam, v) in eig.iter().zip(&u) {
        for i in 0..d {
            for j in 0..d {
                m[i][j] += lam * v[i] * v[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            let s = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    m
}

/// Strongly convex quadratic whose minimizer over `set` is known exactly:
/// `x⋆ = Proj(p)` and the linear term makes `-∇f(x⋆)` a normal direction.
pub fn quadratic_with_optimum(rng: &mut ChaCha8Rng, set: &ConstraintSet) -> Objective {
    let d = set.dim();
    let mu = rng.gen_range(0.1..1.0);
    let l = rng.gen_range(2.0..50.0);
    let q = random_spd(rng, d, mu, l);
    let p = uniform(rng, d, -5.0, 5.0);
    let x_star = set.project(&p).unwrap();
    let normal = &p - &x_star;
    let s = rng.gen_range(0.0..3.0);
    let qx = Vector::from(
        (0..d)
            .map(|i| (0..d).map(|j| q[i][j] * x_star[j]).sum())
            .collect::<Vec<f64>>(),
    );
    let linear = (&normal.scale(-s)) - &qx;
    // with d = 1 the spectrum is the single value l
    let mu = if d == 1 { l } else { mu };
    Objective::quadratic(q, linear, 0.0)
        .with_constants(Constants {
            l: Some(l),
            mu: Some(mu),
            ..Default::default()
        })
        .with_optimum_at(x_star)
        .unwrap()
}
