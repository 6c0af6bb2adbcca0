//! Flatness dimension, C_j / G_j classification, and the randomized G_j
//! falsification probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::la;

/// Classification data for a convex body in ℝ^N.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Flatness dimension d: the largest dimension of an affine ball
    /// contained in the boundary (0 = strictly convex).
    pub d: usize,
    /// Largest j with the body in class C_j; always N − d.
    pub cj_max: usize,
    /// gj[j−1] ⇔ the G_j line-intersection condition holds, j = 1..N−1.
    pub gj: Vec<bool>,
}

impl Classification {
    pub fn gj(&self, j: usize) -> bool {
        self.gj[j - 1]
    }
}

/// Flatness dimension d(Ω) by per-variant rules; intersections fall back to
/// a randomized boundary line-probe.
pub fn flatness_dimension(body: &ConvexBody) -> Result<usize> {
    let n = body.dim();
    match body {
        ConvexBody::Ball { .. } | ConvexBody::Ellipsoid { .. } => Ok(0),
        ConvexBody::HPolytope { .. } => Ok(n - 1),
        ConvexBody::Cylinder { axis_dim, .. } => Ok(*axis_dim),
        ConvexBody::Intersection(members) => {
            if !body.is_bounded() {
                return Err(Error::invalid(
                    "flatness probe requires a bounded intersection",
                ));
            }
            // Flat pieces of the intersection boundary lie on some member's
            // boundary, so the members' flatness caps the answer.
            let cap = members
                .iter()
                .map(flatness_dimension)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(0);
            let probed = probe_flatness(body, 400, 0xF1A7)?;
            Ok(probed.min(cap))
        }
    }
}

/// Randomized boundary probe: max dimension of a flat tangent subspace
/// found over sampled boundary points.
fn probe_flatness(body: &ConvexBody, samples: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = body.dim();
    let p = body.interior_point()?;
    let diam = body.diameter();
    let eps = 1e-3 * diam;
    let tol = 1e-8 * diam.max(1.0);
    let mut best = 0usize;
    for _ in 0..samples {
        let y = body.boundary_sample(&mut rng)?;
        let nu = body.outward_normal(&y);
        let tangent = tangent_basis(&nu);
        let dev = |d: &[f64]| -> f64 {
            let mut worst: f64 = 0.0;
            for &s in &[-1.0f64, -0.5, 0.5, 1.0] {
                let z = la::axpy(&y, s * eps, d);
                let ray = la::sub(&z, &p);
                match body.boundary_along(&p, &ray) {
                    Ok(crossing) => worst = worst.max(la::dist(&z, &crossing)),
                    Err(_) => worst = f64::INFINITY,
                }
            }
            worst
        };
        let found = if n == 2 {
            usize::from(dev(&tangent[0]) <= tol)
        } else {
            // Estimate the second fundamental form on the tangent plane and
            // count its near-null directions, confirming each by marching.
            let (t1, t2) = (&tangent[0], &tangent[1]);
            let mix = la::normalize(&la::add(t1, t2));
            let q11 = dev(t1);
            let q22 = dev(t2);
            let qmm = dev(&mix);
            if q11 <= tol && q22 <= tol && qmm <= tol {
                2
            } else {
                // Null direction of the quadratic form a x² + 2m xy + b y².
                let (a, b) = (q11, q22);
                let m = qmm - 0.5 * (a + b);
                let mut flat = 0usize;
                for &(ca, cb) in &[(1.0, 0.0), (0.0, 1.0)] {
                    let d = la::normalize(&la::add(&la::scale(t1, ca), &la::scale(t2, cb)));
                    if dev(&d) <= tol {
                        flat = 1;
                    }
                }
                if flat == 0 && (a - b).abs() + m.abs() > 0.0 {
                    // Candidate null direction from diagonalizing the form.
                    let theta = 0.5 * (2.0 * m).atan2(a - b);
                    for &t in &[theta, theta + std::f64::consts::FRAC_PI_2] {
                        let d = la::normalize(&la::add(
                            &la::scale(t1, t.cos()),
                            &la::scale(t2, t.sin()),
                        ));
                        if dev(&d) <= tol {
                            flat = 1;
                        }
                    }
                }
                flat
            }
        };
        best = best.max(found);
        if best == n - 1 {
            break;
        }
    }
    Ok(best)
}

/// Orthonormal basis of the hyperplane orthogonal to `nu`.
fn tangent_basis(nu: &[f64]) -> Vec<Vec<f64>> {
    let n = nu.len();
    if n == 2 {
        vec![vec![-nu[1], nu[0]]]
    } else {
        // Pick the coordinate axis least aligned with nu as a seed.
        let mut seed = vec![0.0; 3];
        let i = (0..3)
            .min_by(|&a, &b| nu[a].abs().partial_cmp(&nu[b].abs()).unwrap())
            .unwrap();
        seed[i] = 1.0;
        let t1 = la::normalize(&la::axpy(&seed, -la::dot(&seed, nu), nu));
        let t2 = la::cross(nu, &t1);
        vec![t1, t2]
    }
}

/// Full classification: d(Ω), largest C_j class, and the derived G_j flags.
pub fn classify(body: &ConvexBody) -> Result<Classification> {
    let n = body.dim();
    let d = flatness_dimension(body)?;
    let cj_max = n - d;
    let gj = (1..n).map(|j| d <= j - 1).collect();
    Ok(Classification { d, cj_max, gj })
}

/// Randomized falsification probe of the G_j condition: samples boundary
/// points y, radii r, near-boundary points x, and j-dimensional direction
/// spaces S; returns false if some (x, S) is found whose whole line family
/// misses B_r(y) ∩ ∂Ω.
pub fn gj_probe(body: &ConvexBody, j: usize, samples: usize, seed: u64) -> Result<bool> {
    let n = body.dim();
    if j == 0 || j >= n {
        return Err(Error::invalid(format!("j must be in 1..={} for N={n}", n - 1)));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    if !body.is_bounded() {
        return Err(Error::invalid("gj_probe requires a bounded body"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diam = body.diameter();
    for _ in 0..samples {
        let y = body.boundary_sample(&mut rng)?;
        let nu = body.outward_normal(&y);
        let r = rng.gen_range(0.05..0.25) * diam;
        // Keep x close enough to the boundary that a transversal line must
        // cross ∂Ω inside B_r(y) whenever the boundary curves.
        let s = (0.05 * r * r / diam).min(0.25 * r);
        let x = la::axpy(&y, -s, &nu);
        if !body.contains(&x) {
            continue;
        }
        // Direction space S: half the draws come from the tangent space at
        // y (where flat-boundary witnesses live), half are uniform.
        let tangent_draw = rng.gen_bool(0.5);
        let dirs: Vec<Vec<f64>> = if j == 1 {
            let v = if tangent_draw {
                random_tangent(&nu, &mut rng)
            } else {
                random_unit(n, &mut rng)
            };
            vec![v]
        } else {
            // j == 2, N == 3: span two directions; sample lines inside.
            let (b1, b2) = if tangent_draw {
                let t = tangent_basis(&nu);
                (t[0].clone(), t[1].clone())
            } else {
                let v1 = random_unit(n, &mut rng);
                let mut v2 = random_unit(n, &mut rng);
                v2 = la::axpy(&v2, -la::dot(&v2, &v1), &v1);
                if la::norm(&v2) < 1e-6 {
                    continue;
                }
                (v1, la::normalize(&v2))
            };
            (0..16)
                .map(|i| {
                    let th = std::f64::consts::PI * i as f64 / 16.0;
                    la::normalize(&la::add(
                        &la::scale(&b1, th.cos()),
                        &la::scale(&b2, th.sin()),
                    ))
                })
                .collect()
        };
        let mut hit = false;
        'dirs: for v in &dirs {
            // Bounded line-marching: look for a containment sign change of
            // x + t v with the crossing inside B_r(y).
            let steps = 400;
            for side in [1.0f64, -1.0] {
                // t = 0 is x, interior.
                let mut prev_inside = true;
                let mut prev_t = 0.0f64;
                for i in 1..=steps {
                    let t = side * 2.0 * r * i as f64 / steps as f64;
                    let inside = body.contains(&la::axpy(&x, t, v));
                    if inside != prev_inside {
                        // Refine the crossing.
                        let (mut a, mut b) = (prev_t, t);
                        for _ in 0..40 {
                            let m = 0.5 * (a + b);
                            if body.contains(&la::axpy(&x, m, v)) == prev_inside {
                                a = m;
                            } else {
                                b = m;
                            }
                        }
                        let crossing = la::axpy(&x, 0.5 * (a + b), v);
                        if la::dist(&crossing, &y) <= r {
                            hit = true;
                            break 'dirs;
                        }
                        break;
                    }
                    prev_inside = inside;
                    prev_t = t;
                }
            }
        }
        if !hit {
            return Ok(false); // witness (x, S) found: G_j fails
        }
    }
    Ok(true)
}

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
        let len = la::norm(&v);
        if len > 1e-3 {
            return la::scale(&v, 1.0 / len);
        }
    }
}

fn random_tangent(nu: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let basis = tangent_basis(nu);
    if basis.len() == 1 {
        return basis[0].clone();
    }
    let th = rng.gen_range(0.0..std::f64::consts::PI);
    la::normalize(&la::add(
        &la::scale(&basis[0], th.cos()),
        &la::scale(&basis[1], th.sin()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> ConvexBody {
        ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap()
    }
    fn square() -> ConvexBody {
        ConvexBody::cuboid(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }
    fn cube() -> ConvexBody {
        ConvexBody::cuboid(vec![-1.0, -1.0, -1.0], vec![1.0, 1.0, 1.0]).unwrap()
    }
    fn ball3() -> ConvexBody {
        ConvexBody::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap()
    }
    fn ellipse_cylinder() -> ConvexBody {
        let base = ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0, 1.0]).unwrap();
        let eye = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        ConvexBody::cylinder(eye, base, 1).unwrap()
    }
    fn capped_cylinder() -> ConvexBody {
        ConvexBody::intersection(vec![
            ellipse_cylinder(),
            ConvexBody::ball(vec![0.0, 0.0, 0.0], 3.0).unwrap(),
        ])
        .unwrap()
    }
    fn lens() -> ConvexBody {
        ConvexBody::intersection(vec![
            ConvexBody::ball(vec![-0.5, 0.0], 1.0).unwrap(),
            ConvexBody::ball(vec![0.5, 0.0], 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn classification_table() {
        let c = classify(&disk()).unwrap();
        assert_eq!((c.d, c.cj_max), (0, 2));
        let c = classify(&square()).unwrap();
        assert_eq!((c.d, c.cj_max), (1, 1));
        assert!(!c.gj(1));
        let c = classify(&cube()).unwrap();
        assert_eq!((c.d, c.cj_max), (2, 1));
        let c = classify(&ball3()).unwrap();
        assert_eq!((c.d, c.cj_max), (0, 3));
        assert!(c.gj(1) && c.gj(2));
        let c = classify(&ellipse_cylinder()).unwrap();
        assert_eq!((c.d, c.cj_max), (1, 2));
        assert!(!c.gj(1));
        assert!(c.gj(2));
    }

    #[test]
    fn intersection_flatness_probe() {
        assert_eq!(flatness_dimension(&lens()).unwrap(), 0);
        assert_eq!(flatness_dimension(&capped_cylinder()).unwrap(), 1);
        // Square expressed as an intersection of two rectangles.
        let sq = ConvexBody::intersection(vec![
            ConvexBody::cuboid(vec![-1.0, -2.0], vec![1.0, 2.0]).unwrap(),
            ConvexBody::cuboid(vec![-2.0, -1.0], vec![2.0, 1.0]).unwrap(),
        ])
        .unwrap();
        assert_eq!(flatness_dimension(&sq).unwrap(), 1);
    }

    #[test]
    fn gj_probe_matches_classification() {
        let bodies: Vec<(ConvexBody, &str)> = vec![
            (disk(), "disk"),
            (square(), "square"),
            (cube(), "cube"),
            (ball3(), "ball3"),
            (lens(), "lens"),
            (capped_cylinder(), "capped-cylinder"),
        ];
        for (body, name) in &bodies {
            let c = classify(body).unwrap();
            let n = body.dim();
            for j in 1..n {
                let probe = gj_probe(body, j, 2000, 42).unwrap();
                assert_eq!(
                    probe,
                    c.gj(j),
                    "{name}: probe disagrees with classification at j={j}"
                );
            }
        }
    }

    #[test]
    fn probe_rejects_bad_args() {
        assert!(gj_probe(&disk(), 0, 10, 1).is_err());
        assert!(gj_probe(&disk(), 2, 10, 1).is_err());
        assert!(gj_probe(&disk(), 1, 0, 1).is_err());
    }
}
