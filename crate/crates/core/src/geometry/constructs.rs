//! Auxiliary geometric constructions: osculating-cap hulls of finite point
//! sets, the interior-ball depth estimate, and span bases.

use crate::error::{Error, Result};
use crate::la;

/// Cap family enclosing a finite set K ⊂ { x_m ≤ 0 } that touches the
/// origin: for each radius R the ball B_R(−ρ(R)·e_m) contains K, with
/// ρ(R) = min over K of (−x_m + √(R² − |x|² + x_m²)).
pub struct HullOracle {
    points: Vec<Vec<f64>>,
    radii: Vec<f64>,
    rhos: Vec<f64>,
}

impl HullOracle {
    /// Deepest admissible cap-center depth for radius `r`.
    pub fn rho(&self, r: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for x in &self.points {
            let m = x.len() - 1;
            let xm = x[m];
            let disc = r * r - la::dot(x, x) + xm * xm;
            if disc < 0.0 {
                return Err(Error::invalid(format!(
                    "radius {r} too small to enclose {x:?}"
                )));
            }
            best = best.min(-xm + disc.sqrt());
        }
        Ok(best)
    }

    /// Membership in the cap envelope: x lies in every ladder cap.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let m = x.len() - 1;
        self.radii.iter().zip(&self.rhos).all(|(&r, &rho)| {
            let mut shifted = x.to_vec();
            shifted[m] += rho;
            la::norm(&shifted) <= r + tol
        })
    }

    /// (R, R² − ρ(R)²) along the ladder: the cap value at the touch point.
    pub fn tail(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .zip(&self.rhos)
            .map(|(&r, &rho)| (r, r * r - rho * rho))
            .collect()
    }
}

/// Build the cap ladder for K over the given radii. Every point of K must
/// satisfy x_m ≤ 0 (the set lies below the touch point at the origin).
pub fn strictly_convex_hull(k: &[Vec<f64>], radii: &[f64]) -> Result<HullOracle> {
    if k.is_empty() || radii.is_empty() {
        return Err(Error::invalid("need a nonempty point set and radius ladder"));
    }
    let n = k[0].len();
    if k.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("points must share a dimension"));
    }
    if k.iter().any(|p| p[n - 1] > 1e-12) {
        return Err(Error::invalid("points must lie in the halfspace x_m <= 0"));
    }
    let oracle = HullOracle {
        points: k.to_vec(),
        radii: radii.to_vec(),
        rhos: Vec::new(),
    };
    let mut rhos = Vec::with_capacity(radii.len());
    let mut prev_r = f64::NEG_INFINITY;
    let mut prev_rho = f64::NEG_INFINITY;
    for &r in radii {
        if r <= prev_r {
            return Err(Error::invalid("radius ladder must be strictly increasing"));
        }
        let rho = oracle.rho(r)?;
        if rho < prev_rho - 1e-12 {
            return Err(Error::Diagnostic(format!(
                "cap depth not monotone at R = {r}"
            )));
        }
        prev_r = r;
        prev_rho = rho;
        rhos.push(rho);
    }
    Ok(HullOracle {
        rhos,
        ..oracle
    })
}

/// Interior-ball depth: two points of B̄_R at distance `dist` have their
/// t-combination at depth 2δ inside the ball, with
/// δ = (R − √(R² − t(1−t)·dist²)) / 2.
pub fn interior_ball_delta(r: f64, t: f64, dist: f64) -> Result<f64> {
    if !(r > 0.0) || !(0.0..=1.0).contains(&t) || dist < 0.0 {
        return Err(Error::invalid("need R > 0, t in [0,1], dist >= 0"));
    }
    let q = r * r - t * (1.0 - t) * dist * dist;
    if q < 0.0 {
        return Err(Error::invalid(
            "points at this distance cannot both lie in the ball",
        ));
    }
    Ok(0.5 * (r - q.sqrt()))
}

/// Orthonormal basis of the span of `vectors` by greedy Gram–Schmidt.
pub fn span_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = la::dot(&w, b);
            w = la::axpy(&w, -c, b);
        }
        if la::norm(&w) > 1e-10 {
            basis.push(la::normalize(&w));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hull_single_point_is_exact() {
        let radii = [0.5, 1.0, 2.0, 4.0, 8.0];
        let hull = strictly_convex_hull(&[vec![0.0, 0.0]], &radii).unwrap();
        for (r, v) in hull.tail() {
            assert!(v.abs() < 1e-12, "tail value {v} at R = {r}");
        }
        assert!(hull.contains(&[0.0, 0.0], 1e-12));
        assert!(hull.contains(&[0.0, -0.3], 1e-12));
        // Points strictly above the touch plane escape small caps.
        assert!(!hull.contains(&[0.0, 0.3], 1e-12));
    }

    #[test]
    fn hull_strictly_below_points_do_not_bind() {
        let k = vec![vec![0.0, 0.0], vec![0.5, -0.5], vec![-0.5, -0.5]];
        let radii = [1.0, 2.0, 4.0, 8.0, 16.0];
        let hull = strictly_convex_hull(&k, &radii).unwrap();
        // The origin binds: rho(R) = R, so the tail vanishes identically.
        for (r, v) in hull.tail() {
            assert!(v.abs() < 1e-9, "tail value {v} at R = {r}");
        }
        for p in &k {
            assert!(hull.contains(p, 1e-9));
        }
        // Depths are monotone along the ladder.
        let rho1 = hull.rho(1.0).unwrap();
        let rho16 = hull.rho(16.0).unwrap();
        assert!(rho16 > rho1);
    }

    #[test]
    fn hull_rejects_bad_inputs() {
        assert!(strictly_convex_hull(&[], &[1.0]).is_err());
        assert!(strictly_convex_hull(&[vec![0.0, 0.5]], &[1.0]).is_err());
        assert!(strictly_convex_hull(&[vec![0.0, 0.0]], &[2.0, 1.0]).is_err());
        // A wide point needs a large enough radius.
        let hull = strictly_convex_hull(&[vec![3.0, 0.0]], &[4.0]).unwrap();
        assert!(hull.rho(1.0).is_err());
    }

    #[test]
    fn interior_ball_examples() {
        let d = interior_ball_delta(1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(d, 0.5 - 3f64.sqrt() / 4.0, epsilon = 1e-12);
        assert_relative_eq!(interior_ball_delta(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(interior_ball_delta(1.0, 0.5, 5.0).is_err());
        assert!(interior_ball_delta(-1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn interior_ball_monte_carlo() {
        // Combinations of ball points sit at least 2δ deep, and the bound
        // is attained by antipodal chords.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let r = 1.3;
        let t = 0.3;
        let mut worst = f64::INFINITY;
        for _ in 0..5000 {
            let a = unit2(&mut rng);
            let b = unit2(&mut rng);
            let (a, b) = (la::scale(&a, r), la::scale(&b, r));
            let dist = la::dist(&a, &b);
            let delta = interior_ball_delta(r, t, dist).unwrap();
            let z = la::axpy(&la::scale(&a, 1.0 - t), t, &b);
            let depth = r - la::norm(&z);
            assert!(depth >= 2.0 * delta - 1e-9);
            worst = worst.min(depth - 2.0 * delta);
        }
        assert!(worst < 1e-6, "bound never tight: slack {worst}");
    }

    fn unit2(rng: &mut impl Rng) -> Vec<f64> {
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        vec![th.cos(), th.sin()]
    }

    #[test]
    fn span_basis_examples() {
        let b = span_basis(&[
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert_relative_eq!(la::norm(v), 1.0, epsilon = 1e-12);
            assert!(v[2].abs() < 1e-12);
        }
        assert!(la::dot(&b[0], &b[1]).abs() < 1e-12);
        assert!(span_basis(&[vec![0.0, 0.0]]).is_empty());
    }
}
