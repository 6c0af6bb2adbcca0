//! Convex-domain representations: membership, support functions, normals,
//! boundary sampling, and the JSON domain-specification schema.
//!
//! Classification (flatness dimension, C_j / G_j) lives in [`classify`],
//! the barrier constructions (ψ, lifted supersolutions, Φ) in [`barrier`],
//! and the auxiliary geometric constructions in [`constructs`].

mod barrier;
mod classify;
mod constructs;

pub use barrier::{
    lifted_supersolution, psi_value, subsolution_phi, validate_boundary_cover, CylinderLift,
    SearchConfig,
};
pub use classify::{classify, flatness_dimension, gj_probe, Classification};
pub use constructs::{interior_ball_delta, span_basis, strictly_convex_hull, HullOracle};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la;
use crate::matrix::{eigenvalues_sorted, SymMatrix};

/// A bounded convex domain in ℝ² or ℝ³ (cylinders alone are unbounded and
/// appear as members of intersections or as lift bases).
#[derive(Debug, Clone)]
pub enum ConvexBody {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        center: Vec<f64>,
        /// Positive-definite shape matrix A, row-major: the body is
        /// (x−c)ᵀ A (x−c) < 1.
        shape: Vec<f64>,
        /// Cached A⁻¹ for support evaluation.
        inv_shape: Vec<f64>,
    },
    HPolytope {
        /// (unit outward normal, offset): n·x ≤ o.
        halfspaces: Vec<(Vec<f64>, f64)>,
        vertices: Vec<Vec<f64>>,
    },
    Cylinder {
        /// Orthogonal N×N rotation O, row-major: the body is
        /// { x : (Oᵀx)[..j] ∈ base } with j = N − axis_dim.
        rotation: Vec<f64>,
        base: Box<ConvexBody>,
        axis_dim: usize,
    },
    Intersection(Vec<ConvexBody>),
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        if !(2..=3).contains(&center.len()) {
            return Err(Error::invalid("dimension must be 2 or 3"));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    /// Ellipsoid (x−c)ᵀ A (x−c) < 1 with A positive definite (row-major).
    pub fn ellipsoid(center: Vec<f64>, shape: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if !(2..=3).contains(&n) {
            return Err(Error::invalid("dimension must be 2 or 3"));
        }
        if shape.len() != n * n {
            return Err(Error::invalid("shape matrix size mismatch"));
        }
        let m = SymMatrix::from_rows(n, &shape)?;
        let evs = eigenvalues_sorted(&m);
        if evs.values()[0] <= 1e-12 {
            return Err(Error::invalid("shape matrix must be positive definite"));
        }
        // Symmetrized entries and the inverse, column by column.
        let sym: Vec<f64> = (0..n * n).map(|i| m.get(i / n, i % n)).collect();
        let mut inv = vec![0.0; n * n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = la::solve(n, &sym, &e).ok_or_else(|| Error::invalid("singular shape"))?;
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        Ok(ConvexBody::Ellipsoid {
            center,
            shape: sym,
            inv_shape: inv,
        })
    }

    /// Axis-aligned ellipsoid with the given semiaxes.
    pub fn ellipsoid_axes(center: Vec<f64>, semiaxes: &[f64]) -> Result<Self> {
        let n = center.len();
        if semiaxes.len() != n {
            return Err(Error::invalid("semiaxes length mismatch"));
        }
        let mut shape = vec![0.0; n * n];
        for (i, &a) in semiaxes.iter().enumerate() {
            if !(a > 0.0) {
                return Err(Error::invalid("semiaxes must be positive"));
            }
            shape[i * n + i] = 1.0 / (a * a);
        }
        ConvexBody::ellipsoid(center, shape)
    }

    /// Bounded polytope { x : nᵢ·x ≤ oᵢ } with nonempty interior; the
    /// normals are normalized and the vertex set is enumerated (2-D/3-D).
    pub fn hpolytope(halfspaces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = halfspaces
            .first()
            .ok_or_else(|| Error::invalid("polytope needs at least one halfspace"))?
            .0
            .len();
        if !(2..=3).contains(&n) {
            return Err(Error::invalid("dimension must be 2 or 3"));
        }
        let mut hs = Vec::with_capacity(halfspaces.len());
        for (normal, off) in halfspaces {
            if normal.len() != n {
                return Err(Error::invalid("halfspace normal dimension mismatch"));
            }
            let len = la::norm(&normal);
            if len < 1e-12 {
                return Err(Error::invalid("zero halfspace normal"));
            }
            hs.push((la::scale(&normal, 1.0 / len), off / len));
        }
        let vertices = enumerate_vertices(n, &hs)?;
        if vertices.is_empty() {
            return Err(Error::invalid("polytope has no vertices"));
        }
        if let Some(dir) = recession_direction(n, &hs) {
            return Err(Error::invalid(format!(
                "polytope unbounded along {dir:?}"
            )));
        }
        // Nonempty interior: the vertex centroid must be strictly feasible.
        let mut centroid = vec![0.0; n];
        for v in &vertices {
            centroid = la::add(&centroid, v);
        }
        centroid = la::scale(&centroid, 1.0 / vertices.len() as f64);
        let worst = hs
            .iter()
            .map(|(nr, o)| la::dot(nr, &centroid) - o)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst >= -1e-10 {
            return Err(Error::invalid("polytope has empty interior"));
        }
        Ok(ConvexBody::HPolytope {
            halfspaces: hs,
            vertices,
        })
    }

    /// Axis-aligned box (a₁,b₁)×…×(a_N,b_N).
    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = lo.len();
        let mut hs = Vec::new();
        for i in 0..n {
            let mut plus = vec![0.0; n];
            plus[i] = 1.0;
            let mut minus = vec![0.0; n];
            minus[i] = -1.0;
            hs.push((plus, hi[i]));
            hs.push((minus, -lo[i]));
        }
        ConvexBody::hpolytope(hs)
    }

    /// Rotated cylinder base × ℝ^{axis_dim}; the base must be strictly
    /// convex (Ball or Ellipsoid).
    pub fn cylinder(rotation: Vec<f64>, base: ConvexBody, axis_dim: usize) -> Result<Self> {
        let j = base.dim();
        let n = j + axis_dim;
        if !(2..=3).contains(&n) || axis_dim == 0 {
            return Err(Error::invalid("cylinder must live in ℝ²/ℝ³ with axis_dim ≥ 1"));
        }
        if !matches!(base, ConvexBody::Ball { .. } | ConvexBody::Ellipsoid { .. }) {
            return Err(Error::invalid("cylinder base must be a ball or ellipsoid"));
        }
        if rotation.len() != n * n || !la::is_orthogonal(n, &rotation, 1e-9) {
            return Err(Error::invalid("cylinder rotation must be orthogonal N×N"));
        }
        Ok(ConvexBody::Cylinder {
            rotation,
            base: Box::new(base),
            axis_dim,
        })
    }

    pub fn intersection(members: Vec<ConvexBody>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::invalid("intersection needs members"))?
            .dim();
        if members.iter().any(|m| m.dim() != n) {
            return Err(Error::invalid("intersection members must share dimension"));
        }
        Ok(ConvexBody::Intersection(members))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Ellipsoid { center, .. } => center.len(),
            ConvexBody::HPolytope { halfspaces, .. } => halfspaces[0].0.len(),
            ConvexBody::Cylinder { base, axis_dim, .. } => base.dim() + axis_dim,
            ConvexBody::Intersection(members) => members[0].dim(),
        }
    }

    /// True iff x lies in the open interior.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.boundary_gap(x) < 0.0
    }

    /// Continuous function, negative inside, zero on the boundary,
    /// positive outside (not a metric distance).
    pub fn boundary_gap(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => la::dist(x, center) - radius,
            ConvexBody::Ellipsoid { center, shape, .. } => {
                let d = la::sub(x, center);
                let n = center.len();
                la::dot(&la::matvec(n, shape, &d), &d).sqrt() - 1.0
            }
            ConvexBody::HPolytope { halfspaces, .. } => halfspaces
                .iter()
                .map(|(nr, o)| la::dot(nr, x) - o)
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Cylinder {
                rotation, base, ..
            } => {
                let n = self.dim();
                let z = la::matvec_t(n, rotation, x);
                base.boundary_gap(&z[..base.dim()])
            }
            ConvexBody::Intersection(members) => members
                .iter()
                .map(|m| m.boundary_gap(x))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Support function: sup of x·direction over the closure. Unbounded
    /// supports (bare cylinders along their axis) return +∞.
    pub fn support(&self, direction: &[f64]) -> Result<f64> {
        if (la::norm(direction) - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("support direction must be a unit vector"));
        }
        Ok(self.support_raw(direction))
    }

    /// Positively homogeneous support without the unit-length check.
    fn support_raw(&self, d: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius } => la::dot(center, d) + radius * la::norm(d),
            ConvexBody::Ellipsoid {
                center, inv_shape, ..
            } => {
                let n = center.len();
                la::dot(center, d) + la::dot(&la::matvec(n, inv_shape, d), d).max(0.0).sqrt()
            }
            ConvexBody::HPolytope { vertices, .. } => vertices
                .iter()
                .map(|v| la::dot(v, d))
                .fold(f64::NEG_INFINITY, f64::max),
            ConvexBody::Cylinder {
                rotation,
                base,
                axis_dim,
            } => {
                let n = self.dim();
                let e = la::matvec_t(n, rotation, d);
                let j = n - axis_dim;
                let axis_part = la::norm(&e[j..]);
                if axis_part > 1e-12 * la::norm(d).max(1.0) {
                    f64::INFINITY
                } else {
                    base.support_raw(&e[..j])
                }
            }
            ConvexBody::Intersection(members) => members
                .iter()
                .map(|m| m.support_raw(d))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Axis-aligned bounding box (lo, hi), computed from axis supports.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            hi[i] = self.support_raw(&e);
            e[i] = -1.0;
            lo[i] = -self.support_raw(&e);
        }
        (lo, hi)
    }

    /// Diameter of the bounding box (∞ for unbounded bodies).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        la::dist(&hi, &lo)
    }

    pub fn is_bounded(&self) -> bool {
        self.diameter().is_finite()
    }

    /// A point in the open interior.
    pub fn interior_point(&self) -> Result<Vec<f64>> {
        let candidate = match self {
            ConvexBody::Ball { center, .. } | ConvexBody::Ellipsoid { center, .. } => {
                center.clone()
            }
            ConvexBody::HPolytope { vertices, .. } => {
                let n = self.dim();
                let mut c = vec![0.0; n];
                for v in vertices {
                    c = la::add(&c, v);
                }
                la::scale(&c, 1.0 / vertices.len() as f64)
            }
            ConvexBody::Cylinder { rotation, base, .. } => {
                let n = self.dim();
                let mut z = base.interior_point()?;
                z.resize(n, 0.0);
                la::matvec(n, rotation, &z)
            }
            ConvexBody::Intersection(members) => {
                let n = self.dim();
                let mut c = vec![0.0; n];
                for m in members {
                    c = la::add(&c, &m.interior_point()?);
                }
                la::scale(&c, 1.0 / members.len() as f64)
            }
        };
        if self.contains(&candidate) {
            return Ok(candidate);
        }
        // Fall back to a deterministic random search in the bounding box.
        let (lo, hi) = self.bounding_box();
        if !la::norm(&lo).is_finite() || !la::norm(&hi).is_finite() {
            return Err(Error::invalid("cannot locate interior point of unbounded body"));
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x1337);
        for _ in 0..100_000 {
            let p: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| rng.gen_range(a..b))
                .collect();
            if self.contains(&p) {
                return Ok(p);
            }
        }
        Err(Error::invalid("no interior point found"))
    }

    /// Boundary point along the ray from `from` (interior) through direction
    /// `dir`, located by bisection on containment.
    pub fn boundary_along(&self, from: &[f64], dir: &[f64]) -> Result<Vec<f64>> {
        if !self.contains(from) {
            return Err(Error::invalid("ray origin must be interior"));
        }
        let d = la::normalize(dir);
        let diam = self.diameter();
        if !diam.is_finite() {
            return Err(Error::invalid("unbounded body"));
        }
        let mut t_lo = 0.0;
        let mut t_hi = diam;
        // The boundary crossing is unique by convexity.
        for _ in 0..100 {
            let mid = 0.5 * (t_lo + t_hi);
            if self.contains(&la::axpy(from, mid, &d)) {
                t_lo = mid;
            } else {
                t_hi = mid;
            }
        }
        Ok(la::axpy(from, 0.5 * (t_lo + t_hi), &d))
    }

    /// A random boundary point (uniform direction from an interior point).
    pub fn boundary_sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let p = self.interior_point()?;
        let n = self.dim();
        loop {
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            if la::norm(&d) > 1e-3 {
                return self.boundary_along(&p, &d);
            }
        }
    }

    /// Unit outward normal at a boundary point. For intersections and
    /// polytope corners, any active member/facet normal is returned.
    pub fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConvexBody::Ball { center, .. } => la::normalize(&la::sub(x, center)),
            ConvexBody::Ellipsoid { center, shape, .. } => {
                let n = center.len();
                la::normalize(&la::matvec(n, shape, &la::sub(x, center)))
            }
            ConvexBody::HPolytope { halfspaces, .. } => {
                let (nr, _) = halfspaces
                    .iter()
                    .max_by(|a, b| {
                        let ga = la::dot(&a.0, x) - a.1;
                        let gb = la::dot(&b.0, x) - b.1;
                        ga.partial_cmp(&gb).unwrap()
                    })
                    .unwrap();
                nr.clone()
            }
            ConvexBody::Cylinder {
                rotation, base, ..
            } => {
                let n = self.dim();
                let z = la::matvec_t(n, rotation, x);
                let mut nb = base.outward_normal(&z[..base.dim()]);
                nb.resize(n, 0.0);
                la::matvec(n, rotation, &nb)
            }
            ConvexBody::Intersection(members) => {
                let active = members
                    .iter()
                    .max_by(|a, b| {
                        a.boundary_gap(x).partial_cmp(&b.boundary_gap(x)).unwrap()
                    })
                    .unwrap();
                active.outward_normal(x)
            }
        }
    }
}

/// Vertices of a small H-polytope by exhaustive facet-pair/triple solves.
fn enumerate_vertices(n: usize, hs: &[(Vec<f64>, f64)]) -> Result<Vec<Vec<f64>>> {
    let m = hs.len();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut push_if_feasible = |p: Vec<f64>| {
        let feasible = hs.iter().all(|(nr, o)| la::dot(nr, &p) <= o + 1e-9);
        if feasible && !vertices.iter().any(|v| la::dist(v, &p) < 1e-9) {
            vertices.push(p);
        }
    };
    if n == 2 {
        for i in 0..m {
            for j in (i + 1)..m {
                let a = [hs[i].0[0], hs[i].0[1], hs[j].0[0], hs[j].0[1]];
                if let Some(p) = la::solve(2, &a, &[hs[i].1, hs[j].1]) {
                    push_if_feasible(p);
                }
            }
        }
    } else {
        for i in 0..m {
            for j in (i + 1)..m {
                for l in (j + 1)..m {
                    let mut a = Vec::with_capacity(9);
                    a.extend_from_slice(&hs[i].0);
                    a.extend_from_slice(&hs[j].0);
                    a.extend_from_slice(&hs[l].0);
                    if let Some(p) = la::solve(3, &a, &[hs[i].1, hs[j].1, hs[l].1]) {
                        push_if_feasible(p);
                    }
                }
            }
        }
    }
    Ok(vertices)
}

/// A direction of unboundedness (extreme recession ray), if one exists.
fn recession_direction(n: usize, hs: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let ok = |d: &[f64]| hs.iter().all(|(nr, _)| la::dot(nr, d) <= 1e-10);
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    if n == 2 {
        for (nr, _) in hs {
            candidates.push(vec![-nr[1], nr[0]]);
            candidates.push(vec![nr[1], -nr[0]]);
            candidates.push(la::scale(nr, -1.0));
        }
    } else {
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                let c = la::cross(&hs[i].0, &hs[j].0);
                if la::norm(&c) > 1e-10 {
                    candidates.push(la::normalize(&c));
                    candidates.push(la::scale(&la::normalize(&c), -1.0));
                }
            }
            candidates.push(la::scale(&hs[i].0, -1.0));
        }
    }
    candidates.into_iter().find(|d| ok(d))
}

/// JSON domain-specification schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: usize,
    pub body: BodySpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        center: Vec<f64>,
        /// Rows of the positive-definite shape matrix.
        shape: Vec<Vec<f64>>,
    },
    Hpolytope {
        halfspaces: Vec<HalfspaceSpec>,
    },
    Cylinder {
        rotation: Vec<Vec<f64>>,
        base: Box<BodySpec>,
        axis_dim: usize,
    },
    Intersection {
        members: Vec<BodySpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfspaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl DomainSpec {
    pub fn to_body(&self) -> Result<ConvexBody> {
        let body = self.body.to_body()?;
        if body.dim() != self.dim {
            return Err(Error::invalid(format!(
                "spec dim {} does not match body dim {}",
                self.dim,
                body.dim()
            )));
        }
        Ok(body)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad domain spec: {e}")))
    }
}

impl BodySpec {
    pub fn to_body(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            BodySpec::Ellipsoid { center, shape } => {
                let flat: Vec<f64> = shape.iter().flatten().copied().collect();
                ConvexBody::ellipsoid(center.clone(), flat)
            }
            BodySpec::Hpolytope { halfspaces } => ConvexBody::hpolytope(
                halfspaces
                    .iter()
                    .map(|h| (h.normal.clone(), h.offset))
                    .collect(),
            ),
            BodySpec::Cylinder {
                rotation,
                base,
                axis_dim,
            } => {
                let flat: Vec<f64> = rotation.iter().flatten().copied().collect();
                ConvexBody::cylinder(flat, base.to_body()?, *axis_dim)
            }
            BodySpec::Intersection { members } => ConvexBody::intersection(
                members
                    .iter()
                    .map(|m| m.to_body())
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}
