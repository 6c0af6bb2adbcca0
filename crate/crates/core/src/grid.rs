//! Lattice grids over convex domains: node masks, wide-stencil direction
//! sets, shortened boundary arms, and the discrete directional operators
//! consumed by the solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::la;

/// Minimal domain interface needed by the grid: membership, a bounding box,
/// and outward normals for boundary diagnostics.
pub trait Domain: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>);
    fn outward_normal(&self, x: &[f64]) -> Vec<f64>;
    fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        la::dist(&hi, &lo)
    }
}

impl Domain for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }
    fn contains(&self, x: &[f64]) -> bool {
        ConvexBody::contains(self, x)
    }
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        ConvexBody::bounding_box(self)
    }
    fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        ConvexBody::outward_normal(self, x)
    }
}

/// Strictly convex 2-D domain { x⁴ < y < 2 − x² } whose lower boundary is
/// flatter than any parabola at the origin.
pub struct QuarticFlat;

impl Domain for QuarticFlat {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, x: &[f64]) -> bool {
        let (u, v) = (x[0], x[1]);
        u.abs() < 1.0 && v > u.powi(4) && v < 2.0 - u * u
    }
    fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0, 0.0], vec![1.0, 2.0])
    }
    fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        let u = x[0];
        // Pick the closer arc: lower y = u⁴ or upper y = 2 − u².
        if (x[1] - u.powi(4)).abs() < (x[1] - (2.0 - u * u)).abs() {
            la::normalize(&[4.0 * u.powi(3), -1.0])
        } else {
            la::normalize(&[2.0 * u, 1.0])
        }
    }
}

/// One stencil arm from an interior node: either another lattice node or a
/// boundary crossing at fraction ρ ∈ (0, 1] of the full arm.
#[derive(Debug, Clone, Copy)]
pub enum Arm {
    Node(u32),
    Boundary(f64),
}

/// All coprime integer directions with max |entry| ≤ w, one representative
/// per ± pair, axes first.
pub fn lattice_directions(dim: usize, w: i32) -> Vec<Vec<i32>> {
    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let mut dirs: Vec<Vec<i32>> = Vec::new();
    let mut push = |v: Vec<i32>| {
        let g = v.iter().fold(0, |acc, &c| gcd(acc, c));
        if g != 1 {
            return;
        }
        // Canonical representative: first nonzero entry positive.
        let first = *v.iter().find(|&&c| c != 0).unwrap();
        let v: Vec<i32> = if first < 0 {
            v.iter().map(|&c| -c).collect()
        } else {
            v
        };
        if !dirs.contains(&v) {
            dirs.push(v);
        }
    };
    // Axes first (the k = N Laplacian path sums over them).
    for d in 0..dim {
        let mut e = vec![0; dim];
        e[d] = 1;
        push(e);
    }
    let span = -w..=w;
    if dim == 2 {
        for a in span.clone() {
            for b in span.clone() {
                if a != 0 || b != 0 {
                    push(vec![a, b]);
                }
            }
        }
    } else {
        for a in span.clone() {
            for b in span.clone() {
                for c in span.clone() {
                    if a != 0 || b != 0 || c != 0 {
                        push(vec![a, b, c]);
                    }
                }
            }
        }
    }
    dirs
}

/// A lattice grid over a domain with precomputed stencil arms.
pub struct Grid {
    pub dim: usize,
    pub h: f64,
    lo: Vec<f64>,
    shape: Vec<usize>,
    /// Directions and their Euclidean lengths (in lattice units).
    pub dirs: Vec<(Vec<i32>, f64)>,
    /// Index pairs of exactly orthogonal directions (3-D, k = 2).
    pub frames: Vec<(usize, usize)>,
    interior_of: Vec<u32>,
    /// Flat lattice ids of interior nodes.
    pub interior: Vec<u32>,
    /// Arms per interior node, direction-major: arms[node * ndirs + d].
    arms: Vec<(Arm, Arm)>,
    /// Shortest arm length over the whole grid (absolute units).
    pub min_arm: f64,
    pub diameter: f64,
}

const NOT_INTERIOR: u32 = u32::MAX;

impl Grid {
    pub fn new(domain: &dyn Domain, h: f64, width: i32) -> Result<Grid> {
        if !(h > 0.0) || width < 1 {
            return Err(Error::invalid("need h > 0 and stencil width >= 1"));
        }
        let dim = domain.dim();
        let (blo, bhi) = domain.bounding_box();
        if !la::norm(&blo).is_finite() || !la::norm(&bhi).is_finite() {
            return Err(Error::invalid("domain must be bounded"));
        }
        // Snap the lattice to multiples of h so the origin is a node.
        let pad = (width as f64 + 1.0) * h;
        let lo: Vec<f64> = blo.iter().map(|&a| (((a - pad) / h).floor()) * h).collect();
        let shape: Vec<usize> = bhi
            .iter()
            .zip(&lo)
            .map(|(&b, &a)| ((b + pad - a) / h).ceil() as usize + 1)
            .collect();
        let total: usize = shape.iter().product();
        if total > 80_000_000 {
            return Err(Error::invalid("grid too large"));
        }
        let int_dirs = lattice_directions(dim, width);
        let dirs: Vec<(Vec<i32>, f64)> = int_dirs
            .into_iter()
            .map(|v| {
                let len = (v.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
                (v, len)
            })
            .collect();
        let mut frames = Vec::new();
        if dim == 3 {
            for i in 0..dirs.len() {
                for j in (i + 1)..dirs.len() {
                    let d: i32 = dirs[i].0.iter().zip(&dirs[j].0).map(|(a, b)| a * b).sum();
                    if d == 0 {
                        frames.push((i, j));
                    }
                }
            }
        }
        let mut grid = Grid {
            dim,
            h,
            lo,
            shape,
            dirs,
            frames,
            interior_of: vec![NOT_INTERIOR; total],
            interior: Vec::new(),
            arms: Vec::new(),
            min_arm: f64::INFINITY,
            diameter: domain.diameter(),
        };
        for flat in 0..total {
            if domain.contains(&grid.coords(flat as u32)) {
                grid.interior_of[flat] = grid.interior.len() as u32;
                grid.interior.push(flat as u32);
            }
        }
        if grid.interior.is_empty() {
            return Err(Error::invalid("no interior nodes at this spacing"));
        }
        // Arms: full lattice neighbor when interior, otherwise the boundary
        // crossing located by bisection along the arm.
        let ndirs = grid.dirs.len();
        grid.arms = Vec::with_capacity(grid.interior.len() * ndirs);
        let mut min_arm = f64::INFINITY;
        for &flat in &grid.interior {
            let x = grid.coords(flat);
            for d in 0..ndirs {
                let arm = |sign: i32, grid: &Grid, min_arm: &mut f64| -> Arm {
                    match grid.step(flat, d, sign) {
                        Some(nb) if grid.interior_of[nb as usize] != NOT_INTERIOR => {
                            let len = grid.h * grid.dirs[d].1;
                            if len < *min_arm {
                                *min_arm = len;
                            }
                            Arm::Node(nb)
                        }
                        _ => {
                            let dir: Vec<f64> = grid.dirs[d]
                                .0
                                .iter()
                                .map(|&c| sign as f64 * c as f64 * grid.h)
                                .collect();
                            let mut a = 0.0f64;
                            let mut b = 1.0f64;
                            for _ in 0..60 {
                                let m = 0.5 * (a + b);
                                if domain.contains(&la::axpy(&x, m, &dir)) {
                                    a = m;
                                } else {
                                    b = m;
                                }
                            }
                            let rho = (0.5 * (a + b)).max(1e-9);
                            let len = rho * grid.h * grid.dirs[d].1;
                            if len < *min_arm {
                                *min_arm = len;
                            }
                            Arm::Boundary(rho)
                        }
                    }
                };
                let plus = arm(1, &grid, &mut min_arm);
                let minus = arm(-1, &grid, &mut min_arm);
                grid.arms.push((plus, minus));
            }
        }
        grid.min_arm = min_arm;
        Ok(grid)
    }

    pub fn total_nodes(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn coords(&self, flat: u32) -> Vec<f64> {
        let mut rem = flat as usize;
        let mut out = vec![0.0; self.dim];
        for d in (0..self.dim).rev() {
            out[d] = self.lo[d] + (rem % self.shape[d]) as f64 * self.h;
            rem /= self.shape[d];
        }
        out
    }

    /// Flat id of the lattice node nearest to x, if it is on the grid.
    pub fn nearest_node(&self, x: &[f64]) -> Option<u32> {
        let mut flat = 0usize;
        for d in 0..self.dim {
            let i = ((x[d] - self.lo[d]) / self.h).round();
            if i < 0.0 || i as usize >= self.shape[d] {
                return None;
            }
            flat = flat * self.shape[d] + i as usize;
        }
        Some(flat as u32)
    }

    pub fn is_interior(&self, flat: u32) -> bool {
        self.interior_of[flat as usize] != NOT_INTERIOR
    }

    pub fn interior_position(&self, flat: u32) -> Option<usize> {
        let p = self.interior_of[flat as usize];
        (p != NOT_INTERIOR).then_some(p as usize)
    }

    fn step(&self, flat: u32, dir: usize, sign: i32) -> Option<u32> {
        let mut rem = flat as usize;
        let mut idx = vec![0i64; self.dim];
        for d in (0..self.dim).rev() {
            idx[d] = (rem % self.shape[d]) as i64;
            rem /= self.shape[d];
        }
        let mut out = 0usize;
        for d in 0..self.dim {
            let i = idx[d] + (sign * self.dirs[dir].0[d]) as i64;
            if i < 0 || i as usize >= self.shape[d] {
                return None;
            }
            out = out * self.shape[d] + i as usize;
        }
        Some(out as u32)
    }

    pub fn arm(&self, node: usize, dir: usize) -> (Arm, Arm) {
        self.arms[node * self.dirs.len() + dir]
    }

    /// True when every arm of the node reaches another interior node.
    pub fn full_stencil(&self, node: usize) -> bool {
        (0..self.dirs.len()).all(|d| {
            let (p, m) = self.arm(node, d);
            matches!(p, Arm::Node(_)) && matches!(m, Arm::Node(_))
        })
    }

    /// True when an axis arm of the node is shortened to the boundary,
    /// i.e. the node lies within one cell of it.
    pub fn boundary_adjacent(&self, node: usize) -> bool {
        (0..self.dim).any(|d| {
            let (p, m) = self.arm(node, d);
            matches!(p, Arm::Boundary(_)) || matches!(m, Arm::Boundary(_))
        })
    }

    fn arm_value_len(&self, values: &[f64], arm: Arm, dir: usize) -> (f64, f64) {
        let full = self.h * self.dirs[dir].1;
        match arm {
            Arm::Node(flat) => (values[flat as usize], full),
            Arm::Boundary(rho) => (0.0, rho * full),
        }
    }

    /// Centered (nonuniform near the boundary) second difference along a
    /// stencil direction at interior node `node`.
    pub fn second_diff(&self, values: &[f64], node: usize, dir: usize) -> f64 {
        let flat = self.interior[node] as usize;
        let u0 = values[flat];
        let (pa, ma) = self.arm(node, dir);
        let (up, b) = self.arm_value_len(values, pa, dir);
        let (um, a) = self.arm_value_len(values, ma, dir);
        2.0 * (a * up + b * um - (a + b) * u0) / (a * b * (a + b))
    }

    /// Discrete 𝒫ₖ⁺: k = 1 takes the max directional second difference;
    /// k = 2 in 3-D maxes over exactly orthogonal direction pairs; k = N
    /// sums the axis second differences (Laplacian).
    pub fn pk_plus(&self, values: &[f64], node: usize, k: usize) -> Result<f64> {
        if k == 0 || k > self.dim {
            return Err(Error::invalid("k must satisfy 1 <= k <= N"));
        }
        if k == 1 {
            Ok((0..self.dirs.len())
                .map(|d| self.second_diff(values, node, d))
                .fold(f64::NEG_INFINITY, f64::max))
        } else if k == self.dim {
            Ok((0..self.dim)
                .map(|d| self.second_diff(values, node, d))
                .sum())
        } else {
            // k = 2, N = 3.
            if self.frames.is_empty() {
                return Err(Error::invalid("empty frame catalog for k = 2"));
            }
            Ok(self
                .frames
                .iter()
                .map(|&(i, j)| self.second_diff(values, node, i) + self.second_diff(values, node, j))
                .fold(f64::NEG_INFINITY, f64::max))
        }
    }

    /// Upwind gradient-norm term. `Plus` returns max(0, max one-sided slope)
    /// ≈ |Du|; `Minus` returns min(0, min one-sided slope) ≈ −|Du|. Both are
    /// nondecreasing in neighbor values after multiplication by +b with the
    /// corresponding drift sign.
    pub fn upwind(&self, values: &[f64], node: usize, plus: bool) -> f64 {
        let flat = self.interior[node] as usize;
        let u0 = values[flat];
        let mut best = 0.0f64;
        for d in 0..self.dirs.len() {
            let (pa, ma) = self.arm(node, d);
            for arm in [pa, ma] {
                let (uv, len) = self.arm_value_len(values, arm, d);
                let slope = (uv - u0) / len;
                if plus {
                    best = best.max(slope);
                } else {
                    best = best.min(slope);
                }
            }
        }
        best
    }

    /// Stability bound: the coefficient of u₀ in the stiffest realizable
    /// update at this node (second differences plus a drift slope term).
    pub fn node_stiffness(&self, node: usize, k: usize, b_abs: f64) -> f64 {
        let mut worst_dd: Vec<f64> = (0..self.dirs.len())
            .map(|d| {
                let (pa, ma) = self.arm(node, d);
                let full = self.h * self.dirs[d].1;
                let b = match pa {
                    Arm::Node(_) => full,
                    Arm::Boundary(rho) => rho * full,
                };
                let a = match ma {
                    Arm::Node(_) => full,
                    Arm::Boundary(rho) => rho * full,
                };
                2.0 / (a * b)
            })
            .collect();
        worst_dd.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let kk = k.min(worst_dd.len());
        let dd: f64 = worst_dd[..kk].iter().sum();
        let mut min_len = f64::INFINITY;
        for d in 0..self.dirs.len() {
            let (pa, ma) = self.arm(node, d);
            let full = self.h * self.dirs[d].1;
            for arm in [pa, ma] {
                let len = match arm {
                    Arm::Node(_) => full,
                    Arm::Boundary(rho) => rho * full,
                };
                min_len = min_len.min(len);
            }
        }
        dd + b_abs / min_len
    }
}

/// A scalar field on a grid: one value per lattice node (non-interior nodes
/// carry the Dirichlet value 0 unless set otherwise by the caller).
#[derive(Clone)]
pub struct GridField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.total_nodes();
        GridField {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Sample a function at every lattice node.
    pub fn sample(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.total_nodes() as u32)
            .map(|flat| f(&grid.coords(flat)))
            .collect();
        GridField { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.grid
            .interior
            .iter()
            .map(|&flat| self.values[flat as usize].abs())
            .fold(0.0, f64::max)
    }

    /// Multilinear interpolation (0 outside the interior mask).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let mut base = vec![0usize; g.dim];
        let mut frac = vec![0.0; g.dim];
        for d in 0..g.dim {
            let t = (x[d] - g.lo[d]) / g.h;
            let i = t.floor();
            if i < 0.0 || i as usize + 1 >= g.shape[d] {
                return 0.0;
            }
            base[d] = i as usize;
            frac[d] = t - i;
        }
        let corners = 1usize << g.dim;
        let mut out = 0.0;
        for c in 0..corners {
            let mut flat = 0usize;
            let mut w = 1.0;
            for d in 0..g.dim {
                let up = (c >> d) & 1;
                flat = flat * g.shape[d] + base[d] + up;
                w *= if up == 1 { frac[d] } else { 1.0 - frac[d] };
            }
            out += w * self.values[flat];
        }
        out
    }

    /// CSV dump: one row per interior node, "x,y[,z],u".
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for &flat in &self.grid.interior {
            let x = self.grid.coords(flat);
            for c in &x {
                out.push_str(&format!("{c:.17e},"));
            }
            out.push_str(&format!("{:.17e}\n", self.values[flat as usize]));
        }
        out
    }
}
