//! Small dense symmetric matrices and the truncated-Laplacian operators
//! 𝒫ₖ⁺ / 𝒫ₖ⁻ (partial sums of the ordered Hessian eigenvalues).

use crate::error::{Error, Result};

/// Dense symmetric matrix, dimension 1..=8. Only the lower triangle is
/// authoritative at construction; entries are symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // row-major, dim*dim
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Build from row-major entries, symmetrizing from the lower triangle.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if dim == 0 || dim > 8 {
            return Err(Error::invalid(format!("dim must be 1..=8, got {dim}")));
        }
        if rows.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries, got {}",
                dim * dim,
                rows.len()
            )));
        }
        let mut entries = rows.to_vec();
        for i in 0..dim {
            for j in 0..i {
                let v = entries[i * dim + j];
                entries[j * dim + i] = v;
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut rows = vec![0.0; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            rows[i * dim + i] = v;
        }
        Self::from_rows(dim, &rows)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_rows(dim, &vec![0.0; dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// self + other (dims must match).
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::invalid("dimension mismatch in add"));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymMatrix {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, t: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|v| t * v).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.get(i, j) * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// Quadratic form ⟨Mx, x⟩.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// O M Oᵀ for a square matrix O given row-major.
    pub fn conjugate(&self, o: &[f64]) -> Result<SymMatrix> {
        let n = self.dim;
        if o.len() != n * n {
            return Err(Error::invalid("conjugation matrix size mismatch"));
        }
        // tmp = O M
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += o[i * n + l] * self.get(l, j);
                }
                tmp[i * n + j] = s;
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += tmp[i * n + l] * o[j * n + l];
                }
                out[i * n + j] = s;
            }
        }
        SymMatrix::from_rows(n, &out)
    }
}

/// Eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenList {
    values: Vec<f64>,
}

impl EigenList {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Full eigen-decomposition: ascending values plus matching unit eigenvectors
/// (columns of an orthogonal matrix), computed by cyclic Jacobi rotations.
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// vectors[i] is the eigenvector for values[i].
    pub vectors: Vec<Vec<f64>>,
}

fn jacobi(m: &SymMatrix) -> EigenDecomposition {
    let n = m.dim;
    let mut a = m.entries.clone();
    // v starts as identity; accumulates rotations so columns are eigenvectors.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let tol = 1e-14 * norm;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let val = a[j * n + j];
            let vec: Vec<f64> = (0..n).map(|i| v[i * n + j]).collect();
            (val, vec)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    EigenDecomposition {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn eigenvalues_sorted(m: &SymMatrix) -> EigenList {
    EigenList {
        values: jacobi(m).values,
    }
}

/// Full decomposition (eigenvalues plus orthonormal eigenvectors).
pub fn eigen_decomposition(m: &SymMatrix) -> EigenDecomposition {
    jacobi(m)
}

fn check_k(m: &SymMatrix, k: usize) -> Result<()> {
    if k == 0 || k > m.dim {
        Err(Error::invalid(format!(
            "k must be in 1..={}, got {k}",
            m.dim
        )))
    } else {
        Ok(())
    }
}

/// Sum of the k largest eigenvalues.
pub fn pk_plus(m: &SymMatrix, k: usize) -> Result<f64> {
    check_k(m, k)?;
    let ev = eigenvalues_sorted(m);
    Ok(ev.values[m.dim - k..].iter().sum())
}

/// Sum of the k smallest eigenvalues.
pub fn pk_minus(m: &SymMatrix, k: usize) -> Result<f64> {
    check_k(m, k)?;
    let ev = eigenvalues_sorted(m);
    Ok(ev.values[..k].iter().sum())
}

/// Σᵢ ⟨M ξᵢ, ξᵢ⟩ over an orthonormal frame; always between pk_minus and
/// pk_plus for a frame of size k.
pub fn frame_sum(m: &SymMatrix, frame: &[Vec<f64>]) -> Result<f64> {
    let n = m.dim;
    for (i, u) in frame.iter().enumerate() {
        if u.len() != n {
            return Err(Error::invalid("frame vector dimension mismatch"));
        }
        for (j, w) in frame.iter().enumerate() {
            let dot: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "frame not orthonormal: <v{i},v{j}> = {dot}"
                )));
            }
        }
    }
    Ok(frame.iter().map(|u| m.quad_form(u)).sum())
}

/// Eigenvalue pair of a radial Hessian at radius r: g″ (once) and g′/r
/// (with multiplicity N−1).
#[derive(Debug, Clone, Copy)]
pub struct RadialHessian {
    pub gp: f64,
    pub gpp: f64,
    pub r: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// pk of the radial Hessian spectrum {g″, g′/r ×(N−1)}.
pub fn pk_radial(h: &RadialHessian, k: usize, side: Side) -> Result<f64> {
    if h.r <= 0.0 {
        return Err(Error::invalid("radius must be positive"));
    }
    if k == 0 || k > h.dim {
        return Err(Error::invalid(format!(
            "k must be in 1..={}, got {k}",
            h.dim
        )));
    }
    let mut vals = Vec::with_capacity(h.dim);
    vals.push(h.gpp);
    vals.extend(std::iter::repeat(h.gp / h.r).take(h.dim - 1));
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(match side {
        Side::Plus => vals[h.dim - k..].iter().sum(),
        Side::Minus => vals[..k].iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut impl Rng, dim: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(dim).unwrap();
        for i in 0..dim {
            for j in 0..=i {
                m.set_sym(i, j, rng.gen_range(-3.0..3.0));
            }
        }
        m
    }

    /// Count eigenvalues of M below x via the LDLᵀ inertia of M − xI:
    /// an independent oracle for the Jacobi solver.
    fn count_below(m: &SymMatrix, x: f64) -> usize {
        let n = m.dim();
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = m.get(i, j) - if i == j { x } else { 0.0 };
            }
        }
        let mut negatives = 0;
        for p in 0..n {
            let pivot = a[p * n + p];
            if pivot < 0.0 {
                negatives += 1;
            }
            if pivot.abs() < 1e-300 {
                // x essentially hits an eigenvalue; nudge decided by caller.
                continue;
            }
            for i in (p + 1)..n {
                let factor = a[i * n + p] / pivot;
                for j in p..n {
                    a[i * n + j] -= factor * a[p * n + j];
                }
            }
        }
        negatives
    }

    fn oracle_eigenvalues(m: &SymMatrix) -> Vec<f64> {
        let n = m.dim();
        let bound = m.norm() + 1.0;
        (1..=n)
            .map(|k| {
                // k-th smallest eigenvalue by bisection on the inertia count.
                let (mut lo, mut hi) = (-bound, bound);
                for _ in 0..120 {
                    let mid = 0.5 * (lo + hi);
                    if count_below(m, mid) >= k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    #[test]
    fn diagonal_eigenvalues() {
        let m = SymMatrix::diagonal(&[3.0, -5.0]).unwrap();
        assert_eq!(eigenvalues_sorted(&m).values(), &[-5.0, 3.0]);
        let id = SymMatrix::identity(4).unwrap();
        assert_eq!(eigenvalues_sorted(&id).values(), &[1.0; 4]);
    }

    #[test]
    fn eigenvalues_match_inertia_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let dim = rng.gen_range(2..=8);
            let m = random_sym(&mut rng, dim);
            let got = eigenvalues_sorted(&m);
            let want = oracle_eigenvalues(&m);
            let tol = 1e-10 * (1.0 + m.norm());
            for (g, w) in got.values().iter().zip(&want) {
                assert!((g - w).abs() <= tol, "eig mismatch: {g} vs {w}");
            }
            let sum: f64 = got.values().iter().sum();
            assert_relative_eq!(sum, m.trace(), epsilon = 1e-12 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn pk_examples() {
        let m = SymMatrix::diagonal(&[2.0, -3.0]).unwrap();
        assert_relative_eq!(pk_plus(&m, 1).unwrap(), 2.0);
        let m = SymMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(pk_minus(&m, 2).unwrap(), 3.0);
        // k = N coincides with the Laplacian (trace).
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_sym(&mut rng, 5);
        assert_relative_eq!(pk_plus(&m, 5).unwrap(), m.trace(), epsilon = 1e-11);
        assert_relative_eq!(pk_minus(&m, 5).unwrap(), m.trace(), epsilon = 1e-11);
        // diag with N−k entries −2β and k entries −2α, α < β → −2αk.
        let (alpha, beta, k) = (0.7, 1.9, 2usize);
        let m = SymMatrix::diagonal(&[-2.0 * beta, -2.0 * beta, -2.0 * alpha, -2.0 * alpha])
            .unwrap();
        assert_relative_eq!(pk_plus(&m, k).unwrap(), -2.0 * alpha * k as f64, epsilon = 1e-12);
    }

    #[test]
    fn k_out_of_range_rejected() {
        let m = SymMatrix::identity(3).unwrap();
        assert!(pk_plus(&m, 0).is_err());
        assert!(pk_plus(&m, 4).is_err());
        assert!(pk_minus(&m, 9).is_err());
    }

    #[test]
    fn frame_sum_bounds_and_attainment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=6);
            let k = rng.gen_range(1..=dim);
            let m = random_sym(&mut rng, dim);
            let dec = eigen_decomposition(&m);
            let top: Vec<Vec<f64>> = dec.vectors[dim - k..].to_vec();
            let bot: Vec<Vec<f64>> = dec.vectors[..k].to_vec();
            let plus = pk_plus(&m, k).unwrap();
            let minus = pk_minus(&m, k).unwrap();
            assert_relative_eq!(frame_sum(&m, &top).unwrap(), plus, epsilon = 1e-9);
            assert_relative_eq!(frame_sum(&m, &bot).unwrap(), minus, epsilon = 1e-9);
            // Random frames never exceed the bounds.
            for _ in 0..50 {
                let frame = random_frame(&mut rng, dim, k);
                let s = frame_sum(&m, &frame).unwrap();
                assert!(s <= plus + 1e-9);
                assert!(s >= minus - 1e-9);
            }
        }
    }

    fn random_frame(rng: &mut impl Rng, dim: usize, k: usize) -> Vec<Vec<f64>> {
        // Gram-Schmidt on random vectors.
        let mut frame: Vec<Vec<f64>> = Vec::new();
        while frame.len() < k {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for u in &frame {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= d * ui;
                }
            }
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                for vi in &mut v {
                    *vi /= n;
                }
                frame.push(v);
            }
        }
        frame
    }

    #[test]
    fn non_orthonormal_frame_rejected() {
        let m = SymMatrix::identity(3).unwrap();
        let frame = vec![vec![1.0, 0.0, 0.0], vec![0.9, 0.1, 0.0]];
        assert!(frame_sum(&m, &frame).is_err());
    }

    #[test]
    fn pk_radial_matches_diagonal_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let dim = rng.gen_range(2..=5);
            let k = rng.gen_range(1..=dim);
            let h = RadialHessian {
                gp: rng.gen_range(-2.0..2.0),
                gpp: rng.gen_range(-2.0..2.0),
                r: rng.gen_range(0.1..3.0),
                dim,
            };
            let mut diag = vec![h.gp / h.r; dim];
            diag[0] = h.gpp;
            let m = SymMatrix::diagonal(&diag).unwrap();
            assert_relative_eq!(
                pk_radial(&h, k, Side::Plus).unwrap(),
                pk_plus(&m, k).unwrap(),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                pk_radial(&h, k, Side::Minus).unwrap(),
                pk_minus(&m, k).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pk_radial_examples() {
        // g(r) = (R² − r²)/(2k): both radial eigenvalues are −1/k.
        for k in 1..=3usize {
            let h = RadialHessian {
                gp: -0.5 / k as f64, // g'(r) = −r/k at r = 0.5
                gpp: -1.0 / k as f64,
                r: 0.5,
                dim: 4,
            };
            assert_relative_eq!(pk_radial(&h, k, Side::Plus).unwrap(), -1.0, epsilon = 1e-12);
        }
        let h = RadialHessian {
            gp: 0.0,
            gpp: 0.7,
            r: 1.0,
            dim: 2,
        };
        assert_relative_eq!(pk_radial(&h, 1, Side::Plus).unwrap(), 0.7);
        let h = RadialHessian {
            gp: 0.0,
            gpp: -0.7,
            r: 1.0,
            dim: 2,
        };
        assert_relative_eq!(pk_radial(&h, 1, Side::Plus).unwrap(), 0.0);
        assert!(pk_radial(
            &RadialHessian {
                gp: 0.0,
                gpp: 0.0,
                r: -1.0,
                dim: 2
            },
            1,
            Side::Plus
        )
        .is_err());
    }

    #[test]
    fn operator_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let dim = rng.gen_range(2..=6);
            let k = rng.gen_range(1..=dim);
            let m = random_sym(&mut rng, dim);
            let m2 = random_sym(&mut rng, dim);

            // Duality.
            assert_relative_eq!(
                pk_minus(&m, k).unwrap(),
                -pk_plus(&m.scale(-1.0), k).unwrap(),
                epsilon = 1e-12 * (1.0 + m.norm())
            );

            // Degenerate ellipticity: add PSD = AᵀA.
            let a = random_sym(&mut rng, dim);
            let mut psd = SymMatrix::zeros(dim).unwrap();
            for i in 0..dim {
                for j in 0..=i {
                    let mut s = 0.0;
                    for l in 0..dim {
                        s += a.get(l, i) * a.get(l, j);
                    }
                    psd.set_sym(i, j, s);
                }
            }
            let bumped = m.add(&psd).unwrap();
            assert!(pk_plus(&bumped, k).unwrap() >= pk_plus(&m, k).unwrap() - 1e-9);
            assert!(pk_minus(&bumped, k).unwrap() >= pk_minus(&m, k).unwrap() - 1e-9);

            // Homogeneity.
            let t = rng.gen_range(0.0..3.0);
            assert_relative_eq!(
                pk_plus(&m.scale(t), k).unwrap(),
                t * pk_plus(&m, k).unwrap(),
                epsilon = 1e-9
            );

            // Subadditivity.
            assert!(
                pk_plus(&m.add(&m2).unwrap(), k).unwrap()
                    <= pk_plus(&m, k).unwrap() + pk_plus(&m2, k).unwrap() + 1e-9
            );

            // Orthogonal invariance: conjugate by a random rotation built
            // from the eigenvectors of another random symmetric matrix.
            let dec = eigen_decomposition(&random_sym(&mut rng, dim));
            let mut o = vec![0.0; dim * dim];
            for (j, v) in dec.vectors.iter().enumerate() {
                for i in 0..dim {
                    o[i * dim + j] = v[i];
                }
            }
            let rotated = m.conjugate(&o).unwrap();
            assert_relative_eq!(
                pk_plus(&rotated, k).unwrap(),
                pk_plus(&m, k).unwrap(),
                epsilon = 1e-9 * (1.0 + m.norm())
            );
        }
    }
}
