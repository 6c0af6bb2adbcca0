//! Tiny dense linear-algebra helpers for 2-D/3-D geometry.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| t * x).collect()
}

pub fn axpy(a: &[f64], t: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

pub fn normalize(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scale(a, 1.0 / n)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Solve A x = b for a small (n ≤ 4) row-major system by Gaussian
/// elimination with partial pivoting. Returns None when singular.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = vec![0.0; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] = a[i * n + j];
        }
        m[i * (n + 1) + n] = b[i];
    }
    for col in 0..n {
        let (mut piv, mut best) = (col, m[col * (n + 1) + col].abs());
        for r in (col + 1)..n {
            let v = m[r * (n + 1) + col].abs();
            if v > best {
                piv = r;
                best = v;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if piv != col {
            for j in 0..=n {
                m.swap(col * (n + 1) + j, piv * (n + 1) + j);
            }
        }
        let d = m[col * (n + 1) + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * (n + 1) + col] / d;
            for j in col..=n {
                m[r * (n + 1) + j] -= f * m[col * (n + 1) + j];
            }
        }
    }
    Some((0..n).map(|i| m[i * (n + 1) + n] / m[i * (n + 1) + i]).collect())
}

/// y = M x for a row-major n×n matrix.
pub fn matvec(n: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], x)).collect()
}

/// y = Mᵀ x.
pub fn matvec_t(n: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|j| (0..n).map(|i| m[i * n + j] * x[i]).sum())
        .collect()
}

/// Check that a row-major n×n matrix is orthogonal within tol.
pub fn is_orthogonal(n: usize, m: &[f64], tol: f64) -> bool {
    for i in 0..n {
        for j in 0..n {
            let d: f64 = (0..n).map(|l| m[i * n + l] * m[j * n + l]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (d - target).abs() > tol {
                return false;
            }
        }
    }
    true
}
