//! Adaptive quadrature helpers.
//!
//! Everything here works on plain `Fn(f64) -> f64` closures. The improper
//! integrator subdivides geometrically toward a singular endpoint and
//! declares divergence when the shell contributions stop contracting.

/// Result of integrating up to a (possibly singular) endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improper {
    Finite(f64),
    Infinite,
}

const MAX_DEPTH: u32 = 40;

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    // Roundoff floor: the interval can no longer be split.
    if !(a < lm && lm < m && m < rm && rm < b) {
        return whole;
    }
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return whole;
    }
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + adaptive_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_rec(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Default absolute tolerance used by the radial profiles.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Integrate `f` on `[a, b)` where `f` may blow up at `b`.
///
/// The interval `[c, b)` with `c = b - 0.1 (b - a)` is split into dyadic
/// shells accumulating toward `b`. Divergence is declared when the shell
/// increments fail to contract by a factor `< 0.9` over 10 successive
/// shells, or the partial sums exceed `cap`.
pub fn integrate_improper<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, cap: f64) -> Improper {
    if !(b > a) {
        return Improper::Finite(0.0);
    }
    let c = b - 0.1 * (b - a);
    let mut total = integrate(&f, a, c, tol);
    let mut lo = c;
    let mut prev_inc = f64::INFINITY;
    let mut no_contract = 0u32;
    for _ in 0..200 {
        let hi = 0.5 * (lo + b);
        if !(hi > lo && hi < b) {
            // Shells have shrunk below floating-point resolution.
            return Improper::Finite(total);
        }
        let inc = integrate(&f, lo, hi, tol);
        total += inc;
        if !total.is_finite() || total.abs() > cap {
            return Improper::Infinite;
        }
        if inc.abs() < tol {
            return Improper::Finite(total);
        }
        if prev_inc.is_finite() {
            if inc.abs() >= 0.9 * prev_inc.abs() {
                no_contract += 1;
                if no_contract >= 10 {
                    return Improper::Infinite;
                }
            } else {
                no_contract = 0;
            }
        }
        prev_inc = inc;
        lo = hi;
    }
    // Contributions kept shrinking: extrapolate the geometric tail.
    let ratio = 0.9_f64;
    Improper::Finite(total + prev_inc * ratio / (1.0 - ratio))
}

/// Locate a root of `f` in `[a, b]` by bisection, assuming a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if (fa <= 0.0) == (fm <= 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
