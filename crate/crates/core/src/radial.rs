//! Radial solutions g(|x|) of 𝒫ₖ⁺-driven Dirichlet problems on balls, with
//! constant, sign-reversed, critical and radially weighted drift terms, plus
//! the integral dichotomy that separates solvable from unsolvable drifts.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{pk_radial, RadialHessian, Side};
use crate::quad::{self, Improper};

type F1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift coefficient b(r) on [0, R], either constant or callable.
#[derive(Clone)]
pub struct DriftCoefficient {
    kind: DriftKind,
    /// Ball radius R.
    pub r_max: f64,
    /// Operator index k (number of summed eigenvalues).
    pub k: usize,
    /// Ambient dimension N.
    pub dim: usize,
}

#[derive(Clone)]
enum DriftKind {
    Constant(f64),
    Callable { b: F1, db: Option<F1> },
}

impl DriftCoefficient {
    pub fn constant(b: f64, r_max: f64, k: usize, dim: usize) -> Result<Self> {
        Self::check_params(r_max, k, dim)?;
        Ok(DriftCoefficient {
            kind: DriftKind::Constant(b),
            r_max,
            k,
            dim,
        })
    }

    pub fn callable<B>(b: B, db: Option<F1>, r_max: f64, k: usize, dim: usize) -> Result<Self>
    where
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::check_params(r_max, k, dim)?;
        Ok(DriftCoefficient {
            kind: DriftKind::Callable { b: Arc::new(b), db },
        r_max,
            k,
            dim,
        })
    }

    fn check_params(r_max: f64, k: usize, dim: usize) -> Result<()> {
        if !(r_max > 0.0) {
            return Err(Error::invalid("R must be positive"));
        }
        if k == 0 || k >= dim.max(2) || k > dim {
            // k ranges over 1..N-1 for the drift problems; k == N is the
            // plain Laplacian and never carries a drift threshold here.
            if k == 0 || k > dim {
                return Err(Error::invalid(format!("k={k} out of range for N={dim}")));
            }
        }
        Ok(())
    }

    /// b(r).
    pub fn b(&self, r: f64) -> f64 {
        match &self.kind {
            DriftKind::Constant(b) => *b,
            DriftKind::Callable { b, .. } => b(r),
        }
    }

    /// b′(r), analytic when supplied, otherwise central finite difference.
    pub fn db(&self, r: f64) -> f64 {
        match &self.kind {
            DriftKind::Constant(_) => 0.0,
            DriftKind::Callable { b, db } => match db {
                Some(d) => d(r),
                None => {
                    let h = 1e-6 * self.r_max.max(1.0);
                    let lo = (r - h).max(0.0);
                    let hi = (r + h).min(self.r_max);
                    (b(hi) - b(lo)) / (hi - lo)
                }
            },
        }
    }

    /// (r b(r))′ = b(r) + r b′(r).
    pub fn rb_prime(&self, r: f64) -> f64 {
        self.b(r) + r * self.db(r)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, DriftKind::Constant(_))
    }
}

/// Which analytic regime produced a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    ConstB,
    MinusB,
    CriticalEigen { mu: f64, a: f64 },
    /// Second-order core glued to the first-order outer profile at r̄.
    WeightedGlued { r_glue: f64 },
    /// First-order core glued to the second-order outer profile at r₀.
    WeightedGluedReversed { r_glue: f64 },
    WeightedFirstOrder,
    WeightedSecondOrder,
    WeightedEigen { mu: f64, boundary_vanishing: bool },
}

/// A radial function g on [0, R] with value and derivative evaluators.
#[derive(Clone)]
pub struct RadialProfile {
    pub regime: Regime,
    pub r_max: f64,
    pub k: usize,
    pub dim: usize,
    /// Radius where two analytic branches meet (g is only C¹ there).
    pub glue_radius: Option<f64>,
    g: F1,
    gp: F1,
    gpp: F1,
}

impl RadialProfile {
    pub fn from_closures(
        regime: Regime,
        r_max: f64,
        k: usize,
        dim: usize,
        glue_radius: Option<f64>,
        g: F1,
        gp: F1,
        gpp: F1,
    ) -> Self {
        RadialProfile {
            regime,
            r_max,
            k,
            dim,
            glue_radius,
            g,
            gp,
            gpp,
        }
    }

    pub fn g(&self, r: f64) -> f64 {
        (self.g)(r)
    }
    pub fn gp(&self, r: f64) -> f64 {
        (self.gp)(r)
    }
    pub fn gpp(&self, r: f64) -> f64 {
        (self.gpp)(r)
    }

    /// The same profile with g (and derivatives) multiplied by t.
    pub fn scaled(&self, t: f64) -> Self {
        let (g, gp, gpp) = (self.g.clone(), self.gp.clone(), self.gpp.clone());
        RadialProfile {
            regime: self.regime,
            r_max: self.r_max,
            k: self.k,
            dim: self.dim,
            glue_radius: self.glue_radius,
            g: Arc::new(move |r| t * g(r)),
            gp: Arc::new(move |r| t * gp(r)),
            gpp: Arc::new(move |r| t * gpp(r)),
        }
    }
}

/// Cumulative integral of a 1-D function on [a, b], accurate node table plus
/// short adaptive tail for off-node points.
struct CumFn {
    a: f64,
    h: f64,
    cum: Vec<f64>,
    f: F1,
}

impl CumFn {
    fn new(f: F1, a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let x0 = a + i as f64 * h;
            let x1 = x0 + h;
            let xm = 0.5 * (x0 + x1);
            acc += h / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
            cum.push(acc);
        }
        CumFn { a, h, cum, f }
    }

    /// ∫_a^x f.
    fn eval(&self, x: f64) -> f64 {
        let n = self.cum.len() - 1;
        let t = ((x - self.a) / self.h).floor();
        let i = (t.max(0.0) as usize).min(n);
        let xi = self.a + i as f64 * self.h;
        if (x - xi).abs() < 1e-300 {
            return self.cum[i];
        }
        let f = &self.f;
        self.cum[i] + quad::integrate(|s| f(s), xi, x, 1e-14)
    }
}

const CUM_N: usize = 4000;

/// Radial solution of 𝒫ₖ⁺(D²u) + b|Du| = −1 on B_R for constant b ≥ 0:
/// g′(r) = −r/(k − br). Errors out when bR ≥ k (no supersolutions exist).
pub fn profile_const_b(b: f64, r_max: f64, k: usize) -> Result<RadialProfile> {
    profile_const_b_dim(b, r_max, k, k + 1)
}

/// As [`profile_const_b`] with an explicit ambient dimension.
pub fn profile_const_b_dim(b: f64, r_max: f64, k: usize, dim: usize) -> Result<RadialProfile> {
    if b < 0.0 {
        return Err(Error::invalid("b must be nonnegative"));
    }
    if !(r_max > 0.0) || k == 0 {
        return Err(Error::invalid("need R > 0 and k >= 1"));
    }
    let kf = k as f64;
    if b * r_max >= kf {
        return Err(Error::NonexistenceThreshold {
            condition: "bR>=k".into(),
            detail: format!("b*R = {} >= k = {kf}; no solution on the ball", b * r_max),
        });
    }
    let (g, gp, gpp): (F1, F1, F1) = if b == 0.0 {
        (
            Arc::new(move |r| (r_max * r_max - r * r) / (2.0 * kf)),
            Arc::new(move |r| -r / kf),
            Arc::new(move |_| -1.0 / kf),
        )
    } else {
        (
            Arc::new(move |r| (r - r_max) / b + kf / (b * b) * ((kf - b * r) / (kf - b * r_max)).ln()),
            Arc::new(move |r| -r / (kf - b * r)),
            Arc::new(move |r| -kf / ((kf - b * r) * (kf - b * r))),
        )
    };
    Ok(RadialProfile::from_closures(
        Regime::ConstB,
        r_max,
        k,
        dim,
        None,
        g,
        gp,
        gpp,
    ))
}

/// Radial solution of 𝒫ₖ⁺(D²u) − b|Du| = −1 on B_R (drift pushing inward),
/// b > 0: g′ = h with h(r) = −e^{−br} r^{1−k} ∫₀^r e^{bs} s^{k−1} ds.
pub fn profile_minus_b(b: f64, r_max: f64, k: usize) -> Result<RadialProfile> {
    profile_minus_b_dim(b, r_max, k, k + 1)
}

pub fn profile_minus_b_dim(b: f64, r_max: f64, k: usize, dim: usize) -> Result<RadialProfile> {
    if !(b > 0.0) {
        return Err(Error::invalid("b must be positive"));
    }
    if !(r_max > 0.0) || k == 0 {
        return Err(Error::invalid("need R > 0 and k >= 1"));
    }
    let kf = k as f64;
    let integrand: F1 = Arc::new(move |s: f64| (b * s).exp() * s.powi(k as i32 - 1));
    let i_cum = Arc::new(CumFn::new(integrand, 0.0, r_max, CUM_N));
    let tiny = 1e-6 * r_max;
    let h_fn: F1 = {
        let i_cum = i_cum.clone();
        Arc::new(move |r: f64| {
            if r < tiny {
                -r / kf
            } else {
                -(-b * r).exp() * r.powf(1.0 - kf) * i_cum.eval(r)
            }
        })
    };
    let neg_h: F1 = {
        let h_fn = h_fn.clone();
        Arc::new(move |r| -h_fn(r))
    };
    let g_cum = Arc::new(CumFn::new(neg_h, 0.0, r_max, CUM_N));
    let g_total = g_cum.eval(r_max);
    let g: F1 = Arc::new(move |r| g_total - g_cum.eval(r));
    let gp: F1 = h_fn.clone();
    let gpp: F1 = Arc::new(move |r: f64| {
        if r < tiny {
            -1.0 / kf
        } else {
            let h = h_fn(r);
            -1.0 - (kf - 1.0) * h / r - b * h
        }
    });
    Ok(RadialProfile::from_closures(
        Regime::MinusB,
        r_max,
        k,
        dim,
        None,
        g,
        gp,
        gpp,
    ))
}

/// The smallest radius where r·b(r) reaches k, or R when it never does.
pub fn r0_threshold(c: &DriftCoefficient) -> f64 {
    let kf = c.k as f64;
    let q = |r: f64| r * c.b(r) - kf;
    let n = 1000;
    let h = c.r_max / n as f64;
    let mut prev = q(0.0);
    for i in 1..=n {
        let r = i as f64 * h;
        let cur = q(r);
        if prev < 0.0 && cur >= 0.0 {
            return quad::bisect(q, r - h, r, 1e-12);
        }
        prev = cur;
    }
    c.r_max
}

/// Located flatness point r₀ for the monotonicity hypotheses on (rb)′.
fn locate_r0(c: &DriftCoefficient, reversed: bool) -> Result<f64> {
    let n = 1000;
    let h = c.r_max / n as f64;
    let scale: f64 = (0..=n)
        .map(|i| c.rb_prime(i as f64 * h).abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-10 * scale;
    // Signs of (rb)' over the grid, with the small-magnitude band treated as 0.
    let sgn = |v: f64| {
        if v > tol {
            1
        } else if v < -tol {
            -1
        } else {
            0
        }
    };
    let vals: Vec<i32> = (0..=n).map(|i| sgn(c.rb_prime(i as f64 * h))).collect();
    let (first, second) = if reversed { (1, -1) } else { (-1, 1) };
    // r0 = end of the `first`-sign region.
    let mut last_first: Option<usize> = None;
    let mut first_second: Option<usize> = None;
    for (i, &s) in vals.iter().enumerate() {
        if s == first {
            last_first = Some(i);
        }
        if s == second && first_second.is_none() {
            first_second = Some(i);
        }
    }
    let tag = if reversed { "(H1')" } else { "(H1)" };
    let r0 = match (last_first, first_second) {
        (None, _) => 0.0,
        (Some(_), None) => c.r_max,
        (Some(l), Some(f)) => {
            if l >= f {
                return Err(Error::HypothesisViolation(format!(
                    "{tag}: (rb)' changes sign more than once on (0,R)"
                )));
            }
            let ql = l as f64 * h;
            let qf = f as f64 * h;
            quad::bisect(|r| c.rb_prime(r) * first as f64, ql, qf, 1e-12)
        }
    };
    // Verify (r - r0)(rb)' keeps the hypothesised sign on the whole grid.
    for i in 0..=n {
        let r = i as f64 * h;
        let v = (r - r0) * c.rb_prime(r);
        let bad = if reversed { v > tol * c.r_max } else { v < -tol * c.r_max };
        if bad {
            return Err(Error::HypothesisViolation(format!(
                "{tag} fails at r = {r}: (r-r0)(rb)' = {v}"
            )));
        }
    }
    Ok(r0)
}

/// Dichotomy integral ∫₀^{R₀} r/(k − r b(r)) dr under hypothesis (H1).
pub fn integral_test(c: &DriftCoefficient) -> Result<Improper> {
    locate_r0(c, false)?;
    let r0 = r0_threshold(c);
    let kf = c.k as f64;
    let f = |r: f64| r / (kf - r * c.b(r));
    Ok(quad::integrate_improper(f, 0.0, r0, 1e-12, 1e12))
}

struct WeightedParts {
    b_cum: Arc<CumFn>,
}

impl WeightedParts {
    fn new(c: &DriftCoefficient) -> Self {
        let c2 = c.clone();
        let bf: F1 = Arc::new(move |r| c2.b(r));
        WeightedParts {
            b_cum: Arc::new(CumFn::new(bf, 0.0, c.r_max, CUM_N)),
        }
    }
}

/// Radial solution for radially weighted drift b(r) under (H1):
/// second-order core glued at r̄ (where a(r̄)=0) to the first-order outer
/// branch g₂(r) = ∫_r^R s/(k − s b(s)) ds.
pub fn profile_weighted(c: &DriftCoefficient) -> Result<RadialProfile> {
    let r0 = locate_r0(c, false)?;
    let _ = r0;
    let kf = c.k as f64;
    let k = c.k;
    let r_dom = r0_threshold(c);
    match integral_test(c)? {
        Improper::Infinite => {
            return Err(Error::NonexistenceThreshold {
                condition: "divergent-integral".into(),
                detail: format!(
                    "the dichotomy integral diverges at R0 = {r_dom}; no solution on that ball"
                ),
            })
        }
        Improper::Finite(_) => {}
    }

    let parts = WeightedParts::new(c);
    let b_cum = parts.b_cum.clone();
    // I(r) = ∫₀^r e^{−B(s)} s^{k−1} ds.
    let i_integrand: F1 = {
        let b_cum = b_cum.clone();
        Arc::new(move |s: f64| (-b_cum.eval(s)).exp() * s.powi(k as i32 - 1))
    };
    let i_cum = Arc::new(CumFn::new(i_integrand, 0.0, c.r_max, CUM_N));

    let a_fn = {
        let (b_cum, i_cum, c2) = (b_cum.clone(), i_cum.clone(), c.clone());
        move |r: f64| {
            (kf - r * c2.b(r)) * i_cum.eval(r) - (-b_cum.eval(r)).exp() * r.powf(kf)
        }
    };

    // Locate r̄: a(r̄) = 0 with a < 0 on (r̄, R]. Scan from the outside in.
    let n = 1000;
    let h = c.r_max / n as f64;
    let a_scale: f64 = (0..=n)
        .map(|i| a_fn(i as f64 * h).abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let a_tol = 1e-12 * a_scale.max(1.0);
    // a(0) = 0 always; the glue point is where a crosses from strictly
    // positive to negative, so search for the last strictly positive sample.
    let mut last_pos: Option<usize> = None;
    for i in (0..=n).rev() {
        if a_fn(i as f64 * h) > a_tol {
            last_pos = Some(i);
            break;
        }
    }
    let r_bar = match last_pos {
        None => 0.0,
        Some(i) if i == n => c.r_max, // a ≥ 0 everywhere: pure second-order
        Some(i) => {
            let lo = i as f64 * h;
            let hi = (i + 1) as f64 * h;
            quad::bisect(&a_fn, lo, hi, 1e-12)
        }
    };

    let tiny = 1e-6 * c.r_max;
    let h1_fn: F1 = {
        let (b_cum, i_cum) = (b_cum.clone(), i_cum.clone());
        Arc::new(move |r: f64| {
            if r < tiny {
                -r / kf
            } else {
                -(b_cum.eval(r)).exp() * r.powf(1.0 - kf) * i_cum.eval(r)
            }
        })
    };
    let c_outer = c.clone();
    let g2p = move |r: f64| -r / (kf - r * c_outer.b(r));
    let c_outer2 = c.clone();
    let g2pp = move |r: f64| {
        let denom = kf - r * c_outer2.b(r);
        -(kf + r * r * c_outer2.db(r)) / (denom * denom)
    };
    let c_g2 = c.clone();
    let r_max = c.r_max;
    let g2 = move |r: f64| {
        match quad::integrate_improper(|s| s / (kf - s * c_g2.b(s)), r, r_max, 1e-12, 1e12) {
            Improper::Finite(v) => v,
            Improper::Infinite => f64::INFINITY,
        }
    };

    let c_pp = c.clone();
    let g1pp = {
        let h1_fn = h1_fn.clone();
        move |r: f64| {
            if r < tiny {
                -1.0 / kf
            } else {
                let hh = h1_fn(r);
                -1.0 - (kf - 1.0) * hh / r + c_pp.b(r) * hh
            }
        }
    };

    if r_bar <= tiny {
        // Pure first-order profile.
        return Ok(RadialProfile::from_closures(
            Regime::WeightedFirstOrder,
            c.r_max,
            k,
            c.dim,
            None,
            Arc::new(g2),
            Arc::new(g2p),
            Arc::new(g2pp),
        ));
    }

    // Inner branch g₁ on [0, r̄]: g(r) = g₂(r̄) + ∫_r^{r̄} (−h₁).
    let neg_h1: F1 = {
        let h1_fn = h1_fn.clone();
        Arc::new(move |r| -h1_fn(r))
    };
    let g1_cum = Arc::new(CumFn::new(neg_h1, 0.0, r_bar.min(c.r_max), CUM_N));
    let g1_at_bar = g1_cum.eval(r_bar.min(c.r_max));

    if r_bar >= c.r_max - tiny {
        // Pure second-order profile.
        let g = Arc::new(move |r: f64| g1_at_bar - g1_cum.eval(r));
        return Ok(RadialProfile::from_closures(
            Regime::WeightedSecondOrder,
            c.r_max,
            k,
            c.dim,
            None,
            g,
            h1_fn,
            Arc::new(g1pp),
        ));
    }

    let g2_at_bar = g2(r_bar);
    let g: F1 = Arc::new(move |r: f64| {
        if r <= r_bar {
            g2_at_bar + (g1_at_bar - g1_cum.eval(r))
        } else {
            g2(r)
        }
    });
    let gp: F1 = Arc::new(move |r: f64| if r <= r_bar { h1_fn(r) } else { g2p(r) });
    let gpp: F1 = Arc::new(move |r: f64| if r <= r_bar { g1pp(r) } else { g2pp(r) });
    Ok(RadialProfile::from_closures(
        Regime::WeightedGlued { r_glue: r_bar },
        c.r_max,
        k,
        c.dim,
        Some(r_bar),
        g,
        gp,
        gpp,
    ))
}

/// Radial solution under the reversed monotonicity hypothesis (H1′):
/// first-order branch on [0, r₀] glued C² to the second-order branch
/// g′(r) = −e^{B(r)} r^{1−k} (c₂ + ∫_{r₀}^r e^{−B} s^{k−1} ds) on [r₀, R].
pub fn profile_weighted_reversed(c: &DriftCoefficient) -> Result<RadialProfile> {
    let r0 = locate_r0(c, true)?;
    let kf = c.k as f64;
    let k = c.k;
    // First-order branch needs k − r b(r) > 0 up to r₀.
    let n = 1000;
    for i in 0..=n {
        let r = r0 * i as f64 / n as f64;
        if kf - r * c.b(r) <= 0.0 {
            return Err(Error::HypothesisViolation(format!(
                "k - r b(r) <= 0 at r = {r} inside [0, r0]"
            )));
        }
    }
    let c_in = c.clone();
    let g1p = move |r: f64| -r / (kf - r * c_in.b(r));
    let c_in2 = c.clone();
    let g1pp = move |r: f64| {
        let denom = kf - r * c_in2.b(r);
        -(kf + r * r * c_in2.db(r)) / (denom * denom)
    };

    if r0 >= c.r_max * (1.0 - 1e-12) {
        // Degenerate case: first-order branch covers the whole ball.
        let c_g = c.clone();
        let r_max = c.r_max;
        let g = move |r: f64| quad::integrate(|s| s / (kf - s * c_g.b(s)), r, r_max, 1e-12);
        return Ok(RadialProfile::from_closures(
            Regime::WeightedFirstOrder,
            c.r_max,
            k,
            c.dim,
            None,
            Arc::new(g),
            Arc::new(g1p),
            Arc::new(g1pp),
        ));
    }

    let parts = WeightedParts::new(c);
    let b_cum = parts.b_cum.clone();
    let c2_const = r0.powf(kf) * (-b_cum.eval(r0)).exp() / (kf - r0 * c.b(r0));
    // J(r) = ∫_{r₀}^r e^{−B} s^{k−1} ds.
    let j_integrand: F1 = {
        let b_cum = b_cum.clone();
        Arc::new(move |s: f64| (-b_cum.eval(s)).exp() * s.powi(k as i32 - 1))
    };
    let j_cum = Arc::new(CumFn::new(j_integrand, r0, c.r_max, CUM_N));
    let h_fn: F1 = {
        let b_cum = b_cum.clone();
        Arc::new(move |r: f64| {
            -(b_cum.eval(r)).exp() * r.powf(1.0 - kf) * (c2_const + j_cum.eval(r))
        })
    };
    let neg_h: F1 = {
        let h_fn = h_fn.clone();
        Arc::new(move |r| -h_fn(r))
    };
    let g_outer_cum = Arc::new(CumFn::new(neg_h, r0, c.r_max, CUM_N));
    let g_outer_total = g_outer_cum.eval(c.r_max);
    let g_at_r0 = g_outer_total; // g(r0)
    let c_g1 = c.clone();
    let g: F1 = Arc::new(move |r: f64| {
        if r <= r0 {
            g_at_r0 + quad::integrate(|s| s / (kf - s * c_g1.b(s)), r, r0, 1e-12)
        } else {
            g_outer_total - g_outer_cum.eval(r)
        }
    });
    let gp: F1 = {
        let h_fn = h_fn.clone();
        Arc::new(move |r: f64| if r <= r0 { g1p(r) } else { h_fn(r) })
    };
    let c_pp = c.clone();
    let gpp: F1 = Arc::new(move |r: f64| {
        if r <= r0 {
            g1pp(r)
        } else {
            let hh = h_fn(r);
            -1.0 - (kf - 1.0) * hh / r + c_pp.b(r) * hh
        }
    });
    Ok(RadialProfile::from_closures(
        Regime::WeightedGluedReversed { r_glue: r0 },
        c.r_max,
        k,
        c.dim,
        Some(r0),
        g,
        gp,
        gpp,
    ))
}

/// Explicit eigen-family at the critical drift b ≡ k/R:
/// φ(r) = a (1 − r/R)^{μR²/k} e^{μRr/k}, valid for 0 < μ ≤ k/R².
pub fn critical_eigen_profile(mu: f64, a: f64, r_max: f64, k: usize) -> Result<RadialProfile> {
    if !(a > 0.0) || !(r_max > 0.0) || k == 0 {
        return Err(Error::invalid("need a > 0, R > 0, k >= 1"));
    }
    let kf = k as f64;
    if !(mu > 0.0) {
        return Err(Error::invalid("mu must be positive"));
    }
    if mu > kf / (r_max * r_max) {
        return Err(Error::invalid(format!(
            "mu = {mu} exceeds k/R^2 = {}; the family is not a valid profile there",
            kf / (r_max * r_max)
        )));
    }
    let m = mu * r_max * r_max / kf; // exponent
    let cc = mu * r_max / kf;
    let phi = move |r: f64| a * (1.0 - r / r_max).max(0.0).powf(m) * (cc * r).exp();
    let g: F1 = Arc::new(phi);
    let gp: F1 = Arc::new(move |r: f64| {
        if r >= r_max {
            // one-sided limit; for m > 1 the derivative vanishes at R
            if m > 1.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -phi(r) * cc * r / (r_max - r)
        }
    });
    let gpp: F1 = Arc::new(move |r: f64| {
        let d = r_max - r;
        phi(r) * cc * (cc * r * r - r_max) / (d * d)
    });
    Ok(RadialProfile::from_closures(
        Regime::CriticalEigen { mu, a },
        r_max,
        k,
        k + 1,
        None,
        g,
        gp,
        gpp,
    ))
}

/// Sign-scan for failure of the concavity-type condition φ″ ≤ φ′/r of the
/// critical family; returns the first sampled radius where it fails.
pub fn critical_condition_fails_at(mu: f64, r_max: f64, k: usize) -> Option<f64> {
    let kf = k as f64;
    let cc = mu * r_max / kf;
    // φ″ − φ′/r has the sign of (c·r − 1); it fails once c·r > 1 inside.
    let n = 2000;
    for i in 1..n {
        let r = r_max * i as f64 / n as f64;
        if cc * r > 1.0 + 1e-12 {
            return Some(r);
        }
    }
    None
}

/// Weighted principal-eigenfunction candidate under (H2):
/// φ(r) = φ(0) exp(−μ ∫₀^r s/(k − s b(s)) ds), normalized to φ(0) = 1.
pub fn weighted_eigen_profile(c: &DriftCoefficient, mu: f64) -> Result<RadialProfile> {
    let kf = c.k as f64;
    if mu < 0.0 {
        return Err(Error::invalid("mu must be nonnegative"));
    }
    // (H2): l = inf (rb)'/r > 0, sampled.
    let n = 1000;
    let mut l = f64::INFINITY;
    for i in 1..=n {
        let r = c.r_max * i as f64 / n as f64;
        l = l.min(c.rb_prime(r) / r);
    }
    if !(l > 0.0) {
        return Err(Error::HypothesisViolation(format!(
            "(H2) fails: inf (rb)'/r = {l} is not positive"
        )));
    }
    let rb_at_r = c.r_max * c.b(c.r_max);
    if (rb_at_r - kf).abs() > 1e-9 {
        return Err(Error::HypothesisViolation(format!(
            "R b(R) = {rb_at_r} must equal k = {kf}"
        )));
    }
    if mu > l + 1e-12 {
        return Err(Error::invalid(format!("mu = {mu} exceeds l = {l}")));
    }
    // Tail test: does ∫^R s/(k − s b(s)) ds diverge?
    let boundary_vanishing = matches!(
        quad::integrate_improper(|s| s / (kf - s * c.b(s)), 0.0, c.r_max, 1e-12, 1e12),
        Improper::Infinite
    );
    let c_int = c.clone();
    let r_max = c.r_max;
    let inner = move |r: f64| {
        quad::integrate(|s| s / (kf - s * c_int.b(s)), 0.0, r.min(r_max * (1.0 - 1e-14)), 1e-12)
    };
    let inner = Arc::new(inner);
    let phi = {
        let inner = inner.clone();
        move |r: f64| {
            if r >= r_max && boundary_vanishing {
                0.0
            } else {
                (-mu * inner(r)).exp()
            }
        }
    };
    let phi = Arc::new(phi);
    let g: F1 = {
        let phi = phi.clone();
        Arc::new(move |r| phi(r))
    };
    let c_p = c.clone();
    let gp: F1 = {
        let phi = phi.clone();
        Arc::new(move |r: f64| -mu * r / (kf - r * c_p.b(r)) * phi(r))
    };
    let c_pp = c.clone();
    let gpp: F1 = Arc::new(move |r: f64| {
        let denom = kf - r * c_pp.b(r);
        phi(r) * mu * (mu * r * r - kf - r * r * c_pp.db(r)) / (denom * denom)
    });
    Ok(RadialProfile::from_closures(
        Regime::WeightedEigen {
            mu,
            boundary_vanishing,
        },
        c.r_max,
        c.k,
        c.dim,
        None,
        g,
        gp,
        gpp,
    ))
}

/// Max residual of 𝒫ₖ⁺(D²g) ± b(r)|Dg| − rhs(r) over sampled radii,
/// skipping a small window around any glue radius.
pub fn radial_residual<F>(
    p: &RadialProfile,
    c: &DriftCoefficient,
    rhs: F,
    sign_b: Side,
    samples: usize,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let r_lo = 1e-3 * p.r_max;
    let r_hi = p.r_max - 1e-3 * p.r_max;
    let window = 1e-3 * p.r_max;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let r = r_lo + (r_hi - r_lo) * i as f64 / (samples.max(2) - 1) as f64;
        if let Some(rg) = p.glue_radius {
            if (r - rg).abs() < window {
                continue;
            }
        }
        let h = RadialHessian {
            gp: p.gp(r),
            gpp: p.gpp(r),
            r,
            dim: p.dim,
        };
        let pk = match pk_radial(&h, p.k, Side::Plus) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let drift = match sign_b {
            Side::Plus => c.b(r) * p.gp(r).abs(),
            Side::Minus => -c.b(r) * p.gp(r).abs(),
        };
        worst = worst.max((pk + drift - rhs(r)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn const_b_closed_form() {
        let p = profile_const_b(0.5, 1.0, 1).unwrap();
        assert_eq!(p.g(1.0), 0.0);
        assert!((p.g(0.0) - (4.0 * 2f64.ln() - 2.0)).abs() <= 1e-10);
        let c = DriftCoefficient::constant(0.5, 1.0, 1, 2).unwrap();
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Plus, 1000) < 1e-8);
    }

    #[test]
    fn const_b_zero_drift() {
        let p = profile_const_b(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(p.g(0.0), 0.5);
        assert_relative_eq!(p.g(0.6), (1.0 - 0.36) / 2.0);
    }

    #[test]
    fn const_b_threshold() {
        match profile_const_b(1.0, 1.0, 1) {
            Err(Error::NonexistenceThreshold { condition, .. }) => {
                assert_eq!(condition, "bR>=k")
            }
            other => panic!("expected threshold error, got {:?}", other.map(|p| p.regime)),
        }
        assert!(profile_const_b(1.2, 1.0, 1).is_err());
        assert!(profile_const_b(1.2, 1.0, 2).is_ok());
    }

    #[test]
    fn minus_b_closed_form() {
        let p = profile_minus_b(1.0, 1.0, 1).unwrap();
        assert!((p.g(0.0) - (-1.0f64).exp()).abs() <= 1e-10, "g(0) = {}", p.g(0.0));
        assert!(p.g(1.0).abs() <= 1e-12);
        // h(r) = −(1 − e^{−r}) for k = 1, b = 1.
        for i in 1..20 {
            let r = i as f64 / 20.0;
            assert_relative_eq!(p.gp(r), -(1.0 - (-r).exp()), epsilon = 1e-10);
        }
        let c = DriftCoefficient::constant(1.0, 1.0, 1, 2).unwrap();
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Minus, 1000) < 1e-8);
    }

    #[test]
    fn minus_b_a_nonnegative() {
        // a(r) = (k + br) ∫₀^r e^{bs} s^{k−1} ds − r^k e^{br} ≥ 0.
        for &(b, k) in &[(1.0, 1usize), (0.7, 2), (2.0, 3)] {
            let kf = k as f64;
            for i in 1..=1000 {
                let r = i as f64 / 1000.0;
                let integral = quad::integrate(|s| (b * s).exp() * s.powi(k as i32 - 1), 0.0, r, 1e-13);
                let a = (kf + b * r) * integral - r.powf(kf) * (b * r).exp();
                assert!(a >= -1e-12, "a({r}) = {a} for b={b}, k={k}");
            }
        }
    }

    #[test]
    fn minus_b_residual_general_k() {
        let p = profile_minus_b(0.8, 1.5, 2).unwrap();
        let c = DriftCoefficient::constant(0.8, 1.5, 2, 3).unwrap();
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Minus, 1000) < 1e-8);
    }

    #[test]
    fn r0_threshold_cases() {
        let c = DriftCoefficient::constant(0.5, 3.0, 1, 2).unwrap();
        assert_relative_eq!(r0_threshold(&c), 2.0, epsilon = 1e-10);
        let c = DriftCoefficient::constant(0.1, 3.0, 1, 2).unwrap();
        assert_relative_eq!(r0_threshold(&c), 3.0);
        let c = DriftCoefficient::callable(|r| r, None, 2.0, 1, 2).unwrap();
        assert_relative_eq!(r0_threshold(&c), 1.0, epsilon = 1e-10);
        let c = DriftCoefficient::callable(|r| r - 1.0, None, 1.0, 1, 2).unwrap();
        assert_relative_eq!(r0_threshold(&c), 1.0);
    }

    #[test]
    fn integral_test_cases() {
        let c = DriftCoefficient::callable(|r| r, None, 2.0, 1, 2).unwrap();
        assert_eq!(integral_test(&c).unwrap(), Improper::Infinite);

        let c = DriftCoefficient::callable(|r| r, None, 0.8, 1, 2).unwrap();
        match integral_test(&c).unwrap() {
            Improper::Finite(v) => {
                assert!((v - 0.5 * (1.0 / 0.36f64).ln()).abs() < 1e-8, "got {v}")
            }
            Improper::Infinite => panic!("should be finite"),
        }

        let c = DriftCoefficient::constant(0.5, 1.0, 1, 2).unwrap();
        assert!(matches!(integral_test(&c).unwrap(), Improper::Finite(_)));
    }

    #[test]
    fn weighted_first_order_case() {
        let c = DriftCoefficient::callable(|r| r, None, 0.8, 1, 2).unwrap();
        let p = profile_weighted(&c).unwrap();
        assert_eq!(p.regime, Regime::WeightedFirstOrder);
        assert!((p.g(0.0) - 0.51082562376599072).abs() <= 1e-8, "g(0) = {}", p.g(0.0));
        assert!(p.g(0.8).abs() < 1e-10);
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Plus, 500) < 1e-8);
    }

    #[test]
    fn weighted_glued_case() {
        let c = DriftCoefficient::callable(|r| r - 1.0, None, 1.0, 1, 2).unwrap();
        let p = profile_weighted(&c).unwrap();
        let r_bar = match p.regime {
            Regime::WeightedGlued { r_glue } => r_glue,
            other => panic!("expected glued regime, got {other:?}"),
        };
        assert!(r_bar > 0.5 && r_bar < 1.0, "r_bar = {r_bar}");
        // C¹ match at r̄.
        let eps = 1e-7;
        assert!((p.gp(r_bar - eps) - p.gp(r_bar + eps)).abs() < 1e-5);
        let kf = 1.0;
        let exact_gp = -r_bar / (kf - r_bar * (r_bar - 1.0));
        assert!((p.gp(r_bar - 1e-12) - exact_gp).abs() < 1e-8);
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Plus, 1000) < 1e-6);
        // Regime inequalities: g″ ≥ g′/r inside (second-order), ≤ outside.
        for i in 1..50 {
            let r = r_bar * i as f64 / 50.0;
            assert!(p.gpp(r) >= p.gp(r) / r - 1e-8);
        }
        for i in 1..50 {
            let r = r_bar + (1.0 - r_bar) * i as f64 / 51.0;
            assert!(p.gpp(r) <= p.gp(r) / r + 1e-8);
        }
    }

    #[test]
    fn weighted_reduces_to_const_b() {
        let b = 0.6;
        let c = DriftCoefficient::callable(move |_| b, None, 1.0, 1, 2).unwrap();
        let p = profile_weighted(&c).unwrap();
        let q = profile_const_b(b, 1.0, 1).unwrap();
        for i in 0..=100 {
            let r = i as f64 / 100.0;
            assert!((p.g(r) - q.g(r)).abs() < 1e-9, "mismatch at r={r}");
        }
    }

    #[test]
    fn weighted_divergent_is_nonexistence() {
        let c = DriftCoefficient::callable(|r| r, None, 2.0, 1, 2).unwrap();
        match profile_weighted(&c) {
            Err(Error::NonexistenceThreshold { condition, .. }) => {
                assert_eq!(condition, "divergent-integral")
            }
            other => panic!("expected nonexistence, got {:?}", other.map(|p| p.regime)),
        }
    }

    #[test]
    fn weighted_reversed_glued() {
        let c = DriftCoefficient::callable(|r| 1.0 - r, None, 1.0, 1, 2).unwrap();
        let p = profile_weighted_reversed(&c).unwrap();
        let r0 = match p.regime {
            Regime::WeightedGluedReversed { r_glue } => r_glue,
            other => panic!("expected reversed glued regime, got {other:?}"),
        };
        assert!((r0 - 0.5).abs() < 1e-9, "r0 = {r0}");
        // C¹ and C² at r₀.
        let eps = 1e-6;
        assert!((p.gp(r0 - eps) - p.gp(r0 + eps)).abs() < 1e-5);
        assert!((p.gpp(r0 - 1e-9) - p.gpp(r0 + 1e-9)).abs() < 1e-6);
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Plus, 1000) < 1e-6);
        assert!(p.g(1.0).abs() < 1e-10);
    }

    #[test]
    fn weighted_reversed_const_degenerate() {
        let b = 0.4;
        let c = DriftCoefficient::constant(b, 1.0, 1, 2).unwrap();
        let p = profile_weighted_reversed(&c).unwrap();
        assert_eq!(p.regime, Regime::WeightedFirstOrder);
        let q = profile_const_b(b, 1.0, 1).unwrap();
        for i in 0..=50 {
            let r = i as f64 / 50.0;
            assert!((p.g(r) - q.g(r)).abs() < 1e-9);
        }
    }

    #[test]
    fn critical_eigen_family() {
        let p = critical_eigen_profile(1.0, 1.0, 1.0, 1).unwrap();
        assert!((p.g(0.5) - 0.5 * 0.5f64.exp()).abs() < 1e-12);
        assert_relative_eq!(p.g(0.0), 1.0);
        assert_eq!(p.g(1.0), 0.0);
        let c = DriftCoefficient::constant(1.0, 1.0, 1, 2).unwrap();
        let res = radial_residual(&p, &c, |r| -1.0 * p.g(r), Side::Plus, 1000);
        assert!(res < 1e-8, "residual {res}");
        // a-scaling invariance.
        for &a in &[0.5, 2.0] {
            let pa = critical_eigen_profile(1.0, a, 1.0, 1).unwrap();
            let res = radial_residual(&pa, &c, |r| -1.0 * pa.g(r), Side::Plus, 500);
            assert!(res < 1e-8);
        }
        assert!(critical_eigen_profile(1.2, 1.0, 1.0, 1).is_err());
        assert!(critical_condition_fails_at(1.1, 1.0, 1).is_some());
        assert!(critical_condition_fails_at(1.0, 1.0, 1).is_none());
    }

    #[test]
    fn weighted_eigen_family() {
        let c = DriftCoefficient::callable(|r| r, None, 1.0, 1, 2).unwrap(); // b = kr/R², k=1, R=1
        let p = weighted_eigen_profile(&c, 1.0).unwrap(); // μ = l/2 = 1
        match p.regime {
            Regime::WeightedEigen {
                boundary_vanishing, ..
            } => assert!(boundary_vanishing),
            other => panic!("unexpected regime {other:?}"),
        }
        // Closed form (1 − r²)^{1/2}.
        for i in 0..20 {
            let r = i as f64 / 20.0;
            assert!((p.g(r) - (1.0 - r * r).sqrt()).abs() < 1e-10);
        }
        let res = radial_residual(&p, &c, |r| -1.0 * p.g(r), Side::Plus, 500);
        assert!(res < 1e-8, "residual {res}");
        // μ = 0 → constant.
        let p0 = weighted_eigen_profile(&c, 0.0).unwrap();
        assert_relative_eq!(p0.g(0.3), 1.0);
        // μ above l rejected; wrong boundary drift rejected.
        assert!(weighted_eigen_profile(&c, 2.5).is_err());
        let bad = DriftCoefficient::callable(|r| 0.5 * r, None, 1.0, 1, 2).unwrap();
        assert!(weighted_eigen_profile(&bad, 0.5).is_err());
    }

    #[test]
    fn monotone_in_b_and_b_to_zero() {
        let mut prev_g0 = f64::INFINITY;
        for &b in &[0.8, 0.4, 0.1, 1e-1, 1e-2, 1e-3] {
            let p = profile_const_b(b, 1.0, 1).unwrap();
            // pointwise decrease as b increases ⇒ increase as b decreases
            assert!(p.g(0.0) <= prev_g0 + 1e-12);
            prev_g0 = p.g(0.0);
        }
        // b → 0 uniform convergence to (R² − r²)/2.
        for &b in &[1e-1, 1e-2, 1e-3] {
            let p = profile_const_b(b, 1.0, 1).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..=100 {
                let r = i as f64 / 100.0;
                worst = worst.max((p.g(r) - (1.0 - r * r) / 2.0).abs());
            }
            assert!(worst < b, "deviation {worst} at b={b}");
        }
    }

    #[test]
    fn gp_vanishes_at_origin() {
        let profiles = vec![
            profile_const_b(0.5, 1.0, 1).unwrap(),
            profile_minus_b(1.0, 1.0, 1).unwrap(),
            profile_weighted(&DriftCoefficient::callable(|r| r - 1.0, None, 1.0, 1, 2).unwrap())
                .unwrap(),
        ];
        for p in profiles {
            assert!(p.gp(1e-9).abs() < 1e-8);
        }
    }

    #[test]
    fn corrupted_profile_detected() {
        let p = profile_const_b(0.5, 1.0, 1).unwrap().scaled(1.1);
        let c = DriftCoefficient::constant(0.5, 1.0, 1, 2).unwrap();
        assert!(radial_residual(&p, &c, |_| -1.0, Side::Plus, 500) > 0.05);
    }

    #[test]
    fn h1_violation_reported() {
        // (rb)' = (r sin(8r))' oscillates: (H1) cannot hold.
        let c = DriftCoefficient::callable(|r| (8.0 * r).sin(), None, 2.0, 1, 2).unwrap();
        assert!(matches!(
            integral_test(&c),
            Err(Error::HypothesisViolation(_))
        ));
    }
}
