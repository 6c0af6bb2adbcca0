//! Monotone pseudo-time solver for the degenerate elliptic Dirichlet problem
//! 𝒫ₖ⁺(D²u) ± b|Du| = f, u = 0 on the boundary, on a wide-stencil grid.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, GridField};
use crate::matrix::Side;

/// Drift magnitude b(x) ≥ 0.
#[derive(Clone)]
pub enum Bfield {
    Zero,
    Constant(f64),
    /// b as a function of r = |x|.
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Callable(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

/// Signed drift term: `side` selects ±b|Du|.
#[derive(Clone)]
pub struct Drift {
    pub side: Side,
    pub magnitude: Bfield,
}

impl Drift {
    pub fn zero() -> Self {
        Drift {
            side: Side::Plus,
            magnitude: Bfield::Zero,
        }
    }
    pub fn constant(side: Side, b: f64) -> Result<Self> {
        if !(b >= 0.0) {
            return Err(Error::invalid("drift magnitude must be nonnegative"));
        }
        Ok(Drift {
            side,
            magnitude: Bfield::Constant(b),
        })
    }
    pub fn radial(side: Side, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Drift {
            side,
            magnitude: Bfield::Radial(Arc::new(f)),
        }
    }
}

#[derive(Clone, Copy)]
pub enum Momentum {
    /// Heavy-ball acceleration with β from the grid's condition estimate.
    Auto,
    Off,
    Beta(f64),
}

/// Scheme parameters: operator index k, stencil width, drift, pseudo-time
/// safety factor, stopping tolerances, and blow-up handling.
#[derive(Clone)]
pub struct SchemeConfig {
    pub k: usize,
    pub width: i32,
    pub drift: Drift,
    pub theta: f64,
    /// Absolute residual tolerance; None means 1e-6 · max(1, ‖f‖∞).
    pub tol: Option<f64>,
    pub max_sweeps: usize,
    /// Sup-norm cap; None means 10⁴ · diam² · (‖f‖∞ + 1).
    pub blow_up_cap: Option<f64>,
    pub momentum: Momentum,
    /// Point whose iterate history feeds the blow-up certificate
    /// (defaults to the lattice origin when it is interior).
    pub probe: Option<Vec<f64>>,
    /// Threshold whose first crossing by the probe iterate is recorded.
    pub probe_threshold: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            k: 1,
            width: 3,
            drift: Drift::zero(),
            theta: 0.8,
            tol: None,
            max_sweeps: 400_000,
            blow_up_cap: None,
            momentum: Momentum::Auto,
            probe: None,
            probe_threshold: None,
        }
    }
}

impl SchemeConfig {
    pub fn drift_at(&self, x: &[f64]) -> Result<f64> {
        let b = match &self.drift.magnitude {
            Bfield::Zero => 0.0,
            Bfield::Constant(c) => *c,
            Bfield::Radial(f) => f(crate::la::norm(x)),
            Bfield::Callable(f) => f(x),
        };
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::invalid(format!(
                "drift magnitude must be finite and nonnegative, got {b} at {x:?}"
            )));
        }
        Ok(b)
    }
}

/// Growth evidence attached to a BlowUp outcome: the cap, the trailing
/// sup-norm window (monotone increasing), and the probe iterate history
/// against an optional comparison threshold.
#[derive(Debug, Clone)]
pub struct BlowUpCertificate {
    pub cap: f64,
    pub sup_tail: Vec<f64>,
    pub probe: Vec<f64>,
    pub probe_value: f64,
    pub threshold: Option<f64>,
    /// Sweep at which the probe iterate first exceeded the threshold.
    pub threshold_sweep: Option<usize>,
}

pub enum Outcome {
    Converged(GridField),
    BlowUp {
        snapshot: GridField,
        certificate: BlowUpCertificate,
    },
    MaxIterations {
        field: GridField,
        residual: f64,
    },
}

pub struct SolveReport {
    pub outcome: Outcome,
    /// (sweep, max residual) samples.
    pub residual_history: Vec<(usize, f64)>,
    /// Max |u| over nodes with a shortened boundary arm.
    pub boundary_trace: f64,
    pub sweeps: usize,
    pub wall_clock: Duration,
}

impl SolveReport {
    pub fn field(&self) -> &GridField {
        match &self.outcome {
            Outcome::Converged(f) => f,
            Outcome::BlowUp { snapshot, .. } => snapshot,
            Outcome::MaxIterations { field, .. } => field,
        }
    }
    pub fn converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged(_))
    }
}

/// Discrete 𝒫ₖ⁺ at interior node `node` (position in the interior list).
pub fn discrete_pk_plus(field: &GridField, node: usize, k: usize) -> Result<f64> {
    field.grid.pk_plus(&field.values, node, k)
}

/// Upwind gradient-norm term with the monotone one-sided pattern for the
/// given drift sign.
pub fn upwind_grad_norm(field: &GridField, node: usize, side: Side) -> f64 {
    field
        .grid
        .upwind(&field.values, node, matches!(side, Side::Plus))
}

/// Full spatial operator 𝒫ₖ⁺ + b·(signed upwind term) at a node.
pub fn operator_value(
    grid: &Grid,
    values: &[f64],
    node: usize,
    k: usize,
    side: Side,
    b: f64,
) -> Result<f64> {
    let pk = grid.pk_plus(values, node, k)?;
    let up = grid.upwind(values, node, matches!(side, Side::Plus));
    Ok(pk + b * up)
}

/// One explicit pseudo-time update u + Δt·(G[u] − f); nondecreasing in every
/// stencil value when Δt ≤ θ / stiffness.
pub fn node_update(
    grid: &Grid,
    values: &[f64],
    node: usize,
    k: usize,
    side: Side,
    b: f64,
    f_val: f64,
    dt: f64,
) -> Result<f64> {
    let flat = grid.interior[node] as usize;
    Ok(values[flat] + dt * (operator_value(grid, values, node, k, side, b)? - f_val))
}

/// Max interior residual |𝒫ₖ⁺ + b·drift − f| of a field.
pub fn residual_norm(
    field: &GridField,
    f: impl Fn(&[f64]) -> f64 + Sync,
    cfg: &SchemeConfig,
) -> Result<f64> {
    let grid = &field.grid;
    let mut worst = 0.0f64;
    for node in 0..grid.interior.len() {
        let x = grid.coords(grid.interior[node]);
        let b = cfg.drift_at(&x)?;
        let val = operator_value(grid, &field.values, node, cfg.k, cfg.drift.side, b)?;
        worst = worst.max((val - f(&x)).abs());
    }
    Ok(worst)
}

/// Solve the Dirichlet problem on `domain` at spacing `h`.
pub fn solve_dirichlet(
    domain: &dyn Domain,
    f: impl Fn(&[f64]) -> f64 + Sync,
    h: f64,
    cfg: &SchemeConfig,
) -> Result<SolveReport> {
    let grid = Arc::new(Grid::new(domain, h, cfg.width)?);
    let f_vals: Vec<f64> = grid
        .interior
        .iter()
        .map(|&flat| f(&grid.coords(flat)))
        .collect();
    solve_on_grid(grid, &f_vals, cfg, None)
}

/// Solve at spacing `h` through a ladder of `levels` coarser grids (factors
/// of two), warm-starting each level with the interpolated previous
/// solution. Falls back to returning the coarse-level report if a level
/// blows up or stalls.
pub fn solve_cascade(
    domain: &dyn Domain,
    f: impl Fn(&[f64]) -> f64 + Sync,
    h: f64,
    levels: usize,
    cfg: &SchemeConfig,
) -> Result<SolveReport> {
    let mut prev: Option<GridField> = None;
    for lev in (0..=levels).rev() {
        let hl = h * (1 << lev) as f64;
        let grid = Arc::new(Grid::new(domain, hl, cfg.width)?);
        let f_vals: Vec<f64> = grid
            .interior
            .iter()
            .map(|&flat| f(&grid.coords(flat)))
            .collect();
        let init = prev
            .take()
            .map(|coarse| GridField::sample(grid.clone(), |x| coarse.value_at(x)));
        let report = solve_on_grid(grid, &f_vals, cfg, init.as_ref())?;
        if lev == 0 {
            return Ok(report);
        }
        match report.outcome {
            Outcome::Converged(ref field) => prev = Some(field.clone()),
            _ => return Ok(report),
        }
    }
    unreachable!("the lev == 0 iteration always returns");
}

/// Solve on a prebuilt grid with per-interior-node right-hand side, starting
/// from `init` (zero field when None).
pub fn solve_on_grid(
    grid: Arc<Grid>,
    f_vals: &[f64],
    cfg: &SchemeConfig,
    init: Option<&GridField>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let ni = grid.interior.len();
    if f_vals.len() != ni {
        return Err(Error::invalid("rhs length must match the interior count"));
    }
    if cfg.k == 0 || cfg.k > grid.dim {
        return Err(Error::invalid("k must satisfy 1 <= k <= N"));
    }
    if !(cfg.theta > 0.0 && cfg.theta <= 0.9) {
        return Err(Error::invalid("theta must lie in (0, 0.9]"));
    }
    let side = cfg.drift.side;
    let plus = matches!(side, Side::Plus);
    let b_vals: Vec<f64> = grid
        .interior
        .iter()
        .map(|&flat| cfg.drift_at(&grid.coords(flat)))
        .collect::<Result<_>>()?;
    let dt: Vec<f64> = (0..ni)
        .map(|i| cfg.theta / grid.node_stiffness(i, cfg.k, b_vals[i]))
        .collect();
    let f_inf = f_vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = cfg.tol.unwrap_or(1e-6 * f_inf.max(1.0));
    let cap = cfg
        .blow_up_cap
        .unwrap_or(1e4 * grid.diameter * grid.diameter * (f_inf + 1.0));
    let mut beta = match cfg.momentum {
        Momentum::Off => 0.0,
        Momentum::Beta(b) => b,
        Momentum::Auto => {
            let kappa = (grid.diameter / grid.h).powi(2).max(1.0);
            let s = kappa.sqrt();
            ((s - 1.0) / (s + 1.0)).powi(2)
        }
    };

    let mut values = match init {
        Some(field) => {
            if field.values.len() != grid.total_nodes() {
                return Err(Error::invalid("initial field is on a different grid"));
            }
            let mut v = field.values.clone();
            // Exterior nodes carry the Dirichlet value regardless of what
            // the warm start sampled there.
            for flat in 0..grid.total_nodes() as u32 {
                if !grid.is_interior(flat) {
                    v[flat as usize] = 0.0;
                }
            }
            v
        }
        None => vec![0.0; grid.total_nodes()],
    };
    let mut prev = values.clone();
    let probe_flat = cfg
        .probe
        .as_ref()
        .and_then(|p| grid.nearest_node(p))
        .or_else(|| grid.nearest_node(&vec![0.0; grid.dim]))
        .filter(|&n| grid.is_interior(n))
        .unwrap_or(grid.interior[0]);
    let probe_coords = grid.coords(probe_flat);

    let mut residual_history = Vec::new();
    let mut sup_tail: VecDeque<f64> = VecDeque::with_capacity(101);
    let mut threshold_sweep = None;
    let mut outcome = None;
    let mut sweeps = 0;
    let mut last_res = f64::INFINITY;
    // Adaptive restart: the nonsmooth max-type operator can trap heavy-ball
    // momentum in a limit cycle; kill the momentum (and damp β) whenever the
    // residual stops improving for a stretch.
    let mut best_res = f64::INFINITY;
    let mut stalled = 0usize;

    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        // Jacobi sweep: every interior node updates from the previous field.
        let updates: Vec<(f64, f64)> = (0..ni)
            .into_par_iter()
            .map(|i| {
                let flat = grid.interior[i] as usize;
                let pk = match cfg.k {
                    1 => (0..grid.dirs.len())
                        .map(|d| grid.second_diff(&values, i, d))
                        .fold(f64::NEG_INFINITY, f64::max),
                    k if k == grid.dim => {
                        (0..grid.dim).map(|d| grid.second_diff(&values, i, d)).sum()
                    }
                    _ => grid
                        .frames
                        .iter()
                        .map(|&(a, b)| {
                            grid.second_diff(&values, i, a) + grid.second_diff(&values, i, b)
                        })
                        .fold(f64::NEG_INFINITY, f64::max),
                };
                let drift = if b_vals[i] == 0.0 {
                    0.0
                } else {
                    b_vals[i] * grid.upwind(&values, i, plus)
                };
                let res = pk + drift - f_vals[i];
                let u0 = values[flat];
                (u0 + dt[i] * res + beta * (u0 - prev[flat]), res)
            })
            .collect();
        let mut residual = 0.0f64;
        let mut sup = 0.0f64;
        for (i, &(nv, res)) in updates.iter().enumerate() {
            let flat = grid.interior[i] as usize;
            prev[flat] = values[flat];
            values[flat] = nv;
            residual = residual.max(res.abs());
            sup = sup.max(nv.abs());
        }
        last_res = residual;
        if residual < best_res {
            best_res = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if beta > 0.0 && stalled >= 100 {
                prev.copy_from_slice(&values);
                beta *= 0.98;
                best_res = residual;
                stalled = 0;
            }
        }
        if sweeps % 25 == 0 || residual <= tol {
            residual_history.push((sweeps, residual));
        }
        if sup_tail.len() == 100 {
            sup_tail.pop_front();
        }
        sup_tail.push_back(sup);
        let probe_value = values[probe_flat as usize];
        if threshold_sweep.is_none() {
            if let Some(th) = cfg.probe_threshold {
                if probe_value > th {
                    threshold_sweep = Some(sweeps);
                }
            }
        }
        if residual <= tol {
            outcome = Some(Ok(()));
            break;
        }
        let growing = sup_tail.len() == 100
            && sup_tail
                .iter()
                .zip(sup_tail.iter().skip(1))
                .all(|(a, b)| b >= &(a - 1e-14))
            && sup_tail.back().unwrap() > sup_tail.front().unwrap();
        if !sup.is_finite() || (sup > cap && growing) {
            outcome = Some(Err(BlowUpCertificate {
                cap,
                sup_tail: sup_tail.iter().copied().collect(),
                probe: probe_coords.clone(),
                probe_value,
                threshold: cfg.probe_threshold,
                threshold_sweep,
            }));
            break;
        }
    }

    let field = GridField {
        grid: grid.clone(),
        values,
    };
    let boundary_trace = (0..ni)
        .filter(|&i| grid.boundary_adjacent(i))
        .map(|i| field.values[grid.interior[i] as usize].abs())
        .fold(0.0, f64::max);
    let outcome = match outcome {
        Some(Ok(())) => Outcome::Converged(field),
        Some(Err(certificate)) => Outcome::BlowUp {
            snapshot: field,
            certificate,
        },
        None => Outcome::MaxIterations {
            field,
            residual: last_res,
        },
    };
    Ok(SolveReport {
        outcome,
        residual_history,
        boundary_trace,
        sweeps,
        wall_clock: start.elapsed(),
    })
}

/// Field values along the inward normal from a boundary probe point.
pub fn boundary_loss_diagnostic(
    report: &SolveReport,
    domain: &dyn Domain,
    probe: &[f64],
    radii: &[f64],
) -> Result<Vec<f64>> {
    if probe.len() != domain.dim() {
        return Err(Error::invalid("probe dimension mismatch"));
    }
    let nu = domain.outward_normal(probe);
    let eps = 1e-6 * domain.diameter().max(1.0);
    let outside = crate::la::axpy(probe, eps, &nu);
    let inside = crate::la::axpy(probe, -eps, &nu);
    if domain.contains(&outside) || !domain.contains(&inside) {
        return Err(Error::Diagnostic(format!(
            "probe {probe:?} is not a boundary point"
        )));
    }
    let field = report.field();
    Ok(radii
        .iter()
        .map(|&s| field.value_at(&crate::la::axpy(probe, -s, &nu)))
        .collect())
}
