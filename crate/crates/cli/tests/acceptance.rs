//! End-to-end acceptance gate: one pass/fail line per criterion, covering
//! radial closed forms, solver benchmarks, nonexistence detection, boundary
//! loss, eigenvalue estimation, geometry constructions, and operator
//! properties.

use std::process::Command;
use std::time::Instant;

use trunclap::eigen;
use trunclap::geometry::ConvexBody;
use trunclap::grid::Domain;
use trunclap::matrix::Side;
use trunclap::radial::{profile_const_b, profile_minus_b, radial_residual, DriftCoefficient};
use trunclap::solver::{solve_cascade, Drift, SchemeConfig};
use trunclap::verify::run_suite;

const SEED: u64 = 42;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn disk() -> ConvexBody {
    ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap()
}

fn max_err_vs_radial(
    report: &trunclap::solver::SolveReport,
    g: impl Fn(f64) -> f64,
) -> f64 {
    let field = report.field();
    let mut err = 0.0f64;
    for &flat in &field.grid.interior {
        let x = field.grid.coords(flat);
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        err = err.max((field.values[flat as usize] - g(r)).abs());
    }
    err
}

/// Min field value over the probe offsets s in {h, 2h, 4h} from the boundary
/// point, stepping inward along `dir`.
fn probe_min(
    domain: &dyn Domain,
    cfg: &SchemeConfig,
    h: f64,
    base: &[f64],
    dir: &[f64],
) -> Result<f64, String> {
    let levels = ((1.0 / h) / 16.0).log2().round().max(0.0) as usize;
    let report = solve_cascade(domain, |_| -1.0, h, levels, cfg).map_err(|e| e.to_string())?;
    let field = match &report.outcome {
        trunclap::solver::Outcome::Converged(f) => f,
        _ => return Err(format!("solve at h = {h} did not converge")),
    };
    let mut min = f64::INFINITY;
    for s in [h, 2.0 * h, 4.0 * h] {
        let p: Vec<f64> = base.iter().zip(dir).map(|(b, d)| b + s * d).collect();
        min = min.min(field.value_at(&p));
    }
    Ok(min)
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let p = profile_const_b(0.5, 1.0, 1).map_err(|e| e.to_string())?;
    if p.g(1.0) != 0.0 {
        return Err(format!("g(R) = {} != 0", p.g(1.0)));
    }
    let target = 4.0 * 2f64.ln() - 2.0;
    if (p.g(0.0) - target).abs() > 1e-10 {
        return Err(format!("g(0) = {}, expected {target}", p.g(0.0)));
    }
    let c = DriftCoefficient::constant(0.5, 1.0, 1, 2).unwrap();
    let res = radial_residual(&p, &c, |_| -1.0, Side::Plus, 2000);
    if res > 1e-8 {
        return Err(format!("residual {res} > 1e-8"));
    }
    let m = profile_minus_b(1.0, 1.0, 1).map_err(|e| e.to_string())?;
    if (m.g(0.0) - (-1.0f64).exp()).abs() > 1e-10 {
        return Err(format!("minus-b g(0) = {}", m.g(0.0)));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 1.0 {
        return Err(format!("took {secs:.2}s >= 1s"));
    }
    Ok(format!(
        "g(0) = {:.12}, residual {res:.2e}, {secs:.3}s",
        p.g(0.0)
    ))
}

fn criterion_2() -> Result<String, String> {
    let start = Instant::now();
    let body = disk();
    let mut errs = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        // The stencil is exact on the quadratic solution; tie the stopping
        // tolerance to h^2 so the error reflects the resolution.
        let mut cfg = SchemeConfig::default();
        cfg.tol = Some(1e-4 * h * h);
        let levels = ((1.0 / h) / 16.0).log2().round() as usize;
        let report = solve_cascade(&body, |_| -1.0, h, levels, &cfg).map_err(|e| e.to_string())?;
        errs.push(max_err_vs_radial(&report, |r| 0.5 * (1.0 - r * r)));
    }
    let secs = start.elapsed().as_secs_f64();
    if errs[1] > 5e-2 {
        return Err(format!("error {} > 5e-2 at h = 1/64", errs[1]));
    }
    if errs[1] > 0.8 * errs[0] {
        return Err(format!("no refinement gain: {errs:?}"));
    }
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s >= 60s"));
    }
    Ok(format!(
        "errors {:.2e} -> {:.2e} (ratio {:.2}), {secs:.1}s",
        errs[0],
        errs[1],
        errs[1] / errs[0]
    ))
}

fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    let p = profile_const_b(0.5, 1.0, 1).map_err(|e| e.to_string())?;
    let mut cfg = SchemeConfig::default();
    cfg.drift = Drift::constant(Side::Plus, 0.5).unwrap();
    let report =
        solve_cascade(&disk(), |_| -1.0, 1.0 / 64.0, 2, &cfg).map_err(|e| e.to_string())?;
    let err = max_err_vs_radial(&report, |r| p.g(r));
    let secs = start.elapsed().as_secs_f64();
    if err > 5e-2 {
        return Err(format!("error {err} > 5e-2"));
    }
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s >= 60s"));
    }
    Ok(format!("max nodal error {err:.2e}, {secs:.1}s"))
}

fn criterion_4() -> Result<String, String> {
    let eps = 0.2;
    let barrier = profile_const_b(1.2, (1.0 - eps) / 1.2, 1).map_err(|e| e.to_string())?;
    let g0 = barrier.g(0.0);
    let out = std::env::temp_dir().join("trunclap-acceptance-c4");
    let output = Command::new(env!("CARGO_BIN_EXE_trunclap"))
        .args([
            "solve",
            "--domain",
            &fixture("disk.json"),
            "--k",
            "1",
            "--b",
            "1.2",
            "--f",
            "-1",
            "--h",
            "0.03125",
            "--cap",
            "1.5",
            "--threshold",
            &format!("{g0}"),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .map_err(|e| format!("failed to launch CLI: {e}"))?;
    if output.status.code() != Some(2) {
        return Err(format!(
            "exit code {:?}, expected 2; stderr: {}",
            output.status.code(),
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    if report["outcome"] != "blow-up" {
        return Err(format!("outcome {}", report["outcome"]));
    }
    if report["condition"] != "bR>=k" {
        return Err(format!("condition {}", report["condition"]));
    }
    let cert = &report["certificate"];
    let probe_value = cert["probe_value"].as_f64().unwrap_or(0.0);
    let crossing = cert["threshold_sweep"].as_u64();
    let sweeps = report["sweeps"].as_u64().unwrap_or(0);
    if probe_value <= g0 {
        return Err(format!("origin iterate {probe_value} never exceeded {g0}"));
    }
    if crossing.is_none() || crossing.unwrap() > sweeps {
        return Err(format!("crossing sweep {crossing:?} vs total {sweeps}"));
    }
    Ok(format!(
        "exit 2, origin {probe_value:.4} > g_eps(0) = {g0:.4} at sweep {} of {sweeps}",
        crossing.unwrap()
    ))
}

fn criterion_5() -> Result<String, String> {
    let square = ConvexBody::cuboid(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    // Probe values are O(0.5); a 1e-5 residual is far below the 25%
    // stability band and keeps the fine grids affordable.
    let mut cfg = SchemeConfig::default();
    cfg.tol = Some(1e-5);
    let hs = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    let mut square_mins = Vec::new();
    let mut disk_mins = Vec::new();
    for &h in &hs {
        square_mins.push(probe_min(&square, &cfg, h, &[0.0, -1.0], &[0.0, 1.0])?);
        disk_mins.push(probe_min(&disk(), &cfg, h, &[0.0, -1.0], &[0.0, 1.0])?);
    }
    let c0 = square_mins[0];
    if c0 <= 0.0 {
        return Err(format!("calibration value {c0} not positive"));
    }
    for (i, &m) in square_mins.iter().enumerate().skip(1) {
        if (m - c0).abs() > 0.25 * c0 {
            return Err(format!(
                "square probe drifted: {m} vs c0 = {c0} at h = {}",
                hs[i]
            ));
        }
    }
    if !(disk_mins[0] > disk_mins[1] && disk_mins[1] > disk_mins[2]) {
        return Err(format!("disk probes not decaying: {disk_mins:?}"));
    }
    Ok(format!(
        "square mins {square_mins:?} stable near c0 = {c0:.4}; disk mins {disk_mins:?} decay"
    ))
}

fn criterion_6() -> Result<String, String> {
    let domain = trunclap::grid::QuarticFlat;
    let mut cfg = SchemeConfig::default();
    cfg.drift = Drift::constant(Side::Plus, 1.0).unwrap();
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let mut mins = Vec::new();
    for &h in &hs {
        mins.push(probe_min(&domain, &cfg, h, &[0.0, 0.0], &[0.0, 1.0])?);
    }
    let c0 = 0.75 * mins[0];
    if mins[0] <= 0.0 {
        return Err(format!("coarse probe {} not positive", mins[0]));
    }
    if mins[1] < c0 || mins[2] < c0 {
        return Err(format!("probes fell below c0 = {c0}: {mins:?}"));
    }
    Ok(format!("probe mins {mins:?} stay above c0 = {c0:.4}"))
}

fn criterion_7() -> Result<String, String> {
    let start = Instant::now();
    let body = disk();
    let cfg = SchemeConfig::default();
    let h = 1.0 / 32.0;
    let estimate = eigen::estimate_mu1(&body, &cfg, h, 1e-2).map_err(|e| e.to_string())?;
    let mu_hat = 0.5 * (estimate.mu_lo + estimate.mu_hi);
    let mu_shoot = eigen::shooting_mu1(1.0).map_err(|e| e.to_string())?;
    if mu_hat < 2.0 * (1.0 - 1e-2) {
        return Err(format!("mu_hat {mu_hat} below the lower bound"));
    }
    let rel = (mu_hat - mu_shoot).abs() / mu_shoot;
    if rel > 5e-2 {
        return Err(format!("mu_hat {mu_hat} vs oracle {mu_shoot}: {rel:.3} off"));
    }
    // Nodewise monotonicity is enforced inside the iteration (a violation
    // aborts with an error); re-run one bounded branch and confirm the sup
    // history is nondecreasing as direct evidence.
    let run = eigen::bounded_iteration(&body, estimate.mu_lo, &cfg, h, 400)
        .map_err(|e| e.to_string())?;
    if !run.bounded() {
        return Err(format!("mu_lo = {} not bounded on re-run", estimate.mu_lo));
    }
    if !run.sup_history.windows(2).all(|w| w[1] >= w[0] - 1e-7) {
        return Err("sup history not nondecreasing".into());
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 600.0 {
        return Err(format!("took {secs:.0}s >= 10min"));
    }
    Ok(format!(
        "mu_hat = {mu_hat:.4} vs oracle {mu_shoot:.4} ({:.2}% off), {secs:.0}s",
        100.0 * rel
    ))
}

fn criterion_8() -> Result<String, String> {
    let report = eigen::critical_drift_gap_check(1.0, 1, 400).map_err(|e| e.to_string())?;
    if report.residual > 1e-8 {
        return Err(format!("family residual {}", report.residual));
    }
    for (a, res) in &report.a_residuals {
        if *res > 1e-8 {
            return Err(format!("residual {res} at a = {a}"));
        }
    }
    match report.failure_radius {
        Some(r) => Ok(format!(
            "mu* = {}, residual {:.2e}, mu* + 0.1 fails at r = {r:.3}",
            report.mu_star, report.residual
        )),
        None => Err("condition failure at mu* + 0.1 not detected".into()),
    }
}

fn criterion_9() -> Result<String, String> {
    let suite = run_suite("radial", SEED, 1.0).map_err(|e| e.to_string())?;
    for name in [
        "radial/weighted-first-order",
        "radial/weighted-glued",
        "radial/divergent-integral-nonexistence",
    ] {
        let check = suite
            .checks
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| format!("missing check {name}"))?;
        if !check.passed {
            return Err(format!("{name}: {}", check.detail));
        }
    }
    // Solver agreement with the weighted profile b(r) = r on the 0.8-ball.
    let c = DriftCoefficient::callable(|r| r, None, 0.8, 1, 2).unwrap();
    let p = trunclap::radial::profile_weighted(&c).map_err(|e| e.to_string())?;
    let ball = ConvexBody::ball(vec![0.0, 0.0], 0.8).unwrap();
    let mut cfg = SchemeConfig::default();
    cfg.drift = Drift::radial(Side::Plus, |r| r);
    let report =
        solve_cascade(&ball, |_| -1.0, 1.0 / 64.0, 2, &cfg).map_err(|e| e.to_string())?;
    let err = max_err_vs_radial(&report, |r| p.g(r));
    if err > 5e-2 {
        return Err(format!("solver vs weighted profile: {err} > 5e-2"));
    }
    Ok(format!(
        "g(0) = {:.10}, solver agreement {err:.2e}, glue and divergence checks pass",
        p.g(0.0)
    ))
}

fn split_geometry(
    suite: &trunclap::verify::SuiteReport,
    names: &[&str],
) -> Result<String, String> {
    let mut details = Vec::new();
    for name in names {
        let check = suite
            .checks
            .iter()
            .find(|c| c.name == *name)
            .ok_or_else(|| format!("missing check {name}"))?;
        if !check.passed {
            return Err(format!("{name}: {}", check.detail));
        }
        details.push(check.name.rsplit('/').next().unwrap().to_string());
    }
    Ok(details.join(", "))
}

fn criterion_12() -> Result<String, String> {
    let start = Instant::now();
    let suite = run_suite("operators", SEED, 1.0).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    if !suite.passed {
        let failed: Vec<_> = suite.checks.iter().filter(|c| !c.passed).collect();
        return Err(format!("{failed:?}"));
    }
    if secs >= 30.0 {
        return Err(format!("took {secs:.1}s >= 30s"));
    }
    Ok(format!(
        "{} randomized property checks passed in {secs:.1}s",
        suite.tests
    ))
}

#[test]
fn acceptance() {
    let mut failures = 0;
    let mut report = |n: usize, result: Result<String, String>| match result {
        Ok(detail) => println!("criterion {n:2}: PASS - {detail}"),
        Err(detail) => {
            failures += 1;
            println!("criterion {n:2}: FAIL - {detail}");
        }
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());
    let geometry = run_suite("geometry", SEED, 1.0).expect("geometry suite must run");
    report(
        10,
        split_geometry(
            &geometry,
            &[
                "geometry/classification-table",
                "geometry/gj-probe-agreement",
                "geometry/psi-boundary-values",
                "geometry/psi-concavity",
                "geometry/psi-discrete-supersolution",
            ],
        ),
    );
    report(
        11,
        split_geometry(
            &geometry,
            &["geometry/interior-ball-delta", "geometry/hull-fixtures"],
        ),
    );
    report(12, criterion_12());
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
