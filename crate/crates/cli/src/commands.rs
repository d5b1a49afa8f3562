//! One function per command. Each returns the full report; assertion
//! failures are recorded in `Report::passed`, not raised.

use hyperfrac::gyro::{gyro_suite, SuiteConfig};
use hyperfrac::kernel::{euclidean_limit_ratio, invariance_integral, kernel_value, radial_density, KernelSpec};
use hyperfrac::operator::{alpha_sweep, barrier_check, gamma_limit, BarrierReport, BarrierSpec, EllipticityBounds, RadialProfile};
use hyperfrac::scale::{i0_quadrature, iinf_quadrature, r0_solve, ScaleValues};
use hyperfrac::{QuadratureConfig, Result};

use crate::report::Report;

fn relative(value: f64, reference: f64) -> f64 {
    ((value - reference) / reference).abs()
}

pub struct ConstantParams {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub t: f64,
    pub tol: f64,
}

pub fn verify_constant(p: &ConstantParams, cfg: &QuadratureConfig) -> Result<Report> {
    let mut report = Report::new(&["lambda", "gamma", "integral", "multiplier", "relative_error", "pass"]);
    let mut worst = 0.0f64;
    for &lambda in &p.lambdas {
        for &gamma_ in &p.gammas {
            let value = invariance_integral(lambda, gamma_, p.t, cfg)?;
            let expected = (lambda * lambda + 4.0 / (p.t * p.t)).powf(gamma_);
            let err = relative(value, expected);
            worst = worst.max(err);
            let pass = err <= p.tol;
            report.passed &= pass;
            report.push(vec![lambda.into(), gamma_.into(), value.into(), expected.into(), err.into(), pass.into()]);
        }
    }
    report.summary = format!("worst relative error {worst:.3e} against tolerance {:.1e}", p.tol);
    Ok(report)
}

pub struct SweepParams {
    pub radii: Vec<f64>,
    pub gammas: Vec<f64>,
    pub rho0: f64,
    pub tol: f64,
}

pub fn scale_sweep(p: &SweepParams, cfg: &QuadratureConfig) -> Result<Report> {
    let mut report = Report::new(&[
        "R",
        "gamma",
        "I0_closed",
        "I0_quad",
        "Iinf_closed",
        "Iinf_quad",
        "r0",
        "oracles_agree",
        "I0_increasing",
        "I0_over_R2mg_decreasing",
        "I0_over_R2_decreasing",
        "Iinf_over_R2_decreasing",
        "domination",
    ]);
    let mut worst = 0.0f64;
    for &gamma_ in &p.gammas {
        let mut prev: Option<ScaleValues> = None;
        for &r in &p.radii {
            let v = ScaleValues::closed(r, gamma_)?;
            let i0q = i0_quadrature(r, gamma_, cfg)?;
            let iinfq = iinf_quadrature(r, gamma_, cfg)?;
            let err = relative(v.i0, i0q).max(relative(v.iinf, iinfq));
            worst = worst.max(err);
            let agree = err <= p.tol;
            // Each flag compares with the previous radius of the same γ.
            let shrinks = |f: fn(&ScaleValues) -> f64| prev.as_ref().is_none_or(|q| f(&v) <= f(q));
            let increasing = prev.as_ref().is_none_or(|q| v.i0 > q.i0);
            let over_r2mg = shrinks(|s| s.i0 / s.r.powf(2.0 - s.gamma));
            let over_r2 = shrinks(|s| s.i0 / (s.r * s.r));
            let iinf_r2 = shrinks(|s| s.iinf / (s.r * s.r));
            let domination = v.domination_margin() >= 0.0;
            report.passed &= agree && increasing && over_r2mg && over_r2 && iinf_r2 && domination;
            report.push(vec![
                r.into(),
                gamma_.into(),
                v.i0.into(),
                i0q.into(),
                v.iinf.into(),
                iinfq.into(),
                r0_solve(r, gamma_, p.rho0)?.into(),
                agree.into(),
                increasing.into(),
                over_r2mg.into(),
                over_r2.into(),
                iinf_r2.into(),
                domination.into(),
            ]);
            prev = Some(v);
        }
    }
    report.summary = format!("worst closed-form vs quadrature relative error {worst:.3e}");
    Ok(report)
}

pub struct KernelParams {
    pub rhos: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
}

pub fn kernel_table(p: &KernelParams) -> Result<Report> {
    let spec = KernelSpec::new(p.gamma, p.tau)?;
    let mut report = Report::new(&["rho", "kernel", "radial_density", "euclidean_ratio", "decreasing"]);
    let mut prev = f64::INFINITY;
    for &rho in &p.rhos {
        let k = kernel_value(&spec, rho)?;
        let decreasing = k < prev;
        report.passed &= decreasing;
        prev = k;
        report.push(vec![
            rho.into(),
            k.into(),
            radial_density(&spec, rho)?.into(),
            euclidean_limit_ratio(p.gamma, rho, p.tau)?.into(),
            decreasing.into(),
        ]);
    }
    report.summary = format!("kernel strictly decreasing over {} radii: {}", p.rhos.len(), report.passed);
    Ok(report)
}

pub fn gyro_check(seed: u64, cases: usize) -> Result<Report> {
    let results = gyro_suite(&SuiteConfig {
        seed,
        cases,
        ..SuiteConfig::default()
    })?;
    let mut report = Report::new(&["property", "region", "cases", "max_residual", "tolerance", "pass"]);
    for r in &results {
        report.passed &= r.passed();
        report.push(vec![
            r.name.into(),
            r.region.label().into(),
            r.cases.into(),
            r.max_residual.into(),
            r.tolerance.into(),
            r.passed().into(),
        ]);
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    report.summary = format!("{failed} of {} checks failed (seed {seed})", results.len());
    Ok(report)
}

pub struct BarrierParams {
    pub delta: f64,
    pub radius: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub bounds: EllipticityBounds,
    /// A single exponent; `None` sweeps `α = 2, 4, …, 64`.
    pub alpha: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub samples: usize,
}

fn barrier_rows(report: &mut Report, check: &BarrierReport) {
    for row in &check.rows {
        report.push(vec![
            check.spec.alpha().into(),
            row.r0.into(),
            row.pucci_normalized.into(),
            row.log_scale.into(),
            row.margin.into(),
            row.holds.into(),
        ]);
    }
}

pub fn barrier(p: &BarrierParams, cfg: &QuadratureConfig) -> Result<Report> {
    let spec = BarrierSpec::new(p.delta, p.alpha.unwrap_or(2.0), p.kappa, p.radius, p.gamma)?;
    let samples = match &p.radii {
        Some(r) => r.clone(),
        None => {
            let (lo, hi) = spec.check_interval();
            let n = p.samples as f64;
            (0..p.samples).map(|i| lo * (hi / lo).powf((i as f64 + 0.5) / n)).collect()
        }
    };
    let mut report = Report::new(&["alpha", "R0", "pucci_plus_normalized", "log_scale", "margin", "holds"]);
    match p.alpha {
        Some(alpha) => {
            let check = barrier_check(&spec, &samples, p.bounds, cfg)?;
            barrier_rows(&mut report, &check);
            report.passed = check.all_hold();
            let held = check.rows.iter().filter(|r| r.holds).count();
            report.summary = format!("alpha {alpha}: margin <= 0 at {held} of {} radii", samples.len());
        }
        None => {
            let sweep = alpha_sweep(&spec, &samples, p.bounds, cfg)?;
            for check in &sweep.reports {
                barrier_rows(&mut report, check);
            }
            report.passed = sweep.threshold.is_some();
            report.summary = match sweep.threshold {
                Some(a) => format!("margin <= 0 at every radius from alpha = {a} on"),
                None => "inconclusive: margin still positive somewhere at the largest alpha".into(),
            };
        }
    }
    Ok(report)
}

pub fn gamma_sweep(u: &dyn RadialProfile, r0: f64, gammas: &[f64], cfg: &QuadratureConfig) -> Result<Report> {
    let rep = gamma_limit(u, r0, gammas, cfg)?;
    let mut report = Report::new(&["gamma", "value", "laplacian", "relative_error", "error_decreasing"]);
    let mut prev = f64::INFINITY;
    for row in &rep.rows {
        let decreasing = row.relative_error < prev;
        prev = row.relative_error;
        report.push(vec![
            row.gamma.into(),
            row.value.into(),
            rep.laplacian.into(),
            row.relative_error.into(),
            decreasing.into(),
        ]);
    }
    report.passed = rep.monotone();
    let last = rep.rows.last().map_or(f64::NAN, |r| r.relative_error);
    report.summary = format!(
        "Laplace-Beltrami value {:.6}, final relative error {last:.3e}, decreasing {}",
        rep.laplacian, report.passed
    );
    Ok(report)
}
