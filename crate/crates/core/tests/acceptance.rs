//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p hyperfrac --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use hyperfrac::geometry::{ball_volume, dyadic_ladder, ring_sector_volume, HyperPoint, ModelParams};
use hyperfrac::gyro::{
    boxminus_jacobian, finite_difference_jacobian, gyro_suite, random_element, random_unit,
    sphere_integral_closed_form, sphere_integral_e, EigenParams, SuiteConfig,
};
use hyperfrac::kernel::{asymptotic_slopes, euclidean_limit_ratio, invariance_integral};
use hyperfrac::numerics::richardson_derivative;
use hyperfrac::operator::{
    alpha_sweep, apply_fraclap, arccos_inequalities, convexity_surrogate, envelope, gamma_limit,
    multiplier_oracle, polar_grid, BarrierSpec, EllipticityBounds, Profile, SpectralTransform,
    CALIBRATION_TOL,
};
use hyperfrac::scale::{
    i0_closed, i0_quadrature, iinf_closed, iinf_quadrature, monotonicity_report, r0_solve, ScaleValues,
    DEFAULT_RHO0,
};
use hyperfrac::specfun::{
    bessel_i, bessel_k, c_integral, half_integer, l_integral, ratio_bounds_check, s_integral, Order,
};
use hyperfrac::{QuadratureConfig, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn normalizing_identity() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for lambda in [1e-6, 0.5, 1.0, 2.0, 4.0] {
        for gamma_ in [0.2, 0.5, 0.8, 0.95] {
            let v = invariance_integral(lambda, gamma_, 2.0, &cfg)?;
            worst = worst.max(rel(v, (lambda * lambda + 1.0).powf(gamma_)));
        }
    }
    Ok(Outcome::new(worst <= 1e-6, format!("worst relative error {worst:.3e} over 20 points")))
}

fn sphere_integral_is_real() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let t = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst_im, mut worst_re) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let lambda = rng.random_range(0.1..4.0);
        let r = rng.random_range(0.1..1.8);
        let z = random_element(&mut rng, t, 0.8);
        let ep = EigenParams::new(lambda, random_unit(&mut rng), t)?;
        let v = sphere_integral_e(&ep, r, &z, &cfg)?;
        let closed = sphere_integral_closed_form(lambda, r, t)?;
        worst_im = worst_im.max(v.im.abs());
        worst_re = worst_re.max((v.re - closed).abs() / closed.abs().max(1.0));
    }
    Ok(Outcome::new(
        worst_im <= 1e-8 && worst_re <= 1e-7,
        format!("max |Im| {worst_im:.3e}, max Re error {worst_re:.3e} over 20 cases"),
    ))
}

fn scale_grid() -> (Vec<f64>, Vec<f64>) {
    (linspace(0.1, 5.0, 10), linspace(0.1, 0.95, 10))
}

fn scale_oracles_agree() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let (radii, gammas) = scale_grid();
    let mut worst = 0.0f64;
    for &g in &gammas {
        for &r in &radii {
            worst = worst.max(rel(i0_closed(r, g)?, i0_quadrature(r, g, &cfg)?));
            worst = worst.max(rel(iinf_closed(r, g)?, iinf_quadrature(r, g, &cfg)?));
        }
    }
    Ok(Outcome::new(
        worst <= 1e-8,
        format!("worst relative error {worst:.3e} over {} points", radii.len() * gammas.len()),
    ))
}

fn scale_limits() -> Result<Outcome> {
    let gammas = [0.9, 0.99, 0.999];
    let mut rows = Vec::new();
    for &g in &gammas {
        let v = ScaleValues::closed(1.0, g)?;
        rows.push(((v.i0 - 6.0).abs(), v.iinf, r0_solve(1.0, g, DEFAULT_RHO0)?));
    }
    let last = rows[rows.len() - 1];
    let monotone = rows.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1 && w[1].2 < w[0].2);
    let pass = last.0 <= 0.05 && last.1 <= 0.05 && last.2 <= 0.05 * DEFAULT_RHO0 && monotone;
    Ok(Outcome::new(
        pass,
        format!(
            "|I0-6| {:.3e}, Iinf {:.3e}, r0 {:.3e} at gamma 0.999; monotone {monotone}",
            last.0, last.1, last.2
        ),
    ))
}

fn scale_inequalities() -> Result<Outcome> {
    let (radii, gammas) = scale_grid();
    let mut failing = Vec::new();
    let mut worst = f64::INFINITY;
    for &g in &gammas {
        let rep = monotonicity_report(g, &radii)?;
        worst = worst
            .min(rep.i0_over_r_2_minus_gamma)
            .min(rep.i0_over_r_squared)
            .min(rep.domination)
            .min(rep.iinf_over_r_squared);
        if !rep.holds() {
            failing.push(g);
        }
    }
    Ok(Outcome::new(
        failing.is_empty(),
        format!("smallest margin {worst:.3e}; failing gammas {failing:?}"),
    ))
}

fn gyrogroup_suite() -> Result<Outcome> {
    let results = gyro_suite(&SuiteConfig {
        seed: SEED,
        ..SuiteConfig::default()
    })?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{}/{}: {:.3e}", r.name, r.region.label(), r.max_residual))
        .collect();
    let worst = results.iter().map(|r| r.max_residual / r.tolerance).fold(0.0, f64::max);
    Ok(Outcome::new(
        failed.is_empty(),
        format!(
            "{} identity/region pairs, worst residual/tolerance {worst:.3e}; failed {failed:?}",
            results.len()
        ),
    ))
}

fn jacobian_matches_finite_differences() -> Result<Outcome> {
    let t = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let z = random_element(&mut rng, t, 0.9);
        let y = random_element(&mut rng, t, 0.9);
        let fd = finite_difference_jacobian(&z, &y, 1e-6)?.determinant();
        worst = worst.max(rel(fd, boxminus_jacobian(&z, &y)?));
    }
    Ok(Outcome::new(worst <= 1e-6, format!("worst relative error {worst:.3e} over 200 pairs")))
}

fn euclidean_limit() -> Result<Outcome> {
    let ratios = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&tau| euclidean_limit_ratio(0.5, 1.0, tau))
        .collect::<Result<Vec<f64>>>()?;
    let last = ratios[3];
    let monotone = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    Ok(Outcome::new(
        (0.999..=1.001).contains(&last) && monotone,
        format!("ratios {ratios:?}"),
    ))
}

fn kernel_slopes() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for g in [0.3, 0.7] {
        let s = asymptotic_slopes(g)?;
        worst = worst.max((s.near - (1.0 - 2.0 * g)).abs()).max((s.far - (-1.0 - g)).abs());
        detail.push(format!("gamma {g}: near {:.5}, far {:.5}", s.near, s.far));
    }
    Ok(Outcome::new(
        worst <= 0.02,
        format!("{}; worst deviation {worst:.3e}", detail.join("; ")),
    ))
}

fn spectral_cross_check() -> Result<Outcome> {
    let cfg = QuadratureConfig::new(1e-9, 1e-12)?;
    let g = Profile::gaussian(1.0, 1.0)?;
    let transform = SpectralTransform::new(&g, &cfg)?;
    let mut worst = 0.0f64;
    for r0 in [0.0, 0.5] {
        for gamma_ in [0.3, 0.6, 0.9] {
            let direct = apply_fraclap(&g, r0, gamma_, &cfg)?;
            let oracle = multiplier_oracle(&g, r0, gamma_, &cfg)?;
            worst = worst.max(rel(direct, oracle));
        }
    }
    Ok(Outcome::new(
        transform.residual() <= CALIBRATION_TOL && worst <= 1e-3,
        format!(
            "calibration residual {:.3e}, constant {:.12}, worst relative error {worst:.3e}",
            transform.residual(),
            transform.constant()
        ),
    ))
}

fn second_order_limit() -> Result<Outcome> {
    let cfg = QuadratureConfig::new(1e-9, 1e-12)?;
    let g = Profile::gaussian(1.0, 1.0)?;
    let rep = gamma_limit(&g, 0.0, &[0.9, 0.95, 0.99, 0.995], &cfg)?;
    let last = rep.rows[rep.rows.len() - 1];
    let errors: Vec<String> = rep.rows.iter().map(|r| format!("{:.4}", r.relative_error)).collect();
    Ok(Outcome::new(
        last.relative_error <= 0.05 && rep.monotone(),
        format!(
            "Laplacian {:.6}, value at 0.995 {:.6}, relative errors [{}]",
            rep.laplacian,
            last.value,
            errors.join(", ")
        ),
    ))
}

fn special_function_suite() -> Result<Outcome> {
    let mut deriv = 0.0f64;
    for nu in [1.6, 2.2, 2.45] {
        let order = Order::new(nu)?;
        for k in 0..=2usize {
            for rho in [0.3, 1.0, 3.0, 8.0] {
                let kv = bessel_k(nu, rho)?;
                // Far out the antiderivative is O(1) while the integrand is
                // exponentially small, so the residual is measured against
                // the larger of the two scales.
                let checks: [(&dyn Fn(f64) -> f64, f64); 3] = [
                    (&|x| s_integral(k, order, x).unwrap(), rho.powf(k as f64 - nu) * kv * rho.sinh()),
                    (&|x| c_integral(k, order, x).unwrap(), rho.powf(k as f64 - nu) * kv * rho.cosh()),
                    (&|x| l_integral(2 * k, order, x).unwrap(), rho.powf(2.0 * k as f64 - nu) * kv),
                ];
                for (f, want) in checks {
                    let scale = want.abs().max(f(rho).abs() / rho);
                    deriv = deriv.max((richardson_derivative(f, rho) - want).abs() / scale);
                }
            }
        }
    }
    let (mut recur, mut deriv_rel) = (0.0f64, 0.0f64);
    for nu in [-0.7, 0.0, 0.3, 1.5, 2.8, 6.1] {
        for x in [0.1, 0.9, 4.0, 17.0, 45.0] {
            let i = |m: f64| bessel_i(m, x);
            let k = |m: f64| bessel_k(m, x);
            let ri = (i(nu - 1.0)? - i(nu + 1.0)? - 2.0 * nu / x * i(nu)?).abs()
                / (i(nu - 1.0)?.abs() + i(nu + 1.0)?.abs());
            let rk = (k(nu + 1.0)? - k(nu - 1.0)? - 2.0 * nu / x * k(nu)?).abs() / k(nu + 1.0)?;
            let di = richardson_derivative(|s| bessel_i(nu, s).unwrap(), x);
            let rdi = (di - (i(nu - 1.0)? - nu / x * i(nu)?)).abs() / di.abs().max(i(nu)?);
            let dk = richardson_derivative(|s| bessel_k(nu, s).unwrap(), x);
            let rdk = (dk - (-k(nu - 1.0)? - nu / x * k(nu)?)).abs() / dk.abs();
            recur = recur.max(ri).max(rk);
            deriv_rel = deriv_rel.max(rdi).max(rdk);
        }
    }
    let mut closed = 0.0f64;
    for x in [0.5, 1.0, 2.5, 7.0, 15.0, 30.0] {
        let pairs = [
            (bessel_i(0.5, x)?, half_integer::i_half(x)),
            (bessel_i(-0.5, x)?, half_integer::i_minus_half(x)),
            (bessel_i(1.5, x)?, half_integer::i_three_halves(x)),
            (bessel_i(2.5, x)?, half_integer::i_five_halves(x)),
            (bessel_k(0.5, x)?, half_integer::k_half(x)),
            (bessel_k(1.5, x)?, half_integer::k_three_halves(x)),
            (bessel_k(2.5, x)?, half_integer::k_five_halves(x)),
        ];
        for (a, b) in pairs {
            closed = closed.max(rel(a, b));
        }
    }
    let mut ratio_ok = true;
    for nu in [0.0, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0] {
        for j in 0..25 {
            let x = 1e-3 * 10f64.powf(j as f64 / 4.0);
            ratio_ok &= ratio_bounds_check(nu, x)?.holds();
        }
    }
    let pass = deriv <= 1e-7 && recur <= 1e-9 && deriv_rel <= 1e-9 && closed <= 1e-11 && ratio_ok;
    Ok(Outcome::new(
        pass,
        format!(
            "antiderivative residual {deriv:.3e}, recurrence {recur:.3e}, derivative relation {deriv_rel:.3e}, \
             half-integer {closed:.3e}, ratio bounds hold {ratio_ok}"
        ),
    ))
}

fn dyadic_geometry() -> Result<Outcome> {
    let mut ratio_err = 0.0f64;
    let mut halving = true;
    for r0 in [0.1, 1.0] {
        let ladder = dyadic_ladder(r0, 20)?;
        for ratio in ladder.volume_ratios() {
            ratio_err = ratio_err.max((8.0 * ratio - 1.0).abs());
        }
        halving &= ladder.radii().windows(2).all(|w| w[1] >= 0.5 * w[0]);
    }
    let mut sector_err = 0.0f64;
    for (r_in, r_out) in [(0.05, 0.1), (0.5, 1.0), (1.0, 3.0)] {
        let ring = ball_volume(r_out) - ball_volume(r_in);
        sector_err = sector_err.max((ring_sector_volume(r_in, r_out, 0.5)? / ring - 0.25).abs());
    }
    Ok(Outcome::new(
        ratio_err <= 1e-12 && halving && sector_err <= 1e-10,
        format!("ladder ratio error {ratio_err:.3e}, halving bound {halving}, sector error {sector_err:.3e}"),
    ))
}

fn barrier() -> Result<Outcome> {
    let spec = BarrierSpec::new(0.5, 2.0, 0.25, 1.0, 0.99)?;
    let bounds = EllipticityBounds::new(1.0, 2.0)?;
    let (lo, hi) = spec.check_interval();
    let ratio = hi / lo;
    let samples: Vec<f64> = (0..10).map(|i| lo * ratio.powf((i as f64 + 0.5) / 10.0)).collect();
    let cfg = QuadratureConfig::new(1e-8, 1e-12)?;
    let sweep = alpha_sweep(&spec, &samples, bounds, &cfg)?;
    let held: Vec<String> = sweep
        .reports
        .iter()
        .map(|r| format!("{}:{}", r.spec.alpha(), r.rows.iter().filter(|row| row.holds).count()))
        .collect();

    let alpha = sweep.threshold.unwrap_or(2.0);
    let mut arccos_ok = true;
    let mut points = 0;
    for &r0 in &samples {
        let edge = 1.0 / r0.cosh();
        for j in 0..10 {
            let t = edge + (4.0 - edge) * (j as f64 + 0.5) / 10.0;
            arccos_ok &= arccos_inequalities(alpha, r0, t)?.all_hold();
            points += 1;
        }
    }
    Ok(Outcome::new(
        sweep.threshold.is_some() && arccos_ok,
        format!(
            "alpha threshold {:?}, rows holding per alpha [{}]; arccos inequalities hold on {points} points: {arccos_ok}",
            sweep.threshold,
            held.join(", ")
        ),
    ))
}

fn envelope_properties() -> Result<Outcome> {
    let m = ModelParams::with_tau(1.0)?;
    let radius = 1.0;
    let samples = polar_grid(5.0 * radius, 20, 40, &m)?;
    let vertices = polar_grid(radius, 4, 26, &m)?;
    let origin = HyperPoint::origin(&m);
    let dist = |p: &HyperPoint, q: &HyperPoint| hyperfrac::geometry::distance(p, q, &m);

    let dip = samples
        .points
        .iter()
        .map(|p| Ok(3.0 * (1.0 - (-dist(p, &origin)?.powi(2) / 0.5).exp())))
        .collect::<Result<Vec<f64>>>()?;
    let env = envelope(&samples.points, &dip, &vertices.points, radius, samples.spacing, &m)?;
    let below = env.values.iter().zip(&dip).all(|(g, u)| g <= u);

    let apex = vertices.points[7];
    let bowl = samples
        .points
        .iter()
        .map(|p| Ok(0.8 - 0.5 * dist(p, &apex)?.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    let full = envelope(&samples.points, &bowl, &vertices.points, radius, samples.spacing, &m)?;
    let full_contact = full.contact_count() == bowl.len();

    let lengths = [samples.spacing, 2.0 * samples.spacing];
    let convex = convexity_surrogate(&env, &samples.points, 17, 6, &lengths)?;
    Ok(Outcome::new(
        below && full_contact && convex.holds(),
        format!(
            "Gamma <= u on {} samples: {below}; paraboloid contact {}/{}; midpoint inequality on {} triples, worst slack {:.3e}",
            dip.len(),
            full.contact_count(),
            bowl.len(),
            convex.triples,
            convex.worst_slack
        ),
    ))
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 15] = [
        (1, "normalizing constant identity", normalizing_identity),
        (2, "spherical integral is real and closed-form", sphere_integral_is_real),
        (3, "scale function closed forms vs quadrature", scale_oracles_agree),
        (4, "scale function limits near gamma = 1", scale_limits),
        (5, "scale function monotonicity and domination", scale_inequalities),
        (6, "gyrogroup identities", gyrogroup_suite),
        (7, "coaddition Jacobian", jacobian_matches_finite_differences),
        (8, "Euclidean kernel limit", euclidean_limit),
        (9, "kernel asymptotic slopes", kernel_slopes),
        (10, "spectral cross-check of the operator", spectral_cross_check),
        (11, "second-order limit", second_order_limit),
        (12, "special function identities", special_function_suite),
        (13, "dyadic geometry", dyadic_geometry),
        (14, "barrier supersolution sweep", barrier),
        (15, "envelope and contact set", envelope_properties),
    ];
    let mut failures = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name} ({secs:.1}s): {}", outcome.detail);
        if !outcome.pass {
            failures += 1;
        }
    }
    println!("{} of 15 criteria passed", 15 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
