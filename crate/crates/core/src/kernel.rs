//! The jump kernel of the fractional Laplacian on three-dimensional
//! hyperbolic space and the integral identity that fixes its constant.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_near_zero, integrate_to_infinity, PowerLaw, QuadratureConfig};
use crate::specfun::{abs_gamma_neg, bessel_k_scaled, bessel_k_xpow};

/// Below this value of `ρ/τ` the Bessel factor is evaluated as `x^ν K_ν(x)`.
const SMALL_ARGUMENT: f64 = 1.0;

/// Start of the far-field tail in the invariance integral.
const TAIL_START: f64 = 40.0;

/// Fractional order and curvature radius of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    gamma: f64,
    tau: f64,
}

impl KernelSpec {
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) || !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::domain("KernelSpec", format!("gamma = {gamma}, tau = {tau}")));
        }
        Ok(Self { gamma, tau })
    }

    /// Unit curvature radius.
    pub fn unit(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Order `3/2 + γ` of the Bessel factor.
    fn order(&self) -> f64 {
        1.5 + self.gamma
    }

    /// `2 C(3,γ) / (τ Γ(ν) (2τ)^ν)`.
    fn prefactor(&self) -> f64 {
        let nu = self.order();
        2.0 * normalizing_constant(3, self.gamma).expect("gamma validated")
            / (self.tau * gamma(nu) * (2.0 * self.tau).powf(nu))
    }
}

/// `C(n,γ) = 2^{2γ} Γ(n/2+γ) / (π^{n/2} |Γ(−γ)|)`.
pub fn normalizing_constant(n: u32, gamma_: f64) -> Result<f64> {
    if n == 0 || !(gamma_ > 0.0 && gamma_ < 1.0) {
        return Err(Error::domain(
            "normalizing_constant",
            format!("n = {n}, gamma = {gamma_}"),
        ));
    }
    let half = 0.5 * n as f64;
    Ok(4f64.powf(gamma_) * gamma(half + gamma_) / (PI.powf(half) * abs_gamma_neg(gamma_)))
}

fn check_radius(op: &'static str, rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(op, format!("rho = {rho}")));
    }
    Ok(())
}

/// `K_{γ,τ}(ρ)`.
pub fn kernel_value(spec: &KernelSpec, rho: f64) -> Result<f64> {
    check_radius("kernel_value", rho)?;
    let nu = spec.order();
    let x = rho / spec.tau;
    let power = -0.5 - spec.gamma;
    if x < SMALL_ARGUMENT {
        // K_ν(x)/sinh x = (x^ν K_ν)(x) · (x/sinh x) · x^{-ν-1}
        let log = power * rho.ln() - (nu + 1.0) * x.ln();
        return Ok(spec.prefactor() * bessel_k_xpow(nu, x)? * (x / x.sinh()) * log.exp());
    }
    // K_ν(x)/sinh x = (e^x K_ν)(x) · 2e^{-2x}/(1 − e^{-2x})
    let decay = 2.0 * (-2.0 * x).exp() / -(-2.0 * x).exp_m1();
    Ok(spec.prefactor() * rho.powf(power) * bessel_k_scaled(nu, x)? * decay)
}

/// Radial mass density `K_{γ,τ}(ρ) · τ² sinh²(ρ/τ)`; integrating it against
/// `4π dρ` integrates the kernel over geodesic spheres.
pub fn radial_density(spec: &KernelSpec, rho: f64) -> Result<f64> {
    check_radius("radial_density", rho)?;
    let nu = spec.order();
    let tau = spec.tau;
    let x = rho / tau;
    let power = -0.5 - spec.gamma;
    let scale = spec.prefactor() * tau * tau;
    if x < SMALL_ARGUMENT {
        // K_ν(x) sinh x = (x^ν K_ν)(x) · (sinh x / x) · x^{1-ν}
        let log = power * rho.ln() + (1.0 - nu) * x.ln();
        return Ok(scale * bessel_k_xpow(nu, x)? * (x.sinh() / x) * log.exp());
    }
    // K_ν(x) sinh x = (e^x K_ν)(x) · (1 − e^{-2x})/2
    let growth = -0.5 * (-2.0 * x).exp_m1();
    Ok(scale * rho.powf(power) * bessel_k_scaled(nu, x)? * growth)
}

/// `K_{γ,τ}(ρ) / (C(3,γ) ρ^{-3-2γ})`, which tends to 1 as `ρ/τ → 0`.
pub fn euclidean_limit_ratio(gamma_: f64, rho: f64, tau: f64) -> Result<f64> {
    let spec = KernelSpec::new(gamma_, tau)?;
    check_radius("euclidean_limit_ratio", rho)?;
    let nu = spec.order();
    let x = rho / tau;
    if x < SMALL_ARGUMENT {
        let shape = if x < 1e-4 { 1.0 - x * x / 6.0 } else { x / x.sinh() };
        return Ok(2f64.powf(1.0 - nu) * bessel_k_xpow(nu, x)? / gamma(nu) * shape);
    }
    // x^{ν+1} K_ν(x)/sinh x = (e^x K_ν)(x) · x^{ν+1} · 2e^{-2x}/(1 − e^{-2x})
    let log = (2.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu) + (nu + 1.0) * x.ln() - 2.0 * x;
    Ok(bessel_k_scaled(nu, x)? * log.exp() / -(-2.0 * x).exp_m1())
}

/// `−(1/(4π²)) (2/t) λ sin(λρ) / sinh(2ρ/t)`.
pub fn spectral_kernel(lambda: f64, t: f64, rho: f64) -> Result<f64> {
    check_radius("spectral_kernel", rho)?;
    if !(t > 0.0) {
        return Err(Error::domain("spectral_kernel", format!("t = {t}")));
    }
    let x = 2.0 * rho / t;
    // 1/sinh x = 2e^{-x}/(1 − e^{-2x})
    let inv_sinh = 2.0 * (-x).exp() / -(-2.0 * x).exp_m1();
    Ok(-(2.0 / t) / (4.0 * PI * PI) * lambda * (lambda * rho).sin() * inv_sinh)
}

/// `1 − sin(aρ)/(a sinh ρ)`, with `a = 0` read as the limit `1 − ρ/sinh ρ`.
fn plane_wave_defect(a: f64, rho: f64) -> f64 {
    if rho * a.max(1.0) < 1.0 {
        // (sinh ρ − sin(aρ)/a) = Σ_{k≥1} ρ^{2k+1}(1 − (−a²)^k)/(2k+1)!
        let r2 = rho * rho;
        let neg_a2 = -a * a;
        let mut pow_r = rho;
        let mut pow_a = 1.0;
        let mut fact = 1.0;
        let mut sum = 0.0;
        for k in 1..40 {
            pow_r *= r2;
            pow_a *= neg_a2;
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            sum += pow_r * (1.0 - pow_a) / fact;
            if pow_r * (1.0 + pow_a.abs()) / fact <= 1e-17 * sum.abs() {
                break;
            }
        }
        return sum / rho.sinh();
    }
    let ratio = if a == 0.0 { rho } else { (a * rho).sin() / a };
    1.0 - ratio / rho.sinh()
}

/// `(πt³/2) ∫₀^∞ (1 − 2 sin(λtρ/2)/(λt sinh ρ)) K_{γ,t/2}(tρ/2) sinh²ρ dρ`,
/// which equals `(λ² + 4/t²)^γ`.
pub fn invariance_integral(lambda: f64, gamma_: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !lambda.is_finite() || !(t > 0.0) {
        return Err(Error::domain("invariance_integral", format!("lambda = {lambda}, t = {t}")));
    }
    let tau = 0.5 * t;
    let spec = KernelSpec::new(gamma_, tau)?;
    let a = 0.5 * lambda.abs() * t;
    let integrand = |rho: f64| {
        let defect = plane_wave_defect(a, rho);
        debug_assert!(defect >= -1e-14, "negative integrand at rho = {rho}");
        defect * radial_density(&spec, tau * rho).expect("positive radius")
    };
    let cfg = cfg.relative_only();
    let near = integrate_near_zero(
        integrand,
        1.0,
        PowerLaw {
            exponent: 1.0 - 2.0 * gamma_,
            correction: 2.0,
        },
        &cfg,
    )?;
    let middle = integrate(integrand, 1.0, TAIL_START, &cfg)?;
    let far = integrate_to_infinity(
        integrand,
        TAIL_START,
        PowerLaw {
            exponent: -1.0 - gamma_,
            correction: 1.0,
        },
        &cfg,
    )?;
    // K_{γ,τ}(τρ) sinh²ρ = radial_density(τρ)/τ²
    Ok(0.5 * PI * t.powi(3) / (tau * tau) * (near.value + middle.value + far.value))
}

/// Fitted log-log slopes of the kernel mass in its two asymptotic regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSlopes {
    /// Slope of `ρ² K(ρ) sinh²ρ` over `ρ ∈ [1e-4, 1e-2]`.
    pub near: f64,
    /// Slope of `K(ρ) sinh²ρ` over `ρ ∈ [1e3, 1e5]`.
    pub far: f64,
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(p, q), (x, y)| {
        let dx = x.ln() - mx;
        (p + dx * (y.ln() - my), q + dx * dx)
    });
    num / den
}

/// Least-squares slopes over two decades on each side, for `τ = 1`.
pub fn asymptotic_slopes(gamma_: f64) -> Result<AsymptoticSlopes> {
    let spec = KernelSpec::unit(gamma_)?;
    let sample = |lo: f64, weight: fn(f64) -> f64| -> Result<Vec<(f64, f64)>> {
        (0..=40)
            .map(|i| {
                let rho = lo * 10f64.powf(i as f64 / 20.0);
                Ok((rho, weight(rho) * radial_density(&spec, rho)?))
            })
            .collect()
    };
    Ok(AsymptoticSlopes {
        near: loglog_slope(&sample(1e-4, |r| r * r)?),
        far: loglog_slope(&sample(1e3, |_| 1.0)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_k;
    use proptest::prelude::*;

    fn direct_kernel(spec: &KernelSpec, rho: f64) -> f64 {
        // The defining formula evaluated literally.
        let nu = 1.5 + spec.gamma();
        let tau = spec.tau();
        normalizing_constant(3, spec.gamma()).unwrap() / tau / (rho / tau).sinh()
            * rho.powf(-0.5 - spec.gamma())
            * 2.0
            * bessel_k(-nu, rho / tau).unwrap()
            / (gamma(nu) * (2.0 * tau).powf(nu))
    }

    #[test]
    fn constant_examples() {
        let c = normalizing_constant(3, 0.5).unwrap();
        assert!((c * PI * PI - 1.0).abs() < 1e-14);
        assert!(normalizing_constant(3, 1.0).is_err());
        assert!(normalizing_constant(0, 0.5).is_err());
        let near_one: Vec<f64> = [0.9, 0.99, 0.999, 0.9999]
            .iter()
            .map(|&g| normalizing_constant(3, g).unwrap() / (1.0 - g))
            .collect();
        // Γ(1−γ)(1−γ) → 1, so C(3,γ)/(1−γ) → 4Γ(5/2)/π^{3/2} = 3/π.
        let gaps: Vec<f64> = near_one.iter().map(|v| (v - 3.0 / PI).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 1e-3);
        for &g in &[1e-3, 1e-5, 1e-7] {
            let ratio = normalizing_constant(3, g).unwrap() / g;
            assert!((ratio * PI.powf(1.5) / gamma(1.5) - 1.0).abs() < 20.0 * g);
        }
    }

    #[test]
    fn kernel_matches_defining_formula() {
        for &g in &[0.1, 0.5, 0.9] {
            for &tau in &[0.5, 1.0, 3.0] {
                let spec = KernelSpec::new(g, tau).unwrap();
                for &rho in &[1e-3, 0.1, 0.9, 1.0, 1.1, 4.0, 30.0] {
                    let v = kernel_value(&spec, rho).unwrap();
                    let want = direct_kernel(&spec, rho);
                    assert!((v / want - 1.0).abs() < 1e-12, "g {g} tau {tau} rho {rho}");
                    let dens = radial_density(&spec, rho).unwrap();
                    let want = want * (tau * (rho / tau).sinh()).powi(2);
                    assert!((dens / want - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(kernel_value(&KernelSpec::unit(0.5).unwrap(), 0.0).is_err());
    }

    #[test]
    fn kernel_decreases() {
        for &g in &[0.1, 0.5, 0.95] {
            let spec = KernelSpec::unit(g).unwrap();
            let mut prev = f64::INFINITY;
            for i in 1..=2000 {
                let v = kernel_value(&spec, 0.01 * i as f64).unwrap();
                assert!(v > 0.0 && v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn asymptotic_exponents() {
        for &g in &[0.3, 0.7] {
            let s = asymptotic_slopes(g).unwrap();
            assert!((s.near - (1.0 - 2.0 * g)).abs() < 0.02, "{s:?}");
            assert!((s.far - (-1.0 - g)).abs() < 0.02, "{s:?}");
        }
    }

    #[test]
    fn euclidean_limit() {
        let ratios: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&tau| euclidean_limit_ratio(0.5, 1.0, tau).unwrap())
            .collect();
        assert!((ratios[3] - 1.0).abs() < 1e-3);
        assert!(ratios.windows(2).all(|w| w[1] > w[0]));
        assert!((euclidean_limit_ratio(0.5, 1e-8, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let spec = KernelSpec::new(0.5, 2.0).unwrap();
        let direct = kernel_value(&spec, 1.3).unwrap() / (normalizing_constant(3, 0.5).unwrap() * 1.3f64.powi(-4));
        assert!((euclidean_limit_ratio(0.5, 1.3, 2.0).unwrap() / direct - 1.0).abs() < 1e-12);
        let far = kernel_value(&KernelSpec::unit(0.5).unwrap(), 300.0).unwrap()
            / (normalizing_constant(3, 0.5).unwrap() * 300f64.powi(-4));
        assert!((euclidean_limit_ratio(0.5, 300.0, 1.0).unwrap() / far - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_kernel_properties() {
        assert_eq!(spectral_kernel(0.0, 2.0, 1.0).unwrap(), 0.0);
        let a = spectral_kernel(1.7, 2.0, 0.8).unwrap();
        assert_eq!(spectral_kernel(-1.7, 2.0, 0.8).unwrap(), a);
        let want = -1.0 / (4.0 * PI * PI) * 1.7 * (1.7f64 * 0.8).sin() / 0.8f64.sinh();
        assert!((a / want - 1.0).abs() < 1e-14);
        let r1 = spectral_kernel(1.0, 2.0, 40.0 + PI / 2.0).unwrap();
        let r2 = spectral_kernel(1.0, 2.0, 40.0 + PI / 2.0 + 2.0 * PI).unwrap();
        assert!((r2 / r1 / (-2.0 * PI).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defect_series_matches_direct_form() {
        for &a in &[0.0, 0.3, 1.0, 2.0] {
            for &rho in &[0.2f64, 0.45, 0.9] {
                let direct = if a == 0.0 {
                    1.0 - rho / rho.sinh()
                } else {
                    1.0 - (a * rho).sin() / (a * rho.sinh())
                };
                let series = plane_wave_defect(a, rho);
                assert!((series - direct).abs() < 1e-12 * direct, "a {a} rho {rho}");
            }
        }
        assert!((plane_wave_defect(1.0, 1e-5) / (1e-10 * 2.0 / 6.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invariance_identity() {
        let cfg = QuadratureConfig::default();
        let v = invariance_integral(1.0, 0.5, 2.0, &cfg).unwrap();
        assert!((v / 2f64.sqrt() - 1.0).abs() < 1e-8, "{v}");
        let v = invariance_integral(0.0, 0.3, 2.0, &cfg).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
        for &t in &[1.0, 4.0] {
            let v = invariance_integral(1.5, 0.7, t, &cfg).unwrap();
            let want = (1.5f64.powi(2) + 4.0 / (t * t)).powf(0.7);
            assert!((v / want - 1.0).abs() < 1e-8, "t {t}: {v} vs {want}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn density_is_positive_and_smooth_across_switch(g in 0.01f64..0.99, tau in 0.2f64..5.0) {
            let spec = KernelSpec::new(g, tau).unwrap();
            let below = radial_density(&spec, tau * (1.0 - 1e-12)).unwrap();
            let above = radial_density(&spec, tau * (1.0 + 1e-12)).unwrap();
            prop_assert!(below > 0.0);
            prop_assert!((below / above - 1.0).abs() < 1e-10);
        }
    }
}
