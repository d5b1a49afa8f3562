//! Near-field and far-field scale functions of the unit-curvature kernel
//!
//! `I₀(R) = 4π ∫₀^R ρ² K(ρ) sinh²ρ dρ` and `I∞(R) = 4πR² ∫_R^∞ K(ρ) sinh²ρ dρ`,
//! in closed form through Bessel products and by direct quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::aux_h;
use crate::kernel::{radial_density, KernelSpec};
use crate::numerics::{bisect, integrate, integrate_near_zero, integrate_to_infinity, PowerLaw, QuadratureConfig};
use crate::specfun::{abs_gamma_neg, bessel_i_scaled, bessel_i_xpow, bessel_k_scaled, bessel_k_xpow};

/// Supported range of the fractional order.
pub const GAMMA_RANGE: (f64, f64) = (0.01, 0.999);

/// Above this argument Bessel products use exponentially scaled factors.
const PRODUCT_SWITCH: f64 = 50.0;

/// Start of the tail piece in the far-field quadrature.
const TAIL_START: f64 = 40.0;

/// Default ratio `r₀ / x` in [`r0_solve`].
pub const DEFAULT_RHO0: f64 = 0.25;

fn check(op: &'static str, r: f64, gamma_: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(op, format!("R = {r}")));
    }
    if !(gamma_ > 0.0 && gamma_ < 1.0) {
        return Err(Error::domain(op, format!("gamma = {gamma_}")));
    }
    if !(GAMMA_RANGE.0..=GAMMA_RANGE.1).contains(&gamma_) {
        return Err(Error::UnsupportedRange {
            op,
            detail: format!("gamma = {gamma_} outside [{}, {}]", GAMMA_RANGE.0, GAMMA_RANGE.1),
        });
    }
    Ok(())
}

/// `x^p I_μ(x) K_ν(x)`, evaluated without overflow at either end.
fn bessel_product(mu: f64, nu: f64, x: f64, p: f64) -> Result<f64> {
    if x <= PRODUCT_SWITCH {
        let log = (p + mu - nu.abs()) * x.ln();
        return Ok(log.exp() * bessel_i_xpow(mu, x)? * bessel_k_xpow(nu, x)?);
    }
    Ok(x.powf(p) * bessel_i_scaled(mu, x)? * bessel_k_scaled(nu, x)?)
}

/// The three Bessel products entering both closed forms, each multiplied by
/// `x^p`: `(I½K_{3/2+γ}, I_{3/2}K_{½+γ}, I_{5/2}K_{γ−½})`.
fn products(x: f64, gamma_: f64, p: f64) -> Result<[f64; 3]> {
    Ok([
        bessel_product(0.5, 1.5 + gamma_, x, p)?,
        bessel_product(1.5, 0.5 + gamma_, x, p)?,
        bessel_product(2.5, gamma_ - 0.5, x, p)?,
    ])
}

/// Combination of the Bessel products that gives `I₀`.
fn i0_from_products(gamma_: f64, [a, b, c]: [f64; 3]) -> f64 {
    let base = 2f64.powf(gamma_) / ((1.0 - gamma_) * abs_gamma_neg(gamma_));
    base * (a + b) - base / (2.0 - gamma_) * (b + c)
}

/// `I₀(R)` in closed form.
pub fn i0_closed(r: f64, gamma_: f64) -> Result<f64> {
    check("i0_closed", r, gamma_)?;
    Ok(i0_from_products(gamma_, products(r, gamma_, 3.0 - gamma_)?))
}

/// `I∞(R)` in closed form.
pub fn iinf_closed(r: f64, gamma_: f64) -> Result<f64> {
    check("iinf_closed", r, gamma_)?;
    let [a, b, _] = products(r, gamma_, 3.0 - gamma_)?;
    Ok(2f64.powf(gamma_) / (gamma_ * abs_gamma_neg(gamma_)) * (a + b))
}

/// `I₀(x) / x^{2−2γ}`, smooth and positive down to `x → 0`.
fn i0_reduced(x: f64, gamma_: f64) -> Result<f64> {
    Ok(i0_from_products(gamma_, products(x, gamma_, 1.0 + gamma_)?))
}

fn near_law(gamma_: f64) -> PowerLaw {
    PowerLaw {
        exponent: 1.0 - 2.0 * gamma_,
        correction: 2.0,
    }
}

fn far_law(gamma_: f64) -> PowerLaw {
    PowerLaw {
        exponent: -1.0 - gamma_,
        correction: 1.0,
    }
}

/// `I₀(R)` by quadrature of its defining integral.
pub fn i0_quadrature(r: f64, gamma_: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check("i0_quadrature", r, gamma_)?;
    let spec = KernelSpec::unit(gamma_)?;
    let f = |rho: f64| rho * rho * radial_density(&spec, rho).expect("positive radius");
    let est = integrate_near_zero(f, r, near_law(gamma_), &cfg.relative_only())?;
    Ok(4.0 * PI * est.value)
}

fn tail_integral(spec: &KernelSpec, from: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let f = |rho: f64| radial_density(spec, rho).expect("positive radius");
    let start = from.max(TAIL_START);
    let middle = if from < start {
        integrate(f, from, start, cfg)?.value
    } else {
        0.0
    };
    Ok(middle + integrate_to_infinity(f, start, far_law(spec.gamma()), cfg)?.value)
}

/// `I∞(R)` by quadrature of its defining integral.
pub fn iinf_quadrature(r: f64, gamma_: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check("iinf_quadrature", r, gamma_)?;
    let spec = KernelSpec::unit(gamma_)?;
    Ok(4.0 * PI * r * r * tail_integral(&spec, r, &cfg.relative_only())?)
}

/// `I(R) = 4π ∫₀^∞ min(ρ², R²) K(ρ) sinh²ρ dρ` as one integral, split at
/// fixed points rather than at `R`.
pub fn total_quadrature(r: f64, gamma_: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check("total_quadrature", r, gamma_)?;
    let spec = KernelSpec::unit(gamma_)?;
    let cfg = cfg.relative_only();
    let weight = |rho: f64| rho.min(r).powi(2);
    let f = |rho: f64| weight(rho) * radial_density(&spec, rho).expect("positive radius");
    let split = r.min(1.0);
    let near = integrate_near_zero(f, split, near_law(gamma_), &cfg)?.value;
    let mut breaks = vec![split, TAIL_START.max(2.0 * r)];
    if r > split && r < breaks[1] {
        breaks.insert(1, r);
    }
    let middle: f64 = breaks
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], &cfg).map(|e| e.value))
        .sum::<Result<f64>>()?;
    let far = integrate_to_infinity(f, breaks[breaks.len() - 1], far_law(gamma_), &cfg)?.value;
    Ok(4.0 * PI * (near + middle + far))
}

/// Both scale functions at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleValues {
    pub i0: f64,
    pub iinf: f64,
    pub r: f64,
    pub gamma: f64,
}

impl ScaleValues {
    pub fn closed(r: f64, gamma_: f64) -> Result<Self> {
        Ok(Self {
            i0: i0_closed(r, gamma_)?,
            iinf: iinf_closed(r, gamma_)?,
            r,
            gamma: gamma_,
        })
    }

    pub fn total(&self) -> f64 {
        self.i0 + self.iinf
    }

    /// `((1−γ)/γ) H(R) I₀(R) − I∞(R)`, nonnegative when the far field is
    /// dominated by the near field.
    pub fn domination_margin(&self) -> f64 {
        (1.0 - self.gamma) / self.gamma * aux_h(self.r) * self.i0 - self.iinf
    }
}

/// `r₀ = ρ₀ x` where `I₀(x) = I₀(R)/2`.
///
/// `I₀(x) ~ c x^{2−2γ}` near the origin, so for `γ` close to 1 the root is
/// astronomically small (about `2^{-500}` at `γ = 0.999`); the bisection
/// runs in `log x` down to `1e-300`.
pub fn r0_solve(r: f64, gamma_: f64, rho0: f64) -> Result<f64> {
    check("r0_solve", r, gamma_)?;
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::domain("r0_solve", format!("rho0 = {rho0}")));
    }
    let target = (0.5 * i0_closed(r, gamma_)?).ln();
    let exponent = 2.0 - 2.0 * gamma_;
    let log_i0 = |u: f64| -> Result<f64> { Ok(exponent * u + i0_reduced(u.exp(), gamma_)?.ln() - target) };
    let u = bisect(log_i0, 1e-300f64.ln(), r.ln(), 1e-13, "r0_solve")?;
    Ok(rho0 * u.exp())
}

/// Worst margins of the monotonicity and domination properties on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub gamma: f64,
    /// `min_i (1 − q_{i+1}/q_i)` for `q = I₀/R^{2−γ}`.
    pub i0_over_r_2_minus_gamma: f64,
    /// `min_i (1 − q_{i+1}/q_i)` for `q = I₀/R²`.
    pub i0_over_r_squared: f64,
    /// `min_i` of the domination margin divided by `I∞`.
    pub domination: f64,
    /// `min_i (1 − q_{i+1}/q_i)` for `q = I∞/R²`.
    pub iinf_over_r_squared: f64,
    /// `min_i (I₀(R_{i+1})/I₀(R_i) − 1)`.
    pub i0_increasing: f64,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.i0_over_r_2_minus_gamma >= 0.0
            && self.i0_over_r_squared >= 0.0
            && self.domination >= 0.0
            && self.iinf_over_r_squared >= 0.0
            && self.i0_increasing > 0.0
    }
}

fn min_decrease(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| 1.0 - w[1] / w[0])
        .fold(f64::INFINITY, f64::min)
}

pub fn monotonicity_report(gamma_: f64, r_grid: &[f64]) -> Result<MonotonicityReport> {
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(
            "monotonicity_report",
            "grid must hold at least two strictly increasing radii",
        ));
    }
    let values = r_grid
        .iter()
        .map(|&r| ScaleValues::closed(r, gamma_))
        .collect::<Result<Vec<_>>>()?;
    let ratio = |f: &dyn Fn(&ScaleValues) -> f64| values.iter().map(f).collect::<Vec<_>>();
    Ok(MonotonicityReport {
        gamma: gamma_,
        i0_over_r_2_minus_gamma: min_decrease(&ratio(&|v| v.i0 / v.r.powf(2.0 - gamma_))),
        i0_over_r_squared: min_decrease(&ratio(&|v| v.i0 / (v.r * v.r))),
        domination: values
            .iter()
            .map(|v| v.domination_margin() / v.iinf)
            .fold(f64::INFINITY, f64::min),
        iinf_over_r_squared: min_decrease(&ratio(&|v| v.iinf / (v.r * v.r))),
        i0_increasing: values
            .windows(2)
            .map(|w| w[1].i0 / w[0].i0 - 1.0)
            .fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for &g in &[0.1, 0.5, 0.9] {
            for &r in &[0.1, 1.0, 3.0, 5.0] {
                let c0 = i0_closed(r, g).unwrap();
                let q0 = i0_quadrature(r, g, &cfg()).unwrap();
                assert!((c0 / q0 - 1.0).abs() < 1e-8, "I0 R {r} g {g}: {c0} vs {q0}");
                let ci = iinf_closed(r, g).unwrap();
                let qi = iinf_quadrature(r, g, &cfg()).unwrap();
                assert!((ci / qi - 1.0).abs() < 1e-8, "Iinf R {r} g {g}: {ci} vs {qi}");
            }
        }
    }

    #[test]
    fn additivity() {
        for &(r, g) in &[(0.3, 0.2), (1.0, 0.5), (2.5, 0.8), (60.0, 0.5)] {
            let t = total_quadrature(r, g, &cfg()).unwrap();
            let parts = i0_quadrature(r, g, &cfg()).unwrap() + iinf_quadrature(r, g, &cfg()).unwrap();
            assert!((t / parts - 1.0).abs() < 1e-9, "R {r} g {g}");
        }
    }

    #[test]
    fn large_radius_uses_scaled_products() {
        let below = i0_closed(PRODUCT_SWITCH * (1.0 - 1e-12), 0.4).unwrap();
        let above = i0_closed(PRODUCT_SWITCH * (1.0 + 1e-12), 0.4).unwrap();
        assert!((below / above - 1.0).abs() < 1e-9);
        assert!(i0_closed(400.0, 0.4).unwrap().is_finite());
    }

    #[test]
    fn limits_as_gamma_tends_to_one() {
        for &r in &[0.5, 1.0, 2.0] {
            let gaps: Vec<(f64, f64)> = [0.9, 0.99, 0.999]
                .iter()
                .map(|&g| {
                    let v = ScaleValues::closed(r, g).unwrap();
                    ((v.i0 - 6.0).abs(), v.iinf)
                })
                .collect();
            assert!(gaps.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "R {r}: {gaps:?}");
        }
        let v = ScaleValues::closed(1.0, 0.999).unwrap();
        assert!((v.i0 - 6.0).abs() <= 0.05 && v.iinf <= 0.05);
        assert!(i0_quadrature(1.0, 0.99, &cfg()).unwrap().is_finite());
    }

    #[test]
    fn unsupported_gamma() {
        assert!(matches!(i0_closed(1.0, 0.9995), Err(Error::UnsupportedRange { .. })));
        assert!(matches!(i0_closed(1.0, 1.0), Err(Error::Domain { .. })));
        assert!(i0_closed(0.0, 0.5).is_err());
    }

    #[test]
    fn r0_properties() {
        let a = r0_solve(1.0, 0.5, 0.25).unwrap();
        let b = r0_solve(1.0, 0.5, 0.5).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
        let x = a / 0.25;
        assert!(x < 1.0);
        let half = i0_closed(x, 0.5).unwrap() / i0_closed(1.0, 0.5).unwrap();
        assert!((half - 0.5).abs() < 1e-10);
        let sweep: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&g| r0_solve(1.0, g, DEFAULT_RHO0).unwrap())
            .collect();
        assert!(sweep.windows(2).all(|w| w[1] < w[0]));
        assert!(sweep[2] <= 0.05 * DEFAULT_RHO0);
        assert!(sweep[2] > 0.0);
    }

    #[test]
    fn reduced_form_matches_direct() {
        for &(x, g) in &[(0.3, 0.4), (1.0, 0.9), (2.0, 0.1)] {
            let direct = i0_closed(x, g).unwrap() / x.powf(2.0 - 2.0 * g);
            assert!((i0_reduced(x, g).unwrap() / direct - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn monotonicity_on_grids() {
        let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
        for &g in &[0.1, 0.5, 0.95] {
            let rep = monotonicity_report(g, &grid).unwrap();
            assert!(rep.holds(), "{rep:?}");
        }
        assert!(monotonicity_report(0.5, &[1.0, 0.5]).is_err());
    }
}
