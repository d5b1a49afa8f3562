//! Real-order modified Bessel and Struve functions and the indefinite
//! integrals of `ρ^{k-ν} K_{-ν}(ρ)` against `sinh`, `cosh` and `1`.
//!
//! * `K_ν(x)` is the integral `∫₀^∞ e^{-x cosh u} cosh(νu) du`, evaluated by
//!   the trapezoidal rule after factoring out the peak of the integrand. The
//!   integrand is entire and decays double exponentially, so the rule
//!   converges geometrically in the step and the result is smooth in `x`.
//! * `I_ν(x)` is the ascending series for `x ≤ 60` (all terms share a sign
//!   when `ν > -1`) and the Hankel expansion of `e^{-x} I_ν` beyond.
//! * `L_ν(x)` is the ascending series with compensated summation on `(0, 30]`.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

const SERIES_LIMIT_I: f64 = 60.0;
const STRUVE_LIMIT: f64 = 30.0;

/// `1/Γ(z)`, zero at the poles.
pub fn rgamma(z: f64) -> f64 {
    if z <= 0.0 && z == z.floor() {
        return 0.0;
    }
    if z > 171.0 {
        return (-ln_gamma(z)).exp();
    }
    1.0 / gamma(z)
}

/// `|Γ(-γ)|` for `γ ∈ (0, 1)`, computed as `Γ(1-γ)/γ` to avoid reflection.
pub fn abs_gamma_neg(gamma_: f64) -> f64 {
    gamma(1.0 - gamma_) / gamma_
}

/// Peak-factored pieces of the K integral: `K_ν(x) = exp(log_scale)·sum`,
/// together with `x + log_scale` computed without cancellation.
fn k_parts(nu: f64, x: f64) -> Result<(f64, f64, f64)> {
    let nu = nu.abs();
    let s = x.hypot(nu);
    let u_peak = (nu / x).asinh();
    let log_scale = -s + nu * u_peak;
    let shift = -nu * nu / (x + s) + nu * u_peak; // x + log_scale
    let term = |u: f64| {
        let sh = (0.5 * u).sinh();
        let base = -2.0 * x * sh * sh - shift;
        0.5 * ((base + nu * u).exp() + (base - nu * u).exp())
    };
    let mut h = (0.5 / s.sqrt()).min(0.125);
    let sweep = |h: f64, offset: f64| -> f64 {
        let mut acc = CompensatedSum::new();
        let mut k = 0usize;
        loop {
            let u = (k as f64 + offset) * h;
            let t = term(u);
            acc.add(if u == 0.0 { 0.5 * t } else { t });
            if u > u_peak && t <= 1e-18 * acc.value() {
                break;
            }
            k += 1;
            if k > 4_000_000 {
                break;
            }
        }
        acc.value()
    };
    let mut coarse = h * sweep(h, 0.0);
    for _ in 0..8 {
        let fine = 0.5 * coarse + 0.5 * h * sweep(h, 0.5);
        if (fine - coarse).abs() <= 1e-13 * fine {
            return Ok((log_scale, shift, fine));
        }
        coarse = fine;
        h *= 0.5;
    }
    Err(Error::NonConvergence {
        op: "bessel_k",
        estimate: coarse,
        error: f64::NAN,
    })
}

fn check_positive(op: &'static str, nu: f64, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(Error::domain(op, format!("nu = {nu}, x = {x}")));
    }
    Ok(())
}

/// Modified Bessel function of the second kind `K_ν(x)` for real `ν`, `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    check_positive("bessel_k", nu, x)?;
    let (ls, _, sum) = k_parts(nu, x)?;
    let v = ls.exp() * sum;
    if v.is_infinite() {
        return Err(Error::Overflow {
            op: "bessel_k",
            detail: format!("K_{nu}({x}); use bessel_k_xpow"),
        });
    }
    Ok(v)
}

/// `e^x K_ν(x)`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    check_positive("bessel_k_scaled", nu, x)?;
    let (_, shift, sum) = k_parts(nu, x)?;
    Ok(shift.exp() * sum)
}

/// `x^{|ν|} K_ν(x)`, finite as `x → 0`.
pub fn bessel_k_xpow(nu: f64, x: f64) -> Result<f64> {
    check_positive("bessel_k_xpow", nu, x)?;
    let (ls, _, sum) = k_parts(nu, x)?;
    Ok((ls + nu.abs() * x.ln()).exp() * sum)
}

/// `Σ_j (x/2)^{2j} / (j! (ν+1)_j)`, the series of `Γ(ν+1) (x/2)^{-ν} I_ν(x)`.
fn i_series_core(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut acc = CompensatedSum::new();
    let mut t = 1.0;
    acc.add(t);
    let mut j = 1.0;
    loop {
        t *= q / (j * (nu + j));
        acc.add(t);
        if j > 0.5 * x && t.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
        j += 1.0;
        if j > 10_000.0 {
            break;
        }
    }
    acc.value()
}

/// Integer orders of negative sign reduce to positive ones.
fn reduce_order(nu: f64) -> f64 {
    if nu < 0.0 && nu == nu.floor() {
        -nu
    } else {
        nu
    }
}

fn i_hankel_scaled(nu: f64, x: f64) -> Result<f64> {
    let mu = 4.0 * nu * nu;
    let mut acc = CompensatedSum::new();
    let mut t = 1.0;
    acc.add(t);
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        t *= -(mu - odd * odd) / (8.0 * kf * x);
        if t == 0.0 {
            break;
        }
        if t.abs() > prev {
            return Err(Error::NonConvergence {
                op: "bessel_i asymptotic",
                estimate: acc.value(),
                error: prev,
            });
        }
        acc.add(t);
        prev = t.abs();
        if t.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
    }
    Ok(acc.value() / (2.0 * std::f64::consts::PI * x).sqrt())
}

/// `e^{-x} I_ν(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(Error::domain("bessel_i_scaled", format!("nu = {nu}, x = {x}")));
    }
    let nu = reduce_order(nu);
    if x == 0.0 {
        return match nu {
            0.0 => Ok(1.0),
            n if n > 0.0 => Ok(0.0),
            _ => Err(Error::domain("bessel_i_scaled", format!("I_{nu}(0) is infinite"))),
        };
    }
    if x <= SERIES_LIMIT_I {
        let pre = (nu * (0.5 * x).ln() - x).exp() * rgamma(nu + 1.0);
        return Ok(pre * i_series_core(nu, x));
    }
    i_hankel_scaled(nu, x)
}

/// Modified Bessel function of the first kind `I_ν(x)`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(Error::domain("bessel_i", format!("nu = {nu}, x = {x}")));
    }
    let nu = reduce_order(nu);
    if x <= SERIES_LIMIT_I {
        if x == 0.0 {
            return bessel_i_scaled(nu, 0.0);
        }
        let pre = (0.5 * x).powf(nu) * rgamma(nu + 1.0);
        return Ok(pre * i_series_core(nu, x));
    }
    if x > 700.0 {
        return Err(Error::Overflow {
            op: "bessel_i",
            detail: format!("I_{nu}({x}); use bessel_i_scaled"),
        });
    }
    Ok(bessel_i_scaled(nu, x)? * x.exp())
}

/// `x^{-ν} I_ν(x)`, finite as `x → 0` (series range `0 ≤ x ≤ 60`).
pub fn bessel_i_xpow(nu: f64, x: f64) -> Result<f64> {
    if !(0.0..=SERIES_LIMIT_I).contains(&x) || !nu.is_finite() {
        return Err(Error::UnsupportedRange {
            op: "bessel_i_xpow",
            detail: format!("nu = {nu}, x = {x}"),
        });
    }
    let nu = reduce_order(nu);
    Ok(0.5f64.powf(nu) * rgamma(nu + 1.0) * i_series_core(nu, x))
}

/// Modified Struve function `L_ν(x)` on `(0, 30]`.
pub fn struve_l(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !nu.is_finite() {
        return Err(Error::domain("struve_l", format!("nu = {nu}, x = {x}")));
    }
    if x > STRUVE_LIMIT {
        return Err(Error::UnsupportedRange {
            op: "struve_l",
            detail: format!("x = {x} > {STRUVE_LIMIT}"),
        });
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut power = half.powf(nu + 1.0);
    let mut rg_a = rgamma(1.5);
    let mut rg_b = rgamma(nu + 1.5);
    let mut acc = CompensatedSum::new();
    let mut peak = 0.0f64;
    let mut j = 0usize;
    loop {
        let t = power * rg_a * rg_b;
        acc.add(t);
        peak = peak.max(t.abs());
        j += 1;
        let jf = j as f64;
        if jf > x + nu.abs() && t.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
        if j > 5000 {
            break;
        }
        power *= q;
        rg_a /= jf + 0.5;
        let shifted = nu + jf + 0.5;
        rg_b = if shifted == 0.0 {
            rgamma(nu + jf + 1.5)
        } else {
            rg_b / shifted
        };
    }
    let value = acc.value();
    if peak > 1e6 * value.abs() {
        return Err(Error::NonConvergence {
            op: "struve_l cancellation",
            estimate: value,
            error: peak * f64::EPSILON,
        });
    }
    Ok(value)
}

/// Elementary forms of the half-integer order Bessel functions.
pub mod half_integer {
    use std::f64::consts::PI;

    pub fn i_half(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.sinh()
    }

    pub fn i_minus_half(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.cosh()
    }

    pub fn i_three_halves(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * (x.cosh() - x.sinh() / x)
    }

    pub fn i_five_halves(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * ((1.0 + 3.0 / (x * x)) * x.sinh() - 3.0 * x.cosh() / x)
    }

    pub fn k_half(x: f64) -> f64 {
        (PI / (2.0 * x)).sqrt() * (-x).exp()
    }

    pub fn k_three_halves(x: f64) -> f64 {
        k_half(x) * (1.0 + 1.0 / x)
    }

    pub fn k_five_halves(x: f64) -> f64 {
        k_half(x) * (1.0 + 3.0 / x + 3.0 / (x * x))
    }
}

/// A real Bessel order used by the integral families.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() {
            Ok(Self(nu))
        } else {
            Err(Error::domain("Order", format!("nu = {nu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const MAX_FAMILY_K: usize = 8;

fn is_near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-12 * x.abs().max(1.0)
}

fn check_family(op: &'static str, k: usize, rho: f64) -> Result<()> {
    if k > MAX_FAMILY_K {
        return Err(Error::UnsupportedRange {
            op,
            detail: format!("k = {k} > {MAX_FAMILY_K}"),
        });
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::domain(op, format!("rho = {rho}")));
    }
    Ok(())
}

fn sinh_cosh_family(op: &'static str, k: usize, nu: Order, rho: f64, swap: bool) -> Result<f64> {
    check_family(op, k, rho)?;
    let nu = nu.value();
    let kf = k as f64;
    for j in 0..=k {
        let factor = kf + 1.0 + j as f64 - 2.0 * nu;
        if factor.abs() <= 1e-12 * (kf + 1.0) {
            return Err(Error::domain(
                op,
                format!("nu = {nu} makes the factor k+1+j-2nu vanish at j = {j}"),
            ));
        }
    }
    let i_plus = bessel_i(0.5, rho)?;
    let i_minus = bessel_i(-0.5, rho)?;
    let (first, second) = if swap { (i_minus, i_plus) } else { (i_plus, i_minus) };
    let mut acc = CompensatedSum::new();
    let mut coeff = 1.0;
    for j in 0..=k {
        let jf = j as f64;
        coeff /= kf + 1.0 + jf - 2.0 * nu;
        if j > 0 {
            coeff *= -(kf - jf + 1.0);
        }
        let (ia, ib) = if j % 2 == 0 { (first, second) } else { (second, first) };
        let bracket = bessel_k(nu - jf, rho)? * ia + bessel_k(nu - jf - 1.0, rho)? * ib;
        acc.add(coeff * bracket);
    }
    Ok((0.5 * std::f64::consts::PI).sqrt() * rho.powf(kf + 1.5 - nu) * acc.value())
}

/// Antiderivative of `ρ^{k-ν} K_{-ν}(ρ) sinh ρ`.
pub fn s_integral(k: usize, nu: Order, rho: f64) -> Result<f64> {
    sinh_cosh_family("s_integral", k, nu, rho, false)
}

/// Antiderivative of `ρ^{k-ν} K_{-ν}(ρ) cosh ρ`.
pub fn c_integral(k: usize, nu: Order, rho: f64) -> Result<f64> {
    sinh_cosh_family("c_integral", k, nu, rho, true)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Antiderivative of `ρ^{2k-ν} K_{-ν}(ρ)`, with a Struve boundary term.
pub fn l_integral(two_k: usize, nu: Order, rho: f64) -> Result<f64> {
    const OP: &str = "l_integral";
    if two_k % 2 != 0 {
        return Err(Error::domain(OP, format!("2k = {two_k} is odd")));
    }
    let k = two_k / 2;
    check_family(OP, k, rho)?;
    if rho > STRUVE_LIMIT {
        return Err(Error::UnsupportedRange {
            op: OP,
            detail: format!("rho = {rho} > {STRUVE_LIMIT}"),
        });
    }
    let nu = nu.value();
    let kf = k as f64;
    let shifted = nu - kf - 0.5;
    if shifted >= -1e-12 && is_near_integer(shifted) {
        return Err(Error::domain(OP, format!("nu = {nu} hits a pole of Γ(1/2 - ν + k)")));
    }
    let mut acc = CompensatedSum::new();
    for j in 0..k {
        let jf = j as f64;
        let coeff = factorial(2 * k) * factorial(k - j)
            / (2f64.powi(j as i32) * factorial(k) * factorial(2 * k - 2 * j));
        acc.add(-coeff * rho.powf(2.0 * kf - jf - nu) * bessel_k(1.0 - nu + jf, rho)?);
    }
    let boundary = std::f64::consts::PI.sqrt()
        * gamma(0.5 - nu + kf)
        * 2f64.powf(kf - nu - 1.0)
        * factorial(2 * k)
        / (2f64.powi(k as i32) * factorial(k))
        * rho
        * (bessel_k(kf - nu, rho)? * struve_l(kf - nu - 1.0, rho)?
            + bessel_k(kf - nu - 1.0, rho)? * struve_l(kf - nu, rho)?);
    acc.add(boundary);
    Ok(acc.value())
}

/// Both Bessel-ratio bounds at one `(ν, x)`, with the sides reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    /// `(I_{ν+1/2}/I_{ν-1/2}, x/(√(x²+ν²)+ν))`, present for `ν ≥ 0`.
    pub i_ratio: Option<(f64, f64)>,
    /// `(K_ν/K_{ν+1}, x/(√(x²+(ν-1/2)²)+ν+1/2))`, present for `ν ≥ 1/2`.
    pub k_ratio: Option<(f64, f64)>,
}

impl RatioBounds {
    /// Both sides are compared with a rounding allowance: the K bound is
    /// attained at `ν = 1/2`, and at `ν = 0` both sides of the I bound round
    /// to 1 once `tanh x` does.
    pub fn holds(&self) -> bool {
        let below = |(lhs, rhs): (f64, f64)| lhs <= rhs * (1.0 + 8.0 * f64::EPSILON);
        self.i_ratio.is_none_or(below) && self.k_ratio.is_none_or(below)
    }
}

/// Evaluates the two ratio bounds that apply at `(ν, x)`.
pub fn ratio_bounds_check(nu: f64, x: f64) -> Result<RatioBounds> {
    check_positive("ratio_bounds_check", nu, x)?;
    let i_ratio = if nu >= 0.0 {
        let lhs = bessel_i_scaled(nu + 0.5, x)? / bessel_i_scaled(nu - 0.5, x)?;
        Some((lhs, x / (x.hypot(nu) + nu)))
    } else {
        None
    };
    let k_ratio = if nu >= 0.5 {
        let lhs = bessel_k_scaled(nu, x)? / bessel_k_scaled(nu + 1.0, x)?;
        Some((lhs, x / (x.hypot(nu - 0.5) + nu + 0.5)))
    } else {
        None
    };
    Ok(RatioBounds { i_ratio, k_ratio })
}
