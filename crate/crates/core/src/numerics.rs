//! Quadrature, root finding and differentiation primitives.
//!
//! Every integral in the crate goes through [`integrate`] (adaptive
//! Gauss–Kronrod 7/15), [`integrate_near_zero`] (integrable power-law
//! singularity at the left endpoint) or [`integrate_to_infinity`]
//! (algebraically decaying tail). The last two integrate over dyadic shells
//! and close the remaining geometric series with a two-term asymptotic model,
//! which turns very slowly converging integrals such as `∫₀ ρ^{-0.998} dρ`
//! into a few dozen shell quadratures.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and limits shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of interval bisections in one adaptive integral.
    pub max_subdiv: usize,
    /// Relative size below which a decaying contribution is dropped when a
    /// semi-infinite smooth integral is truncated.
    pub truncation_decay: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdiv: 2000,
            truncation_decay: 1e-16,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol > 0.0
            && self.abs_tol.is_finite()
            && self.max_subdiv >= 10
            && self.truncation_decay > 0.0
            && self.truncation_decay < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("QuadratureConfig", format!("{self:?}")))
        }
    }

    /// Same relative tolerance with no absolute floor, for integrals whose
    /// magnitude is unknown in advance (nested or shell integrals).
    pub fn relative_only(&self) -> Self {
        Self {
            abs_tol: 0.0,
            ..*self
        }
    }

    pub fn with_rel_tol(&self, rel_tol: f64) -> Self {
        Self { rel_tol, ..*self }
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

// Kronrod 15-point abscissae; odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut left = [0.0; 7];
    let mut right = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        left[j] = f1;
        right[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((left[j] - mean).abs() + (right[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::NonConvergence {
            op: "kronrod15",
            estimate: value,
            error,
        });
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    })
}

/// Adaptive Gauss–Kronrod integration of a fallible integrand over `[a, b]`.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`, or below the rounding floor of the integrand.
pub fn try_integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integrate", format!("limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = kronrod15(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first.abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut splits = 0usize;
    loop {
        let tol = cfg
            .abs_tol
            .max(cfg.rel_tol * total.abs())
            .max(100.0 * f64::EPSILON * total_abs);
        if total_err <= tol {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a).abs()
            <= 1e3 * f64::EPSILON * (worst.a.abs() + worst.b.abs()).max(f64::MIN_POSITIVE);
        if splits >= cfg.max_subdiv || too_narrow {
            return Err(Error::NonConvergence {
                op: "adaptive quadrature",
                estimate: total,
                error: total_err,
            });
        }
        let l = kronrod15(&mut f, worst.a, mid)?;
        let r = kronrod15(&mut f, mid, worst.b)?;
        total += l.value + r.value - worst.value;
        total_err += l.error + r.error - worst.error;
        total_abs += l.abs_value + r.abs_value - worst.abs_value;
        heap.push(l);
        heap.push(r);
        splits += 1;
    }
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segs.iter().map(|s| s.value).collect::<CompensatedSum>().value();
    let error = segs.iter().map(|s| s.error).sum();
    Ok(Estimate { value, error })
}

/// Adaptive Gauss–Kronrod integration of an infallible integrand.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, cfg)
}

/// Local behaviour `f(x) ≈ x^exponent · (c₀ + c₁ x^correction)` of an
/// integrand at an endpoint (x → 0 for [`integrate_near_zero`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub correction: f64,
}

/// `∫₀^a f` for an integrand with an integrable power-law singularity at 0.
///
/// The interval is cut into shells `[a 2^{-k-1}, a 2^{-k}]`. Once the shell
/// integrals follow `A q^k + B (q r)^k` with `q = 2^{-(exponent+1)}` and
/// `r = 2^{-correction}`, the rest of the series is summed in closed form.
pub fn try_integrate_near_zero<F>(
    mut f: F,
    a: f64,
    law: PowerLaw,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MIN_SHELLS: usize = 6;
    const MAX_SHELLS: usize = 400;
    if !(a > 0.0) || !(law.exponent > -1.0) || !(law.correction > 0.0) {
        return Err(Error::domain(
            "integrate_near_zero",
            format!("a = {a}, law = {law:?}"),
        ));
    }
    let q = (-(law.exponent + 1.0) * std::f64::consts::LN_2).exp();
    let r = (-law.correction * std::f64::consts::LN_2).exp();
    let qr = q * r;
    let mut shell_cfg = cfg.with_rel_tol(0.1 * cfg.rel_tol);

    let mut partial = CompensatedSum::new();
    let mut shell_err = 0.0;
    let mut prev_shell: Option<f64> = None;
    let mut prev_total: Option<f64> = None;
    let mut settled = 0usize;
    let mut hi = a;
    for k in 0..MAX_SHELLS {
        let lo = 0.5 * hi;
        // Deep shells only need to be accurate against the running sum.
        shell_cfg.abs_tol = (0.1 * cfg.abs_tol).max(0.05 * cfg.rel_tol * partial.value().abs());
        let shell = try_integrate(&mut f, lo, hi, &shell_cfg)?;
        partial.add(shell.value);
        shell_err += shell.error;
        hi = lo;
        let c_k = shell.value;
        let total = match prev_shell {
            Some(c_prev) => {
                let b_k = (c_prev - c_k / q) * qr / (1.0 - r);
                let a_k = c_k - b_k;
                partial.value() + a_k * q / (1.0 - q) + b_k * qr / (1.0 - qr)
            }
            None => partial.value() + c_k * q / (1.0 - q),
        };
        if let Some(t_prev) = prev_total {
            let change = (total - t_prev).abs();
            let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
            if change <= tol {
                settled += 1;
            } else {
                settled = 0;
            }
            if k + 1 >= MIN_SHELLS && settled >= 2 {
                return Ok(Estimate {
                    value: total,
                    error: change + shell_err,
                });
            }
        }
        prev_shell = Some(c_k);
        prev_total = Some(total);
        if lo < 1e-300 {
            break;
        }
    }
    Err(Error::NonConvergence {
        op: "integrate_near_zero",
        estimate: prev_total.unwrap_or(f64::NAN),
        error: f64::NAN,
    })
}

/// Infallible-integrand form of [`try_integrate_near_zero`].
pub fn integrate_near_zero<F>(mut f: F, a: f64, law: PowerLaw, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_near_zero(|x| Ok(f(x)), a, law, cfg)
}

/// `∫_a^∞ f` for `f(x) ≈ x^exponent (c₀ + c₁ x^{-correction})` as x → ∞ with
/// `exponent < -1`. Reduces to [`try_integrate_near_zero`] through `x = 1/s`.
pub fn try_integrate_to_infinity<F>(
    mut f: F,
    a: f64,
    law: PowerLaw,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a > 0.0) || !(law.exponent < -1.0) {
        return Err(Error::domain(
            "integrate_to_infinity",
            format!("a = {a}, law = {law:?}"),
        ));
    }
    let inner = PowerLaw {
        exponent: -law.exponent - 2.0,
        correction: law.correction,
    };
    try_integrate_near_zero(
        |s| {
            let x = 1.0 / s;
            Ok(f(x)? * x * x)
        },
        1.0 / a,
        inner,
        cfg,
    )
}

/// Infallible-integrand form of [`try_integrate_to_infinity`].
pub fn integrate_to_infinity<F>(mut f: F, a: f64, law: PowerLaw, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_to_infinity(|x| Ok(f(x)), a, law, cfg)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Central difference with step `max(1e-5, 1e-5|x|)` and one level of
/// Richardson extrapolation.
pub fn richardson_derivative<F>(mut f: F, x: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let h = (1e-5 * x.abs()).max(1e-5);
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    (4.0 * d2 - d1) / 3.0
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the
/// bracket is narrower than `rel_tol·|x|`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, op: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::domain(
            op,
            format!("no sign change on [{lo:e}, {hi:e}]: f = {f_lo:e}, {f_hi:e}"),
        ));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        op,
        estimate: 0.5 * (lo + hi),
        error: (hi - lo).abs(),
    })
}
