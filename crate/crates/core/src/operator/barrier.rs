//! The radial barrier `v(d) = max{−(κδ/20)^{−2α}, −(d/5R)^{−2α}}`, the
//! sign check of its rescaled maximal operator, and the three
//! arccosh-power inequalities behind it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::aux_h;
use crate::numerics::QuadratureConfig;
use crate::scale::i0_closed;

use super::pointwise::{pucci_plus, EllipticityBounds};
use super::profile::{FarField, RadialProfile, Smoothness};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    delta: f64,
    alpha: f64,
    kappa: f64,
    radius: f64,
    gamma: f64,
}

impl BarrierSpec {
    pub fn new(delta: f64, alpha: f64, kappa: f64, radius: f64, gamma_: f64) -> Result<Self> {
        let ok = delta > 0.0
            && delta < 1.0
            && alpha > 0.0
            && alpha.is_finite()
            && kappa > 0.0
            && kappa <= 0.25
            && radius > 0.0
            && radius.is_finite()
            && gamma_ > 0.0
            && gamma_ < 1.0;
        if !ok {
            return Err(Error::domain(
                "BarrierSpec",
                format!("delta = {delta}, alpha = {alpha}, kappa = {kappa}, R = {radius}, gamma = {gamma_}"),
            ));
        }
        Ok(Self {
            delta,
            alpha,
            kappa,
            radius,
            gamma: gamma_,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.delta, alpha, self.kappa, self.radius, self.gamma)
    }

    /// Radius `κδR/4` inside which the barrier is flat.
    pub fn flat_radius(&self) -> f64 {
        0.25 * self.kappa * self.delta * self.radius
    }

    /// Open interval of centre distances where the supersolution property
    /// is claimed.
    pub fn check_interval(&self) -> (f64, f64) {
        (0.25 * self.delta * self.radius, 5.0 * self.radius)
    }

    /// `ln |v(d)|`.
    fn log_magnitude(&self, d: f64) -> f64 {
        let ratio = (d / (5.0 * self.radius)).max(self.kappa * self.delta / 20.0);
        -2.0 * self.alpha * ratio.ln()
    }
}

/// `v(d)`. Large `α` can overflow to `−∞`; [`NormalizedBarrier`] avoids that.
pub fn barrier_value(spec: &BarrierSpec, d: f64) -> f64 {
    -spec.log_magnitude(d).exp()
}

/// `v / |v(R0)|` as a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedBarrier {
    spec: BarrierSpec,
    log_scale: f64,
}

impl NormalizedBarrier {
    pub fn new(spec: BarrierSpec, r0: f64) -> Self {
        Self {
            spec,
            log_scale: spec.log_magnitude(r0),
        }
    }

    /// `ln |v(R0)|`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn log_value(&self, d: f64) -> f64 {
        self.spec.log_magnitude(d) - self.log_scale
    }
}

impl RadialProfile for NormalizedBarrier {
    fn value(&self, r: f64) -> f64 {
        -self.log_value(r).exp()
    }

    fn increment(&self, from: f64, step: f64) -> f64 {
        let a = self.log_value(from);
        let cut = self.spec.flat_radius();
        let change = if from > cut && from + step > cut {
            -2.0 * self.spec.alpha() * (step / from).ln_1p()
        } else {
            self.log_value(from + step) - a
        };
        -a.exp() * change.exp_m1()
    }

    fn far_field(&self) -> FarField {
        FarField::Decaying { limit: 0.0 }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C0
    }

    fn is_smooth_at(&self, r: f64) -> bool {
        let cut = self.spec.flat_radius();
        (r - cut).abs() > 1e-9 * cut
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.spec.flat_radius()]
    }
}

/// One sample of the barrier check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierRow {
    pub r0: f64,
    /// `M⁺(v/|v(R0)|)(R0)`.
    pub pucci_normalized: f64,
    /// `ln |v(R0)|`.
    pub log_scale: f64,
    /// `(7R)²/I₀(7R) · M⁺v(R0) + Λ H(7R)`; may be `−∞` for large `α`.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    pub spec: BarrierSpec,
    pub bounds: EllipticityBounds,
    pub rows: Vec<BarrierRow>,
}

impl BarrierReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

pub fn barrier_check(
    spec: &BarrierSpec,
    samples: &[f64],
    bounds: EllipticityBounds,
    cfg: &QuadratureConfig,
) -> Result<BarrierReport> {
    let (lo, hi) = spec.check_interval();
    if samples.is_empty() {
        return Err(Error::domain("barrier_check", "no sample radii"));
    }
    if let Some(r) = samples.iter().find(|&&r| !(r > lo && r < hi)) {
        return Err(Error::domain("barrier_check", format!("R0 = {r} outside ({lo}, {hi})")));
    }
    let outer = 7.0 * spec.radius;
    let rescale = outer * outer / i0_closed(outer, spec.gamma)?;
    let offset = bounds.hi() * aux_h(outer);
    let rows = samples
        .par_iter()
        .map(|&r0| {
            let profile = NormalizedBarrier::new(*spec, r0);
            let m = pucci_plus(&profile, r0, spec.gamma, bounds, cfg)?;
            let scaled = rescale * m;
            let log_scale = profile.log_scale();
            let holds = scaled < 0.0 && (-scaled).ln() + log_scale >= offset.ln();
            Ok(BarrierRow {
                r0,
                pucci_normalized: m,
                log_scale,
                margin: scaled * log_scale.exp() + offset,
                holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BarrierReport {
        spec: *spec,
        bounds,
        rows,
    })
}

/// Largest exponent tried by [`alpha_sweep`].
pub const ALPHA_CAP: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    pub reports: Vec<BarrierReport>,
    /// Smallest swept `α` from which every later report holds at every
    /// sample; `None` when the cap is reached first (inconclusive).
    pub threshold: Option<f64>,
}

/// Barrier check at `α = 2, 4, 8, …, ALPHA_CAP`.
pub fn alpha_sweep(
    base: &BarrierSpec,
    samples: &[f64],
    bounds: EllipticityBounds,
    cfg: &QuadratureConfig,
) -> Result<AlphaSweep> {
    let mut reports = Vec::new();
    let mut alpha = 2.0;
    while alpha <= ALPHA_CAP {
        reports.push(barrier_check(&base.with_alpha(alpha)?, samples, bounds, cfg)?);
        alpha *= 2.0;
    }
    let mut threshold = None;
    for report in reports.iter().rev() {
        if !report.all_hold() {
            break;
        }
        threshold = Some(report.spec.alpha);
    }
    Ok(AlphaSweep { reports, threshold })
}

/// Both sides of the three inequalities at one `(α, R0, t)`; each left side
/// is a difference `f(t) − f(1)` and each right side its tangent-line bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArccosReport {
    pub lhs: [f64; 3],
    pub rhs: [f64; 3],
    pub holds: [bool; 3],
}

impl ArccosReport {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

pub fn arccos_inequalities(alpha: f64, r0: f64, t: f64) -> Result<ArccosReport> {
    let c = r0.cosh();
    if !(alpha > 0.0) || !(r0 > 0.0) || !alpha.is_finite() || !r0.is_finite() || !(t * c > 1.0) || !t.is_finite() {
        return Err(Error::domain(
            "arccos_inequalities",
            format!("alpha = {alpha}, R0 = {r0}, t = {t}"),
        ));
    }
    let tc = t * c;
    let gap = t.mul_add(c, -1.0);
    let acosh = (gap + (gap * (tc + 1.0)).sqrt()).ln_1p();
    let denom = gap * (tc + 1.0);
    let s = r0.sinh();
    let h = crate::geometry::aux_h(r0);
    let two_a = 2.0 * alpha;
    let lead = r0.powf(-two_a);
    let step = t - 1.0;
    let tail = 1.0 / (r0 * r0 * s * s);

    let f = [
        acosh.powf(-two_a),
        acosh.powf(-two_a - 2.0) / denom,
        acosh.powf(-two_a - 1.0) * tc / denom.powf(1.5),
    ];
    let f_at_one = [
        lead,
        r0.powf(-two_a - 2.0) / (s * s),
        r0.powf(-two_a - 1.0) * c / (s * s * s),
    ];
    let rhs = [
        -two_a * r0.powf(-two_a - 2.0) * h * step,
        -lead * ((two_a + 2.0) + 2.0 * h) * h * step / (r0 * r0) * tail,
        -lead * ((two_a + 1.0) * h - r0 * r0 + 3.0 * h * h) * h * step / (r0 * r0) * tail,
    ];
    let mut lhs = [0.0; 3];
    let mut holds = [false; 3];
    for i in 0..3 {
        lhs[i] = f[i] - f_at_one[i];
        let slack = 64.0 * f64::EPSILON * (f[i].abs() + f_at_one[i].abs() + rhs[i].abs());
        holds[i] = lhs[i] >= rhs[i] - slack;
    }
    Ok(ArccosReport { lhs, rhs, holds })
}
