//! Pointwise evaluation of the fractional Laplacian and the extremal
//! operators on radial profiles.
//!
//! The evaluation point sits at distance `R0` from the centre of the profile.
//! In geodesic polar coordinates `(r, ω)` around that point the integrand
//! depends on `r` and on the cosine `ω₁` of the angle towards the centre
//! only, so each operator is the double integral
//! `2π ∫₀^∞ ρ_γ(r) ∫_{−1}^{1} w(δ(r, ω₁)) dω₁ dr` of a weighted symmetric
//! second difference `δ` against the radial kernel density `ρ_γ`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::law_of_cosines;
use crate::kernel::{radial_density, KernelSpec};
use crate::numerics::{try_integrate, try_integrate_near_zero, try_integrate_to_infinity, PowerLaw, QuadratureConfig};
use crate::scale::{i0_closed, iinf_closed};

use super::profile::{FarField, RadialProfile};

/// Ellipticity constants `0 < λ ≤ Λ` of the kernel class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityBounds {
    lo: f64,
    hi: f64,
}

impl EllipticityBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::domain("EllipticityBounds", format!("lambda = {lo}, Lambda = {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// `δ = (u(d₋) + u(d₊) − 2u(R0)) / 2` for the two points at geodesic polar
/// coordinates `(r, ±ω)` around a point at distance `R0` from the centre.
pub fn second_difference(u: &dyn RadialProfile, r0: f64, r: f64, omega1: f64) -> Result<f64> {
    let (near, far) = law_of_cosines(r, r0, omega1)?;
    let (dn, df) = if r0 > 0.0 && r + r0 <= 700.0 {
        // cosh d − cosh R0 = 2 sinh((d + R0)/2) sinh((d − R0)/2), with the
        // left side formed without cancellation.
        let radial = r0.cosh() * 2.0 * (0.5 * r).sinh().powi(2);
        let cross = r.sinh() * r0.sinh() * omega1.clamp(-1.0, 1.0);
        let offset = |gap: f64, d: f64| 2.0 * (gap / (2.0 * (0.5 * (d + r0)).sinh())).asinh();
        (offset(radial - cross, near), offset(radial + cross, far))
    } else {
        (near - r0, far - r0)
    };
    Ok(0.5 * (u.increment(r0, dn) + u.increment(r0, df)))
}

#[derive(Debug, Clone, Copy)]
enum Weighting {
    Linear,
    Plus(EllipticityBounds),
    Minus(EllipticityBounds),
}

impl Weighting {
    fn apply(self, d: f64) -> f64 {
        let (pos, neg) = (d.max(0.0), (-d).max(0.0));
        match self {
            Weighting::Linear => d,
            Weighting::Plus(b) => b.hi * pos - b.lo * neg,
            Weighting::Minus(b) => b.lo * pos - b.hi * neg,
        }
    }
}

// Names the failing piece, keeping the innermost label.
fn relabel(op: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonConvergence { op: inner, estimate, error } if !inner.contains("integral") => {
            Error::NonConvergence { op, estimate, error }
        }
        other => other,
    }
}

/// Upper end of the graded piece near `r = 0`.
const NEAR_SPLIT: f64 = 0.25;
/// Smallest start of the algebraic tail piece.
const TAIL_START: f64 = 40.0;

fn evaluate(u: &dyn RadialProfile, r0: f64, gamma_: f64, weighting: Weighting, cfg: &QuadratureConfig) -> Result<f64> {
    const OP: &str = "fractional operator";
    cfg.validate()?;
    let spec = KernelSpec::unit(gamma_)?;
    if !(r0 >= 0.0) || !r0.is_finite() {
        return Err(Error::domain(OP, format!("R0 = {r0}")));
    }
    if !u.is_smooth_at(r0) {
        return Err(Error::domain(OP, format!("profile is not C2 at R0 = {r0}")));
    }
    let reach = match u.far_field() {
        FarField::Constant { radius, .. } => radius,
        FarField::Decaying { .. } => 0.0,
        FarField::Unbounded => return Err(Error::domain(OP, "profile is unbounded")),
    };
    let kinks = u.kinks();

    let mut near = if r0 > 0.0 { NEAR_SPLIT.min(0.5 * r0) } else { NEAR_SPLIT };
    for &k in &kinks {
        let gap = (r0 - k).abs();
        if gap > 0.0 {
            near = near.min(0.5 * gap);
        }
    }
    let tail = TAIL_START.max(r0 + reach + 1.0);
    let mut breaks = vec![near, tail, r0];
    for &k in &kinks {
        breaks.push((r0 - k).abs());
        breaks.push(r0 + k);
    }
    breaks.retain(|&b| b >= near && b <= tail);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    // δ carries rounding noise of order eps·|u(R0)| however small it is, so
    // absolute tolerances are tied to the size of u.
    let size = u.value(r0).abs();
    let mut inner_cfg = cfg.relative_only().with_rel_tol(0.01 * cfg.rel_tol);
    inner_cfg.abs_tol = 256.0 * f64::EPSILON * size;
    let mut cfg = *cfg;
    cfg.abs_tol = cfg.abs_tol.max(0.01 * cfg.rel_tol * size);
    let cfg = &cfg;
    let angular = |r: f64| -> Result<f64> {
        if r0 == 0.0 {
            return Ok(2.0 * weighting.apply(u.increment(0.0, r)));
        }
        // δ is even in ω₁, so integrate over [0, 1] and double, splitting
        // where either neighbour crosses a kink of u.
        let mut cuts = vec![0.0, 1.0];
        let (ch, sh) = (r.cosh() * r0.cosh(), r.sinh() * r0.sinh());
        for &k in &kinks {
            let w1 = ((ch - k.cosh()) / sh).abs();
            if w1 > 0.0 && w1 < 1.0 {
                cuts.push(w1);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += try_integrate(
                |w1| Ok(weighting.apply(second_difference(u, r0, r, w1)?)),
                w[0],
                w[1],
                &inner_cfg,
            )
            .map_err(relabel("angular integral"))?
            .value;
        }
        Ok(2.0 * total)
    };
    let radial = |r: f64| -> Result<f64> { Ok(radial_density(&spec, r)? * angular(r)?) };

    let near_law = PowerLaw {
        exponent: 1.0 - 2.0 * gamma_,
        correction: 2.0,
    };
    let far_law = PowerLaw {
        exponent: -1.0 - gamma_,
        correction: 1.0,
    };
    let mut rest = try_integrate_to_infinity(radial, tail, far_law, cfg)
        .map_err(relabel("radial tail integral"))?
        .value;
    for w in breaks.windows(2) {
        rest += try_integrate(radial, w[0], w[1], cfg)
            .map_err(relabel("radial integral"))?
            .value;
    }
    // The piece at the origin only has to be accurate against the rest.
    let mut near_cfg = *cfg;
    near_cfg.abs_tol = cfg.abs_tol.max(0.1 * cfg.rel_tol * rest.abs());
    let near_part = try_integrate_near_zero(radial, near, near_law, &near_cfg)
        .map_err(relabel("radial integral near 0"))?
        .value;
    Ok(2.0 * PI * (near_part + rest))
}

/// `−(−Δ)^γ u` at a point at distance `R0` from the centre of `u`.
pub fn apply_fraclap(u: &dyn RadialProfile, r0: f64, gamma_: f64, cfg: &QuadratureConfig) -> Result<f64> {
    evaluate(u, r0, gamma_, Weighting::Linear, cfg)
}

/// Maximal operator `∫(Λδ⁺ − λδ⁻) K dμ`.
pub fn pucci_plus(
    u: &dyn RadialProfile,
    r0: f64,
    gamma_: f64,
    bounds: EllipticityBounds,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    evaluate(u, r0, gamma_, Weighting::Plus(bounds), cfg)
}

/// Minimal operator `∫(λδ⁺ − Λδ⁻) K dμ`.
pub fn pucci_minus(
    u: &dyn RadialProfile,
    r0: f64,
    gamma_: f64,
    bounds: EllipticityBounds,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    evaluate(u, r0, gamma_, Weighting::Minus(bounds), cfg)
}

const STENCIL_STEP: f64 = 1e-3;

fn even(u: &dyn RadialProfile, r: f64) -> f64 {
    u.value(r.abs())
}

/// Radial Laplace–Beltrami operator `u'' + 2 coth(R0) u'` by central
/// differences, with `3u''(0)` at the centre.
pub fn radial_laplacian(u: &dyn RadialProfile, r0: f64) -> f64 {
    let h = STENCIL_STEP;
    let second = (even(u, r0 + h) + even(u, r0 - h) - 2.0 * u.value(r0)) / (h * h);
    if r0 < h {
        return 3.0 * second;
    }
    let first = (even(u, r0 + h) - even(u, r0 - h)) / (2.0 * h);
    second + 2.0 * first / r0.tanh()
}

/// Largest Hessian eigenvalue magnitude of a radial profile over the shell
/// `[max(0, R0 − R), R0 + R]`, from central differences on a grid.
pub fn hessian_sup(u: &dyn RadialProfile, r0: f64, radius: f64) -> f64 {
    const POINTS: usize = 801;
    let h = STENCIL_STEP;
    let lo = (r0 - radius).max(0.0);
    let hi = r0 + radius;
    (0..POINTS)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (POINTS - 1) as f64;
            let second = (even(u, s + h) + even(u, s - h) - 2.0 * u.value(s)) / (h * h);
            let tangential = if s < 10.0 * h {
                second
            } else {
                (even(u, s + h) - even(u, s - h)) / (2.0 * h) / s.tanh()
            };
            second.abs().max(tangential.abs())
        })
        .fold(0.0, f64::max)
}

fn sup_norm(u: &dyn RadialProfile, r0: f64) -> f64 {
    const POINTS: usize = 4001;
    let (end, far) = match u.far_field() {
        FarField::Constant { radius, value } => (radius, value.abs()),
        FarField::Decaying { limit } => (r0 + TAIL_START, limit.abs()),
        FarField::Unbounded => return f64::INFINITY,
    };
    (0..POINTS)
        .map(|i| u.value(end * i as f64 / (POINTS - 1) as f64).abs())
        .fold(far, f64::max)
}

/// `|Lu(x)|` against `sup|Hess u|/2 · I₀(R) + 2 sup|u| · I∞(R)/R²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellDefinedness {
    pub value: f64,
    pub hessian_sup: f64,
    pub sup_norm: f64,
    pub bound: f64,
}

impl WellDefinedness {
    pub fn holds(&self) -> bool {
        self.value.abs() <= self.bound
    }
}

pub fn well_definedness_check(
    u: &dyn RadialProfile,
    r0: f64,
    gamma_: f64,
    radius: f64,
    cfg: &QuadratureConfig,
) -> Result<WellDefinedness> {
    let value = apply_fraclap(u, r0, gamma_, cfg)?;
    let hess = hessian_sup(u, r0, radius);
    let sup = sup_norm(u, r0);
    let bound = 0.5 * hess * i0_closed(radius, gamma_)? + 2.0 * sup * iinf_closed(radius, gamma_)? / (radius * radius);
    Ok(WellDefinedness {
        value,
        hessian_sup: hess,
        sup_norm: sup,
        bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLimitRow {
    pub gamma: f64,
    pub value: f64,
    pub relative_error: f64,
}

/// Approach of `−(−Δ)^γ u` to the Laplace–Beltrami value as `γ → 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaLimitReport {
    pub laplacian: f64,
    pub rows: Vec<GammaLimitRow>,
}

impl GammaLimitReport {
    /// Errors decrease strictly along the supplied order of `γ`.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].relative_error < w[0].relative_error)
    }
}

pub fn gamma_limit(u: &dyn RadialProfile, r0: f64, gammas: &[f64], cfg: &QuadratureConfig) -> Result<GammaLimitReport> {
    let laplacian = radial_laplacian(u, r0);
    let rows = gammas
        .par_iter()
        .map(|&g| {
            let value = apply_fraclap(u, r0, g, cfg)?;
            Ok(GammaLimitRow {
                gamma: g,
                value,
                relative_error: ((value - laplacian) / laplacian).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaLimitReport { laplacian, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance, HyperPoint, ModelParams};
    use crate::operator::profile::{Profile, Scaled};
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::new(1e-9, 1e-12).unwrap()
    }

    #[test]
    fn constants_are_annihilated() {
        let c = Profile::paraboloid(2.5, 0.0).unwrap();
        let b = EllipticityBounds::new(0.5, 2.0).unwrap();
        for r0 in [0.0, 0.7] {
            assert_eq!(second_difference(&c, r0, 0.4, 0.3).unwrap(), 0.0);
            assert_eq!(apply_fraclap(&c, r0, 0.5, &cfg()).unwrap(), 0.0);
            assert_eq!(pucci_plus(&c, r0, 0.5, b, &cfg()).unwrap(), 0.0);
            assert_eq!(pucci_minus(&c, r0, 0.5, b, &cfg()).unwrap(), 0.0);
        }
    }

    #[test]
    fn second_difference_of_squared_distance_matches_explicit_points() {
        let m = ModelParams::with_tau(1.0).unwrap();
        let sq = Profile::paraboloid(0.0, -1.0).unwrap();
        let (r0, r, w1): (f64, f64, f64) = (0.8, 0.6, 0.35);
        let x = HyperPoint::at_distance(r0, &Vector3::x(), &m).unwrap();
        // unit tangent at x making angle arccos(ω₁) with the direction back to the origin
        let outward = nalgebra::Vector4::new(r0.sinh(), r0.cosh(), 0.0, 0.0);
        let across = nalgebra::Vector4::new(0.0, 0.0, 1.0, 0.0);
        let tangent = -outward * w1 + across * (1.0 - w1 * w1).sqrt();
        let p = crate::geometry::geodesic_point(&x, &tangent, r, &m);
        let q = crate::geometry::geodesic_point(&x, &tangent, -r, &m);
        let o = HyperPoint::origin(&m);
        let dp = distance(&p, &o, &m).unwrap();
        let dq = distance(&q, &o, &m).unwrap();
        let expected = 0.5 * (dp * dp + dq * dq - 2.0 * r0 * r0);
        let got = second_difference(&sq, r0, r, w1).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn second_difference_small_r_matches_taylor_limit() {
        // δ/r² → ½(u''ω₁² + u' coth R0 (1 − ω₁²)); at ω₁ = 0 only the
        // tangential term survives.
        let g = Profile::gaussian(1.0, 1.0).unwrap();
        let r0: f64 = 0.9;
        let du = -2.0 * r0 * (-r0 * r0).exp();
        let limit = 0.5 * du / r0.tanh();
        for r in [1e-4, 1e-7] {
            let ratio = second_difference(&g, r0, r, 0.0).unwrap() / (r * r);
            assert!((ratio - limit).abs() < 1e-6, "{r}: {ratio} vs {limit}");
        }
    }

    #[test]
    fn gaussian_approaches_laplace_beltrami_value() {
        let g = Profile::gaussian(1.0, 1.0).unwrap();
        assert!((radial_laplacian(&g, 0.0) + 6.0).abs() < 1e-5);
        let v = apply_fraclap(&g, 0.0, 0.995, &cfg()).unwrap();
        assert!((v + 6.0).abs() < 0.05 * 6.0, "{v}");
    }

    #[test]
    fn equal_bounds_collapse_the_extremal_operators() {
        let g = Profile::gaussian(1.0, 0.8).unwrap();
        let one = EllipticityBounds::new(1.0, 1.0).unwrap();
        let l = apply_fraclap(&g, 0.4, 0.6, &cfg()).unwrap();
        let p = pucci_plus(&g, 0.4, 0.6, one, &cfg()).unwrap();
        let m = pucci_minus(&g, 0.4, 0.6, one, &cfg()).unwrap();
        assert!((p - l).abs() <= 1e-7 * l.abs());
        assert!((m - l).abs() <= 1e-7 * l.abs());
    }

    #[test]
    fn kinked_profiles_are_rejected_only_at_the_kink() {
        let table = crate::operator::profile::CubicTable::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.4, 0.0]).unwrap();
        let p = Profile::Tabulated(table);
        assert!(matches!(apply_fraclap(&p, 1.0, 0.5, &cfg()), Err(Error::Domain { .. })));
        assert!(apply_fraclap(&p, 0.3, 0.5, &cfg()).is_ok());
        let unbounded = Profile::paraboloid(0.0, 1.0).unwrap();
        assert!(apply_fraclap(&unbounded, 0.3, 0.5, &cfg()).is_err());
    }

    #[test]
    fn well_definedness_bound_holds() {
        let g = Profile::gaussian(1.0, 1.0).unwrap();
        for (r0, gamma_, radius) in [(0.0, 0.5, 1.0), (0.7, 0.3, 0.5), (1.5, 0.9, 2.0)] {
            let w = well_definedness_check(&g, r0, gamma_, radius, &cfg()).unwrap();
            assert!(w.holds(), "{w:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn extremal_operators_are_ordered_and_dual(
            amplitude in -2.0f64..2.0,
            width in 0.4f64..2.0,
            r0 in 0.0f64..2.0,
            gamma_ in 0.2f64..0.9,
            lo in 0.3f64..1.0,
            spread in 1.0f64..3.0,
        ) {
            let u = Profile::gaussian(amplitude, width).unwrap();
            let b = EllipticityBounds::new(lo, lo * spread).unwrap();
            let c = cfg();
            let plus = pucci_plus(&u, r0, gamma_, b, &c).unwrap();
            let minus = pucci_minus(&u, r0, gamma_, b, &c).unwrap();
            let l = apply_fraclap(&u, r0, gamma_, &c).unwrap();
            let slack = 1e-7 * (plus.abs() + minus.abs());
            prop_assert!(minus <= plus + slack);
            for k in [b.lo(), b.hi(), 0.5 * (b.lo() + b.hi())] {
                prop_assert!(minus <= k * l + slack && k * l <= plus + slack);
            }
            let flipped = pucci_plus(&Scaled::negated(&u), r0, gamma_, b, &c).unwrap();
            prop_assert!((minus + flipped).abs() <= slack);
        }
    }
}
