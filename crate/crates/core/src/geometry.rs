//! Hyperboloid and Poincaré-ball models of three-dimensional hyperbolic
//! space, distances, volumes and the dyadic-ring radii.
//!
//! Unless stated otherwise the curvature is `-1` (`τ = 1`, ball radius
//! `t = 2`, metric coefficient `b = 2`).

use nalgebra::{Vector3, Vector4};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{bisect, integrate, QuadratureConfig};

/// Slack below 1 tolerated in `[p, q]/τ²` before a distance is refused.
const ACOSH_SLACK: f64 = 1e-12;

/// Curvature and ball parameters; curvature is `-1/τ²` and `b/t = τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    tau: f64,
    t: f64,
    b: f64,
}

impl ModelParams {
    pub fn new(tau: f64, t: f64, b: f64) -> Result<Self> {
        let positive = tau > 0.0 && t > 0.0 && b > 0.0 && tau.is_finite() && t.is_finite() && b.is_finite();
        if !positive || ((b / t - tau) / tau).abs() > 1e-12 {
            return Err(Error::domain(
                "ModelParams",
                format!("tau = {tau}, t = {t}, b = {b}; need b/t = tau > 0"),
            ));
        }
        Ok(Self { tau, t, b })
    }

    /// The standard regime `t = 2τ`, `b = t²/2`.
    pub fn with_tau(tau: f64) -> Result<Self> {
        Self::new(tau, 2.0 * tau, 2.0 * tau * tau)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            t: 2.0,
            b: 2.0,
        }
    }
}

/// Lorentzian product `x₀y₀ − x₁y₁ − x₂y₂ − x₃y₃`.
pub fn minkowski(p: &Vector4<f64>, q: &Vector4<f64>) -> f64 {
    p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
}

/// A point on the upper sheet `x₀² − |x'|² = τ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperPoint(Vector4<f64>);

impl HyperPoint {
    pub fn new(coords: [f64; 4], m: &ModelParams) -> Result<Self> {
        let v = Vector4::from(coords);
        let tau2 = m.tau * m.tau;
        let norm = minkowski(&v, &v);
        let scale = v[0] * v[0] + tau2;
        if !(v[0] > 0.0) || (norm - tau2).abs() > 1e-12 * scale {
            return Err(Error::domain(
                "HyperPoint",
                format!("{coords:?} is not on the hyperboloid of radius {}", m.tau),
            ));
        }
        Ok(Self(v))
    }

    pub fn origin(m: &ModelParams) -> Self {
        Self(Vector4::new(m.tau, 0.0, 0.0, 0.0))
    }

    /// The point at distance `rho` from the origin in direction `dir`.
    pub fn at_distance(rho: f64, dir: &Vector3<f64>, m: &ModelParams) -> Result<Self> {
        let n = dir.norm();
        if !(rho >= 0.0) || !(n > 0.0) {
            return Err(Error::domain("HyperPoint::at_distance", format!("rho = {rho}")));
        }
        let s = rho / m.tau;
        let w = dir * (m.tau * s.sinh() / n);
        Ok(Self(Vector4::new(m.tau * s.cosh(), w[0], w[1], w[2])))
    }

    pub fn coords(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn spatial(&self) -> Vector3<f64> {
        Vector3::new(self.0[1], self.0[2], self.0[3])
    }
}

/// A point of the open ball of radius `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPoint(Vector3<f64>);

impl BallPoint {
    pub fn new(y: Vector3<f64>, m: &ModelParams) -> Result<Self> {
        if !(y.norm() < m.t) {
            return Err(Error::domain(
                "BallPoint",
                format!("|y| = {} is not below t = {}", y.norm(), m.t),
            ));
        }
        Ok(Self(y))
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// Isometry from the hyperboloid onto the ball.
pub fn to_ball(p: &HyperPoint, m: &ModelParams) -> BallPoint {
    let x = p.coords();
    BallPoint(p.spatial() * (m.t / (m.tau + x[0])))
}

/// Inverse isometry from the ball onto the hyperboloid.
pub fn from_ball(y: &BallPoint, m: &ModelParams) -> Result<HyperPoint> {
    let y = y.coords();
    let r2 = y.norm_squared();
    let t2 = m.t * m.t;
    if !(r2 < t2) {
        return Err(Error::domain("from_ball", format!("|y| = {} ≥ t", r2.sqrt())));
    }
    let denom = t2 - r2;
    let w = y * (2.0 * m.tau * m.t / denom);
    Ok(HyperPoint(Vector4::new(m.tau * (t2 + r2) / denom, w[0], w[1], w[2])))
}

/// Geodesic distance `τ·arccosh([p,q]/τ²)`.
///
/// Evaluated as `2τ·asinh(‖p − q‖/(2τ))` with the Lorentzian length of the
/// chord, which is exact to rounding for nearby points.
pub fn distance(p: &HyperPoint, q: &HyperPoint, m: &ModelParams) -> Result<f64> {
    let tau2 = m.tau * m.tau;
    let ratio = minkowski(p.coords(), q.coords()) / tau2;
    if ratio < 1.0 - ACOSH_SLACK * ratio.abs().max(1.0) {
        return Err(Error::domain(
            "distance",
            format!("[p,q]/τ² = {ratio} is below 1"),
        ));
    }
    let diff = p.coords() - q.coords();
    let chord2 = (-minkowski(&diff, &diff)).max(0.0);
    Ok(2.0 * m.tau * (chord2.sqrt() / (2.0 * m.tau)).asinh())
}

/// `d(0, y) = τ·log((t+|y|)/(t−|y|))` in the ball.
pub fn ball_distance_to_origin(y: &BallPoint, m: &ModelParams) -> f64 {
    let r = y.coords().norm();
    m.tau * (2.0 * r / (m.t - r)).ln_1p()
}

/// Unit tangent vector at `p` obtained by projecting the spatial direction
/// `w` onto the tangent space.
pub fn unit_tangent(p: &HyperPoint, w: &Vector3<f64>, m: &ModelParams) -> Result<Vector4<f64>> {
    let x = p.coords();
    let lifted = Vector4::new(0.0, w[0], w[1], w[2]);
    let v = lifted - x * (minkowski(x, &lifted) / (m.tau * m.tau));
    let len2 = -minkowski(&v, &v);
    if !(len2 > 0.0) {
        return Err(Error::domain("unit_tangent", "degenerate direction"));
    }
    Ok(v / len2.sqrt())
}

/// The point at arc length `s` along the geodesic leaving `p` with unit
/// tangent `v`.
pub fn geodesic_point(p: &HyperPoint, v: &Vector4<f64>, s: f64, m: &ModelParams) -> HyperPoint {
    let a = s / m.tau;
    HyperPoint(p.coords() * a.cosh() + v * (m.tau * a.sinh()))
}

fn acosh_from_parts(log_terms: &[(f64, f64)]) -> f64 {
    // log_terms are (coefficient ≥ 0, exponent); returns arccosh(Σ c e^x / 4).
    let top = log_terms
        .iter()
        .filter(|(c, _)| *c > 0.0)
        .map(|(_, e)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = log_terms
        .iter()
        .filter(|(c, _)| *c > 0.0)
        .map(|(c, e)| c * (e - top).exp())
        .sum();
    let log_y = top + s.ln() - 4f64.ln();
    log_y + (1.0 + (1.0 - (-2.0 * log_y).exp()).max(0.0).sqrt()).ln()
}

/// Distances from the origin of the two points at geodesic polar
/// coordinates `(r, ±ω)` around a point at distance `R0` from the origin,
/// where `omega1` is the cosine of the angle between `ω` and the direction
/// towards the origin.
///
/// Returns `(arccosh(A − B), arccosh(A + B))` with `A = cosh r cosh R0` and
/// `B = sinh r sinh R0 ω₁`.
pub fn law_of_cosines(r: f64, r0: f64, omega1: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) || !(r0 >= 0.0) || !(omega1.abs() <= 1.0 + ACOSH_SLACK) || !r.is_finite() || !r0.is_finite() {
        return Err(Error::domain(
            "law_of_cosines",
            format!("r = {r}, R0 = {r0}, omega1 = {omega1}"),
        ));
    }
    let w = omega1.clamp(-1.0, 1.0);
    if r + r0 <= 700.0 {
        let base = 2.0 * (0.5 * (r0 - r)).sinh().powi(2);
        let cross = r.sinh() * r0.sinh();
        let from_gap = |g: f64| {
            let excess = base + cross * g;
            2.0 * (0.5 * excess).sqrt().asinh()
        };
        return Ok((from_gap(1.0 - w), from_gap(1.0 + w)));
    }
    let far = |sign: f64| {
        let w = sign * w;
        acosh_from_parts(&[
            (1.0 - w, r + r0),
            (1.0 + w, r - r0),
            (1.0 + w, r0 - r),
            (1.0 - w, -r - r0),
        ])
    };
    Ok((far(1.0), far(-1.0)))
}

/// `|B_r| = π(sinh 2r − 2r)` (curvature −1).
pub fn ball_volume(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r < 0.5 {
        // (sinh 2r − 2r) = Σ_{k≥1} (2r)^{2k+1}/(2k+1)!
        let x = 2.0 * r;
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = term;
        let mut k = 1.0;
        while term > 1e-18 * sum {
            term *= x2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
        }
        return PI * sum;
    }
    PI * ((2.0 * r).sinh() - 2.0 * r)
}

/// `4π ∫₀^r sinh²s ds` by quadrature.
pub fn ball_volume_quadrature(r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let est = integrate(|s| s.sinh().powi(2), 0.0, r, &cfg.relative_only())?;
    Ok(4.0 * PI * est.value)
}

/// Sandwich `((R/r)³, D (R/r)^{log₂ D})` with `D = 8 cosh²(2R)` for the
/// volume ratio `|B_R|/|B_r|`.
pub fn doubling_bounds(r: f64, big_r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) || r > big_r {
        return Err(Error::domain("doubling_bounds", format!("r = {r}, R = {big_r}")));
    }
    let ratio = big_r / r;
    let d = 8.0 * (2.0 * big_r).cosh().powi(2);
    Ok((ratio.powi(3), d * ratio.powf(d.log2())))
}

/// `S(t) = sinh t / t`.
pub fn aux_s(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 + t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sinh() / t
    }
}

/// `H(t) = t coth t`.
pub fn aux_h(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        let t2 = t * t;
        1.0 + t2 / 3.0 - t2 * t2 / 45.0
    } else {
        t / t.tanh()
    }
}

/// `T(t) = t / arctanh(½ tanh t)`.
pub fn aux_t(t: f64) -> f64 {
    if t.abs() < 1e-5 {
        2.0 + 0.5 * t * t
    } else {
        t / tilde_radius(t)
    }
}

/// `arctanh(½ tanh r)`.
pub fn tilde_radius(r: f64) -> f64 {
    (0.5 * r.tanh()).atanh()
}

/// Radii whose balls shrink in volume by a factor eight at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicLadder {
    radii: Vec<f64>,
}

impl DyadicLadder {
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `|B_{r_k}| / |B_{r_{k-1}}|` for each step.
    pub fn volume_ratios(&self) -> Vec<f64> {
        self.radii
            .windows(2)
            .map(|w| ball_volume(w[1]) / ball_volume(w[0]))
            .collect()
    }
}

/// `r_0 > r_1 > … > r_K` with `|B_{r_k}| = |B_{r_{k-1}}|/8`.
pub fn dyadic_ladder(r0: f64, levels: usize) -> Result<DyadicLadder> {
    if !(r0 > 0.0) || !r0.is_finite() || levels == 0 {
        return Err(Error::domain("dyadic_ladder", format!("r0 = {r0}, K = {levels}")));
    }
    let mut radii = Vec::with_capacity(levels + 1);
    radii.push(r0);
    for _ in 0..levels {
        let prev = *radii.last().expect("ladder is never empty");
        let target = ball_volume(prev) / 8.0;
        let next = bisect(
            |x| Ok(ball_volume(x) / target - 1.0),
            0.5 * prev,
            prev,
            1e-15,
            "dyadic_ladder",
        )?;
        if next < 0.5 * prev {
            return Err(Error::NonConvergence {
                op: "dyadic_ladder",
                estimate: next,
                error: 0.5 * prev - next,
            });
        }
        radii.push(next);
    }
    Ok(DyadicLadder { radii })
}

/// Volume of the part of the ring `B_{r_out} \ B_{r_in}` inside the cone
/// `ω₁ > omega1_min`, computed in the unit ball model.
pub fn ring_sector_volume(r_in: f64, r_out: f64, omega1_min: f64) -> Result<f64> {
    if !(r_in > 0.0 && r_in < r_out) || !(-1.0..=1.0).contains(&omega1_min) {
        return Err(Error::domain(
            "ring_sector_volume",
            format!("r_in = {r_in}, r_out = {r_out}, omega1_min = {omega1_min}"),
        ));
    }
    let lo = (0.5 * r_in).tanh();
    let hi = (0.5 * r_out).tanh();
    let cfg = QuadratureConfig::default().relative_only().with_rel_tol(1e-13);
    let radial = integrate(|rho| (2.0 / (1.0 - rho * rho)).powi(3) * rho * rho, lo, hi, &cfg)?;
    Ok(2.0 * PI * (1.0 - omega1_min) * radial.value)
}
