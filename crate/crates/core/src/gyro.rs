//! Möbius gyrogroup on the ball of radius `t` and the plane-wave
//! identities built on it.
//!
//! Gyrations are evaluated as explicit rotations in real 3-vectors; the
//! composition `⊖(x⊕y) ⊕ (x⊕(y⊕z))` is kept as an independent check.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{BallPoint, ModelParams};
use crate::numerics::{gauss_legendre, CompensatedSum, QuadratureConfig};

const DIM: i32 = 3;

/// A point of the ball of radius `t`, carrying its radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GyroElement {
    y: Vector3<f64>,
    t: f64,
}

impl GyroElement {
    pub fn new(y: Vector3<f64>, t: f64) -> Result<Self> {
        if !(t > 0.0) || !(y.norm() < t) {
            return Err(Error::domain(
                "GyroElement",
                format!("|y| = {} must be below t = {t}", y.norm()),
            ));
        }
        Ok(Self { y, t })
    }

    pub fn zero(t: f64) -> Self {
        Self {
            y: Vector3::zeros(),
            t,
        }
    }

    pub fn from_ball(p: &BallPoint, m: &ModelParams) -> Self {
        Self {
            y: *p.coords(),
            t: m.t(),
        }
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.y
    }

    pub fn radius(&self) -> f64 {
        self.t
    }

    /// The gyrogroup inverse `⊖x = −x`.
    pub fn neg(&self) -> Self {
        Self { y: -self.y, t: self.t }
    }

    fn same_ball(&self, other: &Self) -> Result<()> {
        if self.t == other.t {
            Ok(())
        } else {
            Err(Error::RadiusMismatch {
                left: self.t,
                right: other.t,
            })
        }
    }

    fn wrap(&self, y: Vector3<f64>) -> Self {
        Self { y, t: self.t }
    }
}

/// `x ⊕ y`.
pub fn mobius_add(x: &GyroElement, y: &GyroElement) -> Result<GyroElement> {
    x.same_ball(y)?;
    let t2 = x.t * x.t;
    let xy = x.y.dot(&y.y);
    let x2 = x.y.norm_squared();
    let y2 = y.y.norm_squared();
    let num = x.y * (1.0 + 2.0 * xy / t2 + y2 / t2) + y.y * (1.0 - x2 / t2);
    let den = 1.0 + 2.0 * xy / t2 + x2 * y2 / (t2 * t2);
    Ok(x.wrap(num / den))
}

/// `x ⊖ y = x ⊕ (−y)`.
pub fn mobius_sub(x: &GyroElement, y: &GyroElement) -> Result<GyroElement> {
    mobius_add(x, &y.neg())
}

/// `gyr[x,y]z` as a rotation of `z` in the plane of `x` and `y`.
pub fn gyration(x: &GyroElement, y: &GyroElement, z: &GyroElement) -> Result<GyroElement> {
    x.same_ball(y)?;
    x.same_ball(z)?;
    let t2 = x.t * x.t;
    let t4 = t2 * t2;
    let (u, v, w) = (&x.y, &y.y, &z.y);
    let (uv, uw, vw) = (u.dot(v), u.dot(w), v.dot(w));
    let (u2, v2) = (u.norm_squared(), v.norm_squared());
    let a = -uw * v2 / t4 + vw / t2 + 2.0 * uv * vw / t4;
    let b = -vw * u2 / t4 - uw / t2;
    let d = 1.0 + 2.0 * uv / t2 + u2 * v2 / t4;
    Ok(z.wrap(w + (u * a + v * b) * (2.0 / d)))
}

/// `gyr[x,y]z = ⊖(x⊕y) ⊕ (x⊕(y⊕z))`.
pub fn gyration_composed(x: &GyroElement, y: &GyroElement, z: &GyroElement) -> Result<GyroElement> {
    let xy = mobius_add(x, y)?;
    let inner = mobius_add(x, &mobius_add(y, z)?)?;
    mobius_add(&xy.neg(), &inner)
}

/// `x ⊞ y = x ⊕ gyr[x,⊖y]y`.
pub fn coadd(x: &GyroElement, y: &GyroElement) -> Result<GyroElement> {
    mobius_add(x, &gyration(x, &y.neg(), y)?)
}

/// `z ⊟ y` in closed form.
pub fn cosub(z: &GyroElement, y: &GyroElement) -> Result<GyroElement> {
    z.same_ball(y)?;
    let t2 = z.t * z.t;
    let z2 = z.y.norm_squared();
    let y2 = y.y.norm_squared();
    let a = 1.0 - z2 * y2 / (t2 * t2);
    Ok(z.wrap((z.y * (1.0 - y2 / t2) - y.y * (1.0 - z2 / t2)) / a))
}

/// `z ⊟ y = z ⊖ gyr[z,y]y`, evaluated from the gyrogroup operations.
pub fn cosub_composed(z: &GyroElement, y: &GyroElement) -> Result<GyroElement> {
    mobius_sub(z, &gyration(z, y, y)?)
}

/// Residuals of the two cancellation laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cancellation {
    /// `|a ⊕ (⊖a ⊕ b) − b| / t`
    pub left: f64,
    /// `|(b ⊟ a) ⊕ a − b| / t`
    pub right: f64,
}

impl Cancellation {
    pub fn holds(&self, tol: f64) -> bool {
        self.left <= tol && self.right <= tol
    }
}

pub fn cancellation_residuals(a: &GyroElement, b: &GyroElement) -> Result<Cancellation> {
    let left = mobius_add(a, &mobius_add(&a.neg(), b)?)?;
    let right = mobius_add(&cosub(b, a)?, a)?;
    Ok(Cancellation {
        left: (left.y - b.y).norm() / a.t,
        right: (right.y - b.y).norm() / a.t,
    })
}

/// Both cancellation laws at `1e-12`, or `1e-9` when either point lies
/// beyond `0.95 t`.
pub fn cancellation_check(a: &GyroElement, b: &GyroElement) -> bool {
    let tol = if a.y.norm().max(b.y.norm()) > 0.95 * a.t {
        1e-9
    } else {
        1e-12
    };
    cancellation_residuals(a, b).is_ok_and(|c| c.holds(tol))
}

/// `|1 + z̄y/t²|²` written with real inner products.
pub fn clifford_modulus_sq(z: &GyroElement, y: &GyroElement) -> f64 {
    let t2 = z.t * z.t;
    let zy = z.y.dot(&y.y);
    let cross = (z.y.norm_squared() * y.y.norm_squared() - zy * zy).max(0.0);
    (1.0 + zy / t2).powi(2) + cross / (t2 * t2)
}

fn product_gap(z: &GyroElement, y: &GyroElement) -> f64 {
    let t2 = z.t * z.t;
    1.0 - z.y.norm_squared() * y.y.norm_squared() / (t2 * t2)
}

/// Determinant of `∂(z ⊟ y)/∂z`.
pub fn boxminus_jacobian(z: &GyroElement, y: &GyroElement) -> Result<f64> {
    z.same_ball(y)?;
    let gap = product_gap(z, y);
    let y_gap = 1.0 - y.y.norm_squared() / (z.t * z.t);
    Ok(gap.powi(-(DIM + 1)) * y_gap.powi(DIM) * clifford_modulus_sq(z, y))
}

/// Central-difference Jacobian matrix of `z ↦ z ⊟ y`.
pub fn finite_difference_jacobian(z: &GyroElement, y: &GyroElement, step: f64) -> Result<Matrix3<f64>> {
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let mut plus = z.y;
        let mut minus = z.y;
        plus[j] += step;
        minus[j] -= step;
        let fp = cosub(&GyroElement::new(plus, z.t)?, y)?;
        let fm = cosub(&GyroElement::new(minus, z.t)?, y)?;
        jac.set_column(j, &((fp.y - fm.y) / (2.0 * step)));
    }
    Ok(jac)
}

/// Density of the hyperbolic measure under `z ↦ z ⊟ y`.
pub fn measure_factor(z: &GyroElement, y: &GyroElement) -> Result<f64> {
    z.same_ball(y)?;
    Ok((product_gap(z, y) / clifford_modulus_sq(z, y)).powi(DIM - 1))
}

/// Spectral parameter and boundary direction of a plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenParams {
    lambda: f64,
    xi: Vector3<f64>,
    t: f64,
}

impl EigenParams {
    pub fn new(lambda: f64, xi: Vector3<f64>, t: f64) -> Result<Self> {
        if !lambda.is_finite() || !(t > 0.0) || (xi.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::domain(
                "EigenParams",
                format!("lambda = {lambda}, |xi| = {}, t = {t}", xi.norm()),
            ));
        }
        Ok(Self { lambda, xi, t })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn xi(&self) -> &Vector3<f64> {
        &self.xi
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }
}

/// `base^{(re + i·im)}` for a positive real base.
fn positive_power(base: f64, re: f64, im: f64, op: &'static str) -> Result<Complex64> {
    if !(base > 0.0) || !base.is_finite() {
        return Err(Error::domain(op, format!("power base {base} is not a positive real")));
    }
    let log = base.ln();
    Ok(Complex64::from_polar((re * log).exp(), im * log))
}

/// `e_{λ,ξ;t}(y) = ((t² − |y|²)/|tξ − y|²)^{(2 + iλt)/2}`.
pub fn eigenfunction(ep: &EigenParams, y: &GyroElement) -> Result<Complex64> {
    if y.t != ep.t {
        return Err(Error::RadiusMismatch { left: ep.t, right: y.t });
    }
    let base = (ep.t * ep.t - y.y.norm_squared()) / (ep.xi * ep.t - y.y).norm_squared();
    positive_power(base, 0.5 * (DIM - 1) as f64, 0.5 * ep.lambda * ep.t, "eigenfunction")
}

/// The ratio `e_{−λ,ξ;t}(z ⊟ y) / e_{−λ,ξ;t}(z)` in closed form.
pub fn transport_factor(ep: &EigenParams, y: &GyroElement, z: &GyroElement) -> Result<Complex64> {
    z.same_ball(y)?;
    let t = ep.t;
    let t2 = t * t;
    let y_gap = 1.0 - y.y.norm_squared() / t2;
    let z_gap = 1.0 - z.y.norm_squared() / t2;
    let num = (ep.xi - z.y / t).norm_squared() * y_gap * clifford_modulus_sq(z, y);
    let den = (ep.xi * product_gap(z, y) - z.y * (y_gap / t) + y.y * (z_gap / t)).norm_squared();
    positive_power(num / den, 0.5 * (DIM - 1) as f64, -0.5 * ep.lambda * t, "transport_factor")
}

/// `E(λ, ξ, y, z)`: transport factor times measure factor.
pub fn e_factor(ep: &EigenParams, y: &GyroElement, z: &GyroElement) -> Result<Complex64> {
    Ok(transport_factor(ep, y, z)? * measure_factor(z, y)?)
}

/// Closed form `(4π/(λt))(t/r − r/t) sin(λ d)` of the spherical integral of
/// `E`, where `d = (t/2) log((t+r)/(t−r))`.
pub fn sphere_integral_closed_form(lambda: f64, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0 && r < t) {
        return Err(Error::domain("sphere_integral_closed_form", format!("r = {r}, t = {t}")));
    }
    let d = 0.5 * t * (2.0 * r / (t - r)).ln_1p();
    let x = lambda * d;
    let sinc = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Ok(4.0 * PI / t * (t / r - r / t) * d * sinc)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ`, trapezoid
/// in the azimuth.
fn sphere_rule(polar: usize) -> Vec<(Vector3<f64>, f64)> {
    let (nodes, weights) = gauss_legendre(polar);
    let azimuth = 2 * polar;
    let dphi = 2.0 * PI / azimuth as f64;
    let mut rule = Vec::with_capacity(polar * azimuth);
    for (c, w) in nodes.iter().zip(&weights) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for k in 0..azimuth {
            let phi = (k as f64 + 0.5) * dphi;
            rule.push((Vector3::new(s * phi.cos(), s * phi.sin(), *c), w * dphi));
        }
    }
    rule
}

/// `∫_{S²} f(ω) dω`, refining until two successive rules agree to `cfg`.
pub fn sphere_integral<F>(mut f: F, cfg: &QuadratureConfig) -> Result<Complex64>
where
    F: FnMut(&Vector3<f64>) -> Result<Complex64>,
{
    let mut prev: Option<Complex64> = None;
    let mut polar = 16;
    while polar <= 512 {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        for (omega, w) in sphere_rule(polar) {
            let v = f(&omega)? * w;
            re.add(v.re);
            im.add(v.im);
        }
        let value = Complex64::new(re.value(), im.value());
        if let Some(p) = prev {
            let change = (value - p).norm();
            if change <= cfg.abs_tol.max(cfg.rel_tol * value.norm()) {
                return Ok(value);
            }
        }
        prev = Some(value);
        polar *= 2;
    }
    let value = prev.unwrap_or_default();
    Err(Error::NonConvergence {
        op: "sphere_integral",
        estimate: value.norm(),
        error: f64::NAN,
    })
}

/// `∫_{S²} E(λ, ξ, rω, z) dω`.
pub fn sphere_integral_e(ep: &EigenParams, r: f64, z: &GyroElement, cfg: &QuadratureConfig) -> Result<Complex64> {
    if !(r > 0.0 && r < ep.t) {
        return Err(Error::domain("sphere_integral_e", format!("r = {r}, t = {}", ep.t)));
    }
    sphere_integral(
        |omega| e_factor(ep, &GyroElement::new(omega * r, ep.t)?, z),
        cfg,
    )
}

/// A uniformly random point of the ball `|y| < fraction · t`.
pub fn random_element<R: Rng>(rng: &mut R, t: f64, fraction: f64) -> GyroElement {
    let dir = random_unit(rng);
    let radius = fraction * t * rng.random::<f64>().cbrt();
    GyroElement { y: dir * radius, t }
}

/// A point at exactly `fraction · t` from the centre.
pub fn random_shell_element<R: Rng>(rng: &mut R, t: f64, fraction: f64) -> GyroElement {
    GyroElement {
        y: random_unit(rng) * (fraction * t),
        t,
    }
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A random element of O(3).
pub fn random_orthogonal<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let axis = Unit::new_normalize(random_unit(rng));
    let rot = Rotation3::from_axis_angle(&axis, rng.random_range(0.0..2.0 * PI)).into_inner();
    if rng.random::<bool>() {
        -rot
    } else {
        rot
    }
}

/// Worst residual of one gyrogroup identity over a random suite.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub region: Region,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

/// Where the random points of a suite case were drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    NearBoundary,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Interior => "interior",
            Region::NearBoundary => "near_boundary",
        }
    }
}

/// Parameters of [`gyro_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    pub t: f64,
    pub interior_fraction: f64,
    pub boundary_fraction: f64,
    pub interior_tol: f64,
    pub boundary_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            cases: 1000,
            t: 2.0,
            interior_fraction: 0.9,
            boundary_fraction: 0.99,
            interior_tol: 1e-10,
            boundary_tol: 1e-9,
        }
    }
}

fn residual(a: &GyroElement, b: &GyroElement) -> f64 {
    (a.y - b.y).norm() / a.t
}

type Identity = fn(&[GyroElement; 3], f64) -> Result<f64>;

fn identities() -> Vec<(&'static str, Identity)> {
    vec![
        ("left_identity", |[x, _, _], _| {
            Ok(residual(&mobius_add(&GyroElement::zero(x.t), x)?, x))
        }),
        ("left_inverse", |[x, _, _], _| {
            Ok(mobius_add(&x.neg(), x)?.y.norm() / x.t)
        }),
        ("gyroassociativity", |[x, y, z], _| {
            let lhs = mobius_add(x, &mobius_add(y, z)?)?;
            let rhs = mobius_add(&mobius_add(x, y)?, &gyration(x, y, z)?)?;
            Ok(residual(&lhs, &rhs))
        }),
        ("left_loop", |[x, y, z], _| {
            let lhs = gyration(x, y, z)?;
            let rhs = gyration(&mobius_add(x, y)?, y, z)?;
            Ok(residual(&lhs, &rhs))
        }),
        ("gyrocommutativity", |[x, y, _], _| {
            let lhs = mobius_add(x, y)?;
            let rhs = gyration(x, y, &mobius_add(y, x)?)?;
            Ok(residual(&lhs, &rhs))
        }),
        ("gyration_isometry", |[x, y, z], _| {
            Ok((gyration(x, y, z)?.y.norm() - z.y.norm()).abs() / x.t)
        }),
        ("left_cancellation", |[a, b, _], _| Ok(cancellation_residuals(a, b)?.left)),
        ("right_cancellation", |[a, b, _], _| Ok(cancellation_residuals(a, b)?.right)),
        ("cosub_closed_form", |[z, y, _], _| {
            Ok(residual(&cosub(z, y)?, &cosub_composed(z, y)?))
        }),
        ("transport_identity", |[z, y, xi], lambda| {
            let ep = EigenParams::new(lambda, xi.y.normalize(), z.t)?;
            let back = ep.with_lambda(-lambda);
            let lhs = eigenfunction(&back, &cosub(z, y)?)?;
            let rhs = transport_factor(&ep, y, z)? * eigenfunction(&back, z)?;
            Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
        }),
    ]
}

/// Seeded random verification of the gyrogroup axioms, both cancellation
/// laws, the closed form of `⊟` and the plane-wave transport identity.
///
/// Half the cases draw points inside `interior_fraction · t`; the other
/// half put at least one point on the sphere of radius
/// `boundary_fraction · t` and use the wider tolerance.
pub fn gyro_suite(cfg: &SuiteConfig) -> Result<Vec<PropertyResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids = identities();
    let mut interior: Vec<PropertyResult> = ids
        .iter()
        .map(|(name, _)| PropertyResult {
            name,
            region: Region::Interior,
            cases: 0,
            max_residual: 0.0,
            tolerance: cfg.interior_tol,
        })
        .collect();
    let mut boundary = interior.clone();
    for r in &mut boundary {
        r.tolerance = cfg.boundary_tol;
        r.region = Region::NearBoundary;
    }
    for case in 0..cfg.cases {
        let near = case % 2 == 1;
        let mut draw = |k: usize| {
            if near && k == case % 3 {
                random_shell_element(&mut rng, cfg.t, cfg.boundary_fraction)
            } else if near {
                random_element(&mut rng, cfg.t, cfg.boundary_fraction)
            } else {
                random_element(&mut rng, cfg.t, cfg.interior_fraction)
            }
        };
        let triple = [draw(0), draw(1), draw(2)];
        let lambda = rng.random_range(-4.0..4.0);
        let target = if near { &mut boundary } else { &mut interior };
        for ((_, check), out) in ids.iter().zip(target.iter_mut()) {
            let res = check(&triple, lambda)?;
            out.cases += 1;
            out.max_residual = out.max_residual.max(if res.is_nan() { f64::INFINITY } else { res });
        }
    }
    Ok(interior
        .into_iter()
        .zip(boundary)
        .flat_map(|(a, b)| [a, b])
        .collect())
}
