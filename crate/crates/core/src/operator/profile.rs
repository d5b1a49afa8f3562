//! Radial functions `u(d)` of the distance to the origin.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Declared regularity of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    C0,
    /// Twice differentiable with `|u''| ≤ second_derivative_bound`.
    C2 { second_derivative_bound: f64 },
}

/// Behaviour of a profile far from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarField {
    /// `u(d) = value` exactly for `d ≥ radius`.
    Constant { radius: f64, value: f64 },
    /// `u(d) → limit` algebraically or faster.
    Decaying { limit: f64 },
    Unbounded,
}

/// A radial function evaluated by distance from the origin.
///
/// Implementors must be callable from several threads at once.
pub trait RadialProfile: Sync {
    fn value(&self, r: f64) -> f64;

    /// `u(from + step) − u(from)`. Override when the difference can be
    /// formed more accurately than by subtracting two values.
    fn increment(&self, from: f64, step: f64) -> f64 {
        self.value(from + step) - self.value(from)
    }

    fn far_field(&self) -> FarField;

    fn smoothness(&self) -> Smoothness;

    /// Whether the profile is C² in a neighbourhood of `r`.
    fn is_smooth_at(&self, r: f64) -> bool {
        let _ = r;
        matches!(self.smoothness(), Smoothness::C2 { .. })
    }

    /// Radii where some derivative of the profile jumps.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<T: RadialProfile + ?Sized> RadialProfile for &T {
    fn value(&self, r: f64) -> f64 {
        (**self).value(r)
    }
    fn increment(&self, from: f64, step: f64) -> f64 {
        (**self).increment(from, step)
    }
    fn far_field(&self) -> FarField {
        (**self).far_field()
    }
    fn smoothness(&self) -> Smoothness {
        (**self).smoothness()
    }
    fn is_smooth_at(&self, r: f64) -> bool {
        (**self).is_smooth_at(r)
    }
    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
}

/// `factor · u`.
#[derive(Debug, Clone)]
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P> Scaled<P> {
    pub fn negated(inner: P) -> Self {
        Self { inner, factor: -1.0 }
    }
}

impl<P: RadialProfile> RadialProfile for Scaled<P> {
    fn value(&self, r: f64) -> f64 {
        self.factor * self.inner.value(r)
    }
    fn increment(&self, from: f64, step: f64) -> f64 {
        self.factor * self.inner.increment(from, step)
    }
    fn far_field(&self) -> FarField {
        match self.inner.far_field() {
            FarField::Constant { radius, value } => FarField::Constant {
                radius,
                value: self.factor * value,
            },
            FarField::Decaying { limit } => FarField::Decaying {
                limit: self.factor * limit,
            },
            FarField::Unbounded => FarField::Unbounded,
        }
    }
    fn smoothness(&self) -> Smoothness {
        match self.inner.smoothness() {
            Smoothness::C2 { second_derivative_bound } => Smoothness::C2 {
                second_derivative_bound: self.factor.abs() * second_derivative_bound,
            },
            Smoothness::C0 => Smoothness::C0,
        }
    }
    fn is_smooth_at(&self, r: f64) -> bool {
        self.inner.is_smooth_at(r)
    }
    fn kinks(&self) -> Vec<f64> {
        self.inner.kinks()
    }
}

/// Clamped cubic spline through `(radius, value)` knots with zero slope at
/// both ends, continued by the last value.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicTable {
    radii: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicTable {
    /// Knots must start at radius 0 and increase strictly.
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = radii.len();
        if n < 3 || values.len() != n {
            return Err(Error::domain(
                "CubicTable",
                format!("need at least 3 knots with matching values, got {n} and {}", values.len()),
            ));
        }
        if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("CubicTable", "radii must start at 0 and increase strictly"));
        }
        if radii.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::domain("CubicTable", "non-finite knot"));
        }
        let second = clamped_second_derivatives(&radii, &values);
        Ok(Self { radii, values, second })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn end(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }
}

// Tridiagonal solve for the knot second derivatives with u'(ends) = 0.
fn clamped_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h[0];
    upper[0] = h[0];
    rhs[0] = 6.0 * slope[0];
    for i in 1..n - 1 {
        lower[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i];
        rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
    }
    lower[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = -6.0 * slope[n - 2];
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

impl RadialProfile for CubicTable {
    fn value(&self, r: f64) -> f64 {
        let x = &self.radii;
        if r >= self.end() {
            return self.values[x.len() - 1];
        }
        let r = r.max(0.0);
        let i = x.partition_point(|&k| k <= r).saturating_sub(1).min(x.len() - 2);
        let h = x[i + 1] - x[i];
        let a = (x[i + 1] - r) / h;
        let b = (r - x[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
    fn far_field(&self) -> FarField {
        FarField::Constant {
            radius: self.end(),
            value: self.values[self.values.len() - 1],
        }
    }
    fn smoothness(&self) -> Smoothness {
        let bound = self.second.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Smoothness::C2 {
            second_derivative_bound: bound,
        }
    }
    fn is_smooth_at(&self, r: f64) -> bool {
        // u'' jumps from its last knot value to zero at the end of the table.
        let end = self.end();
        self.second[self.second.len() - 1] == 0.0 || (r - end).abs() > 1e-9 * end
    }
    fn kinks(&self) -> Vec<f64> {
        vec![self.end()]
    }
}

/// The built-in radial families.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `amplitude · exp(−(r/width)²)`.
    GaussianBump { amplitude: f64, width: f64 },
    /// `amplitude · (1 − (r/radius)²)³` inside `radius`, zero outside.
    PolynomialBump { amplitude: f64, radius: f64 },
    /// `apex − opening · r²`.
    Paraboloid { apex: f64, opening: f64 },
    Tabulated(CubicTable),
}

// exp(−x²) is exactly zero in f64 beyond this x.
const GAUSSIAN_CUTOFF: f64 = 27.5;

impl Profile {
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        positive("gaussian", "width", width)?;
        finite("gaussian", "amplitude", amplitude)?;
        Ok(Profile::GaussianBump { amplitude, width })
    }

    pub fn polynomial(amplitude: f64, radius: f64) -> Result<Self> {
        positive("polynomial", "radius", radius)?;
        finite("polynomial", "amplitude", amplitude)?;
        Ok(Profile::PolynomialBump { amplitude, radius })
    }

    pub fn paraboloid(apex: f64, opening: f64) -> Result<Self> {
        finite("paraboloid", "apex", apex)?;
        finite("paraboloid", "opening", opening)?;
        Ok(Profile::Paraboloid { apex, opening })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::GaussianBump { .. } => "gaussian",
            Profile::PolynomialBump { .. } => "polynomial",
            Profile::Paraboloid { .. } => "paraboloid",
            Profile::Tabulated(_) => "tabulated",
        }
    }
}

fn positive(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {v} must be positive")))
    }
}

fn finite(op: &'static str, name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {v} must be finite")))
    }
}

impl RadialProfile for Profile {
    fn value(&self, r: f64) -> f64 {
        match self {
            Profile::GaussianBump { amplitude, width } => {
                let s = r / width;
                amplitude * (-s * s).exp()
            }
            Profile::PolynomialBump { amplitude, radius } => {
                let s = r / radius;
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - s * s).powi(3)
                }
            }
            Profile::Paraboloid { apex, opening } => apex - opening * r * r,
            Profile::Tabulated(table) => table.value(r),
        }
    }

    fn increment(&self, from: f64, step: f64) -> f64 {
        match self {
            Profile::GaussianBump { amplitude, width } => {
                let (a, t) = (from / width, step / width);
                amplitude * (-a * a).exp() * (-t * (2.0 * a + t)).exp_m1()
            }
            Profile::PolynomialBump { amplitude, radius } if from < *radius && from + step < *radius => {
                let (a, t) = (from / radius, step / radius);
                let (p, q) = (1.0 - a * a, 1.0 - (a + t) * (a + t));
                -amplitude * t * (2.0 * a + t) * (p * p + p * q + q * q)
            }
            Profile::Paraboloid { opening, .. } => -opening * step * (2.0 * from + step),
            _ => self.value(from + step) - self.value(from),
        }
    }

    fn far_field(&self) -> FarField {
        match self {
            Profile::GaussianBump { width, .. } => FarField::Constant {
                radius: GAUSSIAN_CUTOFF * width,
                value: 0.0,
            },
            Profile::PolynomialBump { radius, .. } => FarField::Constant {
                radius: *radius,
                value: 0.0,
            },
            Profile::Paraboloid { opening, apex } => {
                if *opening == 0.0 {
                    FarField::Constant { radius: 0.0, value: *apex }
                } else {
                    FarField::Unbounded
                }
            }
            Profile::Tabulated(table) => table.far_field(),
        }
    }

    fn smoothness(&self) -> Smoothness {
        let bound = match self {
            Profile::GaussianBump { amplitude, width } => 2.0 * amplitude.abs() / (width * width),
            Profile::PolynomialBump { amplitude, radius } => 6.0 * amplitude.abs() / (radius * radius),
            Profile::Paraboloid { opening, .. } => 2.0 * opening.abs(),
            Profile::Tabulated(table) => return table.smoothness(),
        };
        Smoothness::C2 {
            second_derivative_bound: bound,
        }
    }

    fn is_smooth_at(&self, r: f64) -> bool {
        match self {
            Profile::Tabulated(table) => table.is_smooth_at(r),
            _ => true,
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            Profile::PolynomialBump { radius, .. } => vec![*radius],
            Profile::Tabulated(table) => table.kinks(),
            _ => Vec::new(),
        }
    }
}

/// Parses `name` or `name:key=value,key=value`, for example
/// `gaussian:amplitude=2,width=0.5`. Tabulated profiles are built with
/// [`CubicTable::new`] instead.
impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p),
            None => (s.trim(), ""),
        };
        let mut pairs = Vec::new();
        for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::domain("Profile::from_str", format!("expected key=value, got {item:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::domain("Profile::from_str", format!("bad number in {item:?}")))?;
            pairs.push((k.trim().to_string(), v));
        }
        let mut take = |key: &str, default: f64| -> f64 {
            match pairs.iter().position(|(k, _)| k == key) {
                Some(i) => pairs.remove(i).1,
                None => default,
            }
        };
        let profile = match name {
            "gaussian" => {
                let (a, w) = (take("amplitude", 1.0), take("width", 1.0));
                Profile::gaussian(a, w)?
            }
            "polynomial" => {
                let (a, r) = (take("amplitude", 1.0), take("radius", 1.0));
                Profile::polynomial(a, r)?
            }
            "paraboloid" => {
                let (a, o) = (take("apex", 0.0), take("opening", 0.5));
                Profile::paraboloid(a, o)?
            }
            other => {
                return Err(Error::domain("Profile::from_str", format!("unknown profile {other:?}")));
            }
        };
        if let Some((k, _)) = pairs.first() {
            return Err(Error::domain("Profile::from_str", format!("unknown parameter {k:?} for {name}")));
        }
        Ok(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_names_and_parameters() {
        let p: Profile = "gaussian:amplitude=2,width=0.5".parse().unwrap();
        assert_eq!(p, Profile::GaussianBump { amplitude: 2.0, width: 0.5 });
        let q: Profile = "polynomial".parse().unwrap();
        assert_eq!(q, Profile::PolynomialBump { amplitude: 1.0, radius: 1.0 });
        assert!("gaussian:depth=1".parse::<Profile>().is_err());
        assert!("cone".parse::<Profile>().is_err());
        assert!("gaussian:width=-1".parse::<Profile>().is_err());
    }

    #[test]
    fn spline_interpolates_knots_and_reproduces_smooth_data() {
        let radii: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r).exp()).collect();
        let table = CubicTable::new(radii.clone(), values.clone()).unwrap();
        for (r, v) in radii.iter().zip(&values) {
            assert!((table.value(*r) - v).abs() < 1e-15);
        }
        for i in 0..400 {
            let r = 0.013 + i as f64 * 0.0247;
            assert!((table.value(r) - (-r * r).exp()).abs() < 2e-6, "r = {r}");
        }
        assert_eq!(table.value(50.0), values[200]);
    }

    #[test]
    fn spline_has_zero_end_slopes() {
        let table = CubicTable::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.5, 0.2, 0.0]).unwrap();
        let h = 1e-6;
        let left = (table.value(h) - table.value(0.0)) / h;
        let right = (table.value(3.0) - table.value(3.0 - h)) / h;
        assert!(left.abs() < 1e-5 && right.abs() < 1e-5);
        assert!(CubicTable::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(CubicTable::new(vec![0.1, 1.0, 2.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn scaled_negates_values_and_increments() {
        let g = Profile::gaussian(1.5, 0.7).unwrap();
        let n = Scaled::negated(&g);
        assert_eq!(n.value(0.3), -g.value(0.3));
        assert_eq!(n.increment(0.1, 0.8), -g.increment(0.1, 0.8));
    }

    fn second_difference_at(p: &Profile, r: f64, h: f64) -> f64 {
        // even extension below zero
        (p.value((r - h).abs()) + p.value(r + h) - 2.0 * p.value(r)) / (h * h)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn declared_second_derivative_bounds_hold(
            amplitude in -3.0f64..3.0,
            scale in 0.3f64..3.0,
            r in 0.0f64..6.0,
            family in 0usize..3,
        ) {
            let p = match family {
                0 => Profile::gaussian(amplitude, scale).unwrap(),
                1 => Profile::polynomial(amplitude, scale).unwrap(),
                _ => Profile::paraboloid(amplitude, scale).unwrap(),
            };
            let Smoothness::C2 { second_derivative_bound } = p.smoothness() else {
                panic!("built-in families are C2");
            };
            let d2 = second_difference_at(&p, r, 1e-4);
            prop_assert!(d2.abs() <= second_derivative_bound * (1.0 + 1e-4) + 1e-6);
        }
    }
}
