//! Envelope of touching paraboloids `c_y − d²(·, y)/(2R²)` below sampled
//! data on the hyperboloid, and the contact set where it meets the data.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{aux_h, distance, geodesic_point, unit_tangent, HyperPoint, ModelParams};

/// Points on geodesic spheres about the origin: the origin itself, then
/// `radial_steps` shells at equal radial spacing, each carrying the same
/// Fibonacci set of `directions` unit vectors.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub points: Vec<HyperPoint>,
    /// Radial distance between consecutive shells.
    pub spacing: f64,
}

pub fn fibonacci_directions(count: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

impl PolarGrid {
    /// Grid points within geodesic distance `radius` of the origin.
    pub fn within(&self, radius: f64, m: &ModelParams) -> Result<Vec<HyperPoint>> {
        let o = HyperPoint::origin(m);
        let mut out = Vec::new();
        for p in &self.points {
            if distance(p, &o, m)? <= radius * (1.0 + 1e-12) {
                out.push(*p);
            }
        }
        Ok(out)
    }
}

pub fn polar_grid(radius: f64, radial_steps: usize, directions: usize, m: &ModelParams) -> Result<PolarGrid> {
    if !(radius > 0.0) || !radius.is_finite() || radial_steps == 0 || directions == 0 {
        return Err(Error::domain(
            "polar_grid",
            format!("radius = {radius}, steps = {radial_steps}, directions = {directions}"),
        ));
    }
    let dirs = fibonacci_directions(directions);
    let spacing = radius / radial_steps as f64;
    let mut points = vec![HyperPoint::origin(m)];
    for k in 1..=radial_steps {
        let rho = spacing * k as f64;
        for d in &dirs {
            points.push(HyperPoint::at_distance(rho, d, m)?);
        }
    }
    Ok(PolarGrid { points, spacing })
}

/// The envelope evaluated on the sample grid.
#[derive(Debug, Clone)]
pub struct Envelope {
    vertices: Vec<HyperPoint>,
    heights: Vec<f64>,
    radius: f64,
    model: ModelParams,
    /// `Γ` at each sample.
    pub values: Vec<f64>,
    pub contact: Vec<bool>,
    /// Contact threshold on `u − Γ`.
    pub tolerance: f64,
}

impl Envelope {
    fn opening(&self) -> f64 {
        0.5 / (self.radius * self.radius)
    }

    pub fn vertices(&self) -> &[HyperPoint] {
        &self.vertices
    }

    /// Heights `c_y`, one per vertex.
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `P_y(p) = c_y − d²(p, y)/(2R²)` for vertex `index`.
    pub fn paraboloid(&self, index: usize, p: &HyperPoint) -> Result<f64> {
        let d = distance(p, &self.vertices[index], &self.model)?;
        Ok(self.heights[index] - self.opening() * d * d)
    }

    /// `Γ(p)` together with the index of a maximizing vertex.
    pub fn value_at(&self, p: &HyperPoint) -> Result<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, 0);
        for i in 0..self.vertices.len() {
            let v = self.paraboloid(i, p)?;
            if v > best.0 {
                best = (v, i);
            }
        }
        Ok(best)
    }

    pub fn contact_count(&self) -> usize {
        self.contact.iter().filter(|&&c| c).count()
    }
}

/// Brute-force envelope of `values` sampled at `samples`, with paraboloid
/// vertices at `vertices` and opening `1/(2R²)`.
///
/// `spacing` is the sample grid spacing; contact is declared when
/// `u − Γ ≤ 1e−8 + 2·spacing²`. `Γ ≤ u` holds exactly on the samples:
/// rounding-level excesses are clamped and anything larger is an error.
pub fn envelope(
    samples: &[HyperPoint],
    values: &[f64],
    vertices: &[HyperPoint],
    radius: f64,
    spacing: f64,
    m: &ModelParams,
) -> Result<Envelope> {
    if samples.is_empty() || vertices.is_empty() {
        return Err(Error::domain("envelope", "empty sample or vertex grid"));
    }
    if samples.len() != values.len() {
        return Err(Error::domain(
            "envelope",
            format!("{} samples but {} values", samples.len(), values.len()),
        ));
    }
    if !(radius > 0.0) || !(spacing >= 0.0) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("envelope", format!("R = {radius}, spacing = {spacing}")));
    }
    let opening = 0.5 / (radius * radius);
    let sq = |p: &HyperPoint, q: &HyperPoint| -> Result<f64> {
        let d = distance(p, q, m)?;
        Ok(opening * d * d)
    };

    let heights = vertices
        .par_iter()
        .map(|y| {
            samples
                .iter()
                .zip(values)
                .map(|(z, u)| Ok(u + sq(z, y)?))
                .try_fold(f64::INFINITY, |acc, v: Result<f64>| v.map(|v| acc.min(v)))
        })
        .collect::<Result<Vec<f64>>>()?;

    let gamma_values = samples
        .par_iter()
        .zip(values)
        .map(|(z, &u)| {
            let mut best = f64::NEG_INFINITY;
            let mut reach = 0.0f64;
            for (y, c) in vertices.iter().zip(&heights) {
                let d = sq(z, y)?;
                reach = reach.max(d);
                best = best.max(c - d);
            }
            if best > u {
                let rounding = 4.0 * f64::EPSILON * (u.abs() + reach);
                if best - u > rounding {
                    return Err(Error::NonConvergence {
                        op: "envelope",
                        estimate: best,
                        error: best - u,
                    });
                }
                best = u;
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;

    let tolerance = 1e-8 + 2.0 * spacing * spacing;
    let contact = values.iter().zip(&gamma_values).map(|(u, g)| u - g <= tolerance).collect();
    Ok(Envelope {
        vertices: vertices.to_vec(),
        heights,
        radius,
        model: *m,
        values: gamma_values,
        contact,
        tolerance,
    })
}

/// Worst case of the midpoint inequality
/// `(Γ−P_y)(z) ≤ ½[(Γ−P_y)(z₁) + (Γ−P_y)(z₂)] + (1/(2R²))·¼·H(d(y,z)+|ξ|)|ξ|²`
/// with `z₁,₂ = exp_z(±ξ/2)`, over all vertices `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub triples: usize,
    /// Smallest `right side − left side`; negative means a violation.
    pub worst_slack: f64,
}

impl ConvexityReport {
    pub fn holds(&self) -> bool {
        self.worst_slack >= 0.0
    }
}

/// Tests the midpoint inequality at every `stride`-th sample, along each of
/// `directions` Fibonacci directions, for each geodesic length in `lengths`.
pub fn convexity_surrogate(
    env: &Envelope,
    samples: &[HyperPoint],
    stride: usize,
    directions: usize,
    lengths: &[f64],
) -> Result<ConvexityReport> {
    if stride == 0 || directions == 0 || lengths.is_empty() {
        return Err(Error::domain("convexity_surrogate", "empty test set"));
    }
    let m = env.model;
    let dirs = fibonacci_directions(directions);
    let opening = env.opening();
    let centres: Vec<&HyperPoint> = samples.iter().step_by(stride).collect();
    let per_centre = centres
        .par_iter()
        .map(|z| {
            let mut worst = f64::INFINITY;
            let mut count = 0usize;
            for w in &dirs {
                let Ok(tangent) = unit_tangent(z, w, &m) else {
                    continue;
                };
                for &len in lengths {
                    let z1 = geodesic_point(z, &tangent, 0.5 * len, &m);
                    let z2 = geodesic_point(z, &tangent, -0.5 * len, &m);
                    let (g0, _) = env.value_at(z)?;
                    let (g1, _) = env.value_at(&z1)?;
                    let (g2, _) = env.value_at(&z2)?;
                    for i in 0..env.vertices.len() {
                        let dy = distance(z, &env.vertices[i], &m)?;
                        let lhs = g0 - env.paraboloid(i, z)?;
                        let avg = 0.5 * ((g1 - env.paraboloid(i, &z1)?) + (g2 - env.paraboloid(i, &z2)?));
                        let allowance = opening * 0.25 * aux_h(dy + len) * len * len;
                        let rounding = 64.0 * f64::EPSILON * (g0.abs() + g1.abs() + g2.abs() + env.heights[i].abs() + 1.0);
                        worst = worst.min(avg + allowance - lhs + rounding);
                        count += 1;
                    }
                }
            }
            Ok((worst, count))
        })
        .collect::<Result<Vec<(f64, usize)>>>()?;
    let worst_slack = per_centre.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let triples = per_centre.iter().map(|p| p.1).sum();
    Ok(ConvexityReport { triples, worst_slack })
}
