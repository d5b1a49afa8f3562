//! Fractional and extremal operators on radial profiles, the barrier
//! check, the spectral oracle and the paraboloid envelope.

mod barrier;
mod envelope;
mod pointwise;
mod profile;
mod spectral;

pub use barrier::{
    alpha_sweep, arccos_inequalities, barrier_check, barrier_value, AlphaSweep, ArccosReport, BarrierReport,
    BarrierRow, BarrierSpec, NormalizedBarrier, ALPHA_CAP,
};
pub use envelope::{
    convexity_surrogate, envelope, fibonacci_directions, polar_grid, ConvexityReport, Envelope, PolarGrid,
};
pub use pointwise::{
    apply_fraclap, gamma_limit, hessian_sup, pucci_minus, pucci_plus, radial_laplacian, second_difference,
    well_definedness_check, EllipticityBounds, GammaLimitReport, GammaLimitRow, WellDefinedness,
};
pub use profile::{CubicTable, FarField, Profile, RadialProfile, Scaled, Smoothness};
pub use spectral::{multiplier_oracle, Plancherel, SpectralTransform, CALIBRATION_TOL};
