//! Curvature of torsionful connections on orthonormal frames.
//!
//! The crate builds frame fields and their structure functions on a chart,
//! assembles `∇ = ∇^LC + T` for parametric torsion families, computes Riemann,
//! sectional, biorthogonal and Ricci curvature with forward-mode automatic
//! differentiation, checks harmonicity of the torsion 3-form, and decides the
//! Einstein condition over the calibration parameters `(a, b)`.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

pub mod chart;
pub mod connection;
pub mod curvature;
pub mod dual;
pub mod einstein;
pub mod error;
pub mod exterior;
pub mod grid;
pub mod reference;
pub mod report;
pub mod scalar;
pub mod scenario;

pub use chart::{build_s2xt2, ChartPoint, FrameSpec, ScalarField, DIM};
pub use connection::{
    assemble, flat_3form, geometric_torsion, harmonic_torsion, levi_civita, metric_compatibility_residual,
    paper_torsion, zero_torsion, ConnectionCoeffs, Family, ParamCoeff, TorsionField,
};
pub use curvature::{
    biorthogonal, ricci_sectional_sum, ricci_trace, riemann, riemann_fd_oracle, sectional, RicciMatrix,
    RiemannAtPoint,
};
pub use einstein::{
    einstein_residual, fit_ricci_polynomials, solve_einstein, EinsteinVerdict, ParamPoly, RicciPolynomials,
};
pub use error::{GeometryError, Result};
pub use exterior::{check_harmonic, FrameForm, HarmonicityReport};
pub use grid::{AxisRange, GridSpec};
pub use scalar::{Coefficient, Scalar};

pub type Point = ChartPoint<f64>;
pub type Connection = ConnectionCoeffs<f64>;
pub type Riemann = RiemannAtPoint<f64>;
pub type Ricci = RicciMatrix<f64>;
pub type Poly = ParamPoly<f64>;
pub type Polys = RicciPolynomials<f64>;
pub type Verdict = EinsteinVerdict<f64>;
pub type Torsion = TorsionField<f64>;
/// Torsion with exact rational coefficients.
pub type ExactTorsion = TorsionField<num_rational::Rational64>;
