//! Differential geometry of curves in `R^n` through local covariance
//! analysis.
//!
//! The crate has three layers:
//!
//! * [`frenet`] — the classical side: Gram-Schmidt frames, Frenet-Serret
//!   curvatures `kappa_1..kappa_{n-1}`, the canonical constant-curvature
//!   curves built from circular pairs (plus an optional linear drift), and
//!   an RK4 integrator for `E' = E K` that generates curves with
//!   prescribed curvature functions.
//! * [`local_svd`] — the spectral side: covariance matrices of a curve
//!   segment over a shrinking window `[t - eps, t + eps]`, whose
//!   eigenvalues scale like `c_i eps^{2i}` and whose eigenvectors converge
//!   to the Frenet frame.  Curvatures are recovered from eigenvalue
//!   ratios; [`exact`] supplies an exact-arithmetic covariance path for
//!   polynomial curves where the graded spectrum outruns `f64`.
//! * [`hankel`] — the exact combinatorial layer: Hankel determinants of
//!   reciprocal-arithmetic moment sequences, their closed product form and
//!   block factorization, monic orthogonal polynomials, and the rational
//!   constants `a_j` that turn eigenvalue ratios into curvatures.
//!
//! [`validation`] bundles the end-to-end consistency checks that the CLI
//! exposes as `curvesvd validate`.

pub mod curve;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod frenet;
pub mod hankel;
pub mod local_svd;
pub mod quadrature;
pub mod ratpoly;
pub mod rational;
pub mod validation;


pub use curve::{builtin_curve, Curve, PolyCurve, ReparamCurve, SampledCurve};
pub use error::{Error, Result};
pub use frenet::{CanonicalCurveParams, FrenetApparatus};
pub use hankel::{HankelFamily, MomentSequence, OrthoPolySequence};
pub use local_svd::{
    covariance_mean_centered, covariance_on_curve, default_ladder, discrete_covariance,
    estimate_curvatures, estimate_curvatures_sampled, estimate_frame, fit_leading_coefficients,
    CovarianceMatrix, CurvatureEstimate, CurvatureReport, EstimateOptions, LocalSpectrum,
};

pub use rational::Rational;
pub use ratpoly::RatPoly;
pub use validation::{run_all, run_check, CheckOutcome, ValidationConfig};
