//! Local covariance spectra of curves and the curvature estimates they
//! carry.
//!
//! Over a shrinking window `[t - eps, t + eps]` the on-curve covariance
//!
//! ```text
//! C_eps(t) = (1/2eps) ∫ (gamma(s) - gamma(t)) (gamma(s) - gamma(t))^T ds
//! ```
//!
//! has eigenvalues `lambda_i = c_i eps^{2i} + O(eps^{2i+2})` and
//! eigenvectors converging to the Frenet frame.  The leading coefficients
//! obey `c_{j+1}/(c_1 c_j) = kappa_j^2 / a_j` with the universal rational
//! constants `a_j` from [`crate::hankel`], so curvatures fall out of
//! eigenvalue ratios in which every power of `eps` cancels.
//!
//! The float path here covers analytic and sampled curves; polynomial
//! curves are automatically routed through [`crate::exact`], which
//! evaluates the same covariance in rational arithmetic and keeps the
//! sharply graded spectrum (`lambda_n ~ eps^{2n}`) meaningful far past
//! `f64` resolution.

use nalgebra::{DMatrix, DVector};

use crate::curve::{Curve, PolyCurve, SampledCurve};
use crate::eigen::jacobi_eigen;
use crate::error::{Error, Result};
use crate::frenet::gram_schmidt_frame;
use crate::hankel::curvature_coefficient;
use crate::quadrature::GaussLegendre;
use crate::rational::{rational_from_f64, rational_to_f64};

/// Default Gauss-Legendre order per half-window.
pub const DEFAULT_QUAD_ORDER: usize = 24;

/// Relative eigenvalue resolution of the float eigen-solver.
const EIGEN_FLOOR: f64 = 1e-15;

/// Absolute underflow guard: eigenvalues at or below this are treated as
/// numerically zero regardless of scale.
const UNDERFLOW_FLOOR: f64 = 1e-300;

/// A windowed covariance matrix of a curve.
#[derive(Clone, Debug)]
pub struct CovarianceMatrix {
    /// Window center (NaN for derivative-built surrogates, which carry
    /// no parameter).
    pub t: f64,
    /// Window radius.
    pub eps: f64,
    pub entries: DMatrix<f64>,
    /// `true` for the mean-centered variant `C̄`, `false` for the
    /// on-curve form centered at `gamma(t)`.
    pub centered: bool,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Displacement oracle `d(u) ~ gamma(t+u) - gamma(t)` for quadrature.
///
/// For polynomial curves the displacement is re-expanded exactly around
/// `t` (rational Taylor shift) and evaluated by Horner in the small
/// variable `u`; this avoids the catastrophic cancellation of
/// `gamma(t+u) - gamma(t)` at large `t` and is what makes the float
/// covariance of e.g. the twisted cubic at `t = 3` accurate to the last
/// few ulps.
enum Displacement<'a> {
    Poly(Vec<Vec<f64>>),
    General(&'a dyn Curve, DVector<f64>),
}

impl Displacement<'_> {
    fn build(curve: &dyn Curve, t: f64) -> Result<Displacement<'_>> {
        if let Some(poly) = curve.as_polynomial() {
            Ok(Displacement::Poly(shifted_coeff_tables(poly, t)?))
        } else {
            Ok(Displacement::General(curve, curve.value(t)))
        }
    }

    fn eval(&self, t: f64, u: f64) -> DVector<f64> {
        match self {
            Displacement::Poly(tables) => {
                let mut out = DVector::zeros(tables.len());
                for (k, coeffs) in tables.iter().enumerate() {
                    let mut acc = 0.0;
                    for &c in coeffs.iter().rev() {
                        acc = acc * u + c;
                    }
                    out[k] = acc * u;
                }
                out
            }
            Displacement::General(curve, gt) => curve.value(t + u) - gt,
        }
    }
}

/// Per-coordinate coefficients of `p(t+u) - p(t)` in powers `u^1, u^2, ...`,
/// computed exactly and converted to `f64` at the end.
fn shifted_coeff_tables(poly: &PolyCurve, t: f64) -> Result<Vec<Vec<f64>>> {
    let t_exact = rational_from_f64(t)?;
    let m = poly.max_degree();
    let mut tables = Vec::with_capacity(poly.coords().len());
    for coord in 0..poly.coords().len() {
        let mut coeffs = Vec::with_capacity(m);
        let mut factorial = crate::rational::rat_int(1);
        for order in 1..=m {
            factorial *= crate::rational::rat_int(order as i64);
            let deriv = &poly.derivative_polys(order).expect("order <= max_degree")[coord];
            coeffs.push(rational_to_f64(&(deriv.eval(&t_exact) / &factorial)));
        }
        tables.push(coeffs);
    }
    Ok(tables)
}

fn check_window(curve: &dyn Curve, t: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "window needs finite t and eps > 0, got t = {t}, eps = {eps}"
        )));
    }
    let (lo, hi) = curve.domain();
    if t - eps < lo || t + eps > hi {
        return Err(Error::DomainError {
            lo: t - eps,
            hi: t + eps,
            domain_lo: lo,
            domain_hi: hi,
        });
    }
    Ok(())
}

/// Covariance of the displacement oracle over `[-eps, eps]`, one GL rule
/// per half-window, upper triangle mirrored for exact symmetry.
fn quadrature_covariance(
    n: usize,
    d: &Displacement<'_>,
    t: f64,
    eps: f64,
    quad_order: usize,
    mean: Option<&DVector<f64>>,
) -> DMatrix<f64> {
    let rule = GaussLegendre::cached(quad_order);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for (a, b) in [(-eps, 0.0), (0.0, eps)] {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            let mut v = d.eval(t, mid + half * x);
            if let Some(m) = mean {
                v -= m;
            }
            let scale = w * half;
            for i in 0..n {
                for j in i..n {
                    acc[(i, j)] += scale * v[i] * v[j];
                }
            }
        }
    }
    acc /= 2.0 * eps;
    for i in 0..n {
        for j in (i + 1)..n {
            acc[(j, i)] = acc[(i, j)];
        }
    }
    acc
}

/// The on-curve covariance `C_eps(t)`, centered at `gamma(t)`.
pub fn covariance_on_curve(
    curve: &dyn Curve,
    t: f64,
    eps: f64,
    quad_order: usize,
) -> Result<CovarianceMatrix> {
    check_window(curve, t, eps)?;
    let d = Displacement::build(curve, t)?;
    let entries = quadrature_covariance(curve.dim(), &d, t, eps, quad_order, None);
    Ok(CovarianceMatrix {
        t,
        eps,
        entries,
        centered: false,
    })
}

/// The mean-centered covariance `C̄_eps(t)`, centered at the window
/// average of `gamma`.
pub fn covariance_mean_centered(
    curve: &dyn Curve,
    t: f64,
    eps: f64,
    quad_order: usize,
) -> Result<CovarianceMatrix> {
    check_window(curve, t, eps)?;
    let n = curve.dim();
    let d = Displacement::build(curve, t)?;
    // Window average of the displacement = gamma-bar - gamma(t); reusing
    // the displacement oracle keeps the polynomial path cancellation-free.
    let rule = GaussLegendre::cached(quad_order);
    let mut mean = DVector::<f64>::zeros(n);
    for (a, b) in [(-eps, 0.0), (0.0, eps)] {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            mean.axpy(w * half, &d.eval(t, mid + half * x), 1.0);
        }
    }
    mean /= 2.0 * eps;
    let entries = quadrature_covariance(n, &d, t, eps, quad_order, Some(&mean));
    Ok(CovarianceMatrix {
        t,
        eps,
        entries,
        centered: true,
    })
}

/// The Taylor moment matrix: what the covariance looks like in the
/// basis of scaled derivatives.
#[derive(Clone, Debug)]
pub struct TaylorMomentMatrix {
    pub order: usize,
    pub eps: f64,
    /// `entries[(i-1, j-1)] = eps^{i+j} / (i! j! (i+j+1))` for `i+j`
    /// even, zero for `i+j` odd (1-based `i, j`).
    pub entries: DMatrix<f64>,
}

pub fn taylor_moment_matrix(order: usize, eps: f64) -> Result<TaylorMomentMatrix> {
    if order < 1 || !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParams(format!(
            "moment matrix needs order >= 1 and eps > 0, got ({order}, {eps})"
        )));
    }
    let mut factorials = vec![1.0f64; order + 1];
    for i in 1..=order {
        factorials[i] = factorials[i - 1] * i as f64;
    }
    let mut entries = DMatrix::zeros(order, order);
    for i in 1..=order {
        for j in 1..=order {
            if (i + j) % 2 == 0 {
                entries[(i - 1, j - 1)] =
                    eps.powi((i + j) as i32) / (factorials[i] * factorials[j] * (i + j + 1) as f64);
            }
        }
    }
    Ok(TaylorMomentMatrix {
        order,
        eps,
        entries,
    })
}

/// The Taylor-series covariance surrogate `Γ ℰ Γ^T` built from derivative
/// vectors `gamma^(1), ..., gamma^(m)` at a point.
///
/// Agreement with [`covariance_on_curve`] improves with the number of
/// derivatives supplied: the first neglected moment has order
/// `m + 2` (even), so pass `m = 2n - 1` derivatives to see the full
/// `O(eps^{2n+2})` agreement on an `n`-dimensional curve.
pub fn surrogate_covariance(derivatives: &[DVector<f64>], eps: f64) -> Result<CovarianceMatrix> {
    let m = derivatives.len();
    if m == 0 {
        return Err(Error::InvalidParams(
            "surrogate needs at least one derivative vector".into(),
        ));
    }
    let n = derivatives[0].len();
    if derivatives.iter().any(|d| d.len() != n) {
        return Err(Error::InvalidParams(
            "derivative vectors must share one dimension".into(),
        ));
    }
    let moments = taylor_moment_matrix(m, eps)?;
    let mut entries = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut sum = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let e = moments.entries[(i, j)];
                    if e != 0.0 {
                        sum += derivatives[i][a] * e * derivatives[j][b];
                    }
                }
            }
            entries[(a, b)] = sum;
            entries[(b, a)] = sum;
        }
    }
    Ok(CovarianceMatrix {
        t: f64::NAN,
        eps,
        entries,
        centered: false,
    })
}

/// Split a matrix with the alternating-parity zero pattern into its two
/// diagonal blocks.
///
/// Canonical curves at symmetric points produce covariances whose
/// `(i, j)` entry vanishes whenever `i + j` is odd; grouping first the
/// odd-numbered coordinates and then the even-numbered ones (an even
/// permutation) block-diagonalizes the matrix.  Returns
/// `(odd_block, even_block, permutation)` where `permutation` lists the
/// original (0-based) indices in their new order.
pub fn checkerboard_blocks(
    matrix: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<usize>)> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::InvalidParams(format!(
            "checkerboard split needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let bound = 1e-13 * matrix.norm();
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 1 && matrix[(i, j)].abs() > bound {
                return Err(Error::PatternViolation {
                    row: i,
                    col: j,
                    value: matrix[(i, j)],
                    bound,
                });
            }
        }
    }
    let odd_idx: Vec<usize> = (0..n).step_by(2).collect();
    let even_idx: Vec<usize> = (1..n).step_by(2).collect();
    let extract = |idx: &[usize]| {
        let mut block = DMatrix::zeros(idx.len(), idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                block[(r, c)] = matrix[(i, j)];
            }
        }
        block
    };
    let permutation = odd_idx.iter().chain(&even_idx).copied().collect();
    Ok((extract(&odd_idx), extract(&even_idx), permutation))
}

/// Eigenvalues and eigenvectors of the covariance at each rung of an
/// `eps` ladder, plus the fitted leading coefficients.
#[derive(Clone, Debug)]
pub struct LocalSpectrum {
    pub t: f64,
    /// Strictly decreasing window radii.
    pub eps_ladder: Vec<f64>,
    /// `eigenvalues[r][i]`: the `(i+1)`-th eigenvalue at rung `r`,
    /// sorted descending within each rung.
    pub eigenvalues: Vec<Vec<f64>>,
    /// Orthonormal eigenvector columns per rung, signs fixed by the
    /// eigen-solver convention.
    pub eigenvectors: Vec<DMatrix<f64>>,
    /// Fitted `c_i` with `lambda_i = c_i eps^{2i} + O(eps^{2i+2})`;
    /// `None` where every rung sits below the float resolution floor.
    pub coefficients: Vec<Option<f64>>,
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InsufficientLadder);
    }
    let decreasing = ladder.windows(2).all(|w| w[0] > w[1]);
    if !decreasing || ladder.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InsufficientLadder);
    }
    Ok(())
}

/// Fit the leading coefficients `c_i` from per-rung eigenvalues.
///
/// Uses the rungs where `lambda_i` still clears the float resolution
/// floor `floor_multiplier * 1e-15 * lambda_1`: the two smallest such
/// radii combine by Richardson elimination of the `O(eps^2)` correction
/// (`c_i = (4 r_{eps/2} - r_eps)/3` for the default halving ladder, with
/// `r_eps = lambda_i(eps)/eps^{2i}`); a single clear rung falls back to
/// the raw ratio, and `None` marks coefficients with no usable rung.
pub fn fit_leading_coefficients(
    eigenvalues: &[Vec<f64>],
    ladder: &[f64],
) -> Result<Vec<Option<f64>>> {
    fit_leading_coefficients_with_floor(eigenvalues, ladder, 100.0)
}

pub fn fit_leading_coefficients_with_floor(
    eigenvalues: &[Vec<f64>],
    ladder: &[f64],
    floor_multiplier: f64,
) -> Result<Vec<Option<f64>>> {
    validate_ladder(ladder)?;
    if eigenvalues.len() != ladder.len() {
        return Err(Error::InvalidParams(format!(
            "{} eigenvalue sets for {} ladder rungs",
            eigenvalues.len(),
            ladder.len()
        )));
    }
    let n = eigenvalues[0].len();
    if n == 0 || eigenvalues.iter().any(|l| l.len() != n) {
        return Err(Error::InvalidParams(
            "per-rung eigenvalue lists must share one non-empty length".into(),
        ));
    }

    let mut coefficients = Vec::with_capacity(n);
    for i in 0..n {
        // Usable rungs form a prefix (largest radii first): once
        // lambda_i falls under the floor it only sinks further.
        let mut usable = 0;
        for rung in eigenvalues {
            let floor = (floor_multiplier * EIGEN_FLOOR * rung[0]).max(UNDERFLOW_FLOOR);
            if rung[i] >= floor {
                usable += 1;
            } else {
                break;
            }
        }
        let r = |k: usize| eigenvalues[k][i] / ladder[k].powi(2 * (i as i32 + 1));
        coefficients.push(match usable {
            0 => None,
            1 => Some(r(0)),
            u => {
                let (ka, kb) = (u - 2, u - 1);
                let rho = ladder[kb] / ladder[ka];
                let rho2 = rho * rho;
                Some((r(kb) - rho2 * r(ka)) / (1.0 - rho2))
            }
        });
    }
    Ok(coefficients)
}

/// Knobs for curvature estimation.
#[derive(Clone, Debug)]
pub struct EstimateOptions {
    /// Strictly decreasing window radii; a single radius skips the
    /// Richardson step.
    pub ladder: Vec<f64>,
    /// Gauss-Legendre order per half-window (ignored for sampled input).
    pub quad_order: usize,
    /// Floor multiplier for rung usability (see
    /// [`fit_leading_coefficients_with_floor`]).
    pub floor_multiplier: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            ladder: default_ladder(),
            quad_order: DEFAULT_QUAD_ORDER,
            floor_multiplier: 100.0,
        }
    }
}

impl EstimateOptions {
    pub fn single_eps(eps: f64) -> Self {
        EstimateOptions {
            ladder: vec![eps],
            ..Default::default()
        }
    }

    pub fn with_ladder(ladder: Vec<f64>) -> Self {
        EstimateOptions {
            ladder,
            ..Default::default()
        }
    }
}

/// The default ladder: `eps_0 = 1e-2`, ratio 1/2, 4 rungs.
pub fn default_ladder() -> Vec<f64> {
    (0..4).map(|k| 1e-2 * 0.5f64.powi(k)).collect()
}

/// One curvature estimate.
#[derive(Clone, Debug)]
pub struct CurvatureEstimate {
    /// 1-based curvature index `j` of `kappa_j`.
    pub index: usize,
    /// `None` when the eigenvalues feeding it never cleared the float
    /// resolution floor.
    pub value: Option<f64>,
    /// `false` when `lambda_{j+1}` at the smallest rung sits within
    /// `floor_multiplier` of the eigen-solver floor — the estimate (if
    /// any) leans on partially resolved data.
    pub reliable: bool,
}

/// Full curvature estimation output at one parameter value.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub t: f64,
    pub dim: usize,
    /// `kappa_1 .. kappa_{dim-1}`.
    pub estimates: Vec<CurvatureEstimate>,
    pub spectrum: LocalSpectrum,
    /// Whether the exact rational covariance path produced the numbers.
    pub exact_path: bool,
}

/// Estimate `kappa_1..kappa_{n-1}` at `t` from covariance spectra across
/// the options' `eps` ladder.
///
/// `kappa_j = sqrt(a_j c_{j+1} / (c_1 c_j))` with the exact rational
/// `a_j` converted to float once; the `eps` powers in the `c` ratio
/// cancel exactly.  Polynomial curves route through the exact rational
/// covariance, where the resolution floor does not apply.
pub fn estimate_curvatures(
    curve: &dyn Curve,
    t: f64,
    opts: &EstimateOptions,
) -> Result<CurvatureReport> {
    validate_ladder(&opts.ladder)?;
    if let Some(poly) = curve.as_polynomial() {
        return crate::exact::estimate_curvatures_exact(poly, t, opts);
    }
    let mut eigenvalues = Vec::with_capacity(opts.ladder.len());
    let mut eigenvectors = Vec::with_capacity(opts.ladder.len());
    for &eps in &opts.ladder {
        let cov = covariance_on_curve(curve, t, eps, opts.quad_order)?;
        let dec = jacobi_eigen(&cov.entries)?;
        eigenvalues.push(dec.values);
        eigenvectors.push(dec.vectors);
    }
    report_from_spectra(t, curve.dim(), opts, eigenvalues, eigenvectors, false)
}

/// As [`estimate_curvatures`], from discrete samples: the covariance at
/// each rung is the trapezoid-rule form over the sample grid.
pub fn estimate_curvatures_sampled(
    samples: &SampledCurve,
    t: f64,
    opts: &EstimateOptions,
) -> Result<CurvatureReport> {
    validate_ladder(&opts.ladder)?;
    let mut eigenvalues = Vec::with_capacity(opts.ladder.len());
    let mut eigenvectors = Vec::with_capacity(opts.ladder.len());
    for &eps in &opts.ladder {
        let cov = discrete_covariance(samples, t, eps)?;
        let dec = jacobi_eigen(&cov.entries)?;
        eigenvalues.push(dec.values);
        eigenvectors.push(dec.vectors);
    }
    report_from_spectra(t, samples.dim(), opts, eigenvalues, eigenvectors, false)
}

fn report_from_spectra(
    t: f64,
    dim: usize,
    opts: &EstimateOptions,
    eigenvalues: Vec<Vec<f64>>,
    eigenvectors: Vec<DMatrix<f64>>,
    exact_path: bool,
) -> Result<CurvatureReport> {
    let coefficients =
        fit_leading_coefficients_with_floor(&eigenvalues, &opts.ladder, opts.floor_multiplier)?;
    let smallest = eigenvalues.last().expect("ladder validated non-empty");
    let floor = (opts.floor_multiplier * EIGEN_FLOOR * smallest[0]).max(UNDERFLOW_FLOOR);

    let mut estimates = Vec::with_capacity(dim.saturating_sub(1));
    for j in 1..dim {
        let value = match (
            &coefficients[0],
            &coefficients[j - 1],
            &coefficients[j],
        ) {
            (Some(c1), Some(cj), Some(cj1)) if *c1 > 0.0 && *cj > 0.0 && *cj1 > 0.0 => {
                let aj = rational_to_f64(&curvature_coefficient(j)?);
                Some((aj * cj1 / (c1 * cj)).sqrt())
            }
            _ => None,
        };
        let reliable = value.is_some() && smallest[j] >= floor;
        estimates.push(CurvatureEstimate {
            index: j,
            value,
            reliable,
        });
    }

    Ok(CurvatureReport {
        t,
        dim,
        estimates,
        spectrum: LocalSpectrum {
            t,
            eps_ladder: opts.ladder.clone(),
            eigenvalues,
            eigenvectors,
            coefficients,
        },
        exact_path,
    })
}

/// Approximate Frenet frame at `t`: the eigenvector columns of
/// `C_eps(t)`, descending by eigenvalue.
///
/// Signs follow the eigen-solver convention unless the curve provides
/// derivative oracles, in which case each `u_i` is flipped to satisfy
/// `<u_i, e_i> > 0` against the Gram-Schmidt frame.  Numerically tied
/// eigenvalues leave the frame directions undetermined and error as
/// [`Error::DegenerateSpectrum`].
pub fn estimate_frame(
    curve: &dyn Curve,
    t: f64,
    eps: f64,
    quad_order: usize,
) -> Result<DMatrix<f64>> {
    let cov = covariance_on_curve(curve, t, eps, quad_order)?;
    let dec = jacobi_eigen(&cov.entries)?;
    let n = cov.dim();
    let tie_tol = 1e-12 * dec.values[0].abs().max(UNDERFLOW_FLOOR);
    for i in 0..n - 1 {
        if (dec.values[i] - dec.values[i + 1]).abs() <= tie_tol {
            return Err(Error::DegenerateSpectrum {
                index: i + 1,
                next: i + 2,
                a: dec.values[i],
                b: dec.values[i + 1],
            });
        }
    }
    let mut frame = dec.vectors;
    let derivs: Option<Vec<DVector<f64>>> = (1..=n).map(|k| curve.derivative(k, t)).collect();
    if let Some(derivs) = derivs {
        if let Ok(reference) = gram_schmidt_frame(&derivs) {
            for i in 0..n {
                if frame.column(i).dot(&reference.column(i)) < 0.0 {
                    let flipped = -frame.column(i).clone_owned();
                    frame.set_column(i, &flipped);
                }
            }
        }
    }
    Ok(frame)
}

/// Trapezoid-rule covariance over the samples inside `[t - eps, t + eps]`.
///
/// The window edges are included as extra nodes with interpolated
/// points, so the integral covers exactly the stated window; `gamma(t)`
/// itself comes from cubic Lagrange interpolation when `t` is off-grid.
pub fn discrete_covariance(samples: &SampledCurve, t: f64, eps: f64) -> Result<CovarianceMatrix> {
    if !(eps > 0.0) || !eps.is_finite() || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "window needs finite t and eps > 0, got t = {t}, eps = {eps}"
        )));
    }
    let (lo, hi) = (t - eps, t + eps);
    let (have_lo, have_hi) = samples.param_range();
    let params = samples.params();
    let first = params.partition_point(|&p| p < lo);
    let last = params.partition_point(|&p| p <= hi); // exclusive
    let count = last.saturating_sub(first);
    if lo < have_lo || hi > have_hi || count < 5 {
        return Err(Error::TooFewSamples {
            have_lo,
            have_hi,
            want_lo: lo,
            want_hi: hi,
            count,
        });
    }

    let center = samples.point_at(t)?;
    let n = samples.dim();
    let mut nodes: Vec<(f64, DVector<f64>)> = Vec::with_capacity(count + 2);
    if params[first] > lo {
        nodes.push((lo, samples.point_at(lo)?));
    }
    for k in first..last {
        nodes.push((params[k], samples.points()[k].clone()));
    }
    if params[last - 1] < hi {
        nodes.push((hi, samples.point_at(hi)?));
    }

    // Trapezoid weights: w_k = (gap before + gap after) / 2.
    let mut entries = DMatrix::<f64>::zeros(n, n);
    for (k, (s, p)) in nodes.iter().enumerate() {
        let before = if k > 0 { s - nodes[k - 1].0 } else { 0.0 };
        let after = if k + 1 < nodes.len() {
            nodes[k + 1].0 - s
        } else {
            0.0
        };
        let w = 0.5 * (before + after);
        let d = p - &center;
        for i in 0..n {
            for j in i..n {
                entries[(i, j)] += w * d[i] * d[j];
            }
        }
    }
    entries /= 2.0 * eps;
    for i in 0..n {
        for j in (i + 1)..n {
            entries[(j, i)] = entries[(i, j)];
        }
    }
    Ok(CovarianceMatrix {
        t,
        eps,
        entries,
        centered: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin_curve;
    use crate::ratpoly::RatPoly;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn circle() -> Box<dyn Curve> {
        builtin_curve("circle").unwrap()
    }

    fn helix() -> Box<dyn Curve> {
        builtin_curve("helix").unwrap()
    }

    fn helix_c3() -> f64 {
        // a^2 alpha^6 b^2 / 1575 at a=1, alpha=b=1/sqrt(2).
        (0.5f64).powi(3) * 0.5 / 1575.0
    }

    fn line_curve() -> PolyCurve {
        PolyCurve::new(vec![RatPoly::monomial(1), RatPoly::zero()]).unwrap()
    }

    fn eig_desc(c: &CovarianceMatrix) -> (Vec<f64>, DMatrix<f64>) {
        let dec = jacobi_eigen(&c.entries).unwrap();
        (dec.values, dec.vectors)
    }

    #[test]
    fn circle_covariance_basics() {
        let c = circle();
        let cov = covariance_on_curve(c.as_ref(), 0.0, 0.1, DEFAULT_QUAD_ORDER).unwrap();
        // Odd integrand kills the off-diagonal at the symmetric point.
        assert!(cov.entries[(0, 1)].abs() <= 1e-15);
        assert_eq!(cov.entries[(0, 1)], cov.entries[(1, 0)]);
        let (vals, _) = eig_desc(&cov);
        assert!((vals[0] - 0.01 / 3.0).abs() <= 2e-5);

        // Entries vanish quadratically as the window shrinks.
        let tiny = covariance_on_curve(c.as_ref(), 0.0, 1e-5, DEFAULT_QUAD_ORDER).unwrap();
        assert!(tiny.entries.abs().max() <= 1e-9);
    }

    #[test]
    fn covariance_is_positive_semidefinite() {
        for (curve, t) in [(helix(), 0.7), (builtin_curve("toroidal4").unwrap(), 1.3)] {
            let cov = covariance_on_curve(curve.as_ref(), t, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
            let (vals, _) = eig_desc(&cov);
            let trace = cov.entries.trace();
            assert!(vals.iter().all(|&l| l >= -1e-14 * trace));
        }
    }

    #[test]
    fn domain_violation_detected() {
        let tc = PolyCurve::twisted_cubic();
        assert!(covariance_on_curve(&tc, 0.0, 1.0, 24).is_ok());
        let samples_only = builtin_curve("circle").unwrap();
        assert!(covariance_on_curve(samples_only.as_ref(), 0.0, 0.1, 24).is_ok());
        // A curve with a bounded domain: sampled curves are checked in
        // the discrete tests; here exercise eps validation.
        assert!(matches!(
            covariance_on_curve(&tc, 0.0, -0.5, 24),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn mean_centered_line_is_rank_one_with_exact_eigenvalue() {
        let line = line_curve();
        let eps = 0.37;
        let cov = covariance_mean_centered(&line, 0.0, eps, DEFAULT_QUAD_ORDER).unwrap();
        let (vals, _) = eig_desc(&cov);
        assert_relative_eq!(vals[0], eps * eps / 3.0, max_relative = 1e-14);
        assert!(vals[1].abs() <= 1e-18);
        assert!(cov.centered);
    }

    #[test]
    fn mean_centered_circle_and_trace_reduction() {
        let c = circle();
        let cov = covariance_mean_centered(c.as_ref(), 0.0, 0.1, DEFAULT_QUAD_ORDER).unwrap();
        assert!(cov.entries[(0, 1)].abs() <= 1e-15);

        let h = helix();
        let plain = covariance_on_curve(h.as_ref(), 0.5, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
        let centered = covariance_mean_centered(h.as_ref(), 0.5, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
        assert!(centered.entries.trace() <= plain.entries.trace());
    }

    #[test]
    fn moment_matrix_entries() {
        let m = taylor_moment_matrix(2, 1.0).unwrap();
        assert_relative_eq!(m.entries[(0, 0)], 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(m.entries[(0, 1)], 0.0);
        assert_relative_eq!(m.entries[(1, 1)], 1.0 / 20.0, max_relative = 1e-15);

        let eps = 0.3;
        let m = taylor_moment_matrix(6, eps).unwrap();
        let mut fact = 1.0;
        for i in 1..=6usize {
            fact *= i as f64;
            let expected = eps.powi(2 * i as i32) / ((2 * i + 1) as f64 * fact * fact);
            assert_relative_eq!(m.entries[(i - 1, i - 1)], expected, max_relative = 1e-14);
            assert!(m.entries[(i - 1, i - 1)] > 0.0);
        }
    }

    #[test]
    fn surrogate_matches_straight_line_exactly() {
        let e_x = DVector::from_vec(vec![1.0, 0.0]);
        let s = surrogate_covariance(&[e_x], 0.2).unwrap();
        assert_relative_eq!(s.entries[(0, 0)], 0.04 / 3.0, max_relative = 1e-15);
        assert_eq!(s.entries[(0, 1)], 0.0);
        assert_eq!(s.entries[(1, 1)], 0.0);
    }

    #[test]
    fn surrogate_agrees_with_quadrature_covariance() {
        // Unit circle at t=0 with derivatives through order 4.
        let c = circle();
        let derivs: Vec<DVector<f64>> = (1..=4).map(|k| c.derivative(k, 0.0).unwrap()).collect();
        let s = surrogate_covariance(&derivs, 1e-2).unwrap();
        let q = covariance_on_curve(c.as_ref(), 0.0, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
        assert!((s.entries - q.entries).abs().max() <= 1e-12);

        // Twisted cubic at t=3: three derivatives are the whole jet, so
        // the only disagreement is quadrature rounding.
        let tc = PolyCurve::twisted_cubic();
        let derivs: Vec<DVector<f64>> = (1..=3).map(|k| tc.derivative(k, 3.0).unwrap()).collect();
        let s = surrogate_covariance(&derivs, 1e-3).unwrap();
        let q = covariance_on_curve(&tc, 3.0, 1e-3, DEFAULT_QUAD_ORDER).unwrap();
        assert!((s.entries - q.entries).abs().max() <= 1e-18);
    }

    #[test]
    fn surrogate_error_shrinks_at_the_expected_rate() {
        // With 2n-1 = 5 derivative columns the surrogate tracks the
        // covariance to O(eps^8); halving eps divides the gap by ~2^8.
        let h = helix();
        let derivs: Vec<DVector<f64>> = (1..=5).map(|k| h.derivative(k, 0.7).unwrap()).collect();
        let gap = |eps: f64| {
            let s = surrogate_covariance(&derivs, eps).unwrap();
            let q = covariance_on_curve(h.as_ref(), 0.7, eps, DEFAULT_QUAD_ORDER).unwrap();
            (s.entries - q.entries).abs().max()
        };
        let ratio = gap(0.1) / gap(0.05);
        assert!(
            ratio >= 64.0,
            "agreement order too low: halving ratio {ratio:.1}"
        );
    }

    #[test]
    fn checkerboard_splits_and_rejects() {
        let mut m = DMatrix::zeros(4, 4);
        // odd-position block [[1,2],[2,3]], even-position block [[4,5],[5,6]].
        m[(0, 0)] = 1.0;
        m[(0, 2)] = 2.0;
        m[(2, 0)] = 2.0;
        m[(2, 2)] = 3.0;
        m[(1, 1)] = 4.0;
        m[(1, 3)] = 5.0;
        m[(3, 1)] = 5.0;
        m[(3, 3)] = 6.0;
        let (odd, even, perm) = checkerboard_blocks(&m).unwrap();
        assert_eq!(perm, vec![0, 2, 1, 3]);
        assert_eq!(odd, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
        assert_eq!(even, DMatrix::from_row_slice(2, 2, &[4.0, 5.0, 5.0, 6.0]));

        let dense = DMatrix::from_element(3, 3, 1.0);
        assert!(matches!(
            checkerboard_blocks(&dense),
            Err(Error::PatternViolation { .. })
        ));
    }

    #[test]
    fn toroidal_covariance_is_checkerboard_with_matching_spectra() {
        let t4 = builtin_curve("toroidal4").unwrap();
        let cov = covariance_on_curve(t4.as_ref(), 0.0, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
        let (odd, even, _) = checkerboard_blocks(&cov.entries).unwrap();
        let full = jacobi_eigen(&cov.entries).unwrap().values;
        let mut union: Vec<f64> = jacobi_eigen(&odd)
            .unwrap()
            .values
            .into_iter()
            .chain(jacobi_eigen(&even).unwrap().values)
            .collect();
        union.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (f, b) in full.iter().zip(&union) {
            assert!((f - b).abs() <= 1e-13, "block union departs: {f} vs {b}");
            // Relative to the spectrum scale the agreement is far tighter.
            assert!((f - b).abs() <= 1e-13 * full[0]);
        }
    }

    #[test]
    fn fit_recovers_circle_and_helix_coefficients() {
        let ladder = default_ladder();
        let c = circle();
        let lams: Vec<Vec<f64>> = ladder
            .iter()
            .map(|&e| {
                eig_desc(&covariance_on_curve(c.as_ref(), 0.3, e, DEFAULT_QUAD_ORDER).unwrap()).0
            })
            .collect();
        let cs = fit_leading_coefficients(&lams, &ladder).unwrap();
        assert!((cs[0].unwrap() - 1.0 / 3.0).abs() <= 1e-6);
        assert!((cs[1].unwrap() - 1.0 / 20.0).abs() <= 1e-6);

        let h = helix();
        let lams: Vec<Vec<f64>> = ladder
            .iter()
            .map(|&e| {
                eig_desc(&covariance_on_curve(h.as_ref(), 0.7, e, DEFAULT_QUAD_ORDER).unwrap()).0
            })
            .collect();
        let cs = fit_leading_coefficients(&lams, &ladder).unwrap();
        assert_relative_eq!(cs[0].unwrap(), 1.0 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(cs[1].unwrap(), 0.0125, max_relative = 1e-6);
        // lambda_3 only clears the float floor on the largest rung; the
        // single-rung fallback still lands within a few 1e-5 relative.
        assert_relative_eq!(cs[2].unwrap(), helix_c3(), max_relative = 1e-3);
    }

    #[test]
    fn fit_input_validation() {
        assert!(matches!(
            fit_leading_coefficients(&[], &[]),
            Err(Error::InsufficientLadder)
        ));
        assert!(matches!(
            fit_leading_coefficients(&[vec![1.0]], &[1e-2, 1e-3, 1e-4]),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            fit_leading_coefficients(&[vec![1.0], vec![1.0]], &[1e-3, 1e-2]),
            Err(Error::InsufficientLadder)
        ));
        // Single-rung fallback is the raw ratio.
        let cs = fit_leading_coefficients(&[vec![3.0e-4]], &[1e-2]).unwrap();
        assert_relative_eq!(cs[0].unwrap(), 3.0, max_relative = 1e-15);
        // Fully sunk eigenvalues yield None.
        let cs = fit_leading_coefficients(&[vec![1.0, 1e-17]], &[1e-2]).unwrap();
        assert!(cs[1].is_none());
    }

    #[test]
    fn circle_single_eps_curvature() {
        let report =
            estimate_curvatures(circle().as_ref(), 0.4, &EstimateOptions::single_eps(1e-3))
                .unwrap();
        let k1 = report.estimates[0].value.unwrap();
        assert!((k1 - 1.0).abs() <= 1e-5, "kappa_1 = {k1}");
        assert!(report.estimates[0].reliable);
        assert!(!report.exact_path);
    }

    #[test]
    fn helix_ladder_curvatures() {
        let report =
            estimate_curvatures(helix().as_ref(), 0.7, &EstimateOptions::default()).unwrap();
        let k1 = report.estimates[0].value.unwrap();
        let k2 = report.estimates[1].value.unwrap();
        assert!((k1 - 0.5).abs() <= 1e-4, "kappa_1 = {k1}");
        assert!((k2 - 0.5).abs() <= 1e-4, "kappa_2 = {k2}");
        assert!(report.estimates[0].reliable);
        // The smallest rung has lambda_3 under the floor: flagged, not
        // silently trusted — even though the adaptive fit did fine.
        assert!(!report.estimates[1].reliable);
    }

    #[test]
    fn estimates_are_stable_under_smaller_windows() {
        // The eps powers cancel in the ratio, so re-running with any
        // smaller resolved window moves the estimate only at the
        // curvature-expansion level.
        let c = circle();
        let at = |eps: f64| {
            estimate_curvatures(c.as_ref(), 1.1, &EstimateOptions::single_eps(eps))
                .unwrap()
                .estimates[0]
                .value
                .unwrap()
        };
        let base = at(1e-3);
        for eps in [5e-4, 2.5e-4] {
            assert!((at(eps) - base).abs() / base <= 1e-6);
        }
    }

    #[test]
    fn eigenvalue_scaling_slopes() {
        // log2 lambda_i(eps) - log2 lambda_i(eps/2) ~ 2i, i <= 3.
        for (curve, t) in [
            (builtin_curve("helix").unwrap(), 0.7),
            (builtin_curve("twisted-cubic").unwrap(), 0.0),
        ] {
            let la = eig_desc(
                &covariance_on_curve(curve.as_ref(), t, 1e-2, DEFAULT_QUAD_ORDER).unwrap(),
            )
            .0;
            let lb = eig_desc(
                &covariance_on_curve(curve.as_ref(), t, 5e-3, DEFAULT_QUAD_ORDER).unwrap(),
            )
            .0;
            for i in 0..3 {
                let slope = (la[i] / lb[i]).log2();
                let target = 2.0 * (i as f64 + 1.0);
                assert!(
                    (slope - target).abs() <= 0.02 * target,
                    "slope {slope} for i={} of {curve:p}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn frame_estimate_circle_and_alignment() {
        let c = circle();
        let u = estimate_frame(c.as_ref(), 0.0, 1e-2, DEFAULT_QUAD_ORDER).unwrap();
        // e_1 = (0, 1), e_2 = (-1, 0) at t = 0; alignment flips u_2.
        assert!((u[(1, 0)] - 1.0).abs() <= 1e-6);
        assert!((u[(0, 1)] + 1.0).abs() <= 1e-6);

        let h = helix();
        let frame = crate::frenet::frenet_apparatus(h.as_ref(), 0.7).unwrap().frame;
        for eps in [1e-2, 1e-3] {
            let u = estimate_frame(h.as_ref(), 0.7, eps, DEFAULT_QUAD_ORDER).unwrap();
            for i in 0..3 {
                let dot = u.column(i).dot(&frame.column(i));
                assert!(dot > 0.0, "sign alignment failed");
                assert!(dot >= 1.0 - 1e-4);
            }
        }
    }

    #[test]
    fn frame_estimate_flags_tied_spectrum() {
        // A straight line in R^3 leaves two zero eigenvalues tied, so
        // the normal directions are undetermined.
        let line = PolyCurve::new(vec![RatPoly::monomial(1), RatPoly::zero(), RatPoly::zero()])
            .unwrap();
        match estimate_frame(&line, 0.0, 0.1, DEFAULT_QUAD_ORDER) {
            Err(Error::DegenerateSpectrum { index, next, .. }) => {
                assert_eq!((index, next), (2, 3));
            }
            other => panic!("expected degenerate spectrum, got {other:?}"),
        }
    }

    #[test]
    fn frame_convergence_is_monotone() {
        // |<u_i(eps), e_i>| climbs toward 1 down the ladder.
        for (curve, t) in [
            (builtin_curve("twisted-cubic").unwrap(), 3.0),
            (builtin_curve("helix").unwrap(), 0.7),
        ] {
            let frame = crate::frenet::frenet_apparatus(curve.as_ref(), t).unwrap().frame;
            let mut prev = vec![0.0; 3];
            for &eps in &default_ladder() {
                let u = estimate_frame(curve.as_ref(), t, eps, DEFAULT_QUAD_ORDER).unwrap();
                for i in 0..3 {
                    let a = u.column(i).dot(&frame.column(i)).abs();
                    assert!(
                        a >= prev[i] - 1e-6,
                        "alignment regressed: {a} after {}",
                        prev[i]
                    );
                    prev[i] = a;
                }
            }
            assert!(prev.iter().all(|&a| a >= 1.0 - 1e-6));
        }
    }

    #[test]
    fn mean_centered_frames_converge_to_on_curve_frames() {
        let h = helix();
        let mut prev = 0.0f64;
        for eps in [1e-2, 5e-3, 1e-3] {
            let (_, u) = eig_desc(&covariance_on_curve(h.as_ref(), 0.5, eps, 24).unwrap());
            let (_, ub) = eig_desc(&covariance_mean_centered(h.as_ref(), 0.5, eps, 24).unwrap());
            let worst = (0..3)
                .map(|i| u.column(i).dot(&ub.column(i)).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(worst >= 1.0 - 1e-8, "alignment {worst}");
            assert!(worst >= prev - 1e-6);
            prev = worst;
        }
    }

    #[test]
    fn discrete_covariance_on_dense_circle() {
        let c = circle();
        let m = 10_000;
        let ts: Vec<f64> = (0..=m)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / m as f64)
            .collect();
        let pts: Vec<DVector<f64>> = ts.iter().map(|&t| c.value(t)).collect();
        let samples = SampledCurve::new(ts, pts).unwrap();

        let eps = 0.05;
        let cov = discrete_covariance(&samples, 2.0, eps).unwrap();
        let (vals, _) = eig_desc(&cov);
        let target = eps * eps / 3.0;
        assert!(
            (vals[0] - target).abs() / target <= 1e-2,
            "lambda_1 off by {:.3e}",
            (vals[0] - target).abs() / target
        );

        // Window past the sampled range.
        assert!(matches!(
            discrete_covariance(&samples, 0.01, 0.05),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn discrete_covariance_converges_to_quadrature() {
        let h = helix();
        let quad = covariance_on_curve(h.as_ref(), 1.0, 0.1, DEFAULT_QUAD_ORDER).unwrap();
        let mut errors = Vec::new();
        for m in [200usize, 800, 3200] {
            let ts: Vec<f64> = (0..=m).map(|k| 2.0 * k as f64 / m as f64).collect();
            let pts: Vec<DVector<f64>> = ts.iter().map(|&t| h.value(t)).collect();
            let samples = SampledCurve::new(ts, pts).unwrap();
            let disc = discrete_covariance(&samples, 1.0, 0.1).unwrap();
            errors.push((disc.entries - &quad.entries).abs().max());
        }
        // Trapezoid rule: 4x the samples cuts the error 16-fold.
        assert!(errors[0] > errors[1] && errors[1] > errors[2]);
        assert!(errors[0] / errors[2] >= 100.0);
        assert!(errors[2] <= 1e-7, "finest error {:.3e}", errors[2]);
    }

    #[test]
    fn discrete_covariance_needs_five_samples() {
        let p = |x: f64| DVector::from_vec(vec![x, x * x]);
        let samples =
            SampledCurve::new(vec![0.0, 0.5, 1.0, 1.5, 2.0], (0..5).map(|k| p(k as f64 * 0.5)).collect())
                .unwrap();
        // Window [0.9, 1.1] holds a single sample.
        match discrete_covariance(&samples, 1.0, 0.1) {
            Err(Error::TooFewSamples { count, .. }) => assert_eq!(count, 1),
            other => panic!("expected TooFewSamples, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn covariance_symmetric_psd(t in -2.0f64..2.0, eps in 1e-4f64..0.3) {
            let h = helix();
            let cov = covariance_on_curve(h.as_ref(), t, eps, DEFAULT_QUAD_ORDER).unwrap();
            prop_assert_eq!((&cov.entries - cov.entries.transpose()).abs().max(), 0.0);
            let (vals, _) = eig_desc(&cov);
            prop_assert!(vals.iter().all(|&l| l >= -1e-14 * cov.entries.trace()));
        }

        #[test]
        fn checkerboard_round_trips(entries in proptest::collection::vec(-5.0f64..5.0, 9)) {
            // Assemble a 5x5 checkerboard from a 3x3 odd and 2x2 even block.
            let mut m = DMatrix::zeros(5, 5);
            let odd_idx = [0usize, 2, 4];
            for r in 0..3 {
                for c in 0..3 {
                    let v = 0.5 * (entries[r * 3 + c] + entries[c * 3 + r]);
                    m[(odd_idx[r], odd_idx[c])] = v;
                }
            }
            let even_idx = [1usize, 3];
            for r in 0..2 {
                for c in 0..2 {
                    let v = 0.5 * (entries[r * 2 + c] + entries[c * 2 + r]);
                    m[(even_idx[r], even_idx[c])] = v;
                }
            }
            let (odd, even, perm) = checkerboard_blocks(&m).unwrap();
            prop_assert_eq!(perm, vec![0, 2, 4, 1, 3]);
            for r in 0..3 {
                for c in 0..3 {
                    prop_assert_eq!(odd[(r, c)], m[(odd_idx[r], odd_idx[c])]);
                }
            }
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert_eq!(even[(r, c)], m[(even_idx[r], even_idx[c])]);
                }
            }
        }
    }
}
