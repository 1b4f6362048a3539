//! Curve sources: closed-form builtins, exact polynomial curves, and
//! sampled point sets.
//!
//! Everything downstream consumes the [`Curve`] trait — a point oracle
//! plus optional derivative oracles `gamma^(k)(t)`.  The builtin family
//! covers the constant-curvature curves made of circular pairs with an
//! optional linear drift, and the twisted cubic `(t, t^2, t^3)`;
//! polynomial curves additionally expose their exact rational
//! coefficients, which the covariance machinery exploits to sidestep
//! floating-point limits.

use std::io::{BufRead, BufReader, Write as IoWrite};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::ratpoly::RatPoly;
use crate::rational::{rational_to_f64, Rational};

/// A parameterized curve in `R^n`.
///
/// Implementations must be safe for concurrent read-only use.
pub trait Curve: Sync + Send {
    fn dim(&self) -> usize;

    /// Closed parameter domain; infinite endpoints mean unbounded.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn value(&self, t: f64) -> DVector<f64>;

    /// `gamma^(order)(t)` for `order >= 1`, when the curve can provide it.
    fn derivative(&self, order: usize, t: f64) -> Option<DVector<f64>>;

    /// Exact polynomial coordinates, when the curve has them.
    fn as_polynomial(&self) -> Option<&PolyCurve> {
        None
    }
}

impl<C: Curve + ?Sized> Curve for Box<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }

    fn value(&self, t: f64) -> DVector<f64> {
        (**self).value(t)
    }

    fn derivative(&self, order: usize, t: f64) -> Option<DVector<f64>> {
        (**self).derivative(order, t)
    }

    fn as_polynomial(&self) -> Option<&PolyCurve> {
        (**self).as_polynomial()
    }
}

/// `||gamma'(t)||`, if the curve provides first derivatives.
pub fn speed(curve: &dyn Curve, t: f64) -> Option<f64> {
    curve.derivative(1, t).map(|d| d.norm())
}

// ─────────────────────────────────────────────────────────────────────────
// Canonical constant-curvature curves
// ─────────────────────────────────────────────────────────────────────────

/// Curve built from circular pairs `(a_i cos(alpha_i t), a_i sin(alpha_i t))`
/// plus an optional trailing drift coordinate `b t`.
///
/// These are exactly the curves with constant Frenet curvatures; see
/// [`crate::frenet::params_to_curvatures`] for the parameter-to-curvature
/// systems.
#[derive(Clone, Debug)]
pub struct CanonicalCurve {
    pairs: Vec<(f64, f64)>,
    drift: Option<f64>,
}

impl CanonicalCurve {
    /// `pairs` holds `(amplitude, frequency)` per circular pair; both must
    /// be positive.  `drift` adds a final linear coordinate (non-negative).
    pub fn new(pairs: Vec<(f64, f64)>, drift: Option<f64>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParams(
                "canonical curve needs at least one circular pair".into(),
            ));
        }
        for &(a, freq) in &pairs {
            if !(a > 0.0 && freq > 0.0) || !a.is_finite() || !freq.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "circular pair requires positive amplitude and frequency, got ({a}, {freq})"
                )));
            }
        }
        if let Some(b) = drift {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "drift coefficient must be non-negative, got {b}"
                )));
            }
        }
        Ok(Self { pairs, drift })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn drift(&self) -> Option<f64> {
        self.drift
    }
}

impl Curve for CanonicalCurve {
    fn dim(&self) -> usize {
        2 * self.pairs.len() + usize::from(self.drift.is_some())
    }

    fn value(&self, t: f64) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for &(a, freq) in &self.pairs {
            let (s, c) = (freq * t).sin_cos();
            out.push(a * c);
            out.push(a * s);
        }
        if let Some(b) = self.drift {
            out.push(b * t);
        }
        DVector::from_vec(out)
    }

    fn derivative(&self, order: usize, t: f64) -> Option<DVector<f64>> {
        debug_assert!(order >= 1);
        let mut out = Vec::with_capacity(self.dim());
        for &(a, freq) in &self.pairs {
            let (s, c) = (freq * t).sin_cos();
            let scale = a * freq.powi(order as i32);
            // k-th derivative of (cos, sin) cycles with period 4.
            let (dx, dy) = match order % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            out.push(scale * dx);
            out.push(scale * dy);
        }
        if let Some(b) = self.drift {
            out.push(if order == 1 { b } else { 0.0 });
        }
        Some(DVector::from_vec(out))
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Polynomial curves
// ─────────────────────────────────────────────────────────────────────────

/// Curve whose coordinates are polynomials with exact rational
/// coefficients.
///
/// Evaluation uses cached `f64` coefficients; the exact coefficients stay
/// available for the exact covariance path.
#[derive(Clone, Debug)]
pub struct PolyCurve {
    coords: Vec<RatPoly>,
    // derivs[k][i] = k-th derivative of coordinate i (k = 0 is the curve).
    derivs: Vec<Vec<RatPoly>>,
    derivs_f64: Vec<Vec<Vec<f64>>>,
    max_degree: usize,
}

impl PolyCurve {
    pub fn new(coords: Vec<RatPoly>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParams(
                "polynomial curve needs at least one coordinate".into(),
            ));
        }
        let max_degree = coords
            .iter()
            .map(|p| p.degree().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let mut derivs = vec![coords.clone()];
        for k in 1..=max_degree {
            let next: Vec<RatPoly> = derivs[k - 1].iter().map(RatPoly::derivative).collect();
            derivs.push(next);
        }
        let derivs_f64 = derivs
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|p| p.coeffs().iter().map(rational_to_f64).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            coords,
            derivs,
            derivs_f64,
            max_degree,
        })
    }

    /// The twisted cubic `(t, t^2, t^3)`.
    pub fn twisted_cubic() -> Self {
        Self::new(vec![
            RatPoly::monomial(1),
            RatPoly::monomial(2),
            RatPoly::monomial(3),
        ])
        .expect("twisted cubic is well formed")
    }

    pub fn coords(&self) -> &[RatPoly] {
        &self.coords
    }

    /// Exact k-th derivative polynomials (k = 0 returns the coordinates);
    /// `None` once every coordinate has differentiated to zero.
    pub fn derivative_polys(&self, order: usize) -> Option<&[RatPoly]> {
        self.derivs.get(order).map(Vec::as_slice)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Exact reparameterization `t -> rate * t` (stays polynomial).
    pub fn reparameterize(&self, rate: &Rational) -> Result<Self> {
        if !num_traits::Signed::is_positive(rate) {
            return Err(Error::InvalidParams(format!(
                "reparameterization rate must be positive, got {rate}"
            )));
        }
        Self::new(self.coords.iter().map(|p| p.compose_scale(rate)).collect())
    }

    fn eval_level(&self, order: usize, t: f64) -> DVector<f64> {
        match self.derivs_f64.get(order) {
            Some(level) => DVector::from_iterator(
                self.coords.len(),
                level.iter().map(|coeffs| horner(coeffs, t)),
            ),
            None => DVector::zeros(self.coords.len()),
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

impl Curve for PolyCurve {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn value(&self, t: f64) -> DVector<f64> {
        self.eval_level(0, t)
    }

    fn derivative(&self, order: usize, t: f64) -> Option<DVector<f64>> {
        debug_assert!(order >= 1);
        Some(self.eval_level(order, t))
    }

    fn as_polynomial(&self) -> Option<&PolyCurve> {
        Some(self)
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Reparameterization wrapper
// ─────────────────────────────────────────────────────────────────────────

/// `t -> inner(rate * t)` with chain-rule derivative oracles.
///
/// Curvatures are arc-length rates, so they must be invariant under this
/// wrapper; tests use it exactly for that.
#[derive(Clone, Debug)]
pub struct ReparamCurve<C> {
    inner: C,
    rate: f64,
}

impl<C: Curve> ReparamCurve<C> {
    pub fn new(inner: C, rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParams(format!(
                "reparameterization rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self { inner, rate })
    }
}

impl<C: Curve> Curve for ReparamCurve<C> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.domain();
        (lo / self.rate, hi / self.rate)
    }

    fn value(&self, t: f64) -> DVector<f64> {
        self.inner.value(self.rate * t)
    }

    fn derivative(&self, order: usize, t: f64) -> Option<DVector<f64>> {
        self.inner
            .derivative(order, self.rate * t)
            .map(|d| d * self.rate.powi(order as i32))
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Builtin registry
// ─────────────────────────────────────────────────────────────────────────

/// Construct a builtin curve from a spec string `name` or
/// `name:key=value,key=value`.
///
/// | name            | parameters (defaults)                                        |
/// |-----------------|--------------------------------------------------------------|
/// | `circle`        | `a` (1) — unit-speed circle of radius `a`                    |
/// | `helix`         | `a` (1), `alpha` (1/√2), `b` (1/√2)                          |
/// | `toroidal4`     | `a` (0.8), `alpha` (1), `b` (0.3), `beta` (2)                |
/// | `screw5`        | `a` (0.8), `alpha` (1), `b` (0.25), `beta` (2), `c` (√0.11)  |
/// | `torus6`        | `a` (0.7), `alpha` (1), `b` (0.35), `beta` (2), `c` (√0.02/3), `delta` (3) |
/// | `twisted-cubic` | none                                                         |
///
/// Defaults are unit-speed.
pub fn builtin_curve(spec: &str) -> Result<Box<dyn Curve>> {
    let (name, param_str) = match spec.split_once(':') {
        Some((n, p)) => (n.trim(), Some(p)),
        None => (spec.trim(), None),
    };

    let mut params: Vec<(String, f64)> = Vec::new();
    if let Some(s) = param_str {
        for piece in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = piece.split_once('=').ok_or_else(|| {
                Error::InvalidParams(format!("malformed curve parameter `{piece}`, want key=value"))
            })?;
            let value: f64 = v.trim().parse().map_err(|_| {
                Error::InvalidParams(format!("curve parameter `{k}` has non-numeric value `{v}`"))
            })?;
            params.push((k.trim().to_string(), value));
        }
    }

    let mut take = |key: &str, default: f64| -> f64 {
        match params.iter().position(|(k, _)| k == key) {
            Some(i) => params.remove(i).1,
            None => default,
        }
    };

    let curve: Box<dyn Curve> = match name {
        "circle" => {
            let a = take("a", 1.0);
            if a <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "circle radius must be positive, got {a}"
                )));
            }
            Box::new(CanonicalCurve::new(vec![(a, 1.0 / a)], None)?)
        }
        "helix" => {
            let a = take("a", 1.0);
            let alpha = take("alpha", std::f64::consts::FRAC_1_SQRT_2);
            let b = take("b", std::f64::consts::FRAC_1_SQRT_2);
            Box::new(CanonicalCurve::new(vec![(a, alpha)], Some(b))?)
        }
        "toroidal4" => {
            let pairs = vec![(take("a", 0.8), take("alpha", 1.0)), (take("b", 0.3), take("beta", 2.0))];
            Box::new(CanonicalCurve::new(pairs, None)?)
        }
        "screw5" => {
            let pairs = vec![
                (take("a", 0.8), take("alpha", 1.0)),
                (take("b", 0.25), take("beta", 2.0)),
            ];
            let c = take("c", 0.11f64.sqrt());
            Box::new(CanonicalCurve::new(pairs, Some(c))?)
        }
        "torus6" => {
            let pairs = vec![
                (take("a", 0.7), take("alpha", 1.0)),
                (take("b", 0.35), take("beta", 2.0)),
                (take("c", 0.02f64.sqrt() / 3.0), take("delta", 3.0)),
            ];
            Box::new(CanonicalCurve::new(pairs, None)?)
        }
        "twisted-cubic" => Box::new(PolyCurve::twisted_cubic()),
        other => return Err(Error::UnknownCurve(other.to_string())),
    };

    if let Some((k, _)) = params.first() {
        return Err(Error::InvalidParams(format!(
            "curve `{name}` does not take parameter `{k}`"
        )));
    }
    Ok(curve)
}

// ─────────────────────────────────────────────────────────────────────────
// Sampled curves
// ─────────────────────────────────────────────────────────────────────────

/// A curve known only through samples `(t_k, gamma(t_k))` with strictly
/// increasing parameters.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<DVector<f64>>,
}

impl SampledCurve {
    pub fn new(params: Vec<f64>, points: Vec<DVector<f64>>) -> Result<Self> {
        if params.is_empty() || params.len() != points.len() {
            return Err(Error::InvalidParams(format!(
                "sampled curve needs matching non-empty parameter/point lists, got {} and {}",
                params.len(),
                points.len()
            )));
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams(
                "sample parameters must be strictly increasing".into(),
            ));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParams(
                "sample points must share one positive dimension".into(),
            ));
        }
        Ok(Self { params, points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one sample
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }

    /// Index of the last sample with `t_k <= t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        match self.params.partition_point(|&p| p <= t) {
            0 => None,
            k => Some(k - 1),
        }
    }

    /// Curve point at `t` by cubic (4-point) Lagrange interpolation on
    /// the nearest samples; exact at the sample parameters.
    pub fn point_at(&self, t: f64) -> Result<DVector<f64>> {
        let (lo, hi) = self.param_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::DomainError {
                lo: t,
                hi: t,
                domain_lo: lo,
                domain_hi: hi,
            });
        }
        if self.len() < 4 {
            // Too coarse for a cubic; nearest sample is the best we can do
            // for tiny sets, and exact matches still return exactly.
            let i = self
                .index_at_or_before(t)
                .unwrap_or(0)
                .min(self.len() - 1);
            return Ok(self.points[i].clone());
        }
        let anchor = self.index_at_or_before(t).unwrap_or(0);
        let first = anchor.saturating_sub(1).min(self.len() - 4);
        let ts = &self.params[first..first + 4];
        let mut out = DVector::zeros(self.dim());
        for (j, tj) in ts.iter().enumerate() {
            let mut w = 1.0;
            for (m, tm) in ts.iter().enumerate() {
                if m != j {
                    w *= (t - tm) / (tj - tm);
                }
            }
            out += &self.points[first + j] * w;
        }
        Ok(out)
    }

    /// Read the `t,x1,...,xn` CSV format.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "empty input, expected header t,x1,...,xn".into(),
        })?;
        let header = header?;
        let fields: Vec<&str> = header.trim().split(',').collect();
        let dim = fields.len().saturating_sub(1);
        let header_ok = dim >= 1
            && fields[0].trim() == "t"
            && fields[1..]
                .iter()
                .enumerate()
                .all(|(i, f)| f.trim() == format!("x{}", i + 1));
        if !header_ok {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("bad header `{}`, expected t,x1,...,xn", header.trim()),
            });
        }

        let mut params = Vec::new();
        let mut points = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.trim().split(',').collect();
            if cells.len() != dim + 1 {
                return Err(Error::CsvParse {
                    line: lineno,
                    message: format!("expected {} fields, found {}", dim + 1, cells.len()),
                });
            }
            let mut nums = Vec::with_capacity(dim + 1);
            for cell in &cells {
                let v: f64 = cell.trim().parse().map_err(|_| Error::CsvParse {
                    line: lineno,
                    message: format!("non-numeric field `{}`", cell.trim()),
                })?;
                if !v.is_finite() {
                    return Err(Error::CsvParse {
                        line: lineno,
                        message: format!("non-finite field `{}`", cell.trim()),
                    });
                }
                nums.push(v);
            }
            if let Some(&last) = params.last() {
                if nums[0] <= last {
                    return Err(Error::CsvParse {
                        line: lineno,
                        message: format!(
                            "parameter column must be strictly increasing ({} after {})",
                            nums[0], last
                        ),
                    });
                }
            }
            params.push(nums[0]);
            points.push(DVector::from_vec(nums[1..].to_vec()));
        }
        if params.is_empty() {
            return Err(Error::CsvParse {
                line: 2,
                message: "no sample rows".into(),
            });
        }
        Self::new(params, points)
    }

    pub fn from_csv_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(BufReader::new(file))
    }

    /// Write the `t,x1,...,xn` CSV format with round-trip-safe floats.
    pub fn write_csv<W: IoWrite>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 1..=self.dim() {
            write!(w, ",x{i}")?;
        }
        writeln!(w)?;
        for (t, p) in self.params.iter().zip(&self.points) {
            write!(w, "{}", fmt_float(*t))?;
            for x in p.iter() {
                write!(w, ",{}", fmt_float(*x))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }
}

/// 17 significant digits: round-trip safe for every f64.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 && x.is_sign_negative() {
        // Normalize -0 so output is deterministic across code paths.
        return fmt_float(0.0);
    }
    format!("{x:.16e}")
}
