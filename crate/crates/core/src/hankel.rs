//! Hankel determinants of reciprocal-arithmetic moment sequences.
//!
//! The moment sequences in play are `mu_n = 1/(alpha n + beta)` and the
//! zero-interleaved variant `beta^-1, 0, (alpha+beta)^-1, 0, ...` that
//! shows up as the Taylor-moment diagonal of window covariance matrices.
//! For the plain sequence the `n x n` Hankel determinant `F_n(alpha, beta)`
//! has a closed product form ([`selberg_f`]); the interleaved determinant
//! `B_n` factors into two plain ones ([`block_decompose`], [`hankel_b`])
//! because odd and even monomials decouple under a checkerboard moment
//! pattern.
//!
//! Determinant ratios of the `(2, 3)` interleaved family are what tie this
//! module to the geometry: the pivots `B_k/B_{k-1}` are the leading
//! coefficients of covariance eigenvalue expansions, and the curvature
//! recovery constants `a_j` ([`curvature_coefficient`]) are ratios of
//! consecutive pivots.  Everything here is exact; [`rational_det`] is the
//! brute-force oracle the closed forms are tested against.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ratpoly::RatPoly;
use crate::rational::{rat, rat_int, Rational};

/// A reciprocal-arithmetic moment sequence, optionally interleaved with
/// zeros at the odd positions.
#[derive(Clone, Debug)]
pub struct MomentSequence {
    alpha: Rational,
    beta: Rational,
    interleaved: bool,
}

impl MomentSequence {
    /// `mu_n = 1/(alpha n + beta)` for n = 0, 1, 2, ...
    pub fn inverse_arithmetic(alpha: Rational, beta: Rational) -> Result<Self> {
        Self::build(alpha, beta, false)
    }

    /// `mu_{2n} = 1/(alpha n + beta)`, `mu_{2n+1} = 0`.
    pub fn interleaved(alpha: Rational, beta: Rational) -> Result<Self> {
        Self::build(alpha, beta, true)
    }

    fn build(alpha: Rational, beta: Rational, interleaved: bool) -> Result<Self> {
        if !alpha.is_positive() || !beta.is_positive() {
            return Err(Error::InvalidParams(format!(
                "moment sequence requires alpha > 0 and beta > 0, got alpha = {}, beta = {}",
                alpha, beta
            )));
        }
        Ok(Self {
            alpha,
            beta,
            interleaved,
        })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn is_interleaved(&self) -> bool {
        self.interleaved
    }

    /// k-th moment (k = 0, 1, 2, ...).
    pub fn moment(&self, k: usize) -> Rational {
        if self.interleaved {
            if k % 2 == 1 {
                return Rational::zero();
            }
            let n = rat_int((k / 2) as i64);
            (&self.alpha * n + &self.beta).recip()
        } else {
            let n = rat_int(k as i64);
            (&self.alpha * n + &self.beta).recip()
        }
    }

    /// The `n x n` Hankel matrix `H[i][j] = mu_{i+j-2}` (1-based i, j).
    pub fn hankel_matrix(&self, n: usize) -> Vec<Vec<Rational>> {
        (0..n)
            .map(|i| (0..n).map(|j| self.moment(i + j)).collect())
            .collect()
    }
}

/// Determinant of an arbitrary exact rational matrix.
///
/// Each row is scaled to integers by its denominator lcm, the integer
/// matrix goes through fraction-free (Bareiss) elimination, and the
/// scalings divide back out.  This is the oracle route: no structure
/// assumed beyond squareness.
pub fn rational_det(matrix: &[Vec<Rational>]) -> Rational {
    let n = matrix.len();
    if n == 0 {
        return Rational::one();
    }
    assert!(
        matrix.iter().all(|row| row.len() == n),
        "determinant requires a square matrix"
    );

    let mut scale = BigInt::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in matrix {
        let lcm = row
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        m.push(row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect());
        scale *= lcm;
    }

    Rational::new(bareiss_det(m), scale)
}

/// Fraction-free elimination on an integer matrix; every intermediate
/// division is exact.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = std::mem::take(&mut m[n - 1][n - 1]);
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Exact `n x n` Hankel determinant of a moment sequence by fraction-free
/// elimination. `n = 0` returns 1 by convention.
pub fn hankel_det_exact(seq: &MomentSequence, n: usize) -> Rational {
    rational_det(&seq.hankel_matrix(n))
}

/// Closed product form of the Hankel determinant of `{1/(alpha n + beta)}`:
///
/// ```text
/// F_n(alpha, beta) = alpha^-n * prod_{k<n} (k!)^2
///                  * prod_{j,k<n} alpha / (alpha (k + j) + beta)
/// ```
///
/// with `F_0 = 1`.
pub fn selberg_f(n: usize, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    if !alpha.is_positive() || !beta.is_positive() {
        return Err(Error::InvalidParams(format!(
            "selberg_f requires alpha > 0 and beta > 0, got alpha = {}, beta = {}",
            alpha, beta
        )));
    }
    let mut out = Rational::one();
    let mut factorial = BigInt::one();
    for k in 0..n {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        out *= Rational::from(&factorial * &factorial);
    }
    for j in 0..n {
        for k in 0..n {
            out *= alpha / (alpha * rat_int((k + j) as i64) + beta);
        }
    }
    out /= pow_rat(alpha, n as i64);
    Ok(out)
}

/// Ratio `F_n F_{n-2} / F_{n-1}^2` in closed form (n >= 2):
///
/// ```text
/// alpha^2 (alpha(n-2)+beta)^2 (n-1)^2
/// -----------------------------------------------------------
/// (alpha(2n-2)+beta) (alpha(2n-3)+beta)^2 (alpha(2n-4)+beta)
/// ```
pub fn f_recursion_ratio(n: usize, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "f_recursion_ratio requires n >= 2, got {n}"
        )));
    }
    let ni = n as i64;
    let lin = |c: i64| alpha * rat_int(c) + beta;
    let num = alpha * alpha * pow_rat(&lin(ni - 2), 2) * rat_int((ni - 1) * (ni - 1));
    let den = lin(2 * ni - 2) * pow_rat(&lin(2 * ni - 3), 2) * lin(2 * ni - 4);
    Ok(num / den)
}

/// Orders `(p, q)` of the two plain-sequence blocks an order-`n`
/// interleaved determinant splits into: `B_{2m} -> (m, m)` and
/// `B_{2m-1} -> (m, m-1)`.
pub fn block_decompose(n: usize) -> (usize, usize) {
    if n % 2 == 0 {
        (n / 2, n / 2)
    } else {
        ((n + 1) / 2, (n - 1) / 2)
    }
}

/// Interleaved Hankel determinant via the block factorization
/// `B_n = F_p(alpha, beta) * F_q(alpha, beta + alpha)` with
/// `(p, q) = block_decompose(n)`.
pub fn hankel_b(n: usize, alpha: &Rational, beta: &Rational) -> Result<Rational> {
    let (p, q) = block_decompose(n);
    let shifted = alpha + beta;
    Ok(selberg_f(p, alpha, beta)? * selberg_f(q, alpha, &shifted)?)
}

/// Closed-form ratio `B_n B_{n-2} / B_{n-1}^2 = (n + (-1)^n)^2 / (4n^2 - 1)`
/// for the interleaved `(2, 3)` family (n >= 2).
pub fn b_recursion_ratio(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "b_recursion_ratio requires n >= 2, got {n}"
        )));
    }
    let ni = n as i64;
    let sign = if n % 2 == 0 { 1 } else { -1 };
    Ok(rat((ni + sign) * (ni + sign), 4 * ni * ni - 1))
}

/// Pivot `p_k = B_k / B_{k-1}` of the interleaved `(2, 3)` family
/// (k >= 1): 1/3, 1/5, 4/175, ...
pub fn pivot(k: usize) -> Result<Rational> {
    if k == 0 {
        return Err(Error::InvalidParams("pivot index starts at 1".into()));
    }
    let two = rat_int(2);
    let three = rat_int(3);
    Ok(hankel_b(k, &two, &three)? / hankel_b(k - 1, &two, &three)?)
}

/// Curvature recovery constant `a_j` (j >= 1), as in
/// `kappa_j^2 = a_j * lim lambda_{j+1} / (lambda_1 lambda_j)`:
///
/// ```text
/// a_j = (i / (i + (-1)^i))^2 * (4 i^2 - 1) / 3   with i = j + 1,
/// ```
///
/// so a_1 = 20/9, a_2 = 105/4, a_3 = 336/25, a_4 = 825/16, a_5 = 1716/49.
pub fn curvature_coefficient(j: usize) -> Result<Rational> {
    if j == 0 {
        return Err(Error::InvalidParams(
            "curvature coefficient index starts at 1".into(),
        ));
    }
    let i = (j + 1) as i64;
    let sign = if i % 2 == 0 { 1 } else { -1 };
    Ok(pow_rat(&rat(i, i + sign), 2) * rat(4 * i * i - 1, 3))
}

/// `a_j` reconstructed from interleaved `(2, 3)` Hankel determinants:
/// `a_j = (j+1)^2 B_1 B_j^2 / (B_{j+1} B_{j-1})`.  Independent of the
/// closed form above; the two must agree for every j.
pub fn curvature_coefficient_via_determinants(j: usize) -> Result<Rational> {
    if j == 0 {
        return Err(Error::InvalidParams(
            "curvature coefficient index starts at 1".into(),
        ));
    }
    let two = rat_int(2);
    let three = rat_int(3);
    let b = |k: usize| hankel_b(k, &two, &three);
    let ji = (j + 1) as i64;
    Ok(rat_int(ji * ji) * b(1)? * pow_rat(&b(j)?, 2) / (b(j + 1)? * b(j - 1)?))
}

fn pow_rat(base: &Rational, exp: i64) -> Rational {
    let mut out = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        out *= base;
    }
    if exp < 0 {
        out.recip()
    } else {
        out
    }
}

/// Determinants and pivots of one moment sequence, computed through the
/// oracle (elimination) route.
#[derive(Clone, Debug)]
pub struct HankelFamily {
    sequence: MomentSequence,
    determinants: Vec<Rational>,
    pivots: Vec<Rational>,
}

impl HankelFamily {
    /// Determinants of orders 1..=max_n and the corresponding pivot
    /// ratios.  A vanishing determinant anywhere in the range is an
    /// error: later pivots would silently divide by zero.
    pub fn compute(sequence: MomentSequence, max_n: usize) -> Result<Self> {
        let mut determinants = Vec::with_capacity(max_n);
        let mut pivots = Vec::with_capacity(max_n);
        let mut prev = Rational::one();
        for n in 1..=max_n {
            let det = hankel_det_exact(&sequence, n);
            if det.is_zero() {
                return Err(Error::DegenerateMoments { order: n });
            }
            pivots.push(&det / &prev);
            determinants.push(det.clone());
            prev = det;
        }
        Ok(Self {
            sequence,
            determinants,
            pivots,
        })
    }

    pub fn sequence(&self) -> &MomentSequence {
        &self.sequence
    }

    /// Determinant of order n (1-based; n <= max_n).
    pub fn determinant(&self, n: usize) -> Option<&Rational> {
        n.checked_sub(1).and_then(|i| self.determinants.get(i))
    }

    /// Pivot `det_n / det_{n-1}` (1-based).
    pub fn pivot(&self, n: usize) -> Option<&Rational> {
        n.checked_sub(1).and_then(|i| self.pivots.get(i))
    }

    pub fn order(&self) -> usize {
        self.determinants.len()
    }
}

/// Monic orthogonal polynomials of a rational moment functional, with the
/// three-term recursion coefficients read off from them.
#[derive(Clone, Debug)]
pub struct OrthoPolySequence {
    polys: Vec<RatPoly>,
    alphas: Vec<Rational>,
    betas: Vec<Rational>,
    norms: Vec<Rational>,
}

impl OrthoPolySequence {
    /// `P_0..P_count` (so `count + 1` polynomials).
    pub fn polys(&self) -> &[RatPoly] {
        &self.polys
    }

    /// Recursion coefficient `alpha_n = <P_n, x P_n> / <P_n, P_n>`
    /// (defined for n < count).
    pub fn alpha(&self, n: usize) -> Option<&Rational> {
        self.alphas.get(n)
    }

    /// Recursion coefficient `beta_n = <P_n, P_n> / <P_{n-1}, P_{n-1}>`
    /// (defined for 1 <= n <= count).
    pub fn beta(&self, n: usize) -> Option<&Rational> {
        n.checked_sub(1).and_then(|i| self.betas.get(i))
    }

    /// Squared norm `<P_n, P_n>`.
    pub fn norm_sq(&self, n: usize) -> Option<&Rational> {
        self.norms.get(n)
    }
}

/// Generate `P_0..P_count` by Gram-Schmidt orthogonalization of the
/// monomials `1, x, x^2, ...` under `<x^i, x^j> = mu_{i+j}`.
///
/// Needs `moments[0..=2*count]`; errors with [`Error::DegenerateMoments`]
/// if some `<P_k, P_k>` vanishes on the way (equivalently, a leading
/// Hankel determinant of the moments is zero), and the recursion
/// coefficients `alpha_n` additionally consume `mu_{2n+1}`.
pub fn ortho_poly_generate(moments: &[Rational], count: usize) -> Result<OrthoPolySequence> {
    if moments.len() < 2 * count + 1 {
        return Err(Error::InvalidParams(format!(
            "need at least {} moments for count = {}, got {}",
            2 * count + 1,
            count,
            moments.len()
        )));
    }
    let inner = |p: &RatPoly, q: &RatPoly| -> Rational {
        let mut acc = Rational::zero();
        for (i, a) in p.coeffs().iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in q.coeffs().iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                acc += a * b * &moments[i + j];
            }
        }
        acc
    };

    let mut polys: Vec<RatPoly> = Vec::with_capacity(count + 1);
    let mut norms: Vec<Rational> = Vec::with_capacity(count + 1);
    for n in 0..=count {
        let mut p = RatPoly::monomial(n);
        for k in 0..n {
            let coeff = inner(&p, &polys[k]) / &norms[k];
            p = &p - &polys[k].scale(&coeff);
        }
        let norm = inner(&p, &p);
        if norm.is_zero() {
            return Err(Error::DegenerateMoments { order: n + 1 });
        }
        polys.push(p);
        norms.push(norm);
    }

    let x = RatPoly::monomial(1);
    let mut alphas = Vec::new();
    for n in 0..count {
        let xp = &x * &polys[n];
        alphas.push(inner(&polys[n], &xp) / &norms[n]);
    }
    let betas = (1..=count).map(|n| &norms[n] / &norms[n - 1]).collect();

    Ok(OrthoPolySequence {
        polys,
        alphas,
        betas,
        norms,
    })
}
