//! Dense complex linear algebra helpers: matrix exponential, principal
//! logarithm and square root, plus Gauss–Legendre and Gauss–Hermite rules.
//!
//! The matrix functions follow Higham's scaling-and-squaring (exp) and
//! inverse scaling-and-squaring (log) constructions. They are written for
//! the well-conditioned, moderate-size matrices this crate produces
//! (2M x 2M generator matrices and 2^M x 2^M Fock-space operators with
//! M <= 12); there is no attempt at blocked or Schur-based evaluation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Promote a real matrix to a complex one.
pub fn complexify(a: &RMat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Largest entry modulus; used for residual checks.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max_ij |a_ij - b_ij|
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Padé(13) with scaling and squaring
/// (Higham 2005, as in Eigen's unsupported MatrixFunctions).
pub fn expm(a: &CMat) -> CMat {
    const THETA_13: f64 = 5.371920351148152;
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        ((norm / THETA_13).log2().ceil() as i32).max(0)
    } else {
        0
    };
    let scaled = a.map(|z| z * 2f64.powi(-squarings));
    let (u, v) = pade13(&scaled);

    // exp ~= (V - U)^{-1} (V + U)
    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular; input matrix is not finite");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let cr = |x: f64| Complex64::new(x, 0.0);
    let n = a.nrows();
    let id = eye(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * cr(B[13]) + &a4 * cr(B[11]) + &a2 * cr(B[9]))
        + &a6 * cr(B[7])
        + &a4 * cr(B[5])
        + &a2 * cr(B[3])
        + &id * cr(B[1]);
    let u = a * u_inner;
    let v = &a6 * (&a6 * cr(B[12]) + &a4 * cr(B[10]) + &a2 * cr(B[8]))
        + &a6 * cr(B[6])
        + &a4 * cr(B[4])
        + &a2 * cr(B[2])
        + &id * cr(B[0]);
    (u, v)
}

/// Principal matrix square root by the Denman–Beavers iteration.
///
/// Fails with [`Error::LogBranchCut`] when the iteration cannot converge,
/// which happens when the spectrum touches the closed negative real axis.
pub fn sqrtm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = eye(n);
    let scale = 1.0 + max_abs(a);
    for _ in 0..60 {
        let y_inv = y.clone().try_inverse().ok_or(Error::LogBranchCut)?;
        let z_inv = z.clone().try_inverse().ok_or(Error::LogBranchCut)?;
        let y_next = (&y + &z_inv) * Complex64::new(0.5, 0.0);
        let z_next = (&z + &y_inv) * Complex64::new(0.5, 0.0);
        let delta = max_abs_diff(&y_next, &y);
        y = y_next;
        z = z_next;
        if !delta.is_finite() {
            return Err(Error::LogBranchCut);
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    let residual = max_abs_diff(&(&y * &y), a);
    // NaN-aware: an eigenvalue on the negative real axis makes the
    // iteration blow up rather than converge.
    if !(residual <= 1e-9 * scale) {
        return Err(Error::LogBranchCut);
    }
    Ok(y)
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots are taken until the iterate is within 0.25 of the identity,
/// then log(I + E) is evaluated with the m-point Gauss–Legendre form of the
/// diagonal Padé approximant, log(A) = int_0^1 E (I + s E)^{-1} ds.
pub fn logm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let id = eye(n);
    let mut x = a.clone();
    let mut k = 0u32;
    while max_abs_diff(&x, &id) > 0.25 {
        if k >= 40 {
            return Err(Error::Numerical(
                "matrix logarithm failed to contract toward the identity".into(),
            ));
        }
        x = sqrtm(&x)?;
        k += 1;
    }
    let e = &x - &id;
    let rule = GaussLegendre::new(12).on_unit_interval();
    let mut acc = CMat::zeros(n, n);
    for (node, weight) in rule.nodes.iter().zip(rule.weights.iter()) {
        let shifted = &id + &e * Complex64::new(*node, 0.0);
        let term = shifted.lu().solve(&e).ok_or_else(|| {
            Error::Numerical("singular resolvent in matrix logarithm".into())
        })?;
        acc += term * Complex64::new(*weight, 0.0);
    }
    Ok(acc * Complex64::new(2f64.powi(k as i32), 0.0))
}

/// A quadrature rule: nodes and matching weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule on [-1, 1], via the Golub–Welsch eigenproblem.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    rule: QuadratureRule,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        // Jacobi matrix for Legendre polynomials: zero diagonal,
        // off-diagonal beta_k = k / sqrt(4k^2 - 1).
        let betas: Vec<f64> = (1..order)
            .map(|k| {
                let kf = k as f64;
                kf / (4.0 * kf * kf - 1.0).sqrt()
            })
            .collect();
        let rule = golub_welsch(&betas, 2.0);
        GaussLegendre { rule }
    }

    /// Rule mapped from [-1, 1] to [0, 1].
    pub fn on_unit_interval(&self) -> QuadratureRule {
        QuadratureRule {
            nodes: self.rule.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: self.rule.weights.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }
}

/// Gauss–Hermite rule for weight exp(-x^2) on the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    rule: QuadratureRule,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        // Jacobi matrix for (physicists') Hermite: beta_k = sqrt(k/2).
        let betas: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let rule = golub_welsch(&betas, std::f64::consts::PI.sqrt());
        GaussHermite { rule }
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }
}

/// Nodes/weights from the symmetric tridiagonal Jacobi matrix with zero
/// diagonal and the given off-diagonal entries; `mu0` is the total weight
/// integral of the measure.
fn golub_welsch(betas: &[f64], mu0: f64) -> QuadratureRule {
    let n = betas.len() + 1;
    let mut jacobi = RMat::zeros(n, n);
    for (k, b) in betas.iter().enumerate() {
        jacobi[(k, k + 1)] = *b;
        jacobi[(k + 1, k)] = *b;
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let weight = mu0 * eig.eigenvectors[(0, i)].powi(2);
            (node, weight)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Orthonormal (physicists') Hermite functions without the Gaussian factor:
/// h_n(x) = H_n(x) / sqrt(2^n n! sqrt(pi)), evaluated up to order `n_max`
/// by the stable three-term recurrence. Returns h_0..h_{n_max}.
pub fn hermite_orthonormal(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let h0 = std::f64::consts::PI.powf(-0.25);
    out.push(h0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * h0);
    for n in 2..=n_max {
        let nf = n as f64;
        let next = x * (2.0 / nf).sqrt() * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMat::zeros(4, 4);
        assert!(max_abs_diff(&expm(&z), &eye(4)) < 1e-15);
    }

    #[test]
    fn expm_matches_scalar_series_on_diagonal_matrix() {
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = Complex64::new(0.3, -0.7);
        a[(1, 1)] = Complex64::new(-2.0, 1.1);
        a[(2, 2)] = Complex64::new(8.5, 0.0); // forces squaring
        let e = expm(&a);
        for i in 0..3 {
            assert!((e[(i, i)] - a[(i, i)].exp()).norm() < 1e-12 * a[(i, i)].exp().norm());
        }
    }

    #[test]
    fn expm_reproduces_rotation_block() {
        // exp(theta * [[0,-1],[1,0]]) = [[cos,-sin],[sin,cos]]
        let theta = 1.234;
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = Complex64::new(-theta, 0.0);
        a[(1, 0)] = Complex64::new(theta, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn logm_inverts_expm() {
        let mut a = CMat::zeros(3, 3);
        let entries = [
            (0, 1, 0.4, -0.2),
            (1, 0, -0.4, -0.2),
            (0, 2, 0.1, 0.3),
            (2, 0, -0.1, 0.3),
            (1, 2, 0.7, 0.0),
            (2, 1, -0.7, 0.0),
        ];
        for (i, j, re, im) in entries {
            a[(i, j)] = Complex64::new(re, im);
        }
        let w = expm(&a);
        let l = logm(&w).unwrap();
        assert!(max_abs_diff(&expm(&l), &w) < 1e-12);
    }

    #[test]
    fn sqrtm_squares_back() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 0)] = Complex64::new(2.0, 0.5);
        a[(0, 1)] = Complex64::new(0.3, 0.0);
        a[(1, 0)] = Complex64::new(0.1, -0.2);
        a[(1, 1)] = Complex64::new(1.5, 0.0);
        let s = sqrtm(&a).unwrap();
        assert!(max_abs_diff(&(&s * &s), &a) < 1e-12);
    }

    #[test]
    fn sqrtm_rejects_negative_axis() {
        let mut a = eye(2);
        a[(0, 0)] = Complex64::new(-1.0, 0.0);
        assert!(sqrtm(&a).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5).on_unit_interval();
        // int_0^1 x^9 dx = 1/10, exact for order 5 (degree <= 9)
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(9))
            .sum();
        assert!((s - 0.1).abs() < 1e-14);
    }

    #[test]
    fn gauss_hermite_moments() {
        let rule = GaussHermite::new(8);
        let m0: f64 = rule.rule().weights.iter().sum();
        let m2: f64 = rule
            .rule()
            .nodes
            .iter()
            .zip(&rule.rule().weights)
            .map(|(x, w)| w * x * x)
            .sum();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((m0 - sqrt_pi).abs() < 1e-13);
        assert!((m2 - sqrt_pi / 2.0).abs() < 1e-13);
    }

    #[test]
    fn hermite_orthonormal_matches_low_orders() {
        let x = 0.37;
        let h = hermite_orthonormal(3, x);
        let pi4 = std::f64::consts::PI.powf(-0.25);
        assert!((h[0] - pi4).abs() < 1e-15);
        assert!((h[1] - pi4 * std::f64::consts::SQRT_2 * x).abs() < 1e-15);
        // H_2 = 4x^2 - 2, normalization 1/sqrt(2^2 2!)
        let expect = pi4 * (4.0 * x * x - 2.0) / (8.0f64).sqrt();
        assert!((h[2] - expect).abs() < 1e-15);
    }
}
