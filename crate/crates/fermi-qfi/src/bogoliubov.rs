//! Bogoliubov-transformation algebra.
//!
//! A transformation c_i^dag = a_j^dag U_ji + a_j V_ji is stored as the
//! matrix pair (U, V). Assembled as the 2M x 2M block matrix
//! W = [[U, V*], [V, U*]] it is unitary; W = exp(i S Xi) defines the
//! antisymmetric generator matrix S, and the canonical (Thouless-style)
//! decomposition T = |U^dag|^{1/2} e^Z e^Y e^X gives vacuum and
//! one-particle overlaps in closed form. `many_body_unitary` realises T
//! exactly on a small Fock space and is the brute-force oracle against
//! which every closed form in this crate is checked.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, FockVector, OccupationState, QuadraticGenerator};
use crate::linalg::{self, expm, logm, CMat, GaussLegendre, RMat};

/// Validity tolerance for the anticommutation-preservation conditions.
pub const MAP_TOL: f64 = 1e-10;

/// |det U| below which the canonical decomposition is refused.
pub const SINGULAR_U_TOL: f64 = 1e-12;

/// The 2M x 2M block swap matrix Xi = [[0, Id], [Id, 0]].
pub fn xi(m: usize) -> CMat {
    let mut out = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        out[(i, m + i)] = Complex64::new(1.0, 0.0);
        out[(m + i, i)] = Complex64::new(1.0, 0.0);
    }
    out
}

/// The (U, V) pair of a Bogoliubov transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    u: CMat,
    v: CMat,
}

/// Residuals of the three validity conditions; all must be below
/// [`MAP_TOL`] for the map to preserve the anticommutation relations.
#[derive(Debug, Clone, Copy)]
pub struct MapDiagnostics {
    /// max |(U^dag U + V^dag V - Id)_ij|
    pub anticommutation: f64,
    /// max |(U^t V + V^t U)_ij|
    pub pairing: f64,
    /// max |(W^dag W - Id)_ij|
    pub w_unitarity: f64,
}

impl MapDiagnostics {
    pub fn max_violation(&self) -> f64 {
        self.anticommutation.max(self.pairing).max(self.w_unitarity)
    }

    pub fn passes(&self) -> bool {
        self.max_violation() < MAP_TOL
    }
}

impl BogoliubovMap {
    pub fn new(u: CMat, v: CMat) -> Result<Self> {
        let m = u.nrows();
        if u.ncols() != m || v.nrows() != m || v.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.nrows().max(u.ncols()),
            });
        }
        Ok(BogoliubovMap { u, v })
    }

    pub fn identity(m: usize) -> Self {
        BogoliubovMap {
            u: linalg::eye(m),
            v: CMat::zeros(m, m),
        }
    }

    /// Basis-change map (V = 0) from a unitary U.
    pub fn basis_change(u: CMat) -> Result<Self> {
        let m = u.nrows();
        Self::new(u, CMat::zeros(m, m))
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &CMat {
        &self.u
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    /// Assemble W = [[U, V*], [V, U*]].
    pub fn w(&self) -> CMat {
        let m = self.modes();
        let mut w = CMat::zeros(2 * m, 2 * m);
        for i in 0..m {
            for j in 0..m {
                w[(i, j)] = self.u[(i, j)];
                w[(i, m + j)] = self.v[(i, j)].conj();
                w[(m + i, j)] = self.v[(i, j)];
                w[(m + i, m + j)] = self.u[(i, j)].conj();
            }
        }
        w
    }

    /// Split a 2M x 2M W back into (U, V), checking the block structure.
    pub fn from_w(w: &CMat) -> Result<Self> {
        let dim = w.nrows();
        if w.ncols() != dim || dim % 2 != 0 || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: w.ncols(),
            });
        }
        let m = dim / 2;
        let u = w.view((0, 0), (m, m)).into_owned();
        let v = w.view((m, 0), (m, m)).into_owned();
        let map = BogoliubovMap { u, v };
        let residual = linalg::max_abs_diff(&map.w(), w);
        if residual > MAP_TOL {
            return Err(Error::InvalidMap {
                residual,
                tol: MAP_TOL,
            });
        }
        Ok(map)
    }

    /// Residuals of the anticommutation-preservation conditions.
    pub fn validate(&self) -> MapDiagnostics {
        let m = self.modes();
        let anticomm = self.u.adjoint() * &self.u + self.v.adjoint() * &self.v;
        let pairing = self.u.transpose() * &self.v + self.v.transpose() * &self.u;
        let w = self.w();
        let wtw = w.adjoint() * &w;
        MapDiagnostics {
            anticommutation: linalg::max_abs_diff(&anticomm, &linalg::eye(m)),
            pairing: linalg::max_abs(&pairing),
            w_unitarity: linalg::max_abs_diff(&wtw, &linalg::eye(2 * m)),
        }
    }

    fn require_valid(&self) -> Result<()> {
        let diag = self.validate();
        if !diag.passes() {
            return Err(Error::InvalidMap {
                residual: diag.max_violation(),
                tol: MAP_TOL,
            });
        }
        Ok(())
    }

    fn det_u(&self) -> Complex64 {
        self.u.clone().lu().determinant()
    }

    /// Composition: the map whose W equals `self.w() * other.w()`.
    pub fn compose(&self, other: &BogoliubovMap) -> Result<BogoliubovMap> {
        if self.modes() != other.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                got: other.modes(),
            });
        }
        BogoliubovMap::from_w(&(self.w() * other.w()))
    }
}

/// The antisymmetric 2M x 2M generator matrix S with W = exp(i S Xi).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    s: CMat,
}

/// Tolerance for the S^t = -S structure check.
pub const GENERATOR_STRUCTURE_TOL: f64 = 1e-10;

impl GeneratorMatrix {
    pub fn new(s: CMat) -> Result<Self> {
        let dim = s.nrows();
        if s.ncols() != dim || dim % 2 != 0 || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.ncols(),
            });
        }
        let violation = linalg::max_abs_diff(&s.transpose(), &-(s.clone()));
        if violation > GENERATOR_STRUCTURE_TOL {
            return Err(Error::NotAntisymmetric {
                violation,
                tol: GENERATOR_STRUCTURE_TOL,
            });
        }
        Ok(GeneratorMatrix { s })
    }

    pub fn modes(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn matrix(&self) -> &CMat {
        &self.s
    }

    /// Upper-right block S^(1) (Hermitian).
    pub fn one_body_block(&self) -> CMat {
        let m = self.modes();
        self.s.view((0, m), (m, m)).into_owned()
    }

    /// Upper-left block S^(2) (antisymmetric).
    pub fn pairing_block(&self) -> CMat {
        let m = self.modes();
        self.s.view((0, 0), (m, m)).into_owned()
    }

    /// True iff iS is real within 1e-10, equivalently [S, Xi] = 0.
    /// In this case the QFI generator reduces to Omega = -i W^dag Wdot.
    pub fn is_commuting_case(&self) -> bool {
        self.s
            .iter()
            .map(|z| (Complex64::new(0.0, 1.0) * z).im.abs())
            .fold(0.0, f64::max)
            < 1e-10
    }

    /// Reconstruct W = exp(i S Xi).
    pub fn to_w(&self) -> CMat {
        let m = self.modes();
        expm(&(&self.s * xi(m)).map(|z| Complex64::new(0.0, 1.0) * z))
    }
}

/// Extract S from W = exp(i S Xi) with the principal matrix logarithm.
///
/// When W has an eigenvalue at -1 the principal branch is undefined and the
/// error asks the caller to split the transformation into two half-steps.
pub fn generator_matrix(map: &BogoliubovMap) -> Result<GeneratorMatrix> {
    map.require_valid()?;
    let m = map.modes();
    let log_w = logm(&map.w())?;
    // S = -i log(W) Xi^{-1}, and Xi is its own inverse.
    let s = (log_w * xi(m)).map(|z| Complex64::new(0.0, -1.0) * z);
    GeneratorMatrix::new(s)
}

/// The factors of T = |U^dag|^{1/2} e^Z e^Y e^X.
#[derive(Debug, Clone)]
pub struct CanonicalFactors {
    /// X = U^{*-1} V (pair annihilation exponent).
    pub x: CMat,
    /// Y solves e^{-Y} = U^dag (one-body exponent).
    pub y: CMat,
    /// Z = V^* U^{*-1} (pair creation exponent), antisymmetric.
    pub z: CMat,
    /// |U^dag|^{1/2}, principal square root of det(U^dag).
    pub det_root: Complex64,
}

/// Canonical decomposition of the many-body unitary behind a map.
pub fn canonical_decomposition(map: &BogoliubovMap) -> Result<CanonicalFactors> {
    map.require_valid()?;
    let det_u = map.det_u();
    if det_u.norm() <= SINGULAR_U_TOL {
        return Err(Error::SingularU {
            det_abs: det_u.norm(),
        });
    }
    let u_conj = map.u.map(|z| z.conj());
    let u_conj_inv = u_conj
        .clone()
        .try_inverse()
        .ok_or(Error::SingularU { det_abs: 0.0 })?;
    let v_conj = map.v.map(|z| z.conj());
    let x = &u_conj_inv * &map.v;
    let z = &v_conj * &u_conj_inv;
    let y = -logm(&map.u.adjoint())?;
    let det_root = det_u.conj().sqrt();
    Ok(CanonicalFactors { x, y, z, det_root })
}

/// Overlap between the two vacua, <vac_a|vac_c> = |U^dag|^{1/2}.
pub fn vacuum_overlap(map: &BogoliubovMap) -> Result<Complex64> {
    map.require_valid()?;
    let det_u = map.det_u();
    if det_u.norm() <= SINGULAR_U_TOL {
        return Err(Error::SingularU {
            det_abs: det_u.norm(),
        });
    }
    Ok(det_u.conj().sqrt())
}

/// One-particle overlap matrix R_kl = <k_a|l_c> = |U^dag|^{1/2} U^{dag -1}.
///
/// The prefactor is the square root of the determinant: expanding
/// R = P U + Q V with P = |U^dag|^{1/2} Id and Q = -Z |U^dag|^{1/2} gives
/// R = |U^dag|^{1/2} (U - Z V), and the Schur complement of the unitary W
/// turns (U - Z V) into U^{dag -1}. The exact Fock-space oracle pins this
/// power down (a 2-mode pairing map has R = Id, not cos(theta) Id).
///
/// For V = 0 and special-orthogonal U this reduces to R = U: the
/// transformation matrix is itself the matrix of one-particle overlaps.
pub fn one_particle_overlaps(map: &BogoliubovMap) -> Result<CMat> {
    map.require_valid()?;
    let det_u = map.det_u();
    if det_u.norm() <= SINGULAR_U_TOL {
        return Err(Error::SingularU {
            det_abs: det_u.norm(),
        });
    }
    let u_dag_inv = map
        .u
        .adjoint()
        .try_inverse()
        .ok_or(Error::SingularU { det_abs: 0.0 })?;
    Ok(u_dag_inv * det_u.conj().sqrt())
}

/// Package (Udot, Vdot) taken at omega -> omega_0 as a quadratic generator.
///
/// Both matrices must be antisymmetric within 1e-10 (the derivative of the
/// anticommutation constraints forces Udot + Udot^t = Vdot + Vdot^t = 0 in
/// that limit); residual asymmetry up to the tolerance is projected out.
pub fn quadratic_generator_from_derivative(
    udot: &RMat,
    vdot: &RMat,
) -> Result<QuadraticGenerator> {
    const TOL: f64 = 1e-10;
    for mat in [udot, vdot] {
        let violation = (mat + mat.transpose()).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if violation > TOL {
            return Err(Error::Domain(format!(
                "derivative matrices must be antisymmetric within {TOL} in the omega -> omega_0 \
                 limit (got max |X + X^t| = {violation:.3e})"
            )));
        }
    }
    let project = |a: &RMat| (a - a.transpose()) * 0.5;
    QuadraticGenerator::new(project(udot), project(vdot))
}

/// Omega-tilde integral, int_0^1 ds exp(-i s S Xi) Sdot exp(i s Xi S),
/// by Gauss–Legendre quadrature of the given order.
///
/// In the commuting case ([S, Xi] = 0) the result contracted with Xi equals
/// -i W^dag Wdot; that identity is the oracle used in the tests.
pub fn omega_tilde_numeric(
    generator: &GeneratorMatrix,
    sdot: &CMat,
    order: usize,
) -> Result<CMat> {
    let dim = 2 * generator.modes();
    if sdot.nrows() != dim || sdot.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: sdot.nrows(),
        });
    }
    const SDOT_TOL: f64 = 1e-8;
    let violation = linalg::max_abs_diff(&sdot.transpose(), &-(sdot.clone()));
    if violation > SDOT_TOL {
        return Err(Error::NotAntisymmetric {
            violation,
            tol: SDOT_TOL,
        });
    }
    let m = generator.modes();
    let s_xi = generator.matrix() * xi(m);
    let xi_s = xi(m) * generator.matrix();
    let rule = GaussLegendre::new(order).on_unit_interval();
    let mut acc = CMat::zeros(dim, dim);
    // fixed summation order for reproducibility
    for (node, weight) in rule.nodes.iter().zip(rule.weights.iter()) {
        let left = expm(&s_xi.map(|z| Complex64::new(0.0, -node) * z));
        let right = expm(&xi_s.map(|z| Complex64::new(0.0, *node) * z));
        acc += (left * sdot * right) * Complex64::new(*weight, 0.0);
    }
    Ok(acc)
}

/// The exact many-body unitary T on the 2^M-dimensional Fock space,
/// assembled from the canonical factors:
/// T = |U^dag|^{1/2} exp(Zhat) exp(Yhat) exp(Xhat) with
/// Xhat = 1/2 sum X_ij a_i a_j, Yhat = sum Y_ij a_i^dag a_j,
/// Zhat = 1/2 sum Z_ij a_i^dag a_j^dag.
pub fn many_body_unitary(map: &BogoliubovMap) -> Result<CMat> {
    let m = map.modes();
    fock::check_dense_modes(m)?;
    let factors = canonical_decomposition(map)?;
    let dim = 1usize << m;

    // 1/2 sum_ij X_ij a_i a_j = sum_{i<j} X_ij a_i a_j for antisymmetric X
    let mut x_hat = CMat::zeros(dim, dim);
    let mut z_hat = CMat::zeros(dim, dim);
    for bits in 0..dim as u32 {
        let state = OccupationState::from_bits(bits, m)?;
        for i in 0..m {
            for j in (i + 1)..m {
                if let Some((sign, image)) =
                    fock::apply_bilinear(state, i, j, fock::BilinearKind::PairAnnihilate)?
                {
                    x_hat[(image.bits() as usize, bits as usize)] +=
                        factors.x[(i, j)] * sign as f64;
                }
                if let Some((sign, image)) =
                    fock::apply_bilinear(state, i, j, fock::BilinearKind::PairCreate)?
                {
                    z_hat[(image.bits() as usize, bits as usize)] +=
                        factors.z[(i, j)] * sign as f64;
                }
            }
        }
    }

    let mut y_hat = CMat::zeros(dim, dim);
    for bits in 0..dim as u32 {
        let state = OccupationState::from_bits(bits, m)?;
        for i in 0..m {
            // diagonal: a_i^dag a_i counts occupation
            if state.is_occupied(i) {
                y_hat[(bits as usize, bits as usize)] += factors.y[(i, i)];
            }
            for j in 0..m {
                if i == j {
                    continue;
                }
                // a_i^dag a_j in normal order for either index order
                let result = if i < j {
                    fock::apply_bilinear(state, i, j, fock::BilinearKind::HopKl)?
                } else {
                    fock::apply_bilinear(state, j, i, fock::BilinearKind::HopLk)?
                };
                if let Some((sign, image)) = result {
                    y_hat[(image.bits() as usize, bits as usize)] +=
                        factors.y[(i, j)] * sign as f64;
                }
            }
        }
    }

    let t = expm(&z_hat) * expm(&y_hat) * expm(&x_hat) * factors.det_root;
    Ok(t)
}

/// Apply the many-body unitary of `map` to a sparse state.
pub fn apply_many_body_unitary(map: &BogoliubovMap, v: &FockVector) -> Result<FockVector> {
    let t = many_body_unitary(map)?;
    fock::apply_dense(&t, v)
}
