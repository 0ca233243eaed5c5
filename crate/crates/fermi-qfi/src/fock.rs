//! Exact fermionic Fock space for small mode counts.
//!
//! Occupations are packed into a machine word with mode 0 at the least
//! significant bit; the Jordan–Wigner string sign is a population count
//! below (or between) the touched modes. All operations are pure functions
//! on immutable values, so everything here is safe to share across threads.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat, ZERO};

/// Hard cap on the mode count for full-Fock-space work (2^M amplitudes).
pub const MAX_MODES: usize = 24;

/// Amplitudes below this magnitude are dropped after arithmetic.
pub const AMPLITUDE_CUTOFF: f64 = 1e-15;

fn check_modes(modes: usize) -> Result<()> {
    if modes == 0 || modes > MAX_MODES {
        return Err(Error::Capacity {
            what: "fermionic mode count",
            needed: modes,
            limit: MAX_MODES,
        });
    }
    Ok(())
}

/// An M-mode occupation-number basis ket |n_0, n_1, ..., n_{M-1}>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationState {
    bits: u32,
    modes: u8,
}

impl OccupationState {
    /// Build from packed bits; mode 0 is the least significant bit.
    pub fn from_bits(bits: u32, modes: usize) -> Result<Self> {
        check_modes(modes)?;
        if modes < 32 && bits >> modes != 0 {
            return Err(Error::Domain(format!(
                "occupation bits {bits:#b} exceed mode count {modes}"
            )));
        }
        Ok(OccupationState {
            bits,
            modes: modes as u8,
        })
    }

    /// Build from explicit occupations (each 0 or 1).
    pub fn from_occupations(occ: &[u8]) -> Result<Self> {
        check_modes(occ.len())?;
        let mut bits = 0u32;
        for (k, &n) in occ.iter().enumerate() {
            match n {
                0 => {}
                1 => bits |= 1 << k,
                _ => {
                    return Err(Error::Domain(format!(
                        "occupation n_{k} = {n} is not 0 or 1"
                    )))
                }
            }
        }
        Ok(OccupationState {
            bits,
            modes: occ.len() as u8,
        })
    }

    /// The empty state |0...0>.
    pub fn vacuum(modes: usize) -> Result<Self> {
        check_modes(modes)?;
        Ok(OccupationState {
            bits: 0,
            modes: modes as u8,
        })
    }

    /// One particle in mode `k`, all other modes empty.
    pub fn single_particle(modes: usize, k: usize) -> Result<Self> {
        let mut s = Self::vacuum(modes)?;
        s.check_mode(k)?;
        s.bits = 1 << k;
        Ok(s)
    }

    pub fn modes(&self) -> usize {
        self.modes as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Occupation of mode `k` (0 or 1).
    pub fn occupation(&self, k: usize) -> u8 {
        ((self.bits >> k) & 1) as u8
    }

    pub fn is_occupied(&self, k: usize) -> bool {
        self.occupation(k) == 1
    }

    /// Total particle number N = sum_k n_k.
    pub fn particle_count(&self) -> u32 {
        self.bits.count_ones()
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.modes() {
            return Err(Error::Domain(format!(
                "mode index {k} out of range for M = {}",
                self.modes()
            )));
        }
        Ok(())
    }

    /// State with bit `k` flipped.
    fn flipped(&self, k: usize) -> Self {
        OccupationState {
            bits: self.bits ^ (1 << k),
            modes: self.modes,
        }
    }

    /// Jordan–Wigner sign (-1)^{sum_{j<k} n_j}.
    fn string_sign_below(&self, k: usize) -> i32 {
        let mask = (1u32 << k) - 1;
        if (self.bits & mask).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Jordan–Wigner sign (-1)^{sum_{j=k}^{l-1} n_j} common to the four
    /// bilinears acting on a mode pair k < l.
    pub fn string_sign(&self, k: usize, l: usize) -> i32 {
        let mask = (1u32 << l) - (1u32 << k);
        if (self.bits & mask).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for k in 0..self.modes() {
            write!(f, "{}", self.occupation(k))?;
        }
        write!(f, ">")
    }
}

/// Enumerate the occupation basis in ascending binary order.
///
/// With `particle_number = None` all 2^M states are returned; otherwise only
/// the C(M, N) states of the N-particle sector.
pub fn enumerate_basis(
    modes: usize,
    particle_number: Option<u32>,
) -> Result<Vec<OccupationState>> {
    check_modes(modes)?;
    if let Some(n) = particle_number {
        if n as usize > modes {
            return Err(Error::Domain(format!(
                "particle number {n} exceeds mode count {modes}"
            )));
        }
    }
    let total = 1u32 << modes;
    let mut out = Vec::new();
    for bits in 0..total {
        if let Some(n) = particle_number {
            if bits.count_ones() != n {
                continue;
            }
        }
        out.push(OccupationState {
            bits,
            modes: modes as u8,
        });
    }
    Ok(out)
}

/// A single ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Apply a_k^dag or a_k to a basis ket.
///
/// Returns `None` when the Pauli rule forbids the action; otherwise the
/// Jordan–Wigner sign (-1)^{sum_{j<k} n_j} and the flipped ket.
pub fn apply_ladder(
    state: OccupationState,
    k: usize,
    kind: LadderKind,
) -> Result<Option<(i32, OccupationState)>> {
    state.check_mode(k)?;
    let allowed = match kind {
        LadderKind::Create => !state.is_occupied(k),
        LadderKind::Annihilate => state.is_occupied(k),
    };
    if !allowed {
        return Ok(None);
    }
    Ok(Some((state.string_sign_below(k), state.flipped(k))))
}

/// The four normal-ordered bilinears on a mode pair k < l.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearKind {
    /// a_k^dag a_l
    HopKl,
    /// a_l^dag a_k
    HopLk,
    /// a_k^dag a_l^dag
    PairCreate,
    /// a_k a_l
    PairAnnihilate,
}

/// Apply one of the bilinears to a basis ket, with the string sign
/// (-1)^{sum_{j=k}^{l-1} n_j}. `None` when the occupancy deltas fail.
pub fn apply_bilinear(
    state: OccupationState,
    k: usize,
    l: usize,
    kind: BilinearKind,
) -> Result<Option<(i32, OccupationState)>> {
    if k >= l {
        return Err(Error::Domain(format!(
            "bilinear mode indices must satisfy k < l, got k = {k}, l = {l}"
        )));
    }
    state.check_mode(l)?;
    let (nk, nl) = (state.occupation(k), state.occupation(l));
    let (allowed, extra_sign) = match kind {
        BilinearKind::HopKl => (nk == 0 && nl == 1, 1),
        // a_l^dag a_k carries an extra minus sign relative to the common string
        BilinearKind::HopLk => (nk == 1 && nl == 0, -1),
        BilinearKind::PairCreate => (nk == 0 && nl == 0, 1),
        BilinearKind::PairAnnihilate => (nk == 1 && nl == 1, 1),
    };
    if !allowed {
        return Ok(None);
    }
    let sign = extra_sign * state.string_sign(k, l);
    Ok(Some((sign, state.flipped(k).flipped(l))))
}

/// A sparse complex vector over occupation states: a pure state |psi>.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    modes: u8,
    amps: BTreeMap<u32, Complex64>,
}

impl FockVector {
    pub fn zero(modes: usize) -> Result<Self> {
        check_modes(modes)?;
        Ok(FockVector {
            modes: modes as u8,
            amps: BTreeMap::new(),
        })
    }

    /// The basis ket |n> with unit amplitude.
    pub fn basis_state(state: OccupationState) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(state.bits, Complex64::new(1.0, 0.0));
        FockVector {
            modes: state.modes,
            amps,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes as usize
    }

    pub fn amplitude(&self, state: OccupationState) -> Complex64 {
        debug_assert_eq!(state.modes, self.modes);
        self.amps.get(&state.bits).copied().unwrap_or(ZERO)
    }

    /// Add `value` to the amplitude of `state`, pruning tiny results.
    pub fn add_amplitude(&mut self, state: OccupationState, value: Complex64) {
        debug_assert_eq!(state.modes, self.modes);
        let entry = self.amps.entry(state.bits).or_insert(ZERO);
        *entry += value;
        if entry.norm() < AMPLITUDE_CUTOFF {
            self.amps.remove(&state.bits);
        }
    }

    pub fn set_amplitude(&mut self, state: OccupationState, value: Complex64) {
        debug_assert_eq!(state.modes, self.modes);
        if value.norm() < AMPLITUDE_CUTOFF {
            self.amps.remove(&state.bits);
        } else {
            self.amps.insert(state.bits, value);
        }
    }

    /// Deterministic iteration in ascending binary order.
    pub fn iter(&self) -> impl Iterator<Item = (OccupationState, Complex64)> + '_ {
        let modes = self.modes;
        self.amps
            .iter()
            .map(move |(&bits, &amp)| (OccupationState { bits, modes }, amp))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Error unless | |psi|^2 - 1 | <= tol.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let n2 = self.norm_sq();
        if (n2 - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm_sq: n2, tol });
        }
        Ok(())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = FockVector {
            modes: self.modes,
            amps: BTreeMap::new(),
        };
        for (&bits, &a) in &self.amps {
            let v = a * factor;
            if v.norm() >= AMPLITUDE_CUTOFF {
                out.amps.insert(bits, v);
            }
        }
        out
    }

    /// self += factor * other
    pub fn add_scaled(&mut self, other: &FockVector, factor: Complex64) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                got: other.modes(),
            });
        }
        for (state, amp) in other.iter() {
            self.add_amplitude(state, amp * factor);
        }
        Ok(())
    }

    /// Dense amplitude column in ascending binary order (2^M entries).
    pub fn to_dense(&self) -> crate::linalg::CVec {
        let dim = 1usize << self.modes();
        let mut v = crate::linalg::CVec::zeros(dim);
        for (&bits, &amp) in &self.amps {
            v[bits as usize] = amp;
        }
        v
    }

    pub fn from_dense(modes: usize, v: &crate::linalg::CVec) -> Result<Self> {
        check_modes(modes)?;
        if v.len() != 1 << modes {
            return Err(Error::DimensionMismatch {
                expected: 1 << modes,
                got: v.len(),
            });
        }
        let mut out = FockVector::zero(modes)?;
        for (bits, amp) in v.iter().enumerate() {
            if amp.norm() >= AMPLITUDE_CUTOFF {
                out.amps.insert(bits as u32, *amp);
            }
        }
        Ok(out)
    }
}

/// <u|v> with conjugation on `u`.
pub fn inner_product(u: &FockVector, v: &FockVector) -> Result<Complex64> {
    if u.modes != v.modes {
        return Err(Error::DimensionMismatch {
            expected: u.modes(),
            got: v.modes(),
        });
    }
    // Walk the smaller support.
    let (small, large) = if u.amps.len() <= v.amps.len() {
        (u, v)
    } else {
        (v, u)
    };
    let mut acc = ZERO;
    for (&bits, _) in &small.amps {
        let a = u.amps.get(&bits).copied().unwrap_or(ZERO);
        let b = v.amps.get(&bits).copied().unwrap_or(ZERO);
        acc += a.conj() * b;
    }
    let _ = large;
    Ok(acc)
}

/// A Hermitian quadratic generator in the real-antisymmetric regime:
/// one-body matrix D^(1) (the Udot-like block) and pairing matrix D^(0)
/// (the Vdot-like block), both real and antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGenerator {
    one_body: RMat,
    pairing: RMat,
}

/// Antisymmetry tolerance enforced on generator construction.
pub const GENERATOR_ANTISYMMETRY_TOL: f64 = 1e-12;

fn antisymmetry_violation(a: &RMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] + a[(j, i)]).abs());
        }
    }
    worst
}

impl QuadraticGenerator {
    /// Build from real matrices, enforcing X = -X^t within 1e-12.
    ///
    /// Realness plus antisymmetry is what makes the induced operator
    /// Hermitian; complex entries would silently break every variance
    /// downstream, so they are rejected at the door.
    pub fn new(one_body: RMat, pairing: RMat) -> Result<Self> {
        let m = one_body.nrows();
        if one_body.ncols() != m || pairing.nrows() != m || pairing.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: pairing.nrows().max(one_body.ncols()),
            });
        }
        check_modes(m)?;
        for (name, mat) in [("one-body", &one_body), ("pairing", &pairing)] {
            let violation = antisymmetry_violation(mat);
            if violation > GENERATOR_ANTISYMMETRY_TOL {
                let _ = name;
                return Err(Error::NotAntisymmetric {
                    violation,
                    tol: GENERATOR_ANTISYMMETRY_TOL,
                });
            }
        }
        Ok(QuadraticGenerator { one_body, pairing })
    }

    pub fn zero(modes: usize) -> Result<Self> {
        check_modes(modes)?;
        Ok(QuadraticGenerator {
            one_body: RMat::zeros(modes, modes),
            pairing: RMat::zeros(modes, modes),
        })
    }

    pub fn modes(&self) -> usize {
        self.one_body.nrows()
    }

    /// D^(1): coefficient used when n_k and n_l differ.
    pub fn one_body(&self) -> &RMat {
        &self.one_body
    }

    /// D^(0): coefficient used when n_k = n_l.
    pub fn pairing(&self) -> &RMat {
        &self.pairing
    }

    /// D^{(|n_k - n_l|)}_{kl} for a given ket.
    fn coefficient(&self, state: &OccupationState, k: usize, l: usize) -> f64 {
        if state.occupation(k) == state.occupation(l) {
            self.pairing[(k, l)]
        } else {
            self.one_body[(k, l)]
        }
    }
}

/// Apply the generator H to |v>: for every pair k < l the ket with bits k
/// and l flipped is added with coefficient
/// -i * (-1)^{sum_{j=k}^{l-1} n_j} * D^{(|n_k-n_l|)}_{kl}.
pub fn apply_quadratic_generator(
    gen: &QuadraticGenerator,
    v: &FockVector,
) -> Result<FockVector> {
    if gen.modes() != v.modes() {
        return Err(Error::DimensionMismatch {
            expected: gen.modes(),
            got: v.modes(),
        });
    }
    let m = gen.modes();
    let mut out = FockVector::zero(m)?;
    for (state, amp) in v.iter() {
        for k in 0..m {
            for l in (k + 1)..m {
                let d = gen.coefficient(&state, k, l);
                if d == 0.0 {
                    continue;
                }
                let sign = state.string_sign(k, l) as f64;
                let coeff = Complex64::new(0.0, -1.0) * sign * d;
                out.add_amplitude(state.flipped(k).flipped(l), amp * coeff);
            }
        }
    }
    Ok(out)
}

/// Tolerance on the imaginary residue of an expectation value.
pub const HERMITICITY_RESIDUE_TOL: f64 = 1e-9;

/// Normalization tolerance for variance inputs.
pub const VARIANCE_NORM_TOL: f64 = 1e-9;

/// var(H, |psi>) = <psi|H^2|psi> - <psi|H|psi>^2 for a Hermitian action.
///
/// The quadratic term is evaluated as <H psi|H psi>, which equals
/// <psi|H^2|psi> exactly when H is Hermitian; a large imaginary part of
/// <psi|H|psi> signals a non-Hermitian operator and is reported as an error.
pub fn variance<F>(op_apply: F, v: &FockVector) -> Result<f64>
where
    F: Fn(&FockVector) -> Result<FockVector>,
{
    v.check_normalized(VARIANCE_NORM_TOL)?;
    let hv = op_apply(v)?;
    let mean = inner_product(v, &hv)?;
    if mean.im.abs() > HERMITICITY_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            residue: mean.im.abs(),
            tol: HERMITICITY_RESIDUE_TOL,
        });
    }
    let second = inner_product(&hv, &hv)?.re;
    Ok(second - mean.re * mean.re)
}

// ---------------------------------------------------------------------------
// Dense operators, used by the Bogoliubov oracle and by tests.
// ---------------------------------------------------------------------------

/// Cap for dense 2^M x 2^M operator construction.
pub const MAX_DENSE_MODES: usize = 12;

pub fn check_dense_modes(modes: usize) -> Result<()> {
    if modes == 0 || modes > MAX_DENSE_MODES {
        return Err(Error::Capacity {
            what: "dense Fock-space operator",
            needed: modes,
            limit: MAX_DENSE_MODES,
        });
    }
    Ok(())
}

/// Dense matrix of a single ladder operator in the binary-ordered basis.
pub fn ladder_matrix(modes: usize, k: usize, kind: LadderKind) -> Result<CMat> {
    check_dense_modes(modes)?;
    let dim = 1usize << modes;
    let mut mat = CMat::zeros(dim, dim);
    for bits in 0..dim as u32 {
        let state = OccupationState {
            bits,
            modes: modes as u8,
        };
        if let Some((sign, image)) = apply_ladder(state, k, kind)? {
            mat[(image.bits as usize, bits as usize)] = Complex64::new(sign as f64, 0.0);
        }
    }
    Ok(mat)
}

/// Dense matrix of the quadratic generator action.
pub fn quadratic_generator_matrix(gen: &QuadraticGenerator) -> Result<CMat> {
    check_dense_modes(gen.modes())?;
    let dim = 1usize << gen.modes();
    let mut mat = CMat::zeros(dim, dim);
    for bits in 0..dim as u32 {
        let state = OccupationState {
            bits,
            modes: gen.modes() as u8,
        };
        let image = apply_quadratic_generator(gen, &FockVector::basis_state(state))?;
        for (st, amp) in image.iter() {
            mat[(st.bits as usize, bits as usize)] = amp;
        }
    }
    Ok(mat)
}

/// Dense matrix from a sparse operator action (column by column).
pub fn action_matrix<F>(modes: usize, op_apply: F) -> Result<CMat>
where
    F: Fn(&FockVector) -> Result<FockVector>,
{
    check_dense_modes(modes)?;
    let dim = 1usize << modes;
    let mut mat = CMat::zeros(dim, dim);
    for bits in 0..dim as u32 {
        let state = OccupationState {
            bits,
            modes: modes as u8,
        };
        let image = op_apply(&FockVector::basis_state(state))?;
        for (st, amp) in image.iter() {
            mat[(st.bits as usize, bits as usize)] = amp;
        }
    }
    Ok(mat)
}

/// Apply a dense Fock-space matrix to a sparse vector.
pub fn apply_dense(mat: &CMat, v: &FockVector) -> Result<FockVector> {
    let dim = 1usize << v.modes();
    if mat.nrows() != dim || mat.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: mat.nrows(),
        });
    }
    let dense = v.to_dense();
    let out = mat * dense;
    FockVector::from_dense(v.modes(), &out)
}

/// Real antisymmetric matrix builder used in tests and the verify suites.
pub fn random_antisymmetric<R: rand::Rng>(rng: &mut R, m: usize, scale: f64) -> RMat {
    let mut a = RMat::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let x: f64 = rng.random_range(-scale..scale);
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    a
}
