//! Quantum Fisher information estimators for pure fermionic states.
//!
//! Several routes to the same number are provided on purpose: the
//! pure-state formula, a Bures finite-difference estimator, the
//! single-unitary variance form, the two-unitary chain rule, basis-state
//! closed forms, and the compact Hamiltonian-evolution form. Where two
//! estimators overlap they must agree, and the tests hold them to that.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    apply_quadratic_generator, inner_product, variance, FockVector, OccupationState,
    QuadraticGenerator,
};
use crate::linalg::CMat;

/// Relative step for finite-difference state derivatives.
pub const FD_DERIVATIVE_STEP: f64 = 1e-5;

/// Default relative step for the Bures finite-difference estimator.
pub const BURES_DEFAULT_STEP: f64 = 1e-4;

/// Normalization tolerance on estimator inputs.
pub const STATE_NORM_TOL: f64 = 1e-9;

/// Negative-QFI clip threshold: values in [-1e-9, 0) are rounded to zero,
/// anything below signals a broken input.
pub const QFI_CLIP: f64 = 1e-9;

type StateFn<'a> = Box<dyn Fn(f64) -> Result<FockVector> + Send + Sync + 'a>;

/// A parameter-dependent pure state omega -> |psi_omega>.
pub struct ParametrizedState<'a> {
    at: StateFn<'a>,
    derivative: Option<StateFn<'a>>,
}

impl<'a> ParametrizedState<'a> {
    pub fn new<F>(at: F) -> Self
    where
        F: Fn(f64) -> Result<FockVector> + Send + Sync + 'a,
    {
        ParametrizedState {
            at: Box::new(at),
            derivative: None,
        }
    }

    pub fn with_derivative<F, G>(at: F, derivative: G) -> Self
    where
        F: Fn(f64) -> Result<FockVector> + Send + Sync + 'a,
        G: Fn(f64) -> Result<FockVector> + Send + Sync + 'a,
    {
        ParametrizedState {
            at: Box::new(at),
            derivative: Some(Box::new(derivative)),
        }
    }

    pub fn at(&self, omega: f64) -> Result<FockVector> {
        (self.at)(omega)
    }

    /// |psi_omega'>: analytic when supplied, otherwise central finite
    /// differences with one Richardson step.
    pub fn derivative_at(&self, omega: f64) -> Result<FockVector> {
        if let Some(d) = &self.derivative {
            return d(omega);
        }
        let h = FD_DERIVATIVE_STEP * omega.abs().max(1.0);
        let coarse = self.central_difference(omega, h)?;
        let fine = self.central_difference(omega, h / 2.0)?;
        // Richardson: (4 D_{h/2} - D_h) / 3
        let mut out = fine.scaled(Complex64::new(4.0 / 3.0, 0.0));
        out.add_scaled(&coarse, Complex64::new(-1.0 / 3.0, 0.0))?;
        Ok(out)
    }

    fn central_difference(&self, omega: f64, h: f64) -> Result<FockVector> {
        let plus = self.at(omega + h)?;
        let minus = self.at(omega - h)?;
        let mut out = plus.scaled(Complex64::new(0.5 / h, 0.0));
        out.add_scaled(&minus, Complex64::new(-0.5 / h, 0.0))?;
        Ok(out)
    }
}

/// Pure-state QFI, I = 4 (<psidot|psidot> + <psidot|psi>^2).
///
/// For a normalized state <psidot|psi> is purely imaginary, so the square
/// equals -|<psidot|psi>|^2; the estimator is evaluated in that manifestly
/// real form. Tiny negative results (rounding) are clipped to zero.
pub fn qfi_pure(psi: &FockVector, psidot: &FockVector) -> Result<f64> {
    psi.check_normalized(STATE_NORM_TOL)?;
    let dd = inner_product(psidot, psidot)?.re;
    let dp = inner_product(psidot, psi)?;
    let value = 4.0 * (dd - dp.norm_sqr());
    if value < -QFI_CLIP {
        return Err(Error::Numerical(format!(
            "pure-state QFI evaluated to {value}, below the -{QFI_CLIP} clip"
        )));
    }
    Ok(value.max(0.0))
}

/// Bures finite-difference QFI: 4 d_B^2 / delta^2 in the small-delta limit,
/// from the fidelity |<psi(omega)|psi(omega +- delta)>| on a symmetric
/// three-point stencil, Richardson-extrapolated over delta and delta/2.
///
/// Returns (estimate, error estimate).
pub fn qfi_bures_fd(
    state: &ParametrizedState<'_>,
    omega: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    if delta <= 0.0 {
        return Err(Error::Domain(format!(
            "Bures finite-difference step must be positive, got {delta}"
        )));
    }
    let center = state.at(omega)?;
    center.check_normalized(STATE_NORM_TOL)?;

    let estimate_at = |d: f64| -> Result<f64> {
        let plus = state.at(omega + d)?;
        let minus = state.at(omega - d)?;
        plus.check_normalized(STATE_NORM_TOL)?;
        minus.check_normalized(STATE_NORM_TOL)?;
        let f_plus = inner_product(&center, &plus)?.norm();
        let f_minus = inner_product(&center, &minus)?.norm();
        // d_B^2 = 2 (1 - F); each side contributes (I/4) d^2
        let db2_sum = 2.0 * (1.0 - f_plus) + 2.0 * (1.0 - f_minus);
        Ok(2.0 * db2_sum / (d * d))
    };

    let coarse = estimate_at(delta)?;
    let fine = estimate_at(delta / 2.0)?;
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    let error_estimate = (fine - coarse).abs() / 3.0;
    Ok((extrapolated.max(0.0), error_estimate))
}

/// QFI for a single parameter-dependent unitary acting on a fixed state:
/// I = 4 var(H, |psi_0>) with H = -i T^dag Tdot.
pub fn qfi_unitary_variance<F>(gen_apply: F, psi0: &FockVector) -> Result<f64>
where
    F: Fn(&FockVector) -> Result<FockVector>,
{
    Ok(4.0 * variance(gen_apply, psi0)?)
}

/// Chain rule for two consecutive unitaries, |psi> = U T |psi_0>:
/// I/4 = var(H, psi0) + var(U, phi) - 2 Im<phidot|U|phi> - 2 <U>_phi <H>_psi0,
/// where phi = T psi0 and phidot = Tdot psi0 are supplied by the caller.
pub fn qfi_chain<FH, FU>(
    gen_h: FH,
    gen_u: FU,
    psi0: &FockVector,
    phi: &FockVector,
    phidot: &FockVector,
) -> Result<f64>
where
    FH: Fn(&FockVector) -> Result<FockVector>,
    FU: Fn(&FockVector) -> Result<FockVector>,
{
    psi0.check_normalized(STATE_NORM_TOL)?;
    phi.check_normalized(STATE_NORM_TOL)?;
    let var_h = variance(&gen_h, psi0)?;
    let var_u = variance(&gen_u, phi)?;
    let u_phi = gen_u(phi)?;
    let cross = inner_product(phidot, &u_phi)?.im;
    let mean_u = inner_product(phi, &u_phi)?.re;
    let h_psi0 = gen_h(psi0)?;
    let mean_h = inner_product(psi0, &h_psi0)?.re;
    Ok(4.0 * (var_h + var_u - 2.0 * cross - 2.0 * mean_u * mean_h))
}

/// Closed-form QFI of a parameter-dependent basis state |n_omega>:
/// I = 4 sum_{k<l} |D^{(|n_k - n_l|)}_{kl}|^2, with D^(1) the one-body
/// (Udot) block and D^(0) the pairing (Vdot) block.
pub fn qfi_basis_state(state: &OccupationState, gen: &QuadraticGenerator) -> Result<f64> {
    if gen.modes() != state.modes() {
        return Err(Error::DimensionMismatch {
            expected: gen.modes(),
            got: state.modes(),
        });
    }
    let m = state.modes();
    let mut acc = 0.0;
    for k in 0..m {
        for l in (k + 1)..m {
            let d = if state.occupation(k) == state.occupation(l) {
                gen.pairing()[(k, l)]
            } else {
                gen.one_body()[(k, l)]
            };
            acc += d * d;
        }
    }
    Ok(4.0 * acc)
}

/// One term of a Hamiltonian-evolution spec: an omega-independent amplitude
/// psi_n together with E_n(omega_0) and its omega-derivative.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionEntry {
    pub amplitude: Complex64,
    pub energy: f64,
    pub energy_dot: f64,
}

/// A state evolving under H_omega = sum_k eps_k(omega) n_k for time t,
/// expanded over the omega_0 occupation basis.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    modes: usize,
    time: f64,
    entries: BTreeMap<u32, EvolutionEntry>,
}

impl EvolutionSpec {
    pub fn new(
        modes: usize,
        time: f64,
        terms: Vec<(OccupationState, EvolutionEntry)>,
    ) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut norm_sq = 0.0;
        for (state, entry) in terms {
            if state.modes() != modes {
                return Err(Error::DimensionMismatch {
                    expected: modes,
                    got: state.modes(),
                });
            }
            norm_sq += entry.amplitude.norm_sqr();
            entries.insert(state.bits(), entry);
        }
        if (norm_sq - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sq,
                tol: STATE_NORM_TOL,
            });
        }
        Ok(EvolutionSpec {
            modes,
            time,
            entries,
        })
    }

    /// Build from single-particle energies: E_n = sum_k eps_k n_k and
    /// Edot_n = sum_k epsdot_k n_k, guaranteeing additivity by construction.
    pub fn from_single_particle(
        modes: usize,
        time: f64,
        single_particle: &[(f64, f64)],
        amplitudes: &[(OccupationState, Complex64)],
    ) -> Result<Self> {
        if single_particle.len() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                got: single_particle.len(),
            });
        }
        let terms = amplitudes
            .iter()
            .map(|(state, amp)| {
                let mut energy = 0.0;
                let mut energy_dot = 0.0;
                for k in 0..modes {
                    if state.is_occupied(k) {
                        energy += single_particle[k].0;
                        energy_dot += single_particle[k].1;
                    }
                }
                (
                    *state,
                    EvolutionEntry {
                        amplitude: *amp,
                        energy,
                        energy_dot,
                    },
                )
            })
            .collect();
        Self::new(modes, time, terms)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Time-evolved coefficient psi_n(omega, t) = psi_n exp(-i E_n t).
    fn evolved_amplitude(&self, bits: u32) -> Complex64 {
        match self.entries.get(&bits) {
            Some(e) => e.amplitude * (Complex64::new(0.0, -e.energy * self.time)).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// |phi_omega> = sum_n psi_n e^{-i E_n t} |n>_{omega_0}.
    pub fn phi_omega(&self) -> Result<FockVector> {
        let mut out = FockVector::zero(self.modes)?;
        for (&bits, _) in &self.entries {
            let state = OccupationState::from_bits(bits, self.modes)?;
            out.set_amplitude(state, self.evolved_amplitude(bits));
        }
        Ok(out)
    }

    /// Apply the diagonal operator Edot * t to a vector supported on the
    /// spec's basis states.
    pub fn apply_energy_dot_t(&self, v: &FockVector) -> Result<FockVector> {
        if v.modes() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: v.modes(),
            });
        }
        let mut out = FockVector::zero(self.modes)?;
        for (state, amp) in v.iter() {
            let entry = self.entries.get(&state.bits()).ok_or_else(|| {
                Error::Domain(format!(
                    "state {state} has no energy data in the evolution spec"
                ))
            })?;
            out.add_amplitude(state, amp * (entry.energy_dot * self.time));
        }
        Ok(out)
    }
}

/// Compact QFI for a basis change followed by Hamiltonian evolution:
/// I = 4 var(Edot t - H, |phi_omega>), evaluated through the Fock-space
/// operator machinery. `general_state_variance` reaches the same number
/// through the explicit coefficient sums and serves as its cross-check.
pub fn qfi_hamiltonian_evolution(
    spec: &EvolutionSpec,
    gen: &QuadraticGenerator,
) -> Result<f64> {
    if gen.modes() != spec.modes() {
        return Err(Error::DimensionMismatch {
            expected: spec.modes(),
            got: gen.modes(),
        });
    }
    let phi = spec.phi_omega()?;
    let op = |v: &FockVector| -> Result<FockVector> {
        let mut out = spec.apply_energy_dot_t(v)?;
        let hv = apply_quadratic_generator(gen, v)?;
        out.add_scaled(&hv, Complex64::new(-1.0, 0.0))?;
        Ok(out)
    };
    Ok(4.0 * variance(op, &phi)?)
}

/// var(Edot t - H, phi_omega) from the explicit coefficient construction:
/// (Edot t - H)|phi> = sum_n (Edot_n t psi_n(omega,t) - h_n)|n> with
/// h_n = i sum_{k<l} (-1)^{string} D^{(|n_k-n_l|)}_{kl} psi_{nbar^{k,l}}(omega,t).
pub fn general_state_variance(
    spec: &EvolutionSpec,
    gen: &QuadraticGenerator,
) -> Result<f64> {
    if gen.modes() != spec.modes() {
        return Err(Error::DimensionMismatch {
            expected: spec.modes(),
            got: gen.modes(),
        });
    }
    let m = spec.modes();

    // support of phi plus everything one generator application can reach
    let mut support: BTreeSet<u32> = spec.entries.keys().copied().collect();
    let mut reached = BTreeSet::new();
    for &bits in &support {
        for k in 0..m {
            for l in (k + 1)..m {
                reached.insert(bits ^ (1 << k) ^ (1 << l));
            }
        }
    }
    support.extend(reached);

    let h_coefficient = |bits: u32| -> Result<Complex64> {
        let state = OccupationState::from_bits(bits, m)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            for l in (k + 1)..m {
                let d = if state.occupation(k) == state.occupation(l) {
                    gen.pairing()[(k, l)]
                } else {
                    gen.one_body()[(k, l)]
                };
                if d == 0.0 {
                    continue;
                }
                let sign = state.string_sign(k, l) as f64;
                let source = spec.evolved_amplitude(bits ^ (1 << k) ^ (1 << l));
                acc += Complex64::new(0.0, 1.0) * sign * d * source;
            }
        }
        Ok(acc)
    };

    let mut second = 0.0;
    let mut mean = Complex64::new(0.0, 0.0);
    for &bits in &support {
        let h_n = h_coefficient(bits)?;
        let psi_n = self_amplitude(spec, bits);
        let edot_t = spec
            .entries
            .get(&bits)
            .map(|e| e.energy_dot * spec.time)
            .unwrap_or(0.0);
        let value = psi_n * edot_t - h_n;
        second += value.norm_sqr();
        mean += psi_n.conj() * value;
    }
    if mean.im.abs() > crate::fock::HERMITICITY_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            residue: mean.im.abs(),
            tol: crate::fock::HERMITICITY_RESIDUE_TOL,
        });
    }
    Ok(second - mean.re * mean.re)
}

fn self_amplitude(spec: &EvolutionSpec, bits: u32) -> Complex64 {
    spec.evolved_amplitude(bits)
}

/// Diagonal mixed-state QFI:
/// I = sum_r pdot_r^2 / p_r
///   + 2 sum_{n,m} (p_n - p_m)^2 / (p_n + p_m) |<psi^(n)|psidot^(m)>|^2,
/// skipping terms with vanishing denominators (threshold 1e-14).
pub fn qfi_mixed_diagonal(p: &[f64], pdot: &[f64], cross: &CMat) -> Result<f64> {
    const DENOM_FLOOR: f64 = 1e-14;
    let r = p.len();
    if pdot.len() != r || cross.nrows() != r || cross.ncols() != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: pdot.len().min(cross.nrows()),
        });
    }
    let mut total = 0.0;
    for &prob in p {
        if prob < -1e-12 {
            return Err(Error::Domain(format!(
                "mixed-state eigenvalue {prob} is negative"
            )));
        }
        total += prob;
    }
    if (total - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::NotNormalized {
            norm_sq: total,
            tol: STATE_NORM_TOL,
        });
    }

    let mut classical = 0.0;
    for i in 0..r {
        if p[i] >= DENOM_FLOOR {
            classical += pdot[i] * pdot[i] / p[i];
        }
    }
    let mut quantum = 0.0;
    for n in 0..r {
        for mth in 0..r {
            let denom = p[n] + p[mth];
            if denom < DENOM_FLOOR {
                continue;
            }
            let diff = p[n] - p[mth];
            quantum += diff * diff / denom * cross[(n, mth)].norm_sqr();
        }
    }
    Ok(classical + 2.0 * quantum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{many_body_unitary, BogoliubovMap};
    use crate::fock::{self, apply_dense};
    use crate::linalg::{expm, RMat};
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(occ: &[u8]) -> OccupationState {
        OccupationState::from_occupations(occ).unwrap()
    }

    /// |psi(omega)> = T(R(omega)) |10>: the 2-mode rotation family.
    fn rotation_state(omega: f64) -> Result<FockVector> {
        let u = CMat::from_row_slice(
            2,
            2,
            &[
                c(omega.cos(), 0.0),
                c(omega.sin(), 0.0),
                c(-omega.sin(), 0.0),
                c(omega.cos(), 0.0),
            ],
        );
        let map = BogoliubovMap::basis_change(u)?;
        let t = many_body_unitary(&map)?;
        apply_dense(&t, &FockVector::basis_state(ket(&[1, 0])))
    }

    #[test]
    fn qfi_pure_zero_derivative() {
        let psi = FockVector::basis_state(ket(&[1, 0]));
        let zero = FockVector::zero(2).unwrap();
        assert_eq!(qfi_pure(&psi, &zero).unwrap(), 0.0);
    }

    #[test]
    fn qfi_pure_rotation_family() {
        let theta_dot = 1.7;
        let psi = FockVector::basis_state(ket(&[1, 0]));
        let psidot = FockVector::basis_state(ket(&[0, 1])).scaled(c(0.0, theta_dot));
        let value = qfi_pure(&psi, &psidot).unwrap();
        assert!((value - 4.0 * theta_dot * theta_dot).abs() < 1e-12);
    }

    #[test]
    fn qfi_pure_diagonal_phase_family() {
        // psidot = -i t Edot |psi> for diagonal Edot: I = 4 t^2 var(Edot)
        let t = 0.8;
        let (e0, e1) = (0.3, -1.1);
        let a = (0.6f64).sqrt();
        let b = (0.4f64).sqrt();
        let mut psi = FockVector::basis_state(ket(&[1, 0])).scaled(c(a, 0.0));
        psi.add_scaled(&FockVector::basis_state(ket(&[0, 1])), c(b, 0.0))
            .unwrap();
        let mut psidot = FockVector::basis_state(ket(&[1, 0])).scaled(c(0.0, -t * e0) * a);
        psidot
            .add_scaled(&FockVector::basis_state(ket(&[0, 1])), c(0.0, -t * e1) * b)
            .unwrap();
        let mean = a * a * e0 + b * b * e1;
        let var = a * a * (e0 - mean).powi(2) + b * b * (e1 - mean).powi(2);
        let value = qfi_pure(&psi, &psidot).unwrap();
        assert!((value - 4.0 * t * t * var).abs() < 1e-12);
    }

    #[test]
    fn qfi_pure_phase_invariance() {
        // multiplying the family by exp(i phi(omega)) leaves the QFI alone
        let theta_dot = 0.9;
        let phi_dot = 2.3; // derivative of an arbitrary smooth global phase
        let psi = FockVector::basis_state(ket(&[1, 0]));
        let mut psidot = FockVector::basis_state(ket(&[0, 1])).scaled(c(0.0, theta_dot));
        let bare = qfi_pure(&psi, &psidot).unwrap();
        psidot
            .add_scaled(&psi, c(0.0, phi_dot))
            .unwrap();
        let gauged = qfi_pure(&psi, &psidot).unwrap();
        assert!((bare - gauged).abs() < 1e-9);
    }

    #[test]
    fn bures_fd_omega_independent_state() {
        let state = ParametrizedState::new(|_| Ok(FockVector::basis_state(ket(&[1, 0]))));
        let (value, _) = qfi_bures_fd(&state, 0.3, 1e-4).unwrap();
        assert!(value.abs() < 1e-9);
    }

    #[test]
    fn bures_fd_rotation_family_gives_four() {
        let state = ParametrizedState::new(rotation_state);
        let (value, err) = qfi_bures_fd(&state, 0.2, 1e-4).unwrap();
        assert!((value - 4.0).abs() < 1e-6, "value {value}, err {err}");
    }

    #[test]
    fn bures_fd_agrees_with_qfi_pure_on_random_family() {
        // random fixed complex amplitudes with omega-dependent phases
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 4;
        let basis = fock::enumerate_basis(m, None).unwrap();
        let phases: Vec<(f64, f64)> = basis
            .iter()
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let raw: Vec<Complex64> = basis
            .iter()
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = raw.iter().map(|z| z / norm).collect();

        let family = |omega: f64| -> Result<FockVector> {
            let mut v = FockVector::zero(m)?;
            for ((state, amp), (a, b)) in basis.iter().zip(&amps).zip(&phases) {
                let phase = c(0.0, a * omega + b * omega * omega).exp();
                v.set_amplitude(*state, amp * phase);
            }
            Ok(v)
        };
        let omega0 = 0.37;
        let state = ParametrizedState::new(family);
        let psi = state.at(omega0).unwrap();
        let psidot = state.derivative_at(omega0).unwrap();
        let direct = qfi_pure(&psi, &psidot).unwrap();
        let (bures, _) = qfi_bures_fd(&state, omega0, 1e-4).unwrap();
        assert!(
            (direct - bures).abs() <= 1e-5 * direct.abs().max(1.0),
            "direct {direct} vs bures {bures}"
        );
    }

    #[test]
    fn unitary_variance_eigenstate_is_zero() {
        let number_op = |x: &FockVector| {
            let mut out = FockVector::zero(x.modes())?;
            for (st, amp) in x.iter() {
                out.add_amplitude(st, amp * st.particle_count() as f64);
            }
            Ok(out)
        };
        let v = FockVector::basis_state(ket(&[1, 0, 1]));
        assert!(qfi_unitary_variance(number_op, &v).unwrap().abs() < 1e-12);
    }

    #[test]
    fn unitary_variance_matches_rotation_qfi() {
        let theta_dot = 1.3;
        let udot = RMat::from_row_slice(2, 2, &[0.0, theta_dot, -theta_dot, 0.0]);
        let gen = crate::bogoliubov::quadratic_generator_from_derivative(
            &udot,
            &RMat::zeros(2, 2),
        )
        .unwrap();
        let psi0 = FockVector::basis_state(ket(&[1, 0]));
        let value =
            qfi_unitary_variance(|v| apply_quadratic_generator(&gen, v), &psi0).unwrap();
        assert!((value - 4.0 * theta_dot * theta_dot).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_reductions() {
        let theta_dot = 0.7;
        let udot = RMat::from_row_slice(2, 2, &[0.0, theta_dot, -theta_dot, 0.0]);
        let gen = crate::bogoliubov::quadratic_generator_from_derivative(
            &udot,
            &RMat::zeros(2, 2),
        )
        .unwrap();
        let apply_gen = |v: &FockVector| apply_quadratic_generator(&gen, v);
        let zero_op = |v: &FockVector| FockVector::zero(v.modes());
        let psi0 = FockVector::basis_state(ket(&[1, 0]));
        let zero_vec = FockVector::zero(2).unwrap();

        let reference = qfi_unitary_variance(apply_gen, &psi0).unwrap();

        // trivial U: phi = psi0 (T generic), phidot irrelevant to U terms
        let phidot = apply_gen(&psi0).unwrap().scaled(c(0.0, 1.0));
        let chain_u_trivial =
            qfi_chain(apply_gen, zero_op, &psi0, &psi0, &phidot).unwrap();
        assert!((chain_u_trivial - reference).abs() < 1e-12);

        // trivial T: phi = psi0, phidot = 0
        let chain_h_trivial =
            qfi_chain(zero_op, apply_gen, &psi0, &psi0, &zero_vec).unwrap();
        assert!((chain_h_trivial - reference).abs() < 1e-12);
    }

    #[test]
    fn basis_state_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // fully occupied state with Vdot = 0: no occupied-empty pairs
        for m in 2..=8usize {
            let udot = fock::random_antisymmetric(&mut rng, m, 1.0);
            let gen = crate::bogoliubov::quadratic_generator_from_derivative(
                &udot,
                &RMat::zeros(m, m),
            )
            .unwrap();
            let filled = OccupationState::from_bits((1u32 << m) - 1, m).unwrap();
            assert_eq!(qfi_basis_state(&filled, &gen).unwrap(), 0.0);
        }

        // |10> with the rotation Udot
        let theta_dot = 0.6;
        let udot = RMat::from_row_slice(2, 2, &[0.0, theta_dot, -theta_dot, 0.0]);
        let gen = crate::bogoliubov::quadratic_generator_from_derivative(
            &udot,
            &RMat::zeros(2, 2),
        )
        .unwrap();
        let value = qfi_basis_state(&ket(&[1, 0]), &gen).unwrap();
        assert!((value - 4.0 * theta_dot * theta_dot).abs() < 1e-14);

        // vacuum with pure pairing: 4 sum_{k<l} Vdot_{kl}^2
        let m = 3;
        let vdot = fock::random_antisymmetric(&mut rng, m, 1.0);
        let gen = crate::bogoliubov::quadratic_generator_from_derivative(
            &RMat::zeros(m, m),
            &vdot,
        )
        .unwrap();
        let vac = OccupationState::vacuum(m).unwrap();
        let mut expect = 0.0;
        for k in 0..m {
            for l in (k + 1)..m {
                expect += 4.0 * vdot[(k, l)] * vdot[(k, l)];
            }
        }
        assert!((qfi_basis_state(&vac, &gen).unwrap() - expect).abs() < 1e-14);
    }

    fn random_spec(
        rng: &mut ChaCha8Rng,
        m: usize,
        time: f64,
    ) -> (EvolutionSpec, QuadraticGenerator) {
        let basis = fock::enumerate_basis(m, None).unwrap();
        let raw: Vec<Complex64> = basis
            .iter()
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let single: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let amps: Vec<(OccupationState, Complex64)> = basis
            .iter()
            .zip(&raw)
            .map(|(s, z)| (*s, z / norm))
            .collect();
        let spec = EvolutionSpec::from_single_particle(m, time, &single, &amps).unwrap();
        let gen = QuadraticGenerator::new(
            fock::random_antisymmetric(rng, m, 0.8),
            fock::random_antisymmetric(rng, m, 0.8),
        )
        .unwrap();
        (spec, gen)
    }

    #[test]
    fn evolution_dual_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for m in 2..=5usize {
            for time in [0.0, 0.5, 2.0] {
                let (spec, gen) = random_spec(&mut rng, m, time);
                let operator_route = qfi_hamiltonian_evolution(&spec, &gen).unwrap();
                let coefficient_route = 4.0 * general_state_variance(&spec, &gen).unwrap();
                assert!(
                    (operator_route - coefficient_route).abs()
                        <= 1e-12 * operator_route.abs().max(1.0),
                    "m={m} t={time}: {operator_route} vs {coefficient_route}"
                );
            }
        }
    }

    #[test]
    fn evolution_at_t_zero_reduces_to_unitary_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let (spec, gen) = random_spec(&mut rng, 4, 0.0);
        let evo = qfi_hamiltonian_evolution(&spec, &gen).unwrap();
        let psi0 = spec.phi_omega().unwrap();
        let direct =
            qfi_unitary_variance(|v| apply_quadratic_generator(&gen, v), &psi0).unwrap();
        assert!((evo - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn evolution_diagonal_only() {
        // gen = 0: classical variance of Edot * t
        let m = 2;
        let t = 1.3;
        let a = (0.7f64).sqrt();
        let b = (0.3f64).sqrt();
        let amps = vec![
            (ket(&[1, 0]), c(a, 0.0)),
            (ket(&[0, 1]), c(b, 0.0)),
        ];
        let single = vec![(1.0, 2.0), (0.5, -1.0)];
        let spec = EvolutionSpec::from_single_particle(m, t, &single, &amps).unwrap();
        let gen = QuadraticGenerator::zero(m).unwrap();
        let mean = a * a * 2.0 + b * b * (-1.0);
        let var = a * a * (2.0f64 - mean).powi(2) + b * b * (-1.0f64 - mean).powi(2);
        let value = qfi_hamiltonian_evolution(&spec, &gen).unwrap();
        assert!((value - 4.0 * t * t * var).abs() < 1e-12);
    }

    #[test]
    fn general_variance_single_basis_state_recovers_closed_form() {
        // all weight on one ket, gen only: var = sum_{k<l} D^2
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let m = 4;
        let state = ket(&[1, 0, 1, 0]);
        let spec = EvolutionSpec::new(
            m,
            0.9,
            vec![(
                state,
                EvolutionEntry {
                    amplitude: c(1.0, 0.0),
                    energy: 0.4,
                    energy_dot: 1.2,
                },
            )],
        )
        .unwrap();
        let gen = QuadraticGenerator::new(
            fock::random_antisymmetric(&mut rng, m, 1.0),
            fock::random_antisymmetric(&mut rng, m, 1.0),
        )
        .unwrap();
        let value = general_state_variance(&spec, &gen).unwrap();
        let expect = qfi_basis_state(&state, &gen).unwrap() / 4.0;
        assert!((value - expect).abs() < 1e-13);
    }

    #[test]
    fn evolution_matches_bures_on_composed_family() {
        // family: U_omega T_omega |psi0> with T from a commuting-case map
        // and U the diagonal evolution in the omega basis
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let m = 3;
        let time = 0.7;
        let (spec, gen) = random_spec(&mut rng, m, time);

        let omega0 = 0.0;
        let family = |omega: f64| -> Result<FockVector> {
            // W(omega) = exp((omega - omega0) G) with blocks from gen
            let mut g = CMat::zeros(2 * m, 2 * m);
            for i in 0..m {
                for j in 0..m {
                    g[(i, j)] = c(gen.one_body()[(i, j)], 0.0);
                    g[(m + i, m + j)] = c(gen.one_body()[(i, j)], 0.0);
                    g[(i, m + j)] = c(gen.pairing()[(i, j)], 0.0);
                    g[(m + i, j)] = c(gen.pairing()[(i, j)], 0.0);
                }
            }
            let w = expm(&g.map(|z| z * (omega - omega0)));
            let map = BogoliubovMap::from_w(&w)?;
            let t_mat = many_body_unitary(&map)?;
            // phi at this omega: phases from E_n(omega) ~ E_n + (omega-omega0) Edot_n
            let mut phi = FockVector::zero(m)?;
            for (&bits, entry) in &spec.entries {
                let st = OccupationState::from_bits(bits, m)?;
                let energy = entry.energy + (omega - omega0) * entry.energy_dot;
                phi.set_amplitude(
                    st,
                    entry.amplitude * c(0.0, -energy * time).exp(),
                );
            }
            fock::apply_dense(&t_mat, &phi)
        };
        let state = ParametrizedState::new(family);
        let (bures, _) = qfi_bures_fd(&state, omega0, 1e-4).unwrap();
        let compact = qfi_hamiltonian_evolution(&spec, &gen).unwrap();
        assert!(
            (bures - compact).abs() <= 1e-5 * compact.abs().max(1.0),
            "bures {bures} vs compact {compact}"
        );
    }

    #[test]
    fn mixed_diagonal_classical_coin() {
        let omega = 0.4f64;
        let p = [omega.cos().powi(2), omega.sin().powi(2)];
        let pdot = [-2.0 * omega.cos() * omega.sin(), 2.0 * omega.sin() * omega.cos()];
        let cross = CMat::zeros(2, 2);
        let value = qfi_mixed_diagonal(&p, &pdot, &cross).unwrap();
        assert!((value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_diagonal_pure_state_limit() {
        // p = (1, 0, 0) with orthogonal derivative: I = 4 <psidot|psidot>
        let p = [1.0, 0.0, 0.0];
        let pdot = [0.0, 0.0, 0.0];
        let mut cross = CMat::zeros(3, 3);
        // <psi^(n)|psidot^(1)> for n = 2, 3; orthonormal-basis antisymmetry
        cross[(1, 0)] = c(0.3, -0.2);
        cross[(0, 1)] = -cross[(1, 0)].conj();
        cross[(2, 0)] = c(-0.1, 0.5);
        cross[(0, 2)] = -cross[(2, 0)].conj();
        let value = qfi_mixed_diagonal(&p, &pdot, &cross).unwrap();
        let dd = cross[(1, 0)].norm_sqr() + cross[(2, 0)].norm_sqr();
        assert!((value - 4.0 * dd).abs() < 1e-12);
    }

    #[test]
    fn mixed_diagonal_rejects_bad_probabilities() {
        let cross = CMat::zeros(2, 2);
        assert!(qfi_mixed_diagonal(&[1.2, -0.2], &[0.0, 0.0], &cross).is_err());
        assert!(qfi_mixed_diagonal(&[0.4, 0.4], &[0.0, 0.0], &cross).is_err());
    }

    #[test]
    fn mixed_diagonal_omega_independent() {
        let p = [0.5, 0.5];
        let pdot = [0.0, 0.0];
        let cross = CMat::zeros(2, 2);
        assert_eq!(qfi_mixed_diagonal(&p, &pdot, &cross).unwrap(), 0.0);
    }
}
