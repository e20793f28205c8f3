//! Beam-splitter transformations and quantum-scissors state preparation.
//!
//! A beam splitter acts on two modes of a multimode state by rewriting each
//! basis component under the creation-operator substitution rules and
//! re-expanding binomially. This is exact for finite occupation, so
//! unitarity holds to rounding error and no generator has to be
//! exponentiated.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{EnsembleMember, FockDensity, FockState};
use crate::ladder::{indistinguishability_density, CoefficientProfile};

/// Which mode's substitution rule carries the minus sign.
///
/// With transmissivity `t`, reflectivity `r` and target modes `(i, j)`:
///
/// * `MinusInSecond`: `i† -> t i† + r j†`, `j† -> t j† - r i†`
/// * `MinusInFirst`:  `i† -> t i† - r j†`, `j† -> t j† + r i†`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitterConvention {
    MinusInSecond,
    MinusInFirst,
}

/// Two-mode beam splitter with real transmissivity and reflectivity.
#[derive(Clone, Copy, Debug)]
pub struct BeamSplitter {
    t: f64,
    r: f64,
    modes: (usize, usize),
    convention: SplitterConvention,
}

impl BeamSplitter {
    pub fn new(
        t: f64,
        r: f64,
        modes: (usize, usize),
        convention: SplitterConvention,
    ) -> Result<Self> {
        if (t * t + r * r - 1.0).abs() > 1e-12 {
            return Err(Error::Domain {
                name: "t^2 + r^2",
                value: t * t + r * r,
                expected: "t^2 + r^2 = 1 within 1e-12",
            });
        }
        if modes.0 == modes.1 {
            return Err(Error::Domain {
                name: "modes",
                value: modes.0 as f64,
                expected: "two distinct target modes",
            });
        }
        Ok(Self {
            t,
            r,
            modes,
            convention,
        })
    }

    /// Splitter from the transmitted intensity fraction `t²`.
    pub fn from_transmittance(
        t_sq: f64,
        modes: (usize, usize),
        convention: SplitterConvention,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_sq) {
            return Err(Error::Domain {
                name: "t2",
                value: t_sq,
                expected: "0 <= t2 <= 1",
            });
        }
        Self::new(t_sq.sqrt(), (1.0 - t_sq).sqrt(), modes, convention)
    }

    /// Balanced splitter, `t = r = 1/sqrt(2)`.
    pub fn fifty_fifty(modes: (usize, usize), convention: SplitterConvention) -> Self {
        Self::new(
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
            modes,
            convention,
        )
        .expect("balanced splitter is unitary")
    }

    /// Splitter with the reflectivity sign flipped; undoes `self`.
    pub fn inverse(&self) -> Self {
        Self {
            r: -self.r,
            ..*self
        }
    }

    pub fn transmissivity(&self) -> f64 {
        self.t
    }

    pub fn reflectivity(&self) -> f64 {
        self.r
    }

    pub fn modes(&self) -> (usize, usize) {
        self.modes
    }

    /// Substitution matrix: row `k` gives the image of mode-`k`'s creation
    /// operator over (mode i, mode j).
    pub fn mode_matrix(&self) -> [[f64; 2]; 2] {
        match self.convention {
            SplitterConvention::MinusInSecond => [[self.t, self.r], [-self.r, self.t]],
            SplitterConvention::MinusInFirst => [[self.t, -self.r], [self.r, self.t]],
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut value = 1.0;
    for d in 1..=k {
        value *= (n - k + d) as f64 / d as f64;
    }
    value
}

/// `sqrt(a! b! / (ni! nj!))` for `a + b = ni + nj`, evaluated as a product of
/// paired ratios so intermediates never overflow.
fn sqrt_occupation_ratio(a: usize, b: usize, ni: usize, nj: usize) -> f64 {
    debug_assert_eq!(a + b, ni + nj);
    let mut ratio = 1.0;
    if a >= ni {
        for d in 1..=(a - ni) {
            ratio *= (ni + d) as f64 / (b + d) as f64;
        }
    } else {
        for d in 1..=(ni - a) {
            ratio *= (nj + d) as f64 / (a + d) as f64;
        }
    }
    ratio.sqrt()
}

/// Unitary beam-splitter action on two modes of a multimode state.
///
/// Every nonzero basis component must satisfy `n_i + n_j <= cutoff`, since
/// the transformation can move all quanta into one mode.
pub fn apply_beam_splitter(state: &FockState, bs: &BeamSplitter) -> Result<FockState> {
    let (mode_i, mode_j) = bs.modes;
    if mode_i >= state.modes() || mode_j >= state.modes() {
        return Err(Error::ModeMismatch {
            expected: state.modes(),
            got: mode_i.max(mode_j) + 1,
        });
    }
    let cutoff = state.cutoff();
    let base = cutoff + 1;
    let stride_i = base.pow((state.modes() - mode_i - 1) as u32);
    let stride_j = base.pow((state.modes() - mode_j - 1) as u32);
    let u = bs.mode_matrix();

    let mut out = vec![Complex64::ZERO; state.dim()];
    for (index, &amp) in state.amplitudes().iter().enumerate() {
        if amp == Complex64::ZERO {
            continue;
        }
        let ni = (index / stride_i) % base;
        let nj = (index / stride_j) % base;
        let total = ni + nj;
        if total > cutoff {
            return Err(Error::Truncation(format!(
                "basis component with {total} quanta across modes ({mode_i}, {mode_j}) \
                 does not fit cutoff {cutoff}"
            )));
        }
        let rest = index - ni * stride_i - nj * stride_j;

        // (u00 i† + u01 j†)^ni (u10 i† + u11 j†)^nj expanded binomially.
        let mut pow00 = vec![1.0; ni + 1];
        let mut pow01 = vec![1.0; ni + 1];
        for d in 1..=ni {
            pow00[d] = pow00[d - 1] * u[0][0];
            pow01[d] = pow01[d - 1] * u[0][1];
        }
        let mut pow10 = vec![1.0; nj + 1];
        let mut pow11 = vec![1.0; nj + 1];
        for d in 1..=nj {
            pow10[d] = pow10[d - 1] * u[1][0];
            pow11[d] = pow11[d - 1] * u[1][1];
        }
        for p in 0..=ni {
            let factor_i = binomial(ni, p) * pow00[p] * pow01[ni - p];
            for q in 0..=nj {
                let a = p + q;
                let b = total - a;
                let factor = factor_i
                    * binomial(nj, q)
                    * pow10[q]
                    * pow11[nj - q]
                    * sqrt_occupation_ratio(a, b, ni, nj);
                out[rest + a * stride_i + b * stride_j] += amp * factor;
            }
        }
    }
    FockState::from_amplitudes(state.modes(), cutoff, out)
}

/// Heralded two-level mixture produced by quantum scissors.
#[derive(Clone, Debug)]
pub struct ScissorsResult {
    /// Normalized post-selected output in the signal mode.
    pub rho_out: FockDensity,
    /// Population of `|1>` in the output.
    pub p: f64,
    /// Total probability of the heralding outcome.
    pub success_probability: f64,
    /// The analytic mixing probability for the same `t`, `nbar`.
    pub p_closed_form: f64,
}

/// Analytic scissors mixing probability
/// `p = q t² / (r² + q t²)` with `q = nbar / (1 + nbar)`.
pub fn scissors_mixing_closed_form(nbar: f64, t_sq: f64) -> f64 {
    let q = nbar / (1.0 + nbar);
    q * t_sq / ((1.0 - t_sq) + q * t_sq)
}

/// Quantum-scissors preparation: a single photon and a thermal field pass
/// through two beam splitters and the output is kept when exactly one photon
/// exits the middle port and none the last.
///
/// Per thermal component `|1, 0, n>` the first splitter (transmissivity `t`,
/// minus in the second rule) mixes modes 0-1, the balanced second splitter
/// (minus in the first rule) mixes modes 1-2, and the projection
/// `<1|_1 <0|_2` leaves an unnormalized signal-mode state. Mixing over the
/// thermal weights and normalizing yields a state supported on `{|0>, |1>}`.
pub fn quantum_scissors(nbar: f64, t: f64, cutoff: usize) -> Result<ScissorsResult> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::Domain {
            name: "nbar",
            value: nbar,
            expected: "nbar >= 0",
        });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            expected: "0 < t < 1",
        });
    }
    let q = nbar / (1.0 + nbar);
    let thermal_tail = if q == 0.0 { 0.0 } else { q.powi(cutoff as i32 + 1) };
    if thermal_tail >= 1e-10 {
        return Err(Error::Truncation(format!(
            "thermal tail {thermal_tail:.3e} at cutoff {cutoff} exceeds 1e-10"
        )));
    }
    let (thermal, _) = FockDensity::thermal(nbar, cutoff)?;

    // Two spare levels: the injected photon can migrate into either port.
    let three_mode_cutoff = cutoff + 2;
    let r = (1.0 - t * t).sqrt();
    let first = BeamSplitter::new(t, r, (0, 1), SplitterConvention::MinusInSecond)?;
    let second = BeamSplitter::fifty_fifty((1, 2), SplitterConvention::MinusInFirst);

    let projected: Vec<(f64, Vec<Complex64>)> = thermal
        .members()
        .par_iter()
        .enumerate()
        .map(|(n, member)| -> Result<(f64, Vec<Complex64>)> {
            let input = FockState::number(1, three_mode_cutoff)?
                .tensor(&FockState::vacuum(three_mode_cutoff))?
                .tensor(&FockState::number(n, three_mode_cutoff)?)?;
            let mixed = apply_beam_splitter(&apply_beam_splitter(&input, &first)?, &second)?;
            let mut signal = Vec::with_capacity(three_mode_cutoff + 1);
            for level in 0..=three_mode_cutoff {
                signal.push(mixed.amplitude(&[level, 1, 0])?);
            }
            Ok((member.weight, signal))
        })
        .collect::<Result<Vec<_>>>()?;

    // Fixed-order accumulation keeps the result independent of threading.
    let mut success_probability = 0.0;
    let mut one_population = 0.0;
    let mut members = Vec::new();
    for (weight, signal) in projected {
        let norm_sq: f64 = signal.iter().map(|a| a.norm_sqr()).sum();
        if weight * norm_sq == 0.0 {
            continue;
        }
        success_probability += weight * norm_sq;
        one_population += weight * signal[1].norm_sqr();
        members.push((weight * norm_sq, signal));
    }
    if success_probability <= 0.0 {
        return Err(Error::DegeneratePostSelection);
    }
    let ensemble = members
        .into_iter()
        .map(|(mass, signal)| {
            let state = FockState::from_amplitudes(1, three_mode_cutoff, signal)?;
            Ok(EnsembleMember {
                weight: mass / success_probability,
                state: state.normalized()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScissorsResult {
        rho_out: FockDensity::from_members(ensemble)?,
        p: one_population / success_probability,
        success_probability,
        p_closed_form: scissors_mixing_closed_form(nbar, t * t),
    })
}

/// Left-hand sides of the bosonic and fermionic norm inequalities on the
/// mixture `(1-p)|0><0| + p|1><1|`, computed through the ladder route rather
/// than the analytic `(1+p, 1-p)` they are checked against.
pub fn mixed_state_inequality_values(p: f64) -> Result<(f64, f64)> {
    let rho = FockDensity::mixed01(p, 4)?;
    let boson = indistinguishability_density(&rho, &CoefficientProfile::Bosonic)?;
    let fermion = indistinguishability_density(&rho, &CoefficientProfile::Fermionic)?;
    Ok((boson, fermion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::trial_uniform;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn splitter_validates_unitarity_and_modes() {
        assert!(BeamSplitter::new(0.9, 0.5, (0, 1), SplitterConvention::MinusInSecond).is_err());
        assert!(BeamSplitter::new(0.6, 0.8, (1, 1), SplitterConvention::MinusInSecond).is_err());
        assert!(BeamSplitter::new(0.6, 0.8, (0, 1), SplitterConvention::MinusInSecond).is_ok());
    }

    #[test]
    fn single_photon_substitution_rule() {
        // Oracle: the 2x2 mode matrix acting on a single creation operator.
        let one_zero = FockState::number(1, 4)
            .unwrap()
            .tensor(&FockState::vacuum(4))
            .unwrap();
        let bs = BeamSplitter::new(0.6, 0.8, (0, 1), SplitterConvention::MinusInSecond).unwrap();
        let out = apply_beam_splitter(&one_zero, &bs).unwrap();
        assert_abs_diff_eq!(out.amplitude(&[1, 0]).unwrap().re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(&[0, 1]).unwrap().re, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 1e-14);

        // Second input mode picks up the minus sign.
        let zero_one = FockState::vacuum(4)
            .tensor(&FockState::number(1, 4).unwrap())
            .unwrap();
        let out = apply_beam_splitter(&zero_one, &bs).unwrap();
        assert_abs_diff_eq!(out.amplitude(&[1, 0]).unwrap().re, -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(&[0, 1]).unwrap().re, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn hong_ou_mandel_interference() {
        let one_one = FockState::number(1, 4)
            .unwrap()
            .tensor(&FockState::number(1, 4).unwrap())
            .unwrap();
        let bs = BeamSplitter::fifty_fifty((0, 1), SplitterConvention::MinusInSecond);
        let out = apply_beam_splitter(&one_one, &bs).unwrap();

        let mut target = vec![Complex64::ZERO; out.dim()];
        target[crate::fock::index_of(&[2, 0], 4).unwrap()] = c(std::f64::consts::FRAC_1_SQRT_2);
        target[crate::fock::index_of(&[0, 2], 4).unwrap()] = c(-std::f64::consts::FRAC_1_SQRT_2);
        let target = FockState::from_amplitudes(2, 4, target).unwrap();

        assert!(out.fidelity(&target).unwrap() > 1.0 - 1e-12);
        assert!(out.amplitude(&[1, 1]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn vacuum_is_invariant() {
        let vac2 = FockState::vacuum(3).tensor(&FockState::vacuum(3)).unwrap();
        let bs = BeamSplitter::new(0.3, (1.0f64 - 0.09).sqrt(), (0, 1), SplitterConvention::MinusInFirst)
            .unwrap();
        let out = apply_beam_splitter(&vac2, &bs).unwrap();
        assert_eq!(out.amplitude(&[0, 0]).unwrap(), Complex64::ONE);
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 0.0);
    }

    fn random_two_mode_state(seed: u64, cutoff: usize) -> FockState {
        // Random amplitudes restricted to total occupation <= cutoff so the
        // splitter guard is satisfied.
        let dim = (cutoff + 1) * (cutoff + 1);
        let mut amps = vec![Complex64::ZERO; dim];
        let mut draw = 0;
        for i in 0..=cutoff {
            for j in 0..=cutoff - i {
                let re = trial_uniform(seed, draw) - 0.5;
                let im = trial_uniform(seed, draw + 1) - 0.5;
                amps[i * (cutoff + 1) + j] = Complex64::new(re, im);
                draw += 2;
            }
        }
        FockState::from_amplitudes(2, cutoff, amps)
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn unitarity_on_random_states() {
        for (seed, t, convention) in [
            (1, 0.6, SplitterConvention::MinusInSecond),
            (2, 0.95, SplitterConvention::MinusInFirst),
            (3, std::f64::consts::FRAC_1_SQRT_2, SplitterConvention::MinusInSecond),
        ] {
            let state = random_two_mode_state(seed, 8);
            let bs =
                BeamSplitter::new(t, (1.0 - t * t).sqrt(), (0, 1), convention).unwrap();
            let out = apply_beam_splitter(&state, &bs).unwrap();
            assert_abs_diff_eq!(out.norm_sq(), state.norm_sq(), epsilon = 1e-12);
        }
    }

    fn clipped_coherent(alpha: f64, support: usize, cutoff: usize) -> FockState {
        // Coherent amplitudes up to `support`, embedded at `cutoff` so the
        // splitter's per-component occupation bound holds exactly.
        let (state, _) = FockState::coherent(c(alpha), support).unwrap();
        let mut amps = state.amplitudes().to_vec();
        amps.resize(cutoff + 1, Complex64::ZERO);
        FockState::from_amplitudes(1, cutoff, amps).unwrap()
    }

    #[test]
    fn coherent_inputs_stay_coherent() {
        // Oracle: displacements transform linearly, so coherent inputs map
        // to the product of coherent states with rotated amplitudes.
        let cutoff = 24;
        let (alpha, beta) = (0.6, -0.4);
        let (t, r) = (0.6, 0.8);
        let input = clipped_coherent(alpha, 12, cutoff)
            .tensor(&clipped_coherent(beta, 12, cutoff))
            .unwrap();
        let bs = BeamSplitter::new(t, r, (0, 1), SplitterConvention::MinusInSecond).unwrap();
        let out = apply_beam_splitter(&input, &bs).unwrap();
        let expected = FockState::coherent(c(t * alpha - r * beta), cutoff)
            .unwrap()
            .0
            .tensor(&FockState::coherent(c(r * alpha + t * beta), cutoff).unwrap().0)
            .unwrap();
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn unitarity_at_high_occupation() {
        // Factorial ratios in the expansion stay finite and accurate even
        // when all quanta can pile into one mode.
        let state = FockState::number(15, 30)
            .unwrap()
            .tensor(&FockState::number(12, 30).unwrap())
            .unwrap();
        let bs = BeamSplitter::fifty_fifty((0, 1), SplitterConvention::MinusInSecond);
        let out = apply_beam_splitter(&state, &bs).unwrap();
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_composition_restores_input() {
        let state = random_two_mode_state(9, 7);
        for convention in [SplitterConvention::MinusInSecond, SplitterConvention::MinusInFirst] {
            let bs = BeamSplitter::new(0.6, 0.8, (0, 1), convention).unwrap();
            let round =
                apply_beam_splitter(&apply_beam_splitter(&state, &bs).unwrap(), &bs.inverse())
                    .unwrap();
            let err: f64 = round
                .amplitudes()
                .iter()
                .zip(state.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }

    #[test]
    fn occupation_overflow_is_reported() {
        let state = FockState::number(4, 6)
            .unwrap()
            .tensor(&FockState::number(3, 6).unwrap())
            .unwrap();
        let bs = BeamSplitter::fifty_fifty((0, 1), SplitterConvention::MinusInSecond);
        assert!(matches!(
            apply_beam_splitter(&state, &bs),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn scissors_balanced_splitter_thermal_one() {
        let cutoff = crate::fock::thermal_cutoff_with(1.0, 1e-10);
        let result = quantum_scissors(1.0, 0.5f64.sqrt(), cutoff).unwrap();
        assert_abs_diff_eq!(result.p_closed_form, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(result.p, result.p_closed_form, epsilon = 1e-12);
        assert!(result.success_probability > 0.0 && result.success_probability < 1.0);
    }

    #[test]
    fn scissors_output_is_two_level() {
        let cutoff = crate::fock::thermal_cutoff_with(2.0, 1e-10);
        let result = quantum_scissors(2.0, 0.7, cutoff).unwrap();
        for member in result.rho_out.members() {
            let beyond: f64 = member.state.amplitudes()[2..]
                .iter()
                .map(|a| a.norm_sqr())
                .sum();
            assert!(beyond < 1e-12);
        }
        assert_abs_diff_eq!(result.rho_out.total_weight(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scissors_vacuum_input() {
        let result = quantum_scissors(0.0, 0.6, 6).unwrap();
        assert_eq!(result.p_closed_form, 0.0);
        assert_abs_diff_eq!(result.p, 0.0, epsilon = 0.0);
    }

    #[test]
    fn scissors_rejects_bad_parameters() {
        assert!(quantum_scissors(-1.0, 0.5, 10).is_err());
        assert!(quantum_scissors(1.0, 0.0, 10).is_err());
        assert!(quantum_scissors(1.0, 1.0, 10).is_err());
        // Cutoff too small for the requested thermal weight.
        assert!(matches!(
            quantum_scissors(4.0, 0.5, 5),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn inequality_values_through_ladder_route() {
        assert_eq!(mixed_state_inequality_values(0.0).unwrap(), (1.0, 1.0));
        assert_eq!(mixed_state_inequality_values(1.0).unwrap(), (2.0, 0.0));
        let (boson, fermion) = mixed_state_inequality_values(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(boson, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fermion, 2.0 / 3.0, epsilon = 1e-15);
    }
}
