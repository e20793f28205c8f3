//! Generalized ladder operators and the addition-then-subtraction measure.
//!
//! A subtraction operator is defined by coefficients `k_n` through
//! `c = Σ_{n>=1} k_n |n-1><n|`; the addition operator is its adjoint. The
//! three canonical coefficient families are `|k_n|² = 1` (classical),
//! `|k_n|² = n` (bosonic, the photon ladder), and `k_1` only (fermionic,
//! two-level). The normalized expectation `<ψ|c c†|ψ>` is the
//! indistinguishability degree: 1 for classical states, `m+1` on a bosonic
//! number state, and at most 1 on the fermionic two-level space.
//!
//! On a truncated space `c†` annihilates the top level, so `c c†` carries a
//! spurious 0 at the last diagonal slot and the commutator a spurious
//! `-|k_N|²`. Algebraic identities are therefore asserted on the interior
//! block, and expectation values enforce truncation guards that reject
//! states riding the cutoff.

use ndarray::{Array2, ArrayView2, s};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{FockDensity, FockState};

/// Pure states abort when the top-of-band amplitude reaches this magnitude.
const AMPLITUDE_GUARD: f64 = 1e-8;
/// Diagonal ensembles abort when the band probability reaches this weight.
const PROBABILITY_GUARD: f64 = 1e-12;

/// Coefficient family `k_n` of a generalized ladder operator. `k_0 = 0`
/// always; `Custom` holds explicit `|k_n|²` values for `n = 1, 2, ...` and
/// is zero beyond the list.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientProfile {
    Classical,
    Bosonic,
    Fermionic,
    Custom(Vec<f64>),
}

impl CoefficientProfile {
    /// Validated custom profile from squared magnitudes `|k_n|²`, `n >= 1`.
    pub fn custom(weights_sq: Vec<f64>) -> Result<Self> {
        for &w in &weights_sq {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Domain {
                    name: "|k_n|^2",
                    value: w,
                    expected: "finite nonnegative weights",
                });
            }
        }
        Ok(Self::Custom(weights_sq))
    }

    /// `|k_n|²`.
    pub fn weight_sq(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            Self::Classical => 1.0,
            Self::Bosonic => n as f64,
            Self::Fermionic => {
                if n == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Custom(weights) => weights.get(n - 1).copied().unwrap_or(0.0),
        }
    }

    /// `k_n`, taken real and nonnegative.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        Complex64::new(self.weight_sq(n).sqrt(), 0.0)
    }
}

/// Dense single-mode operator on a truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    cutoff: usize,
    entries: Array2<Complex64>,
}

impl OperatorMatrix {
    fn from_fn(cutoff: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let dim = cutoff + 1;
        Self {
            cutoff,
            entries: Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            cutoff: self.cutoff,
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        Ok(Self {
            cutoff: self.cutoff,
            entries: self.entries.dot(&other.entries),
        })
    }

    /// Interior block `0..=cutoff-2`, the part untouched by truncation.
    pub fn interior(&self) -> ArrayView2<'_, Complex64> {
        let end = self.cutoff.saturating_sub(1);
        self.entries.slice(s![..end, ..end])
    }

    /// Last diagonal entry; spoiled by truncation for unbounded profiles.
    pub fn top_edge(&self) -> Complex64 {
        self.entries[(self.cutoff, self.cutoff)]
    }

    /// Apply to a single-mode state; the result is not renormalized.
    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        state.require_single_mode()?;
        if state.cutoff() != self.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: state.cutoff(),
            });
        }
        let mut out = state.clone();
        let dim = self.dim();
        for (i, slot) in out.amplitudes_mut().iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for j in 0..dim {
                let m = self.entries[(i, j)];
                if m != Complex64::ZERO {
                    acc += m * state.amplitudes()[j];
                }
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// `<ψ|M|ψ> / <ψ|ψ>`.
    pub fn expectation(&self, state: &FockState) -> Result<Complex64> {
        let applied = self.apply(state)?;
        Ok(state.inner(&applied)? / state.norm_sq())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entries as nested rows, the JSON debugging layout.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        self.entries
            .rows()
            .into_iter()
            .map(|row| row.to_vec())
            .collect()
    }
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("OperatorMatrix", 2)?;
        st.serialize_field("cutoff", &self.cutoff)?;
        st.serialize_field("entries", &self.to_rows())?;
        st.end()
    }
}

/// Subtraction operator: entry `(n-1, n) = k_n` for `1 <= n <= cutoff`.
pub fn subtraction_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff, |i, j| {
        if j >= 1 && i + 1 == j {
            profile.coefficient(j)
        } else {
            Complex64::ZERO
        }
    })
}

/// Addition operator, the adjoint of [`subtraction_matrix`].
pub fn addition_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    subtraction_matrix(profile, cutoff).dagger()
}

/// `c c†` built directly from the coefficients: `diag(|k_1|², ..., |k_N|², 0)`.
/// The trailing 0 is the truncation edge, where `c†` annihilates `|N>`.
pub fn add_then_subtract_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff, |i, j| {
        if i == j && i < cutoff {
            Complex64::new(profile.weight_sq(i + 1), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// `c† c` built directly: `diag(0, |k_1|², ..., |k_N|²)`. Kept for commutator
/// tests; it is not a measure here.
pub fn subtract_then_add_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff, |i, j| {
        if i == j {
            Complex64::new(profile.weight_sq(i), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// `[c, c†]` on the truncated space. Interior diagonal entries equal
/// `|k_{n+1}|² - |k_n|²`; the top edge carries a spurious `-|k_N|²`, exposed
/// via [`OperatorMatrix::top_edge`].
pub fn commutator_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff, |i, j| {
        if i != j {
            return Complex64::ZERO;
        }
        let upper = if i < cutoff { profile.weight_sq(i + 1) } else { 0.0 };
        Complex64::new(upper - profile.weight_sq(i), 0.0)
    })
}

/// `{c, c†}` on the truncated space.
pub fn anticommutator_matrix(profile: &CoefficientProfile, cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff, |i, j| {
        if i != j {
            return Complex64::ZERO;
        }
        let upper = if i < cutoff { profile.weight_sq(i + 1) } else { 0.0 };
        Complex64::new(upper + profile.weight_sq(i), 0.0)
    })
}

fn guard_top_level_pure(state: &FockState, profile: &CoefficientProfile) -> Result<()> {
    // Only operators that connect the top level upward can be spoiled by it.
    if profile.weight_sq(state.cutoff() + 1) == 0.0 {
        return Ok(());
    }
    let top = state.amplitudes()[state.cutoff()].norm() / state.norm_sq().sqrt();
    if top >= AMPLITUDE_GUARD {
        return Err(Error::Truncation(format!(
            "top-level amplitude {top:.3e} >= {AMPLITUDE_GUARD:.0e}; raise the cutoff"
        )));
    }
    Ok(())
}

fn guard_top_level_density(rho: &FockDensity, profile: &CoefficientProfile) -> Result<()> {
    if profile.weight_sq(rho.cutoff() + 1) == 0.0 {
        return Ok(());
    }
    let top = rho.band_probability(rho.cutoff())?;
    if top >= PROBABILITY_GUARD {
        return Err(Error::Truncation(format!(
            "top-level occupation probability {top:.3e} >= {PROBABILITY_GUARD:.0e}; raise the cutoff"
        )));
    }
    Ok(())
}

/// Indistinguishability degree `<ψ|c c†|ψ> / <ψ|ψ>` of a pure state.
pub fn indistinguishability(state: &FockState, profile: &CoefficientProfile) -> Result<f64> {
    state.require_single_mode()?;
    guard_top_level_pure(state, profile)?;
    let m = add_then_subtract_matrix(profile, state.cutoff());
    Ok(m.expectation(state)?.re)
}

/// Indistinguishability degree `Tr[ρ c c†] / Tr[ρ]` of a mixed state.
pub fn indistinguishability_density(
    rho: &FockDensity,
    profile: &CoefficientProfile,
) -> Result<f64> {
    guard_top_level_density(rho, profile)?;
    let m = add_then_subtract_matrix(profile, rho.cutoff());
    let mut numerator = 0.0;
    let mut trace = 0.0;
    for member in rho.members() {
        let applied = m.apply(&member.state)?;
        numerator += member.weight * member.state.inner(&applied)?.re;
        trace += member.weight * member.state.norm_sq();
    }
    Ok(numerator / trace)
}

fn guard_band_pure(state: &FockState, order: u32) -> Result<()> {
    let needed = order as usize + 3;
    if state.cutoff() < needed {
        return Err(Error::Truncation(format!(
            "cutoff {} leaves no room for an order-{order} moment",
            state.cutoff()
        )));
    }
    let band_start = state.cutoff() - 2 - order as usize;
    let norm = state.norm_sq().sqrt();
    for (offset, a) in state.amplitudes()[band_start..].iter().enumerate() {
        if a.norm() / norm >= AMPLITUDE_GUARD {
            return Err(Error::Truncation(format!(
                "amplitude {:.3e} at level {} is too close to cutoff {} for an order-{order} moment",
                a.norm() / norm,
                band_start + offset,
                state.cutoff()
            )));
        }
    }
    Ok(())
}

fn guard_band_density(rho: &FockDensity, order: u32) -> Result<()> {
    let needed = order as usize + 3;
    if rho.cutoff() < needed {
        return Err(Error::Truncation(format!(
            "cutoff {} leaves no room for an order-{order} moment",
            rho.cutoff()
        )));
    }
    let band_start = rho.cutoff() - 2 - order as usize;
    let band = rho.band_probability(band_start)?;
    if band >= PROBABILITY_GUARD {
        return Err(Error::Truncation(format!(
            "probability {band:.3e} within {} levels of cutoff {} for an order-{order} moment",
            order as usize + 3,
            rho.cutoff()
        )));
    }
    Ok(())
}

fn raw_bosonic_moment(state: &FockState, order: u32) -> Result<f64> {
    let adag = addition_matrix(&CoefficientProfile::Bosonic, state.cutoff());
    let mut current = state.clone();
    for _ in 0..order {
        current = adag.apply(&current)?;
    }
    Ok(current.norm_sq())
}

/// Antinormally ordered moment `<ψ|a^n a†^n|ψ> / <ψ|ψ>` of the photon
/// ladder, by repeated application of the addition matrix.
pub fn higher_moment(state: &FockState, order: u32) -> Result<f64> {
    if order == 0 {
        return Err(Error::Domain {
            name: "order",
            value: 0.0,
            expected: "order >= 1",
        });
    }
    state.require_single_mode()?;
    guard_band_pure(state, order)?;
    Ok(raw_bosonic_moment(state, order)? / state.norm_sq())
}

/// Ensemble version of [`higher_moment`], normalized by the trace.
pub fn higher_moment_density(rho: &FockDensity, order: u32) -> Result<f64> {
    if order == 0 {
        return Err(Error::Domain {
            name: "order",
            value: 0.0,
            expected: "order >= 1",
        });
    }
    guard_band_density(rho, order)?;
    let mut numerator = 0.0;
    let mut trace = 0.0;
    for member in rho.members() {
        member.state.require_single_mode()?;
        numerator += member.weight * raw_bosonic_moment(&member.state, order)?;
        trace += member.weight * member.state.norm_sq();
    }
    Ok(numerator / trace)
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(order: u32, x: f64) -> f64 {
    if order == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut current = 1.0 - x;
    for k in 1..order {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * current - kf * prev) / (kf + 1.0);
        prev = current;
        current = next;
    }
    current
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Closed form `n! L_n(-|α|²)` for the order-`n` antinormal moment of a
/// coherent state with `|α|² = alpha_sq`.
pub fn coherent_moment_closed_form(alpha_sq: f64, order: u32) -> f64 {
    factorial(order) * laguerre(order, -alpha_sq)
}

/// Closed form `n! (1 + nbar)^n` for a thermal state.
pub fn thermal_moment_closed_form(nbar: f64, order: u32) -> f64 {
    factorial(order) * (1.0 + nbar).powi(order as i32)
}

/// Polar quadrature layout for phase-space moments: midpoint in radius,
/// uniform (trapezoid) in angle. `radius = None` selects
/// `max(4, sqrt(top occupied level) + 5)`.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub radial: usize,
    pub angular: usize,
    pub radius: Option<f64>,
    pub tail_tol: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            radial: 256,
            angular: 512,
            radius: None,
            tail_tol: 1e-6,
        }
    }
}

/// Quadrature value plus the boundary-ring integrand used as a tail probe.
#[derive(Clone, Copy, Debug)]
pub struct QMomentResult {
    pub value: f64,
    pub boundary_integrand: f64,
    pub tail_ok: bool,
}

/// `∫ d²α Q(α) |α|^{2n}` over a disc, with `Q(α) = |<α|ψ>|²/π`. Agrees with
/// [`higher_moment`] for states well inside the cutoff; the result carries a
/// warning flag when the integrand at the disc boundary exceeds `tail_tol`.
pub fn q_function_moment(
    state: &FockState,
    order: u32,
    grid: &QuadratureGrid,
) -> Result<QMomentResult> {
    state.require_single_mode()?;
    q_moment_weighted(&[(1.0, state)], order, grid)
}

/// Ensemble version of [`q_function_moment`]; `Q` is the weighted average of
/// the member `Q` functions.
pub fn q_function_moment_density(
    rho: &FockDensity,
    order: u32,
    grid: &QuadratureGrid,
) -> Result<QMomentResult> {
    let members: Vec<(f64, &FockState)> = rho
        .members()
        .iter()
        .map(|m| (m.weight, &m.state))
        .collect();
    q_moment_weighted(&members, order, grid)
}

fn q_moment_weighted(
    members: &[(f64, &FockState)],
    order: u32,
    grid: &QuadratureGrid,
) -> Result<QMomentResult> {
    if grid.radial == 0 || grid.angular == 0 {
        return Err(Error::Domain {
            name: "grid",
            value: 0.0,
            expected: "positive radial and angular resolution",
        });
    }
    let trace: f64 = members.iter().map(|(w, s)| w * s.norm_sq()).sum();
    // Coherent-expansion coefficients ψ_n / sqrt(n!), one set per member.
    let mut coeffs: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(members.len());
    let mut top_level = 0usize;
    for (weight, state) in members {
        state.require_single_mode()?;
        if *weight == 0.0 {
            continue;
        }
        if let Some(l) = state.support_top(1e-8)? {
            top_level = top_level.max(l);
        }
        let mut c = Vec::with_capacity(state.dim());
        let mut inv_sqrt_fact = 1.0;
        for (n, a) in state.amplitudes().iter().enumerate() {
            if n > 0 {
                inv_sqrt_fact /= (n as f64).sqrt();
            }
            c.push(a * inv_sqrt_fact);
        }
        coeffs.push((*weight, c));
    }
    let radius = grid
        .radius
        .unwrap_or_else(|| 4.0f64.max((top_level as f64).sqrt() + 5.0));
    let dr = radius / grid.radial as f64;
    let dtheta = std::f64::consts::TAU / grid.angular as f64;

    // Weighted |<α|ψ>|² summed over the ensemble, without the Gaussian.
    let ring_power = |r: f64| -> f64 {
        (0..grid.angular)
            .map(|j| {
                let theta = j as f64 * dtheta;
                let z = Complex64::from_polar(r, -theta); // conj(α)
                coeffs
                    .iter()
                    .map(|(w, c)| {
                        let mut p = Complex64::ZERO;
                        for cn in c.iter().rev() {
                            p = p * z + cn;
                        }
                        w * p.norm_sqr()
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
    };

    // One radial shell per task; shells are summed in index order afterwards
    // so the result does not depend on the thread count.
    let shells: Vec<f64> = (0..grid.radial)
        .into_par_iter()
        .map(|k| {
            let r = (k as f64 + 0.5) * dr;
            let envelope = (-r * r).exp() * r.powi(2 * order as i32 + 1);
            ring_power(r) * envelope
        })
        .collect();
    let value = shells.iter().sum::<f64>() * dr * dtheta / (std::f64::consts::PI * trace);

    let boundary = ring_power(radius) * (-radius * radius).exp()
        * radius.powi(2 * order as i32 + 1)
        * dtheta
        / (std::f64::consts::PI * trace);
    Ok(QMomentResult {
        value,
        boundary_integrand: boundary,
        tail_ok: boundary < grid.tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_cutoff, thermal_cutoff_with};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn subtraction_matrix_entries() {
        let bosonic = subtraction_matrix(&CoefficientProfile::Bosonic, 2);
        assert_eq!(bosonic.entries()[(0, 1)], c(1.0));
        assert_eq!(bosonic.entries()[(1, 2)], c(2.0f64.sqrt()));
        assert_eq!(bosonic.entries()[(0, 0)], c(0.0));

        let classical = subtraction_matrix(&CoefficientProfile::Classical, 2);
        assert_eq!(classical.entries()[(0, 1)], c(1.0));
        assert_eq!(classical.entries()[(1, 2)], c(1.0));

        let fermionic = subtraction_matrix(&CoefficientProfile::Fermionic, 2);
        assert_eq!(fermionic.entries()[(0, 1)], c(1.0));
        assert_eq!(fermionic.entries()[(1, 2)], c(0.0));
        assert_eq!(
            fermionic.entries().iter().filter(|z| **z != c(0.0)).count(),
            1
        );
    }

    #[test]
    fn add_then_subtract_diagonals() {
        let bosonic = add_then_subtract_matrix(&CoefficientProfile::Bosonic, 4);
        let diag: Vec<f64> = (0..5).map(|i| bosonic.entries()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 2.0, 3.0, 4.0, 0.0]);

        let classical = add_then_subtract_matrix(&CoefficientProfile::Classical, 4);
        let diag: Vec<f64> = (0..5).map(|i| classical.entries()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, 1.0, 0.0]);

        let fermionic = add_then_subtract_matrix(&CoefficientProfile::Fermionic, 4);
        let diag: Vec<f64> = (0..5).map(|i| fermionic.entries()[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn direct_diagonal_matches_matrix_product() {
        for profile in [
            CoefficientProfile::Classical,
            CoefficientProfile::Bosonic,
            CoefficientProfile::Fermionic,
            CoefficientProfile::custom(vec![0.3, 2.0, 0.0, 5.5]).unwrap(),
        ] {
            let cutoff = 7;
            let sub = subtraction_matrix(&profile, cutoff);
            let product = sub.matmul(&sub.dagger()).unwrap();
            let direct = add_then_subtract_matrix(&profile, cutoff);
            assert!(direct.max_abs_diff(&product) < 1e-14);

            let product_rev = sub.dagger().matmul(&sub).unwrap();
            let direct_rev = subtract_then_add_matrix(&profile, cutoff);
            assert!(direct_rev.max_abs_diff(&product_rev) < 1e-14);
        }
    }

    #[test]
    fn commutator_interior_identities() {
        let bosonic = commutator_matrix(&CoefficientProfile::Bosonic, 6);
        for i in 0..=4 {
            for j in 0..=4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(bosonic.interior()[(i, j)], c(expected));
            }
        }
        assert_eq!(bosonic.top_edge(), c(-6.0));

        // Equal coefficients leave only the vacuum projector.
        let classical = commutator_matrix(&CoefficientProfile::Classical, 6);
        for i in 0..=4 {
            let expected = if i == 0 { 1.0 } else { 0.0 };
            assert_eq!(classical.interior()[(i, i)], c(expected));
        }

        let fermionic = anticommutator_matrix(&CoefficientProfile::Fermionic, 6);
        for i in 0..=6 {
            let expected = if i <= 1 { 1.0 } else { 0.0 };
            assert_eq!(fermionic.entries()[(i, i)], c(expected));
        }
    }

    #[test]
    fn indistinguishability_number_states() {
        let cutoff = 12;
        for m in 0..=10usize {
            let state = FockState::number(m, cutoff).unwrap();
            assert_eq!(
                indistinguishability(&state, &CoefficientProfile::Bosonic).unwrap(),
                (m + 1) as f64
            );
            assert_eq!(
                indistinguishability(&state, &CoefficientProfile::Classical).unwrap(),
                1.0
            );
        }
        let zero = FockState::number(0, cutoff).unwrap();
        let one = FockState::number(1, cutoff).unwrap();
        assert_eq!(
            indistinguishability(&zero, &CoefficientProfile::Fermionic).unwrap(),
            1.0
        );
        assert_eq!(
            indistinguishability(&one, &CoefficientProfile::Fermionic).unwrap(),
            0.0
        );
    }

    #[test]
    fn indistinguishability_guard_rejects_cutoff_riders() {
        let top = FockState::number(5, 5).unwrap();
        assert!(matches!(
            indistinguishability(&top, &CoefficientProfile::Bosonic),
            Err(Error::Truncation(_))
        ));
        // Classical ladders also connect upward, so the same guard applies.
        assert!(indistinguishability(&top, &CoefficientProfile::Classical).is_err());
        // The fermionic ladder is already zero above level 1.
        assert!(indistinguishability(&top, &CoefficientProfile::Fermionic).is_ok());
    }

    #[test]
    fn indistinguishability_coherent_thermal_mixed() {
        let alpha = Complex64::new(1.5, 0.0);
        let (state, _) = FockState::coherent(alpha, coherent_cutoff(alpha)).unwrap();
        assert_abs_diff_eq!(
            indistinguishability(&state, &CoefficientProfile::Bosonic).unwrap(),
            3.25,
            epsilon = 1e-10
        );

        let (rho, _) = FockDensity::thermal(2.0, crate::fock::thermal_cutoff(2.0)).unwrap();
        assert_abs_diff_eq!(
            indistinguishability_density(&rho, &CoefficientProfile::Bosonic).unwrap(),
            3.0,
            epsilon = 1e-8
        );

        for p in [0.0, 0.25, 1.0 / 3.0, 0.5, 1.0] {
            let rho = FockDensity::mixed01(p, 4).unwrap();
            assert_abs_diff_eq!(
                indistinguishability_density(&rho, &CoefficientProfile::Bosonic).unwrap(),
                1.0 + p,
                epsilon = 1e-15
            );
            assert_eq!(
                indistinguishability_density(&rho, &CoefficientProfile::Fermionic).unwrap(),
                1.0 - p
            );
        }
    }

    #[test]
    fn higher_moment_number_state_oracle() {
        // Oracle: dense matrix application of a† twice on |1>.
        let state = FockState::number(1, 8).unwrap();
        let adag = addition_matrix(&CoefficientProfile::Bosonic, 8);
        let lifted = adag.apply(&adag.apply(&state).unwrap()).unwrap();
        let expected = lifted.norm_sq();
        assert_abs_diff_eq!(expected, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(higher_moment(&state, 2).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn higher_moment_closed_forms() {
        // L_2(-1) = 3.5 from the recurrence, so 2! L_2(-1) = 7.
        assert_abs_diff_eq!(laguerre(2, -1.0), 3.5, epsilon = 1e-15);
        assert_abs_diff_eq!(coherent_moment_closed_form(1.0, 2), 7.0, epsilon = 1e-12);

        let (state, _) = FockState::coherent(Complex64::ONE, 40).unwrap();
        assert_relative_eq!(
            higher_moment(&state, 2).unwrap(),
            7.0,
            max_relative = 1e-10
        );

        let (rho, _) = FockDensity::thermal(1.0, thermal_cutoff_with(1.0, 1e-18)).unwrap();
        assert_relative_eq!(
            higher_moment_density(&rho, 3).unwrap(),
            48.0,
            max_relative = 1e-8
        );
        assert_abs_diff_eq!(thermal_moment_closed_form(1.0, 3), 48.0, epsilon = 1e-12);
        assert_abs_diff_eq!(thermal_moment_closed_form(2.0, 2), 18.0, epsilon = 1e-12);
    }

    #[test]
    fn higher_moment_diagonal_sum_oracle() {
        // Oracle: Σ_m P(m) (m+n)!/m! over the truncated distribution.
        let (rho, _) = FockDensity::thermal(0.8, thermal_cutoff_with(0.8, 1e-16)).unwrap();
        let order = 3u32;
        let mut expected = 0.0;
        for member in rho.members() {
            let m = member
                .state
                .amplitudes()
                .iter()
                .position(|a| *a != Complex64::ZERO)
                .unwrap();
            let rising: f64 = (m + 1..=m + order as usize).map(|k| k as f64).product();
            expected += member.weight * rising;
        }
        assert_relative_eq!(
            higher_moment_density(&rho, order).unwrap(),
            expected,
            max_relative = 1e-10
        );
    }

    #[test]
    fn higher_moment_guard() {
        let state = FockState::number(4, 8).unwrap();
        assert!(matches!(
            higher_moment(&state, 2),
            Err(Error::Truncation(_))
        ));
        assert!(higher_moment(&FockState::number(3, 8).unwrap(), 2).is_ok());
        assert!(higher_moment(&FockState::vacuum(8), 0).is_err());
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre(0, -1.0), 1.0);
        assert_eq!(laguerre(1, -1.0), 2.0);
        assert_abs_diff_eq!(laguerre(3, -1.0), 17.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coherent_moment_closed_form(1.0, 0), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(coherent_moment_closed_form(1.0, 1), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn q_moment_vacuum_and_number() {
        let grid = QuadratureGrid::default();
        let vacuum = FockState::vacuum(10);
        let result = q_function_moment(&vacuum, 1, &grid).unwrap();
        assert!(result.tail_ok);
        assert_abs_diff_eq!(result.value, 1.0, epsilon = 1e-3);

        let one = FockState::number(1, 10).unwrap();
        let result = q_function_moment(&one, 2, &grid).unwrap();
        assert_abs_diff_eq!(result.value, 6.0, epsilon = 1e-3);
    }

    #[test]
    fn q_moment_coherent_matches_closed_form() {
        let (state, _) = FockState::coherent(Complex64::ONE, 30).unwrap();
        let result = q_function_moment(&state, 1, &QuadratureGrid::default()).unwrap();
        assert!(result.tail_ok);
        assert_abs_diff_eq!(result.value, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn q_moment_tail_flag_on_small_disc() {
        let (state, _) = FockState::coherent(Complex64::new(2.0, 0.0), 30).unwrap();
        let grid = QuadratureGrid {
            radius: Some(2.0),
            ..Default::default()
        };
        let result = q_function_moment(&state, 2, &grid).unwrap();
        assert!(!result.tail_ok);
    }

    #[test]
    fn bosonic_inequality_on_factory_states() {
        let vacuum = FockState::vacuum(8);
        assert_eq!(
            indistinguishability(&vacuum, &CoefficientProfile::Bosonic).unwrap(),
            1.0
        );
        for alpha_sq in [0.3f64, 1.0, 2.5] {
            let alpha = Complex64::new(alpha_sq.sqrt(), 0.0);
            let (state, _) = FockState::coherent(alpha, coherent_cutoff(alpha)).unwrap();
            assert!(indistinguishability(&state, &CoefficientProfile::Bosonic).unwrap() > 1.0);
        }
    }

    #[test]
    fn fermionic_inequality_two_level() {
        // Superpositions and mixtures of |0>, |1> stay at or below one.
        for (a, b) in [(1.0, 0.0), (0.6, 0.8), (0.0, 1.0)] {
            let state =
                FockState::from_amplitudes(1, 3, vec![c(a), c(b), c(0.0), c(0.0)]).unwrap();
            let value = indistinguishability(&state, &CoefficientProfile::Fermionic).unwrap();
            assert!(value <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn monotone_in_mean_photon_number() {
        let mut last = 0.0;
        for alpha_sq in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
            let alpha = Complex64::new(alpha_sq.sqrt(), 0.0);
            let (state, _) = FockState::coherent(alpha, coherent_cutoff(alpha)).unwrap();
            let value = indistinguishability(&state, &CoefficientProfile::Bosonic).unwrap();
            assert!(value > last);
            last = value;
        }
        let mut last = 0.0;
        for nbar in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let (rho, _) = FockDensity::thermal(nbar, crate::fock::thermal_cutoff(nbar)).unwrap();
            let value = indistinguishability_density(&rho, &CoefficientProfile::Bosonic).unwrap();
            assert!(value > last);
            last = value;
        }
    }

    #[test]
    fn custom_profile_weights() {
        let profile = CoefficientProfile::custom(vec![0.0, 3.0]).unwrap();
        assert_eq!(profile.weight_sq(0), 0.0);
        assert_eq!(profile.weight_sq(1), 0.0);
        assert_eq!(profile.weight_sq(2), 3.0);
        assert_eq!(profile.weight_sq(3), 0.0);
        assert!(CoefficientProfile::custom(vec![-1.0]).is_err());

        // Vanishing k_1 kills the vacuum projector in the commutator.
        let m = commutator_matrix(&profile, 5);
        assert_eq!(m.entries()[(0, 0)], c(0.0));
    }

    #[test]
    fn operator_matrix_json_layout() {
        let m = subtraction_matrix(&CoefficientProfile::Fermionic, 1);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            "{\"cutoff\":1,\"entries\":[[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]}"
        );
    }
}
