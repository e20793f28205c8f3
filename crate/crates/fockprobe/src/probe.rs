//! Simulated counting protocols that estimate `<ψ|a a†|ψ>`.
//!
//! Two probes are modeled. A weak two-mode squeezing interaction feeds an
//! idler mode whose click statistics give `P(0)` and `P(>=1)`; the ratio
//! `N(1) / (s² N(0))` recovers the addition norm. A resonant two-level atom
//! crossing a cavity plays the same role with `N_g / ((gτ)² N_e)`. Both come
//! with an exact-probability path (no sampling noise) and a Monte Carlo path
//! driven by the counter-based generator in [`crate::sampling`], so results
//! are bit-reproducible for a fixed seed at any thread count.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockState;
use crate::ladder::{indistinguishability, CoefficientProfile};
use crate::sampling::count_below;

/// Idler-path probability model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdpaMode {
    /// Keep only the single-pair term of the weak interaction.
    FirstOrder,
    /// Propagate the full two-mode interaction on the truncated space.
    Exact,
}

/// Parameters of the parametric-amplifier protocol.
#[derive(Clone, Copy, Debug)]
pub struct NdpaConfig {
    /// Coupling strength; the protocol assumes `s` well below one.
    pub s: f64,
    /// On-off detector efficiency, modeled as Bernoulli thinning.
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: NdpaMode,
}

impl NdpaConfig {
    fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::Domain {
                name: "s",
                value: self.s,
                expected: "s > 0",
            });
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain {
                name: "eta",
                value: self.eta,
                expected: "0 <= eta <= 1",
            });
        }
        if self.trials == 0 {
            return Err(Error::Domain {
                name: "trials",
                value: 0.0,
                expected: "trials >= 1",
            });
        }
        Ok(())
    }
}

/// Idler outcome probabilities. `multi_photon` is the weight of two or more
/// idler photons, identically zero in first order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NdpaProbabilities {
    pub p_zero: f64,
    pub p_click: f64,
    pub multi_photon: f64,
}

/// Count tallies and the derived estimator of one sampled run.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    /// `N(0)` clicks for the amplifier, `N_e` detections for the atom probe.
    pub label_zero_count: u64,
    /// `N(1)` clicks for the amplifier, `N_g` detections for the atom probe.
    pub label_one_count: u64,
    /// Efficiency-corrected estimator of `<a a†>`.
    pub estimator: f64,
    /// The uncorrected textbook form `η N(1) / (s² N(0))`; amplifier only.
    pub estimator_literal: Option<f64>,
    /// True `<a a†>` of the input state, for bias bookkeeping.
    pub exact_expectation: f64,
    /// Binomial standard error propagated through the estimator.
    pub standard_error: f64,
    /// Set when the varying count is zero and the error bar is meaningless.
    pub degenerate_statistics: bool,
}

fn add_subtract_expectation(state: &FockState) -> Result<f64> {
    indistinguishability(state, &CoefficientProfile::Bosonic)
}

fn ensure_headroom(state: &FockState, headroom: usize, context: &str) -> Result<()> {
    if state.cutoff() < headroom {
        return Err(Error::Truncation(format!(
            "cutoff {} leaves no headroom for {context}",
            state.cutoff()
        )));
    }
    let from = state.cutoff() - headroom + 1;
    let norm = state.norm_sq().sqrt();
    for (offset, a) in state.amplitudes()[from..].iter().enumerate() {
        if a.norm() / norm >= 1e-8 {
            return Err(Error::Truncation(format!(
                "amplitude {:.3e} at level {} too close to cutoff {} for {context}",
                a.norm() / norm,
                from + offset,
                state.cutoff()
            )));
        }
    }
    Ok(())
}

/// Pair generator `-s (a†b† - a b)` applied once to a two-mode state.
fn apply_pair_generator(amplitudes: &[Complex64], cutoff: usize, s: f64) -> Vec<Complex64> {
    let base = cutoff + 1;
    let mut out = vec![Complex64::ZERO; amplitudes.len()];
    for (index, &amp) in amplitudes.iter().enumerate() {
        if amp == Complex64::ZERO {
            continue;
        }
        let na = index / base;
        let nb = index % base;
        if na < cutoff && nb < cutoff {
            let up = (((na + 1) * (nb + 1)) as f64).sqrt();
            out[index + base + 1] -= s * up * amp;
        }
        if na > 0 && nb > 0 {
            let down = ((na * nb) as f64).sqrt();
            out[index - base - 1] += s * down * amp;
        }
    }
    out
}

fn taylor_step(amplitudes: &mut Vec<Complex64>, cutoff: usize, s: f64) {
    let mut term = amplitudes.clone();
    let mut acc = amplitudes.clone();
    let floor = acc.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() * 1e-18;
    for k in 1..=300u32 {
        term = apply_pair_generator(&term, cutoff, s);
        let scale = 1.0 / k as f64;
        let mut term_norm_sq = 0.0;
        for (t, a) in term.iter_mut().zip(acc.iter_mut()) {
            *t *= scale;
            *a += *t;
            term_norm_sq += t.norm_sqr();
        }
        if term_norm_sq.sqrt() <= floor {
            break;
        }
    }
    *amplitudes = acc;
}

/// Two-mode squeezing map on `|ψ>_a |0>_b`, evaluated by Taylor series of
/// the generator with step halving until the norm drift is below 1e-12. The
/// truncated generator is exactly anti-Hermitian, so norm drift measures
/// series convergence.
fn ndpa_exact_joint(state: &FockState, s: f64) -> Result<FockState> {
    ensure_headroom(state, 4, "the two-mode pair interaction")?;
    let joint = state.tensor(&FockState::vacuum(state.cutoff()))?;
    let input_norm = joint.norm_sq();
    let mut steps = 1u32;
    loop {
        let mut amplitudes = joint.amplitudes().to_vec();
        let per_step = s / steps as f64;
        for _ in 0..steps {
            taylor_step(&mut amplitudes, state.cutoff(), per_step);
        }
        let drift = (amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - input_norm).abs();
        if drift <= 1e-12 * input_norm {
            return FockState::from_amplitudes(2, state.cutoff(), amplitudes);
        }
        if steps >= 1024 {
            return Err(Error::Truncation(
                "pair-interaction series did not settle; raise the cutoff".into(),
            ));
        }
        steps *= 2;
    }
}

/// Idler photon-count probabilities for a normalized signal state.
pub fn ndpa_probabilities(state: &FockState, cfg: &NdpaConfig) -> Result<NdpaProbabilities> {
    cfg.validate()?;
    state.require_single_mode()?;
    match cfg.mode {
        NdpaMode::FirstOrder => {
            let expectation = add_subtract_expectation(state)?;
            let weight = cfg.s * cfg.s * expectation;
            Ok(NdpaProbabilities {
                p_zero: 1.0 / (1.0 + weight),
                p_click: weight / (1.0 + weight),
                multi_photon: 0.0,
            })
        }
        NdpaMode::Exact => {
            let joint = ndpa_exact_joint(state, cfg.s)?;
            let base = state.cutoff() + 1;
            let total = joint.norm_sq();
            let mut idler = vec![0.0; base];
            for (index, a) in joint.amplitudes().iter().enumerate() {
                idler[index % base] += a.norm_sqr();
            }
            let p_zero = idler[0] / total;
            let p_one = idler[1] / total;
            Ok(NdpaProbabilities {
                p_zero,
                p_click: 1.0 - p_zero,
                multi_photon: (1.0 - p_zero - p_one).max(0.0),
            })
        }
    }
}

/// Sampled idler counting. Clicks are Bernoulli draws at `η P(>=1)`; the
/// estimator divides the thinned count by `η`, which is the convention that
/// stays unbiased in the infinite-trial limit, while the uncorrected form is
/// reported alongside in [`CountRecord::estimator_literal`].
pub fn ndpa_sample(state: &FockState, cfg: &NdpaConfig) -> Result<CountRecord> {
    cfg.validate()?;
    if cfg.eta == 0.0 {
        return Err(Error::DegenerateStatistics(
            "detector efficiency is zero; no clicks can ever divide out".into(),
        ));
    }
    let probabilities = ndpa_probabilities(state, cfg)?;
    let exact_expectation = add_subtract_expectation(state)?;
    let click_probability = cfg.eta * probabilities.p_click;
    let clicks = count_below(cfg.seed, cfg.trials, click_probability);
    let silent = cfg.trials - clicks;
    if silent == 0 {
        return Err(Error::DegenerateStatistics(
            "every trial clicked; N(0) = 0".into(),
        ));
    }
    let s_sq = cfg.s * cfg.s;
    let estimator = clicks as f64 / (cfg.eta * s_sq * silent as f64);
    let literal = cfg.eta * clicks as f64 / (s_sq * silent as f64);
    let p_hat = clicks as f64 / cfg.trials as f64;
    let standard_error = (p_hat * (1.0 - p_hat) / cfg.trials as f64).sqrt()
        / (cfg.eta * s_sq * (1.0 - p_hat) * (1.0 - p_hat));
    Ok(CountRecord {
        label_zero_count: silent,
        label_one_count: clicks,
        estimator,
        estimator_literal: Some(literal),
        exact_expectation,
        standard_error,
        degenerate_statistics: clicks == 0,
    })
}

/// Atom-probe evolution model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcMode {
    /// First order in `gτ`: `|e>|ψ> - i gτ |g> a†|ψ>`.
    Linearized,
    /// Dressed-state evolution with the full `cos`/`sin` amplitudes.
    Exact,
}

/// Parameters of the atom-cavity protocol.
#[derive(Clone, Copy, Debug)]
pub struct JcConfig {
    /// Atom-field coupling.
    pub g: f64,
    /// Interaction time.
    pub tau: f64,
    pub trials: u64,
    pub seed: u64,
    pub mode: JcMode,
    /// Shared efficiency of the two state detectors. It cancels in the
    /// estimator ratio; the knob exists to demonstrate that numerically.
    pub detector_efficiency: f64,
}

impl JcConfig {
    pub fn gtau(&self) -> f64 {
        self.g * self.tau
    }

    fn validate(&self) -> Result<()> {
        let gtau = self.gtau();
        if !gtau.is_finite() || gtau < 0.0 {
            return Err(Error::Domain {
                name: "g*tau",
                value: gtau,
                expected: "finite g*tau >= 0",
            });
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return Err(Error::Domain {
                name: "detector_efficiency",
                value: self.detector_efficiency,
                expected: "0 <= efficiency <= 1",
            });
        }
        if self.trials == 0 {
            return Err(Error::Domain {
                name: "trials",
                value: 0.0,
                expected: "trials >= 1",
            });
        }
        Ok(())
    }
}

/// Joint state of the two-level atom and the cavity field. The field
/// register is one level larger than the input state so the single added
/// photon is represented exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomFieldState {
    field_cutoff: usize,
    excited: Vec<Complex64>,
    ground: Vec<Complex64>,
}

impl AtomFieldState {
    pub fn field_cutoff(&self) -> usize {
        self.field_cutoff
    }

    /// Field amplitudes alongside the atom in the upper state.
    pub fn excited(&self) -> &[Complex64] {
        &self.excited
    }

    /// Field amplitudes alongside the atom in the lower state.
    pub fn ground(&self) -> &[Complex64] {
        &self.ground
    }

    pub fn excited_weight(&self) -> f64 {
        self.excited.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn ground_weight(&self) -> f64 {
        self.ground.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.excited_weight() + self.ground_weight()
    }

    /// `|<self|other>|²` over the joint space, normalized on both sides.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if self.field_cutoff != other.field_cutoff {
            return Err(Error::CutoffMismatch {
                left: self.field_cutoff,
                right: other.field_cutoff,
            });
        }
        let overlap: Complex64 = self
            .excited
            .iter()
            .zip(&other.excited)
            .chain(self.ground.iter().zip(&other.ground))
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr() / (self.norm_sq() * other.norm_sq()))
    }
}

/// Resonant atom-cavity evolution with the atom prepared in the upper state
/// and the cavity in `state`. The linearized branch is left unnormalized,
/// mirroring the first-order expansion it implements.
pub fn jc_evolve(state: &FockState, cfg: &JcConfig) -> Result<AtomFieldState> {
    cfg.validate()?;
    state.require_single_mode()?;
    let gtau = cfg.gtau();
    let field_cutoff = state.cutoff() + 1;
    let mut excited = vec![Complex64::ZERO; field_cutoff + 1];
    let mut ground = vec![Complex64::ZERO; field_cutoff + 1];
    for (n, &c_n) in state.amplitudes().iter().enumerate() {
        let root = ((n + 1) as f64).sqrt();
        match cfg.mode {
            JcMode::Exact => {
                let angle = gtau * root;
                excited[n] = c_n * angle.cos();
                ground[n + 1] = -Complex64::i() * c_n * angle.sin();
            }
            JcMode::Linearized => {
                excited[n] = c_n;
                ground[n + 1] = -Complex64::i() * c_n * gtau * root;
            }
        }
    }
    Ok(AtomFieldState {
        field_cutoff,
        excited,
        ground,
    })
}

/// Probabilities of detecting the atom in the upper and lower state.
pub fn jc_probabilities(state: &FockState, cfg: &JcConfig) -> Result<(f64, f64)> {
    let joint = jc_evolve(state, cfg)?;
    let total = joint.norm_sq();
    Ok((joint.excited_weight() / total, joint.ground_weight() / total))
}

/// Estimator `rate_g / ((gτ)² rate_e)`. A detector efficiency shared by both
/// rates drops out of the ratio, which is why the sampled protocol can take
/// detection as perfect.
pub fn jc_estimator_from_rates(rate_e: f64, rate_g: f64, gtau: f64) -> f64 {
    rate_g / (gtau * gtau * rate_e)
}

/// Sampled atomic-state detection and the estimator `N_g / ((gτ)² N_e)`.
pub fn jc_sample(state: &FockState, cfg: &JcConfig) -> Result<CountRecord> {
    cfg.validate()?;
    let gtau = cfg.gtau();
    if gtau == 0.0 {
        return Err(Error::DegenerateStatistics(
            "g*tau = 0; the estimator divides by (g*tau)^2".into(),
        ));
    }
    let (_, p_ground) = jc_probabilities(state, cfg)?;
    let exact_expectation = add_subtract_expectation(state)?;
    let n_ground = count_below(cfg.seed, cfg.trials, p_ground);
    let n_excited = cfg.trials - n_ground;
    if n_excited == 0 {
        return Err(Error::DegenerateStatistics(
            "every atom exited in the lower state; N_e = 0".into(),
        ));
    }
    let estimator = n_ground as f64 / (gtau * gtau * n_excited as f64);
    let p_hat = n_ground as f64 / cfg.trials as f64;
    let standard_error = (p_hat * (1.0 - p_hat) / cfg.trials as f64).sqrt()
        / (gtau * gtau * (1.0 - p_hat) * (1.0 - p_hat));
    Ok(CountRecord {
        label_zero_count: n_excited,
        label_one_count: n_ground,
        estimator,
        estimator_literal: None,
        exact_expectation,
        standard_error,
        degenerate_statistics: n_ground == 0,
    })
}

/// One row of an approximation-bias table: the infinite-trial estimator
/// expectation under the exact probability path, against the true value.
#[derive(Clone, Debug)]
pub struct BiasRow {
    pub protocol: &'static str,
    pub parameter: f64,
    pub estimator_expectation: f64,
    pub exact_expectation: f64,
    pub bias: f64,
}

/// Amplifier estimator bias across a grid of coupling strengths, with the
/// exact two-mode propagation supplying the click probability.
pub fn ndpa_bias_scan(state: &FockState, s_values: &[f64], eta: f64) -> Result<Vec<BiasRow>> {
    let exact_expectation = add_subtract_expectation(state)?;
    s_values
        .iter()
        .map(|&s| {
            let cfg = NdpaConfig {
                s,
                eta,
                trials: 1,
                seed: 0,
                mode: NdpaMode::Exact,
            };
            let probs = ndpa_probabilities(state, &cfg)?;
            let click = eta * probs.p_click;
            let estimator_expectation = click / (eta * s * s * (1.0 - click));
            Ok(BiasRow {
                protocol: "ndpa",
                parameter: s,
                estimator_expectation,
                exact_expectation,
                bias: (estimator_expectation - exact_expectation).abs(),
            })
        })
        .collect()
}

/// Atom-probe estimator bias across a grid of `gτ` values under the exact
/// dressed evolution.
pub fn jc_bias_scan(state: &FockState, gtau_values: &[f64]) -> Result<Vec<BiasRow>> {
    let exact_expectation = add_subtract_expectation(state)?;
    gtau_values
        .iter()
        .map(|&gtau| {
            let cfg = JcConfig {
                g: gtau,
                tau: 1.0,
                trials: 1,
                seed: 0,
                mode: JcMode::Exact,
                detector_efficiency: 1.0,
            };
            let (p_e, p_g) = jc_probabilities(state, &cfg)?;
            let estimator_expectation = jc_estimator_from_rates(p_e, p_g, gtau);
            Ok(BiasRow {
                protocol: "jc",
                parameter: gtau,
                estimator_expectation,
                exact_expectation,
                bias: (estimator_expectation - exact_expectation).abs(),
            })
        })
        .collect()
}
