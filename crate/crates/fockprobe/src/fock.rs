//! Pure states and diagonal mixtures on truncated Fock spaces.
//!
//! A [`FockState`] stores dense complex amplitudes over occupation tuples
//! `(n_1, ..., n_m)` with `0 <= n_k <= cutoff`, flattened in row-major order
//! (first mode most significant). A [`FockDensity`] is a weighted ensemble of
//! pure states; every mixture used here is diagonal in the number basis, so an
//! ensemble is both exact and much cheaper than a dense density matrix.
//!
//! Factories that approximate an infinite-dimensional target return a
//! [`TruncationReport`] carrying the probability weight left beyond the
//! cutoff, so truncation error is visible instead of silent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tail-mass target for the automatic cutoff helpers.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;

/// Flat index of an occupation tuple, row-major with the first mode most
/// significant. Returns `None` if any occupation exceeds the cutoff.
pub fn index_of(occupations: &[usize], cutoff: usize) -> Option<usize> {
    let base = cutoff + 1;
    let mut index = 0;
    for &n in occupations {
        if n > cutoff {
            return None;
        }
        index = index * base + n;
    }
    Some(index)
}

/// Occupation tuple for a flat index; inverse of [`index_of`].
pub fn occupation_of(index: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    let base = cutoff + 1;
    let mut occ = vec![0; modes];
    let mut rest = index;
    for slot in occ.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    occ
}

/// Cutoff and the probability weight beyond it in the untruncated target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub cutoff: usize,
    pub tail_mass: f64,
}

/// Pure state on a truncated Fock space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState")]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amplitudes: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawState {
    modes: usize,
    cutoff: usize,
    amplitudes: Vec<Complex64>,
}

impl TryFrom<RawState> for FockState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        FockState::from_amplitudes(raw.modes, raw.cutoff, raw.amplitudes)
    }
}

impl FockState {
    /// Number state `|m>` on a single mode.
    pub fn number(m: usize, cutoff: usize) -> Result<Self> {
        if m > cutoff {
            return Err(Error::OccupationOutOfRange {
                occupation: m,
                cutoff,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; cutoff + 1];
        amplitudes[m] = Complex64::ONE;
        Ok(Self {
            modes: 1,
            cutoff,
            amplitudes,
        })
    }

    /// Vacuum state on a single mode.
    pub fn vacuum(cutoff: usize) -> Self {
        Self::number(0, cutoff).expect("vacuum fits any cutoff")
    }

    /// Coherent state `|alpha>` truncated at `cutoff` and renormalized.
    ///
    /// The report carries the Poisson weight beyond the cutoff, accumulated
    /// directly from the tail terms so sub-epsilon masses stay meaningful.
    pub fn coherent(alpha: Complex64, cutoff: usize) -> Result<(Self, TruncationReport)> {
        if cutoff < 1 {
            return Err(Error::Domain {
                name: "cutoff",
                value: cutoff as f64,
                expected: "cutoff >= 1 for coherent states",
            });
        }
        let alpha_sq = alpha.norm_sqr();
        let gaussian = (-alpha_sq / 2.0).exp();
        let mut amplitudes = Vec::with_capacity(cutoff + 1);
        let mut term = Complex64::new(gaussian, 0.0);
        amplitudes.push(term);
        for n in 1..=cutoff {
            term *= alpha / (n as f64).sqrt();
            amplitudes.push(term);
        }
        let tail_mass = poisson_tail(alpha_sq, cutoff);
        let mut state = Self {
            modes: 1,
            cutoff,
            amplitudes,
        };
        state.normalize_in_place();
        Ok((state, TruncationReport { cutoff, tail_mass }))
    }

    /// Build a state from raw amplitudes; the length must match the space.
    pub fn from_amplitudes(
        modes: usize,
        cutoff: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidState("mode count must be positive".into()));
        }
        let dim = (cutoff + 1)
            .checked_pow(modes as u32)
            .ok_or_else(|| Error::InvalidState("space dimension overflows".into()))?;
        if amplitudes.len() != dim {
            return Err(Error::InvalidState(format!(
                "expected {dim} amplitudes for {modes} mode(s) at cutoff {cutoff}, got {}",
                amplitudes.len()
            )));
        }
        if !amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self {
            modes,
            cutoff,
            amplitudes,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// Amplitude at an occupation tuple.
    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        if occupations.len() != self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                got: occupations.len(),
            });
        }
        match index_of(occupations, self.cutoff) {
            Some(i) => Ok(self.amplitudes[i]),
            None => Err(Error::OccupationOutOfRange {
                occupation: *occupations.iter().max().unwrap(),
                cutoff: self.cutoff,
            }),
        }
    }

    /// Squared norm `Σ |amplitude|²`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|²` normalized by both squared norms.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let overlap = self.inner(other)?;
        Ok(overlap.norm_sqr() / (self.norm_sq() * other.norm_sq()))
    }

    /// Tensor product; modes add and cutoffs must agree.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            modes: self.modes + other.modes,
            cutoff: self.cutoff,
            amplitudes,
        })
    }

    /// Copy scaled to unit norm. Errors on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm_sq = self.norm_sq();
        if norm_sq == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero state".into()));
        }
        let mut out = self.clone();
        let scale = norm_sq.sqrt().recip();
        for a in out.amplitudes.iter_mut() {
            *a *= scale;
        }
        Ok(out)
    }

    fn normalize_in_place(&mut self) {
        let scale = self.norm_sq().sqrt().recip();
        for a in self.amplitudes.iter_mut() {
            *a *= scale;
        }
    }

    /// Occupation distribution of one mode, marginalized over the others.
    pub fn mode_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        if mode >= self.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                got: mode + 1,
            });
        }
        let base = self.cutoff + 1;
        // Stride layout: occupation of `mode` changes every `stride` entries.
        let stride = base.pow((self.modes - mode - 1) as u32);
        let mut dist = vec![0.0; base];
        for (i, a) in self.amplitudes.iter().enumerate() {
            dist[(i / stride) % base] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Mean occupation of one mode (normalized by the squared norm).
    pub fn mean_occupation(&self, mode: usize) -> Result<f64> {
        let dist = self.mode_distribution(mode)?;
        let total: f64 = dist.iter().sum();
        Ok(dist
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
            / total)
    }

    /// Largest single-mode level with `|amplitude| > tol`; `None` when no
    /// level qualifies.
    pub fn support_top(&self, tol: f64) -> Result<Option<usize>> {
        self.require_single_mode()?;
        Ok(self
            .amplitudes
            .iter()
            .rposition(|a| a.norm() > tol))
    }

    /// Probability weight at single-mode levels `>= from`, relative to the
    /// squared norm.
    pub fn band_probability(&self, from: usize) -> Result<f64> {
        self.require_single_mode()?;
        if from > self.cutoff {
            return Ok(0.0);
        }
        let band: f64 = self.amplitudes[from..].iter().map(|a| a.norm_sqr()).sum();
        Ok(band / self.norm_sq())
    }

    pub(crate) fn require_single_mode(&self) -> Result<()> {
        if self.modes != 1 {
            return Err(Error::ModeMismatch {
                expected: 1,
                got: self.modes,
            });
        }
        Ok(())
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        if self.modes != other.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes,
                got: other.modes,
            });
        }
        Ok(())
    }
}

/// One weighted member of a mixed-state ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: FockState,
}

/// Mixed state as a weighted ensemble of pure states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity")]
pub struct FockDensity {
    ensemble: Vec<EnsembleMember>,
}

#[derive(Deserialize)]
struct RawDensity {
    ensemble: Vec<EnsembleMember>,
}

impl TryFrom<RawDensity> for FockDensity {
    type Error = Error;

    fn try_from(raw: RawDensity) -> Result<Self> {
        FockDensity::from_members(raw.ensemble)
    }
}

impl FockDensity {
    /// Thermal state with mean photon number `nbar`, truncated at `cutoff`
    /// and renormalized. The report carries the geometric tail weight.
    pub fn thermal(nbar: f64, cutoff: usize) -> Result<(Self, TruncationReport)> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::Domain {
                name: "nbar",
                value: nbar,
                expected: "nbar >= 0",
            });
        }
        let q = nbar / (1.0 + nbar);
        let tail_mass = if q == 0.0 {
            0.0
        } else {
            q.powi(cutoff as i32 + 1)
        };
        let head = 1.0 - tail_mass;
        let mut ensemble = Vec::with_capacity(cutoff + 1);
        let mut weight = 1.0 / (1.0 + nbar);
        for n in 0..=cutoff {
            ensemble.push(EnsembleMember {
                weight: weight / head,
                state: FockState::number(n, cutoff)?,
            });
            weight *= q;
        }
        Ok((Self { ensemble }, TruncationReport { cutoff, tail_mass }))
    }

    /// Two-member mixture `(1-p)|0><0| + p|1><1|`.
    pub fn mixed01(p: f64, cutoff: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                expected: "0 <= p <= 1",
            });
        }
        Ok(Self {
            ensemble: vec![
                EnsembleMember {
                    weight: 1.0 - p,
                    state: FockState::number(0, cutoff)?,
                },
                EnsembleMember {
                    weight: p,
                    state: FockState::number(1, cutoff)?,
                },
            ],
        })
    }

    /// Wrap a pure state as a one-member ensemble.
    pub fn from_pure(state: FockState) -> Self {
        Self {
            ensemble: vec![EnsembleMember {
                weight: 1.0,
                state,
            }],
        }
    }

    /// Build from explicit members; all must share modes and cutoff, and
    /// weights must be nonnegative.
    pub fn from_members(ensemble: Vec<EnsembleMember>) -> Result<Self> {
        let first = ensemble
            .first()
            .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        let (modes, cutoff) = (first.state.modes(), first.state.cutoff());
        for member in &ensemble {
            if member.state.modes() != modes || member.state.cutoff() != cutoff {
                return Err(Error::InvalidState(
                    "ensemble members live on different spaces".into(),
                ));
            }
            if !(member.weight >= 0.0) {
                return Err(Error::InvalidState("negative ensemble weight".into()));
            }
        }
        Ok(Self { ensemble })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.ensemble
    }

    pub fn modes(&self) -> usize {
        self.ensemble[0].state.modes()
    }

    pub fn cutoff(&self) -> usize {
        self.ensemble[0].state.cutoff()
    }

    pub fn total_weight(&self) -> f64 {
        self.ensemble.iter().map(|m| m.weight).sum()
    }

    /// `Σ weight · norm_sq(member)`, the trace of the represented operator.
    pub fn weighted_norm_sq(&self) -> f64 {
        self.ensemble
            .iter()
            .map(|m| m.weight * m.state.norm_sq())
            .sum()
    }

    /// Ensemble mean occupation of one mode, normalized by the trace.
    pub fn mean_occupation(&self, mode: usize) -> Result<f64> {
        let mut acc = 0.0;
        for member in &self.ensemble {
            let dist = member.state.mode_distribution(mode)?;
            acc += member.weight
                * dist
                    .iter()
                    .enumerate()
                    .map(|(n, p)| n as f64 * p)
                    .sum::<f64>();
        }
        Ok(acc / self.weighted_norm_sq())
    }

    /// Trace-weighted probability at single-mode levels `>= from`.
    pub fn band_probability(&self, from: usize) -> Result<f64> {
        let mut acc = 0.0;
        for member in &self.ensemble {
            member.state.require_single_mode()?;
            if from <= member.state.cutoff() {
                acc += member.weight
                    * member.state.amplitudes()[from..]
                        .iter()
                        .map(|a| a.norm_sqr())
                        .sum::<f64>();
            }
        }
        Ok(acc / self.weighted_norm_sq())
    }
}

/// Poisson tail `Σ_{n > cutoff} e^{-λ} λ^n / n!`, accumulated from the tail
/// side so that masses far below machine epsilon survive.
pub fn poisson_tail(lambda: f64, cutoff: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    // First tail term via logarithms to avoid overflow in λ^n / n!.
    let n0 = cutoff as f64 + 1.0;
    let mut log_term = -lambda + n0 * lambda.ln() - ln_factorial(cutoff + 1);
    if log_term < -744.0 {
        // Below exp underflow; walk the ratio up in log space.
        let mut tail_log = f64::NEG_INFINITY;
        let mut n = n0;
        for _ in 0..200 {
            tail_log = log_add(tail_log, log_term);
            n += 1.0;
            log_term += lambda.ln() - n.ln();
            if log_term < tail_log - 40.0 {
                break;
            }
        }
        return tail_log.exp();
    }
    let mut term = log_term.exp();
    let mut tail = 0.0;
    let mut n = n0;
    while term > tail * 1e-18 + f64::MIN_POSITIVE {
        tail += term;
        n += 1.0;
        term *= lambda / n;
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Smallest cutoff for a coherent state such that the truncated tail mass is
/// below `tail_target` and the top-level occupation probability is below
/// `top_target`. The second constraint keeps factory states clear of the
/// truncation guards in the operator modules.
pub fn coherent_cutoff_with(alpha_sq: f64, tail_target: f64, top_target: f64) -> usize {
    if alpha_sq == 0.0 {
        return 1;
    }
    let mut cutoff = 1usize;
    let mut pmf = (-alpha_sq).exp() * alpha_sq; // occupation probability at the cutoff level
    loop {
        let top_ok = if pmf > 0.0 {
            pmf < top_target
        } else {
            // pmf underflowed; the tail (computed in log space) bounds it.
            poisson_tail(alpha_sq, cutoff - 1) < top_target
        };
        if top_ok && poisson_tail(alpha_sq, cutoff) < tail_target {
            return cutoff;
        }
        cutoff += 1;
        pmf *= alpha_sq / cutoff as f64;
    }
}

/// Automatic coherent-state cutoff at the default targets.
pub fn coherent_cutoff(alpha: Complex64) -> usize {
    coherent_cutoff_with(alpha.norm_sqr(), DEFAULT_TAIL_TARGET, 1e-17)
}

/// Smallest cutoff for a thermal state with geometric tail below
/// `tail_target`, plus one spare level so the top weight sits strictly below
/// the tail target as well.
pub fn thermal_cutoff_with(nbar: f64, tail_target: f64) -> usize {
    if nbar <= 0.0 {
        return 1;
    }
    let q = nbar / (1.0 + nbar);
    let mut cutoff = 1;
    while q.powi(cutoff as i32 + 1) >= tail_target {
        cutoff += 1;
    }
    cutoff + 1
}

/// Automatic thermal-state cutoff at the default tail target.
pub fn thermal_cutoff(nbar: f64) -> usize {
    thermal_cutoff_with(nbar, DEFAULT_TAIL_TARGET)
}
