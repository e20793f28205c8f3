//! State descriptors: parsing, cutoff selection, and construction.
//!
//! A descriptor names a factory state (`number:3`, `coherent` with
//! `--alpha`, `thermal` with `--nbar`, `mixed01` with `--p`) or points at a
//! serialized state (`custom-json:path`). Number descriptors accept an
//! inclusive range (`number:0..5`) so scan commands can sweep a ladder.

use std::path::PathBuf;

use num_complex::Complex64;

use fockprobe::fock::{coherent_cutoff, thermal_cutoff_with};
use fockprobe::ladder::{
    coherent_moment_closed_form, higher_moment, higher_moment_density, indistinguishability,
    indistinguishability_density, q_function_moment, thermal_moment_closed_form,
    CoefficientProfile, QMomentResult, QuadratureGrid,
};
use fockprobe::{FockDensity, FockState};

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Number(usize),
    Coherent(f64),
    Thermal(f64),
    Mixed01(f64),
    CustomJson(PathBuf),
}

impl StateSpec {
    pub fn descriptor(&self) -> String {
        match self {
            StateSpec::Number(m) => format!("number:{m}"),
            StateSpec::Coherent(alpha) => format!("coherent:{alpha}"),
            StateSpec::Thermal(nbar) => format!("thermal:{nbar}"),
            StateSpec::Mixed01(p) => format!("mixed01:{p}"),
            StateSpec::CustomJson(path) => format!("custom-json:{}", path.display()),
        }
    }
}

/// Expand `--state` values plus the parameter flags into concrete specs.
pub fn parse_state_specs(
    state_args: &[String],
    alpha: &[f64],
    nbar: &[f64],
    p: &[f64],
) -> Result<Vec<StateSpec>, String> {
    let mut specs = Vec::new();
    for arg in state_args {
        let (kind, inline) = match arg.split_once(':') {
            Some((kind, rest)) => (kind, Some(rest)),
            None => (arg.as_str(), None),
        };
        match kind {
            "number" => {
                let rest = inline.ok_or("number state needs an occupation, e.g. number:3")?;
                if let Some((lo, hi)) = rest.split_once("..") {
                    let lo: usize = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
                    let hi: usize = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
                    if hi < lo {
                        return Err(format!("empty range {lo}..{hi}"));
                    }
                    specs.extend((lo..=hi).map(StateSpec::Number));
                } else {
                    let m: usize = rest
                        .parse()
                        .map_err(|_| format!("bad occupation {rest:?}"))?;
                    specs.push(StateSpec::Number(m));
                }
            }
            "coherent" => match inline {
                Some(rest) => specs.push(StateSpec::Coherent(
                    rest.parse().map_err(|_| format!("bad alpha {rest:?}"))?,
                )),
                None => {
                    if alpha.is_empty() {
                        return Err("coherent state needs --alpha".into());
                    }
                    specs.extend(alpha.iter().map(|&a| StateSpec::Coherent(a)));
                }
            },
            "thermal" => match inline {
                Some(rest) => specs.push(StateSpec::Thermal(
                    rest.parse().map_err(|_| format!("bad nbar {rest:?}"))?,
                )),
                None => {
                    if nbar.is_empty() {
                        return Err("thermal state needs --nbar".into());
                    }
                    specs.extend(nbar.iter().map(|&n| StateSpec::Thermal(n)));
                }
            },
            "mixed01" => match inline {
                Some(rest) => specs.push(StateSpec::Mixed01(
                    rest.parse().map_err(|_| format!("bad p {rest:?}"))?,
                )),
                None => {
                    if p.is_empty() {
                        return Err("mixed01 state needs --p".into());
                    }
                    specs.extend(p.iter().map(|&q| StateSpec::Mixed01(q)));
                }
            },
            "custom-json" => {
                let rest = inline.ok_or("custom-json needs a path, e.g. custom-json:state.json")?;
                specs.push(StateSpec::CustomJson(PathBuf::from(rest)));
            }
            other => {
                return Err(format!(
                    "unknown state kind {other:?}; expected number, coherent, thermal, mixed01, \
                     or custom-json"
                ))
            }
        }
    }
    if specs.is_empty() {
        return Err("no state descriptor given".into());
    }
    Ok(specs)
}

/// A constructed state, pure or mixed, with uniform dispatch for the
/// operations the commands need.
pub enum LoadedState {
    Pure(FockState),
    Mixed(FockDensity),
}

impl LoadedState {
    pub fn indistinguishability(&self, profile: &CoefficientProfile) -> fockprobe::Result<f64> {
        match self {
            LoadedState::Pure(s) => indistinguishability(s, profile),
            LoadedState::Mixed(d) => indistinguishability_density(d, profile),
        }
    }

    pub fn higher_moment(&self, order: u32) -> fockprobe::Result<f64> {
        match self {
            LoadedState::Pure(s) => higher_moment(s, order),
            LoadedState::Mixed(d) => higher_moment_density(d, order),
        }
    }

    /// Phase-space moment; only evaluated for pure states, where the
    /// coherent-overlap expansion is cheap.
    pub fn q_moment(&self, order: u32) -> Option<fockprobe::Result<QMomentResult>> {
        match self {
            LoadedState::Pure(s) => Some(q_function_moment(s, order, &QuadratureGrid::default())),
            LoadedState::Mixed(_) => None,
        }
    }

    pub fn pure(&self) -> Option<&FockState> {
        match self {
            LoadedState::Pure(s) => Some(s),
            LoadedState::Mixed(_) => None,
        }
    }

    pub fn state_json(&self) -> String {
        let mut text = match self {
            LoadedState::Pure(s) => serde_json::to_string(s).expect("state serializes"),
            LoadedState::Mixed(d) => serde_json::to_string(d).expect("density serializes"),
        };
        text.push('\n');
        text
    }
}

/// Cutoff and tail choices a command makes before building states.
#[derive(Clone, Copy, Debug)]
pub struct BuildPolicy {
    /// User override; wins over every automatic rule.
    pub cutoff: Option<usize>,
    /// Extra levels on top of the automatic cutoff (moment order, exact-mode
    /// propagation headroom).
    pub headroom: usize,
    /// Tail-mass target for automatic thermal cutoffs.
    pub thermal_tail: f64,
}

impl Default for BuildPolicy {
    fn default() -> Self {
        Self {
            cutoff: None,
            headroom: 0,
            thermal_tail: 1e-12,
        }
    }
}

pub fn build_state(spec: &StateSpec, policy: &BuildPolicy) -> Result<LoadedState, BuildError> {
    let state = match spec {
        StateSpec::Number(m) => {
            let cutoff = policy.cutoff.unwrap_or((m + 4 + policy.headroom).max(8));
            LoadedState::Pure(FockState::number(*m, cutoff)?)
        }
        StateSpec::Coherent(alpha) => {
            let a = Complex64::new(*alpha, 0.0);
            let cutoff = policy
                .cutoff
                .unwrap_or_else(|| coherent_cutoff(a) + policy.headroom);
            LoadedState::Pure(FockState::coherent(a, cutoff)?.0)
        }
        StateSpec::Thermal(nbar) => {
            let cutoff = policy
                .cutoff
                .unwrap_or_else(|| thermal_cutoff_with(*nbar, policy.thermal_tail) + policy.headroom);
            LoadedState::Mixed(FockDensity::thermal(*nbar, cutoff)?.0)
        }
        StateSpec::Mixed01(p) => {
            let cutoff = policy.cutoff.unwrap_or(4 + policy.headroom);
            LoadedState::Mixed(FockDensity::mixed01(*p, cutoff)?)
        }
        StateSpec::CustomJson(path) => {
            let text = std::fs::read_to_string(path)?;
            if let Ok(state) = serde_json::from_str::<FockState>(&text) {
                LoadedState::Pure(state)
            } else {
                let density = serde_json::from_str::<FockDensity>(&text).map_err(|e| {
                    BuildError::Usage(format!("{} is neither a state nor a density: {e}", path.display()))
                })?;
                LoadedState::Mixed(density)
            }
        }
    };
    Ok(state)
}

/// Closed-form indistinguishability when one is known for the pair.
pub fn indistinguishability_closed_form(
    spec: &StateSpec,
    profile: &CoefficientProfile,
) -> Option<f64> {
    match (spec, profile) {
        (StateSpec::CustomJson(_), _) => None,
        (_, CoefficientProfile::Classical) => Some(1.0),
        (StateSpec::Number(m), CoefficientProfile::Bosonic) => Some((*m + 1) as f64),
        (StateSpec::Number(m), CoefficientProfile::Fermionic) => {
            Some(if *m == 0 { 1.0 } else { 0.0 })
        }
        (StateSpec::Coherent(alpha), CoefficientProfile::Bosonic) => Some(1.0 + alpha * alpha),
        (StateSpec::Thermal(nbar), CoefficientProfile::Bosonic) => Some(1.0 + nbar),
        (StateSpec::Mixed01(p), CoefficientProfile::Bosonic) => Some(1.0 + p),
        (StateSpec::Mixed01(p), CoefficientProfile::Fermionic) => Some(1.0 - p),
        _ => None,
    }
}

/// Closed-form antinormal moment when one is known.
pub fn moment_closed_form(spec: &StateSpec, order: u32) -> Option<f64> {
    match spec {
        StateSpec::Number(m) => {
            Some((m + 1..=m + order as usize).map(|k| k as f64).product())
        }
        StateSpec::Coherent(alpha) => Some(coherent_moment_closed_form(alpha * alpha, order)),
        StateSpec::Thermal(nbar) => Some(thermal_moment_closed_form(*nbar, order)),
        StateSpec::Mixed01(p) => {
            let fact: f64 = (1..=order as usize).map(|k| k as f64).product();
            Some((1.0 - p) * fact + p * fact * (order as f64 + 1.0))
        }
        StateSpec::CustomJson(_) => None,
    }
}

/// Parse `--profile` values: the three named families or
/// `custom:<w1,w2,...>` with squared coefficient magnitudes.
pub fn parse_profile(arg: &str) -> Result<CoefficientProfile, String> {
    match arg {
        "classical" => Ok(CoefficientProfile::Classical),
        "bosonic" => Ok(CoefficientProfile::Bosonic),
        "fermionic" => Ok(CoefficientProfile::Fermionic),
        other => {
            if let Some(rest) = other.strip_prefix("custom:") {
                let weights = rest
                    .split(',')
                    .map(|w| w.trim().parse::<f64>().map_err(|e| format!("bad weight {w:?}: {e}")))
                    .collect::<Result<Vec<f64>, String>>()?;
                CoefficientProfile::custom(weights).map_err(|e| e.to_string())
            } else {
                Err(format!(
                    "unknown profile {other:?}; expected classical, bosonic, fermionic, or \
                     custom:<w1,w2,...>"
                ))
            }
        }
    }
}

/// Construction failure: a domain error from the library, a malformed
/// descriptor, or an unreadable file.
#[derive(Debug)]
pub enum BuildError {
    Core(fockprobe::Error),
    Usage(String),
    Io(std::io::Error),
}

impl From<fockprobe::Error> for BuildError {
    fn from(e: fockprobe::Error) -> Self {
        BuildError::Core(e)
    }
}

impl From<std::io::Error> for BuildError {
    fn from(e: std::io::Error) -> Self {
        BuildError::Io(e)
    }
}

impl std::fmt::Display for BuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuildError::Core(e) => e.fmt(f),
            BuildError::Usage(msg) => f.write_str(msg),
            BuildError::Io(e) => e.fmt(f),
        }
    }
}
