//! Run configuration: one JSON document per run, fully resolved (defaults
//! and command-line overrides applied) before dispatch, and echoed verbatim
//! into the manifest.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use arcext_core::curves::{parse_curve_spec, CurveSpec, PolynomialCurve, ScalingPair};
use arcext_core::{Error, Result};

use crate::Invocation;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// One of: psi-table, trial-scan, extremize, decompose, audit, drift,
    /// identity-check. Must agree with the command named on the CLI.
    pub command: String,
    /// Curve spec text: "monomial: [1, 3]" or "polynomial:" plus one
    /// whitespace-separated coefficient row per component.
    #[serde(default = "defaults::curve")]
    pub curve: String,
    #[serde(default = "defaults::p")]
    pub p: f64,
    /// Optional explicit q; must sit on the scaling line for (p, d).
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(rename = "box", default)]
    pub box_params: BoxParams,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub psi: PsiParams,
    #[serde(default)]
    pub scan: ScanParams,
    #[serde(default)]
    pub ascent: AscentParams,
    #[serde(default)]
    pub decompose: DecomposeParams,
    #[serde(default)]
    pub audit: AuditParams,
    #[serde(default)]
    pub drift: DriftParams,
    #[serde(default)]
    pub identity: IdentityParams,
}

/// Profile node lattice: support interval and node count.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub support: [f64; 2],
    pub nodes: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            support: [-2.0, 2.0],
            nodes: 161,
        }
    }
}

/// Symmetric evaluation box [-radius, radius]^d with `resolution` points per axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxParams {
    pub radius: f64,
    pub resolution: usize,
}

impl Default for BoxParams {
    fn default() -> Self {
        BoxParams {
            radius: 8.0,
            resolution: 65,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiParams {
    /// Sample count for the t-grid on [0, 1].
    pub points: usize,
}

impl Default for PsiParams {
    fn default() -> Self {
        PsiParams { points: 101 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    /// Partner amplitude for odd-parity trials.
    pub alpha: f64,
    /// Largest delta in the scan.
    pub delta0: f64,
    /// Multiplier applied between consecutive deltas; must lie in (0, 1).
    pub shrink: f64,
    /// Number of scan rows.
    pub count: usize,
    /// Bump truncation half-width.
    pub truncation: f64,
    /// Node count of the base bump profile.
    pub bump_nodes: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            alpha: 1.0,
            delta0: 0.25,
            shrink: 0.5,
            count: 4,
            truncation: 2.0,
            bump_nodes: 129,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AscentParams {
    pub iterations: usize,
    pub step: f64,
    /// Relative ratio-gain stopping tolerance.
    pub tol: f64,
    /// Node count of the iterate.
    pub nodes: usize,
}

impl Default for AscentParams {
    fn default() -> Self {
        AscentParams {
            iterations: 300,
            step: 0.5,
            tol: 1e-7,
            nodes: 129,
        }
    }
}

/// Synthetic input profile for the decompose command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    /// One of: gaussian, indicator, zero.
    pub kind: String,
    pub width: f64,
    pub amplitude: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            kind: "gaussian".to_string(),
            width: 0.5,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    /// One of: chips, whitney, audit.
    pub mode: String,
    /// Greedy step count for chips mode.
    pub k_max: usize,
    pub profile: ProfileParams,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        DecomposeParams {
            mode: "chips".to_string(),
            k_max: 6,
            profile: ProfileParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    pub big_k: u32,
    pub l_param: u32,
    pub m_min: u32,
    pub m_max: u32,
    /// Normalization tolerance and fattening scale.
    pub epsilon: f64,
    /// Restrict indices to bodies anchored inside the unit cell.
    pub fit_unit: bool,
    /// Containment sample lattice per axis.
    pub lattice: usize,
    /// Shrink bodies to a quarter scale: the negative control.
    pub undersized: bool,
    /// Optional cap on the translation index when fit_unit is off.
    pub k_cap: Option<u64>,
    /// Whitney coverage samples per axis.
    pub coverage_samples: usize,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            big_k: 4,
            l_param: 8,
            m_min: 4,
            m_max: 8,
            epsilon: 0.05,
            fit_unit: true,
            lattice: 20,
            undersized: false,
            k_cap: None,
            coverage_samples: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftParams {
    /// Drift velocity v; defaults to (1, ..., 1).
    pub velocity: Option<Vec<f64>>,
    pub lambda0: f64,
    /// Geometric growth factor of the lambda schedule; must exceed 1.
    pub growth: f64,
    pub steps: usize,
    /// Gaussian widths of the two synthetic inputs F and G.
    pub width_f: f64,
    pub width_g: f64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams {
            velocity: None,
            lambda0: 1.0,
            growth: 2.0,
            steps: 8,
            width_f: 0.8,
            width_g: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    /// Blow-up basepoint.
    pub a: f64,
    /// Blow-up scale.
    pub delta: f64,
    /// Number of low-discrepancy check points.
    pub points: usize,
    /// Gaussian width of the test profile.
    pub width: f64,
}

impl Default for IdentityParams {
    fn default() -> Self {
        IdentityParams {
            a: 1.0,
            delta: 0.25,
            points: 100,
            width: 0.75,
        }
    }
}

mod defaults {
    pub fn curve() -> String {
        "monomial: [1, 2]".to_string()
    }

    pub fn p() -> f64 {
        2.0
    }
}

/// Config after parsing, validation, and override resolution. `cfg` is the
/// echo written to the manifest, with every resolved value filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: String,
    pub curve: CurveSpec,
    pub poly: PolynomialCurve,
    pub pair: ScalingPair,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cfg: RunConfig,
}

pub fn load(invocation: &Invocation) -> Result<Resolved> {
    let text = std::fs::read_to_string(&invocation.config_path).map_err(|e| {
        Error::invalid(format!(
            "config error: cannot read {}: {e}",
            invocation.config_path.display()
        ))
    })?;
    let mut cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("config error: {e}")))?;
    if cfg.command != invocation.command {
        return Err(Error::invalid(format!(
            "config error: config names command {:?} but the CLI asked for {:?}",
            cfg.command, invocation.command
        )));
    }

    let curve = parse_curve_spec(&cfg.curve)
        .map_err(|e| Error::invalid(format!("config error: bad curve spec: {e}")))?;
    let poly = curve.to_polynomial();
    let d = poly.dimension();
    let pair = validate_exponents(cfg.p, cfg.q, d)?;

    let seed = invocation.seed_override.or(cfg.seed).unwrap_or(0);
    let out_dir = invocation
        .out_override
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| {
            Error::invalid(
                "config error: no output directory; set out_dir in the config or pass --out",
            )
        })?;

    cfg.q = Some(pair.q());
    cfg.seed = Some(seed);
    cfg.out_dir = Some(out_dir.display().to_string());

    Ok(Resolved {
        command: cfg.command.clone(),
        curve,
        poly,
        pair,
        seed,
        out_dir,
        cfg,
    })
}

/// Builds the ScalingPair for (p, d) and, when the config supplies q
/// explicitly, insists that it sits on the scaling line.
fn validate_exponents(p: f64, q: Option<f64>, d: usize) -> Result<ScalingPair> {
    let pair = ScalingPair::new(p, d)
        .map_err(|e| Error::Scaling(format!("config error: {e}")))?;
    if let Some(q) = q {
        let coeff = (d * d + d) / 2;
        let q_min = (d * d + d + 2) as f64 / 2.0;
        if !(q > q_min) {
            return Err(Error::Scaling(format!(
                "config error: invalid exponent pair (p = {p}, q = {q}, d = {d}): \
                 q must exceed (d^2+d+2)/2 = {q_min}, and q must equal {coeff}p' = {}",
                pair.q()
            )));
        }
        if (q - pair.q()).abs() > 1e-9 * pair.q().max(1.0) {
            return Err(Error::Scaling(format!(
                "config error: invalid exponent pair (p = {p}, q = {q}, d = {d}): \
                 q must equal {coeff}p' = {} (p' = {})",
                pair.q(),
                pair.p_prime()
            )));
        }
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_line_q_is_rejected_with_the_named_relation() {
        let err = validate_exponents(2.0, Some(5.0), 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("config error"), "got: {msg}");
        assert!(msg.contains("q must equal 3p' = 6"), "got: {msg}");
    }

    #[test]
    fn subcritical_q_names_the_inequality() {
        let err = validate_exponents(2.0, Some(3.0), 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(d^2+d+2)/2 = 4"), "got: {msg}");
    }

    #[test]
    fn on_line_q_passes() {
        let pair = validate_exponents(2.0, Some(6.0), 2).unwrap();
        assert_eq!(pair.q(), 6.0);
        let derived = validate_exponents(2.0, None, 2).unwrap();
        assert_eq!(derived.q(), 6.0);
    }
}
