//! Strict TOML run configuration: unknown keys are rejected with the
//! offending key named, all physical parameters must be positive, and the
//! derived contrast is echoed back.

use helmres2d::geometry::CurveSpec;
use helmres2d::resonance::MediumParams;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub medium: MediumConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: String,
    pub epsilon: f64,
    pub radius: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub base_radius: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub rho: f64,
    pub kappa: f64,
    pub rho_b: f64,
    pub kappa_b: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default)]
    pub n: NodeCount,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum NodeCount {
    Fixed(usize),
    Word(String),
}

impl Default for NodeCount {
    fn default() -> Self {
        NodeCount::Word("auto".into())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Gap profile sample count.
    pub profile_samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { profile_samples: 40 }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Optional real-frequency window [lo, hi] for the driven-amplitude scan.
    pub frequency_window: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

/// Resolved, validated configuration.
pub struct Resolved {
    pub spec: CurveSpec,
    pub epsilon: f64,
    pub medium: MediumParams,
    pub n: Option<usize>,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub out_dir: String,
    pub config_hash: u64,
}

pub fn load(path: &Path) -> Result<Resolved, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| format!("config error: {e}"))?;
    resolve(cfg, &text)
}

fn resolve(cfg: RunConfig, text: &str) -> Result<Resolved, String> {
    let g = &cfg.geometry;
    let spec = match g.kind.as_str() {
        "disk" => CurveSpec::Disk {
            radius: g.radius.ok_or("geometry.radius required for kind = \"disk\"")?,
        },
        "ellipse" => CurveSpec::Ellipse {
            a: g.a.ok_or("geometry.a required for kind = \"ellipse\"")?,
            b: g.b.ok_or("geometry.b required for kind = \"ellipse\"")?,
        },
        "fourier_star" => CurveSpec::FourierStar {
            base_radius: g
                .base_radius
                .ok_or("geometry.base_radius required for kind = \"fourier_star\"")?,
            coeffs: g.coeffs.clone().unwrap_or_default(),
        },
        other => return Err(format!("unknown geometry.kind \"{other}\"")),
    };
    if g.epsilon <= 0.0 {
        return Err(format!("geometry.epsilon = {} must be positive", g.epsilon));
    }
    let m = &cfg.medium;
    for (name, v) in [
        ("medium.rho", m.rho),
        ("medium.kappa", m.kappa),
        ("medium.rho_b", m.rho_b),
        ("medium.kappa_b", m.kappa_b),
    ] {
        if v <= 0.0 {
            return Err(format!("{name} = {v} must be positive"));
        }
    }
    let medium = MediumParams::new(m.rho, m.kappa, m.rho_b, m.kappa_b)
        .map_err(|e| format!("medium: {e}"))?;
    let n = match cfg.discretization.n {
        NodeCount::Fixed(n) => {
            if n < 32 || n % 2 != 0 {
                return Err(format!("discretization.n = {n} must be even and >= 32"));
            }
            Some(n)
        }
        NodeCount::Word(w) if w == "auto" => None,
        NodeCount::Word(w) => {
            return Err(format!("discretization.n = \"{w}\" (expected an even integer or \"auto\")"))
        }
    };
    for (i, e) in cfg.sweep.epsilons.iter().enumerate() {
        if *e <= 0.0 {
            return Err(format!("sweep.epsilons[{i}] = {e} must be positive"));
        }
    }
    Ok(Resolved {
        spec,
        epsilon: g.epsilon,
        medium,
        n,
        solver: cfg.solver,
        sweep: cfg.sweep,
        out_dir: cfg.output.dir,
        config_hash: fnv1a(text.as_bytes()),
    })
}

/// FNV-1a 64-bit hash of the config text, recorded in every output header.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
