//! Experiment configuration: a flat TOML table, unknown keys rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use morozov::apps::ProjectorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AppName {
    Laplace,
    Cauchy,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaName {
    Disk,
    ExteriorOfDisk,
    FiveDisks,
}

impl OmegaName {
    pub fn as_str(&self) -> &'static str {
        match self {
            OmegaName::Disk => "disk",
            OmegaName::ExteriorOfDisk => "exterior-of-disk",
            OmegaName::FiveDisks => "five-disks",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionName {
    Poly,
    ExpSin,
    CoshCos,
    Caloric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Uniform per-dof perturbation of relative size `delta_r`.
    Pointwise,
    /// Range plus complement perturbation of size `delta` (Laplace only).
    Structured,
    /// Exact data with the nominal level `delta`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    NewtonMorozov,
    DualGradient,
    Demeestere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerpChoice {
    /// Exact discrete projection.
    Exact,
    /// The application's fourth-order problem (Morley or finite differences).
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// Area fraction of omega.
    Alpha,
    DeltaR,
    Projector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub application: AppName,
    pub mesh_n: usize,
    pub omega: OmegaName,
    pub omega_area: f64,
    pub solution: SolutionName,
    pub noise: NoiseMode,
    pub delta: f64,
    pub delta_r: f64,
    pub seed: u64,
    pub projector: String,
    pub solver: SolverChoice,
    pub perp_backend: PerpChoice,
    pub gamma_fraction: f64,
    pub n_t: usize,
    pub t_final: f64,
    pub omega_interval: [f64; 2],
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_points: usize,
    pub output_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_param: Option<SweepParam>,
    pub sweep_values: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            application: AppName::Laplace,
            mesh_n: 20,
            omega: OmegaName::ExteriorOfDisk,
            omega_area: 0.4,
            solution: SolutionName::ExpSin,
            noise: NoiseMode::Pointwise,
            delta: 0.1,
            delta_r: 0.1,
            seed: 1,
            projector: "none".into(),
            solver: SolverChoice::DualGradient,
            perp_backend: PerpChoice::Exact,
            gamma_fraction: 0.25,
            n_t: 20,
            t_final: 0.3,
            omega_interval: [0.3, 0.7],
            eps_min: 1e-10,
            eps_max: 1e4,
            eps_points: 50,
            output_dir: "out".into(),
            sweep_param: None,
            sweep_values: Vec::new(),
        }
    }
}

const CONFIG_BEGIN: &str = "# --- config ---";
const CONFIG_END: &str = "# --- end config ---";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a TOML file, or the config block embedded in a CSV header.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match extract_embedded(&text) {
            Some(inner) => Self::from_toml(&inner),
            None => Self::from_toml(&text),
        }
        .with_context(|| format!("in {}", path.display()))
    }

    /// Comment lines embedding this config.
    pub fn header_lines(&self) -> Vec<String> {
        let mut out = vec![CONFIG_BEGIN.to_string()];
        out.extend(self.to_toml().lines().map(|l| format!("# {l}")));
        out.push(CONFIG_END.to_string());
        out
    }

    pub fn projector_spec(&self) -> Result<ProjectorSpec> {
        Ok(ProjectorSpec::parse(&self.projector)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh_n < 4 {
            bail!("mesh_n must be at least 4, got {}", self.mesh_n);
        }
        if !(self.omega_area > 0.0 && self.omega_area < 1.0) {
            bail!("omega_area must lie in (0, 1), got {}", self.omega_area);
        }
        match self.noise {
            NoiseMode::Pointwise if !(self.delta_r > 0.0) => bail!("delta_r must be positive"),
            NoiseMode::Structured | NoiseMode::Exact if !(self.delta > 0.0) => bail!("delta must be positive"),
            _ => {}
        }
        let expected: &[SolutionName] = match self.application {
            AppName::Laplace => &[SolutionName::Poly, SolutionName::ExpSin],
            AppName::Cauchy => &[SolutionName::CoshCos],
            AppName::Heat => &[SolutionName::Caloric],
        };
        if !expected.contains(&self.solution) {
            bail!("solution {:?} does not fit the {:?} application", self.solution, self.application);
        }
        if self.noise == NoiseMode::Structured && self.application != AppName::Laplace {
            bail!("structured noise is defined for the laplace application only");
        }
        let spec = self.projector_spec()?;
        if spec != ProjectorSpec::None {
            if self.application != AppName::Laplace {
                bail!("projectors are defined for the laplace application only");
            }
            if self.solver != SolverChoice::DualGradient {
                bail!("a projector requires solver = \"dual-gradient\"");
            }
        }
        if !(self.eps_min > 0.0 && self.eps_max > self.eps_min && self.eps_points >= 2) {
            bail!("need 0 < eps_min < eps_max and eps_points >= 2");
        }
        if self.application == AppName::Heat && !(self.t_final > 0.0 && self.n_t >= 4) {
            bail!("heat needs t_final > 0 and n_t >= 4");
        }
        match self.sweep_param {
            None if !self.sweep_values.is_empty() => bail!("sweep_values given without sweep_param"),
            Some(p) => {
                if self.sweep_values.is_empty() {
                    bail!("sweep_param given without sweep_values");
                }
                for v in &self.sweep_values {
                    self.with_sweep_value(p, v)?;
                }
            }
            None => {}
        }
        Ok(())
    }

    /// The configuration of one sweep point.
    pub fn with_sweep_value(&self, param: SweepParam, value: &str) -> Result<Self> {
        let mut c = self.clone();
        c.sweep_param = None;
        c.sweep_values.clear();
        match param {
            SweepParam::Alpha => c.omega_area = parse_fraction(value)?,
            SweepParam::DeltaR => c.delta_r = parse_fraction(value)?,
            SweepParam::Projector => {
                c.projector = value.to_string();
                if c.projector_spec()? != ProjectorSpec::None {
                    c.solver = SolverChoice::DualGradient;
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `0.25`, `1/4` or `25%`.
pub fn parse_fraction(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some(p) = s.strip_suffix('%') {
        p.trim().parse::<f64>()? / 100.0
    } else if let Some((a, b)) = s.split_once('/') {
        a.trim().parse::<f64>()? / b.trim().parse::<f64>()?
    } else {
        s.parse::<f64>()?
    };
    if !v.is_finite() {
        bail!("'{s}' is not a finite number");
    }
    Ok(v)
}

fn extract_embedded(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| l.trim_end() != CONFIG_BEGIN);
    lines.next()?;
    let mut out = String::new();
    for l in lines {
        if l.trim_end() == CONFIG_END {
            return Some(out);
        }
        out.push_str(l.strip_prefix("# ").or_else(|| l.strip_prefix('#'))?);
        out.push('\n');
    }
    None
}
