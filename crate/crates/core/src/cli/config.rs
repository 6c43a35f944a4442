use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::macro_solver::{CorrectorSpace, ForceDensity, MacroQuadrature, MacroSpace, ShellParams, ShellSetup};
use crate::surface_geometry::{ShapeFunction, SurfaceChart, TrigTerm};

pub const COMMANDS: [&str; 9] = [
    "geometry-check",
    "expand",
    "strain-audit",
    "cell",
    "solve-eps",
    "solve-macro",
    "solve-coupled",
    "two-scale-study",
    "all",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellSection {
    pub chart: SurfaceChart,
    pub lambda: f64,
    pub mu: f64,
    /// Half-thickness `d`.
    pub thickness: f64,
    pub lengths: [f64; 2],
}

impl Default for ShellSection {
    fn default() -> Self {
        let p = ShellParams::default();
        ShellSection { chart: SurfaceChart::Plate, lambda: p.lambda, mu: p.mu, thickness: p.thickness, lengths: [1.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaSection {
    pub terms: Vec<TrigTerm>,
}

impl Default for ThetaSection {
    fn default() -> Self {
        ThetaSection { terms: ShapeFunction::sin_y1(1.0).terms }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroSection {
    pub inplane_modes: usize,
    pub deflection_modes: usize,
}

impl Default for MacroSection {
    fn default() -> Self {
        let s = MacroSpace::default();
        MacroSection { inplane_modes: s.inplane_modes, deflection_modes: s.deflection_modes }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub truncation: usize,
    /// Macro points at which the cell problems are solved.
    pub points: Vec<[f64; 2]>,
}

impl Default for CellSection {
    fn default() -> Self {
        CellSection { truncation: 4, points: vec![[0.5, 0.5]] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsSection {
    /// Used by `solve-eps` and `two-scale-study`.
    pub schedule: Vec<f64>,
    /// Used by `strain-audit`.
    pub audit_schedule: Vec<f64>,
}

impl Default for EpsSection {
    fn default() -> Self {
        EpsSection {
            schedule: (2..=5).map(|k| 2f64.powi(-k)).collect(),
            audit_schedule: (2..=8).map(|k| 2f64.powi(-k)).collect(),
        }
    }
}

/// Run configuration, read from TOML. Every section is optional.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub shell: ShellSection,
    pub theta: ThetaSection,
    #[serde(rename = "macro")]
    pub macro_space: MacroSection,
    pub cell: CellSection,
    pub corrector: CorrectorSpace,
    pub eps: EpsSection,
    pub force: ForceDensity,
    pub quadrature: MacroQuadrature,
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg()))
    }
}

fn check_schedule(name: &str, s: &[f64]) -> Result<()> {
    check(!s.is_empty(), || format!("{name} is empty"))?;
    check(s.iter().all(|&e| e > 0.0 && e <= 1.0), || format!("{name} entries must lie in (0, 1]"))?;
    check(s.windows(2).all(|w| w[1] < w[0]), || format!("{name} must be strictly decreasing"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn params(&self) -> ShellParams {
        ShellParams { lambda: self.shell.lambda, mu: self.shell.mu, thickness: self.shell.thickness }
    }

    pub fn theta(&self) -> ShapeFunction {
        ShapeFunction::new(self.theta.terms.clone())
    }

    pub fn space(&self) -> MacroSpace {
        MacroSpace {
            lengths: self.shell.lengths,
            inplane_modes: self.macro_space.inplane_modes,
            deflection_modes: self.macro_space.deflection_modes,
        }
    }

    pub fn setup(&self) -> ShellSetup {
        ShellSetup {
            space: self.space(),
            chart: self.shell.chart,
            theta: self.theta(),
            params: self.params(),
            quadrature: self.quadrature,
        }
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self, command: &str) -> Result<()> {
        check(COMMANDS.contains(&command), || format!("unknown command {command:?}"))?;
        let s = &self.shell;
        for (name, v) in [("lambda", s.lambda), ("mu", s.mu), ("thickness", s.thickness)] {
            check(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))?;
        }
        check(s.lengths.iter().all(|&l| l > 0.0 && l.is_finite()), || "domain lengths must be positive".into())?;
        match s.chart {
            SurfaceChart::Plate => {}
            SurfaceChart::Cylinder { radius } => check(radius > 0.0 && radius.is_finite(), || "cylinder radius must be positive".into())?,
            SurfaceChart::QuadraticGraph { k11, k12, k22 } => {
                check([k11, k12, k22].iter().all(|v| v.is_finite()), || "chart coefficients must be finite".into())?
            }
            SurfaceChart::TrigGraph { amp, k1, k2 } => {
                check([amp, k1, k2].iter().all(|v| v.is_finite()), || "chart coefficients must be finite".into())?
            }
        }
        check(
            self.theta.terms.iter().all(|t| t.cos_amp.is_finite() && t.sin_amp.is_finite()),
            || "theta amplitudes must be finite".into(),
        )?;
        check(self.macro_space.inplane_modes >= 1 && self.macro_space.deflection_modes >= 1, || {
            "macro mode counts must be at least 1".into()
        })?;
        check(self.cell.truncation >= 1, || "cell truncation must be at least 1".into())?;
        check(!self.cell.points.is_empty(), || "cell points are empty".into())?;
        check(
            self.cell.points.iter().all(|p| (0..2).all(|a| p[a] >= 0.0 && p[a] <= s.lengths[a])),
            || "cell points must lie in the domain".into(),
        )?;
        check(self.corrector.truncation >= 1, || "corrector truncation must be at least 1".into())?;
        check_schedule("eps.schedule", &self.eps.schedule)?;
        check_schedule("eps.audit_schedule", &self.eps.audit_schedule)?;
        let q = &self.quadrature;
        check(
            q.order >= 1 && q.cells_per_unit >= 1 && q.coarse_cells_per_unit >= 1 && q.min_points_per_period >= 1,
            || "quadrature settings must be positive".into(),
        )?;
        let forces = match self.force {
            ForceDensity::Constant { value } | ForceDensity::SineBump { value } => value.to_vec(),
            ForceDensity::Oscillating { value, amplitude } => vec![value[0], value[1], value[2], amplitude],
        };
        check(forces.iter().all(|v| v.is_finite()), || "force values must be finite".into())?;
        if let Some(out) = &self.out {
            check(!out.as_os_str().is_empty(), || "out must not be empty".into())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_sections_parse() {
        let c = RunConfig::from_toml("").unwrap();
        assert!(c.validate("all").is_ok());
        assert_eq!(c.theta(), ShapeFunction::sin_y1(1.0));
        let text = r#"
seed = 7
[shell]
chart = { kind = "cylinder", radius = 2.0 }
lambda = 1.5
[theta]
terms = [{ k1 = 1, k2 = 1, cos_amp = 0.5 }]
[macro]
inplane_modes = 3
[force]
kind = "sine_bump"
value = [0.0, 0.0, 2.0]
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.shell.chart, SurfaceChart::Cylinder { radius: 2.0 });
        assert_eq!(c.space().inplane_modes, 3);
        assert_eq!(c.space().deflection_modes, 4);
        assert!(c.validate("expand").is_ok());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let c = RunConfig::from_toml("[shell]\nlambda = -1.0\n").unwrap();
        assert!(matches!(c.validate("all"), Err(Error::InvalidConfig(_))));
        let c = RunConfig::from_toml("[eps]\nschedule = [0.1, 0.2]\n").unwrap();
        assert!(c.validate("all").is_err());
        assert!(RunConfig::default().validate("bogus").is_err());
        assert!(RunConfig::from_toml("[shell]\nunknown = 1\n").is_err());
    }
}
