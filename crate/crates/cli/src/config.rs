//! Run configuration: one JSON document, every field optional.
//!
//! Defaults reproduce the hydrogen ground-state experiment: seven shells
//! sampled at 20 uniform points on [0, 40], eight retained modes, and the
//! regularized 1s problem on [0, 7] with `y(7) = 1e-4`.

use std::path::{Path, PathBuf};

use optbasis::hydrogenic::{BoundaryValueProblem, OrbitalSpec, RadialFamily};
use optbasis::klcore::TruncationCriterion;
use optbasis::sampling::{make_grid, Grid, GridKind, Representation};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyConfig,
    pub sampling: SamplingConfig,
    pub truncation: TruncationConfig,
    pub problem: ProblemConfig,
    pub output: OutputConfig,
    /// Seed of the random orthonormal baseline in `compare-bases`.
    pub seed: u64,
    /// Points of the dense uniform grid used for `basis_functions.csv` and `solution.csv`.
    pub dense_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    pub n_max: u32,
    pub z: f64,
    /// Explicit `(n, l)` list; replaces the full shells up to `n_max` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbitals: Option<Vec<OrbitalEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalEntry {
    pub n: u32,
    pub l: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKindConfig {
    Uniform,
    ChebyshevLobatto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationConfig {
    Radial,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub kind: GridKindConfig,
    pub n_samples: usize,
    pub a: f64,
    pub b: f64,
    pub representation: RepresentationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionConfig {
    FixedM,
    EnergyFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub criterion: CriterionConfig,
    /// Mode count for `fixed_m`, captured fraction of the trace for `energy_fraction`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Principal quantum number of the target state; only used to validate `l`.
    pub n: u32,
    pub l: u32,
    pub z: f64,
    pub energy: f64,
    pub energy_range: [f64; 2],
    pub scan_steps: usize,
    pub a: f64,
    pub b: f64,
    pub y_a: f64,
    pub y_f: f64,
    pub epsilon: f64,
    /// Window on which solution errors are measured.
    pub error_window: [f64; 2],
    pub error_points: usize,
    pub numerov_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: FamilyConfig::default(),
            sampling: SamplingConfig::default(),
            truncation: TruncationConfig::default(),
            problem: ProblemConfig::default(),
            output: OutputConfig::default(),
            seed: 20_240_601,
            dense_points: 401,
        }
    }
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { n_max: 7, z: 1.0, orbitals: None }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            kind: GridKindConfig::Uniform,
            n_samples: 20,
            a: 0.0,
            b: 40.0,
            representation: RepresentationConfig::Reduced,
        }
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { criterion: CriterionConfig::FixedM, value: 8.0 }
    }
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            n: 1,
            l: 0,
            z: 1.0,
            energy: -0.5,
            energy_range: [-0.7, -0.3],
            scan_steps: 41,
            a: 0.0,
            b: 7.0,
            y_a: 0.0,
            y_f: 1e-4,
            epsilon: 1e-10,
            error_window: [0.5, 5.0],
            error_points: 1001,
            numerov_points: 100_000,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn writes(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    pub fn family(&self) -> Result<RadialFamily, CliError> {
        let f = &self.family;
        let family = match &f.orbitals {
            Some(list) => list
                .iter()
                .map(|o| OrbitalSpec::new(o.n, o.l, f.z))
                .collect::<Result<Vec<_>, _>>()
                .and_then(RadialFamily::new),
            None => RadialFamily::shells(f.n_max, f.z),
        };
        family.map_err(|e| config_err(format!("family: {e}")))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let s = &self.sampling;
        let kind = match s.kind {
            GridKindConfig::Uniform => GridKind::Uniform,
            GridKindConfig::ChebyshevLobatto => GridKind::ChebyshevLobatto,
        };
        make_grid(kind, s.n_samples, s.a, s.b).map_err(|e| config_err(format!("sampling: {e}")))
    }

    pub fn representation(&self) -> Representation {
        match self.sampling.representation {
            RepresentationConfig::Radial => Representation::Radial,
            RepresentationConfig::Reduced => Representation::Reduced,
        }
    }

    pub fn truncation(&self) -> Result<TruncationCriterion, CliError> {
        let t = &self.truncation;
        match t.criterion {
            CriterionConfig::FixedM => {
                let m = t.value;
                if !(m >= 1.0 && m.fract() == 0.0 && m <= self.sampling.n_samples as f64) {
                    return Err(config_err(format!(
                        "truncation: fixed_m needs an integer in 1..={}, got {m}",
                        self.sampling.n_samples
                    )));
                }
                Ok(TruncationCriterion::FixedM(m as usize))
            }
            CriterionConfig::EnergyFraction => {
                if !(t.value > 0.0 && t.value <= 1.0) {
                    return Err(config_err(format!("truncation: energy_fraction must be in (0, 1], got {}", t.value)));
                }
                Ok(TruncationCriterion::EnergyFraction(t.value))
            }
        }
    }

    pub fn bvp(&self) -> Result<BoundaryValueProblem, CliError> {
        let p = &self.problem;
        let bvp = BoundaryValueProblem {
            l: p.l,
            z: p.z,
            energy: p.energy,
            a: p.a,
            b: p.b,
            y_a: p.y_a,
            y_f: p.y_f,
            epsilon: p.epsilon,
        };
        bvp.validate().map_err(|e| config_err(format!("problem: {e}")))?;
        Ok(bvp)
    }

    /// Checks everything that can be checked without numerical work.
    pub fn validate(&self) -> Result<(), CliError> {
        self.family()?;
        self.grid()?;
        self.truncation()?;
        self.bvp()?;
        let p = &self.problem;
        if p.n == 0 {
            return Err(config_err("problem: n must be at least 1"));
        }
        if p.l >= p.n {
            return Err(config_err(format!("problem: l must be below n, got n={} l={}", p.n, p.l)));
        }
        let s = &self.sampling;
        if p.a < s.a || p.b > s.b {
            return Err(config_err(format!(
                "problem domain [{}, {}] is not inside the sampled interval [{}, {}]",
                p.a, p.b, s.a, s.b
            )));
        }
        let [lo, hi] = p.energy_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(config_err(format!("problem: energy_range must be increasing, got [{lo}, {hi}]")));
        }
        if p.scan_steps < 3 {
            return Err(config_err(format!("problem: scan_steps must be at least 3, got {}", p.scan_steps)));
        }
        let [wlo, whi] = p.error_window;
        if !(wlo >= p.a && whi <= p.b && wlo < whi) {
            return Err(config_err(format!(
                "problem: error_window [{wlo}, {whi}] must be an interval inside [{}, {}]",
                p.a, p.b
            )));
        }
        if p.error_points < 2 {
            return Err(config_err("problem: error_points must be at least 2"));
        }
        if p.numerov_points < 1000 {
            return Err(config_err("problem: numerov_points must be at least 1000"));
        }
        if self.dense_points < 2 {
            return Err(config_err("dense_points must be at least 2"));
        }
        if self.output.formats.is_empty() {
            return Err(config_err("output: formats must not be empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::default();
        cfg.problem.epsilon = 1.0 / 3.0 * 1e-10;
        cfg.family.orbitals = Some(vec![OrbitalEntry { n: 2, l: 1 }, OrbitalEntry { n: 1, l: 0 }]);
        cfg.sampling.kind = GridKindConfig::ChebyshevLobatto;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), cfg.to_json());
    }

    #[test]
    fn partial_documents_take_defaults() {
        let cfg = RunConfig::from_json(r#"{"sampling": {"n_samples": 6}}"#).unwrap();
        assert_eq!(cfg.sampling.n_samples, 6);
        assert_eq!(cfg.sampling.b, 40.0);
        assert_eq!(cfg.problem, ProblemConfig::default());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(RunConfig::from_json(r#"{"sampling": {"points": 6}}"#).is_err());
    }

    #[test]
    fn rejects_l_not_below_n() {
        let cfg = RunConfig::from_json(r#"{"problem": {"n": 1, "l": 1}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = RunConfig::from_json(r#"{"family": {"orbitals": [{"n": 2, "l": 2}]}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn rejects_fractional_mode_count() {
        let cfg = RunConfig::from_json(r#"{"truncation": {"criterion": "fixed_m", "value": 2.5}}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_json(r#"{"truncation": {"criterion": "fixed_m", "value": 21}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_problem_outside_samples() {
        let cfg = RunConfig::from_json(r#"{"sampling": {"b": 5}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }
}
