//! Experiment configuration: a flat `key = value` text format with `#`
//! comments, chosen so runs are reproducible from a single self-describing
//! file with no external dependencies. Every field round-trips losslessly
//! (floats are written with 17 significant digits).

use std::fmt;
use std::path::PathBuf;

use crate::example;
use crate::moments::StudyTarget;
use crate::report::format_float;
use crate::{Error, Result};

/// Which study (or studies) a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    VerifyDerivative,
    VerifyHessian,
    BilinearForms,
    Hadamard,
    Moments,
    Convergence,
    All,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::VerifyDerivative => "verify-derivative",
            CommandKind::VerifyHessian => "verify-hessian",
            CommandKind::BilinearForms => "bilinear-forms",
            CommandKind::Hadamard => "hadamard",
            CommandKind::Moments => "moments",
            CommandKind::Convergence => "convergence",
            CommandKind::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "verify-derivative" => CommandKind::VerifyDerivative,
            "verify-hessian" => CommandKind::VerifyHessian,
            "bilinear-forms" => CommandKind::BilinearForms,
            "hadamard" => CommandKind::Hadamard,
            "moments" => CommandKind::Moments,
            "convergence" => CommandKind::Convergence,
            "all" => CommandKind::All,
            other => return Err(Error::InvalidConfig(format!("unknown command '{other}'"))),
        })
    }
}

/// Report file format for the tabular outputs (JSON records are always
/// written; `csv` additionally emits plot-ready tables).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "json" => OutputFormat::Json,
            "csv" => OutputFormat::Csv,
            other => return Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        })
    }
}

/// Full configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    /// Perturbation sizes for sweeps, strictly decreasing.
    pub eps_list: Vec<f64>,
    /// Monte Carlo sample count.
    pub samples: usize,
    pub seed: u64,
    /// Volume-quadrature cells per unit length.
    pub grid: usize,
    /// Gauss points per direction per cell.
    pub quad_degree: usize,
    /// Gauss nodes per boundary segment.
    pub nodes_per_segment: usize,
    /// Interior sample points per domain for residual sweeps.
    pub interior_points: usize,
    /// Perturbation size of the verification sample.
    pub epsilon: f64,
    /// First and second perturbation amplitudes of the verification sample.
    pub amplitude: f64,
    pub amplitude_b: f64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Convergence-study target.
    pub target: StudyTarget,
    /// Multiplier applied to every residual tolerance; 0 forces all
    /// identity checks to fail, which exercises the failure exit path.
    pub tolerance_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: CommandKind::All,
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            samples: 100_000,
            seed: 42,
            grid: 16,
            quad_degree: 5,
            nodes_per_segment: 64,
            interior_points: 200,
            epsilon: 0.1,
            amplitude: 1.0,
            amplitude_b: 1.0,
            out_dir: PathBuf::from("reports"),
            format: OutputFormat::Json,
            target: StudyTarget::Mean,
            tolerance_scale: 1.0,
        }
    }
}

impl ExperimentConfig {
    /// Rejects out-of-range values with a diagnostic naming the field.
    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::InvalidConfig("eps: list must not be empty".into()));
        }
        for &e in &self.eps_list {
            if !(0.0..=example::EPS_MAX).contains(&e) || e == 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "eps: every value must lie in (0, {}], got {e}",
                    example::EPS_MAX
                )));
            }
        }
        if self.eps_list.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidConfig(
                "eps: values must be strictly decreasing".into(),
            ));
        }
        if self.samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "samples: need at least 2, got {}",
                self.samples
            )));
        }
        if self.grid == 0 || self.grid > 64 {
            return Err(Error::InvalidConfig(format!(
                "grid: must be in 1..=64, got {}",
                self.grid
            )));
        }
        if self.quad_degree == 0 || self.quad_degree > 32 {
            return Err(Error::InvalidConfig(format!(
                "quad_degree: must be in 1..=32, got {}",
                self.quad_degree
            )));
        }
        if self.nodes_per_segment == 0 || self.nodes_per_segment > 512 {
            return Err(Error::InvalidConfig(format!(
                "nodes_per_segment: must be in 1..=512, got {}",
                self.nodes_per_segment
            )));
        }
        if self.interior_points == 0 || self.interior_points > 100_000 {
            return Err(Error::InvalidConfig(format!(
                "interior_points: must be in 1..=100000, got {}",
                self.interior_points
            )));
        }
        if !(0.0..=example::EPS_MAX).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon: must lie in [0, {}], got {}",
                example::EPS_MAX,
                self.epsilon
            )));
        }
        if !(self.tolerance_scale >= 0.0 && self.tolerance_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance_scale: must be a finite nonnegative number, got {}",
                self.tolerance_scale
            )));
        }
        if self.amplitude.abs() > 1.0 || self.amplitude_b.abs() > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "amplitude: |a| and |b| must be <= 1, got a = {}, b = {}",
                self.amplitude, self.amplitude_b
            )));
        }
        Ok(())
    }

    /// Canonical `key = value` serialization (lossless for floats).
    pub fn to_key_values(&self) -> String {
        let eps = self
            .eps_list
            .iter()
            .map(|e| format_float(*e))
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "# fsishape experiment configuration\n\
             command = {}\n\
             eps = {}\n\
             samples = {}\n\
             seed = {}\n\
             grid = {}\n\
             quad_degree = {}\n\
             nodes_per_segment = {}\n\
             interior_points = {}\n\
             epsilon = {}\n\
             amplitude = {}\n\
             amplitude_b = {}\n\
             out = {}\n\
             format = {}\n\
             target = {}\n\
             tolerance_scale = {}\n",
            self.command.name(),
            eps,
            self.samples,
            self.seed,
            self.grid,
            self.quad_degree,
            self.nodes_per_segment,
            self.interior_points,
            format_float(self.epsilon),
            format_float(self.amplitude),
            format_float(self.amplitude_b),
            self.out_dir.display(),
            self.format.name(),
            self.target.name(),
            format_float(self.tolerance_scale),
        )
    }

    /// Parses the `key = value` format; `#` starts a comment, blank lines
    /// are skipped, unknown keys are rejected.
    pub fn parse_key_values(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad =
                |field: &str, v: &str| Error::InvalidConfig(format!("{field}: cannot parse '{v}'"));
            match key {
                "command" => cfg.command = CommandKind::parse(value)?,
                "eps" => {
                    cfg.eps_list = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(|_| bad("eps", s)))
                        .collect::<Result<Vec<_>>>()?;
                }
                "samples" => cfg.samples = value.parse().map_err(|_| bad("samples", value))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed", value))?,
                "grid" => cfg.grid = value.parse().map_err(|_| bad("grid", value))?,
                "quad_degree" => {
                    cfg.quad_degree = value.parse().map_err(|_| bad("quad_degree", value))?
                }
                "nodes_per_segment" => {
                    cfg.nodes_per_segment =
                        value.parse().map_err(|_| bad("nodes_per_segment", value))?
                }
                "interior_points" => {
                    cfg.interior_points =
                        value.parse().map_err(|_| bad("interior_points", value))?
                }
                "epsilon" => cfg.epsilon = value.parse().map_err(|_| bad("epsilon", value))?,
                "amplitude" => {
                    cfg.amplitude = value.parse().map_err(|_| bad("amplitude", value))?
                }
                "amplitude_b" => {
                    cfg.amplitude_b = value.parse().map_err(|_| bad("amplitude_b", value))?
                }
                "tolerance_scale" => {
                    cfg.tolerance_scale =
                        value.parse().map_err(|_| bad("tolerance_scale", value))?
                }
                "out" => cfg.out_dir = PathBuf::from(value),
                "format" => cfg.format = OutputFormat::parse(value)?,
                "target" => {
                    cfg.target = match value {
                        "mean" => StudyTarget::Mean,
                        "variance" => StudyTarget::Variance,
                        "taylor-remainder" => StudyTarget::TaylorRemainder,
                        other => {
                            return Err(Error::InvalidConfig(format!(
                                "target: unknown value '{other}'"
                            )))
                        }
                    }
                }
                other => {
                    return Err(Error::InvalidConfig(format!("unknown key '{other}'")));
                }
            }
        }
        Ok(cfg)
    }

    /// Canonical serialization without the output location: two runs that
    /// differ only in where they write are the same experiment.
    pub fn semantic_key_values(&self) -> String {
        self.to_key_values()
            .lines()
            .filter(|l| !l.trim_start().starts_with("out ="))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    /// FNV-1a hash of the semantic serialization; stamped into every
    /// report header for provenance.
    pub fn content_hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.semantic_key_values().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let cfg = ExperimentConfig {
            command: CommandKind::Convergence,
            eps_list: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            samples: 12_345,
            seed: 987_654_321,
            epsilon: 0.07,
            amplitude: -0.33,
            target: StudyTarget::Variance,
            format: OutputFormat::Csv,
            ..ExperimentConfig::default()
        };
        let text = cfg.to_key_values();
        let back = ExperimentConfig::parse_key_values(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.content_hash(), back.content_hash());
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# a comment\n\ncommand = moments # trailing comment\nseed = 7\n";
        let cfg = ExperimentConfig::parse_key_values(text).unwrap();
        assert_eq!(cfg.command, CommandKind::Moments);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn invalid_inputs_are_named() {
        let e = ExperimentConfig::parse_key_values("bogus = 3\n").unwrap_err();
        assert!(e.to_string().contains("bogus"));

        let mut cfg = ExperimentConfig {
            eps_list: vec![],
            ..ExperimentConfig::default()
        };
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("eps"));

        cfg.eps_list = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());

        cfg.eps_list = vec![0.3];
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig {
            quad_degree: 0,
            ..ExperimentConfig::default()
        };
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("quad_degree"));
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            seed: 43,
            ..ExperimentConfig::default()
        };
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
