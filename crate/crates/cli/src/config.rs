//! Experiment configuration: TOML (or JSON) files describing the lattice,
//! the channel, the method list and the shot policy.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fpec_core::{
    infidelity_to_depolarizing, ChannelFile, DiagonalObservable, LatticeSpec, Method,
    StochasticPauliChannel, TruncationPolicy,
};

use crate::error::CliError;

/// Raw configuration file schema.
///
/// ```toml
/// seed = 42
/// methods = ["raw", "fpec", "pec", "zne"]
/// shots = 5000
///
/// [lattice]
/// rows = 3
/// cols = 3
/// coupling = 1.0
/// field = 2.0
/// tau = 0.2
/// initial_angle = 0.5235987755982988
///
/// [sweep]
/// start = 1
/// end = 10
///
/// [channel]
/// kind = "depolarizing"
/// avg_infidelity = 5.3e-4
///
/// [truncation]
/// policy = "bias_tolerance"
/// delta = 0.001
///
/// [zne]
/// scales = [1.0, 4.0]
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub methods: Vec<Method>,
    pub shots: u64,
    #[serde(default)]
    pub observable: Option<DiagonalObservable>,
    pub lattice: LatticeConfig,
    pub sweep: SweepRange,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub assumed_channel: Option<ChannelConfig>,
    #[serde(default)]
    pub truncation: Option<TruncationPolicy>,
    #[serde(default)]
    pub zne: Option<ZneConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub rows: usize,
    pub cols: usize,
    pub coupling: f64,
    pub field: f64,
    pub tau: f64,
    #[serde(default)]
    pub initial_angle: f64,
}

impl LatticeConfig {
    pub fn spec(&self, steps: usize) -> LatticeSpec {
        LatticeSpec {
            rows: self.rows,
            cols: self.cols,
            coupling: self.coupling,
            field: self.field,
            tau: self.tau,
            steps,
        }
    }
}

/// Inclusive Trotter-step range.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: usize,
    pub end: usize,
}

impl SweepRange {
    pub fn steps(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    /// Uniform two-qubit depolarizing noise, given either as a total
    /// error probability or as an averaged gate infidelity.
    Depolarizing {
        #[serde(default)]
        eps: Option<f64>,
        #[serde(default)]
        avg_infidelity: Option<f64>,
    },
    /// A channel description file (see the channel JSON schema).
    File { path: PathBuf },
}

impl ChannelConfig {
    pub fn resolve(&self, base_dir: &Path) -> Result<StochasticPauliChannel, CliError> {
        match self {
            ChannelConfig::Depolarizing {
                eps,
                avg_infidelity,
            } => match (eps, avg_infidelity) {
                (Some(e), None) => StochasticPauliChannel::depolarizing(2, *e)
                    .map_err(CliError::Run),
                (None, Some(r)) => infidelity_to_depolarizing(*r, 2).map_err(CliError::Run),
                _ => Err(CliError::Config(
                    "depolarizing channel needs exactly one of `eps` or `avg_infidelity`"
                        .into(),
                )),
            },
            ChannelConfig::File { path } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                let json = std::fs::read_to_string(&resolved).map_err(|e| {
                    CliError::Config(format!(
                        "channel file {} unreadable: {e}",
                        resolved.display()
                    ))
                })?;
                ChannelFile::from_json(&json)
                    .and_then(|f| f.to_channel())
                    .map_err(CliError::Run)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZneConfig {
    pub scales: Vec<f64>,
}

/// A validated experiment with channels materialized.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub seed: u64,
    pub methods: Vec<Method>,
    pub shots: u64,
    pub observable: DiagonalObservable,
    pub lattice: LatticeConfig,
    pub sweep: SweepRange,
    pub channel: StochasticPauliChannel,
    pub assumed_channel: Option<StochasticPauliChannel>,
    pub truncation: TruncationPolicy,
    pub zne_scales: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Experiment {
    /// Load and validate a configuration file; `.json` files parse as
    /// JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Experiment, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("config {} unreadable: {e}", path.display()))
        })?;
        let file: ConfigFile = if path.extension().map(|e| e == "json").unwrap_or(false) {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config parse error: {e}")))?
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("config parse error: {e}")))?
        };
        let base_dir = path.parent().unwrap_or(Path::new("."));
        Experiment::from_file(file, base_dir)
    }

    pub fn from_file(file: ConfigFile, base_dir: &Path) -> Result<Experiment, CliError> {
        if file.methods.is_empty() {
            return Err(CliError::Config("method list is empty".into()));
        }
        if file.shots == 0 {
            return Err(CliError::Config("shots must be positive".into()));
        }
        if file.lattice.rows == 0 || file.lattice.cols == 0 {
            return Err(CliError::Config("lattice dimensions must be >= 1".into()));
        }
        if file.sweep.start > file.sweep.end {
            return Err(CliError::Config(format!(
                "sweep range {}..={} is empty",
                file.sweep.start, file.sweep.end
            )));
        }
        let channel = file.channel.resolve(base_dir)?;
        if channel.num_qubits() != 2 {
            return Err(CliError::Config(format!(
                "gate channel must act on 2 qubits, got {}",
                channel.num_qubits()
            )));
        }
        let assumed_channel = file
            .assumed_channel
            .as_ref()
            .map(|c| c.resolve(base_dir))
            .transpose()?;
        if let Some(assumed) = &assumed_channel {
            if assumed.num_qubits() != 2 {
                return Err(CliError::Config(
                    "assumed channel must act on 2 qubits".into(),
                ));
            }
        }
        let zne_scales = file
            .zne
            .map(|z| z.scales)
            .unwrap_or_else(|| vec![1.0, 4.0]);
        if file.methods.contains(&Method::Zne) && zne_scales.len() < 2 {
            return Err(CliError::Config(
                "zero-noise extrapolation needs at least two scales".into(),
            ));
        }
        Ok(Experiment {
            seed: file.seed,
            methods: file.methods,
            shots: file.shots,
            observable: file.observable.unwrap_or(DiagonalObservable::SzSquared),
            lattice: file.lattice,
            sweep: file.sweep,
            channel,
            assumed_channel,
            truncation: file
                .truncation
                .unwrap_or(TruncationPolicy::BiasTolerance { delta: 0.001 }),
            zne_scales,
            out: file.out,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.lattice.rows * self.lattice.cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML_EXAMPLE: &str = r#"
seed = 42
methods = ["raw", "fpec"]
shots = 500

[lattice]
rows = 3
cols = 3
coupling = 1.0
field = 2.0
tau = 0.2
initial_angle = 0.1

[sweep]
start = 1
end = 3

[channel]
kind = "depolarizing"
avg_infidelity = 5.3e-4

[truncation]
policy = "bias_tolerance"
delta = 0.001
"#;

    #[test]
    fn toml_and_json_forms_agree() {
        let dir = std::env::temp_dir();
        let file: ConfigFile = toml::from_str(TOML_EXAMPLE).unwrap();
        let json = serde_json::to_string(&file).unwrap();
        let from_json: ConfigFile = serde_json::from_str(&json).unwrap();
        let a = Experiment::from_file(file, &dir).unwrap();
        let b = Experiment::from_file(from_json, &dir).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.channel, b.channel);
        assert_eq!(a.truncation, b.truncation);
        assert!((a.channel.error_weight() - 6.625e-4).abs() < 1e-18);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = format!("{TOML_EXAMPLE}\nbogus_field = 3\n");
        assert!(toml::from_str::<ConfigFile>(&bad).is_err());
    }

    #[test]
    fn missing_seed_rejected() {
        let without_seed = TOML_EXAMPLE.replace("seed = 42\n", "");
        assert!(toml::from_str::<ConfigFile>(&without_seed).is_err());
    }

    #[test]
    fn depolarizing_needs_exactly_one_rate() {
        let dir = std::env::temp_dir();
        let both = ChannelConfig::Depolarizing {
            eps: Some(1e-3),
            avg_infidelity: Some(1e-3),
        };
        assert!(both.resolve(&dir).is_err());
        let neither = ChannelConfig::Depolarizing {
            eps: None,
            avg_infidelity: None,
        };
        assert!(neither.resolve(&dir).is_err());
    }

    #[test]
    fn missing_channel_file_is_config_error() {
        let cfg = ChannelConfig::File {
            path: PathBuf::from("does-not-exist.json"),
        };
        let err = cfg.resolve(Path::new("/tmp")).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }

    #[test]
    fn empty_sweep_rejected() {
        let mut file: ConfigFile = toml::from_str(TOML_EXAMPLE).unwrap();
        file.sweep = SweepRange { start: 5, end: 2 };
        assert!(Experiment::from_file(file, Path::new(".")).is_err());
    }
}
