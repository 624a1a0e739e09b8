//! TOML configuration for the `dam` binary.
//!
//! ```toml
//! seed = 42
//!
//! [preprocess]
//! frames = 25
//! window = 3
//! smoothing_sigma = 1.0
//! smoothing_radius = 2
//! norm_epsilon = 1e-8
//!
//! [codebook]
//! clusterer = "som"          # or "kmeans"
//! rows = 25
//! cols = 25
//! epochs = 20
//! initial_learning_rate = 0.5
//! final_learning_rate = 0.01
//! # initial_radius = 12.5    # default max(rows, cols) / 2
//! final_radius = 0.5
//! kmeans_iterations = 50
//!
//! [evaluation]
//! protocol = "cross-subject" # or "loso"
//! runs = 30
//!
//! [data]
//! action_sets = "action_sets/msr_action3d.toml"
//! action_set = "AS1"
//! use_exclusions = true
//! msrc12_layout = "msrc12_layout.toml"
//!
//! [sweep]
//! windows = [1, 3, 5, 7]
//! grids = ["25x25"]
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Deserialize;

use crate::dataset::msrc12::Msrc12Layout;
use crate::dataset::{Protocol, SplitSpec};
use crate::eval::{ClustererKind, ExperimentConfig};
use crate::preprocess::PreprocessParams;
use crate::som::SomTrainParams;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookSection {
    pub clusterer: ClustererKind,
    pub rows: usize,
    pub cols: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub final_learning_rate: f64,
    pub initial_radius: Option<f64>,
    pub final_radius: f64,
    pub kmeans_iterations: usize,
}

impl Default for CodebookSection {
    fn default() -> Self {
        let som = SomTrainParams::default();
        CodebookSection {
            clusterer: ClustererKind::Som,
            rows: 25,
            cols: 25,
            epochs: som.epochs,
            initial_learning_rate: som.initial_learning_rate,
            final_learning_rate: som.final_learning_rate,
            initial_radius: som.initial_radius,
            final_radius: som.final_radius,
            kmeans_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub protocol: Protocol,
    pub runs: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            protocol: Protocol::CrossSubject,
            runs: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub action_sets: Option<PathBuf>,
    pub action_set: Option<String>,
    pub use_exclusions: bool,
    pub msrc12_layout: Option<PathBuf>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            action_sets: None,
            action_set: None,
            use_exclusions: true,
            msrc12_layout: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub windows: Vec<usize>,
    pub grids: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            windows: vec![1, 3, 5, 7],
            grids: vec!["25x25".into()],
        }
    }
}

/// The whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub preprocess: PreprocessParams,
    pub codebook: CodebookSection,
    pub evaluation: EvaluationSection,
    pub data: DataSection,
    pub sweep: SweepSection,
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: CliConfig =
            toml::from_str(&text).map_err(|e| anyhow!("{}: {}", path.display(), e.message()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.data.action_sets, &mut cfg.data.msrc12_layout]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Builds and validates the experiment configuration.
    pub fn experiment(&self) -> anyhow::Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            preprocess: self.preprocess,
            rows: self.codebook.rows,
            cols: self.codebook.cols,
            som: SomTrainParams {
                epochs: self.codebook.epochs,
                initial_learning_rate: self.codebook.initial_learning_rate,
                final_learning_rate: self.codebook.final_learning_rate,
                initial_radius: self.codebook.initial_radius,
                final_radius: self.codebook.final_radius,
                seed: 0,
            },
            clusterer: self.codebook.clusterer,
            kmeans_iterations: self.codebook.kmeans_iterations,
            split: SplitSpec {
                protocol: self.evaluation.protocol,
                seed: self.seed.unwrap_or(0),
                runs: self.evaluation.runs,
            },
            action_set: self.action_set_classes()?,
        };
        if self.codebook.clusterer == ClustererKind::Kmeans && self.codebook.kmeans_iterations == 0
        {
            bail!("invalid configuration: codebook.kmeans_iterations: must be at least 1");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// All sets of the configured action-set file.
    pub fn action_sets(&self) -> anyhow::Result<Vec<(String, Vec<String>)>> {
        match &self.data.action_sets {
            Some(path) => Ok(ActionSetFile::load(path)?.sets.into_iter().collect()),
            None => Ok(Vec::new()),
        }
    }

    fn action_set_classes(&self) -> anyhow::Result<Option<Vec<String>>> {
        let Some(name) = &self.data.action_set else {
            return Ok(None);
        };
        let Some(path) = &self.data.action_sets else {
            bail!(
                "invalid configuration: data.action_set: {name:?} given without data.action_sets"
            );
        };
        let file = ActionSetFile::load(path)?;
        file.sets.get(name).cloned().map(Some).ok_or_else(|| {
            anyhow!(
                "invalid configuration: data.action_set: {name:?} not in {} (known: {})",
                path.display(),
                file.sets.keys().cloned().collect::<Vec<_>>().join(", ")
            )
        })
    }

    pub fn sweep_grids(&self) -> anyhow::Result<Vec<(usize, usize)>> {
        self.sweep
            .grids
            .iter()
            .map(|g| parse_grid(g).map_err(|e| anyhow!("invalid configuration: sweep.grids: {e}")))
            .collect()
    }

    pub fn msrc12_layout(&self) -> anyhow::Result<Msrc12Layout> {
        match &self.data.msrc12_layout {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).map_err(|e| anyhow!("{}: {}", path.display(), e.message()))
            }
            None => Ok(Msrc12Layout::default()),
        }
    }
}

/// Named class lists, e.g. the three MSR Action3D action sets.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSetFile {
    #[serde(default)]
    pub source: Option<String>,
    pub sets: BTreeMap<String, Vec<String>>,
}

impl ActionSetFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow!("{}: {}", path.display(), e.message()))
    }
}

/// Parses `ROWSxCOLS`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} is not ROWSxCOLS"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("grid {s:?} is not ROWSxCOLS"))
    };
    let (r, c) = (parse(r)?, parse(c)?);
    if r * c < 2 {
        return Err(format!("grid {s:?} needs at least 2 units"));
    }
    Ok((r, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let doc = include_str!("config.rs");
        let example: String = doc
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start_matches(' '))
            .collect::<Vec<_>>()
            .join("\n");
        let cfg: CliConfig = toml::from_str(&example).unwrap();
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.codebook.rows, 25);
        assert_eq!(cfg.sweep.windows, [1, 3, 5, 7]);
        assert_eq!(cfg.evaluation.protocol, Protocol::CrossSubject);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<CliConfig>("[preprocess]\nframez = 3\n").unwrap_err();
        assert!(err.to_string().contains("framez"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_key() {
        let cfg: CliConfig = toml::from_str("[preprocess]\nframes = 25\nwindow = 30\n").unwrap();
        let err = cfg.experiment().unwrap_err().to_string();
        assert!(err.contains("preprocess.window"), "{err}");
        let cfg: CliConfig = toml::from_str("[evaluation]\nruns = 0\n").unwrap();
        assert!(cfg
            .experiment()
            .unwrap_err()
            .to_string()
            .contains("evaluation.runs"));
        let cfg: CliConfig = toml::from_str("[codebook]\nfinal_learning_rate = 2.0\n").unwrap();
        assert!(cfg
            .experiment()
            .unwrap_err()
            .to_string()
            .contains("codebook.final_learning_rate"));
        let cfg: CliConfig = toml::from_str("[data]\naction_set = \"AS1\"\n").unwrap();
        assert!(cfg
            .experiment()
            .unwrap_err()
            .to_string()
            .contains("data.action_set"));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("25x25"), Ok((25, 25)));
        assert_eq!(parse_grid("8X4"), Ok((8, 4)));
        assert!(parse_grid("25").is_err());
        assert!(parse_grid("1x1").is_err());
    }
}
