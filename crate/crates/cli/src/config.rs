use std::path::{Path, PathBuf};

use creditworks::dataset::MissingPolicy;
use creditworks::exposure::ExposureColumns;
use creditworks::forest::{FeatureSubsample, ForestConfig, TreeParams};
use creditworks::logreg::LogisticConfig;
use serde::Deserialize;

use crate::error::CliError;

/// Pipeline settings read from the `--config` JSON file. Relative paths
/// are resolved against the file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// JSON array of `{name, kind, role}`; the built-in loan spec when absent.
    #[serde(default)]
    pub column_spec: Option<PathBuf>,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
    /// Columns removed before encoding. When absent, the default five are
    /// dropped if the table has them.
    #[serde(default)]
    pub drop_columns: Option<Vec<String>>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default = "default_risk_free_rate")]
    pub risk_free_rate: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<ThresholdSpec>,
    #[serde(default)]
    pub exposure: ExposureColumns,
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_risk_free_rate() -> f64 {
    0.03
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ThresholdSpec {
    pub column: String,
    pub above: f64,
}

fn default_thresholds() -> Vec<ThresholdSpec> {
    [("annual_inc", 1e6), ("open_acc", 40.0), ("total_acc", 80.0)]
        .into_iter()
        .map(|(c, a)| ThresholdSpec {
            column: c.into(),
            above: a,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Logreg(LogisticConfig),
    Forest(ForestSettings),
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Logreg(LogisticConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSettings {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub criterion: creditworks::forest::Criterion,
    pub feature_subsample: FeatureSubsample,
    pub bootstrap: bool,
    pub threshold: f64,
}

impl Default for ForestSettings {
    fn default() -> Self {
        let f = ForestConfig::default();
        Self {
            n_trees: f.n_trees,
            max_depth: f.params.max_depth,
            min_samples_split: f.params.min_samples_split,
            criterion: f.params.criterion,
            feature_subsample: f.params.feature_subsample,
            bootstrap: f.bootstrap,
            threshold: 0.5,
        }
    }
}

impl ForestSettings {
    pub fn to_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            params: TreeParams {
                max_depth: self.max_depth,
                min_samples_split: self.min_samples_split,
                criterion: self.criterion,
                feature_subsample: self.feature_subsample,
            },
            seed,
            bootstrap: self.bootstrap,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.input = base.join(&cfg.input);
        cfg.column_spec = cfg.column_spec.map(|p| base.join(p));
        cfg.output_dir = cfg.output_dir.map(|p| base.join(p));
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        for p in std::iter::once(&self.input).chain(&self.column_spec) {
            if !p.is_file() {
                return Err(CliError::Usage(format!("{} does not exist", p.display())));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::Usage(format!(
                "test_fraction {} must lie strictly between 0 and 1",
                self.test_fraction
            )));
        }
        if !self.risk_free_rate.is_finite() {
            return Err(CliError::Usage("risk_free_rate must be finite".into()));
        }
        let threshold = match &self.model {
            ModelConfig::Logreg(c) => {
                if c.learning_rate.is_nan() || c.learning_rate <= 0.0 {
                    return Err(CliError::Usage("learning_rate must be positive".into()));
                }
                c.threshold
            }
            ModelConfig::Forest(f) => {
                if f.n_trees == 0 {
                    return Err(CliError::Usage("n_trees must be at least 1".into()));
                }
                f.threshold
            }
        };
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(CliError::Usage(format!(
                "threshold {threshold} must lie in (0, 1)"
            )));
        }
        Ok(())
    }

    pub fn model_kind(&self) -> &'static str {
        match self.model {
            ModelConfig::Logreg(_) => "logreg",
            ModelConfig::Forest(_) => "forest",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, body: &str) -> PathBuf {
        std::fs::write(dir.join("loans.csv"), "x\n").unwrap();
        let p = dir.join("config.json");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg =
            PipelineConfig::load(&write(dir.path(), r#"{"input":"loans.csv","seed":7}"#)).unwrap();
        assert_eq!(cfg.input, dir.path().join("loans.csv"));
        assert_eq!(cfg.model, ModelConfig::Logreg(LogisticConfig::default()));
        assert_eq!(cfg.test_fraction, 0.3);
        assert_eq!(cfg.thresholds.len(), 3);
        assert_eq!(cfg.missing_policy, MissingPolicy::FillMedianOrMode);
    }

    #[test]
    fn seed_is_mandatory() {
        let dir = tempfile::tempdir().unwrap();
        let err = PipelineConfig::load(&write(dir.path(), r#"{"input":"loans.csv"}"#)).unwrap_err();
        assert_eq!(err.exit_code(), 64);
    }

    #[test]
    fn unknown_model_kind_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let body = r#"{"input":"loans.csv","seed":1,"model":{"kind":"svm"}}"#;
        assert_eq!(
            PipelineConfig::load(&write(dir.path(), body))
                .unwrap_err()
                .exit_code(),
            64
        );
    }

    #[test]
    fn forest_settings_are_partial() {
        let dir = tempfile::tempdir().unwrap();
        let body = r#"{"input":"loans.csv","seed":1,"model":{"kind":"forest","n_trees":5,"criterion":"entropy"}}"#;
        let cfg = PipelineConfig::load(&write(dir.path(), body)).unwrap();
        let ModelConfig::Forest(f) = cfg.model else {
            panic!("expected forest")
        };
        let fc = f.to_config(1);
        assert_eq!(fc.n_trees, 5);
        assert_eq!(fc.params.feature_subsample, FeatureSubsample::Sqrt);
        assert_eq!(fc.params.criterion, creditworks::forest::Criterion::Entropy);
    }

    #[test]
    fn missing_input_and_bad_fraction_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"input":"nope.csv","seed":1}"#).unwrap();
        assert_eq!(PipelineConfig::load(&p).unwrap_err().exit_code(), 64);
        let body = r#"{"input":"loans.csv","seed":1,"test_fraction":1.0}"#;
        assert_eq!(
            PipelineConfig::load(&write(dir.path(), body))
                .unwrap_err()
                .exit_code(),
            64
        );
    }
}
