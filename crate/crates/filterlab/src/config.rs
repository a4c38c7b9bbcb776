//! The run configuration file: a TOML document with global knobs, one
//! optional modulus choice, named DSL objects, and per-experiment
//! overrides.
//!
//! Parsing is strict. Unknown keys are rejected with the position the TOML
//! reader reports, every named DSL expression is parsed at load time, and a
//! `[modulus]` section is validated against the axiom grid immediately so a
//! bad gauge fails the run before any sweep starts. `parse` and `emit`
//! round-trip: emitting a parsed config and parsing it again yields the
//! same value.

use std::collections::BTreeMap;
use std::path::PathBuf;

use filterlab_core::gallery::GalleryParams;
use filterlab_core::modulus::{validate_modulus, ModulusFunction};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, DslError};

#[derive(Debug, Error)]
pub enum ConfigError {
    // The source is chained, not interpolated: callers render these through
    // anyhow's alternate format, which walks the chain itself, and repeating
    // the cause in the message would print every diagnostic twice.
    #[error("configuration does not parse")]
    Syntax {
        #[from]
        source: toml::de::Error,
    },
    #[error("configuration does not serialize")]
    Emit {
        #[from]
        source: toml::ser::Error,
    },
    #[error("[modulus] needs exactly one of `name` or `expr`")]
    ModulusChoice,
    #[error("modulus `{name}` violates {axiom}: {detail}")]
    BadModulus { name: String, axiom: &'static str, detail: String },
    #[error("{kind} `{name}` = `{text}` does not parse")]
    BadDsl { kind: &'static str, name: String, text: String, source: DslError },
    #[error("output format `{format}` is not one of json, csv, text")]
    BadFormat { format: String },
    #[error("horizon {horizon} does not fit: {reason}")]
    BadHorizon { horizon: String, reason: String },
}

/// Integers that may be written in scientific notation (`horizon = 1e6`).
/// TOML reads `1e6` as a float; this helper folds both spellings into an
/// exact `u64` and rejects anything fractional, negative, or oversized.
mod sci_u64_opt {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
    }

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u64(*n),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        let raw = Option::<Raw>::deserialize(d)?;
        match raw {
            None => Ok(None),
            Some(Raw::Int(n)) if n >= 0 => Ok(Some(n as u64)),
            Some(Raw::Int(n)) => Err(D::Error::custom(format!("{n} is negative"))),
            Some(Raw::Float(v)) => {
                if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 2f64.powi(53) {
                    Ok(Some(v as u64))
                } else {
                    Err(D::Error::custom(format!("{v} is not an exact non-negative integer")))
                }
            }
        }
    }
}

/// The `[modulus]` section: a builtin by `name`, or a custom `expr` over t.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusChoice {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

impl ModulusChoice {
    /// The text to hand to the DSL, whichever field carries it.
    fn text(&self) -> Result<&str, ConfigError> {
        match (&self.name, &self.expr) {
            (Some(name), None) => Ok(name),
            (None, Some(expr)) => Ok(expr),
            _ => Err(ConfigError::ModulusChoice),
        }
    }

    /// Build and validate the modulus: the three axioms must hold on the
    /// default grid. Unboundedness is probed and reported where it is
    /// needed, not here.
    pub fn build(&self) -> Result<ModulusFunction, ConfigError> {
        let text = self.text()?;
        let modulus = dsl::parse_modulus(text).map_err(|source| ConfigError::BadDsl {
            kind: "modulus",
            name: "modulus".to_string(),
            text: text.to_string(),
            source,
        })?;
        let report = validate_modulus(&modulus).map_err(|e| ConfigError::BadDsl {
            kind: "modulus",
            name: "modulus".to_string(),
            text: text.to_string(),
            source: DslError::Invalid(e.to_string()),
        })?;
        for (axiom, check) in [
            ("f(0) = 0", &report.zero_at_origin),
            ("monotonicity", &report.monotone),
            ("subadditivity", &report.subadditive),
        ] {
            if !check.holds {
                return Err(ConfigError::BadModulus {
                    name: modulus.name().to_string(),
                    axiom,
                    detail: check.detail.clone(),
                });
            }
        }
        Ok(modulus)
    }
}

/// Per-experiment parameter overrides, keyed by registry name in
/// `[experiments.<name>]` sections.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "sci_u64_opt")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
}

/// The `[output]` section: default report destination and format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<bool>,
}

/// Everything a run can be told from a file. Field semantics match the CLI
/// flags of the same names; flags win when both are given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none", with = "sci_u64_opt")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusChoice>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sets: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub filters: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sequences: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub experiments: BTreeMap<String, ExperimentOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    /// Parse and fully validate a config document.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Emit the config as TOML. `parse(emit(c))` equals `c`.
    pub fn emit(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string_pretty(self)?)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(choice) = &self.modulus {
            choice.build()?;
        }
        for (name, text) in &self.sets {
            dsl::parse_set(text).map_err(|source| ConfigError::BadDsl {
                kind: "set",
                name: name.clone(),
                text: text.clone(),
                source,
            })?;
        }
        for (name, text) in &self.filters {
            dsl::parse_filter(text).map_err(|source| ConfigError::BadDsl {
                kind: "filter",
                name: name.clone(),
                text: text.clone(),
                source,
            })?;
        }
        for (name, text) in &self.sequences {
            // Validated against a scalar line; walk generators re-bind to
            // the real space at run time.
            let space = filterlab_core::spaces::SpaceModel::l1(self.dim.unwrap_or(1))
                .expect("a positive dimension is always valid");
            dsl::parse_sequence(text, &space, self.dim.unwrap_or(1), 1_000).map_err(|source| {
                ConfigError::BadDsl {
                    kind: "sequence",
                    name: name.clone(),
                    text: text.clone(),
                    source,
                }
            })?;
        }
        if let Some(output) = &self.output {
            if let Some(format) = &output.format {
                if !matches!(format.as_str(), "json" | "csv" | "text") {
                    return Err(ConfigError::BadFormat { format: format.clone() });
                }
            }
        }
        Ok(())
    }

    /// Fold the config's globals and one experiment's overrides into the
    /// gallery parameter block.
    pub fn gallery_params(&self, experiment: &str) -> GalleryParams {
        let overrides = self.experiments.get(experiment);
        GalleryParams {
            seed: self.seed.unwrap_or_else(|| GalleryParams::default().seed),
            horizon: overrides.and_then(|o| o.horizon).or(self.horizon),
            dim: overrides.and_then(|o| o.dim).or(self.dim),
            tolerance: overrides.and_then(|o| o.tolerance).or(self.tolerance),
            cases: overrides.and_then(|o| o.cases).or(self.cases),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults_elsewhere() {
        let config = RunConfig::parse("horizon = 1e6").expect("scientific notation is accepted");
        assert_eq!(config.horizon, Some(1_000_000));
        assert_eq!(config.dim, None, "everything else stays at its default");
        assert_eq!(config.sets.len(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position_info() {
        let err = RunConfig::parse("horizont = 10").expect_err("typos must not pass");
        // The position detail rides in the source chain, the way callers
        // render it; the top-level message alone stays short.
        let chain = format!("{:#}", anyhow::Error::from(err));
        assert!(chain.contains("horizont"), "the chain should name the offending key: {chain}");
        assert!(chain.contains("line 1"), "the chain should carry the position: {chain}");
    }

    #[test]
    fn named_filter_round_trips_through_the_dsl() {
        let text = "
            [filters]
            log_stat = \"fstat(log1p)\"
        ";
        let config = RunConfig::parse(text).expect("the filter DSL validates at load time");
        assert_eq!(config.filters["log_stat"], "fstat(log1p)");
        let rebuilt = RunConfig::parse(&config.emit().unwrap()).unwrap();
        assert_eq!(rebuilt, config, "emit then parse is the identity");
    }

    #[test]
    fn modulus_expr_t_squared_is_rejected_with_a_witness() {
        let text = "
            [modulus]
            expr = \"t*t\"
        ";
        let err = RunConfig::parse(text).expect_err("t*t is not subadditive");
        match err {
            ConfigError::BadModulus { axiom, detail, .. } => {
                assert_eq!(axiom, "subadditivity");
                assert!(
                    detail.contains('('),
                    "the detail should quote the violating pair: {detail}"
                );
            }
            other => panic!("expected a modulus rejection, got {other}"),
        }
    }

    #[test]
    fn modulus_section_requires_exactly_one_selector() {
        let both = "
            [modulus]
            name = \"log1p\"
            expr = \"t\"
        ";
        assert!(matches!(RunConfig::parse(both), Err(ConfigError::ModulusChoice)));
        let neither = "[modulus]\n";
        assert!(matches!(RunConfig::parse(neither), Err(ConfigError::ModulusChoice)));
    }

    #[test]
    fn experiment_overrides_shadow_globals() {
        let text = "
            horizon = 1e6
            seed = 11
            [experiments.fast-remark]
            horizon = 2e5
            cases = 3
        ";
        let config = RunConfig::parse(text).unwrap();
        let fast = config.gallery_params("fast-remark");
        assert_eq!(fast.horizon, Some(200_000));
        assert_eq!(fast.cases, Some(3));
        assert_eq!(fast.seed, 11);
        let other = config.gallery_params("cesaro-lemma");
        assert_eq!(other.horizon, Some(1_000_000), "unlisted experiments keep the global");
    }

    #[test]
    fn bad_dsl_in_a_named_set_is_rejected_at_load() {
        let text = "
            [sets]
            probe = \"trapezoids\"
        ";
        let err = RunConfig::parse(text).expect_err("unknown set constructors must fail");
        assert!(err.to_string().contains("probe"), "the error names the entry: {err}");
    }
}
