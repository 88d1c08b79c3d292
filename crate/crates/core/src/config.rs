//! Run configuration.
//!
//! Configuration lives in a single plain-text file of dotted keys:
//!
//! ```text
//! # evaluation settings
//! panel.catchment_radius = 0.5 mile
//! panel.outlier_vmt_per_day = 200
//! panel.min_odometer_readings = 3
//! stats.ttest_variant = welch
//! did.covariates = veh_cnt, ppl_cnt, income_dummies
//! survey.days = 7
//! survey.wave1_calendar_year = 2011
//! survey.wave2_calendar_year = 2012
//! run.seed = 42
//!
//! inputs.households = data/households.csv
//! inputs.vehicles = data/vehicles.csv
//! ...
//! ```
//!
//! Relative input paths are resolved against the directory containing the
//! config file, so a dataset directory can be moved as a unit. Unknown
//! keys are errors: a typo that silently fell back to a default would be
//! worse than a refusal to run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::geo::MILES_PER_KM;

/// Errors raised while reading or interpreting a config file.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}:{line}: expected `key = value`, got `{text}`")]
    Syntax {
        file: String,
        line: usize,
        text: String,
    },
    #[error("{file}:{line}: duplicate key `{key}`")]
    DuplicateKey {
        file: String,
        line: usize,
        key: String,
    },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("config does not name an input path for `{0}`")]
    MissingInput(&'static str),
}

/// Distance units accepted by the radius grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LengthUnit {
    Miles,
    Kilometers,
}

/// A distance with its unit of entry preserved, so reports can echo the
/// radius the way the user wrote it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Length {
    pub value: f64,
    pub unit: LengthUnit,
}

impl Length {
    pub fn miles(value: f64) -> Self {
        Length {
            value,
            unit: LengthUnit::Miles,
        }
    }

    pub fn kilometers(value: f64) -> Self {
        Length {
            value,
            unit: LengthUnit::Kilometers,
        }
    }

    /// Value converted to statute miles.
    pub fn to_miles(self) -> f64 {
        match self.unit {
            LengthUnit::Miles => self.value,
            LengthUnit::Kilometers => self.value * MILES_PER_KM,
        }
    }

    /// Parse `<number><unit>` or `<number> <unit>` with unit one of
    /// mi/mile/miles/km/kilometer(s)/kilometre(s).
    pub fn parse(text: &str) -> Result<Self, String> {
        let trimmed = text.trim();
        let split = trimmed
            .find(|c: char| c.is_ascii_alphabetic())
            .ok_or_else(|| format!("`{trimmed}` has no unit (expected e.g. `0.5 mi` or `1 km`)"))?;
        let (num, unit) = trimmed.split_at(split);
        let value: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", num.trim()))?;
        if !value.is_finite() || value < 0.0 {
            return Err(format!(
                "distance must be finite and non-negative, got {value}"
            ));
        }
        let unit = match unit.trim().to_ascii_lowercase().as_str() {
            "mi" | "mile" | "miles" => LengthUnit::Miles,
            "km" | "kilometer" | "kilometers" | "kilometre" | "kilometres" => {
                LengthUnit::Kilometers
            }
            other => return Err(format!("unknown distance unit `{other}` (use mi or km)")),
        };
        Ok(Length { value, unit })
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            LengthUnit::Miles => write!(f, "{} mi", self.value),
            LengthUnit::Kilometers => write!(f, "{} km", self.value),
        }
    }
}

/// Which two-sample t-test to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TtestVariant {
    /// Welch's unequal-variance test (default).
    #[default]
    Welch,
    /// Student's pooled-variance test.
    Pooled,
}

impl TtestVariant {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.trim().to_ascii_lowercase().as_str() {
            "welch" => Ok(TtestVariant::Welch),
            "pooled" => Ok(TtestVariant::Pooled),
            other => Err(format!(
                "unknown t-test variant `{other}` (welch or pooled)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TtestVariant::Welch => "welch",
            TtestVariant::Pooled => "pooled",
        }
    }
}

/// Covariate columns appended to the difference-in-differences design.
/// Column order is canonical: vehicle count, then persons 12+, then
/// income-bracket dummies (brackets 2–6, bracket 1 as base).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CovariateSpec {
    pub veh_cnt: bool,
    pub ppl_cnt: bool,
    pub income_dummies: bool,
}

impl CovariateSpec {
    pub const EMPTY: CovariateSpec = CovariateSpec {
        veh_cnt: false,
        ppl_cnt: false,
        income_dummies: false,
    };

    pub fn is_empty(self) -> bool {
        !(self.veh_cnt || self.ppl_cnt || self.income_dummies)
    }

    /// Parse a comma-separated subset of `veh_cnt`, `ppl_cnt`,
    /// `income_dummies`; `none` (or an empty string) selects the bare
    /// group/wave design.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut spec = CovariateSpec::EMPTY;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("none") {
            return Ok(spec);
        }
        for token in trimmed.split(',') {
            match token.trim() {
                "veh_cnt" => spec.veh_cnt = true,
                "ppl_cnt" => spec.ppl_cnt = true,
                "income_dummies" => spec.income_dummies = true,
                other => {
                    return Err(format!(
                        "unknown covariate `{other}` (veh_cnt, ppl_cnt, income_dummies)"
                    ))
                }
            }
        }
        Ok(spec)
    }

    /// Names of the active covariate columns, in design order.
    pub fn column_names(self) -> Vec<String> {
        let mut names = Vec::new();
        if self.veh_cnt {
            names.push("veh_cnt".to_string());
        }
        if self.ppl_cnt {
            names.push("ppl_cnt".to_string());
        }
        if self.income_dummies {
            for bracket in 2..=6 {
                names.push(format!("income_{bracket}"));
            }
        }
        names
    }
}

/// Input file locations, resolved to absolute-ish paths at parse time.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InputPaths {
    pub households: Option<PathBuf>,
    pub vehicles: Option<PathBuf>,
    pub odometer: Option<PathBuf>,
    pub trips: Option<PathBuf>,
    pub factors_gasoline: Option<PathBuf>,
    pub factors_electrified: Option<PathBuf>,
    pub stations: Option<PathBuf>,
    pub lifecycle: Option<PathBuf>,
}

impl InputPaths {
    pub fn require(&self, which: &'static str) -> Result<&Path, ConfigError> {
        let slot = match which {
            "households" => &self.households,
            "vehicles" => &self.vehicles,
            "odometer" => &self.odometer,
            "trips" => &self.trips,
            "factors_gasoline" => &self.factors_gasoline,
            "factors_electrified" => &self.factors_electrified,
            "stations" => &self.stations,
            "lifecycle" => &self.lifecycle,
            _ => unreachable!("unknown input slot {which}"),
        };
        slot.as_deref().ok_or(ConfigError::MissingInput(which))
    }
}

/// Everything a pipeline run needs beyond the data itself.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Homes at or within this distance of a station are "experimental".
    pub catchment_radius: Length,
    /// Per-vehicle daily VMT above this is treated as an unreliable
    /// odometer.
    pub outlier_vmt_per_day: f64,
    /// Minimum usable odometer readings per vehicle-wave.
    pub min_odometer_readings: usize,
    pub ttest_variant: TtestVariant,
    /// Covariates for the default regression (the `did` subcommand's
    /// model ladder overrides this per model).
    pub covariates: CovariateSpec,
    /// Diary length in days.
    pub survey_days: u32,
    /// Calendar year the emission factors of each wave are read at.
    pub wave1_calendar_year: u16,
    pub wave2_calendar_year: u16,
    pub seed: u64,
    pub inputs: InputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            catchment_radius: Length::miles(0.5),
            outlier_vmt_per_day: 200.0,
            min_odometer_readings: 3,
            ttest_variant: TtestVariant::Welch,
            covariates: CovariateSpec::EMPTY,
            survey_days: 7,
            wave1_calendar_year: 2011,
            wave2_calendar_year: 2012,
            seed: 42,
            inputs: InputPaths::default(),
        }
    }
}

impl RunConfig {
    /// Calendar year for a wave's factor lookups.
    pub fn calendar_year(&self, wave: u8) -> u16 {
        if wave == 1 {
            self.wave1_calendar_year
        } else {
            self.wave2_calendar_year
        }
    }

    /// Load a config file; keys the file does not set keep their
    /// defaults. `sim.*` keys are tolerated here (they belong to the
    /// synthetic generator, parsed separately) so one file can drive a
    /// whole simulate-then-evaluate session.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let kv = KvFile::read(path)?;
        let mut cfg = RunConfig::default();
        let base = path.parent().unwrap_or_else(|| Path::new("."));

        for (key, (value, _line)) in &kv.entries {
            match key.as_str() {
                "panel.catchment_radius" => {
                    cfg.catchment_radius =
                        Length::parse(value).map_err(|reason| ConfigError::BadValue {
                            key: key.clone(),
                            reason,
                        })?
                }
                "panel.outlier_vmt_per_day" => {
                    cfg.outlier_vmt_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "panel.min_odometer_readings" => {
                    cfg.min_odometer_readings = parse_num(key, value, 2.0, 1e6)? as usize
                }
                "stats.ttest_variant" => {
                    cfg.ttest_variant =
                        TtestVariant::parse(value).map_err(|reason| ConfigError::BadValue {
                            key: key.clone(),
                            reason,
                        })?
                }
                "did.covariates" => {
                    cfg.covariates =
                        CovariateSpec::parse(value).map_err(|reason| ConfigError::BadValue {
                            key: key.clone(),
                            reason,
                        })?
                }
                "survey.days" => cfg.survey_days = parse_num(key, value, 1.0, 31.0)? as u32,
                "survey.wave1_calendar_year" => {
                    cfg.wave1_calendar_year = parse_num(key, value, 1950.0, 2100.0)? as u16
                }
                "survey.wave2_calendar_year" => {
                    cfg.wave2_calendar_year = parse_num(key, value, 1950.0, 2100.0)? as u16
                }
                "run.seed" => {
                    cfg.seed = value.parse().map_err(|_| ConfigError::BadValue {
                        key: key.clone(),
                        reason: format!("`{value}` is not an unsigned integer"),
                    })?
                }
                k if k.starts_with("inputs.") => {
                    let slot = match k {
                        "inputs.households" => &mut cfg.inputs.households,
                        "inputs.vehicles" => &mut cfg.inputs.vehicles,
                        "inputs.odometer" => &mut cfg.inputs.odometer,
                        "inputs.trips" => &mut cfg.inputs.trips,
                        "inputs.factors_gasoline" => &mut cfg.inputs.factors_gasoline,
                        "inputs.factors_electrified" => &mut cfg.inputs.factors_electrified,
                        "inputs.stations" => &mut cfg.inputs.stations,
                        "inputs.lifecycle" => &mut cfg.inputs.lifecycle,
                        _ => return Err(ConfigError::UnknownKey(key.clone())),
                    };
                    *slot = Some(resolve(base, value));
                }
                k if k.starts_with("sim.") => {} // generator keys; see simulate::SimConfig
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        Ok(cfg)
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value.trim());
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub(crate) fn parse_num(key: &str, value: &str, min: f64, max: f64) -> Result<f64, ConfigError> {
    let v: f64 = value.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        reason: format!("`{value}` is not a number"),
    })?;
    if !v.is_finite() || v < min || v > max {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("{v} outside [{min}, {max}]"),
        });
    }
    Ok(v)
}

/// A parsed dotted-key file: `key = value` lines, `#` comments, blank
/// lines ignored. Values keep internal whitespace.
pub struct KvFile {
    pub entries: BTreeMap<String, (String, usize)>,
    pub file: String,
}

impl KvFile {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    file: file.to_string(),
                    line: line_no,
                    text: line.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    file: file.to_string(),
                    line: line_no,
                    text: line.to_string(),
                });
            }
            if entries.insert(key.clone(), (value, line_no)).is_some() {
                return Err(ConfigError::DuplicateKey {
                    file: file.to_string(),
                    line: line_no,
                    key,
                });
            }
        }
        Ok(KvFile {
            entries,
            file: file.to_string(),
        })
    }
}
