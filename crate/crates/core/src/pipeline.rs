//! End-to-end orchestration shared by the command-line front end and the
//! integration tests: load the configured inputs, validate, build the
//! panel, fit the model ladder, and assemble the run manifest. Keeping
//! this in the library means a test can drive exactly the code path the
//! CLI does, minus the argument parsing and file writing.

use std::path::{Path, PathBuf};

use crate::config::{ConfigError, RunConfig};
use crate::dataio::{
    load_factor_tables, load_stations, load_survey, validate_dataset, DataError, FactorTables,
    RawSurvey, StationSet, SurveyPaths, ValidationReport,
};
use crate::evaluate::{did_fit, DidFit, EvalError, ModelId};
use crate::lifecycle::LifecycleError;
use crate::panel::{build_balanced_panel, BalancedPanel, PanelError};
use crate::report::{sha256_file, InputDigest, ManifestCore};
use crate::simulate::SimError;
use crate::stats::StatsError;

/// Any failure between reading a config file and producing a report.
/// Stage errors pass through verbatim — the originating module's message
/// is the most specific one available.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("cannot read {path}: {source}")]
    ReadIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("dataset failed validation with {fatal} fatal issue(s)")]
    ValidationFailed { fatal: usize },
}

/// The three loaded input groups every analysis starts from.
#[derive(Debug, Clone)]
pub struct LoadedInputs {
    pub survey: RawSurvey,
    pub factors: FactorTables,
    pub stations: StationSet,
}

/// Load every input the config names (lifecycle factors are loaded by
/// the lifecycle stage itself, which is the only consumer).
pub fn load_inputs(cfg: &RunConfig) -> Result<LoadedInputs, PipelineError> {
    let survey = load_survey(&SurveyPaths {
        households: cfg.inputs.require("households")?.to_path_buf(),
        vehicles: cfg.inputs.require("vehicles")?.to_path_buf(),
        odometer: cfg.inputs.require("odometer")?.to_path_buf(),
        trips: cfg.inputs.require("trips")?.to_path_buf(),
    })?;
    let factors = load_factor_tables(
        cfg.inputs.require("factors_gasoline")?,
        cfg.inputs.require("factors_electrified")?,
    )?;
    let stations = load_stations(cfg.inputs.require("stations")?)?;
    Ok(LoadedInputs {
        survey,
        factors,
        stations,
    })
}

/// Digest every file the config points at (plus the config file itself,
/// when given), in a fixed role order.
pub fn input_digests(
    cfg: &RunConfig,
    config_path: Option<&Path>,
) -> Result<Vec<InputDigest>, PipelineError> {
    let mut digests = Vec::new();
    let mut add = |role: &str, path: &Path| -> Result<(), PipelineError> {
        let sha256 = sha256_file(path).map_err(|source| PipelineError::ReadIo {
            path: path.to_path_buf(),
            source,
        })?;
        digests.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    };

    if let Some(path) = config_path {
        add("config", path)?;
    }
    let slots: [(&str, &Option<PathBuf>); 8] = [
        ("households", &cfg.inputs.households),
        ("vehicles", &cfg.inputs.vehicles),
        ("odometer", &cfg.inputs.odometer),
        ("trips", &cfg.inputs.trips),
        ("factors_gasoline", &cfg.inputs.factors_gasoline),
        ("factors_electrified", &cfg.inputs.factors_electrified),
        ("stations", &cfg.inputs.stations),
        ("lifecycle", &cfg.inputs.lifecycle),
    ];
    for (role, slot) in slots {
        if let Some(path) = slot {
            add(role, path)?;
        }
    }
    Ok(digests)
}

/// Assemble the digest-stable manifest core for a run over `inputs`,
/// with panel row counts when a panel was built.
pub fn manifest_core(
    cfg: &RunConfig,
    digests: Vec<InputDigest>,
    inputs: &LoadedInputs,
    panel: Option<&BalancedPanel>,
) -> ManifestCore {
    let mut core = ManifestCore::new(cfg.clone());
    core.inputs = digests;
    core.row_counts
        .insert("households", inputs.survey.households.len());
    core.row_counts
        .insert("vehicles", inputs.survey.vehicles.len());
    core.row_counts
        .insert("odometer", inputs.survey.odometer.len());
    core.row_counts.insert("trips", inputs.survey.trips.len());
    core.row_counts.insert("stations", inputs.stations.len());
    core.row_counts
        .insert("gasoline_factors", inputs.factors.gasoline.len());
    core.row_counts
        .insert("electrified_factors", inputs.factors.electrified.len());
    if let Some(panel) = panel {
        core.row_counts
            .insert("panel_observations", panel.observations.len());
        core.row_counts
            .insert("panel_exclusions", panel.exclusions.len());
        core.row_counts
            .insert("retained_households", panel.n_households());
    }
    core
}

/// Validate, and refuse to continue past fatal issues.
pub fn ensure_valid(inputs: &LoadedInputs) -> Result<ValidationReport, PipelineError> {
    let report = validate_dataset(&inputs.survey, &inputs.factors, &inputs.stations);
    if !report.is_ok() {
        return Err(PipelineError::ValidationFailed {
            fatal: report.fatal_count(),
        });
    }
    Ok(report)
}

/// Screen and assemble the balanced panel.
pub fn build_panel(inputs: &LoadedInputs, cfg: &RunConfig) -> Result<BalancedPanel, PipelineError> {
    Ok(build_balanced_panel(
        &inputs.survey,
        &inputs.factors,
        &inputs.stations,
        cfg,
    )?)
}

/// Fit the requested models in ladder order.
pub fn fit_models(
    panel: &BalancedPanel,
    models: &[ModelId],
) -> Result<Vec<(ModelId, DidFit)>, EvalError> {
    models
        .iter()
        .map(|&m| Ok((m, did_fit(panel, &m.covariates())?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CovariateSpec;
    use crate::dataio::{write_factor_tables, write_stations, write_survey};
    use crate::simulate::{generate_dataset, SimConfig};

    /// Write a generated dataset to disk and point a config at it.
    fn dataset_on_disk(dir: &Path) -> RunConfig {
        let cfg = SimConfig {
            households_per_cell: 8,
            noise_sd: 0.0,
            ..SimConfig::default()
        };
        let data = generate_dataset(&cfg).unwrap();

        let paths = SurveyPaths {
            households: dir.join("households.csv"),
            vehicles: dir.join("vehicles.csv"),
            odometer: dir.join("odometer.csv"),
            trips: dir.join("trips.csv"),
        };
        write_survey(&data.survey, &paths).unwrap();
        write_factor_tables(
            &data.factors,
            &dir.join("factors_gasoline.csv"),
            &dir.join("factors_electrified.csv"),
        )
        .unwrap();
        write_stations(&data.stations, &dir.join("stations.csv")).unwrap();

        let mut run = RunConfig::default();
        run.inputs.households = Some(paths.households);
        run.inputs.vehicles = Some(paths.vehicles);
        run.inputs.odometer = Some(paths.odometer);
        run.inputs.trips = Some(paths.trips);
        run.inputs.factors_gasoline = Some(dir.join("factors_gasoline.csv"));
        run.inputs.factors_electrified = Some(dir.join("factors_electrified.csv"));
        run.inputs.stations = Some(dir.join("stations.csv"));
        run
    }

    #[test]
    fn written_dataset_loads_validates_and_fits() {
        let dir = tempfile::tempdir().unwrap();
        let run = dataset_on_disk(dir.path());

        let inputs = load_inputs(&run).unwrap();
        assert_eq!(inputs.survey.households.len(), 32); // 16 households × 2 waves
        ensure_valid(&inputs).unwrap();

        let panel = build_panel(&inputs, &run).unwrap();
        assert_eq!(panel.n_households(), 16);

        let fits = fit_models(&panel, &[ModelId::Model1, ModelId::Model2]).unwrap();
        assert_eq!(fits.len(), 2);
        // Zero noise: the saturated model recovers the planted effect.
        assert!((fits[0].1.treatment_effect() - SimConfig::default().tau).abs() < 1e-6);
    }

    #[test]
    fn round_trip_preserves_the_survey_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let sim = SimConfig {
            households_per_cell: 6,
            ..SimConfig::default()
        };
        let data = generate_dataset(&sim).unwrap();
        let paths = SurveyPaths {
            households: dir.path().join("h.csv"),
            vehicles: dir.path().join("v.csv"),
            odometer: dir.path().join("o.csv"),
            trips: dir.path().join("t.csv"),
        };
        write_survey(&data.survey, &paths).unwrap();
        let reloaded = crate::dataio::load_survey(&paths).unwrap();
        assert_eq!(reloaded, data.survey);
    }

    #[test]
    fn missing_input_is_a_config_error() {
        let run = RunConfig::default(); // no paths set
        match load_inputs(&run) {
            Err(PipelineError::Config(ConfigError::MissingInput("households"))) => {}
            other => panic!("expected MissingInput, got {other:?}"),
        }
    }

    #[test]
    fn manifest_registers_every_named_input() {
        let dir = tempfile::tempdir().unwrap();
        let run = dataset_on_disk(dir.path());
        let inputs = load_inputs(&run).unwrap();
        let digests = input_digests(&run, None).unwrap();
        assert_eq!(digests.len(), 7); // lifecycle not configured
        assert!(digests.iter().all(|d| d.sha256.len() == 64));

        let core = manifest_core(&run, digests, &inputs, None);
        assert!(core.row_counts["households"] > 0);
        assert!(!core.row_counts.contains_key("panel_observations"));

        // Same files, same digest; rebuilt from scratch.
        let again = manifest_core(&run, input_digests(&run, None).unwrap(), &inputs, None);
        assert_eq!(core.digest(), again.digest());
    }

    #[test]
    fn models_fit_in_ladder_order() {
        let dir = tempfile::tempdir().unwrap();
        let run = dataset_on_disk(dir.path());
        let inputs = load_inputs(&run).unwrap();
        let panel = build_panel(&inputs, &run).unwrap();
        let fits = fit_models(&panel, &ModelId::ALL).unwrap();
        assert_eq!(fits.len(), 4);
        assert_eq!(fits[0].1.column_names.len(), 4);
        assert_eq!(
            fits[3].1.column_names.len(),
            4 + CovariateSpec {
                veh_cnt: true,
                ppl_cnt: true,
                income_dummies: true,
            }
            .column_names()
            .len()
        );
    }
}
