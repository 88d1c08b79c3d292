//! `co2did` — drive the evaluation pipeline from the shell.
//!
//! Every subcommand reads a dotted-key config file naming the input CSVs
//! and analysis settings, writes machine documents (JSON, full-precision
//! CSV) into the output directory, and prints human tables to stdout.
//! Status lines go to stderr so stdout stays pipeable.
//!
//! Exit codes: 0 success, 1 validation or pipeline failure (the
//! originating module's message is printed verbatim), 2 usage error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use co2did::config::{Length, RunConfig, TtestVariant};
use co2did::dataio::{
    validate_dataset, write_factor_tables, write_stations, write_survey, Severity, SurveyPaths,
    ValidationReport,
};
use co2did::evaluate::{
    did_fit, group_contrast_table, sensitivity_sweep, within_group_change, ContrastRow, Metric,
    ModelId, SensitivityRow,
};
use co2did::lifecycle::{load_transit_factors, net_effect_summary, transit_group_summaries};
use co2did::panel::{BalancedPanel, GroupLabel};
use co2did::pipeline::{
    build_panel, ensure_valid, fit_models, input_digests, load_inputs, manifest_core, LoadedInputs,
    PipelineError,
};
use co2did::report::{
    contrast_csv, contrast_text, did_text, emissions_csv, ledger_text, lifecycle_text,
    panel_ledger_csv, sensitivity_csv, sensitivity_text, to_json, within_change_csv, DidDocument,
    InputDigest, LifecycleDocument, ManifestCore, RecoveryDocument, RunManifest, ValidateDocument,
};
use co2did::simulate::{generate_dataset, recovery_experiment, GroundTruth, SimConfig};

#[derive(Parser)]
#[command(
    name = "co2did",
    version,
    about = "Household vehicle CO2 around a transit corridor: panel screening, \
             difference-in-differences estimation, and life-cycle accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configured inputs and report every data issue found.
    Validate(AnalysisArgs),
    /// Screen household-waves and print the exclusion ledger.
    Panel(AnalysisArgs),
    /// Per-vehicle daily VMT and CO2 for the balanced panel.
    Emissions(AnalysisArgs),
    /// Experimental-vs-control means by wave, with within-group changes.
    Contrast(ContrastArgs),
    /// Fit the difference-in-differences model ladder.
    Did(DidArgs),
    /// Transit life-cycle factors and the net-effect bound.
    Lifecycle(LifecycleArgs),
    /// Refit the interaction across alternative catchment radii.
    Sensitivity(SensitivityArgs),
    /// Generate a seeded synthetic survey bundle (CSVs plus run.conf).
    Simulate(SimulateArgs),
    /// Monte Carlo check that the pipeline recovers a planted effect.
    Recover(RecoverArgs),
    /// Everything at once: validate, panel, emissions, contrasts, the
    /// model ladder, life-cycle accounting, and the radius sweep.
    Report(ReportArgs),
}

#[derive(Args)]
struct AnalysisArgs {
    /// Run-configuration file (dotted keys naming the inputs).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Directory reports are written into (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ContrastArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    /// Two-sample test variant; defaults to the config's choice.
    #[arg(long, value_enum)]
    ttest: Option<TtestFlag>,
}

#[derive(Args)]
struct DidArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    /// Which model of the ladder to fit.
    #[arg(long, value_enum, default_value_t = ModelFlag::All)]
    model: ModelFlag,
}

#[derive(Args)]
struct LifecycleArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    /// Model supplying the vehicle-CO2 treatment effect.
    #[arg(long, value_enum, default_value_t = SingleModelFlag::M1)]
    model: SingleModelFlag,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    /// Catchment radii to sweep, e.g. `0.5mi,1km,0.75mi`.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_length,
        default_value = "0.25mi,0.5mi,0.62mi,0.75mi,1mi"
    )]
    radii: Vec<Length>,
    /// Which model of the ladder to refit at each radius.
    #[arg(long, value_enum, default_value_t = ModelFlag::All)]
    model: ModelFlag,
}

#[derive(Args)]
struct SimulateArgs {
    /// Optional config supplying `sim.*` generator keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory the dataset bundle is written into.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Master seed (overrides the config's `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Optional config supplying `sim.*` generator keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory the recovery report is written into.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Master seed (overrides the config's `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replications.
    #[arg(long, default_value_t = 500)]
    reps: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: AnalysisArgs,
    /// Catchment radii for the sensitivity section.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_length,
        default_value = "0.25mi,0.5mi,0.62mi,0.75mi,1mi"
    )]
    radii: Vec<Length>,
    /// Two-sample test variant; defaults to the config's choice.
    #[arg(long, value_enum)]
    ttest: Option<TtestFlag>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelFlag {
    #[value(name = "1")]
    M1,
    #[value(name = "2")]
    M2,
    #[value(name = "3")]
    M3,
    #[value(name = "4")]
    M4,
    All,
}

impl ModelFlag {
    fn models(self) -> Vec<ModelId> {
        match self {
            ModelFlag::M1 => vec![ModelId::Model1],
            ModelFlag::M2 => vec![ModelId::Model2],
            ModelFlag::M3 => vec![ModelId::Model3],
            ModelFlag::M4 => vec![ModelId::Model4],
            ModelFlag::All => ModelId::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SingleModelFlag {
    #[value(name = "1")]
    M1,
    #[value(name = "2")]
    M2,
    #[value(name = "3")]
    M3,
    #[value(name = "4")]
    M4,
}

impl SingleModelFlag {
    fn model(self) -> ModelId {
        match self {
            SingleModelFlag::M1 => ModelId::Model1,
            SingleModelFlag::M2 => ModelId::Model2,
            SingleModelFlag::M3 => ModelId::Model3,
            SingleModelFlag::M4 => ModelId::Model4,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TtestFlag {
    Welch,
    Pooled,
}

impl TtestFlag {
    fn variant(self) -> TtestVariant {
        match self {
            TtestFlag::Welch => TtestVariant::Welch,
            TtestFlag::Pooled => TtestVariant::Pooled,
        }
    }
}

fn parse_length(s: &str) -> Result<Length, String> {
    Length::parse(s)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Panel(args) => cmd_panel(&args),
        Command::Emissions(args) => cmd_emissions(&args),
        Command::Contrast(args) => cmd_contrast(&args),
        Command::Did(args) => cmd_did(&args),
        Command::Lifecycle(args) => cmd_lifecycle(&args),
        Command::Sensitivity(args) => cmd_sensitivity(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Recover(args) => cmd_recover(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

// ---------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------

/// Everything an analysis subcommand starts from: parsed config, loaded
/// inputs, and the input digests (config file included).
struct Session {
    cfg: RunConfig,
    inputs: LoadedInputs,
    digests: Vec<InputDigest>,
}

fn open_session(config_path: &Path) -> Result<Session, PipelineError> {
    let cfg = RunConfig::from_file(config_path)?;
    let inputs = load_inputs(&cfg)?;
    let digests = input_digests(&cfg, Some(config_path))?;
    Ok(Session {
        cfg,
        inputs,
        digests,
    })
}

fn write_artifact(out: &Path, name: &str, content: &str) -> Result<(), PipelineError> {
    std::fs::create_dir_all(out).map_err(|source| PipelineError::WriteIo {
        path: out.to_path_buf(),
        source,
    })?;
    let path = out.join(name);
    std::fs::write(&path, content).map_err(|source| PipelineError::WriteIo {
        path: path.clone(),
        source,
    })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_manifest(out: &Path, core: &ManifestCore) -> Result<(), PipelineError> {
    write_artifact(
        out,
        "manifest.json",
        &to_json(&RunManifest::new(core.clone())),
    )
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

fn cmd_validate(args: &AnalysisArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.config)?;
    let report = validate_dataset(
        &session.inputs.survey,
        &session.inputs.factors,
        &session.inputs.stations,
    );
    print_validation(&report);

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, None);
    write_manifest(&args.out, &core)?;
    write_artifact(
        &args.out,
        "validate.json",
        &to_json(&ValidateDocument::new(core, report.clone())),
    )?;

    if !report.is_ok() {
        return Err(PipelineError::ValidationFailed {
            fatal: report.fatal_count(),
        });
    }
    Ok(())
}

fn print_validation(report: &ValidationReport) {
    for issue in &report.issues {
        let severity = match issue.severity {
            Severity::Fatal => "fatal",
            Severity::Warning => "warning",
        };
        println!(
            "{severity}: {}: {}: {}",
            issue.category.as_str(),
            issue.context,
            issue.message
        );
    }
    println!(
        "{} fatal, {} warnings",
        report.fatal_count(),
        report.warning_count()
    );
}

fn cmd_panel(args: &AnalysisArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;

    print!("{}", ledger_text(&panel));
    println!("{} households retained", panel.n_households());

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    write_manifest(&args.out, &core)?;
    write_artifact(
        &args.out,
        "panel_ledger.csv",
        &panel_ledger_csv(&panel, &core.digest()),
    )
}

fn cmd_emissions(args: &AnalysisArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;

    let vehicle_rows: usize = panel.observations.iter().map(|o| o.vehicles.len()).sum();
    println!(
        "{} vehicle-wave rows across {} households",
        vehicle_rows,
        panel.n_households()
    );

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    write_manifest(&args.out, &core)?;
    write_artifact(
        &args.out,
        "emissions.csv",
        &emissions_csv(&panel, &core.digest()),
    )
}

/// Contrast rows for every metric in both waves, in table order.
fn contrast_rows(
    panel: &BalancedPanel,
    variant: TtestVariant,
) -> Result<Vec<ContrastRow>, PipelineError> {
    let mut rows = Vec::with_capacity(Metric::ALL.len() * 2);
    for metric in Metric::ALL {
        for wave in [1u8, 2] {
            rows.push(group_contrast_table(panel, metric, wave, variant)?);
        }
    }
    Ok(rows)
}

fn within_rows(
    panel: &BalancedPanel,
) -> Result<Vec<(GroupLabel, &'static str, co2did::stats::TestResult)>, PipelineError> {
    let mut rows = Vec::new();
    for group in [GroupLabel::Experimental, GroupLabel::Control] {
        for metric in Metric::ALL {
            rows.push((
                group,
                metric.as_str(),
                within_group_change(panel, group, metric)?,
            ));
        }
    }
    Ok(rows)
}

fn cmd_contrast(args: &ContrastArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.common.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;
    let variant = args
        .ttest
        .map_or(session.cfg.ttest_variant, TtestFlag::variant);

    let rows = contrast_rows(&panel, variant)?;
    let within = within_rows(&panel)?;
    print!("{}", contrast_text(&rows));

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    let digest = core.digest();
    write_manifest(&args.common.out, &core)?;
    for metric in Metric::ALL {
        let per_metric: Vec<ContrastRow> = rows
            .iter()
            .filter(|r| r.metric == metric.as_str())
            .cloned()
            .collect();
        write_artifact(
            &args.common.out,
            &format!("contrast_{}.csv", metric.as_str()),
            &contrast_csv(&per_metric, &digest),
        )?;
    }
    write_artifact(
        &args.common.out,
        "contrast_within_changes.csv",
        &within_change_csv(&within, &digest),
    )
}

fn cmd_did(args: &DidArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.common.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;

    let fits = fit_models(&panel, &args.model.models())?;
    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    write_manifest(&args.common.out, &core)?;
    for (model, fit) in &fits {
        print!("{}", did_text(*model, fit));
        println!();
        write_artifact(
            &args.common.out,
            &format!("did_model{}.json", model.number()),
            &to_json(&DidDocument::new(core.clone(), *model, fit)),
        )?;
    }
    Ok(())
}

/// Mean wave-2 − wave-1 change in train trips per day over experimental
/// households: the induced-ridership rate the offset is priced at.
fn rail_uptake(panel: &BalancedPanel) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for pair in panel.observations.chunks_exact(2) {
        if pair[0].group == GroupLabel::Experimental {
            total += pair[1].train_trips_per_day - pair[0].train_trips_per_day;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

fn cmd_lifecycle(args: &LifecycleArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.common.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;
    let factors = load_transit_factors(session.cfg.inputs.require("lifecycle")?)?;

    let model = args.model.model();
    let fit = did_fit(&panel, &model.covariates())?;
    let groups = transit_group_summaries(&panel, &factors)?;

    let uptake = rail_uptake(&panel);
    let offset = uptake * factors.rail.per_trip_lifecycle_g;
    let vehicle_effect = fit.treatment_effect();

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    let doc = LifecycleDocument {
        manifest_digest: core.digest(),
        manifest: core.clone(),
        bus: factors.bus.clone(),
        rail: factors.rail.clone(),
        groups,
        rail_uptake_trips_per_day: uptake,
        transit_offset_g: offset,
        vehicle_effect_g: vehicle_effect,
        net: net_effect_summary(vehicle_effect, offset),
    };
    print!("{}", lifecycle_text(&doc));
    write_manifest(&args.common.out, &core)?;
    write_artifact(&args.common.out, "lifecycle.json", &to_json(&doc))
}

fn sensitivity_rows(
    panel: &BalancedPanel,
    radii: &[Length],
    models: &[ModelId],
) -> Result<Vec<(ModelId, SensitivityRow)>, PipelineError> {
    let mut rows = Vec::with_capacity(models.len() * radii.len());
    for &model in models {
        for row in sensitivity_sweep(panel, radii, &model.covariates())? {
            rows.push((model, row));
        }
    }
    Ok(rows)
}

fn cmd_sensitivity(args: &SensitivityArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.common.config)?;
    ensure_valid(&session.inputs)?;
    let panel = build_panel(&session.inputs, &session.cfg)?;

    let rows = sensitivity_rows(&panel, &args.radii, &args.model.models())?;
    print!("{}", sensitivity_text(&rows));

    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    write_manifest(&args.common.out, &core)?;
    write_artifact(
        &args.common.out,
        "sensitivity.csv",
        &sensitivity_csv(&rows, &core.digest()),
    )
}

/// The generated bundle's ground truth, alongside the generator settings
/// that produced it.
#[derive(serde::Serialize)]
struct TruthDocument {
    manifest_digest: String,
    manifest: ManifestCore,
    sim: SimConfig,
    truth: GroundTruth,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), PipelineError> {
    let mut sim = match &args.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let data = generate_dataset(&sim)?;

    std::fs::create_dir_all(&args.out).map_err(|source| PipelineError::WriteIo {
        path: args.out.clone(),
        source,
    })?;
    let paths = SurveyPaths {
        households: args.out.join("households.csv"),
        vehicles: args.out.join("vehicles.csv"),
        odometer: args.out.join("odometer.csv"),
        trips: args.out.join("trips.csv"),
    };
    write_survey(&data.survey, &paths)?;
    write_factor_tables(
        &data.factors,
        &args.out.join("factors_gasoline.csv"),
        &args.out.join("factors_electrified.csv"),
    )?;
    write_stations(&data.stations, &args.out.join("stations.csv"))?;
    for name in [
        "households.csv",
        "vehicles.csv",
        "odometer.csv",
        "trips.csv",
        "factors_gasoline.csv",
        "factors_electrified.csv",
        "stations.csv",
    ] {
        eprintln!("wrote {}", args.out.join(name).display());
    }

    write_artifact(
        &args.out,
        "run.conf",
        "# Generated survey bundle; analysis settings left at defaults.\n\
         inputs.households = households.csv\n\
         inputs.vehicles = vehicles.csv\n\
         inputs.odometer = odometer.csv\n\
         inputs.trips = trips.csv\n\
         inputs.factors_gasoline = factors_gasoline.csv\n\
         inputs.factors_electrified = factors_electrified.csv\n\
         inputs.stations = stations.csv\n",
    )?;

    let mut core = ManifestCore::new(RunConfig::default());
    if let Some(path) = &args.config {
        core.inputs = input_digests(&RunConfig::default(), Some(path))?;
    }
    core.row_counts
        .insert("households", data.survey.households.len());
    core.row_counts
        .insert("vehicles", data.survey.vehicles.len());
    core.row_counts
        .insert("odometer", data.survey.odometer.len());
    core.row_counts.insert("trips", data.survey.trips.len());
    let doc = TruthDocument {
        manifest_digest: core.digest(),
        manifest: core.clone(),
        sim: sim.clone(),
        truth: data.truth,
    };
    write_manifest(&args.out, &core)?;
    write_artifact(&args.out, "truth.json", &to_json(&doc))?;

    println!(
        "generated {} households per cell (seed {}): planted effect {} g/day",
        sim.households_per_cell, sim.seed, sim.tau
    );
    Ok(())
}

fn cmd_recover(args: &RecoverArgs) -> Result<(), PipelineError> {
    let mut sim = match &args.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let report = recovery_experiment(&sim, args.reps)?;

    println!(
        "true effect {:.1}, mean estimate {:.1}, bias {:.1} ({:.2}% of truth)",
        report.true_effect,
        report.mean_estimate,
        report.bias,
        100.0 * report.bias / report.true_effect.abs().max(f64::MIN_POSITIVE)
    );
    println!(
        "rmse {:.1}, empirical sd {:.1}, mean se {:.1}",
        report.rmse, report.empirical_sd, report.mean_se
    );
    println!(
        "95% coverage {:.3}, rejection rate at 5% {:.3} over {} replications",
        report.coverage_95, report.rejection_rate_05, report.replications
    );

    // Recovery always runs the default pipeline settings; the manifest
    // records that plus the config file the sim keys came from.
    let mut core = ManifestCore::new(RunConfig::default());
    if let Some(path) = &args.config {
        core.inputs = input_digests(&RunConfig::default(), Some(path))?;
    }
    core.row_counts.insert("replications", report.replications);
    write_manifest(&args.out, &core)?;
    write_artifact(
        &args.out,
        "recovery.json",
        &to_json(&RecoveryDocument::new(core.clone(), sim, report)),
    )
}

fn cmd_report(args: &ReportArgs) -> Result<(), PipelineError> {
    let session = open_session(&args.common.config)?;
    let out = &args.common.out;

    let validation = validate_dataset(
        &session.inputs.survey,
        &session.inputs.factors,
        &session.inputs.stations,
    );
    println!("== validation ==");
    print_validation(&validation);
    if !validation.is_ok() {
        return Err(PipelineError::ValidationFailed {
            fatal: validation.fatal_count(),
        });
    }

    let panel = build_panel(&session.inputs, &session.cfg)?;
    let core = manifest_core(&session.cfg, session.digests, &session.inputs, Some(&panel));
    let digest = core.digest();
    write_manifest(out, &core)?;
    write_artifact(
        out,
        "validate.json",
        &to_json(&ValidateDocument::new(core.clone(), validation)),
    )?;

    println!("\n== panel ==");
    print!("{}", ledger_text(&panel));
    write_artifact(out, "panel_ledger.csv", &panel_ledger_csv(&panel, &digest))?;
    write_artifact(out, "emissions.csv", &emissions_csv(&panel, &digest))?;

    println!("\n== contrasts ==");
    let variant = args
        .ttest
        .map_or(session.cfg.ttest_variant, TtestFlag::variant);
    let rows = contrast_rows(&panel, variant)?;
    print!("{}", contrast_text(&rows));
    for metric in Metric::ALL {
        let per_metric: Vec<ContrastRow> = rows
            .iter()
            .filter(|r| r.metric == metric.as_str())
            .cloned()
            .collect();
        write_artifact(
            out,
            &format!("contrast_{}.csv", metric.as_str()),
            &contrast_csv(&per_metric, &digest),
        )?;
    }
    write_artifact(
        out,
        "contrast_within_changes.csv",
        &within_change_csv(&within_rows(&panel)?, &digest),
    )?;

    println!("\n== difference-in-differences ==");
    let fits = fit_models(&panel, &ModelId::ALL)?;
    for (model, fit) in &fits {
        print!("{}", did_text(*model, fit));
        println!();
        write_artifact(
            out,
            &format!("did_model{}.json", model.number()),
            &to_json(&DidDocument::new(core.clone(), *model, fit)),
        )?;
    }

    if session.cfg.inputs.lifecycle.is_some() {
        println!("== life-cycle ==");
        let factors = load_transit_factors(session.cfg.inputs.require("lifecycle")?)?;
        let fit = did_fit(&panel, &ModelId::Model1.covariates())?;
        let uptake = rail_uptake(&panel);
        let offset = uptake * factors.rail.per_trip_lifecycle_g;
        let vehicle_effect = fit.treatment_effect();
        let doc = LifecycleDocument {
            manifest_digest: digest.clone(),
            manifest: core.clone(),
            bus: factors.bus.clone(),
            rail: factors.rail.clone(),
            groups: transit_group_summaries(&panel, &factors)?,
            rail_uptake_trips_per_day: uptake,
            transit_offset_g: offset,
            vehicle_effect_g: vehicle_effect,
            net: net_effect_summary(vehicle_effect, offset),
        };
        print!("{}", lifecycle_text(&doc));
        write_artifact(out, "lifecycle.json", &to_json(&doc))?;
    } else {
        eprintln!("no lifecycle factors configured; skipping the life-cycle section");
    }

    println!("\n== catchment sensitivity ==");
    let sweep = sensitivity_rows(&panel, &args.radii, &ModelId::ALL)?;
    print!("{}", sensitivity_text(&sweep));
    write_artifact(out, "sensitivity.csv", &sensitivity_csv(&sweep, &digest))
}
