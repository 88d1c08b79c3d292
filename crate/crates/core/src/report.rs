//! Report documents, CSV builders, and plain-text tables.
//!
//! Two consumers, two disciplines. JSON documents carry every number at
//! full precision for machine consumers; plain-text tables round for
//! people (grams to 0.1, percent points to 0.01, coefficients to 0.1).
//! Every document embeds the run manifest core — config, input digests,
//! row counts — so any report can be traced to the exact bytes that
//! produced it. The wall-clock timestamp lives only in `manifest.json`
//! and is excluded from the digest, which keeps every other artifact
//! byte-identical across reruns of unchanged inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::dataio::ValidationReport;
use crate::evaluate::{CellMeans, ContrastRow, DidFit, ModelId, SensitivityRow};
use crate::lifecycle::{ModeFactors, NetEffect, TransitGroupSummary};
use crate::panel::{BalancedPanel, ExclusionReason, GroupLabel};
use crate::simulate::{RecoveryReport, SimConfig};
use crate::stats::TestResult;

/// Significance stars: `***` p<0.01, `**` p<0.05, `*` p<0.1.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// SHA-256 of a file's bytes, lowercase hex.
pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// One input file's identity in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    /// Which slot the file fills (`households`, `stations`, …).
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// The digest-stable part of the manifest: everything that determines
/// the run's outputs, and nothing that doesn't.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestCore {
    pub toolkit_version: &'static str,
    pub config: RunConfig,
    pub inputs: Vec<InputDigest>,
    /// Per-stage row counts (survey tables in, panel rows out, …).
    pub row_counts: BTreeMap<&'static str, usize>,
}

impl ManifestCore {
    pub fn new(config: RunConfig) -> Self {
        ManifestCore {
            toolkit_version: env!("CARGO_PKG_VERSION"),
            config,
            inputs: Vec::new(),
            row_counts: BTreeMap::new(),
        }
    }

    /// SHA-256 over the canonical JSON encoding. Identical inputs and
    /// config produce identical digests, whenever the run happened.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("manifest serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// `manifest.json`: the core plus the one field that may differ between
/// byte-identical reruns.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub digest: String,
    /// RFC 3339 wall-clock stamp; excluded from `digest`.
    pub generated_at: String,
    #[serde(flatten)]
    pub core: ManifestCore,
}

impl RunManifest {
    pub fn new(core: ManifestCore) -> Self {
        RunManifest {
            digest: core.digest(),
            generated_at: chrono::Utc::now().to_rfc3339(),
            core,
        }
    }
}

/// Pretty JSON with a trailing newline — the one encoding every document
/// uses, so outputs diff cleanly.
pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ValidateDocument {
    pub manifest_digest: String,
    pub manifest: ManifestCore,
    pub fatal: usize,
    pub warnings: usize,
    #[serde(flatten)]
    pub report: ValidationReport,
}

impl ValidateDocument {
    pub fn new(manifest: ManifestCore, report: ValidationReport) -> Self {
        ValidateDocument {
            manifest_digest: manifest.digest(),
            manifest,
            fatal: report.fatal_count(),
            warnings: report.warning_count(),
            report,
        }
    }
}

/// One wave's exclusion tallies; `total` is the household-wave rows that
/// entered screening, so retained + reasons reconcile to it.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub wave: u8,
    pub missing_vehicle_info: usize,
    pub incomplete_vmt: usize,
    pub no_factor_available: usize,
    pub unmatched: usize,
    pub retained: usize,
    pub total: usize,
}

pub fn ledger_rows(panel: &BalancedPanel) -> Vec<LedgerRow> {
    let counts = panel.ledger_counts();
    let at = |wave: u8, reason: ExclusionReason| counts[&(wave, reason)];
    [1u8, 2]
        .into_iter()
        .map(|wave| LedgerRow {
            wave,
            missing_vehicle_info: at(wave, ExclusionReason::MissingVehicleInfo),
            incomplete_vmt: at(wave, ExclusionReason::IncompleteVmt),
            no_factor_available: at(wave, ExclusionReason::NoFactorAvailable),
            unmatched: at(wave, ExclusionReason::Unmatched),
            retained: panel.retained_count(wave),
            total: panel.input_counts[usize::from(wave - 1)],
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PanelDocument {
    pub manifest_digest: String,
    pub manifest: ManifestCore,
    pub n_households: usize,
    pub ledger: Vec<LedgerRow>,
}

impl PanelDocument {
    pub fn new(manifest: ManifestCore, panel: &BalancedPanel) -> Self {
        PanelDocument {
            manifest_digest: manifest.digest(),
            manifest,
            n_households: panel.n_households(),
            ledger: ledger_rows(panel),
        }
    }
}

/// One regression term, fully expanded for machine consumers.
#[derive(Debug, Clone, Serialize)]
pub struct TermRow {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DidDocument {
    pub manifest_digest: String,
    pub manifest: ManifestCore,
    pub model: String,
    pub n_used: usize,
    pub n_dropped: usize,
    pub cell_means: CellMeans,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub terms: Vec<TermRow>,
    pub treatment_effect: f64,
    pub treatment_se: f64,
    pub treatment_p: f64,
}

impl DidDocument {
    pub fn new(manifest: ManifestCore, model: ModelId, fit: &DidFit) -> Self {
        let terms = fit
            .column_names
            .iter()
            .enumerate()
            .map(|(i, name)| TermRow {
                term: name.clone(),
                estimate: fit.ols.coefficients[i],
                std_error: fit.ols.standard_errors[i],
                t_value: fit.ols.t_values[i],
                p_value: fit.ols.p_values[i],
                stars: stars(fit.ols.p_values[i]),
            })
            .collect();
        DidDocument {
            manifest_digest: manifest.digest(),
            manifest,
            model: format!("model{}", model.number()),
            n_used: fit.n_used,
            n_dropped: fit.n_dropped,
            cell_means: fit.cell_means,
            r_squared: fit.ols.r_squared,
            adj_r_squared: fit.ols.adj_r_squared,
            terms,
            treatment_effect: fit.treatment_effect(),
            treatment_se: fit.treatment_se(),
            treatment_p: fit.treatment_p(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LifecycleDocument {
    pub manifest_digest: String,
    pub manifest: ManifestCore,
    pub bus: ModeFactors,
    pub rail: ModeFactors,
    pub groups: Vec<TransitGroupSummary>,
    /// Experimental-group change in train trips per day (wave 2 − wave 1)
    /// used as the induced-ridership rate.
    pub rail_uptake_trips_per_day: f64,
    /// Uptake × rail per-trip life-cycle grams.
    pub transit_offset_g: f64,
    /// The vehicle-CO₂ treatment effect the offset is weighed against.
    pub vehicle_effect_g: f64,
    pub net: NetEffect,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryDocument {
    pub manifest_digest: String,
    pub manifest: ManifestCore,
    pub sim: SimConfig,
    #[serde(flatten)]
    pub report: RecoveryReport,
}

impl RecoveryDocument {
    pub fn new(manifest: ManifestCore, sim: SimConfig, report: RecoveryReport) -> Self {
        RecoveryDocument {
            manifest_digest: manifest.digest(),
            manifest,
            sim,
            report,
        }
    }
}

// ---------------------------------------------------------------------
// CSV builders (full precision; `#` comment header carries the digest)
// ---------------------------------------------------------------------

fn csv_preamble(manifest_digest: &str) -> String {
    format!("# manifest_digest={manifest_digest}\n")
}

/// Optional float cell: empty when absent.
fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn panel_ledger_csv(panel: &BalancedPanel, manifest_digest: &str) -> String {
    let mut out = csv_preamble(manifest_digest);
    out.push_str(
        "wave,missing_vehicle_info,incomplete_vmt,no_factor_available,unmatched,retained,total\n",
    );
    for r in ledger_rows(panel) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.wave,
            r.missing_vehicle_info,
            r.incomplete_vmt,
            r.no_factor_available,
            r.unmatched,
            r.retained,
            r.total
        );
    }
    out
}

pub fn emissions_csv(panel: &BalancedPanel, manifest_digest: &str) -> String {
    let mut out = csv_preamble(manifest_digest);
    out.push_str("household_id,wave,group,vehicle_id,fuel,class,daily_vmt,daily_co2_g\n");
    for o in &panel.observations {
        for v in &o.vehicles {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                v.household_id,
                v.wave,
                o.group.as_str(),
                v.vehicle_id,
                v.fuel.as_str(),
                v.class_label(),
                v.daily_vmt,
                v.daily_co2_g
            );
        }
    }
    out
}

pub fn contrast_csv(rows: &[ContrastRow], manifest_digest: &str) -> String {
    let mut out = csv_preamble(manifest_digest);
    out.push_str(
        "metric,wave,experimental_mean,control_mean,difference,percent_difference,\
         p_two_sided,n_experimental,n_control\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.metric,
            r.wave,
            r.experimental_mean,
            r.control_mean,
            r.difference,
            opt(r.percent_difference),
            r.p_two_sided,
            r.n_experimental,
            r.n_control
        );
    }
    out
}

/// Within-group wave-2 − wave-1 changes, one row per (group, metric).
pub fn within_change_csv(
    rows: &[(GroupLabel, &'static str, TestResult)],
    manifest_digest: &str,
) -> String {
    let mut out = csv_preamble(manifest_digest);
    out.push_str("group,metric,mean_change,t,df,p_two_sided,n\n");
    for (group, metric, test) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            group.as_str(),
            metric,
            test.mean_diff(),
            test.statistic,
            test.df,
            test.p_two_sided,
            test.n_x
        );
    }
    out
}

/// One row per radius × model; iteration order follows the input.
pub fn sensitivity_csv(rows: &[(ModelId, SensitivityRow)], manifest_digest: &str) -> String {
    let mut out = csv_preamble(manifest_digest);
    out.push_str(
        "radius,radius_mi,model,n_experimental_households,n_control_households,\
         n_used,treatment_effect,std_error,p_value\n",
    );
    for (model, r) in rows {
        let _ = writeln!(
            out,
            "{},{},model{},{},{},{},{},{},{}",
            r.radius,
            r.radius_mi,
            model.number(),
            r.n_experimental_households,
            r.n_control_households,
            r.fit.n_used,
            r.fit.treatment_effect(),
            r.fit.treatment_se(),
            r.fit.treatment_p()
        );
    }
    out
}

// ---------------------------------------------------------------------
// Plain-text tables
// ---------------------------------------------------------------------

/// Grams displayed to 0.1.
pub fn fmt_g(x: f64) -> String {
    format!("{x:.1}")
}

/// Percent points displayed to 0.01.
pub fn fmt_pct(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_p(p: f64) -> String {
    format!("{p:.3}")
}

/// Monospace table: first `left_cols` columns left-aligned, the rest
/// right-aligned, a dash rule under the header.
fn render_table(headers: &[&str], rows: &[Vec<String>], left_cols: usize) -> String {
    let ncol = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }

    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let pad = widths[i] - cell.chars().count();
            if i < left_cols {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };

    emit(
        &mut out,
        &headers.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    );
    let rule: Vec<String> = (0..ncol).map(|i| "-".repeat(widths[i])).collect();
    emit(&mut out, &rule);
    for row in rows {
        emit(&mut out, row);
    }
    out
}

pub fn ledger_text(panel: &BalancedPanel) -> String {
    let rows: Vec<Vec<String>> = ledger_rows(panel)
        .iter()
        .map(|r| {
            vec![
                r.wave.to_string(),
                r.missing_vehicle_info.to_string(),
                r.incomplete_vmt.to_string(),
                r.no_factor_available.to_string(),
                r.unmatched.to_string(),
                r.retained.to_string(),
                r.total.to_string(),
            ]
        })
        .collect();
    render_table(
        &[
            "wave",
            "missing vehicle info",
            "incomplete vmt",
            "no factor",
            "unmatched",
            "retained",
            "total",
        ],
        &rows,
        1,
    )
}

pub fn contrast_text(rows: &[ContrastRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.metric.to_string(),
                r.wave.to_string(),
                fmt_g(r.experimental_mean),
                fmt_g(r.control_mean),
                fmt_g(r.difference),
                r.percent_difference.map(fmt_pct).unwrap_or_default(),
                format!("{}{}", fmt_p(r.p_two_sided), stars(r.p_two_sided)),
            ]
        })
        .collect();
    render_table(
        &[
            "metric",
            "wave",
            "experimental",
            "control",
            "diff",
            "% diff",
            "p",
        ],
        &body,
        1,
    )
}

pub fn did_text(model: ModelId, fit: &DidFit) -> String {
    let mut body: Vec<Vec<String>> = fit
        .column_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            vec![
                name.clone(),
                fmt_g(fit.ols.coefficients[i]),
                fmt_g(fit.ols.standard_errors[i]),
                format!(
                    "{}{}",
                    fmt_p(fit.ols.p_values[i]),
                    stars(fit.ols.p_values[i])
                ),
            ]
        })
        .collect();
    body.push(vec![
        "adj R²".to_string(),
        format!("{:.3}", fit.ols.adj_r_squared),
        String::new(),
        String::new(),
    ]);
    body.push(vec![
        "N".to_string(),
        fit.n_used.to_string(),
        String::new(),
        String::new(),
    ]);
    let mut out = format!("Model {}\n", model.number());
    out.push_str(&render_table(&["term", "estimate", "se", "p"], &body, 1));
    out
}

/// Radii down the side, models across: each cell is the interaction
/// estimate with its stars.
pub fn sensitivity_text(rows: &[(ModelId, SensitivityRow)]) -> String {
    let mut radii: Vec<String> = Vec::new();
    let mut by_radius: BTreeMap<String, BTreeMap<ModelId, &SensitivityRow>> = BTreeMap::new();
    for (model, row) in rows {
        let key = row.radius.to_string();
        if !radii.contains(&key) {
            radii.push(key.clone());
        }
        by_radius.entry(key).or_default().insert(*model, row);
    }
    let models: Vec<ModelId> = {
        let mut seen: Vec<ModelId> = rows.iter().map(|(m, _)| *m).collect();
        seen.sort();
        seen.dedup();
        seen
    };

    let mut headers: Vec<String> = vec!["radius".into(), "n exp".into(), "n ctrl".into()];
    headers.extend(models.iter().map(|m| format!("model {}", m.number())));
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();

    let body: Vec<Vec<String>> = radii
        .iter()
        .map(|radius| {
            let cells = &by_radius[radius];
            let any = cells.values().next().expect("radius has at least one fit");
            let mut row = vec![
                radius.clone(),
                any.n_experimental_households.to_string(),
                any.n_control_households.to_string(),
            ];
            for model in &models {
                row.push(match cells.get(model) {
                    Some(r) => format!(
                        "{}{}",
                        fmt_g(r.fit.treatment_effect()),
                        stars(r.fit.treatment_p())
                    ),
                    None => String::new(),
                });
            }
            row
        })
        .collect();
    render_table(&header_refs, &body, 1)
}

pub fn lifecycle_text(doc: &LifecycleDocument) -> String {
    let mode_row = |m: &ModeFactors| {
        vec![
            m.mode.to_string(),
            fmt_g(m.g_per_passenger_mile),
            format!("{:.2}", m.avg_trip_miles),
            format!("{:.2}", m.scale),
            fmt_g(m.per_trip_operational_g),
            fmt_g(m.per_trip_lifecycle_g),
        ]
    };
    let mut out = render_table(
        &[
            "mode",
            "g/passenger-mi",
            "trip mi",
            "scale",
            "per-trip operational g",
            "per-trip life-cycle g",
        ],
        &[mode_row(&doc.bus), mode_row(&doc.rail)],
        1,
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "rail uptake: {:.3} trips/day -> offset {} g/day",
        doc.rail_uptake_trips_per_day,
        fmt_g(doc.transit_offset_g)
    );
    let _ = writeln!(
        out,
        "vehicle effect {} g/day + transit {} g/day = net {} g/day",
        fmt_g(doc.net.vehicle_effect_g),
        fmt_g(doc.net.transit_offset_g),
        fmt_g(doc.net.net_g)
    );
    if let Some(share) = doc.net.offset_share {
        let _ = writeln!(
            out,
            "induced transit offsets {}% of the vehicle reduction",
            fmt_pct(100.0 * share)
        );
    }
    out
}
