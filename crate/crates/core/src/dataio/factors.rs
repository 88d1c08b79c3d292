//! Emission factor tables.
//!
//! Gasoline vehicles get a (calendar year, vehicle class, model year) →
//! (running g/mi, cold-start g/day) lookup; hybrids and EVs get a
//! (make, model, model year) → combined g/mi lookup. The equivalent-test-
//! weight cutoff that separates LDT1 from LDT2 is data, not code: it rides
//! along in the gasoline file as a `# ldt_split_threshold_lb=<pounds>`
//! header comment, mirroring how the underlying regulatory spreadsheet
//! supplies it.

use std::collections::BTreeMap;
use std::path::Path;

use super::{read_rows, DataError, FieldCtx};
use crate::emissions::VehicleClass;

/// Running and cold-start rates for one gasoline table entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasolineFactor {
    pub run_g_per_mile: f64,
    pub start_g_per_day: f64,
}

/// All factor lookups the emission model needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTables {
    /// (calendar_year, class, model_year) → rates.
    pub gasoline: BTreeMap<(u16, VehicleClass, u16), GasolineFactor>,
    /// (make, model, model_year) → combined g/mi.
    pub electrified: BTreeMap<(String, String, u16), f64>,
    /// Equivalent test weight (lb) at or below which a truck is LDT1.
    pub ldt_split_threshold_lb: f64,
}

const GASOLINE_HEADERS: &[&str] = &[
    "calendar_year",
    "vehicle_class",
    "model_year",
    "run_g_per_mile",
    "start_g_per_day",
];
const ELECTRIFIED_HEADERS: &[&str] = &["make", "model", "model_year", "combined_g_per_mile"];

fn parse_year(ctx: &FieldCtx, name: &str, raw: &str) -> Result<u16, DataError> {
    match ctx.integer(name, raw)? {
        y @ 1900..=2100 => Ok(y as u16),
        other => Err(ctx.bad(format!("{name} {other} implausible (1900..=2100)"))),
    }
}

fn rate(ctx: &FieldCtx, name: &str, raw: &str) -> Result<f64, DataError> {
    let v = ctx.f64(name, raw)?;
    if v < 0.0 {
        return Err(DataError::NegativeRate {
            file: ctx.file.to_string(),
            line: ctx.line,
            value: v,
        });
    }
    Ok(v)
}

/// Extract `ldt_split_threshold_lb` from the file's `#` comment lines.
fn threshold_from_comments(path: &Path) -> Result<f64, DataError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        let Some(comment) = line.strip_prefix('#') else {
            continue;
        };
        let Some((key, value)) = comment.split_once('=') else {
            continue;
        };
        if key.trim() == "ldt_split_threshold_lb" {
            let v: f64 = value.trim().parse().map_err(|_| DataError::MalformedRow {
                file: file.clone(),
                line: (idx + 1) as u64,
                reason: format!("ldt_split_threshold_lb: `{}` is not a number", value.trim()),
            })?;
            if !v.is_finite() || v <= 0.0 {
                return Err(DataError::MalformedRow {
                    file,
                    line: (idx + 1) as u64,
                    reason: format!("ldt_split_threshold_lb must be positive, got {v}"),
                });
            }
            return Ok(v);
        }
    }
    Err(DataError::MissingLdtThreshold { file })
}

/// Load both factor files into lookup maps.
pub fn load_factor_tables(
    gasoline_path: &Path,
    electrified_path: &Path,
) -> Result<FactorTables, DataError> {
    let ldt_split_threshold_lb = threshold_from_comments(gasoline_path)?;

    let file = gasoline_path.display().to_string();
    let mut gasoline = BTreeMap::new();
    for (line, rec) in read_rows(gasoline_path, GASOLINE_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let calendar_year = parse_year(&ctx, "calendar_year", &rec[0])?;
        let class = VehicleClass::parse(&rec[1])
            .ok_or_else(|| ctx.bad(format!("unknown vehicle_class `{}`", &rec[1])))?;
        let model_year = parse_year(&ctx, "model_year", &rec[2])?;
        let factor = GasolineFactor {
            run_g_per_mile: rate(&ctx, "run_g_per_mile", &rec[3])?,
            start_g_per_day: rate(&ctx, "start_g_per_day", &rec[4])?,
        };
        if gasoline
            .insert((calendar_year, class, model_year), factor)
            .is_some()
        {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({calendar_year}, {}, {model_year})", class.as_str()),
            });
        }
    }

    let file = electrified_path.display().to_string();
    let mut electrified = BTreeMap::new();
    for (line, rec) in read_rows(electrified_path, ELECTRIFIED_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let make = ctx.nonempty("make", &rec[0])?;
        let model = ctx.nonempty("model", &rec[1])?;
        let model_year = parse_year(&ctx, "model_year", &rec[2])?;
        let combined = rate(&ctx, "combined_g_per_mile", &rec[3])?;
        if electrified
            .insert((make.clone(), model.clone(), model_year), combined)
            .is_some()
        {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({make}, {model}, {model_year})"),
            });
        }
    }

    Ok(FactorTables {
        gasoline,
        electrified,
        ldt_split_threshold_lb,
    })
}

/// Write factor tables in the same schemas `load_factor_tables` reads.
pub fn write_factor_tables(
    tables: &FactorTables,
    gasoline_path: &Path,
    electrified_path: &Path,
) -> Result<(), DataError> {
    let mut text = format!(
        "# ldt_split_threshold_lb={}\ncalendar_year,vehicle_class,model_year,run_g_per_mile,start_g_per_day\n",
        tables.ldt_split_threshold_lb
    );
    for ((cal, class, my), f) in &tables.gasoline {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            cal,
            class.as_str(),
            my,
            f.run_g_per_mile,
            f.start_g_per_day
        ));
    }
    std::fs::write(gasoline_path, text).map_err(|e| DataError::WriteIo {
        path: gasoline_path.to_path_buf(),
        source: e,
    })?;

    let mut text = String::from("make,model,model_year,combined_g_per_mile\n");
    for ((make, model, my), rate) in &tables.electrified {
        text.push_str(&format!("{make},{model},{my},{rate}\n"));
    }
    std::fs::write(electrified_path, text).map_err(|e| DataError::WriteIo {
        path: electrified_path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}
