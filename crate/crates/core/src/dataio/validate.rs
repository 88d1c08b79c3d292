//! Pre-flight dataset validation.
//!
//! `validate_dataset` previews the problems the pipeline will encounter —
//! unreliable odometers, missing income, vehicles with no factor coverage
//! — without excluding anything. The panel screens are the authority on
//! what actually gets dropped; this report exists so a dataset's quality
//! is visible before any analysis runs, and so fatal structural problems
//! (an empty survey) stop the run early with a clear message.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{FactorTables, RawSurvey, StationSet};
use crate::emissions::classify_vehicle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Fatal,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum IssueCategory {
    NoHouseholds,
    UnreliableOdometer,
    FewOdometerReadings,
    MissingOdometer,
    MissingIncome,
    MissingVehicleInfo,
    NoFactorCoverage,
    NoTripDiary,
    EmptyStationSet,
    HomeMoved,
}

impl IssueCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCategory::NoHouseholds => "NoHouseholds",
            IssueCategory::UnreliableOdometer => "UnreliableOdometer",
            IssueCategory::FewOdometerReadings => "FewOdometerReadings",
            IssueCategory::MissingOdometer => "MissingOdometer",
            IssueCategory::MissingIncome => "MissingIncome",
            IssueCategory::MissingVehicleInfo => "MissingVehicleInfo",
            IssueCategory::NoFactorCoverage => "NoFactorCoverage",
            IssueCategory::NoTripDiary => "NoTripDiary",
            IssueCategory::EmptyStationSet => "EmptyStationSet",
            IssueCategory::HomeMoved => "HomeMoved",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub category: IssueCategory,
    /// What the issue is about, e.g. `H3 wave 1 vehicle V2`.
    pub context: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    /// Issue count per category name.
    pub counts: BTreeMap<String, usize>,
}

impl ValidationReport {
    fn push(
        &mut self,
        severity: Severity,
        category: IssueCategory,
        context: String,
        message: String,
    ) {
        *self
            .counts
            .entry(category.as_str().to_string())
            .or_default() += 1;
        self.issues.push(Issue {
            severity,
            category,
            context,
            message,
        });
    }

    pub fn fatal_count(&self) -> usize {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Fatal)
            .count()
    }

    pub fn warning_count(&self) -> usize {
        self.issues.len() - self.fatal_count()
    }

    /// True when the pipeline may proceed.
    pub fn is_ok(&self) -> bool {
        self.fatal_count() == 0
    }
}

/// Inspect a loaded dataset and report everything worth knowing before a
/// run. Pure: identical inputs yield an identical report.
pub fn validate_dataset(
    survey: &RawSurvey,
    factors: &FactorTables,
    stations: &StationSet,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let index = survey.index();

    if survey.households.is_empty() {
        report.push(
            Severity::Fatal,
            IssueCategory::NoHouseholds,
            "households.csv".to_string(),
            "survey contains no households".to_string(),
        );
        return report;
    }

    if stations.is_empty() {
        report.push(
            Severity::Warning,
            IssueCategory::EmptyStationSet,
            "stations.csv".to_string(),
            "no stations: distance-based group assignment will fail".to_string(),
        );
    }

    for h in &survey.households {
        let ctx = format!("{} wave {}", h.household_id, h.wave);
        if h.income_bracket.is_none() {
            report.push(
                Severity::Warning,
                IssueCategory::MissingIncome,
                ctx.clone(),
                "income bracket not reported (dropped only when income dummies are requested)"
                    .to_string(),
            );
        }
        if index.trips_of(&h.household_id, h.wave).is_empty() {
            report.push(
                Severity::Warning,
                IssueCategory::NoTripDiary,
                ctx.clone(),
                "no trip diary days logged".to_string(),
            );
        }
    }

    // A household that reported different home coordinates in the two
    // waves: group assignment keys off the wave-1 home, so flag it.
    for id in survey.household_ids() {
        let (w1, w2) = (
            index.households.get(&(id, 1)),
            index.households.get(&(id, 2)),
        );
        if let (Some(a), Some(b)) = (w1, w2) {
            if a.home_lat != b.home_lat || a.home_lon != b.home_lon {
                report.push(
                    Severity::Warning,
                    IssueCategory::HomeMoved,
                    id.to_string(),
                    "home coordinates differ between waves; wave-1 location decides the group"
                        .to_string(),
                );
            }
        }
    }

    for v in &survey.vehicles {
        let ctx = format!(
            "{} wave {} vehicle {}",
            v.household_id, v.wave, v.vehicle_id
        );

        if v.missing_identity()
            || (matches!(v.body, super::BodyStyle::Truck) && v.curb_weight_lb.is_none())
        {
            report.push(
                Severity::Warning,
                IssueCategory::MissingVehicleInfo,
                ctx.clone(),
                "make, model, model year, or required curb weight missing".to_string(),
            );
        } else if !has_factor_coverage(v, factors) {
            report.push(
                Severity::Warning,
                IssueCategory::NoFactorCoverage,
                ctx.clone(),
                "no emission factor entry for this vehicle in any table year".to_string(),
            );
        }

        let readings = index.readings_of(&v.household_id, v.wave, &v.vehicle_id);
        match readings.len() {
            0 => report.push(
                Severity::Warning,
                IssueCategory::MissingOdometer,
                ctx.clone(),
                "no odometer readings logged".to_string(),
            ),
            n if n < 3 => report.push(
                Severity::Warning,
                IssueCategory::FewOdometerReadings,
                ctx.clone(),
                format!("only {n} odometer readings (3 needed)"),
            ),
            _ => {}
        }

        if readings
            .windows(2)
            .any(|w| w[1].reading_miles < w[0].reading_miles)
        {
            report.push(
                Severity::Warning,
                IssueCategory::UnreliableOdometer,
                ctx,
                "odometer readings decrease between days".to_string(),
            );
        }
    }

    report
}

/// Does any calendar year in the tables cover this (complete) vehicle?
fn has_factor_coverage(v: &super::VehicleRecord, factors: &FactorTables) -> bool {
    let Some(model_year) = v.model_year else {
        return false;
    };
    if v.fuel.is_electrified() {
        return factors
            .electrified
            .contains_key(&(v.make.clone(), v.model.clone(), model_year));
    }
    let Ok(class) = classify_vehicle(v.body, v.curb_weight_lb, factors.ldt_split_threshold_lb)
    else {
        return false;
    };
    factors
        .gasoline
        .keys()
        .any(|(_, c, my)| *c == class && *my == model_year)
}
