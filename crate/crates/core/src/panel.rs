//! Household screening and the balanced two-wave panel.
//!
//! Each household-wave passes through three screens, in a fixed
//! precedence order so every exclusion carries exactly one reason:
//!
//! 1. `MissingVehicleInfo` — some vehicle lacks make, model, or model
//!    year, or a truck lacks the curb weight needed to classify it.
//! 2. `IncompleteVmt` — some vehicle has too few odometer readings, no
//!    monotone reading sequence, or an implausible daily average (over
//!    the outlier threshold).
//! 3. `NoFactorAvailable` — some vehicle has no emission-factor entry
//!    for its class and model year (or make/model, if electrified).
//!
//! A household-wave clearing all three is retained only if its partner
//! wave also clears them; otherwise it is ledgered `Unmatched`. The
//! surviving households form a balanced panel: every id appears in both
//! waves, with group labels assigned by straight-line distance from the
//! wave-1 home to the nearest station.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::config::RunConfig;
use crate::dataio::{
    FactorTables, HouseholdRecord, OdometerReading, RawSurvey, StationSet, SurveyIndex,
};
use crate::emissions::{self, EmissionsError, VehicleEmission};
use crate::geo::haversine_miles;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("station set is empty; cannot assign groups by distance")]
    EmptyStationSet,
    #[error("no households survive the screens in both waves")]
    EmptyPanel,
}

/// Why odometer readings yield no usable daily VMT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum VmtError {
    #[error("only {got} odometer readings, {needed} needed")]
    TooFewReadings { needed: usize, got: usize },
    #[error("monotone subset keeps only {kept} readings, {needed} needed")]
    NonMonotone { needed: usize, kept: usize },
}

/// Ledger category for an excluded household-wave, in precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ExclusionReason {
    MissingVehicleInfo,
    IncompleteVmt,
    NoFactorAvailable,
    Unmatched,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 4] = [
        ExclusionReason::MissingVehicleInfo,
        ExclusionReason::IncompleteVmt,
        ExclusionReason::NoFactorAvailable,
        ExclusionReason::Unmatched,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::MissingVehicleInfo => "missing_vehicle_info",
            ExclusionReason::IncompleteVmt => "incomplete_vmt",
            ExclusionReason::NoFactorAvailable => "no_factor_available",
            ExclusionReason::Unmatched => "unmatched",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum GroupLabel {
    Experimental,
    Control,
}

impl GroupLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupLabel::Experimental => "experimental",
            GroupLabel::Control => "control",
        }
    }

    /// The X_i regressor: 1 for experimental, 0 for control.
    pub fn code(self) -> f64 {
        match self {
            GroupLabel::Experimental => 1.0,
            GroupLabel::Control => 0.0,
        }
    }
}

/// One retained household-wave: the regression row plus the per-vehicle
/// detail it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelObservation {
    pub household_id: String,
    pub wave: u8,
    pub group: GroupLabel,
    /// Straight-line miles from the wave-1 home to the nearest station.
    pub distance_mi: f64,
    /// Vehicles this household holds in this wave.
    pub veh_cnt: u32,
    /// Household members older than 12.
    pub ppl_cnt: u32,
    pub income_bracket: Option<u8>,
    /// Household total daily vehicle miles.
    pub daily_vmt: f64,
    pub car_trips_per_day: f64,
    pub bus_trips_per_day: f64,
    pub train_trips_per_day: f64,
    /// Household total daily CO₂ in grams (sum over `vehicles`).
    pub daily_co2_g: f64,
    pub vehicles: Vec<VehicleEmission>,
}

impl PanelObservation {
    /// The T_t regressor: 0 for wave 1, 1 for wave 2.
    pub fn wave_code(&self) -> f64 {
        f64::from(self.wave - 1)
    }
}

/// One excluded household-wave.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionRecord {
    pub household_id: String,
    pub wave: u8,
    pub reason: ExclusionReason,
}

/// The screened, balanced two-wave panel plus its exclusion ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedPanel {
    /// Sorted by (household_id, wave); two rows per retained household.
    pub observations: Vec<PanelObservation>,
    /// Sorted by (wave, household_id).
    pub exclusions: Vec<ExclusionRecord>,
    /// Household-wave rows that entered screening, per wave (index 0 →
    /// wave 1). Retained + ledgered reconcile to these.
    pub input_counts: [usize; 2],
}

impl BalancedPanel {
    pub fn n_households(&self) -> usize {
        self.observations.len() / 2
    }

    pub fn wave_observations(&self, wave: u8) -> impl Iterator<Item = &PanelObservation> {
        self.observations.iter().filter(move |o| o.wave == wave)
    }

    pub fn cell(&self, group: GroupLabel, wave: u8) -> Vec<&PanelObservation> {
        self.observations
            .iter()
            .filter(|o| o.group == group && o.wave == wave)
            .collect()
    }

    /// Exclusion counts per (wave, reason); absent combinations are zero.
    pub fn ledger_counts(&self) -> BTreeMap<(u8, ExclusionReason), usize> {
        let mut counts = BTreeMap::new();
        for wave in [1u8, 2] {
            for reason in ExclusionReason::ALL {
                counts.insert((wave, reason), 0usize);
            }
        }
        for e in &self.exclusions {
            *counts.get_mut(&(e.wave, e.reason)).expect("seeded above") += 1;
        }
        counts
    }

    pub fn retained_count(&self, wave: u8) -> usize {
        self.wave_observations(wave).count()
    }
}

/// Daily average VMT from one vehicle-wave's odometer readings (sorted
/// by day): the span of the kept readings divided by the day span.
///
/// Readings are end-of-day, so a day-1-to-day-7 window covers six days
/// of driving. Implausible decreases are repaired greedily: walk the
/// sequence keeping each reading at or above the last kept one, starting
/// from the first. If fewer than `min_readings` arrive at all the error
/// is `TooFewReadings`; if the kept subset falls below `min_readings`
/// it is `NonMonotone`.
pub fn daily_average_vmt(
    readings: &[&OdometerReading],
    min_readings: usize,
) -> Result<f64, VmtError> {
    if readings.len() < min_readings {
        return Err(VmtError::TooFewReadings {
            needed: min_readings,
            got: readings.len(),
        });
    }

    let mut kept: Vec<&OdometerReading> = Vec::with_capacity(readings.len());
    for r in readings {
        if kept
            .last()
            .is_none_or(|last| r.reading_miles >= last.reading_miles)
        {
            kept.push(r);
        }
    }
    if kept.len() < min_readings {
        return Err(VmtError::NonMonotone {
            needed: min_readings,
            kept: kept.len(),
        });
    }

    let first = kept.first().expect("kept is non-empty");
    let last = kept.last().expect("kept is non-empty");
    let day_span = f64::from(last.day_index - first.day_index);
    debug_assert!(day_span > 0.0, "duplicate day indices are rejected at load");
    Ok((last.reading_miles - first.reading_miles) / day_span)
}

/// Straight-line miles from a home to the nearest station.
pub fn station_distance(
    home_lat: f64,
    home_lon: f64,
    stations: &StationSet,
) -> Result<f64, PanelError> {
    stations
        .stations
        .iter()
        .map(|s| haversine_miles(home_lat, home_lon, s.lat, s.lon))
        .min_by(|a, b| a.partial_cmp(b).expect("distances are finite"))
        .ok_or(PanelError::EmptyStationSet)
}

/// Experimental iff within the catchment radius, boundary inclusive.
pub fn assign_group(distance_mi: f64, radius_mi: f64) -> GroupLabel {
    if distance_mi <= radius_mi {
        GroupLabel::Experimental
    } else {
        GroupLabel::Control
    }
}

/// What one household-wave's screening produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ScreenOutcome {
    /// All vehicles priced; carries the per-vehicle emissions (sorted by
    /// vehicle id) and the household daily VMT total.
    Pass {
        vehicles: Vec<VehicleEmission>,
        daily_vmt: f64,
    },
    Excluded(ExclusionReason),
}

/// Run the three vehicle screens for one household-wave. Never fails:
/// every problem maps to an exclusion reason. Zero-vehicle households
/// pass trivially with zero VMT and zero emissions.
pub fn screen_household_wave(
    household: &HouseholdRecord,
    index: &SurveyIndex<'_>,
    factors: &FactorTables,
    cfg: &RunConfig,
) -> ScreenOutcome {
    let vehicles = index.vehicles_of(&household.household_id, household.wave);

    for v in vehicles {
        if v.missing_identity()
            || (matches!(v.body, crate::dataio::BodyStyle::Truck) && v.curb_weight_lb.is_none())
        {
            return ScreenOutcome::Excluded(ExclusionReason::MissingVehicleInfo);
        }
    }

    let mut vmts = Vec::with_capacity(vehicles.len());
    for v in vehicles {
        let readings = index.readings_of(&v.household_id, v.wave, &v.vehicle_id);
        match daily_average_vmt(readings, cfg.min_odometer_readings) {
            Ok(vmt) if vmt <= cfg.outlier_vmt_per_day => vmts.push(vmt),
            // Over the outlier threshold or unusable readings: either
            // way the VMT information is not credible.
            Ok(_) | Err(_) => return ScreenOutcome::Excluded(ExclusionReason::IncompleteVmt),
        }
    }

    let calendar_year = cfg.calendar_year(household.wave);
    let mut priced = Vec::with_capacity(vehicles.len());
    for (v, vmt) in vehicles.iter().zip(&vmts) {
        match emissions::vehicle_daily_co2(v, *vmt, factors, calendar_year) {
            Ok(e) => priced.push(e),
            Err(
                EmissionsError::NoGasolineFactor { .. }
                | EmissionsError::NoElectrifiedFactor { .. },
            ) => return ScreenOutcome::Excluded(ExclusionReason::NoFactorAvailable),
            // Identity and VMT problems were screened above; anything
            // else slipping through is still a factor-coverage failure
            // from the ledger's point of view.
            Err(_) => return ScreenOutcome::Excluded(ExclusionReason::NoFactorAvailable),
        }
    }

    ScreenOutcome::Pass {
        vehicles: priced,
        daily_vmt: vmts.iter().sum(),
    }
}

/// Mean trips per logged diary day; zero when no days were logged.
fn trip_rates(index: &SurveyIndex<'_>, household: &str, wave: u8) -> (f64, f64, f64) {
    let days = index.trips_of(household, wave);
    if days.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = days.len() as f64;
    let car: u32 = days.iter().map(|d| d.car_trips).sum();
    let bus: u32 = days.iter().map(|d| d.bus_trips).sum();
    let train: u32 = days.iter().map(|d| d.train_trips).sum();
    (f64::from(car) / n, f64::from(bus) / n, f64::from(train) / n)
}

/// Screen every household-wave, keep the households passing both waves,
/// and label them by wave-1 home distance to the nearest station.
///
/// Ledger semantics: a household-wave failing a screen is recorded under
/// that reason; one passing its own screens whose partner wave fails (or
/// is absent) is recorded `Unmatched`. Input counts per wave therefore
/// reconcile exactly: retained + ledgered = screened.
pub fn build_balanced_panel(
    survey: &RawSurvey,
    factors: &FactorTables,
    stations: &StationSet,
    cfg: &RunConfig,
) -> Result<BalancedPanel, PanelError> {
    let index = survey.index();

    let mut outcomes: BTreeMap<(&str, u8), ScreenOutcome> = BTreeMap::new();
    let mut input_counts = [0usize; 2];
    for h in &survey.households {
        input_counts[usize::from(h.wave - 1)] += 1;
        outcomes.insert(
            (h.household_id.as_str(), h.wave),
            screen_household_wave(h, &index, factors, cfg),
        );
    }

    let passed =
        |id: &str, wave: u8| matches!(outcomes.get(&(id, wave)), Some(ScreenOutcome::Pass { .. }));
    let retained_ids: BTreeSet<&str> = survey
        .household_ids()
        .into_iter()
        .filter(|id| passed(id, 1) && passed(id, 2))
        .collect();

    let mut exclusions = Vec::new();
    for ((id, wave), outcome) in &outcomes {
        let reason = match outcome {
            ScreenOutcome::Excluded(r) => *r,
            ScreenOutcome::Pass { .. } if !retained_ids.contains(id) => ExclusionReason::Unmatched,
            ScreenOutcome::Pass { .. } => continue,
        };
        exclusions.push(ExclusionRecord {
            household_id: id.to_string(),
            wave: *wave,
            reason,
        });
    }
    exclusions.sort_by(|a, b| (a.wave, &a.household_id).cmp(&(b.wave, &b.household_id)));

    if retained_ids.is_empty() {
        return Err(PanelError::EmptyPanel);
    }
    if stations.is_empty() {
        return Err(PanelError::EmptyStationSet);
    }

    let radius_mi = cfg.catchment_radius.to_miles();
    let mut observations = Vec::with_capacity(retained_ids.len() * 2);
    for id in &retained_ids {
        let wave1_home = index.households[&(*id, 1)];
        let distance_mi = station_distance(wave1_home.home_lat, wave1_home.home_lon, stations)?;
        let group = assign_group(distance_mi, radius_mi);

        for wave in [1u8, 2] {
            let h = index.households[&(*id, wave)];
            let Some(ScreenOutcome::Pass {
                vehicles,
                daily_vmt,
            }) = outcomes.get(&(*id, wave))
            else {
                unreachable!("retained households passed both waves");
            };
            let (car, bus, train) = trip_rates(&index, id, wave);
            observations.push(PanelObservation {
                household_id: id.to_string(),
                wave,
                group,
                distance_mi,
                veh_cnt: vehicles.len() as u32,
                ppl_cnt: h.size_12plus,
                income_bracket: h.income_bracket,
                daily_vmt: *daily_vmt,
                car_trips_per_day: car,
                bus_trips_per_day: bus,
                train_trips_per_day: train,
                daily_co2_g: emissions::household_daily_co2(vehicles),
                vehicles: vehicles.clone(),
            });
        }
    }

    Ok(BalancedPanel {
        observations,
        exclusions,
        input_counts,
    })
}
