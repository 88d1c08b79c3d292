//! The survey proper: households, vehicles, odometer logs, trip diaries.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{read_rows, DataError, FieldCtx};

/// One household in one survey wave.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdRecord {
    pub household_id: String,
    pub wave: u8,
    pub home_lat: f64,
    pub home_lon: f64,
    /// Persons older than 12.
    pub size_12plus: u32,
    /// Income bracket 1–6; `None` when the respondent declined.
    pub income_bracket: Option<u8>,
    /// Vehicle rows referencing this household-wave (derived at load).
    pub raw_vehicle_count: u32,
}

/// Fuel/propulsion type as surveyed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FuelType {
    Gasoline,
    Hybrid,
    Electric,
}

impl FuelType {
    pub fn as_str(self) -> &'static str {
        match self {
            FuelType::Gasoline => "gasoline",
            FuelType::Hybrid => "hybrid",
            FuelType::Electric => "electric",
        }
    }

    /// Hybrids and EVs share the electrified accounting path: combined
    /// gram-per-mile rate, no cold-start term.
    pub fn is_electrified(self) -> bool {
        !matches!(self, FuelType::Gasoline)
    }
}

/// Body style, the first input to vehicle classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BodyStyle {
    Auto,
    Truck,
    Motorcycle,
}

impl BodyStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            BodyStyle::Auto => "auto",
            BodyStyle::Truck => "truck",
            BodyStyle::Motorcycle => "motorcycle",
        }
    }
}

/// One vehicle as reported in one wave. Make, model, and model year come
/// straight off the survey form, so any of them can be absent; absence is
/// a screening matter, not a parse error.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRecord {
    pub household_id: String,
    pub wave: u8,
    pub vehicle_id: String,
    /// Empty string = not reported.
    pub make: String,
    /// Empty string = not reported.
    pub model: String,
    pub model_year: Option<u16>,
    pub fuel: FuelType,
    pub body: BodyStyle,
    /// Required for classification only when `body` is a truck.
    pub curb_weight_lb: Option<f64>,
}

impl VehicleRecord {
    /// Missing make, model, or model year — the first exclusion screen.
    pub fn missing_identity(&self) -> bool {
        self.make.is_empty() || self.model.is_empty() || self.model_year.is_none()
    }
}

/// A single odometer log entry: cumulative miles at the end of `day_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdometerReading {
    pub household_id: String,
    pub wave: u8,
    pub vehicle_id: String,
    pub day_index: u8,
    pub reading_miles: f64,
}

/// One diary day of household trip counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TripDayRecord {
    pub household_id: String,
    pub wave: u8,
    pub day_index: u8,
    pub car_trips: u32,
    pub bus_trips: u32,
    pub train_trips: u32,
}

/// The full raw survey, cross-referenced and canonically sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawSurvey {
    pub households: Vec<HouseholdRecord>,
    pub vehicles: Vec<VehicleRecord>,
    pub odometer: Vec<OdometerReading>,
    pub trips: Vec<TripDayRecord>,
}

impl RawSurvey {
    /// Household-waves present, in sorted order.
    pub fn household_waves(&self) -> impl Iterator<Item = (&str, u8)> {
        self.households
            .iter()
            .map(|h| (h.household_id.as_str(), h.wave))
    }

    /// Distinct household ids across both waves.
    pub fn household_ids(&self) -> BTreeSet<&str> {
        self.households
            .iter()
            .map(|h| h.household_id.as_str())
            .collect()
    }

    pub fn index(&self) -> SurveyIndex<'_> {
        SurveyIndex::new(self)
    }
}

/// Borrowing lookup maps over a [`RawSurvey`]; build once, query often.
pub struct SurveyIndex<'a> {
    pub households: BTreeMap<(&'a str, u8), &'a HouseholdRecord>,
    pub vehicles: BTreeMap<(&'a str, u8), Vec<&'a VehicleRecord>>,
    /// Keyed by (household, wave, vehicle); readings sorted by day.
    pub odometer: BTreeMap<(&'a str, u8, &'a str), Vec<&'a OdometerReading>>,
    pub trips: BTreeMap<(&'a str, u8), Vec<&'a TripDayRecord>>,
}

impl<'a> SurveyIndex<'a> {
    fn new(survey: &'a RawSurvey) -> Self {
        let mut households = BTreeMap::new();
        for h in &survey.households {
            households.insert((h.household_id.as_str(), h.wave), h);
        }
        let mut vehicles: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for v in &survey.vehicles {
            vehicles
                .entry((v.household_id.as_str(), v.wave))
                .or_default()
                .push(v);
        }
        let mut odometer: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for o in &survey.odometer {
            odometer
                .entry((o.household_id.as_str(), o.wave, o.vehicle_id.as_str()))
                .or_default()
                .push(o);
        }
        let mut trips: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for t in &survey.trips {
            trips
                .entry((t.household_id.as_str(), t.wave))
                .or_default()
                .push(t);
        }
        // Order within each key independently of arrival order, so an
        // index over a hand-assembled (unsorted) survey behaves the same
        // as one over a loaded survey.
        for group in vehicles.values_mut() {
            group.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id));
        }
        for series in odometer.values_mut() {
            series.sort_by_key(|r| r.day_index);
        }
        for days in trips.values_mut() {
            days.sort_by_key(|t| t.day_index);
        }
        SurveyIndex {
            households,
            vehicles,
            odometer,
            trips,
        }
    }

    /// Vehicles registered to one household in one wave. The id must
    /// borrow from data that outlives the index (the indexed survey
    /// itself qualifies), because the map keys borrow from the survey.
    pub fn vehicles_of(&self, household: &'a str, wave: u8) -> &[&'a VehicleRecord] {
        self.vehicles
            .get(&(household, wave))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Odometer series for one vehicle, ordered by day. Same borrowing
    /// requirement as [`Self::vehicles_of`].
    pub fn readings_of(
        &self,
        household: &'a str,
        wave: u8,
        vehicle: &'a str,
    ) -> &[&'a OdometerReading] {
        self.odometer
            .get(&(household, wave, vehicle))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Trip-diary days for one household in one wave, ordered by day.
    /// Same borrowing requirement as [`Self::vehicles_of`].
    pub fn trips_of(&self, household: &'a str, wave: u8) -> &[&'a TripDayRecord] {
        self.trips
            .get(&(household, wave))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Paths to the four survey CSVs.
#[derive(Debug, Clone)]
pub struct SurveyPaths {
    pub households: PathBuf,
    pub vehicles: PathBuf,
    pub odometer: PathBuf,
    pub trips: PathBuf,
}

const HOUSEHOLD_HEADERS: &[&str] = &[
    "household_id",
    "wave",
    "home_lat",
    "home_lon",
    "size_12plus",
    "income_bracket",
];
const VEHICLE_HEADERS: &[&str] = &[
    "household_id",
    "wave",
    "vehicle_id",
    "make",
    "model",
    "model_year",
    "fuel",
    "body",
    "curb_weight_lb",
];
const ODOMETER_HEADERS: &[&str] = &[
    "household_id",
    "wave",
    "vehicle_id",
    "day_index",
    "reading_miles",
];
const TRIP_HEADERS: &[&str] = &[
    "household_id",
    "wave",
    "day_index",
    "car_trips",
    "bus_trips",
    "train_trips",
];

/// Load and cross-reference the four survey files.
///
/// Every child row must name a parent that exists: vehicles and trip days
/// point at a (household, wave); odometer entries point at a vehicle.
/// Duplicated keys and dangling references are errors, so downstream code
/// can treat the survey as relationally sound.
pub fn load_survey(paths: &SurveyPaths) -> Result<RawSurvey, DataError> {
    let households_rows = load_households(&paths.households)?;
    let vehicles_rows = load_vehicles(&paths.vehicles)?;
    let odometer_rows = load_odometer(&paths.odometer)?;
    let trips_rows = load_trips(&paths.trips)?;

    // Cross-reference children against parents while line numbers are
    // still attached.
    let hh_keys: BTreeSet<(&str, u8)> = households_rows
        .iter()
        .map(|(_, h)| (h.household_id.as_str(), h.wave))
        .collect();
    let veh_keys: BTreeSet<(&str, u8, &str)> = vehicles_rows
        .iter()
        .map(|(_, v)| (v.household_id.as_str(), v.wave, v.vehicle_id.as_str()))
        .collect();

    let veh_file = paths.vehicles.display().to_string();
    for (line, v) in &vehicles_rows {
        if !hh_keys.contains(&(v.household_id.as_str(), v.wave)) {
            return Err(DataError::DanglingReference {
                file: veh_file.clone(),
                line: *line,
                reason: format!(
                    "vehicle {} references household ({}, wave {}) which does not exist",
                    v.vehicle_id, v.household_id, v.wave
                ),
            });
        }
    }
    let odo_file = paths.odometer.display().to_string();
    for (line, o) in &odometer_rows {
        if !veh_keys.contains(&(o.household_id.as_str(), o.wave, o.vehicle_id.as_str())) {
            return Err(DataError::DanglingReference {
                file: odo_file.clone(),
                line: *line,
                reason: format!(
                    "odometer day {} references vehicle ({}, wave {}, {}) which does not exist",
                    o.day_index, o.household_id, o.wave, o.vehicle_id
                ),
            });
        }
    }
    let trip_file = paths.trips.display().to_string();
    for (line, t) in &trips_rows {
        if !hh_keys.contains(&(t.household_id.as_str(), t.wave)) {
            return Err(DataError::DanglingReference {
                file: trip_file.clone(),
                line: *line,
                reason: format!(
                    "trip day {} references household ({}, wave {}) which does not exist",
                    t.day_index, t.household_id, t.wave
                ),
            });
        }
    }

    let mut households: Vec<HouseholdRecord> =
        households_rows.into_iter().map(|(_, h)| h).collect();
    let mut vehicles: Vec<VehicleRecord> = vehicles_rows.into_iter().map(|(_, v)| v).collect();
    let mut odometer: Vec<OdometerReading> = odometer_rows.into_iter().map(|(_, o)| o).collect();
    let mut trips: Vec<TripDayRecord> = trips_rows.into_iter().map(|(_, t)| t).collect();

    // Canonical order, then derive per-household vehicle counts.
    households.sort_by(|a, b| (&a.household_id, a.wave).cmp(&(&b.household_id, b.wave)));
    vehicles.sort_by(|a, b| {
        (&a.household_id, a.wave, &a.vehicle_id).cmp(&(&b.household_id, b.wave, &b.vehicle_id))
    });
    odometer.sort_by(|a, b| {
        (&a.household_id, a.wave, &a.vehicle_id, a.day_index).cmp(&(
            &b.household_id,
            b.wave,
            &b.vehicle_id,
            b.day_index,
        ))
    });
    trips.sort_by(|a, b| {
        (&a.household_id, a.wave, a.day_index).cmp(&(&b.household_id, b.wave, b.day_index))
    });

    let mut counts: BTreeMap<(String, u8), u32> = BTreeMap::new();
    for v in &vehicles {
        *counts.entry((v.household_id.clone(), v.wave)).or_default() += 1;
    }
    for h in &mut households {
        h.raw_vehicle_count = counts
            .get(&(h.household_id.clone(), h.wave))
            .copied()
            .unwrap_or(0);
    }

    Ok(RawSurvey {
        households,
        vehicles,
        odometer,
        trips,
    })
}

fn load_households(path: &Path) -> Result<Vec<(u64, HouseholdRecord)>, DataError> {
    let file = path.display().to_string();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in read_rows(path, HOUSEHOLD_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let household_id = ctx.nonempty("household_id", &rec[0])?;
        let wave = ctx.wave(&rec[1])?;
        if !seen.insert((household_id.clone(), wave)) {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({household_id}, wave {wave})"),
            });
        }
        let home_lat = ctx.f64("home_lat", &rec[2])?;
        let home_lon = ctx.f64("home_lon", &rec[3])?;
        if !(-90.0..=90.0).contains(&home_lat) {
            return Err(ctx.bad(format!("home_lat {home_lat} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&home_lon) {
            return Err(ctx.bad(format!("home_lon {home_lon} outside [-180, 180]")));
        }
        let size_12plus = ctx.integer("size_12plus", &rec[4])?;
        if size_12plus < 1 {
            return Err(ctx.bad(format!("size_12plus must be ≥ 1, got {size_12plus}")));
        }
        let income_bracket = if rec[5].is_empty() {
            None
        } else {
            match ctx.integer("income_bracket", &rec[5])? {
                b @ 1..=6 => Some(b as u8),
                other => return Err(ctx.bad(format!("income_bracket must be 1..=6, got {other}"))),
            }
        };
        out.push((
            line,
            HouseholdRecord {
                household_id,
                wave,
                home_lat,
                home_lon,
                size_12plus: size_12plus as u32,
                income_bracket,
                raw_vehicle_count: 0,
            },
        ));
    }
    Ok(out)
}

fn load_vehicles(path: &Path) -> Result<Vec<(u64, VehicleRecord)>, DataError> {
    let file = path.display().to_string();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in read_rows(path, VEHICLE_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let household_id = ctx.nonempty("household_id", &rec[0])?;
        let wave = ctx.wave(&rec[1])?;
        let vehicle_id = ctx.nonempty("vehicle_id", &rec[2])?;
        if !seen.insert((household_id.clone(), wave, vehicle_id.clone())) {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({household_id}, wave {wave}, {vehicle_id})"),
            });
        }
        // Make/model/year may be blank — that's the survey's missingness,
        // screened later, not a parse problem. A present year must still
        // be a plausible integer.
        let model_year = if rec[5].is_empty() {
            None
        } else {
            match ctx.integer("model_year", &rec[5])? {
                y @ 1950..=2100 => Some(y as u16),
                other => {
                    return Err(ctx.bad(format!("model_year {other} implausible (1950..=2100)")))
                }
            }
        };
        let fuel = match rec[6].to_ascii_lowercase().as_str() {
            "gasoline" => FuelType::Gasoline,
            "hybrid" => FuelType::Hybrid,
            "electric" => FuelType::Electric,
            other => return Err(ctx.bad(format!("unknown fuel `{other}`"))),
        };
        let body = match rec[7].to_ascii_lowercase().as_str() {
            "auto" => BodyStyle::Auto,
            "truck" => BodyStyle::Truck,
            "motorcycle" => BodyStyle::Motorcycle,
            other => return Err(ctx.bad(format!("unknown body `{other}`"))),
        };
        let curb_weight_lb = if rec[8].is_empty() {
            None
        } else {
            let w = ctx.f64("curb_weight_lb", &rec[8])?;
            if w <= 0.0 {
                return Err(ctx.bad(format!("curb_weight_lb must be positive, got {w}")));
            }
            Some(w)
        };
        out.push((
            line,
            VehicleRecord {
                household_id,
                wave,
                vehicle_id,
                make: rec[3].to_string(),
                model: rec[4].to_string(),
                model_year,
                fuel,
                body,
                curb_weight_lb,
            },
        ));
    }
    Ok(out)
}

fn load_odometer(path: &Path) -> Result<Vec<(u64, OdometerReading)>, DataError> {
    let file = path.display().to_string();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in read_rows(path, ODOMETER_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let household_id = ctx.nonempty("household_id", &rec[0])?;
        let wave = ctx.wave(&rec[1])?;
        let vehicle_id = ctx.nonempty("vehicle_id", &rec[2])?;
        let day_index = ctx.day_index(&rec[3])?;
        if !seen.insert((household_id.clone(), wave, vehicle_id.clone(), day_index)) {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({household_id}, wave {wave}, {vehicle_id}, day {day_index})"),
            });
        }
        let reading_miles = ctx.f64("reading_miles", &rec[4])?;
        if reading_miles < 0.0 {
            return Err(ctx.bad(format!("reading_miles must be ≥ 0, got {reading_miles}")));
        }
        out.push((
            line,
            OdometerReading {
                household_id,
                wave,
                vehicle_id,
                day_index,
                reading_miles,
            },
        ));
    }
    Ok(out)
}

fn load_trips(path: &Path) -> Result<Vec<(u64, TripDayRecord)>, DataError> {
    let file = path.display().to_string();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in read_rows(path, TRIP_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let household_id = ctx.nonempty("household_id", &rec[0])?;
        let wave = ctx.wave(&rec[1])?;
        let day_index = ctx.day_index(&rec[2])?;
        if !seen.insert((household_id.clone(), wave, day_index)) {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: format!("({household_id}, wave {wave}, day {day_index})"),
            });
        }
        let mut counts = [0u32; 3];
        for (slot, name) in [(0, "car_trips"), (1, "bus_trips"), (2, "train_trips")] {
            let v = ctx.integer(name, &rec[3 + slot])?;
            if v < 0 {
                return Err(ctx.bad(format!("{name} must be ≥ 0, got {v}")));
            }
            counts[slot] = v as u32;
        }
        out.push((
            line,
            TripDayRecord {
                household_id,
                wave,
                day_index,
                car_trips: counts[0],
                bus_trips: counts[1],
                train_trips: counts[2],
            },
        ));
    }
    Ok(out)
}

/// Serialize a survey back to the four CSVs (canonical order, exact
/// float round-trip). The synthetic generator uses this to emit datasets
/// in the same schemas the loaders accept.
pub fn write_survey(survey: &RawSurvey, paths: &SurveyPaths) -> Result<(), DataError> {
    let io_err = |path: &Path, e: std::io::Error| DataError::WriteIo {
        path: path.to_path_buf(),
        source: e,
    };

    let mut text = String::from("household_id,wave,home_lat,home_lon,size_12plus,income_bracket\n");
    for h in &survey.households {
        let income = h.income_bracket.map(|b| b.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            h.household_id, h.wave, h.home_lat, h.home_lon, h.size_12plus, income
        ));
    }
    std::fs::write(&paths.households, text).map_err(|e| io_err(&paths.households, e))?;

    let mut text = String::from(
        "household_id,wave,vehicle_id,make,model,model_year,fuel,body,curb_weight_lb\n",
    );
    for v in &survey.vehicles {
        let year = v.model_year.map(|y| y.to_string()).unwrap_or_default();
        let weight = v.curb_weight_lb.map(|w| w.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            v.household_id,
            v.wave,
            v.vehicle_id,
            v.make,
            v.model,
            year,
            v.fuel.as_str(),
            v.body.as_str(),
            weight
        ));
    }
    std::fs::write(&paths.vehicles, text).map_err(|e| io_err(&paths.vehicles, e))?;

    let mut text = String::from("household_id,wave,vehicle_id,day_index,reading_miles\n");
    for o in &survey.odometer {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            o.household_id, o.wave, o.vehicle_id, o.day_index, o.reading_miles
        ));
    }
    std::fs::write(&paths.odometer, text).map_err(|e| io_err(&paths.odometer, e))?;

    let mut text = String::from("household_id,wave,day_index,car_trips,bus_trips,train_trips\n");
    for t in &survey.trips {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.household_id, t.wave, t.day_index, t.car_trips, t.bus_trips, t.train_trips
        ));
    }
    std::fs::write(&paths.trips, text).map_err(|e| io_err(&paths.trips, e))?;

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, content).unwrap();
        p
    }

    fn fixture_paths(dir: &Path) -> SurveyPaths {
        SurveyPaths {
            households: write(
                dir,
                "households.csv",
                "household_id,wave,home_lat,home_lon,size_12plus,income_bracket\n\
                 H1,1,34.02,-118.28,2,3\n\
                 H1,2,34.02,-118.28,2,\n\
                 H2,1,34.05,-118.30,1,6\n",
            ),
            vehicles: write(
                dir,
                "vehicles.csv",
                "household_id,wave,vehicle_id,make,model,model_year,fuel,body,curb_weight_lb\n\
                 H1,1,V1,Toyota,Corolla,2006,gasoline,auto,\n\
                 H1,1,V2,Ford,F150,2003,gasoline,truck,4550\n\
                 H2,1,V1,Honda,Civic,2010,hybrid,auto,\n",
            ),
            odometer: write(
                dir,
                "odometer.csv",
                "household_id,wave,vehicle_id,day_index,reading_miles\n\
                 H1,1,V1,1,10000\n\
                 H1,1,V1,2,10015.5\n\
                 H1,1,V1,3,10031\n",
            ),
            trips: write(
                dir,
                "trips.csv",
                "household_id,wave,day_index,car_trips,bus_trips,train_trips\n\
                 H1,1,1,4,0,1\n\
                 H1,1,2,2,1,0\n\
                 H2,1,1,5,0,0\n",
            ),
        }
    }

    #[test]
    fn loads_well_formed_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let survey = load_survey(&fixture_paths(dir.path())).unwrap();
        assert_eq!(survey.households.len(), 3);
        assert_eq!(survey.vehicles.len(), 3);
        assert_eq!(survey.odometer.len(), 3);
        assert_eq!(survey.trips.len(), 3);

        // Derived vehicle counts.
        let h1w1 = survey
            .households
            .iter()
            .find(|h| h.household_id == "H1" && h.wave == 1)
            .unwrap();
        assert_eq!(h1w1.raw_vehicle_count, 2);
        let h1w2 = survey
            .households
            .iter()
            .find(|h| h.household_id == "H1" && h.wave == 2)
            .unwrap();
        assert_eq!(h1w2.raw_vehicle_count, 0);
        assert_eq!(h1w2.income_bracket, None);
    }

    #[test]
    fn dangling_odometer_reference() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = fixture_paths(dir.path());
        paths.odometer = write(
            dir.path(),
            "odometer_bad.csv",
            "household_id,wave,vehicle_id,day_index,reading_miles\n\
             H1,1,NO_SUCH_VEHICLE,1,100\n",
        );
        match load_survey(&paths) {
            Err(DataError::DanglingReference { reason, .. }) => {
                assert!(reason.contains("NO_SUCH_VEHICLE"), "{reason}")
            }
            other => panic!("expected dangling reference, got {other:?}"),
        }
    }

    #[test]
    fn malformed_model_year_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = fixture_paths(dir.path());
        paths.vehicles = write(
            dir.path(),
            "vehicles_bad.csv",
            "household_id,wave,vehicle_id,make,model,model_year,fuel,body,curb_weight_lb\n\
             H1,1,V1,Toyota,Corolla,199X,gasoline,auto,\n",
        );
        match load_survey(&paths) {
            Err(DataError::MalformedRow { line, reason, .. }) => {
                assert_eq!(line, 2);
                assert!(reason.contains("model_year"), "{reason}");
            }
            other => panic!("expected malformed row, got {other:?}"),
        }
    }

    #[test]
    fn blank_vehicle_identity_is_not_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = fixture_paths(dir.path());
        paths.vehicles = write(
            dir.path(),
            "vehicles_blank.csv",
            "household_id,wave,vehicle_id,make,model,model_year,fuel,body,curb_weight_lb\n\
             H1,1,V1,,,,gasoline,auto,\n",
        );
        let survey = load_survey(&paths).unwrap();
        assert!(survey.vehicles[0].missing_identity());
    }

    #[test]
    fn duplicate_household_wave_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = fixture_paths(dir.path());
        paths.households = write(
            dir.path(),
            "households_dup.csv",
            "household_id,wave,home_lat,home_lon,size_12plus,income_bracket\n\
             H1,1,34.0,-118.0,2,3\n\
             H1,1,34.0,-118.0,2,3\n",
        );
        assert!(matches!(
            load_survey(&paths),
            Err(DataError::DuplicateKey { line: 3, .. })
        ));
    }

    #[test]
    fn header_mismatch_is_caught() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = fixture_paths(dir.path());
        paths.trips = write(
            dir.path(),
            "trips_bad.csv",
            "household_id,wave,day,car_trips,bus_trips,train_trips\nH1,1,1,1,1,1\n",
        );
        assert!(matches!(
            load_survey(&paths),
            Err(DataError::MalformedRow { line: 1, .. })
        ));
    }

    #[test]
    fn round_trip_preserves_the_survey() {
        let dir = tempfile::tempdir().unwrap();
        let survey = load_survey(&fixture_paths(dir.path())).unwrap();

        let out = tempfile::tempdir().unwrap();
        let out_paths = SurveyPaths {
            households: out.path().join("households.csv"),
            vehicles: out.path().join("vehicles.csv"),
            odometer: out.path().join("odometer.csv"),
            trips: out.path().join("trips.csv"),
        };
        write_survey(&survey, &out_paths).unwrap();
        let reloaded = load_survey(&out_paths).unwrap();
        assert_eq!(survey, reloaded);
    }
}
