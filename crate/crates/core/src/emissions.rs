//! Per-vehicle daily CO₂.
//!
//! A gasoline vehicle's day is a running term plus a cold-start term:
//! `run_g_per_mile × daily VMT + start_g_per_day`. The running rate
//! depends on the vehicle's regulatory class and model year, looked up in
//! the table for the survey wave's calendar year. Hybrids and
//! battery-electrics use a single combined per-mile rate (tailpipe plus
//! upstream) for the specific make/model/year with no start term.
//!
//! Class assignment: autos are LDA, motorcycles MCY, and trucks split
//! into LDT1/LDT2 by equivalent test weight — curb weight plus 300 lb —
//! at the threshold carried in the gasoline factor file. Missing factor
//! keys are errors, never zeros or interpolations: a vehicle the tables
//! cannot price excludes its household from the panel.

use serde::Serialize;
use thiserror::Error;

use crate::dataio::{BodyStyle, FactorTables, FuelType, GasolineFactor, VehicleRecord};

/// Added to curb weight to form the equivalent test weight.
pub const TEST_WEIGHT_ALLOWANCE_LB: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmissionsError {
    #[error("curb weight {weight} lb is not positive")]
    NonPositiveWeight { weight: f64 },
    #[error("vehicle {vehicle}: truck has no curb weight, cannot classify")]
    MissingCurbWeight { vehicle: String },
    #[error("vehicle {vehicle}: model year missing, cannot look up a factor")]
    MissingModelYear { vehicle: String },
    #[error("daily VMT {vmt} is negative")]
    NegativeVmt { vmt: f64 },
    #[error("no gasoline factor for calendar year {calendar_year}, class {class}, model year {model_year}")]
    NoGasolineFactor {
        calendar_year: u16,
        class: &'static str,
        model_year: u16,
    },
    #[error("no electrified factor for {make} {model} {model_year}")]
    NoElectrifiedFactor {
        make: String,
        model: String,
        model_year: u16,
    },
}

/// Regulatory class used to key the gasoline factor table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum VehicleClass {
    /// Light-duty auto (passenger car).
    Lda,
    /// Light-duty truck at or below the test-weight threshold.
    Ldt1,
    /// Light-duty truck above the test-weight threshold.
    Ldt2,
    /// Motorcycle.
    Mcy,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Lda => "LDA",
            VehicleClass::Ldt1 => "LDT1",
            VehicleClass::Ldt2 => "LDT2",
            VehicleClass::Mcy => "MCY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LDA" => Some(VehicleClass::Lda),
            "LDT1" => Some(VehicleClass::Ldt1),
            "LDT2" => Some(VehicleClass::Ldt2),
            "MCY" => Some(VehicleClass::Mcy),
            _ => None,
        }
    }
}

/// One vehicle's contribution for one wave, as written to `emissions.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleEmission {
    pub household_id: String,
    pub wave: u8,
    pub vehicle_id: String,
    pub fuel: FuelType,
    /// `None` for electrified vehicles: their rate is keyed by make and
    /// model, not by regulatory class.
    pub class: Option<VehicleClass>,
    pub daily_vmt: f64,
    pub daily_co2_g: f64,
}

impl VehicleEmission {
    /// Class column for CSV export; electrified vehicles have no class.
    pub fn class_label(&self) -> &'static str {
        self.class
            .map(VehicleClass::as_str)
            .unwrap_or("electrified")
    }
}

pub fn equivalent_test_weight_lb(curb_weight_lb: f64) -> Result<f64, EmissionsError> {
    if curb_weight_lb <= 0.0 || !curb_weight_lb.is_finite() {
        return Err(EmissionsError::NonPositiveWeight {
            weight: curb_weight_lb,
        });
    }
    Ok(curb_weight_lb + TEST_WEIGHT_ALLOWANCE_LB)
}

/// Map a body style (plus curb weight, for trucks) to its class. The
/// threshold compares against equivalent test weight, inclusive on the
/// LDT1 side.
pub fn classify_vehicle(
    body: BodyStyle,
    curb_weight_lb: Option<f64>,
    ldt_split_threshold_lb: f64,
) -> Result<VehicleClass, EmissionsError> {
    match body {
        BodyStyle::Auto => Ok(VehicleClass::Lda),
        BodyStyle::Motorcycle => Ok(VehicleClass::Mcy),
        BodyStyle::Truck => {
            let curb = curb_weight_lb.ok_or_else(|| EmissionsError::MissingCurbWeight {
                vehicle: String::new(),
            })?;
            if equivalent_test_weight_lb(curb)? <= ldt_split_threshold_lb {
                Ok(VehicleClass::Ldt1)
            } else {
                Ok(VehicleClass::Ldt2)
            }
        }
    }
}

/// Daily grams for a gasoline vehicle: running plus one day of starts.
/// The start term is charged once per day regardless of trip count, so
/// an unmoved vehicle still emits its start grams.
pub fn gasoline_daily_co2(factor: &GasolineFactor, daily_vmt: f64) -> Result<f64, EmissionsError> {
    if daily_vmt < 0.0 || !daily_vmt.is_finite() {
        return Err(EmissionsError::NegativeVmt { vmt: daily_vmt });
    }
    Ok(factor.run_g_per_mile * daily_vmt + factor.start_g_per_day)
}

/// Daily grams for a hybrid or battery-electric: combined rate × miles,
/// zero start term.
pub fn electrified_daily_co2(
    combined_g_per_mile: f64,
    daily_vmt: f64,
) -> Result<f64, EmissionsError> {
    if daily_vmt < 0.0 || !daily_vmt.is_finite() {
        return Err(EmissionsError::NegativeVmt { vmt: daily_vmt });
    }
    Ok(combined_g_per_mile * daily_vmt)
}

/// Exact-key gasoline lookup; no interpolation across years or classes.
pub fn lookup_gasoline_factor(
    factors: &FactorTables,
    calendar_year: u16,
    class: VehicleClass,
    model_year: u16,
) -> Result<&GasolineFactor, EmissionsError> {
    factors
        .gasoline
        .get(&(calendar_year, class, model_year))
        .ok_or(EmissionsError::NoGasolineFactor {
            calendar_year,
            class: class.as_str(),
            model_year,
        })
}

/// Compute one vehicle's daily emission for the wave observed in
/// `calendar_year`. The panel screens drop vehicles with missing
/// identity before this runs; the function still errors rather than
/// panics if handed one.
pub fn vehicle_daily_co2(
    vehicle: &VehicleRecord,
    daily_vmt: f64,
    factors: &FactorTables,
    calendar_year: u16,
) -> Result<VehicleEmission, EmissionsError> {
    let label = format!(
        "{}/{}/{}",
        vehicle.household_id, vehicle.wave, vehicle.vehicle_id
    );
    let model_year = vehicle
        .model_year
        .ok_or_else(|| EmissionsError::MissingModelYear {
            vehicle: label.clone(),
        })?;

    let (class, daily_co2_g) = if vehicle.fuel.is_electrified() {
        let rate = factors
            .electrified
            .get(&(vehicle.make.clone(), vehicle.model.clone(), model_year))
            .copied()
            .ok_or_else(|| EmissionsError::NoElectrifiedFactor {
                make: vehicle.make.clone(),
                model: vehicle.model.clone(),
                model_year,
            })?;
        (None, electrified_daily_co2(rate, daily_vmt)?)
    } else {
        let class = classify_vehicle(
            vehicle.body,
            vehicle.curb_weight_lb,
            factors.ldt_split_threshold_lb,
        )
        .map_err(|e| match e {
            EmissionsError::MissingCurbWeight { .. } => EmissionsError::MissingCurbWeight {
                vehicle: label.clone(),
            },
            other => other,
        })?;
        let factor = lookup_gasoline_factor(factors, calendar_year, class, model_year)?;
        (Some(class), gasoline_daily_co2(factor, daily_vmt)?)
    };

    Ok(VehicleEmission {
        household_id: vehicle.household_id.clone(),
        wave: vehicle.wave,
        vehicle_id: vehicle.vehicle_id.clone(),
        fuel: vehicle.fuel,
        class,
        daily_vmt,
        daily_co2_g,
    })
}

/// Household total: the sum over its vehicles' daily grams in vehicle-id
/// order (the input order; fixed so the floating-point sum is
/// reproducible). A household with no vehicles emits zero.
pub fn household_daily_co2(vehicles: &[VehicleEmission]) -> f64 {
    vehicles.iter().map(|v| v.daily_co2_g).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn tables() -> FactorTables {
        let mut gasoline = BTreeMap::new();
        gasoline.insert(
            (2011u16, VehicleClass::Lda, 2005u16),
            GasolineFactor {
                run_g_per_mile: 400.0,
                start_g_per_day: 250.0,
            },
        );
        gasoline.insert(
            (2011u16, VehicleClass::Ldt2, 2008u16),
            GasolineFactor {
                run_g_per_mile: 520.0,
                start_g_per_day: 310.0,
            },
        );
        let mut electrified = BTreeMap::new();
        electrified.insert(("Toyota".to_string(), "Prius".to_string(), 2010u16), 210.0);
        FactorTables {
            gasoline,
            electrified,
            ldt_split_threshold_lb: 3750.0,
        }
    }

    fn gas_vehicle() -> VehicleRecord {
        VehicleRecord {
            household_id: "H1".to_string(),
            wave: 1,
            vehicle_id: "V1".to_string(),
            make: "Honda".to_string(),
            model: "Civic".to_string(),
            model_year: Some(2005),
            fuel: FuelType::Gasoline,
            body: BodyStyle::Auto,
            curb_weight_lb: None,
        }
    }

    #[test]
    fn test_weight_adds_allowance_and_rejects_nonpositive() {
        assert_eq!(equivalent_test_weight_lb(3450.0).unwrap(), 3750.0);
        assert_eq!(equivalent_test_weight_lb(5000.0).unwrap(), 5300.0);
        assert!(matches!(
            equivalent_test_weight_lb(0.0),
            Err(EmissionsError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            equivalent_test_weight_lb(-100.0),
            Err(EmissionsError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn truck_classification_splits_at_test_weight() {
        // Curb 3450 → test weight 3750: the boundary is inclusive, stays LDT1.
        assert_eq!(
            classify_vehicle(BodyStyle::Truck, Some(3450.0), 3750.0).unwrap(),
            VehicleClass::Ldt1
        );
        // One pound over tips into LDT2.
        assert_eq!(
            classify_vehicle(BodyStyle::Truck, Some(3451.0), 3750.0).unwrap(),
            VehicleClass::Ldt2
        );
        assert_eq!(
            classify_vehicle(BodyStyle::Auto, None, 3750.0).unwrap(),
            VehicleClass::Lda
        );
        assert_eq!(
            classify_vehicle(BodyStyle::Motorcycle, None, 3750.0).unwrap(),
            VehicleClass::Mcy
        );
        assert!(matches!(
            classify_vehicle(BodyStyle::Truck, None, 3750.0),
            Err(EmissionsError::MissingCurbWeight { .. })
        ));
    }

    #[test]
    fn gasoline_day_is_running_plus_start() {
        let f = GasolineFactor {
            run_g_per_mile: 400.0,
            start_g_per_day: 300.0,
        };
        assert_eq!(gasoline_daily_co2(&f, 20.0).unwrap(), 8300.0);
        // A parked day still pays the start term.
        assert_eq!(gasoline_daily_co2(&f, 0.0).unwrap(), 300.0);
        assert!(matches!(
            gasoline_daily_co2(&f, -1.0),
            Err(EmissionsError::NegativeVmt { .. })
        ));
    }

    #[test]
    fn electrified_day_has_no_start_term() {
        assert_eq!(electrified_daily_co2(250.0, 10.0).unwrap(), 2500.0);
        assert_eq!(electrified_daily_co2(210.0, 0.0).unwrap(), 0.0);
        assert_eq!(electrified_daily_co2(0.0, 40.0).unwrap(), 0.0);
    }

    #[test]
    fn gasoline_vehicle_resolves_through_tables() {
        let e = vehicle_daily_co2(&gas_vehicle(), 25.0, &tables(), 2011).unwrap();
        assert_eq!(e.class, Some(VehicleClass::Lda));
        assert_eq!(e.daily_co2_g, 400.0 * 25.0 + 250.0);
        assert_eq!(e.class_label(), "LDA");
    }

    #[test]
    fn hybrid_resolves_through_electrified_table() {
        let mut v = gas_vehicle();
        v.make = "Toyota".to_string();
        v.model = "Prius".to_string();
        v.model_year = Some(2010);
        v.fuel = FuelType::Hybrid;
        let e = vehicle_daily_co2(&v, 25.0, &tables(), 2011).unwrap();
        assert_eq!(e.class, None);
        assert_eq!(e.daily_co2_g, 210.0 * 25.0);
        assert_eq!(e.class_label(), "electrified");
    }

    #[test]
    fn missing_factor_is_an_error_not_a_zero() {
        let mut v = gas_vehicle();
        v.model_year = Some(1949);
        let err = vehicle_daily_co2(&v, 25.0, &tables(), 2011).unwrap_err();
        assert!(matches!(
            err,
            EmissionsError::NoGasolineFactor {
                model_year: 1949,
                ..
            }
        ));
    }

    #[test]
    fn household_sum_over_vehicles() {
        let a = vehicle_daily_co2(&gas_vehicle(), 10.0, &tables(), 2011).unwrap();
        let mut v2 = gas_vehicle();
        v2.vehicle_id = "V2".to_string();
        let b = vehicle_daily_co2(&v2, 20.0, &tables(), 2011).unwrap();
        let total = household_daily_co2(&[a.clone(), b.clone()]);
        assert_eq!(total, a.daily_co2_g + b.daily_co2_g);
        assert_eq!(household_daily_co2(&[]), 0.0);
    }

    #[test]
    fn class_names_round_trip() {
        for c in [
            VehicleClass::Lda,
            VehicleClass::Ldt1,
            VehicleClass::Ldt2,
            VehicleClass::Mcy,
        ] {
            assert_eq!(VehicleClass::parse(c.as_str()), Some(c));
        }
        assert_eq!(VehicleClass::parse("HDV"), None);
    }
}
