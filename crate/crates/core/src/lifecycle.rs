//! Transit life-cycle CO₂ and the net-effect bound.
//!
//! A transit trip's operational CO₂ is its per-passenger-mile rate times
//! the system's average trip length. Operation is not the whole story:
//! vehicle manufacturing and infrastructure add a roughly constant
//! multiple, captured as a *scale factor* — gross per-passenger-mile CO₂
//! (all five life-cycle components) over the operational subtotal (the
//! first three). Per-trip life-cycle grams are then operational grams ×
//! scale.
//!
//! The net-effect summary offsets the estimated vehicle-CO₂ reduction
//! against the induced transit emissions: new transit trips are not
//! free, but the offset is a small share of the reduction.
//!
//! Factors arrive via `lifecycle.csv`. A row may carry the five
//! components (the scale is then recomputed from them, overriding any
//! scale cell) or just a precomputed scale factor.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::dataio::{read_rows, DataError, FieldCtx};
use crate::panel::{BalancedPanel, GroupLabel};
use crate::stats::{paired_t, StatsError};

#[derive(Debug, Error)]
pub enum LifecycleError {
    #[error("{what} is negative: {value}")]
    NegativeInput { what: &'static str, value: f64 },
    #[error("operational component sum is zero; scale factor undefined")]
    ZeroOperational,
    #[error("negative {mode} trip rate: {value}")]
    NegativeTrips { mode: &'static str, value: f64 },
    #[error("lifecycle factors missing a `{0}` row")]
    MissingMode(&'static str),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Per-passenger-mile grams for the five life-cycle components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifecycleComponents {
    pub vehicle_operation: f64,
    pub propulsion_electricity: f64,
    pub energy_production: f64,
    pub vehicle_manufacturing_maintenance: f64,
    pub infrastructure_construction_operation: f64,
}

impl LifecycleComponents {
    fn all(&self) -> [f64; 5] {
        [
            self.vehicle_operation,
            self.propulsion_electricity,
            self.energy_production,
            self.vehicle_manufacturing_maintenance,
            self.infrastructure_construction_operation,
        ]
    }

    /// All five components: what a passenger-mile really costs.
    pub fn gross(&self) -> f64 {
        self.all().iter().sum()
    }

    /// Operation-only subtotal: running the vehicle, its electricity,
    /// and producing the energy — the first three components.
    pub fn operational(&self) -> f64 {
        self.vehicle_operation + self.propulsion_electricity + self.energy_production
    }
}

/// gross / operational for a component breakdown.
pub fn scale_factor(c: &LifecycleComponents) -> Result<f64, LifecycleError> {
    for v in c.all() {
        if v < 0.0 || !v.is_finite() {
            return Err(LifecycleError::NegativeInput {
                what: "lifecycle component",
                value: v,
            });
        }
    }
    let operational = c.operational();
    if operational == 0.0 {
        return Err(LifecycleError::ZeroOperational);
    }
    Ok(c.gross() / operational)
}

/// Operational grams per transit trip: rate × average trip length.
pub fn per_trip_operational(
    g_per_passenger_mile: f64,
    avg_trip_miles: f64,
) -> Result<f64, LifecycleError> {
    for (what, v) in [
        ("per-passenger-mile rate", g_per_passenger_mile),
        ("average trip miles", avg_trip_miles),
    ] {
        if v < 0.0 || !v.is_finite() {
            return Err(LifecycleError::NegativeInput { what, value: v });
        }
    }
    Ok(g_per_passenger_mile * avg_trip_miles)
}

/// Life-cycle grams per trip. A scale below 1 is physically odd (gross
/// below operational) but tolerated with a raised flag rather than
/// rejected: the returned bool is true when the scale was below one.
pub fn per_trip_lifecycle(operational_g: f64, scale: f64) -> Result<(f64, bool), LifecycleError> {
    for (what, v) in [
        ("operational grams", operational_g),
        ("scale factor", scale),
    ] {
        if v < 0.0 || !v.is_finite() {
            return Err(LifecycleError::NegativeInput { what, value: v });
        }
    }
    Ok((operational_g * scale, scale < 1.0))
}

/// One transit mode's factor set, with the per-trip figures derived.
#[derive(Debug, Clone, Serialize)]
pub struct ModeFactors {
    /// "bus" or "rail".
    pub mode: &'static str,
    pub g_per_passenger_mile: f64,
    pub avg_trip_miles: f64,
    pub scale: f64,
    /// Present when the scale was recomputed from a component breakdown.
    pub components: Option<LifecycleComponents>,
    pub per_trip_operational_g: f64,
    pub per_trip_lifecycle_g: f64,
    /// True when the scale came in below 1 (gross under operational).
    pub scale_below_one: bool,
}

impl ModeFactors {
    /// Derive the per-trip figures from a rate, a trip length, and either
    /// a component breakdown (preferred: the scale is recomputed) or a
    /// precomputed scale.
    pub fn derive(
        mode: &'static str,
        g_per_passenger_mile: f64,
        avg_trip_miles: f64,
        components: Option<LifecycleComponents>,
        precomputed_scale: Option<f64>,
    ) -> Result<Self, LifecycleError> {
        let scale = match (&components, precomputed_scale) {
            (Some(c), _) => scale_factor(c)?,
            (None, Some(s)) => s,
            (None, None) => {
                return Err(LifecycleError::NegativeInput {
                    what: "scale factor (absent with no components)",
                    value: f64::NAN,
                })
            }
        };
        let per_trip_operational_g = per_trip_operational(g_per_passenger_mile, avg_trip_miles)?;
        let (per_trip_lifecycle_g, scale_below_one) =
            per_trip_lifecycle(per_trip_operational_g, scale)?;
        Ok(ModeFactors {
            mode,
            g_per_passenger_mile,
            avg_trip_miles,
            scale,
            components,
            per_trip_operational_g,
            per_trip_lifecycle_g,
            scale_below_one,
        })
    }
}

/// The bus and rail factor pair the transit table needs.
#[derive(Debug, Clone, Serialize)]
pub struct TransitFactors {
    pub bus: ModeFactors,
    pub rail: ModeFactors,
}

const LIFECYCLE_HEADERS: &[&str] = &[
    "mode",
    "g_per_passenger_mile",
    "avg_trip_miles",
    "scale_factor",
    "comp_vehicle_operation",
    "comp_propulsion",
    "comp_energy_production",
    "comp_vehicle_manufacturing",
    "comp_infrastructure",
];

/// Load `lifecycle.csv`: one row per mode, components taking precedence
/// over the scale cell when all five are present.
pub fn load_transit_factors(path: &Path) -> Result<TransitFactors, LifecycleError> {
    let file = path.display().to_string();
    let mut bus = None;
    let mut rail = None;

    for (line, rec) in read_rows(path, LIFECYCLE_HEADERS)? {
        let ctx = FieldCtx { file: &file, line };
        let mode_raw = ctx.nonempty("mode", &rec[0])?.to_ascii_lowercase();
        let g_per_pmile = ctx.f64("g_per_passenger_mile", &rec[1])?;
        let trip_miles = ctx.f64("avg_trip_miles", &rec[2])?;

        let comp_cells = [&rec[4], &rec[5], &rec[6], &rec[7], &rec[8]];
        let n_filled = comp_cells.iter().filter(|c| !c.is_empty()).count();
        let components = match n_filled {
            0 => None,
            5 => Some(LifecycleComponents {
                vehicle_operation: ctx.f64("comp_vehicle_operation", &rec[4])?,
                propulsion_electricity: ctx.f64("comp_propulsion", &rec[5])?,
                energy_production: ctx.f64("comp_energy_production", &rec[6])?,
                vehicle_manufacturing_maintenance: ctx
                    .f64("comp_vehicle_manufacturing", &rec[7])?,
                infrastructure_construction_operation: ctx.f64("comp_infrastructure", &rec[8])?,
            }),
            n => {
                return Err(ctx
                    .bad(format!(
                        "{n} of 5 component columns filled; need none or all"
                    ))
                    .into())
            }
        };
        let precomputed = if rec[3].is_empty() {
            None
        } else {
            Some(ctx.f64("scale_factor", &rec[3])?)
        };
        if components.is_none() && precomputed.is_none() {
            return Err(ctx
                .bad("row needs a scale_factor or a full component breakdown".to_string())
                .into());
        }

        let slot = match mode_raw.as_str() {
            "bus" => &mut bus,
            "rail" | "train" => &mut rail,
            other => return Err(ctx.bad(format!("unknown mode `{other}`")).into()),
        };
        let mode_name = if matches!(mode_raw.as_str(), "bus") {
            "bus"
        } else {
            "rail"
        };
        if slot.is_some() {
            return Err(DataError::DuplicateKey {
                file: file.clone(),
                line,
                key: mode_name.to_string(),
            }
            .into());
        }
        *slot = Some(ModeFactors::derive(
            mode_name,
            g_per_pmile,
            trip_miles,
            components,
            precomputed,
        )?);
    }

    Ok(TransitFactors {
        bus: bus.ok_or(LifecycleError::MissingMode("bus"))?,
        rail: rail.ok_or(LifecycleError::MissingMode("rail"))?,
    })
}

/// A household-day of transit CO₂: trips × per-trip life-cycle grams,
/// summed over modes.
pub fn household_transit_co2(
    bus_trips_per_day: f64,
    rail_trips_per_day: f64,
    factors: &TransitFactors,
) -> Result<f64, LifecycleError> {
    if bus_trips_per_day < 0.0 || !bus_trips_per_day.is_finite() {
        return Err(LifecycleError::NegativeTrips {
            mode: "bus",
            value: bus_trips_per_day,
        });
    }
    if rail_trips_per_day < 0.0 || !rail_trips_per_day.is_finite() {
        return Err(LifecycleError::NegativeTrips {
            mode: "rail",
            value: rail_trips_per_day,
        });
    }
    Ok(bus_trips_per_day * factors.bus.per_trip_lifecycle_g
        + rail_trips_per_day * factors.rail.per_trip_lifecycle_g)
}

/// Vehicle-effect vs. induced-transit bookkeeping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NetEffect {
    /// The estimated change in household vehicle CO₂ (negative = reduction).
    pub vehicle_effect_g: f64,
    /// The change in household transit CO₂ (positive = induced emissions).
    pub transit_offset_g: f64,
    /// vehicle effect + transit offset.
    pub net_g: f64,
    /// |transit / vehicle| as a fraction; `None` when the vehicle effect
    /// is zero.
    pub offset_share: Option<f64>,
}

/// Combine a vehicle-CO₂ treatment effect with the induced transit
/// change. The share is reported as a fraction of the vehicle effect's
/// magnitude (0.046 ≈ "offsets 4.6% of the reduction").
pub fn net_effect_summary(vehicle_effect_g: f64, transit_offset_g: f64) -> NetEffect {
    let offset_share = if vehicle_effect_g == 0.0 {
        None
    } else {
        Some((transit_offset_g / vehicle_effect_g).abs())
    };
    NetEffect {
        vehicle_effect_g,
        transit_offset_g,
        net_g: vehicle_effect_g + transit_offset_g,
        offset_share,
    }
}

/// One group's transit CO₂ across waves.
#[derive(Debug, Clone, Serialize)]
pub struct TransitGroupSummary {
    pub group: GroupLabel,
    pub n_households: usize,
    pub wave1_mean_g: f64,
    pub wave2_mean_g: f64,
    /// wave 2 mean − wave 1 mean.
    pub change_g: f64,
    /// Paired two-sided p on per-household changes; `None` when the
    /// changes have no spread (the test is degenerate).
    pub paired_p: Option<f64>,
}

/// Per-group transit CO₂ means by wave, with paired tests on the
/// within-household changes.
pub fn transit_group_summaries(
    panel: &BalancedPanel,
    factors: &TransitFactors,
) -> Result<Vec<TransitGroupSummary>, LifecycleError> {
    let mut out = Vec::with_capacity(2);
    for group in [GroupLabel::Experimental, GroupLabel::Control] {
        let mut w1 = Vec::new();
        let mut diffs = Vec::new();
        let mut w2 = Vec::new();
        for pair in panel.observations.chunks_exact(2) {
            if pair[0].group != group {
                continue;
            }
            let a = household_transit_co2(
                pair[0].bus_trips_per_day,
                pair[0].train_trips_per_day,
                factors,
            )?;
            let b = household_transit_co2(
                pair[1].bus_trips_per_day,
                pair[1].train_trips_per_day,
                factors,
            )?;
            w1.push(a);
            w2.push(b);
            diffs.push(b - a);
        }
        if w1.is_empty() {
            continue;
        }
        let n = w1.len();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let paired_p = match paired_t(&diffs) {
            Ok(t) => Some(t.p_two_sided),
            // No spread in the changes (or a single household): report
            // the means without a p-value rather than failing the table.
            Err(StatsError::DegenerateVariance | StatsError::TooFewObservations { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        out.push(TransitGroupSummary {
            group,
            n_households: n,
            wave1_mean_g: mean(&w1),
            wave2_mean_g: mean(&w2),
            change_g: mean(&w2) - mean(&w1),
            paired_p,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rail_components() -> LifecycleComponents {
        LifecycleComponents {
            vehicle_operation: 0.0,
            propulsion_electricity: 120.73,
            energy_production: 3.29,
            vehicle_manufacturing_maintenance: 1.31,
            infrastructure_construction_operation: 53.72,
        }
    }

    fn bus_components() -> LifecycleComponents {
        LifecycleComponents {
            vehicle_operation: 53.91,
            propulsion_electricity: 0.0,
            energy_production: 14.63,
            vehicle_manufacturing_maintenance: 19.09,
            infrastructure_construction_operation: 19.84,
        }
    }

    #[test]
    fn component_sums_are_exact() {
        let rail = rail_components();
        assert!((rail.gross() - 179.05).abs() < 1e-12);
        assert!((rail.operational() - 124.02).abs() < 1e-12);
        let bus = bus_components();
        assert!((bus.gross() - 107.47).abs() < 1e-12);
        assert!((bus.operational() - 68.54).abs() < 1e-12);
    }

    #[test]
    fn scale_factors_from_components() {
        let rail = scale_factor(&rail_components()).unwrap();
        assert!((rail - 1.44).abs() < 0.005, "rail scale {rail}");
        let bus = scale_factor(&bus_components()).unwrap();
        assert!((bus - 1.57).abs() < 0.005, "bus scale {bus}");

        // All-operational breakdown: gross = operational → exactly 1.
        let flat = LifecycleComponents {
            vehicle_operation: 10.0,
            propulsion_electricity: 5.0,
            energy_production: 1.0,
            vehicle_manufacturing_maintenance: 0.0,
            infrastructure_construction_operation: 0.0,
        };
        assert_eq!(scale_factor(&flat).unwrap(), 1.0);

        let zero = LifecycleComponents {
            vehicle_operation: 0.0,
            propulsion_electricity: 0.0,
            energy_production: 0.0,
            vehicle_manufacturing_maintenance: 1.0,
            infrastructure_construction_operation: 1.0,
        };
        assert!(matches!(
            scale_factor(&zero),
            Err(LifecycleError::ZeroOperational)
        ));
    }

    #[test]
    fn per_trip_figures_match_published_arithmetic() {
        let rail_op = per_trip_operational(99.3, 6.81).unwrap();
        assert!((rail_op - 676.2).abs() < 0.05, "rail op {rail_op}");
        let bus_op = per_trip_operational(224.1, 4.2).unwrap();
        assert!((bus_op - 941.2).abs() < 0.05, "bus op {bus_op}");

        let (rail_lc, flag) = per_trip_lifecycle(676.2, 1.44).unwrap();
        assert!((rail_lc - 973.7).abs() < 0.1, "rail lifecycle {rail_lc}");
        assert!(!flag);
        let (bus_lc, _) = per_trip_lifecycle(941.2, 1.57).unwrap();
        assert!((bus_lc - 1477.7).abs() < 0.1, "bus lifecycle {bus_lc}");

        let (same, below) = per_trip_lifecycle(500.0, 1.0).unwrap();
        assert_eq!(same, 500.0);
        assert!(!below);
        let (_, below) = per_trip_lifecycle(500.0, 0.9).unwrap();
        assert!(below);

        assert!(per_trip_operational(-1.0, 5.0).is_err());
        assert!(per_trip_lifecycle(500.0, -0.5).is_err());
    }

    fn factors() -> TransitFactors {
        TransitFactors {
            bus: ModeFactors::derive("bus", 224.1, 4.2, Some(bus_components()), None).unwrap(),
            rail: ModeFactors::derive("rail", 99.3, 6.81, Some(rail_components()), None).unwrap(),
        }
    }

    #[test]
    fn household_day_is_linear_in_trips() {
        let f = factors();
        assert_eq!(household_transit_co2(0.0, 0.0, &f).unwrap(), 0.0);
        let one_bus = household_transit_co2(1.0, 0.0, &f).unwrap();
        assert!((one_bus - f.bus.per_trip_lifecycle_g).abs() < 1e-12);
        let mix = household_transit_co2(2.0, 3.0, &f).unwrap();
        assert!(
            (mix - (2.0 * f.bus.per_trip_lifecycle_g + 3.0 * f.rail.per_trip_lifecycle_g)).abs()
                < 1e-9
        );
        assert!(household_transit_co2(-0.1, 0.0, &f).is_err());
    }

    #[test]
    fn rail_increase_bound() {
        // 0.15 extra rail trips a day ≈ 146 grams.
        let f = factors();
        let delta = household_transit_co2(0.0, 0.15, &f).unwrap();
        assert!((delta - 146.1).abs() < 0.5, "delta {delta}");
    }

    #[test]
    fn net_effect_bookkeeping() {
        let n = net_effect_summary(-3145.0, 146.0);
        assert!((n.net_g - (-2999.0)).abs() < 1e-9);
        let share = n.offset_share.unwrap();
        assert!((share * 100.0 - 4.64).abs() < 0.01, "share {share}");

        let zero_offset = net_effect_summary(-3145.0, 0.0);
        assert_eq!(zero_offset.offset_share, Some(0.0));
        assert_eq!(zero_offset.net_g, -3145.0);

        let no_effect = net_effect_summary(0.0, 100.0);
        assert_eq!(no_effect.offset_share, None);
        assert_eq!(no_effect.net_g, 100.0);
    }

    #[test]
    fn loader_reads_both_row_styles() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lifecycle.csv");
        std::fs::write(
            &path,
            "mode,g_per_passenger_mile,avg_trip_miles,scale_factor,comp_vehicle_operation,comp_propulsion,comp_energy_production,comp_vehicle_manufacturing,comp_infrastructure\n\
             rail,99.3,6.81,,0,120.73,3.29,1.31,53.72\n\
             bus,224.1,4.2,1.57,,,,,\n",
        )
        .unwrap();
        let f = load_transit_factors(&path).unwrap();
        // Rail's scale came from the components, bus's from the cell.
        assert!((f.rail.scale - 179.05 / 124.02).abs() < 1e-12);
        assert_eq!(f.bus.scale, 1.57);
        assert!(f.rail.components.is_some());
        assert!(f.bus.components.is_none());
    }

    #[test]
    fn loader_component_precedence_over_scale_cell() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lifecycle.csv");
        // Scale cell says 9.99 but the components say 1.4437…: components win.
        std::fs::write(
            &path,
            "mode,g_per_passenger_mile,avg_trip_miles,scale_factor,comp_vehicle_operation,comp_propulsion,comp_energy_production,comp_vehicle_manufacturing,comp_infrastructure\n\
             rail,99.3,6.81,9.99,0,120.73,3.29,1.31,53.72\n\
             bus,224.1,4.2,1.57,,,,,\n",
        )
        .unwrap();
        let f = load_transit_factors(&path).unwrap();
        assert!((f.rail.scale - 179.05 / 124.02).abs() < 1e-12);
    }

    #[test]
    fn loader_rejects_partial_components_and_missing_modes() {
        let dir = tempfile::tempdir().unwrap();
        let partial = dir.path().join("partial.csv");
        std::fs::write(
            &partial,
            "mode,g_per_passenger_mile,avg_trip_miles,scale_factor,comp_vehicle_operation,comp_propulsion,comp_energy_production,comp_vehicle_manufacturing,comp_infrastructure\n\
             rail,99.3,6.81,,0,120.73,,,53.72\n",
        )
        .unwrap();
        assert!(matches!(
            load_transit_factors(&partial),
            Err(LifecycleError::Data(DataError::MalformedRow {
                line: 2,
                ..
            }))
        ));

        let bus_only = dir.path().join("bus_only.csv");
        std::fs::write(
            &bus_only,
            "mode,g_per_passenger_mile,avg_trip_miles,scale_factor,comp_vehicle_operation,comp_propulsion,comp_energy_production,comp_vehicle_manufacturing,comp_infrastructure\n\
             bus,224.1,4.2,1.57,,,,,\n",
        )
        .unwrap();
        assert!(matches!(
            load_transit_factors(&bus_only),
            Err(LifecycleError::MissingMode("rail"))
        ));
    }
}
