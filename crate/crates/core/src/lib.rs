//! Before/after experimental–control evaluation of household vehicle CO₂
//! around a transit corridor.
//!
//! The library is organized as a pipeline:
//!
//! 1. [`dataio`] — load and validate the raw survey CSVs (households,
//!    vehicles, odometer readings, trip diaries), emission factor tables,
//!    and station coordinates.
//! 2. [`panel`] — screen household-waves (missing vehicle info, unreliable
//!    odometers, factor coverage), compute daily VMT, assign households to
//!    the experimental/control group by distance to the nearest station,
//!    and assemble the balanced two-wave panel.
//! 3. [`emissions`] — per-vehicle running + cold-start CO₂ from the factor
//!    tables, aggregated to household grams/day.
//! 4. [`stats`] — the numerical kernel: descriptive stats, Student-t tail
//!    probabilities, two-sample and paired t-tests, and OLS via Householder
//!    QR with classical standard errors.
//! 5. [`evaluate`] — group contrasts, within-group changes, the
//!    difference-in-differences regression ladder, and the catchment-radius
//!    sensitivity sweep.
//! 6. [`lifecycle`] — per-trip transit life-cycle factors and the net-effect
//!    bound that offsets the vehicle reduction against induced transit.
//! 7. [`simulate`] — seeded synthetic survey generator and the Monte Carlo
//!    estimator-recovery experiment.
//!
//! Every stage is deterministic given its inputs (and, for [`simulate`],
//! the seed); reports serialize with stable field order so reruns are
//! byte-identical.

pub mod config;
pub mod dataio;
pub mod emissions;
pub mod evaluate;
pub mod geo;
pub mod lifecycle;
pub mod panel;
pub mod pipeline;
pub mod report;
pub mod simulate;
pub mod stats;

pub use config::{CovariateSpec, Length, LengthUnit, RunConfig, TtestVariant};
pub use dataio::{
    FactorTables, HouseholdRecord, OdometerReading, RawSurvey, StationSet, TripDayRecord,
    ValidationReport, VehicleRecord,
};
pub use emissions::{VehicleClass, VehicleEmission};
pub use evaluate::{ContrastRow, DidFit, ModelId};
pub use lifecycle::{LifecycleComponents, ModeFactors, NetEffect};
pub use panel::{BalancedPanel, ExclusionReason, GroupLabel, PanelObservation};
pub use simulate::{RecoveryReport, SimConfig};
pub use stats::{OlsFit, TestResult};
