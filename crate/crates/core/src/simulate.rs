//! Synthetic surveys with a known treatment effect, and the Monte Carlo
//! recovery experiment that checks the whole pipeline against it.
//!
//! The original survey data cannot be redistributed, so verification runs
//! the other way around: plant a treatment effect, generate a survey
//! around it, push that survey through the same screening → emissions →
//! regression pipeline as real data, and confirm the estimate lands on
//! the planted value.
//!
//! Three construction choices make the planted targets exact rather than
//! approximate:
//!
//! * Vehicle counts are allocated by largest-remainder quota instead of
//!   sampled, so each group's number of vehicle-owning households is a
//!   deterministic function of the config. Non-owners are structural
//!   zeros; giving every owner the target `μ·n/owners` makes the
//!   zero-noise cell mean equal `μ` to rounding error, whatever the
//!   ownership distribution says.
//! * Noise multiplies the margin above the cold-start floor by a
//!   Gamma(k, 1/k) draw with k = ((μ′ − S)/σ)². The draw has mean 1, so
//!   each owner's emission has mean μ′ and standard deviation exactly σ,
//!   and it is non-negative, so the emission never dips below the floor
//!   and the back-solved VMT never goes negative.
//! * Odometer readings are laid down as an exact arithmetic series
//!   `base + VMT·day`, so the panel stage's (span ÷ days) estimator
//!   returns the planted per-vehicle VMT to the last bit.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::Serialize;

use crate::config::{parse_num, ConfigError, KvFile, RunConfig};
use crate::dataio::{
    BodyStyle, FactorTables, FuelType, GasolineFactor, HouseholdRecord, OdometerReading, RawSurvey,
    Station, StationSet, TripDayRecord, VehicleRecord,
};
use crate::emissions::VehicleClass;
use crate::evaluate::{did_fit, EvalError};
use crate::geo::destination_point;
use crate::panel::{build_balanced_panel, GroupLabel, PanelError};
use crate::stats::{t_tail_two_sided, StatsError};

/// Where the synthetic corridor's one station sits. The spot is
/// arbitrary; only home–station distances matter downstream.
const STATION_LAT: f64 = 34.05;
const STATION_LON: f64 = -118.25;

/// Model year stamped on every generated vehicle; the generated factor
/// tables cover it in both calendar years.
const SIM_MODEL_YEAR: u16 = 2005;
const SIM_MAKE: &str = "Acme";
const SIM_MODEL: &str = "Wayfarer";

/// Diary length of the generated survey.
const SIM_DIARY_DAYS: u8 = 7;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    /// The cell target sits at or below the household's summed cold-start
    /// emissions, which would require negative driving to hit.
    #[error(
        "household {household} wave {wave}: target {target_g:.1} g/day does not clear \
         its {start_g:.1} g/day cold-start floor"
    )]
    InfeasibleTarget {
        household: String,
        wave: u8,
        target_g: f64,
        start_g: f64,
    },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Generator parameters.
///
/// The four cell means are specified as three bases plus the effect:
/// control wave 1 (`mu00`), experimental wave 1 (`mu10`), control wave 2
/// (`mu01`), and the planted effect `tau`; the experimental wave-2 mean
/// follows from parallel trends as `mu10 + (mu01 − mu00) + tau`.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Households in each group × wave cell. The same households appear
    /// in both waves, so the survey holds twice this many per group.
    pub households_per_cell: usize,
    /// Control wave-1 mean daily CO₂, grams.
    pub mu00: f64,
    /// Experimental wave-1 mean.
    pub mu10: f64,
    /// Control wave-2 mean; `mu01 − mu00` is the secular drift both
    /// groups share.
    pub mu01: f64,
    /// Treatment effect planted in the experimental wave-2 cell, grams
    /// per day (negative = reduction).
    pub tau: f64,
    /// Per-household emission sd within a cell, grams per day. Zero makes
    /// every owner hit its cell target exactly.
    pub noise_sd: f64,
    /// Probability a household owns 0, 1, 2, or 3 vehicles. Realized
    /// counts are quota-allocated, so these are exact shares up to
    /// rounding, not sampling weights.
    pub vehicle_count_probs: [f64; 4],
    /// Income bracket shares (brackets 1–6) conditional on answering.
    pub income_probs: [f64; 6],
    /// Probability the income question goes unanswered.
    pub income_missing_prob: f64,
    /// Running rate written into the generated gasoline factor table.
    pub run_g_per_mile: f64,
    /// Cold-start rate written into the generated gasoline factor table.
    pub start_g_per_day: f64,
    /// Experimental homes are placed uniformly in this band of distances
    /// from the station, miles.
    pub experimental_distance_mi: (f64, f64),
    /// Control homes likewise; must start past the experimental band.
    pub control_distance_mi: (f64, f64),
    /// Mean diary trips per household-day, by mode.
    pub car_trips_per_day: f64,
    pub bus_trips_per_day: f64,
    pub train_trips_per_day: f64,
    /// Added to the experimental group's wave-2 train rate, standing in
    /// for new riders the opening attracts.
    pub train_uptake_per_day: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    /// Calibration mirrors the observed panel: the four cell means land
    /// on the group × wave table the evaluation reports, the noise sd
    /// sits near the observed wave-1 spread, ownership concentrates on
    /// one- and two-vehicle households (mean ≈ 1.16), and the income mix
    /// follows the reported bracket counts.
    fn default() -> Self {
        SimConfig {
            households_per_cell: 80,
            mu00: 9992.7,
            mu10: 9371.1,
            mu01: 10815.9,
            tau: -2316.8,
            noise_sd: 8700.0,
            vehicle_count_probs: [0.04, 0.78, 0.16, 0.02],
            income_probs: [
                42.0 / 312.0,
                77.0 / 312.0,
                71.0 / 312.0,
                48.0 / 312.0,
                35.0 / 312.0,
                39.0 / 312.0,
            ],
            income_missing_prob: 0.025,
            run_g_per_mile: 400.0,
            start_g_per_day: 300.0,
            experimental_distance_mi: (0.05, 0.45),
            control_distance_mi: (0.6, 2.5),
            car_trips_per_day: 2.0,
            bus_trips_per_day: 0.1,
            train_trips_per_day: 0.05,
            train_uptake_per_day: 0.15,
            seed: 42,
        }
    }
}

impl SimConfig {
    /// The experimental wave-2 mean implied by parallel trends plus the
    /// planted effect.
    pub fn mu11(&self) -> f64 {
        self.mu10 + (self.mu01 - self.mu00) + self.tau
    }

    fn cell_mean(&self, group: GroupLabel, wave: u8) -> f64 {
        match (group, wave) {
            (GroupLabel::Control, 1) => self.mu00,
            (GroupLabel::Experimental, 1) => self.mu10,
            (GroupLabel::Control, _) => self.mu01,
            (GroupLabel::Experimental, _) => self.mu11(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.check().map_err(SimError::BadConfig)
    }

    fn check(&self) -> Result<(), String> {
        if self.households_per_cell < 2 {
            return Err(format!(
                "need at least 2 households per cell, got {}",
                self.households_per_cell
            ));
        }
        for (name, probs) in [
            ("vehicle_count_probs", &self.vehicle_count_probs[..]),
            ("income_probs", &self.income_probs[..]),
        ] {
            if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(format!("{name} entries must lie in [0, 1]"));
            }
            let sum: f64 = probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("{name} sums to {sum}, expected 1"));
            }
        }
        if !(0.0..=1.0).contains(&self.income_missing_prob) {
            return Err(format!(
                "income_missing_prob {} outside [0, 1]",
                self.income_missing_prob
            ));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(format!(
                "noise_sd must be finite and ≥ 0, got {}",
                self.noise_sd
            ));
        }
        for (name, mu) in [
            ("mu00", self.mu00),
            ("mu10", self.mu10),
            ("mu01", self.mu01),
            (
                "implied experimental wave-2 mean mu10 + (mu01 - mu00) + tau",
                self.mu11(),
            ),
        ] {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(format!("{name} must be a non-negative emission, got {mu}"));
            }
        }
        if !(self.run_g_per_mile > 0.0 && self.run_g_per_mile.is_finite()) {
            return Err(format!(
                "run_g_per_mile must be positive, got {}",
                self.run_g_per_mile
            ));
        }
        if !(self.start_g_per_day >= 0.0 && self.start_g_per_day.is_finite()) {
            return Err(format!(
                "start_g_per_day must be ≥ 0, got {}",
                self.start_g_per_day
            ));
        }
        let (elo, ehi) = self.experimental_distance_mi;
        let (clo, chi) = self.control_distance_mi;
        for (name, (lo, hi)) in [
            ("experimental_distance_mi", (elo, ehi)),
            ("control_distance_mi", (clo, chi)),
        ] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(format!(
                    "{name} must be an ordered band 0 ≤ lo ≤ hi, got {lo}..{hi}"
                ));
            }
        }
        if ehi >= clo {
            return Err(format!(
                "distance bands overlap: experimental reaches {ehi} mi but control starts at {clo} mi"
            ));
        }
        for (name, rate) in [
            ("car_trips_per_day", self.car_trips_per_day),
            ("bus_trips_per_day", self.bus_trips_per_day),
            ("train_trips_per_day", self.train_trips_per_day),
            ("train_uptake_per_day", self.train_uptake_per_day),
        ] {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(format!("{name} must be ≥ 0, got {rate}"));
            }
        }
        Ok(())
    }

    /// Read `sim.*` keys from the shared dotted-key config format; keys
    /// outside the `sim.` prefix belong to [`RunConfig`] and are ignored
    /// here, so one file can drive a simulate-then-evaluate session.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_kv(&KvFile::read(path)?)
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        for (key, (value, _line)) in &kv.entries {
            let Some(field) = key.strip_prefix("sim.") else {
                continue;
            };
            match field {
                "households_per_cell" => {
                    cfg.households_per_cell = parse_num(key, value, 2.0, 1e7)? as usize
                }
                "mu00" => cfg.mu00 = parse_num(key, value, 0.0, f64::INFINITY)?,
                "mu10" => cfg.mu10 = parse_num(key, value, 0.0, f64::INFINITY)?,
                "mu01" => cfg.mu01 = parse_num(key, value, 0.0, f64::INFINITY)?,
                "tau" => cfg.tau = parse_num(key, value, f64::NEG_INFINITY, f64::INFINITY)?,
                "noise_sd" => cfg.noise_sd = parse_num(key, value, 0.0, f64::INFINITY)?,
                "vehicle_count_probs" => {
                    cfg.vehicle_count_probs = float_list(key, value)?;
                }
                "income_probs" => {
                    cfg.income_probs = float_list(key, value)?;
                }
                "income_missing_prob" => cfg.income_missing_prob = parse_num(key, value, 0.0, 1.0)?,
                "run_g_per_mile" => {
                    cfg.run_g_per_mile = parse_num(key, value, f64::MIN_POSITIVE, f64::INFINITY)?
                }
                "start_g_per_day" => {
                    cfg.start_g_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "experimental_distance_mi" => {
                    let [lo, hi] = float_list(key, value)?;
                    cfg.experimental_distance_mi = (lo, hi);
                }
                "control_distance_mi" => {
                    let [lo, hi] = float_list(key, value)?;
                    cfg.control_distance_mi = (lo, hi);
                }
                "car_trips_per_day" => {
                    cfg.car_trips_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "bus_trips_per_day" => {
                    cfg.bus_trips_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "train_trips_per_day" => {
                    cfg.train_trips_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "train_uptake_per_day" => {
                    cfg.train_uptake_per_day = parse_num(key, value, 0.0, f64::INFINITY)?
                }
                "seed" => {
                    cfg.seed = value.parse().map_err(|_| ConfigError::BadValue {
                        key: key.clone(),
                        reason: format!("`{value}` is not an unsigned integer"),
                    })?
                }
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        cfg.check().map_err(|reason| ConfigError::BadValue {
            key: "sim".to_string(),
            reason,
        })?;
        Ok(cfg)
    }
}

/// Comma-separated float list of a fixed length.
fn float_list<const N: usize>(key: &str, value: &str) -> Result<[f64; N], ConfigError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("expected {N} comma-separated numbers, got {}", parts.len()),
        });
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("`{part}` is not a number"),
        })?;
    }
    Ok(out)
}

/// The parameters a recovery run tries to re-estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroundTruth {
    pub mu00: f64,
    pub mu10: f64,
    pub mu01: f64,
    pub mu11: f64,
    /// True interaction effect: `mu11 − mu10 − (mu01 − mu00)`.
    pub tau: f64,
}

/// A generated survey plus the factor tables and station list that give
/// it meaning, and the truth it was built around.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub survey: RawSurvey,
    pub factors: FactorTables,
    pub stations: StationSet,
    pub truth: GroundTruth,
}

/// Generate the full bundle a pipeline run needs: survey, factor tables
/// covering every generated vehicle, and the station the corridor is
/// anchored on. Deterministic in `cfg.seed`.
pub fn generate_dataset(cfg: &SimConfig) -> Result<SyntheticDataset, SimError> {
    generate_with_stream(cfg, 0)
}

/// Just the survey, for callers that supply their own factors/stations.
pub fn generate_panel(cfg: &SimConfig) -> Result<RawSurvey, SimError> {
    Ok(generate_dataset(cfg)?.survey)
}

/// Same generator on a numbered ChaCha stream, so the recovery experiment
/// can derive independent replications from one master seed without the
/// sequence coupling that `seed + rep` arithmetic invites.
fn generate_with_stream(cfg: &SimConfig, stream: u64) -> Result<SyntheticDataset, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);

    let n = cfg.households_per_cell;
    // Wide enough ids keep lexicographic order equal to numeric order, so
    // the emitted survey is already in the loaders' canonical order.
    let id_width = (2 * n).to_string().len().max(4);
    let mut survey = RawSurvey::default();

    for (group_idx, group) in [GroupLabel::Experimental, GroupLabel::Control]
        .into_iter()
        .enumerate()
    {
        // Quota, then shuffle: which households own how many vehicles is
        // random, but how many owners the group has is not.
        let mut veh_counts = quota_counts(&cfg.vehicle_count_probs, n);
        veh_counts.shuffle(&mut rng);
        let owners = veh_counts.iter().filter(|&&m| m > 0).count();

        let (dist_lo, dist_hi) = match group {
            GroupLabel::Experimental => cfg.experimental_distance_mi,
            GroupLabel::Control => cfg.control_distance_mi,
        };

        for (i, &m) in veh_counts.iter().enumerate() {
            let household_id = format!("H{:0id_width$}", group_idx * n + i + 1);

            let bearing = rng.random_range(0.0..std::f64::consts::TAU);
            let distance = if dist_lo == dist_hi {
                dist_lo
            } else {
                rng.random_range(dist_lo..dist_hi)
            };
            let (home_lat, home_lon) =
                destination_point(STATION_LAT, STATION_LON, bearing, distance);

            let size_12plus = 1 + poisson_count(&mut rng, 1.2).min(7);
            let income_bracket = draw_income(&mut rng, cfg);

            for wave in [1u8, 2] {
                survey.households.push(HouseholdRecord {
                    household_id: household_id.clone(),
                    wave,
                    home_lat,
                    home_lon,
                    size_12plus,
                    income_bracket,
                    raw_vehicle_count: m,
                });

                if m > 0 {
                    // owners ≥ 1 is implied by m > 0.
                    let target_mean = cfg.cell_mean(group, wave) * n as f64 / owners as f64;
                    let start_floor = f64::from(m) * cfg.start_g_per_day;
                    let emission = draw_emission(&mut rng, cfg.noise_sd, target_mean, start_floor)
                        .ok_or_else(|| SimError::InfeasibleTarget {
                            household: household_id.clone(),
                            wave,
                            target_g: target_mean,
                            start_g: start_floor,
                        })?;
                    // Back-solve the running emission into miles, split
                    // evenly across the household's vehicles.
                    let vmt_each = (emission - start_floor) / cfg.run_g_per_mile / f64::from(m);
                    for v in 1..=m {
                        let vehicle_id = format!("V{v}");
                        survey.vehicles.push(VehicleRecord {
                            household_id: household_id.clone(),
                            wave,
                            vehicle_id: vehicle_id.clone(),
                            make: SIM_MAKE.to_string(),
                            model: SIM_MODEL.to_string(),
                            model_year: Some(SIM_MODEL_YEAR),
                            fuel: FuelType::Gasoline,
                            body: BodyStyle::Auto,
                            curb_weight_lb: None,
                        });
                        // One decimal on the base keeps the written CSV
                        // tidy; the increments stay full-precision so the
                        // span recovers vmt_each exactly.
                        let base = (rng.random_range(5_000.0..120_000.0f64) * 10.0).round() / 10.0;
                        for day in 1..=SIM_DIARY_DAYS {
                            survey.odometer.push(OdometerReading {
                                household_id: household_id.clone(),
                                wave,
                                vehicle_id: vehicle_id.clone(),
                                day_index: day,
                                reading_miles: base + vmt_each * f64::from(day),
                            });
                        }
                    }
                }

                let train_rate = cfg.train_trips_per_day
                    + if group == GroupLabel::Experimental && wave == 2 {
                        cfg.train_uptake_per_day
                    } else {
                        0.0
                    };
                for day in 1..=SIM_DIARY_DAYS {
                    survey.trips.push(TripDayRecord {
                        household_id: household_id.clone(),
                        wave,
                        day_index: day,
                        car_trips: poisson_count(&mut rng, cfg.car_trips_per_day),
                        bus_trips: poisson_count(&mut rng, cfg.bus_trips_per_day),
                        train_trips: poisson_count(&mut rng, train_rate),
                    });
                }
            }
        }
    }

    Ok(SyntheticDataset {
        survey,
        factors: sim_factor_tables(cfg),
        stations: StationSet {
            stations: vec![Station {
                station_id: "S1".to_string(),
                lat: STATION_LAT,
                lon: STATION_LON,
            }],
        },
        truth: GroundTruth {
            mu00: cfg.mu00,
            mu10: cfg.mu10,
            mu01: cfg.mu01,
            mu11: cfg.mu11(),
            tau: cfg.tau,
        },
    })
}

/// Factor tables covering the generated fleet in both survey years, with
/// identical rates in both so the configured cell means are the only
/// source of change between waves.
fn sim_factor_tables(cfg: &SimConfig) -> FactorTables {
    let run = RunConfig::default();
    let factor = GasolineFactor {
        run_g_per_mile: cfg.run_g_per_mile,
        start_g_per_day: cfg.start_g_per_day,
    };
    let mut gasoline = std::collections::BTreeMap::new();
    for year in [run.wave1_calendar_year, run.wave2_calendar_year] {
        gasoline.insert((year, VehicleClass::Lda, SIM_MODEL_YEAR), factor);
    }
    FactorTables {
        gasoline,
        electrified: std::collections::BTreeMap::new(),
        ldt_split_threshold_lb: 3750.0,
    }
}

/// Integer counts `n·p` rounded by largest remainder, so they sum to `n`
/// and track the configured shares as closely as integers allow. Ties go
/// to the lower count category, deterministically.
fn quota_counts(probs: &[f64; 4], n: usize) -> Vec<u32> {
    let mut floors = [0usize; 4];
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(4);
    let mut allocated = 0;
    for (count, &p) in probs.iter().enumerate() {
        let exact = p * n as f64;
        let floor = exact.floor() as usize;
        floors[count] = floor;
        allocated += floor;
        remainders.push((count, exact - floor as f64));
    }
    // Largest remainder first; stable tie-break on the category index.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(count, _) in remainders.iter().take(n - allocated) {
        floors[count] += 1;
    }

    let mut out = Vec::with_capacity(n);
    for (count, &how_many) in floors.iter().enumerate() {
        out.extend(std::iter::repeat_n(count as u32, how_many));
    }
    out
}

/// One emission draw with mean `target_mean`, sd `noise_sd`, and support
/// above `start_floor`. `None` when the target does not clear the floor.
fn draw_emission(
    rng: &mut ChaCha8Rng,
    noise_sd: f64,
    target_mean: f64,
    start_floor: f64,
) -> Option<f64> {
    let margin = target_mean - start_floor;
    if noise_sd == 0.0 {
        // Moot margin: a zero-vehicle cell mean of zero is fine (m > 0
        // never gets here with target 0 unless the config is degenerate).
        return (margin >= 0.0).then_some(target_mean);
    }
    if margin <= 0.0 {
        return None;
    }
    let k = (margin / noise_sd).powi(2);
    let gamma = Gamma::new(k, 1.0 / k).expect("shape and scale are positive");
    Some(start_floor + margin * gamma.sample(rng))
}

/// Poisson count with a zero-rate escape hatch (the distribution itself
/// requires λ > 0).
fn poisson_count(rng: &mut ChaCha8Rng, rate: f64) -> u32 {
    if rate <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(rate).expect("rate is positive and finite");
    poisson.sample(rng) as u32
}

fn draw_income(rng: &mut ChaCha8Rng, cfg: &SimConfig) -> Option<u8> {
    if rng.random_range(0.0..1.0) < cfg.income_missing_prob {
        return None;
    }
    let u: f64 = rng.random_range(0.0..1.0);
    let mut cumulative = 0.0;
    for (i, &p) in cfg.income_probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return Some(i as u8 + 1);
        }
    }
    Some(6)
}

/// Aggregate result of a Monte Carlo recovery run.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub replications: usize,
    pub true_effect: f64,
    /// Mean of the interaction estimates across replications.
    pub mean_estimate: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Spread of the estimates themselves; compare with `mean_se` to see
    /// whether the model's reported uncertainty is honest.
    pub empirical_sd: f64,
    pub mean_se: f64,
    /// Share of replications whose 95% confidence interval covers the
    /// true effect.
    pub coverage_95: f64,
    /// Share of replications rejecting "no effect" at α = 0.05.
    pub rejection_rate_05: f64,
}

/// Generate → screen → regress, `replications` times, each on its own RNG
/// stream derived from the master seed, and summarize how well the
/// pipeline recovers the planted effect.
///
/// Runs use the default pipeline settings; the default distance bands
/// straddle the default half-mile catchment, so geography reproduces the
/// intended group labels.
pub fn recovery_experiment(
    cfg: &SimConfig,
    replications: usize,
) -> Result<RecoveryReport, SimError> {
    if replications < 2 {
        return Err(SimError::BadConfig(format!(
            "need at least 2 replications, got {replications}"
        )));
    }
    cfg.validate()?;
    let run_cfg = RunConfig::default();
    let model1 = crate::config::CovariateSpec::EMPTY;

    let mut estimates = Vec::with_capacity(replications);
    let mut ses = Vec::with_capacity(replications);
    let mut covered = 0usize;
    let mut rejected = 0usize;

    // Stream 0 is the plain generate_dataset stream; replications start
    // at 1 so a rep never duplicates a standalone generation.
    for rep in 0..replications {
        let data = generate_with_stream(cfg, rep as u64 + 1)?;
        let panel = build_balanced_panel(&data.survey, &data.factors, &data.stations, &run_cfg)?;
        let fit = did_fit(&panel, &model1)?;

        let estimate = fit.treatment_effect();
        let se = fit.treatment_se();
        let df = fit.ols.df_residual() as f64;

        // Coverage of the 95% interval, tested via the p-value of the
        // shifted statistic rather than an inverse CDF: the interval
        // covers τ exactly when |β̂ − τ|/se is not significant at 5%.
        // An estimate that matches τ to rounding error is covered no
        // matter how small se is — the interval is centered on the
        // truth — and without this short-circuit a noise-free run
        // divides float dust by float dust and answers at random.
        let dev = (estimate - cfg.tau).abs();
        let covers = if dev <= 1e-9 * cfg.tau.abs().max(1.0) {
            true
        } else if se == 0.0 {
            false
        } else {
            t_tail_two_sided((estimate - cfg.tau) / se, df)? >= 0.05
        };
        if covers {
            covered += 1;
        }
        if fit.treatment_p() < 0.05 {
            rejected += 1;
        }
        estimates.push(estimate);
        ses.push(se);
    }

    let reps = replications as f64;
    let mean_estimate = estimates.iter().sum::<f64>() / reps;
    let rmse = (estimates.iter().map(|e| (e - cfg.tau).powi(2)).sum::<f64>() / reps).sqrt();
    let empirical_sd = {
        let ss = estimates
            .iter()
            .map(|e| (e - mean_estimate).powi(2))
            .sum::<f64>();
        (ss / (reps - 1.0)).sqrt()
    };

    Ok(RecoveryReport {
        replications,
        true_effect: cfg.tau,
        mean_estimate,
        bias: mean_estimate - cfg.tau,
        rmse,
        empirical_sd,
        mean_se: ses.iter().sum::<f64>() / reps,
        coverage_95: covered as f64 / reps,
        rejection_rate_05: rejected as f64 / reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::validate_dataset;

    fn zero_noise_cfg() -> SimConfig {
        SimConfig {
            noise_sd: 0.0,
            households_per_cell: 20,
            ..SimConfig::default()
        }
    }

    #[test]
    fn quota_counts_track_shares_and_sum() {
        let counts = quota_counts(&[0.04, 0.78, 0.16, 0.02], 80);
        assert_eq!(counts.len(), 80);
        let tally = |c: u32| counts.iter().filter(|&&x| x == c).count();
        // 3.2, 62.4, 12.8, 1.6 → floors 3+62+12+1 = 78, two leftovers go
        // to the largest remainders (0.8 and 0.6).
        assert_eq!((tally(0), tally(1), tally(2), tally(3)), (3, 62, 13, 2));
    }

    #[test]
    fn quota_handles_point_mass() {
        let counts = quota_counts(&[0.0, 1.0, 0.0, 0.0], 7);
        assert!(counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let cfg = SimConfig {
            households_per_cell: 10,
            ..SimConfig::default()
        };
        let a = generate_dataset(&cfg).unwrap();
        let b = generate_dataset(&cfg).unwrap();
        assert_eq!(a.survey, b.survey);
        assert_eq!(a.factors, b.factors);
        assert_eq!(a.stations, b.stations);

        let c = generate_dataset(&SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.survey, c.survey);
    }

    #[test]
    fn generated_survey_validates_clean() {
        let data = generate_dataset(&zero_noise_cfg()).unwrap();
        let report = validate_dataset(&data.survey, &data.factors, &data.stations);
        assert_eq!(report.fatal_count(), 0, "{:?}", report.issues);
        // The only expected warnings are unanswered income questions.
        assert!(report
            .issues
            .iter()
            .all(|i| i.category == crate::dataio::IssueCategory::MissingIncome));
    }

    #[test]
    fn zero_noise_cell_means_are_exact() {
        let cfg = zero_noise_cfg();
        let data = generate_dataset(&cfg).unwrap();
        let panel = build_balanced_panel(
            &data.survey,
            &data.factors,
            &data.stations,
            &RunConfig::default(),
        )
        .unwrap();
        // Everybody passes screening in the zero-noise world.
        assert_eq!(panel.n_households(), 2 * cfg.households_per_cell);

        let mean = |group, wave| {
            let cell = panel.cell(group, wave);
            cell.iter().map(|o| o.daily_co2_g).sum::<f64>() / cell.len() as f64
        };
        let checks = [
            (GroupLabel::Control, 1, cfg.mu00),
            (GroupLabel::Experimental, 1, cfg.mu10),
            (GroupLabel::Control, 2, cfg.mu01),
            (GroupLabel::Experimental, 2, cfg.mu11()),
        ];
        for (group, wave, want) in checks {
            let got = mean(group, wave);
            assert!(
                (got - want).abs() <= 1e-9 * want.max(1.0),
                "cell ({group:?}, wave {wave}): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn zero_noise_did_recovers_tau_exactly() {
        let cfg = zero_noise_cfg();
        let data = generate_dataset(&cfg).unwrap();
        let panel = build_balanced_panel(
            &data.survey,
            &data.factors,
            &data.stations,
            &RunConfig::default(),
        )
        .unwrap();
        let fit = did_fit(&panel, &crate::config::CovariateSpec::EMPTY).unwrap();
        assert!((fit.treatment_effect() - cfg.tau).abs() < 1e-6);
        assert!((fit.ols.coefficients[0] - cfg.mu00).abs() < 1e-6);
    }

    #[test]
    fn infeasible_target_is_reported() {
        // A 100 g/day cell mean cannot clear a 300 g/day start floor.
        let cfg = SimConfig {
            mu00: 100.0,
            mu10: 100.0,
            mu01: 100.0,
            tau: 0.0,
            noise_sd: 0.0,
            ..zero_noise_cfg()
        };
        match generate_dataset(&cfg) {
            Err(SimError::InfeasibleTarget {
                target_g, start_g, ..
            }) => {
                assert!(target_g < start_g);
            }
            other => panic!("expected InfeasibleTarget, got {other:?}"),
        }
    }

    #[test]
    fn noisy_emissions_stay_above_start_floor() {
        let cfg = SimConfig {
            households_per_cell: 30,
            noise_sd: 8000.0,
            ..SimConfig::default()
        };
        let data = generate_dataset(&cfg).unwrap();
        // Every odometer series must be non-decreasing: negative VMT is
        // impossible by construction.
        let index = data.survey.index();
        for v in &data.survey.vehicles {
            let readings = index.readings_of(&v.household_id, v.wave, &v.vehicle_id);
            for pair in readings.windows(2) {
                assert!(pair[1].reading_miles >= pair[0].reading_miles);
            }
        }
    }

    #[test]
    fn config_round_trip_through_kv_format() {
        let text = "\
            sim.households_per_cell = 12\n\
            sim.mu00 = 9000\n\
            sim.tau = -1500\n\
            sim.noise_sd = 0\n\
            sim.vehicle_count_probs = 0.1, 0.8, 0.1, 0.0\n\
            sim.seed = 7\n\
            panel.catchment_radius = 0.5 mi  # ignored here\n";
        let kv = KvFile::parse(text, "inline").unwrap();
        let cfg = SimConfig::from_kv(&kv).unwrap();
        assert_eq!(cfg.households_per_cell, 12);
        assert_eq!(cfg.mu00, 9000.0);
        assert_eq!(cfg.tau, -1500.0);
        assert_eq!(cfg.noise_sd, 0.0);
        assert_eq!(cfg.vehicle_count_probs, [0.1, 0.8, 0.1, 0.0]);
        assert_eq!(cfg.seed, 7);
        // Untouched keys keep their defaults.
        assert_eq!(cfg.mu10, SimConfig::default().mu10);
    }

    #[test]
    fn unknown_sim_key_is_rejected() {
        let kv = KvFile::parse("sim.mu99 = 1\n", "inline").unwrap();
        assert!(matches!(
            SimConfig::from_kv(&kv),
            Err(ConfigError::UnknownKey(k)) if k == "sim.mu99"
        ));
    }

    #[test]
    fn bad_probability_vector_is_rejected() {
        let kv = KvFile::parse("sim.vehicle_count_probs = 0.5, 0.5, 0.5, 0.5\n", "inline").unwrap();
        assert!(matches!(
            SimConfig::from_kv(&kv),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn recovery_zero_noise_has_zero_bias_and_full_coverage() {
        let cfg = SimConfig {
            households_per_cell: 10,
            noise_sd: 0.0,
            ..SimConfig::default()
        };
        let report = recovery_experiment(&cfg, 3).unwrap();
        assert!(report.bias.abs() < 1e-6);
        assert_eq!(report.coverage_95, 1.0);
        assert_eq!(report.rejection_rate_05, 1.0);
        assert!(report.rmse < 1e-6);
    }

    #[test]
    fn recovery_rmse_shrinks_with_sample_size() {
        // Estimator consistency: more households per cell, same noise,
        // lower RMSE. Sizes are small to keep the suite fast; the full
        // calibration run lives in the acceptance tests.
        let rmse_at = |n: usize| {
            let cfg = SimConfig {
                households_per_cell: n,
                noise_sd: 6000.0,
                ..SimConfig::default()
            };
            recovery_experiment(&cfg, 40).unwrap().rmse
        };
        let (small, medium, large) = (rmse_at(20), rmse_at(80), rmse_at(320));
        assert!(
            small > medium && medium > large,
            "RMSE not monotone: {small} {medium} {large}"
        );
    }

    #[test]
    fn too_few_replications_rejected() {
        let err = recovery_experiment(&SimConfig::default(), 1).unwrap_err();
        assert!(matches!(err, SimError::BadConfig(_)));
    }
}
