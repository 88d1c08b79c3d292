//! Treatment-effect estimation on the balanced panel.
//!
//! The regression is
//!
//! ```text
//! y_it = β₀ + β₁·group_i + β₂·wave_t + β₃·(group_i × wave_t) + Z′_it·β₄ + ε_it
//! ```
//!
//! with y the household's daily CO₂ grams. β₃ — the coefficient on the
//! group×wave interaction — is the difference-in-differences estimate of
//! the treatment effect. With no covariates the model is saturated and
//! β₃ equals the four-cell-mean contrast `(μ₁₁−μ₁₀) − (μ₀₁−μ₀₀)` exactly;
//! the covariate ladder (vehicle count, household size, income dummies)
//! adjusts it for composition differences between the groups.
//!
//! Also here: per-wave experimental-vs-control contrast rows, paired
//! within-group wave changes, and the catchment-radius sensitivity sweep
//! (which relabels the stored distances and refits — screening and
//! emissions are radius-independent).

use serde::Serialize;
use thiserror::Error;

use crate::config::{CovariateSpec, Length, TtestVariant};
use crate::panel::{assign_group, BalancedPanel, GroupLabel, PanelObservation};
use crate::stats::{ols_fit, paired_t, two_sample_t, OlsFit, StatsError, TestResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("every observation was dropped building the design matrix")]
    AllRowsDropped,
    #[error("no {group} observations in wave {wave}")]
    EmptyGroup { group: &'static str, wave: u8 },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// The published model ladder: cumulative covariate sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ModelId {
    Model1,
    Model2,
    Model3,
    Model4,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [
        ModelId::Model1,
        ModelId::Model2,
        ModelId::Model3,
        ModelId::Model4,
    ];

    pub fn number(self) -> u8 {
        match self {
            ModelId::Model1 => 1,
            ModelId::Model2 => 2,
            ModelId::Model3 => 3,
            ModelId::Model4 => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "1" | "model1" => Some(ModelId::Model1),
            "2" | "model2" => Some(ModelId::Model2),
            "3" | "model3" => Some(ModelId::Model3),
            "4" | "model4" => Some(ModelId::Model4),
            _ => None,
        }
    }

    /// Covariates the model adds on top of the group/wave/interaction core.
    pub fn covariates(self) -> CovariateSpec {
        match self {
            ModelId::Model1 => CovariateSpec::EMPTY,
            ModelId::Model2 => CovariateSpec {
                veh_cnt: true,
                ppl_cnt: false,
                income_dummies: false,
            },
            ModelId::Model3 => CovariateSpec {
                veh_cnt: true,
                ppl_cnt: true,
                income_dummies: false,
            },
            ModelId::Model4 => CovariateSpec {
                veh_cnt: true,
                ppl_cnt: true,
                income_dummies: true,
            },
        }
    }
}

/// Group-by-wave outcome means over the rows a fit actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellMeans {
    /// Control, wave 1.
    pub mu00: f64,
    /// Experimental, wave 1.
    pub mu10: f64,
    /// Control, wave 2.
    pub mu01: f64,
    /// Experimental, wave 2.
    pub mu11: f64,
}

impl CellMeans {
    /// The four-mean contrast the saturated regression reproduces.
    pub fn did(&self) -> f64 {
        (self.mu11 - self.mu10) - (self.mu01 - self.mu00)
    }
}

/// A fitted difference-in-differences regression.
#[derive(Debug, Clone, Serialize)]
pub struct DidFit {
    /// Design columns in coefficient order.
    pub column_names: Vec<String>,
    pub ols: OlsFit,
    pub cell_means: CellMeans,
    /// Rows used after any missing-income drops.
    pub n_used: usize,
    pub n_dropped: usize,
}

impl DidFit {
    pub fn beta_group(&self) -> f64 {
        self.ols.coefficients[1]
    }

    pub fn beta_wave(&self) -> f64 {
        self.ols.coefficients[2]
    }

    /// β₃, the treatment effect.
    pub fn treatment_effect(&self) -> f64 {
        self.ols.coefficients[3]
    }

    pub fn treatment_se(&self) -> f64 {
        self.ols.standard_errors[3]
    }

    pub fn treatment_p(&self) -> f64 {
        self.ols.p_values[3]
    }
}

/// A per-wave experimental-vs-control comparison of one metric.
#[derive(Debug, Clone, Serialize)]
pub struct ContrastRow {
    pub metric: &'static str,
    pub wave: u8,
    pub experimental_mean: f64,
    pub control_mean: f64,
    /// experimental − control.
    pub difference: f64,
    /// 100 × difference / control mean; `None` when the control mean is 0.
    pub percent_difference: Option<f64>,
    pub p_two_sided: f64,
    pub n_experimental: usize,
    pub n_control: usize,
}

/// Panel metrics the contrast and change tables can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    DailyCo2,
    DailyVmt,
    CarTrips,
    BusTrips,
    TrainTrips,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::DailyCo2,
        Metric::DailyVmt,
        Metric::CarTrips,
        Metric::BusTrips,
        Metric::TrainTrips,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::DailyCo2 => "daily_co2_g",
            Metric::DailyVmt => "daily_vmt",
            Metric::CarTrips => "car_trips_per_day",
            Metric::BusTrips => "bus_trips_per_day",
            Metric::TrainTrips => "train_trips_per_day",
        }
    }

    pub fn extract(self, o: &PanelObservation) -> f64 {
        match self {
            Metric::DailyCo2 => o.daily_co2_g,
            Metric::DailyVmt => o.daily_vmt,
            Metric::CarTrips => o.car_trips_per_day,
            Metric::BusTrips => o.bus_trips_per_day,
            Metric::TrainTrips => o.train_trips_per_day,
        }
    }
}

/// Names for the design columns `spec` produces, in order.
pub fn design_column_names(spec: &CovariateSpec) -> Vec<String> {
    let mut names = vec![
        "intercept".to_string(),
        "experimental".to_string(),
        "wave2".to_string(),
        "experimental_x_wave2".to_string(),
    ];
    names.extend(spec.column_names());
    names
}

/// Design rows, outcome vector, and the count of observations dropped
/// for a missing income bracket.
pub type DidDesign = (Vec<Vec<f64>>, Vec<f64>, usize);

/// Build the regression inputs: one row per observation, columns
/// `[intercept, group, wave, group×wave, covariates…]`, outcome = daily
/// CO₂ grams. Observations missing an income bracket are dropped only
/// when income dummies are requested; the dropped count is returned.
pub fn did_design_matrix(
    panel: &BalancedPanel,
    spec: &CovariateSpec,
) -> Result<DidDesign, EvalError> {
    let mut x_rows = Vec::with_capacity(panel.observations.len());
    let mut y = Vec::with_capacity(panel.observations.len());
    let mut dropped = 0usize;

    for o in &panel.observations {
        let income = match (spec.income_dummies, o.income_bracket) {
            (true, None) => {
                dropped += 1;
                continue;
            }
            (true, Some(b)) => Some(b),
            (false, _) => None,
        };

        let group = o.group.code();
        let wave = o.wave_code();
        let mut row = vec![1.0, group, wave, group * wave];
        if spec.veh_cnt {
            row.push(f64::from(o.veh_cnt));
        }
        if spec.ppl_cnt {
            row.push(f64::from(o.ppl_cnt));
        }
        if spec.income_dummies {
            let b = income.expect("checked above");
            for bracket in 2..=6u8 {
                row.push(if b == bracket { 1.0 } else { 0.0 });
            }
        }
        x_rows.push(row);
        y.push(o.daily_co2_g);
    }

    if x_rows.is_empty() {
        return Err(EvalError::AllRowsDropped);
    }
    Ok((x_rows, y, dropped))
}

/// Group-by-wave means of the outcome over the rows the fit used.
fn cell_means_of(rows: &[(GroupLabel, u8, f64)]) -> CellMeans {
    let mean_of = |group: GroupLabel, wave: u8| {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|(g, w, _)| *g == group && *w == wave)
            .map(|(_, _, y)| *y)
            .collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    CellMeans {
        mu00: mean_of(GroupLabel::Control, 1),
        mu10: mean_of(GroupLabel::Experimental, 1),
        mu01: mean_of(GroupLabel::Control, 2),
        mu11: mean_of(GroupLabel::Experimental, 2),
    }
}

/// Fit the difference-in-differences regression with the given covariates.
pub fn did_fit(panel: &BalancedPanel, spec: &CovariateSpec) -> Result<DidFit, EvalError> {
    let (x_rows, y, dropped) = did_design_matrix(panel, spec)?;
    let ols = ols_fit(&x_rows, &y)?;

    // Recover the cell assignment of each used row from its design
    // columns — rows were filtered, so indexes into the panel won't do.
    let used: Vec<(GroupLabel, u8, f64)> = x_rows
        .iter()
        .zip(&y)
        .map(|(row, &yv)| {
            let group = if row[1] == 1.0 {
                GroupLabel::Experimental
            } else {
                GroupLabel::Control
            };
            let wave = if row[2] == 1.0 { 2u8 } else { 1u8 };
            (group, wave, yv)
        })
        .collect();

    Ok(DidFit {
        column_names: design_column_names(spec),
        cell_means: cell_means_of(&used),
        n_used: y.len(),
        n_dropped: dropped,
        ols,
    })
}

/// Experimental vs. control for one metric in one wave: means,
/// difference, percent of the control mean, and a two-sample p-value.
pub fn group_contrast_table(
    panel: &BalancedPanel,
    metric: Metric,
    wave: u8,
    variant: TtestVariant,
) -> Result<ContrastRow, EvalError> {
    let values = |group: GroupLabel| -> Vec<f64> {
        panel
            .cell(group, wave)
            .iter()
            .map(|o| metric.extract(o))
            .collect()
    };
    let xs = values(GroupLabel::Experimental);
    let ys = values(GroupLabel::Control);
    if xs.is_empty() {
        return Err(EvalError::EmptyGroup {
            group: GroupLabel::Experimental.as_str(),
            wave,
        });
    }
    if ys.is_empty() {
        return Err(EvalError::EmptyGroup {
            group: GroupLabel::Control.as_str(),
            wave,
        });
    }

    let test = two_sample_t(&xs, &ys, variant)?;
    let difference = test.mean_x - test.mean_y;
    let percent_difference = if test.mean_y == 0.0 {
        None
    } else {
        Some(100.0 * difference / test.mean_y)
    };
    Ok(ContrastRow {
        metric: metric.as_str(),
        wave,
        experimental_mean: test.mean_x,
        control_mean: test.mean_y,
        difference,
        percent_difference,
        p_two_sided: test.p_two_sided,
        n_experimental: xs.len(),
        n_control: ys.len(),
    })
}

/// Paired t-test on per-household (wave 2 − wave 1) changes of one
/// metric within one group.
pub fn within_group_change(
    panel: &BalancedPanel,
    group: GroupLabel,
    metric: Metric,
) -> Result<TestResult, EvalError> {
    // Observations are sorted by (household, wave): consecutive pairs.
    let mut diffs = Vec::new();
    for pair in panel.observations.chunks_exact(2) {
        if pair[0].group == group {
            debug_assert_eq!(pair[0].household_id, pair[1].household_id);
            diffs.push(metric.extract(&pair[1]) - metric.extract(&pair[0]));
        }
    }
    if diffs.is_empty() {
        return Err(EvalError::EmptyGroup {
            group: group.as_str(),
            wave: 0,
        });
    }
    Ok(paired_t(&diffs)?)
}

/// One radius of the sensitivity sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityRow {
    /// The radius exactly as requested (original unit preserved).
    pub radius: Length,
    pub radius_mi: f64,
    /// Households (not observations) per group under this radius.
    pub n_experimental_households: usize,
    pub n_control_households: usize,
    pub fit: DidFit,
}

/// Refit the model at alternative catchment radii by relabelling the
/// stored station distances. Screening and emissions do not depend on
/// the radius, so the panel is reused as-is; only the group column
/// changes. Output order follows the input radii.
pub fn sensitivity_sweep(
    panel: &BalancedPanel,
    radii: &[Length],
    spec: &CovariateSpec,
) -> Result<Vec<SensitivityRow>, EvalError> {
    let mut rows = Vec::with_capacity(radii.len());
    for radius in radii {
        let radius_mi = radius.to_miles();
        let mut relabeled = panel.clone();
        for o in &mut relabeled.observations {
            o.group = assign_group(o.distance_mi, radius_mi);
        }
        let fit = did_fit(&relabeled, spec)?;
        let n_experimental_households = relabeled
            .wave_observations(1)
            .filter(|o| o.group == GroupLabel::Experimental)
            .count();
        let n_control_households = relabeled.retained_count(1) - n_experimental_households;
        rows.push(SensitivityRow {
            radius: *radius,
            radius_mi,
            n_experimental_households,
            n_control_households,
            fit,
        });
    }
    Ok(rows)
}
