//! Seeded Monte Carlo year-simulation of generator states under a timed
//! cyber-attack window.
//!
//! Every unit is redrawn independently each hour: online with its nominal
//! availability outside the attack window, and with the scenario's degraded
//! availability inside the window when the unit is cyber exposed.
//!
//! Determinism contract: replication `r` draws from a substream seeded by
//! `substream_seed(seed, r)`, and draws are consumed in fixed (hour, unit)
//! order, so results are bit-identical for any number of workers. All
//! cross-replication reductions are integer sums.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fleet::{Fleet, LoadProfile, DAYS_PER_YEAR, HOURS_PER_YEAR};

#[derive(Debug, Error)]
pub enum McError {
    #[error("{0}")]
    Domain(String),
}

/// Timed cyber-attack parameters applied during Monte Carlo sampling.
///
/// `delta` does not affect sampling; it is carried alongside so a scenario
/// names one compromise factor for both the outage-table transform and the
/// simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyberScenario {
    /// Cyber compromise factor for the de-rating transform, in [0, 1].
    pub delta: f64,
    /// First hour of the attack window (0-based).
    pub window_start: u32,
    /// Window length in hours; the window is `[start, start + hours)`.
    pub window_hours: u32,
    /// Availability of cyber-exposed units inside the window.
    pub degraded_availability: f64,
    /// Optional availability override applied to every unit outside the
    /// window (and to unexposed units inside it) in place of `1 - q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_availability: Option<f64>,
}

impl CyberScenario {
    pub fn new(
        delta: f64,
        window_start: u32,
        window_hours: u32,
        degraded_availability: f64,
        nominal_availability: Option<f64>,
    ) -> Result<Self, McError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(McError::Domain(format!("delta {delta} must be in [0, 1]")));
        }
        if window_hours == 0 {
            return Err(McError::Domain("window_hours must be positive".into()));
        }
        if window_start as usize + window_hours as usize > HOURS_PER_YEAR {
            return Err(McError::Domain(format!(
                "attack window [{window_start}, {}) runs past hour {HOURS_PER_YEAR}",
                window_start as u64 + window_hours as u64
            )));
        }
        if !(0.0..=1.0).contains(&degraded_availability) {
            return Err(McError::Domain(format!(
                "degraded_availability {degraded_availability} must be in [0, 1]"
            )));
        }
        if let Some(a) = nominal_availability {
            if !(0.0..=1.0).contains(&a) {
                return Err(McError::Domain(format!(
                    "nominal_availability {a} must be in [0, 1]"
                )));
            }
        }
        Ok(Self {
            delta,
            window_start,
            window_hours,
            degraded_availability,
            nominal_availability,
        })
    }

    pub fn contains_hour(&self, hour: usize) -> bool {
        hour >= self.window_start as usize
            && hour < self.window_start as usize + self.window_hours as usize
    }
}

/// Replication count and root seed; the year length is fixed at 8760 hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub replications: usize,
    pub seed: u64,
}

/// One histogram bin of replication LOLE outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower_days: f64,
    pub count: u64,
}

/// Monte Carlo LOLE estimate across replications.
///
/// The headline sample counts a day as lost when its peak-load hour is in
/// deficit, the Monte Carlo analogue of daily-peak LOLE. The deficit-hours
/// variant (`hours in deficit / 24`) is reported alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoleEstimate {
    pub mean_days: f64,
    pub std_error_days: f64,
    pub histogram: Vec<HistogramBin>,
    /// Lost-day count of every replication, in replication order.
    pub samples_days: Vec<u32>,
    pub deficit_hours_mean_days: f64,
    pub deficit_hours_std_error_days: f64,
}

/// Hourly trace of a single simulated year.
#[derive(Debug, Clone, PartialEq)]
pub struct YearTrace {
    pub hourly_available_mw: Vec<f64>,
    pub hourly_deficit: Vec<bool>,
    pub hourly_online_fraction: Vec<f64>,
}

/// Everything one Monte Carlo run produces; the batch runner lets callers
/// compute the LOLE estimate, LOLP series and availability series from a
/// single pass over the replications.
#[derive(Debug, Clone, PartialEq)]
pub struct McOutputs {
    pub lole: LoleEstimate,
    pub lolp_series: Vec<f64>,
    pub availability_series: Vec<f64>,
}

/// SplitMix64 finalizer keyed by (root seed, replication index). Frozen:
/// changing this remaps every published seed.
fn substream_seed(root: u64, replication: u64) -> u64 {
    let mut z = root.wrapping_add(replication.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Online test against a 53-bit draw: `(next_u64() >> 11) < threshold` holds
/// with probability exactly `availability`, matching a standard 53-bit
/// uniform-[0,1) comparison bit for bit while staying in integers.
fn online_threshold(availability: f64) -> u64 {
    const TWO_POW_53: f64 = 9_007_199_254_740_992.0;
    (availability * TWO_POW_53).ceil() as u64
}

/// Per-unit sampling parameters resolved against a scenario:
/// (online threshold, capacity) pairs for in- and out-of-window hours.
struct UnitModel {
    out_window: Vec<(u64, f64)>,
    in_window: Vec<(u64, f64)>,
}

impl UnitModel {
    fn new(fleet: &Fleet, scenario: &CyberScenario) -> Self {
        let out_window: Vec<(u64, f64)> = fleet
            .units()
            .iter()
            .map(|u| {
                let avail = scenario.nominal_availability.unwrap_or(u.availability());
                (online_threshold(avail), u.capacity_mw)
            })
            .collect();
        let in_window: Vec<(u64, f64)> = fleet
            .units()
            .iter()
            .zip(&out_window)
            .map(|(u, &(t, cap))| {
                if u.cyber_exposed {
                    (online_threshold(scenario.degraded_availability), cap)
                } else {
                    (t, cap)
                }
            })
            .collect();
        Self {
            out_window,
            in_window,
        }
    }
}

/// Samples one hour for every unit in fixed order, returning the number of
/// online units and their combined capacity.
#[inline]
fn sample_hour(rng: &mut Xoshiro256PlusPlus, units: &[(u64, f64)]) -> (u32, f64) {
    let mut online = 0u32;
    let mut available = 0.0f64;
    for &(threshold, cap) in units {
        if rng.next_u64() >> 11 < threshold {
            online += 1;
            available += cap;
        }
    }
    (online, available)
}

struct RepAccum {
    deficit_counts: Vec<u64>,
    online_sums: Vec<u64>,
    /// (replication, lost days, deficit hours)
    samples: Vec<(usize, u32, u32)>,
}

impl RepAccum {
    fn new() -> Self {
        Self {
            deficit_counts: vec![0; HOURS_PER_YEAR],
            online_sums: vec![0; HOURS_PER_YEAR],
            samples: Vec::new(),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.deficit_counts.iter_mut().zip(&other.deficit_counts) {
            *a += b;
        }
        for (a, b) in self.online_sums.iter_mut().zip(&other.online_sums) {
            *a += b;
        }
        self.samples.extend(other.samples);
        self
    }
}

/// Runs one replication, accumulating integer tallies.
/// `loads`/`peak_hours` are `None` for availability-only runs.
fn run_replication(
    model: &UnitModel,
    scenario: &CyberScenario,
    loads: Option<&[f64]>,
    peak_hours: Option<&[usize]>,
    rep: usize,
    seed: u64,
    acc: &mut RepAccum,
) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(substream_seed(seed, rep as u64));
    let mut lost_days = 0u32;
    let mut deficit_hours = 0u32;
    let mut next_peak = peak_hours.map(|p| (p, 0usize));
    for hour in 0..HOURS_PER_YEAR {
        let units = if scenario.contains_hour(hour) {
            &model.in_window
        } else {
            &model.out_window
        };
        let (online, available) = sample_hour(&mut rng, units);
        acc.online_sums[hour] += online as u64;
        if let Some(loads) = loads {
            let deficit = loads[hour] > available;
            if deficit {
                acc.deficit_counts[hour] += 1;
                deficit_hours += 1;
            }
            if let Some((peaks, ref mut day)) = next_peak {
                if *day < DAYS_PER_YEAR && peaks[*day] == hour {
                    if deficit {
                        lost_days += 1;
                    }
                    *day += 1;
                }
            }
        }
    }
    acc.samples.push((rep, lost_days, deficit_hours));
}

fn run_all(
    fleet: &Fleet,
    profile: Option<&LoadProfile>,
    scenario: &CyberScenario,
    config: &McConfig,
) -> RepAccum {
    assert!(config.replications >= 1, "replications must be >= 1");
    let model = UnitModel::new(fleet, scenario);
    let loads = profile.map(|p| p.hourly_mw().to_vec());
    let peak_hours = profile.map(|p| p.daily_peak_hours());
    let mut acc = (0..config.replications)
        .into_par_iter()
        .fold(RepAccum::new, |mut acc, rep| {
            run_replication(
                &model,
                scenario,
                loads.as_deref(),
                peak_hours.as_deref(),
                rep,
                config.seed,
                &mut acc,
            );
            acc
        })
        .reduce(RepAccum::new, RepAccum::merge);
    // Fold/reduce order depends on the worker count; replication indices
    // restore a canonical order.
    acc.samples.sort_unstable_by_key(|&(rep, _, _)| rep);
    acc
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn estimate_from(acc: &RepAccum) -> LoleEstimate {
    let samples_days: Vec<u32> = acc.samples.iter().map(|&(_, lost, _)| lost).collect();
    let as_f64: Vec<f64> = samples_days.iter().map(|&x| x as f64).collect();
    let (mean_days, std_error_days) = mean_and_se(&as_f64);
    let lo = *samples_days.iter().min().expect("at least one replication");
    let hi = *samples_days.iter().max().expect("at least one replication");
    let mut histogram: Vec<HistogramBin> = (lo..=hi)
        .map(|d| HistogramBin {
            lower_days: d as f64,
            count: 0,
        })
        .collect();
    for &d in &samples_days {
        histogram[(d - lo) as usize].count += 1;
    }
    let hour_days: Vec<f64> = acc
        .samples
        .iter()
        .map(|&(_, _, dh)| dh as f64 / 24.0)
        .collect();
    let (deficit_hours_mean_days, deficit_hours_std_error_days) = mean_and_se(&hour_days);
    LoleEstimate {
        mean_days,
        std_error_days,
        histogram,
        samples_days,
        deficit_hours_mean_days,
        deficit_hours_std_error_days,
    }
}

/// Simulates a single year and returns the full hourly trace.
/// Identical `(inputs, seed)` give a bit-identical trace.
pub fn simulate_year(
    fleet: &Fleet,
    profile: &LoadProfile,
    scenario: &CyberScenario,
    seed: u64,
) -> YearTrace {
    let model = UnitModel::new(fleet, scenario);
    let units = fleet.len() as f64;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(substream_seed(seed, 0));
    let mut trace = YearTrace {
        hourly_available_mw: Vec::with_capacity(HOURS_PER_YEAR),
        hourly_deficit: Vec::with_capacity(HOURS_PER_YEAR),
        hourly_online_fraction: Vec::with_capacity(HOURS_PER_YEAR),
    };
    for hour in 0..HOURS_PER_YEAR {
        let unit_params = if scenario.contains_hour(hour) {
            &model.in_window
        } else {
            &model.out_window
        };
        let (online, available) = sample_hour(&mut rng, unit_params);
        trace.hourly_available_mw.push(available);
        trace.hourly_deficit.push(profile.hourly_mw()[hour] > available);
        trace.hourly_online_fraction.push(online as f64 / units);
    }
    trace
}

/// Runs all replications once and derives the LOLE estimate, per-hour LOLP
/// frequencies and per-hour mean online fraction together.
pub fn run_monte_carlo(
    fleet: &Fleet,
    profile: &LoadProfile,
    scenario: &CyberScenario,
    config: &McConfig,
) -> McOutputs {
    let acc = run_all(fleet, Some(profile), scenario, config);
    let reps = config.replications as f64;
    let units = fleet.len() as f64;
    McOutputs {
        lole: estimate_from(&acc),
        lolp_series: acc.deficit_counts.iter().map(|&c| c as f64 / reps).collect(),
        availability_series: acc
            .online_sums
            .iter()
            .map(|&s| s as f64 / (reps * units))
            .collect(),
    }
}

/// Monte Carlo LOLE: per replication, the number of days whose peak-load
/// hour is in deficit.
pub fn estimate_lole(
    fleet: &Fleet,
    profile: &LoadProfile,
    scenario: &CyberScenario,
    config: &McConfig,
) -> LoleEstimate {
    estimate_from(&run_all(fleet, Some(profile), scenario, config))
}

/// Per-hour deficit frequency across replications (the LOLP time series).
pub fn lolp_series(
    fleet: &Fleet,
    profile: &LoadProfile,
    scenario: &CyberScenario,
    config: &McConfig,
) -> Vec<f64> {
    let acc = run_all(fleet, Some(profile), scenario, config);
    let reps = config.replications as f64;
    acc.deficit_counts.iter().map(|&c| c as f64 / reps).collect()
}

/// Per-hour mean online fraction across replications and units. Loads are
/// irrelevant to unit states, so no profile is required; the draw order
/// matches the other runners hour for hour.
pub fn availability_series(fleet: &Fleet, scenario: &CyberScenario, config: &McConfig) -> Vec<f64> {
    let acc = run_all(fleet, None, scenario, config);
    let reps = config.replications as f64;
    let units = fleet.len() as f64;
    acc.online_sums
        .iter()
        .map(|&s| s as f64 / (reps * units))
        .collect()
}
