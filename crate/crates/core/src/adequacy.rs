//! Analytic loss-of-load metrics computed from a capacity outage table.
//!
//! Conventions: a state serves the load when `available == load` (deficit
//! requires a strict shortfall), and LOLE in days/year follows the
//! daily-peak convention unless the hourly method is named explicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::copt::Copt;
use crate::fleet::{LoadProfile, HOURS_PER_DAY};

#[derive(Debug, Error)]
pub enum AdequacyError {
    #[error("{0}")]
    Domain(String),
}

/// Which LOLE aggregation produced a breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoleMethod {
    DailyPeak,
    Hourly,
}

/// Contribution of one outage state: P_i and the duration D_i (days/year)
/// that load exceeds the state's available capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateContribution {
    pub outage_mw: f64,
    pub prob: f64,
    pub days: f64,
}

/// LOLE with its per-state decomposition: `lole_days_per_year` equals
/// the sum of `prob * days` over `per_state_contrib`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoleBreakdown {
    pub method: LoleMethod,
    pub lole_days_per_year: f64,
    pub lole_hours_per_year: f64,
    pub per_state_contrib: Vec<StateContribution>,
}

/// P(available capacity < load): the sum of state probabilities with a
/// strict shortfall at the given load level.
pub fn lolp_at_load(copt: &Copt, load_mw: f64) -> Result<f64, AdequacyError> {
    if !(load_mw >= 0.0 && load_mw.is_finite()) {
        return Err(AdequacyError::Domain(format!(
            "load {load_mw} must be non-negative"
        )));
    }
    Ok(copt
        .states()
        .iter()
        .filter(|s| s.available_mw < load_mw)
        .map(|s| s.prob)
        .sum())
}

/// Counts, for each state, how many of the sorted `loads` strictly exceed
/// the state's available capacity.
fn exceed_counts(copt: &Copt, sorted_loads: &[f64]) -> Vec<usize> {
    copt.states()
        .iter()
        .map(|s| sorted_loads.len() - sorted_loads.partition_point(|&l| l <= s.available_mw))
        .collect()
}

/// LOLE over the year's 365 daily peak loads: `sum P_i * D_i` with `D_i`
/// the number of days whose peak exceeds state i's available capacity.
pub fn lole_daily_peak(copt: &Copt, profile: &LoadProfile) -> LoleBreakdown {
    let mut peaks = profile.daily_peaks();
    peaks.sort_by(f64::total_cmp);
    let counts = exceed_counts(copt, &peaks);
    let per_state_contrib: Vec<StateContribution> = copt
        .states()
        .iter()
        .zip(&counts)
        .map(|(s, &d)| StateContribution {
            outage_mw: s.outage_mw,
            prob: s.prob,
            days: d as f64,
        })
        .collect();
    let lole_days: f64 = per_state_contrib.iter().map(|c| c.prob * c.days).sum();
    // Same quantity by the other route: summing daily-peak LOLP over days.
    debug_assert!({
        let by_days: f64 = peaks
            .iter()
            .map(|&p| lolp_at_load(copt, p).expect("peaks are non-negative"))
            .sum();
        (by_days - lole_days).abs() < 1e-9
    });
    LoleBreakdown {
        method: LoleMethod::DailyPeak,
        lole_days_per_year: lole_days,
        lole_hours_per_year: lole_days * HOURS_PER_DAY as f64,
        per_state_contrib,
    }
}

/// LOLE summed over all 8760 hourly loads; days/year is hours/24.
pub fn lole_hourly(copt: &Copt, profile: &LoadProfile) -> LoleBreakdown {
    let mut loads = profile.hourly_mw().to_vec();
    loads.sort_by(f64::total_cmp);
    let counts = exceed_counts(copt, &loads);
    let per_state_contrib: Vec<StateContribution> = copt
        .states()
        .iter()
        .zip(&counts)
        .map(|(s, &h)| StateContribution {
            outage_mw: s.outage_mw,
            prob: s.prob,
            days: h as f64 / HOURS_PER_DAY as f64,
        })
        .collect();
    let lole_hours: f64 = copt
        .states()
        .iter()
        .zip(&counts)
        .map(|(s, &h)| s.prob * h as f64)
        .sum();
    LoleBreakdown {
        method: LoleMethod::Hourly,
        lole_days_per_year: lole_hours / HOURS_PER_DAY as f64,
        lole_hours_per_year: lole_hours,
        per_state_contrib,
    }
}

/// Expected energy not served in MWh/year:
/// `sum over hours, states of prob * max(0, load - available)`.
pub fn eens(copt: &Copt, profile: &LoadProfile) -> f64 {
    // States sorted by available capacity with prefix sums of prob and
    // prob * available turn each hour into two partition lookups.
    let mut by_avail: Vec<(f64, f64)> = copt
        .states()
        .iter()
        .map(|s| (s.available_mw, s.prob))
        .collect();
    by_avail.sort_by(|a, b| a.0.total_cmp(&b.0));
    let avails: Vec<f64> = by_avail.iter().map(|x| x.0).collect();
    let mut prob_prefix = Vec::with_capacity(avails.len() + 1);
    let mut weighted_prefix = Vec::with_capacity(avails.len() + 1);
    let (mut p_acc, mut w_acc) = (0.0, 0.0);
    prob_prefix.push(0.0);
    weighted_prefix.push(0.0);
    for &(a, p) in &by_avail {
        p_acc += p;
        w_acc += p * a;
        prob_prefix.push(p_acc);
        weighted_prefix.push(w_acc);
    }
    profile
        .hourly_mw()
        .iter()
        .map(|&load| {
            let k = avails.partition_point(|&a| a < load);
            load * prob_prefix[k] - weighted_prefix[k]
        })
        .sum()
}

/// Couples an attack probability to reliability outcomes:
/// `p * lole_cyber + (1 - p) * lole_base`.
pub fn expected_lole_mixture(
    lole_base: f64,
    lole_cyber: f64,
    p_disruption: f64,
) -> Result<f64, AdequacyError> {
    if !(0.0..=1.0).contains(&p_disruption) {
        return Err(AdequacyError::Domain(format!(
            "disruption probability {p_disruption} must be within [0, 1]"
        )));
    }
    if !(lole_base >= 0.0 && lole_cyber >= 0.0) {
        return Err(AdequacyError::Domain(
            "LOLE inputs must be non-negative".into(),
        ));
    }
    Ok(p_disruption * lole_cyber + (1.0 - p_disruption) * lole_base)
}
