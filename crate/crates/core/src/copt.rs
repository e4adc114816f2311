//! Capacity Outage Probability Tables.
//!
//! A [`Copt`] enumerates total-capacity-on-outage levels with exact
//! probabilities, built by convolving the two-state outage distribution of
//! each unit. Outage levels are tracked on a fixed 1e-6 MW integer lattice
//! so that merging equal levels is exact and independent of unit order.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::fleet::Fleet;

/// Integer lattice resolution for outage levels: 1e-6 MW.
const KEY_SCALE: f64 = 1e6;

fn to_key(mw: f64) -> i64 {
    (mw * KEY_SCALE).round() as i64
}

fn from_key(key: i64) -> f64 {
    key as f64 / KEY_SCALE
}

/// Outage-level merging mode for [`Copt::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rounding {
    /// Keep every reachable outage level distinct.
    Exact,
    /// Snap outage levels to the nearest multiple of the increment while
    /// convolving, bounding table size for large fleets.
    IncrementMw(f64),
}

#[derive(Debug, Error)]
pub enum CoptError {
    #[error("fleet of {units} units exceeds the exhaustive enumeration bound of {max}")]
    FleetTooLarge { units: usize, max: usize },
    #[error("{0}")]
    Domain(String),
}

/// One outage state: `outage_mw` out of service with probability `prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoptState {
    pub outage_mw: f64,
    pub available_mw: f64,
    /// Exact state probability.
    pub prob: f64,
    /// P(outage >= this state's outage): non-increasing in outage order.
    pub cum_prob: f64,
}

/// Capacity outage probability table, states in ascending outage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Copt {
    states: Vec<CoptState>,
    installed_mw: f64,
}

impl Copt {
    /// Builds the table by sequential unit-addition convolution:
    /// `new(x) = old(x) * (1 - q) + old(x - c) * q`.
    pub fn build(fleet: &Fleet, rounding: Rounding) -> Result<Self, CoptError> {
        let inc_key = match rounding {
            Rounding::Exact => 1,
            Rounding::IncrementMw(mw) => {
                if !(mw > 0.0 && mw.is_finite()) {
                    return Err(CoptError::Domain(format!(
                        "rounding increment {mw} must be positive"
                    )));
                }
                to_key(mw).max(1)
            }
        };
        let snap = |key: i64| -> i64 {
            if inc_key == 1 {
                key
            } else {
                (key + inc_key / 2) / inc_key * inc_key
            }
        };

        let mut dist: BTreeMap<i64, f64> = BTreeMap::new();
        dist.insert(0, 1.0);
        let mut total_key: i64 = 0;
        for unit in fleet.units() {
            let cap_key = to_key(unit.capacity_mw);
            total_key += cap_key;
            let q = unit.forced_outage_rate;
            let mut next: BTreeMap<i64, f64> = BTreeMap::new();
            for (&key, &p) in &dist {
                if q < 1.0 {
                    *next.entry(key).or_insert(0.0) += p * (1.0 - q);
                }
                if q > 0.0 {
                    *next.entry(snap(key + cap_key)).or_insert(0.0) += p * q;
                }
            }
            dist = next;
        }
        Ok(Self::from_distribution(dist, total_key))
    }

    /// Test oracle: enumerates every unit on/off combination directly.
    /// Produces the same merged, sorted table format as [`Copt::build`].
    pub fn brute_force(fleet: &Fleet) -> Result<Self, CoptError> {
        const MAX_UNITS: usize = 20;
        let n = fleet.len();
        if n > MAX_UNITS {
            return Err(CoptError::FleetTooLarge {
                units: n,
                max: MAX_UNITS,
            });
        }
        let keys: Vec<i64> = fleet.units().iter().map(|u| to_key(u.capacity_mw)).collect();
        let total_key: i64 = keys.iter().sum();
        let mut outcomes: Vec<(i64, f64)> = Vec::with_capacity(1 << n);
        for mask in 0u32..(1u32 << n) {
            let mut outage = 0i64;
            let mut prob = 1.0;
            for (i, unit) in fleet.units().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    outage += keys[i];
                    prob *= unit.forced_outage_rate;
                } else {
                    prob *= 1.0 - unit.forced_outage_rate;
                }
            }
            outcomes.push((outage, prob));
        }
        // Group equal outage levels before summing so accumulation order is
        // deterministic.
        outcomes.sort_by_key(|&(key, _)| key);
        let mut dist: BTreeMap<i64, f64> = BTreeMap::new();
        for (key, prob) in outcomes {
            if prob > 0.0 {
                *dist.entry(key).or_insert(0.0) += prob;
            }
        }
        Ok(Self::from_distribution(dist, total_key))
    }

    fn from_distribution(dist: BTreeMap<i64, f64>, total_key: i64) -> Self {
        let installed_mw = from_key(total_key);
        let mut states: Vec<CoptState> = dist
            .into_iter()
            .map(|(key, prob)| {
                let outage_mw = from_key(key);
                CoptState {
                    outage_mw,
                    available_mw: installed_mw - outage_mw,
                    prob,
                    cum_prob: 0.0,
                }
            })
            .collect();
        fill_cum_prob(&mut states);
        Self {
            states,
            installed_mw,
        }
    }

    /// Applies the cyber de-rating transform with compromise factor `delta`:
    /// every nonzero-outage state's probability is inflated by `(1 + delta)`,
    /// every state's available capacity shrinks by `(1 - delta)`, then the
    /// table is renormalized to sum 1 and outage is recomputed as
    /// `installed - available`. `delta = 0` returns the table unchanged.
    pub fn apply_cyber_derating(&self, delta: f64) -> Result<Self, CoptError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(CoptError::Domain(format!(
                "derating factor {delta} must be within [0, 1]"
            )));
        }
        if delta == 0.0 {
            return Ok(self.clone());
        }
        let mut states: Vec<CoptState> = self
            .states
            .iter()
            .map(|s| {
                let prob = if s.outage_mw > 0.0 {
                    s.prob * (1.0 + delta)
                } else {
                    s.prob
                };
                let available_mw = s.available_mw * (1.0 - delta);
                CoptState {
                    outage_mw: self.installed_mw - available_mw,
                    available_mw,
                    prob,
                    cum_prob: 0.0,
                }
            })
            .collect();
        let total: f64 = states.iter().map(|s| s.prob).sum();
        for s in &mut states {
            s.prob /= total;
        }
        fill_cum_prob(&mut states);
        Ok(Self {
            states,
            installed_mw: self.installed_mw,
        })
    }

    pub fn states(&self) -> &[CoptState] {
        &self.states
    }

    pub fn installed_mw(&self) -> f64 {
        self.installed_mw
    }

    pub fn total_prob(&self) -> f64 {
        self.states.iter().map(|s| s.prob).sum()
    }

    /// CSV export: `outage_mw,available_mw,prob,cum_prob`, ascending outage.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "outage_mw,available_mw,prob,cum_prob")?;
        for s in &self.states {
            writeln!(w, "{},{},{},{}", s.outage_mw, s.available_mw, s.prob, s.cum_prob)?;
        }
        Ok(())
    }
}

/// Suffix sums in stored order: cum(k) = sum of prob(j) for j >= k.
fn fill_cum_prob(states: &mut [CoptState]) {
    let mut cum = 0.0;
    for s in states.iter_mut().rev() {
        cum += s.prob;
        s.cum_prob = cum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::GeneratorUnit;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn fleet(units: &[(f64, f64)]) -> Fleet {
        Fleet::new(
            units
                .iter()
                .enumerate()
                .map(|(i, &(c, q))| GeneratorUnit::new(format!("u{i}"), c, q, false))
                .collect(),
        )
        .unwrap()
    }

    fn random_fleet(rng: &mut StdRng, max_units: usize) -> Fleet {
        let n = rng.random_range(1..=max_units);
        fleet(
            &(0..n)
                .map(|_| {
                    (
                        (rng.random_range(1..=40) as f64) * 12.5,
                        rng.random::<f64>() * 0.5,
                    )
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn single_unit_table() {
        let c = Copt::build(&fleet(&[(100.0, 0.05)]), Rounding::Exact).unwrap();
        assert_eq!(c.states().len(), 2);
        assert_eq!(c.states()[0].outage_mw, 0.0);
        assert_eq!(c.states()[0].prob, 0.95);
        assert_eq!(c.states()[0].available_mw, 100.0);
        assert_eq!(c.states()[1].outage_mw, 100.0);
        assert_eq!(c.states()[1].prob, 0.05);
        assert_eq!(c.states()[1].available_mw, 0.0);
        assert_eq!(c.states()[0].cum_prob, 1.0);
    }

    #[test]
    fn two_identical_units_merge_states() {
        let c = Copt::build(&fleet(&[(100.0, 0.1), (100.0, 0.1)]), Rounding::Exact).unwrap();
        let got: Vec<(f64, f64)> = c.states().iter().map(|s| (s.outage_mw, s.prob)).collect();
        assert_eq!(got.len(), 3);
        assert_eq!(got[0].0, 0.0);
        assert!((got[0].1 - 0.81).abs() < 1e-15);
        assert_eq!(got[1].0, 100.0);
        assert!((got[1].1 - 0.18).abs() < 1e-15);
        assert_eq!(got[2].0, 200.0);
        assert!((got[2].1 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn brute_force_matches_build_for_one_unit() {
        let f = fleet(&[(100.0, 0.05)]);
        let a = Copt::build(&f, Rounding::Exact).unwrap();
        let b = Copt::brute_force(&f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn brute_force_bound_enforced() {
        let units: Vec<(f64, f64)> = (0..21).map(|_| (10.0, 0.1)).collect();
        let err = Copt::brute_force(&fleet(&units)).unwrap_err();
        assert!(matches!(err, CoptError::FleetTooLarge { units: 21, max: 20 }));
    }

    #[test]
    fn oracle_equivalence_on_random_fleets() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..25 {
            let f = random_fleet(&mut rng, 12);
            let a = Copt::build(&f, Rounding::Exact).unwrap();
            let b = Copt::brute_force(&f).unwrap();
            assert_eq!(a.states().len(), b.states().len());
            for (x, y) in a.states().iter().zip(b.states()) {
                assert_eq!(x.outage_mw, y.outage_mw);
                assert!((x.prob - y.prob).abs() < 1e-12);
            }
            assert!((a.total_prob() - 1.0).abs() < 1e-12);
            assert!((b.total_prob() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn build_is_order_invariant() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..10 {
            let f = random_fleet(&mut rng, 10);
            let base = Copt::build(&f, Rounding::Exact).unwrap();
            let mut units = f.units().to_vec();
            for i in (1..units.len()).rev() {
                units.swap(i, rng.random_range(0..=i));
            }
            let shuffled = Copt::build(&Fleet::new(units).unwrap(), Rounding::Exact).unwrap();
            assert_eq!(base.states().len(), shuffled.states().len());
            for (x, y) in base.states().iter().zip(shuffled.states()) {
                assert_eq!(x.outage_mw, y.outage_mw);
                assert!((x.prob - y.prob).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cum_prob_non_increasing_and_starts_at_one() {
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..10 {
            let c = Copt::build(&random_fleet(&mut rng, 10), Rounding::Exact).unwrap();
            assert!((c.states()[0].cum_prob - 1.0).abs() < 1e-12);
            assert_eq!(c.states()[0].outage_mw, 0.0);
            for pair in c.states().windows(2) {
                assert!(pair[0].outage_mw < pair[1].outage_mw);
                assert!(pair[0].cum_prob >= pair[1].cum_prob);
            }
            for s in c.states() {
                assert!(
                    (s.outage_mw + s.available_mw - c.installed_mw()).abs()
                        < 1e-9 * c.installed_mw().max(1.0)
                );
            }
        }
    }

    #[test]
    fn always_failed_units_shift_the_floor_state() {
        // q = 1 everywhere: the only state is full outage.
        let c = Copt::build(&fleet(&[(100.0, 1.0), (50.0, 1.0)]), Rounding::Exact).unwrap();
        assert_eq!(c.states().len(), 1);
        assert_eq!(c.states()[0].outage_mw, 150.0);
        assert_eq!(c.states()[0].prob, 1.0);
        assert_eq!(c, Copt::brute_force(&fleet(&[(100.0, 1.0), (50.0, 1.0)])).unwrap());

        // One dead unit among live ones: minimum outage is its capacity.
        let c = Copt::build(&fleet(&[(100.0, 1.0), (50.0, 0.1)]), Rounding::Exact).unwrap();
        assert_eq!(c.states()[0].outage_mw, 100.0);
        assert!((c.total_prob() - 1.0).abs() < 1e-12);
        assert_eq!(c, Copt::brute_force(&fleet(&[(100.0, 1.0), (50.0, 0.1)])).unwrap());
    }

    #[test]
    fn rounding_mode_merges_to_increment() {
        let f = fleet(&[(100.0, 0.1), (103.0, 0.1), (51.0, 0.2)]);
        let c = Copt::build(&f, Rounding::IncrementMw(50.0)).unwrap();
        for s in c.states() {
            let ratio = s.outage_mw / 50.0;
            assert!((ratio - ratio.round()).abs() < 1e-9, "outage {}", s.outage_mw);
        }
        assert!((c.total_prob() - 1.0).abs() < 1e-12);
        assert!(Copt::build(&f, Rounding::IncrementMw(0.0)).is_err());
    }

    #[test]
    fn derating_zero_is_bit_identical() {
        let c = Copt::build(&fleet(&[(100.0, 0.05), (50.0, 0.1)]), Rounding::Exact).unwrap();
        let d = c.apply_cyber_derating(0.0).unwrap();
        assert_eq!(c, d);
        for (a, b) in c.states().iter().zip(d.states()) {
            assert_eq!(a.prob.to_bits(), b.prob.to_bits());
        }
    }

    #[test]
    fn derating_matches_hand_evaluation() {
        let c = Copt::build(&fleet(&[(100.0, 0.05)]), Rounding::Exact).unwrap();
        let d = c.apply_cyber_derating(0.05).unwrap();
        // probs (0.95, 0.05 * 1.05) renormalized by 1.0025
        assert!((d.states()[0].prob - 0.95 / 1.0025).abs() < 1e-15);
        assert!((d.states()[1].prob - 0.0525 / 1.0025).abs() < 1e-15);
        assert!((d.states()[0].prob - 0.947_630_922_693_266_9).abs() < 1e-12);
        assert!((d.states()[1].prob - 0.052_369_077_306_733_17).abs() < 1e-12);
        // available (100, 0) -> (95, 0); outage reinterpreted
        assert_eq!(d.states()[0].available_mw, 95.0);
        assert_eq!(d.states()[1].available_mw, 0.0);
        assert_eq!(d.states()[0].outage_mw, 5.0);
        assert_eq!(d.states()[1].outage_mw, 100.0);
        assert!((d.total_prob() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_derating_zeroes_available_and_shrinks_zero_state_share() {
        let c = Copt::build(&fleet(&[(100.0, 0.05), (50.0, 0.1)]), Rounding::Exact).unwrap();
        let d = c.apply_cyber_derating(1.0).unwrap();
        for s in d.states() {
            assert_eq!(s.available_mw, 0.0);
            assert_eq!(s.outage_mw, c.installed_mw());
        }
        // The zero-outage state is the only one not inflated, so its share drops.
        assert!(d.states()[0].prob < c.states()[0].prob);
        for (orig, der) in c.states().iter().zip(d.states()).skip(1) {
            assert!(der.prob >= orig.prob);
        }
        assert!((d.total_prob() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derating_rejects_out_of_range_delta() {
        let c = Copt::build(&fleet(&[(100.0, 0.05)]), Rounding::Exact).unwrap();
        assert!(c.apply_cyber_derating(-0.1).is_err());
        assert!(c.apply_cyber_derating(1.1).is_err());
    }

    #[test]
    fn normalization_survives_build_and_derating() {
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..10 {
            let c = Copt::build(&random_fleet(&mut rng, 11), Rounding::Exact).unwrap();
            assert!((c.total_prob() - 1.0).abs() < 1e-12);
            for delta in [0.02, 0.05, 0.2, 0.7] {
                let d = c.apply_cyber_derating(delta).unwrap();
                assert!((d.total_prob() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_schema() {
        let c = Copt::build(&fleet(&[(100.0, 0.05)]), Rounding::Exact).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("outage_mw,available_mw,prob,cum_prob"));
        assert_eq!(lines.next(), Some("0,100,0.95,1"));
        assert_eq!(lines.next(), Some("100,0,0.05,0.05"));
    }
}
