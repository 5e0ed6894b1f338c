//! Load-binned stationary weight sums.
//!
//! Every performance measure of the model depends on the unnormalized
//! stationary weights only through two families of sums indexed by the slot
//! load `y`: the total weight of states with load `y`, and for each class
//! the weight of those states that also have at least one connection of
//! that class. One enumeration pass fills both, and measures for any
//! capacity up to the enumerated one follow from the bins, since a state's
//! weight does not depend on the capacity.

use crate::logspace::{log_sum_exp, LogSum};
use crate::mobility::{drop_branch_weight, flow_conservation_weights};
use crate::model::{CellScenario, TransitionRates};
use crate::report::PerformanceReport;

#[derive(Debug, Clone)]
pub struct LoadProfile {
    zones: usize,
    slots: Vec<u32>,
    scale: Vec<f64>,
    total: Vec<f64>,
    /// `occupied[y * zones + z]`
    occupied: Vec<f64>,
    states: u64,
}

impl LoadProfile {
    pub(crate) fn new(slots: &[u32], max_load: u32) -> Self {
        let bins = max_load as usize + 1;
        Self {
            zones: slots.len(),
            slots: slots.to_vec(),
            scale: vec![f64::NEG_INFINITY; bins],
            total: vec![0.0; bins],
            occupied: vec![0.0; bins * slots.len()],
            states: 0,
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, counts: &[u32], load: u32, log_weight: f64) {
        self.states += 1;
        if log_weight == f64::NEG_INFINITY {
            return;
        }
        let y = load as usize;
        let occupied = &mut self.occupied[y * self.zones..(y + 1) * self.zones];
        let w = if log_weight > self.scale[y] {
            let factor = (self.scale[y] - log_weight).exp();
            self.total[y] *= factor;
            occupied.iter_mut().for_each(|o| *o *= factor);
            self.scale[y] = log_weight;
            1.0
        } else {
            (log_weight - self.scale[y]).exp()
        };
        self.total[y] += w;
        for (o, &n) in occupied.iter_mut().zip(counts) {
            if n > 0 {
                *o += w;
            }
        }
    }

    /// Number of states visited while filling the profile.
    pub fn states(&self) -> u64 {
        self.states
    }

    pub fn max_load(&self) -> u32 {
        (self.total.len() - 1) as u32
    }

    /// `ln` of the summed weight of states with load `y`.
    pub fn log_bin(&self, y: u32) -> f64 {
        let y = y as usize;
        ln_scaled(self.total[y], self.scale[y])
    }

    fn log_occupied(&self, y: u32, z: usize) -> f64 {
        let y = y as usize;
        ln_scaled(self.occupied[y * self.zones + z], self.scale[y])
    }

    /// `ln` of the normalization constant for a capacity of `capacity` slots.
    pub fn log_normalizer(&self, capacity: u32) -> f64 {
        assert!(capacity <= self.max_load(), "capacity beyond the enumerated range");
        log_sum_exp((0..=capacity).map(|y| self.log_bin(y)))
    }

    /// Log of the weight in bins `(lower, capacity]`, with a negative lower
    /// bound meaning "everything".
    fn log_tail(&self, lower: i64, capacity: u32, bin: impl Fn(u32) -> f64) -> f64 {
        let start = if lower < 0 { 0 } else { (lower + 1) as u32 };
        log_sum_exp((start..=capacity).map(bin))
    }

    /// All measures for a cell of `capacity` slots with the given mobility.
    pub fn report(&self, scenario: &CellScenario, capacity: u32) -> PerformanceReport {
        debug_assert_eq!(scenario.slots(), &self.slots[..]);
        let log_z = self.log_normalizer(capacity);
        let cap = i64::from(capacity);

        let per_zone_rejection: Vec<f64> = self
            .slots
            .iter()
            .map(|&c| {
                let tail = self.log_tail(cap - i64::from(c), capacity, |y| self.log_bin(y));
                (tail - log_z).exp().min(1.0)
            })
            .collect();
        let blocking_rate = per_zone_rejection
            .iter()
            .enumerate()
            .map(|(z, p)| scenario.area_fraction(z) * p)
            .sum::<f64>()
            .min(1.0);

        let mut load_sum = LogSum::default();
        for y in 1..=capacity {
            load_sum.add(f64::from(y).ln() + self.log_bin(y));
        }
        let mean_bandwidth_slots = (load_sum.value() - log_z).exp();

        let drops = self.dropping(scenario.rates(), capacity);
        PerformanceReport {
            capacity_slots: capacity,
            unit_slots: self.slots[0],
            blocking_rate,
            per_zone_rejection,
            mean_bandwidth_slots,
            dropping_rate: drops.rate,
            drop_probability_by_class: drops.by_class,
            dropping_defined: drops.defined,
            state_count: None,
        }
    }

    fn dropping(&self, rates: &TransitionRates, capacity: u32) -> Drops {
        let zones = self.zones;
        let mut by_class = vec![0.0; zones];
        let weights = match flow_conservation_weights(rates) {
            Some(w) if zones >= 2 && !rates.is_zero() => w,
            _ => {
                return Drops {
                    rate: 0.0,
                    by_class,
                    defined: false,
                }
            }
        };
        let cap = i64::from(capacity);
        for m in 1..zones {
            let log_occupied = self.log_tail(-1, capacity, |y| self.log_occupied(y, m));
            if log_occupied == f64::NEG_INFINITY {
                continue;
            }
            let mut p = 0.0;
            for j in 0..m {
                let branch = drop_branch_weight(rates, m, j);
                if branch == 0.0 {
                    continue;
                }
                let lower = cap - i64::from(self.slots[j]) + i64::from(self.slots[m]);
                let tail = self.log_tail(lower, capacity, |y| self.log_occupied(y, m));
                p += branch * (tail - log_occupied).exp();
            }
            by_class[m] = p.min(1.0);
        }
        let rate = (1..zones).map(|m| weights[m - 1] * by_class[m]).sum::<f64>().min(1.0);
        Drops {
            rate,
            by_class,
            defined: true,
        }
    }
}

struct Drops {
    rate: f64,
    by_class: Vec<f64>,
    defined: bool,
}

#[inline]
fn ln_scaled(sum: f64, scale: f64) -> f64 {
    if sum > 0.0 {
        sum.ln() + scale
    } else {
        f64::NEG_INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_accumulate_in_log_space() {
        let mut profile = LoadProfile::new(&[2, 1], 4);
        profile.add(&[0, 0], 0, 0.0);
        profile.add(&[1, 0], 2, 500.0);
        profile.add(&[0, 2], 2, 501.0);
        assert_eq!(profile.states(), 3);
        assert!((profile.log_bin(2) - (501.0 + (1.0 + (-1f64).exp()).ln())).abs() < 1e-12);
        assert_eq!(profile.log_bin(1), f64::NEG_INFINITY);
        assert!((profile.log_occupied(2, 0) - 500.0).abs() < 1e-12);
        assert!((profile.log_occupied(2, 1) - 501.0).abs() < 1e-12);
    }
}
