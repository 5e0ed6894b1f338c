//! Brute-force references: the full generator of the cell's Markov chain,
//! a dense stationary solve, and the Erlang-B formula.
//!
//! Desk scale only. The generator models exactly what the simulator does: a
//! move to a costlier MCS that does not fit drops the connection, and a
//! zone-1 user leaving the cell is a handover.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{enumerate_states, CellScenario, SystemState};

/// Largest state space [`build_generator`] accepts.
pub const GENERATOR_STATE_CAP: usize = 200_000;
/// Largest state space [`stationary_solve`] factors densely (~300 MB).
pub const DENSE_SOLVE_CAP: usize = 6_000;

/// Transition-rate matrix over the enumerated state order, stored by row.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    states: Vec<SystemState>,
    /// Off-diagonal `(column, rate)` entries per row, columns distinct.
    rows: Vec<Vec<(usize, f64)>>,
}

impl GeneratorMatrix {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `Q[i][j]`; the diagonal is minus the row's off-diagonal sum.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            -self.rows[i].iter().map(|e| e.1).sum::<f64>()
        } else {
            self.rows[i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut q = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            let mut out = 0.0;
            for &(j, r) in row {
                q[(i, j)] += r;
                out += r;
            }
            q[(i, i)] = -out;
        }
        q
    }

    /// `max_j |(πQ)_j|`.
    pub fn balance_residual(&self, pi: &[f64]) -> f64 {
        let mut flow = vec![0.0; self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, r) in row {
                flow[j] += pi[i] * r;
                flow[i] -= pi[i] * r;
            }
        }
        flow.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn push_rate(row: &mut Vec<(usize, f64)>, to: usize, rate: f64) {
    if rate <= 0.0 {
        return;
    }
    match row.iter_mut().find(|e| e.0 == to) {
        Some(e) => e.1 += rate,
        None => row.push((to, rate)),
    }
}

/// Builds the exact generator, mobility and drops included.
pub fn build_generator(scenario: &CellScenario) -> Result<GeneratorMatrix> {
    let mut states = Vec::new();
    let mut overflow = false;
    let visited = enumerate_states(scenario, |s| {
        if states.len() < GENERATOR_STATE_CAP {
            states.push(s.clone());
        } else {
            overflow = true;
        }
    });
    if overflow {
        return Err(Error::OracleCapExceeded {
            states: visited as usize,
            cap: GENERATOR_STATE_CAP,
        });
    }
    let index: HashMap<&[u32], usize> = states.iter().enumerate().map(|(i, s)| (s.counts(), i)).collect();
    let slots = scenario.slots();
    let capacity = scenario.capacity_slots();
    let rates = scenario.rates();
    let zones = scenario.zones();
    let mut counts = vec![0u32; zones];
    let mut rows = Vec::with_capacity(states.len());
    for state in &states {
        let mut row = Vec::new();
        counts.copy_from_slice(state.counts());
        let load = state.load();
        for i in 0..zones {
            if load + slots[i] <= capacity {
                counts[i] += 1;
                push_rate(&mut row, index[&counts[..]], scenario.zone_arrival_rate(i));
                counts[i] -= 1;
            }
            let n = f64::from(counts[i]);
            if counts[i] == 0 {
                continue;
            }
            counts[i] -= 1;
            let removed = index[&counts[..]];
            push_rate(&mut row, removed, n * scenario.mu());
            if i == 0 {
                push_rate(&mut row, removed, n * rates.rate(1, 0));
            }
            for j in [i.wrapping_sub(1), i + 1] {
                if j >= zones {
                    continue;
                }
                let v = rates.rate(i + 1, j + 1);
                if load - slots[i] + slots[j] <= capacity {
                    counts[j] += 1;
                    push_rate(&mut row, index[&counts[..]], n * v);
                    counts[j] -= 1;
                } else {
                    push_rate(&mut row, removed, n * v);
                }
            }
            counts[i] += 1;
        }
        rows.push(row);
    }
    Ok(GeneratorMatrix { states, rows })
}

/// Solves `πQ = 0, Σπ = 1` by replacing one balance equation with the
/// normalization and factoring densely.
pub fn stationary_solve(q: &GeneratorMatrix) -> Result<Vec<f64>> {
    let n = q.len();
    if n > DENSE_SOLVE_CAP {
        return Err(Error::OracleCapExceeded {
            states: n,
            cap: DENSE_SOLVE_CAP,
        });
    }
    let mut a = q.to_dense().transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(Error::SingularGenerator)?;
    if pi.iter().any(|p| !p.is_finite() || *p < -1e-9) {
        return Err(Error::SingularGenerator);
    }
    let mut pi: Vec<f64> = pi.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

/// Measures of the exact chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMetrics {
    pub blocking_rate: f64,
    pub per_zone_rejection: Vec<f64>,
    pub mean_bandwidth_slots: f64,
    /// Dropped MCS changes over all MCS changes of zones 2..=M, as flows.
    pub dropping_rate: f64,
}

pub fn chain_metrics(scenario: &CellScenario, q: &GeneratorMatrix, pi: &[f64]) -> ChainMetrics {
    let slots = scenario.slots();
    let capacity = i64::from(scenario.capacity_slots());
    let rates = scenario.rates();
    let zones = scenario.zones();
    let mut per_zone_rejection = vec![0.0; zones];
    let mut mean = 0.0;
    let mut drop_flow = 0.0;
    let mut trigger_flow = 0.0;
    for (state, &p) in q.states().iter().zip(pi) {
        let load = i64::from(state.load());
        mean += p * state.load() as f64;
        for (z, c) in slots.iter().enumerate() {
            if load > capacity - i64::from(*c) {
                per_zone_rejection[z] += p;
            }
        }
        for m in 1..zones {
            let n = f64::from(state.counts()[m]);
            if n == 0.0 {
                continue;
            }
            trigger_flow += p * n * rates.leaving_rate(m);
            let j = m - 1;
            if load - i64::from(slots[m]) + i64::from(slots[j]) > capacity {
                drop_flow += p * n * rates.rate(m + 1, j + 1);
            }
        }
    }
    let blocking_rate = per_zone_rejection
        .iter()
        .enumerate()
        .map(|(z, r)| scenario.area_fraction(z) * r)
        .sum();
    ChainMetrics {
        blocking_rate,
        per_zone_rejection,
        mean_bandwidth_slots: mean,
        dropping_rate: if trigger_flow > 0.0 {
            drop_flow / trigger_flow
        } else {
            0.0
        },
    }
}

/// Erlang-B blocking for offered load `a` on `servers` servers, by the
/// recursion `B(a, k) = a B(a, k-1) / (k + a B(a, k-1))`.
pub fn erlang_b(offered_load: f64, servers: u32) -> f64 {
    let mut b = 1.0;
    for k in 1..=servers {
        b = offered_load * b / (f64::from(k) + offered_load * b);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{McsClass, MobilitySpec};

    #[test]
    fn erlang_b_values() {
        assert!((erlang_b(1.0, 2) - 0.2).abs() < 1e-15);
        assert_eq!(erlang_b(0.0, 3), 0.0);
        assert_eq!(erlang_b(5.0, 0), 1.0);
    }

    #[test]
    fn birth_death_generator() {
        let scenario = CellScenario::new(vec![McsClass::new("a", 1, 1.0)], 2, 0.7, 0.3, MobilitySpec::None).unwrap();
        let q = build_generator(&scenario).unwrap();
        assert_eq!(q.len(), 3);
        assert!((q.rate(0, 1) - 0.7).abs() < 1e-15);
        assert!((q.rate(1, 2) - 0.7).abs() < 1e-15);
        assert!((q.rate(1, 0) - 0.3).abs() < 1e-15);
        assert!((q.rate(2, 1) - 0.6).abs() < 1e-15);
        assert!((q.rate(2, 2) + 0.6).abs() < 1e-15);
        assert_eq!(q.rate(0, 2), 0.0);
        let dense = q.to_dense();
        for i in 0..3 {
            assert!(dense.row(i).sum().abs() < 1e-15);
        }
    }

    #[test]
    fn idle_cell_is_point_mass() {
        let scenario = CellScenario::new(
            vec![McsClass::new("a", 2, 0.5), McsClass::new("b", 1, 0.5)],
            4,
            0.0,
            0.3,
            MobilitySpec::MarkovSojourn { mean_sojourn: 4.0 },
        )
        .unwrap();
        let q = build_generator(&scenario).unwrap();
        let pi = stationary_solve(&q).unwrap();
        assert!((pi[0] - 1.0).abs() < 1e-12);
        assert!(pi[1..].iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn drops_and_handover_leave_the_system() {
        // Two zones, capacity for one outer connection only.
        let rates = crate::model::TransitionRates::new(vec![0.2, 0.3], vec![0.1, 0.0]).unwrap();
        let scenario = CellScenario::new(
            vec![McsClass::new("a", 2, 0.5), McsClass::new("b", 1, 0.5)],
            2,
            1.0,
            0.5,
            MobilitySpec::ExplicitRates(rates),
        )
        .unwrap();
        let q = build_generator(&scenario).unwrap();
        let idx = |c: Vec<u32>| q.states().iter().position(|s| s.counts() == &c[..]).unwrap();
        // (0,2): an inner user moving out needs 2 + 1 = 3 > 2 slots -> drop.
        assert!((q.rate(idx(vec![0, 2]), idx(vec![0, 1])) - (2.0 * 0.5 + 2.0 * 0.3)).abs() < 1e-15);
        // (0,1): the move fits.
        assert!((q.rate(idx(vec![0, 1]), idx(vec![1, 0])) - 0.3).abs() < 1e-15);
        // (1,0): departure plus handover, and an inward move.
        assert!((q.rate(idx(vec![1, 0]), idx(vec![0, 0])) - (0.5 + 0.2)).abs() < 1e-15);
        assert!((q.rate(idx(vec![1, 0]), idx(vec![0, 1])) - 0.1).abs() < 1e-15);
        let pi = stationary_solve(&q).unwrap();
        assert!(q.balance_residual(&pi) < 1e-12);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let scenario = CellScenario::new(
            vec![McsClass::new("a", 3, 0.5), McsClass::new("b", 1, 0.5)],
            300,
            1.0,
            1.0,
            MobilitySpec::None,
        )
        .unwrap();
        let q = build_generator(&scenario).unwrap();
        assert!(q.len() > DENSE_SOLVE_CAP);
        assert!(matches!(stationary_solve(&q), Err(Error::OracleCapExceeded { .. })));
    }
}
