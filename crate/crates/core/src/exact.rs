//! Exact stationary solution without mobility.
//!
//! With no MCS changes the chain satisfies local balance, so the stationary
//! law is the truncated product form `p(s) ∝ Π (λ_i/μ)^{n_i} / n_i!` over the
//! admissible states. Sums run in log space over one streaming enumeration.
//! The Kaufman-Roberts occupancy recursion gives the same blocking numbers
//! in `O(M K)` and doubles as a cross-check.

use crate::error::{Error, Result};
use crate::logspace::ln_factorials;
use crate::model::CellScenario;
use crate::report::PerformanceReport;
use crate::weights::{Kernel, StationaryWeights};

/// Blocking rate and per-zone rejection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocking {
    pub blocking_rate: f64,
    pub per_zone_rejection: Vec<f64>,
}

impl From<&PerformanceReport> for Blocking {
    fn from(r: &PerformanceReport) -> Self {
        Self {
            blocking_rate: r.blocking_rate,
            per_zone_rejection: r.per_zone_rejection.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ProductFormKernel {
    log_ratio: Vec<f64>,
    ln_fact: Vec<f64>,
}

impl ProductFormKernel {
    pub(crate) fn new(scenario: &CellScenario, max_load: u32) -> Self {
        let log_ratio = (0..scenario.zones())
            .map(|z| (scenario.zone_arrival_rate(z) / scenario.mu()).ln())
            .collect();
        let max_count = max_load / scenario.slots().last().copied().unwrap_or(1);
        Self {
            log_ratio,
            ln_fact: ln_factorials(max_count as usize),
        }
    }

    #[inline]
    pub(crate) fn log_weight(&self, counts: &[u32]) -> f64 {
        let mut lw = 0.0;
        for (&n, &lr) in counts.iter().zip(&self.log_ratio) {
            if n > 0 {
                lw += f64::from(n) * lr - self.ln_fact[n as usize];
            }
        }
        lw
    }
}

fn require_static(scenario: &CellScenario) -> Result<()> {
    if scenario.has_mobility() {
        Err(Error::InvalidScenario(
            "the exact product-form solution requires all transition rates to be zero".into(),
        ))
    } else {
        Ok(())
    }
}

/// Product-form stationary weights for a scenario without mobility.
pub fn exact_weights(scenario: &CellScenario) -> Result<StationaryWeights> {
    require_static(scenario)?;
    let kernel = Kernel::ProductForm(ProductFormKernel::new(scenario, scenario.capacity_slots()));
    Ok(StationaryWeights::build(scenario, kernel)?.0)
}

/// Blocking, per-zone rejection and bandwidth from a single enumeration.
pub fn exact_report(scenario: &CellScenario) -> Result<PerformanceReport> {
    require_static(scenario)?;
    let kernel = Kernel::ProductForm(ProductFormKernel::new(scenario, scenario.capacity_slots()));
    let (weights, profile) = StationaryWeights::build(scenario, kernel)?;
    let mut report = profile.report(scenario, scenario.capacity_slots());
    report.state_count = Some(weights.state_count());
    Ok(report)
}

pub fn blocking_rate(scenario: &CellScenario) -> Result<Blocking> {
    exact_report(scenario).map(|r| Blocking::from(&r))
}

/// Mean bandwidth usage in zone-1 connection units.
pub fn mean_bandwidth(scenario: &CellScenario) -> Result<f64> {
    exact_report(scenario).map(|r| r.mean_bandwidth())
}

/// Normalized occupancy distribution `q(y)` over slot loads `0..=K`.
pub fn kaufman_roberts_occupancy(scenario: &CellScenario) -> Result<Vec<f64>> {
    require_static(scenario)?;
    let capacity = scenario.capacity_slots() as usize;
    let slots = scenario.slots();
    let offered: Vec<f64> = (0..scenario.zones())
        .map(|z| scenario.zone_arrival_rate(z) / scenario.mu() * f64::from(slots[z]))
        .collect();
    let mut q = vec![0.0; capacity + 1];
    q[0] = 1.0;
    for y in 1..=capacity {
        let mut acc = 0.0;
        for (&c, &a) in slots.iter().zip(&offered) {
            let c = c as usize;
            if c <= y {
                acc += a * q[y - c];
            }
        }
        q[y] = acc / y as f64;
        if q[y] > 1e250 {
            let inv = 1.0 / q[y];
            q[..=y].iter_mut().for_each(|v| *v *= inv);
        }
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    Ok(q)
}

/// Blocking via the Kaufman-Roberts recursion; identical to
/// [`blocking_rate`] without enumerating states.
pub fn kaufman_roberts_blocking(scenario: &CellScenario) -> Result<Blocking> {
    let q = kaufman_roberts_occupancy(scenario)?;
    Ok(blocking_from_occupancy(scenario, &q))
}

pub(crate) fn blocking_from_occupancy(scenario: &CellScenario, q: &[f64]) -> Blocking {
    let capacity = scenario.capacity_slots() as i64;
    let per_zone_rejection: Vec<f64> = scenario
        .slots()
        .iter()
        .map(|&c| {
            let start = (capacity - i64::from(c) + 1).max(0) as usize;
            q[start..].iter().sum::<f64>().min(1.0)
        })
        .collect();
    let blocking_rate = per_zone_rejection
        .iter()
        .enumerate()
        .map(|(z, p)| scenario.area_fraction(z) * p)
        .sum::<f64>()
        .min(1.0);
    Blocking {
        blocking_rate,
        per_zone_rejection,
    }
}

/// Mean bandwidth (slots) from the Kaufman-Roberts occupancy distribution.
pub fn kaufman_roberts_mean_slots(scenario: &CellScenario) -> Result<f64> {
    let q = kaufman_roberts_occupancy(scenario)?;
    Ok(q.iter().enumerate().map(|(y, p)| y as f64 * p).sum())
}
