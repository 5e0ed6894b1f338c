//! Capacity dimensioning: smallest `K` meeting a blocking target.

use crate::error::{Error, Result};
use crate::exact::{blocking_from_occupancy, kaufman_roberts_occupancy, ProductFormKernel};
use crate::mobility::MobilityKernel;
use crate::model::CellScenario;
use crate::report::PerformanceReport;
use crate::weights::{fill_profile, Kernel};

/// Analysis of one capacity `k` (zone-1 connection units).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPoint {
    pub k: u32,
    pub report: PerformanceReport,
}

/// Reports for every `K` in `k_from..=k_to`, all from one enumeration of the
/// largest sample space. State weights do not depend on the capacity, so
/// each smaller space is a load-prefix of the largest one.
pub fn capacity_sweep(scenario: &CellScenario, alpha: f64, k_from: u32, k_to: u32) -> Result<Vec<CapacityPoint>> {
    if k_from > k_to {
        return Ok(Vec::new());
    }
    let unit = scenario.unit_slots();
    let max_load = k_to * unit;
    let kernel = if scenario.has_mobility() {
        Kernel::Mobility(MobilityKernel::new(scenario, alpha, max_load)?)
    } else {
        Kernel::ProductForm(ProductFormKernel::new(scenario, max_load))
    };
    let profile = fill_profile(scenario.slots(), max_load, &kernel)?;
    Ok((k_from..=k_to)
        .map(|k| CapacityPoint {
            k,
            report: profile.report(scenario, k * unit),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPlan {
    pub minimal_k: u32,
    /// Every capacity evaluated, ascending, ending at `minimal_k`.
    pub scanned: Vec<CapacityPoint>,
}

/// Smallest `K` in `k_min..=k_max` whose analytical blocking rate is below
/// `target`, scanning upward.
///
/// Under mobility the first enumeration covers `k_min` up to the answer of
/// the cheap no-mobility recursion (mobility only sheds load), and the scan
/// continues one capacity at a time if that is not yet enough.
pub fn minimal_capacity(
    scenario: &CellScenario,
    alpha: f64,
    target: f64,
    k_min: u32,
    k_max: u32,
) -> Result<CapacityPlan> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidScenario(format!(
            "blocking target {target} outside (0, 1)"
        )));
    }
    if k_min > k_max {
        return Err(Error::InvalidScenario(format!(
            "empty capacity range {k_min}..={k_max}"
        )));
    }
    let mut scanned = Vec::new();
    let meets = |p: &CapacityPoint| p.report.blocking_rate < target;

    if !scenario.has_mobility() {
        for k in k_min..=k_max {
            let point = static_point(scenario, k)?;
            let done = meets(&point);
            scanned.push(point);
            if done {
                return Ok(CapacityPlan { minimal_k: k, scanned });
            }
        }
    } else {
        let static_scenario = scenario.with_mobility(crate::model::MobilitySpec::None)?;
        let mut first_stop = k_min;
        while first_stop < k_max && !meets(&static_point(&static_scenario, first_stop)?) {
            first_stop += 1;
        }
        let mut next = k_min;
        let mut stop = first_stop;
        loop {
            for point in capacity_sweep(scenario, alpha, next, stop)? {
                let done = meets(&point);
                let k = point.k;
                scanned.push(point);
                if done {
                    return Ok(CapacityPlan { minimal_k: k, scanned });
                }
            }
            if stop >= k_max {
                break;
            }
            next = stop + 1;
            stop = next;
        }
    }
    let best_pb = scanned.last().map(|p| p.report.blocking_rate).unwrap_or(1.0);
    Err(Error::TargetUnreachable { k_max, best_pb })
}

fn static_point(scenario: &CellScenario, k: u32) -> Result<CapacityPoint> {
    let sized = scenario.with_capacity_slots(k * scenario.unit_slots());
    let q = kaufman_roberts_occupancy(&sized)?;
    let blocking = blocking_from_occupancy(&sized, &q);
    let mean_slots = q.iter().enumerate().map(|(y, p)| y as f64 * p).sum();
    Ok(CapacityPoint {
        k,
        report: PerformanceReport {
            capacity_slots: sized.capacity_slots(),
            unit_slots: sized.unit_slots(),
            blocking_rate: blocking.blocking_rate,
            per_zone_rejection: blocking.per_zone_rejection,
            mean_bandwidth_slots: mean_slots,
            dropping_rate: 0.0,
            drop_probability_by_class: vec![0.0; sized.zones()],
            dropping_defined: false,
            state_count: None,
        },
    })
}
