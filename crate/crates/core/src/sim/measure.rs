//! Zone transition rates of the random walk, measured on free users.

use super::rng::SimRng;
use super::walk::{Step, Walker};
use super::{Estimate, MobilityEngine, SimConfig};
use crate::error::{Error, Result};
use crate::model::{TransitionRates, ZoneGeometry};

/// Directions with fewer crossings than this are flagged as unreliable.
pub const MIN_CROSSINGS: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityMeasurement {
    /// Crossings per minute of zone time, pooled over replications.
    pub rates: TransitionRates,
    /// Same layout as [`TransitionRates::to_matrix`], one estimate per entry.
    pub rate_estimates: Vec<Vec<Estimate>>,
    /// Crossing counts, rows zones `1..=M`, column 0 = outside the cell.
    pub crossings: Vec<Vec<u64>>,
    /// User-minutes spent in each zone.
    pub zone_time: Vec<f64>,
    /// Zone entries, by arrival or crossing.
    pub visits: Vec<u64>,
    /// Mean time per zone visit in minutes.
    pub mean_sojourn: f64,
    /// `(from, to)` adjacent directions below [`MIN_CROSSINGS`], 1-based.
    pub sparse_directions: Vec<(usize, usize)>,
}

impl MobilityMeasurement {
    pub fn is_reliable(&self) -> bool {
        self.sparse_directions.is_empty()
    }
}

struct Tally {
    crossings: Vec<Vec<u64>>,
    zone_time: Vec<f64>,
    visits: Vec<u64>,
}

/// Follows each user of a Poisson stream independently until the session
/// ends or the user leaves the cell; capacity plays no part. Only events
/// and time inside `[warmup, horizon]` are counted.
pub fn measure_transition_rates(config: &SimConfig) -> Result<MobilityMeasurement> {
    config.validate()?;
    let MobilityEngine::RandomWalk {
        step_distance,
        speed_per_second,
    } = config.engine
    else {
        return Err(Error::InvalidConfig(
            "mobility measurement needs the random-walk engine".into(),
        ));
    };
    let scenario = &config.scenario;
    if scenario.lambda() <= 0.0 {
        return Err(Error::InvalidConfig(
            "mobility measurement needs a positive arrival rate".into(),
        ));
    }
    let zones = scenario.zones();
    let outer = ZoneGeometry::for_scenario(scenario).outer_radii().to_vec();
    let speed = speed_per_second * 60.0;

    let tallies: Vec<Tally> = (0..u64::from(config.replications))
        .map(|rep| {
            let mut rng = SimRng::for_replication(config.seed, rep);
            let mut tally = Tally {
                crossings: vec![vec![0; zones + 1]; zones],
                zone_time: vec![0.0; zones],
                visits: vec![0; zones],
            };
            let mut t0 = 0.0;
            loop {
                t0 += rng.exponential(scenario.lambda());
                if t0 > config.horizon {
                    break;
                }
                let end = t0 + rng.exponential(scenario.mu());
                let walker = Walker::spawn(&mut rng, &outer, step_distance);
                follow(
                    config,
                    &outer,
                    step_distance,
                    speed,
                    walker,
                    t0,
                    end,
                    &mut rng,
                    &mut tally,
                );
            }
            tally
        })
        .collect();

    let mut pooled = Tally {
        crossings: vec![vec![0; zones + 1]; zones],
        zone_time: vec![0.0; zones],
        visits: vec![0; zones],
    };
    for t in &tallies {
        for z in 0..zones {
            pooled.zone_time[z] += t.zone_time[z];
            pooled.visits[z] += t.visits[z];
            for j in 0..=zones {
                pooled.crossings[z][j] += t.crossings[z][j];
            }
        }
    }
    let rate_of = |t: &Tally, z: usize, j: usize| {
        if t.zone_time[z] > 0.0 {
            t.crossings[z][j] as f64 / t.zone_time[z]
        } else {
            0.0
        }
    };
    let matrix: Vec<Vec<f64>> = (0..zones)
        .map(|z| (0..=zones).map(|j| rate_of(&pooled, z, j)).collect())
        .collect();
    let rate_estimates = (0..zones)
        .map(|z| {
            (0..=zones)
                .map(|j| Estimate::from_samples(&tallies.iter().map(|t| rate_of(t, z, j)).collect::<Vec<_>>()))
                .collect()
        })
        .collect();
    let mut sparse_directions = Vec::new();
    for z in 0..zones {
        for j in [z, z + 2] {
            if j <= zones && pooled.crossings[z][j] < MIN_CROSSINGS {
                sparse_directions.push((z + 1, j));
            }
        }
    }
    let total_visits: u64 = pooled.visits.iter().sum();
    let mean_sojourn = if total_visits > 0 {
        pooled.zone_time.iter().sum::<f64>() / total_visits as f64
    } else {
        0.0
    };
    Ok(MobilityMeasurement {
        rates: TransitionRates::from_matrix(&matrix)?,
        rate_estimates,
        crossings: pooled.crossings,
        zone_time: pooled.zone_time,
        visits: pooled.visits,
        mean_sojourn,
        sparse_directions,
    })
}

#[allow(clippy::too_many_arguments)]
fn follow(
    config: &SimConfig,
    outer: &[f64],
    leg: f64,
    speed: f64,
    mut walker: Walker,
    start: f64,
    end: f64,
    rng: &mut SimRng,
    tally: &mut Tally,
) {
    let (lo, hi) = (config.warmup, config.horizon);
    let inside = |t: f64| t >= lo && t <= hi;
    let mut now = start;
    if inside(now) {
        tally.visits[walker.zone] += 1;
    }
    let mut step = walker.next_step(outer);
    loop {
        let next = now + step.distance() / speed;
        let stop = next.min(end);
        let overlap = stop.min(hi) - now.max(lo);
        if overlap > 0.0 {
            tally.zone_time[walker.zone] += overlap;
        }
        if next >= end || next > hi {
            return;
        }
        now = next;
        walker.advance(step.distance());
        match step {
            Step::Turn { .. } => walker.turn(rng, leg),
            Step::Cross { to, .. } => {
                let from = walker.zone;
                let column = to.map_or(0, |z| z + 1);
                if inside(now) {
                    tally.crossings[from][column] += 1;
                }
                let Some(to) = to else { return };
                walker.zone = to;
                if inside(now) {
                    tally.visits[to] += 1;
                }
            }
        }
        step = walker.next_step(outer);
    }
}
