//! Discrete-event simulation of the cell.
//!
//! Poisson arrivals, exponential watch times and admission control, with
//! users moving between zones either by exponential sojourns
//! ([`MobilityEngine::Markov`]) or by a straight-leg random walk on the unit
//! disk ([`MobilityEngine::RandomWalk`]). A move to a costlier MCS that does
//! not fit drops the connection; leaving the outermost ring is a handover.
//! Each replication draws from its own ChaCha8 stream, so results depend on
//! the seed alone.

mod calendar;
mod engine;
mod measure;
pub mod rng;
mod stats;
mod walk;

pub use engine::Snapshots;
pub use measure::{measure_transition_rates, MobilityMeasurement, MIN_CROSSINGS};
pub use stats::{Estimate, CONFIDENCE};

use crate::error::{Error, Result};
use crate::model::CellScenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityEngine {
    /// Exponential zone sojourns at the scenario's transition rates.
    Markov,
    /// Legs of `step_distance` (cell radii) at `speed_per_second` (cell
    /// radii per second) with a fresh uniform heading per leg.
    RandomWalk { step_distance: f64, speed_per_second: f64 },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scenario: CellScenario,
    /// Simulated minutes per replication.
    pub horizon: f64,
    /// Minutes discarded before statistics start.
    pub warmup: f64,
    pub replications: u32,
    pub seed: u64,
    pub engine: MobilityEngine,
    /// Record the zone counts every this many minutes after warmup.
    pub snapshot_interval: Option<f64>,
    pub trace: bool,
    cumulative_areas: Vec<f64>,
}

impl SimConfig {
    /// Warmup defaults to ten mean watch times.
    pub fn new(scenario: CellScenario, horizon: f64, replications: u32, seed: u64, engine: MobilityEngine) -> Self {
        let warmup = 10.0 / scenario.mu();
        let cumulative_areas = scenario
            .mcs()
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.area_fraction;
                Some(*acc)
            })
            .collect();
        Self {
            scenario,
            horizon,
            warmup,
            replications,
            seed,
            engine,
            snapshot_interval: None,
            trace: false,
            cumulative_areas,
        }
    }

    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_snapshots(mut self, interval: f64) -> Self {
        self.snapshot_interval = Some(interval);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.warmup >= 0.0 && self.warmup.is_finite()) {
            return bad(format!("warmup must be finite and >= 0, got {}", self.warmup));
        }
        if !(self.horizon > self.warmup && self.horizon.is_finite()) {
            return bad(format!(
                "horizon {} must be finite and exceed warmup {}",
                self.horizon, self.warmup
            ));
        }
        if self.replications == 0 {
            return bad("at least one replication is required".into());
        }
        if let Some(dt) = self.snapshot_interval {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("snapshot interval must be positive, got {dt}"));
            }
        }
        if let MobilityEngine::RandomWalk {
            step_distance,
            speed_per_second,
        } = self.engine
        {
            if !(step_distance > 0.0 && step_distance.is_finite()) {
                return bad(format!("step distance d must be positive, got {step_distance}"));
            }
            if !(speed_per_second > 0.0 && speed_per_second.is_finite()) {
                return bad(format!("speed f must be positive, got {speed_per_second}"));
            }
        }
        Ok(())
    }
}

/// Tallies of one replication, either over the whole run or after warmup.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub arrivals: u64,
    pub admits: u64,
    pub blocks: u64,
    pub departures: u64,
    /// Zone changes inside the cell.
    pub mcs_changes: u64,
    /// Zone changes of connections outside the outermost ring; the
    /// denominator of the dropping rate.
    pub drop_triggers: u64,
    pub drops: u64,
    pub handovers: u64,
}

impl EventCounts {
    pub fn merge(&mut self, other: &Self) {
        self.arrivals += other.arrivals;
        self.admits += other.admits;
        self.blocks += other.blocks;
        self.departures += other.departures;
        self.mcs_changes += other.mcs_changes;
        self.drop_triggers += other.drop_triggers;
        self.drops += other.drops;
        self.handovers += other.handovers;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Admit,
    Block,
    Departure,
    Transition,
    Drop,
    Handover,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Admit => "admit",
            TraceKind::Block => "block",
            TraceKind::Departure => "departure",
            TraceKind::Transition => "transition",
            TraceKind::Drop => "drop",
            TraceKind::Handover => "handover",
        }
    }
}

/// One simulator event: time, kind, 1-based zone, and the load in slots
/// after the event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: TraceKind,
    pub zone: usize,
    pub load: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub total: EventCounts,
    pub window: EventCounts,
    pub zone_arrivals: Vec<u64>,
    pub zone_blocks: Vec<u64>,
    /// Integral of the load (slots) over the statistics window.
    pub load_time_integral: f64,
    pub window_length: f64,
    pub in_system_at_end: u64,
    pub trace: Option<Vec<TraceRecord>>,
    pub snapshots: Option<Snapshots>,
}

impl ReplicationOutcome {
    fn empty(replication: u64, zones: usize, trace: bool, snapshots: bool) -> Self {
        Self {
            replication,
            total: EventCounts::default(),
            window: EventCounts::default(),
            zone_arrivals: vec![0; zones],
            zone_blocks: vec![0; zones],
            load_time_integral: 0.0,
            window_length: 0.0,
            in_system_at_end: 0,
            trace: trace.then(Vec::new),
            snapshots: snapshots.then(Snapshots::new),
        }
    }

    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn blocking_rate(&self) -> f64 {
        Self::ratio(self.window.blocks, self.window.arrivals)
    }

    pub fn zone_rejection(&self, zone: usize) -> f64 {
        Self::ratio(self.zone_blocks[zone], self.zone_arrivals[zone])
    }

    pub fn mean_bandwidth_slots(&self) -> f64 {
        self.load_time_integral / self.window_length
    }

    pub fn dropping_rate(&self) -> f64 {
        Self::ratio(self.window.drops, self.window.drop_triggers)
    }

    /// `admits = departures + drops + handovers + in-system` over the run.
    pub fn is_conserving(&self) -> bool {
        let t = &self.total;
        t.arrivals == t.admits + t.blocks && t.admits == t.departures + t.drops + t.handovers + self.in_system_at_end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub unit_slots: u32,
    pub blocking_rate: Estimate,
    pub per_zone_rejection: Vec<Estimate>,
    pub mean_bandwidth_slots: Estimate,
    pub dropping_rate: Estimate,
    /// Post-warmup counts summed over replications.
    pub counts: EventCounts,
    /// Ordered by replication index.
    pub replications: Vec<ReplicationOutcome>,
}

impl SimulationResult {
    /// Mean bandwidth in zone-1 connection units.
    pub fn mean_bandwidth(&self) -> Estimate {
        self.mean_bandwidth_slots.scaled(1.0 / f64::from(self.unit_slots))
    }

    pub fn from_replications(unit_slots: u32, mut replications: Vec<ReplicationOutcome>) -> Self {
        replications.sort_by_key(|r| r.replication);
        let collect = |f: &dyn Fn(&ReplicationOutcome) -> f64| {
            Estimate::from_samples(&replications.iter().map(f).collect::<Vec<_>>())
        };
        let zones = replications.first().map_or(0, |r| r.zone_arrivals.len());
        let mut counts = EventCounts::default();
        replications.iter().for_each(|r| counts.merge(&r.window));
        Self {
            unit_slots,
            blocking_rate: collect(&|r| r.blocking_rate()),
            per_zone_rejection: (0..zones).map(|z| collect(&|r| r.zone_rejection(z))).collect(),
            mean_bandwidth_slots: collect(&|r| r.mean_bandwidth_slots()),
            dropping_rate: collect(&|r| r.dropping_rate()),
            counts,
            replications,
        }
    }
}

/// Runs every replication with whichever engine the config names.
pub fn simulate(config: &SimConfig) -> Result<SimulationResult> {
    config.validate()?;
    let outcomes = (0..u64::from(config.replications))
        .map(|rep| {
            let mut out = engine::run_replication(config, rep);
            out.window_length = config.horizon - config.warmup;
            out
        })
        .collect();
    Ok(SimulationResult::from_replications(
        config.scenario.unit_slots(),
        outcomes,
    ))
}

pub fn run_markov(config: &SimConfig) -> Result<SimulationResult> {
    if config.engine != MobilityEngine::Markov {
        return Err(Error::InvalidConfig("run_markov needs the Markov engine".into()));
    }
    simulate(config)
}

pub fn run_random_walk(config: &SimConfig) -> Result<SimulationResult> {
    if !matches!(config.engine, MobilityEngine::RandomWalk { .. }) {
        return Err(Error::InvalidConfig(
            "run_random_walk needs the random-walk engine".into(),
        ));
    }
    simulate(config)
}
