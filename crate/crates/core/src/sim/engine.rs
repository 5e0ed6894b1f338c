//! One replication of the capacity-constrained cell.

use std::collections::BTreeMap;

use super::calendar::Calendar;
use super::rng::SimRng;
use super::walk::{Step, Walker};
use super::{EventCounts, MobilityEngine, ReplicationOutcome, SimConfig, TraceKind, TraceRecord};
use crate::model::ZoneGeometry;

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival,
    Departure {
        slot: usize,
        serial: u64,
    },
    /// Markov zone change, or the next geometric step of a walker.
    Motion {
        slot: usize,
        serial: u64,
        generation: u32,
    },
    Snapshot,
}

#[derive(Debug, Clone)]
struct Connection {
    serial: u64,
    zone: usize,
    generation: u32,
    walker: Option<(Walker, Step)>,
}

enum Motion {
    Markov,
    Walk { outer: Vec<f64>, leg: f64, speed: f64 },
}

struct Cell<'a> {
    config: &'a SimConfig,
    rng: SimRng,
    calendar: Calendar<Event>,
    motion: Motion,
    slab: Vec<Option<Connection>>,
    free: Vec<usize>,
    next_serial: u64,
    counts: Vec<u32>,
    load: u32,
    now: f64,
    out: ReplicationOutcome,
}

pub(super) fn run_replication(config: &SimConfig, replication: u64) -> ReplicationOutcome {
    let scenario = &config.scenario;
    let zones = scenario.zones();
    let motion = match config.engine {
        MobilityEngine::Markov => Motion::Markov,
        MobilityEngine::RandomWalk {
            step_distance,
            speed_per_second,
        } => Motion::Walk {
            outer: ZoneGeometry::for_scenario(scenario).outer_radii().to_vec(),
            leg: step_distance,
            speed: speed_per_second * 60.0,
        },
    };
    let mut cell = Cell {
        config,
        rng: SimRng::for_replication(config.seed, replication),
        calendar: Calendar::new(),
        motion,
        slab: Vec::new(),
        free: Vec::new(),
        next_serial: 0,
        counts: vec![0; zones],
        load: 0,
        now: 0.0,
        out: ReplicationOutcome::empty(replication, zones, config.trace, config.snapshot_interval.is_some()),
    };
    cell.run();
    cell.out
}

impl Cell<'_> {
    fn in_window(&self) -> bool {
        self.now >= self.config.warmup
    }

    fn count(&mut self, f: impl Fn(&mut EventCounts)) {
        f(&mut self.out.total);
        if self.in_window() {
            f(&mut self.out.window);
        }
    }

    fn trace(&mut self, kind: TraceKind, zone: usize) {
        if let Some(trace) = self.out.trace.as_mut() {
            trace.push(TraceRecord {
                time: self.now,
                kind,
                zone: zone + 1,
                load: self.load,
            });
        }
    }

    fn run(&mut self) {
        let horizon = self.config.horizon;
        let lambda = self.config.scenario.lambda();
        let first = self.rng.exponential(lambda);
        self.calendar.schedule(first, Event::Arrival);
        if self.config.snapshot_interval.is_some() {
            self.calendar.schedule(self.config.warmup, Event::Snapshot);
        }
        while let Some((time, event)) = self.calendar.pop() {
            if time > horizon {
                break;
            }
            self.advance_clock(time);
            match event {
                Event::Arrival => {
                    let next = time + self.rng.exponential(lambda);
                    self.calendar.schedule(next, Event::Arrival);
                    self.arrival();
                }
                Event::Departure { slot, serial } => {
                    if self.live(slot, serial) {
                        let zone = self.remove(slot);
                        self.count(|c| c.departures += 1);
                        self.trace(TraceKind::Departure, zone);
                    }
                }
                Event::Motion {
                    slot,
                    serial,
                    generation,
                } => {
                    if self.live(slot, serial) && self.slab[slot].as_ref().unwrap().generation == generation {
                        self.motion(slot);
                    }
                }
                Event::Snapshot => {
                    let dt = self.config.snapshot_interval.expect("snapshots enabled");
                    if let Some(snaps) = self.out.snapshots.as_mut() {
                        *snaps.entry(self.counts.clone()).or_insert(0) += 1;
                    }
                    self.calendar.schedule(time + dt, Event::Snapshot);
                }
            }
        }
        self.advance_clock(horizon);
        self.out.in_system_at_end = self.slab.iter().flatten().count() as u64;
    }

    /// Accumulates the load integral over the part of `[now, time]` inside
    /// the statistics window.
    fn advance_clock(&mut self, time: f64) {
        let start = self.now.max(self.config.warmup);
        if time > start {
            self.out.load_time_integral += f64::from(self.load) * (time - start);
        }
        self.now = time;
    }

    fn live(&self, slot: usize, serial: u64) -> bool {
        matches!(&self.slab[slot], Some(c) if c.serial == serial)
    }

    fn arrival(&mut self) {
        let scenario = &self.config.scenario;
        let slots = scenario.slots();
        let (zone, walker) = match &self.motion {
            Motion::Markov => (self.rng.weighted_index(&self.config.cumulative_areas), None),
            Motion::Walk { outer, leg, .. } => {
                let w = Walker::spawn(&mut self.rng, outer, *leg);
                (w.zone, Some(w))
            }
        };
        self.count(|c| c.arrivals += 1);
        if self.in_window() {
            self.out.zone_arrivals[zone] += 1;
        }
        let cost = slots[zone];
        if self.load + cost > scenario.capacity_slots() {
            self.count(|c| c.blocks += 1);
            if self.in_window() {
                self.out.zone_blocks[zone] += 1;
            }
            self.trace(TraceKind::Block, zone);
            return;
        }
        self.count(|c| c.admits += 1);
        self.load += cost;
        self.counts[zone] += 1;
        let serial = self.next_serial;
        self.next_serial += 1;
        let connection = Connection {
            serial,
            zone,
            generation: 0,
            walker: walker.map(|w| {
                let outer = match &self.motion {
                    Motion::Walk { outer, .. } => outer,
                    Motion::Markov => unreachable!(),
                };
                let step = w.next_step(outer);
                (w, step)
            }),
        };
        let slot = match self.free.pop() {
            Some(s) => {
                self.slab[s] = Some(connection);
                s
            }
            None => {
                self.slab.push(Some(connection));
                self.slab.len() - 1
            }
        };
        let end = self.now + self.rng.exponential(scenario.mu());
        self.calendar.schedule(end, Event::Departure { slot, serial });
        self.schedule_motion(slot);
        self.trace(TraceKind::Admit, zone);
    }

    fn schedule_motion(&mut self, slot: usize) {
        let conn = self.slab[slot].as_ref().unwrap();
        let delay = match &self.motion {
            Motion::Markov => {
                let rate = self.config.scenario.rates().leaving_rate(conn.zone);
                self.rng.exponential(rate)
            }
            Motion::Walk { speed, .. } => conn.walker.as_ref().unwrap().1.distance() / speed,
        };
        let event = Event::Motion {
            slot,
            serial: conn.serial,
            generation: conn.generation,
        };
        self.calendar.schedule(self.now + delay, event);
    }

    fn remove(&mut self, slot: usize) -> usize {
        let conn = self.slab[slot].take().unwrap();
        self.free.push(slot);
        self.load -= self.config.scenario.slots()[conn.zone];
        self.counts[conn.zone] -= 1;
        conn.zone
    }

    fn motion(&mut self, slot: usize) {
        let zone = self.slab[slot].as_ref().unwrap().zone;
        let target = match &self.motion {
            Motion::Markov => {
                let rates = self.config.scenario.rates();
                let out = rates.outward()[zone];
                let total = out + rates.inward()[zone];
                if self.rng.uniform() * total < out {
                    zone.checked_sub(1)
                } else {
                    Some(zone + 1)
                }
            }
            Motion::Walk { outer, leg, .. } => {
                let conn = self.slab[slot].as_mut().unwrap();
                let (walker, step) = conn.walker.as_mut().unwrap();
                walker.advance(step.distance());
                match *step {
                    Step::Turn { .. } => {
                        walker.turn(&mut self.rng, *leg);
                        *step = walker.next_step(outer);
                        conn.generation = conn.generation.wrapping_add(1);
                        self.schedule_motion(slot);
                        return;
                    }
                    Step::Cross { to, .. } => to,
                }
            }
        };
        self.zone_change(slot, zone, target);
    }

    fn zone_change(&mut self, slot: usize, from: usize, to: Option<usize>) {
        let Some(to) = to else {
            self.remove(slot);
            self.count(|c| c.handovers += 1);
            self.trace(TraceKind::Handover, from);
            return;
        };
        self.count(|c| c.mcs_changes += 1);
        if from >= 1 {
            self.count(|c| c.drop_triggers += 1);
        }
        let slots = self.config.scenario.slots();
        let new_load = self.load - slots[from] + slots[to];
        if new_load > self.config.scenario.capacity_slots() {
            self.remove(slot);
            self.count(|c| c.drops += 1);
            self.trace(TraceKind::Drop, from);
            return;
        }
        self.load = new_load;
        self.counts[from] -= 1;
        self.counts[to] += 1;
        let conn = self.slab[slot].as_mut().unwrap();
        conn.zone = to;
        conn.generation = conn.generation.wrapping_add(1);
        if let (Some((walker, step)), Motion::Walk { outer, .. }) = (conn.walker.as_mut(), &self.motion) {
            walker.zone = to;
            *step = walker.next_step(outer);
        }
        self.trace(TraceKind::Transition, to);
        self.schedule_motion(slot);
    }
}

/// Empirical state-occupancy histogram type.
pub type Snapshots = BTreeMap<Vec<u32>, u64>;
