//! Cell model: MCS classes, capacity in integer slots, traffic, mobility rates,
//! the system state space and the blocking/dropping state sets.
//!
//! Zones are numbered 1..=M from the outermost ring (lowest-rate MCS, most
//! slots per connection) to the innermost disk. Public functions taking a
//! `zone` use that 1-based numbering; vectors indexed by zone are 0-based
//! (zone `m` lives at index `m - 1`).

use crate::error::{Error, Result};
use crate::mobility::mobility_rate_from_sojourn;

/// Area fractions may come from published tables rounded to six decimals,
/// which do not sum to exactly one. Sums within this tolerance are
/// renormalized; anything further off is rejected.
const AREA_SUM_TOLERANCE: f64 = 1e-5;

/// One modulation and coding scheme and the zone that uses it.
#[derive(Debug, Clone, PartialEq)]
pub struct McsClass {
    /// Informational name, e.g. "QPSK 1/2".
    pub label: String,
    /// Slots per frame consumed by one connection on this MCS.
    pub slots: u32,
    /// Fraction of the cell area covered by the zone.
    pub area_fraction: f64,
}

impl McsClass {
    pub fn new(label: impl Into<String>, slots: u32, area_fraction: f64) -> Self {
        Self {
            label: label.into(),
            slots,
            area_fraction,
        }
    }
}

/// Per-user zone transition rates (per minute) between adjacent zones.
///
/// Only nearest-neighbour moves exist, so the rates are stored as two
/// vectors: `outward[z]` is the rate from zone `z + 1` to zone `z` (for the
/// outermost zone this is the handover rate out of the cell) and
/// `inward[z]` the rate from zone `z + 1` to zone `z + 2` (zero for the
/// innermost zone).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRates {
    outward: Vec<f64>,
    inward: Vec<f64>,
}

impl TransitionRates {
    pub fn zero(zones: usize) -> Self {
        Self {
            outward: vec![0.0; zones],
            inward: vec![0.0; zones],
        }
    }

    /// All nearest-neighbour rates equal to `v`, including the handover rate
    /// of the outermost zone.
    pub fn homogeneous(zones: usize, v: f64) -> Self {
        let mut inward = vec![v; zones];
        if let Some(last) = inward.last_mut() {
            *last = 0.0;
        }
        Self {
            outward: vec![v; zones],
            inward,
        }
    }

    pub fn new(outward: Vec<f64>, inward: Vec<f64>) -> Result<Self> {
        if outward.is_empty() || outward.len() != inward.len() {
            return Err(Error::InvalidScenario(format!(
                "transition rate vectors must be nonempty and equal length, got {} and {}",
                outward.len(),
                inward.len()
            )));
        }
        if let Some(bad) = outward
            .iter()
            .chain(inward.iter())
            .find(|v| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidScenario(format!(
                "transition rates must be finite and nonnegative, got {bad}"
            )));
        }
        if *inward.last().unwrap() != 0.0 {
            return Err(Error::InvalidScenario(
                "the innermost zone has no inward neighbour; its inward rate must be 0".into(),
            ));
        }
        Ok(Self { outward, inward })
    }

    /// Builds rates from an `M x (M + 1)` matrix whose row `i` is zone
    /// `i + 1` and whose column `j` is zone `j` (column 0 is outside the
    /// cell). Entries with `|i - j| > 1` must be zero.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let zones = rows.len();
        let mut outward = vec![0.0; zones];
        let mut inward = vec![0.0; zones];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != zones + 1 {
                return Err(Error::InvalidScenario(format!(
                    "rate matrix row {} has {} columns, expected {}",
                    i + 1,
                    row.len(),
                    zones + 1
                )));
            }
            let zone = i + 1;
            for (j, &v) in row.iter().enumerate() {
                if j == zone - 1 {
                    outward[i] = v;
                } else if j == zone + 1 {
                    inward[i] = v;
                } else if v != 0.0 {
                    return Err(Error::InvalidScenario(format!(
                        "rate from zone {zone} to zone {j} must be 0: only adjacent zones are reachable"
                    )));
                }
            }
        }
        Self::new(outward, inward)
    }

    /// Inverse of [`TransitionRates::from_matrix`].
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let zones = self.zones();
        (0..zones)
            .map(|i| {
                let mut row = vec![0.0; zones + 1];
                row[i] = self.outward[i];
                if i + 2 <= zones {
                    row[i + 2] = self.inward[i];
                }
                row
            })
            .collect()
    }

    pub fn zones(&self) -> usize {
        self.outward.len()
    }

    /// Rate `v_ij` for 1-based zones, with `0` meaning outside the cell.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        if from == 0 || from > self.zones() {
            return 0.0;
        }
        if to + 1 == from {
            self.outward[from - 1]
        } else if to == from + 1 {
            self.inward[from - 1]
        } else {
            0.0
        }
    }

    pub fn outward(&self) -> &[f64] {
        &self.outward
    }

    pub fn inward(&self) -> &[f64] {
        &self.inward
    }

    /// Total rate at which a user leaves the zone at 0-based index `z`,
    /// handover included.
    pub fn leaving_rate(&self, z: usize) -> f64 {
        self.outward[z] + self.inward[z]
    }

    pub fn is_zero(&self) -> bool {
        self.outward.iter().chain(&self.inward).all(|&v| v == 0.0)
    }
}

/// How users move between zones during a session.
#[derive(Debug, Clone, PartialEq)]
pub enum MobilitySpec {
    None,
    /// Exponential zone sojourn with mean `mean_sojourn` minutes; the derived
    /// rate applies to every adjacent-zone move and to handover.
    MarkovSojourn {
        mean_sojourn: f64,
    },
    ExplicitRates(TransitionRates),
}

/// Full parameterization of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScenario {
    mcs: Vec<McsClass>,
    slots: Vec<u32>,
    capacity_slots: u32,
    lambda: f64,
    mu: f64,
    mobility: MobilitySpec,
    rates: TransitionRates,
}

impl CellScenario {
    pub fn new(
        mut mcs: Vec<McsClass>,
        capacity_slots: u32,
        lambda: f64,
        mu: f64,
        mobility: MobilitySpec,
    ) -> Result<Self> {
        if mcs.is_empty() {
            return Err(Error::InvalidScenario("at least one MCS class is required".into()));
        }
        for (i, class) in mcs.iter().enumerate() {
            if class.slots == 0 {
                return Err(Error::InvalidScenario(format!("MCS {} has zero slots", i + 1)));
            }
            if !(class.area_fraction > 0.0 && class.area_fraction <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "MCS {} area fraction {} outside (0, 1]",
                    i + 1,
                    class.area_fraction
                )));
            }
        }
        if let Some(w) = mcs.windows(2).position(|w| w[0].slots <= w[1].slots) {
            return Err(Error::InvalidScenario(format!(
                "slots must be strictly decreasing with zone index (zone {} has {}, zone {} has {})",
                w + 1,
                mcs[w].slots,
                w + 2,
                mcs[w + 1].slots
            )));
        }
        let area: f64 = mcs.iter().map(|c| c.area_fraction).sum();
        if (area - 1.0).abs() > AREA_SUM_TOLERANCE {
            return Err(Error::InvalidScenario(format!(
                "area fractions sum to {area}, expected 1"
            )));
        }
        for class in &mut mcs {
            class.area_fraction /= area;
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "arrival rate must be finite and nonnegative, got {lambda}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::NonPositiveRate { name: "mu", value: mu });
        }
        let rates = match &mobility {
            MobilitySpec::None => TransitionRates::zero(mcs.len()),
            MobilitySpec::MarkovSojourn { mean_sojourn } => {
                TransitionRates::homogeneous(mcs.len(), mobility_rate_from_sojourn(*mean_sojourn, mu)?)
            }
            MobilitySpec::ExplicitRates(rates) => {
                if rates.zones() != mcs.len() {
                    return Err(Error::InvalidScenario(format!(
                        "rate matrix has {} zones, scenario has {}",
                        rates.zones(),
                        mcs.len()
                    )));
                }
                rates.clone()
            }
        };
        let slots = mcs.iter().map(|c| c.slots).collect();
        Ok(Self {
            mcs,
            slots,
            capacity_slots,
            lambda,
            mu,
            mobility,
            rates,
        })
    }

    /// Capacity given in connections of the costliest MCS (zone 1).
    pub fn with_capacity_connections(
        mcs: Vec<McsClass>,
        capacity_connections: u32,
        lambda: f64,
        mu: f64,
        mobility: MobilitySpec,
    ) -> Result<Self> {
        let unit = mcs.first().map(|c| c.slots).unwrap_or(1);
        Self::new(mcs, capacity_connections * unit, lambda, mu, mobility)
    }

    pub fn zones(&self) -> usize {
        self.mcs.len()
    }

    pub fn mcs(&self) -> &[McsClass] {
        &self.mcs
    }

    /// Slots per connection, indexed by 0-based zone.
    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    pub fn capacity_slots(&self) -> u32 {
        self.capacity_slots
    }

    /// Slot count of one connection in zone 1; capacity in connection units
    /// is `capacity_slots / unit_slots`.
    pub fn unit_slots(&self) -> u32 {
        self.slots[0]
    }

    pub fn capacity_connections(&self) -> f64 {
        f64::from(self.capacity_slots) / f64::from(self.unit_slots())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mobility(&self) -> &MobilitySpec {
        &self.mobility
    }

    pub fn rates(&self) -> &TransitionRates {
        &self.rates
    }

    pub fn has_mobility(&self) -> bool {
        !self.rates.is_zero()
    }

    pub fn area_fraction(&self, z: usize) -> f64 {
        self.mcs[z].area_fraction
    }

    /// Arrival rate `λ σ_m` into the zone at 0-based index `z`.
    pub fn zone_arrival_rate(&self, z: usize) -> f64 {
        self.lambda * self.mcs[z].area_fraction
    }

    /// False when even a single zone-1 connection does not fit, in which
    /// case zone-1 requests are always rejected.
    pub fn admits_every_class(&self) -> bool {
        self.capacity_slots >= self.slots[0]
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.mcs.clone(),
            self.capacity_slots,
            lambda,
            self.mu,
            self.mobility.clone(),
        )
    }

    pub fn with_capacity_slots(&self, capacity_slots: u32) -> Self {
        Self {
            capacity_slots,
            ..self.clone()
        }
    }

    pub fn with_mobility(&self, mobility: MobilitySpec) -> Result<Self> {
        Self::new(self.mcs.clone(), self.capacity_slots, self.lambda, self.mu, mobility)
    }

    fn check_zone(&self, zone: usize) -> Result<()> {
        if zone == 0 || zone > self.zones() {
            Err(Error::ZoneOutOfRange {
                zone,
                zones: self.zones(),
            })
        } else {
            Ok(())
        }
    }
}

/// Occupancy vector `(n_1, ..., n_M)` with its slot load `Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemState {
    counts: Vec<u32>,
    load: u32,
}

impl SystemState {
    pub fn new(counts: Vec<u32>, slots: &[u32]) -> Self {
        assert_eq!(counts.len(), slots.len(), "state dimension mismatch");
        let load = load_of(&counts, slots);
        Self { counts, load }
    }

    pub fn zero(zones: usize) -> Self {
        Self {
            counts: vec![0; zones],
            load: 0,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Slots in use.
    pub fn load(&self) -> u32 {
        self.load
    }

    pub fn is_admissible(&self, scenario: &CellScenario) -> bool {
        self.load <= scenario.capacity_slots()
    }
}

pub(crate) fn load_of(counts: &[u32], slots: &[u32]) -> u32 {
    counts.iter().zip(slots).map(|(n, c)| n * c).sum()
}

/// Visits every occupancy vector whose slot load fits in `capacity`, in
/// lexicographic ascending order, passing the counts and the load.
pub(crate) fn for_each_state(slots: &[u32], capacity: u32, mut visit: impl FnMut(&[u32], u32)) -> u64 {
    let dims = slots.len();
    let mut counts = vec![0u32; dims];
    let mut load = 0u32;
    let mut visited = 0u64;
    loop {
        visit(&counts, load);
        visited += 1;
        let mut j = dims;
        loop {
            if j == 0 {
                return visited;
            }
            j -= 1;
            if load + slots[j] <= capacity {
                counts[j] += 1;
                load += slots[j];
                break;
            }
            load -= counts[j] * slots[j];
            counts[j] = 0;
        }
    }
}

/// Streams every state of the sample space to `visitor` in lexicographic
/// order of `(n_1, ..., n_M)` and returns the number of states.
pub fn enumerate_states(scenario: &CellScenario, mut visitor: impl FnMut(&SystemState)) -> u64 {
    let mut state = SystemState::zero(scenario.zones());
    for_each_state(scenario.slots(), scenario.capacity_slots(), |counts, load| {
        state.counts.copy_from_slice(counts);
        state.load = load;
        visitor(&state);
    })
}

/// Whether a request from `zone` is rejected in `state` (`Y > K - c_m`).
pub fn blocking_set_membership(state: &SystemState, zone: usize, scenario: &CellScenario) -> Result<bool> {
    scenario.check_zone(zone)?;
    Ok(i64::from(state.load) > i64::from(scenario.capacity_slots()) - i64::from(scenario.slots()[zone - 1]))
}

/// Whether a connection moving from zone `from` to the costlier zone `to`
/// is dropped in `state` (`Y > K - c_j + c_m` and `n_m > 0`).
pub fn dropping_set_membership(state: &SystemState, from: usize, to: usize, scenario: &CellScenario) -> Result<bool> {
    scenario.check_zone(from)?;
    scenario.check_zone(to)?;
    if to >= from {
        return Err(Error::NotADroppingMove { from, to });
    }
    let slots = scenario.slots();
    let threshold = i64::from(scenario.capacity_slots()) - i64::from(slots[to - 1]) + i64::from(slots[from - 1]);
    Ok(i64::from(state.load) > threshold && state.counts[from - 1] > 0)
}

/// Concentric zone layout on the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneGeometry {
    /// Outer radius of each zone, 0-based; `outer[0] == 1`.
    outer: Vec<f64>,
}

impl ZoneGeometry {
    pub fn from_area_fractions(fractions: &[f64]) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::InvalidScenario("geometry needs at least one zone".into()));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > AREA_SUM_TOLERANCE || fractions.iter().any(|&f| f <= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "area fractions must be positive and sum to 1, got sum {total}"
            )));
        }
        // Cumulative area from the centre outwards, so the innermost radii
        // carry no rounding from the outer rings.
        let mut outer = vec![0.0; fractions.len()];
        let mut cumulative = 0.0;
        for z in (0..fractions.len()).rev() {
            cumulative += fractions[z] / total;
            outer[z] = cumulative.sqrt();
        }
        outer[0] = 1.0;
        Ok(Self { outer })
    }

    pub fn for_scenario(scenario: &CellScenario) -> Self {
        let fractions: Vec<f64> = scenario.mcs().iter().map(|c| c.area_fraction).collect();
        Self::from_area_fractions(&fractions).expect("scenario fractions are validated")
    }

    pub fn zones(&self) -> usize {
        self.outer.len()
    }

    /// Outer radius of each zone, outermost first.
    pub fn outer_radii(&self) -> &[f64] {
        &self.outer
    }

    /// The `M + 1` zone boundaries in ascending order, starting at 0 and
    /// ending at 1.
    pub fn boundary_radii(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.outer.iter().rev().copied()).collect()
    }

    /// Zone containing a point at distance `radius` from the centre. A point
    /// exactly on a boundary belongs to the inner zone.
    pub fn zone_of_radius(&self, radius: f64) -> Result<usize> {
        if !(radius <= 1.0) {
            return Err(Error::OutsideCell(radius));
        }
        Ok(self
            .outer
            .iter()
            .rposition(|&r| radius <= r)
            .map(|z| z + 1)
            .expect("outermost radius is 1"))
    }

    pub fn zone_of_position(&self, x: f64, y: f64) -> Result<usize> {
        self.zone_of_radius(x.hypot(y))
    }
}
