/// Stationary performance of one cell configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub capacity_slots: u32,
    /// Slots of one zone-1 connection, the unit of [`Self::mean_bandwidth`].
    pub unit_slots: u32,
    /// Probability that an arriving request is rejected.
    pub blocking_rate: f64,
    /// Rejection probability of a request from each zone, outermost first.
    pub per_zone_rejection: Vec<f64>,
    pub mean_bandwidth_slots: f64,
    /// Mean drop probability of an MCS change, handovers excluded. Zero
    /// without mobility.
    pub dropping_rate: f64,
    /// Conditional drop probability per class; the zone-1 entry is always 0.
    pub drop_probability_by_class: Vec<f64>,
    /// False when no transition rates exist, so no drop can be defined.
    pub dropping_defined: bool,
    pub state_count: Option<u64>,
}

impl PerformanceReport {
    /// Mean bandwidth usage in zone-1 connection units.
    pub fn mean_bandwidth(&self) -> f64 {
        self.mean_bandwidth_slots / f64::from(self.unit_slots)
    }

    pub fn capacity_connections(&self) -> f64 {
        f64::from(self.capacity_slots) / f64::from(self.unit_slots)
    }
}
