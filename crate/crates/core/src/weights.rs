use crate::error::Result;
use crate::exact::ProductFormKernel;
use crate::mobility::MobilityKernel;
use crate::model::{for_each_state, CellScenario, SystemState};
use crate::profile::LoadProfile;

#[derive(Debug, Clone)]
pub(crate) enum Kernel {
    ProductForm(ProductFormKernel),
    Mobility(MobilityKernel),
}

impl Kernel {
    #[inline]
    pub(crate) fn log_weight(&self, counts: &[u32]) -> Result<f64> {
        match self {
            Kernel::ProductForm(k) => Ok(k.log_weight(counts)),
            Kernel::Mobility(k) => k.log_weight(counts),
        }
    }
}

/// One pass over every state with load up to `max_load`.
pub(crate) fn fill_profile(slots: &[u32], max_load: u32, kernel: &Kernel) -> Result<LoadProfile> {
    let mut profile = LoadProfile::new(slots, max_load);
    let mut failure = None;
    match kernel {
        // Split so the product-form path stays branch-free per state.
        Kernel::ProductForm(k) => {
            for_each_state(slots, max_load, |counts, load| {
                profile.add(counts, load, k.log_weight(counts));
            });
        }
        Kernel::Mobility(k) => {
            for_each_state(slots, max_load, |counts, load| {
                if failure.is_some() {
                    return;
                }
                match k.log_weight(counts) {
                    Ok(lw) => profile.add(counts, load, lw),
                    Err(e) => failure = Some(e),
                }
            });
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(profile),
    }
}

/// Unnormalized stationary weights of a cell and their normalization
/// constant, both in natural-log form.
///
/// `exp(log_weight(s) - log_normalizer())` is the stationary probability of
/// state `s`; the empty state always has log-weight 0.
#[derive(Debug, Clone)]
pub struct StationaryWeights {
    kernel: Kernel,
    slots: Vec<u32>,
    capacity: u32,
    log_normalizer: f64,
    states: u64,
}

impl StationaryWeights {
    pub(crate) fn build(scenario: &CellScenario, kernel: Kernel) -> Result<(Self, LoadProfile)> {
        let profile = fill_profile(scenario.slots(), scenario.capacity_slots(), &kernel)?;
        let weights = Self {
            kernel,
            slots: scenario.slots().to_vec(),
            capacity: scenario.capacity_slots(),
            log_normalizer: profile.log_normalizer(scenario.capacity_slots()),
            states: profile.states(),
        };
        Ok((weights, profile))
    }

    /// Log-weight of a state; `-inf` for states outside the sample space.
    pub fn log_weight(&self, state: &SystemState) -> f64 {
        if state.counts().len() != self.slots.len() || state.load() > self.capacity {
            return f64::NEG_INFINITY;
        }
        self.kernel
            .log_weight(state.counts())
            .expect("every state of the sample space was evaluated at construction")
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn probability(&self, state: &SystemState) -> f64 {
        (self.log_weight(state) - self.log_normalizer).exp()
    }

    /// Size of the sample space.
    pub fn state_count(&self) -> u64 {
        self.states
    }
}
