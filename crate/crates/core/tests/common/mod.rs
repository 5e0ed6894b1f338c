#![allow(dead_code)]

use iptv_amc::{CellScenario, McsClass, MobilitySpec};

pub fn reference_classes() -> Vec<McsClass> {
    vec![
        McsClass::new("QPSK 1/2", 14, 0.166352),
        McsClass::new("QPSK 3/4", 9, 0.287335),
        McsClass::new("16-QAM 1/2", 7, 0.120983),
        McsClass::new("16-QAM 3/4", 5, 0.236295),
        McsClass::new("64-QAM 2/3", 4, 0.068053),
        McsClass::new("64-QAM 3/4", 3, 0.120983),
    ]
}

pub fn reference_cell(k: u32, lambda: f64, mobility: MobilitySpec) -> CellScenario {
    CellScenario::with_capacity_connections(reference_classes(), k, lambda, 0.05, mobility).unwrap()
}

/// Small scenario with descending slot costs and the given fractions.
pub fn small(
    slots: &[u32],
    fractions: &[f64],
    capacity_slots: u32,
    lambda: f64,
    mu: f64,
    mobility: MobilitySpec,
) -> CellScenario {
    let classes = slots
        .iter()
        .zip(fractions)
        .enumerate()
        .map(|(i, (&c, &f))| McsClass::new(format!("m{}", i + 1), c, f))
        .collect();
    CellScenario::new(classes, capacity_slots, lambda, mu, mobility).unwrap()
}
