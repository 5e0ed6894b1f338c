//! TOML scenario documents.
//!
//! ```toml
//! [[mcs]]
//! label = "QPSK 1/2"
//! slots = 14
//! area_fraction = 0.166352
//!
//! [traffic]
//! lambda = 2.0
//! mean_watch_minutes = 20.0
//!
//! [capacity]
//! K_connections = 20
//!
//! [mobility]
//! model = "markov"
//! w_minutes = 10.0
//!
//! [alpha]
//! policy = "fixed"
//! value = 0.4
//!
//! [sweep]
//! parameter = "lambda"
//! values = [0.4, 0.8, 1.2]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use iptv_amc::sim::MobilityEngine;
use iptv_amc::{AlphaPolicy, CellScenario, McsClass, MobilitySpec, TransitionRates};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub mcs: Vec<McsEntry>,
    pub traffic: Traffic,
    pub capacity: Capacity,
    #[serde(default)]
    pub mobility: Mobility,
    #[serde(default)]
    pub alpha: Alpha,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsEntry {
    pub label: String,
    pub slots: u32,
    pub area_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Traffic {
    pub lambda: f64,
    pub mean_watch_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capacity {
    #[serde(
        rename = "K_connections",
        alias = "k_connections",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub k_connections: Option<u32>,
    #[serde(
        rename = "K_slots",
        alias = "k_slots",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub k_slots: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityModel {
    #[default]
    None,
    Markov,
    RandomWalk,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mobility {
    #[serde(default)]
    pub model: MobilityModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_minutes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_per_second: Option<f64>,
    /// `M x (M + 1)` per-minute rates; row `i` is zone `i + 1`, column 0 is
    /// outside the cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaKind {
    #[default]
    Fitted,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alpha {
    #[serde(default)]
    pub policy: AlphaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "K", alias = "k")]
    K,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// One sweep point: the scenario to evaluate and the value it came from.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub scenario: CellScenario,
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> CliResult<Self> {
        let doc: Self = toml::from_str(text).map_err(|e| CliError::Validation(format!("scenario: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents always serialize")
    }

    fn validate(&self) -> CliResult<()> {
        if self.mcs.is_empty() {
            return Err(CliError::validation("mcs", "at least one MCS entry is required"));
        }
        for (i, entry) in self.mcs.iter().enumerate() {
            if entry.slots == 0 {
                return Err(CliError::validation(&format!("mcs[{i}].slots"), "must be at least 1"));
            }
            if !(entry.area_fraction.is_finite() && entry.area_fraction > 0.0) {
                return Err(CliError::validation(
                    &format!("mcs[{i}].area_fraction"),
                    format!("must be positive, got {}", entry.area_fraction),
                ));
            }
        }
        match (self.capacity.k_connections, self.capacity.k_slots) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(CliError::validation(
                    "capacity",
                    "exactly one of K_connections or K_slots is required",
                ))
            }
            _ => {}
        }
        let m = &self.mobility;
        let positive = |name: &str, value: Option<f64>| match value {
            Some(x) if x > 0.0 && x.is_finite() => Ok(()),
            Some(x) => Err(CliError::validation(
                &format!("mobility.{name}"),
                format!("must be positive, got {x}"),
            )),
            None => Err(CliError::validation(
                &format!("mobility.{name}"),
                format!("required for model {:?}", m.model),
            )),
        };
        match m.model {
            MobilityModel::None => {}
            MobilityModel::Markov => positive("w_minutes", m.w_minutes)?,
            MobilityModel::RandomWalk => {
                positive("d", m.d)?;
                positive("f_per_second", m.f_per_second)?;
            }
            MobilityModel::Explicit => {
                if m.rates.is_none() {
                    return Err(CliError::validation("mobility.rates", "required for model Explicit"));
                }
            }
        }
        if let Some(rates) = &m.rates {
            let zones = self.mcs.len();
            if rates.len() != zones {
                return Err(CliError::validation(
                    "mobility.rates",
                    format!("expected {zones} rows (one per zone), got {}", rates.len()),
                ));
            }
            if let Some((i, row)) = rates.iter().enumerate().find(|(_, r)| r.len() != zones + 1) {
                return Err(CliError::validation(
                    &format!("mobility.rates[{i}]"),
                    format!("expected {} columns, got {}", zones + 1, row.len()),
                ));
            }
            TransitionRates::from_matrix(rates).map_err(|e| CliError::validation("mobility.rates", e))?;
        }
        if let Some(w) = m.w_minutes {
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::validation(
                    "mobility.w_minutes",
                    format!("must be positive, got {w}"),
                ));
            }
        }
        match (self.alpha.policy, self.alpha.value) {
            (AlphaKind::Fixed, None) => {
                return Err(CliError::validation("alpha.value", "required when policy = \"fixed\""))
            }
            (AlphaKind::Fixed, Some(a)) if !(0.0..=1.0).contains(&a) => {
                return Err(CliError::validation(
                    "alpha.value",
                    format!("must lie in [0, 1], got {a}"),
                ))
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            for (i, &x) in sweep.values.iter().enumerate() {
                let path = format!("sweep.values[{i}]");
                match sweep.parameter {
                    SweepParameter::Lambda if !(x >= 0.0 && x.is_finite()) => {
                        return Err(CliError::validation(
                            &path,
                            format!("arrival rate must be >= 0, got {x}"),
                        ))
                    }
                    SweepParameter::K if !(x >= 1.0 && x.fract() == 0.0 && x <= f64::from(u32::MAX)) => {
                        return Err(CliError::validation(
                            &path,
                            format!("K must be a positive integer, got {x}"),
                        ))
                    }
                    _ => {}
                }
            }
        }
        self.base_scenario().map(|_| ())
    }

    pub fn zones(&self) -> usize {
        self.mcs.len()
    }

    fn mcs_classes(&self) -> Vec<McsClass> {
        self.mcs
            .iter()
            .map(|e| McsClass::new(e.label.clone(), e.slots, e.area_fraction))
            .collect()
    }

    /// Rates the analysis and the Markov engine use. A random-walk document
    /// has them only after measurement.
    pub fn analysis_mobility(&self) -> Option<MobilitySpec> {
        let m = &self.mobility;
        match m.model {
            MobilityModel::None => Some(MobilitySpec::None),
            MobilityModel::Markov => Some(MobilitySpec::MarkovSojourn {
                mean_sojourn: m.w_minutes?,
            }),
            MobilityModel::Explicit | MobilityModel::RandomWalk => m
                .rates
                .as_ref()
                .map(|r| MobilitySpec::ExplicitRates(TransitionRates::from_matrix(r).expect("validated"))),
        }
    }

    fn capacity_slots(&self, k_connections: Option<u32>) -> u32 {
        let unit = self.mcs[0].slots;
        match (k_connections, self.capacity.k_connections, self.capacity.k_slots) {
            (Some(k), _, _) | (None, Some(k), _) => k * unit,
            (None, None, Some(slots)) => slots,
            (None, None, None) => unreachable!("validated"),
        }
    }

    /// Scenario at the document's own λ and K. Random-walk documents
    /// without measured rates get no analytical mobility.
    pub fn base_scenario(&self) -> CliResult<CellScenario> {
        let mu = 1.0 / self.traffic.mean_watch_minutes;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(CliError::validation(
                "traffic.mean_watch_minutes",
                format!("must be positive, got {}", self.traffic.mean_watch_minutes),
            ));
        }
        CellScenario::new(
            self.mcs_classes(),
            self.capacity_slots(None),
            self.traffic.lambda,
            mu,
            self.analysis_mobility().unwrap_or(MobilitySpec::None),
        )
        .map_err(|e| CliError::validation("scenario", e))
    }

    /// One scenario per sweep value, in document order. Without a
    /// `[sweep]` section the document's own λ is the single point.
    pub fn sweep_points(&self) -> CliResult<Vec<SweepPoint>> {
        let base = self.base_scenario()?;
        let Some(sweep) = &self.sweep else {
            return Ok(vec![SweepPoint {
                value: self.traffic.lambda,
                scenario: base,
            }]);
        };
        sweep
            .values
            .iter()
            .map(|&value| {
                let scenario = match sweep.parameter {
                    SweepParameter::Lambda => base.with_lambda(value)?,
                    SweepParameter::K => base.with_capacity_slots(self.capacity_slots(Some(value as u32))),
                };
                Ok(SweepPoint { value, scenario })
            })
            .collect::<Result<_, iptv_amc::Error>>()
            .map_err(CliError::from)
    }

    pub fn alpha_policy(&self) -> AlphaPolicy {
        match self.alpha.policy {
            AlphaKind::Fitted => AlphaPolicy::Fitted,
            AlphaKind::Fixed => AlphaPolicy::Fixed(self.alpha.value.expect("validated")),
        }
    }

    /// α for the analysis; `None` when the scenario has no mobility.
    pub fn resolve_alpha(&self, policy: AlphaPolicy, scenario: &CellScenario) -> CliResult<Option<f64>> {
        if !scenario.has_mobility() {
            return Ok(None);
        }
        policy
            .resolve(scenario.mu(), self.mobility.w_minutes)
            .map(Some)
            .map_err(|e| CliError::validation("alpha", e))
    }

    /// Simulation engine implied by the document when no flag overrides it.
    pub fn default_engine(&self) -> EngineChoice {
        match self.mobility.model {
            MobilityModel::RandomWalk => EngineChoice::RandomWalk,
            _ => EngineChoice::Markov,
        }
    }

    pub fn engine(&self, choice: EngineChoice) -> CliResult<MobilityEngine> {
        match choice {
            EngineChoice::Markov => {
                if self.analysis_mobility().is_none() {
                    return Err(CliError::validation(
                        "mobility",
                        "the Markov engine needs rates; run measure-mobility on a random-walk document first",
                    ));
                }
                Ok(MobilityEngine::Markov)
            }
            EngineChoice::RandomWalk => match (self.mobility.d, self.mobility.f_per_second) {
                (Some(d), Some(f)) => Ok(MobilityEngine::RandomWalk {
                    step_distance: d,
                    speed_per_second: f,
                }),
                _ => Err(CliError::validation(
                    "mobility",
                    "the random-walk engine needs d and f_per_second",
                )),
            },
        }
    }

    /// The same document with measured rates attached.
    pub fn with_measured_rates(&self, rates: &TransitionRates, mean_sojourn: f64) -> Self {
        let mut doc = self.clone();
        doc.mobility.model = MobilityModel::Explicit;
        doc.mobility.rates = Some(rates.to_matrix());
        doc.mobility.w_minutes = Some(mean_sojourn);
        doc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Markov,
    RandomWalk,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[[mcs]]
label = "QPSK 1/2"
slots = 14
area_fraction = 0.5

[[mcs]]
label = "16-QAM 1/2"
slots = 7
area_fraction = 0.5

[traffic]
lambda = 1.0
mean_watch_minutes = 20.0

[capacity]
K_connections = 3
"#;

    #[test]
    fn minimal_document() {
        let doc = ScenarioDocument::parse(BASE).unwrap();
        let s = doc.base_scenario().unwrap();
        assert_eq!(s.capacity_slots(), 42);
        assert!(!s.has_mobility());
        assert_eq!(doc.sweep_points().unwrap().len(), 1);
        assert_eq!(doc.resolve_alpha(doc.alpha_policy(), &s).unwrap(), None);
    }

    #[test]
    fn capacity_needs_exactly_one_field() {
        let both = BASE.replace("K_connections = 3", "K_connections = 3\nK_slots = 42");
        let err = ScenarioDocument::parse(&both).unwrap_err();
        assert!(err.to_string().starts_with("capacity:"), "{err}");
        let slots = BASE.replace("K_connections = 3", "K_slots = 40");
        assert_eq!(
            ScenarioDocument::parse(&slots)
                .unwrap()
                .base_scenario()
                .unwrap()
                .capacity_slots(),
            40
        );
    }

    #[test]
    fn field_paths_in_errors() {
        let bad = format!("{BASE}\n[mobility]\nmodel = \"explicit\"\nrates = [[0.1, 0.0, 0.1]]\n");
        let err = ScenarioDocument::parse(&bad).unwrap_err();
        assert!(err.to_string().starts_with("mobility.rates"), "{err}");
        let bad = format!("{BASE}\n[alpha]\npolicy = \"fixed\"\n");
        assert!(ScenarioDocument::parse(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("alpha.value"));
        let bad = format!("{BASE}\n[sweep]\nparameter = \"K\"\nvalues = [2.5]\n");
        assert!(ScenarioDocument::parse(&bad)
            .unwrap_err()
            .to_string()
            .starts_with("sweep.values[0]"));
        let bad = BASE.replace("lambda = 1.0", "lambda = 1.0\nrho = 2");
        assert!(matches!(ScenarioDocument::parse(&bad), Err(CliError::Validation(_))));
    }

    #[test]
    fn k_sweep_and_integer_values() {
        let doc = ScenarioDocument::parse(&format!("{BASE}\n[sweep]\nparameter = \"K\"\nvalues = [2, 4]\n")).unwrap();
        let caps: Vec<u32> = doc
            .sweep_points()
            .unwrap()
            .iter()
            .map(|p| p.scenario.capacity_slots())
            .collect();
        assert_eq!(caps, vec![28, 56]);
    }

    #[test]
    fn explicit_rates_round_trip() {
        let text = format!("{BASE}\n[mobility]\nmodel = \"random_walk\"\nd = 0.08\nf_per_second = 0.0011\n");
        let doc = ScenarioDocument::parse(&text).unwrap();
        assert!(doc.analysis_mobility().is_none());
        assert!(doc.engine(EngineChoice::Markov).is_err());
        let rates = TransitionRates::new(vec![0.1373, 0.1055], vec![0.1413, 0.0]).unwrap();
        let measured = doc.with_measured_rates(&rates, 1.0 / 3.0);
        let again = ScenarioDocument::parse(&measured.to_toml()).unwrap();
        assert_eq!(again, measured);
        assert_eq!(again.base_scenario().unwrap(), measured.base_scenario().unwrap());
        assert!(again.engine(EngineChoice::RandomWalk).is_ok());
    }
}
