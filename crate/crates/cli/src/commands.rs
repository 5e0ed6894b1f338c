//! The five subcommands as library functions returning their rows.

use std::time::Instant;

use iptv_amc::planning::{minimal_capacity, CapacityPoint};
use iptv_amc::sim::{self, Estimate, MobilityMeasurement, SimConfig, SimulationResult};
use iptv_amc::{analyze, fit_alpha_curve, AlphaPolicy, CellScenario, PerformanceReport, QuadraticFit};

use crate::document::{EngineChoice, ScenarioDocument, SweepParameter};
use crate::error::{CliError, CliResult};
use crate::output::{format_number, ResultRow};

pub const DEFAULT_HORIZON: f64 = 200_000.0;
pub const DEFAULT_REPLICATIONS: u32 = 20;
pub const DEFAULT_SEED: u64 = 1;

/// Simulation flags shared by `simulate`, `plan --confirm-sim` and
/// `measure-mobility`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimFlags {
    pub horizon: f64,
    /// Defaults to ten mean watch times.
    pub warmup: Option<f64>,
    pub replications: u32,
    pub seed: u64,
    /// Defaults to the document's mobility model.
    pub engine: Option<EngineChoice>,
}

impl Default for SimFlags {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            warmup: None,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            engine: None,
        }
    }
}

impl SimFlags {
    fn config(&self, doc: &ScenarioDocument, scenario: &CellScenario) -> CliResult<SimConfig> {
        let engine = doc.engine(self.engine.unwrap_or_else(|| doc.default_engine()))?;
        let mut config = SimConfig::new(scenario.clone(), self.horizon, self.replications, self.seed, engine);
        if let Some(w) = self.warmup {
            config = config.with_warmup(w);
        }
        config.validate()?;
        Ok(config)
    }
}

fn policy(doc: &ScenarioDocument, alpha: Option<AlphaPolicy>) -> AlphaPolicy {
    alpha.unwrap_or_else(|| doc.alpha_policy())
}

fn fill_analysis(row: &mut ResultRow, report: &PerformanceReport) {
    row.pb_analysis = Some(report.blocking_rate);
    row.ey_analysis = Some(report.mean_bandwidth());
    row.pd_analysis = report.dropping_defined.then_some(report.dropping_rate);
    row.state_count = report.state_count;
}

fn fill_simulation(row: &mut ResultRow, result: &SimulationResult) {
    row.pb_sim = Some(result.blocking_rate);
    row.ey_sim = Some(result.mean_bandwidth());
    row.pd_sim = (result.counts.drop_triggers > 0).then_some(result.dropping_rate);
}

/// Analytical rows, one per sweep value.
pub fn cmd_analyze(doc: &ScenarioDocument, alpha: Option<AlphaPolicy>, timing: bool) -> CliResult<Vec<ResultRow>> {
    if doc.analysis_mobility().is_none() {
        return Err(CliError::validation(
            "mobility.rates",
            "a random-walk document needs measured rates for analysis; run measure-mobility first",
        ));
    }
    let policy = policy(doc, alpha);
    doc.sweep_points()?
        .into_iter()
        .map(|point| {
            let start = Instant::now();
            let alpha_used = doc.resolve_alpha(policy, &point.scenario)?;
            let report = analyze(&point.scenario, alpha_used.unwrap_or(0.0))?;
            let mut row = ResultRow {
                sweep_value: point.value,
                alpha_used,
                ..Default::default()
            };
            fill_analysis(&mut row, &report);
            row.wall_seconds = timing.then(|| start.elapsed().as_secs_f64());
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub rows: Vec<ResultRow>,
    pub results: Vec<SimulationResult>,
    pub warnings: Vec<String>,
}

/// Simulated rows, with the analysis alongside whenever the document has
/// rates to analyze.
pub fn cmd_simulate(
    doc: &ScenarioDocument,
    flags: &SimFlags,
    alpha: Option<AlphaPolicy>,
    timing: bool,
) -> CliResult<SimulateOutcome> {
    let policy = policy(doc, alpha);
    let mut warnings = Vec::new();
    if flags.replications < 2 {
        warnings.push("one replication gives no confidence interval; CI columns are left empty".to_string());
    }
    let analyzable = doc.analysis_mobility().is_some();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for point in doc.sweep_points()? {
        let start = Instant::now();
        let config = flags.config(doc, &point.scenario)?;
        let result = sim::simulate(&config)?;
        let mut row = ResultRow {
            sweep_value: point.value,
            ..Default::default()
        };
        if analyzable {
            let alpha_used = doc.resolve_alpha(policy, &point.scenario)?;
            let report = analyze(&point.scenario, alpha_used.unwrap_or(0.0))?;
            fill_analysis(&mut row, &report);
            row.alpha_used = alpha_used;
        }
        fill_simulation(&mut row, &result);
        row.wall_seconds = timing.then(|| start.elapsed().as_secs_f64());
        rows.push(row);
        results.push(result);
    }
    Ok(SimulateOutcome {
        rows,
        results,
        warnings,
    })
}

pub const PLAN_HEADER: [&str; 8] = [
    "lambda",
    "K",
    "Pb_analysis",
    "EY_analysis",
    "Pd_analysis",
    "alpha_used",
    "minimal",
    "Pb_sim",
];

/// Capacity plan for one arrival rate.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub lambda: f64,
    pub minimal_k: u32,
    pub alpha_used: Option<f64>,
    pub scanned: Vec<CapacityPoint>,
    /// Simulation at the chosen `K`, when confirmation was requested.
    pub confirmation: Option<SimulationResult>,
}

impl PlanResult {
    pub fn rows(&self) -> Vec<Vec<String>> {
        self.scanned
            .iter()
            .map(|p| {
                let chosen = p.k == self.minimal_k;
                let sim = match (&self.confirmation, chosen) {
                    (Some(r), true) => format_number(r.blocking_rate.mean),
                    _ => String::new(),
                };
                vec![
                    format_number(self.lambda),
                    p.k.to_string(),
                    format_number(p.report.blocking_rate),
                    format_number(p.report.mean_bandwidth()),
                    if p.report.dropping_defined {
                        format_number(p.report.dropping_rate)
                    } else {
                        String::new()
                    },
                    self.alpha_used.map(format_number).unwrap_or_default(),
                    chosen.to_string(),
                    sim,
                ]
            })
            .collect()
    }
}

/// Smallest `K` (zone-1 connection units) with analytical `P_b < target`,
/// for the document's λ or for every λ of a `lambda` sweep.
pub fn cmd_plan(
    doc: &ScenarioDocument,
    alpha: Option<AlphaPolicy>,
    target: f64,
    k_min: u32,
    k_max: u32,
    confirm: Option<&SimFlags>,
) -> CliResult<Vec<PlanResult>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(CliError::validation(
            "--target-pb",
            format!("must lie in (0, 1), got {target}"),
        ));
    }
    if k_min == 0 || k_min > k_max {
        return Err(CliError::validation(
            "--k-min/--k-max",
            format!("need 1 <= k-min <= k-max, got {k_min}..={k_max}"),
        ));
    }
    if doc.sweep.as_ref().is_some_and(|s| s.parameter == SweepParameter::K) {
        return Err(CliError::validation(
            "sweep.parameter",
            "plan searches over K; sweep lambda instead",
        ));
    }
    if doc.analysis_mobility().is_none() {
        return Err(CliError::validation(
            "mobility.rates",
            "planning needs rates; run measure-mobility on a random-walk document first",
        ));
    }
    let policy = policy(doc, alpha);
    doc.sweep_points()?
        .into_iter()
        .map(|point| {
            let alpha_used = doc.resolve_alpha(policy, &point.scenario)?;
            let plan = minimal_capacity(&point.scenario, alpha_used.unwrap_or(0.0), target, k_min, k_max)?;
            let confirmation = match confirm {
                Some(flags) => {
                    let sized = point
                        .scenario
                        .with_capacity_slots(plan.minimal_k * point.scenario.unit_slots());
                    Some(sim::simulate(&flags.config(doc, &sized)?)?)
                }
                None => None,
            };
            Ok(PlanResult {
                lambda: point.value,
                minimal_k: plan.minimal_k,
                alpha_used,
                scanned: plan.scanned,
                confirmation,
            })
        })
        .collect()
}

pub const FIT_HEADER: [&str; 4] = ["mu_w", "alpha", "alpha_fit", "residual"];

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub fit: QuadraticFit,
    pub points: Vec<(f64, f64)>,
}

impl FitOutcome {
    pub fn rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|&(x, a)| {
                let y = self.fit.alpha(x);
                vec![
                    format_number(x),
                    format_number(a),
                    format_number(y),
                    format_number(a - y),
                ]
            })
            .collect()
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|&(x, a)| (a - self.fit.alpha(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Reads `(mu_w, alpha)` pairs from CSV with a header row.
pub fn read_alpha_points(text: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| CliError::validation("points", e))?;
            let field = |k: usize| -> CliResult<f64> {
                rec.get(k)
                    .ok_or_else(|| CliError::validation(&format!("points row {}", i + 1), "needs two columns"))?
                    .parse()
                    .map_err(|e| CliError::validation(&format!("points row {}", i + 1), e))
            };
            Ok((field(0)?, field(1)?))
        })
        .collect()
}

pub fn cmd_fit_alpha(points: &[(f64, f64)]) -> CliResult<FitOutcome> {
    let fit = fit_alpha_curve(points)?;
    Ok(FitOutcome {
        fit,
        points: points.to_vec(),
    })
}

pub const MEASURE_HEADER: [&str; 5] = ["from", "to", "rate_per_min", "rate_ci99", "crossings"];

#[derive(Debug, Clone)]
pub struct MeasureOutcome {
    pub measurement: MobilityMeasurement,
    /// The input document with the measured rates as explicit mobility.
    pub document: ScenarioDocument,
    pub warnings: Vec<String>,
}

impl MeasureOutcome {
    /// One row per adjacent direction; `to = 0` is a handover.
    pub fn rows(&self) -> Vec<Vec<String>> {
        let m = &self.measurement;
        let zones = m.zone_time.len();
        let mut rows = Vec::new();
        for z in 0..zones {
            for to in [z, z + 2] {
                if to > zones {
                    continue;
                }
                let est: Estimate = m.rate_estimates[z][to];
                rows.push(vec![
                    (z + 1).to_string(),
                    to.to_string(),
                    format_number(m.rates.rate(z + 1, to)),
                    est.half_width.map(format_number).unwrap_or_default(),
                    m.crossings[z][to].to_string(),
                ]);
            }
        }
        rows
    }
}

/// Random-walk transition rates on free users, plus the document to feed
/// them back into the analysis.
pub fn cmd_measure_mobility(doc: &ScenarioDocument, flags: &SimFlags) -> CliResult<MeasureOutcome> {
    let flags = SimFlags {
        engine: Some(EngineChoice::RandomWalk),
        ..*flags
    };
    let scenario = doc.base_scenario()?;
    let config = flags.config(doc, &scenario)?;
    let measurement = sim::measure_transition_rates(&config)?;
    let warnings = measurement
        .sparse_directions
        .iter()
        .map(|(from, to)| {
            format!(
                "direction {from} -> {to} has fewer than {} crossings; its rate is unreliable",
                sim::MIN_CROSSINGS
            )
        })
        .collect();
    let document = doc.with_measured_rates(&measurement.rates, measurement.mean_sojourn);
    Ok(MeasureOutcome {
        measurement,
        document,
        warnings,
    })
}
