//! Approximate stationary solution when connections change MCS mid-session.
//!
//! The mobility chain has no exact product form. Two approximate local
//! balance equations exist, one overestimating and one underestimating the
//! occupancy; their `α`-weighted blend gives a state-dependent factor
//! `f_i(s)` that replaces `λ_i/μ` in the product form:
//!
//! ```text
//! p(s) ∝ Π_i f_i(s)^{n_i} / n_i!
//! ```
//!
//! Zone 1 users leave the cell at the handover rate `v_10`. That rate counts
//! in every departure total (`R(s)` and the `Σ_{j≠1} v_1j` denominators) but
//! contributes no occupancy term, because nobody is tracked outside the cell.

use crate::error::{Error, Result};
use crate::logspace::ln_factorials;
use crate::model::{CellScenario, SystemState, TransitionRates};
use crate::report::PerformanceReport;
use crate::weights::{Kernel, StationaryWeights};

/// How the averaging factor `α` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AlphaPolicy {
    Fixed(f64),
    /// `min{1.48 x² − 1.22 x + 0.63, 1}` with `x = μ w`.
    #[default]
    Fitted,
}

impl AlphaPolicy {
    /// Resolves the policy for a watch-time rate `mu` and mean zone sojourn
    /// `mean_sojourn` (minutes). The fitted policy needs the sojourn.
    pub fn resolve(&self, mu: f64, mean_sojourn: Option<f64>) -> Result<f64> {
        match *self {
            AlphaPolicy::Fixed(alpha) => check_alpha(alpha),
            AlphaPolicy::Fitted => match mean_sojourn {
                Some(w) => fitted_alpha(mu, w),
                None => Err(Error::InvalidScenario(
                    "the fitted alpha policy needs a mean zone sojourn time".into(),
                )),
            },
        }
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveRate { name, value })
    }
}

/// Homogeneous adjacent-zone rate for exponential sojourns of mean `w`:
/// half of the sojourns that end before the session does, per sojourn.
pub fn mobility_rate_from_sojourn(mean_sojourn: f64, mu: f64) -> Result<f64> {
    if mean_sojourn == f64::INFINITY {
        return Ok(0.0);
    }
    check_rate("mean sojourn", mean_sojourn)?;
    check_rate("mu", mu)?;
    let leave = 1.0 / mean_sojourn;
    Ok(0.5 * leave / (mu + leave) * leave)
}

/// Clamped parabolic fit of the averaging factor against `x = μ w`.
pub fn fitted_alpha(mu: f64, mean_sojourn: f64) -> Result<f64> {
    check_rate("mu", mu)?;
    check_rate("mean sojourn", mean_sojourn)?;
    Ok(fitted_alpha_at(mu * mean_sojourn))
}

pub fn fitted_alpha_at(x: f64) -> f64 {
    (1.48 * x * x - 1.22 * x + 0.63).clamp(0.0, 1.0)
}

/// Coefficients of `a x² + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    /// The fitted curve itself, `min{a x² + b x + c, 1}`.
    pub fn alpha(&self, x: f64) -> f64 {
        self.eval(x).min(1.0)
    }
}

/// Least-squares fit of the clamped curve `α = min{a x² + b x + c, 1}`.
///
/// Points with `α = 1` are saturated: once the parabola reaches 1 there,
/// they fit exactly and leave the regression. The remaining points are an
/// ordinary quadratic least-squares problem, re-solved until the set of
/// saturated points is stable. Without saturated points this is plain OLS.
pub fn fit_alpha_curve(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    let all = vec![true; points.len()];
    let mut active = all.clone();
    let mut fit = fit_quadratic_ols_subset(points, &active)?;
    for _ in 0..points.len() {
        let next: Vec<bool> = points
            .iter()
            .map(|&(x, alpha)| !((alpha - 1.0).abs() < 1e-12 && fit.eval(x) >= 1.0))
            .collect();
        if next == active {
            break;
        }
        match fit_quadratic_ols_subset(points, &next) {
            Ok(f) => fit = f,
            Err(_) => return fit_quadratic_ols_subset(points, &all),
        }
        active = next;
    }
    Ok(fit)
}

/// Ordinary least-squares quadratic through every `(x, α)` point.
pub fn fit_quadratic_ols(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    fit_quadratic_ols_subset(points, &vec![true; points.len()])
}

fn fit_quadratic_ols_subset(points: &[(f64, f64)], keep: &[bool]) -> Result<QuadraticFit> {
    let used: Vec<(f64, f64)> = points.iter().zip(keep).filter(|p| *p.1).map(|p| *p.0).collect();
    let mut xs: Vec<f64> = used.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct x values, got {}",
            xs.len()
        )));
    }
    if used.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input".into()));
    }
    let design = nalgebra::DMatrix::from_fn(used.len(), 3, |r, c| used[r].0.powi(2 - c as i32));
    let target = nalgebra::DVector::from_iterator(used.len(), used.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    let coeffs = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    Ok(QuadraticFit {
        a: coeffs[0],
        b: coeffs[1],
        c: coeffs[2],
    })
}

/// `R(s) = λ + Σ_k n_k (μ + Σ_{l≠k} v_kl)`, handover included for zone 1.
/// The full arrival rate is kept even in states that block some zones.
pub fn total_departure_rate(state: &SystemState, scenario: &CellScenario) -> f64 {
    let rates = scenario.rates();
    scenario.lambda()
        + state
            .counts()
            .iter()
            .enumerate()
            .map(|(z, &n)| f64::from(n) * (scenario.mu() + rates.leaving_rate(z)))
            .sum::<f64>()
}

#[derive(Debug, Clone)]
pub(crate) struct MobilityKernel {
    lambda: f64,
    mu: f64,
    alpha: f64,
    zone_lambda: Vec<f64>,
    /// `μ + Σ_l v_kl` per zone.
    leaving: Vec<f64>,
    outward: Vec<f64>,
    inward: Vec<f64>,
    ln_fact: Vec<f64>,
}

impl MobilityKernel {
    pub(crate) fn new(scenario: &CellScenario, alpha: f64, max_load: u32) -> Result<Self> {
        check_alpha(alpha)?;
        let rates = scenario.rates();
        let zones = scenario.zones();
        let max_count = max_load / scenario.slots()[zones - 1];
        Ok(Self {
            lambda: scenario.lambda(),
            mu: scenario.mu(),
            alpha,
            zone_lambda: (0..zones).map(|z| scenario.zone_arrival_rate(z)).collect(),
            leaving: (0..zones).map(|z| scenario.mu() + rates.leaving_rate(z)).collect(),
            outward: rates.outward().to_vec(),
            inward: rates.inward().to_vec(),
            ln_fact: ln_factorials(max_count as usize),
        })
    }

    #[inline]
    fn departure_rate(&self, counts: &[u32]) -> f64 {
        self.lambda
            + counts
                .iter()
                .zip(&self.leaving)
                .map(|(&n, &l)| f64::from(n) * l)
                .sum::<f64>()
    }

    /// `f_i(s)` for 0-based class `i`, given `R(s)`. Needs `n_i ≥ 1`.
    #[inline]
    fn factor(&self, counts: &[u32], i: usize, r_s: f64) -> f64 {
        debug_assert!(counts[i] > 0, "R(s - E_i) needs n_i >= 1");
        let r_minus = r_s - self.leaving[i];
        let mut gain = 0.0;
        let mut out = self.mu;
        let mut crowding = 0.0;
        if i == 0 {
            out += self.outward[0];
        }
        let mut neighbour = |j: usize, v_ij: f64, v_ji: f64| {
            let nj = f64::from(counts[j]);
            if r_minus > 0.0 {
                gain += (nj + 1.0) * v_ji * self.zone_lambda[j];
            }
            out += v_ij * (1.0 - (nj + 1.0) * v_ji / r_s);
            crowding += nj * v_ij;
        };
        if i > 0 {
            neighbour(i - 1, self.outward[i], self.inward[i - 1]);
        }
        if i + 1 < counts.len() {
            neighbour(i + 1, self.inward[i], self.outward[i + 1]);
        }
        let lambda_i = self.zone_lambda[i];
        let inflow_form = if self.alpha > 0.0 {
            let numerator = if r_minus > 0.0 {
                lambda_i + gain / r_minus
            } else {
                lambda_i
            };
            self.alpha * numerator / out
        } else {
            0.0
        };
        inflow_form + (1.0 - self.alpha) * lambda_i / (self.mu * (1.0 + crowding / r_s))
    }

    #[inline]
    pub(crate) fn log_weight(&self, counts: &[u32]) -> Result<f64> {
        let r_s = self.departure_rate(counts);
        let mut lw = 0.0;
        for (i, &n) in counts.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let f = self.factor(counts, i, r_s);
            if f > 0.0 && f.is_finite() {
                lw += f64::from(n) * f.ln() - self.ln_fact[n as usize];
            } else if f == 0.0 && self.zone_lambda[i] == 0.0 {
                return Ok(f64::NEG_INFINITY);
            } else {
                return Err(Error::NonPositiveFactor {
                    class: i + 1,
                    value: f,
                    state: counts.to_vec(),
                });
            }
        }
        Ok(lw)
    }
}

/// The factor `f_i(s)` for 1-based `zone` (the zone must be occupied).
pub fn local_factor(state: &SystemState, zone: usize, scenario: &CellScenario, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if zone == 0 || zone > scenario.zones() {
        return Err(Error::ZoneOutOfRange {
            zone,
            zones: scenario.zones(),
        });
    }
    if state.counts()[zone - 1] == 0 {
        return Err(Error::EmptyClass { zone });
    }
    let kernel = MobilityKernel::new(scenario, alpha, state.load().max(1))?;
    Ok(kernel.factor(state.counts(), zone - 1, total_departure_rate(state, scenario)))
}

/// Stationary weights `Π_i f_i(s)^{n_i}/n_i!` with `f_i` taken at `s`.
pub fn mobility_weights(scenario: &CellScenario, alpha: f64) -> Result<StationaryWeights> {
    let kernel = Kernel::Mobility(MobilityKernel::new(scenario, alpha, scenario.capacity_slots())?);
    Ok(StationaryWeights::build(scenario, kernel)?.0)
}

/// Blocking, bandwidth and dropping under mobility from one enumeration.
pub fn mobility_report(scenario: &CellScenario, alpha: f64) -> Result<PerformanceReport> {
    let kernel = Kernel::Mobility(MobilityKernel::new(scenario, alpha, scenario.capacity_slots())?);
    let (weights, profile) = StationaryWeights::build(scenario, kernel)?;
    let mut report = profile.report(scenario, scenario.capacity_slots());
    report.state_count = Some(weights.state_count());
    Ok(report)
}

pub fn mobility_blocking(scenario: &CellScenario, alpha: f64) -> Result<crate::exact::Blocking> {
    mobility_report(scenario, alpha).map(|r| crate::exact::Blocking::from(&r))
}

/// Mean bandwidth usage under mobility, in zone-1 connection units.
pub fn mobility_bandwidth(scenario: &CellScenario, alpha: f64) -> Result<f64> {
    mobility_report(scenario, alpha).map(|r| r.mean_bandwidth())
}

/// Dropping probabilities under mobility.
#[derive(Debug, Clone, PartialEq)]
pub struct Dropping {
    /// `Σ_{m≥2} σ'_m Pr{dropped | MCS m}`.
    pub rate: f64,
    /// Conditional drop probability per class, zone 1 first (always 0).
    pub by_class: Vec<f64>,
    /// Connection shares `σ'_m` of zones 2..=M.
    pub connection_shares: Vec<f64>,
    /// False when there are no transitions to drop on.
    pub defined: bool,
}

pub fn dropping_rate(scenario: &CellScenario, alpha: f64) -> Result<Dropping> {
    let report = mobility_report(scenario, alpha)?;
    Ok(Dropping {
        rate: report.dropping_rate,
        by_class: report.drop_probability_by_class,
        connection_shares: flow_conservation_weights(scenario.rates()).unwrap_or_default(),
        defined: report.dropping_defined,
    })
}

/// `v_mj / Σ_{i≠m} v_mi` for 0-based zones; the sum includes handover.
pub(crate) fn drop_branch_weight(rates: &TransitionRates, m: usize, j: usize) -> f64 {
    let leaving = rates.leaving_rate(m);
    if leaving == 0.0 {
        return 0.0;
    }
    rates.rate(m + 1, j + 1) / leaving
}

/// Connection shares `σ'_m` of zones 2..=M from flow conservation between
/// neighbours, `σ'_m v_{m,m+1} = σ'_{m+1} v_{m+1,m}`, normalized to one.
///
/// Returns `None` for fewer than two zones or no mobility at all; falls
/// back to equal shares if some neighbour pair has no return flow.
pub fn flow_conservation_weights(rates: &TransitionRates) -> Option<Vec<f64>> {
    let zones = rates.zones();
    if zones < 2 || rates.is_zero() {
        return None;
    }
    let mut shares = Vec::with_capacity(zones - 1);
    shares.push(1.0);
    for z in 1..zones - 1 {
        let back = rates.outward()[z + 1];
        if back == 0.0 {
            return Some(vec![1.0 / (zones - 1) as f64; zones - 1]);
        }
        let next = shares[z - 1] * rates.inward()[z] / back;
        shares.push(next);
    }
    let total: f64 = shares.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Some(vec![1.0 / (zones - 1) as f64; zones - 1]);
    }
    Some(shares.into_iter().map(|s| s / total).collect())
}

/// Exact solution without mobility, the approximation with it.
pub fn analyze(scenario: &CellScenario, alpha: f64) -> Result<PerformanceReport> {
    if scenario.has_mobility() {
        mobility_report(scenario, alpha)
    } else {
        crate::exact::exact_report(scenario)
    }
}
