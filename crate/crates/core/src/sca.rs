//! Successive convex approximation loop: phase-I initialization, repeated
//! surrogate solves with the `λ = u/t` update, convergence detection and
//! the activeness checks at the final point.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{self, Certificate, ConicError, ConicProblem, Cone, Sense, SolveStatus, SolverOptions};
use crate::encoding::{CovarianceLayout, ProgramBuilder};
use crate::hermitian::{ComplexVector, LinalgError};
use crate::model::{metrics_from_sinr, sinr, Covariances, ModelError, ScenarioConfig};
use crate::surrogate::{
    big_f, build_subproblem, normalized_channels, rbar, taylor_coefficients, ConstraintSet, ExpansionPoint,
    SurrogateError,
};

/// Margin used to move the phase-I point and `t⁰` strictly inside.
pub const INTERIOR_MARGIN: f64 = 1e-4;

/// A drop of `t` larger than this (relative to `max(1, |t|)`) aborts the run.
pub const MONOTONICITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ScaError {
    #[error("scenario is infeasible: {reason}")]
    InfeasibleScenario { reason: String, phase_one_power: Option<f64>, certificate: Option<Certificate> },
    #[error("{stage} solve ended with status {status} at SCA iteration {iteration}")]
    Solver { stage: &'static str, status: SolveStatus, iteration: usize },
    #[error("t decreased from {previous} to {current} at SCA iteration {iteration}")]
    MonotonicityViolation { iteration: usize, previous: f64, current: f64 },
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

impl ScaError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ScaError::InfeasibleScenario { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOptions {
    pub max_iters: usize,
    pub solver: SolverOptions,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self { max_iters: 100, solver: SolverOptions::default() }
    }
}

/// Relaxed (lifted) solution together with the auxiliary `t` and `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSolution {
    pub covariances: Covariances,
    pub t: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iter: usize,
    pub t: f64,
    pub u: f64,
    pub lambda: f64,
    pub objective: f64,
    pub gap: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateLog {
    pub records: Vec<IterateRecord>,
    pub termination: Termination,
    /// Subproblem results that were discarded because `t` fell slightly
    /// (within [`MONOTONICITY_TOL`]) below the incumbent.
    pub rejected_steps: usize,
}

/// Starting point for the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub solution: CovarianceSolution,
    pub lambda: f64,
    /// Minimum transmit power meeting the SINR and beampattern constraints.
    pub phase_one_power: f64,
}

/// Full result of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub solution: CovarianceSolution,
    pub log: IterateLog,
    /// Expansion point of the last accepted subproblem.
    pub expansion: ExpansionPoint,
    pub init: Initialization,
}

/// Phase-I problem: minimize total transmit power subject to the SINR and
/// beampattern constraints, optionally with the power budget as well.
pub fn phase_one_problem(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    with_budget: bool,
) -> Result<(ConicProblem, CovarianceLayout), ScaError> {
    let normalized = normalized_channels(channels, &scenario.noise_power);
    let targets = scenario.target_steering()?;
    let set = ConstraintSet { sinr: true, budget: with_budget, beampattern: true };
    let mut b = ProgramBuilder::new();
    let layout = CovarianceLayout::allocate(&mut b, scenario.num_antennas, scenario.num_users);
    let slacks = set.count(scenario);
    let first = if slacks > 0 { b.cone(Cone::Nonneg { dim: slacks }) } else { 0 };
    set.add_rows(&mut b, &layout, scenario, &normalized, &targets, first);
    b.objective(layout.total_trace_terms(1.0));
    Ok((b.finish(Sense::Minimize, None), layout))
}

/// Solves phase-I and returns the minimum-power covariances.
///
/// The budget-constrained program is solved first: its optimum is the
/// minimum-power point whenever the scenario is feasible, and its bounded
/// feasible set keeps the solve well scaled when it is not. An infeasible
/// scenario is reported with the Farkas certificate of that program and,
/// when it can be computed, the unconstrained minimum power.
pub fn phase_one(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    opts: &ScaOptions,
) -> Result<(Covariances, f64), ScaError> {
    let (problem, layout) = phase_one_problem(scenario, channels, true)?;
    let sol = conic::solve(&problem, &opts.solver)?;
    match sol.status {
        SolveStatus::Optimal => {
            let covs = layout.decode(&sol.x)?;
            let power = covs.transmit_power();
            Ok((covs, power))
        }
        SolveStatus::PrimalInfeasible => {
            let (uncapped, uncapped_layout) = phase_one_problem(scenario, channels, false)?;
            let free = conic::solve(&uncapped, &opts.solver)?;
            let (reason, phase_one_power) = match free.status {
                SolveStatus::Optimal => {
                    let power = uncapped_layout.decode(&free.x)?.transmit_power();
                    (
                        format!(
                            "minimum transmit power {power:.6e} W meeting SINR and beampattern constraints exceeds the budget {:.6e} W",
                            scenario.p_max
                        ),
                        Some(power),
                    )
                }
                SolveStatus::PrimalInfeasible => {
                    ("SINR and beampattern constraints admit no covariances at any power".into(), None)
                }
                _ => (format!("no covariances within the budget {:.6e} W meet the SINR and beampattern constraints", scenario.p_max), None),
            };
            Err(ScaError::InfeasibleScenario { reason, phase_one_power, certificate: sol.certificate })
        }
        status => Err(ScaError::Solver { stage: "phase-I", status, iteration: 0 }),
    }
}

/// Builds the starting point from the phase-I solution: inflates it toward
/// the interior, sets `u⁰` from the power model and `t⁰` just below `ΣR/u⁰`.
pub fn initialize(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    opts: &ScaOptions,
) -> Result<Initialization, ScaError> {
    scenario.validate()?;
    let (covs, power) = phase_one(scenario, channels, opts)?;
    let factor = if power > 0.0 { (1.0 + INTERIOR_MARGIN).min(scenario.p_max / power) } else { 1.0 };
    let covs = covs.scaled(factor);
    let (t, u, lambda) = starting_scalars(&covs, channels, scenario)?;
    Ok(Initialization { solution: CovarianceSolution { covariances: covs, t, u }, lambda, phase_one_power: power })
}

/// `(t⁰, u⁰, λ⁰)` for given covariances. A zero-rate point has no finite
/// `u/t`; `λ⁰ = u⁰` is used there, as if `t⁰` were one.
fn starting_scalars(
    covs: &Covariances,
    channels: &[ComplexVector],
    scenario: &ScenarioConfig,
) -> Result<(f64, f64, f64), ScaError> {
    let u = covs.transmit_power() / scenario.amplifier_efficiency + scenario.p_c;
    let sinrs = (0..covs.num_users())
        .map(|k| sinr(k, covs, channels, &scenario.noise_power))
        .collect::<Result<Vec<_>, _>>()?;
    let rate = metrics_from_sinr(sinrs, 0.0, scenario).rate;
    let t = rate / u * (1.0 - INTERIOR_MARGIN);
    let lambda = if t > 0.0 { u / t } else { u };
    Ok((t, u, lambda))
}

/// Runs phase-I followed by the SCA loop.
pub fn run(scenario: &ScenarioConfig, channels: &[ComplexVector], opts: &ScaOptions) -> Result<ScaResult, ScaError> {
    let init = initialize(scenario, channels, opts)?;
    run_from(scenario, channels, init, opts)
}

/// Runs the SCA loop from a given starting point.
pub fn run_from(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    init: Initialization,
    opts: &ScaOptions,
) -> Result<ScaResult, ScaError> {
    let noise = &scenario.noise_power;
    let mut current = init.solution.clone();
    let mut lambda = init.lambda;
    let mut expansion = taylor_coefficients(&current.covariances, lambda, channels, noise)?;
    let mut records = Vec::new();
    let mut rejected_steps = 0;
    let mut termination = Termination::MaxIters;

    for iter in 1..=opts.max_iters {
        let started = Instant::now();
        let point = taylor_coefficients(&current.covariances, lambda, channels, noise)?;
        let sub = build_subproblem(scenario, channels, &point)?;
        let sol = conic::solve(&sub.problem, &opts.solver)?;
        if sol.status != SolveStatus::Optimal {
            return Err(ScaError::Solver { stage: "surrogate", status: sol.status, iteration: iter });
        }
        let (covs, t, u) = sub.decode(&sol.x)?;
        let previous = current.t;
        let scale = previous.abs().max(1.0);
        if t < previous {
            if previous - t > MONOTONICITY_TOL * scale {
                return Err(ScaError::MonotonicityViolation { iteration: iter, previous, current: t });
            }
            // Solver noise at a fixed point: keep the incumbent.
            rejected_steps += 1;
            termination = Termination::Converged;
            break;
        }
        lambda = u / t;
        expansion = point;
        current = CovarianceSolution { covariances: covs, t, u };
        records.push(IterateRecord {
            iter,
            t,
            u,
            lambda,
            objective: sol.objective,
            gap: sol.gap,
            seconds: started.elapsed().as_secs_f64(),
        });
        if (t - previous).abs() <= scenario.convergence_eps * t.abs().max(1.0) {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(ScaResult { solution: current, log: IterateLog { records, termination, rejected_steps }, expansion, init })
}

/// Relative gaps of the two constraints that must be active at a
/// stationary point of the reformulated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Activeness {
    /// `(u − P'(V)) / u`.
    pub power: f64,
    /// `(Σ_k R̲_k − F(t, u, λ)) / Σ_k R̲_k`.
    pub coupling: f64,
}

pub fn activeness(
    solution: &CovarianceSolution,
    expansion: &ExpansionPoint,
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
) -> Result<Activeness, ScaError> {
    let covs = &solution.covariances;
    let consumed = covs.transmit_power() / scenario.amplifier_efficiency + scenario.p_c;
    let bound: f64 =
        (0..covs.num_users()).map(|k| rbar(covs, expansion, channels, &scenario.noise_power, k)).sum();
    let f = big_f(solution.t, solution.u, expansion.lambda)?;
    Ok(Activeness { power: (solution.u - consumed) / solution.u, coupling: (bound - f) / bound })
}
