//! Benchmark designs, an independent Dinkelbach-type solver for
//! cross-checking, and the radar detection probability.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{self, Cone, Sense, SolveStatus};
use crate::encoding::{CovarianceLayout, ProgramBuilder};
use crate::hermitian::ComplexVector;
use crate::model::{throughput_and_ee, Covariances, Metrics, ScenarioConfig};
use crate::pipeline::{design, Design, DesignOptions, PipelineError};
use crate::rankone::{extract, BeamformerSolution};
use crate::sca::{self, CovarianceSolution, ScaError, ScaOptions};
use crate::surrogate::{
    add_rate_cones, normalized_channels, rate_bound_terms, taylor_coefficients, ConstraintSet,
};

/// The design without beampattern constraints.
pub fn comm_only(scenario: &ScenarioConfig, opts: &DesignOptions) -> Result<Design, PipelineError> {
    design(&scenario.without_targets(), opts)
}

/// Result of the max-min beampattern benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingDesign {
    /// Maximized minimum gain over the sensing directions, watts.
    pub min_gain: f64,
    /// Gain toward each sensing direction, watts.
    pub gains: Vec<f64>,
    pub beamformers: BeamformerSolution,
    pub metrics: Metrics,
}

/// Maximizes the smallest beampattern gain over the sensing directions
/// subject to the SINR targets, the power budget and PSD covariances. The
/// beampattern thresholds of the scenario are not used. Scenarios without
/// users are accepted.
pub fn sensing_dominated(scenario: &ScenarioConfig, opts: &ScaOptions) -> Result<SensingDesign, PipelineError> {
    let channels = scenario.channels()?;
    let targets = scenario.target_steering()?;
    let normalized = normalized_channels(&channels, &scenario.noise_power);
    let k = scenario.num_users;
    let m = scenario.num_targets;

    let mut b = ProgramBuilder::new();
    let layout = CovarianceLayout::allocate(&mut b, scenario.num_antennas, k);
    let nn = b.cone(Cone::Nonneg { dim: 1 + m + k + 1 });
    let g = nn;
    for (i, a) in targets.iter().enumerate() {
        let mut terms = layout.total_quad_terms(a, 1.0);
        terms.extend([(g, -1.0), (nn + 1 + i, -1.0)]);
        b.row(terms, 0.0);
    }
    ConstraintSet { sinr: true, budget: true, beampattern: false }.add_rows(
        &mut b,
        &layout,
        scenario,
        &normalized,
        &targets,
        nn + 1 + m,
    );
    b.objective(vec![(g, 1.0)]);
    let problem = b.finish(Sense::Maximize, None);
    let sol = conic::solve(&problem, &opts.solver)?;
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::PrimalInfeasible => {
            return Err(ScaError::InfeasibleScenario {
                reason: "SINR targets cannot be met within the power budget".into(),
                phase_one_power: None,
                certificate: sol.certificate,
            }
            .into())
        }
        status => return Err(ScaError::Solver { stage: "sensing benchmark", status, iteration: 0 }.into()),
    }
    let covs = layout.decode(&sol.x)?;
    let relaxed = CovarianceSolution { covariances: covs, t: 0.0, u: 0.0 };
    let beamformers = extract(&relaxed, &channels)?;
    let total = beamformers.covariances().total();
    let gains = targets.iter().map(|a| total.quad_form(a)).collect();
    let metrics = throughput_and_ee(&beamformers.covariances(), &channels, scenario)?;
    Ok(SensingDesign { min_gain: sol.x[g], gains, beamformers, metrics })
}

/// Outcome of the Dinkelbach-type cross-check.
#[derive(Debug, Clone, PartialEq)]
pub struct DinkelbachResult {
    pub covariances: Covariances,
    /// Final ratio `η'`, rate over power without the rate-dependent term.
    pub ee_prime: f64,
    pub iterations: usize,
    pub metrics: Metrics,
}

/// Relative change of `η` at which the cross-check stops.
pub const DINKELBACH_TOL: f64 = 1e-7;

/// Alternative outer loop: with `η` fixed, maximize the rate lower bound
/// minus `η` times the consumed power (a concave problem), then set `η` to
/// the achieved rate over power. Starts from the phase-I point.
pub fn dinkelbach_cross_check(scenario: &ScenarioConfig, opts: &ScaOptions) -> Result<DinkelbachResult, PipelineError> {
    scenario.validate()?;
    let channels = scenario.channels()?;
    let init = sca::initialize(scenario, &channels, opts)?;
    let mut covs = init.solution.covariances;
    let mut eta = throughput_and_ee(&covs, &channels, scenario)?.ee_prime;
    let mut iterations = 0;
    for iter in 1..=opts.max_iters {
        iterations = iter;
        let next = dinkelbach_step(scenario, &channels, &covs, eta, opts, iter)?;
        let next_eta = throughput_and_ee(&next, &channels, scenario)?.ee_prime;
        if next_eta < eta {
            // The ratio cannot decrease in exact arithmetic; stop at the incumbent.
            break;
        }
        covs = next;
        let done = next_eta - eta <= DINKELBACH_TOL * eta.abs().max(1.0);
        eta = next_eta;
        if done {
            break;
        }
    }
    let metrics = throughput_and_ee(&covs, &channels, scenario)?;
    Ok(DinkelbachResult { covariances: covs, ee_prime: metrics.ee_prime, iterations, metrics })
}

fn dinkelbach_step(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    covs: &Covariances,
    eta: f64,
    opts: &ScaOptions,
    iteration: usize,
) -> Result<Covariances, PipelineError> {
    let noise = &scenario.noise_power;
    let point = taylor_coefficients(covs, 1.0, channels, noise)?;
    let normalized = normalized_channels(channels, noise);
    let targets = scenario.target_steering()?;
    let set = ConstraintSet { sinr: true, budget: true, beampattern: true };

    let mut b = ProgramBuilder::new();
    let layout = CovarianceLayout::allocate(&mut b, scenario.num_antennas, scenario.num_users);
    let nn = b.cone(Cone::Nonneg { dim: set.count(scenario) });
    let exp_cones = add_rate_cones(&mut b, &layout, &normalized);
    set.add_rows(&mut b, &layout, scenario, &normalized, &targets, nn);
    let (rate_terms, _) = rate_bound_terms(&layout, &normalized, &exp_cones, &point, noise);
    b.objective(rate_terms);
    b.objective(layout.total_trace_terms(-eta / scenario.amplifier_efficiency));
    let problem = b.finish(Sense::Maximize, None);
    let sol = conic::solve(&problem, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(ScaError::Solver { stage: "Dinkelbach", status: sol.status, iteration }.into());
    }
    Ok(layout.decode(&sol.x)?)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("false-alarm probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("{name} must be nonnegative and finite, got {value}")]
    InvalidInput { name: &'static str, value: f64 },
}

/// First-order Marcum Q-function `Q₁(a, b)` for `a, b ≥ 0`.
///
/// Uses `Q₁(a, b) = P(M ≤ N)` with independent `N ~ Poisson(a²/2)` and
/// `M ~ Poisson(b²/2)`. Values above one half are computed as
/// `1 − P(M > N)` from the survival function of `M`, which keeps the
/// result accurate (and monotone) close to one.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    let alpha = 0.5 * a * a;
    let beta = 0.5 * b * b;
    if beta == 0.0 {
        return 1.0;
    }
    let n_pmf = poisson_pmf(alpha);
    let m_pmf = poisson_pmf(beta);
    let mut cdf_m = 0.0;
    let mut direct = 0.0;
    for (n, p) in n_pmf.iter().enumerate() {
        cdf_m = (cdf_m + m_pmf.get(n).copied().unwrap_or(0.0)).min(1.0);
        direct += p * cdf_m;
    }
    if direct <= 0.5 {
        return direct.clamp(0.0, 1.0);
    }
    // survival[n] = P(M > n), accumulated from the far tail inwards.
    let mut survival = vec![0.0; m_pmf.len()];
    let mut tail = 0.0;
    for m in (0..m_pmf.len()).rev() {
        survival[m] = tail;
        tail += m_pmf[m];
    }
    let complement: f64 = n_pmf.iter().zip(&survival).map(|(p, s)| p * s).sum();
    (1.0 - complement).clamp(0.0, 1.0)
}

/// Poisson probabilities `P(X = n)` for `n` up to `λ + 12√λ + 60`, where the
/// remaining tail is negligible.
fn poisson_pmf(lambda: f64) -> Vec<f64> {
    let last = (lambda + 12.0 * lambda.sqrt() + 60.0).ceil() as usize;
    if lambda == 0.0 {
        let mut out = vec![0.0; last + 1];
        out[0] = 1.0;
        return out;
    }
    let ln_lambda = lambda.ln();
    let mut ln_p = -lambda;
    let mut out = Vec::with_capacity(last + 1);
    out.push(ln_p.exp());
    for n in 1..=last {
        ln_p += ln_lambda - (n as f64).ln();
        out.push(ln_p.exp());
    }
    out
}

/// Detection parameters for a point-like target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSettings {
    /// Target reflection power, watts.
    pub target_power: f64,
    /// Radar receiver noise, watts.
    pub radar_noise: f64,
    pub false_alarm: f64,
}

impl Default for DetectionSettings {
    /// Target at 25 dBW, noise at 0 dBW, false-alarm probability 1e−5.
    fn default() -> Self {
        Self { target_power: 10f64.powf(2.5), radar_noise: 1.0, false_alarm: 1e-5 }
    }
}

/// Detection probability of a point target illuminated with beampattern
/// gain `gain`, using the radar SNR `gain · target_power / radar_noise`.
pub fn detection_probability(gain: f64, target_power: f64, radar_noise: f64, p_fa: f64) -> Result<f64, DetectionError> {
    for (name, value) in [("gain", gain), ("target_power", target_power)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(DetectionError::InvalidInput { name, value });
        }
    }
    if !(radar_noise > 0.0 && radar_noise.is_finite()) {
        return Err(DetectionError::InvalidInput { name: "radar_noise", value: radar_noise });
    }
    if !(p_fa > 0.0 && p_fa <= 1.0) {
        return Err(DetectionError::InvalidProbability(p_fa));
    }
    let snr = gain * target_power / radar_noise;
    Ok(marcum_q1((2.0 * snr).sqrt(), (-2.0 * p_fa.ln()).sqrt()))
}

impl DetectionSettings {
    pub fn probability(&self, gain: f64) -> Result<f64, DetectionError> {
        detection_probability(gain, self.target_power, self.radar_noise, self.false_alarm)
    }
}
