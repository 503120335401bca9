//! End-to-end design: phase-I, the SCA loop, rank-one extraction and the
//! final checks, plus the parameter sweep built on top of it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{DetectionError, DetectionSettings};
use crate::conic::{ConicError, SolveStatus};
use crate::hermitian::LinalgError;
use crate::model::{
    db_to_linear, dbm_to_watts, throughput_and_ee, validate_solution, FeasibilityReport, Metrics, ModelError,
    ScenarioConfig,
};
use crate::rankone::{extract, verify_preservation, BeamformerSolution, PreservationReport, RankOneError};
use crate::sca::{self, activeness, Activeness, ScaError, ScaOptions, ScaResult};
use crate::surrogate::SurrogateError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ModelError),
    #[error(transparent)]
    Sca(#[from] ScaError),
    #[error(transparent)]
    RankOne(#[from] RankOneError),
    #[error("rank-one extraction changed the solution: {0}")]
    NotPreserved(String),
    #[error(transparent)]
    Detection(#[from] DetectionError),
}

impl PipelineError {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, PipelineError::Sca(e) if e.is_infeasible())
    }

    pub fn is_config(&self) -> bool {
        matches!(self, PipelineError::Config(_))
    }

    /// Short machine-readable status.
    pub fn status(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "CONFIG_ERROR",
            PipelineError::Sca(ScaError::InfeasibleScenario { .. }) => "INFEASIBLE_SCENARIO",
            PipelineError::Sca(ScaError::MonotonicityViolation { .. }) => "MONOTONICITY_VIOLATION",
            PipelineError::Sca(ScaError::Solver { status: SolveStatus::MaxIters, .. }) => "SOLVER_MAX_ITERS",
            PipelineError::Sca(ScaError::Solver { status: SolveStatus::PrimalInfeasible, .. }) => "SOLVER_INFEASIBLE",
            PipelineError::Sca(_) => "SOLVER_FAILURE",
            PipelineError::RankOne(_) | PipelineError::NotPreserved(_) => "EXTRACTION_FAILURE",
            PipelineError::Detection(_) => "DETECTION_ERROR",
        }
    }
}

impl From<SurrogateError> for PipelineError {
    fn from(e: SurrogateError) -> Self {
        PipelineError::Sca(e.into())
    }
}

impl From<LinalgError> for PipelineError {
    fn from(e: LinalgError) -> Self {
        PipelineError::Sca(e.into())
    }
}

impl From<ConicError> for PipelineError {
    fn from(e: ConicError) -> Self {
        PipelineError::Sca(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignOptions {
    pub sca: ScaOptions,
}

/// Everything produced by one design run.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub scenario: ScenarioConfig,
    pub sca: ScaResult,
    pub activeness: Activeness,
    pub beamformers: BeamformerSolution,
    pub preservation: PreservationReport,
    /// Metrics of the extracted beamformers.
    pub metrics: Metrics,
    pub feasibility: FeasibilityReport,
}

impl Design {
    /// Beampattern gain toward each sensing direction, watts.
    pub fn target_gains(&self) -> Result<Vec<f64>, ModelError> {
        let total = self.beamformers.covariances().total();
        self.scenario
            .target_angles
            .iter()
            .map(|&theta| crate::model::beampattern_gain(theta, &total, &self.scenario))
            .collect()
    }
}

pub fn design(scenario: &ScenarioConfig, opts: &DesignOptions) -> Result<Design, PipelineError> {
    scenario.validate()?;
    let channels = scenario.channels()?;
    let result = sca::run(scenario, &channels, &opts.sca)?;
    let active = activeness(&result.solution, &result.expansion, scenario, &channels)?;
    let beamformers = extract(&result.solution, &channels)?;
    let preservation = verify_preservation(&result.solution, &beamformers, scenario, &channels, &result.expansion)?;
    if !preservation.passed {
        let failed: Vec<String> =
            preservation.failures().map(|c| format!("{} ({:.3e} > {:.1e})", c.name, c.deviation, c.tolerance)).collect();
        return Err(PipelineError::NotPreserved(failed.join(", ")));
    }
    let covs = beamformers.covariances();
    let metrics = throughput_and_ee(&covs, &channels, scenario)?;
    let feasibility = validate_solution(&covs, &channels, scenario)?;
    Ok(Design {
        scenario: scenario.clone(),
        sca: result,
        activeness: active,
        beamformers,
        preservation,
        metrics,
        feasibility,
    })
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Beampattern threshold of every target, dBm.
    GammaDbm,
    /// Transmit power budget, dBm.
    PmaxDbm,
    /// SINR target of every user, dB.
    TauDb,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GammaDbm => "gamma_dbm",
            SweepParam::PmaxDbm => "pmax_dbm",
            SweepParam::TauDb => "tau_db",
        }
    }

    pub fn apply(self, scenario: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, ModelError> {
        if !value.is_finite() {
            return Err(ModelError::InvalidConfig(format!("{} value must be finite", self.name())));
        }
        let mut s = scenario.clone();
        match self {
            SweepParam::GammaDbm => s.beampattern_thresholds.iter_mut().for_each(|g| *g = dbm_to_watts(value)),
            SweepParam::PmaxDbm => s.p_max = dbm_to_watts(value),
            SweepParam::TauDb => s.sinr_thresholds.iter_mut().for_each(|t| *t = db_to_linear(value)),
        }
        s.validate()?;
        Ok(s)
    }
}

impl std::str::FromStr for SweepParam {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gamma_dbm" => Ok(SweepParam::GammaDbm),
            "pmax_dbm" => Ok(SweepParam::PmaxDbm),
            "tau_db" => Ok(SweepParam::TauDb),
            other => Err(ModelError::InvalidConfig(format!(
                "unknown sweep parameter '{other}', expected gamma_dbm, pmax_dbm or tau_db"
            ))),
        }
    }
}

/// One row of a sweep. Failed points carry their status and no numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param_value: f64,
    pub ee: Option<f64>,
    pub ee_prime: Option<f64>,
    pub rate: Option<f64>,
    pub power: Option<f64>,
    pub min_target_gain: Option<f64>,
    pub detection_prob: Option<f64>,
    pub status: String,
    pub iters: Option<usize>,
}

/// Runs the design at one sweep value.
pub fn sweep_point(
    scenario: &ScenarioConfig,
    param: SweepParam,
    value: f64,
    opts: &DesignOptions,
    detection: &DetectionSettings,
) -> SweepRow {
    let failed = |status: &str| SweepRow {
        param_value: value,
        ee: None,
        ee_prime: None,
        rate: None,
        power: None,
        min_target_gain: None,
        detection_prob: None,
        status: status.to_string(),
        iters: None,
    };
    let s = match param.apply(scenario, value) {
        Ok(s) => s,
        Err(_) => return failed("CONFIG_ERROR"),
    };
    let d = match design(&s, opts) {
        Ok(d) => d,
        Err(e) => return failed(e.status()),
    };
    let gains = match d.target_gains() {
        Ok(g) => g,
        Err(_) => return failed("CONFIG_ERROR"),
    };
    let min_gain = gains.iter().copied().fold(f64::INFINITY, f64::min);
    let (min_target_gain, detection_prob) = if gains.is_empty() {
        (None, None)
    } else {
        (Some(min_gain), detection.probability(min_gain).ok())
    };
    SweepRow {
        param_value: value,
        ee: Some(d.metrics.ee),
        ee_prime: Some(d.metrics.ee_prime),
        rate: Some(d.metrics.rate),
        power: Some(d.metrics.power.total),
        min_target_gain,
        detection_prob,
        status: "OPTIMAL".into(),
        iters: Some(d.sca.log.records.len()),
    }
}
