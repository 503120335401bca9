//! Physical and system model: units, array steering, line-of-sight channels,
//! SINR, beampattern gain, power consumption and energy efficiency.
//!
//! Scenario files use dB/dBm as is customary for link budgets; everything
//! inside the library is in linear units (watts, linear ratios).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermitian::{eig_hermitian, ComplexVector, HermitianMatrix, LinalgError, C64};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative tolerance used by [`validate_solution`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("angle {0} deg is outside (-90, 90)")]
    InvalidAngle(f64),
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("scenario JSON error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringNormMode {
    /// Entries of amplitude `1/√N`, so `‖a(θ)‖ = 1`.
    #[default]
    UnitNorm,
    /// Entries of amplitude `1/N`, so `‖a(θ)‖² = 1/N`.
    #[serde(rename = "paper_1_over_n")]
    PaperOneOverN,
}

impl SteeringNormMode {
    pub fn amplitude(self, n: usize) -> f64 {
        match self {
            SteeringNormMode::UnitNorm => 1.0 / (n as f64).sqrt(),
            SteeringNormMode::PaperOneOverN => 1.0 / n as f64,
        }
    }
}

impl std::str::FromStr for SteeringNormMode {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit_norm" | "unit-norm" => Ok(SteeringNormMode::UnitNorm),
            "paper_1_over_n" | "paper-1-over-n" => Ok(SteeringNormMode::PaperOneOverN),
            other => Err(ModelError::InvalidConfig(format!("unknown steering mode '{other}'"))),
        }
    }
}

/// Scenario parameters in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_antennas: usize,
    pub num_users: usize,
    pub num_targets: usize,
    /// Antenna spacing over carrier wavelength.
    pub spacing_ratio: f64,
    /// User angles of departure, degrees.
    pub user_aods: Vec<f64>,
    /// Sensing directions, degrees.
    pub target_angles: Vec<f64>,
    /// Path loss per user, dB (negative).
    pub pathloss_db: Vec<f64>,
    /// Receiver noise per user, watts.
    pub noise_power: Vec<f64>,
    /// Linear SINR targets per user.
    pub sinr_thresholds: Vec<f64>,
    /// Minimum beampattern gain per target, watts.
    pub beampattern_thresholds: Vec<f64>,
    /// Transmit power budget, watts.
    pub p_max: f64,
    /// Static circuit power, watts.
    pub p_c: f64,
    pub amplifier_efficiency: f64,
    /// Rate-dependent power, watts per bit/s/Hz.
    pub dynamic_power_coeff: f64,
    pub convergence_eps: f64,
    pub steering_norm_mode: SteeringNormMode,
}

impl ScenarioConfig {
    /// The reference two-user, four-target scenario with a 16-element array.
    pub fn nominal() -> Self {
        Self {
            num_antennas: 16,
            num_users: 2,
            num_targets: 4,
            spacing_ratio: 0.5,
            user_aods: vec![-30.0, 30.0],
            target_angles: vec![-54.0, -18.0, 18.0, 54.0],
            pathloss_db: vec![-99.0; 2],
            noise_power: vec![dbm_to_watts(-80.0); 2],
            sinr_thresholds: vec![db_to_linear(5.0); 2],
            beampattern_thresholds: vec![dbm_to_watts(20.0); 4],
            p_max: dbm_to_watts(30.0),
            p_c: dbm_to_watts(25.0),
            amplifier_efficiency: 0.35,
            dynamic_power_coeff: dbm_to_watts(-26.0),
            convergence_eps: 1e-3,
            steering_norm_mode: SteeringNormMode::UnitNorm,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.num_antennas == 0 {
            return bad("num_antennas must be at least 1".into());
        }
        if self.num_users == 0 {
            return bad("num_users must be at least 1".into());
        }
        let k = self.num_users;
        let m = self.num_targets;
        for (name, len, want) in [
            ("user_aods", self.user_aods.len(), k),
            ("pathloss_db", self.pathloss_db.len(), k),
            ("noise_power", self.noise_power.len(), k),
            ("sinr_thresholds", self.sinr_thresholds.len(), k),
            ("target_angles", self.target_angles.len(), m),
            ("beampattern_thresholds", self.beampattern_thresholds.len(), m),
        ] {
            if len != want {
                return bad(format!("{name} has {len} entries, expected {want}"));
            }
        }
        for &a in self.user_aods.iter().chain(&self.target_angles) {
            if !(a > -90.0 && a < 90.0) {
                return Err(ModelError::InvalidAngle(a));
            }
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return bad(format!("spacing_ratio must be positive, got {}", self.spacing_ratio));
        }
        if !self.pathloss_db.iter().all(|v| v.is_finite()) {
            return bad("pathloss_db must be finite".into());
        }
        let positive = self
            .noise_power
            .iter()
            .chain(&self.sinr_thresholds)
            .chain(&self.beampattern_thresholds)
            .chain([&self.p_max, &self.p_c])
            .all(|&v| v > 0.0 && v.is_finite());
        if !positive {
            return bad("powers and thresholds must be strictly positive and finite".into());
        }
        if !(self.amplifier_efficiency > 0.0 && self.amplifier_efficiency <= 1.0) {
            return bad(format!("amplifier_efficiency must lie in (0, 1], got {}", self.amplifier_efficiency));
        }
        if !(self.dynamic_power_coeff >= 0.0 && self.dynamic_power_coeff.is_finite()) {
            return bad("dynamic_power_coeff must be nonnegative".into());
        }
        if !(self.convergence_eps > 0.0 && self.convergence_eps.is_finite()) {
            return bad("convergence_eps must be positive".into());
        }
        Ok(())
    }

    /// Line-of-sight channel of every user.
    pub fn channels(&self) -> Result<Vec<ComplexVector>, ModelError> {
        self.user_aods
            .iter()
            .zip(&self.pathloss_db)
            .map(|(&phi, &pl)| los_channel(phi, pl, self.num_antennas, self.spacing_ratio))
            .collect()
    }

    pub fn steering(&self, theta_deg: f64) -> Result<ComplexVector, ModelError> {
        steering_vector(theta_deg, self.num_antennas, self.spacing_ratio, self.steering_norm_mode)
    }

    /// Steering vectors of all sensing directions.
    pub fn target_steering(&self) -> Result<Vec<ComplexVector>, ModelError> {
        self.target_angles.iter().map(|&t| self.steering(t)).collect()
    }

    /// The same scenario with every sensing direction removed.
    pub fn without_targets(&self) -> Self {
        Self { num_targets: 0, target_angles: Vec::new(), beampattern_thresholds: Vec::new(), ..self.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_config()
    }

    pub fn to_file(&self) -> ScenarioFile {
        let list = |v: Vec<f64>| PerEntity::List(v);
        ScenarioFile {
            schema_version: SCHEMA_VERSION,
            num_antennas: self.num_antennas,
            num_users: self.num_users,
            num_targets: self.num_targets,
            spacing_ratio: self.spacing_ratio,
            user_aods: self.user_aods.clone(),
            target_angles: self.target_angles.clone(),
            pathloss_db: list(self.pathloss_db.clone()),
            noise_power: list(self.noise_power.iter().map(|&w| watts_to_dbm(w)).collect()),
            sinr_thresholds: list(self.sinr_thresholds.iter().map(|&x| linear_to_db(x)).collect()),
            beampattern_thresholds: list(self.beampattern_thresholds.iter().map(|&w| watts_to_dbm(w)).collect()),
            p_max: watts_to_dbm(self.p_max),
            p_c: watts_to_dbm(self.p_c),
            amplifier_efficiency: self.amplifier_efficiency,
            dynamic_power_coeff: (self.dynamic_power_coeff > 0.0).then(|| watts_to_dbm(self.dynamic_power_coeff)),
            convergence_eps: self.convergence_eps,
            steering_norm_mode: self.steering_norm_mode,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scenario serializes")
    }
}

/// A per-user or per-target field given either once for all entities or as
/// an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerEntity {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerEntity {
    fn expand(&self, name: &str, len: usize) -> Result<Vec<f64>, ModelError> {
        match self {
            PerEntity::Scalar(v) => Ok(vec![*v; len]),
            PerEntity::List(v) if v.len() == len => Ok(v.clone()),
            PerEntity::List(v) => {
                Err(ModelError::InvalidConfig(format!("{name} has {} entries, expected {len}", v.len())))
            }
        }
    }
}

fn default_spacing() -> f64 {
    0.5
}

/// Scenario JSON document. Angles in degrees, powers in dBm, path loss and
/// SINR targets in dB, `dynamic_power_coeff` in dBm per bit/s/Hz (`null`
/// for none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub num_antennas: usize,
    pub num_users: usize,
    pub num_targets: usize,
    #[serde(default = "default_spacing")]
    pub spacing_ratio: f64,
    pub user_aods: Vec<f64>,
    pub target_angles: Vec<f64>,
    pub pathloss_db: PerEntity,
    pub noise_power: PerEntity,
    pub sinr_thresholds: PerEntity,
    pub beampattern_thresholds: PerEntity,
    pub p_max: f64,
    pub p_c: f64,
    pub amplifier_efficiency: f64,
    pub dynamic_power_coeff: Option<f64>,
    pub convergence_eps: f64,
    #[serde(default)]
    pub steering_norm_mode: SteeringNormMode,
}

impl ScenarioFile {
    pub fn into_config(self) -> Result<ScenarioConfig, ModelError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::InvalidConfig(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        let k = self.num_users;
        let m = self.num_targets;
        let cfg = ScenarioConfig {
            num_antennas: self.num_antennas,
            num_users: k,
            num_targets: m,
            spacing_ratio: self.spacing_ratio,
            user_aods: self.user_aods,
            target_angles: self.target_angles,
            pathloss_db: self.pathloss_db.expand("pathloss_db", k)?,
            noise_power: self.noise_power.expand("noise_power", k)?.into_iter().map(dbm_to_watts).collect(),
            sinr_thresholds: self.sinr_thresholds.expand("sinr_thresholds", k)?.into_iter().map(db_to_linear).collect(),
            beampattern_thresholds: self
                .beampattern_thresholds
                .expand("beampattern_thresholds", m)?
                .into_iter()
                .map(dbm_to_watts)
                .collect(),
            p_max: dbm_to_watts(self.p_max),
            p_c: dbm_to_watts(self.p_c),
            amplifier_efficiency: self.amplifier_efficiency,
            dynamic_power_coeff: self.dynamic_power_coeff.map_or(0.0, dbm_to_watts),
            convergence_eps: self.convergence_eps,
            steering_norm_mode: self.steering_norm_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn check_angle(theta_deg: f64) -> Result<(), ModelError> {
    if theta_deg > -90.0 && theta_deg < 90.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidAngle(theta_deg))
    }
}

/// Array response `amplitude · e^{j2π(d/λ) n sin θ}` without an angle check;
/// the endfire directions ±90° are meaningful for plotting.
fn array_response(theta_deg: f64, n: usize, spacing_ratio: f64, amplitude: f64) -> ComplexVector {
    let s = theta_deg.to_radians().sin();
    let entries: Vec<C64> =
        (0..n).map(|i| C64::from_polar(amplitude, 2.0 * PI * spacing_ratio * i as f64 * s)).collect();
    ComplexVector::from_slice(&entries).expect("finite steering entries")
}

/// Transmit steering vector of a uniform linear array.
pub fn steering_vector(
    theta_deg: f64,
    n: usize,
    spacing_ratio: f64,
    mode: SteeringNormMode,
) -> Result<ComplexVector, ModelError> {
    check_angle(theta_deg)?;
    Ok(array_response(theta_deg, n, spacing_ratio, mode.amplitude(n)))
}

/// `h = √(10^{PL/10}) · e(φ)` with unit-modulus entries, so `‖h‖² = N·10^{PL/10}`.
pub fn los_channel(
    phi_deg: f64,
    pathloss_db: f64,
    n: usize,
    spacing_ratio: f64,
) -> Result<ComplexVector, ModelError> {
    check_angle(phi_deg)?;
    Ok(array_response(phi_deg, n, spacing_ratio, db_to_linear(pathloss_db).sqrt()))
}

/// Lifted transmit covariances: one per user plus the dedicated radar
/// covariance `V_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariances {
    pub users: Vec<HermitianMatrix>,
    pub radar: HermitianMatrix,
}

impl Covariances {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { users: vec![HermitianMatrix::zeros(n); k], radar: HermitianMatrix::zeros(n) }
    }

    pub fn from_beamformers(beams: &[ComplexVector], radar: HermitianMatrix) -> Self {
        Self { users: beams.iter().map(ComplexVector::outer).collect(), radar }
    }

    pub fn dim(&self) -> usize {
        self.radar.dim()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// `Σ_k V_k + V_0`.
    pub fn total(&self) -> HermitianMatrix {
        &HermitianMatrix::sum(self.dim(), &self.users) + &self.radar
    }

    /// `Σ_k Tr V_k + Tr V_0`.
    pub fn transmit_power(&self) -> f64 {
        self.users.iter().map(HermitianMatrix::trace).sum::<f64>() + self.radar.trace()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { users: self.users.iter().map(|v| v.scaled(factor)).collect(), radar: self.radar.scaled(factor) }
    }

    /// Iterates `V_0, V_1, …, V_K`.
    pub fn all(&self) -> impl Iterator<Item = &HermitianMatrix> {
        std::iter::once(&self.radar).chain(&self.users)
    }

    fn check(&self, channels: &[ComplexVector], noise: &[f64]) -> Result<(), ModelError> {
        let k = self.users.len();
        for (len, want) in [(channels.len(), k), (noise.len(), k)] {
            if len != want {
                return Err(ModelError::DimensionMismatch { expected: want, got: len });
            }
        }
        let n = self.dim();
        for v in &self.users {
            if v.dim() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: v.dim() });
            }
        }
        for h in channels {
            if h.len() != n {
                return Err(ModelError::DimensionMismatch { expected: n, got: h.len() });
            }
        }
        Ok(())
    }
}

/// Interference plus noise at user `k`: `Σ_{i≠k} h_k^H V_i h_k + h_k^H V_0 h_k + σ_k²`.
pub fn interference_plus_noise(k: usize, covs: &Covariances, h: &ComplexVector, noise: f64) -> f64 {
    let others: f64 = covs.users.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| v.quad_form(h)).sum();
    others + covs.radar.quad_form(h) + noise
}

/// SINR of user `k` on lifted covariances.
pub fn sinr(k: usize, covs: &Covariances, channels: &[ComplexVector], noise: &[f64]) -> Result<f64, ModelError> {
    covs.check(channels, noise)?;
    if k >= covs.num_users() {
        return Err(ModelError::DimensionMismatch { expected: covs.num_users(), got: k });
    }
    let h = &channels[k];
    Ok(covs.users[k].quad_form(h) / interference_plus_noise(k, covs, h, noise[k]))
}

/// SINR of user `k` for beamforming vectors and a radar covariance.
pub fn sinr_beamformers(
    k: usize,
    beams: &[ComplexVector],
    radar: &HermitianMatrix,
    channels: &[ComplexVector],
    noise: &[f64],
) -> f64 {
    let h = &channels[k];
    let gain = |v: &ComplexVector| h.inner(v).norm_sqr();
    let interference: f64 = beams.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| gain(v)).sum();
    gain(&beams[k]) / (interference + radar.quad_form(h) + noise[k])
}

/// `a^H(θ) R a(θ)` for the scenario's array; θ may be anywhere in [−90°, 90°].
pub fn beampattern_gain(theta_deg: f64, total_cov: &HermitianMatrix, scenario: &ScenarioConfig) -> Result<f64, ModelError> {
    if !(-90.0..=90.0).contains(&theta_deg) {
        return Err(ModelError::InvalidAngle(theta_deg));
    }
    let n = scenario.num_antennas;
    if total_cov.dim() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: total_cov.dim() });
    }
    let a = array_response(theta_deg, n, scenario.spacing_ratio, scenario.steering_norm_mode.amplitude(n));
    Ok(total_cov.quad_form(&a))
}

/// Beampattern over an angle grid `from, from + step, …, to` (degrees).
pub fn beampattern_profile(
    total_cov: &HermitianMatrix,
    scenario: &ScenarioConfig,
    from: f64,
    to: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>, ModelError> {
    let count = ((to - from) / step).round() as usize;
    (0..=count)
        .map(|i| {
            let theta = from + step * i as f64;
            beampattern_gain(theta, total_cov, scenario).map(|g| (theta, g))
        })
        .collect()
}

/// Terms of the consumed power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    /// `Σ_k Tr V_k + Tr V_0`.
    pub transmit: f64,
    /// `transmit / ρ`.
    pub amplifier: f64,
    pub circuit: f64,
    /// `ξ R`.
    pub dynamic: f64,
    /// `amplifier + circuit`, the denominator of the ξ-free efficiency.
    pub without_dynamic: f64,
    pub total: f64,
}

pub fn total_power(transmit: f64, rate: f64, scenario: &ScenarioConfig) -> PowerBreakdown {
    let amplifier = transmit / scenario.amplifier_efficiency;
    let dynamic = scenario.dynamic_power_coeff * rate;
    let without_dynamic = amplifier + scenario.p_c;
    PowerBreakdown {
        transmit,
        amplifier,
        circuit: scenario.p_c,
        dynamic,
        without_dynamic,
        total: without_dynamic + dynamic,
    }
}

/// Achieved communication and efficiency figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sinr: Vec<f64>,
    /// Sum spectral efficiency, bit/s/Hz.
    pub rate: f64,
    /// Rate over total consumed power.
    pub ee: f64,
    /// Rate over power excluding the rate-dependent term.
    pub ee_prime: f64,
    pub power: PowerBreakdown,
}

pub fn throughput_and_ee(
    covs: &Covariances,
    channels: &[ComplexVector],
    scenario: &ScenarioConfig,
) -> Result<Metrics, ModelError> {
    let sinrs: Vec<f64> = (0..covs.num_users())
        .map(|k| sinr(k, covs, channels, &scenario.noise_power))
        .collect::<Result<_, _>>()?;
    Ok(metrics_from_sinr(sinrs, covs.transmit_power(), scenario))
}

pub fn metrics_from_sinr(sinr: Vec<f64>, transmit: f64, scenario: &ScenarioConfig) -> Metrics {
    let rate: f64 = sinr.iter().map(|g| (1.0 + g.max(0.0)).log2()).sum();
    let power = total_power(transmit, rate, scenario);
    let ee_prime = rate / power.without_dynamic;
    let ee = if rate > 0.0 { 1.0 / (1.0 / ee_prime + scenario.dynamic_power_coeff) } else { 0.0 };
    Metrics { sinr, rate, ee, ee_prime, power }
}

/// Per-constraint slacks of a solution against the scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `γ_k − τ_k`.
    pub sinr_slack: Vec<f64>,
    /// `P_max − Σ Tr`.
    pub power_slack: f64,
    /// `p(θ_m) − Γ_m`.
    pub beampattern_slack: Vec<f64>,
    /// Smallest eigenvalue of `V_0, V_1, …, V_K`.
    pub psd_min_eigenvalues: Vec<f64>,
    /// `σ₂/σ₁` of each user covariance; zero for exactly rank-one inputs.
    pub rank_one_ratios: Vec<f64>,
    pub passed: bool,
}

impl FeasibilityReport {
    /// Human-readable failures, empty when the report passed.
    pub fn violations(&self, scenario: &ScenarioConfig) -> Vec<String> {
        let mut out = Vec::new();
        for (k, (&s, &tau)) in self.sinr_slack.iter().zip(&scenario.sinr_thresholds).enumerate() {
            if s < -FEASIBILITY_TOL * tau {
                out.push(format!("SINR of user {k} below target by {:.6e}", -s));
            }
        }
        if self.power_slack < -FEASIBILITY_TOL * scenario.p_max {
            out.push(format!("power budget exceeded by {:.6e} W", -self.power_slack));
        }
        for (m, (&s, &g)) in self.beampattern_slack.iter().zip(&scenario.beampattern_thresholds).enumerate() {
            if s < -FEASIBILITY_TOL * g {
                out.push(format!("beampattern gain toward target {m} below threshold by {:.6e} W", -s));
            }
        }
        for (i, &e) in self.psd_min_eigenvalues.iter().enumerate() {
            if e < -FEASIBILITY_TOL * scenario.p_max {
                out.push(format!("covariance {i} has negative eigenvalue {e:.6e}"));
            }
        }
        out
    }
}

/// Checks SINR, power, beampattern and PSD constraints, each with relative
/// tolerance [`FEASIBILITY_TOL`] on its natural scale (τ_k, P_max, Γ_m, P_max).
pub fn validate_solution(
    covs: &Covariances,
    channels: &[ComplexVector],
    scenario: &ScenarioConfig,
) -> Result<FeasibilityReport, ModelError> {
    covs.check(channels, &scenario.noise_power)?;
    let sinr_slack = (0..covs.num_users())
        .map(|k| sinr(k, covs, channels, &scenario.noise_power).map(|g| g - scenario.sinr_thresholds[k]))
        .collect::<Result<Vec<_>, _>>()?;
    let power_slack = scenario.p_max - covs.transmit_power();
    let total = covs.total();
    let beampattern_slack = scenario
        .target_angles
        .iter()
        .zip(&scenario.beampattern_thresholds)
        .map(|(&theta, &gamma)| beampattern_gain(theta, &total, scenario).map(|g| g - gamma))
        .collect::<Result<Vec<_>, _>>()?;
    let mut psd_min_eigenvalues = Vec::new();
    for v in covs.all() {
        psd_min_eigenvalues.push(eig_hermitian(v)?.min_eigenvalue());
    }
    let mut rank_one_ratios = Vec::new();
    for v in &covs.users {
        let eig = eig_hermitian(v)?;
        let s1 = eig.eigenvalues[0];
        let s2 = eig.eigenvalues.get(1).copied().unwrap_or(0.0);
        rank_one_ratios.push(if s1 > 0.0 { s2.abs() / s1 } else { 0.0 });
    }
    let mut report =
        FeasibilityReport { sinr_slack, power_slack, beampattern_slack, psd_min_eigenvalues, rank_one_ratios, passed: false };
    report.passed = report.violations(scenario).is_empty();
    Ok(report)
}
