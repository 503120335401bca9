//! Rank-one beamformers from relaxed covariances without loss.
//!
//! For PSD `Ṽ_k` with `h_kᴴ Ṽ_k h_k > 0`, the vector
//! `v̂_k = Ṽ_k h_k / √(h_kᴴ Ṽ_k h_k)` satisfies `Ṽ_k ⪰ v̂_k v̂_kᴴ` (Cauchy–Schwarz)
//! and `|h_kᴴ v̂_k|² = h_kᴴ Ṽ_k h_k`. Moving the remainder into the radar
//! covariance keeps the total covariance, and with it every SINR, every
//! beampattern value and the transmit power, unchanged.

use serde::Serialize;
use thiserror::Error;

use crate::hermitian::{eig_hermitian, psd_residual, ComplexVector, HermitianMatrix, LinalgError, C64};
use crate::model::{beampattern_gain, sinr_beamformers, throughput_and_ee, Covariances, ModelError, ScenarioConfig};
use crate::sca::CovarianceSolution;
use crate::surrogate::{rbar, ExpansionPoint};

/// Relative PSD tolerance on the new radar covariance, scaled by the total
/// transmit power.
pub const RADAR_PSD_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankOneError {
    #[error("useful power of user {user} is {value:e}, extraction needs a positive value")]
    DegenerateUsefulPower { user: usize, value: f64 },
    #[error("radar covariance has negative eigenvalue {residual:e} beyond tolerance {tolerance:e}")]
    PsdViolation { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution {
    pub beams: Vec<ComplexVector>,
    pub radar: HermitianMatrix,
    /// The relaxed solution the beams were extracted from.
    pub source: CovarianceSolution,
}

impl BeamformerSolution {
    pub fn covariances(&self) -> Covariances {
        Covariances::from_beamformers(&self.beams, self.radar.clone())
    }
}

/// Constructs rank-one beamformers and the adjusted radar covariance.
pub fn extract(source: &CovarianceSolution, channels: &[ComplexVector]) -> Result<BeamformerSolution, RankOneError> {
    let covs = &source.covariances;
    if channels.len() != covs.num_users() {
        return Err(RankOneError::DimensionMismatch { expected: covs.num_users(), got: channels.len() });
    }
    let n = covs.dim();
    let mut beams = Vec::with_capacity(channels.len());
    let mut radar = covs.radar.as_matrix().clone();
    for (user, (v, h)) in covs.users.iter().zip(channels).enumerate() {
        if h.len() != n {
            return Err(RankOneError::DimensionMismatch { expected: n, got: h.len() });
        }
        let useful = v.quad_form(h);
        let floor = 1e-14 * h.norm_squared() * v.trace().abs();
        if !(useful > floor.max(0.0)) {
            return Err(RankOneError::DegenerateUsefulPower { user, value: useful });
        }
        let beam = ComplexVector::new(v.as_matrix() * h.as_vector() * C64::new(1.0 / useful.sqrt(), 0.0))?;
        radar += v.as_matrix() - beam.outer().as_matrix();
        beams.push(beam);
    }
    let radar = HermitianMatrix::from_raw(radar);
    let residual = psd_residual(&radar)?;
    let tolerance = RADAR_PSD_TOL * covs.transmit_power().max(f64::MIN_POSITIVE);
    if residual > tolerance {
        return Err(RankOneError::PsdViolation { residual, tolerance });
    }
    Ok(BeamformerSolution { beams, radar, source: source.clone() })
}

/// One comparison between the relaxed and the extracted solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationCheck {
    pub name: String,
    /// Relative deviation (absolute for rate bounds and PSD/rank residuals).
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationReport {
    pub checks: Vec<PreservationCheck>,
    pub passed: bool,
}

impl PreservationReport {
    pub fn failures(&self) -> impl Iterator<Item = &PreservationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Re-checks that extraction left every quantity of interest unchanged.
pub fn verify_preservation(
    before: &CovarianceSolution,
    after: &BeamformerSolution,
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    expansion: &ExpansionPoint,
) -> Result<PreservationReport, RankOneError> {
    let mut checks = Vec::new();
    let mut push = |name: String, deviation: f64, tolerance: f64| {
        checks.push(PreservationCheck { name, deviation, tolerance, passed: deviation <= tolerance });
    };
    let old = &before.covariances;
    let new = after.covariances();
    let noise = &scenario.noise_power;

    let total_old = old.total();
    let total_new = new.total();
    push(
        "total covariance".into(),
        (&total_new - &total_old).max_abs() / total_old.max_abs().max(f64::MIN_POSITIVE),
        1e-10,
    );
    push("transmit power".into(), relative(new.transmit_power(), old.transmit_power()), 1e-10);
    for (k, h) in channels.iter().enumerate() {
        push(format!("useful power of user {k}"), relative(new.users[k].quad_form(h), old.users[k].quad_form(h)), 1e-10);
        let g_old = crate::model::sinr(k, old, channels, noise)?;
        let g_new = sinr_beamformers(k, &after.beams, &after.radar, channels, noise);
        push(format!("SINR of user {k}"), relative(g_new, g_old), 1e-8);
        push(
            format!("rate bound of user {k}"),
            (rbar(&new, expansion, channels, noise, k) - rbar(old, expansion, channels, noise, k)).abs(),
            1e-8,
        );
        let eig = eig_hermitian(&new.users[k])?;
        let ratio = eig.eigenvalues.get(1).map_or(0.0, |s| s.abs()) / eig.eigenvalues[0];
        push(format!("rank of user {k} covariance"), ratio, 1e-12);
    }
    for &theta in &scenario.target_angles {
        push(
            format!("beampattern at {theta} deg"),
            relative(beampattern_gain(theta, &total_new, scenario)?, beampattern_gain(theta, &total_old, scenario)?),
            1e-10,
        );
    }
    let ee_old = throughput_and_ee(old, channels, scenario)?.ee_prime;
    let ee_new = throughput_and_ee(&new, channels, scenario)?.ee_prime;
    push("efficiency without rate-dependent power".into(), relative(ee_new, ee_old), 1e-8);
    let scale = old.transmit_power().max(f64::MIN_POSITIVE);
    push("radar covariance PSD".into(), psd_residual(&after.radar)? / scale, RADAR_PSD_TOL);

    let passed = checks.iter().all(|c| c.passed);
    Ok(PreservationReport { checks, passed })
}
