//! Convex surrogate of the energy-efficiency problem around an expansion
//! point: the quadratic upper bound of `t·u`, the Taylor lower bound of each
//! user's rate, and the conic encoding of the resulting subproblem.

use std::f64::consts::{LN_2, LOG2_E};

use thiserror::Error;

use crate::conic::{Cone, ConicProblem, Sense};
use crate::encoding::{CovarianceLayout, ProgramBuilder, Terms};
use crate::hermitian::{ComplexVector, LinalgError};
use crate::model::{interference_plus_noise, Covariances, ModelError, ScenarioConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("lambda must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("interference plus noise of user {user} is {value}, expected a positive value")]
    NonpositiveInterference { user: usize, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `f(t, u) = t·u`.
pub fn f_bilinear(t: f64, u: f64) -> f64 {
    t * u
}

/// `F(t, u, λ) = λt²/2 + u²/(2λ)`, an upper bound of `t·u` that is tight
/// with matching gradient at `λ = u/t`.
pub fn big_f(t: f64, u: f64, lambda: f64) -> Result<f64, SurrogateError> {
    if !(lambda > 0.0) {
        return Err(SurrogateError::NonpositiveLambda(lambda));
    }
    Ok(0.5 * lambda * t * t + 0.5 * u * u / lambda)
}

/// Linearization data of the rate lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionPoint {
    pub covariances: Covariances,
    pub lambda: f64,
    /// `a_k = log2(I_k)` where `I_k` is the interference plus noise at the point.
    pub taylor_coeffs: Vec<f64>,
    /// `I_k = Σ_{i≠k} h_kᴴ V_i h_k + h_kᴴ V_0 h_k + σ_k²`, watts.
    pub interference_at_point: Vec<f64>,
    /// `log2(e) / 2^{a_k}`.
    pub slopes: Vec<f64>,
}

impl ExpansionPoint {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SurrogateError::NonpositiveLambda(self.lambda));
        }
        for (user, &value) in self.interference_at_point.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SurrogateError::NonpositiveInterference { user, value });
            }
        }
        Ok(())
    }
}

/// Builds the expansion point at `covs` with the given `λ`.
pub fn taylor_coefficients(
    covs: &Covariances,
    lambda: f64,
    channels: &[ComplexVector],
    noise: &[f64],
) -> Result<ExpansionPoint, SurrogateError> {
    let k = covs.num_users();
    for (len, want) in [(channels.len(), k), (noise.len(), k)] {
        if len != want {
            return Err(ModelError::DimensionMismatch { expected: want, got: len }.into());
        }
    }
    let interference: Vec<f64> =
        (0..k).map(|i| interference_plus_noise(i, covs, &channels[i], noise[i])).collect();
    let point = ExpansionPoint {
        covariances: covs.clone(),
        lambda,
        taylor_coeffs: interference.iter().map(|v| v.log2()).collect(),
        slopes: interference.iter().map(|v| LOG2_E / v).collect(),
        interference_at_point: interference,
    };
    point.validate()?;
    Ok(point)
}

/// Concave lower bound `R̲_k` of user `k`'s rate, tight at the expansion point.
pub fn rbar(
    covs: &Covariances,
    expansion: &ExpansionPoint,
    channels: &[ComplexVector],
    noise: &[f64],
    k: usize,
) -> f64 {
    let h = &channels[k];
    let interference = interference_plus_noise(k, covs, h, noise[k]);
    let received = interference + covs.users[k].quad_form(h);
    received.log2()
        - expansion.taylor_coeffs[k]
        - expansion.slopes[k] * (interference - expansion.interference_at_point[k])
}

/// Which variable sits where in an encoded subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemLayout {
    pub covariances: CovarianceLayout,
    pub t: usize,
    pub u: usize,
    /// Power-consumption slack `u − P'(V)`.
    pub power_slack: usize,
    pub sinr_slack: Vec<usize>,
    pub budget_slack: usize,
    pub beampattern_slack: Vec<usize>,
    /// Slack of `F(t, u, λ) ≤ Σ_k R̲_k`.
    pub coupling_slack: usize,
    /// Offsets of the exponential cones `(z_k ln 2, 1, w_k)`.
    pub exp_cones: Vec<usize>,
    /// Offsets of the rotated cones bounding `t²` and `u²`.
    pub square_cones: [usize; 2],
}

/// Encoded subproblem with the metadata needed to read its solution.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub problem: ConicProblem,
    pub layout: SubproblemLayout,
    /// Constant term of `Σ_k R̲_k` that does not appear in the conic data.
    pub rate_offset: f64,
}

impl Subproblem {
    /// Covariances, `t` and `u` of a primal vector.
    pub fn decode(&self, x: &[f64]) -> Result<(Covariances, f64, f64), LinalgError> {
        let covs = self.layout.covariances.decode(x)?;
        Ok((covs, x[self.layout.t], x[self.layout.u]))
    }
}

/// Channels scaled by `1/σ_k`, so that received powers are in noise units.
pub(crate) fn normalized_channels(channels: &[ComplexVector], noise: &[f64]) -> Vec<ComplexVector> {
    channels.iter().zip(noise).map(|(h, &s)| h.scaled(1.0 / s.sqrt())).collect()
}

/// Terms of `Σ_{i≠k} ĥ_kᴴ V_i ĥ_k` (radar block included) times `scale`.
pub(crate) fn interference_terms(layout: &CovarianceLayout, k: usize, h: &ComplexVector, scale: f64) -> Terms {
    (0..layout.offsets.len()).filter(|&i| i != k + 1).flat_map(|i| layout.quad_terms(i, h, scale)).collect()
}

/// Rows shared by every design problem: SINR targets and, optionally, the
/// power budget and the beampattern thresholds, each with a fresh slack in
/// `slacks` starting at `next_slack`.
pub(crate) struct ConstraintSet {
    pub sinr: bool,
    pub budget: bool,
    pub beampattern: bool,
}

pub(crate) struct ConstraintSlacks {
    pub sinr: Vec<usize>,
    pub budget: Option<usize>,
    pub beampattern: Vec<usize>,
}

impl ConstraintSet {
    pub fn count(&self, scenario: &ScenarioConfig) -> usize {
        let mut n = 0;
        if self.sinr {
            n += scenario.num_users;
        }
        if self.budget {
            n += 1;
        }
        if self.beampattern {
            n += scenario.num_targets;
        }
        n
    }

    pub fn add_rows(
        &self,
        builder: &mut ProgramBuilder,
        layout: &CovarianceLayout,
        scenario: &ScenarioConfig,
        normalized: &[ComplexVector],
        targets: &[ComplexVector],
        mut next_slack: usize,
    ) -> ConstraintSlacks {
        let mut take = || {
            let s = next_slack;
            next_slack += 1;
            s
        };
        let mut out = ConstraintSlacks { sinr: Vec::new(), budget: None, beampattern: Vec::new() };
        if self.sinr {
            for (k, h) in normalized.iter().enumerate() {
                let tau = scenario.sinr_thresholds[k];
                let s = take();
                let mut terms = layout.quad_terms(k + 1, h, 1.0);
                terms.extend(interference_terms(layout, k, h, -tau));
                terms.push((s, -1.0));
                builder.row(terms, tau);
                out.sinr.push(s);
            }
        }
        if self.budget {
            let s = take();
            let mut terms = layout.total_trace_terms(1.0);
            terms.push((s, 1.0));
            builder.row(terms, scenario.p_max);
            out.budget = Some(s);
        }
        if self.beampattern {
            for (a, &gamma) in targets.iter().zip(&scenario.beampattern_thresholds) {
                let s = take();
                let mut terms = layout.total_quad_terms(a, 1.0);
                terms.push((s, -1.0));
                builder.row(terms, gamma);
                out.beampattern.push(s);
            }
        }
        out
    }
}

/// Adds one exponential cone per user with `x₃ = Σ_i ĥ_kᴴ V_i ĥ_k + 1` and
/// `x₂ = 1`, so that `x₁ / ln 2 ≤ log2(received_k / σ_k²)`.
pub(crate) fn add_rate_cones(
    builder: &mut ProgramBuilder,
    layout: &CovarianceLayout,
    normalized: &[ComplexVector],
) -> Vec<usize> {
    let offsets: Vec<usize> = normalized.iter().map(|_| builder.cone(Cone::Exp)).collect();
    for (h, &off) in normalized.iter().zip(&offsets) {
        builder.row(vec![(off + 1, 1.0)], 1.0);
        let mut terms = layout.total_quad_terms(h, -1.0);
        terms.push((off + 2, 1.0));
        builder.row(terms, 1.0);
    }
    offsets
}

/// Terms and constant of `Σ_k R̲_k` in terms of the exp-cone variables and
/// the covariance blocks: returns `(terms, constant)` with
/// `Σ_k R̲_k = terms·x + constant` once every exp cone is tight.
pub(crate) fn rate_bound_terms(
    layout: &CovarianceLayout,
    normalized: &[ComplexVector],
    exp_cones: &[usize],
    expansion: &ExpansionPoint,
    noise: &[f64],
) -> (Terms, f64) {
    let mut terms = Terms::new();
    let mut constant = 0.0;
    for (k, h) in normalized.iter().enumerate() {
        // Interference in noise units at the expansion point.
        let i0 = expansion.interference_at_point[k] / noise[k];
        let slope = LOG2_E / i0;
        terms.push((exp_cones[k], 1.0 / LN_2));
        terms.extend(interference_terms(layout, k, h, -slope));
        constant += -i0.log2() - slope * (1.0 - i0);
    }
    (terms, constant)
}

/// Encodes the surrogate subproblem: maximize `t` subject to the power
/// consumption bound on `u`, SINR targets, the power budget, beampattern
/// thresholds, `F(t, u, λ) ≤ Σ_k R̲_k` and PSD covariances.
///
/// Variable layout: PSD blocks `V_0, …, V_K`; one nonnegative block
/// `[t, u, s_a, s_c(K), s_d, s_e(M), s_F]`; one exponential cone per user;
/// rotated cones `(q₁, ½, t)` and `(q₂, ½, u)`.
pub fn build_subproblem(
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    expansion: &ExpansionPoint,
) -> Result<Subproblem, SurrogateError> {
    expansion.validate()?;
    let k = scenario.num_users;
    let m = scenario.num_targets;
    if channels.len() != k {
        return Err(ModelError::DimensionMismatch { expected: k, got: channels.len() }.into());
    }
    let n = scenario.num_antennas;
    let normalized = normalized_channels(channels, &scenario.noise_power);
    let targets = scenario.target_steering()?;
    let lambda = expansion.lambda;

    let mut b = ProgramBuilder::new();
    let covs = CovarianceLayout::allocate(&mut b, n, k);
    let nn = b.cone(Cone::Nonneg { dim: k + m + 5 });
    let (t, u, s_a) = (nn, nn + 1, nn + 2);
    let exp_cones = add_rate_cones(&mut b, &covs, &normalized);
    let sq_t = b.cone(Cone::RotatedSoc { dim: 3 });
    let sq_u = b.cone(Cone::RotatedSoc { dim: 3 });

    // u ≥ P'(V)
    let mut terms = vec![(u, 1.0), (s_a, -1.0)];
    terms.extend(covs.total_trace_terms(-1.0 / scenario.amplifier_efficiency));
    b.row(terms, scenario.p_c);

    let slacks = ConstraintSet { sinr: true, budget: true, beampattern: true }.add_rows(
        &mut b,
        &covs,
        scenario,
        &normalized,
        &targets,
        s_a + 1,
    );
    let s_f = nn + k + m + 4;

    for (off, var) in [(sq_t, t), (sq_u, u)] {
        b.row(vec![(off + 1, 1.0)], 0.5);
        b.row(vec![(off + 2, 1.0), (var, -1.0)], 0.0);
    }

    // (λ/2) q₁ + q₂/(2λ) − Σ R̲_k + s_F = 0
    let (rate_terms, rate_offset) = rate_bound_terms(&covs, &normalized, &exp_cones, expansion, &scenario.noise_power);
    let mut terms = vec![(sq_t, 0.5 * lambda), (sq_u, 0.5 / lambda), (s_f, 1.0)];
    terms.extend(rate_terms.into_iter().map(|(j, v)| (j, -v)));
    b.row(terms, rate_offset);
    b.objective(vec![(t, 1.0)]);

    let layout = SubproblemLayout {
        covariances: covs,
        t,
        u,
        power_slack: s_a,
        sinr_slack: slacks.sinr,
        budget_slack: slacks.budget.expect("budget row requested"),
        beampattern_slack: slacks.beampattern,
        coupling_slack: s_f,
        exp_cones,
        square_cones: [sq_t, sq_u],
    };
    let mut sub = Subproblem { problem: b.finish(Sense::Maximize, None), layout, rate_offset };
    let (t0, u0) = seed_scalars(&expansion.covariances, channels, scenario, expansion)?;
    sub.problem.seed = Some(encode_point(&sub, scenario, channels, expansion, &expansion.covariances, t0, u0)?);
    Ok(sub)
}

/// `(t, u)` for the expansion covariances: `u` from the power model with a
/// small margin and `t` just below `Σ R / u`.
fn seed_scalars(
    covs: &Covariances,
    channels: &[ComplexVector],
    scenario: &ScenarioConfig,
    expansion: &ExpansionPoint,
) -> Result<(f64, f64), SurrogateError> {
    let u = (1.0 + 1e-6) * (covs.transmit_power() / scenario.amplifier_efficiency + scenario.p_c);
    let rate: f64 = (0..covs.num_users())
        .map(|k| rbar(covs, expansion, channels, &scenario.noise_power, k))
        .sum();
    Ok(((rate / u).max(0.0) * (1.0 - 1e-4), u))
}

/// Maps a natural-form point `(V, t, u)` to the conic variable vector,
/// splitting any slack of the coupling constraint evenly between the two
/// rotated cones, the exponential cones and `s_F` so every cone is entered
/// strictly when the natural constraints hold strictly.
pub fn encode_point(
    sub: &Subproblem,
    scenario: &ScenarioConfig,
    channels: &[ComplexVector],
    expansion: &ExpansionPoint,
    covs: &Covariances,
    t: f64,
    u: f64,
) -> Result<Vec<f64>, SurrogateError> {
    let l = &sub.layout;
    let noise = &scenario.noise_power;
    let lambda = expansion.lambda;
    let mut x = vec![0.0; sub.problem.num_vars()];
    l.covariances.encode(covs, &mut x);
    x[l.t] = t;
    x[l.u] = u;
    x[l.power_slack] = u - covs.transmit_power() / scenario.amplifier_efficiency - scenario.p_c;
    let normalized = normalized_channels(channels, noise);
    for (k, h) in normalized.iter().enumerate() {
        let tau = scenario.sinr_thresholds[k];
        let interference = interference_plus_noise(k, covs, h, 1.0);
        x[l.sinr_slack[k]] = covs.users[k].quad_form(h) - tau * interference;
    }
    x[l.budget_slack] = scenario.p_max - covs.transmit_power();
    let total = covs.total();
    let targets = scenario.target_steering()?;
    for (m, a) in targets.iter().enumerate() {
        x[l.beampattern_slack[m]] = total.quad_form(a) - scenario.beampattern_thresholds[m];
    }
    let rate_sum: f64 = (0..covs.num_users()).map(|k| rbar(covs, expansion, channels, noise, k)).sum();
    let slack = rate_sum - big_f(t, u, lambda)?;
    let share = slack / 4.0;
    let k_users = normalized.len().max(1) as f64;
    for (k, h) in normalized.iter().enumerate() {
        let off = l.exp_cones[k];
        let w = total.quad_form(h) + 1.0;
        x[off] = w.ln() - share * LN_2 / k_users;
        x[off + 1] = 1.0;
        x[off + 2] = w;
    }
    let [sq_t, sq_u] = l.square_cones;
    x[sq_t] = t * t + share / (0.5 * lambda);
    x[sq_t + 1] = 0.5;
    x[sq_t + 2] = t;
    x[sq_u] = u * u + share / (0.5 / lambda);
    x[sq_u + 1] = 0.5;
    x[sq_u + 2] = u;
    x[l.coupling_slack] = share;
    Ok(x)
}
