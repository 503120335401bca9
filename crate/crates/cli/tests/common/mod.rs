//! Scenario generators and reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use isac_ee::hermitian::{ComplexVector, HermitianMatrix, C64};
use isac_ee::model::{dbm_to_watts, db_to_linear, ScenarioConfig, SteeringNormMode};
use isac_ee::sca::{self, ScaOptions};
use isac_ee::surrogate::{build_subproblem, taylor_coefficients, Subproblem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

/// Number of small instances compared against the reference convex solver.
pub const NUM_SMALL: usize = 20;
pub const SMALL_SEED: u64 = 0x5eed_0004;

fn small_base() -> ScenarioConfig {
    let mut s = ScenarioConfig::nominal();
    s.num_antennas = 4;
    s.num_users = 2;
    s.num_targets = 1;
    s.steering_norm_mode = SteeringNormMode::UnitNorm;
    s
}

/// A random `N = 4, K = 2, M = 1` scenario. Angles keep the users at
/// least 20° apart so the SINR targets stay reachable.
pub fn random_small(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let mut s = small_base();
    let a: f64 = rng.gen_range(-60.0..-10.0);
    let b: f64 = rng.gen_range(10.0..60.0);
    s.user_aods = vec![a, b];
    s.target_angles = vec![rng.gen_range(-70.0..70.0)];
    s.pathloss_db = (0..2).map(|_| rng.gen_range(-102.0..-96.0)).collect();
    s.noise_power = vec![dbm_to_watts(-80.0); 2];
    s.sinr_thresholds = (0..2).map(|_| db_to_linear(rng.gen_range(0.0..8.0))).collect();
    s.beampattern_thresholds = vec![dbm_to_watts(rng.gen_range(10.0..22.0))];
    s
}

/// First-iteration subproblem of a scenario, with the expansion point it
/// was built from.
pub struct SmallInstance {
    pub scenario: ScenarioConfig,
    pub subproblem: Subproblem,
    pub expansion_users: Vec<HermitianMatrix>,
    pub expansion_radar: HermitianMatrix,
    pub lambda: f64,
}

/// First-iteration subproblem of `scenario`.
pub fn first_instance(scenario: ScenarioConfig) -> Option<SmallInstance> {
    let channels = scenario.channels().unwrap();
    let init = sca::initialize(&scenario, &channels, &ScaOptions::default()).ok()?;
    let point =
        taylor_coefficients(&init.solution.covariances, init.lambda, &channels, &scenario.noise_power).unwrap();
    let subproblem = build_subproblem(&scenario, &channels, &point).unwrap();
    Some(SmallInstance {
        expansion_users: point.covariances.users.clone(),
        expansion_radar: point.covariances.radar.clone(),
        lambda: point.lambda,
        scenario,
        subproblem,
    })
}

/// The deterministic list of feasible small instances.
pub fn small_instances() -> Vec<SmallInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(SMALL_SEED);
    let mut out = Vec::new();
    while out.len() < NUM_SMALL {
        if let Some(inst) = first_instance(random_small(&mut rng)) {
            out.push(inst);
        }
    }
    out
}

pub fn vector_json(v: &ComplexVector) -> Value {
    json!(v.as_vector().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

pub fn matrix_json(m: &HermitianMatrix) -> Value {
    let n = m.dim();
    json!((0..n).map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Everything the reference script needs to rebuild an instance without
/// the conic encoding: channels, steering vectors, thresholds and the
/// expansion point, next to the encoded dump.
pub fn instance_json(inst: &SmallInstance) -> Value {
    let s = &inst.scenario;
    let channels = s.channels().unwrap();
    let targets = s.target_steering().unwrap();
    let problem: Value = serde_json::from_str(&inst.subproblem.problem.to_json()).unwrap();
    json!({
        "channels": channels.iter().map(vector_json).collect::<Vec<_>>(),
        "steering": targets.iter().map(vector_json).collect::<Vec<_>>(),
        "noise_power": s.noise_power,
        "sinr_thresholds": s.sinr_thresholds,
        "beampattern_thresholds": s.beampattern_thresholds,
        "p_max": s.p_max,
        "p_c": s.p_c,
        "amplifier_efficiency": s.amplifier_efficiency,
        "lambda": inst.lambda,
        "expansion_users": inst.expansion_users.iter().map(matrix_json).collect::<Vec<_>>(),
        "expansion_radar": matrix_json(&inst.expansion_radar),
        "conic": problem,
    })
}

pub fn reference_fixture() -> Value {
    let text = std::fs::read_to_string(format!("{FIXTURES}/subproblem_reference.json"))
        .expect("reference fixture exists; regenerate with tools/reference/solve_reference.py");
    serde_json::from_str(&text).unwrap()
}

fn objectives(entry: &Value) -> (f64, f64) {
    (entry["dump_objective"].as_f64().unwrap(), entry["direct_objective"].as_f64().unwrap())
}

/// Frozen `(dump, direct)` objectives of the reference solver, one per
/// small instance.
pub fn reference_objectives() -> Vec<(f64, f64)> {
    reference_fixture()["instances"].as_array().unwrap().iter().map(objectives).collect()
}

/// Frozen reference objectives of the nominal first-iteration subproblem.
pub fn nominal_reference_objectives() -> (f64, f64) {
    objectives(&reference_fixture()["nominal"])
}

/// Single-user scenario without sensing targets.
pub fn random_single_user(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let mut s = ScenarioConfig::nominal();
    s.num_antennas = rng.gen_range(2..=8);
    s.num_users = 1;
    s.num_targets = 0;
    s.user_aods = vec![rng.gen_range(-80.0..80.0)];
    s.target_angles = vec![];
    s.pathloss_db = vec![rng.gen_range(-106.0..-94.0)];
    s.noise_power = vec![dbm_to_watts(-80.0)];
    s.sinr_thresholds = vec![db_to_linear(rng.gen_range(-5.0..5.0))];
    s.beampattern_thresholds = vec![];
    s.convergence_eps = 1e-6;
    s
}

/// Maximizes `log2(1 + p‖h‖²/σ²) / (p/ρ + P_c)` over the feasible powers
/// `p ∈ [τσ²/‖h‖², P_max]` by a dense grid followed by local refinement.
pub fn single_user_oracle(s: &ScenarioConfig) -> f64 {
    let gain = s.channels().unwrap()[0].norm_squared() / s.noise_power[0];
    let ratio = |p: f64| (1.0 + p * gain).log2() / (p / s.amplifier_efficiency + s.p_c);
    let lo = s.sinr_thresholds[0] / gain;
    let hi = s.p_max;
    assert!(lo <= hi, "oracle scenario must be feasible");
    let mut best = (lo, ratio(lo));
    let mut width = hi - lo;
    let mut centre = 0.5 * (lo + hi);
    for _ in 0..8 {
        let from = (centre - 0.5 * width).max(lo);
        let to = (centre + 0.5 * width).min(hi);
        for i in 0..=2000 {
            let p = from + (to - from) * i as f64 / 2000.0;
            let r = ratio(p);
            if r > best.1 {
                best = (p, r);
            }
        }
        centre = best.0;
        width = (to - from) / 100.0;
    }
    best.1
}

/// Random Hermitian PSD matrix of the given rank.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize, scale: f64) -> HermitianMatrix {
    let g = DMatrix::from_fn(n, rank, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    HermitianMatrix::from_raw(&g * g.adjoint() * C64::new(scale, 0.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexVector {
    let entries: Vec<C64> =
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale).collect();
    ComplexVector::from_slice(&entries).unwrap()
}
