use approx::assert_relative_eq;
use isac_ee::baselines::{comm_only, detection_probability, dinkelbach_cross_check, marcum_q1, sensing_dominated};
use isac_ee::hermitian::{ComplexVector, HermitianMatrix, C64};
use isac_ee::model::{
    dbm_to_watts, interference_plus_noise, sinr, validate_solution, Covariances, ScenarioConfig,
};
use isac_ee::pipeline::{design, sweep_point, DesignOptions, SweepParam};
use isac_ee::rankone::{extract, verify_preservation};
use isac_ee::sca::{self, CovarianceSolution, Initialization, ScaOptions, Termination};
use isac_ee::surrogate::{rbar, taylor_coefficients};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

fn nominal_design() -> isac_ee::pipeline::Design {
    design(&ScenarioConfig::nominal(), &DesignOptions::default()).unwrap()
}

#[test]
fn nominal_design_is_feasible_by_independent_recomputation() {
    let d = nominal_design();
    let s = &d.scenario;
    assert!(d.feasibility.passed);
    let h = s.channels().unwrap();
    let beams: Vec<DVector<C64>> = d.beamformers.beams.iter().map(|b| b.as_vector().clone()).collect();
    let radar = d.beamformers.radar.as_matrix();
    let total: DMatrix<C64> = beams.iter().fold(radar.clone(), |acc, v| acc + v * v.adjoint());
    // SINR from raw beamformer products.
    for (k, hk) in h.iter().enumerate() {
        let hk = hk.as_vector();
        let useful = (hk.adjoint() * &beams[k])[(0, 0)].norm_sqr();
        let mut interference = (hk.adjoint() * radar * hk)[(0, 0)].re + s.noise_power[k];
        for (i, b) in beams.iter().enumerate() {
            if i != k {
                interference += (hk.adjoint() * b)[(0, 0)].norm_sqr();
            }
        }
        assert!(useful / interference >= s.sinr_thresholds[k] * (1.0 - 1e-6));
    }
    let power: f64 = total.diagonal().iter().map(|z| z.re).sum();
    assert!(power <= s.p_max * (1.0 + 1e-6));
    for (&theta, &gamma) in s.target_angles.iter().zip(&s.beampattern_thresholds) {
        let a = s.steering(theta).unwrap();
        let gain = (a.as_vector().adjoint() * &total * a.as_vector())[(0, 0)].re;
        assert!(gain >= gamma * (1.0 - 1e-6), "{theta}: {gain}");
    }
}

#[test]
fn nominal_converges_monotonically_within_thirty_iterations() {
    let d = nominal_design();
    let log = &d.sca.log;
    assert_eq!(log.termination, Termination::Converged);
    assert!(log.records.len() <= 30);
    let mut prev = d.sca.init.solution.t;
    for r in &log.records {
        assert!(r.t >= prev - 1e-9, "{} after {prev}", r.t);
        prev = r.t;
    }
    assert!(d.activeness.power.abs() <= 1e-6 && d.activeness.coupling.abs() <= 1e-6, "{:?}", d.activeness);
}

#[test]
fn restart_at_converged_point_stops_after_one_iteration() {
    let d = nominal_design();
    let s = &d.scenario;
    let sol = d.sca.solution.clone();
    let init = Initialization { lambda: sol.u / sol.t, solution: sol.clone(), phase_one_power: d.sca.init.phase_one_power };
    let again = sca::run_from(s, &s.channels().unwrap(), init, &ScaOptions::default()).unwrap();
    assert_eq!(again.log.termination, Termination::Converged);
    assert_eq!(again.log.records.len() + again.log.rejected_steps, 1);
    assert!((again.solution.t - sol.t).abs() <= s.convergence_eps * sol.t.max(1.0));
}

#[test]
fn extraction_preserves_nominal_solution() {
    let d = nominal_design();
    assert!(d.preservation.passed, "{:?}", d.preservation.failures().collect::<Vec<_>>());
    assert!(d.feasibility.rank_one_ratios.iter().all(|&r| r <= 1e-12));
}

#[test]
fn tampered_radar_covariance_is_caught() {
    // The nominal optimum carries almost no radar power, so use full-rank
    // random covariances where scaling the radar part is visible.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (covs, h, noise) = random_case(&mut rng, 3, 2);
    let mut s = ScenarioConfig::nominal();
    s.num_antennas = 3;
    s.noise_power = noise.clone();
    let expansion = taylor_coefficients(&covs, 1.0, &h, &noise).unwrap();
    let source = CovarianceSolution { covariances: covs, t: 0.0, u: 0.0 };
    let mut out = extract(&source, &h).unwrap();
    let clean = verify_preservation(&source, &out, &s, &h, &expansion).unwrap();
    assert!(clean.passed, "{:?}", clean.failures().collect::<Vec<_>>());
    out.radar = out.radar.scaled(1.01);
    let report = verify_preservation(&source, &out, &s, &h, &expansion).unwrap();
    assert!(report.failures().any(|c| c.name == "total covariance"));
}

#[test]
fn power_at_budget_has_zero_slack() {
    let s = ScenarioConfig::nominal();
    let h = s.channels().unwrap();
    let n = s.num_antennas;
    let radar = HermitianMatrix::identity(n).scaled(s.p_max / n as f64);
    let covs = Covariances { users: vec![HermitianMatrix::zeros(n); 2], radar };
    let report = validate_solution(&covs, &h, &s).unwrap();
    assert!(report.power_slack.abs() <= 1e-12);
}

#[test]
fn phase_one_coefficients_match_direct_formula() {
    let s = ScenarioConfig::nominal();
    let h = s.channels().unwrap();
    let init = sca::initialize(&s, &h, &ScaOptions::default()).unwrap();
    let covs = &init.solution.covariances;
    let point = taylor_coefficients(covs, init.lambda, &h, &s.noise_power).unwrap();
    for (k, hk) in h.iter().enumerate() {
        let hk = hk.as_vector();
        let mut i_k = s.noise_power[k] + (hk.adjoint() * covs.radar.as_matrix() * hk)[(0, 0)].re;
        for (i, v) in covs.users.iter().enumerate() {
            if i != k {
                i_k += (hk.adjoint() * v.as_matrix() * hk)[(0, 0)].re;
            }
        }
        assert_relative_eq!(point.interference_at_point[k], i_k, max_relative = 1e-12);
        assert_relative_eq!(point.taylor_coeffs[k], i_k.log2(), max_relative = 1e-12);
        assert_relative_eq!(point.slopes[k], LOG2_E / i_k, max_relative = 1e-12);
    }
    assert!(init.solution.covariances.transmit_power() <= s.p_max);
}

fn random_case(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Covariances, Vec<ComplexVector>, Vec<f64>) {
    let psd = |rng: &mut ChaCha8Rng| {
        let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        HermitianMatrix::from_raw(&g * g.adjoint())
    };
    let users = (0..k).map(|_| psd(rng)).collect();
    let radar = psd(rng);
    let channels = (0..k)
        .map(|_| {
            let v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            ComplexVector::from_slice(&v).unwrap()
        })
        .collect();
    let noise = (0..k).map(|_| rng.gen_range(0.1..2.0)).collect();
    (Covariances { users, radar }, channels, noise)
}

/// Brute-force transcription of the rate lower bound.
fn rbar_direct(covs: &Covariances, at: &Covariances, h: &[ComplexVector], noise: &[f64], k: usize) -> f64 {
    let q = |m: &HermitianMatrix| (h[k].as_vector().adjoint() * m.as_matrix() * h[k].as_vector())[(0, 0)].re;
    let interference = |c: &Covariances| {
        q(&c.radar) + c.users.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| q(v)).sum::<f64>() + noise[k]
    };
    let i0 = interference(at);
    let i = interference(covs);
    (i + q(&covs.users[k])).log2() - i0.log2() - LOG2_E / i0 * (i - i0)
}

#[test]
fn rate_bound_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(1..=3);
        let (at, h, noise) = random_case(&mut rng, n, k);
        let (other, _, _) = random_case(&mut rng, n, k);
        let point = taylor_coefficients(&at, 1.0, &h, &noise).unwrap();
        for user in 0..k {
            let want = rbar_direct(&other, &at, &h, &noise, user);
            let got = rbar(&other, &point, &h, &noise, user);
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn rate_bound_is_tight_and_drops_under_extra_interference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (at, h, noise) = random_case(&mut rng, 3, 2);
    let point = taylor_coefficients(&at, 1.0, &h, &noise).unwrap();
    let rate = |c: &Covariances, k| (1.0 + sinr(k, c, &h, &noise).unwrap()).log2();
    for k in 0..2 {
        assert_relative_eq!(rbar(&at, &point, &h, &noise, k), rate(&at, k), max_relative = 1e-13);
    }
    let mut more = at.clone();
    more.users[1] = HermitianMatrix::from_raw(more.users[1].as_matrix() + h[0].outer().as_matrix());
    assert!(interference_plus_noise(0, &more, &h[0], noise[0]) > interference_plus_noise(0, &at, &h[0], noise[0]));
    assert!(rbar(&more, &point, &h, &noise, 0) < rate(&more, 0));
}

#[test]
fn comm_only_matches_design_without_targets() {
    let mut s = ScenarioConfig::nominal();
    s.num_targets = 0;
    s.target_angles.clear();
    s.beampattern_thresholds.clear();
    let opts = DesignOptions::default();
    let a = design(&s, &opts).unwrap();
    let b = comm_only(&s, &opts).unwrap();
    assert_eq!(a.metrics, b.metrics);

    let full = ScenarioConfig::nominal();
    let c = comm_only(&full, &opts).unwrap();
    let proposed = design(&full, &opts).unwrap();
    assert!(c.metrics.ee >= proposed.metrics.ee);

    // Vanishing beampattern thresholds approach the communication-only design.
    let weak = sweep_point(&full, SweepParam::GammaDbm, -40.0, &opts, &Default::default());
    assert_relative_eq!(weak.ee.unwrap(), c.metrics.ee, max_relative = 1e-3);
}

#[test]
fn sensing_benchmark_examples() {
    let opts = ScaOptions::default();
    let mut s = ScenarioConfig::nominal();
    s.num_users = 0;
    s.user_aods.clear();
    s.pathloss_db.clear();
    s.noise_power.clear();
    s.sinr_thresholds.clear();
    s.num_targets = 1;
    s.target_angles = vec![20.0];
    s.beampattern_thresholds = vec![0.0];
    let lone = sensing_dominated(&s, &opts).unwrap();
    assert_relative_eq!(lone.min_gain, s.p_max, max_relative = 1e-6);

    let t1 = ScenarioConfig::nominal();
    let r = sensing_dominated(&t1, &opts).unwrap();
    let min = r.gains.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min >= r.min_gain * (1.0 - 1e-6));
    for (g, tau) in r.metrics.sinr.iter().zip(&t1.sinr_thresholds) {
        assert!(*g >= tau * (1.0 - 1e-6));
    }
    assert!(r.min_gain >= t1.beampattern_thresholds[0]);
}

#[test]
fn dinkelbach_agrees_with_sca_on_nominal() {
    let s = ScenarioConfig::nominal();
    let d = design(&s, &DesignOptions::default()).unwrap();
    let dk = dinkelbach_cross_check(&s, &ScaOptions::default()).unwrap();
    assert!((dk.ee_prime - d.metrics.ee_prime).abs() <= 0.01 * d.metrics.ee_prime);
}

#[test]
fn unreachable_sinr_is_infeasible_for_both_methods() {
    let mut s = ScenarioConfig::nominal();
    s.sinr_thresholds = vec![1e6; 2];
    let opts = DesignOptions::default();
    assert!(design(&s, &opts).unwrap_err().is_infeasible());
    assert!(dinkelbach_cross_check(&s, &opts.sca).unwrap_err().is_infeasible());
}

#[test]
fn beampattern_threshold_above_reach_is_infeasible() {
    let mut s = ScenarioConfig::nominal();
    s.beampattern_thresholds = vec![dbm_to_watts(26.0); 4];
    let err = design(&s, &DesignOptions::default()).unwrap_err();
    assert_eq!(err.status(), "INFEASIBLE_SCENARIO");
}

/// `Q₁(a, b) = ∫_b^∞ x·exp(−(x² + a²)/2)·I₀(a·x) dx` by composite Simpson.
fn marcum_quadrature(a: f64, b: f64) -> f64 {
    let i0 = |x: f64| {
        let (mut term, mut sum, mut k) = (1.0, 1.0, 1.0);
        while term > 1e-18 * sum {
            term *= (x / 2.0).powi(2) / (k * k);
            sum += term;
            k += 1.0;
        }
        sum
    };
    let f = |x: f64| x * (-(x * x + a * a) / 2.0).exp() * i0(a * x);
    let (upper, steps) = (b + 40.0, 40_000);
    let h = (upper - b) / steps as f64;
    let mut acc = f(b) + f(upper);
    for i in 1..steps {
        acc += f(b + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn marcum_matches_quadrature() {
    for (a, b) in [(1.0, 1.0), (0.5, 2.0), (3.0, 2.5), (2.0, 4.8)] {
        let q = marcum_q1(a, b);
        assert!((q - marcum_quadrature(a, b)).abs() <= 1e-8, "Q1({a}, {b}) = {q}");
    }
}

#[test]
fn detection_probability_grows_with_gain() {
    let mut prev = 0.0;
    for i in 0..400 {
        let p = detection_probability(i as f64 * 0.005, 316.2, 1.0, 1e-5).unwrap();
        assert!(p >= prev);
        prev = p;
    }
}

#[test]
fn sweep_reports_failures_without_numbers() {
    let s = ScenarioConfig::nominal();
    let row = sweep_point(&s, SweepParam::TauDb, 60.0, &DesignOptions::default(), &Default::default());
    assert_eq!(row.status, "INFEASIBLE_SCENARIO");
    assert!(row.ee.is_none() && row.iters.is_none());
    let row = sweep_point(&s, SweepParam::PmaxDbm, f64::NAN, &DesignOptions::default(), &Default::default());
    assert_eq!(row.status, "CONFIG_ERROR");
}
