//! Primal-dual path-following on the homogeneous self-dual embedding.
//!
//! Internally the problem is `min cᵀx, Ax = b, x ∈ K`, with dual
//! `max bᵀy, c − Aᵀy = s ∈ K*`. The embedding adds `τ, κ ≥ 0` with
//!
//! ```text
//! A x − b τ = 0,   Aᵀy + s − c τ = 0,   cᵀx − bᵀy + κ = 0,
//! ```
//!
//! and iterates stay near the central path `s = −μ ∇F(x)`, `τκ = μ`, where
//! `F` is the sum of the cone barriers. Every cone is scaled with its own
//! primal barrier Hessian, so the nonsymmetric exponential cone needs no
//! special treatment. Each iteration blends an affine predictor and a
//! centering direction, taking the largest predictor weight whose trial point
//! stays inside a proximity neighborhood of the central path.

use nalgebra::{DMatrix, DVector};

use super::cones::{dot, norm, proximity, ConeBlock, LocalBarrier};
use super::problem::{ConicProblem, Sense};
use super::ConicError;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Relative complementarity tolerance.
    pub gap_tol: f64,
    /// Relative primal/dual residual tolerance.
    pub feas_tol: f64,
    /// Upper bound on the predictor weight of a step.
    pub step_fraction: f64,
    /// 0 silent, 1 per-iteration trace on stderr.
    pub verbosity: u8,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iters: 200, gap_tol: 1e-8, feas_tol: 1e-8, step_fraction: 0.98, verbosity: 0 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), ConicError> {
        let ok = self.gap_tol > 0.0
            && self.feas_tol > 0.0
            && self.step_fraction > 0.0
            && self.step_fraction < 1.0
            && self.max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(ConicError::InvalidOptions(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    /// The primal is unbounded (its dual is infeasible).
    DualInfeasible,
    MaxIters,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::PrimalInfeasible => "PRIMAL_INFEASIBLE",
            SolveStatus::DualInfeasible => "DUAL_INFEASIBLE",
            SolveStatus::MaxIters => "MAX_ITERS",
            SolveStatus::NumericalFailure => "NUMERICAL_FAILURE",
        };
        f.write_str(s)
    }
}

/// Ray certificates, expressed for the minimization form `min c̃ᵀx` where
/// `c̃ = c` for [`Sense::Minimize`] and `c̃ = −c` for [`Sense::Maximize`].
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `bᵀy = 1` and `s = −Aᵀy ∈ K*` (up to `residual`): no `x ∈ K` solves `Ax = b`.
    PrimalInfeasible { y: Vec<f64>, s: Vec<f64>, residual: f64 },
    /// `c̃ᵀx = −1`, `x ∈ K` and `Ax = 0` (up to `residual`): an unbounded ray.
    DualInfeasible { x: Vec<f64>, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `x̂ᵀŝ` of the normalized iterate.
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub tau: f64,
    pub kappa: f64,
    /// `|x̂ᵀr̂_d| + |ŷᵀr̂_p|`, the residual-induced slack in weak duality.
    pub residual_coupling: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Dual multipliers of the minimization form.
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    /// `cᵀx` in the problem's sense.
    pub objective: f64,
    /// `bᵀy` mapped into the problem's sense.
    pub dual_objective: f64,
    /// Relative complementarity `x̂ᵀŝ / (1 + |objective|)`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
    pub trace: Vec<IterationRecord>,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

const NEIGHBORHOOD: f64 = 0.95;
const STATIC_REG: f64 = 1e-10;
const REFINE_STEPS: usize = 4;
const PREDICTOR_WEIGHTS: [f64; 22] = [
    0.9999, 0.999, 0.995, 0.99, 0.98, 0.97, 0.95, 0.92, 0.9, 0.85, 0.8, 0.75, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2,
    0.1, 0.05, 0.02, 0.0,
];

#[derive(Clone)]
struct Point {
    x: DVector<f64>,
    y: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

impl Point {
    fn axpy(&self, alpha: f64, d: &Point) -> Point {
        Point {
            x: &self.x + &d.x * alpha,
            y: &self.y + &d.y * alpha,
            s: &self.s + &d.s * alpha,
            tau: self.tau + alpha * d.tau,
            kappa: self.kappa + alpha * d.kappa,
        }
    }

    fn combine(a: f64, p: &Point, b: f64, q: &Point) -> Point {
        Point {
            x: &p.x * a + &q.x * b,
            y: &p.y * a + &q.y * b,
            s: &p.s * a + &q.s * b,
            tau: a * p.tau + b * q.tau,
            kappa: a * p.kappa + b * q.kappa,
        }
    }
}

/// Right-hand side of the linearized embedding:
///
/// ```text
/// A dx − b dτ           = r1
/// −Aᵀdy + c dτ − ds     = r2
/// bᵀdy − cᵀdx − dκ      = r3
/// ds + μ H dx           = r4
/// κ dτ + τ dκ           = r5
/// ```
struct Rhs {
    r1: DVector<f64>,
    r2: DVector<f64>,
    r3: f64,
    r4: DVector<f64>,
    r5: f64,
}

struct Workspace<'a> {
    a: &'a DMatrix<f64>,
    at: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    cones: &'a [ConeBlock],
    nu: f64,
}

/// Newton-system data at one iterate.
struct Kkt {
    locals: Vec<LocalBarrier>,
    mu: f64,
    normal: NormalFactor,
    y2: DVector<f64>,
    x2: DVector<f64>,
    denom_base: f64,
}

impl Workspace<'_> {
    fn locals(&self, x: &DVector<f64>) -> Option<Vec<LocalBarrier>> {
        self.cones.iter().map(|blk| LocalBarrier::at(&blk.cone, &x.as_slice()[blk.range()])).collect()
    }

    fn gradient(&self, locals: &[LocalBarrier]) -> DVector<f64> {
        let mut g = DVector::zeros(self.c.len());
        for (blk, local) in self.cones.iter().zip(locals) {
            local.gradient(&mut g.as_mut_slice()[blk.range()]);
        }
        g
    }

    /// `(μH)⁻¹ v`.
    fn apply_p(&self, locals: &[LocalBarrier], mu: f64, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (blk, local) in self.cones.iter().zip(locals) {
            let r = blk.range();
            local.apply_inv_hessian(&v.as_slice()[r.clone()], &mut out.as_mut_slice()[r]);
        }
        out / mu
    }

    /// `μ H v`.
    fn apply_h(&self, locals: &[LocalBarrier], mu: f64, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (blk, local) in self.cones.iter().zip(locals) {
            let r = blk.range();
            local.apply_hessian(&v.as_slice()[r.clone()], &mut out.as_mut_slice()[r]);
        }
        out * mu
    }

    /// Factor the normal matrix `A (μH)⁻¹ Aᵀ + δI` as `RᵀR` through a QR
    /// decomposition of `[(A L)ᵀ; √δ I]`, where `H⁻¹ = L Lᵀ`. Working with
    /// `A L` instead of forming the product keeps the factor accurate when
    /// the scaling becomes extreme near the boundary.
    fn factor(&self, x: &DVector<f64>, mu: f64) -> Option<Kkt> {
        let locals = self.locals(x)?;
        let m = self.b.len();
        let n = self.c.len();
        let mut stacked = DMatrix::zeros(n + m, m);
        let inv_sqrt_mu = 1.0 / mu.sqrt();
        for i in 0..m {
            let row = self.at.column(i);
            for (blk, local) in self.cones.iter().zip(&locals) {
                let r = blk.range();
                let mut out = vec![0.0; r.len()];
                local.apply_inv_hessian_factor_t(&row.as_slice()[r.clone()], &mut out);
                for (k, v) in r.zip(out) {
                    stacked[(k, i)] = v * inv_sqrt_mu;
                }
            }
            stacked[(n + i, i)] = STATIC_REG.sqrt();
        }
        if !stacked.iter().all(|v| v.is_finite()) {
            return None;
        }
        let normal = NormalFactor { r: stacked.qr().r() };
        let pc = self.a * self.apply_p(&locals, mu, &self.c);
        let y2 = normal.solve(&(pc + &self.b))?;
        let x2 = self.apply_p(&locals, mu, &(&self.at * &y2 - &self.c));
        let denom_base = self.b.dot(&y2) - self.c.dot(&x2);
        Some(Kkt { locals, mu, normal, y2, x2, denom_base })
    }

    fn solve_once(&self, kkt: &Kkt, pt: &Point, rhs: &Rhs) -> Point {
        let v = &rhs.r2 + &rhs.r4;
        let pv = self.apply_p(&kkt.locals, kkt.mu, &v);
        let y1 = kkt.normal.solve(&(&rhs.r1 - self.a * &pv)).unwrap_or_else(|| DVector::from_element(rhs.r1.len(), f64::NAN));
        let x1 = self.apply_p(&kkt.locals, kkt.mu, &(v + &self.at * &y1));
        let denom = kkt.denom_base + pt.kappa / pt.tau;
        let dtau = (rhs.r3 + rhs.r5 / pt.tau - self.b.dot(&y1) + self.c.dot(&x1)) / denom;
        let dy = y1 + &kkt.y2 * dtau;
        let dx = x1 + &kkt.x2 * dtau;
        let ds = -(&self.at * &dy) + &self.c * dtau - &rhs.r2;
        let dkappa = (rhs.r5 - pt.kappa * dtau) / pt.tau;
        Point { x: dx, y: dy, s: ds, tau: dtau, kappa: dkappa }
    }

    fn residual(&self, kkt: &Kkt, pt: &Point, rhs: &Rhs, d: &Point) -> Rhs {
        Rhs {
            r1: &rhs.r1 - (self.a * &d.x - &self.b * d.tau),
            r2: &rhs.r2 - (-(&self.at * &d.y) + &self.c * d.tau - &d.s),
            r3: rhs.r3 - (self.b.dot(&d.y) - self.c.dot(&d.x) - d.kappa),
            r4: &rhs.r4 - (&d.s + self.apply_h(&kkt.locals, kkt.mu, &d.x)),
            r5: rhs.r5 - (pt.kappa * d.tau + pt.tau * d.kappa),
        }
    }

    /// Solve, then refine the primal equality block. Corrections of the form
    /// `dx += (μH)⁻¹Aᵀδy, dy += δy, ds −= Aᵀδy` leave the dual and
    /// linearized-complementarity equations untouched, so only `A dx − b dτ`
    /// is driven back to `r1`. The full residual is not used for refinement:
    /// near the boundary its complementarity block is dominated by rounding.
    fn solve_refined(&self, kkt: &Kkt, pt: &Point, rhs: &Rhs) -> Point {
        let mut d = self.solve_once(kkt, pt, rhs);
        let mut err = (&rhs.r1 - (self.a * &d.x - &self.b * d.tau)).norm();
        for _ in 0..REFINE_STEPS {
            if !(err.is_finite() && err > 0.0) {
                break;
            }
            let e1 = &rhs.r1 - (self.a * &d.x - &self.b * d.tau);
            let Some(dy) = kkt.normal.solve(&e1) else { break };
            let aty = &self.at * &dy;
            let cand = Point {
                x: &d.x + self.apply_p(&kkt.locals, kkt.mu, &aty),
                y: &d.y + &dy,
                s: &d.s - &aty,
                tau: d.tau,
                kappa: d.kappa,
            };
            let cand_err = (&rhs.r1 - (self.a * &cand.x - &self.b * cand.tau)).norm();
            if cand_err < 0.5 * err {
                d = cand;
                err = cand_err;
            } else {
                break;
            }
        }
        d
    }

    fn mu(&self, pt: &Point) -> f64 {
        (pt.x.dot(&pt.s) + pt.tau * pt.kappa) / (self.nu + 1.0)
    }

    fn in_neighborhood(&self, pt: &Point) -> bool {
        if !(pt.tau > 0.0 && pt.kappa > 0.0) {
            return false;
        }
        let mu = self.mu(pt);
        if !(mu > 0.0 && mu.is_finite()) {
            return false;
        }
        if (pt.tau * pt.kappa / mu - 1.0).abs() > NEIGHBORHOOD {
            return false;
        }
        self.cones.iter().all(|blk| {
            let r = blk.range();
            matches!(
                proximity(&blk.cone, &pt.x.as_slice()[r.clone()], &pt.s.as_slice()[r], mu),
                Some(p) if p <= NEIGHBORHOOD
            )
        })
    }

    fn is_interior(&self, pt: &Point) -> bool {
        pt.tau > 0.0
            && pt.kappa > 0.0
            && self.mu(pt) > 0.0
            && self.cones.iter().all(|blk| {
                let r = blk.range();
                proximity(&blk.cone, &pt.x.as_slice()[r.clone()], &pt.s.as_slice()[r], 1.0).is_some()
            })
    }
}

struct NormalFactor {
    r: DMatrix<f64>,
}

impl NormalFactor {
    fn solve(&self, w: &DVector<f64>) -> Option<DVector<f64>> {
        if w.is_empty() {
            return Some(DVector::zeros(0));
        }
        let z = self.r.tr_solve_upper_triangular(w)?;
        self.r.solve_upper_triangular(&z)
    }
}

fn rhs_norm(r: &Rhs) -> f64 {
    (r.r1.norm_squared() + r.r2.norm_squared() + r.r3 * r.r3 + r.r4.norm_squared() + r.r5 * r.r5).sqrt()
}

/// Solve a conic program. Malformed input is an error; every outcome of the
/// iteration itself, including failures, is reported through the status.
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution, ConicError> {
    problem.validate()?;
    opts.validate()?;
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let ws = Workspace {
        a: &problem.a,
        at: problem.a.transpose(),
        b: DVector::from_column_slice(&problem.b),
        c: DVector::from_iterator(n, problem.c.iter().map(|v| sign * v)),
        cones: &problem.cones,
        nu: problem.cones.iter().map(|blk| blk.cone.barrier_parameter()).sum(),
    };

    let mut x0 = DVector::zeros(n);
    for blk in &problem.cones {
        blk.cone.write_central_point(&mut x0.as_mut_slice()[blk.range()]);
    }
    let mut pt = Point { s: x0.clone(), x: x0, y: DVector::zeros(m), tau: 1.0, kappa: 1.0 };

    let b_norm = ws.b.norm();
    let c_norm = ws.c.norm();
    let mut trace = Vec::new();
    let mut last_step = 0.0;
    let mut status = SolveStatus::MaxIters;
    let mut certificate = None;
    let mut iterations = 0;

    for iter in 0..=opts.max_iters {
        iterations = iter;
        let tau = pt.tau;
        let rp = ws.a * &pt.x - &ws.b * tau;
        let rd = &ws.at * &pt.y + &pt.s - &ws.c * tau;
        let mu = ws.mu(&pt);
        let pobj = ws.c.dot(&pt.x) / tau;
        let dobj = ws.b.dot(&pt.y) / tau;
        let compl = pt.x.dot(&pt.s) / (tau * tau);
        let pres = rp.norm() / tau / (1.0 + b_norm);
        let dres = rd.norm() / tau / (1.0 + c_norm);
        let coupling = (pt.x.dot(&rd).abs() + pt.y.dot(&rp).abs()) / (tau * tau);
        let record = IterationRecord {
            iter,
            mu,
            primal_objective: sign * pobj,
            dual_objective: sign * dobj,
            complementarity: compl,
            primal_residual: pres,
            dual_residual: dres,
            tau,
            kappa: pt.kappa,
            residual_coupling: coupling,
            step: last_step,
        };
        if opts.verbosity > 0 {
            eprintln!(
                "{iter:4}  pobj {:+.8e}  dobj {:+.8e}  gap {compl:.2e}  pres {pres:.2e}  dres {dres:.2e}  tau {tau:.2e}  kappa {:.2e}  step {last_step:.3}",
                sign * pobj,
                sign * dobj,
                pt.kappa
            );
        }
        trace.push(record);

        if !(mu.is_finite() && pobj.is_finite() && dobj.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if pres <= opts.feas_tol && dres <= opts.feas_tol && compl <= opts.gap_tol * (1.0 + pobj.abs()) {
            status = SolveStatus::Optimal;
            break;
        }
        let by = ws.b.dot(&pt.y);
        if by > 0.0 {
            let ray = (&ws.at * &pt.y + &pt.s).norm() / by;
            if ray <= opts.feas_tol {
                status = SolveStatus::PrimalInfeasible;
                certificate = Some(Certificate::PrimalInfeasible {
                    y: (&pt.y / by).as_slice().to_vec(),
                    s: (&pt.s / by).as_slice().to_vec(),
                    residual: ray,
                });
                break;
            }
        }
        let cx = ws.c.dot(&pt.x);
        if cx < 0.0 {
            let ray = (ws.a * &pt.x).norm() / -cx;
            if ray <= opts.feas_tol {
                status = SolveStatus::DualInfeasible;
                certificate =
                    Some(Certificate::DualInfeasible { x: (&pt.x / -cx).as_slice().to_vec(), residual: ray });
                break;
            }
        }
        if iter == opts.max_iters {
            break;
        }

        let Some(kkt) = ws.factor(&pt.x, mu) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let g = ws.gradient(&kkt.locals);
        let predict = Rhs {
            r1: -&rp,
            r2: rd.clone(),
            r3: ws.c.dot(&pt.x) - ws.b.dot(&pt.y) + pt.kappa,
            r4: -&pt.s,
            r5: -pt.tau * pt.kappa,
        };
        let center = Rhs {
            r1: DVector::zeros(m),
            r2: DVector::zeros(n),
            r3: 0.0,
            r4: -(&pt.s + &g * mu),
            r5: mu - pt.tau * pt.kappa,
        };
        let d_pred = ws.solve_refined(&kkt, &pt, &predict);
        let d_cent = ws.solve_refined(&kkt, &pt, &center);
        if opts.verbosity > 1 {
            let rp_err = rhs_norm(&ws.residual(&kkt, &pt, &predict, &d_pred)) / rhs_norm(&predict);
            let rc_err = rhs_norm(&ws.residual(&kkt, &pt, &center, &d_cent)) / rhs_norm(&center).max(1e-300);
            eprintln!("      newton residuals: predictor {rp_err:.2e}, centering {rc_err:.2e}");
            let r = ws.residual(&kkt, &pt, &predict, &d_pred);
            eprintln!("      pred parts: r1 {:.2e} r2 {:.2e} r3 {:.2e} r4 {:.2e} r5 {:.2e} | rhs r4 {:.2e} dx {:.2e} ds {:.2e}", r.r1.norm(), r.r2.norm(), r.r3.abs(), r.r4.norm(), r.r5.abs(), predict.r4.norm(), d_pred.x.norm(), d_pred.s.norm());
            for &alpha in &[0.5, 0.0] {
                let trial = pt.axpy(1.0, &Point::combine(alpha, &d_pred, 1.0 - alpha, &d_cent));
                let mu_t = ws.mu(&trial);
                let prox: Vec<Option<f64>> = ws.cones.iter().map(|blk| {
                    let r = blk.range();
                    proximity(&blk.cone, &trial.x.as_slice()[r.clone()], &trial.s.as_slice()[r], mu_t)
                }).collect();
                eprintln!("      alpha {alpha}: mu {mu_t:.3e} tk {:.3} prox {prox:?}", trial.tau * trial.kappa / mu_t);
            }
        }

        let mut next = None;
        for &alpha in PREDICTOR_WEIGHTS.iter().filter(|&&a| a <= opts.step_fraction) {
            let dir = Point::combine(alpha, &d_pred, 1.0 - alpha, &d_cent);
            let trial = pt.axpy(1.0, &dir);
            if ws.in_neighborhood(&trial) {
                next = Some((trial, alpha));
                break;
            }
        }
        if next.is_none() {
            let mut beta = 0.5;
            while beta > 1e-4 {
                let trial = pt.axpy(beta, &d_cent);
                if ws.is_interior(&trial) {
                    next = Some((trial, 0.0));
                    break;
                }
                beta *= 0.5;
            }
        }
        match next {
            Some((trial, alpha)) => {
                pt = trial;
                last_step = alpha;
            }
            None => {
                status = SolveStatus::NumericalFailure;
                break;
            }
        }
    }

    let tau = pt.tau;
    let xs = &pt.x / tau;
    let ys = &pt.y / tau;
    let ss = &pt.s / tau;
    let last = trace.last().cloned().expect("at least one iterate");
    let objective = problem.objective(xs.as_slice());
    Ok(ConicSolution {
        status,
        x: xs.as_slice().to_vec(),
        y: ys.as_slice().to_vec(),
        s: ss.as_slice().to_vec(),
        objective,
        dual_objective: sign * ws.b.dot(&ys),
        gap: last.complementarity / (1.0 + objective.abs()),
        primal_residual: last.primal_residual,
        dual_residual: last.dual_residual,
        iterations,
        certificate,
        trace,
    })
}

/// Recomputes feasibility of a claimed optimum from scratch: the worst
/// relative equality residual, the most negative cone margin (primal and
/// dual), and the relative complementarity.
pub fn replay(problem: &ConicProblem, sol: &ConicSolution) -> Result<ReplayReport, ConicError> {
    use super::cones::{check_dual_membership, check_membership};
    let res = problem.equality_residual(&sol.x);
    let primal_residual = norm(&res) / (1.0 + norm(&problem.b));
    let sign = if problem.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let aty = problem.a.transpose() * DVector::from_column_slice(&sol.y);
    let dres: Vec<f64> = (0..problem.num_vars()).map(|j| aty[j] + sol.s[j] - sign * problem.c[j]).collect();
    let dual_residual = norm(&dres) / (1.0 + norm(&problem.c));
    let mut primal_margin = f64::INFINITY;
    let mut dual_margin = f64::INFINITY;
    for blk in &problem.cones {
        let r = blk.range();
        primal_margin = primal_margin.min(check_membership(&sol.x[r.clone()], &blk.cone)?);
        dual_margin = dual_margin.min(check_dual_membership(&sol.s[r], &blk.cone)?);
    }
    let complementarity = dot(&sol.x, &sol.s) / (1.0 + sol.objective.abs());
    Ok(ReplayReport { primal_residual, dual_residual, primal_margin, dual_margin, complementarity })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_margin: f64,
    pub dual_margin: f64,
    pub complementarity: f64,
}
