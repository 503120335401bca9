use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cones::{Cone, ConeBlock};
use super::ConicError;

/// Version tag written into every JSON debug dump.
pub const DUMP_SCHEMA: &str = "isac-ee/conic-problem/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Standard-form conic program
///
/// ```text
/// optimize  cᵀx   subject to   A x = b,   x ∈ K₁ × … × K_p
/// ```
///
/// where the cone blocks tile `0..num_vars` contiguously in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub sense: Sense,
    pub c: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeBlock>,
    /// A strictly feasible (or nearly feasible) primal point, when the builder
    /// knows one. The solver does not require it.
    pub seed: Option<Vec<f64>>,
}

impl ConicProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn count_cones(&self, pred: impl Fn(&Cone) -> bool) -> usize {
        self.cones.iter().filter(|blk| pred(&blk.cone)).count()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.c.len();
        if self.a.ncols() != n || self.a.nrows() != self.b.len() {
            return Err(ConicError::Malformed(format!(
                "A is {}x{}, expected {}x{}",
                self.a.nrows(),
                self.a.ncols(),
                self.b.len(),
                n
            )));
        }
        let mut next = 0;
        for (i, blk) in self.cones.iter().enumerate() {
            if !blk.cone.is_well_formed() {
                return Err(ConicError::Malformed(format!("cone {i} ({:?}) has invalid size", blk.cone)));
            }
            if blk.offset != next {
                return Err(ConicError::Malformed(format!(
                    "cone {i} starts at {} but the previous block ended at {next}",
                    blk.offset
                )));
            }
            next += blk.cone.dim();
        }
        if next != n {
            return Err(ConicError::Malformed(format!("cone dimensions sum to {next}, expected {n}")));
        }
        let finite = self.c.iter().chain(self.b.iter()).chain(self.a.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(ConicError::Malformed("non-finite problem data".into()));
        }
        if let Some(seed) = &self.seed {
            if seed.len() != n {
                return Err(ConicError::Malformed(format!("seed has length {}, expected {n}", seed.len())));
            }
        }
        Ok(())
    }

    /// Objective value `cᵀx` in the problem's own sense.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// `A x − b`.
    pub fn equality_residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = &self.a * nalgebra::DVector::from_column_slice(x);
        ax.iter().zip(&self.b).map(|(l, r)| l - r).collect()
    }

    pub fn to_dump(&self) -> ConicDump {
        let mut entries = Vec::new();
        for i in 0..self.a.nrows() {
            for j in 0..self.a.ncols() {
                let v = self.a[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        ConicDump {
            schema: DUMP_SCHEMA.to_string(),
            sense: self.sense,
            num_vars: self.num_vars(),
            num_constraints: self.num_constraints(),
            c: self.c.clone(),
            b: self.b.clone(),
            a: entries,
            cones: self.cones.clone(),
            seed: self.seed.clone(),
        }
    }

    pub fn from_dump(dump: ConicDump) -> Result<Self, ConicError> {
        if dump.schema != DUMP_SCHEMA {
            return Err(ConicError::Malformed(format!("unknown dump schema '{}'", dump.schema)));
        }
        if dump.c.len() != dump.num_vars || dump.b.len() != dump.num_constraints {
            return Err(ConicError::Malformed("vector lengths disagree with header".into()));
        }
        let mut a = DMatrix::zeros(dump.num_constraints, dump.num_vars);
        for &(i, j, v) in &dump.a {
            if i >= dump.num_constraints || j >= dump.num_vars {
                return Err(ConicError::Malformed(format!("matrix entry ({i}, {j}) out of range")));
            }
            a[(i, j)] += v;
        }
        let problem = ConicProblem { sense: dump.sense, c: dump.c, a, b: dump.b, cones: dump.cones, seed: dump.seed };
        problem.validate()?;
        Ok(problem)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("conic dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConicError> {
        let dump: ConicDump = serde_json::from_str(text).map_err(|e| ConicError::Malformed(e.to_string()))?;
        Self::from_dump(dump)
    }
}

/// JSON debug dump of a [`ConicProblem`].
///
/// `a` lists the nonzero entries of the constraint matrix as
/// `[row, col, value]` triplets. PSD blocks use the scaled lower-triangular
/// column-major `svec` layout documented in [`super::cones`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConicDump {
    pub schema: String,
    pub sense: Sense,
    pub num_vars: usize,
    pub num_constraints: usize,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Vec<(usize, usize, f64)>,
    pub cones: Vec<ConeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Vec<f64>>,
}
