//! Small helpers for assembling standard-form conic programs over complex
//! covariance variables.
//!
//! Each `N×N` Hermitian variable lives in a real PSD block of side `2N` that
//! holds its real embedding. Linear functionals `tr(C V)` are written against
//! the block as `svec(embed(C)) / 2`; decoding projects the block back onto
//! embedded Hermitian matrices, which keeps PSD and the functional values.

use nalgebra::DMatrix;

use crate::conic::{smat, svec, svec_len, Cone, ConeBlock, ConicProblem, Sense};
use crate::hermitian::{embed_real, extract_hermitian, ComplexVector, HermitianMatrix, LinalgError};
use crate::model::Covariances;

pub(crate) type Terms = Vec<(usize, f64)>;

#[derive(Debug, Default)]
pub(crate) struct ProgramBuilder {
    cones: Vec<ConeBlock>,
    num_vars: usize,
    rows: Vec<(Terms, f64)>,
    objective: Terms,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a cone block and returns its offset.
    pub fn cone(&mut self, cone: Cone) -> usize {
        let offset = self.num_vars;
        self.cones.push(ConeBlock { cone, offset });
        self.num_vars += cone.dim();
        offset
    }

    pub fn row(&mut self, terms: Terms, rhs: f64) {
        self.rows.push((terms, rhs));
    }

    pub fn objective(&mut self, terms: Terms) {
        self.objective.extend(terms);
    }

    pub fn finish(self, sense: Sense, seed: Option<Vec<f64>>) -> ConicProblem {
        let n = self.num_vars;
        let mut c = vec![0.0; n];
        for (j, v) in self.objective {
            c[j] += v;
        }
        let mut a = DMatrix::zeros(self.rows.len(), n);
        let mut b = Vec::with_capacity(self.rows.len());
        for (i, (terms, rhs)) in self.rows.into_iter().enumerate() {
            for (j, v) in terms {
                a[(i, j)] += v;
            }
            b.push(rhs);
        }
        ConicProblem { sense, c, a, b, cones: self.cones, seed }
    }
}

/// Placement of `V_0, V_1, …, V_K` in the variable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceLayout {
    pub n: usize,
    /// Offsets of the PSD blocks, radar covariance first.
    pub offsets: Vec<usize>,
}

impl CovarianceLayout {
    pub(crate) fn allocate(builder: &mut ProgramBuilder, n: usize, num_users: usize) -> Self {
        let offsets = (0..=num_users).map(|_| builder.cone(Cone::Psd { side: 2 * n })).collect();
        Self { n, offsets }
    }

    pub fn num_users(&self) -> usize {
        self.offsets.len() - 1
    }

    fn block_len(&self) -> usize {
        svec_len(2 * self.n)
    }

    /// Coefficients of `scale · tr(C V_i)`, where index 0 is the radar block.
    pub(crate) fn linear_terms(&self, i: usize, c: &HermitianMatrix, scale: f64) -> Terms {
        let off = self.offsets[i];
        svec(&embed_real(c))
            .into_iter()
            .enumerate()
            .filter(|&(_, v)| v != 0.0)
            .map(|(j, v)| (off + j, 0.5 * scale * v))
            .collect()
    }

    /// Coefficients of `scale · hᴴ V_i h`.
    pub(crate) fn quad_terms(&self, i: usize, h: &ComplexVector, scale: f64) -> Terms {
        self.linear_terms(i, &h.outer(), scale)
    }

    /// Coefficients of `scale · tr V_i`.
    pub(crate) fn trace_terms(&self, i: usize, scale: f64) -> Terms {
        let side = 2 * self.n;
        let off = self.offsets[i];
        // Diagonal entries sit at the start of each svec column.
        let mut pos = 0;
        let mut out = Vec::with_capacity(side);
        for col in 0..side {
            out.push((off + pos, 0.5 * scale));
            pos += side - col;
        }
        out
    }

    /// Coefficients of `scale · Σ_{i=0..K} tr V_i`.
    pub(crate) fn total_trace_terms(&self, scale: f64) -> Terms {
        (0..self.offsets.len()).flat_map(|i| self.trace_terms(i, scale)).collect()
    }

    /// Coefficients of `scale · Σ_{i=0..K} hᴴ V_i h`.
    pub(crate) fn total_quad_terms(&self, h: &ComplexVector, scale: f64) -> Terms {
        (0..self.offsets.len()).flat_map(|i| self.quad_terms(i, h, scale)).collect()
    }

    pub fn decode(&self, x: &[f64]) -> Result<Covariances, LinalgError> {
        let side = 2 * self.n;
        let mut mats = self
            .offsets
            .iter()
            .map(|&off| extract_hermitian(&smat(&x[off..off + self.block_len()], side)))
            .collect::<Result<Vec<_>, _>>()?;
        let radar = mats.remove(0);
        Ok(Covariances { users: mats, radar })
    }

    pub fn encode(&self, covs: &Covariances, x: &mut [f64]) {
        for (&off, v) in self.offsets.iter().zip(covs.all()) {
            x[off..off + self.block_len()].copy_from_slice(&svec(&embed_real(v)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::C64;
    use approx::assert_relative_eq;

    #[test]
    fn functionals_match_direct_evaluation() {
        let mut b = ProgramBuilder::new();
        let layout = CovarianceLayout::allocate(&mut b, 2, 1);
        let h = ComplexVector::from_slice(&[C64::new(0.3, -1.1), C64::new(0.7, 0.4)]).unwrap();
        let g = ComplexVector::from_slice(&[C64::new(1.2, 0.2), C64::new(-0.5, 0.9)]).unwrap();
        let covs = Covariances { users: vec![g.outer()], radar: HermitianMatrix::identity(2).scaled(0.25) };
        let mut x = vec![0.0; b.num_vars];
        layout.encode(&covs, &mut x);
        let eval = |terms: Terms| terms.iter().map(|&(j, v)| v * x[j]).sum::<f64>();
        assert_relative_eq!(eval(layout.quad_terms(1, &h, 1.0)), covs.users[0].quad_form(&h), max_relative = 1e-14);
        assert_relative_eq!(eval(layout.total_trace_terms(2.0)), 2.0 * covs.transmit_power(), max_relative = 1e-14);
        let back = layout.decode(&x).unwrap();
        assert!((&back.users[0] - &covs.users[0]).max_abs() < 1e-15);
        assert!((&back.radar - &covs.radar).max_abs() < 1e-15);
    }
}
