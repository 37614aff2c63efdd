//! Globally C1 spaces on multi-patch scaled-boundary domains.
//!
//! The coupled basis is `T = M0 M1`: `M0` spans the continuous space with
//! scaling-center functions and essential conditions, and `M1` is an
//! orthonormal basis of the null space of the jump matrix `MJ`.

pub mod asg1;
pub mod jump;
pub mod m0;
pub mod nullspace;
pub mod verify;

pub use asg1::{asg1_coefficients, interface_coefficients, verify_asg1, G1Coefficients};
pub use jump::{assemble_jump_matrix, assemble_jump_rows, assemble_jump_rows_grouped};
pub use m0::{build_m0, scaling_center_functions, with_uniform_bc, M0Column, M0};
pub use verify::{c1_jump_residuals, reproduce_affine, JumpResidual};
pub use nullspace::{grouped_nullspace, nullspace, sparse_nullspace, sparse_nullspace_rows, NullBasis, DEFAULT_NULL_TOL};

use faer::Mat;
use rayon::prelude::*;

use crate::error::Result;
use crate::sbgeom::MultiPatchDomain;
use crate::space::UncoupledSpace;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy)]
pub struct CouplingOptions {
    /// Relative eigenvalue threshold of the null space of `MJ`.
    pub null_tol: f64,
    /// Gauss points per interface span; `p + 1` when `None`.
    pub quad_points: Option<usize>,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions { null_tol: DEFAULT_NULL_TOL, quad_points: None }
    }
}

/// C1 space with its embedding into the uncoupled space.
#[derive(Debug, Clone)]
pub struct CoupledSpace {
    pub domain: MultiPatchDomain,
    pub space: UncoupledSpace,
    pub m0: M0,
    /// Weighted jump rows `J` with `MJ = J^T J`.
    pub jumps: CsrMatrix,
    pub mj: CsrMatrix,
    pub m1: NullBasis,
}

/// Coupled space built on the standard uncoupled space of the domain.
pub fn build_coupled_space(domain: &MultiPatchDomain, opts: &CouplingOptions) -> Result<CoupledSpace> {
    let space = UncoupledSpace::standard(domain)?;
    build_coupled_space_on(domain, space, opts)
}

/// Coupled space on a given uncoupled space.
pub fn build_coupled_space_on(
    domain: &MultiPatchDomain,
    space: UncoupledSpace,
    opts: &CouplingOptions,
) -> Result<CoupledSpace> {
    let m0 = build_m0(domain, &space)?;
    let q = opts.quad_points.unwrap_or(domain.degree() + 1);
    let (jumps, groups) = assemble_jump_rows_grouped(domain, &space, &m0.matrix, q)?;
    let mj = jumps.transpose().matmul(&jumps);
    let m1 = grouped_nullspace(&jumps, &groups, opts.null_tol)?;
    Ok(CoupledSpace { domain: domain.clone(), space, m0, jumps, mj, m1 })
}

impl CoupledSpace {
    /// Uncoupled dimension `N`.
    pub fn n(&self) -> usize {
        self.space.dim
    }

    /// Dimension `N4` of the continuous space.
    pub fn n4(&self) -> usize {
        self.m0.matrix.ncols()
    }

    /// Dimension `N6` of the C1 space.
    pub fn n6(&self) -> usize {
        self.m1.dim()
    }

    /// Uncoupled coefficients `M0 M1 c`.
    pub fn to_uncoupled(&self, c: &[f64]) -> Vec<f64> {
        self.m0.matrix.mul_vec(&self.m1.apply(c))
    }

    /// `M1^T M0^T v`.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.m1.apply_t(&self.m0.matrix.tmul_vec(v))
    }

    /// `M1^T M0^T v` for sparse `v`.
    pub fn restrict_sparse(&self, v: &[(usize, f64)]) -> Vec<(usize, f64)> {
        self.m1.apply_t_sparse(&jump::to_columns(&self.m0.matrix, v))
    }

    /// `M1^T M0^T A M0 M1`, symmetrized.
    pub fn project_matrix(&self, a: &CsrMatrix) -> Result<CsrMatrix> {
        let m0 = &self.m0.matrix;
        self.project_reduced(&m0.transpose().matmul(&a.matmul(m0)))
    }

    /// `M1^T A^ M1` for `A^ = M0^T A M0`, symmetrized.
    pub fn project_reduced(&self, ahat: &CsrMatrix) -> Result<CsrMatrix> {
        Ok(project_null(ahat, &self.m1)?.symmetrized())
    }
}

/// `M1^T A M1` exploiting the identity and dense-block structure of `M1`.
pub fn project_null(ahat: &CsrMatrix, m1: &NullBasis) -> Result<CsrMatrix> {
    let b = ahat.matmul(&m1.to_csr());
    let mut rows: Vec<Vec<(usize, f64)>> = m1
        .identity
        .iter()
        .map(|&r| {
            let (idx, val) = b.row(r);
            idx.iter().copied().zip(val.iter().copied()).collect()
        })
        .collect();
    let block_rows: Vec<Vec<Vec<(usize, f64)>>> = m1
        .blocks
        .par_iter()
        .map(|blk| {
            let mut cols: Vec<usize> = blk.rows.iter().flat_map(|&r| b.row(r).0.iter().copied()).collect();
            cols.sort_unstable();
            cols.dedup();
            let mut bk = Mat::<f64>::zeros(blk.rows.len(), cols.len());
            for (a, &r) in blk.rows.iter().enumerate() {
                let (idx, val) = b.row(r);
                for (&c, &v) in idx.iter().zip(val) {
                    let k = cols.binary_search(&c).unwrap();
                    bk[(a, k)] = v;
                }
            }
            let prod = blk.q.transpose() * &bk;
            (0..prod.nrows())
                .map(|i| cols.iter().enumerate().map(|(k, &c)| (c, prod[(i, k)])).collect())
                .collect()
        })
        .collect();
    for br in block_rows {
        rows.extend(br);
    }
    Ok(CsrMatrix::from_rows(m1.dim(), rows))
}
