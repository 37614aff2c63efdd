//! Orthonormal null-space bases of symmetric positive semidefinite matrices.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::util::UnionFind;

/// Eigenvalues below `tol * lambda_max` are treated as zero; `lambda_max` of
/// the zero matrix is taken as zero, so its whole space is returned.
pub const DEFAULT_NULL_TOL: f64 = 1e-10;

/// Eigenvectors of a symmetric positive semidefinite matrix whose eigenvalues
/// are at most `tol` times the largest one, ordered by ascending eigenvalue.
pub fn nullspace(m: MatRef<'_, f64>, tol: f64) -> Result<Mat<f64>> {
    let (vals, vecs) = eigen(m)?;
    let lmax = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let keep = vals.iter().take_while(|&&v| v <= tol * lmax).count();
    Ok(vecs.subcols(0, keep).to_owned())
}

fn eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidIndex("null space of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Assembly(format!("eigendecomposition failed: {e:?}")))?;
    let s = e.S().column_vector();
    let vals = (0..m.nrows()).map(|k| s[k]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Dense null-space block on a subset of rows.
#[derive(Debug, Clone)]
pub struct NullBlock {
    pub rows: Vec<usize>,
    pub q: Mat<f64>,
}

/// `M1`: identity on the functions untouched by the jump matrix and dense
/// blocks on subsets of the others. Blocks may share rows; all columns are
/// orthonormal.
#[derive(Debug, Clone)]
pub struct NullBasis {
    pub n4: usize,
    pub identity: Vec<usize>,
    pub blocks: Vec<NullBlock>,
    /// Largest eigenvalue classified as zero and smallest one kept out, both
    /// relative to the largest eigenvalue.
    pub gap: (f64, f64),
}

impl NullBasis {
    pub fn dim(&self) -> usize {
        self.identity.len() + self.blocks.iter().map(|b| b.q.ncols()).sum::<usize>()
    }

    /// `M1 c`.
    pub fn apply(&self, c: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n4];
        for (k, &r) in self.identity.iter().enumerate() {
            v[r] = c[k];
        }
        let mut off = self.identity.len();
        for b in &self.blocks {
            for j in 0..b.q.ncols() {
                let cj = c[off + j];
                if cj != 0.0 {
                    for (a, &r) in b.rows.iter().enumerate() {
                        v[r] += b.q[(a, j)] * cj;
                    }
                }
            }
            off += b.q.ncols();
        }
        v
    }

    /// `M1^T v`.
    pub fn apply_t(&self, v: &[f64]) -> Vec<f64> {
        let mut c: Vec<f64> = self.identity.iter().map(|&r| v[r]).collect();
        for b in &self.blocks {
            for j in 0..b.q.ncols() {
                c.push(b.rows.iter().enumerate().map(|(a, &r)| b.q[(a, j)] * v[r]).sum());
            }
        }
        c
    }

    /// `M1^T v` for sparse `v` given as `(index, value)` pairs.
    pub fn apply_t_sparse(&self, v: &[(usize, f64)]) -> Vec<(usize, f64)> {
        self.apply_t_with(&self.lookup(), v)
    }

    fn apply_t_with(&self, pos: &[Vec<(usize, usize)>], v: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut block_acc: Vec<Option<Vec<f64>>> = vec![None; self.blocks.len()];
        for &(r, x) in v {
            for &(bi, a) in &pos[r] {
                if bi == usize::MAX {
                    out.push((a, x));
                    continue;
                }
                let b = &self.blocks[bi];
                let acc = block_acc[bi].get_or_insert_with(|| vec![0.0; b.q.ncols()]);
                for (j, s) in acc.iter_mut().enumerate() {
                    *s += b.q[(a, j)] * x;
                }
            }
        }
        let mut off = self.identity.len();
        for (bi, b) in self.blocks.iter().enumerate() {
            if let Some(acc) = &block_acc[bi] {
                out.extend(acc.iter().enumerate().map(|(j, &s)| (off + j, s)));
            }
            off += b.q.ncols();
        }
        out.sort_by_key(|e| e.0);
        out
    }

    /// Row lookup table used by [`NullBasis::apply_t_lookup`]: for every row
    /// the `(block, position)` pairs, with `usize::MAX` marking the identity.
    pub fn lookup(&self) -> Vec<Vec<(usize, usize)>> {
        let mut pos = vec![Vec::new(); self.n4];
        for (k, &r) in self.identity.iter().enumerate() {
            pos[r].push((usize::MAX, k));
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            for (a, &r) in b.rows.iter().enumerate() {
                pos[r].push((bi, a));
            }
        }
        pos
    }

    /// `M1^T v` for sparse `v` with a precomputed lookup table.
    pub fn apply_t_lookup(&self, pos: &[Vec<(usize, usize)>], v: &[(usize, f64)]) -> Vec<(usize, f64)> {
        self.apply_t_with(pos, v)
    }

    /// Explicit sparse `N4 x N6` matrix.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut t = Vec::new();
        for (k, &r) in self.identity.iter().enumerate() {
            t.push((r, k, 1.0));
        }
        let mut off = self.identity.len();
        for b in &self.blocks {
            for j in 0..b.q.ncols() {
                for (a, &r) in b.rows.iter().enumerate() {
                    let v = b.q[(a, j)];
                    if v != 0.0 {
                        t.push((r, off + j, v));
                    }
                }
            }
            off += b.q.ncols();
        }
        CsrMatrix::from_triplets(self.n4, off, t)
    }
}

/// Null space of a sparse symmetric positive semidefinite matrix, computed
/// independently on each connected component of its sparsity graph with a
/// threshold relative to the global largest eigenvalue.
pub fn sparse_nullspace(mj: &CsrMatrix, tol: f64) -> Result<NullBasis> {
    let n = mj.nrows();
    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    for r in 0..n {
        let (idx, val) = mj.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            if v != 0.0 {
                active[r] = true;
                active[c] = true;
                uf.union(r, c);
            }
        }
    }
    let identity: Vec<usize> = (0..n).filter(|&r| !active[r]).collect();
    let comps: Vec<Vec<usize>> = uf.classes().into_iter().filter(|c| active[c[0]]).collect();
    let decomps = comps
        .iter()
        .map(|rows| {
            let k = rows.len();
            let mut m = Mat::<f64>::zeros(k, k);
            for (a, &r) in rows.iter().enumerate() {
                let (idx, val) = mj.row(r);
                for (&c, &v) in idx.iter().zip(val) {
                    if let Ok(b) = rows.binary_search(&c) {
                        m[(a, b)] = v;
                    }
                }
            }
            eigen(m.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    collect_blocks(n, identity, comps, decomps, tol)
}

/// Null space of `J^T J` computed from the singular value decomposition of
/// the rows of `J`; `tol` refers to the eigenvalues of `J^T J`.
pub fn sparse_nullspace_rows(j: &CsrMatrix, tol: f64) -> Result<NullBasis> {
    let n = j.ncols();
    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    for r in 0..j.nrows() {
        let (idx, val) = j.row(r);
        let mut first = None;
        for (&c, &v) in idx.iter().zip(val) {
            if v != 0.0 {
                active[c] = true;
                match first {
                    None => first = Some(c),
                    Some(f) => {
                        uf.union(f, c);
                    }
                }
            }
        }
    }
    let identity: Vec<usize> = (0..n).filter(|&c| !active[c]).collect();
    let comps: Vec<Vec<usize>> = uf.classes().into_iter().filter(|c| active[c[0]]).collect();
    let mut comp_of = vec![usize::MAX; n];
    for (k, c) in comps.iter().enumerate() {
        for &i in c {
            comp_of[i] = k;
        }
    }
    let mut comp_rows: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for r in 0..j.nrows() {
        let (idx, val) = j.row(r);
        if let Some(k) = idx.iter().zip(val).find(|(_, &v)| v != 0.0).map(|(&c, _)| comp_of[c]) {
            comp_rows[k].push(r);
        }
    }
    let decomps = comps
        .iter()
        .zip(&comp_rows)
        .map(|(cols, rows)| {
            let mut m = Mat::<f64>::zeros(rows.len(), cols.len());
            for (a, &r) in rows.iter().enumerate() {
                let (idx, val) = j.row(r);
                for (&c, &v) in idx.iter().zip(val) {
                    if let Ok(b) = cols.binary_search(&c) {
                        m[(a, b)] = v;
                    }
                }
            }
            svd_spectrum(m.as_ref())
        })
        .collect::<Result<Vec<_>>>()?;
    collect_blocks(n, identity, comps, decomps, tol)
}

/// Null space of `J^T J` for jump rows `j` partitioned into groups (one per
/// interface). Columns touched by one group are eliminated group by group;
/// columns touched by several groups are constrained through the left null
/// spaces of the groups and extended by minimum-norm solutions. `tol`
/// refers to the eigenvalues of `J^T J`.
pub fn grouped_nullspace(j: &CsrMatrix, groups: &[usize], tol: f64) -> Result<NullBasis> {
    use rayon::prelude::*;

    let n = j.ncols();
    if groups.len() != j.nrows() {
        return Err(Error::InvalidIndex("one group per jump row required".into()));
    }
    let ng = groups.iter().map(|&g| g + 1).max().unwrap_or(0);
    let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); ng];
    let mut col_groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in 0..j.nrows() {
        rows_of[groups[r]].push(r);
        let (idx, val) = j.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            if v != 0.0 && col_groups[c].last() != Some(&groups[r]) && !col_groups[c].contains(&groups[r]) {
                col_groups[c].push(groups[r]);
            }
        }
    }
    let identity: Vec<usize> = (0..n).filter(|&c| col_groups[c].is_empty()).collect();
    let mut private: Vec<Vec<usize>> = vec![Vec::new(); ng];
    let mut shared_of: Vec<Vec<usize>> = vec![Vec::new(); ng];
    let mut shared: Vec<usize> = Vec::new();
    for c in 0..n {
        match col_groups[c].len() {
            0 => {}
            1 => private[col_groups[c][0]].push(c),
            _ => {
                for &g in &col_groups[c] {
                    shared_of[g].push(c);
                }
                shared.push(c);
            }
        }
    }
    let thresh = tol * jtj_norm_estimate(j);
    let dense = |rows: &[usize], cols: &[usize]| {
        let mut m = Mat::<f64>::zeros(rows.len(), cols.len());
        for (a, &r) in rows.iter().enumerate() {
            let (idx, val) = j.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                if let Ok(b) = cols.binary_search(&c) {
                    m[(a, b)] = v;
                }
            }
        }
        m
    };
    let locals: Vec<LocalElimination> = (0..ng)
        .into_par_iter()
        .map(|g| {
            let a = dense(&rows_of[g], &private[g]);
            let b = dense(&rows_of[g], &shared_of[g]);
            LocalElimination::new(a, b, thresh, thresh / tol)
        })
        .collect::<Result<_>>()?;
    let mut gap = (0.0f64, f64::INFINITY);
    let mut blocks = Vec::new();
    for (g, l) in locals.iter().enumerate() {
        gap = merge_gap(gap, l.gap);
        if l.null.ncols() > 0 {
            blocks.push(NullBlock { rows: private[g].clone(), q: l.null.clone() });
        }
    }
    let mut uf = UnionFind::new(shared.len());
    for sh in &shared_of {
        for w in sh.windows(2) {
            let a = shared.binary_search(&w[0]).unwrap();
            let b = shared.binary_search(&w[1]).unwrap();
            uf.union(a, b);
        }
    }
    let comps: Vec<Vec<usize>> = uf.classes().into_iter().map(|c| c.into_iter().map(|k| shared[k]).collect()).collect();
    let shared_blocks: Vec<(Option<NullBlock>, (f64, f64))> = comps
        .par_iter()
        .map(|cols| {
            let mut touched: Vec<usize> = cols.iter().flat_map(|&c| col_groups[c].iter().copied()).collect();
            touched.sort_unstable();
            touched.dedup();
            let nrows: usize = touched.iter().map(|&g| locals[g].constraints.nrows()).sum();
            let mut cm = Mat::<f64>::zeros(nrows, cols.len());
            let mut off = 0;
            for &g in &touched {
                let con = &locals[g].constraints;
                for (k, &c) in shared_of[g].iter().enumerate() {
                    let b = cols.binary_search(&c).unwrap();
                    for a in 0..con.nrows() {
                        cm[(off + a, b)] = con[(a, k)];
                    }
                }
                off += con.nrows();
            }
            let (vals, vecs) = svd_spectrum(cm.as_ref())?;
            let keep = vals.iter().take_while(|&&v| v <= thresh).count();
            let lmax = thresh / tol;
            let gap = (
                if keep > 0 { vals[keep - 1] / lmax } else { 0.0 },
                if keep < vals.len() { vals[keep] / lmax } else { f64::INFINITY },
            );
            if keep == 0 {
                return Ok((None, gap));
            }
            let y = vecs.subcols(0, keep);
            let mut rows: Vec<usize> = cols.clone();
            for &g in &touched {
                rows.extend(private[g].iter().copied());
            }
            rows.sort_unstable();
            let mut w = Mat::<f64>::zeros(rows.len(), keep);
            for (b, &c) in cols.iter().enumerate() {
                let a = rows.binary_search(&c).unwrap();
                for k in 0..keep {
                    w[(a, k)] = y[(b, k)];
                }
            }
            for &g in &touched {
                let yg = Mat::from_fn(shared_of[g].len(), keep, |i, k| y[(cols.binary_search(&shared_of[g][i]).unwrap(), k)]);
                let x = locals[g].extend(yg.as_ref());
                for (i, &c) in private[g].iter().enumerate() {
                    let a = rows.binary_search(&c).unwrap();
                    for k in 0..keep {
                        w[(a, k)] = x[(i, k)];
                    }
                }
            }
            let svd = w.thin_svd().map_err(|e| Error::Assembly(format!("singular value decomposition failed: {e:?}")))?;
            Ok((Some(NullBlock { rows, q: svd.U().subcols(0, keep).to_owned() }), gap))
        })
        .collect::<Result<_>>()?;
    for (b, gp) in shared_blocks {
        gap = merge_gap(gap, gp);
        blocks.extend(b);
    }
    let basis = NullBasis { n4: n, identity, blocks, gap };
    if basis.dim() == 0 {
        return Err(Error::NoC1Space("the jump matrix has a trivial null space".into()));
    }
    Ok(basis)
}

fn merge_gap(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// Largest eigenvalue of `J^T J` by power iteration.
fn jtj_norm_estimate(j: &CsrMatrix) -> f64 {
    let n = j.ncols();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
    let mut lam = 0.0;
    for _ in 0..60 {
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let w = j.tmul_vec(&j.mul_vec(&v));
        lam = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        v = w;
    }
    lam
}

/// Singular value decomposition of the private part `A` of one group's
/// jump rows, with the constraints `U0^T B` it imposes on the shared part.
struct LocalElimination {
    /// Orthonormal null space of `A`.
    null: Mat<f64>,
    /// `U0^T B` for the left singular vectors `U0` of the zero singular values.
    constraints: Mat<f64>,
    /// `V_r diag(1 / s_r) U_r^T B` for the kept singular triplets.
    pinv_b: Mat<f64>,
    gap: (f64, f64),
}

impl LocalElimination {
    fn new(a: Mat<f64>, b: Mat<f64>, thresh: f64, lmax: f64) -> Result<Self> {
        let (m, p) = a.shape();
        let (u, sv, v) = if m == 0 || p == 0 {
            (Mat::identity(m, m), Vec::new(), Mat::identity(p, p))
        } else {
            let svd = a.svd().map_err(|e| Error::Assembly(format!("singular value decomposition failed: {e:?}")))?;
            let s = svd.S().column_vector();
            ((svd.U().to_owned()), (0..m.min(p)).map(|k| s[k]).collect(), svd.V().to_owned())
        };
        let rank = sv.iter().take_while(|&&x| x * x > thresh).count();
        let gap = (
            sv.get(rank).map_or(0.0, |&x| x * x / lmax),
            if rank > 0 { sv[rank - 1] * sv[rank - 1] / lmax } else { f64::INFINITY },
        );
        let null = v.subcols(rank, p - rank).to_owned();
        let constraints = u.subcols(rank, m - rank).transpose() * &b;
        let ub = u.subcols(0, rank).transpose() * &b;
        let scaled = Mat::from_fn(rank, b.ncols(), |i, k| ub[(i, k)] / sv[i]);
        let pinv_b = v.subcols(0, rank) * &scaled;
        Ok(LocalElimination { null, constraints, pinv_b, gap })
    }

    /// Private coefficients `-A^+ B y` completing shared coefficients `y`.
    fn extend(&self, y: MatRef<'_, f64>) -> Mat<f64> {
        -(&self.pinv_b * y)
    }
}

/// Eigenvalues of `A^T A` in ascending order with their eigenvectors.
fn svd_spectrum(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let (m, k) = a.shape();
    if m == 0 {
        return Ok((vec![0.0; k], Mat::identity(k, k)));
    }
    let svd = a.svd().map_err(|e| Error::Assembly(format!("singular value decomposition failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let v = svd.V();
    let vals = (0..k).rev().map(|i| if i < m.min(k) { s[i] * s[i] } else { 0.0 }).collect();
    let vecs = Mat::from_fn(k, k, |r, c| v[(r, k - 1 - c)]);
    Ok((vals, vecs))
}

fn collect_blocks(
    n: usize,
    identity: Vec<usize>,
    comps: Vec<Vec<usize>>,
    decomps: Vec<(Vec<f64>, Mat<f64>)>,
    tol: f64,
) -> Result<NullBasis> {
    let lmax = decomps
        .iter()
        .flat_map(|(v, _)| v.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let thresh = tol * lmax;
    let mut gap = (0.0f64, f64::INFINITY);
    let mut blocks = Vec::new();
    for (rows, (vals, vecs)) in comps.into_iter().zip(decomps) {
        let keep = vals.iter().take_while(|&&v| v <= thresh).count();
        if keep > 0 {
            gap.0 = gap.0.max(vals[keep - 1] / lmax);
        }
        if keep < vals.len() {
            gap.1 = gap.1.min(vals[keep] / lmax);
        }
        if keep > 0 {
            blocks.push(NullBlock { rows, q: vecs.subcols(0, keep).to_owned() });
        }
    }
    let basis = NullBasis { n4: n, identity, blocks, gap };
    if basis.dim() == 0 {
        return Err(Error::NoC1Space("the jump matrix has a trivial null space".into()));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let mut m = Mat::<f64>::zeros(3, 3);
        let v = [1.0, 2.0, -1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = v[i] * v[j];
            }
        }
        let q = nullspace(m.as_ref(), 1e-10).unwrap();
        assert_eq!(q.ncols(), 2);
        for j in 0..2 {
            let dot: f64 = (0..3).map(|i| q[(i, j)] * v[i]).sum();
            assert!(dot.abs() < 1e-12);
        }
        let z = Mat::<f64>::zeros(4, 4);
        assert_eq!(nullspace(z.as_ref(), 1e-10).unwrap().ncols(), 4);
    }

    #[test]
    fn sparse_components_and_identity() {
        let mj = CsrMatrix::from_triplets(
            4,
            4,
            vec![(0, 0, 1.0), (0, 2, -1.0), (2, 0, -1.0), (2, 2, 1.0)],
        );
        let nb = sparse_nullspace(&mj, 1e-10).unwrap();
        assert_eq!(nb.identity, vec![1, 3]);
        assert_eq!(nb.dim(), 3);
        let c = [1.0, 2.0, 1.0];
        let v = nb.apply(&c);
        assert!((v[0] - v[2]).abs() < 1e-14);
        let back = nb.apply_t(&v);
        for k in 0..3 {
            assert!((back[k] - c[k]).abs() < 1e-14);
        }
        let dense = nb.to_csr().to_dense();
        assert_eq!(dense.ncols(), 3);
    }
}
