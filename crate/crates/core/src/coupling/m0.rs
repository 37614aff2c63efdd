//! Continuous space with scaling-center functions and essential conditions.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::sbgeom::{BcTag, Edge, MultiPatchDomain};
use crate::space::UncoupledSpace;
use crate::sparse::CsrMatrix;
use crate::util::UnionFind;

/// Origin of a column of `M0`.
#[derive(Debug, Clone, PartialEq)]
pub enum M0Column {
    /// Sum of uncoupled functions identified across interfaces.
    Merged(Vec<usize>),
    /// Scaling-center function `kind` (0: one, 1: x, 2: y) of a center group.
    Center { group: usize, kind: usize },
}

/// `N x N4` embedding of the continuous space into the uncoupled one.
#[derive(Debug, Clone)]
pub struct M0 {
    pub matrix: CsrMatrix,
    pub columns: Vec<M0Column>,
    /// Uncoupled functions removed next to the scaling centers.
    pub near_center: Vec<bool>,
    /// Uncoupled functions removed by essential boundary conditions.
    pub constrained: Vec<bool>,
}

/// Number of radial layers removed next to a collapsed edge.
pub const CENTER_LAYERS: usize = 2;

/// Coefficients of the functions equal to `1`, `x` and `y` on the first
/// radial span of every patch of a center group, as sparse lists over the
/// uncoupled basis.
pub fn scaling_center_functions(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    group: usize,
) -> Result<[Vec<(usize, f64)>; 3]> {
    let grp = domain
        .groups
        .get(group)
        .ok_or_else(|| Error::InvalidIndex(format!("center group {group}")))?;
    if !grp.is_singular() {
        return Err(Error::NotApplicable(format!("center group {group} has no collapsed edge")));
    }
    let p = domain.degree();
    let mut out: [Vec<(usize, f64)>; 3] = Default::default();
    for &k in &grp.patches {
        let off = space.offsets[k];
        for part in &space.patches[k].parts {
            for i in 0..part.n1() {
                for j in 0..=p {
                    if let Some(l) = part.local(i, j) {
                        let c = part.net[i * part.n2() + j];
                        out[0].push((off + l, 1.0));
                        out[1].push((off + l, c.x));
                        out[2].push((off + l, c.y));
                    }
                }
            }
        }
    }
    for v in out.iter_mut() {
        v.sort_by_key(|e| e.0);
    }
    Ok(out)
}

/// Builds `M0`: removal of the two layers next to each collapsed edge,
/// identification of traces across interfaces, addition of the three
/// scaling-center functions per collapsed center, and removal of every
/// column touching a function constrained by an essential condition.
pub fn build_m0(domain: &MultiPatchDomain, space: &UncoupledSpace) -> Result<M0> {
    let n = space.dim;
    let mut near_center = vec![false; n];
    for (k, patch) in domain.patches.iter().enumerate() {
        if patch.is_singular() {
            for d in 0..CENTER_LAYERS {
                for g in space.edge_layer(k, Edge::XiMin, d) {
                    near_center[g] = true;
                }
            }
        }
    }
    let mut constrained = vec![false; n];
    for b in &domain.boundaries {
        for d in 0..b.bc.removed_layers() {
            for g in space.edge_layer(b.patch, b.edge, d) {
                constrained[g] = true;
            }
        }
    }

    let mut uf = UnionFind::new(n);
    let mut cross_trace: HashSet<usize> = HashSet::new();
    for (m, itf) in domain.interfaces.iter().enumerate() {
        let a = space.edge_layer(itf.left.0, itf.left.1, 0);
        let mut b = space.edge_layer(itf.right.0, itf.right.1, 0);
        if itf.reversed {
            b.reverse();
        }
        if a.len() != b.len() {
            return Err(Error::Topology(format!(
                "interface {m}: {} and {} trace functions",
                a.len(),
                b.len()
            )));
        }
        for (&x, &y) in a.iter().zip(&b) {
            if near_center[x] != near_center[y] {
                return Err(Error::Topology(format!("interface {m}: inconsistent center layers")));
            }
            if !near_center[x] {
                uf.union(x, y);
            }
            if !itf.is_radial() {
                cross_trace.insert(x);
                cross_trace.insert(y);
            }
        }
    }

    let mut columns = Vec::new();
    let mut triplets = Vec::new();
    for class in uf.classes() {
        if near_center[class[0]] || class.iter().any(|&g| constrained[g]) {
            continue;
        }
        let c = columns.len();
        for &g in &class {
            triplets.push((g, c, 1.0));
        }
        columns.push(M0Column::Merged(class));
    }
    for (g, grp) in domain.groups.iter().enumerate() {
        if !grp.is_singular() {
            continue;
        }
        let funcs = scaling_center_functions(domain, space, g)?;
        for (kind, f) in funcs.iter().enumerate() {
            if f.iter().any(|&(d, _)| constrained[d] || cross_trace.contains(&d)) {
                continue;
            }
            let c = columns.len();
            for &(d, v) in f {
                if v != 0.0 {
                    triplets.push((d, c, v));
                }
            }
            columns.push(M0Column::Center { group: g, kind });
        }
    }
    let matrix = CsrMatrix::from_triplets(n, columns.len(), triplets);
    Ok(M0 { matrix, columns, near_center, constrained })
}

/// Copy of the domain with every boundary condition replaced by `bc`.
pub fn with_uniform_bc(domain: &MultiPatchDomain, bc: BcTag) -> MultiPatchDomain {
    let mut d = domain.clone();
    for b in d.boundaries.iter_mut() {
        b.bc = bc;
    }
    d
}
