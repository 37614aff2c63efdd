//! Gram matrix of normal-derivative jumps across interfaces.

use rayon::prelude::*;

use crate::error::Result;
use crate::geom::Vec2;
use crate::quadrature::GaussRule;
use crate::sbgeom::{physical_derivs, Edge, Interface, MultiPatchDomain};
use crate::space::UncoupledSpace;
use crate::sparse::CsrMatrix;

/// Quadrature point on an interface with the parametric points of both sides.
#[derive(Debug, Clone, Copy)]
pub struct InterfacePoint {
    pub s: f64,
    pub left: (f64, f64),
    pub right: (f64, f64),
    /// Unit normal pointing out of the left patch.
    pub normal: Vec2,
    /// Quadrature weight times the length element.
    pub weight: f64,
}

/// Gauss points of every span of the interface, never at its end points.
pub fn interface_points(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    itf: &Interface,
    rule: &GaussRule,
) -> Vec<InterfacePoint> {
    let pl = &domain.patches[itf.left.0];
    let (zb, xb) = space.patches[itf.left.0].breakpoints();
    let breaks = if itf.is_radial() { xb } else { zb };
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for (s, wq) in rule.mapped(w[0], w[1]) {
            let (left, right, tangent, inward) = if itf.is_radial() {
                let g = pl.geometry(1.0, s);
                ((1.0, s), (0.0, s), g.d_xi, g.d_zeta)
            } else {
                let g = pl.geometry(s, 1.0);
                ((s, 1.0), (1.0 - s, 1.0), g.d_zeta, g.d_xi)
            };
            let mut normal = tangent.perp().normalized();
            if normal.dot(inward) < 0.0 {
                normal = -normal;
            }
            out.push(InterfacePoint { s, left, right, normal, weight: wq * tangent.norm() });
        }
    }
    out
}

/// Uncoupled functions with a non-zero value or normal derivative on the
/// interface, per side (global indices).
pub fn interface_support(space: &UncoupledSpace, itf: &Interface) -> (Vec<usize>, Vec<usize>) {
    let side = |(patch, edge): (usize, Edge)| {
        let mut v = space.edge_layer(patch, edge, 0);
        v.extend(space.edge_layer(patch, edge, 1));
        v.sort_unstable();
        v
    };
    (side(itf.left), side(itf.right))
}

/// Normal-derivative jumps of the uncoupled functions at one interface point,
/// as `(global index, value)`; left-side values enter with `+`, right-side
/// values with `-`.
pub fn uncoupled_jumps(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    itf: &Interface,
    support: &(Vec<usize>, Vec<usize>),
    pt: &InterfacePoint,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (sign, (patch, _), (z, s), allowed) in [
        (1.0, itf.left, pt.left, &support.0),
        (-1.0, itf.right, pt.right, &support.1),
    ] {
        let e = space.patches[patch].eval(z, s, 1)?;
        let geo = domain.patches[patch].geometry(z, s);
        let phys = physical_derivs(&e.basis, &geo)?;
        let off = space.offsets[patch];
        for (k, &l) in e.dofs.iter().enumerate() {
            let g = off + l;
            if allowed.binary_search(&g).is_ok() {
                let d = phys.grad[k][0] * pt.normal.x + phys.grad[k][1] * pt.normal.y;
                out.push((g, sign * d));
            }
        }
    }
    Ok(out)
}

/// Maps uncoupled values to the columns of `m0`: `m0^T v` for sparse `v`.
pub fn to_columns(m0: &CsrMatrix, v: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for &(g, x) in v {
        let (idx, val) = m0.row(g);
        for (&c, &a) in idx.iter().zip(val) {
            acc.push((c, a * x));
        }
    }
    acc.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
    for (c, x) in acc {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += x,
            _ => out.push((c, x)),
        }
    }
    out
}

/// Weighted jumps `sqrt(w) [[grad phi . n]]` of the columns of `m0`, one row
/// per interface quadrature point, with `quad_points` Gauss points per span.
pub fn assemble_jump_rows(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    m0: &CsrMatrix,
    quad_points: usize,
) -> Result<CsrMatrix> {
    Ok(assemble_jump_rows_grouped(domain, space, m0, quad_points)?.0)
}

/// Jump rows with the interface index of every row.
pub fn assemble_jump_rows_grouped(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    m0: &CsrMatrix,
    quad_points: usize,
) -> Result<(CsrMatrix, Vec<usize>)> {
    let rule = GaussRule::new(quad_points);
    let parts: Vec<Vec<Vec<(usize, f64)>>> = domain
        .interfaces
        .par_iter()
        .map(|itf| -> Result<Vec<Vec<(usize, f64)>>> {
            let support = interface_support(space, itf);
            interface_points(domain, space, itf, &rule)
                .iter()
                .map(|pt| {
                    let jumps = uncoupled_jumps(domain, space, itf, &support, pt)?;
                    let w = pt.weight.sqrt();
                    Ok(to_columns(m0, &jumps).into_iter().map(|(c, x)| (c, w * x)).collect())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let groups = parts.iter().enumerate().flat_map(|(k, p)| std::iter::repeat(k).take(p.len())).collect();
    Ok((CsrMatrix::from_rows(m0.ncols(), parts.into_iter().flatten().collect()), groups))
}

/// `MJ = <[[grad phi . n]], [[grad phi . n]]>` over all interfaces for the
/// columns of `m0`.
pub fn assemble_jump_matrix(
    domain: &MultiPatchDomain,
    space: &UncoupledSpace,
    m0: &CsrMatrix,
    quad_points: usize,
) -> Result<CsrMatrix> {
    let j = assemble_jump_rows(domain, space, m0, quad_points)?;
    Ok(j.transpose().matmul(&j))
}
