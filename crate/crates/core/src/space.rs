//! Uncoupled multi-patch spline spaces.
//!
//! Each patch carries one or more tensor-product parts. A part contributes
//! the functions of its space whose radial index lies in `j_range`; the
//! standard space has a single part with every function, the stabilized
//! space a coarse and a fine part.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sbgeom::{Edge, MultiPatchDomain, SbPatch};
use crate::splines::{BasisEval, TensorSplineSpace};

/// Functions of one tensor-product space restricted to a range of radial
/// indices.
#[derive(Debug, Clone)]
pub struct BasisPart {
    pub space: TensorSplineSpace,
    pub j_range: Range<usize>,
    /// Index of the first function of this part within the patch.
    pub offset: usize,
    /// Control net of the full space, `[i * n2 + j]`.
    pub net: Vec<Vec2>,
}

impl BasisPart {
    pub fn n1(&self) -> usize {
        self.space.n1()
    }

    pub fn n2(&self) -> usize {
        self.space.n2()
    }

    pub fn len(&self) -> usize {
        self.n1() * self.j_range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Patch-local index of function `(i, j)`, if it belongs to the part.
    pub fn local(&self, i: usize, j: usize) -> Option<usize> {
        if i < self.n1() && self.j_range.contains(&j) {
            Some(self.offset + i * self.j_range.len() + (j - self.j_range.start))
        } else {
            None
        }
    }

    /// `(i, j)` of a patch-local index belonging to this part.
    pub fn ij(&self, local: usize) -> (usize, usize) {
        let k = local - self.offset;
        let w = self.j_range.len();
        (k / w, self.j_range.start + k % w)
    }
}

/// Basis of one patch.
#[derive(Debug, Clone)]
pub struct PatchBasis {
    pub parts: Vec<BasisPart>,
    pub dim: usize,
}

/// Parametric derivatives of the patch functions that are non-zero at a point.
#[derive(Debug, Clone, Default)]
pub struct PatchEval {
    /// Patch-local indices.
    pub dofs: Vec<usize>,
    pub basis: BasisEval,
}

impl PatchBasis {
    /// Every function of the patch's own spline space.
    pub fn standard(patch: &SbPatch) -> Result<Self> {
        let space = patch.space();
        let n2 = space.n2();
        let part = BasisPart { space, j_range: 0..n2, offset: 0, net: patch.control_net()? };
        let dim = part.len();
        Ok(PatchBasis { parts: vec![part], dim })
    }

    pub fn from_parts(mut parts: Vec<BasisPart>) -> Result<Self> {
        let mut off = 0;
        for part in parts.iter_mut() {
            if part.j_range.end > part.n2() {
                return Err(Error::InvalidIndex("radial range exceeds the space".into()));
            }
            part.offset = off;
            off += part.len();
        }
        Ok(PatchBasis { parts, dim: off })
    }

    /// `(part, i, j)` of a patch-local index.
    pub fn locate(&self, local: usize) -> (usize, usize, usize) {
        for (k, part) in self.parts.iter().enumerate() {
            if local < part.offset + part.len() {
                let (i, j) = part.ij(local);
                return (k, i, j);
            }
        }
        panic!("local index {local} out of range");
    }

    /// Control point attached to a patch-local index.
    pub fn control_point(&self, local: usize) -> Vec2 {
        let (k, i, j) = self.locate(local);
        let part = &self.parts[k];
        part.net[i * part.n2() + j]
    }

    /// Element breakpoints: union over parts in `zeta`, the radial ones in `xi`.
    pub fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<f64> = self.parts.iter().flat_map(|p| p.space.zeta.breakpoints()).collect();
        z.sort_by(f64::total_cmp);
        z.dedup();
        let mut x: Vec<f64> = self.parts.iter().flat_map(|p| p.space.xi.breakpoints()).collect();
        x.sort_by(f64::total_cmp);
        x.dedup();
        (z, x)
    }

    pub fn eval(&self, zeta: f64, xi: f64, order: usize) -> Result<PatchEval> {
        let mut out = PatchEval::default();
        for part in &self.parts {
            let e = part.space.eval(zeta, xi, order)?;
            for (k, &(i, j)) in e.index.iter().enumerate() {
                if let Some(l) = part.local(i, j) {
                    out.dofs.push(l);
                    out.basis.index.push((i, j));
                    out.basis.value.push(e.value[k]);
                    if order >= 1 {
                        out.basis.grad.push(e.grad[k]);
                    }
                    if order >= 2 {
                        out.basis.hess.push(e.hess[k]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Patch-local indices of the control layer at distance `depth` from
    /// `edge`, ordered along the edge parameter.
    pub fn edge_layer(&self, edge: Edge, depth: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match edge {
            Edge::ZetaMin | Edge::ZetaMax => {
                let mut items: Vec<(usize, usize)> = Vec::new();
                for part in &self.parts {
                    if depth >= part.n1() {
                        continue;
                    }
                    let i = if edge == Edge::ZetaMin { depth } else { part.n1() - 1 - depth };
                    for j in part.j_range.clone() {
                        items.push((j, part.local(i, j).unwrap()));
                    }
                }
                items.sort();
                out.extend(items.into_iter().map(|(_, l)| l));
            }
            Edge::XiMin | Edge::XiMax => {
                for part in &self.parts {
                    if depth >= part.n2() {
                        continue;
                    }
                    let j = if edge == Edge::XiMin { depth } else { part.n2() - 1 - depth };
                    if part.j_range.contains(&j) {
                        out.extend((0..part.n1()).map(|i| part.local(i, j).unwrap()));
                    }
                }
            }
        }
        out
    }
}

/// Direct sum of patch bases with global numbering.
#[derive(Debug, Clone)]
pub struct UncoupledSpace {
    pub patches: Vec<PatchBasis>,
    pub offsets: Vec<usize>,
    pub dim: usize,
}

impl UncoupledSpace {
    pub fn standard(domain: &MultiPatchDomain) -> Result<Self> {
        let patches = domain.patches.iter().map(PatchBasis::standard).collect::<Result<Vec<_>>>()?;
        Ok(UncoupledSpace::from_patches(patches))
    }

    pub fn from_patches(patches: Vec<PatchBasis>) -> Self {
        let mut offsets = Vec::with_capacity(patches.len());
        let mut dim = 0;
        for p in &patches {
            offsets.push(dim);
            dim += p.dim;
        }
        UncoupledSpace { patches, offsets, dim }
    }

    /// `(patch, local)` of a global index.
    pub fn split(&self, global: usize) -> (usize, usize) {
        let k = self.offsets.partition_point(|&o| o <= global) - 1;
        (k, global - self.offsets[k])
    }

    pub fn control_point(&self, global: usize) -> Vec2 {
        let (k, l) = self.split(global);
        self.patches[k].control_point(l)
    }

    /// Global indices of an edge layer.
    pub fn edge_layer(&self, patch: usize, edge: Edge, depth: usize) -> Vec<usize> {
        let off = self.offsets[patch];
        self.patches[patch].edge_layer(edge, depth).into_iter().map(|l| l + off).collect()
    }

    /// Uncoupled coefficients of the affine function `a + b x + c y`.
    pub fn affine_coefficients(&self, a: f64, b: f64, c: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|g| {
                let x = self.control_point(g);
                a + b * x.x + c * x.y
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::NurbsCurve;
    use crate::sbgeom::{BcTag, Block, BoundaryCurve, DomainSpec};

    #[test]
    fn edge_layers_have_expected_sizes() {
        let c = [Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0), Vec2::new(-1.0, 1.0)];
        let curves = (0..4)
            .map(|k| BoundaryCurve::new(NurbsCurve::line(c[k], c[(k + 1) % 4], 3).unwrap(), BcTag::Free))
            .collect();
        let dom = DomainSpec { blocks: vec![Block::new(Vec2::ZERO, curves)] }.discretize(3, 1, 2).unwrap();
        let sp = UncoupledSpace::standard(&dom).unwrap();
        let pb = &sp.patches[0];
        assert_eq!(pb.dim, 36);
        assert_eq!(pb.edge_layer(Edge::ZetaMax, 0).len(), 6);
        assert_eq!(pb.edge_layer(Edge::XiMax, 1).len(), 6);
        assert_eq!(sp.split(40), (1, 4));
        let one = sp.affine_coefficients(1.0, 0.0, 0.0);
        assert!(one.iter().all(|&v| v == 1.0));
    }
}
