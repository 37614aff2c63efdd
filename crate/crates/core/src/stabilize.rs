//! Two-mesh spaces near collapsed edges.
//!
//! On a singular patch the fine space keeps the functions whose support
//! avoids the first radial span, while the functions touching that span are
//! taken from a coarse mesh that is refined in the radial direction only.

use crate::coupling::{build_coupled_space_on, CoupledSpace, CouplingOptions};
use crate::error::{Error, Result};
use crate::sbgeom::{DomainSpec, MultiPatchDomain, SbPatch};
use crate::space::{BasisPart, PatchBasis, UncoupledSpace};
use crate::splines::KnotVector;

/// Discretization levels of the combined space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinedSpaceSpec {
    pub p: usize,
    pub r: isize,
    /// Spans per boundary piece and in the radial direction of the fine mesh.
    pub fine: usize,
    /// Spans per boundary piece of the coarse mesh.
    pub coarse_zeta: usize,
}

impl CombinedSpaceSpec {
    pub fn new(p: usize, r: isize, fine: usize) -> Self {
        CombinedSpaceSpec { p, r, fine, coarse_zeta: 1 }
    }

    /// Fine and coarse domains on the same geometry.
    pub fn discretize(&self, spec: &DomainSpec) -> Result<(MultiPatchDomain, MultiPatchDomain)> {
        if self.coarse_zeta == 0 || self.fine % self.coarse_zeta != 0 {
            return Err(Error::Spec(format!(
                "coarse level {} does not divide fine level {}",
                self.coarse_zeta, self.fine
            )));
        }
        let fine = spec.discretize(self.p, self.r, self.fine)?;
        let coarse = spec.discretize_levels(self.p, self.r, self.coarse_zeta, self.fine)?;
        Ok((fine, coarse))
    }
}

/// Radial indices kept from each mesh: coarse functions whose support meets
/// the first radial span and fine functions whose support avoids it.
pub fn radial_split(fine: &KnotVector, coarse: &KnotVector) -> Result<(std::ops::Range<usize>, std::ops::Range<usize>)> {
    if !fine.approx_eq(coarse, 0.0) {
        return Err(Error::Spec("fine and coarse radial knot vectors differ".into()));
    }
    let p = fine.degree();
    let n = fine.num_basis();
    let k = fine.knots();
    let first_end = fine.breakpoints()[1];
    let touches = |j: usize| k[j] < first_end && k[j + p + 1] > k[0];
    let coarse_end = (0..n).take_while(|&j| touches(j)).count();
    let fine_start = (0..n).position(|j| k[j] >= first_end).unwrap_or(n);
    if coarse_end != fine_start || (coarse_end..n).any(&touches) {
        return Err(Error::Spec("radial functions cannot be classified by support".into()));
    }
    Ok((0..coarse_end, fine_start..n))
}

/// Combined basis of one singular patch.
pub fn combined_patch_basis(fine: &SbPatch, coarse: &SbPatch) -> Result<PatchBasis> {
    check_compatible(fine, coarse)?;
    let (cj, fj) = radial_split(fine.radial(), coarse.radial())?;
    let coarse_part = BasisPart { space: coarse.space(), j_range: cj, offset: 0, net: coarse.control_net()? };
    let fine_part = BasisPart { space: fine.space(), j_range: fj, offset: 0, net: fine.control_net()? };
    let parts = [coarse_part, fine_part].into_iter().filter(|p| !p.is_empty()).collect();
    PatchBasis::from_parts(parts)
}

fn check_compatible(fine: &SbPatch, coarse: &SbPatch) -> Result<()> {
    if fine.degree() != coarse.degree() {
        return Err(Error::DegreeMismatch("fine and coarse patches differ in degree".into()));
    }
    if fine.center().dist(coarse.center()) > 0.0 || fine.c1() != coarse.c1() || fine.c2() != coarse.c2() {
        return Err(Error::Spec("fine and coarse patches have different scaling data".into()));
    }
    let fk = fine.boundary().knots();
    for (t, m) in coarse.boundary().knots().interior_breaks() {
        if fk.multiplicity(t) < m {
            return Err(Error::Spec(format!("coarse knot {t} is not contained in the fine mesh")));
        }
    }
    let scale = fine.boundary().points().iter().map(|x| x.dist(fine.center())).fold(1.0, f64::max);
    for k in 0..=16 {
        let t = k as f64 / 16.0;
        if fine.boundary().point(t).dist(coarse.boundary().point(t)) > 1e-10 * scale {
            return Err(Error::Spec("fine and coarse boundaries differ".into()));
        }
    }
    Ok(())
}

/// Uncoupled combined space: two-mesh bases on singular patches, the fine
/// basis elsewhere.
pub fn combined_space(fine: &MultiPatchDomain, coarse: &MultiPatchDomain) -> Result<UncoupledSpace> {
    if fine.patches.len() != coarse.patches.len() {
        return Err(Error::Spec("fine and coarse domains have different patch counts".into()));
    }
    let patches = fine
        .patches
        .iter()
        .zip(&coarse.patches)
        .map(|(f, c)| if f.is_singular() { combined_patch_basis(f, c) } else { PatchBasis::standard(f) })
        .collect::<Result<Vec<_>>>()?;
    Ok(UncoupledSpace::from_patches(patches))
}

/// Coupled combined space on the fine geometry.
pub fn build_combined_space(
    fine: &MultiPatchDomain,
    coarse: &MultiPatchDomain,
    opts: &CouplingOptions,
) -> Result<CoupledSpace> {
    let space = combined_space(fine, coarse)?;
    build_coupled_space_on(fine, space, opts)
}
