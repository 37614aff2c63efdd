//! Analysis-suitable G1 gluing data of interfaces.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sbgeom::{Interface, MultiPatchDomain, SbPatch};
use faer::{Mat, Side};

/// Gluing data `alpha_R d_t F^L - alpha_L d_t F^R + beta d_s F^R = 0` with
/// constant `alpha` and `beta(s) = beta[0] + beta[1] s`, where `t` is the
/// transversal and `s` the interface parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G1Coefficients {
    pub alpha_l: f64,
    pub alpha_r: f64,
    pub beta: [f64; 2],
}

impl G1Coefficients {
    pub fn beta_at(&self, s: f64) -> f64 {
        self.beta[0] + self.beta[1] * s
    }

    /// `beta_L = -beta / (2 alpha_R)`.
    pub fn beta_l(&self, s: f64) -> f64 {
        -self.beta_at(s) / (2.0 * self.alpha_r)
    }

    /// `beta_R = beta / (2 alpha_L)`.
    pub fn beta_r(&self, s: f64) -> f64 {
        self.beta_at(s) / (2.0 * self.alpha_l)
    }
}

/// Gluing data of two patches of one center meeting at `zeta = 1` of `left`
/// and `zeta = 0` of `right`.
pub fn asg1_coefficients(left: &SbPatch, right: &SbPatch) -> Result<G1Coefficients> {
    if left.center() != right.center() || left.c1() != right.c1() || left.c2() != right.c2() {
        return Err(Error::NotApplicable("patches do not share a scaling center".into()));
    }
    let gl = left.boundary().eval(1.0);
    let gr = right.boundary().eval(0.0);
    let scale = gl.pos.dist(left.center()).max(gl.d1.norm());
    if gl.pos.dist(gr.pos) > 1e-12 * scale.max(1.0) {
        return Err(Error::Topology("boundary curves do not meet at the interface".into()));
    }
    let (tl, tr) = (gl.d1, gr.d1);
    let r = gl.pos - left.center();
    let det = tl.cross(tr);
    let (alpha_r, alpha_l, beta) = if det.abs() <= 1e-12 * tl.norm() * tr.norm() {
        let c = tr.dot(tl) / tl.dot(tl);
        if c <= 0.0 {
            return Err(Error::InvalidGeometry("boundary reverses direction at an interface".into()));
        }
        (c, 1.0, [0.0, 0.0])
    } else {
        // d1 tl + d2 tr = r
        let d1 = r.cross(tr) / det;
        let d2 = tl.cross(r) / det;
        if d1 * d2 >= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "interface gluing data has alpha_L alpha_R <= 0 (d1 = {d1}, d2 = {d2})"
            )));
        }
        (d1, -d2, [-left.c2() / left.c1(), -1.0])
    };
    Ok(G1Coefficients { alpha_l, alpha_r, beta })
}

/// Transversal derivatives of both sides and the interface derivative of the
/// right side at interface parameter `s`.
pub fn interface_frames(domain: &MultiPatchDomain, itf: &Interface, s: f64) -> (Vec2, Vec2, Vec2) {
    let pl = &domain.patches[itf.left.0];
    let pr = &domain.patches[itf.right.0];
    if itf.is_radial() {
        let gl = pl.geometry(1.0, s);
        let gr = pr.geometry(0.0, s);
        (gl.d_zeta, gr.d_zeta, gr.d_xi)
    } else {
        let gl = pl.geometry(s, 1.0);
        let gr = pr.geometry(1.0 - s, 1.0);
        (gl.d_xi, -gr.d_xi, -gr.d_zeta)
    }
}

/// Gluing data of any interface: the closed form for radial interfaces, a
/// least-squares fit on sampled frames otherwise.
pub fn interface_coefficients(domain: &MultiPatchDomain, itf: &Interface) -> Result<G1Coefficients> {
    if itf.is_radial() {
        return asg1_coefficients(&domain.patches[itf.left.0], &domain.patches[itf.right.0]);
    }
    let m = 16;
    let mut a = Mat::<f64>::zeros(2 * m, 4);
    for k in 0..m {
        let s = (k as f64 + 0.5) / m as f64;
        let (tl, tr, ar) = interface_frames(domain, itf, s);
        for (row, (l, r, b)) in [(tl.x, tr.x, ar.x), (tl.y, tr.y, ar.y)].into_iter().enumerate() {
            let i = 2 * k + row;
            a[(i, 0)] = l;
            a[(i, 1)] = -r;
            a[(i, 2)] = b;
            a[(i, 3)] = b * s;
        }
    }
    let ata = a.transpose() * &a;
    let eig = ata
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidGeometry(format!("gluing data fit failed: {e:?}")))?;
    let u = eig.U();
    let mut x = [u[(0, 0)], u[(1, 0)], u[(2, 0)], u[(3, 0)]];
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    if x[0] * x[1] <= 0.0 {
        return Err(Error::InvalidGeometry("interface gluing data has alpha_L alpha_R <= 0".into()));
    }
    Ok(G1Coefficients { alpha_r: x[0], alpha_l: x[1], beta: [x[2], x[3]] })
}

/// Largest relative residual of the gluing identity over `samples` interior
/// points of the interface.
pub fn verify_asg1(domain: &MultiPatchDomain, itf: &Interface, samples: usize) -> Result<f64> {
    let g = interface_coefficients(domain, itf)?;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let s = (k as f64 + 0.5) / samples as f64;
        let (tl, tr, ar) = interface_frames(domain, itf, s);
        let a = tl * g.alpha_r;
        let b = tr * g.alpha_l;
        let c = ar * g.beta_at(s);
        let res = (a - b + c).norm();
        let scale = a.norm().max(b.norm()).max(c.norm());
        worst = worst.max(res / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::NurbsCurve;

    fn patch(a: Vec2, b: Vec2, x0: Vec2) -> SbPatch {
        SbPatch::with_bezier_radial(NurbsCurve::line(a, b, 3).unwrap(), x0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn square_corner_coefficients() {
        let l = patch(Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0), Vec2::ZERO);
        let r = patch(Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0), Vec2::ZERO);
        let g = asg1_coefficients(&l, &r).unwrap();
        assert!((g.alpha_r - 0.5).abs() < 1e-15);
        assert!((g.alpha_l - 0.5).abs() < 1e-15);
        assert_eq!(g.beta, [0.0, -1.0]);
        assert!((g.alpha_l * g.beta_r(0.3) - g.alpha_r * g.beta_l(0.3) - g.beta_at(0.3)).abs() < 1e-15);
    }

    #[test]
    fn collinear_boundary_uses_parallel_branch() {
        let l = patch(Vec2::new(-1.0, -1.0), Vec2::new(0.0, -1.0), Vec2::ZERO);
        let r = patch(Vec2::new(0.0, -1.0), Vec2::new(2.0, -1.0), Vec2::ZERO);
        let g = asg1_coefficients(&l, &r).unwrap();
        assert_eq!((g.alpha_r, g.alpha_l, g.beta), (2.0, 1.0, [0.0, 0.0]));
    }
}
