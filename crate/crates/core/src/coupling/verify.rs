//! Pointwise checks of built coupled spaces.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::jump::{interface_points, interface_support, uncoupled_jumps};
use super::CoupledSpace;
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::sbgeom::physical_derivs;

/// Largest normal-derivative jump of any coupled basis function on one
/// interface, relative to the function's gradient scale there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpResidual {
    pub interface: usize,
    pub max_relative: f64,
    /// Coupled function attaining the maximum.
    pub function: usize,
}

/// Equally spaced points inside each span, at least `samples` per interface.
fn sample_rule(samples: usize, spans: usize) -> GaussRule {
    let n = samples.div_ceil(spans.max(1)).max(1);
    GaussRule {
        points: (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect(),
        weights: vec![1.0 / n as f64; n],
    }
}

/// Normal-derivative jumps of every coupled basis function at `samples`
/// points per interface. A function's gradient scale on an interface is
/// raised to `1e-3` of its largest scale on any interface and to `1e-6` of
/// the largest scale of all functions on that interface.
pub fn c1_jump_residuals(cs: &CoupledSpace, samples: usize) -> Result<Vec<JumpResidual>> {
    let n6 = cs.n6();
    let mut per_interface = Vec::with_capacity(cs.domain.interfaces.len());
    for itf in &cs.domain.interfaces {
        let (zb, xb) = cs.space.patches[itf.left.0].breakpoints();
        let spans = if itf.is_radial() { xb.len() - 1 } else { zb.len() - 1 };
        let rule = sample_rule(samples, spans);
        let support = interface_support(&cs.space, itf);
        let mut jump = vec![0.0f64; n6];
        let mut scale = vec![0.0f64; n6];
        for pt in interface_points(&cs.domain, &cs.space, itf, &rule) {
            let j = cs.restrict_sparse(&uncoupled_jumps(&cs.domain, &cs.space, itf, &support, &pt)?);
            for (c, v) in j {
                jump[c] = jump[c].max(v.abs());
            }
            for ((patch, _), (z, s)) in [(itf.left, pt.left), (itf.right, pt.right)] {
                let e = cs.space.patches[patch].eval(z, s, 1)?;
                let phys = physical_derivs(&e.basis, &cs.domain.patches[patch].geometry(z, s))?;
                let off = cs.space.offsets[patch];
                let gx: Vec<(usize, f64)> = e.dofs.iter().zip(&phys.grad).map(|(&l, g)| (off + l, g[0])).collect();
                let gy: Vec<(usize, f64)> = e.dofs.iter().zip(&phys.grad).map(|(&l, g)| (off + l, g[1])).collect();
                let mut norms = vec![0.0f64; n6];
                for (c, v) in cs.restrict_sparse(&gx) {
                    norms[c] += v * v;
                }
                for (c, v) in cs.restrict_sparse(&gy) {
                    norms[c] += v * v;
                }
                for (s, n) in scale.iter_mut().zip(norms) {
                    *s = s.max(n.sqrt());
                }
            }
        }
        per_interface.push((jump, scale));
    }
    let mut global = vec![0.0f64; n6];
    for (_, scale) in &per_interface {
        for (g, &s) in global.iter_mut().zip(scale) {
            *g = g.max(s);
        }
    }
    let mut out = Vec::with_capacity(per_interface.len());
    for (k, (jump, scale)) in per_interface.into_iter().enumerate() {
        let floor = 1e-6 * scale.iter().copied().fold(0.0, f64::max);
        let mut worst = JumpResidual { interface: k, max_relative: 0.0, function: 0 };
        for c in 0..n6 {
            let rel = if jump[c] == 0.0 { 0.0 } else { jump[c] / scale[c].max(1e-3 * global[c]).max(floor) };
            if rel > worst.max_relative || rel.is_nan() {
                worst = JumpResidual { interface: k, max_relative: rel, function: c };
            }
        }
        out.push(worst);
    }
    Ok(out)
}

/// Coupled coefficients of `a + b x + c y` and the largest deviation of
/// their uncoupled expansion from the exact one, relative to the largest
/// exact coefficient.
pub fn reproduce_affine(cs: &CoupledSpace, a: f64, b: f64, c: f64) -> Result<(Vec<f64>, f64)> {
    let target = cs.space.affine_coefficients(a, b, c);
    let m0 = &cs.m0.matrix;
    let n4 = m0.ncols();
    let gram = m0.transpose().matmul(m0);
    let llt = gram
        .to_faer_lower()?
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("M0 Gram factorization failed: {e:?}")))?;
    let rhs = m0.tmul_vec(&target);
    let t4 = llt.solve(&Mat::from_fn(n4, 1, |i, _| rhs[i]));
    let t4: Vec<f64> = (0..n4).map(|i| t4[(i, 0)]).collect();
    let coeffs = cs.m1.apply_t(&t4);
    let back = cs.to_uncoupled(&coeffs);
    let scale = target.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let err = back.iter().zip(&target).fold(0.0f64, |m, (x, t)| m.max((x - t).abs()));
    Ok((coeffs, err / scale))
}
