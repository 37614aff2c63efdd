//! Kirchhoff plate bending on coupled spaces.
//!
//! Bilinear form `a(u, v) = int D [(1 - nu) grad grad v : grad grad u + nu lap v lap u]`
//! and load `F(v) = int g v + int_G M dv/dn + int_G Q v` plus point loads.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::coupling::CoupledSpace;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quadrature::GaussRule;
use crate::sbgeom::{physical_derivs, Edge, GeomEval};
use crate::sparse::CsrMatrix;

/// Isotropic plate material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub e: f64,
    pub nu: f64,
    pub t: f64,
    d: f64,
}

impl Material {
    /// `D = E t^3 / (12 (1 - nu^2))`.
    pub fn from_thickness(e: f64, nu: f64, t: f64) -> Result<Self> {
        Self::check(e, nu)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Config(format!("thickness must be positive, got {t}")));
        }
        Ok(Material { e, nu, t, d: e * t.powi(3) / (12.0 * (1.0 - nu * nu)) })
    }

    /// Material with a prescribed bending stiffness; the thickness is the
    /// one consistent with `E` and `nu`.
    pub fn from_rigidity(e: f64, nu: f64, d: f64) -> Result<Self> {
        Self::check(e, nu)?;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Config(format!("bending stiffness must be positive, got {d}")));
        }
        let t = (12.0 * (1.0 - nu * nu) * d / e).cbrt();
        Ok(Material { e, nu, t, d })
    }

    fn check(e: f64, nu: f64) -> Result<()> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Config(format!("Young's modulus must be positive, got {e}")));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(Error::Config(format!("Poisson ratio must lie in (-1, 0.5), got {nu}")));
        }
        Ok(())
    }

    /// Bending stiffness `D`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// `[m11, m22, m12]` from a Hessian `[xx, xy, yy]`.
    pub fn bending_moments(&self, h: [f64; 3]) -> [f64; 3] {
        let d = self.d;
        [d * (h[0] + self.nu * h[2]), d * (h[2] + self.nu * h[0]), d * (1.0 - self.nu) * h[1]]
    }
}

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

/// Distributed transverse load `g`.
#[derive(Clone, Default)]
pub enum SurfaceLoad {
    #[default]
    None,
    Constant(f64),
    Function(ScalarFn),
}

impl std::fmt::Debug for SurfaceLoad {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SurfaceLoad::None => write!(f, "None"),
            SurfaceLoad::Constant(c) => write!(f, "Constant({c})"),
            SurfaceLoad::Function(_) => write!(f, "Function"),
        }
    }
}

impl SurfaceLoad {
    fn at(&self, x: Vec2) -> f64 {
        match self {
            SurfaceLoad::None => 0.0,
            SurfaceLoad::Constant(c) => *c,
            SurfaceLoad::Function(g) => g(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLoad {
    pub at: Vec2,
    pub magnitude: f64,
}

/// Loads; edge loads are taken from the boundary segments of the domain.
#[derive(Debug, Clone, Default)]
pub struct LoadSpec {
    pub surface: SurfaceLoad,
    pub points: Vec<PointLoad>,
}

/// How `M0^T A~ M0` is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AssemblyMode {
    /// `A~` over the uncoupled functions, then the sparse products.
    #[default]
    Uncoupled,
    /// Hessians of the columns of `M0` formed at each quadrature point.
    Continuous,
}

/// Gauss points per direction and element (`p + 1` when `None`) and the
/// assembly mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct AssemblyOptions {
    pub quad_points: Option<usize>,
    pub mode: AssemblyMode,
}

impl AssemblyOptions {
    pub fn with_quad_points(points: usize) -> Self {
        AssemblyOptions { quad_points: Some(points), ..Default::default() }
    }

    fn rule(&self, p: usize) -> GaussRule {
        GaussRule::new(self.quad_points.unwrap_or(p + 1))
    }
}

/// Element `[z0, z1] x [s0, s1]` of a patch.
#[derive(Debug, Clone, Copy)]
struct Element {
    patch: usize,
    z: (f64, f64),
    s: (f64, f64),
}

fn elements(cs: &CoupledSpace) -> Vec<Element> {
    let mut out = Vec::new();
    for (k, pb) in cs.space.patches.iter().enumerate() {
        let (zb, sb) = pb.breakpoints();
        for zw in zb.windows(2) {
            for sw in sb.windows(2) {
                out.push(Element { patch: k, z: (zw[0], zw[1]), s: (sw[0], sw[1]) });
            }
        }
    }
    out
}

/// Quadrature point data shared by assembly routines.
struct QuadPoint {
    dofs: Vec<usize>,
    value: Vec<f64>,
    hess: Vec<[f64; 3]>,
    geo: GeomEval,
    weight: f64,
}

fn element_points(cs: &CoupledSpace, el: &Element, rule: &GaussRule, order: usize) -> Result<Vec<QuadPoint>> {
    let pb = &cs.space.patches[el.patch];
    let patch = &cs.domain.patches[el.patch];
    let off = cs.space.offsets[el.patch];
    let mut out = Vec::with_capacity(rule.len() * rule.len());
    for (z, wz) in rule.mapped(el.z.0, el.z.1) {
        for (s, ws) in rule.mapped(el.s.0, el.s.1) {
            let e = pb.eval(z, s, order)?;
            let geo = patch.geometry(z, s);
            let hess = if order >= 2 { physical_derivs(&e.basis, &geo)?.hess } else { Vec::new() };
            out.push(QuadPoint {
                dofs: e.dofs.iter().map(|&l| l + off).collect(),
                value: e.basis.value,
                hess,
                weight: wz * ws * geo.det.abs(),
                geo,
            });
        }
    }
    Ok(out)
}

/// Uncoupled stiffness matrix `A~`.
pub fn assemble_stiffness(cs: &CoupledSpace, mat: &Material, quad: &AssemblyOptions) -> Result<CsrMatrix> {
    assemble_with(cs, mat, quad, None)
}

/// `M0^T A~ M0`, with the Hessians of the columns of `M0` formed at every
/// quadrature point before the products are integrated.
pub fn assemble_stiffness_m0(cs: &CoupledSpace, mat: &Material, quad: &AssemblyOptions) -> Result<CsrMatrix> {
    assemble_with(cs, mat, quad, Some(&cs.m0.matrix))
}

fn assemble_with(cs: &CoupledSpace, mat: &Material, quad: &AssemblyOptions, m0: Option<&CsrMatrix>) -> Result<CsrMatrix> {
    let rule = quad.rule(cs.domain.degree());
    let (d, nu) = (mat.d(), mat.nu);
    let parts: Vec<Vec<(usize, usize, f64)>> = elements(cs)
        .par_iter()
        .map(|el| -> Result<Vec<(usize, usize, f64)>> {
            let pts = element_points(cs, el, &rule, 2)?;
            let dofs = pts[0].dofs.clone();
            let (cols, t) = local_transform(&dofs, m0);
            let n = cols.len();
            let mut k = vec![0.0; n * n];
            let mut h = vec![[0.0; 3]; n];
            for qp in &pts {
                if qp.dofs != dofs {
                    return Err(Error::Assembly("active functions vary inside an element".into()));
                }
                match &t {
                    None => h.copy_from_slice(&qp.hess),
                    Some(t) => {
                        h.iter_mut().for_each(|x| *x = [0.0; 3]);
                        for &(a, c, v) in t {
                            for m in 0..3 {
                                h[c][m] += v * qp.hess[a][m];
                            }
                        }
                    }
                }
                let w = qp.weight * d;
                for a in 0..n {
                    let ha = h[a];
                    let la = ha[0] + ha[2];
                    for b in a..n {
                        let hb = h[b];
                        let lb = hb[0] + hb[2];
                        let frob = ha[0] * hb[0] + 2.0 * ha[1] * hb[1] + ha[2] * hb[2];
                        k[a * n + b] += w * ((1.0 - nu) * frob + nu * la * lb);
                    }
                }
            }
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let v = if b >= a { k[a * n + b] } else { k[b * n + a] };
                    out.push((cols[a], cols[b], v));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let n = m0.map_or(cs.n(), |m| m.ncols());
    Ok(CsrMatrix::from_triplets(n, n, parts.into_iter().flatten().collect()))
}

/// Columns seen by an element and the entries `(local dof, local column,
/// value)` mapping element functions to them.
#[allow(clippy::type_complexity)]
fn local_transform(dofs: &[usize], m0: Option<&CsrMatrix>) -> (Vec<usize>, Option<Vec<(usize, usize, f64)>>) {
    let Some(m0) = m0 else {
        return (dofs.to_vec(), None);
    };
    let mut cols: Vec<usize> = dofs.iter().flat_map(|&g| m0.row(g).0.iter().copied()).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut t = Vec::new();
    for (a, &g) in dofs.iter().enumerate() {
        let (idx, val) = m0.row(g);
        for (&c, &v) in idx.iter().zip(val) {
            t.push((a, cols.binary_search(&c).unwrap(), v));
        }
    }
    (cols, Some(t))
}

/// Uncoupled load vector: surface, edge and point loads.
pub fn assemble_load(cs: &CoupledSpace, load: &LoadSpec, quad: &AssemblyOptions) -> Result<Vec<f64>> {
    let p = cs.domain.degree();
    let rule = quad.rule(p);
    let n = cs.n();
    let mut f = vec![0.0; n];
    if !matches!(load.surface, SurfaceLoad::None) {
        let parts: Vec<Vec<(usize, f64)>> = elements(cs)
            .par_iter()
            .map(|el| -> Result<Vec<(usize, f64)>> {
                let mut out = Vec::new();
                for qp in element_points(cs, el, &rule, 0)? {
                    let g = load.surface.at(qp.geo.x) * qp.weight;
                    out.extend(qp.dofs.iter().zip(&qp.value).map(|(&i, &v)| (i, g * v)));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (i, v) in parts.into_iter().flatten() {
            f[i] += v;
        }
    }
    for b in &cs.domain.boundaries {
        if b.line_load == 0.0 && b.moment == 0.0 {
            continue;
        }
        for (i, v) in edge_load(cs, b.patch, b.edge, b.line_load, b.moment, &rule)? {
            f[i] += v;
        }
    }
    for pl in &load.points {
        for (i, v) in point_values(cs, pl.at)? {
            f[i] += pl.magnitude * v;
        }
    }
    Ok(f)
}

fn edge_load(
    cs: &CoupledSpace,
    patch: usize,
    edge: Edge,
    q: f64,
    m: f64,
    rule: &GaussRule,
) -> Result<Vec<(usize, f64)>> {
    let pb = &cs.space.patches[patch];
    let geo_patch = &cs.domain.patches[patch];
    let off = cs.space.offsets[patch];
    let (zb, sb) = pb.breakpoints();
    let along_zeta = matches!(edge, Edge::XiMin | Edge::XiMax);
    let breaks = if along_zeta { zb } else { sb };
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        for (t, wq) in rule.mapped(w[0], w[1]) {
            let (z, s) = match edge {
                Edge::XiMax => (t, 1.0),
                Edge::XiMin => (t, 0.0),
                Edge::ZetaMin => (0.0, t),
                Edge::ZetaMax => (1.0, t),
            };
            let geo = geo_patch.geometry(z, s);
            let (tangent, inward) = if along_zeta { (geo.d_zeta, geo.d_xi) } else { (geo.d_xi, geo.d_zeta) };
            let outward_sign = match edge {
                Edge::XiMax | Edge::ZetaMax => 1.0,
                Edge::XiMin | Edge::ZetaMin => -1.0,
            };
            let mut n = tangent.perp().normalized();
            if n.dot(inward) * outward_sign < 0.0 {
                n = -n;
            }
            let ds = wq * tangent.norm();
            let e = pb.eval(z, s, 1)?;
            let grads = if m != 0.0 { physical_derivs(&e.basis, &geo)?.grad } else { Vec::new() };
            for (k, &l) in e.dofs.iter().enumerate() {
                let mut v = q * e.basis.value[k];
                if m != 0.0 {
                    v += m * (grads[k][0] * n.x + grads[k][1] * n.y);
                }
                out.push((off + l, v * ds));
            }
        }
    }
    Ok(out)
}

/// Values of the uncoupled functions at a physical point.
pub fn point_values(cs: &CoupledSpace, x: Vec2) -> Result<Vec<(usize, f64)>> {
    let (k, z, s) = cs
        .domain
        .locate(x)
        .ok_or_else(|| Error::Load(format!("point ({}, {}) lies outside the domain", x.x, x.y)))?;
    let e = cs.space.patches[k].eval(z, s, 0)?;
    let off = cs.space.offsets[k];
    Ok(e.dofs.iter().zip(&e.basis.value).map(|(&l, &v)| (off + l, v)).collect())
}

/// Coupled linear system.
#[derive(Debug, Clone)]
pub struct PlateSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// `A = M1^T M0^T A~ M0 M1` and `f = M1^T M0^T f~`.
pub fn build_system(cs: &CoupledSpace, mat: &Material, load: &LoadSpec, quad: &AssemblyOptions) -> Result<PlateSystem> {
    let ahat = match quad.mode {
        AssemblyMode::Uncoupled => {
            let m0 = &cs.m0.matrix;
            m0.transpose().matmul(&assemble_stiffness(cs, mat, quad)?.matmul(m0))
        }
        AssemblyMode::Continuous => assemble_stiffness_m0(cs, mat, quad)?,
    };
    let f = assemble_load(cs, load, quad)?;
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Load("load vector is not finite".into()));
    }
    let matrix = cs.project_reduced(&ahat)?;
    let rhs = cs.restrict(&f);
    if rhs.iter().all(|&v| v == 0.0) {
        return Err(Error::Load("load vanishes on the coupled space".into()));
    }
    Ok(PlateSystem { matrix, rhs })
}

/// Coupled coefficients with solver diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coeffs: Vec<f64>,
    /// `|A c - f| / |f|`.
    pub residual: f64,
    /// Estimate of the spectral condition number of `A`.
    pub cond_estimate: f64,
}

/// Sparse Cholesky solve with iterative refinement on compensated residuals.
pub fn solve(sys: &PlateSystem) -> Result<Solution> {
    let n = sys.rhs.len();
    let a = sys.matrix.to_faer_lower()?;
    let llt = a
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e:?}")))?;
    let solve_vec = |b: &[f64]| -> Vec<f64> {
        let rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        let x = llt.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let mut x = solve_vec(&sys.rhs);
    let fnorm = norm(&sys.rhs);
    let mut best = (x.clone(), f64::INFINITY);
    for step in 0..4 {
        let r = sys.matrix.residual_compensated(&sys.rhs, &x);
        let rel = norm(&r) / fnorm;
        if !(rel < 0.5 * best.1) {
            if rel < best.1 {
                best = (x, rel);
            }
            break;
        }
        best = (x.clone(), rel);
        if step == 3 || rel < 1e-15 {
            break;
        }
        let dx = solve_vec(&r);
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
    }
    let (x, residual) = best;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("solution is not finite".into()));
    }
    let cond_estimate = condition_estimate(&sys.matrix, &solve_vec);
    Ok(Solution { coeffs: x, residual, cond_estimate })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `lambda_max / lambda_min` from power and inverse iterations.
fn condition_estimate(a: &CsrMatrix, inv: &dyn Fn(&[f64]) -> Vec<f64>) -> f64 {
    let n = a.nrows();
    let start: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
    let iterate = |f: &dyn Fn(&[f64]) -> Vec<f64>| {
        let mut v = start.clone();
        let mut lam = 0.0;
        for _ in 0..40 {
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let w = f(&v);
            lam = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            v = w;
        }
        lam
    };
    let lmax = iterate(&|v: &[f64]| a.mul_vec(v));
    let inv_lmin = iterate(inv);
    lmax * inv_lmin
}

/// Solution field in uncoupled coefficients.
#[derive(Debug, Clone)]
pub struct Field<'a> {
    pub space: &'a CoupledSpace,
    pub coeffs: Vec<f64>,
}

/// Value, physical gradient and Hessian `[xx, xy, yy]` of a field.
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldValue {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl<'a> Field<'a> {
    pub fn from_coupled(space: &'a CoupledSpace, c: &[f64]) -> Self {
        Field { space, coeffs: space.to_uncoupled(c) }
    }

    /// Evaluation at a parametric point; derivatives are unavailable on a
    /// collapsed edge.
    pub fn eval(&self, patch: usize, z: f64, s: f64, order: usize) -> Result<FieldValue> {
        let pb = &self.space.space.patches[patch];
        let off = self.space.space.offsets[patch];
        let e = pb.eval(z, s, order)?;
        let mut out = FieldValue::default();
        for (k, &l) in e.dofs.iter().enumerate() {
            out.value += self.coeffs[off + l] * e.basis.value[k];
        }
        if order >= 1 {
            let geo = self.space.domain.patches[patch].geometry(z, s);
            let phys = physical_derivs(&e.basis, &geo)?;
            for (k, &l) in e.dofs.iter().enumerate() {
                let c = self.coeffs[off + l];
                out.grad[0] += c * phys.grad[k][0];
                out.grad[1] += c * phys.grad[k][1];
                if order >= 2 {
                    for a in 0..3 {
                        out.hess[a] += c * phys.hess[k][a];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Value at a physical point.
    pub fn value_at(&self, x: Vec2) -> Result<f64> {
        let (k, z, s) = self
            .space
            .domain
            .locate(x)
            .ok_or_else(|| Error::InvalidIndex(format!("point ({}, {}) lies outside the domain", x.x, x.y)))?;
        Ok(self.eval(k, z, s, 0)?.value)
    }
}

/// Closed-form solution used to measure errors.
pub trait ExactSolution: Sync {
    fn value(&self, x: Vec2) -> f64;
    fn grad(&self, x: Vec2) -> [f64; 2];
    /// `[xx, xy, yy]`.
    fn hess(&self, x: Vec2) -> [f64; 3];
    fn bilaplacian(&self, x: Vec2) -> f64;
}

/// `u = cos^2(pi x) cos^2(pi y)`, clamped on the square `[-1/2, 1/2]^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cos2Square;

impl ExactSolution for Cos2Square {
    fn value(&self, x: Vec2) -> f64 {
        ((PI * x.x).cos() * (PI * x.y).cos()).powi(2)
    }

    fn grad(&self, x: Vec2) -> [f64; 2] {
        let (a, b) = ((2.0 * PI * x.x).cos(), (2.0 * PI * x.y).cos());
        [-0.5 * PI * (2.0 * PI * x.x).sin() * (1.0 + b), -0.5 * PI * (2.0 * PI * x.y).sin() * (1.0 + a)]
    }

    fn hess(&self, x: Vec2) -> [f64; 3] {
        let (a, b) = ((2.0 * PI * x.x).cos(), (2.0 * PI * x.y).cos());
        let (sa, sb) = ((2.0 * PI * x.x).sin(), (2.0 * PI * x.y).sin());
        let p2 = PI * PI;
        [-p2 * a * (1.0 + b), p2 * sa * sb, -p2 * b * (1.0 + a)]
    }

    fn bilaplacian(&self, x: Vec2) -> f64 {
        let (a, b) = ((2.0 * PI * x.x).cos(), (2.0 * PI * x.y).cos());
        4.0 * PI.powi(4) * (a + b + 4.0 * a * b)
    }
}

/// Load `g = D lap^2 u` for a manufactured solution.
pub fn manufactured_rhs(exact: Arc<dyn ExactSolution + Send>, d: f64) -> SurfaceLoad {
    SurfaceLoad::Function(Arc::new(move |x| d * exact.bilaplacian(x)))
}

/// `L2` norm of the error and `H2` seminorm (Frobenius norm of the Hessian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h2_semi: f64,
}

pub fn error_norms(field: &Field<'_>, exact: &dyn ExactSolution, quad: &AssemblyOptions) -> Result<ErrorNorms> {
    let cs = field.space;
    let p = cs.domain.degree();
    let rule = GaussRule::new(quad.quad_points.unwrap_or(p + 1).max(p + 3));
    let sums: Vec<(f64, f64)> = elements(cs)
        .par_iter()
        .map(|el| -> Result<(f64, f64)> {
            let (mut l2, mut h2) = (0.0, 0.0);
            for (z, wz) in rule.mapped(el.z.0, el.z.1) {
                for (s, ws) in rule.mapped(el.s.0, el.s.1) {
                    let geo = cs.domain.patches[el.patch].geometry(z, s);
                    let w = wz * ws * geo.det.abs();
                    let v = field.eval(el.patch, z, s, 2)?;
                    let e0 = v.value - exact.value(geo.x);
                    let h = exact.hess(geo.x);
                    let d = [v.hess[0] - h[0], v.hess[1] - h[1], v.hess[2] - h[2]];
                    l2 += w * e0 * e0;
                    h2 += w * (d[0] * d[0] + 2.0 * d[1] * d[1] + d[2] * d[2]);
                }
            }
            Ok((l2, h2))
        })
        .collect::<Result<_>>()?;
    let (l2, h2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ErrorNorms { l2: l2.sqrt(), h2_semi: h2.sqrt() })
}

/// Center deflection of a simply supported square plate of side `l` under a
/// central point load `f`: `4 f l^2 / (D pi^4) sum 1 / (m^2 + n^2)^2` over
/// odd `m, n`, with `terms` odd indices per direction.
pub fn point_load_reference(f: f64, l: f64, d: f64, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::Config("at least one series term is required".into()));
    }
    if !(d > 0.0) || !(l > 0.0) {
        return Err(Error::Config("plate size and stiffness must be positive".into()));
    }
    let mut sum = 0.0;
    for a in 0..terms {
        let m2 = ((2 * a + 1) * (2 * a + 1)) as f64;
        let mut row = 0.0;
        for b in (0..terms).rev() {
            let n2 = ((2 * b + 1) * (2 * b + 1)) as f64;
            let s = m2 + n2;
            row += 1.0 / (s * s);
        }
        sum += row;
    }
    Ok(4.0 * f * l * l / (d * PI.powi(4)) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigidity_formula() {
        let m = Material::from_thickness(1e7, 0.3, 0.02).unwrap();
        assert!((m.d() - 1e7 * 8e-6 / (12.0 * 0.91)).abs() < 1e-12);
        let m = Material::from_rigidity(1e4, 0.0, 1.0).unwrap();
        assert_eq!(m.d(), 1.0);
        assert!((m.t - (12.0f64 / 1e4).cbrt()).abs() < 1e-15);
        assert!(Material::from_thickness(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn cos2_derivatives_match_finite_differences() {
        let u = Cos2Square;
        let x = Vec2::new(0.137, -0.291);
        let h = 1e-3;
        let f = |dx: f64, dy: f64| u.value(Vec2::new(x.x + dx, x.y + dy));
        let gx = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
        assert!((gx - u.grad(x)[0]).abs() < 1e-5);
        assert!((hxy - u.hess(x)[1]).abs() < 1e-4);
        let lap = |p: Vec2| {
            let hh = u.hess(p);
            hh[0] + hh[2]
        };
        let h = 1e-3;
        let fd = (lap(Vec2::new(x.x + h, x.y)) + lap(Vec2::new(x.x - h, x.y)) + lap(Vec2::new(x.x, x.y + h))
            + lap(Vec2::new(x.x, x.y - h))
            - 4.0 * lap(x))
            / (h * h);
        assert!((fd - u.bilaplacian(x)).abs() < 1e-3 * u.bilaplacian(x).abs().max(1.0));
        assert!((u.bilaplacian(Vec2::ZERO) - 24.0 * PI.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn point_load_series() {
        let one = point_load_reference(1.0, 1.0, 1.0, 1).unwrap();
        assert!((one - 4.0 / (PI.powi(4) * 4.0)).abs() < 1e-15);
        let many = point_load_reference(1.0, 1.0, 1.0, 2000).unwrap();
        assert!((many - 0.01160).abs() < 5e-6);
        assert!(point_load_reference(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn moments_follow_hessian() {
        let m = Material::from_rigidity(1.0, 0.3, 2.0).unwrap();
        let mm = m.bending_moments([1.0, 0.5, -2.0]);
        assert!((mm[0] - 2.0 * (1.0 - 0.6)).abs() < 1e-15);
        assert!((mm[1] - 2.0 * (-2.0 + 0.3)).abs() < 1e-15);
        assert!((mm[2] - 2.0 * 0.7 * 0.5).abs() < 1e-15);
    }
}
