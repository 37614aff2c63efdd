//! Scaled-boundary patches and multi-patch domains.
//!
//! A patch is the image of `[0,1]^2` under
//! `F(zeta, xi) = q(xi) (gamma(zeta) - x0) + x0` with `q(xi) = c1 xi + c2`,
//! where `gamma` is a boundary curve traversed counterclockwise around the
//! scaling center `x0`. With `c2 = 0` the edge `xi = 0` collapses to `x0`.

use crate::curve::NurbsCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::splines::{BasisEval, KnotVector, TensorSplineSpace};

/// Scaled-boundary patch.
#[derive(Debug, Clone, PartialEq)]
pub struct SbPatch {
    boundary: NurbsCurve,
    center: Vec2,
    c1: f64,
    c2: f64,
    radial: KnotVector,
}

/// Geometry map and its derivatives at one parametric point.
#[derive(Debug, Clone, Copy)]
pub struct GeomEval {
    pub x: Vec2,
    /// Columns `dF/dzeta` and `dF/dxi`.
    pub d_zeta: Vec2,
    pub d_xi: Vec2,
    /// Second derivatives `[zeta-zeta, zeta-xi, xi-xi]`.
    pub dd: [Vec2; 3],
    /// Signed Jacobian determinant `det[dF/dzeta, dF/dxi]`; negative on
    /// counterclockwise patches.
    pub det: f64,
}

/// Physical first and second derivatives of basis functions.
#[derive(Debug, Clone, Default)]
pub struct PhysicalBasis {
    /// `[d/dx, d/dy]`.
    pub grad: Vec<[f64; 2]>,
    /// `[xx, xy, yy]`.
    pub hess: Vec<[f64; 3]>,
}

impl SbPatch {
    pub fn new(boundary: NurbsCurve, center: Vec2, c1: f64, c2: f64, radial: KnotVector) -> Result<Self> {
        if !(c1 > 0.0) || !(c2 >= 0.0) || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidGeometry(format!("scaling parameters c1 = {c1}, c2 = {c2}")));
        }
        if radial.degree() != boundary.degree() {
            return Err(Error::DegreeMismatch(format!(
                "boundary degree {} and radial degree {}",
                boundary.degree(),
                radial.degree()
            )));
        }
        if radial.start() != 0.0 || radial.end() != 1.0 {
            return Err(Error::InvalidKnots("radial knot vector must span [0, 1]".into()));
        }
        Ok(SbPatch { boundary, center, c1, c2, radial })
    }

    /// Patch with a single radial span.
    pub fn with_bezier_radial(boundary: NurbsCurve, center: Vec2, c1: f64, c2: f64) -> Result<Self> {
        let p = boundary.degree();
        let radial = KnotVector::open_uniform(p, 1, p as isize - 1)?;
        SbPatch::new(boundary, center, c1, c2, radial)
    }

    pub fn degree(&self) -> usize {
        self.boundary.degree()
    }

    pub fn boundary(&self) -> &NurbsCurve {
        &self.boundary
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn radial(&self) -> &KnotVector {
        &self.radial
    }

    /// Whether the edge `xi = 0` collapses to the scaling center.
    pub fn is_singular(&self) -> bool {
        self.c2 == 0.0
    }

    pub fn q(&self, xi: f64) -> f64 {
        self.c1 * xi + self.c2
    }

    pub fn map(&self, zeta: f64, xi: f64) -> Vec2 {
        (self.boundary.point(zeta) - self.center) * self.q(xi) + self.center
    }

    /// Spline space of the patch; its weights are those of the boundary curve.
    pub fn space(&self) -> TensorSplineSpace {
        let w = if self.boundary.is_rational() { Some(self.boundary.weights().to_vec()) } else { None };
        TensorSplineSpace {
            zeta: self.boundary.knots().clone(),
            xi: self.radial.clone(),
            weights: w,
        }
    }

    pub fn n1(&self) -> usize {
        self.boundary.points().len()
    }

    pub fn n2(&self) -> usize {
        self.radial.num_basis()
    }

    /// Control net `C_ij = q(g_j) (C_i - x0) + x0` with Greville abscissae
    /// `g_j`, stored row-major as `[i * n2 + j]`.
    pub fn control_net(&self) -> Result<Vec<Vec2>> {
        if self.radial.degree() == 0 {
            return Err(Error::NetConstructionFailed("radial degree must be at least one".into()));
        }
        let g = self.radial.greville();
        let mut net = Vec::with_capacity(self.n1() * g.len());
        for &c in self.boundary.points() {
            for &gj in &g {
                net.push((c - self.center) * self.q(gj) + self.center);
            }
        }
        Ok(net)
    }

    /// Map, Jacobian and second derivatives at `(zeta, xi)`.
    pub fn geometry(&self, zeta: f64, xi: f64) -> GeomEval {
        let g = self.boundary.eval(zeta);
        let q = self.q(xi);
        let r = g.pos - self.center;
        let d_zeta = g.d1 * q;
        let d_xi = r * self.c1;
        GeomEval {
            x: r * q + self.center,
            d_zeta,
            d_xi,
            dd: [g.d2 * q, g.d1 * self.c1, Vec2::ZERO],
            det: d_zeta.cross(d_xi),
        }
    }

    /// `(gamma(zeta) - x0) x gamma'(zeta)`, positive for a valid patch.
    pub fn star_function(&self, zeta: f64) -> f64 {
        let g = self.boundary.eval(zeta);
        (g.pos - self.center).cross(g.d1)
    }

    /// Smallest value of [`SbPatch::star_function`] over `samples + 1`
    /// equally spaced parameters.
    pub fn star_measure(&self, samples: usize) -> f64 {
        let mut m = f64::INFINITY;
        for k in 0..=samples {
            m = m.min(self.star_function(k as f64 / samples as f64));
        }
        m
    }

    /// Uniform refinement: `k / s` is inserted with multiplicity `p - r` in
    /// both directions.
    pub fn refine_uniform(&self, s_zeta: usize, s_xi: usize, r: isize) -> Result<Self> {
        let boundary = self.boundary.refine_uniform(s_zeta, r)?;
        let radial = refine_knots(&self.radial, s_xi, r)?;
        SbPatch::new(boundary, self.center, self.c1, self.c2, radial)
    }

    /// Dyadic refinement: every non-empty span is halved `levels` times.
    pub fn refine(&self, levels_zeta: usize, levels_xi: usize, r: isize) -> Result<Self> {
        let p = self.degree() as isize;
        if r >= p || r < 0 {
            return Err(Error::InvalidRegularity(format!("r = {r} with p = {p}")));
        }
        let mult = (p - r) as usize;
        let mut boundary = self.boundary.clone();
        for _ in 0..levels_zeta {
            for w in boundary.knots().breakpoints().windows(2) {
                boundary = boundary.insert_knot(0.5 * (w[0] + w[1]), mult)?;
            }
        }
        let mut radial = self.radial.clone();
        for _ in 0..levels_xi {
            for w in radial.breakpoints().windows(2) {
                radial = radial.with_inserted(0.5 * (w[0] + w[1]), mult)?;
            }
        }
        SbPatch::new(boundary, self.center, self.c1, self.c2, radial)
    }

    /// Same patch with a different boundary parametrization refinement.
    pub fn with_boundary(&self, boundary: NurbsCurve) -> Result<Self> {
        SbPatch::new(boundary, self.center, self.c1, self.c2, self.radial.clone())
    }

    pub fn with_radial(&self, radial: KnotVector) -> Result<Self> {
        SbPatch::new(self.boundary.clone(), self.center, self.c1, self.c2, radial)
    }

    /// Parametric point mapped to `x`, if `x` lies in the patch.
    pub fn locate(&self, x: Vec2, tol: f64) -> Option<(f64, f64)> {
        if self.is_singular() && x.dist(self.center) <= tol {
            return Some((0.5, 0.0));
        }
        let n = 8 * self.boundary.knots().breakpoints().len();
        let mut best: Option<(f64, f64, f64)> = None;
        for a in 0..=n {
            for b in 0..=n {
                let (mut z, mut s) = (a as f64 / n as f64, b as f64 / n as f64);
                if self.is_singular() && s == 0.0 {
                    continue;
                }
                for _ in 0..40 {
                    let g = self.geometry(z, s);
                    let r = x - g.x;
                    if g.det.abs() < 1e-300 {
                        break;
                    }
                    let dz = (r.x * g.d_xi.y - r.y * g.d_xi.x) / g.det;
                    let ds = (g.d_zeta.x * r.y - g.d_zeta.y * r.x) / g.det;
                    z = (z + dz).clamp(0.0, 1.0);
                    s = (s + ds).clamp(0.0, 1.0);
                    if dz.abs() + ds.abs() < 1e-15 {
                        break;
                    }
                }
                let d = self.map(z, s).dist(x);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((z, s, d));
                }
                if d <= tol {
                    return Some((z, s));
                }
            }
        }
        best.filter(|b| b.2 <= tol).map(|b| (b.0, b.1))
    }
}

/// Inserts `k / s` with multiplicity `p - r` into `kv`.
pub fn refine_knots(kv: &KnotVector, s: usize, r: isize) -> Result<KnotVector> {
    let p = kv.degree() as isize;
    if r >= p || r < 0 {
        return Err(Error::InvalidRegularity(format!("r = {r} with p = {p}")));
    }
    let target = (p - r) as usize;
    let mut out = kv.clone();
    for k in 1..s {
        let t = k as f64 / s as f64;
        let m = out.multiplicity(t);
        if m < target {
            out = out.with_inserted(t, target - m)?;
        }
    }
    Ok(out)
}

/// Physical gradients and Hessians from parametric ones:
/// `grad = J^-T grad_hat`, `H = J^-T (H_hat - sum_k g_k d2F_k) J^-1`.
pub fn physical_derivs(basis: &BasisEval, geo: &GeomEval) -> Result<PhysicalBasis> {
    let scale = geo.d_zeta.norm() * geo.d_xi.norm();
    if !(geo.det.abs() > 1e-13 * scale) || scale == 0.0 {
        return Err(Error::SingularJacobian(format!("det J = {} at {:?}", geo.det, geo.x)));
    }
    let inv = inverse_jacobian(geo);
    let mut out = PhysicalBasis {
        grad: Vec::with_capacity(basis.len()),
        hess: Vec::with_capacity(basis.hess.len()),
    };
    for (k, gh) in basis.grad.iter().enumerate() {
        let g = apply_inv_t(&inv, *gh);
        out.grad.push(g);
        if let Some(hh) = basis.hess.get(k) {
            out.hess.push(physical_hessian(&inv, geo, *hh, g));
        }
    }
    Ok(out)
}

/// `J^-1` as `[[a, b], [c, d]]` acting on physical vectors.
pub fn inverse_jacobian(geo: &GeomEval) -> [[f64; 2]; 2] {
    let inv_det = 1.0 / geo.det;
    // J = [[xz, xs], [yz, ys]]
    [
        [geo.d_xi.y * inv_det, -geo.d_xi.x * inv_det],
        [-geo.d_zeta.y * inv_det, geo.d_zeta.x * inv_det],
    ]
}

/// `J^-T v`.
pub fn apply_inv_t(inv: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [inv[0][0] * v[0] + inv[1][0] * v[1], inv[0][1] * v[0] + inv[1][1] * v[1]]
}

/// Physical Hessian `[xx, xy, yy]` from a parametric one.
pub fn physical_hessian(inv: &[[f64; 2]; 2], geo: &GeomEval, hh: [f64; 3], g: [f64; 2]) -> [f64; 3] {
    let m = [
        [hh[0] - g[0] * geo.dd[0].x - g[1] * geo.dd[0].y, hh[1] - g[0] * geo.dd[1].x - g[1] * geo.dd[1].y],
        [0.0, hh[2] - g[0] * geo.dd[2].x - g[1] * geo.dd[2].y],
    ];
    let m = [[m[0][0], m[0][1]], [m[0][1], m[1][1]]];
    // H = inv^T m inv
    let mut h = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += inv[k][a] * m[k][l] * inv[l][b];
                }
            }
            h[a][b] = s;
        }
    }
    [h[0][0], 0.5 * (h[0][1] + h[1][0]), h[1][1]]
}

/// Patch edges in parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    ZetaMin,
    ZetaMax,
    XiMin,
    XiMax,
}

/// Boundary condition of a boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcTag {
    Clamped,
    SimplySupported,
    Free,
}

impl BcTag {
    /// Number of control layers removed next to a boundary with this tag.
    pub fn removed_layers(self) -> usize {
        match self {
            BcTag::Clamped => 2,
            BcTag::SimplySupported => 1,
            BcTag::Free => 0,
        }
    }
}

impl std::str::FromStr for BcTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamped" => Ok(BcTag::Clamped),
            "simply_supported" | "simply-supported" => Ok(BcTag::SimplySupported),
            "free" => Ok(BcTag::Free),
            _ => Err(Error::Config(format!("unknown bc tag `{s}`"))),
        }
    }
}

/// Edge shared by two patches. Radial interfaces pair `ZetaMax` of `left`
/// with `ZetaMin` of `right` at equal `xi`; other interfaces pair two `XiMax`
/// edges with opposite `zeta` direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub left: (usize, Edge),
    pub right: (usize, Edge),
    pub reversed: bool,
}

impl Interface {
    pub fn is_radial(&self) -> bool {
        self.left.1 == Edge::ZetaMax && self.right.1 == Edge::ZetaMin
    }
}

/// Boundary edge with its condition and optional edge loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub patch: usize,
    pub edge: Edge,
    pub bc: BcTag,
    /// Transverse line load per unit length.
    pub line_load: f64,
    /// Bending moment per unit length.
    pub moment: f64,
}

/// Patches sharing one scaling center and one radial knot vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterGroup {
    pub center: Vec2,
    pub c1: f64,
    pub c2: f64,
    pub patches: Vec<usize>,
}

impl CenterGroup {
    pub fn is_singular(&self) -> bool {
        self.c2 == 0.0
    }
}

/// Validated multi-patch scaled-boundary domain.
#[derive(Debug, Clone)]
pub struct MultiPatchDomain {
    pub patches: Vec<SbPatch>,
    pub group_of: Vec<usize>,
    pub groups: Vec<CenterGroup>,
    pub interfaces: Vec<Interface>,
    pub boundaries: Vec<BoundarySegment>,
}

/// Edge control points ordered along the edge parameter.
pub fn edge_points(patch: &SbPatch, edge: Edge) -> Result<Vec<Vec2>> {
    let net = patch.control_net()?;
    let (n1, n2) = (patch.n1(), patch.n2());
    Ok(match edge {
        Edge::ZetaMin => (0..n2).map(|j| net[j]).collect(),
        Edge::ZetaMax => (0..n2).map(|j| net[(n1 - 1) * n2 + j]).collect(),
        Edge::XiMin => (0..n1).map(|i| net[i * n2]).collect(),
        Edge::XiMax => (0..n1).map(|i| net[i * n2 + n2 - 1]).collect(),
    })
}

/// Knot vector along an edge.
pub fn edge_knots(patch: &SbPatch, edge: Edge) -> &KnotVector {
    match edge {
        Edge::ZetaMin | Edge::ZetaMax => patch.radial(),
        Edge::XiMin | Edge::XiMax => patch.boundary().knots(),
    }
}

impl MultiPatchDomain {
    /// Validates topology and geometry of an explicitly described domain.
    pub fn new(
        patches: Vec<SbPatch>,
        group_of: Vec<usize>,
        interfaces: Vec<Interface>,
        boundaries: Vec<BoundarySegment>,
    ) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::Topology("domain without patches".into()));
        }
        if group_of.len() != patches.len() {
            return Err(Error::Topology("every patch needs a center group".into()));
        }
        let p = patches[0].degree();
        if let Some(k) = patches.iter().position(|q| q.degree() != p) {
            return Err(Error::DegreeMismatch(format!(
                "patch {k} has degree {} but patch 0 has degree {p}",
                patches[k].degree()
            )));
        }
        let ngroups = group_of.iter().max().map_or(0, |m| m + 1);
        let mut groups: Vec<Option<CenterGroup>> = vec![None; ngroups];
        for (k, (patch, &g)) in patches.iter().zip(&group_of).enumerate() {
            match &mut groups[g] {
                None => {
                    groups[g] = Some(CenterGroup {
                        center: patch.center(),
                        c1: patch.c1(),
                        c2: patch.c2(),
                        patches: vec![k],
                    })
                }
                Some(grp) => {
                    let first = &patches[grp.patches[0]];
                    if patch.center() != grp.center
                        || patch.c1() != grp.c1
                        || patch.c2() != grp.c2
                        || patch.radial() != first.radial()
                    {
                        return Err(Error::Topology(format!(
                            "patch {k} disagrees with its center group on x0, c1, c2 or radial knots"
                        )));
                    }
                    grp.patches.push(k);
                }
            }
        }
        let groups: Vec<CenterGroup> = groups
            .into_iter()
            .enumerate()
            .map(|(g, x)| x.ok_or_else(|| Error::Topology(format!("center group {g} is empty"))))
            .collect::<Result<_>>()?;

        for (k, patch) in patches.iter().enumerate() {
            let m = patch.star_measure(64 * patch.boundary().knots().breakpoints().len());
            if !(m > 0.0) {
                return Err(Error::NotStarShaped(format!(
                    "patch {k}: boundary is not visible from its scaling center counterclockwise (min {m:e})"
                )));
            }
        }

        let scale = domain_extent(&patches);
        let tol = 1e-12 * scale.max(1.0);
        let mut used = std::collections::HashSet::new();
        for (n, itf) in interfaces.iter().enumerate() {
            for side in [itf.left, itf.right] {
                if side.0 >= patches.len() {
                    return Err(Error::Topology(format!("interface {n} references patch {}", side.0)));
                }
                if !used.insert(side) {
                    return Err(Error::Topology(format!("edge {side:?} appears in two interfaces")));
                }
            }
            let radial = itf.left.1 == Edge::ZetaMax && itf.right.1 == Edge::ZetaMin && !itf.reversed;
            let cross = itf.left.1 == Edge::XiMax && itf.right.1 == Edge::XiMax && itf.reversed;
            if !(radial || cross) {
                return Err(Error::Topology(format!("interface {n} has an unsupported edge pairing")));
            }
            if radial && group_of[itf.left.0] != group_of[itf.right.0] {
                return Err(Error::Topology(format!("radial interface {n} joins different centers")));
            }
            let (pl, pr) = (&patches[itf.left.0], &patches[itf.right.0]);
            let kl = edge_knots(pl, itf.left.1);
            let kr = edge_knots(pr, itf.right.1);
            let kr = if itf.reversed { kr.reversed() } else { kr.clone() };
            if !kl.approx_eq(&kr, 1e-12) {
                return Err(Error::Topology(format!(
                    "interface {n} (patches {} and {}): edge knot vectors differ",
                    itf.left.0, itf.right.0
                )));
            }
            let a = edge_points(pl, itf.left.1)?;
            let mut b = edge_points(pr, itf.right.1)?;
            if itf.reversed {
                b.reverse();
            }
            let dev = a.iter().zip(&b).map(|(x, y)| x.dist(*y)).fold(0.0, f64::max);
            if a.len() != b.len() || dev > tol {
                return Err(Error::Topology(format!(
                    "interface {n} (patches {} and {}): control points differ by {dev:e}",
                    itf.left.0, itf.right.0
                )));
            }
            if !radial {
                let wl = pl.boundary().weights();
                let wr: Vec<f64> = pr.boundary().weights().iter().rev().copied().collect();
                let ratio = wr[0] / wl[0];
                if wl.iter().zip(&wr).any(|(x, y)| (y / x - ratio).abs() > 1e-12) {
                    return Err(Error::Topology(format!("interface {n}: edge weights differ")));
                }
            }
        }
        for b in &boundaries {
            if b.patch >= patches.len() {
                return Err(Error::Topology(format!("boundary references patch {}", b.patch)));
            }
            if !used.insert((b.patch, b.edge)) {
                return Err(Error::Topology(format!(
                    "edge {:?} of patch {} is both interface and boundary",
                    b.edge, b.patch
                )));
            }
            if b.edge == Edge::XiMin && patches[b.patch].is_singular() {
                return Err(Error::Topology(format!("patch {}: collapsed edge cannot carry a boundary", b.patch)));
            }
        }
        for (k, patch) in patches.iter().enumerate() {
            for e in [Edge::ZetaMin, Edge::ZetaMax, Edge::XiMax, Edge::XiMin] {
                if e == Edge::XiMin && patch.is_singular() {
                    continue;
                }
                if !used.contains(&(k, e)) {
                    return Err(Error::Topology(format!("edge {e:?} of patch {k} is neither interface nor boundary")));
                }
            }
        }
        Ok(MultiPatchDomain { patches, group_of, groups, interfaces, boundaries })
    }

    pub fn degree(&self) -> usize {
        self.patches[0].degree()
    }

    /// Area of the domain by Gauss quadrature on the element grid.
    pub fn area(&self) -> f64 {
        let n = self.degree() + 2;
        let rule = crate::quadrature::GaussRule::new(n);
        let mut total = 0.0;
        for patch in &self.patches {
            let zb = patch.boundary().knots().breakpoints();
            let xb = patch.radial().breakpoints();
            for z in zb.windows(2) {
                for x in xb.windows(2) {
                    for (zq, wz) in rule.mapped(z[0], z[1]) {
                        for (xq, wx) in rule.mapped(x[0], x[1]) {
                            total += wz * wx * patch.geometry(zq, xq).det.abs();
                        }
                    }
                }
            }
        }
        total
    }

    /// Length of the longest side of the bounding box of all control points.
    pub fn extent(&self) -> f64 {
        domain_extent(&self.patches)
    }

    /// `(patch, zeta, xi)` of a physical point.
    pub fn locate(&self, x: Vec2) -> Option<(usize, f64, f64)> {
        let tol = 1e-10 * self.extent().max(1.0);
        for g in &self.groups {
            if g.is_singular() && g.center.dist(x) <= tol {
                return Some((g.patches[0], 0.5, 0.0));
            }
        }
        let mut order: Vec<usize> = (0..self.patches.len()).collect();
        order.sort_by(|&a, &b| {
            let da = patch_bbox_dist(&self.patches[a], x);
            let db = patch_bbox_dist(&self.patches[b], x);
            da.total_cmp(&db)
        });
        for k in order {
            if patch_bbox_dist(&self.patches[k], x) > tol {
                break;
            }
            if let Some((z, s)) = self.patches[k].locate(x, tol) {
                return Some((k, z, s));
            }
        }
        None
    }
}

fn domain_extent(patches: &[SbPatch]) -> f64 {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in patches {
        for c in p.boundary().points().iter().chain(std::iter::once(&p.center())) {
            lo = Vec2::new(lo.x.min(c.x), lo.y.min(c.y));
            hi = Vec2::new(hi.x.max(c.x), hi.y.max(c.y));
        }
    }
    (hi.x - lo.x).max(hi.y - lo.y)
}

fn patch_bbox_dist(p: &SbPatch, x: Vec2) -> f64 {
    let mut lo = p.center();
    let mut hi = p.center();
    for c in p.boundary().points() {
        lo = Vec2::new(lo.x.min(c.x), lo.y.min(c.y));
        hi = Vec2::new(hi.x.max(c.x), hi.y.max(c.y));
    }
    let dx = (lo.x - x.x).max(x.x - hi.x).max(0.0);
    let dy = (lo.y - x.y).max(x.y - hi.y).max(0.0);
    dx.hypot(dy)
}

/// Boundary curve of a block with its condition and edge loads.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub curve: NurbsCurve,
    pub bc: BcTag,
    pub line_load: f64,
    pub moment: f64,
}

impl BoundaryCurve {
    pub fn new(curve: NurbsCurve, bc: BcTag) -> Self {
        BoundaryCurve { curve, bc, line_load: 0.0, moment: 0.0 }
    }
}

/// Star-shaped block: a chain of curves traversed counterclockwise around
/// one scaling center. Consecutive curves meet at radial interfaces; a closed
/// chain also joins its last and first curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub center: Vec2,
    pub c1: f64,
    pub c2: f64,
    pub curves: Vec<BoundaryCurve>,
    /// Condition on the inner edges `xi = 0` when `c2 > 0`.
    pub inner_bc: BcTag,
    /// Conditions on the radial edges of an open chain.
    pub start_bc: BcTag,
    pub end_bc: BcTag,
}

impl Block {
    pub fn new(center: Vec2, curves: Vec<BoundaryCurve>) -> Self {
        Block {
            center,
            c1: 1.0,
            c2: 0.0,
            curves,
            inner_bc: BcTag::Free,
            start_bc: BcTag::Free,
            end_bc: BcTag::Free,
        }
    }

    pub fn is_closed(&self) -> bool {
        match (self.curves.first(), self.curves.last()) {
            (Some(a), Some(b)) => a.curve.start_point().dist(b.curve.end_point()) <= 1e-12,
            _ => false,
        }
    }
}

/// Unrefined description of a domain as a list of blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DomainSpec {
    pub blocks: Vec<Block>,
}

impl DomainSpec {
    /// Builds the refined multi-patch domain: curves are elevated to `p`,
    /// split where they are only `C^0`, and refined uniformly with `s` spans
    /// of regularity `r` in both directions.
    pub fn discretize(&self, p: usize, r: isize, s: usize) -> Result<MultiPatchDomain> {
        self.discretize_levels(p, r, s, s)
    }

    /// As `discretize`, with `s_zeta` spans along the boundary and `s_xi`
    /// spans in the radial direction.
    pub fn discretize_levels(&self, p: usize, r: isize, s_zeta: usize, s_xi: usize) -> Result<MultiPatchDomain> {
        if s_zeta == 0 || s_xi == 0 {
            return Err(Error::Config("refinement level must be positive".into()));
        }
        let mut patches = Vec::new();
        let mut group_of = Vec::new();
        let mut interfaces = Vec::new();
        let mut boundaries = Vec::new();
        let mut outer: Vec<(usize, BoundaryCurve)> = Vec::new();
        let radial = refine_knots(&KnotVector::open_uniform(p, 1, p as isize - 1)?, s_xi, r)?;
        for (g, block) in self.blocks.iter().enumerate() {
            if block.curves.is_empty() {
                return Err(Error::Topology(format!("block {g} has no curves")));
            }
            let closed = block.is_closed();
            let first = patches.len();
            for (k, bcurve) in block.curves.iter().enumerate() {
                if k + 1 < block.curves.len() {
                    let next = &block.curves[k + 1].curve;
                    if bcurve.curve.end_point().dist(next.start_point()) > 1e-12 {
                        return Err(Error::Topology(format!("block {g}: curves {k} and {} are not connected", k + 1)));
                    }
                }
                let c = bcurve.curve.elevate_to(p)?;
                for piece in c.split_at_c0_knots()? {
                    let piece = piece.refine_uniform(s_zeta, r)?;
                    let patch = SbPatch::new(piece, block.center, block.c1, block.c2, radial.clone())?;
                    let idx = patches.len();
                    patches.push(patch);
                    group_of.push(g);
                    outer.push((idx, BoundaryCurve { curve: bcurve.curve.clone(), ..bcurve.clone() }));
                    if block.c2 > 0.0 {
                        boundaries.push(BoundarySegment {
                            patch: idx,
                            edge: Edge::XiMin,
                            bc: block.inner_bc,
                            line_load: 0.0,
                            moment: 0.0,
                        });
                    }
                }
            }
            let last = patches.len() - 1;
            for k in first..last {
                interfaces.push(Interface { left: (k, Edge::ZetaMax), right: (k + 1, Edge::ZetaMin), reversed: false });
            }
            if closed && last > first {
                interfaces.push(Interface { left: (last, Edge::ZetaMax), right: (first, Edge::ZetaMin), reversed: false });
            } else if closed {
                return Err(Error::Topology(format!("block {g}: a closed chain needs at least two patches")));
            } else {
                for (k, e, bc) in [(first, Edge::ZetaMin, block.start_bc), (last, Edge::ZetaMax, block.end_bc)] {
                    boundaries.push(BoundarySegment { patch: k, edge: e, bc, line_load: 0.0, moment: 0.0 });
                }
            }
        }
        match_outer_edges(&patches, &outer, &mut interfaces, &mut boundaries)?;
        MultiPatchDomain::new(patches, group_of, interfaces, boundaries)
    }
}

/// Pairs outer edges that coincide with reversed orientation and turns the
/// rest into boundary segments.
fn match_outer_edges(
    patches: &[SbPatch],
    outer: &[(usize, BoundaryCurve)],
    interfaces: &mut Vec<Interface>,
    boundaries: &mut Vec<BoundarySegment>,
) -> Result<()> {
    let scale = domain_extent(patches).max(1.0);
    let tol = 1e-12 * scale;
    let mut matched = vec![false; outer.len()];
    for a in 0..outer.len() {
        if matched[a] {
            continue;
        }
        let pa = &patches[outer[a].0];
        let ca = pa.boundary();
        for b in (a + 1)..outer.len() {
            if matched[b] {
                continue;
            }
            let pb = &patches[outer[b].0];
            let cb = pb.boundary();
            let ends = ca.start_point().dist(cb.end_point()) <= 1e-9 * scale
                && ca.end_point().dist(cb.start_point()) <= 1e-9 * scale;
            if !ends {
                continue;
            }
            let rev = cb.reversed();
            let same_shape = rev.points().len() == ca.points().len()
                && rev.points().iter().zip(ca.points()).all(|(x, y)| x.dist(*y) <= tol)
                && rev.knots().approx_eq(ca.knots(), 1e-12);
            if !same_shape {
                let mid = ca.point(0.5);
                if cb.closest_param(mid).1 <= 1e-9 * scale {
                    return Err(Error::Topology(format!(
                        "patches {} and {} share an edge with mismatched control points or knots",
                        outer[a].0, outer[b].0
                    )));
                }
                continue;
            }
            matched[a] = true;
            matched[b] = true;
            interfaces.push(Interface { left: (outer[a].0, Edge::XiMax), right: (outer[b].0, Edge::XiMax), reversed: true });
            break;
        }
    }
    let free: Vec<usize> = (0..outer.len()).filter(|&k| !matched[k]).collect();
    for &a in &free {
        let ca = patches[outer[a].0].boundary();
        for &b in &free {
            if a == b {
                continue;
            }
            let cb = patches[outer[b].0].boundary();
            for t in [0.25, 0.5, 0.75] {
                if cb.closest_param(ca.point(t)).1 <= 1e-9 * scale {
                    return Err(Error::Topology(format!(
                        "patches {} and {} overlap along a non-conforming edge",
                        outer[a].0, outer[b].0
                    )));
                }
            }
        }
        let bc = &outer[a].1;
        boundaries.push(BoundarySegment {
            patch: outer[a].0,
            edge: Edge::XiMax,
            bc: bc.bc,
            line_load: bc.line_load,
            moment: bc.moment,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_block(center: Vec2, p: usize, bc: BcTag) -> Block {
        let c = [
            Vec2::new(-0.5, -0.5),
            Vec2::new(0.5, -0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(-0.5, 0.5),
        ];
        let curves = (0..4)
            .map(|k| BoundaryCurve::new(NurbsCurve::line(c[k], c[(k + 1) % 4], p).unwrap(), bc))
            .collect();
        Block::new(center, curves)
    }

    #[test]
    fn control_net_reproduces_map() {
        let spec = DomainSpec { blocks: vec![square_block(Vec2::new(-0.15, 0.1), 3, BcTag::Clamped)] };
        let dom = spec.discretize(3, 1, 3).unwrap();
        let patch = &dom.patches[1];
        let net = patch.control_net().unwrap();
        let space = patch.space();
        for &(z, s) in &[(0.1, 0.2), (0.7, 0.9), (0.5, 0.0), (1.0, 1.0)] {
            let e = space.eval(z, s, 0).unwrap();
            let mut x = Vec2::ZERO;
            for (k, &(i, j)) in e.index.iter().enumerate() {
                x += net[i * patch.n2() + j] * e.value[k];
            }
            assert!(x.dist(patch.map(z, s)) < 1e-14);
        }
    }

    #[test]
    fn determinant_matches_closed_form() {
        let spec = DomainSpec { blocks: vec![square_block(Vec2::new(0.1, 0.0), 2, BcTag::Free)] };
        let dom = spec.discretize(2, 1, 1).unwrap();
        for patch in &dom.patches {
            for &(z, s) in &[(0.3, 0.4), (0.9, 1.0)] {
                let g = patch.geometry(z, s);
                let expect = -patch.c1() * patch.q(s) * patch.star_function(z);
                assert!((g.det - expect).abs() < 1e-14);
                assert!(g.det < 0.0);
            }
        }
    }

    #[test]
    fn square_topology() {
        let spec = DomainSpec { blocks: vec![square_block(Vec2::ZERO, 3, BcTag::SimplySupported)] };
        let dom = spec.discretize(3, 1, 2).unwrap();
        assert_eq!(dom.patches.len(), 4);
        assert_eq!(dom.interfaces.len(), 4);
        assert_eq!(dom.boundaries.len(), 4);
        assert!(dom.interfaces.iter().all(Interface::is_radial));
    }

    #[test]
    fn center_outside_is_rejected() {
        let spec = DomainSpec { blocks: vec![square_block(Vec2::new(0.8, 0.0), 3, BcTag::Free)] };
        assert!(matches!(spec.discretize(3, 1, 1), Err(Error::NotStarShaped(_))));
    }

    #[test]
    fn two_blocks_share_an_edge() {
        let a = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        let b = [Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.0, 1.0), Vec2::new(1.0, 1.0)];
        let mk = |c: [Vec2; 4], x0: Vec2| {
            let curves = (0..4)
                .map(|k| BoundaryCurve::new(NurbsCurve::line(c[k], c[(k + 1) % 4], 3).unwrap(), BcTag::Clamped))
                .collect();
            Block::new(x0, curves)
        };
        let spec = DomainSpec { blocks: vec![mk(a, Vec2::new(0.5, 0.5)), mk(b, Vec2::new(1.4, 0.6))] };
        let dom = spec.discretize(3, 1, 2).unwrap();
        assert_eq!(dom.interfaces.len(), 9);
        assert_eq!(dom.boundaries.len(), 6);
    }

    #[test]
    fn locate_inverts_map() {
        let spec = DomainSpec { blocks: vec![square_block(Vec2::new(-0.15, 0.1), 3, BcTag::Free)] };
        let dom = spec.discretize(3, 1, 2).unwrap();
        for &x in &[Vec2::new(0.0, 0.0), Vec2::new(0.3, -0.41), Vec2::new(-0.15, 0.1), Vec2::new(0.5, 0.5)] {
            let (k, z, s) = dom.locate(x).unwrap();
            assert!(dom.patches[k].map(z, s).dist(x) < 1e-10);
        }
        assert!(dom.locate(Vec2::new(0.7, 0.0)).is_none());
    }
}
