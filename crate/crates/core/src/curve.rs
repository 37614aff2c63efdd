//! Planar NURBS curves and the primitives used to describe boundaries.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::splines::{eval_univariate, KnotVector};

/// Planar NURBS curve on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NurbsCurve {
    kv: KnotVector,
    points: Vec<Vec2>,
    weights: Vec<f64>,
}

/// Point, first and second derivative of a curve at one parameter.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub pos: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl NurbsCurve {
    pub fn new(kv: KnotVector, points: Vec<Vec2>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != kv.num_basis() {
            return Err(Error::InvalidGeometry(format!(
                "{} control points for {} basis functions",
                points.len(),
                kv.num_basis()
            )));
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidWeights("one weight per control point is required".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("control points must be finite".into()));
        }
        let kv = if kv.start() != 0.0 || kv.end() != 1.0 { kv.normalized() } else { kv };
        Ok(NurbsCurve { kv, points, weights })
    }

    /// Polynomial (unit-weight) curve.
    pub fn polynomial(kv: KnotVector, points: Vec<Vec2>) -> Result<Self> {
        let w = vec![1.0; points.len()];
        NurbsCurve::new(kv, points, w)
    }

    /// Straight segment of degree `p` with uniform speed.
    pub fn line(a: Vec2, b: Vec2, p: usize) -> Result<Self> {
        if a.dist(b) == 0.0 {
            return Err(Error::DegenerateCurve("line with coincident end points".into()));
        }
        let kv = KnotVector::open_uniform(p.max(1), 1, p.max(1) as isize - 1)?;
        let p = p.max(1);
        let pts = (0..=p).map(|k| a.lerp(b, k as f64 / p as f64)).collect();
        NurbsCurve::polynomial(kv, pts)
    }

    /// Circular arc from angle `start` to `end` (radians, counterclockwise if
    /// `end > start`), exact as a rational curve of degree `p >= 2`.
    pub fn arc(center: Vec2, radius: f64, start: f64, end: f64, p: usize) -> Result<Self> {
        let sweep = end - start;
        if p < 2 {
            return Err(Error::DegreeMismatch("circular arcs need degree >= 2".into()));
        }
        if !(radius > 0.0) || sweep == 0.0 || sweep.abs() > 0.75 * std::f64::consts::PI + 1e-12 {
            return Err(Error::InvalidGeometry(format!(
                "arc with radius {radius} and sweep {sweep} is not supported"
            )));
        }
        let half = 0.5 * sweep;
        let mid = start + half;
        let at = |a: f64| center + Vec2::new(a.cos(), a.sin()) * radius;
        let w1 = half.cos();
        let hom = vec![
            [at(start).x, at(start).y, 1.0],
            [
                (center.x + radius / w1 * mid.cos()) * w1,
                (center.y + radius / w1 * mid.sin()) * w1,
                w1,
            ],
            [at(end).x, at(end).y, 1.0],
        ];
        let hom = elevate_bezier(hom, p);
        let kv = KnotVector::open_uniform(p, 1, p as isize - 1)?;
        from_homogeneous(kv, &hom)
    }

    /// Full circle traversed counterclockwise from angle `start`, made of four
    /// exact quarter arcs joined with `C^0` parametric continuity.
    pub fn circle(center: Vec2, radius: f64, start: f64, p: usize) -> Result<Self> {
        let q = std::f64::consts::FRAC_PI_2;
        let arcs = (0..4)
            .map(|k| NurbsCurve::arc(center, radius, start + k as f64 * q, start + (k + 1) as f64 * q, p))
            .collect::<Result<Vec<_>>>()?;
        NurbsCurve::join(&arcs)
    }

    /// Concatenates single-span curves of equal degree; piece `k` occupies
    /// `[k/n, (k+1)/n]`.
    pub fn join(pieces: &[NurbsCurve]) -> Result<Self> {
        let n = pieces.len();
        if n == 0 {
            return Err(Error::InvalidGeometry("nothing to join".into()));
        }
        let p = pieces[0].degree();
        let mut knots = vec![0.0; p + 1];
        let mut pts = Vec::new();
        let mut w = Vec::new();
        for (k, c) in pieces.iter().enumerate() {
            if c.degree() != p || c.points.len() != p + 1 {
                return Err(Error::DegreeMismatch("joined pieces must be single spans of equal degree".into()));
            }
            let skip = if k == 0 {
                0
            } else {
                if c.points[0].dist(*pts.last().unwrap()) > 1e-12 {
                    return Err(Error::InvalidGeometry("joined pieces are not connected".into()));
                }
                1
            };
            // Shared control points must carry a common weight.
            let scale = if k == 0 { 1.0 } else { w.last().copied().unwrap_or(1.0) / c.weights[0] };
            for a in skip..=p {
                pts.push(c.points[a]);
                w.push(c.weights[a] * scale);
            }
            if k + 1 < n {
                knots.extend(std::iter::repeat_n((k + 1) as f64 / n as f64, p));
            }
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        NurbsCurve::new(KnotVector::new(knots, p)?, pts, w)
    }

    pub fn degree(&self) -> usize {
        self.kv.degree()
    }

    pub fn knots(&self) -> &KnotVector {
        &self.kv
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn start_point(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end_point(&self) -> Vec2 {
        *self.points.last().unwrap()
    }

    pub fn is_rational(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().any(|&w| (w - w0).abs() > 1e-15 * w0)
    }

    /// Position and first two derivatives.
    pub fn eval(&self, t: f64) -> CurvePoint {
        let e = eval_univariate(&self.kv, None, t, 2);
        let mut a = [Vec2::ZERO; 3];
        let mut w = [0.0; 3];
        for (k, row) in e.ders.iter().enumerate().take(3) {
            for (off, &b) in row.iter().enumerate() {
                let i = e.first + off;
                a[k] += self.points[i] * (self.weights[i] * b);
                w[k] += self.weights[i] * b;
            }
        }
        let pos = a[0] * (1.0 / w[0]);
        let d1 = (a[1] - pos * w[1]) * (1.0 / w[0]);
        let d2 = (a[2] - d1 * (2.0 * w[1]) - pos * w[2]) * (1.0 / w[0]);
        CurvePoint { pos, d1, d2 }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.eval(t).pos
    }

    /// Curve with the parameter direction reversed.
    pub fn reversed(&self) -> Self {
        NurbsCurve {
            kv: self.kv.reversed(),
            points: self.points.iter().rev().copied().collect(),
            weights: self.weights.iter().rev().copied().collect(),
        }
    }

    /// Inserts `t` `times` times without changing the geometry.
    pub fn insert_knot(&self, t: f64, times: usize) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidKnots(format!("insertion point {t} is not interior")));
        }
        if self.kv.multiplicity(t) + times > self.degree() + 1 {
            return Err(Error::InvalidMultiplicity(format!(
                "inserting {t} {times} times exceeds p + 1"
            )));
        }
        let mut hom: Vec<[f64; 3]> = to_homogeneous(&self.points, &self.weights);
        let mut kv = self.kv.clone();
        let p = kv.degree();
        for _ in 0..times {
            let u = kv.knots();
            let k = kv.find_span(t).max(p);
            let mut out = Vec::with_capacity(hom.len() + 1);
            for i in 0..=hom.len() {
                if i + p <= k {
                    out.push(hom[i]);
                } else if i > k {
                    out.push(hom[i - 1]);
                } else {
                    let a = (t - u[i]) / (u[i + p] - u[i]);
                    let (q0, q1) = (hom[i - 1], hom[i]);
                    out.push([
                        (1.0 - a) * q0[0] + a * q1[0],
                        (1.0 - a) * q0[1] + a * q1[1],
                        (1.0 - a) * q0[2] + a * q1[2],
                    ]);
                }
            }
            hom = out;
            kv = kv.with_inserted(t, 1)?;
        }
        from_homogeneous(kv, &hom)
    }

    /// Inserts `k/segments` for `k = 1..segments` until each has multiplicity
    /// at least `p - r`.
    pub fn refine_uniform(&self, segments: usize, r: isize) -> Result<Self> {
        let p = self.degree() as isize;
        if r >= p || r < 0 {
            return Err(Error::InvalidRegularity(format!("r = {r} with p = {p}")));
        }
        let target = (p - r) as usize;
        let mut c = self.clone();
        for k in 1..segments {
            let t = k as f64 / segments as f64;
            let m = c.kv.multiplicity(t);
            if m < target {
                c = c.insert_knot(t, target - m)?;
            }
        }
        Ok(c)
    }

    /// Splits at the given interior parameters; each piece is reparametrized
    /// affinely onto `[0, 1]`. Parameters within `1e-12` of a knot split there.
    pub fn split(&self, params: &[f64]) -> Result<Vec<NurbsCurve>> {
        let tol = 1e-12;
        let mut ts: Vec<f64> = params
            .iter()
            .map(|&t| self.kv.knots().iter().copied().find(|k| (k - t).abs() <= tol).unwrap_or(t))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        if ts.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::InvalidIndex("split parameters must lie in (0, 1)".into()));
        }
        let p = self.degree();
        let mut c = self.clone();
        for &t in &ts {
            let m = c.kv.multiplicity(t);
            if m < p + 1 {
                c = c.insert_knot(t, p + 1 - m)?;
            }
        }
        let knots = c.kv.knots().to_vec();
        let mut bounds = vec![0.0];
        bounds.extend(ts.iter().copied());
        bounds.push(1.0);
        let mut pieces = Vec::with_capacity(bounds.len() - 1);
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            let first = knots.iter().position(|&k| k == a).unwrap();
            let last = knots.iter().rposition(|&k| k == b).unwrap();
            let piece_knots: Vec<f64> = knots[first..=last]
                .iter()
                .map(|&k| ((k - a) / (b - a)).clamp(0.0, 1.0))
                .collect();
            let n = piece_knots.len() - p - 1;
            let pts = c.points[first..first + n].to_vec();
            let wts = c.weights[first..first + n].to_vec();
            pieces.push(NurbsCurve::new(KnotVector::new(piece_knots, p)?, pts, wts)?);
        }
        Ok(pieces)
    }

    /// Splits at interior knots where the parametrization is only `C^0`.
    pub fn split_at_c0_knots(&self) -> Result<Vec<NurbsCurve>> {
        let p = self.degree();
        let ts: Vec<f64> = self
            .kv
            .interior_breaks()
            .into_iter()
            .filter(|&(_, m)| m >= p)
            .map(|(t, _)| t)
            .collect();
        if ts.is_empty() {
            Ok(vec![self.clone()])
        } else {
            self.split(&ts)
        }
    }

    /// Degree elevation to `p` (no-op if already of degree `p`).
    pub fn elevate_to(&self, p: usize) -> Result<Self> {
        let q = self.degree();
        if p == q {
            return Ok(self.clone());
        }
        if p < q {
            return Err(Error::DegreeMismatch(format!("cannot lower degree {q} to {p}")));
        }
        let pieces = self.split_at_all_knots()?;
        let elevated = pieces
            .iter()
            .map(|c| {
                let hom = elevate_bezier(to_homogeneous(&c.points, &c.weights), p);
                from_homogeneous(KnotVector::open_uniform(p, 1, p as isize - 1)?, &hom)
            })
            .collect::<Result<Vec<_>>>()?;
        // Interior knots of the result have multiplicity `p`.
        let breaks = self.kv.breakpoints();
        let mut knots = vec![0.0; p + 1];
        let mut pts = Vec::new();
        let mut w = Vec::new();
        for (k, c) in elevated.iter().enumerate() {
            let scale = if k == 0 { 1.0 } else { w.last().copied().unwrap_or(1.0) / c.weights[0] };
            let skip = usize::from(k > 0);
            for a in skip..=p {
                pts.push(c.points[a]);
                w.push(c.weights[a] * scale);
            }
            if k + 1 < elevated.len() {
                knots.extend(std::iter::repeat_n(breaks[k + 1], p));
            }
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        NurbsCurve::new(KnotVector::new(knots, p)?, pts, w)
    }

    fn split_at_all_knots(&self) -> Result<Vec<NurbsCurve>> {
        let ts: Vec<f64> = self.kv.interior_breaks().into_iter().map(|(t, _)| t).collect();
        if ts.is_empty() {
            Ok(vec![self.clone()])
        } else {
            self.split(&ts)
        }
    }

    /// Parameter of the point on the curve closest to `x`, and its distance.
    pub fn closest_param(&self, x: Vec2) -> (f64, f64) {
        let n = 64 * self.kv.breakpoints().len();
        let mut best = (0.0, f64::INFINITY);
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let d = self.point(t).dist(x);
            if d < best.1 {
                best = (t, d);
            }
        }
        let mut t = best.0;
        for _ in 0..50 {
            let e = self.eval(t);
            let r = e.pos - x;
            let g = r.dot(e.d1);
            let h = e.d1.dot(e.d1) + r.dot(e.d2);
            if h <= 0.0 {
                break;
            }
            let tn = (t - g / h).clamp(0.0, 1.0);
            let done = (tn - t).abs() < 1e-15;
            t = tn;
            if done {
                break;
            }
        }
        let d = self.point(t).dist(x);
        if d < best.1 {
            (t, d)
        } else {
            best
        }
    }

    /// Samples `n + 1` equally spaced parameters.
    pub fn sample(&self, n: usize) -> Vec<Vec2> {
        (0..=n).map(|k| self.point(k as f64 / n as f64)).collect()
    }
}

fn to_homogeneous(points: &[Vec2], weights: &[f64]) -> Vec<[f64; 3]> {
    points
        .iter()
        .zip(weights)
        .map(|(p, &w)| [p.x * w, p.y * w, w])
        .collect()
}

fn from_homogeneous(kv: KnotVector, hom: &[[f64; 3]]) -> Result<NurbsCurve> {
    let pts = hom.iter().map(|h| Vec2::new(h[0] / h[2], h[1] / h[2])).collect();
    let w = hom.iter().map(|h| h[2]).collect();
    NurbsCurve::new(kv, pts, w)
}

/// Repeated degree elevation of a single Bezier segment in homogeneous form.
fn elevate_bezier(mut hom: Vec<[f64; 3]>, p: usize) -> Vec<[f64; 3]> {
    while hom.len() < p + 1 {
        let q = hom.len() - 1;
        let mut out = Vec::with_capacity(q + 2);
        out.push(hom[0]);
        for i in 1..=q {
            let a = i as f64 / (q + 1) as f64;
            let (u, v) = (hom[i - 1], hom[i]);
            out.push([
                a * u[0] + (1.0 - a) * v[0],
                a * u[1] + (1.0 - a) * v[1],
                a * u[2] + (1.0 - a) * v[2],
            ]);
        }
        out.push(hom[q]);
        hom = out;
    }
    hom
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arc_lies_on_circle() {
        for p in 2..=5 {
            let c = NurbsCurve::arc(Vec2::new(0.3, -0.2), 1.5, 0.1, 0.1 + PI / 2.0, p).unwrap();
            for k in 0..=20 {
                let x = c.point(k as f64 / 20.0);
                assert!((x.dist(Vec2::new(0.3, -0.2)) - 1.5).abs() < 1e-13, "p={p}");
            }
        }
    }

    #[test]
    fn circle_is_closed_and_exact() {
        let c = NurbsCurve::circle(Vec2::ZERO, 0.05, PI / 4.0, 3).unwrap();
        assert!(c.start_point().dist(c.end_point()) < 1e-15);
        for k in 0..=40 {
            assert!((c.point(k as f64 / 40.0).norm() - 0.05).abs() < 1e-15);
        }
        let start = c.point(0.0);
        assert!((start.x - 0.05 * (PI / 4.0).cos()).abs() < 1e-15);
    }

    #[test]
    fn line_has_uniform_speed() {
        let c = NurbsCurve::line(Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), 4).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let e = c.eval(t);
            assert!(e.pos.dist(Vec2::new(2.0 * t, t)) < 1e-15);
            assert!(e.d1.dist(Vec2::new(2.0, 1.0)) < 1e-13);
            assert!(e.d2.norm() < 1e-12);
        }
    }

    #[test]
    fn insertion_and_split_preserve_geometry() {
        let c = NurbsCurve::arc(Vec2::ZERO, 1.0, 0.0, PI / 2.0, 3).unwrap();
        let r = c.insert_knot(0.3, 2).unwrap().refine_uniform(4, 1).unwrap();
        for k in 0..=30 {
            let t = k as f64 / 30.0;
            assert!(c.point(t).dist(r.point(t)) < 1e-14);
        }
        let parts = c.split(&[0.25, 0.6]).unwrap();
        assert_eq!(parts.len(), 3);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            assert!(parts[1].point(s).dist(c.point(0.25 + 0.35 * s)) < 1e-14);
        }
        assert!(parts[0].end_point().dist(parts[1].start_point()) < 1e-15);
    }

    #[test]
    fn elevation_preserves_geometry() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 0.4, 1.0, 1.0, 1.0], 2).unwrap();
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(0.5, 1.0), Vec2::new(1.0, -0.5), Vec2::new(2.0, 0.0)];
        let c = NurbsCurve::new(kv, pts, vec![1.0, 0.8, 1.2, 1.0]).unwrap();
        let e = c.elevate_to(4).unwrap();
        assert_eq!(e.degree(), 4);
        for k in 0..=25 {
            let t = k as f64 / 25.0;
            assert!(c.point(t).dist(e.point(t)) < 1e-14);
        }
    }

    #[test]
    fn closest_param_recovers_parameter() {
        let c = NurbsCurve::circle(Vec2::new(1.0, 1.0), 0.5, 0.0, 3).unwrap();
        for &t in &[0.05, 0.3, 0.61, 0.9] {
            let (s, d) = c.closest_param(c.point(t));
            assert!(d < 1e-14);
            assert!((s - t).abs() < 1e-10);
        }
    }
}
