//! Trimmed domains: exact splitting of boundary and trimming curves, loop
//! reassembly and decomposition into star-shaped blocks along straight cuts.

use crate::curve::NurbsCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sbgeom::{BcTag, Block, BoundaryCurve, DomainSpec, MultiPatchDomain};

/// Splits `curve` at `params` by knot insertion up to multiplicity `p + 1`;
/// every segment is reparametrized to `[0, 1]`. Parameters at existing
/// breaks of full multiplicity are accepted.
pub fn split_curve(curve: &NurbsCurve, params: &[f64]) -> Result<Vec<NurbsCurve>> {
    let mut ts = params.to_vec();
    ts.sort_by(f64::total_cmp);
    if ts.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidIndex("split parameters must lie strictly inside (0, 1)".into()));
    }
    if ts.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidIndex("split parameters must be distinct".into()));
    }
    curve.split(&ts)
}

/// Point where a boundary curve meets the trimming curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    /// Index of the boundary curve in the outer loop.
    pub curve: usize,
    /// Parameter on the boundary curve.
    pub zeta: f64,
    /// Parameter on the trimming curve.
    pub s: f64,
}

/// Trimming curve crossing the outer boundary twice.
#[derive(Debug, Clone)]
pub struct BoundaryTrim {
    pub curve: BoundaryCurve,
    pub intersections: [Intersection; 2],
    /// Intersection at which the kept part of the outer boundary starts,
    /// followed counterclockwise up to the other one.
    pub keep_from: usize,
}

/// Straight cut between two points of the trimmed domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutLine {
    pub a: Vec2,
    pub b: Vec2,
}

/// Trims, holes and cut lines applied to an outer boundary loop, with one
/// scaling center per resulting block.
#[derive(Debug, Clone, Default)]
pub struct TrimSpec {
    pub trims: Vec<BoundaryTrim>,
    /// Closed interior trimming loops.
    pub holes: Vec<Vec<BoundaryCurve>>,
    pub cuts: Vec<CutLine>,
    pub centers: Vec<Vec2>,
}

const INTERSECTION_TOL: f64 = 1e-8;

fn loop_scale(curves: &[BoundaryCurve]) -> f64 {
    let pts: Vec<Vec2> = curves.iter().flat_map(|c| c.curve.points().iter().copied()).collect();
    let mut ext: f64 = 0.0;
    for a in &pts {
        for b in pts.iter().take(64) {
            ext = ext.max(a.dist(*b));
        }
    }
    ext.max(1.0)
}

fn signed_area(curves: &[BoundaryCurve]) -> f64 {
    let pts: Vec<Vec2> = curves.iter().flat_map(|c| {
        let s = c.curve.sample(64);
        s[..s.len() - 1].to_vec()
    }).collect();
    let n = pts.len();
    (0..n).map(|k| pts[k].cross(pts[(k + 1) % n])).sum::<f64>() / 2.0
}

fn reverse_loop(curves: &[BoundaryCurve]) -> Vec<BoundaryCurve> {
    curves
        .iter()
        .rev()
        .map(|c| BoundaryCurve { curve: c.curve.reversed(), ..c.clone() })
        .collect()
}

fn check_closed(curves: &[BoundaryCurve], what: &str, tol: f64) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Topology(format!("{what} is empty")));
    }
    for k in 0..curves.len() {
        let next = &curves[(k + 1) % curves.len()];
        if curves[k].curve.end_point().dist(next.curve.start_point()) > tol {
            return Err(Error::Topology(format!("{what} is open after curve {k}")));
        }
    }
    Ok(())
}

/// Piece of an outer curve: original index and parameter range.
#[derive(Debug, Clone)]
struct Piece {
    orig: usize,
    range: (f64, f64),
    curve: BoundaryCurve,
}

/// Outer loop after the boundary trims, counterclockwise.
pub fn trimmed_boundary(outer: &[BoundaryCurve], trims: &[BoundaryTrim]) -> Result<Vec<BoundaryCurve>> {
    let scale = loop_scale(outer);
    check_closed(outer, "outer boundary", 1e-12 * scale)?;
    let outer = if signed_area(outer) < 0.0 { reverse_loop(outer) } else { outer.to_vec() };
    for (k, t) in trims.iter().enumerate() {
        if t.keep_from > 1 {
            return Err(Error::Spec(format!("trim {k}: keep_from must be 0 or 1")));
        }
        for (m, x) in t.intersections.iter().enumerate() {
            let c = outer
                .get(x.curve)
                .ok_or_else(|| Error::Spec(format!("trim {k}: intersection {m} names missing curve {}", x.curve)))?;
            if !(0.0..=1.0).contains(&x.zeta) || !(0.0..=1.0).contains(&x.s) {
                return Err(Error::Spec(format!("trim {k}: intersection {m} parameters outside [0, 1]")));
            }
            let d = c.curve.point(x.zeta).dist(t.curve.curve.point(x.s));
            if d > INTERSECTION_TOL * scale {
                return Err(Error::Spec(format!("trim {k}: intersection {m} points differ by {d:.3e}")));
            }
        }
    }
    let mut cuts: Vec<Vec<f64>> = vec![Vec::new(); outer.len()];
    for t in trims {
        for x in &t.intersections {
            if x.zeta > 0.0 && x.zeta < 1.0 {
                cuts[x.curve].push(x.zeta);
            }
        }
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for (k, c) in outer.iter().enumerate() {
        let mut ts = cuts[k].clone();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let segs = if ts.is_empty() { vec![c.curve.clone()] } else { split_curve(&c.curve, &ts)? };
        let mut bounds = vec![0.0];
        bounds.extend(ts);
        bounds.push(1.0);
        for (seg, w) in segs.into_iter().zip(bounds.windows(2)) {
            pieces.push(Piece { orig: k, range: (w[0], w[1]), curve: BoundaryCurve { curve: seg, ..c.clone() } });
        }
    }
    for (k, t) in trims.iter().enumerate() {
        let start = &t.intersections[t.keep_from];
        let stop = &t.intersections[1 - t.keep_from];
        let begins_at = |x: &Intersection| {
            pieces.iter().position(|p| {
                (p.orig == x.curve && p.range.0 == x.zeta)
                    || (x.zeta == 1.0 && p.orig == (x.curve + 1) % outer.len() && p.range.0 == 0.0)
            })
        };
        let kept_first = begins_at(start).ok_or_else(|| Error::Topology(format!("trim {k}: start point is not on the loop")))?;
        let removed_first =
            begins_at(stop).ok_or_else(|| Error::Topology(format!("trim {k}: end point is not on the loop")))?;
        let n = pieces.len();
        let removed_count = (kept_first + n - removed_first) % n;
        if removed_count == 0 {
            return Err(Error::Topology(format!("trim {k} removes nothing")));
        }
        let (s0, s1) = (stop.s, start.s);
        let (lo, hi) = (s0.min(s1), s0.max(s1));
        if hi - lo <= 0.0 {
            return Err(Error::Spec(format!("trim {k}: both intersections at the same trimming parameter")));
        }
        let mut inner: Vec<f64> = Vec::new();
        if lo > 0.0 {
            inner.push(lo);
        }
        if hi < 1.0 {
            inner.push(hi);
        }
        let segs = if inner.is_empty() { vec![t.curve.curve.clone()] } else { split_curve(&t.curve.curve, &inner)? };
        let mid = segs[usize::from(lo > 0.0)].clone();
        let mid = if s0 > s1 { mid.reversed() } else { mid };
        let trim_piece = Piece { orig: usize::MAX, range: (0.0, 0.0), curve: BoundaryCurve { curve: mid, ..t.curve.clone() } };
        let mut next: Vec<Piece> = Vec::with_capacity(n - removed_count + 1);
        let mut k2 = kept_first;
        while k2 != removed_first {
            next.push(pieces[k2].clone());
            k2 = (k2 + 1) % n;
        }
        next.push(trim_piece);
        pieces = next;
    }
    let out: Vec<BoundaryCurve> = pieces.into_iter().map(|p| p.curve).collect();
    check_closed(&out, "trimmed boundary", INTERSECTION_TOL * scale)?;
    Ok(out)
}

#[derive(Debug, Clone)]
enum EdgeKind {
    Boundary(BoundaryCurve),
    Cut,
}

#[derive(Debug, Clone)]
struct GraphEdge {
    curve: NurbsCurve,
    kind: EdgeKind,
}

struct Graph {
    vertices: Vec<Vec2>,
    edges: Vec<GraphEdge>,
    ends: Vec<(usize, usize)>,
}

fn vertex_id(vertices: &mut Vec<Vec2>, x: Vec2, tol: f64) -> usize {
    if let Some(k) = vertices.iter().position(|v| v.dist(x) <= tol) {
        k
    } else {
        vertices.push(x);
        vertices.len() - 1
    }
}

/// Splits boundary curves at cut end points lying in their interiors and
/// returns the cut end points snapped onto the boundary.
fn insert_cut_points(
    loops: &mut [Vec<BoundaryCurve>],
    cuts: &[CutLine],
    tol: f64,
) -> Result<Vec<CutLine>> {
    let mut snapped = cuts.to_vec();
    for cut in snapped.iter_mut() {
        for end in [&mut cut.a, &mut cut.b] {
            let vertex = loops
                .iter()
                .flatten()
                .map(|c| c.curve.start_point())
                .find(|x| x.dist(*end) <= tol);
            if let Some(x) = vertex {
                *end = x;
                continue;
            }
            let mut done = false;
            for lp in loops.iter_mut() {
                if done {
                    break;
                }
                for k in 0..lp.len() {
                    let c = &lp[k].curve;
                    let (t, d) = c.closest_param(*end);
                    if d <= tol && t > 0.0 && t < 1.0 {
                        let segs = split_curve(c, &[t])?;
                        *end = segs[0].end_point();
                        let meta = lp[k].clone();
                        lp.splice(
                            k..=k,
                            segs.into_iter().map(|s| BoundaryCurve { curve: s, ..meta.clone() }),
                        );
                        done = true;
                        break;
                    }
                }
            }
        }
    }
    Ok(snapped)
}

/// Straight pieces of the cuts after splitting them at crossings and at the
/// end points of other cuts.
fn cut_pieces(cuts: &[CutLine], tol: f64) -> Result<Vec<(Vec2, Vec2)>> {
    let mut out = Vec::new();
    for (k, c) in cuts.iter().enumerate() {
        let d = c.b - c.a;
        let len2 = d.dot(d);
        if len2.sqrt() <= tol {
            return Err(Error::Spec(format!("cut line {k} has zero length")));
        }
        let mut ts = vec![0.0, 1.0];
        for (m, o) in cuts.iter().enumerate() {
            if m == k {
                continue;
            }
            for x in [o.a, o.b] {
                let t = (x - c.a).dot(d) / len2;
                if t > 0.0 && t < 1.0 && (c.a + d * t).dist(x) <= tol {
                    ts.push(t);
                }
            }
            if let Some((t, u)) = segment_crossing(c.a, c.b, o.a, o.b) {
                let inside = |v: f64| v > 1e-9 && v < 1.0 - 1e-9;
                if inside(t) && inside(u) {
                    ts.push(t);
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() * len2.sqrt() <= tol);
        let pts: Vec<Vec2> = ts
            .iter()
            .map(|&t| if t == 0.0 { c.a } else if t == 1.0 { c.b } else { c.a + d * t })
            .collect();
        for w in pts.windows(2) {
            out.push((w[0], w[1]));
        }
    }
    Ok(out)
}

fn segment_crossing(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> Option<(f64, f64)> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() < 1e-300 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    Some((t, u))
}

fn build_graph(loops: &[Vec<BoundaryCurve>], cuts: &[(Vec2, Vec2)], tol: f64) -> Graph {
    let mut g = Graph { vertices: Vec::new(), edges: Vec::new(), ends: Vec::new() };
    for lp in loops {
        for c in lp {
            let a = vertex_id(&mut g.vertices, c.curve.start_point(), tol);
            let b = vertex_id(&mut g.vertices, c.curve.end_point(), tol);
            g.edges.push(GraphEdge { curve: c.curve.clone(), kind: EdgeKind::Boundary(c.clone()) });
            g.ends.push((a, b));
        }
    }
    for &(p, q) in cuts {
        let a = vertex_id(&mut g.vertices, p, tol);
        let b = vertex_id(&mut g.vertices, q, tol);
        let line = NurbsCurve::line(g.vertices[a], g.vertices[b], 1).expect("cut line");
        g.edges.push(GraphEdge { curve: line, kind: EdgeKind::Cut });
        g.ends.push((a, b));
    }
    g
}

/// Direction leaving the start of a curve, from a short chord.
fn leaving_direction(c: &NurbsCurve) -> Vec2 {
    let p0 = c.start_point();
    let d = c.eval(0.0).d1;
    let chord = c.point(1e-4) - p0;
    let v = if chord.norm() > 0.0 { chord } else { d };
    v.normalized()
}

/// Faces to the left of the directed edges, as lists of half-edges
/// `(edge, forward)`.
fn trace_faces(g: &Graph) -> Vec<Vec<(usize, bool)>> {
    let nh = 2 * g.edges.len();
    let tail = |h: usize| if h % 2 == 0 { g.ends[h / 2].0 } else { g.ends[h / 2].1 };
    let curve_of = |h: usize| {
        let c = &g.edges[h / 2].curve;
        if h % 2 == 0 { c.clone() } else { c.reversed() }
    };
    let mut out_of: Vec<Vec<(f64, usize)>> = vec![Vec::new(); g.vertices.len()];
    for h in 0..nh {
        let d = leaving_direction(&curve_of(h));
        out_of[tail(h)].push((d.y.atan2(d.x), h));
    }
    for v in out_of.iter_mut() {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let next = |h: usize| {
        let twin = h ^ 1;
        let v = tail(twin);
        let list = &out_of[v];
        let k = list.iter().position(|&(_, e)| e == twin).unwrap();
        list[(k + list.len() - 1) % list.len()].1
    };
    let mut seen = vec![false; nh];
    let mut faces = Vec::new();
    for h0 in 0..nh {
        if seen[h0] {
            continue;
        }
        let mut face = Vec::new();
        let mut h = h0;
        while !seen[h] {
            seen[h] = true;
            face.push((h / 2, h % 2 == 0));
            h = next(h);
        }
        faces.push(face);
    }
    faces
}

fn winding_number(poly: &[Vec2], x: Vec2) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if a.y <= x.y {
            if b.y > x.y && (b - a).cross(x - a) > 0.0 {
                w += 1;
            }
        } else if b.y <= x.y && (b - a).cross(x - a) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Checks that every curve of the block sees its center on the left.
pub fn validate_star_shape(block: &Block, id: usize) -> Result<()> {
    for (k, c) in block.curves.iter().enumerate() {
        for m in 0..=32 {
            let t = m as f64 / 32.0;
            let e = c.curve.eval(t);
            let star = (e.pos - block.center).cross(e.d1);
            if !(star > 0.0) && !(star == 0.0 && e.pos.dist(block.center) > 0.0) {
                return Err(Error::NotStarShaped(format!(
                    "block {id}: curve {k} is not visible from the center at t = {t}"
                )));
            }
        }
    }
    Ok(())
}

/// Star-shaped blocks of the trimmed domain, one per face of the cut graph.
pub fn decompose(outer: &[BoundaryCurve], spec: &TrimSpec) -> Result<DomainSpec> {
    let scale = loop_scale(outer);
    let tol = 1e-9 * scale;
    let mut loops = vec![trimmed_boundary(outer, &spec.trims)?];
    for (k, hole) in spec.holes.iter().enumerate() {
        check_closed(hole, &format!("hole {k}"), 1e-12 * scale)?;
        loops.push(if signed_area(hole) > 0.0 { reverse_loop(hole) } else { hole.clone() });
    }
    let cuts = insert_cut_points(&mut loops, &spec.cuts, tol)?;
    let pieces = cut_pieces(&cuts, tol)?;
    let g = build_graph(&loops, &pieces, tol);
    let mut blocks = Vec::new();
    let mut used = vec![false; spec.centers.len()];
    for face in trace_faces(&g) {
        let exterior = face.iter().any(|&(e, fwd)| matches!(g.edges[e].kind, EdgeKind::Boundary(_)) && !fwd);
        let interior = face.iter().any(|&(e, fwd)| !matches!(g.edges[e].kind, EdgeKind::Boundary(_)) || fwd);
        if exterior {
            if face.iter().any(|&(e, fwd)| matches!(g.edges[e].kind, EdgeKind::Boundary(_)) && fwd) {
                return Err(Error::Topology("a region is bounded by more than one loop; add cut lines".into()));
            }
            continue;
        }
        if !interior {
            continue;
        }
        let curves: Vec<BoundaryCurve> = face
            .iter()
            .map(|&(e, fwd)| {
                let c = if fwd { g.edges[e].curve.clone() } else { g.edges[e].curve.reversed() };
                match &g.edges[e].kind {
                    EdgeKind::Boundary(b) => BoundaryCurve { curve: c, ..b.clone() },
                    EdgeKind::Cut => BoundaryCurve::new(c, BcTag::Free),
                }
            })
            .collect();
        if signed_area(&curves) <= 0.0 {
            return Err(Error::Topology("a region is bounded by more than one loop; add cut lines".into()));
        }
        let poly: Vec<Vec2> = curves.iter().flat_map(|c| {
            let s = c.curve.sample(64);
            s[..s.len() - 1].to_vec()
        }).collect();
        let inside: Vec<usize> = (0..spec.centers.len())
            .filter(|&k| winding_number(&poly, spec.centers[k]) != 0)
            .collect();
        let id = blocks.len();
        let center = match inside.as_slice() {
            [k] => {
                used[*k] = true;
                spec.centers[*k]
            }
            [] => return Err(Error::Spec(format!("block {id} contains no scaling center"))),
            more => return Err(Error::Spec(format!("block {id} contains {} scaling centers", more.len()))),
        };
        let block = Block::new(center, curves);
        validate_star_shape(&block, id)?;
        blocks.push(block);
    }
    if let Some(k) = used.iter().position(|&u| !u) {
        return Err(Error::Spec(format!("scaling center {k} lies in no block")));
    }
    Ok(DomainSpec { blocks })
}

/// Trimmed and decomposed domain discretized with degree `p`, regularity
/// `r` and `s` spans per curve piece.
pub fn assemble_trimmed_domain(
    outer: &[BoundaryCurve],
    spec: &TrimSpec,
    p: usize,
    r: isize,
    s: usize,
) -> Result<MultiPatchDomain> {
    decompose(outer, spec)?.discretize(p, r, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(bc: BcTag) -> Vec<BoundaryCurve> {
        let c = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        (0..4).map(|k| BoundaryCurve::new(NurbsCurve::line(c[k], c[(k + 1) % 4], 1).unwrap(), bc)).collect()
    }

    #[test]
    fn split_line_is_exact() {
        let l = NurbsCurve::line(Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0), 3).unwrap();
        let s = split_curve(&l, &[0.5]).unwrap();
        assert_eq!(s.len(), 2);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!(s[0].point(t).dist(l.point(0.5 * t)) < 1e-14);
            assert!(s[1].point(t).dist(l.point(0.5 + 0.5 * t)) < 1e-14);
        }
        assert!(split_curve(&l, &[0.0]).is_err());
        assert!(split_curve(&l, &[0.3, 0.3]).is_err());
        let again = split_curve(&s[0], &[0.5]).unwrap();
        assert_eq!(again.len(), 2);
    }

    #[test]
    fn corner_trim_gives_five_curves() {
        let outer = square(BcTag::Clamped);
        let arc = NurbsCurve::arc(Vec2::new(1.0, 1.0), 0.5, std::f64::consts::PI, 1.5 * std::f64::consts::PI, 2).unwrap();
        let trim = BoundaryTrim {
            curve: BoundaryCurve::new(arc, BcTag::Free),
            intersections: [
                Intersection { curve: 1, zeta: 0.5, s: 1.0 },
                Intersection { curve: 2, zeta: 0.5, s: 0.0 },
            ],
            keep_from: 1,
        };
        let loop_ = trimmed_boundary(&outer, &[trim.clone()]).unwrap();
        assert_eq!(loop_.len(), 5);
        let area = signed_area(&loop_);
        assert!((area - (1.0 - std::f64::consts::PI / 16.0)).abs() < 1e-3);
        let spec = TrimSpec { trims: vec![trim], centers: vec![Vec2::new(0.35, 0.35)], ..Default::default() };
        let dom = decompose(&outer, &spec).unwrap();
        assert_eq!(dom.blocks.len(), 1);
        assert_eq!(dom.blocks[0].curves.len(), 5);
    }

    #[test]
    fn cut_square_into_two_blocks() {
        let outer = square(BcTag::Clamped);
        let spec = TrimSpec {
            cuts: vec![CutLine { a: Vec2::new(0.5, 0.0), b: Vec2::new(0.5, 1.0) }],
            centers: vec![Vec2::new(0.25, 0.5), Vec2::new(0.75, 0.5)],
            ..Default::default()
        };
        let dom = decompose(&outer, &spec).unwrap();
        assert_eq!(dom.blocks.len(), 2);
        assert!(dom.blocks.iter().all(|b| b.curves.len() == 4));
        let area = assemble_trimmed_domain(&outer, &spec, 3, 1, 2).unwrap().area();
        assert!((area - 1.0).abs() < 1e-12);
        let bad = TrimSpec { centers: vec![Vec2::new(0.25, 0.5)], ..spec.clone() };
        assert!(decompose(&outer, &bad).is_err());
    }

    #[test]
    fn hole_with_cuts_has_exact_area() {
        let outer = square(BcTag::SimplySupported);
        let c = Vec2::new(0.5, 0.5);
        let hole = vec![BoundaryCurve::new(NurbsCurve::circle(c, 0.2, 0.0, 2).unwrap(), BcTag::Free)];
        let cuts = vec![
            CutLine { a: Vec2::new(0.5, 0.0), b: Vec2::new(0.5, 0.3) },
            CutLine { a: Vec2::new(1.0, 0.5), b: Vec2::new(0.7, 0.5) },
            CutLine { a: Vec2::new(0.5, 1.0), b: Vec2::new(0.5, 0.7) },
            CutLine { a: Vec2::new(0.0, 0.5), b: Vec2::new(0.3, 0.5) },
        ];
        let centers = vec![Vec2::new(0.15, 0.15), Vec2::new(0.85, 0.15), Vec2::new(0.85, 0.85), Vec2::new(0.15, 0.85)];
        let spec = TrimSpec { holes: vec![hole.clone()], cuts: cuts.clone(), centers, ..Default::default() };
        let dom = assemble_trimmed_domain(&outer, &spec, 3, 1, 2).unwrap();
        assert_eq!(dom.patches.len(), 20);
        let exact = 1.0 - std::f64::consts::PI * 0.04;
        assert!((dom.area() - exact).abs() < 1e-6, "{}", dom.area());
        let uncut = TrimSpec { holes: vec![hole], centers: vec![Vec2::new(0.1, 0.1)], ..Default::default() };
        assert!(matches!(decompose(&outer, &uncut), Err(Error::Topology(_))));
        let crossing = TrimSpec {
            cuts: vec![CutLine { a: Vec2::new(0.0, 0.0), b: Vec2::new(1.0, 1.0) }, CutLine { a: Vec2::new(1.0, 0.0), b: Vec2::new(0.0, 1.0) }],
            centers: vec![Vec2::new(0.5, 0.2), Vec2::new(0.8, 0.5), Vec2::new(0.5, 0.8), Vec2::new(0.2, 0.5)],
            ..Default::default()
        };
        let dom = decompose(&outer, &crossing).unwrap();
        assert_eq!(dom.blocks.len(), 4);
        assert!(dom.blocks.iter().all(|b| b.curves.len() == 3));
    }
}
