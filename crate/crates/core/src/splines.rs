//! Univariate B-splines, NURBS and tensor-product spaces on `[0, 1]`.

use crate::error::{Error, Result};

/// Relative tolerance used to compare knot values.
const KNOT_EPS: f64 = 1e-14;

/// Non-decreasing open knot vector of degree `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() < 2 * degree + 2 {
            return Err(Error::InvalidKnots(format!(
                "{} knots are too few for degree {degree}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be finite and non-decreasing".into()));
        }
        let n = knots.len();
        let (a, b) = (knots[0], knots[n - 1]);
        if b <= a {
            return Err(Error::InvalidKnots("empty parameter domain".into()));
        }
        if knots[..=degree].iter().any(|&k| k != a) || knots[n - 1 - degree..].iter().any(|&k| k != b) {
            return Err(Error::InvalidKnots("knot vector must be open".into()));
        }
        let kv = KnotVector { knots, degree };
        for (t, m) in kv.interior_breaks() {
            if m > degree + 1 {
                return Err(Error::InvalidMultiplicity(format!(
                    "interior knot {t} has multiplicity {m} > p + 1"
                )));
            }
        }
        Ok(kv)
    }

    /// Open knot vector on `[0, 1]` with `segments` equal spans and interior
    /// knots repeated `p - r` times.
    pub fn open_uniform(p: usize, segments: usize, r: isize) -> Result<Self> {
        if r >= p as isize || r < 0 {
            return Err(Error::InvalidRegularity(format!("r = {r} with p = {p}")));
        }
        if segments == 0 {
            return Err(Error::InvalidKnots("at least one segment is required".into()));
        }
        let mult = (p as isize - r) as usize;
        let mut knots = vec![0.0; p + 1];
        for k in 1..segments {
            let t = k as f64 / segments as f64;
            knots.extend(std::iter::repeat_n(t, mult));
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        KnotVector::new(knots, p)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Distinct knot values including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if out.last().is_none_or(|&l| k > l) {
                out.push(k);
            }
        }
        out
    }

    /// Distinct interior knots with their multiplicities.
    pub fn interior_breaks(&self) -> Vec<(f64, usize)> {
        let (a, b) = (self.start(), self.end());
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            if k <= a || k >= b {
                continue;
            }
            match out.last_mut() {
                Some((t, m)) if *t == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    pub fn multiplicity(&self, t: f64) -> usize {
        let tol = KNOT_EPS * (self.end() - self.start());
        self.knots.iter().filter(|&&k| (k - t).abs() <= tol).count()
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.num_basis())
                .map(|j| 0.5 * (self.knots[j] + self.knots[j + 1]))
                .collect();
        }
        (0..self.num_basis())
            .map(|j| self.knots[j + 1..=j + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Index `k` of the knot span `[u_k, u_{k+1})` containing `t`; the last
    /// non-empty span is closed on the right.
    pub fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.num_basis();
        if t >= self.knots[n] {
            let mut k = n - 1;
            while k > p && self.knots[k] == self.knots[k + 1] {
                k -= 1;
            }
            return k;
        }
        if t <= self.knots[p] {
            let mut k = p;
            while self.knots[k + 1] <= t && k < n - 1 {
                k += 1;
            }
            return k;
        }
        let (mut lo, mut hi) = (p, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values and derivatives up to order `nd` of the `p + 1` basis functions
    /// that are non-zero on `span`. Row `k` holds the `k`-th derivatives of
    /// `B_{span-p} .. B_{span}`.
    pub fn ders_on_span(&self, span: usize, t: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd.min(p) {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nd.min(p) {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        ders
    }

    /// Single basis function `B_{i,p}(t)` by the Cox-de Boor recursion.
    pub fn basis(&self, i: usize, t: f64) -> Result<f64> {
        self.check_index(i)?;
        if t < self.start() || t > self.end() {
            return Ok(0.0);
        }
        Ok(self.cox_de_boor(i, self.degree, t))
    }

    /// `order`-th derivative of `B_{i,p}` by recursion on the degree.
    pub fn basis_deriv(&self, i: usize, t: f64, order: usize) -> Result<f64> {
        self.check_index(i)?;
        if order > self.degree {
            return Err(Error::UnsupportedOrder(order));
        }
        if t < self.start() || t > self.end() {
            return Ok(0.0);
        }
        Ok(self.deriv_rec(i, self.degree, t, order))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_basis() {
            return Err(Error::InvalidIndex(format!(
                "basis index {i} out of range 0..{}",
                self.num_basis()
            )));
        }
        Ok(())
    }

    fn cox_de_boor(&self, i: usize, p: usize, t: f64) -> f64 {
        let u = &self.knots;
        if p == 0 {
            let last = self.end();
            if u[i] <= t && t < u[i + 1] {
                return 1.0;
            }
            // Right-closed last non-empty span.
            if t == last && u[i + 1] == last && u[i] < last {
                return 1.0;
            }
            return 0.0;
        }
        let mut v = 0.0;
        let d1 = u[i + p] - u[i];
        if d1 > 0.0 {
            v += (t - u[i]) / d1 * self.cox_de_boor(i, p - 1, t);
        }
        let d2 = u[i + p + 1] - u[i + 1];
        if d2 > 0.0 {
            v += (u[i + p + 1] - t) / d2 * self.cox_de_boor(i + 1, p - 1, t);
        }
        v
    }

    fn deriv_rec(&self, i: usize, p: usize, t: f64, order: usize) -> f64 {
        if order == 0 {
            return self.cox_de_boor(i, p, t);
        }
        let u = &self.knots;
        let mut v = 0.0;
        let d1 = u[i + p] - u[i];
        if d1 > 0.0 {
            v += p as f64 / d1 * self.deriv_rec(i, p - 1, t, order - 1);
        }
        let d2 = u[i + p + 1] - u[i + 1];
        if d2 > 0.0 {
            v -= p as f64 / d2 * self.deriv_rec(i + 1, p - 1, t, order - 1);
        }
        v
    }

    /// Knot vector with `t` inserted `times` times.
    pub fn with_inserted(&self, t: f64, times: usize) -> Result<Self> {
        if t <= self.start() || t >= self.end() {
            return Err(Error::InvalidKnots(format!("insertion point {t} is not interior")));
        }
        if self.multiplicity(t) + times > self.degree + 1 {
            return Err(Error::InvalidMultiplicity(format!(
                "inserting {t} {times} times exceeds p + 1"
            )));
        }
        let pos = self.knots.partition_point(|&k| k <= t);
        let mut knots = self.knots.clone();
        for _ in 0..times {
            knots.insert(pos, t);
        }
        KnotVector::new(knots, self.degree)
    }

    /// Knot vector mirrored by `t -> a + b - t`.
    pub fn reversed(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        let knots = self.knots.iter().rev().map(|&k| a + b - k).collect();
        KnotVector { knots, degree: self.degree }
    }

    /// Affine reparametrization onto `[0, 1]`.
    pub fn normalized(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        let knots = self
            .knots
            .iter()
            .map(|&k| if k == b { 1.0 } else { (k - a) / (b - a) })
            .collect();
        KnotVector { knots, degree: self.degree }
    }

    /// Whether both vectors agree knot by knot within `tol`.
    pub fn approx_eq(&self, other: &KnotVector, tol: f64) -> bool {
        self.degree == other.degree
            && self.knots.len() == other.knots.len()
            && self.knots.iter().zip(&other.knots).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Values and derivatives of the non-zero functions of a univariate (rational)
/// basis at one parameter.
#[derive(Debug, Clone)]
pub struct UniEval {
    /// Index of the first non-zero function.
    pub first: usize,
    /// `ders[k][a]` is the `k`-th derivative of function `first + a`.
    pub ders: Vec<Vec<f64>>,
}

/// Evaluates the basis defined by `kv` (rational when `weights` is given) at `t`.
pub fn eval_univariate(kv: &KnotVector, weights: Option<&[f64]>, t: f64, nd: usize) -> UniEval {
    let p = kv.degree();
    let span = kv.find_span(t);
    let mut ders = kv.ders_on_span(span, t, nd);
    let first = span - p;
    if let Some(w) = weights {
        rationalize(&mut ders, &w[first..=span]);
    }
    UniEval { first, ders }
}

/// Turns B-spline derivatives into NURBS derivatives in place.
fn rationalize(ders: &mut [Vec<f64>], w: &[f64]) {
    let nd = ders.len() - 1;
    let mut wd = [0.0; 3];
    for k in 0..=nd.min(2) {
        wd[k] = ders[k].iter().zip(w).map(|(b, w)| b * w).sum();
    }
    let wsum = wd[0];
    for a in 0..w.len() {
        let b0 = w[a] * ders[0][a];
        let n0 = b0 / wsum;
        if nd >= 1 {
            let b1 = w[a] * ders[1][a];
            let n1 = (b1 - n0 * wd[1]) / wsum;
            if nd >= 2 {
                let b2 = w[a] * ders[2][a];
                ders[2][a] = (b2 - 2.0 * n1 * wd[1] - n0 * wd[2]) / wsum;
            }
            ders[1][a] = n1;
        }
        ders[0][a] = n0;
    }
}

/// Single NURBS basis function `w_i B_i / sum_k w_k B_k` or its first or
/// second derivative, computed from individually evaluated B-splines.
pub fn nurbs_basis(kv: &KnotVector, weights: &[f64], i: usize, t: f64, order: usize) -> Result<f64> {
    if weights.len() != kv.num_basis() {
        return Err(Error::InvalidWeights("one weight per basis function is required".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights("weights must be positive".into()));
    }
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    kv.basis(i, t)?;
    let n = kv.num_basis();
    let mut w = [0.0; 3];
    for k in 0..n {
        for d in 0..=order {
            let b = if d == 0 { kv.basis(k, t)? } else if d > kv.degree() { 0.0 } else { kv.basis_deriv(k, t, d)? };
            w[d] += weights[k] * b;
        }
    }
    let b = |d: usize| -> Result<f64> {
        if d == 0 {
            kv.basis(i, t)
        } else if d > kv.degree() {
            Ok(0.0)
        } else {
            kv.basis_deriv(i, t, d)
        }
    };
    let wi = weights[i];
    let v = match order {
        0 => wi * b(0)? / w[0],
        1 => wi * (b(1)? * w[0] - b(0)? * w[1]) / (w[0] * w[0]),
        _ => {
            let (b0, b1, b2) = (b(0)?, b(1)?, b(2)?);
            wi * (b2 / w[0] - 2.0 * b1 * w[1] / (w[0] * w[0]) - b0 * w[2] / (w[0] * w[0])
                + 2.0 * b0 * w[1] * w[1] / (w[0] * w[0] * w[0]))
        }
    };
    Ok(v)
}

/// Values, gradients and Hessians (parametric) of the non-zero functions of a
/// tensor-product space at one point.
#[derive(Debug, Clone, Default)]
pub struct BasisEval {
    /// `(i, j)` indices of the functions, `i` in the first (angular) direction.
    pub index: Vec<(usize, usize)>,
    pub value: Vec<f64>,
    /// `[d/dzeta, d/dxi]`.
    pub grad: Vec<[f64; 2]>,
    /// `[zeta-zeta, zeta-xi, xi-xi]`.
    pub hess: Vec<[f64; 3]>,
}

impl BasisEval {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

/// Tensor product of a (possibly rational) basis in `zeta` with a polynomial
/// B-spline basis in `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    pub zeta: KnotVector,
    pub xi: KnotVector,
    /// Weights of the `zeta` direction; the rational part depends on `zeta` only.
    pub weights: Option<Vec<f64>>,
}

impl TensorSplineSpace {
    pub fn new(zeta: KnotVector, xi: KnotVector, weights: Option<Vec<f64>>) -> Result<Self> {
        if let Some(w) = &weights {
            if w.len() != zeta.num_basis() {
                return Err(Error::InvalidWeights(format!(
                    "{} weights for {} functions",
                    w.len(),
                    zeta.num_basis()
                )));
            }
            if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidWeights("weights must be positive".into()));
            }
        }
        Ok(TensorSplineSpace { zeta, xi, weights })
    }

    pub fn n1(&self) -> usize {
        self.zeta.num_basis()
    }

    pub fn n2(&self) -> usize {
        self.xi.num_basis()
    }

    pub fn dim(&self) -> usize {
        self.n1() * self.n2()
    }

    /// All functions non-zero at `(zeta, xi)` with derivatives up to `order`.
    pub fn eval(&self, zeta: f64, xi: f64, order: usize) -> Result<BasisEval> {
        if order > 2 {
            return Err(Error::UnsupportedOrder(order));
        }
        let u = eval_univariate(&self.zeta, self.weights.as_deref(), zeta, order);
        let v = eval_univariate(&self.xi, None, xi, order);
        Ok(tensor_combine(&u, &v, order))
    }
}

/// Tensor product of two univariate evaluations.
pub fn tensor_combine(u: &UniEval, v: &UniEval, order: usize) -> BasisEval {
    let pu = u.ders[0].len();
    let pv = v.ders[0].len();
    let mut out = BasisEval {
        index: Vec::with_capacity(pu * pv),
        value: Vec::with_capacity(pu * pv),
        grad: Vec::with_capacity(if order >= 1 { pu * pv } else { 0 }),
        hess: Vec::with_capacity(if order >= 2 { pu * pv } else { 0 }),
    };
    let du = |k: usize, a: usize| if k < u.ders.len() { u.ders[k][a] } else { 0.0 };
    let dv = |k: usize, b: usize| if k < v.ders.len() { v.ders[k][b] } else { 0.0 };
    for a in 0..pu {
        for b in 0..pv {
            out.index.push((u.first + a, v.first + b));
            out.value.push(du(0, a) * dv(0, b));
            if order >= 1 {
                out.grad.push([du(1, a) * dv(0, b), du(0, a) * dv(1, b)]);
            }
            if order >= 2 {
                out.hess.push([du(2, a) * dv(0, b), du(1, a) * dv(1, b), du(0, a) * dv(2, b)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(k: &[f64], p: usize) -> KnotVector {
        KnotVector::new(k.to_vec(), p).unwrap()
    }

    #[test]
    fn open_uniform_layout() {
        let k = KnotVector::open_uniform(3, 4, 1).unwrap();
        assert_eq!(k.knots().len(), 3 + 1 + 3 * 2 + 3 + 1);
        assert_eq!(k.num_basis(), 3 + 1 + 3 * 2);
        assert_eq!(k.multiplicity(0.5), 2);
        assert!(KnotVector::open_uniform(3, 4, 3).is_err());
        assert!(KnotVector::open_uniform(3, 4, -1).is_err());
    }

    #[test]
    fn quadratic_bernstein_values() {
        let k = kv(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2);
        let t = 0.3;
        let expect = [(1.0 - t) * (1.0 - t), 2.0 * t * (1.0 - t), t * t];
        for (i, e) in expect.iter().enumerate() {
            assert!((k.basis(i, t).unwrap() - e).abs() < 1e-15);
        }
        assert_eq!(k.basis(2, 1.0).unwrap(), 1.0);
        assert_eq!(k.basis(0, 1.0).unwrap(), 0.0);
        assert!(k.basis(3, 0.5).is_err());
    }

    #[test]
    fn fast_path_matches_recursion() {
        let k = kv(&[0.0, 0.0, 0.0, 0.0, 0.2, 0.5, 0.5, 0.8, 1.0, 1.0, 1.0, 1.0], 3);
        for &t in &[0.0, 0.1, 0.2, 0.35, 0.5, 0.77, 0.99, 1.0] {
            let e = eval_univariate(&k, None, t, 2);
            for a in 0..=3 {
                let i = e.first + a;
                for d in 0..=2 {
                    let r = k.basis_deriv(i, t, d).unwrap();
                    assert!((r - e.ders[d][a]).abs() < 1e-10, "t={t} i={i} d={d}");
                }
            }
        }
    }

    #[test]
    fn rational_fast_path_matches_reference() {
        let k = kv(&[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0], 2);
        let w = [1.0, 0.7, 1.3, 0.9];
        for &t in &[0.0, 0.25, 0.5, 0.8, 1.0] {
            let e = eval_univariate(&k, Some(&w), t, 2);
            for a in 0..=2 {
                for d in 0..=2 {
                    let r = nurbs_basis(&k, &w, e.first + a, t, d).unwrap();
                    assert!((r - e.ders[d][a]).abs() < 1e-11, "t={t} a={a} d={d}");
                }
            }
        }
    }

    #[test]
    fn greville_of_bezier() {
        let k = KnotVector::open_uniform(3, 1, 2).unwrap();
        let g = k.greville();
        assert_eq!(g.len(), 4);
        for (j, v) in g.iter().enumerate() {
            assert!((v - j as f64 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn span_is_right_closed() {
        let k = KnotVector::open_uniform(2, 3, 1).unwrap();
        assert_eq!(k.find_span(1.0), k.num_basis() - 1);
        assert_eq!(k.find_span(0.0), 2);
        assert_eq!(k.find_span(1.0 / 3.0), 3);
    }
}
