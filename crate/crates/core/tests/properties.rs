use std::f64::consts::PI;

use faer::Mat;
use proptest::prelude::*;
use sbiga_core::coupling::{build_coupled_space, reproduce_affine, CouplingOptions};
use sbiga_core::curve::NurbsCurve;
use sbiga_core::plate::{assemble_stiffness, build_system, solve, AssemblyOptions, LoadSpec, Material, PointLoad, SurfaceLoad};
use sbiga_core::sbgeom::{BcTag, Block, BoundaryCurve, DomainSpec, SbPatch};
use sbiga_core::splines::{nurbs_basis, KnotVector};
use sbiga_core::stabilize::{build_combined_space, CombinedSpaceSpec};
use sbiga_core::trim::{assemble_trimmed_domain, BoundaryTrim, Intersection, TrimSpec};
use sbiga_core::Vec2;

fn knots() -> impl Strategy<Value = KnotVector> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(p, s)| (Just(p), Just(s), 0..p as isize))
        .prop_map(|(p, s, r)| KnotVector::open_uniform(p, s, r).unwrap())
}

fn square(bc: BcTag, x0: Vec2) -> DomainSpec {
    let c = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let curves = (0..4).map(|k| BoundaryCurve::new(NurbsCurve::line(c[k], c[(k + 1) % 4], 3).unwrap(), bc)).collect();
    DomainSpec { blocks: vec![Block::new(x0, curves)] }
}

fn dense_rank(m: &Mat<f64>, rel: f64) -> usize {
    let s = m.singular_values().unwrap();
    let max = s.iter().copied().fold(0.0, f64::max);
    s.iter().filter(|&&x| x > rel * max).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bsplines_partition_unity(kv in knots(), t in 0.0f64..=1.0) {
        let sum: f64 = (0..kv.num_basis()).map(|i| kv.basis(i, t).unwrap()).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn nurbs_partition_unity(kv in knots(), seed in prop::collection::vec(0.2f64..3.0, 32), t in 0.0f64..=1.0) {
        let w: Vec<f64> = (0..kv.num_basis()).map(|i| seed[i % seed.len()]).collect();
        let sum: f64 = (0..kv.num_basis()).map(|i| nurbs_basis(&kv, &w, i, t, 0).unwrap()).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-13);
        let d: f64 = (0..kv.num_basis()).map(|i| nurbs_basis(&kv, &w, i, t, 1).unwrap()).sum();
        prop_assert!(d.abs() <= 1e-10);
    }

    #[test]
    fn derivatives_match_differences(kv in knots(), u in 0.05f64..0.95, order in 1usize..=2) {
        let b = kv.breakpoints();
        let k = ((u * (b.len() - 1) as f64) as usize).min(b.len() - 2);
        let t = b[k] + (0.3 + 0.4 * u) * (b[k + 1] - b[k]);
        let h = 1e-5;
        prop_assume!(order <= kv.degree());
        for i in 0..kv.num_basis() {
            let f = |x: f64| if order == 1 { kv.basis(i, x).unwrap() } else { kv.basis_deriv(i, x, 1).unwrap() };
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            let exact = kv.basis_deriv(i, t, order).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()) * (kv.degree() * kv.degree()) as f64 * (b.len() - 1) as f64);
        }
    }

    #[test]
    fn knot_insertion_keeps_curve(r in 0.2f64..3.0, a in 0.0f64..PI, span in 0.1f64..0.75, t in 0.01f64..0.99, times in 1usize..=2, p in 2usize..=4) {
        let c = NurbsCurve::arc(Vec2::new(0.3, -0.2), r, a, a + span * PI, p).unwrap();
        let d = c.insert_knot(t, times).unwrap();
        for k in 0..=100 {
            let s = k as f64 / 100.0;
            prop_assert!((c.point(s) - d.point(s)).norm() <= 1e-12 * (1.0 + r));
        }
    }

    #[test]
    fn split_pieces_match_parent(r in 0.2f64..3.0, a in 0.0f64..PI, mut ts in prop::collection::vec(0.02f64..0.98, 1..4)) {
        let c = NurbsCurve::circle(Vec2::new(-1.0, 0.5), r, a, 3).unwrap();
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        let pieces = c.split(&ts).unwrap();
        let mut bounds = vec![0.0];
        bounds.extend(&ts);
        bounds.push(1.0);
        prop_assert_eq!(pieces.len(), bounds.len() - 1);
        for (piece, w) in pieces.iter().zip(bounds.windows(2)) {
            for k in 0..200 {
                let s = k as f64 / 199.0;
                let x = piece.point(s);
                prop_assert!((x - c.point(w[0] + s * (w[1] - w[0]))).norm() <= 1e-12 * (1.0 + r));
                prop_assert!(((x - Vec2::new(-1.0, 0.5)).norm() - r).abs() <= 1e-12 * (1.0 + r));
            }
        }
    }

    #[test]
    fn jacobian_matches_differences(cx in -0.3f64..0.3, cy in -0.3f64..0.3, z in 0.05f64..0.95, x in 0.05f64..0.95) {
        let arc = NurbsCurve::arc(Vec2::ZERO, 1.0, 0.1, 1.4, 3).unwrap();
        let patch = SbPatch::with_bezier_radial(arc, Vec2::new(cx, cy), 1.0, 0.0).unwrap();
        let g = patch.geometry(z, x);
        let h = 1e-6;
        let dz = (patch.map(z + h, x) - patch.map(z - h, x)) * (0.5 / h);
        let dx = (patch.map(z, x + h) - patch.map(z, x - h)) * (0.5 / h);
        prop_assert!((dz - g.d_zeta).norm() <= 1e-7);
        prop_assert!((dx - g.d_xi).norm() <= 1e-7);
        prop_assert!((g.det - (g.d_zeta.x * g.d_xi.y - g.d_zeta.y * g.d_xi.x)).abs() <= 1e-14);
        let dzz = (patch.geometry(z + h, x).d_zeta - patch.geometry(z - h, x).d_zeta) * (0.5 / h);
        prop_assert!((dzz - g.dd[0]).norm() <= 1e-6);
    }

    #[test]
    fn rigidity_formula(e in 1.0f64..1e11, nu in 0.0f64..0.49, t in 1e-3f64..1.0) {
        let m = Material::from_thickness(e, nu, t).unwrap();
        let d = e * t.powi(3) / (12.0 * (1.0 - nu * nu));
        prop_assert!((m.d() - d).abs() <= 1e-14 * d);
    }

    #[test]
    fn trimmed_corner_area(rho in 0.1f64..0.8) {
        let outer: Vec<BoundaryCurve> = square(BcTag::Clamped, Vec2::ZERO).blocks[0].curves.clone();
        let arc = NurbsCurve::arc(Vec2::new(1.0, 1.0), rho, PI, 1.5 * PI, 2).unwrap();
        let trim = BoundaryTrim {
            curve: BoundaryCurve::new(arc, BcTag::Free),
            intersections: [Intersection { curve: 1, zeta: 1.0 - rho, s: 1.0 }, Intersection { curve: 2, zeta: rho, s: 0.0 }],
            keep_from: 1,
        };
        let spec = TrimSpec { trims: vec![trim], centers: vec![Vec2::new(0.2, 0.2)], ..Default::default() };
        let dom = assemble_trimmed_domain(&outer, &spec, 3, 1, 2).unwrap();
        let err = (dom.area() - (1.0 - PI * rho * rho / 4.0)).abs();
        prop_assert!(err <= 1e-8, "area error {err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stiffness_symmetric_positive(cx in 0.3f64..0.7, cy in 0.3f64..0.7, nu in 0.0f64..0.45, seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let dom = square(BcTag::Clamped, Vec2::new(cx, cy)).discretize(3, 1, 2).unwrap();
        let cs = build_coupled_space(&dom, &CouplingOptions::default()).unwrap();
        let a = assemble_stiffness(&cs, &Material::from_rigidity(1.0, nu, 1.0).unwrap(), &AssemblyOptions::default()).unwrap();
        let n = a.nrows();
        let x: Vec<f64> = (0..n).map(|i| seed[i % 64] + 0.01 * i as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| seed[(i * 7 + 3) % 64]).collect();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let scale = a.to_dense().norm_l2();
        prop_assert!((dot(&a.mul_vec(&x), &y) - dot(&x, &a.mul_vec(&y))).abs() <= 1e-12 * scale * dot(&x, &x).sqrt() * dot(&y, &y).sqrt());
        prop_assert!(dot(&a.mul_vec(&x), &x) > 0.0);
    }

    #[test]
    fn energy_equals_work(px in 0.2f64..0.8, py in 0.2f64..0.8, f in 0.1f64..10.0) {
        let dom = square(BcTag::SimplySupported, Vec2::new(0.45, 0.55)).discretize(3, 1, 3).unwrap();
        let cs = build_coupled_space(&dom, &CouplingOptions::default()).unwrap();
        let load = LoadSpec { surface: SurfaceLoad::None, points: vec![PointLoad { at: Vec2::new(px, py), magnitude: f }] };
        let sys = build_system(&cs, &Material::from_rigidity(1.0, 0.3, 1.0).unwrap(), &load, &AssemblyOptions::default()).unwrap();
        let sol = solve(&sys).unwrap();
        let energy: f64 = sol.coeffs.iter().zip(sys.matrix.mul_vec(&sol.coeffs)).map(|(a, b)| a * b).sum();
        let work: f64 = sol.coeffs.iter().zip(&sys.rhs).map(|(a, b)| a * b).sum();
        prop_assert!(energy > 0.0);
        prop_assert!((energy - work).abs() <= 1e-9 * work.abs());
    }

    #[test]
    fn combined_space_independent_and_affine(cx in 0.3f64..0.7, cy in 0.3f64..0.7, fine in 2usize..=4) {
        let spec = square(BcTag::Free, Vec2::new(cx, cy));
        let (f, c) = CombinedSpaceSpec::new(3, 1, fine).discretize(&spec).unwrap();
        let cs = build_combined_space(&f, &c, &CouplingOptions::default()).unwrap();
        let t = cs.m0.matrix.to_dense() * cs.m1.to_csr().to_dense();
        prop_assert_eq!(dense_rank(&t, 1e-10), cs.n6());
        for (a, b, cc) in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)] {
            prop_assert!(reproduce_affine(&cs, a, b, cc).unwrap().1 <= 1e-10);
        }
    }
}

#[test]
fn quarter_circle_split_stays_on_circle() {
    let c = NurbsCurve::arc(Vec2::ZERO, 1.0, 0.0, 0.5 * PI, 2).unwrap();
    let pieces = c.split(&[0.3]).unwrap();
    for piece in &pieces {
        for k in 0..200 {
            let x = piece.point(k as f64 / 199.0);
            assert!((x.norm() - 1.0).abs() <= 1e-12);
        }
    }
    assert!((pieces[0].end_point() - c.point(0.3)).norm() <= 1e-12);
}
