use nalgebra::Rotation2;
use proptest::prelude::*;
use svstokes::classify::*;
use svstokes::fields::{
    divergence_at, local_interpolant, triangle_divergence_integral, verify_field, FieldSpec, PatchField, WTarget,
};
use svstokes::geometry::{signed_area, TriangleGeom};
use svstokes::mesh::*;
use svstokes::trees::{build_tree_cover, check_hypotheses};

fn topo(m: Triangulation) -> MeshTopology {
    MeshTopology::new(m).unwrap()
}

fn mesh_strategy() -> impl Strategy<Value = Triangulation> {
    prop_oneof![
        (2usize..6, any::<u64>(), 0.0..0.3f64).prop_map(|(n, s, a)| perturbed_grid(n, s, a).unwrap()),
        (3usize..11, any::<u64>()).prop_map(|(n, s)| random_ngon(n, s).unwrap()),
        (1usize..6, any::<u64>()).prop_map(|(n, s)| random_boundary_fan(n, s).unwrap()),
        (1usize..4).prop_map(|n| crossed(n, 1.0).unwrap()),
        (1usize..4).prop_map(|n| type1_diagonal(n, 1.0).unwrap()),
        (1usize..3).prop_map(|n| three_lines(n).unwrap()),
    ]
}

fn point() -> impl Strategy<Value = Point> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Point::new(x, y))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn triangle_identities(p0 in point(), p1 in point(), p2 in point()) {
        let diam = (p1 - p0).norm().max((p2 - p1).norm()).max((p0 - p2).norm());
        prop_assume!(signed_area(&p0, &p1, &p2).abs() > 1e-3 * diam * diam);
        let g = TriangleGeom::new(p0, p1, p2).unwrap();
        prop_assert!(rel(g.angles.iter().sum(), std::f64::consts::PI) < 1e-10);
        for y in 0..3 {
            prop_assert!(rel(g.area, 0.5 * g.edge_len[y] * g.heights[y]) < 1e-10);
            let grad = g.hat_gradient(y);
            for z in [(y + 1) % 3, (y + 2) % 3] {
                // tangent from z to y against grad psi_y
                let e = g.points[y] - g.points[z];
                prop_assert!(rel(grad.dot(&(e / e.norm())), 1.0 / e.norm()) < 1e-10);
                // h_T^y = |e| sin(angle at z)
                prop_assert!(rel(g.heights[y], e.norm() * g.angles[z].sin()) < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hat_gradient_matches_finite_differences(p0 in point(), p1 in point(), p2 in point()) {
        let diam = (p1 - p0).norm().max((p2 - p1).norm()).max((p0 - p2).norm());
        prop_assume!(signed_area(&p0, &p1, &p2).abs() > 1e-2 * diam * diam);
        let g = TriangleGeom::new(p0, p1, p2).unwrap();
        let c = g.centroid();
        let h = 1e-5 * diam;
        for k in 0..3 {
            let fd_x = (g.barycentric(&(c + Point::new(h, 0.0)))[k] - g.barycentric(&(c - Point::new(h, 0.0)))[k]) / (2.0 * h);
            let fd_y = (g.barycentric(&(c + Point::new(0.0, h)))[k] - g.barycentric(&(c - Point::new(0.0, h)))[k]) / (2.0 * h);
            let grad = g.hat_gradient(k);
            prop_assert!((grad - Point::new(fd_x, fd_y)).norm() <= 1e-6 * grad.norm().max(1.0));
        }
    }

    #[test]
    fn mesh_counts_and_patches(m in mesh_strategy()) {
        let t = topo(m);
        let c = t.counts;
        prop_assert_eq!(3 * c.t, c.e + c.e0);
        prop_assert_eq!(c.euler(), 1);
        prop_assert_eq!(c.e0 - c.v0, c.t - 1);
        for z in 0..t.num_vertices() {
            let p = t.patch(z).unwrap();
            prop_assert_eq!(&p, &t.patch(z).unwrap());
            let n = p.valence();
            for j in 0..n {
                let shared = |a: usize, b: usize| {
                    let (ta, tb) = (t.mesh.triangles[p.triangles[a]], t.mesh.triangles[p.triangles[b]]);
                    ta.iter().filter(|v| tb.contains(v)).count()
                };
                if p.interior || j + 1 < n {
                    prop_assert_eq!(shared(j, (j + 1) % n), 2);
                }
                prop_assert!(signed_area(&p.z, &p.y[j], &p.y[j + 1]) > 0.0);
            }
            if !p.interior {
                prop_assert!(!t.edges[p.edges[0]].is_interior());
                prop_assert!(!t.edges[p.edges[n]].is_interior());
            }
        }
    }

    #[test]
    fn b_coefficients_sum_to_zero(m in mesh_strategy()) {
        let t = topo(m);
        for z in (0..t.num_vertices()).filter(|&z| !t.is_boundary(z)) {
            let p = t.patch(z).unwrap();
            let dc = compute_dcoefficients(&p).unwrap();
            let scale: f64 = dc.b.iter().flatten().map(|v| v.abs()).sum();
            for i in 0..2 {
                let s: f64 = dc.b.iter().map(|b| b[i]).sum();
                prop_assert!(s.abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn coefficients_translate_and_scale(n in 3usize..11, seed in any::<u64>(), shift in point(), lambda in 0.1..10.0f64) {
        let m = random_ngon(n, seed).unwrap();
        let base = compute_dcoefficients(&topo(m.clone()).patch(0).unwrap()).unwrap();
        let moved = compute_dcoefficients(&topo(m.map_points(|p| p + shift).unwrap()).patch(0).unwrap()).unwrap();
        let scaled = compute_dcoefficients(&topo(m.map_points(|p| p * lambda).unwrap()).patch(0).unwrap()).unwrap();
        let tol = |a: &[f64; 3]| 1e-10 * a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        prop_assert!((0..3).all(|i| (base.big_d[i] - moved.big_d[i]).abs() <= tol(&base.big_d)));
        prop_assert!((base.big_d[0] - scaled.big_d[0] * lambda * lambda).abs() <= tol(&base.big_d));
        for i in 1..3 {
            prop_assert!((base.big_d[i] - scaled.big_d[i] * lambda).abs() <= tol(&base.big_d));
        }
    }

    #[test]
    fn classification_is_invariant(m in mesh_strategy(), angle in 0.0..6.3f64, shift in point(), lambda in 0.2..5.0f64) {
        let tol = Tolerances::default();
        let r = Rotation2::new(angle);
        let base = topo(m.clone());
        let moved = topo(m.map_points(|p| r * p * lambda + shift).unwrap());
        let (cb, cm) = (classify_mesh(&base, &tol).unwrap(), classify_mesh(&moved, &tol).unwrap());
        for (a, b) in cb.reports.iter().zip(&cm.reports) {
            prop_assert_eq!(a.status.name(), b.status.name());
            // (D_1, D_2) rotates as a vector, so only its length is invariant
            if let (Some(x), Some(y)) = (a.decisions, b.decisions) {
                prop_assert!((x[0] - y[0]).abs() <= 1e-8 * x[0].abs().max(1.0));
                let (nx, ny) = (x[1].hypot(x[2]), y[1].hypot(y[2]));
                prop_assert!((nx - ny).abs() <= 1e-8 * nx.max(1.0));
            }
        }
        let (tb, tm) = (build_tree_cover(&base, &cb, &tol, None).unwrap(), build_tree_cover(&moved, &cm, &tol, None).unwrap());
        prop_assert_eq!(tb.assignment.clone(), tm.assignment.clone());
        prop_assert!(rel(tb.rho_bar(), tm.rho_bar()) < 1e-8);
        prop_assert!(rel(tb.upsilon_bar().max(1.0), tm.upsilon_bar().max(1.0)) < 1e-8);
        prop_assert_eq!(
            check_hypotheses(&base, &cb, &tb, &tol).unwrap().verdict,
            check_hypotheses(&moved, &cm, &tm, &tol).unwrap().verdict
        );
    }

    #[test]
    fn local_interpolants_are_linear_and_compatible(n in 3usize..10, seed in any::<u64>(), a in prop::collection::vec(-1.0..1.0f64, 10), b in prop::collection::vec(-1.0..1.0f64, 10)) {
        let t = topo(random_ngon(n, seed).unwrap());
        let tol = Tolerances::default();
        prop_assume!(classify_mesh(&t, &tol).unwrap().reports[0].status.is_local_interpolating());
        let (a, b) = (a[..n].to_vec(), b[..n].to_vec());
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let f = |v: &Vec<f64>| local_interpolant(&t, &WTarget::new(0, v.clone()), &tol).unwrap();
        let (fa, fb, fab) = (f(&a), f(&b), f(&ab));
        prop_assert!(fab.minus(&fa).minus(&fb).max_coeff() <= 1e-10 * fab.max_coeff().max(1.0));
        let mut spec = FieldSpec { mean_zero: true, ..Default::default() };
        spec.expect_at(&t, 0, &a);
        let r = verify_field(&t, &fa, &spec);
        prop_assert!(r.pass, "{:?}", r.failures());
    }
}

/// Every field built around a singular vertex keeps the alternating sum of its
/// vertex divergences at zero there.
#[test]
fn constructed_fields_respect_singular_vertices() {
    let t = topo(crossed(2, 1.0).unwrap());
    let tol = Tolerances::default();
    let cl = classify_mesh(&t, &tol).unwrap();
    let sing: Vec<usize> = cl.singular_vertices().collect();
    let mut fields: Vec<PatchField> = Vec::new();
    for z in 0..t.num_vertices() {
        let p = t.patch(z).unwrap();
        if p.interior {
            for k in 0..p.valence() {
                fields.push(svstokes::fields::basis_w(&t, &p, k).unwrap());
            }
        }
    }
    fields.push(local_interpolant(&t, &WTarget::new(4, vec![0.3, -1.0, 0.2, 0.9, 0.1, 0.0, 0.4, -0.5]), &tol).unwrap());
    for f in &fields {
        for &s in &sing {
            let vals: Vec<f64> = t.patch(s).unwrap().triangles.iter().map(|&k| divergence_at(&t, f, k, s)).collect();
            assert!(alternating_sum(&vals).abs() < 1e-10 * f.max_coeff().max(1.0));
        }
        for k in f.support() {
            assert!(triangle_divergence_integral(&t, f, k).abs() < 1e-12 * f.max_coeff().max(1.0));
        }
    }
}
