use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;

use willmore::biharmonic::{solve_annulus, AnnulusBVP, FourierSeries};
use willmore::constructors::{
    make_annulus, make_bumpy_disk, make_clifford_torus, make_flat_disk, make_sphere, random_bumps, CliffordParams,
};
use willmore::minimizer::{minimize, MinimizeOptions};
use willmore::monotonicity::profile;
use willmore::{boundary_loops, energies, load_mesh, save_mesh, topology, Circle, ConstraintCurve, MeshFormat, TriMesh, Vec3};

fn arb_mesh() -> impl Strategy<Value = TriMesh> {
    prop_oneof![
        (1u32..4).prop_map(|k| make_sphere(k).unwrap()),
        (8usize..40, any::<u64>()).prop_map(|(n, s)| make_bumpy_disk(n, &random_bumps(s, 3, 0.2)).unwrap()),
        (8usize..32, 2usize..6).prop_map(|(n, r)| make_annulus(0.4, 1.0, n, r).unwrap()),
        (8usize..24, 8usize..24).prop_map(|(u, v)| make_clifford_torus(&CliffordParams::standard(u, v)).unwrap()),
    ]
}

fn arb_rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(x, y, z, a)| Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(x, y, z)), a))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euler_characteristic_and_genus_parity(m in arb_mesh()) {
        let t = topology(&m).unwrap();
        let v = m.num_vertices() as i64;
        let e = m.edges().len() as i64;
        let f = m.num_faces() as i64;
        prop_assert_eq!(v - e + f, t.euler_characteristic);
        let b = t.boundary_loop_count as i64;
        let slack = 2 - b - t.euler_characteristic;
        prop_assert!(slack >= 0 && slack % 2 == 0);
    }

    #[test]
    fn boundary_loops_cover_each_boundary_edge_once(m in arb_mesh()) {
        let mut seen = std::collections::HashMap::new();
        for l in boundary_loops(&m) {
            let n = l.vertex_indices.len();
            for i in 0..n {
                let (a, b) = (l.vertex_indices[i], l.vertex_indices[(i + 1) % n]);
                *seen.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let boundary: Vec<_> = m.edges().iter().filter(|e| e.boundary).map(|e| (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]))).collect();
        prop_assert_eq!(seen.len(), boundary.len());
        for k in boundary {
            prop_assert_eq!(seen.get(&k), Some(&1));
        }
    }

    #[test]
    fn save_load_round_trip(m in arb_mesh(), off in any::<bool>()) {
        let fmt = if off { MeshFormat::Off } else { MeshFormat::Obj };
        let back = load_mesh(&save_mesh(&m, fmt), fmt).unwrap();
        prop_assert_eq!(back.triangles(), m.triangles());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            prop_assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn discrete_gauss_bonnet_is_exact(m in arb_mesh()) {
        let e = energies(&m).unwrap();
        prop_assert!((e.total_gauss + e.g - 2.0 * PI * e.chi as f64).abs() < 1e-9);
    }

    #[test]
    fn energies_are_scale_invariant(m in arb_mesh(), lambda in 0.01..100.0f64) {
        let a = energies(&m).unwrap();
        let b = energies(&m.map_positions(|p| p * lambda).unwrap()).unwrap();
        prop_assert!(close(a.w, b.w, 1e-12) && close(a.d, b.d, 1e-11) && close(a.g, b.g, 1e-12), "{a:?} {b:?}");
    }

    #[test]
    fn energies_are_isometry_invariant(m in arb_mesh(), r in arb_rotation(), t in prop::array::uniform3(-5.0..5.0f64)) {
        let t = Vec3::from(t);
        let a = energies(&m).unwrap();
        let b = energies(&m.map_positions(|p| r * p + t).unwrap()).unwrap();
        prop_assert!(close(a.w, b.w, 1e-10) && close(a.d, b.d, 1e-10) && close(a.g, b.g, 1e-10), "{a:?} {b:?}");
    }

    #[test]
    fn closed_meshes_have_no_boundary_remainder(k in 2u32..4, c in prop::array::uniform3(-1.2..1.2f64)) {
        let s = make_sphere(k).unwrap();
        let p = profile(&s, &Vec3::from(c), &[0.3, 0.9, 1.8]).unwrap();
        prop_assert!(p.rows.iter().all(|r| r.boundary_remainder == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn accepted_steps_strictly_decrease(seed in any::<u64>(), n in 16usize..32) {
        let d = make_bumpy_disk(n, &random_bumps(seed, 2, 0.25)).unwrap();
        let opts = MinimizeOptions {
            max_iters: 15,
            curve: Some(ConstraintCurve::Circle(Circle::unit())),
            ..Default::default()
        };
        let t = minimize(&d, &opts).unwrap();
        prop_assert!(t.energies.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn pinned_boundary_does_not_move(seed in any::<u64>()) {
        let d = make_bumpy_disk(24, &random_bumps(seed, 2, 0.25)).unwrap();
        let opts = MinimizeOptions {
            max_iters: 10,
            curve: Some(ConstraintCurve::Circle(Circle::unit())),
            ..Default::default()
        };
        let t = minimize(&d, &opts).unwrap();
        let worst = (0..d.num_vertices())
            .filter(|&v| d.is_boundary_vertex(v))
            .map(|v| Circle::unit().distance(&t.final_mesh.vertices()[v]))
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-9 * d.diameter());
    }

    #[test]
    fn biharmonic_solve_is_linear(
        a in prop::collection::vec(-0.1..0.1f64, 24),
        b in prop::collection::vec(-0.1..0.1f64, 24),
        sigma in 0.2..0.7f64,
    ) {
        let series = |x: &[f64]| FourierSeries { cos: x[..6].to_vec(), sin: [&[0.0], &x[6..11]].concat() };
        let bvp = |x: &[f64]| AnnulusBVP {
            sigma,
            r_outer: 1.0,
            value: series(&x[..12]),
            normal: series(&x[12..]),
        };
        let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let (sa, sb, ss) = (solve_annulus(&bvp(&a)).unwrap(), solve_annulus(&bvp(&b)).unwrap(), solve_annulus(&bvp(&sum)).unwrap());
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 1e-300;
        for i in 0..16 {
            let r = sigma + (1.0 - sigma) * (i as f64 + 0.5) / 16.0;
            let th = 0.7 * i as f64;
            let (x, y, z) = (sa.eval(r, th), sb.eval(r, th), ss.eval(r, th));
            for j in 0..3 {
                diff = diff.max((z[j] - x[j] - y[j]).abs());
                scale = scale.max(z[j].abs());
            }
        }
        prop_assert!(diff <= 1e-10 * scale, "{diff} vs {scale}");
    }
}

#[test]
fn every_constructor_output_validates() {
    // Rebuilding through `TriMesh::new` repeats every mesh_core check.
    let meshes = [
        make_sphere(3).unwrap(),
        make_flat_disk(&Circle::unit(), 32).unwrap(),
        make_annulus(0.3, 1.0, 32, 4).unwrap(),
        make_clifford_torus(&CliffordParams::standard(24, 24)).unwrap(),
        make_bumpy_disk(32, &random_bumps(1, 3, 0.2)).unwrap(),
    ];
    for m in meshes {
        TriMesh::new(m.vertices().to_vec(), m.triangles().to_vec()).unwrap();
    }
}
