//! Finite element and application-level checks on real meshes.

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morozov::apps::{
    build_cauchy, build_heat_da, build_laplace_da, Application, HeatConfig, HeatPerp, MorleyPerp, ProjectorSpec,
};
use morozov::fem2d::{assemble_p1, generate_mesh, DofMap, EdgeMarker, OmegaSpec, SpaceTag};
use morozov::numerics::{smallest_eigenpairs, DenseCholesky};
use morozov::regcore::{solve_mixed_with, ExactRangePerp, HVector, MixedRoute, NoisyData, RangePerpBackend};

fn laplace(n: usize) -> Application {
    build_laplace_da(generate_mesh(n, &OmegaSpec::exterior_of_disk()).unwrap()).unwrap()
}

fn applications() -> Vec<Application> {
    vec![
        laplace(10),
        build_laplace_da(generate_mesh(10, &OmegaSpec::five_disks()).unwrap()).unwrap(),
        build_cauchy(10, 0.5).unwrap(),
        build_heat_da(&HeatConfig { n_x: 10, n_t: 10, ..Default::default() }).unwrap(),
    ]
}

fn random_data(app: &Application, seed: u64) -> HVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    HVector::new(
        DVector::zeros(app.op.n_m()),
        DVector::from_fn(app.op.n_o(), |_, _| rng.random_range(-1.0..1.0)),
    )
}

/// Largest `|(g_perp, Av)_H| / (||g_perp|| ||Av||)` over random `v`.
fn worst_orthogonality(app: &Application, perp: &HVector, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let op = &app.op;
    (0..count)
        .map(|_| {
            let v = DVector::from_fn(op.n_v(), |_, _| rng.random_range(-1.0..1.0));
            let av = op.apply(&v).unwrap();
            op.h_inner(perp, &av).abs() / (op.h_norm(perp) * op.h_norm(&av))
        })
        .fold(0.0, f64::max)
}

fn smooth_orthogonality(app: &Application, perp: &HVector) -> f64 {
    let op = &app.op;
    (1..6)
        .map(|k| {
            let k = k as f64;
            let v = app.interpolate(|x, y| (k * x).sin() * (2.0 * y).cos() + k * x * y);
            let av = op.apply(&v).unwrap();
            op.h_inner(perp, &av).abs() / (op.h_norm(perp) * op.h_norm(&av))
        })
        .fold(0.0, f64::max)
}

#[test]
fn dirichlet_eigenvalue_of_the_unit_square() {
    let mesh = generate_mesh(20, &OmegaSpec::disk()).unwrap();
    let map = DofMap::new(&mesh, SpaceTag::P1ZeroBoundary).unwrap();
    let p1 = assemble_p1(&mesh, &map).unwrap();
    let e = smallest_eigenpairs(&p1.stiffness, &p1.mass, 3).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((e.values[0] - 2.0 * pi2).abs() <= 0.02 * 2.0 * pi2, "{}", e.values[0]);
    // the next pair is the double eigenvalue 5 pi^2
    assert!((e.values[1] - 5.0 * pi2).abs() <= 0.05 * 5.0 * pi2);
    for i in 0..3 {
        for j in 0..3 {
            let gij = p1.mass.bilinear(&e.vector(i), &e.vector(j));
            assert!((gij - f64::from(u8::from(i == j))).abs() <= 1e-8);
        }
    }
}

#[test]
fn gram_matrices_are_positive_definite_and_routes_agree() {
    for app in applications() {
        let op = &app.op;
        for g in [&op.gram_v, &op.gram_m, &op.gram_o] {
            assert!(DenseCholesky::from_sparse(g).is_ok(), "{}", app.kind.name());
        }
        let data = NoisyData::new(DVector::zeros(op.n_m()), random_data(&app, 1).o, 0.1).unwrap();
        for eps in [1e-6, 1e-3, 1.0] {
            let block = solve_mixed_with(op, &data, eps, MixedRoute::Block).unwrap();
            let spectral = solve_mixed_with(op, &data, eps, MixedRoute::Spectral).unwrap();
            let rel = op.v_norm(&(&block.u - &spectral.u)) / op.v_norm(&spectral.u);
            assert!(rel <= 1e-9, "{} eps {eps}: {rel}", app.kind.name());
            let bu = op.apply(&block.u).unwrap().m;
            assert!(op.m_norm(&(&bu - &block.lambda)) <= 1e-9 * op.m_norm(&bu).max(1e-14));
        }
    }
}

#[test]
fn exact_projection_is_orthogonal_and_idempotent() {
    for app in applications() {
        let g = random_data(&app, 2);
        let perp = ExactRangePerp.project(&app.op, &g).unwrap().perp;
        assert!(worst_orthogonality(&app, &perp, 50) <= 1e-6, "{}", app.kind.name());
        let again = ExactRangePerp.project(&app.op, &perp).unwrap().perp;
        assert!(app.op.h_norm(&again.sub(&perp)) <= 1e-8 * app.op.h_norm(&perp));
    }
}

#[test]
fn morley_projection_converges_to_orthogonality() {
    // nonconforming: orthogonality holds up to a consistency error that shrinks with h
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32] {
        let app = laplace(n);
        let backend = MorleyPerp::new(&app).unwrap();
        let c = backend.project(&app.op, &random_data(&app, 3)).unwrap();
        let (lhs, rhs) = c.native_identity.unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * lhs);
        let w = worst_orthogonality(&app, &c.perp, 50);
        assert!(w < 0.5 * prev, "n = {n}: {w} after {prev}");
        prev = w;
    }
    assert!(prev <= 2e-4, "{prev}");
}

#[test]
fn morley_leaves_compatible_projector_ranges_alone() {
    let app = laplace(16);
    let backend = MorleyPerp::new(&app).unwrap();
    let p = ProjectorSpec::P0 { n: 4 }.build(&app).unwrap();
    for q in p.basis() {
        let c = backend.project(&app.op, &q).unwrap();
        assert!(c.native_identity.unwrap().0.sqrt() <= 1e-6 * app.op.h_norm(&q));
        assert!(app.op.h_norm(&c.perp) <= 1e-6 * app.op.h_norm(&q));
    }
}

#[test]
fn heat_projection_identity_and_orthogonality() {
    let mut prev = f64::INFINITY;
    for n in [20, 30] {
        let app = build_heat_da(&HeatConfig { n_x: n, n_t: n, ..Default::default() }).unwrap();
        let backend = HeatPerp::new(&app).unwrap();
        let c = backend.project(&app.op, &random_data(&app, 4)).unwrap();
        let (lhs, rhs) = c.native_identity.unwrap();
        assert!((lhs - rhs).abs() <= 1e-6 * lhs);
        // finite differences against P1 elements: the mismatch shrinks with h
        let w = worst_orthogonality(&app, &c.perp, 50).max(smooth_orthogonality(&app, &c.perp));
        assert!(w < 0.7 * prev && w < 1e-2, "n = {n}: {w} after {prev}");
        prev = w;
    }
}

#[test]
fn cauchy_markers_partition_the_boundary() {
    let mesh = generate_mesh(8, &OmegaSpec::BoundaryPartition { gamma_fraction: 0.5 }).unwrap();
    assert_eq!(mesh.boundary_edges.len(), 32);
    let gamma = mesh.boundary_edges.iter().filter(|e| e.marker == EdgeMarker::Gamma).count();
    let tilde = mesh.boundary_edges.iter().filter(|e| e.marker == EdgeMarker::GammaTilde).count();
    assert_eq!((gamma, tilde), (16, 16));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn meshes_are_oriented_and_stiffness_kills_constants(n in 2usize..24, which in 0usize..3) {
        let spec = [OmegaSpec::disk(), OmegaSpec::exterior_of_disk(), OmegaSpec::five_disks()][which].clone();
        let Ok(mesh) = generate_mesh(n, &spec) else { return Ok(()) };
        prop_assert!((0..mesh.n_triangles()).all(|t| mesh.area(t) > 0.0));
        prop_assert!(mesh.boundary_edges.iter().all(|e| e.marker == EdgeMarker::None));
        let map = DofMap::new(&mesh, SpaceTag::P1).unwrap();
        let k = assemble_p1(&mesh, &map).unwrap().stiffness;
        let one = DVector::from_element(k.nrows(), 1.0);
        prop_assert!(k.mul_vec(&one).amax() <= 1e-12);
    }
}
