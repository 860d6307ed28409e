use hyperpoisson::convergence::build_mesh;
use hyperpoisson::*;

fn interpolant_residual(p: usize, n: usize) -> (f64, f64) {
    let s = builtin_setup(1).unwrap();
    let mesh = build_mesh(&s, p, n, MeshKind::Uniform).unwrap();
    let op = EllipticOperator::new(
        mesh.clone(),
        relaxation_time_for(&mesh).unwrap(),
        BoundaryData::from_fn(&mesh, s.exact_phi),
        interpolate(&mesh, s.forcing),
    )
    .unwrap();
    let r = op.residual(&interpolate(&mesh, s.exact_phi)).unwrap();
    let w = mesh.mass_weights();
    let l2 = r.as_slice().iter().zip(&w).map(|(r, w)| r * r * w).sum::<f64>().sqrt();
    (r.max_abs(), l2)
}

// Recorded from this implementation; guards against silent changes.
#[test]
fn interpolant_residual_regression() {
    let (max, l2) = interpolant_residual(3, 160);
    assert!((max - 7.813104608391797e-3).abs() <= 1e-9 * max, "{max:e}");
    assert!((l2 - 1.8805945131802329e-3).abs() <= 1e-9 * l2, "{l2:e}");
}

// Pointwise truncation error of the second-derivative operator on the
// interpolant decays like h^(p-1).
#[test]
fn interpolant_residual_decays_under_refinement() {
    for p in [2, 3, 4] {
        let r: Vec<f64> = [40, 80, 160].iter().map(|&n| interpolant_residual(p, n).1).collect();
        let order = eoc(r[1], r[2], 80, 160);
        assert!(order > p as f64 - 1.1, "p {p}: {r:?}");
    }
}

#[test]
fn elliptic_solution_has_tiny_residual() {
    let s = builtin_setup(1).unwrap();
    let mut opts = RunOptions::for_setup(&s, 3);
    opts.levels = vec![40];
    let sol = convergence::solve_level(&s, &opts, 40).unwrap();
    let op = EllipticOperator::new(
        sol.mesh.clone(),
        relaxation_time_for(&sol.mesh).unwrap(),
        BoundaryData::from_fn(&sol.mesh, s.exact_phi),
        interpolate(&sol.mesh, s.forcing),
    )
    .unwrap();
    assert!(op.residual(&sol.phi).unwrap().max_abs() <= 1e-10);
}
