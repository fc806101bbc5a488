//! Manual calibration probes, ignored by default. Run explicitly:
//! `cargo test --release -p steklov-lab --test probe -- --ignored --nocapture <name>`

use steklov_lab::field::MagneticField;
use steklov_lab::geometry::{build_mesh, DomainSpec};
use steklov_lab::solver::{solve_steklov, steklov_lambda1_matfree};

#[test]
#[ignore]
fn matfree_vs_dense_unit_disk() {
    let field = MagneticField::constant(1.0);
    let beta = 200.0;
    let h = 0.008;
    let mesh = build_mesh(&DomainSpec::unit_disk(), h).unwrap();
    eprintln!("V = {}, B = {}", mesh.num_vertices(), mesh.boundary_vertices().len());
    let t0 = std::time::Instant::now();
    let fast = steklov_lambda1_matfree(&mesh, &field, beta, 4).unwrap();
    eprintln!(
        "matfree: lambda1 = {:.8}, iters = {}, resid = {:.2e}, {:?}",
        fast.lambda1,
        fast.iterations,
        fast.ritz_residual,
        t0.elapsed()
    );
    let t1 = std::time::Instant::now();
    let dense = solve_steklov(&mesh, &field, beta, 1, 4).unwrap();
    eprintln!("dense:   lambda1 = {:.8}, {:?}", dense.solution.eigenvalues[0], t1.elapsed());
}

#[test]
#[ignore]
fn unit_disk_convergence_beta80() {
    let field = MagneticField::constant(1.0);
    for h in [0.0065, 0.0045, 0.0032] {
        let mesh = build_mesh(&DomainSpec::unit_disk(), h).unwrap();
        let t0 = std::time::Instant::now();
        let fast = steklov_lambda1_matfree(&mesh, &field, 80.0, 4).unwrap();
        eprintln!(
            "h = {h}: V = {}, B = {}, lambda1 = {:.6} (iters {}, {:?})  oracle 4.397533",
            mesh.num_vertices(),
            mesh.boundary_vertices().len(),
            fast.lambda1,
            fast.iterations,
            t0.elapsed()
        );
    }
}
