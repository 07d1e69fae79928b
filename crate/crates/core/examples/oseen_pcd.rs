//! Oseen lid-driven cavity with FGMRES, an upper Schur factorization and
//! the two pressure convection-diffusion variants.
//!
//!     cargo run --release --example oseen_pcd -- 32 0.05

use blockpc::driver::{load_options, run_solve, ProblemKind, ProblemSpec};

fn main() -> blockpc::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(32, |s| s.parse().expect("grid size"));
    let nu: f64 = args.next().map_or(0.1, |s| s.parse().expect("viscosity"));
    let mut spec = ProblemSpec::new(ProblemKind::OseenCavity).with_n(n);
    spec.viscosity = nu;

    for variant in ["pcd_vx", "pcd_vy"] {
        let file = format!("{}/examples/options/{variant}.opts", env!("CARGO_MANIFEST_DIR"));
        let db = load_options(&[file], &[] as &[&str])?;
        let (report, _) = run_solve(&spec, &db, true)?;
        let ap = report.solve.find("fieldsplit_p_pcd_ap_").map_or(0, |r| r.total_iterations);
        println!(
            "{variant}: {} outer iterations, {ap} inner CG iterations on Ap, residual {:.2e}",
            report.iterations, report.relative_residual
        );
    }
    Ok(())
}
