//! Mixed Poisson saddle point solved with GMRES and an upper Schur
//! factorization: block Jacobi on the flux mass matrix, one AMG cycle on the
//! cell Laplacian as the Schur preconditioner.
//!
//!     cargo run --release --example mixed_poisson_schur -- 64

use blockpc::driver::load_options;
use blockpc::problems::gen_mixed_poisson;
use blockpc::{KrylovSolver, PcContext};

fn main() -> blockpc::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(32, |s| s.parse().expect("grid size"));
    let sys = gen_mixed_poisson(n, 0)?;
    let opts = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/options/upper_schur.opts");
    let db = load_options(&[opts], &[] as &[&str])?;

    // the cell Laplacian stands in for the Schur complement
    let ctx = PcContext::default().with_user_schur(sys.s_dg.clone());
    let mut solver = KrylovSolver::from_splittable(&db.scope(), sys.k.clone(), &ctx)?;
    let mut x = vec![0.0; sys.b.len()];
    let report = solver.solve(&sys.b, &mut x)?;

    println!("n = {n}: {} unknowns, {:?} after {} iterations", x.len(), report.converged, report.iterations);
    for sub in &report.sub_reports {
        println!("  {}{} ({}): {} applications", sub.prefix, sub.method.as_str(), sub.pc_type, sub.solves);
    }
    let r: Vec<f64> = sys.k.matrix().spmv(&x)?.iter().zip(&sys.b).map(|(a, b)| b - a).collect();
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    println!("relative residual {:.2e}", norm(&r) / norm(&sys.b));
    Ok(())
}
