//! Each Krylov method on a small SPD system, plus a matrix-free operator.

use std::rc::Rc;

use blockpc::krylov::{self, FnOperator, KrylovMethod, SolverConfig};
use blockpc::precond::{Identity, Jacobi};
use blockpc::{CsrMatrix, KrylovSolver};

fn main() -> blockpc::Result<()> {
    // 1D Laplacian plus a shift
    let n = 50;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.5));
        if i > 0 {
            t.extend([(i, i - 1, -1.0), (i - 1, i, -1.0)]);
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &t)?;
    let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();

    for method in [KrylovMethod::Gmres, KrylovMethod::Fgmres, KrylovMethod::Cg, KrylovMethod::Richardson, KrylovMethod::Preonly] {
        let cfg = SolverConfig::new(method).rtol(1e-10);
        let mut x = vec![0.0; n];
        let report = krylov::solve(&a, &b, &mut x, &mut Jacobi::new(&a)?, &cfg);
        println!("{:<10} {:?} after {} iterations", method.as_str(), report.converged, report.iterations);
    }

    // the operator only needs to know how to act on a vector
    let op = Rc::new(FnOperator::new(n, move |x: &[f64], y: &mut [f64]| {
        for i in 0..x.len() {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = x.get(i + 1).copied().unwrap_or(0.0);
            y[i] = 2.5 * x[i] - left - right;
        }
    }));
    let mut solver = KrylovSolver::new(SolverConfig::new(KrylovMethod::Cg).rtol(1e-10), op, Box::new(Identity))?;
    let mut x = vec![0.0; n];
    let report = solver.solve(&b, &mut x)?;
    println!("matrix-free cg: {} iterations, history {:.1e} -> {:.1e}", report.iterations, report.residual_history[0], report.final_residual());
    Ok(())
}
