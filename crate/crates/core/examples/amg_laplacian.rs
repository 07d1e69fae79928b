//! Plain-aggregation AMG as a CG preconditioner on the 2D five-point
//! Laplacian, comparing the default V-cycle with pairwise aggregation,
//! a W-cycle and an over-corrected coarse update.
//!
//!     cargo run --release --example amg_laplacian

use std::rc::Rc;

use blockpc::krylov::{KrylovMethod, SolverConfig};
use blockpc::precond::{Aggregation, Amg, AmgCycle, AmgParams};
use blockpc::{CsrMatrix, KrylovSolver, LinearOperator};

fn laplacian(n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let c = j * n + i;
            t.push((c, c, 4.0));
            if i > 0 {
                t.extend([(c, c - 1, -1.0), (c - 1, c, -1.0)]);
            }
            if j > 0 {
                t.extend([(c, c - n, -1.0), (c - n, c, -1.0)]);
            }
        }
    }
    CsrMatrix::from_triplets(n * n, n * n, &t).unwrap()
}

fn main() -> blockpc::Result<()> {
    let tuned = AmgParams {
        aggregation: Aggregation::Pairwise(2),
        cycle: AmgCycle::W,
        correction_scale: 1.5,
        ..AmgParams::default()
    };
    for n in [32, 64, 128] {
        let a = laplacian(n);
        let b = vec![1.0; n * n];
        let mut row = format!("n = {n:>3}:");
        for (label, params) in [("default", AmgParams::default()), ("tuned", tuned.clone())] {
            let amg = Amg::new(&a, &params)?;
            let levels = amg.level_sizes();
            let op: Rc<dyn LinearOperator> = Rc::new(a.clone());
            let cfg = SolverConfig::new(KrylovMethod::Cg).rtol(1e-8);
            let mut cg = KrylovSolver::new(cfg, op, Box::new(amg))?;
            let mut x = vec![0.0; n * n];
            let report = cg.solve(&b, &mut x)?;
            row += &format!("  {label} {} its, levels {levels:?}", report.iterations);
        }
        println!("{row}");
    }
    Ok(())
}
