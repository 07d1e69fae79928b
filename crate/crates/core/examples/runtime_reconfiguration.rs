//! The same three-field system solved under different solver trees. Only
//! the options change; the matrix and right-hand side are built once.

use blockpc::problems::gen_algebraic_demo;
use blockpc::{KrylovSolver, OptionsDb, PcContext};

const TREES: [&[&str]; 4] = [
    &["-ksp_type", "gmres", "-ksp_rtol", "1e-12", "-pc_type", "ilu"],
    &[
        "-ksp_type", "gmres", "-ksp_rtol", "1e-12",
        "-pc_type", "fieldsplit", "-pc_fieldsplit_type", "additive",
        "-fieldsplit_f0_ksp_type", "preonly", "-fieldsplit_f0_pc_type", "lu",
        "-fieldsplit_f1_ksp_type", "preonly", "-fieldsplit_f1_pc_type", "jacobi",
        "-fieldsplit_f2_ksp_type", "preonly", "-fieldsplit_f2_pc_type", "lu",
    ],
    &[
        "-ksp_type", "fgmres", "-ksp_rtol", "1e-12",
        "-pc_type", "fieldsplit", "-pc_fieldsplit_type", "multiplicative",
        "-pc_fieldsplit_0_fields", "f0,f2", "-pc_fieldsplit_1_fields", "f1",
        "-fieldsplit_0_ksp_type", "gmres", "-fieldsplit_0_ksp_rtol", "1e-3", "-fieldsplit_0_pc_type", "ilu",
        "-fieldsplit_f1_ksp_type", "preonly", "-fieldsplit_f1_pc_type", "lu",
    ],
    &["-ksp_type", "richardson", "-ksp_rtol", "1e-12", "-pc_type", "bjacobi", "-pc_bjacobi_block_size", "3"],
];

fn main() -> blockpc::Result<()> {
    let (k, b) = gen_algebraic_demo();
    let mut first: Option<Vec<f64>> = None;
    for tokens in TREES {
        let db = OptionsDb::parse_args(tokens)?;
        let mut solver = KrylovSolver::from_splittable(&db.scope(), k.clone(), &PcContext::default())?;
        let mut x = vec![0.0; b.len()];
        let report = solver.solve(&b, &mut x)?;
        let diff = first
            .get_or_insert_with(|| x.clone())
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        println!(
            "{:<11} pc {:<11} {:>3} iterations, max |x - x_first| = {diff:.1e}",
            report.method.as_str(),
            report.pc_type,
            report.iterations
        );
    }
    Ok(())
}
