//! Options database: command-line tokens and files merge, prefixes scope
//! nested solvers, and keys nobody read are reported.

use blockpc::problems::gen_algebraic_demo;
use blockpc::{KrylovSolver, OptionsDb, PcContext};

fn main() -> blockpc::Result<()> {
    let mut db = OptionsDb::parse_file(
        "# file options\n\
         ksp_type: fgmres\n\
         pc_type: fieldsplit\n\
         pc_fieldsplit_type: additive\n",
    )?;
    // command line wins over files
    db.merge(&OptionsDb::parse_args(&[
        "-ksp_rtol", "1e-9",
        "-fieldsplit_f0_ksp_type", "preonly", "-fieldsplit_f0_pc_type", "lu",
        "-fieldsplit_f1_pc_type", "jacobi", "-fieldsplit_f1_ksp_max_it", "2",
        "-fieldsplit_f2_ksp_type", "preonly", "-fieldsplit_f2_pc_type", "lu",
        "-fieldsplit_f2_pc_typo", "ilu",
    ])?);

    let scope = db.scope().child("fieldsplit_f0");
    println!("{} -> {}", scope.full_key("pc_type"), scope.get_str("pc_type", "none"));
    db.clear_marks();

    let (k, b) = gen_algebraic_demo();
    let mut solver = KrylovSolver::from_splittable(&db.scope(), k, &PcContext::default())?;
    let mut x = vec![0.0; b.len()];
    let report = solver.solve(&b, &mut x)?;
    println!("{:?} after {} iterations", report.converged, report.iterations);

    println!("resolved:");
    for (key, value) in db.resolved() {
        println!("  {key} = {value}");
    }
    println!("never read: {:?}", db.unused_keys());
    Ok(())
}
