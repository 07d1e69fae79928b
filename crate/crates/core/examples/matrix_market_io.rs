//! Dump a generated problem to MatrixMarket files with a JSON layout
//! sidecar, read it back and check that nothing changed.

use blockpc::driver::info;
use blockpc::problems::{gen_mixed_poisson, Problem};
use blockpc::sparse::mtx;

fn main() -> blockpc::Result<()> {
    let dir = std::env::temp_dir().join("blockpc_mtx_example");
    let problem = Problem::from(gen_mixed_poisson(8, 1)?);
    problem.dump(&dir)?;
    print!("{}", info(&dir)?);

    let back = Problem::load(&dir)?;
    println!("matrix identical: {}", back.k.matrix() == problem.k.matrix());
    println!("rhs bit-identical: {}", back.b.iter().zip(&problem.b).all(|(a, b)| a.to_bits() == b.to_bits()));

    let tiny = mtx::parse_matrix("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 -1\n")?;
    print!("{}", mtx::render_matrix(&tiny));
    Ok(())
}
