//! Fields can be combined into arbitrary, even non-adjacent, groups. Here a
//! three-field layout is regrouped as (T) | (v, p) and as (f0, f2) | (f1).

use blockpc::problems::gen_algebraic_demo;
use blockpc::BlockLayout;

fn main() -> blockpc::Result<()> {
    let layout = BlockLayout::contiguous(&[("T", 2), ("v", 4), ("p", 3)])?;
    let grouped = layout.group_fields(&[("ns", vec!["v", "p"]), ("temp", vec!["T"])])?;
    for name in grouped.field_names() {
        println!("{name}: {:?}", grouped.field(name).unwrap().indices.as_slice());
    }

    let (k, _) = gen_algebraic_demo();
    let outer = k.extract_block(&["f0", "f2"], &["f0", "f2"])?;
    println!(
        "demo block (f0, f2): {}x{} with {} nonzeros, rows {:?}",
        outer.matrix().nrows(),
        outer.matrix().ncols(),
        outer.matrix().nnz(),
        k.row_layout().group_indices(&["f0", "f2"])?
    );
    let coupling = k.extract_block(&["f1"], &["f0", "f2"])?;
    println!("coupling f1 -> (f0, f2): {} nonzeros", coupling.matrix().nnz());
    Ok(())
}
