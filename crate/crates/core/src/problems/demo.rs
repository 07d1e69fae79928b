use crate::layout::{BlockLayout, SplittableMatrix};
use crate::sparse::CsrMatrix;
use crate::Result;

const DEMO_ROWS: [[f64; 9]; 9] = [
    [8.0, -1.0, 0.0, 1.0, 2.0, 0.0, -1.0, 0.0, 1.0],
    [-1.0, 9.0, -2.0, 0.0, 0.0, 1.0, 0.0, 2.0, 0.0],
    [0.0, -2.0, 10.0, -1.0, 1.0, 0.0, 0.0, 0.0, -1.0],
    [1.0, 0.0, -1.0, 7.0, 0.0, -1.0, 2.0, 1.0, 0.0],
    [2.0, 0.0, 1.0, 0.0, 7.0, -1.0, 0.0, 0.0, 2.0],
    [0.0, 1.0, 0.0, -1.0, -1.0, 5.0, -1.0, 1.0, 0.0],
    [-1.0, 0.0, 0.0, 2.0, 0.0, -1.0, 6.0, 0.0, -1.0],
    [0.0, 2.0, 0.0, 1.0, 0.0, 1.0, 0.0, 6.0, -1.0],
    [1.0, 0.0, -1.0, 0.0, 1.5, 0.0, -1.0, -1.0, 7.0],
];

const DEMO_RHS: [f64; 9] = [1.0, -2.0, 3.0, -4.0, 5.0, -6.0, 7.0, -8.0, 9.0];

/// Small nonsymmetric, diagonally dominant system with fields `f0` (4 rows),
/// `f1` (3) and `f2` (2).
pub fn gen_algebraic_demo() -> (SplittableMatrix, Vec<f64>) {
    let mut t = Vec::new();
    for (i, row) in DEMO_ROWS.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    let build = || -> Result<SplittableMatrix> {
        let a = CsrMatrix::from_triplets(9, 9, &t)?;
        SplittableMatrix::square(a, BlockLayout::contiguous(&[("f0", 4), ("f1", 3), ("f2", 2)])?)
    };
    (build().expect("demo system is well formed"), DEMO_RHS.to_vec())
}
