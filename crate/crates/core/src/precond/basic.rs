use super::Preconditioner;
use crate::dense::{DenseLu, DenseMatrix};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub const DENSE_LU_MAX_ROWS: usize = 5000;

/// `z = diag(A)⁻¹ r`
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let d = a.diagonal()?;
        let inv_diag = d
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 0.0 || !v.is_finite() {
                    Err(Error::Setup(format!("zero diagonal entry in row {i}")))
                } else {
                    Ok(1.0 / v)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { inv_diag })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

/// Exact solves on consecutive diagonal blocks of a fixed size.
#[derive(Debug, Clone)]
pub struct BlockJacobi {
    block_size: usize,
    blocks: Vec<DenseLu>,
}

impl BlockJacobi {
    pub fn new(a: &CsrMatrix, block_size: usize) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("bjacobi (square)", a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        if block_size == 0 || n % block_size != 0 {
            return Err(Error::Setup(format!(
                "matrix size {n} is not divisible by block size {block_size}"
            )));
        }
        let blocks = (0..n / block_size)
            .map(|blk| {
                let start = blk * block_size;
                let mut d = DenseMatrix::zeros(block_size, block_size);
                for i in 0..block_size {
                    let (cols, vals) = a.row(start + i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        if j >= start && j < start + block_size {
                            d[(i, j - start)] = v;
                        }
                    }
                }
                DenseLu::factor(&d)
                    .map_err(|_| Error::Setup(format!("singular diagonal block {blk} (rows {start}..{})", start + block_size)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { block_size, blocks })
    }
}

impl Preconditioner for BlockJacobi {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let bs = self.block_size;
        for (k, lu) in self.blocks.iter().enumerate() {
            lu.solve_into(&r[k * bs..(k + 1) * bs], &mut z[k * bs..(k + 1) * bs]);
        }
    }
}

/// Dense LU of the whole matrix, for desk-scale problems.
#[derive(Debug, Clone)]
pub struct DenseLuPc {
    lu: DenseLu,
}

impl DenseLuPc {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("lu (square)", a.nrows(), a.ncols()));
        }
        if a.nrows() > DENSE_LU_MAX_ROWS {
            return Err(Error::Setup(format!(
                "dense LU limited to {DENSE_LU_MAX_ROWS} rows, matrix has {}",
                a.nrows()
            )));
        }
        Ok(Self {
            lu: DenseLu::factor(&a.to_dense())?,
        })
    }
}

impl Preconditioner for DenseLuPc {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        self.lu.solve_into(r, z);
    }
}
