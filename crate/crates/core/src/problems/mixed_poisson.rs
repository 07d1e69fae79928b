//! Lowest-order Raviart-Thomas × piecewise-constant mixed Poisson on the unit
//! square, `n × n` uniform cells of side `h = 1/n`.
//!
//! Cell `(i, j)` (column `i`, row `j`) has index `j·n + i`. Boundary edges
//! carry zero normal flux and are eliminated, leaving
//!
//! * vertical edges `x = i·h`, `i = 1..n-1`, row `j`: index `j·(n-1) + i-1`
//! * horizontal edges `y = j·h`, `j = 1..n-1`, column `i`: index
//!   `n·(n-1) + i·(n-1) + j-1`
//!
//! Each flux basis function has unit normal component on its edge, oriented
//! in `+x` / `+y`. The last cell's pressure is pinned (its unknown and its
//! divergence row are dropped), which removes the constant-pressure nullspace.

use super::rng::SplitMix64;
use crate::layout::{BlockLayout, SplittableMatrix};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MixedPoissonSystem {
    /// Fields `q` (flux) and `p` (pressure).
    pub k: SplittableMatrix,
    pub b: Vec<f64>,
    /// TPFA cell Laplacian (unit transmissibility) on the unpinned cells.
    pub s_dg: CsrMatrix,
    /// `g = -h²·f` on every cell, pinned cell included; sums to zero.
    pub cell_forcing: Vec<f64>,
    pub n: usize,
    pub h: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Problem(format!(
            "mixed-poisson needs n >= 2 (n = {n} leaves no interior edges)"
        )));
    }
    Ok(())
}

/// `(cell on the -x/-y side, cell on the +x/+y side)` for every flux unknown.
fn edge_cells(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(2 * n * (n - 1));
    for j in 0..n {
        for i in 1..n {
            e.push((j * n + i - 1, j * n + i));
        }
    }
    for i in 0..n {
        for j in 1..n {
            e.push(((j - 1) * n + i, j * n + i));
        }
    }
    e
}

pub fn num_fluxes(n: usize) -> usize {
    2 * n * (n - 1)
}

/// RT0 edge mass matrix `(q, q̃)`: `2h²/3` on the diagonal, `h²/6` between
/// opposite edges of a cell.
pub fn flux_mass(n: usize) -> Result<CsrMatrix> {
    check_n(n)?;
    let h = 1.0 / n as f64;
    let (diag, off) = (2.0 * h * h / 3.0, h * h / 6.0);
    let line = n - 1;
    let mut t = Vec::new();
    for e in 0..num_fluxes(n) {
        t.push((e, e, diag));
        // consecutive unknowns along a line share a cell
        if e % line != 0 {
            t.push((e, e - 1, off));
            t.push((e - 1, e, off));
        }
    }
    CsrMatrix::from_triplets(num_fluxes(n), num_fluxes(n), &t)
}

/// Divergence `(div q, p̃)` over all `n²` cells: `+h` for the cell whose
/// east/north face is the edge, `-h` for the other.
pub fn divergence(n: usize) -> Result<CsrMatrix> {
    check_n(n)?;
    let h = 1.0 / n as f64;
    let mut t = Vec::new();
    for (e, (lo, hi)) in edge_cells(n).into_iter().enumerate() {
        t.push((lo, e, h));
        t.push((hi, e, -h));
    }
    CsrMatrix::from_triplets(n * n, num_fluxes(n), &t)
}

/// Cell-adjacency graph Laplacian with the last cell's row and column removed.
pub(crate) fn pinned_cell_laplacian(n: usize) -> Result<CsrMatrix> {
    let nc = n * n;
    let pin = nc - 1;
    let mut t = Vec::new();
    for (a, b) in edge_cells(n) {
        for (u, v) in [(a, b), (b, a)] {
            if u != pin {
                t.push((u, u, 1.0));
                if v != pin {
                    t.push((u, v, -1.0));
                }
            }
        }
    }
    CsrMatrix::from_triplets(nc - 1, nc - 1, &t)
}

/// Per-cell `f ~ U[-1, 1)` from `seed`, shifted to zero mean.
pub fn cell_source(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut f: Vec<f64> = (0..n * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter_mut().for_each(|v| *v -= mean);
    f
}

pub fn gen_mixed_poisson(n: usize, seed: u64) -> Result<MixedPoissonSystem> {
    check_n(n)?;
    let h = 1.0 / n as f64;
    let nq = num_fluxes(n);
    let np = n * n - 1;
    let a = flux_mass(n)?;
    let keep: Vec<usize> = (0..np).collect();
    let all_q: Vec<usize> = (0..nq).collect();
    let bmat = divergence(n)?.extract_submatrix(&keep, &all_q)?;
    let bt = bmat.transpose();

    let mut t = Vec::with_capacity(a.nnz() + 2 * bmat.nnz());
    for i in 0..nq {
        let (c, v) = a.row(i);
        t.extend(c.iter().zip(v).map(|(&j, &x)| (i, j, x)));
        let (c, v) = bt.row(i);
        t.extend(c.iter().zip(v).map(|(&j, &x)| (i, nq + j, x)));
    }
    for i in 0..np {
        let (c, v) = bmat.row(i);
        t.extend(c.iter().zip(v).map(|(&j, &x)| (nq + i, j, x)));
    }
    let k = CsrMatrix::from_triplets(nq + np, nq + np, &t)?;
    let layout = BlockLayout::contiguous(&[("q", nq), ("p", np)])?;

    let cell_forcing: Vec<f64> = cell_source(n, seed).iter().map(|f| -h * h * f).collect();
    let mut b = vec![0.0; nq];
    b.extend_from_slice(&cell_forcing[..np]);

    Ok(MixedPoissonSystem {
        k: SplittableMatrix::square(k, layout)?,
        b,
        s_dg: pinned_cell_laplacian(n)?,
        cell_forcing,
        n,
        h,
    })
}
