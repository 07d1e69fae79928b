//! Plain (unsmoothed) aggregation AMG.
//!
//! Strength of connection: `|a_ij| > θ·sqrt(|a_ii·a_jj|)`. Aggregates are
//! formed greedily in three passes (root + strong neighbourhood, attach
//! leftovers to a neighbouring aggregate, group what remains). Prolongation
//! is piecewise constant, coarse operators are Galerkin products `PᵀAP`,
//! smoothing is weighted Jacobi and the coarsest level is solved densely.

use super::Preconditioner;
use crate::dense::DenseLu;
use crate::options::OptionsScope;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Largest level that stagnated coarsening may hand to the dense solver.
const STAGNATION_DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmgCycle {
    V,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Root node plus its whole strong neighbourhood.
    Greedy,
    /// Repeated strongest-neighbour matching; `k` passes give aggregates of
    /// at most `2^k` nodes.
    Pairwise(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmgParams {
    pub aggregation: Aggregation,
    pub threshold: f64,
    pub omega: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub coarse_size: usize,
    pub max_levels: usize,
    pub cycle: AmgCycle,
    /// Scales every coarse-grid correction. Piecewise-constant prolongation
    /// overestimates the energy of smooth modes, so a factor above one
    /// restores most of the lost convergence; values in `(0, 2)` keep the
    /// symmetric cycle positive definite.
    pub correction_scale: f64,
}

impl Default for AmgParams {
    fn default() -> Self {
        Self {
            aggregation: Aggregation::Greedy,
            threshold: 0.08,
            omega: 2.0 / 3.0,
            pre_sweeps: 1,
            post_sweeps: 1,
            coarse_size: 64,
            max_levels: 25,
            cycle: AmgCycle::V,
            correction_scale: 1.0,
        }
    }
}

impl AmgParams {
    /// Reads `pc_amg_aggregation` (`greedy`|`pairwise`), `pc_amg_pairwise_passes`, `pc_amg_threshold`, `pc_amg_omega`, `pc_amg_pre_sweeps`,
    /// `pc_amg_post_sweeps`, `pc_amg_coarse_size`, `pc_amg_max_levels`,
    /// `pc_amg_cycle` (`v`|`w`), `pc_amg_correction_scale`.
    pub fn from_options(scope: &OptionsScope<'_>) -> Result<Self> {
        let d = Self::default();
        let aggregation = match scope.get_choice(
            "pc_amg_aggregation",
            "greedy",
            &[("greedy", None), ("pairwise", Some(()))],
        )? {
            None => Aggregation::Greedy,
            Some(()) => Aggregation::Pairwise(scope.get("pc_amg_pairwise_passes", 2u32)?.max(1)),
        };
        Ok(Self {
            aggregation,
            threshold: scope.get("pc_amg_threshold", d.threshold)?,
            omega: scope.get("pc_amg_omega", d.omega)?,
            pre_sweeps: scope.get("pc_amg_pre_sweeps", d.pre_sweeps)?,
            post_sweeps: scope.get("pc_amg_post_sweeps", d.post_sweeps)?,
            coarse_size: scope.get("pc_amg_coarse_size", d.coarse_size)?,
            max_levels: scope.get("pc_amg_max_levels", d.max_levels)?.max(1),
            cycle: scope.get_choice("pc_amg_cycle", "v", &[("v", AmgCycle::V), ("w", AmgCycle::W)])?,
            correction_scale: scope.get("pc_amg_correction_scale", d.correction_scale)?,
        })
    }
}

#[derive(Debug, Clone)]
struct Level {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    /// Aggregate of every fine node; present on all but the coarsest level.
    aggregates: Vec<usize>,
    n_coarse: usize,
}

#[derive(Debug, Clone)]
enum CoarseSolve {
    Dense(DenseLu),
    /// Stagnated coarsening on a level too large to factor densely.
    Smooth(usize),
}

#[derive(Debug, Clone)]
pub struct Amg {
    levels: Vec<Level>,
    coarse: CoarseSolve,
    params: AmgParams,
}

fn inverse_diagonal(a: &CsrMatrix, level: usize) -> Result<Vec<f64>> {
    a.diagonal()?
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d == 0.0 || !d.is_finite() {
                Err(Error::Setup(format!("AMG level {level}: zero diagonal in row {i}")))
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// Greedy aggregation. Returns the aggregate id of each node and the count.
pub(crate) fn aggregate(a: &CsrMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).abs()).collect();
    let strong: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .filter(|(&j, &v)| j != i && v.abs() > theta * (diag[i] * diag[j]).sqrt())
                .map(|(&j, &v)| (j, v.abs()))
                .collect()
        })
        .collect();

    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;

    for i in 0..n {
        if agg[i] != NONE || strong[i].is_empty() {
            continue;
        }
        if strong[i].iter().all(|&(j, _)| agg[j] == NONE) {
            agg[i] = count;
            for &(j, _) in &strong[i] {
                agg[j] = count;
            }
            count += 1;
        }
    }

    let first_pass = agg.clone();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let best = strong[i]
            .iter()
            .filter(|&&(j, _)| first_pass[j] != NONE)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        if let Some(&(j, _)) = best {
            agg[i] = first_pass[j];
        }
    }

    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        agg[i] = count;
        for &(j, _) in &strong[i] {
            if agg[j] == NONE {
                agg[j] = count;
            }
        }
        count += 1;
    }
    (agg, count)
}

/// One matching pass: each unmatched node pairs with its strongest unmatched
/// strong neighbour (first in column order on ties), else stays single.
fn match_pairs(a: &CsrMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).abs()).collect();
    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let (cols, vals) = a.row(i);
        let mut best: Option<(usize, f64)> = None;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i || agg[j] != NONE || v.abs() <= theta * (diag[i] * diag[j]).sqrt() {
                continue;
            }
            if best.map_or(true, |(_, b)| v.abs() > b) {
                best = Some((j, v.abs()));
            }
        }
        agg[i] = count;
        if let Some((j, _)) = best {
            agg[j] = count;
        }
        count += 1;
    }
    (agg, count)
}

pub(crate) fn aggregate_pairwise(a: &CsrMatrix, theta: f64, passes: u32) -> Result<(Vec<usize>, usize)> {
    let mut agg: Vec<usize> = (0..a.nrows()).collect();
    let mut count = a.nrows();
    let mut m = a.clone();
    for pass in 0..passes {
        let (pairs, c) = match_pairs(&m, theta);
        if c == count {
            break;
        }
        agg.iter_mut().for_each(|g| *g = pairs[*g]);
        count = c;
        if pass + 1 < passes {
            let p = prolongator(&pairs, c);
            m = p.transpose().matmat(&m)?.matmat(&p)?;
        }
    }
    Ok((agg, count))
}

fn prolongator(aggregates: &[usize], n_coarse: usize) -> CsrMatrix {
    let n = aggregates.len();
    CsrMatrix::new(n, n_coarse, (0..=n).collect(), aggregates.to_vec(), vec![1.0; n])
        .expect("valid piecewise-constant prolongator")
}

impl Amg {
    pub fn new(a: &CsrMatrix, params: &AmgParams) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dims("amg (square)", a.nrows(), a.ncols()));
        }
        let mut levels = Vec::new();
        let mut current = a.clone();
        let coarse = loop {
            let lvl = levels.len();
            let n = current.nrows();
            let inv_diag = inverse_diagonal(&current, lvl)?;
            if n <= params.coarse_size || lvl + 1 >= params.max_levels {
                levels.push(Level {
                    a: current.clone(),
                    inv_diag,
                    aggregates: Vec::new(),
                    n_coarse: 0,
                });
                break Self::coarse_solver(&current, lvl)?;
            }
            let (aggregates, n_coarse) = match params.aggregation {
                Aggregation::Greedy => aggregate(&current, params.threshold),
                Aggregation::Pairwise(passes) => aggregate_pairwise(&current, params.threshold, passes)?,
            };
            if n_coarse >= n {
                log::warn!("AMG coarsening stagnated at level {lvl} ({n} rows); solving this level directly");
                levels.push(Level {
                    a: current.clone(),
                    inv_diag,
                    aggregates: Vec::new(),
                    n_coarse: 0,
                });
                break Self::coarse_solver(&current, lvl)?;
            }
            let p = prolongator(&aggregates, n_coarse);
            let coarse_a = p.transpose().matmat(&current)?.matmat(&p)?;
            levels.push(Level {
                a: current,
                inv_diag,
                aggregates,
                n_coarse,
            });
            current = coarse_a;
        };
        Ok(Self {
            levels,
            coarse,
            params: params.clone(),
        })
    }

    fn coarse_solver(a: &CsrMatrix, lvl: usize) -> Result<CoarseSolve> {
        if a.nrows() <= STAGNATION_DENSE_LIMIT {
            DenseLu::factor(&a.to_dense())
                .map(CoarseSolve::Dense)
                .map_err(|e| Error::Setup(format!("AMG coarse level {lvl}: {e}")))
        } else {
            log::warn!("AMG coarse level {lvl} has {} rows; using 20 Jacobi sweeps", a.nrows());
            Ok(CoarseSolve::Smooth(20))
        }
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Rows per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    fn smooth(level: &Level, b: &[f64], x: &mut [f64], sweeps: usize, omega: f64, r: &mut [f64]) {
        for _ in 0..sweeps {
            level.a.spmv_unchecked(x, r);
            for i in 0..x.len() {
                x[i] += omega * level.inv_diag[i] * (b[i] - r[i]);
            }
        }
    }

    fn cycle(&self, lvl: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[lvl];
        let n = b.len();
        if lvl + 1 == self.levels.len() {
            match &self.coarse {
                CoarseSolve::Dense(lu) => lu.solve_into(b, x),
                CoarseSolve::Smooth(s) => {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    let mut r = vec![0.0; n];
                    Self::smooth(level, b, x, *s, self.params.omega, &mut r);
                }
            }
            return;
        }
        let mut r = vec![0.0; n];
        x.iter_mut().for_each(|v| *v = 0.0);
        Self::smooth(level, b, x, self.params.pre_sweeps, self.params.omega, &mut r);
        let visits = match self.params.cycle {
            AmgCycle::V => 1,
            AmgCycle::W => 2,
        };
        let mut ec = vec![0.0; level.n_coarse];
        let mut rc = vec![0.0; level.n_coarse];
        for _ in 0..visits {
            level.a.spmv_unchecked(x, &mut r);
            rc.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                rc[level.aggregates[i]] += b[i] - r[i];
            }
            self.cycle(lvl + 1, &rc, &mut ec);
            for i in 0..n {
                x[i] += self.params.correction_scale * ec[level.aggregates[i]];
            }
        }
        Self::smooth(level, b, x, self.params.post_sweeps, self.params.omega, &mut r);
    }
}

impl Preconditioner for Amg {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }
}
