//! Krylov methods over abstract operators.
//!
//! All methods update `x` in place, starting from its incoming value, and
//! return a [`SolveReport`]. Norms used for the stopping test:
//!
//! | method             | norm                                   |
//! |--------------------|----------------------------------------|
//! | gmres, left        | preconditioned residual `‖P⁻¹r‖`       |
//! | gmres, right       | true residual (Givens estimate)        |
//! | fgmres             | true residual (Givens estimate)        |
//! | cg                 | preconditioned residual `‖P⁻¹r‖`       |
//! | richardson         | true residual                          |
//! | preonly            | none                                   |
//!
//! Convergence is declared when that norm drops to `max(rtol·‖b̂‖, atol)`,
//! where `b̂` is the right-hand side measured in the same norm.

mod cg;
mod gmres;
mod report;
mod simple;
mod solver;

use serde::{Deserialize, Serialize};

pub use cg::cg;
pub use gmres::{fgmres, gmres};
pub use report::{ConvergedReason, NormType, SolveReport};
pub use simple::{preonly, richardson};
pub use solver::{unpreconditioned, KrylovSolver};

use crate::precond::Preconditioner;

/// Anything that can compute `y = A·x`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Overwrites `y`. Callers guarantee conforming lengths.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Wraps a closure as an operator of fixed square size.
pub struct FnOperator<F: Fn(&[f64], &mut [f64])> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    Gmres,
    Fgmres,
    Cg,
    Richardson,
    Preonly,
}

impl KrylovMethod {
    pub const CHOICES: [(&'static str, KrylovMethod); 5] = [
        ("gmres", KrylovMethod::Gmres),
        ("fgmres", KrylovMethod::Fgmres),
        ("cg", KrylovMethod::Cg),
        ("richardson", KrylovMethod::Richardson),
        ("preonly", KrylovMethod::Preonly),
    ];

    pub fn as_str(self) -> &'static str {
        Self::CHOICES.iter().find(|c| c.1 == self).unwrap().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcSide {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: KrylovMethod,
    pub rtol: f64,
    pub atol: f64,
    pub max_it: usize,
    pub restart: usize,
    pub side: PcSide,
    /// Print the residual of every iteration to stderr.
    pub monitor: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: KrylovMethod::Gmres,
            rtol: 1e-5,
            atol: 1e-50,
            max_it: 10_000,
            restart: 30,
            side: PcSide::Left,
            monitor: false,
        }
    }
}

impl SolverConfig {
    pub fn new(method: KrylovMethod) -> Self {
        let side = match method {
            KrylovMethod::Fgmres => PcSide::Right,
            _ => PcSide::Left,
        };
        Self {
            method,
            side,
            ..Self::default()
        }
    }

    pub fn rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn max_it(mut self, max_it: usize) -> Self {
        self.max_it = max_it;
        self
    }

    pub fn restart(mut self, restart: usize) -> Self {
        self.restart = restart;
        self
    }

    pub fn side(mut self, side: PcSide) -> Self {
        self.side = side;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rtol >= 0.0) || !(self.atol >= 0.0) {
            return Err("tolerances must be non-negative".into());
        }
        if self.restart == 0 {
            return Err("restart must be at least 1".into());
        }
        if self.method == KrylovMethod::Fgmres && self.side == PcSide::Left {
            return Err("fgmres supports right preconditioning only".into());
        }
        Ok(())
    }

    fn reason(&self, resid: f64, bnorm: f64) -> Option<ConvergedReason> {
        if self.rtol == 0.0 && self.atol == 0.0 {
            return None;
        }
        if resid <= self.rtol * bnorm {
            Some(ConvergedReason::Rtol)
        } else if resid <= self.atol {
            Some(ConvergedReason::Atol)
        } else {
            None
        }
    }
}

/// Dispatches on `cfg.method`.
pub fn solve(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
) -> SolveReport {
    match cfg.method {
        KrylovMethod::Gmres => gmres(op, b, x, pc, cfg),
        KrylovMethod::Fgmres => fgmres(op, b, x, pc, cfg),
        KrylovMethod::Cg => cg(op, b, x, pc, cfg),
        KrylovMethod::Richardson => richardson(op, b, x, pc, cfg),
        KrylovMethod::Preonly => preonly(op, b, x, pc, cfg),
    }
}

/// `r = b − A·x`, skipping the product when `x` is identically zero.
pub(crate) fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) {
    if x.iter().all(|&v| v == 0.0) {
        r.copy_from_slice(b);
    } else {
        op.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }
}

pub(crate) fn monitor(cfg: &SolverConfig, it: usize, resid: f64) {
    if cfg.monitor {
        eprintln!("  {it:4} KSP residual norm {resid:.12e}");
    }
}
