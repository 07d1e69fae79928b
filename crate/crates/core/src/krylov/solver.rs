use std::rc::Rc;

use super::{solve, KrylovMethod, LinearOperator, PcSide, SolveReport, SolverConfig};
use crate::layout::SplittableMatrix;
use crate::options::OptionsScope;
use crate::precond::{pc_from_options, Identity, PcContext, PcOperand, Preconditioner};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// A configured Krylov method bound to an operator and a preconditioner.
///
/// Also implements [`Preconditioner`] (zero initial guess per application),
/// which is how inner solves nest inside fieldsplit and PCD.
pub struct KrylovSolver {
    prefix: String,
    config: SolverConfig,
    op: Rc<dyn LinearOperator>,
    pc: Box<dyn Preconditioner>,
    pc_type: String,
    solves: usize,
    total_iterations: usize,
    last: Option<SolveReport>,
}

impl KrylovSolver {
    pub fn new(config: SolverConfig, op: Rc<dyn LinearOperator>, pc: Box<dyn Preconditioner>) -> Result<Self> {
        config.validate().map_err(|m| Error::config("ksp_type", m))?;
        if op.nrows() != op.ncols() {
            return Err(Error::dims("KrylovSolver (square operator)", op.nrows(), op.ncols()));
        }
        Ok(Self {
            prefix: String::new(),
            config,
            op,
            pc,
            pc_type: "custom".into(),
            solves: 0,
            total_iterations: 0,
            last: None,
        })
    }

    /// Reads `{prefix}ksp_type`, `ksp_rtol`, `ksp_atol`, `ksp_max_it`,
    /// `ksp_gmres_restart`, `ksp_pc_side` and `ksp_monitor`, then builds the
    /// preconditioner from the same scope (`{prefix}pc_type`, ...).
    pub fn from_options(
        scope: &OptionsScope<'_>,
        op: Rc<dyn LinearOperator>,
        pmat: PcOperand,
        ctx: &PcContext,
    ) -> Result<Self> {
        let config = config_from_options(scope)?;
        let pc_type = scope.db().peek(&scope.full_key("pc_type")).unwrap_or("none").to_string();
        let pc = pc_from_options(scope, &pmat, ctx)?;
        let mut solver = Self::new(config, op, pc).map_err(|e| match e {
            Error::Config { msg, .. } => Error::config(scope.full_key("ksp_type"), msg),
            other => other,
        })?;
        solver.prefix = scope.prefix().to_string();
        solver.pc_type = pc_type;
        Ok(solver)
    }

    /// Solver over a splittable matrix, which also serves as the
    /// preconditioning matrix (so `pc_type fieldsplit` is available).
    pub fn from_splittable(scope: &OptionsScope<'_>, k: SplittableMatrix, ctx: &PcContext) -> Result<Self> {
        let k = Rc::new(k);
        let op: Rc<dyn LinearOperator> = Rc::new(k.matrix().clone());
        Self::from_options(scope, op, PcOperand::Splittable(k), ctx)
    }

    pub fn from_matrix(scope: &OptionsScope<'_>, a: CsrMatrix, ctx: &PcContext) -> Result<Self> {
        let a = Rc::new(a);
        let op: Rc<dyn LinearOperator> = a.clone();
        Self::from_options(scope, op, PcOperand::Matrix(a), ctx)
    }

    pub fn with_prefix(mut self, prefix: impl Into<String>) -> Self {
        self.prefix = prefix.into();
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn operator(&self) -> &Rc<dyn LinearOperator> {
        &self.op
    }

    /// Solves `A·x = b` starting from the incoming `x`.
    pub fn solve(&mut self, b: &[f64], x: &mut [f64]) -> Result<SolveReport> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::dims("KrylovSolver::solve (rhs)", n, b.len()));
        }
        if x.len() != n {
            return Err(Error::dims("KrylovSolver::solve (solution)", n, x.len()));
        }
        Ok(self.solve_unchecked(b, x))
    }

    fn solve_unchecked(&mut self, b: &[f64], x: &mut [f64]) -> SolveReport {
        if self.config.monitor {
            eprintln!("{}ksp ({}) solve", self.prefix, self.config.method.as_str());
        }
        let mut report = solve(self.op.as_ref(), b, x, self.pc.as_mut(), &self.config);
        report.prefix = self.prefix.clone();
        report.pc_type = self.pc_type.clone();
        report.sub_reports = self.pc.sub_reports();
        self.solves += 1;
        self.total_iterations += report.iterations;
        self.last = Some(report.clone());
        report
    }

    /// Last report, with `solves`/`total_iterations` accumulated over all calls.
    pub fn summary(&self) -> Option<SolveReport> {
        self.last.as_ref().map(|r| SolveReport {
            solves: self.solves,
            total_iterations: self.total_iterations,
            ..r.clone()
        })
    }
}

impl Preconditioner for KrylovSolver {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().for_each(|v| *v = 0.0);
        let report = self.solve_unchecked(r, z);
        if !report.is_converged() && report.converged != super::ConvergedReason::MaxIt {
            log::debug!("inner solve {} ended with {:?}", self.prefix, report.converged);
        }
    }

    fn sub_reports(&self) -> Vec<SolveReport> {
        self.summary().into_iter().collect()
    }
}

/// Identity-preconditioned solver with the given config; convenient in tests.
pub fn unpreconditioned(config: SolverConfig, op: Rc<dyn LinearOperator>) -> Result<KrylovSolver> {
    KrylovSolver::new(config, op, Box::new(Identity))
}

pub(crate) fn config_from_options(scope: &OptionsScope<'_>) -> Result<SolverConfig> {
    let method = scope.get_choice("ksp_type", "gmres", &KrylovMethod::CHOICES)?;
    let defaults = SolverConfig::new(method);
    let side_default = match defaults.side {
        PcSide::Left => "left",
        PcSide::Right => "right",
    };
    let side = scope.get_choice(
        "ksp_pc_side",
        side_default,
        &[("left", PcSide::Left), ("right", PcSide::Right)],
    )?;
    let config = SolverConfig {
        method,
        rtol: scope.get("ksp_rtol", defaults.rtol)?,
        atol: scope.get("ksp_atol", defaults.atol)?,
        max_it: scope.get("ksp_max_it", defaults.max_it)?,
        restart: scope.get("ksp_gmres_restart", defaults.restart)?,
        side,
        monitor: scope.get_bool("ksp_monitor", false)?,
    };
    config
        .validate()
        .map_err(|m| Error::config(scope.full_key("ksp_type"), m))?;
    Ok(config)
}
