//! Pressure convection-diffusion (PCD) approximations of the inverse
//! Navier-Stokes Schur complement.
//!
//! * `vX`: `z = sign · Mp⁻¹ · Fp · Ap⁻¹ · r`
//! * `vY`: `z = sign · Ap⁻¹ · Fp · Mp⁻¹ · r`
//!
//! `Mp⁻¹` and `Ap⁻¹` are inner solvers configured under `{prefix}pcd_mp_` and
//! `{prefix}pcd_ap_`. Boundary conditions on `Ap` and `Fp` are the caller's
//! responsibility; the matrices are used as given.

use std::rc::Rc;

use super::{PcContext, PcOperand, Preconditioner};
use crate::krylov::{KrylovSolver, LinearOperator, SolveReport};
use crate::options::OptionsScope;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcdVariant {
    VX,
    VY,
}

/// Pressure-space mass, Laplacian and convection-diffusion operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PcdContext {
    pub mp: CsrMatrix,
    pub ap: CsrMatrix,
    pub fp: CsrMatrix,
}

impl PcdContext {
    pub fn new(mp: CsrMatrix, ap: CsrMatrix, fp: CsrMatrix) -> Result<Self> {
        let n = mp.nrows();
        for (name, m) in [("Mp", &mp), ("Ap", &ap), ("Fp", &fp)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Setup(format!(
                    "PCD operator {name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { mp, ap, fp })
    }

    pub fn dim(&self) -> usize {
        self.mp.nrows()
    }
}

pub struct Pcd {
    variant: PcdVariant,
    sign: f64,
    fp: CsrMatrix,
    mp_solver: KrylovSolver,
    ap_solver: KrylovSolver,
    t1: Vec<f64>,
    t2: Vec<f64>,
}

impl Pcd {
    pub fn new(variant: PcdVariant, sign: f64, ctx: &PcdContext, mp_solver: KrylovSolver, ap_solver: KrylovSolver) -> Result<Self> {
        let n = ctx.dim();
        if mp_solver.dim() != n || ap_solver.dim() != n {
            return Err(Error::Setup("PCD inner solver dimension mismatch".into()));
        }
        Ok(Self {
            variant,
            sign,
            fp: ctx.fp.clone(),
            mp_solver,
            ap_solver,
            t1: vec![0.0; n],
            t2: vec![0.0; n],
        })
    }

    /// Reads `{prefix}pcd_sign` (default −1) and builds the inner solvers on
    /// `{prefix}pcd_mp_` and `{prefix}pcd_ap_`.
    pub fn from_options(scope: &OptionsScope<'_>, ctx: &Rc<PcdContext>, variant: PcdVariant, pc_ctx: &PcContext) -> Result<Self> {
        PcdContext::new(ctx.mp.clone(), ctx.ap.clone(), ctx.fp.clone())?;
        let sign = scope.get("pcd_sign", -1.0)?;
        let build = |seg: &str, m: &CsrMatrix| -> Result<KrylovSolver> {
            let m = Rc::new(m.clone());
            let op: Rc<dyn LinearOperator> = m.clone();
            KrylovSolver::from_options(&scope.child(seg), op, PcOperand::Matrix(m), pc_ctx)
        };
        let mp_solver = build("pcd_mp", &ctx.mp)?;
        let ap_solver = build("pcd_ap", &ctx.ap)?;
        Self::new(variant, sign, ctx, mp_solver, ap_solver)
    }
}

impl Preconditioner for Pcd {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        let (first, second) = match self.variant {
            PcdVariant::VX => (&mut self.ap_solver, &mut self.mp_solver),
            PcdVariant::VY => (&mut self.mp_solver, &mut self.ap_solver),
        };
        first.apply(r, &mut self.t1);
        self.fp.spmv_unchecked(&self.t1, &mut self.t2);
        second.apply(&self.t2, z);
        if self.sign != 1.0 {
            z.iter_mut().for_each(|v| *v *= self.sign);
        }
    }

    fn sub_reports(&self) -> Vec<SolveReport> {
        let mut out = self.mp_solver.sub_reports();
        out.extend(self.ap_solver.sub_reports());
        out
    }
}
