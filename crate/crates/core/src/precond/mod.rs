//! Preconditioners and the options-driven factory that composes them.
//!
//! `{prefix}pc_type` selects the preconditioner:
//!
//! | value        | preconditioner                                            |
//! |--------------|-----------------------------------------------------------|
//! | `none`       | identity (default)                                        |
//! | `jacobi`     | inverse diagonal                                          |
//! | `bjacobi`    | dense LU per diagonal block of `pc_bjacobi_block_size`    |
//! | `ilu`        | ILU(0)                                                    |
//! | `icc`        | IC(0)                                                     |
//! | `amg`        | plain-aggregation AMG, V- or W-cycle                      |
//! | `lu`         | dense LU (at most 5000 rows)                              |
//! | `fieldsplit` | additive / multiplicative / Schur block preconditioner    |
//! | `pcd_vx`     | PCD `sign·Mp⁻¹·Fp·Ap⁻¹`                                  |
//! | `pcd_vy`     | PCD `sign·Ap⁻¹·Fp·Mp⁻¹`                                  |

mod amg;
mod basic;
mod fieldsplit;
mod ilu;
mod pcd;

use std::rc::Rc;

pub use amg::{Aggregation, Amg, AmgCycle, AmgParams};
pub use basic::{BlockJacobi, DenseLuPc, Jacobi, DENSE_LU_MAX_ROWS};
pub use fieldsplit::{FieldSplit, FieldSplitType, SchurComplement, SchurFactType, SchurPrecondition};
pub use ilu::{Ic0, Ilu0};
pub use pcd::{Pcd, PcdContext, PcdVariant};

use crate::krylov::SolveReport;
use crate::layout::SplittableMatrix;
use crate::options::OptionsScope;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub const DEFAULT_PC_TYPE: &str = "none";

/// Approximate action of an inverse, `z ≈ P⁻¹r`.
///
/// Stationary preconditioners are linear maps. Preconditioners that wrap
/// iterative inner solves are not, and need a flexible outer method.
pub trait Preconditioner {
    /// Overwrites `z`. Lengths are guaranteed by the caller.
    fn apply(&mut self, r: &[f64], z: &mut [f64]);

    /// Reports of nested solves, if any.
    fn sub_reports(&self) -> Vec<SolveReport> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl<F: FnMut(&[f64], &mut [f64])> Preconditioner for F {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        self(r, z)
    }
}

/// The matrix a preconditioner is built from.
#[derive(Debug, Clone)]
pub enum PcOperand {
    Splittable(Rc<SplittableMatrix>),
    Matrix(Rc<CsrMatrix>),
    /// Matrix-free operator with no assembled preconditioning matrix.
    None,
}

impl PcOperand {
    pub fn matrix(&self) -> Option<&CsrMatrix> {
        match self {
            PcOperand::Splittable(m) => Some(m.matrix()),
            PcOperand::Matrix(m) => Some(m),
            PcOperand::None => None,
        }
    }
}

/// Caller-provided matrices that the options tree can refer to.
#[derive(Debug, Clone, Default)]
pub struct PcContext {
    /// Used when `pc_fieldsplit_schur_precondition user`.
    pub user_schur: Option<Rc<CsrMatrix>>,
    /// Used by `pc_type pcd_vx|pcd_vy`.
    pub pcd: Option<Rc<PcdContext>>,
}

impl PcContext {
    pub fn with_user_schur(mut self, s: CsrMatrix) -> Self {
        self.user_schur = Some(Rc::new(s));
        self
    }

    pub fn with_pcd(mut self, pcd: PcdContext) -> Self {
        self.pcd = Some(Rc::new(pcd));
        self
    }
}

/// Builds the preconditioner named by `{prefix}pc_type`, recursing through
/// child scopes for composite types.
pub fn pc_from_options(
    scope: &OptionsScope<'_>,
    pmat: &PcOperand,
    ctx: &PcContext,
) -> Result<Box<dyn Preconditioner>> {
    let key = scope.full_key("pc_type");
    let pc_type = scope.get_str("pc_type", DEFAULT_PC_TYPE).to_ascii_lowercase();
    let need_matrix = || {
        pmat.matrix().ok_or_else(|| {
            Error::config(&key, format!("pc_type {pc_type} needs an assembled matrix"))
        })
    };
    let tagged = |e: Error| match e {
        Error::Setup(msg) => Error::Setup(format!("{key}={pc_type}: {msg}")),
        other => other,
    };
    let pc: Box<dyn Preconditioner> = match pc_type.as_str() {
        "none" => Box::new(Identity),
        "jacobi" => Box::new(Jacobi::new(need_matrix()?).map_err(tagged)?),
        "bjacobi" => {
            let bs = scope.get("pc_bjacobi_block_size", 1usize)?;
            Box::new(BlockJacobi::new(need_matrix()?, bs).map_err(tagged)?)
        }
        "ilu" => {
            let shift = scope.get("pc_factor_shift", 0.0)?;
            Box::new(Ilu0::with_shift(need_matrix()?, shift).map_err(tagged)?)
        }
        "icc" => {
            let shift = scope.get("pc_factor_shift", 0.0)?;
            Box::new(Ic0::with_shift(need_matrix()?, shift).map_err(tagged)?)
        }
        "amg" => {
            let params = AmgParams::from_options(scope)?;
            Box::new(Amg::new(need_matrix()?, &params).map_err(tagged)?)
        }
        "lu" => Box::new(DenseLuPc::new(need_matrix()?).map_err(tagged)?),
        "fieldsplit" => match pmat {
            PcOperand::Splittable(m) => Box::new(FieldSplit::from_options(scope, m, ctx)?),
            _ => {
                return Err(Error::config(
                    key,
                    "splittable matrix required: fieldsplit needs a matrix with field layout",
                ))
            }
        },
        "pcd_vx" | "pcd_vy" => {
            let variant = if pc_type == "pcd_vx" { PcdVariant::VX } else { PcdVariant::VY };
            let pcd_ctx = ctx
                .pcd
                .as_ref()
                .ok_or_else(|| Error::config(&key, "PCD requires Mp, Ap, Fp in the preconditioner context"))?;
            Box::new(Pcd::from_options(scope, pcd_ctx, variant, ctx)?)
        }
        other => {
            return Err(Error::config(
                key,
                format!(
                    "unknown pc_type '{other}' (expected none, jacobi, bjacobi, ilu, icc, amg, lu, fieldsplit, pcd_vx, pcd_vy)"
                ),
            ))
        }
    };
    Ok(pc)
}
