//! Block preconditioning for sparse saddle-point and multi-field linear systems.
//!
//! A monolithic [`CsrMatrix`] carries field metadata through a
//! [`SplittableMatrix`], so sub-blocks over any combination of fields can be
//! extracted. Solvers and preconditioners are never wired together in code:
//! the whole nested tree (Krylov method, fieldsplit type, Schur factorization,
//! inner solvers, PCD components) is read from an [`OptionsDb`] at setup time.
//!
//! ```
//! use blockpc::{problems, KrylovSolver, OptionsDb, PcContext};
//!
//! let sys = problems::gen_mixed_poisson(16, 0).unwrap();
//! let db = OptionsDb::parse_args(&[
//!     "-ksp_type", "gmres",
//!     "-pc_type", "fieldsplit",
//!     "-pc_fieldsplit_type", "schur",
//!     "-pc_fieldsplit_schur_fact_type", "upper",
//!     "-pc_fieldsplit_schur_precondition", "user",
//!     "-fieldsplit_q_ksp_type", "preonly",
//!     "-fieldsplit_q_pc_type", "jacobi",
//!     "-fieldsplit_p_ksp_type", "preonly",
//!     "-fieldsplit_p_pc_type", "amg",
//! ]).unwrap();
//! let ctx = PcContext::default().with_user_schur(sys.s_dg.clone());
//! let mut solver = KrylovSolver::from_splittable(&db.scope(), sys.k.clone(), &ctx).unwrap();
//! let mut x = vec![0.0; sys.b.len()];
//! let report = solver.solve(&sys.b, &mut x).unwrap();
//! assert!(report.is_converged());
//! ```

pub mod dense;
pub mod driver;
mod error;
pub mod krylov;
pub mod layout;
pub mod options;
pub mod precond;
pub mod problems;
pub mod sparse;

pub use error::{Error, Result};
pub use krylov::{
    ConvergedReason, KrylovMethod, KrylovSolver, LinearOperator, NormType, PcSide, SolveReport,
    SolverConfig,
};
pub use layout::{BlockLayout, FieldSpec, IndexSet, SplittableMatrix};
pub use options::{OptionsDb, OptionsScope};
pub use precond::{PcContext, PcOperand, PcdContext, PcdVariant, Preconditioner};
pub use sparse::CsrMatrix;
