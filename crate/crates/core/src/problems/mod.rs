//! Deterministic structured-grid test problems.
//!
//! Random forcing comes from [`SplitMix64`], so every generator is a pure
//! function of its parameters and seed on all platforms.

mod demo;
mod mixed_poisson;
mod oseen;
mod rng;

use std::path::Path;

pub use demo::gen_algebraic_demo;
pub use mixed_poisson::{cell_source, divergence, flux_mass, gen_mixed_poisson, num_fluxes, MixedPoissonSystem};
pub use oseen::{gen_oseen_cavity, gen_oseen_with, wind, OseenParams, OseenSystem};
pub use rng::SplitMix64;

use crate::layout::{BlockLayout, SplittableMatrix};
use crate::precond::{PcContext, PcdContext};
use crate::sparse::{mtx, CsrMatrix};
use crate::{Error, Result};

pub const MATRIX_FILE: &str = "K.mtx";
pub const RHS_FILE: &str = "b.mtx";
pub const LAYOUT_FILE: &str = "layout.json";
pub const SCHUR_FILE: &str = "S.mtx";
pub const PCD_FILES: [&str; 3] = ["Mp.mtx", "Ap.mtx", "Fp.mtx"];

/// A system plus whatever auxiliary matrices the options tree may reference.
#[derive(Debug, Clone)]
pub struct Problem {
    pub k: SplittableMatrix,
    pub b: Vec<f64>,
    pub user_schur: Option<CsrMatrix>,
    pub pcd: Option<PcdContext>,
}

impl Problem {
    pub fn new(k: SplittableMatrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != k.matrix().nrows() {
            return Err(Error::dims("problem rhs", k.matrix().nrows(), b.len()));
        }
        Ok(Self { k, b, user_schur: None, pcd: None })
    }

    pub fn dofs(&self) -> usize {
        self.b.len()
    }

    pub fn pc_context(&self) -> PcContext {
        let mut ctx = PcContext::default();
        if let Some(s) = &self.user_schur {
            ctx = ctx.with_user_schur(s.clone());
        }
        if let Some(p) = &self.pcd {
            ctx = ctx.with_pcd(p.clone());
        }
        ctx
    }

    /// Writes `K.mtx`, `b.mtx`, `layout.json` and any auxiliary matrices.
    /// Rectangular row/column layouts are not representable and are rejected.
    pub fn dump(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        if self.k.row_layout() != self.k.col_layout() {
            return Err(Error::Layout("dump needs identical row and column layouts".into()));
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        mtx::write_matrix(dir.join(MATRIX_FILE), self.k.matrix())?;
        mtx::write_vector(dir.join(RHS_FILE), &self.b)?;
        self.k.row_layout().write(dir.join(LAYOUT_FILE))?;
        if let Some(s) = &self.user_schur {
            mtx::write_matrix(dir.join(SCHUR_FILE), s)?;
        }
        if let Some(p) = &self.pcd {
            for (name, m) in PCD_FILES.iter().zip([&p.mp, &p.ap, &p.fp]) {
                mtx::write_matrix(dir.join(name), m)?;
            }
        }
        Ok(())
    }

    /// Inverse of [`Problem::dump`]. PCD operators are loaded only when all
    /// three files are present.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let k = mtx::read_matrix(dir.join(MATRIX_FILE))?;
        let layout = BlockLayout::read(dir.join(LAYOUT_FILE))?;
        let k = SplittableMatrix::square(k, layout)?;
        let mut p = Problem::new(k, mtx::read_vector(dir.join(RHS_FILE))?)?;
        let schur = dir.join(SCHUR_FILE);
        if schur.exists() {
            p.user_schur = Some(mtx::read_matrix(schur)?);
        }
        if PCD_FILES.iter().all(|f| dir.join(f).exists()) {
            let [mp, ap, fp] = PCD_FILES.map(|f| mtx::read_matrix(dir.join(f)));
            p.pcd = Some(PcdContext::new(mp?, ap?, fp?)?);
        }
        Ok(p)
    }
}

impl From<MixedPoissonSystem> for Problem {
    fn from(s: MixedPoissonSystem) -> Self {
        Self { k: s.k, b: s.b, user_schur: Some(s.s_dg), pcd: None }
    }
}

impl From<OseenSystem> for Problem {
    fn from(s: OseenSystem) -> Self {
        Self { k: s.k, b: s.b, user_schur: None, pcd: Some(s.pcd) }
    }
}
