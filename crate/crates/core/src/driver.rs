//! Orchestration behind the command-line tool: build a problem, compose the
//! solver tree from options, solve, and collect a [`RunReport`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::krylov::{KrylovSolver, SolveReport};
use crate::layout::BlockLayout;
use crate::options::OptionsDb;
use crate::problems::{self, OseenParams, Problem};
use crate::sparse::{mtx, norm2};
use crate::{Error, Result};

/// Bumped whenever a field of [`RunReport`] changes meaning or is removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    MixedPoisson,
    OseenCavity,
    AlgebraicDemo,
    FromFiles,
}

impl ProblemKind {
    pub const NAMES: [&'static str; 4] = ["mixed-poisson", "oseen-cavity", "algebraic-demo", "from-files"];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::MixedPoisson => "mixed-poisson",
            Self::OseenCavity => "oseen-cavity",
            Self::AlgebraicDemo => "algebraic-demo",
            Self::FromFiles => "from-files",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mixed-poisson" => Self::MixedPoisson,
            "oseen-cavity" => Self::OseenCavity,
            "algebraic-demo" => Self::AlgebraicDemo,
            "from-files" => Self::FromFiles,
            _ => {
                return Err(Error::Problem(format!(
                    "unknown problem '{s}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Problem identity and parameters; enough to regenerate the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub problem: ProblemKind,
    pub n: usize,
    pub viscosity: f64,
    pub seed: u64,
    pub indir: Option<PathBuf>,
}

impl ProblemSpec {
    pub fn new(problem: ProblemKind) -> Self {
        Self { problem, n: 32, viscosity: 0.1, seed: 0, indir: None }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn build(&self) -> Result<Problem> {
        match self.problem {
            ProblemKind::MixedPoisson => Ok(problems::gen_mixed_poisson(self.n, self.seed)?.into()),
            ProblemKind::OseenCavity => {
                Ok(problems::gen_oseen_with(&OseenParams::new(self.n, self.viscosity, self.seed))?.into())
            }
            ProblemKind::AlgebraicDemo => {
                let (k, b) = problems::gen_algebraic_demo();
                Problem::new(k, b)
            }
            ProblemKind::FromFiles => {
                let dir = self
                    .indir
                    .as_ref()
                    .ok_or_else(|| Error::Problem("from-files needs an input directory (--indir)".into()))?;
                Problem::load(dir)
            }
        }
    }
}

/// Wall-clock seconds per phase, from a monotonic clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate: f64,
    pub setup: f64,
    pub solve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub problem: ProblemSpec,
    pub dofs: usize,
    pub fields: IndexMap<String, usize>,
    /// Every option read while building the solver, with its effective value.
    pub options: IndexMap<String, String>,
    pub unused_options: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    pub solve: SolveReport,
    pub timings: Timings,
    /// `‖b − K·x‖₂`
    pub true_residual: f64,
    /// `‖b − K·x‖₂ / ‖b‖₂`
    pub relative_residual: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                location: "report".into(),
                msg: format!("schema version {} (supported: {SCHEMA_VERSION})", r.schema_version),
            });
        }
        Ok(r)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "problem {} ({} dofs): {} after {} iterations, relative true residual {:.3e}\n",
            self.problem.problem, self.dofs, self.solve.converged, self.iterations, self.relative_residual
        );
        s += &format!(
            "time: generate {:.3}s, setup {:.3}s, solve {:.3}s\n",
            self.timings.generate, self.timings.setup, self.timings.solve
        );
        fn walk(r: &SolveReport, depth: usize, out: &mut String) {
            let name = if r.prefix.is_empty() { "(outer)" } else { r.prefix.as_str() };
            out.push_str(&format!(
                "{:indent$}{name}: {} / pc {} : {} solves, {} iterations\n",
                "",
                r.method.as_str(),
                r.pc_type,
                r.solves,
                r.total_iterations,
                indent = 2 * depth
            ));
            for sub in &r.sub_reports {
                walk(sub, depth + 1, out);
            }
        }
        walk(&self.solve, 0, &mut s);
        if !self.unused_options.is_empty() {
            s += &format!("unused options: {}\n", self.unused_options.join(", "));
        }
        s
    }
}

/// Merges option files in order, then command-line tokens; later sources win.
pub fn load_options<P: AsRef<Path>, S: AsRef<str>>(files: &[P], tokens: &[S]) -> Result<OptionsDb> {
    let mut db = OptionsDb::new();
    for f in files {
        db.merge(&OptionsDb::read_file(f)?);
    }
    db.merge(&OptionsDb::parse_args(tokens)?);
    Ok(db)
}

/// Builds and solves one problem from zero initial guess. Configuration
/// errors (including unused options under `strict`) are returned as `Err`;
/// a solve that does not converge is reported, not an error.
pub fn run_solve(spec: &ProblemSpec, db: &OptionsDb, strict: bool) -> Result<(RunReport, Vec<f64>)> {
    let problem = {
        let t = Instant::now();
        (spec.build()?, t.elapsed().as_secs_f64())
    };
    run_problem(spec, problem.0, problem.1, db, strict)
}

/// As [`run_solve`] with an already built problem.
pub fn run_problem(
    spec: &ProblemSpec,
    problem: Problem,
    generate_seconds: f64,
    db: &OptionsDb,
    strict: bool,
) -> Result<(RunReport, Vec<f64>)> {
    db.clear_marks();
    let t = Instant::now();
    let ctx = problem.pc_context();
    let mut solver = KrylovSolver::from_splittable(&db.scope(), problem.k.clone(), &ctx)?;
    let setup = t.elapsed().as_secs_f64();
    db.check_unused(strict)?;

    let mut x = vec![0.0; problem.dofs()];
    let t = Instant::now();
    let report = solver.solve(&problem.b, &mut x)?;
    let solve = t.elapsed().as_secs_f64();

    let kx = problem.k.matrix().spmv(&x)?;
    let r: Vec<f64> = problem.b.iter().zip(&kx).map(|(b, k)| b - k).collect();
    let true_residual = norm2(&r);
    let bnorm = norm2(&problem.b);
    let fields = problem
        .k
        .row_layout()
        .fields()
        .iter()
        .map(|f| (f.name.clone(), f.indices.len()))
        .collect();
    Ok((
        RunReport {
            schema_version: SCHEMA_VERSION,
            problem: spec.clone(),
            dofs: problem.dofs(),
            fields,
            options: db.resolved().into_iter().collect(),
            unused_options: db.unused_keys(),
            converged: report.is_converged(),
            iterations: report.iterations,
            solve: report,
            timings: Timings { generate: generate_seconds, setup, solve },
            true_residual,
            relative_residual: if bnorm > 0.0 { true_residual / bnorm } else { true_residual },
        },
        x,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub dofs: usize,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub reason: String,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub relative_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub problem: ProblemKind,
    pub rows: Vec<SweepRow>,
    pub runs: Vec<RunReport>,
}

impl SweepReport {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn iterations(&self) -> Vec<Option<usize>> {
        self.rows.iter().map(|r| r.iterations).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::io(path, e.into()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Runs `base` at every `n` in `grid`. A failing row (configuration error or
/// no convergence) is recorded and the sweep continues.
pub fn sweep(base: &ProblemSpec, grid: &[usize], db: &OptionsDb, strict: bool) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::config("n", "sweep grid is empty"));
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &n in grid {
        let spec = base.clone().with_n(n);
        match run_solve(&spec, db, strict) {
            Ok((report, _)) => {
                rows.push(SweepRow {
                    n,
                    dofs: report.dofs,
                    iterations: Some(report.iterations),
                    converged: report.converged,
                    reason: report.solve.converged.to_string(),
                    setup_seconds: report.timings.setup,
                    solve_seconds: report.timings.solve,
                    relative_residual: Some(report.relative_residual),
                });
                runs.push(report);
            }
            Err(e) => {
                log::error!("sweep row n={n} failed: {e}");
                rows.push(SweepRow {
                    n,
                    dofs: 0,
                    iterations: None,
                    converged: false,
                    reason: e.to_string(),
                    setup_seconds: 0.0,
                    solve_seconds: 0.0,
                    relative_residual: None,
                });
            }
        }
    }
    Ok(SweepReport { schema_version: SCHEMA_VERSION, problem: base.problem, rows, runs })
}

/// Metadata about dumped system files; inconsistencies are collected in
/// `issues` rather than returned as errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoReport {
    pub nrows: usize,
    pub ncols: usize,
    pub nnz: usize,
    pub symmetric: bool,
    pub fields: IndexMap<String, usize>,
    pub rhs_len: Option<usize>,
    pub auxiliary: Vec<String>,
    pub issues: Vec<String>,
}

impl fmt::Display for InfoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "matrix: {} x {}, {} nonzeros, symmetric: {}", self.nrows, self.ncols, self.nnz, self.symmetric)?;
        for (name, len) in &self.fields {
            writeln!(f, "field {name}: {len}")?;
        }
        if let Some(n) = self.rhs_len {
            writeln!(f, "rhs: {n}")?;
        }
        for a in &self.auxiliary {
            writeln!(f, "auxiliary: {a}")?;
        }
        for i in &self.issues {
            writeln!(f, "issue: {i}")?;
        }
        Ok(())
    }
}

pub fn info(dir: impl AsRef<Path>) -> Result<InfoReport> {
    let dir = dir.as_ref();
    let k = mtx::read_matrix(dir.join(problems::MATRIX_FILE))?;
    let mut issues = Vec::new();
    if !k.is_square() {
        issues.push(format!("matrix is not square ({} x {})", k.nrows(), k.ncols()));
    }
    let mut fields = IndexMap::new();
    let layout_path = dir.join(problems::LAYOUT_FILE);
    if layout_path.exists() {
        let layout = BlockLayout::read(&layout_path)?;
        for fs in layout.fields() {
            fields.insert(fs.name.clone(), fs.indices.len());
        }
        if layout.global_size() != k.nrows() || layout.global_size() != k.ncols() {
            issues.push(format!(
                "layout covers {} dofs but matrix is {} x {}",
                layout.global_size(),
                k.nrows(),
                k.ncols()
            ));
        }
    } else {
        issues.push(format!("missing {}", layout_path.display()));
    }
    let rhs_path = dir.join(problems::RHS_FILE);
    let rhs_len = if rhs_path.exists() { Some(mtx::read_vector(&rhs_path)?.len()) } else { None };
    if let Some(n) = rhs_len.filter(|&n| n != k.nrows()) {
        issues.push(format!("rhs has {n} entries, matrix has {} rows", k.nrows()));
    }
    let auxiliary = std::iter::once(problems::SCHUR_FILE)
        .chain(problems::PCD_FILES)
        .filter(|f| dir.join(f).exists())
        .map(String::from)
        .collect();
    Ok(InfoReport {
        nrows: k.nrows(),
        ncols: k.ncols(),
        nnz: k.nnz(),
        symmetric: k.is_square() && k.is_symmetric(1e-12),
        fields,
        rhs_len,
        auxiliary,
        issues,
    })
}
