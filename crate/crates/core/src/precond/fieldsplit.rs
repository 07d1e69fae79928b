//! Fieldsplit block preconditioners over a [`SplittableMatrix`].
//!
//! Splits default to one per layout field. `{prefix}pc_fieldsplit_<i>_fields`
//! (comma-separated field names, any order, any combination) defines split
//! `i` explicitly; the splits must then cover every field exactly once.
//! Split `i` is named by `{prefix}pc_fieldsplit_<i>_name`, else by its field
//! when it holds exactly one, else by `i`. Its solver is configured under
//! `{prefix}fieldsplit_<name>_`.
//!
//! For the Schur type, with blocks `[[A, Bt], [B, C]]` over the two splits:
//!
//! * `diag`:  `z₀ = Ã⁻¹r₀`, `z₁ = S̃⁻¹r₁`
//! * `lower`: `z₀ = Ã⁻¹r₀`, `z₁ = S̃⁻¹(r₁ − B·z₀)`
//! * `upper`: `z₁ = S̃⁻¹r₁`, `z₀ = Ã⁻¹(r₀ − Bt·z₁)`
//! * `full`:  `y₀ = Ã⁻¹r₀`, `z₁ = S̃⁻¹(r₁ − B·y₀)`, `z₀ = y₀ − Ã⁻¹(Bt·z₁)`
//!
//! The Schur solver's operator is `S = C − B·Ã⁻¹·Bt`, applied matrix-free
//! through the same `Ã⁻¹` solver; its preconditioning matrix is selected by
//! `{prefix}pc_fieldsplit_schur_precondition`.

use std::cell::RefCell;
use std::rc::Rc;

use super::{PcContext, PcOperand, Preconditioner};
use crate::krylov::{KrylovSolver, LinearOperator, SolveReport};
use crate::layout::SplittableMatrix;
use crate::options::OptionsScope;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSplitType {
    Additive,
    Multiplicative,
    Schur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurFactType {
    Diag,
    Lower,
    Upper,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurPrecondition {
    /// `C − B·diag(A)⁻¹·Bt`
    SelfP,
    /// Caller-provided matrix from [`PcContext::user_schur`].
    User,
    /// The `C` block.
    A11,
}

/// Matrix-free `S·y = C·y − B·(Ã⁻¹(Bt·y))`.
pub struct SchurComplement {
    b: CsrMatrix,
    bt: CsrMatrix,
    c: Option<CsrMatrix>,
    a_inv: Rc<RefCell<KrylovSolver>>,
}

impl SchurComplement {
    pub fn new(b: CsrMatrix, bt: CsrMatrix, c: Option<CsrMatrix>, a_inv: Rc<RefCell<KrylovSolver>>) -> Self {
        Self { b, bt, c, a_inv }
    }
}

impl LinearOperator for SchurComplement {
    fn nrows(&self) -> usize {
        self.b.nrows()
    }

    fn ncols(&self) -> usize {
        self.b.nrows()
    }

    fn apply(&self, y: &[f64], out: &mut [f64]) {
        let mut t = vec![0.0; self.bt.nrows()];
        let mut u = vec![0.0; self.bt.nrows()];
        self.bt.spmv_unchecked(y, &mut t);
        self.a_inv.borrow_mut().apply(&t, &mut u);
        self.b.spmv_unchecked(&u, out);
        out.iter_mut().for_each(|v| *v = -*v);
        if let Some(c) = &self.c {
            let mut cy = vec![0.0; out.len()];
            c.spmv_unchecked(y, &mut cy);
            for (o, v) in out.iter_mut().zip(cy) {
                *o += v;
            }
        }
    }
}

struct Split {
    name: String,
    indices: Vec<usize>,
}

enum Kind {
    Additive,
    /// `lower[k]` holds `(j, K_kj)` for `j < k`.
    Multiplicative { lower: Vec<Vec<(usize, CsrMatrix)>> },
    Schur { fact: SchurFactType, b: CsrMatrix, bt: CsrMatrix },
}

pub struct FieldSplit {
    kind: Kind,
    splits: Vec<Split>,
    solvers: Vec<Rc<RefCell<KrylovSolver>>>,
}

fn split_groups(scope: &OptionsScope<'_>, m: &SplittableMatrix) -> Result<Vec<(String, Vec<String>)>> {
    let layout = m.row_layout();
    let names = layout.field_names();
    let mut groups = Vec::new();
    for i in 0.. {
        let key = format!("pc_fieldsplit_{i}_fields");
        let Some(raw) = scope.get_opt(&key) else { break };
        let members = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                if names.contains(&s) {
                    Ok(s.to_string())
                } else if let Some(f) = s.parse::<usize>().ok().and_then(|k| names.get(k)) {
                    Ok(f.to_string())
                } else {
                    Err(Error::config(scope.full_key(&key), format!("unknown field '{s}'")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if members.is_empty() {
            return Err(Error::config(scope.full_key(&key), "empty field list"));
        }
        let name = scope.get_opt(&format!("pc_fieldsplit_{i}_name")).unwrap_or_else(|| {
            if members.len() == 1 {
                members[0].clone()
            } else {
                i.to_string()
            }
        });
        groups.push((name, members));
    }
    if groups.is_empty() {
        groups = names.iter().map(|n| (n.to_string(), vec![n.to_string()])).collect();
    } else {
        // validates disjointness and coverage
        layout
            .group_fields(&groups)
            .map_err(|e| Error::config(scope.full_key("pc_fieldsplit_0_fields"), e.to_string()))?;
    }
    Ok(groups)
}

impl FieldSplit {
    pub fn from_options(scope: &OptionsScope<'_>, m: &Rc<SplittableMatrix>, ctx: &PcContext) -> Result<Self> {
        let type_key = scope.full_key("pc_fieldsplit_type");
        let fs_type = scope.get_choice(
            "pc_fieldsplit_type",
            "multiplicative",
            &[
                ("additive", FieldSplitType::Additive),
                ("multiplicative", FieldSplitType::Multiplicative),
                ("schur", FieldSplitType::Schur),
            ],
        )?;
        if !m.matrix().is_square() || m.row_layout().field_names() != m.col_layout().field_names() {
            return Err(Error::config(type_key, "fieldsplit needs a square matrix with matching row/column fields"));
        }
        let groups = split_groups(scope, m)?;
        if groups.len() < 2 {
            return Err(Error::config(type_key, format!("fieldsplit needs at least 2 splits, found {}", groups.len())));
        }
        let splits = groups
            .iter()
            .map(|(name, fields)| {
                Ok(Split {
                    name: name.clone(),
                    indices: m.row_layout().group_indices(fields)?.to_vec(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let block_solver = |k: usize| -> Result<KrylovSolver> {
            let (name, fields) = &groups[k];
            let block = Rc::new(m.extract_block(fields, fields)?);
            let op: Rc<dyn LinearOperator> = Rc::new(block.matrix().clone());
            KrylovSolver::from_options(&scope.child(&format!("fieldsplit_{name}")), op, PcOperand::Splittable(block), ctx)
        };

        let (kind, solvers) = match fs_type {
            FieldSplitType::Additive | FieldSplitType::Multiplicative => {
                let solvers = (0..groups.len())
                    .map(|k| block_solver(k).map(|s| Rc::new(RefCell::new(s))))
                    .collect::<Result<Vec<_>>>()?;
                let kind = if fs_type == FieldSplitType::Additive {
                    Kind::Additive
                } else {
                    let lower = (0..groups.len())
                        .map(|k| {
                            (0..k)
                                .map(|j| Ok((j, m.extract_block(&groups[k].1, &groups[j].1)?.into_matrix())))
                                .filter(|blk| blk.as_ref().map_or(true, |(_, b)| b.nnz() > 0))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Kind::Multiplicative { lower }
                };
                (kind, solvers)
            }
            FieldSplitType::Schur => {
                if groups.len() != 2 {
                    return Err(Error::config(
                        type_key,
                        format!("schur fieldsplit needs exactly 2 splits, found {}", groups.len()),
                    ));
                }
                let fact = scope.get_choice(
                    "pc_fieldsplit_schur_fact_type",
                    "full",
                    &[
                        ("diag", SchurFactType::Diag),
                        ("lower", SchurFactType::Lower),
                        ("upper", SchurFactType::Upper),
                        ("full", SchurFactType::Full),
                    ],
                )?;
                let precond_key = scope.full_key("pc_fieldsplit_schur_precondition");
                let precondition = scope.get_choice(
                    "pc_fieldsplit_schur_precondition",
                    "selfp",
                    &[
                        ("selfp", SchurPrecondition::SelfP),
                        ("user", SchurPrecondition::User),
                        ("a11", SchurPrecondition::A11),
                    ],
                )?;
                let (f0, f1) = (&groups[0].1, &groups[1].1);
                let a00 = m.extract_block(f0, f0)?;
                let bt = m.extract_block(f0, f1)?.into_matrix();
                let b = m.extract_block(f1, f0)?.into_matrix();
                let c = m.extract_block(f1, f1)?.into_matrix();
                let n1 = c.nrows();

                let s_pmat = match precondition {
                    SchurPrecondition::SelfP => {
                        let d = a00.matrix().diagonal()?;
                        if let Some(i) = d.iter().position(|&v| v == 0.0) {
                            return Err(Error::config(precond_key, format!("selfp: zero diagonal in A00 row {i}")));
                        }
                        let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
                        let bdbt = b.matmat(&bt.scale_rows(&inv)?)?;
                        c.add(1.0, &bdbt, -1.0)?
                    }
                    SchurPrecondition::A11 => c.clone(),
                    SchurPrecondition::User => {
                        let s = ctx.user_schur.as_ref().ok_or_else(|| {
                            Error::config(&precond_key, "user Schur preconditioning matrix not provided")
                        })?;
                        if s.nrows() != n1 || s.ncols() != n1 {
                            return Err(Error::config(
                                precond_key,
                                format!("user Schur matrix is {}x{}, split has {n1} rows", s.nrows(), s.ncols()),
                            ));
                        }
                        (**s).clone()
                    }
                };

                let a_solver = Rc::new(RefCell::new(block_solver(0)?));
                let c_op = (c.values().iter().any(|&v| v != 0.0)).then_some(c);
                let schur: Rc<dyn LinearOperator> =
                    Rc::new(SchurComplement::new(b.clone(), bt.clone(), c_op, a_solver.clone()));
                let s_solver = KrylovSolver::from_options(
                    &scope.child(&format!("fieldsplit_{}", groups[1].0)),
                    schur,
                    PcOperand::Matrix(Rc::new(s_pmat)),
                    ctx,
                )?;
                (Kind::Schur { fact, b, bt }, vec![a_solver, Rc::new(RefCell::new(s_solver))])
            }
        };
        Ok(Self { kind, splits, solvers })
    }

    pub fn split_names(&self) -> Vec<&str> {
        self.splits.iter().map(|s| s.name.as_str()).collect()
    }

    fn gather(&self, k: usize, x: &[f64]) -> Vec<f64> {
        self.splits[k].indices.iter().map(|&i| x[i]).collect()
    }

    fn scatter(&self, k: usize, sub: &[f64], x: &mut [f64]) {
        for (&i, &v) in self.splits[k].indices.iter().zip(sub) {
            x[i] = v;
        }
    }

    fn solve_split(&self, k: usize, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        self.solvers[k].borrow_mut().apply(r, &mut z);
        z
    }
}

impl Preconditioner for FieldSplit {
    fn apply(&mut self, r: &[f64], z: &mut [f64]) {
        match &self.kind {
            Kind::Additive => {
                for k in 0..self.splits.len() {
                    let zk = self.solve_split(k, &self.gather(k, r));
                    self.scatter(k, &zk, z);
                }
            }
            Kind::Multiplicative { lower } => {
                let mut parts: Vec<Vec<f64>> = Vec::with_capacity(self.splits.len());
                for k in 0..self.splits.len() {
                    let mut rk = self.gather(k, r);
                    for (j, kj) in &lower[k] {
                        let mut t = vec![0.0; rk.len()];
                        kj.spmv_unchecked(&parts[*j], &mut t);
                        rk.iter_mut().zip(t).for_each(|(a, b)| *a -= b);
                    }
                    let zk = self.solve_split(k, &rk);
                    self.scatter(k, &zk, z);
                    parts.push(zk);
                }
            }
            Kind::Schur { fact, b, bt } => {
                let r0 = self.gather(0, r);
                let r1 = self.gather(1, r);
                let sub = |m: &CsrMatrix, x: &[f64], from: &[f64]| -> Vec<f64> {
                    let mut t = vec![0.0; m.nrows()];
                    m.spmv_unchecked(x, &mut t);
                    from.iter().zip(t).map(|(a, b)| a - b).collect()
                };
                let (z0, z1) = match fact {
                    SchurFactType::Diag => (self.solve_split(0, &r0), self.solve_split(1, &r1)),
                    SchurFactType::Lower => {
                        let z0 = self.solve_split(0, &r0);
                        let z1 = self.solve_split(1, &sub(b, &z0, &r1));
                        (z0, z1)
                    }
                    SchurFactType::Upper => {
                        let z1 = self.solve_split(1, &r1);
                        let z0 = self.solve_split(0, &sub(bt, &z1, &r0));
                        (z0, z1)
                    }
                    SchurFactType::Full => {
                        let y0 = self.solve_split(0, &r0);
                        let z1 = self.solve_split(1, &sub(b, &y0, &r1));
                        let mut btz = vec![0.0; r0.len()];
                        bt.spmv_unchecked(&z1, &mut btz);
                        let corr = self.solve_split(0, &btz);
                        (y0.iter().zip(corr).map(|(a, c)| a - c).collect(), z1)
                    }
                };
                self.scatter(0, &z0, z);
                self.scatter(1, &z1, z);
            }
        }
    }

    fn sub_reports(&self) -> Vec<SolveReport> {
        self.solvers.iter().flat_map(|s| s.borrow().sub_reports()).collect()
    }
}
