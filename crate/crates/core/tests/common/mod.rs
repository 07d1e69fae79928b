#![allow(dead_code)]

use std::rc::Rc;

use blockpc::layout::{BlockLayout, SplittableMatrix};
use blockpc::{CsrMatrix, KrylovSolver, OptionsDb, PcContext, SolveReport};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            m[(i, j)] += x;
        }
    }
    m
}

pub fn from_na(m: &DMatrix<f64>) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                t.push((i, j, m[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), &t).unwrap()
}

pub fn vec_na(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

pub fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random sparse matrix built from unsorted triplets with duplicates.
pub fn random_sparse(rng: &mut StdRng, m: usize, n: usize, density: f64) -> CsrMatrix {
    let count = ((m * n) as f64 * density).ceil() as usize;
    let t: Vec<_> = (0..count)
        .map(|_| (rng.gen_range(0..m), rng.gen_range(0..n), rng.gen_range(-2.0..2.0)))
        .collect();
    CsrMatrix::from_triplets(m, n, &t).unwrap()
}

/// Max entrywise difference relative to the larger max-abs entry.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let scale = a.amax().max(b.amax()).max(1e-300);
    (a - b).amax() / scale
}

pub fn rel_diff_vec(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    dense(a).lu().solve(&vec_na(b)).expect("nonsingular").as_slice().to_vec()
}

pub fn true_rel_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.spmv(x).unwrap();
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `[[A, Bᵀ], [B, 0]]` with SPD `A` and full-rank `B`, fields `q`, `p`.
pub fn saddle_point(rng: &mut StdRng, nq: usize, np: usize) -> SplittableMatrix {
    let m = DMatrix::from_fn(nq, nq, |_, _| rng.gen_range(-1.0..1.0));
    let a = m.transpose() * &m + DMatrix::identity(nq, nq) * nq as f64 * 0.5;
    let b = loop {
        let b = DMatrix::from_fn(np, nq, |_, _| rng.gen_range(-1.0..1.0));
        if b.clone().svd(false, false).singular_values.min() > 0.1 {
            break b;
        }
    };
    let mut k = DMatrix::zeros(nq + np, nq + np);
    k.view_mut((0, 0), (nq, nq)).copy_from(&a);
    k.view_mut((0, nq), (nq, np)).copy_from(&b.transpose());
    k.view_mut((nq, 0), (np, nq)).copy_from(&b);
    SplittableMatrix::square(from_na(&k), BlockLayout::contiguous(&[("q", nq), ("p", np)]).unwrap()).unwrap()
}

pub fn db(tokens: &[&str]) -> OptionsDb {
    OptionsDb::parse_args(tokens).unwrap()
}

/// Builds the solver tree from `tokens`, solves from zero, returns `(x, report)`.
pub fn solve_with(k: &SplittableMatrix, b: &[f64], ctx: &PcContext, tokens: &[&str]) -> (Vec<f64>, SolveReport) {
    let db = db(tokens);
    let mut s = KrylovSolver::from_splittable(&db.scope(), k.clone(), ctx).unwrap();
    let mut x = vec![0.0; b.len()];
    let r = s.solve(b, &mut x).unwrap();
    (x, r)
}

pub fn rc_op(a: &CsrMatrix) -> Rc<dyn blockpc::LinearOperator> {
    Rc::new(a.clone())
}

/// TPFA 5-point Laplacian on an `n × n` cell grid with homogeneous Dirichlet walls.
pub fn dirichlet_laplacian(n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let c = j * n + i;
            t.push((c, c, 4.0));
            if i > 0 {
                t.push((c, c - 1, -1.0));
            }
            if i + 1 < n {
                t.push((c, c + 1, -1.0));
            }
            if j > 0 {
                t.push((c, c - n, -1.0));
            }
            if j + 1 < n {
                t.push((c, c + n, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(n * n, n * n, &t).unwrap()
}

pub fn laplacian_1d(n: usize) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 2.0));
        if i > 0 {
            t.push((i, i - 1, -1.0));
            t.push((i - 1, i, -1.0));
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

/// `count` randomized dense-oracle checks, cycling through spmv, transpose,
/// matmat and extract_submatrix. Returns the worst relative error seen.
pub fn kernel_oracle_checks(seed: u64, count: usize) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for k in 0..count {
        let (m, n) = (r.gen_range(1..15), r.gen_range(1..15));
        let density = r.gen_range(0.05..0.6);
        let a = random_sparse(&mut r, m, n, density);
        let da = dense(&a);
        let err = match k % 4 {
            0 => {
                let x = random_vec(&mut r, n);
                let y = a.spmv(&x).unwrap();
                let yd = &da * vec_na(&x);
                let w = random_vec(&mut r, m);
                let yt = a.spmv_transpose(&w).unwrap();
                let ytd = da.transpose() * vec_na(&w);
                rel_diff_vec(&y, yd.as_slice()).max(rel_diff_vec(&yt, ytd.as_slice()))
            }
            1 => rel_diff(&dense(&a.transpose()), &da.transpose()),
            2 => {
                let p = r.gen_range(1..15);
                let b = random_sparse(&mut r, n, p, density);
                rel_diff(&dense(&a.matmat(&b).unwrap()), &(&da * dense(&b)))
            }
            _ => {
                let rows: Vec<usize> = (0..r.gen_range(1..=m)).map(|_| r.gen_range(0..m)).collect();
                let mut cols: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    cols.swap(i, r.gen_range(0..=i));
                }
                cols.truncate(r.gen_range(1..=n));
                let sub = a.extract_submatrix(&rows, &cols).unwrap();
                let expect = DMatrix::from_fn(rows.len(), cols.len(), |i, j| da[(rows[i], cols[j])]);
                rel_diff(&dense(&sub), &expect)
            }
        };
        worst = worst.max(err);
    }
    worst
}

pub fn options_file(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/options").join(name)
}

/// Dense `(A, B)` blocks of a two-field saddle system.
pub fn saddle_blocks(k: &SplittableMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = dense(k.extract_block(&["q"], &["q"]).unwrap().matrix());
    let b = dense(k.extract_block(&["p"], &["q"]).unwrap().matrix());
    (a, b)
}

/// The exact Schur complement `−B A⁻¹ Bᵀ`, computed densely.
pub fn exact_schur(k: &SplittableMatrix) -> CsrMatrix {
    let (a, b) = saddle_blocks(k);
    let ainv = a.try_inverse().unwrap();
    from_na(&(-(&b * ainv * b.transpose())))
}

pub const FACT_TYPES: [&str; 4] = ["full", "upper", "lower", "diag"];

/// Iteration bound implied by the degree of the minimal polynomial of the
/// preconditioned operator with exact blocks.
pub fn ladder_bound(fact: &str) -> usize {
    match fact {
        "full" => 1,
        "upper" | "lower" => 2,
        _ => 3,
    }
}

/// GMRES on the saddle system with exact inner solves and the exact Schur
/// complement as the user preconditioning matrix.
pub fn ladder_solve(k: &SplittableMatrix, b: &[f64], fact: &str) -> (Vec<f64>, SolveReport) {
    let ctx = PcContext::default().with_user_schur(exact_schur(k));
    solve_with(
        k,
        b,
        &ctx,
        &[
            "-ksp_type", "gmres", "-ksp_rtol", "1e-10",
            "-pc_type", "fieldsplit", "-pc_fieldsplit_type", "schur",
            "-pc_fieldsplit_schur_fact_type", fact, "-pc_fieldsplit_schur_precondition", "user",
            "-fieldsplit_q_ksp_type", "preonly", "-fieldsplit_q_pc_type", "lu",
            "-fieldsplit_p_ksp_type", "preonly", "-fieldsplit_p_pc_type", "lu",
        ],
    )
}

/// Dense oracle: builds the block factor `P` for `fact` from `A`, `B` and
/// `S = −BA⁻¹Bᵀ`, and returns `(clusters, residual)` where `clusters` is the
/// number of distinct eigenvalues of `P⁻¹K` (to 1e-6) and `residual` is the
/// norm of the expected minimal polynomial evaluated at `P⁻¹K`, relative
/// to `‖P⁻¹K‖`.
pub fn minimal_polynomial_check(k: &SplittableMatrix, fact: &str) -> (usize, f64) {
    let (a, b) = saddle_blocks(k);
    let (nq, np) = (a.nrows(), b.nrows());
    let n = nq + np;
    let s = -(&b * a.clone().try_inverse().unwrap() * b.transpose());
    let mut p = DMatrix::zeros(n, n);
    p.view_mut((0, 0), (nq, nq)).copy_from(&a);
    p.view_mut((nq, nq), (np, np)).copy_from(&s);
    if matches!(fact, "upper" | "full") {
        p.view_mut((0, nq), (nq, np)).copy_from(&b.transpose());
    }
    if matches!(fact, "lower" | "full") {
        p.view_mut((nq, 0), (np, nq)).copy_from(&b);
    }
    if fact == "full" {
        // L D U has A in the (1,1) slot and S + B A⁻¹ Bᵀ = 0 in the (2,2) slot
        p.view_mut((nq, nq), (np, np)).fill(0.0);
    }
    let t = p.try_inverse().unwrap() * dense(k.matrix());
    let eye = DMatrix::<f64>::identity(n, n);
    let poly = match fact {
        "full" => &t - &eye,
        "upper" | "lower" => (&t - &eye) * (&t - &eye),
        // with S = −BA⁻¹Bᵀ the eigenvalues are 1 and the roots of λ² − λ + 1
        _ => (&t - &eye) * (&t * &t - &t + &eye),
    };
    // bounded iteration: upper/lower give Jordan blocks, which can stall the default unbounded Schur loop
    let schur = nalgebra::linalg::Schur::try_new(t.clone(), 1e-14, 100_000).expect("schur decomposition");
    let mut eig: Vec<nalgebra::Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re));
    let mut clusters: Vec<nalgebra::Complex<f64>> = Vec::new();
    for z in eig {
        if !clusters.iter().any(|c| (c - z).norm() < 1e-6) {
            clusters.push(z);
        }
    }
    (clusters.len(), poly.norm() / t.norm())
}

/// Solves the demo system grouped as `(f0, f2) | (f1)`, then the explicitly
/// permuted two-field system with the same options. Returns both iteration
/// counts and the relative difference of the solutions in original order.
pub fn grouping_equivalence() -> (usize, usize, f64) {
    let (k, b) = blockpc::problems::gen_algebraic_demo();
    let tokens = [
        "-ksp_type", "gmres", "-ksp_rtol", "1e-12",
        "-pc_type", "fieldsplit", "-pc_fieldsplit_type", "multiplicative",
        "-fieldsplit_outer_ksp_type", "preonly", "-fieldsplit_outer_pc_type", "ilu",
        "-fieldsplit_inner_ksp_type", "preonly", "-fieldsplit_inner_pc_type", "jacobi",
    ];
    let mut grouped = tokens.to_vec();
    grouped.extend([
        "-pc_fieldsplit_0_fields", "f0,f2", "-pc_fieldsplit_0_name", "outer",
        "-pc_fieldsplit_1_fields", "f1", "-pc_fieldsplit_1_name", "inner",
    ]);
    let (x1, r1) = solve_with(&k, &b, &PcContext::default(), &grouped);

    let order = k.row_layout().group_indices(&["f0", "f2", "f1"]).unwrap();
    let dk = dense(k.matrix());
    let perm = DMatrix::from_fn(order.len(), order.len(), |i, j| dk[(order[i], order[j])]);
    let pb: Vec<f64> = order.iter().map(|&i| b[i]).collect();
    let layout = BlockLayout::contiguous(&[("outer", 6), ("inner", 3)]).unwrap();
    let pk = SplittableMatrix::square(from_na(&perm), layout).unwrap();
    let (px, r2) = solve_with(&pk, &pb, &PcContext::default(), &tokens);
    let mut x2 = vec![0.0; px.len()];
    for (pos, &i) in order.iter().enumerate() {
        x2[i] = px[pos];
    }
    (r1.iterations, r2.iterations, rel_diff_vec(&x1, &x2))
}

/// Runs the three bundled demo option files and returns, per file, the
/// relative difference to the dense solution and the report.
pub fn demo_trees() -> Vec<(&'static str, f64, SolveReport)> {
    let (k, b) = blockpc::problems::gen_algebraic_demo();
    let exact = dense_solve(k.matrix(), &b);
    ["demo_ilu.opts", "demo_additive.opts", "demo_multiplicative.opts"]
        .into_iter()
        .map(|f| {
            let db = blockpc::driver::load_options(&[options_file(f)], &[] as &[&str]).unwrap();
            let mut s = KrylovSolver::from_splittable(&db.scope(), k.clone(), &PcContext::default()).unwrap();
            let mut x = vec![0.0; b.len()];
            let rep = s.solve(&b, &mut x).unwrap();
            (f, rel_diff_vec(&x, &exact), rep)
        })
        .collect()
}
