mod common;

use blockpc::problems::{self, OseenParams, Problem};
use blockpc::sparse::mtx;
use blockpc::{BlockLayout, PcContext};
use common::*;
use nalgebra::DMatrix;
use rand::Rng;

/// Three-point Gauss-Legendre rule on [0, 1]; exact for quintics.
const GAUSS: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// RT0 basis function of an interior edge, restricted to one cell.
/// `vertical` edges sit at `x = a`, horizontal ones at `y = a`; `side` is
/// −1 for the cell below/left of the edge and +1 for the cell above/right.
struct Piece {
    vertical: bool,
    a: f64,
    side: i32,
}

impl Piece {
    /// Normal component at (x, y), unit on the edge, zero on the opposite face.
    fn value(&self, x: f64, y: f64, h: f64) -> (f64, f64) {
        let s = if self.vertical { x } else { y };
        let t = if self.side < 0 { (s - (self.a - h)) / h } else { ((self.a + h) - s) / h };
        if self.vertical { (t, 0.0) } else { (0.0, t) }
    }

    fn divergence(&self, h: f64) -> f64 {
        -(self.side as f64) / h
    }
}

/// Edge geometry and its two cells, by an independent walk over the grid.
/// Returns `(library index, vertical, coordinate, lo cell (i, j), hi cell)`.
fn edges(n: usize) -> Vec<(usize, bool, f64, (usize, usize), (usize, usize))> {
    let h = 1.0 / n as f64;
    let mut out = Vec::new();
    for j in 0..n {
        for i in 1..n {
            out.push((j * (n - 1) + i - 1, true, i as f64 * h, (i - 1, j), (i, j)));
        }
    }
    for i in 0..n {
        for j in 1..n {
            out.push((n * (n - 1) + i * (n - 1) + j - 1, false, j as f64 * h, (i, j - 1), (i, j)));
        }
    }
    out
}

/// Mass matrix and divergence of RT0 × P0 by tensor Gauss quadrature.
fn quadrature_oracle(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = 1.0 / n as f64;
    let e = edges(n);
    let nq = e.len();
    let mut a = DMatrix::zeros(nq, nq);
    let mut b = DMatrix::zeros(n * n, nq);
    // pieces living on each cell
    let mut on_cell: Vec<Vec<(usize, Piece)>> = (0..n * n).map(|_| Vec::new()).collect();
    for &(idx, vertical, coord, lo, hi) in &e {
        on_cell[lo.1 * n + lo.0].push((idx, Piece { vertical, a: coord, side: -1 }));
        on_cell[hi.1 * n + hi.0].push((idx, Piece { vertical, a: coord, side: 1 }));
    }
    for (c, pieces) in on_cell.iter().enumerate() {
        let (x0, y0) = ((c % n) as f64 * h, (c / n) as f64 * h);
        for (i, pi) in pieces {
            // ∫_cell div φ · 1 = div φ · h²
            b[(c, *i)] += pi.divergence(h) * h * h;
            for (j, pj) in pieces {
                let mut s = 0.0;
                for (gx, wx) in GAUSS {
                    for (gy, wy) in GAUSS {
                        let (x, y) = (x0 + gx * h, y0 + gy * h);
                        let (u1, v1) = pi.value(x, y, h);
                        let (u2, v2) = pj.value(x, y, h);
                        s += wx * wy * h * h * (u1 * u2 + v1 * v2);
                    }
                }
                a[(*i, *j)] += s;
            }
        }
    }
    (a, b)
}

#[test]
fn rt0_blocks_match_quadrature_oracle() {
    for n in [2, 3] {
        let (a, b) = quadrature_oracle(n);
        let lib_a = dense(&problems::flux_mass(n).unwrap());
        let lib_b = dense(&problems::divergence(n).unwrap());
        assert!((&lib_a - &a).amax() < 1e-14, "A at n={n}");
        assert!((&lib_b - &b).amax() < 1e-14, "B at n={n}");
    }
    // the n=2 values as exact rationals: h = 1/2
    let a = dense(&problems::flux_mass(2).unwrap());
    assert_eq!(a[(0, 0)], 2.0 / 3.0 * 0.25);
    assert_eq!(a[(0, 1)], 0.0);
    let s = problems::gen_mixed_poisson(2, 0).unwrap();
    let k = dense(s.k.matrix());
    assert_eq!(k.nrows(), 4 + 3);
    assert_eq!(k[(4, 0)], 0.5);
}

#[test]
fn mixed_poisson_structure() {
    for n in [2, 4, 8] {
        let s = problems::gen_mixed_poisson(n, 3).unwrap();
        let k = dense(s.k.matrix());
        assert_eq!(k, k.transpose(), "n={n}");
        let (a, b) = saddle_blocks(&s.k);
        let min_eig = a.symmetric_eigenvalues().min();
        assert!(min_eig > 0.0, "n={n}: {min_eig}");
        let sv = b.clone().svd(false, false).singular_values;
        assert!(sv.min() > 1e-8 * sv.max(), "n={n}");
        assert_eq!(b.nrows(), n * n - 1);
        assert!(s.cell_forcing.iter().sum::<f64>().abs() < 1e-14);
        assert_eq!(s.b.len(), s.k.matrix().nrows());
        assert!(s.b[..a.nrows()].iter().all(|&v| v == 0.0));
        assert_eq!(&s.b[a.nrows()..], &s.cell_forcing[..n * n - 1]);
    }
}

#[test]
fn mixed_poisson_rejects_degenerate_grids() {
    assert!(problems::gen_mixed_poisson(0, 0).is_err());
    let err = problems::gen_mixed_poisson(1, 0).unwrap_err().to_string();
    assert!(err.contains("interior edges"), "{err}");
}

#[test]
fn schur_matrix_is_the_tpfa_laplacian() {
    let s = problems::gen_mixed_poisson(4, 0).unwrap();
    let l = dense(&s.s_dg);
    // interior cell: four neighbours; corner: two
    assert_eq!(l[(5, 5)], 4.0);
    assert_eq!(l[(0, 0)], 2.0);
    assert_eq!(l[(5, 6)], -1.0);
    assert_eq!(l, l.transpose());
    assert!(l.symmetric_eigenvalues().min() > 0.0);
}

#[test]
fn generators_are_deterministic() {
    let dumps: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            Problem::from(problems::gen_mixed_poisson(6, 42).unwrap()).dump(dir.path()).unwrap();
            let k = std::fs::read(dir.path().join(problems::MATRIX_FILE)).unwrap();
            let b = std::fs::read(dir.path().join(problems::RHS_FILE)).unwrap();
            (k, b)
        })
        .collect();
    assert_eq!(dumps[0], dumps[1]);
    let other = problems::gen_mixed_poisson(6, 43).unwrap();
    assert_ne!(mtx::render_vector(&other.b).into_bytes(), dumps[0].1);

    let a = problems::gen_oseen_cavity(6, 0.1, 9).unwrap();
    let b = problems::gen_oseen_cavity(6, 0.1, 9).unwrap();
    assert_eq!(mtx::render_matrix(a.k.matrix()), mtx::render_matrix(b.k.matrix()));
    assert_eq!(mtx::render_vector(&a.b), mtx::render_vector(&b.b));
}

#[test]
fn dump_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = Problem::from(problems::gen_oseen_cavity(5, 0.2, 1).unwrap());
    p.dump(dir.path()).unwrap();
    let q = Problem::load(dir.path()).unwrap();
    assert_eq!(q.k.matrix(), p.k.matrix());
    assert_eq!(q.k.row_layout(), p.k.row_layout());
    assert_eq!(q.b, p.b);
    assert_eq!(q.pcd, p.pcd);
}

/// Velocities from a stream function `ψ` on grid nodes, zero on the boundary.
fn stream_function_velocity(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let h = 1.0 / n as f64;
    let mut psi = vec![vec![0.0; n + 1]; n + 1];
    for row in psi.iter_mut().take(n).skip(1) {
        for v in row.iter_mut().take(n).skip(1) {
            *v = r.gen_range(-1.0..1.0);
        }
    }
    let line = n - 1;
    let mut vel = vec![0.0; 2 * n * line];
    // u = ∂ψ/∂y on vertical faces, v = −∂ψ/∂x on horizontal faces; psi[i][j] at (i·h, j·h)
    for j in 0..n {
        for i in 1..n {
            vel[j * line + i - 1] = (psi[i][j + 1] - psi[i][j]) / h;
        }
    }
    for i in 0..n {
        for j in 1..n {
            vel[n * line + i * line + j - 1] = -(psi[i + 1][j] - psi[i][j]) / h;
        }
    }
    vel
}

#[test]
fn discrete_divergence_annihilates_stream_function_fields() {
    for n in [4, 7] {
        let s = problems::gen_oseen_cavity(n, 0.1, 0).unwrap();
        let b = s.k.extract_block(&["p"], &["v"]).unwrap().into_matrix();
        let v = stream_function_velocity(n, n as u64);
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let div = b.spmv(&v).unwrap();
        assert!(div.iter().all(|d| d.abs() < 1e-12 * scale), "n={n}");
    }
}

#[test]
fn zero_wind_velocity_block_is_symmetric() {
    let mut p = OseenParams::new(8, 0.3, 2);
    p.wind_scale = 0.0;
    let s = problems::gen_oseen_with(&p).unwrap();
    let f = dense(s.k.extract_block(&["v"], &["v"]).unwrap().matrix());
    assert!((&f - f.transpose()).amax() < 1e-14);
    let o = problems::gen_oseen_cavity(8, 0.3, 2).unwrap();
    let f = dense(o.k.extract_block(&["v"], &["v"]).unwrap().matrix());
    assert!((&f - f.transpose()).amax() > 1e-6);
}

#[test]
fn oseen_system_is_solvable_and_rhs_is_the_manufactured_forcing() {
    let (n, nu) = (8, 0.1);
    let s = problems::gen_oseen_cavity(n, nu, 5).unwrap();
    let x = dense_solve(s.k.matrix(), &s.b);
    assert!(true_rel_residual(s.k.matrix(), &x, &s.b) < 1e-12);

    // b = h²·f on velocity rows, plus 2ν on the u rows under the moving lid
    let h = 1.0 / n as f64;
    let (line, n_v) = (n - 1, 2 * n * (n - 1));
    let mut expect: Vec<f64> = s.body_force.iter().map(|f| h * h * f).collect();
    for i in 1..n {
        expect[(n - 1) * line + i - 1] += 2.0 * nu;
    }
    expect.extend(std::iter::repeat(0.0).take(n * n - 1));
    assert_eq!(s.b.len(), n_v + n * n - 1);
    assert!(rel_diff_vec(&s.b, &expect) < 1e-15);

    let g = dense(s.k.extract_block(&["p"], &["v"]).unwrap().matrix());
    let sv = g.svd(false, false).singular_values;
    assert!(sv.min() > 1e-8 * sv.max());
}

#[test]
fn pcd_operators_have_the_documented_shape() {
    let s = problems::gen_oseen_cavity(6, 0.05, 0).unwrap();
    let h = 1.0 / 6.0;
    let np = 35;
    assert_eq!(s.pcd.dim(), np);
    assert_eq!(dense(&s.pcd.mp), DMatrix::identity(np, np) * (h * h));
    let ap = dense(&s.pcd.ap);
    assert_eq!(ap, ap.transpose());
    assert!(ap.symmetric_eigenvalues().min() > 0.0);
    // Fp − ν·Ap is the pure upwind part: zero row sums away from the pin
    let conv = dense(&s.pcd.fp) - &ap * 0.05;
    assert!((&conv - conv.transpose()).amax() > 1e-6);
    let mut stokes = OseenParams::new(6, 0.05, 0);
    stokes.wind_scale = 0.0;
    let st = problems::gen_oseen_with(&stokes).unwrap();
    assert!((dense(&st.pcd.fp) - &ap * 0.05).amax() < 1e-15);
}

/// Schur-upper FGMRES with exact velocity solves and the Schur block
/// handled by `schur`, on a random right-hand side that excites both fields.
fn outer_iterations(s: &problems::OseenSystem, ctx: PcContext, schur: &[&str]) -> usize {
    let mut t = vec![
        "-ksp_type", "fgmres", "-ksp_rtol", "1e-8", "-ksp_gmres_restart", "200",
        "-pc_type", "fieldsplit", "-pc_fieldsplit_type", "schur", "-pc_fieldsplit_schur_fact_type", "upper",
        "-fieldsplit_v_ksp_type", "preonly", "-fieldsplit_v_pc_type", "lu",
        "-fieldsplit_p_ksp_type", "preonly",
    ];
    t.extend_from_slice(schur);
    let b = random_vec(&mut rng(77), s.b.len());
    let (x, rep) = solve_with(&s.k, &b, &ctx, &t);
    assert!(rep.is_converged());
    assert!(true_rel_residual(s.k.matrix(), &x, &b) < 1e-6);
    rep.iterations
}

#[test]
fn large_viscosity_pcd_matches_mass_matrix_stokes_reference() {
    let nu = 1e6;
    let oseen = problems::gen_oseen_cavity(8, nu, 0).unwrap();
    let pcd_its = outer_iterations(
        &oseen,
        PcContext::default().with_pcd(oseen.pcd.clone()),
        &[
            "-pc_fieldsplit_schur_precondition", "a11", "-fieldsplit_p_pc_type", "pcd_vx",
            "-fieldsplit_p_pcd_mp_ksp_type", "preonly", "-fieldsplit_p_pcd_mp_pc_type", "lu",
            "-fieldsplit_p_pcd_ap_ksp_type", "preonly", "-fieldsplit_p_pcd_ap_pc_type", "lu",
        ],
    );
    let mut p = OseenParams::new(8, nu, 0);
    p.wind_scale = 0.0;
    let stokes = problems::gen_oseen_with(&p).unwrap();
    // mass-matrix Schur preconditioning, S ≈ −Mp/ν
    let user = PcContext::default().with_user_schur(stokes.pcd.mp.scale(-1.0 / nu));
    let stokes_its = outer_iterations(
        &stokes,
        user,
        &["-pc_fieldsplit_schur_precondition", "user", "-fieldsplit_p_pc_type", "lu"],
    );
    println!("nu = 1e6: pcd(vX) {pcd_its} iterations, stokes mass-matrix reference {stokes_its}");
    assert!(pcd_its > 1 && stokes_its > 1);
    assert!(pcd_its <= stokes_its, "{pcd_its} > {stokes_its}");
}

#[test]
fn demo_fixture_matches_the_generator() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/algebraic_demo");
    let (k, b) = problems::gen_algebraic_demo();
    let fixture = mtx::read_matrix(dir.join(problems::MATRIX_FILE)).unwrap();
    assert_eq!(&fixture, k.matrix());
    assert_eq!(mtx::read_vector(dir.join(problems::RHS_FILE)).unwrap(), b);
    assert_eq!(&BlockLayout::read(dir.join(problems::LAYOUT_FILE)).unwrap(), k.row_layout());
    assert_eq!(b, [1.0, -2.0, 3.0, -4.0, 5.0, -6.0, 7.0, -8.0, 9.0]);
    let cond = {
        let d = dense(k.matrix());
        let sv = d.svd(false, false).singular_values;
        sv.max() / sv.min()
    };
    assert!(cond < 100.0, "{cond}");
}
