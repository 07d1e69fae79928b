//! Restarted GMRES (left or right preconditioned) and flexible GMRES.
//!
//! Arnoldi uses single-pass modified Gram-Schmidt; the least-squares problem
//! is reduced with Givens rotations so the residual norm of every iteration
//! is available without forming the iterate.

use super::{monitor, residual, ConvergedReason, KrylovMethod, LinearOperator, NormType, PcSide, SolveReport, SolverConfig};
use crate::precond::Preconditioner;
use crate::sparse::{axpy, dot, norm2};

#[derive(Clone, Copy, PartialEq)]
enum Variant {
    Left,
    Right,
    Flexible,
}

pub fn gmres(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
) -> SolveReport {
    let variant = match cfg.side {
        PcSide::Left => Variant::Left,
        PcSide::Right => Variant::Right,
    };
    run(op, b, x, pc, cfg, variant, KrylovMethod::Gmres)
}

/// Right-preconditioned GMRES that stores every preconditioned direction,
/// so the preconditioner may change between iterations.
pub fn fgmres(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
) -> SolveReport {
    run(op, b, x, pc, cfg, Variant::Flexible, KrylovMethod::Fgmres)
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

fn run(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
    variant: Variant,
    method: KrylovMethod,
) -> SolveReport {
    let n = b.len();
    let m = cfg.restart.max(1);
    let norm_type = match variant {
        Variant::Left => NormType::Preconditioned,
        _ => NormType::Unpreconditioned,
    };
    let mut report = SolveReport::new(method, norm_type);

    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut t = vec![0.0; n];

    // Reference norm for the relative test, in the same norm as the residual.
    let bnorm = if variant == Variant::Left {
        pc.apply(b, &mut t);
        norm2(&t)
    } else {
        norm2(b)
    };

    let initial_residual = |x: &[f64], r: &mut [f64], t: &mut [f64], pc: &mut dyn Preconditioner| -> f64 {
        residual(op, b, x, r);
        if variant == Variant::Left {
            pc.apply(r, t);
            r.copy_from_slice(t);
        }
        norm2(r)
    };

    let mut beta = initial_residual(x, &mut r, &mut t, pc);
    report.residual_history.push(beta);
    monitor(cfg, 0, beta);
    if !beta.is_finite() {
        return report.finish(ConvergedReason::Diverged, 0);
    }
    if let Some(reason) = cfg.reason(beta, bnorm) {
        return report.finish(reason, 0);
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut zbasis: Vec<Vec<f64>> = Vec::new();
    // Hessenberg columns; h[j] has j+2 entries.
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut its = 0;

    loop {
        basis.clear();
        zbasis.clear();
        h.clear();
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        basis.push(r.iter().map(|v| v / beta).collect());

        let mut k = 0;
        let mut outcome = None;
        while k < m {
            match variant {
                Variant::Left => {
                    op.apply(&basis[k], &mut t);
                    pc.apply(&t, &mut w);
                }
                Variant::Right => {
                    pc.apply(&basis[k], &mut t);
                    op.apply(&t, &mut w);
                }
                Variant::Flexible => {
                    let mut z = vec![0.0; n];
                    pc.apply(&basis[k], &mut z);
                    op.apply(&z, &mut w);
                    zbasis.push(z);
                }
            }
            let wnorm_in = norm2(&w);
            let mut col = vec![0.0; k + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                axpy(-hij, v, &mut w);
            }
            let hnext = norm2(&w);
            col[k + 1] = hnext;

            for i in 0..k {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * bb;
                col[i + 1] = -sn[i] * a + cs[i] * bb;
            }
            let (c, s) = givens(col[k], col[k + 1]);
            cs[k] = c;
            sn[k] = s;
            col[k] = c * col[k] + s * col[k + 1];
            col[k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            h.push(col);
            k += 1;
            its += 1;

            let resid = g[k].abs();
            report.residual_history.push(resid);
            monitor(cfg, its, resid);

            if !resid.is_finite() || !hnext.is_finite() {
                outcome = Some(ConvergedReason::Diverged);
                break;
            }
            if let Some(reason) = cfg.reason(resid, bnorm) {
                outcome = Some(reason);
                break;
            }
            if hnext <= f64::EPSILON * wnorm_in {
                outcome = Some(ConvergedReason::Breakdown);
                break;
            }
            if its >= cfg.max_it {
                outcome = Some(ConvergedReason::MaxIt);
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }

        if outcome != Some(ConvergedReason::Diverged) {
            update(x, &h, &g, k, &basis, &zbasis, variant, pc, &mut t);
        }
        if let Some(reason) = outcome {
            return report.finish(reason, its);
        }

        beta = initial_residual(x, &mut r, &mut t, pc);
        if !beta.is_finite() {
            return report.finish(ConvergedReason::Diverged, its);
        }
        if let Some(reason) = cfg.reason(beta, bnorm) {
            // Rounding after restart can put the true residual under tolerance.
            if let Some(last) = report.residual_history.last_mut() {
                *last = beta;
            }
            return report.finish(reason, its);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    x: &mut [f64],
    h: &[Vec<f64>],
    g: &[f64],
    k: usize,
    basis: &[Vec<f64>],
    zbasis: &[Vec<f64>],
    variant: Variant,
    pc: &mut dyn Preconditioner,
    scratch: &mut [f64],
) {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
        y[i] = (g[i] - s) / h[i][i];
    }
    match variant {
        Variant::Left => {
            for (yi, v) in y.iter().zip(basis) {
                axpy(*yi, v, x);
            }
        }
        Variant::Flexible => {
            for (yi, z) in y.iter().zip(zbasis) {
                axpy(*yi, z, x);
            }
        }
        Variant::Right => {
            let mut v = vec![0.0; x.len()];
            for (yi, bv) in y.iter().zip(basis) {
                axpy(*yi, bv, &mut v);
            }
            pc.apply(&v, scratch);
            axpy(1.0, scratch, x);
        }
    }
}
