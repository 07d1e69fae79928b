use super::{monitor, residual, ConvergedReason, KrylovMethod, LinearOperator, NormType, SolveReport, SolverConfig};
use crate::precond::Preconditioner;
use crate::sparse::{axpy, dot, norm2};

/// Preconditioned conjugate gradients. The operator and preconditioner are
/// assumed symmetric positive definite; a non-positive `pᵀAp` ends the solve
/// with [`ConvergedReason::Breakdown`].
pub fn cg(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
) -> SolveReport {
    let n = b.len();
    let mut report = SolveReport::new(KrylovMethod::Cg, NormType::Preconditioned);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];

    let x_was_zero = x.iter().all(|&v| v == 0.0);
    residual(op, b, x, &mut r);
    pc.apply(&r, &mut z);
    let mut resid = norm2(&z);
    let bnorm = if x_was_zero {
        resid
    } else {
        pc.apply(b, &mut q);
        norm2(&q)
    };
    report.residual_history.push(resid);
    monitor(cfg, 0, resid);
    if !resid.is_finite() {
        return report.finish(ConvergedReason::Diverged, 0);
    }
    if let Some(reason) = cfg.reason(resid, bnorm) {
        return report.finish(reason, 0);
    }

    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut its = 0;
    loop {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !pq.is_finite() {
            return report.finish(ConvergedReason::Diverged, its);
        }
        if pq <= 0.0 {
            return report.finish(ConvergedReason::Breakdown, its);
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        pc.apply(&r, &mut z);
        resid = norm2(&z);
        its += 1;
        report.residual_history.push(resid);
        monitor(cfg, its, resid);
        if !resid.is_finite() {
            return report.finish(ConvergedReason::Diverged, its);
        }
        if let Some(reason) = cfg.reason(resid, bnorm) {
            return report.finish(reason, its);
        }
        if its >= cfg.max_it {
            return report.finish(ConvergedReason::MaxIt, its);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
}
