use super::{monitor, residual, ConvergedReason, KrylovMethod, LinearOperator, NormType, SolveReport, SolverConfig};
use crate::precond::Preconditioner;
use crate::sparse::{axpy, norm2};

const DIVERGENCE_FACTOR: f64 = 1e10;

/// Stationary iteration `x ← x + P⁻¹(b − A·x)`.
///
/// Stops on the true residual. With `rtol = atol = 0` it runs exactly
/// `max_it` sweeps and reports [`ConvergedReason::Its`].
pub fn richardson(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    cfg: &SolverConfig,
) -> SolveReport {
    let n = b.len();
    let mut report = SolveReport::new(KrylovMethod::Richardson, NormType::Unpreconditioned);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let bnorm = norm2(b);
    let fixed = cfg.rtol == 0.0 && cfg.atol == 0.0;

    residual(op, b, x, &mut r);
    let r0 = norm2(&r);
    report.residual_history.push(r0);
    monitor(cfg, 0, r0);
    if !r0.is_finite() {
        return report.finish(ConvergedReason::Diverged, 0);
    }
    if let Some(reason) = cfg.reason(r0, bnorm) {
        return report.finish(reason, 0);
    }
    let mut its = 0;
    loop {
        if its >= cfg.max_it {
            let reason = if fixed { ConvergedReason::Its } else { ConvergedReason::MaxIt };
            return report.finish(reason, its);
        }
        pc.apply(&r, &mut z);
        axpy(1.0, &z, x);
        its += 1;
        residual(op, b, x, &mut r);
        let resid = norm2(&r);
        report.residual_history.push(resid);
        monitor(cfg, its, resid);
        if !resid.is_finite() || resid > DIVERGENCE_FACTOR * r0 {
            return report.finish(ConvergedReason::Diverged, its);
        }
        if let Some(reason) = cfg.reason(resid, bnorm) {
            return report.finish(reason, its);
        }
    }
}

/// A single preconditioner application: `x = P⁻¹b`.
pub fn preonly(
    _op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &mut dyn Preconditioner,
    _cfg: &SolverConfig,
) -> SolveReport {
    let mut report = SolveReport::new(KrylovMethod::Preonly, NormType::None);
    report.residual_history.push(norm2(b));
    pc.apply(b, x);
    let reason = if x.iter().all(|v| v.is_finite()) {
        ConvergedReason::Its
    } else {
        ConvergedReason::Diverged
    };
    report.finish(reason, 1)
}
