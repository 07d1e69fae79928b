use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::KrylovMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedReason {
    Rtol,
    Atol,
    /// A fixed number of iterations completed (preonly, or richardson with
    /// both tolerances zero).
    Its,
    MaxIt,
    /// Zero Arnoldi vector with a residual still above tolerance, or a
    /// non-positive curvature `pᵀAp` in CG.
    Breakdown,
    Diverged,
}

impl ConvergedReason {
    pub fn is_converged(self) -> bool {
        matches!(self, Self::Rtol | Self::Atol | Self::Its)
    }

    /// The name used in JSON reports.
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rtol => "rtol",
            Self::Atol => "atol",
            Self::Its => "its",
            Self::MaxIt => "max_it",
            Self::Breakdown => "breakdown",
            Self::Diverged => "diverged",
        }
    }
}

impl std::fmt::Display for ConvergedReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormType {
    Preconditioned,
    Unpreconditioned,
    None,
}

/// Outcome of one solve. Nested solves (inner solvers of preconditioners)
/// appear under `sub_reports`, each summarizing the last of its `solves`
/// invocations plus the accumulated `total_iterations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub prefix: String,
    pub method: KrylovMethod,
    pub pc_type: String,
    pub converged: ConvergedReason,
    pub iterations: usize,
    #[serde(serialize_with = "ser_history", deserialize_with = "de_history")]
    pub residual_history: Vec<f64>,
    pub norm_type: NormType,
    pub solves: usize,
    pub total_iterations: usize,
    pub sub_reports: Vec<SolveReport>,
}

impl SolveReport {
    pub(crate) fn new(method: KrylovMethod, norm_type: NormType) -> Self {
        Self {
            prefix: String::new(),
            method,
            pc_type: String::new(),
            converged: ConvergedReason::MaxIt,
            iterations: 0,
            residual_history: Vec::new(),
            norm_type,
            solves: 1,
            total_iterations: 0,
            sub_reports: Vec::new(),
        }
    }

    pub(crate) fn finish(mut self, reason: ConvergedReason, iterations: usize) -> Self {
        self.converged = reason;
        self.iterations = iterations;
        self.total_iterations = iterations;
        self
    }

    pub fn is_converged(&self) -> bool {
        self.converged.is_converged()
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// Depth-first search by prefix.
    pub fn find(&self, prefix: &str) -> Option<&SolveReport> {
        if self.prefix == prefix {
            return Some(self);
        }
        self.sub_reports.iter().find_map(|r| r.find(prefix))
    }
}

// Non-finite residuals (diverged runs) are written as null.
fn ser_history<S: Serializer>(h: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<Option<f64>> = h.iter().map(|&x| x.is_finite().then_some(x)).collect();
    v.serialize(s)
}

fn de_history<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    let v: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(v.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
}
