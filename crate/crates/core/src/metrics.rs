//! Figures of merit: the mean square statistical error, its weak-coupling
//! lower bound, and reconstruction-versus-reference summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::RealMatrix;
use crate::reconstruct::{Method, ReconstructionResult};
use crate::states::{purity, DensityMatrix};

/// `delta rho = sqrt(sum_jk |delta rho_jk|^2)`.
pub fn mean_square_error(element_errors: &RealMatrix) -> f64 {
    element_errors
        .as_slice()
        .iter()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt()
}

/// Lower bound `alpha(d) / (theta^2 sqrt N)` on `delta rho`, derived in the
/// weak approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub method: Method,
    pub d: usize,
    pub theta: f64,
    pub n: u64,
    pub alpha: f64,
    pub bound: f64,
}

/// `alpha(d) = (d - 1) sqrt(d) / (2 sqrt 2)` for W and I,
/// `alpha(d) = sqrt(d (d - 1) (d - 4)) / 2` for II.
pub fn alpha(method: Method, d: usize) -> Result<f64> {
    let df = d as f64;
    match method {
        Method::W | Method::I => Ok((df - 1.0) * df.sqrt() / (2.0 * std::f64::consts::SQRT_2)),
        Method::II if d >= 5 => Ok((df * (df - 1.0) * (df - 4.0)).sqrt() / 2.0),
        Method::II => Err(Error::BoundUndefined(format!(
            "the method II constant has a factor (d - 4) under a square root; d = {d} < 5"
        ))),
        Method::Qst => Err(Error::BoundUndefined("no bound for QST".into())),
    }
}

pub fn error_lower_bound(method: Method, d: usize, theta: f64, n: u64) -> Result<ErrorBound> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::ZeroStrength);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("number of events must be at least 1".into()));
    }
    let alpha = alpha(method, d)?;
    Ok(ErrorBound {
        method,
        d,
        theta,
        n,
        alpha,
        bound: alpha / (theta * theta * (n as f64).sqrt()),
    })
}

/// Reconstruction compared against a reference state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method: Method,
    pub trace_distance: f64,
    pub delta_rho: f64,
    pub purity_result: f64,
    pub purity_reference: f64,
}

pub fn compare(result: &ReconstructionResult, reference: &DensityMatrix) -> Result<Comparison> {
    if result.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            found: result.dim(),
        });
    }
    let finalized = result.finalized()?;
    Ok(Comparison {
        method: result.method,
        trace_distance: finalized.trace_distance(reference)?,
        delta_rho: mean_square_error(&result.element_errors),
        purity_result: purity(finalized),
        purity_reference: purity(reference),
    })
}

/// Ensemble `delta rho`: the Frobenius norm of the per-element standard
/// deviation of the finalized matrices across repetitions. Cross-checks the
/// propagated errors. Repetitions without a finalized matrix are skipped.
pub fn ensemble_delta_rho(results: &[ReconstructionResult]) -> Option<f64> {
    let finalized: Vec<&DensityMatrix> = results.iter().filter_map(|r| r.finalized.as_ref()).collect();
    if finalized.len() < 2 {
        return None;
    }
    let d = finalized[0].dim();
    let count = finalized.len() as f64;
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            let mean = finalized.iter().map(|f| f.element(j, k)).sum::<num_complex::Complex64>() / count;
            let var = finalized
                .iter()
                .map(|f| (f.element(j, k) - mean).norm_sqr())
                .sum::<f64>()
                / (count - 1.0);
            total += var;
        }
    }
    Some(total.sqrt())
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
