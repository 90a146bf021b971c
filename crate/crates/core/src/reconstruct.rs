//! Density-matrix estimators.
//!
//! * [`reconstruct_weak`]: first-order (weak coupling) estimate from four Pauli correlations.
//! * [`reconstruct_exact_i`]: the weak estimate plus the `t_A`, `t_B` correction terms; exact at any strength.
//! * [`reconstruct_exact_ii`]: three correlations, exact at any strength.
//! * [`qst_linear_inversion`]: projective tomography reference.
//!
//! Raw estimates are finalized by taking the Hermitian part and normalizing the
//! trace. Positivity is never imposed.
//!
//! Element errors are propagated in quadrature from the correlation standard
//! errors, treating records from different measurement settings as
//! independent, and carried through the Hermitian part. The trace
//! normalization is not linearized: at weak coupling the sampled trace
//! fluctuates by more than its own size and a first-order expansion is meaningless.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::correlations::{CorrelationSet, ObservablePair, SIMPLE_PAIRS, SUPPORTED_PAIRS, WEAK_PAIRS};
use crate::error::{Error, Result};
use crate::protocol::{CouplingConfig, PointerObservable};
use crate::qmath::{self, c, ComplexMatrix, RealMatrix, C64, ZERO};
use crate::rng;
use crate::states::{self, DensityMatrix, StateVector};

use PointerObservable::{Pi1, X, Y};

/// Hermitian parts whose trace is at most this are not normalized.
pub const MIN_TRACE: f64 = 1e-9;

const QST_PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    W,
    I,
    II,
    #[serde(rename = "QST")]
    Qst,
}

impl Method {
    pub const DIRECT: [Method; 3] = [Method::W, Method::I, Method::II];

    /// Correlations the estimator consumes.
    pub fn required_pairs(self) -> &'static [ObservablePair] {
        match self {
            Method::W => &WEAK_PAIRS,
            Method::I => &SUPPORTED_PAIRS,
            Method::II => &SIMPLE_PAIRS,
            Method::Qst => &[],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::W => "W",
            Method::I => "I",
            Method::II => "II",
            Method::Qst => "QST",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" => Ok(Method::W),
            "I" => Ok(Method::I),
            "II" => Ok(Method::II),
            "QST" => Ok(Method::Qst),
            _ => Err(Error::InvalidParameter(format!(
                "unknown method '{s}' (expected W, I, II or QST)"
            ))),
        }
    }
}

/// Output of one estimator.
#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub method: Method,
    /// The matrix exactly as the estimator formula produces it.
    pub raw: ComplexMatrix,
    /// Hermitian part of `raw`, trace-normalized. `None` when that trace vanishes.
    pub finalized: Option<DensityMatrix>,
    /// Propagated `|delta rho_jk|`; all zero for exact inputs.
    pub element_errors: RealMatrix,
    pub config: Option<CouplingConfig>,
    pub n_events: u64,
}

impl ReconstructionResult {
    pub fn dim(&self) -> usize {
        self.raw.rows()
    }

    pub fn finalized(&self) -> Result<&DensityMatrix> {
        self.finalized.as_ref().ok_or_else(|| Error::NearZeroTrace {
            trace: qmath::hermitian_part(&self.raw)
                .map(|h| h.trace().re)
                .unwrap_or(0.0),
        })
    }
}

/// Hermitian part, normalized to unit trace.
pub fn finalize(raw: &ComplexMatrix) -> Result<DensityMatrix> {
    let h = qmath::hermitian_part(raw)?;
    let trace = h.trace().re;
    if trace.abs() <= MIN_TRACE || !trace.is_finite() {
        return Err(Error::NearZeroTrace { trace });
    }
    DensityMatrix::new(h.scale_real(1.0 / trace))
}

/// Accumulates a raw estimate and the variances of its real and imaginary parts.
struct Assembly {
    d: usize,
    raw: ComplexMatrix,
    var_re: RealMatrix,
    var_im: RealMatrix,
}

impl Assembly {
    fn new(d: usize) -> Self {
        Self {
            d,
            raw: ComplexMatrix::zeros(d, d),
            var_re: RealMatrix::zeros(d),
            var_im: RealMatrix::zeros(d),
        }
    }

    /// Hermitian-part errors. `(j,k)` and `(k,j)` come from different couplings
    /// and are therefore independent.
    fn hermitian_errors(&self) -> RealMatrix {
        RealMatrix::from_fn(self.d, |j, k| {
            if j == k {
                self.var_re[(j, j)].sqrt()
            } else {
                let re = (self.var_re[(j, k)] + self.var_re[(k, j)]) / 4.0;
                let im = (self.var_im[(j, k)] + self.var_im[(k, j)]) / 4.0;
                (re + im).sqrt()
            }
        })
    }

    fn finish(self, method: Method, cfg: &CouplingConfig, n_events: u64) -> ReconstructionResult {
        let element_errors = self.hermitian_errors();
        ReconstructionResult {
            method,
            finalized: finalize(&self.raw).ok(),
            raw: self.raw,
            element_errors,
            config: Some(*cfg),
            n_events,
        }
    }
}

/// Sum of `coef * <pair>` with the matching variance `sum coef^2 se^2`.
fn combine(
    set: &CorrelationSet,
    j: usize,
    k: usize,
    terms: &[(f64, ObservablePair)],
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut variance = 0.0;
    for &(coef, pair) in terms {
        let r = set.get(j, k, pair)?;
        value += coef * r.value;
        variance += coef * coef * r.std_error * r.std_error;
    }
    Ok((value, variance))
}

fn check_dims(set: &CorrelationSet, cfg: &CouplingConfig) -> Result<()> {
    if let Some(bad) = set.iter().find(|r| r.j >= cfg.dim() || r.k >= cfg.dim()) {
        return Err(Error::IndexOutOfRange {
            index: bad.j.max(bad.k),
            dim: cfg.dim(),
        });
    }
    Ok(())
}

/// `Re rho_jk = N (<XX> - <YY>)`, `Im rho_jk = N (<YX> + <XY>)`.
pub fn reconstruct_weak(set: &CorrelationSet, cfg: &CouplingConfig) -> Result<ReconstructionResult> {
    let n = cfg.n_ab()?;
    check_dims(set, cfg)?;
    let d = cfg.dim();
    let mut asm = Assembly::new(d);
    for j in 0..d {
        for k in 0..d {
            let (re, vre) = combine(set, j, k, &[(n, (X, X)), (-n, (Y, Y))])?;
            let (im, vim) = combine(set, j, k, &[(n, (Y, X)), (n, (X, Y))])?;
            asm.raw[(j, k)] = c(re, im);
            asm.var_re[(j, k)] = vre;
            asm.var_im[(j, k)] = vim;
        }
    }
    Ok(asm.finish(Method::W, cfg, set.n_events()))
}

/// Weak estimate plus `2N (t_B <X Pi1> + t_A <Pi1 X> + 2 t_A t_B <Pi1 Pi1>)`
/// on the real part and `2N t_B <Y Pi1>` on the imaginary part.
pub fn reconstruct_exact_i(set: &CorrelationSet, cfg: &CouplingConfig) -> Result<ReconstructionResult> {
    let n = cfg.n_ab()?;
    check_dims(set, cfg)?;
    let (ta, tb) = (cfg.t_a(), cfg.t_b());
    let d = cfg.dim();
    let mut asm = Assembly::new(d);
    for j in 0..d {
        for k in 0..d {
            let (re, vre) = combine(
                set,
                j,
                k,
                &[
                    (n, (X, X)),
                    (-n, (Y, Y)),
                    (2.0 * n * tb, (X, Pi1)),
                    (2.0 * n * ta, (Pi1, X)),
                    (4.0 * n * ta * tb, (Pi1, Pi1)),
                ],
            )?;
            let (im, vim) = combine(
                set,
                j,
                k,
                &[(n, (Y, X)), (n, (X, Y)), (2.0 * n * tb, (Y, Pi1))],
            )?;
            asm.raw[(j, k)] = c(re, im);
            asm.var_re[(j, k)] = vre;
            asm.var_im[(j, k)] = vim;
        }
    }
    Ok(asm.finish(Method::I, cfg, set.n_events()))
}

/// `rho_jj = 16 N^2 <Pi1 Pi1>`, `Re rho_jk = -2N <YY>`, `Im rho_jk = 2N <XY>` (j != k).
///
/// With exact inputs the diagonal uses the `k = j` record. With sampled inputs
/// the diagonal averages the `d` records of the coupling, which all estimate
/// the same quantity and share one multinomial sample.
pub fn reconstruct_exact_ii(set: &CorrelationSet, cfg: &CouplingConfig) -> Result<ReconstructionResult> {
    let n = cfg.n_ab()?;
    check_dims(set, cfg)?;
    let d = cfg.dim();
    let scale = 16.0 * n * n;
    let mut asm = Assembly::new(d);
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let (re, vre) = combine(set, j, k, &[(-2.0 * n, (Y, Y))])?;
            let (im, vim) = combine(set, j, k, &[(2.0 * n, (X, Y))])?;
            asm.raw[(j, k)] = c(re, im);
            asm.var_re[(j, k)] = vre;
            asm.var_im[(j, k)] = vim;
        }
        let diag = set.get(j, j, (Pi1, Pi1))?;
        if set.is_sampled() {
            let mut total = 0.0;
            let mut n_events = 0;
            for k in 0..d {
                let r = set.get(j, k, (Pi1, Pi1))?;
                total += r.value;
                n_events = n_events.max(r.n_events);
            }
            // The k-sum is a single binomial frequency.
            let var_total = if n_events > 0 {
                (total * (1.0 - total) / n_events as f64).max(0.0)
            } else {
                0.0
            };
            let df = d as f64;
            asm.raw[(j, j)] = c(scale * total / df, 0.0);
            asm.var_re[(j, j)] = scale * scale * var_total / (df * df);
        } else {
            asm.raw[(j, j)] = c(scale * diag.value, 0.0);
            asm.var_re[(j, j)] = scale * scale * diag.std_error * diag.std_error;
        }
    }
    Ok(asm.finish(Method::II, cfg, set.n_events()))
}

/// Dispatches on the direct method.
pub fn reconstruct(method: Method, set: &CorrelationSet, cfg: &CouplingConfig) -> Result<ReconstructionResult> {
    match method {
        Method::W => reconstruct_weak(set, cfg),
        Method::I => reconstruct_exact_i(set, cfg),
        Method::II => reconstruct_exact_ii(set, cfg),
        Method::Qst => Err(Error::InvalidParameter(
            "QST is reconstructed from projector probabilities, not pointer correlations".into(),
        )),
    }
}

/// Probability of one tomographic projector `|psi><psi|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorMeasurement {
    pub label: String,
    pub vector: StateVector,
    pub probability: f64,
    pub std_error: f64,
}

/// `H, V, D, R` with `R = (H - iV)/sqrt 2`.
pub fn qubit_projector_family() -> Vec<(String, StateVector)> {
    ["H", "V", "D", "R"]
        .iter()
        .map(|l| (l.to_string(), states::named_state(l, 2).expect("qubit label")))
        .collect()
}

/// `{|a_j>} u {|+_jk>} u {|i_jk>}` for `j < k`: `d^2` projectors, with
/// `|+_jk> = (|a_j> + |a_k>)/sqrt 2` and `|i_jk> = (|a_j> + i|a_k>)/sqrt 2`.
pub fn standard_projector_family(d: usize) -> Result<Vec<(String, StateVector)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut family = Vec::with_capacity(d * d);
    for j in 0..d {
        family.push((format!("a{}", j + 1), states::basis_state(d, j)?));
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut plus = vec![ZERO; d];
            plus[j] = c(s, 0.0);
            plus[k] = c(s, 0.0);
            family.push((format!("+{}{}", j + 1, k + 1), plus));
            let mut imag = vec![ZERO; d];
            imag[j] = c(s, 0.0);
            imag[k] = c(0.0, s);
            family.push((format!("i{}{}", j + 1, k + 1), imag));
        }
    }
    Ok(family)
}

/// Born probabilities `<psi|rho|psi>` for each projector.
pub fn qst_exact_measurements(rho: &DensityMatrix, family: &[(String, StateVector)]) -> Result<Vec<ProjectorMeasurement>> {
    family
        .iter()
        .map(|(label, v)| {
            if v.len() != rho.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rho.dim(),
                    found: v.len(),
                });
            }
            let p = qmath::inner(v, &rho.matrix().apply(v)).re;
            Ok(ProjectorMeasurement {
                label: label.clone(),
                vector: v.clone(),
                probability: p.clamp(0.0, 1.0),
                std_error: 0.0,
            })
        })
        .collect()
}

/// Binomial photon counts with `n` trials per projector.
pub fn qst_sampled_measurements(
    rho: &DensityMatrix,
    family: &[(String, StateVector)],
    n: u64,
    seed: u64,
) -> Result<Vec<ProjectorMeasurement>> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of events must be at least 1".into()));
    }
    let exact = qst_exact_measurements(rho, family)?;
    exact
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut gen = rng::generator(rng::derive_seed(seed, &[i as u64]));
            let dist = Binomial::new(n, m.probability)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let freq = dist.sample(&mut gen) as f64 / n as f64;
            Ok(ProjectorMeasurement {
                probability: freq,
                std_error: (freq * (1.0 - freq) / n as f64).sqrt(),
                ..m
            })
        })
        .collect()
}

/// Qubit tomography from the `H, V, D, R` probabilities:
/// `rho_11 = p_H`, `rho_22 = p_V`, `Re rho_12 = p_D - 1/2`, `Im rho_12 = p_R - 1/2`.
pub fn qst_qubit(p_h: f64, p_v: f64, p_d: f64, p_r: f64) -> Result<ReconstructionResult> {
    let measurements: Vec<ProjectorMeasurement> = qubit_projector_family()
        .into_iter()
        .zip([p_h, p_v, p_d, p_r])
        .map(|((label, vector), probability)| ProjectorMeasurement {
            label,
            vector,
            probability,
            std_error: 0.0,
        })
        .collect();
    qst_linear_inversion(&measurements, 2)
}

fn is_qubit_family(measurements: &[ProjectorMeasurement]) -> bool {
    measurements.len() == 4
        && measurements
            .iter()
            .zip(qubit_projector_family())
            .all(|(m, (_, v))| {
                m.vector.len() == 2 && m.vector.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-12)
            })
}

/// Linear-inversion tomography from `d^2` linearly independent projectors.
///
/// The `H, V, D, R` qubit set uses the closed form; any other set solves the
/// linear system `p_i = <psi_i| rho |psi_i>` for the `d^2` entries of `rho`.
pub fn qst_linear_inversion(measurements: &[ProjectorMeasurement], d: usize) -> Result<ReconstructionResult> {
    if d == 0 || d > qmath::MAX_SYSTEM_DIM {
        return Err(Error::InvalidParameter(format!("dimension {d} out of range")));
    }
    if measurements.len() != d * d {
        return Err(Error::InvalidParameter(format!(
            "linear inversion needs exactly {} projectors, got {}",
            d * d,
            measurements.len()
        )));
    }
    if let Some(m) = measurements.iter().find(|m| m.vector.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.vector.len(),
        });
    }
    let n_events = 0;
    if d == 2 && is_qubit_family(measurements) {
        let p: Vec<f64> = measurements.iter().map(|m| m.probability).collect();
        let se: Vec<f64> = measurements.iter().map(|m| m.std_error).collect();
        let off = c(p[2] - 0.5, p[3] - 0.5);
        let raw = ComplexMatrix::from_rows(&[[c(p[0], 0.0), off], [off.conj(), c(p[1], 0.0)]]);
        let off_err = (se[2] * se[2] + se[3] * se[3]).sqrt();
        let element_errors = RealMatrix::from_fn(2, |j, k| match (j, k) {
            (0, 0) => se[0],
            (1, 1) => se[1],
            _ => off_err,
        });
        return Ok(ReconstructionResult {
            method: Method::Qst,
            finalized: finalize(&raw).ok(),
            raw,
            element_errors,
            config: None,
            n_events,
        });
    }

    // Row i: p_i = sum_{ab} conj(psi_a) psi_b rho_ab, unknown index a*d + b.
    let dd = d * d;
    let system = ComplexMatrix::from_fn(dd, dd, |i, col| {
        let v = &measurements[i].vector;
        v[col / d].conj() * v[col % d]
    });
    let unit = |i: usize| -> Vec<C64> {
        let mut e = vec![ZERO; dd];
        e[i] = c(1.0, 0.0);
        e
    };
    let rhs: Vec<Vec<C64>> = (0..dd).map(unit).collect();
    // Columns of the inverse; inverse[i][m] = (A^-1)_{m i}.
    let inverse = qmath::solve_many(&system, &rhs, QST_PIVOT_TOL)?;
    let mut raw = ComplexMatrix::zeros(d, d);
    for (i, col) in inverse.iter().enumerate() {
        let p = measurements[i].probability;
        for m in 0..dd {
            raw[(m / d, m % d)] += col[m] * p;
        }
    }
    // Errors of the Hermitian part, whose entries are linear in every p_i.
    let element_errors = RealMatrix::from_fn(d, |j, k| {
        let mut var = 0.0;
        for (i, col) in inverse.iter().enumerate() {
            let coef = (col[j * d + k] + col[k * d + j].conj()) * 0.5;
            let se = measurements[i].std_error;
            var += coef.norm_sqr() * se * se;
        }
        var.sqrt()
    });
    Ok(ReconstructionResult {
        method: Method::Qst,
        finalized: finalize(&raw).ok(),
        raw,
        element_errors,
        config: None,
        n_events,
    })
}
