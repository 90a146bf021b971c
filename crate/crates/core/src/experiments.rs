//! Scenario runner for purity, strength and statistical-error sweeps.
//!
//! A scenario expands to a list of points (input state, strength). Every
//! point is reconstructed by each requested method, once per seed in sampled
//! mode or once in exact mode, and compared against a reference state.
//! Points run in parallel; per-point seeds are derived from the root seed and
//! the point coordinates, and rows are emitted in point order, so the output
//! does not depend on scheduling.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::correlations::{exact_records, records_from_counts, sample_counts, setting_seed, CorrelationSet, ObservablePair};
use crate::error::{Error, Result};
use crate::metrics::{ensemble_delta_rho, error_lower_bound, mean_square_error, median};
use crate::protocol::{evolve, outcome_probabilities, CouplingConfig, OutcomeTable, PointerSetting, TripartiteState};
use crate::reconstruct::{
    finalize, qst_exact_measurements, qst_linear_inversion, qst_sampled_measurements, qubit_projector_family,
    reconstruct, standard_projector_family, Method, ReconstructionResult,
};
use crate::rng;
use crate::states::{named_state, purity_family, DensityMatrix, StateSpec};

pub const MAX_BIAS_EPSILON: f64 = 0.1;
pub const EFFICIENCY_RANGE: (f64, f64) = (0.9, 1.1);

/// Systematic pointer-measurement imperfections.
///
/// Every pointer projector is conjugated by `exp(-i epsilon Y)`, and the
/// counts of pointer A's first projector are scaled by the efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasModel {
    pointer_rotation_epsilon: f64,
    per_projector_efficiency: f64,
}

impl BiasModel {
    pub fn new(pointer_rotation_epsilon: f64, per_projector_efficiency: f64) -> Result<Self> {
        if !pointer_rotation_epsilon.is_finite() || pointer_rotation_epsilon.abs() > MAX_BIAS_EPSILON {
            return Err(Error::InvalidParameter(format!(
                "bias epsilon {pointer_rotation_epsilon} outside [-{MAX_BIAS_EPSILON}, {MAX_BIAS_EPSILON}]"
            )));
        }
        let (lo, hi) = EFFICIENCY_RANGE;
        if !(lo..=hi).contains(&per_projector_efficiency) {
            return Err(Error::InvalidParameter(format!(
                "efficiency {per_projector_efficiency} outside [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            pointer_rotation_epsilon,
            per_projector_efficiency,
        })
    }

    pub fn none() -> Self {
        Self {
            pointer_rotation_epsilon: 0.0,
            per_projector_efficiency: 1.0,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.pointer_rotation_epsilon
    }

    pub fn efficiency(&self) -> f64 {
        self.per_projector_efficiency
    }

    pub fn is_none(&self) -> bool {
        self.pointer_rotation_epsilon == 0.0 && self.per_projector_efficiency == 1.0
    }

    pub fn apply_efficiency(&self, table: &mut OutcomeTable) {
        if self.per_projector_efficiency != 1.0 {
            table.apply_efficiency(0, self.per_projector_efficiency);
        }
    }
}

/// Rotates every projector of both settings about the pointer `Y` axis.
pub fn apply_bias(settings: &(PointerSetting, PointerSetting), bias: &BiasModel) -> (PointerSetting, PointerSetting) {
    if bias.epsilon() == 0.0 {
        return settings.clone();
    }
    (
        settings.0.rotated_about_y(bias.epsilon()),
        settings.1.rotated_about_y(bias.epsilon()),
    )
}

/// Outcome table of one pointer setting, with the bias model applied.
pub fn biased_table(
    sigma: &TripartiteState,
    j: usize,
    pair: ObservablePair,
    bias: &BiasModel,
) -> Result<OutcomeTable> {
    let ideal = (PointerSetting::ideal(pair.0), PointerSetting::ideal(pair.1));
    let mut table = outcome_probabilities(sigma, j, &apply_bias(&ideal, bias))?;
    bias.apply_efficiency(&mut table);
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CorrelationMode {
    /// Expectation values, no sampling noise.
    Exact,
    /// Multinomial counts with `n_events` per measurement setting.
    Sampled,
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Sampled => "sampled",
        })
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "sampled" => Ok(Self::Sampled),
            _ => Err(Error::InvalidParameter(format!("unknown mode '{s}' (exact | sampled)"))),
        }
    }
}

/// Correlations for all `(j, k)` and the given pairs under the bias model.
pub fn measure_correlations(
    rho: &DensityMatrix,
    cfg: &CouplingConfig,
    pairs: &[ObservablePair],
    mode: CorrelationMode,
    n_events: u64,
    seed: u64,
    bias: &BiasModel,
) -> Result<CorrelationSet> {
    cfg.require_strength()?;
    if mode == CorrelationMode::Sampled && n_events == 0 {
        return Err(Error::InvalidParameter("number of events must be at least 1".into()));
    }
    let mut set = CorrelationSet::new();
    for j in 0..cfg.dim() {
        let sigma = evolve(rho, j, cfg)?;
        for &pair in pairs {
            let table = biased_table(&sigma, j, pair, bias)?;
            match mode {
                CorrelationMode::Exact => set.extend(exact_records(&table)),
                CorrelationMode::Sampled => {
                    let mut gen = rng::generator(setting_seed(seed, j, pair));
                    let counts = sample_counts(&table, n_events, &mut gen);
                    set.extend(records_from_counts(&table, &counts, n_events));
                }
            }
        }
    }
    Ok(set)
}

/// Runs one method end to end.
pub fn reconstruct_point(
    rho: &DensityMatrix,
    cfg: &CouplingConfig,
    method: Method,
    mode: CorrelationMode,
    n_events: u64,
    seed: u64,
    bias: &BiasModel,
) -> Result<ReconstructionResult> {
    if method == Method::Qst {
        let family = qst_family(rho.dim())?;
        let measurements = match mode {
            CorrelationMode::Exact => qst_exact_measurements(rho, &family)?,
            CorrelationMode::Sampled => qst_sampled_measurements(rho, &family, n_events, seed)?,
        };
        let mut result = qst_linear_inversion(&measurements, rho.dim())?;
        if mode == CorrelationMode::Sampled {
            result.n_events = n_events;
        }
        return Ok(result);
    }
    let set = measure_correlations(rho, cfg, method.required_pairs(), mode, n_events, seed, bias)?;
    reconstruct(method, &set, cfg)
}

fn qst_family(d: usize) -> Result<Vec<(String, Vec<crate::qmath::C64>)>> {
    if d == 2 {
        Ok(qubit_projector_family())
    } else {
        standard_projector_family(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScenarioKind {
    PuritySweep,
    StrengthSweep,
    ErrorSweep,
    Single,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PuritySweep => "purity_sweep",
            Self::StrengthSweep => "strength_sweep",
            Self::ErrorSweep => "error_sweep",
            Self::Single => "single",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "purity_sweep" => Ok(Self::PuritySweep),
            "strength_sweep" => Ok(Self::StrengthSweep),
            "error_sweep" => Ok(Self::ErrorSweep),
            "single" => Ok(Self::Single),
            _ => Err(Error::InvalidParameter(format!(
                "unknown scenario kind '{s}' (purity_sweep | strength_sweep | error_sweep | single)"
            ))),
        }
    }
}

/// What reconstructions are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    /// The programmed input state.
    Truth,
    /// A tomographic reconstruction of the input, as in a laboratory comparison.
    Qst,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Truth => "truth",
            Self::Qst => "qst",
        })
    }
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truth" => Ok(Self::Truth),
            "qst" => Ok(Self::Qst),
            _ => Err(Error::InvalidParameter(format!("unknown reference '{s}' (truth | qst)"))),
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn default_theta_grid() -> Vec<f64> {
    log_grid(0.05, FRAC_PI_2, 12)
}

pub fn default_purity_grid() -> Vec<f64> {
    linear_grid(0.0, 1.0, 9)
}

pub fn default_seeds() -> Vec<u64> {
    (0..50).collect()
}

/// One experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub kind: ScenarioKind,
    pub state: StateSpec,
    pub d: usize,
    /// Pointer A strengths (and pointer B unless `theta_b` is set).
    pub thetas: Vec<f64>,
    pub theta_b: Option<f64>,
    pub n_events: u64,
    pub seeds: Vec<u64>,
    pub bias: Option<BiasModel>,
    pub methods: Vec<Method>,
    pub mode: CorrelationMode,
    pub reference: Reference,
    /// Mixing parameters for purity sweeps.
    pub purity_grid: Vec<f64>,
}

impl Scenario {
    /// A scenario with the default grids, 10^4 events and 50 seeds.
    pub fn new(id: impl Into<String>, kind: ScenarioKind, state: StateSpec, d: usize) -> Self {
        let thetas = match kind {
            ScenarioKind::PuritySweep | ScenarioKind::Single => vec![FRAC_PI_2],
            _ => default_theta_grid(),
        };
        Self {
            id: id.into(),
            kind,
            state,
            d,
            thetas,
            theta_b: None,
            n_events: 10_000,
            seeds: default_seeds(),
            bias: None,
            methods: Method::DIRECT.to_vec(),
            mode: CorrelationMode::Sampled,
            reference: Reference::Truth,
            purity_grid: default_purity_grid(),
        }
    }

    /// All validation failures, as field name and message.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if self.id.is_empty() {
            out.push(("id", "scenario id is empty".to_string()));
        }
        if !(2..=crate::qmath::MAX_SYSTEM_DIM).contains(&self.d) {
            out.push(("d", format!("d = {} outside 2..={}", self.d, crate::qmath::MAX_SYSTEM_DIM)));
        }
        if self.thetas.is_empty() {
            out.push(("theta", "no coupling strengths given".to_string()));
        }
        for &t in self.thetas.iter().chain(self.theta_b.iter()) {
            if let Some(msg) = theta_problem(t) {
                out.push(("theta", msg));
            }
        }
        if self.kind == ScenarioKind::PuritySweep && self.thetas.len() != 1 {
            out.push(("theta", "a purity sweep uses exactly one strength".to_string()));
        }
        if self.n_events == 0 {
            out.push(("n_events", "n_events must be at least 1".to_string()));
        }
        if self.seeds.is_empty() {
            out.push(("seeds", "at least one seed is required".to_string()));
        }
        if self.methods.is_empty() {
            out.push(("methods", "at least one method is required".to_string()));
        }
        if let Some(b) = &self.bias {
            if let Err(e) = BiasModel::new(b.epsilon(), b.efficiency()) {
                out.push(("bias", e.to_string()));
            }
        }
        if self.kind == ScenarioKind::PuritySweep {
            if self.purity_grid.is_empty() {
                out.push(("purity_grid", "empty purity grid".to_string()));
            }
            if let Some(p) = self.purity_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                out.push(("purity_grid", format!("p = {p} outside [0, 1]")));
            }
            if self.purity_label().is_none() {
                out.push(("state", "a purity sweep needs a pure:<label> or family:... state".to_string()));
            }
        }
        if (2..=crate::qmath::MAX_SYSTEM_DIM).contains(&self.d) {
            if let Err(e) = self.state.validate_for(self.d) {
                out.push(("state", e.to_string()));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().first() {
            None => Ok(()),
            Some((field, msg)) => Err(Error::InvalidParameter(format!(
                "scenario '{}': {field}: {msg}",
                self.id
            ))),
        }
    }

    fn purity_label(&self) -> Option<&str> {
        match &self.state {
            StateSpec::Pure(label) => Some(label),
            StateSpec::Family { psi, .. } => Some(psi),
            _ => None,
        }
    }

    fn bias_model(&self) -> BiasModel {
        self.bias.unwrap_or_else(BiasModel::none)
    }

    fn config(&self, theta: f64) -> Result<CouplingConfig> {
        CouplingConfig::new(self.d, theta, self.theta_b.unwrap_or(theta))
    }
}

/// Why a strength is unusable, if it is.
pub fn theta_problem(theta: f64) -> Option<String> {
    if theta == 0.0 {
        Some("theta = 0 makes N_AB = d/(4 sin(theta_A) sin(theta_B)) singular".to_string())
    } else if !(theta > 0.0 && theta <= FRAC_PI_2 + 1e-12) {
        Some(format!("theta = {theta} outside (0, pi/2]"))
    } else {
        None
    }
}

/// One output line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    /// `W`, `I`, `II`, `QST`, or `W_expected` for the weak-estimator expectation curve.
    pub method: String,
    pub d: usize,
    pub theta_a: f64,
    pub theta_b: f64,
    pub purity_p: Option<f64>,
    pub n_events: u64,
    /// Seed, empty for exact-mode and theory rows, `ensemble` for across-seed summaries.
    pub seed: String,
    /// NaN when the reconstruction could not be normalized.
    pub trace_distance: f64,
    pub delta_rho: Option<f64>,
    pub bound: Option<f64>,
    pub bias_epsilon: f64,
    pub bias_efficiency: f64,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "scenario_id",
    "kind",
    "method",
    "d",
    "theta_a",
    "theta_b",
    "purity_p",
    "n_events",
    "seed",
    "trace_distance",
    "delta_rho",
    "bound",
    "bias_epsilon",
    "bias_efficiency",
];

struct Point {
    index: usize,
    theta: f64,
    purity_p: Option<f64>,
    state: DensityMatrix,
}

fn points(scn: &Scenario) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    if scn.kind == ScenarioKind::PuritySweep {
        let label = scn.purity_label().expect("validated");
        let psi = named_state(label, scn.d)?;
        for (index, &p) in scn.purity_grid.iter().enumerate() {
            out.push(Point {
                index,
                theta: scn.thetas[0],
                purity_p: Some(p),
                state: purity_family(p, &psi)?,
            });
        }
    } else {
        let state = scn.state.build(scn.d)?;
        for (index, &theta) in scn.thetas.iter().enumerate() {
            out.push(Point {
                index,
                theta,
                purity_p: scn.state.purity_parameter(),
                state: state.clone(),
            });
        }
    }
    Ok(out)
}

fn trace_distance_or_nan(result: &ReconstructionResult, reference: &DensityMatrix) -> Result<f64> {
    match &result.finalized {
        Some(f) => f.trace_distance(reference),
        None => Ok(f64::NAN),
    }
}

fn reference_state(scn: &Scenario, point: &Point, seed: u64) -> Result<DensityMatrix> {
    match scn.reference {
        Reference::Truth => Ok(point.state.clone()),
        Reference::Qst => {
            let family = qst_family(scn.d)?;
            let measurements = match scn.mode {
                CorrelationMode::Exact => qst_exact_measurements(&point.state, &family)?,
                CorrelationMode::Sampled => qst_sampled_measurements(&point.state, &family, scn.n_events, seed)?,
            };
            finalize(&qst_linear_inversion(&measurements, scn.d)?.raw)
        }
    }
}

fn run_point(scn: &Scenario, point: &Point, root_seed: u64) -> Result<Vec<ResultRow>> {
    let cfg = scn.config(point.theta)?;
    let bias = scn.bias_model();
    let scenario_key = rng::stable_hash(&scn.id);
    let seeds: Vec<Option<u64>> = match scn.mode {
        CorrelationMode::Exact => vec![None],
        CorrelationMode::Sampled => scn.seeds.iter().copied().map(Some).collect(),
    };
    let row = |method: String, seed: String, trace_distance: f64, delta_rho: Option<f64>, bound: Option<f64>| ResultRow {
        scenario_id: scn.id.clone(),
        kind: scn.kind,
        method,
        d: scn.d,
        theta_a: cfg.theta_a(),
        theta_b: cfg.theta_b(),
        purity_p: point.purity_p,
        n_events: scn.n_events,
        seed,
        trace_distance,
        delta_rho,
        bound,
        bias_epsilon: bias.epsilon(),
        bias_efficiency: bias.efficiency(),
    };

    // One reference per seed, shared by all methods at this point.
    let references: Vec<DensityMatrix> = seeds
        .iter()
        .map(|s| {
            let ref_seed = rng::derive_seed(root_seed, &[scenario_key, point.index as u64, u64::MAX, s.unwrap_or(0)]);
            reference_state(scn, point, ref_seed)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    if scn.kind == ScenarioKind::StrengthSweep {
        let set = CorrelationSet::exact(&point.state, &cfg, Method::W.required_pairs())?;
        let expected = reconstruct(Method::W, &set, &cfg)?;
        let t = trace_distance_or_nan(&expected, &references[0])?;
        rows.push(row("W_expected".into(), String::new(), t, None, None));
    }

    for (m_index, &method) in scn.methods.iter().enumerate() {
        let bound = if method == Method::Qst {
            None
        } else {
            error_lower_bound(method, scn.d, cfg.theta_a().min(cfg.theta_b()), scn.n_events)
                .ok()
                .map(|b| b.bound)
        };
        let bound = if scn.mode == CorrelationMode::Exact { None } else { bound };
        let mut results = Vec::new();
        let mut distances = Vec::new();
        for (seed, reference) in seeds.iter().zip(&references) {
            let point_seed = rng::derive_seed(
                root_seed,
                &[scenario_key, point.index as u64, m_index as u64, seed.unwrap_or(0)],
            );
            let result = reconstruct_point(&point.state, &cfg, method, scn.mode, scn.n_events, point_seed, &bias)?;
            let t = trace_distance_or_nan(&result, reference)?;
            let delta = mean_square_error(&result.element_errors);
            rows.push(row(
                method.to_string(),
                seed.map(|s| s.to_string()).unwrap_or_default(),
                t,
                Some(delta),
                bound,
            ));
            distances.push(t);
            results.push(result);
        }
        if scn.kind == ScenarioKind::ErrorSweep && scn.mode == CorrelationMode::Sampled {
            rows.push(row(
                method.to_string(),
                "ensemble".into(),
                median(&distances).unwrap_or(f64::NAN),
                ensemble_delta_rho(&results),
                bound,
            ));
        }
    }
    Ok(rows)
}

/// Expands and runs one scenario.
pub fn run_scenario(scn: &Scenario, root_seed: u64) -> Result<Vec<ResultRow>> {
    scn.validate()?;
    let pts = points(scn)?;
    let chunks: Vec<Vec<ResultRow>> = pts
        .par_iter()
        .map(|p| run_point(scn, p, root_seed))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Purity sweep at a single strength.
pub fn run_purity_sweep(scn: &Scenario, root_seed: u64) -> Result<Vec<ResultRow>> {
    expect_kind(scn, ScenarioKind::PuritySweep)?;
    run_scenario(scn, root_seed)
}

/// Trace distance against strength, with the weak-estimator expectation curve.
pub fn run_strength_sweep(scn: &Scenario, root_seed: u64) -> Result<Vec<ResultRow>> {
    expect_kind(scn, ScenarioKind::StrengthSweep)?;
    run_scenario(scn, root_seed)
}

/// Statistical error against strength, with the weak-coupling bound and ensemble rows.
pub fn run_error_sweep(scn: &Scenario, root_seed: u64) -> Result<Vec<ResultRow>> {
    expect_kind(scn, ScenarioKind::ErrorSweep)?;
    run_scenario(scn, root_seed)
}

fn expect_kind(scn: &Scenario, kind: ScenarioKind) -> Result<()> {
    if scn.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "scenario '{}' is a {}, expected {kind}",
            scn.id, scn.kind
        )));
    }
    Ok(())
}

/// Runs every scenario in order.
pub fn run_all(scenarios: &[Scenario], root_seed: u64) -> Result<Vec<ResultRow>> {
    for s in scenarios {
        s.validate()?;
    }
    let mut rows = Vec::new();
    for s in scenarios {
        rows.extend(run_scenario(s, root_seed)?);
    }
    Ok(rows)
}

/// Outcome of one built-in consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

/// Quick self-test of the simulation: closed-form coupling unitary against
/// the matrix exponential, analytic correlations against the trace route,
/// and exactness of estimators I and II on random states.
pub fn self_check(root_seed: u64) -> Result<Vec<CheckResult>> {
    use crate::correlations::{analytic_correlation, exact_correlation, SUPPORTED_PAIRS};
    use crate::protocol::coupling_unitary;
    use crate::qmath::{hermitian_eigen, matrix_exponential, pauli, tensor, ComplexMatrix};
    use crate::states::random_density;

    let seed = |i: u64| rng::derive_seed(root_seed, &[i]);
    let thetas = [0.1, 0.5, 1.0, FRAC_PI_2];

    let mut unitary: f64 = 0.0;
    for (i, &theta) in thetas.iter().enumerate() {
        let basis = hermitian_eigen(random_density(3, seed(i as u64))?.matrix())?.eigenvectors;
        let v: Vec<_> = (0..3).map(|r| basis[(r, 0)]).collect();
        let proj = ComplexMatrix::projector(&v);
        let closed = coupling_unitary(&proj, theta)?;
        let oracle = matrix_exponential(&tensor(&proj, &pauli::y()), theta)?;
        unitary = unitary.max(closed.max_abs_diff(&oracle));
    }

    let mut oracle: f64 = 0.0;
    let mut exactness: f64 = 0.0;
    for d in 2..=4 {
        for (i, &theta) in thetas.iter().enumerate() {
            let rho = random_density(d, seed(100 + 10 * d as u64 + i as u64))?;
            let cfg = CouplingConfig::new(d, theta, thetas[(i + 1) % thetas.len()])?;
            for j in 0..d {
                for k in 0..d {
                    for (a, b) in SUPPORTED_PAIRS {
                        let e = exact_correlation(&rho, j, k, a, b, &cfg)?.value;
                        oracle = oracle.max((e - analytic_correlation(&rho, j, k, a, b, &cfg)?.value).abs());
                    }
                }
            }
            for method in [Method::I, Method::II] {
                let set = CorrelationSet::exact(&rho, &cfg, method.required_pairs())?;
                let result = reconstruct(method, &set, &cfg)?;
                exactness = exactness.max(result.finalized()?.trace_distance(&rho)?);
            }
        }
    }
    Ok(vec![
        CheckResult {
            name: "coupling unitary matches matrix exponential",
            max_error: unitary,
            tolerance: 1e-12,
        },
        CheckResult {
            name: "analytic correlations match trace evaluation",
            max_error: oracle,
            tolerance: 1e-10,
        },
        CheckResult {
            name: "estimators I and II are exact",
            max_error: exactness,
            tolerance: 1e-9,
        },
    ])
}
