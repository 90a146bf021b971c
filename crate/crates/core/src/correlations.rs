//! Pointer correlations `<O_A O_B>_{j,k} = Tr[(Pi_{a_k} (x) O_A (x) O_B) sigma_out,j]`.
//!
//! Three independent routes produce them:
//! * `exact`: spectral weights applied to the outcome table of the evolved state;
//! * `analytic`: closed-form expressions in the matrix elements of `rho`;
//! * `sampled`: multinomial photon-counting draws from the outcome table.
//!
//! The first two must agree to rounding error for every supported pair.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    evolve, ideal_outcome_table, outcome_probabilities, CouplingConfig, OutcomeTable,
    PointerObservable, PointerSetting,
};
use crate::rng;
use crate::states::DensityMatrix;

use PointerObservable::{Pi1, X, Y};

/// Observable on pointer A, observable on pointer B.
pub type ObservablePair = (PointerObservable, PointerObservable);

/// The four Pauli correlations of the weak estimator.
pub const WEAK_PAIRS: [ObservablePair; 4] = [(X, X), (X, Y), (Y, X), (Y, Y)];

/// Every pair with a closed form; also the set the first exact estimator needs.
pub const SUPPORTED_PAIRS: [ObservablePair; 8] = [
    (X, X),
    (X, Y),
    (Y, X),
    (Y, Y),
    (Pi1, X),
    (X, Pi1),
    (Y, Pi1),
    (Pi1, Pi1),
];

/// The three correlations of the second exact estimator.
pub const SIMPLE_PAIRS: [ObservablePair; 3] = [(Pi1, Pi1), (Y, Y), (X, Y)];

pub fn pair_label(pair: ObservablePair) -> String {
    format!("{}_A {}_B", pair.0, pair.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationSource {
    Exact,
    Analytic,
    Sampled,
}

impl fmt::Display for CorrelationSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Analytic => "analytic",
            Self::Sampled => "sampled",
        })
    }
}

/// One correlation value and where it came from. `std_error` and `n_events`
/// are zero unless the value was sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub j: usize,
    pub k: usize,
    pub obs_a: PointerObservable,
    pub obs_b: PointerObservable,
    pub value: f64,
    pub std_error: f64,
    pub n_events: u64,
    pub source: CorrelationSource,
}

impl CorrelationRecord {
    pub fn pair(&self) -> ObservablePair {
        (self.obs_a, self.obs_b)
    }
}

/// `sum_{a,b} lambda_a lambda_b P(a, b, k)` for every `k` of the table.
pub fn exact_records(table: &OutcomeTable) -> Vec<CorrelationRecord> {
    let (set_a, set_b) = table.settings();
    (0..table.dim())
        .map(|k| {
            let mut value = 0.0;
            for a in 0..table.n_a() {
                for b in 0..table.n_b() {
                    value += table.weight(a, b) * table.prob(a, b, k);
                }
            }
            CorrelationRecord {
                j: table.j(),
                k,
                obs_a: set_a.observable(),
                obs_b: set_b.observable(),
                value,
                std_error: 0.0,
                n_events: 0,
                source: CorrelationSource::Exact,
            }
        })
        .collect()
}

fn check_indices(cfg: &CouplingConfig, j: usize, k: usize) -> Result<()> {
    cfg.check_index(j)?;
    cfg.check_index(k)
}

/// Correlation from the trace over the evolved tripartite state.
pub fn exact_correlation(
    rho: &DensityMatrix,
    j: usize,
    k: usize,
    obs_a: PointerObservable,
    obs_b: PointerObservable,
    cfg: &CouplingConfig,
) -> Result<CorrelationRecord> {
    cfg.require_strength()?;
    check_indices(cfg, j, k)?;
    let table = ideal_outcome_table(rho, j, obs_a, obs_b, cfg)?;
    Ok(exact_records(&table).swap_remove(k))
}

/// Correlation from the closed-form expressions.
pub fn analytic_correlation(
    rho: &DensityMatrix,
    j: usize,
    k: usize,
    obs_a: PointerObservable,
    obs_b: PointerObservable,
    cfg: &CouplingConfig,
) -> Result<CorrelationRecord> {
    let n_ab = cfg.n_ab()?;
    check_indices(cfg, j, k)?;
    if rho.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            found: rho.dim(),
        });
    }
    let d = cfg.dim() as f64;
    let (s_a, s_b, c_a, c_b) = (cfg.sin_a(), cfg.sin_b(), cfg.cos_a(), cfg.cos_b());
    let delta = if j == k { 1.0 } else { 0.0 };
    let re = |l: usize| rho.element(j, l).re;
    let im = |l: usize| rho.element(j, l).im;
    let row_re: f64 = (0..cfg.dim()).map(re).sum();
    let row_im: f64 = (0..cfg.dim()).map(im).sum();
    let off_re = row_re - re(j);
    let off_im = row_im - im(j);
    let rho_jj = re(j);
    let inv = 1.0 / (2.0 * n_ab);

    let value = match (obs_a, obs_b) {
        (X, X) => {
            inv * ((1.0 - delta) * re(k) + delta * off_re + 2.0 * c_a * delta * re(k))
                + (c_b - 1.0) / (d * n_ab) * (off_re + c_a * rho_jj)
        }
        (X, Y) => inv * (im(k) - delta * off_im),
        (Y, X) => inv * (im(k) + delta * off_im + 2.0 * (c_b - 1.0) / d * row_im),
        (Y, Y) => inv * (-re(k) + delta * row_re),
        (Pi1, X) => delta * s_a * inv * re(k) + s_a * (c_b - 1.0) / (2.0 * d * n_ab) * rho_jj,
        (X, Pi1) => s_b / (2.0 * d * n_ab) * row_re + s_b * (c_a - 1.0) / (2.0 * d * n_ab) * rho_jj,
        (Y, Pi1) => s_b / (2.0 * d * n_ab) * row_im,
        (Pi1, Pi1) => rho_jj / (16.0 * n_ab * n_ab),
        pair => {
            return Err(Error::UnsupportedObservablePair {
                pair: pair_label(pair),
                supported: SUPPORTED_PAIRS
                    .iter()
                    .map(|p| pair_label(*p))
                    .collect::<Vec<_>>()
                    .join(", "),
            })
        }
    };
    Ok(CorrelationRecord {
        j,
        k,
        obs_a,
        obs_b,
        value,
        std_error: 0.0,
        n_events: 0,
        source: CorrelationSource::Analytic,
    })
}

/// Draws `n` events from the table's joint (pointer A, pointer B, k)
/// distribution by inverse-CDF lookup and returns the count per cell.
pub fn sample_counts(table: &OutcomeTable, n: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let probs = table.probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let last = probs.len() - 1;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    counts
}

/// Per-`k` estimates and plug-in standard errors from a count table.
pub fn records_from_counts(table: &OutcomeTable, counts: &[u64], n: u64) -> Vec<CorrelationRecord> {
    let (set_a, set_b) = table.settings();
    let nf = n as f64;
    (0..table.dim())
        .map(|k| {
            let mut mean = 0.0;
            let mut second = 0.0;
            for a in 0..table.n_a() {
                for b in 0..table.n_b() {
                    let w = table.weight(a, b);
                    let freq = counts[table.index(a, b, k)] as f64 / nf;
                    mean += w * freq;
                    second += w * w * freq;
                }
            }
            let variance = ((second - mean * mean) / nf).max(0.0);
            CorrelationRecord {
                j: table.j(),
                k,
                obs_a: set_a.observable(),
                obs_b: set_b.observable(),
                value: mean,
                std_error: variance.sqrt(),
                n_events: n,
                source: CorrelationSource::Sampled,
            }
        })
        .collect()
}

/// Samples `n` events for coupling index `j` and one observable pair and
/// returns one record per system outcome `k`.
pub fn sample_correlation(
    rho: &DensityMatrix,
    j: usize,
    obs_a: PointerObservable,
    obs_b: PointerObservable,
    cfg: &CouplingConfig,
    n: u64,
    seed: u64,
) -> Result<Vec<CorrelationRecord>> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of events must be at least 1".into()));
    }
    cfg.require_strength()?;
    cfg.check_index(j)?;
    let table = ideal_outcome_table(rho, j, obs_a, obs_b, cfg)?;
    let counts = sample_counts(&table, n, &mut rng::generator(seed));
    Ok(records_from_counts(&table, &counts, n))
}

/// Correlation records keyed by `(j, k, pair)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrelationSet {
    records: BTreeMap<(usize, usize, ObservablePair), CorrelationRecord>,
}

impl CorrelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, record: CorrelationRecord) {
        self.records
            .insert((record.j, record.k, record.pair()), record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = CorrelationRecord>) {
        for r in records {
            self.insert(r);
        }
    }

    pub fn get(&self, j: usize, k: usize, pair: ObservablePair) -> Result<&CorrelationRecord> {
        self.records
            .get(&(j, k, pair))
            .ok_or_else(|| Error::MissingCorrelation {
                j,
                k,
                pair: pair_label(pair),
            })
    }

    pub fn value(&self, j: usize, k: usize, pair: ObservablePair) -> Result<f64> {
        self.get(j, k, pair).map(|r| r.value)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CorrelationRecord> {
        self.records.values()
    }

    /// True when any record carries sampling noise.
    pub fn is_sampled(&self) -> bool {
        self.iter().any(|r| r.source == CorrelationSource::Sampled)
    }

    /// Largest event count among the records (0 for exact sets).
    pub fn n_events(&self) -> u64 {
        self.iter().map(|r| r.n_events).max().unwrap_or(0)
    }

    /// Exact-trace correlations for every `(j, k)` and pair.
    pub fn exact(rho: &DensityMatrix, cfg: &CouplingConfig, pairs: &[ObservablePair]) -> Result<Self> {
        cfg.require_strength()?;
        let mut set = Self::new();
        for j in 0..cfg.dim() {
            let sigma = evolve(rho, j, cfg)?;
            for &(a, b) in pairs {
                let settings = (PointerSetting::ideal(a), PointerSetting::ideal(b));
                set.extend(exact_records(&outcome_probabilities(&sigma, j, &settings)?));
            }
        }
        Ok(set)
    }

    /// Closed-form correlations for every `(j, k)` and pair.
    pub fn analytic(rho: &DensityMatrix, cfg: &CouplingConfig, pairs: &[ObservablePair]) -> Result<Self> {
        let mut set = Self::new();
        for j in 0..cfg.dim() {
            for k in 0..cfg.dim() {
                for &(a, b) in pairs {
                    set.insert(analytic_correlation(rho, j, k, a, b, cfg)?);
                }
            }
        }
        Ok(set)
    }

    /// Sampled correlations with `n` events per `(j, pair)` setting. The seed
    /// of each setting is derived from `seed` and the setting coordinates.
    pub fn sampled(
        rho: &DensityMatrix,
        cfg: &CouplingConfig,
        pairs: &[ObservablePair],
        n: u64,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("number of events must be at least 1".into()));
        }
        cfg.require_strength()?;
        let mut set = Self::new();
        for j in 0..cfg.dim() {
            let sigma = evolve(rho, j, cfg)?;
            for &(a, b) in pairs {
                let settings = (PointerSetting::ideal(a), PointerSetting::ideal(b));
                let table = outcome_probabilities(&sigma, j, &settings)?;
                let mut gen = rng::generator(setting_seed(seed, j, (a, b)));
                let counts = sample_counts(&table, n, &mut gen);
                set.extend(records_from_counts(&table, &counts, n));
            }
        }
        Ok(set)
    }
}

/// Seed for the `(j, pair)` measurement setting.
pub fn setting_seed(seed: u64, j: usize, pair: ObservablePair) -> u64 {
    rng::derive_seed(seed, &[j as u64, pair.0 as u64, pair.1 as u64])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::PointerObservable::Z;
    use crate::states::{named_state, random_density};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn qubit(label: &str) -> DensityMatrix {
        DensityMatrix::pure(&named_state(label, 2).unwrap()).unwrap()
    }

    #[test]
    fn exact_known_values() {
        let cfg = CouplingConfig::symmetric(2, FRAC_PI_2).unwrap();
        let h = qubit("H");
        let r = exact_correlation(&h, 0, 1, X, Y, &cfg).unwrap();
        assert!(r.value.abs() < 1e-14);
        assert_eq!(r.source, CorrelationSource::Exact);
        assert_eq!((r.std_error, r.n_events), (0.0, 0));

        // -Re rho_jk / (2 N_AB) = -0.5 / 1
        let d = qubit("D");
        let r = exact_correlation(&d, 0, 1, Y, Y, &cfg).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn pi1_pi1_is_k_independent() {
        let rho = random_density(4, 77).unwrap();
        let cfg = CouplingConfig::new(4, 0.6, 1.3).unwrap();
        let n = cfg.n_ab().unwrap();
        for j in 0..4 {
            let expected = rho.element(j, j).re / (16.0 * n * n);
            for k in 0..4 {
                let v = exact_correlation(&rho, j, k, Pi1, Pi1, &cfg).unwrap().value;
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_matches_exact_for_all_pairs() {
        for (seed, (d, ta, tb)) in [(2, 0.3, 0.3), (3, 0.7, 1.1), (4, FRAC_PI_2, 0.2), (5, FRAC_PI_4, FRAC_PI_4)]
            .into_iter()
            .enumerate()
        {
            let rho = random_density(d, seed as u64).unwrap();
            let cfg = CouplingConfig::new(d, ta, tb).unwrap();
            let exact = CorrelationSet::exact(&rho, &cfg, &SUPPORTED_PAIRS).unwrap();
            let analytic = CorrelationSet::analytic(&rho, &cfg, &SUPPORTED_PAIRS).unwrap();
            assert_eq!(exact.len(), d * d * 8);
            for r in exact.iter() {
                let a = analytic.get(r.j, r.k, r.pair()).unwrap();
                assert!((r.value - a.value).abs() < 1e-10, "{:?} vs {:?}", r, a);
            }
        }
    }

    #[test]
    fn analytic_special_cases() {
        // real rho: <Y_A X_B> vanishes
        let rho = DensityMatrix::new(
            crate::qmath::ComplexMatrix::from_real_rows(&[[0.6, 0.2, 0.1], [0.2, 0.3, -0.05], [0.1, -0.05, 0.1]]),
        )
        .unwrap();
        let cfg = CouplingConfig::new(3, 0.9, 0.4).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let v = analytic_correlation(&rho, j, k, Y, X, &cfg).unwrap().value;
                assert!(v.abs() < 1e-15);
            }
        }

        // c_A = 0 substitution for <X_A Pi1_B>
        let rho = random_density(3, 4).unwrap();
        let cfg = CouplingConfig::new(3, FRAC_PI_2, 0.8).unwrap();
        let n = cfg.n_ab().unwrap();
        for j in 0..3 {
            let row: f64 = (0..3).map(|l| rho.element(j, l).re).sum();
            let expected = cfg.sin_b() * (row - rho.element(j, j).re) / (2.0 * 3.0 * n);
            let v = analytic_correlation(&rho, j, 0, X, Pi1, &cfg).unwrap().value;
            assert!((v - expected).abs() < 1e-14);
        }

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let cfg = CouplingConfig::symmetric(2, FRAC_PI_2).unwrap();
        let v = analytic_correlation(&mixed, 1, 0, Pi1, Pi1, &cfg).unwrap().value;
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn analytic_rejects_unsupported_pairs() {
        let rho = random_density(2, 1).unwrap();
        let cfg = CouplingConfig::symmetric(2, 0.5).unwrap();
        let err = analytic_correlation(&rho, 0, 0, Z, X, &cfg).unwrap_err();
        match err {
            Error::UnsupportedObservablePair { supported, .. } => assert!(supported.contains("Pi1_A Pi1_B")),
            other => panic!("unexpected {other:?}"),
        }
        let zero = CouplingConfig::symmetric(2, 0.0).unwrap();
        assert!(matches!(
            analytic_correlation(&rho, 0, 0, X, X, &zero),
            Err(Error::ZeroStrength)
        ));
        assert!(exact_correlation(&rho, 0, 2, X, X, &cfg).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = random_density(3, 2).unwrap();
        let cfg = CouplingConfig::symmetric(3, 1.0).unwrap();
        let a = sample_correlation(&rho, 1, X, Y, &cfg, 5000, 42).unwrap();
        let b = sample_correlation(&rho, 1, X, Y, &cfg, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_correlation(&rho, 1, X, Y, &cfg, 5000, 43).unwrap();
        assert_ne!(a, c);
        assert!(sample_correlation(&rho, 1, X, Y, &cfg, 0, 42).is_err());
    }

    #[test]
    fn sampled_pi1_pi1_is_relative_frequency() {
        let rho = random_density(2, 8).unwrap();
        let cfg = CouplingConfig::symmetric(2, 1.2).unwrap();
        let n = 2000;
        let table = ideal_outcome_table(&rho, 0, Pi1, Pi1, &cfg).unwrap();
        let counts = sample_counts(&table, n, &mut rng::generator(5));
        assert_eq!(counts.iter().sum::<u64>(), n);
        let records = records_from_counts(&table, &counts, n);
        for r in &records {
            assert_eq!(r.value, counts[table.index(0, 0, r.k)] as f64 / n as f64);
            assert!((0.0..=1.0).contains(&r.value));
            assert_eq!(r.source, CorrelationSource::Sampled);
        }
    }

    #[test]
    fn sampling_converges_to_exact() {
        let n = 1_000_000;
        for scenario in 0..20u64 {
            let d = 2 + (scenario % 3) as usize;
            let rho = random_density(d, 100 + scenario).unwrap();
            let theta_a = 0.2 + 0.07 * scenario as f64;
            let cfg = CouplingConfig::new(d, theta_a.min(FRAC_PI_2), 1.0).unwrap();
            let pair = SUPPORTED_PAIRS[(scenario % 8) as usize];
            let j = (scenario as usize) % d;
            let sampled = sample_correlation(&rho, j, pair.0, pair.1, &cfg, n, scenario).unwrap();
            for r in sampled {
                let exact = exact_correlation(&rho, j, r.k, pair.0, pair.1, &cfg).unwrap().value;
                let tol = 5.0 * r.std_error.max(1e-6);
                assert!((r.value - exact).abs() < tol, "scenario {scenario}: {} vs {exact}", r.value);
            }
        }
    }

    #[test]
    fn sampled_estimates_are_unbiased() {
        let rho = random_density(2, 31).unwrap();
        let cfg = CouplingConfig::symmetric(2, 0.9).unwrap();
        let n = 10_000;
        let seeds = 200;
        let exact = exact_correlation(&rho, 0, 1, X, X, &cfg).unwrap().value;
        let mut sum = 0.0;
        let mut se_sum = 0.0;
        for seed in 0..seeds {
            let r = &sample_correlation(&rho, 0, X, X, &cfg, n, seed).unwrap()[1];
            sum += r.value;
            se_sum += r.std_error;
        }
        let mean = sum / seeds as f64;
        let se = se_sum / seeds as f64;
        assert!((mean - exact).abs() < 4.0 * se / (seeds as f64).sqrt());
    }

    #[test]
    fn missing_record_is_named() {
        let set = CorrelationSet::new();
        let err = set.get(1, 0, (X, Y)).unwrap_err();
        assert_eq!(
            err,
            Error::MissingCorrelation {
                j: 1,
                k: 0,
                pair: "X_A Y_B".into()
            }
        );
    }
}
