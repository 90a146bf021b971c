//! System states: basis vectors, the uniform superposition `|b0>`, purity
//! families, seeded random mixed states and the textual state-spec grammar.
//!
//! Indices are 0-based in the API. The computational representation of the
//! measurement basis vector `|a_j>` is the j-th standard unit vector.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qmath::{self, c, ComplexMatrix, C64, DEFAULT_TOL, ONE, ZERO};
use crate::rng;

pub type StateVector = Vec<C64>;

/// Smallest eigenvalue accepted when a state is certified positive.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// A Hermitian, unit-trace d x d operator.
///
/// Reconstructed matrices are not guaranteed to be positive, so positivity is
/// tracked by a flag rather than enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    positivity_checked: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace. The positivity flag is left unset.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermiticity_defect();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > tol {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        Ok(Self {
            matrix,
            positivity_checked: false,
        })
    }

    /// Validates as [`DensityMatrix::new`] and additionally certifies positivity.
    pub fn new_positive(matrix: ComplexMatrix) -> Result<Self> {
        let mut rho = Self::new(matrix)?;
        let min_eigenvalue = min_eigenvalue(&rho.matrix)?;
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        rho.positivity_checked = true;
        Ok(rho)
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        check_normalized(psi)?;
        Self::new_positive(ComplexMatrix::projector(psi))
    }

    pub fn maximally_mixed(d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new_positive(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn positivity_checked(&self) -> bool {
        self.positivity_checked
    }

    pub fn element(&self, j: usize, k: usize) -> C64 {
        self.matrix[(j, k)]
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        qmath::trace_distance(&self.matrix, &other.matrix)
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let eig = qmath::hermitian_eigen(m)?;
    Ok(eig.eigenvalues[0])
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > qmath::MAX_SYSTEM_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} outside 1..={}",
            qmath::MAX_SYSTEM_DIM
        )));
    }
    Ok(())
}

fn check_normalized(psi: &[C64]) -> Result<()> {
    let norm = qmath::inner(psi, psi).re.sqrt();
    if psi.is_empty() || (norm - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::InvalidParameter(format!(
            "state vector must have unit norm (got {norm})"
        )));
    }
    Ok(())
}

/// Labels for the measurement basis `{|a_j>}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    labels: Vec<String>,
}

impl BasisSpec {
    /// `a1, ..., ad`.
    pub fn standard(d: usize) -> Self {
        Self {
            labels: (1..=d).map(|j| format!("a{j}")).collect(),
        }
    }

    /// Horizontal and vertical polarization.
    pub fn polarization() -> Self {
        Self {
            labels: vec!["H".into(), "V".into()],
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vector(&self, j: usize) -> Result<StateVector> {
        basis_state(self.dim(), j)
    }
}

/// The j-th (0-based) standard unit vector of dimension `d`.
pub fn basis_state(d: usize, j: usize) -> Result<StateVector> {
    check_dim(d)?;
    if j >= d {
        return Err(Error::IndexOutOfRange { index: j, dim: d });
    }
    let mut v = vec![ZERO; d];
    v[j] = ONE;
    Ok(v)
}

/// `|b0> = d^{-1/2} sum_j |a_j>`.
pub fn b0_state(d: usize) -> Result<StateVector> {
    check_dim(d)?;
    Ok(vec![c(1.0 / (d as f64).sqrt(), 0.0); d])
}

/// `p |psi><psi| + (1 - p) 1/d`.
pub fn purity_family(p: f64, psi: &[C64]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "mixing parameter p = {p} outside [0, 1]"
        )));
    }
    check_normalized(psi)?;
    let d = psi.len();
    let pure = ComplexMatrix::projector(psi).scale_real(p);
    let noise = ComplexMatrix::identity(d).scale_real((1.0 - p) / d as f64);
    DensityMatrix::new_positive(&pure + &noise)
}

/// Hilbert-Schmidt random state `G G^dagger / Tr(G G^dagger)` with a seeded
/// complex Ginibre matrix `G`.
pub fn random_density(d: usize, seed: u64) -> Result<DensityMatrix> {
    check_dim(d)?;
    let mut rng = rng::generator(seed);
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re, im)
    });
    let gram = g.matmul(&g.dagger());
    let tr = gram.trace().re;
    let rho = qmath::hermitian_part(&gram.scale_real(1.0 / tr))?;
    DensityMatrix::new_positive(rho)
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // Tr(rho^2) = sum_jk |rho_jk|^2 for Hermitian rho
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// Named qubit states (d = 2) and basis labels usable in state specs.
pub fn named_state(label: &str, d: usize) -> Result<StateVector> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bad = |reason: String| Error::StateSpec {
        spec: label.to_string(),
        reason,
    };
    let qubit = |v: [C64; 2]| -> Result<StateVector> {
        if d != 2 {
            return Err(bad(format!("label '{label}' is a qubit state but d = {d}")));
        }
        Ok(v.to_vec())
    };
    match label {
        "H" => qubit([ONE, ZERO]),
        "V" => qubit([ZERO, ONE]),
        "D" => qubit([c(s, 0.0), c(s, 0.0)]),
        "A" => qubit([c(s, 0.0), c(-s, 0.0)]),
        "R" => qubit([c(s, 0.0), c(0.0, -s)]),
        "L" => qubit([c(s, 0.0), c(0.0, s)]),
        "b0" => b0_state(d),
        _ => {
            let index = label
                .strip_prefix('a')
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| bad("unknown label".into()))?;
            if index == 0 || index > d {
                return Err(bad(format!("basis label out of range for d = {d}")));
            }
            basis_state(d, index - 1)
        }
    }
}

/// Textual state specification:
/// `pure:<label>`, `mixed`, `family:p=<float>,psi=<label>`, `random:seed=<int>`.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Pure(String),
    Mixed,
    Family { p: f64, psi: String },
    Random { seed: u64 },
}

impl StateSpec {
    pub fn build(&self, d: usize) -> Result<DensityMatrix> {
        match self {
            StateSpec::Pure(label) => DensityMatrix::pure(&named_state(label, d)?),
            StateSpec::Mixed => DensityMatrix::maximally_mixed(d),
            StateSpec::Family { p, psi } => purity_family(*p, &named_state(psi, d)?),
            StateSpec::Random { seed } => random_density(d, *seed),
        }
    }

    /// The family mixing parameter, where one is defined.
    pub fn purity_parameter(&self) -> Option<f64> {
        match self {
            StateSpec::Pure(_) => Some(1.0),
            StateSpec::Mixed => Some(0.0),
            StateSpec::Family { p, .. } => Some(*p),
            StateSpec::Random { .. } => None,
        }
    }

    /// Checks that the spec can be realized at dimension `d`.
    pub fn validate_for(&self, d: usize) -> Result<()> {
        self.build(d).map(|_| ())
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let spec = text.trim();
        let bad = |reason: &str| Error::StateSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        if spec == "mixed" {
            return Ok(StateSpec::Mixed);
        }
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected pure:<label>, mixed, family:... or random:..."))?;
        match kind {
            "pure" if !rest.is_empty() => Ok(StateSpec::Pure(rest.to_string())),
            "pure" => Err(bad("missing label")),
            "random" => {
                let seed = rest
                    .strip_prefix("seed=")
                    .ok_or_else(|| bad("expected random:seed=<int>"))?
                    .parse()
                    .map_err(|_| bad("seed is not a non-negative integer"))?;
                Ok(StateSpec::Random { seed })
            }
            "family" => {
                let mut p = None;
                let mut psi = None;
                for part in rest.split(',') {
                    match part.split_once('=') {
                        Some(("p", v)) => {
                            let v: f64 = v.parse().map_err(|_| bad("p is not a number"))?;
                            if !(0.0..=1.0).contains(&v) {
                                return Err(bad("p outside [0, 1]"));
                            }
                            p = Some(v);
                        }
                        Some(("psi", v)) if !v.is_empty() => psi = Some(v.to_string()),
                        _ => return Err(bad("expected family:p=<float>,psi=<label>")),
                    }
                }
                match (p, psi) {
                    (Some(p), Some(psi)) => Ok(StateSpec::Family { p, psi }),
                    _ => Err(bad("family needs both p and psi")),
                }
            }
            _ => Err(bad("unknown state kind")),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Pure(label) => write!(f, "pure:{label}"),
            StateSpec::Mixed => write!(f, "mixed"),
            StateSpec::Family { p, psi } => write!(f, "family:p={p},psi={psi}"),
            StateSpec::Random { seed } => write!(f, "random:seed={seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(2, 0).unwrap(), vec![ONE, ZERO]);
        assert_eq!(basis_state(4, 2).unwrap(), vec![ZERO, ZERO, ONE, ZERO]);
        assert!(matches!(
            basis_state(3, 3),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
        for j in 0..5 {
            for k in 0..5 {
                let ip = qmath::inner(&basis_state(5, j).unwrap(), &basis_state(5, k).unwrap());
                assert_eq!(ip, if j == k { ONE } else { ZERO });
            }
        }
    }

    #[test]
    fn b0_is_uniform_superposition() {
        let b = b0_state(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b[0].re - s).abs() < 1e-15 && (b[1].re - s).abs() < 1e-15);
        let d = named_state("D", 2).unwrap();
        assert!(b.iter().zip(&d).all(|(x, y)| (x - y).norm() < 1e-15));
        assert_eq!(b0_state(1).unwrap(), vec![ONE]);
        let b7 = b0_state(7).unwrap();
        assert!((qmath::inner(&b7, &b7).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn purity_family_limits() {
        let d_state = named_state("D", 2).unwrap();
        let pure = purity_family(1.0, &d_state).unwrap();
        assert!(pure
            .matrix()
            .approx_eq(&ComplexMatrix::projector(&d_state), 1e-15));

        let mixed = purity_family(0.0, &d_state).unwrap();
        assert!(mixed
            .matrix()
            .approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));

        let rho = purity_family(0.6, &d_state).unwrap();
        assert!((purity(&rho) - 0.68).abs() < 1e-14);
        assert!(rho.positivity_checked());

        let h = purity_family(0.5, &named_state("H", 2).unwrap()).unwrap();
        assert!((purity(&h) - 0.625).abs() < 1e-14);

        assert!(purity_family(1.2, &d_state).is_err());
        assert!(purity_family(-0.1, &d_state).is_err());
    }

    #[test]
    fn purity_family_is_affine_in_p() {
        let psi = named_state("R", 2).unwrap();
        let r0 = purity_family(0.1, &psi).unwrap();
        let r1 = purity_family(0.4, &psi).unwrap();
        let r2 = purity_family(0.9, &psi).unwrap();
        // r1 = r0 + (0.3 / 0.8) (r2 - r0)
        let interp = r0.matrix() + &(r2.matrix() - r0.matrix()).scale_real(0.3 / 0.8);
        assert!(interp.approx_eq(r1.matrix(), 1e-14));
    }

    #[test]
    fn purity_values() {
        assert!((purity(&DensityMatrix::maximally_mixed(2).unwrap()) - 0.5).abs() < 1e-15);
        let pure = DensityMatrix::pure(&named_state("L", 2).unwrap()).unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_density_is_deterministic_and_valid() {
        let a = random_density(4, 17).unwrap();
        let b = random_density(4, 17).unwrap();
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
        for seed in 0..100 {
            let rho = random_density(4, seed).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let eig = qmath::hermitian_eigen(rho.matrix()).unwrap();
            assert!(eig.eigenvalues[0] >= -1e-12);
            let p = purity(&rho);
            assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn density_validation_errors() {
        let not_unit = ComplexMatrix::identity(2);
        assert!(matches!(
            DensityMatrix::new(not_unit),
            Err(Error::InvalidTrace { .. })
        ));
        let not_herm = ComplexMatrix::from_real_rows(&[[0.5, 1.0], [0.0, 0.5]]);
        assert!(matches!(
            DensityMatrix::new(not_herm),
            Err(Error::NotHermitian { .. })
        ));
        let negative = ComplexMatrix::from_real_rows(&[[1.5, 0.0], [0.0, -0.5]]);
        let rho = DensityMatrix::new(negative.clone()).unwrap();
        assert!(!rho.positivity_checked());
        assert!(matches!(
            DensityMatrix::new_positive(negative),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn state_spec_parsing() {
        assert_eq!("pure:D".parse::<StateSpec>().unwrap(), StateSpec::Pure("D".into()));
        assert_eq!("mixed".parse::<StateSpec>().unwrap(), StateSpec::Mixed);
        assert_eq!(
            "family:p=0.25,psi=H".parse::<StateSpec>().unwrap(),
            StateSpec::Family {
                p: 0.25,
                psi: "H".into()
            }
        );
        assert_eq!(
            "random:seed=12".parse::<StateSpec>().unwrap(),
            StateSpec::Random { seed: 12 }
        );
        for bad in ["", "pure:", "family:p=2,psi=H", "family:p=0.5", "random:12", "thermal:T=1"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
        assert!(StateSpec::Pure("D".into()).validate_for(3).is_err());
        assert!(StateSpec::Pure("a3".into()).validate_for(3).is_ok());
        assert!(StateSpec::Pure("a4".into()).validate_for(3).is_err());
        assert!(StateSpec::Pure("b0".into()).validate_for(5).is_ok());
    }

    proptest! {
        #[test]
        fn state_spec_display_round_trips(p in 0.0f64..=1.0, seed in any::<u64>(), which in 0usize..4) {
            let spec = match which {
                0 => StateSpec::Pure("R".into()),
                1 => StateSpec::Mixed,
                2 => StateSpec::Family { p, psi: "a2".into() },
                _ => StateSpec::Random { seed },
            };
            prop_assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }
}
