//! The two-pointer coupling protocol.
//!
//! The tripartite Hilbert space is always ordered `system (x) pointer A (x) pointer B`,
//! with dimension `4d`. Both pointers start in `|0>`, the +1 eigenstate of `Z`.
//! For coupling index `j` the system projector `Pi_{a_j}` rotates pointer A about
//! `Y` by `theta_A`; afterwards `Pi_{b0}` rotates pointer B by `theta_B`. The two
//! couplings do not commute, so the order is fixed: `U_B U_{A,j}`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{self, c, pauli, tensor, ComplexMatrix, C64, DEFAULT_TOL, ONE, ZERO};
use crate::states::{self, DensityMatrix};

const THETA_SLACK: f64 = 1e-12;
/// Probabilities in `[-NEGATIVE_PROB_LIMIT, 0)` are rounding noise and are clipped.
pub const NEGATIVE_PROB_LIMIT: f64 = 1e-9;

/// Coupling dimension and strengths. Derived constants are always computed
/// from the stored angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    dim: usize,
    theta_a: f64,
    theta_b: f64,
}

impl CouplingConfig {
    /// Accepts `0 <= theta <= pi/2`. Zero strength is valid for evolution but
    /// every reconstruction quantity that needs `N_AB` rejects it.
    pub fn new(dim: usize, theta_a: f64, theta_b: f64) -> Result<Self> {
        if dim == 0 || dim > qmath::MAX_SYSTEM_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} outside 1..={}",
                qmath::MAX_SYSTEM_DIM
            )));
        }
        for (name, theta) in [("theta_a", theta_a), ("theta_b", theta_b)] {
            if !theta.is_finite() || !(0.0..=FRAC_PI_2 + THETA_SLACK).contains(&theta) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {theta} outside [0, pi/2]"
                )));
            }
        }
        Ok(Self {
            dim,
            theta_a,
            theta_b,
        })
    }

    pub fn symmetric(dim: usize, theta: f64) -> Result<Self> {
        Self::new(dim, theta, theta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    pub fn theta_b(&self) -> f64 {
        self.theta_b
    }

    /// `tan(theta_A / 2)`.
    pub fn t_a(&self) -> f64 {
        (self.theta_a / 2.0).tan()
    }

    /// `tan(theta_B / 2)`.
    pub fn t_b(&self) -> f64 {
        (self.theta_b / 2.0).tan()
    }

    pub fn sin_a(&self) -> f64 {
        self.theta_a.sin()
    }

    pub fn sin_b(&self) -> f64 {
        self.theta_b.sin()
    }

    pub fn cos_a(&self) -> f64 {
        self.theta_a.cos()
    }

    pub fn cos_b(&self) -> f64 {
        self.theta_b.cos()
    }

    pub fn is_zero_strength(&self) -> bool {
        self.theta_a == 0.0 || self.theta_b == 0.0
    }

    /// `N_AB = d / (4 sin(theta_A) sin(theta_B))`.
    pub fn n_ab(&self) -> Result<f64> {
        if self.is_zero_strength() {
            return Err(Error::ZeroStrength);
        }
        Ok(self.dim as f64 / (4.0 * self.sin_a() * self.sin_b()))
    }

    pub fn require_strength(&self) -> Result<()> {
        self.n_ab().map(|_| ())
    }

    pub fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

/// Pointer observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointerObservable {
    X,
    Y,
    Z,
    /// `|1><1| = (1 - Z)/2`, eigenvalue weights (1, 0).
    Pi1,
}

impl PointerObservable {
    pub const ALL: [PointerObservable; 4] = [Self::X, Self::Y, Self::Z, Self::Pi1];

    pub fn operator(self) -> ComplexMatrix {
        match self {
            Self::X => pauli::x(),
            Self::Y => pauli::y(),
            Self::Z => pauli::z(),
            Self::Pi1 => pauli::pi1(),
        }
    }
}

impl fmt::Display for PointerObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
            Self::Pi1 => "Pi1",
        })
    }
}

impl FromStr for PointerObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" => Ok(Self::X),
            "Y" => Ok(Self::Y),
            "Z" => Ok(Self::Z),
            "Pi1" | "P1" => Ok(Self::Pi1),
            _ => Err(Error::InvalidParameter(format!("unknown pointer observable '{s}'"))),
        }
    }
}

/// A pointer measurement: an observable tag plus the spectral projectors that
/// are physically measured, each paired with the eigenvalue assigned to it.
#[derive(Clone, Debug, PartialEq)]
pub struct PointerSetting {
    observable: PointerObservable,
    projectors: Vec<(f64, ComplexMatrix)>,
}

impl PointerSetting {
    /// Ideal spectral decomposition. The +1 (or weight-1) projector comes first.
    pub fn ideal(observable: PointerObservable) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let vectors: [(f64, [C64; 2]); 2] = match observable {
            PointerObservable::X => [
                (1.0, [c(s, 0.0), c(s, 0.0)]),
                (-1.0, [c(s, 0.0), c(-s, 0.0)]),
            ],
            PointerObservable::Y => [
                (1.0, [c(s, 0.0), c(0.0, s)]),
                (-1.0, [c(s, 0.0), c(0.0, -s)]),
            ],
            PointerObservable::Z => [(1.0, [ONE, ZERO]), (-1.0, [ZERO, ONE])],
            PointerObservable::Pi1 => [(1.0, [ZERO, ONE]), (0.0, [ONE, ZERO])],
        };
        Self {
            observable,
            projectors: vectors
                .iter()
                .map(|(l, v)| (*l, ComplexMatrix::projector(v)))
                .collect(),
        }
    }

    /// Builds a setting from explicit projectors, which must be Hermitian and idempotent.
    pub fn from_projectors(
        observable: PointerObservable,
        projectors: Vec<(f64, ComplexMatrix)>,
    ) -> Result<Self> {
        for (_, p) in &projectors {
            check_projector(p, 1e-12)?;
            if p.rows() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: p.rows(),
                });
            }
        }
        Ok(Self {
            observable,
            projectors,
        })
    }

    pub fn observable(&self) -> PointerObservable {
        self.observable
    }

    pub fn projectors(&self) -> &[(f64, ComplexMatrix)] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn eigenvalue(&self, outcome: usize) -> f64 {
        self.projectors[outcome].0
    }

    /// Conjugates every projector by `exp(-i angle Y)`.
    pub fn rotated_about_y(&self, angle: f64) -> Self {
        let r = pauli::y_rotation(angle);
        let rd = r.dagger();
        Self {
            observable: self.observable,
            projectors: self
                .projectors
                .iter()
                .map(|(l, p)| (*l, r.matmul(p).matmul(&rd)))
                .collect(),
        }
    }
}

fn check_projector(p: &ComplexMatrix, tol: f64) -> Result<()> {
    if !p.is_square() {
        return Err(Error::NotSquare {
            rows: p.rows(),
            cols: p.cols(),
        });
    }
    let herm = p.hermiticity_defect();
    if herm > tol {
        return Err(Error::NotProjector(format!("not Hermitian (defect {herm:e})")));
    }
    let idem = p.matmul(p).max_abs_diff(p);
    if idem > tol {
        return Err(Error::NotProjector(format!("not idempotent (defect {idem:e})")));
    }
    Ok(())
}

/// `exp(-i theta Pi (x) Y) = (1 - Pi) (x) 1 + Pi (x) exp(-i theta Y)` on system (x) pointer.
pub fn coupling_unitary(proj: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    check_projector(proj, DEFAULT_TOL)?;
    let d = proj.rows();
    let complement = &ComplexMatrix::identity(d) - proj;
    Ok(&tensor(&complement, &pauli::id2()) + &tensor(proj, &pauli::y_rotation(theta)))
}

/// The pointer a coupling acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointerLeg {
    A,
    B,
}

/// `s (x) a (x) b` in the fixed leg order.
pub fn embed(system: &ComplexMatrix, pointer_a: &ComplexMatrix, pointer_b: &ComplexMatrix) -> ComplexMatrix {
    tensor(&tensor(system, pointer_a), pointer_b)
}

/// Lifts an operator on `system (x) pointer` (dimension `2d`) to the tripartite
/// space, acting on the chosen pointer leg and as identity on the other one.
pub fn embed_system_pointer(op: &ComplexMatrix, leg: PointerLeg) -> Result<ComplexMatrix> {
    if !op.is_square() || op.rows() % 2 != 0 {
        return Err(Error::InvalidParameter(
            "system-pointer operator must be square with even dimension".into(),
        ));
    }
    match leg {
        PointerLeg::A => Ok(tensor(op, &pauli::id2())),
        PointerLeg::B => {
            let d = op.rows() / 2;
            // (s, a, b) -> flat index s*4 + a*2 + b; op indexes (s, b) as s*2 + b.
            Ok(ComplexMatrix::from_fn(4 * d, 4 * d, |r, col| {
                let (rs, ra, rb) = (r / 4, (r / 2) % 2, r % 2);
                let (cs, ca, cb) = (col / 4, (col / 2) % 2, col % 2);
                if ra != ca {
                    ZERO
                } else {
                    op[(rs * 2 + rb, cs * 2 + cb)]
                }
            }))
        }
    }
}

/// `U_{A,j}`: `Pi_{a_j}` coupled to `Y_A`.
pub fn coupling_a(j: usize, cfg: &CouplingConfig) -> Result<ComplexMatrix> {
    cfg.check_index(j)?;
    let proj = ComplexMatrix::projector(&states::basis_state(cfg.dim(), j)?);
    embed_system_pointer(&coupling_unitary(&proj, cfg.theta_a())?, PointerLeg::A)
}

/// `U_B`: `Pi_{b0}` coupled to `Y_B`.
pub fn coupling_b(cfg: &CouplingConfig) -> Result<ComplexMatrix> {
    let proj = ComplexMatrix::projector(&states::b0_state(cfg.dim())?);
    embed_system_pointer(&coupling_unitary(&proj, cfg.theta_b())?, PointerLeg::B)
}

/// `U_B U_{A,j}` as one `4d x 4d` unitary (`U_{A,j}` acts first).
pub fn build_coupled_evolution(j: usize, cfg: &CouplingConfig) -> Result<ComplexMatrix> {
    Ok(coupling_b(cfg)?.matmul(&coupling_a(j, cfg)?))
}

/// A density operator on `system (x) A (x) B`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteState {
    dim: usize,
    matrix: ComplexMatrix,
}

impl TripartiteState {
    /// `rho (x) |0><0| (x) |0><0|`.
    pub fn initial(rho: &DensityMatrix) -> Self {
        let zero = ComplexMatrix::projector(&[ONE, ZERO]);
        Self {
            dim: rho.dim(),
            matrix: embed(rho.matrix(), &zero, &zero),
        }
    }

    pub fn system_dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `sigma_out,j = U_B U_{A,j} sigma_in U_{A,j}^dagger U_B^dagger`.
pub fn evolve(rho: &DensityMatrix, j: usize, cfg: &CouplingConfig) -> Result<TripartiteState> {
    if rho.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            found: rho.dim(),
        });
    }
    let u = build_coupled_evolution(j, cfg)?;
    let sigma_in = TripartiteState::initial(rho);
    Ok(TripartiteState {
        dim: rho.dim(),
        matrix: u.matmul(&sigma_in.matrix).matmul(&u.dagger()),
    })
}

/// Joint probabilities of (pointer A outcome, pointer B outcome, system outcome k)
/// for one coupling index `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable {
    j: usize,
    dim: usize,
    settings: (PointerSetting, PointerSetting),
    probs: Vec<f64>,
}

impl OutcomeTable {
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> &(PointerSetting, PointerSetting) {
        &self.settings
    }

    pub fn n_a(&self) -> usize {
        self.settings.0.len()
    }

    pub fn n_b(&self) -> usize {
        self.settings.1.len()
    }

    /// Flat index of cell `(a, b, k)`; cells are ordered a-major, then b, then k.
    pub fn index(&self, a: usize, b: usize, k: usize) -> usize {
        (a * self.n_b() + b) * self.dim + k
    }

    /// Inverse of [`OutcomeTable::index`].
    pub fn cell(&self, index: usize) -> (usize, usize, usize) {
        let k = index % self.dim;
        let ab = index / self.dim;
        (ab / self.n_b(), ab % self.n_b(), k)
    }

    pub fn prob(&self, a: usize, b: usize, k: usize) -> f64 {
        self.probs[self.index(a, b, k)]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// `lambda_a lambda_b` for cell `(a, b, *)`.
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.settings.0.eigenvalue(a) * self.settings.1.eigenvalue(b)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Scales every cell where pointer A gave `outcome_a` by `factor`, then renormalizes.
    pub fn apply_efficiency(&mut self, outcome_a: usize, factor: f64) {
        for b in 0..self.n_b() {
            for k in 0..self.dim {
                let i = self.index(outcome_a, b, k);
                self.probs[i] *= factor;
            }
        }
        let total = self.total();
        if total > 0.0 {
            for p in &mut self.probs {
                *p /= total;
            }
        }
    }
}

/// `P(a, b, k) = Tr[(Pi_{a_k} (x) P_a (x) P_b) sigma_out]`.
///
/// Negative values down to `-1e-9` are rounding noise and clipped to zero;
/// anything below is reported as numerical corruption.
pub fn outcome_probabilities(
    sigma_out: &TripartiteState,
    j: usize,
    settings: &(PointerSetting, PointerSetting),
) -> Result<OutcomeTable> {
    let d = sigma_out.dim;
    let m = &sigma_out.matrix;
    let (set_a, set_b) = settings;
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::InvalidParameter("pointer setting has no projectors".into()));
    }
    let mut probs = Vec::with_capacity(set_a.len() * set_b.len() * d);
    for (_, pa) in set_a.projectors() {
        for (_, pb) in set_b.projectors() {
            for k in 0..d {
                // Tr[(|k><k| (x) Pa (x) Pb) sigma] restricted to the k-th system block.
                let mut acc = ZERO;
                for x in 0..2 {
                    for xp in 0..2 {
                        let wa = pa[(x, xp)];
                        if wa == ZERO {
                            continue;
                        }
                        for y in 0..2 {
                            for yp in 0..2 {
                                let wb = pb[(y, yp)];
                                if wb == ZERO {
                                    continue;
                                }
                                let row = k * 4 + xp * 2 + yp;
                                let col = k * 4 + x * 2 + y;
                                acc += wa * wb * m[(row, col)];
                            }
                        }
                    }
                }
                let p = acc.re;
                if p < -NEGATIVE_PROB_LIMIT {
                    return Err(Error::NumericalCorruption { probability: p });
                }
                probs.push(p.max(0.0));
            }
        }
    }
    Ok(OutcomeTable {
        j,
        dim: d,
        settings: settings.clone(),
        probs,
    })
}

/// Convenience: evolve and tabulate ideal pointer measurements.
pub fn ideal_outcome_table(
    rho: &DensityMatrix,
    j: usize,
    obs_a: PointerObservable,
    obs_b: PointerObservable,
    cfg: &CouplingConfig,
) -> Result<OutcomeTable> {
    let sigma = evolve(rho, j, cfg)?;
    outcome_probabilities(
        &sigma,
        j,
        &(PointerSetting::ideal(obs_a), PointerSetting::ideal(obs_b)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density, DensityMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rank1_projector(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
        let v: Vec<C64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm = qmath::inner(&v, &v).re.sqrt();
        let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
        ComplexMatrix::projector(&v)
    }

    #[test]
    fn config_derived_constants() {
        let cfg = CouplingConfig::new(2, FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((cfg.n_ab().unwrap() - 0.5).abs() < 1e-15);
        assert!((cfg.t_a() - 1.0).abs() < 1e-15);
        let cfg = CouplingConfig::new(3, 0.4, 0.9).unwrap();
        let expected = 3.0 / (4.0 * 0.4f64.sin() * 0.9f64.sin());
        assert!((cfg.n_ab().unwrap() - expected).abs() < 1e-13);
        assert!((cfg.t_b() - 0.45f64.tan()).abs() < 1e-15);
        assert!(matches!(
            CouplingConfig::new(2, 0.0, 0.3).unwrap().n_ab(),
            Err(Error::ZeroStrength)
        ));
        assert!(CouplingConfig::new(2, -0.1, 0.3).is_err());
        assert!(CouplingConfig::new(2, 1.6, 0.3).is_err());
        assert!(CouplingConfig::new(0, 0.1, 0.3).is_err());
        assert!(CouplingConfig::new(17, 0.1, 0.3).is_err());
    }

    #[test]
    fn pointer_settings_are_spectral() {
        for obs in PointerObservable::ALL {
            let s = PointerSetting::ideal(obs);
            let mut sum = ComplexMatrix::zeros(2, 2);
            let mut weighted = ComplexMatrix::zeros(2, 2);
            for (l, p) in s.projectors() {
                assert!(p.matmul(p).approx_eq(p, 1e-12));
                assert!((p.trace().re - 1.0).abs() < 1e-15);
                sum = &sum + p;
                weighted = &weighted + &p.scale_real(*l);
            }
            assert!(sum.approx_eq(&pauli::id2(), 1e-15));
            assert!(weighted.approx_eq(&obs.operator(), 1e-15), "{obs}");
        }
    }

    #[test]
    fn coupling_unitary_cases() {
        let p0 = ComplexMatrix::projector(&[ONE, ZERO]);
        assert!(coupling_unitary(&p0, 0.0)
            .unwrap()
            .approx_eq(&ComplexMatrix::identity(4), 0.0));

        // |a0>|0> -> |a0>|1> at full strength
        let u = coupling_unitary(&p0, FRAC_PI_2).unwrap();
        let out = u.apply(&[ONE, ZERO, ZERO, ZERO]);
        let expected = [ZERO, ONE, ZERO, ZERO];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).norm() < 1e-15);
        }

        let bad = ComplexMatrix::from_real_rows(&[[0.5, 0.0], [0.0, 0.5]]);
        assert!(matches!(coupling_unitary(&bad, 0.3), Err(Error::NotProjector(_))));
    }

    #[test]
    fn coupling_unitary_matches_exponential_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for d in 1..=4 {
            for _ in 0..5 {
                let p = random_rank1_projector(&mut rng, d);
                let theta = rng.gen_range(0.0..FRAC_PI_2);
                let closed = coupling_unitary(&p, theta).unwrap();
                let oracle = qmath::matrix_exponential(&tensor(&p, &pauli::y()), theta).unwrap();
                assert!(closed.approx_eq(&oracle, 1e-12));
                assert!(closed.is_unitary(1e-12));
            }
        }
        let p = random_rank1_projector(&mut rng, 3);
        let oracle = qmath::matrix_exponential(&tensor(&p, &pauli::y()), 0.3).unwrap();
        assert!(coupling_unitary(&p, 0.3).unwrap().approx_eq(&oracle, 1e-12));
    }

    #[test]
    fn leg_embedding_matches_explicit_construction() {
        let cfg = CouplingConfig::new(3, 0.7, 1.1).unwrap();
        let proj = ComplexMatrix::projector(&states::b0_state(3).unwrap());
        let complement = &ComplexMatrix::identity(3) - &proj;
        let explicit = &embed(&complement, &pauli::id2(), &pauli::id2())
            + &embed(&proj, &pauli::id2(), &pauli::y_rotation(1.1));
        assert!(coupling_b(&cfg).unwrap().approx_eq(&explicit, 1e-15));

        let pa = ComplexMatrix::projector(&states::basis_state(3, 1).unwrap());
        let complement = &ComplexMatrix::identity(3) - &pa;
        let explicit = &embed(&complement, &pauli::id2(), &pauli::id2())
            + &embed(&pa, &pauli::y_rotation(0.7), &pauli::id2());
        assert!(coupling_a(1, &cfg).unwrap().approx_eq(&explicit, 1e-15));
    }

    #[test]
    fn coupled_evolution_order_matters() {
        let cfg = CouplingConfig::symmetric(2, FRAC_PI_2).unwrap();
        let ub = coupling_b(&cfg).unwrap();
        let ua = coupling_a(0, &cfg).unwrap();
        let forward = build_coupled_evolution(0, &cfg).unwrap();
        assert!(forward.approx_eq(&ub.matmul(&ua), 1e-15));
        let swapped = ua.matmul(&ub);
        let diff = &forward - &swapped;
        // spectral norm >= max column norm
        let col_norm = (0..diff.cols())
            .map(|col| (0..diff.rows()).map(|r| diff[(r, col)].norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!(col_norm > 0.1);

        let zero = CouplingConfig::symmetric(2, 0.0).unwrap();
        assert!(build_coupled_evolution(1, &zero)
            .unwrap()
            .approx_eq(&ComplexMatrix::identity(8), 0.0));
        assert!(build_coupled_evolution(2, &zero).is_err());
    }

    #[test]
    fn coupled_evolution_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let d = rng.gen_range(2..=5);
            let cfg = CouplingConfig::new(d, rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(0.0..FRAC_PI_2)).unwrap();
            let u = build_coupled_evolution(rng.gen_range(0..d), &cfg).unwrap();
            assert!(u.is_unitary(1e-12));
        }
    }

    #[test]
    fn evolve_preserves_state_properties() {
        let rho = random_density(3, 9).unwrap();
        let zero = CouplingConfig::symmetric(3, 0.0).unwrap();
        let sigma = evolve(&rho, 2, &zero).unwrap();
        assert!(sigma.matrix().approx_eq(TripartiteState::initial(&rho).matrix(), 1e-15));

        for seed in 0..10 {
            let rho = random_density(3, seed).unwrap();
            let cfg = CouplingConfig::new(3, 0.3 + 0.1 * seed as f64, 1.2).unwrap();
            let sigma = evolve(&rho, (seed % 3) as usize, &cfg).unwrap();
            assert!((sigma.matrix().trace() - ONE).norm() < 1e-12);
            assert!(sigma.matrix().is_hermitian(1e-12));
            let eig = qmath::hermitian_eigen(sigma.matrix()).unwrap();
            assert!(eig.eigenvalues[0] > -1e-10);
        }

        let wrong = random_density(2, 0).unwrap();
        let cfg = CouplingConfig::symmetric(3, 0.5).unwrap();
        assert!(matches!(evolve(&wrong, 0, &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn outcome_tables_are_normalized() {
        let rho = random_density(4, 3).unwrap();
        let cfg = CouplingConfig::new(4, 0.8, 0.2).unwrap();
        for j in 0..4 {
            let sigma = evolve(&rho, j, &cfg).unwrap();
            for a in PointerObservable::ALL {
                for b in PointerObservable::ALL {
                    let settings = (PointerSetting::ideal(a), PointerSetting::ideal(b));
                    let t = outcome_probabilities(&sigma, j, &settings).unwrap();
                    assert!((t.total() - 1.0).abs() < 1e-10);
                    assert!(t.probabilities().iter().all(|&p| (0.0..=1.0 + 1e-12).contains(&p)));
                }
            }
        }
    }

    #[test]
    fn outcome_table_known_values() {
        // maximally mixed qubit at full strength: P(1,1,k) = rho_jj / (16 N^2) = 0.125
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let cfg = CouplingConfig::symmetric(2, FRAC_PI_2).unwrap();
        let t = ideal_outcome_table(&rho, 0, PointerObservable::Pi1, PointerObservable::Pi1, &cfg).unwrap();
        for k in 0..2 {
            assert!((t.prob(0, 0, k) - 0.125).abs() < 1e-14);
        }

        let zero = CouplingConfig::symmetric(2, 0.0).unwrap();
        let rho = random_density(2, 1).unwrap();
        let t = ideal_outcome_table(&rho, 1, PointerObservable::Z, PointerObservable::Z, &zero).unwrap();
        let on_plus: f64 = (0..2).map(|k| t.prob(0, 0, k)).sum();
        assert!((on_plus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn negative_probabilities_are_rejected() {
        let mut m = ComplexMatrix::zeros(8, 8);
        m[(0, 0)] = c(-1e-6, 0.0);
        m[(1, 1)] = c(1.0 + 1e-6, 0.0);
        let sigma = TripartiteState { dim: 2, matrix: m };
        let settings = (PointerSetting::ideal(PointerObservable::Z), PointerSetting::ideal(PointerObservable::Z));
        assert!(matches!(
            outcome_probabilities(&sigma, 0, &settings),
            Err(Error::NumericalCorruption { .. })
        ));
    }

    #[test]
    fn efficiency_rescales_and_renormalizes() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let cfg = CouplingConfig::symmetric(2, 1.0).unwrap();
        let mut t = ideal_outcome_table(&rho, 0, PointerObservable::X, PointerObservable::X, &cfg).unwrap();
        let before = t.prob(0, 0, 0);
        t.apply_efficiency(0, 1.05);
        assert!((t.total() - 1.0).abs() < 1e-14);
        assert!(t.prob(0, 0, 0) > before);
    }

    #[test]
    fn rotated_setting_overlap() {
        let s = PointerSetting::ideal(PointerObservable::X);
        let r = s.rotated_about_y(0.02);
        for ((_, p), (_, q)) in s.projectors().iter().zip(r.projectors()) {
            let overlap = p.matmul(q).trace().re;
            assert!((overlap - 0.02f64.cos().powi(2)).abs() < 1e-12);
        }
    }
}
