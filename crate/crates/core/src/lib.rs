//! Direct reconstruction of a d-dimensional density matrix from the joint
//! statistics of two qubit pointers coupled to the system at arbitrary
//! strength.
//!
//! Pointer A couples to a basis projector `|a_j><a_j|`, pointer B to the
//! projector onto the uniform superposition `|b0>`, and the system is then
//! projected onto `|a_k>`. Pointer correlations for all `(j, k)` feed one of
//! three estimators: the weak-coupling estimator `W`, which is biased away
//! from weak coupling, and the exact estimators `I` and `II`. Standard
//! tomography by linear inversion is provided as a reference.
//!
//! ```
//! use dmrecon_core::{reconstruct, CorrelationSet, CouplingConfig, DensityMatrix, Method};
//! use dmrecon_core::states::named_state;
//!
//! let rho = DensityMatrix::pure(&named_state("D", 2)?)?;
//! let cfg = CouplingConfig::symmetric(2, std::f64::consts::FRAC_PI_2)?;
//! let set = CorrelationSet::exact(&rho, &cfg, Method::I.required_pairs())?;
//! let result = reconstruct(Method::I, &set, &cfg)?;
//! assert!(result.finalized()?.trace_distance(&rho)? < 1e-12);
//! # Ok::<(), dmrecon_core::Error>(())
//! ```

pub mod correlations;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod protocol;
pub mod qmath;
pub mod reconstruct;
pub mod rng;
pub mod states;

pub use correlations::{CorrelationRecord, CorrelationSet, ObservablePair};
pub use error::{Error, Result};
pub use experiments::{BiasModel, CorrelationMode, Reference, ResultRow, Scenario, ScenarioKind};
pub use io::{parse_config, ConfigDocument, MatrixFormat};
pub use metrics::{error_lower_bound, mean_square_error, ErrorBound};
pub use protocol::{CouplingConfig, PointerObservable, PointerSetting, TripartiteState};
pub use qmath::{ComplexMatrix, RealMatrix, C64};
pub use reconstruct::{finalize, reconstruct, Method, ReconstructionResult};
pub use states::{DensityMatrix, StateSpec};
