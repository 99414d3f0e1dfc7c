//! Exact classical simulation of a variational-quantum plus iterative-HHL
//! workflow for complex-energy resonances.
//!
//! The numerical core is generic over the real scalar (`f32` or `f64`) via
//! [`Real`]; `f64` aliases are provided at the crate root for convenience.

pub mod circuit;
pub mod csm;
pub mod ec;
pub mod error;
pub mod fixtures;
pub mod hhl;
pub mod ihhl;
pub mod io;
pub mod linalg;
pub mod pauli;
pub mod scalar;
pub mod vqe;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Cx, Real};

pub type C64 = Cx<f64>;
pub type CMat = CMatrix<f64>;
pub type CVec = CVector<f64>;

pub type PauliString = pauli::PauliString;
pub type PauliSum = pauli::PauliSum<f64>;
pub type StateVector = circuit::StateVector<f64>;
pub type ParameterSet = circuit::ParameterSet<f64>;
pub type GeneralizedEigenProblem = ihhl::GeneralizedEigenProblem<f64>;
pub type IhhlConfig = ihhl::IhhlConfig<f64>;
pub type IhhlTrace = ihhl::IhhlTrace<f64>;
pub type HhlBackendConfig = hhl::HhlBackendConfig<f64>;
pub type HhlSolution = hhl::HhlSolution<f64>;
pub type TrainingConfig = vqe::TrainingConfig<f64>;
pub type TrainingTrace = vqe::TrainingTrace<f64>;
pub type GaussianBasis = csm::GaussianBasis<f64>;
pub type TwoBodySystem = csm::TwoBodySystem<f64>;
pub type CsmSweep = csm::CsmSweep<f64>;
pub type ResonanceResult = csm::ResonanceResult<f64>;
pub type EcTrainingSet = ec::EcTrainingSet<f64>;
