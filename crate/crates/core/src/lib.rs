//! Low-tubal-rank tensor completion under the t-product.
//!
//! The crate is generic over the scalar type ([`Scalar`] is implemented for
//! `f32` and `f64`); the aliases at the root fix it to `f64`.

pub mod completion;
pub mod error;
pub mod matrix;
pub mod penalty;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod tensor;
pub mod tsvd;
pub mod wtsvt;

pub use completion::{project, structured_mask, synth_instance, CompletionLoss, MaskKind, ObservationMask, SynthInstance};
pub use error::{Error, Result};
pub use penalty::{check_prox_monotone, standard_grid, AdmittedPenalty, Penalty, ScalarPenalty};
pub use scalar::Scalar;
pub use solver::{
    monitor_check, objective, objective_for, prox_step, solve, ConvergenceTrace, IterState, Loss, MonitorReport, MuMode,
    SolveOutput, SolverConfig, StopReason, TraceRecord, WeightMode,
};
pub use spectral::{dft_mode3, idft_mode3, unique_slice_range, SpectralTensor};
pub use tensor::{Dims, Tensor3};
pub use tsvd::{multi_rank, spectral_singular_values, t_svd, tubal_nuclear_norm, MultiRank, SingularSpectrum, TsvdFactors};
pub use wtsvt::{
    adaptive_weights, table1_preset, weighted_norm, weighted_tsvt, Preset, Regularizer, WeightKind, WeightScheme,
};

pub type Tensor = Tensor3<f64>;
pub type Tensor32 = Tensor3<f32>;
pub type Config = SolverConfig<f64>;
pub type Config32 = SolverConfig<f32>;
pub type Weights = WeightScheme<f64>;
pub type Loss64 = CompletionLoss<f64>;
