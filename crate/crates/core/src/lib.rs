//! Non-Markovian quadrature squeezing of a mechanical oscillator in a
//! linearized cavity-optomechanical system.
//!
//! Units: ħ = k_B = 1, frequencies in units of the mechanical frequency ω_m,
//! time in units of 1/ω_m. Quadratures follow X = (b + b†)/√2, so the vacuum
//! variance is 1/2.
//!
//! The main path is [`pipeline::run_volterra`]: build the composite memory
//! kernel, solve the Green-function Volterra system, and assemble the
//! second moments of the noise operator. [`oracle`] integrates the full
//! discretized (cavity + mechanics + bath modes) Gaussian model and
//! [`markov`] integrates the memoryless two-mode model; both are used to
//! cross-check the main path.

pub mod bath;
pub mod detection;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod kernel;
pub mod markov;
pub mod meanfield;
pub mod moments;
pub mod oracle;
pub mod output;
pub mod pipeline;
pub mod quadrature;
pub mod system;
pub mod toeplitz;
pub mod volterra;

pub use num_complex::Complex64 as c64;

pub use bath::{BathClass, BathSpec, DiscretizedBath};
pub use detection::DetectionSpec;
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use kernel::KernelTable;
pub use markov::MarkovianRun;
pub use meanfield::MeanFieldTrace;
pub use moments::{NoiseCorrelation, VarianceTrace};
pub use oracle::OracleConfig;
pub use system::SystemSpec;
pub use volterra::GreenPair;
