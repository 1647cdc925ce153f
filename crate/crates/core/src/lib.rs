//! Oscillator-into-oscillators codes protected by GKP ancillas.
//!
//! The crate covers the whole chain from encoders to logical noise:
//! symplectic transforms, additive Gaussian noise, modular measurements,
//! the code library, estimators, closed-form statistics, seeded Monte Carlo
//! and the gain optimizer.

pub mod analytic;
pub mod codes;
pub mod decoder;
pub mod error;
pub mod modular;
pub mod montecarlo;
pub mod noise;
pub mod optimizer;
pub mod quadrature;
pub mod symplectic;

pub use codes::{AncillaKind, CodeFamily, CodeSpec};
pub use decoder::{DecodeOutcome, Decoder, DecoderKind};

pub use error::{Error, Result};
pub use modular::{modular_measure, reduce, reduce_gkp, ModularOutcome, GKP_PERIOD};
pub use noise::{IidNoiseModel, NoiseCovariance, NoiseVector};
pub use symplectic::SymplecticTransform;
