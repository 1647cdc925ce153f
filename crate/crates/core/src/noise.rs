//! Additive Gaussian displacement noise: sampling, reshaping through an
//! inverse encoder, covariance propagation and parameter conversions.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::SymplecticTransform;

/// Quadrature displacement vector `(q1, p1, ..., qN, pN)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseVector(Vec<f64>);

impl NoiseVector {
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 != 0 {
            return Err(Error::Domain(format!("noise vector length {} is not a positive even number", values.len())));
        }
        Ok(Self(values))
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![0.0; 2 * n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.0.len() / 2
    }

    /// Position displacement of mode `k` (zero-based).
    pub fn q(&self, k: usize) -> f64 {
        self.0[2 * k]
    }

    /// Momentum displacement of mode `k` (zero-based).
    pub fn p(&self, k: usize) -> f64 {
        self.0[2 * k + 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Mutable view; the length (and so the mode count) cannot change.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Independent `N(0, σ²)` displacements on every quadrature of `n_modes` modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IidNoiseModel {
    pub sigma: f64,
    pub n_modes: usize,
}

impl IidNoiseModel {
    pub fn new(sigma: f64, n_modes: usize) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("noise standard deviation must be >= 0, got {sigma}")));
        }
        if n_modes == 0 {
            return Err(Error::Domain("noise model needs at least one mode".into()));
        }
        Ok(Self { sigma, n_modes })
    }

    /// Fills `out` (length `2N`) with one draw.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *x = self.sigma * z;
        }
    }

    pub fn covariance(&self) -> NoiseCovariance {
        NoiseCovariance(DMatrix::identity(2 * self.n_modes, 2 * self.n_modes) * self.sigma.powi(2))
    }
}

/// Generator for stream `stream` of a seeded family. Streams of the same seed
/// are independent ChaCha8 keystreams, so a given `(seed, stream)` pair
/// reproduces bit-identically no matter how work is scheduled.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` i.i.d. noise vectors drawn from stream 0 of `seed`.
pub fn sample_iid(model: &IidNoiseModel, seed: u64, count: usize) -> Vec<NoiseVector> {
    sample_iid_stream(model, seed, 0, count)
}

/// Like [`sample_iid`] but from an explicit stream (shard) index.
pub fn sample_iid_stream(model: &IidNoiseModel, seed: u64, stream: u64, count: usize) -> Vec<NoiseVector> {
    let mut rng = stream_rng(seed, stream);
    (0..count)
        .map(|_| {
            let mut v = vec![0.0; 2 * model.n_modes];
            model.fill(&mut rng, &mut v);
            NoiseVector(v)
        })
        .collect()
}

/// Reshaped noise `z = S⁻¹ ξ` seen after the inverse encoding circuit.
pub fn reshape_noise(encoder: &SymplecticTransform, xi: &NoiseVector) -> Result<NoiseVector> {
    encoder.inverse().apply(xi)
}

/// Symmetric positive-semidefinite quadrature noise covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCovariance(DMatrix<f64>);

impl NoiseCovariance {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 || matrix.nrows() % 2 != 0 {
            return Err(Error::Domain(format!("covariance dimension {} is not a positive even number", matrix.nrows())));
        }
        let cov = Self(matrix);
        let asym = cov.asymmetry();
        if asym > 1e-12 * cov.0.amax().max(1.0) {
            return Err(Error::Domain(format!("covariance is not symmetric (deviation {asym:.3e})")));
        }
        let min_eig = cov.min_eigenvalue();
        if min_eig < -1e-12 * cov.0.amax().max(1.0) {
            return Err(Error::Domain(format!("covariance has negative eigenvalue {min_eig:.3e}")));
        }
        Ok(cov)
    }

    pub fn isotropic(sigma: f64, n_modes: usize) -> Self {
        Self(DMatrix::identity(2 * n_modes, 2 * n_modes) * sigma * sigma)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

/// `V_z = S⁻¹ V (S⁻¹)ᵀ`.
pub fn propagate_covariance(encoder: &SymplecticTransform, v: &NoiseCovariance) -> Result<NoiseCovariance> {
    if encoder.n_modes() != v.n_modes() {
        return Err(Error::DimensionMismatch { expected: encoder.n_modes(), found: v.n_modes() });
    }
    let inv = encoder.inverse();
    let out = inv.matrix() * v.matrix() * inv.matrix().transpose();
    // Symmetrize away rounding in the triple product.
    Ok(NoiseCovariance((&out + out.transpose()) * 0.5))
}

/// Pure-loss probability `γ` to the additive-noise standard deviation `√γ`
/// reached after quantum-limited amplification.
pub fn loss_to_sigma(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!("loss probability must lie in [0, 1), got {gamma}")));
    }
    Ok(gamma.sqrt())
}

/// GKP noise standard deviation of the envelope `exp(-Δ n)` after twirling,
/// `σ² = (1 - e^{-Δ}) / (1 + e^{-Δ})`.
pub fn gkp_sigma_from_delta(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("GKP envelope parameter must be positive, got {delta}")));
    }
    Ok((0.5 * delta).tanh().sqrt())
}

/// Inverts `s = -10 log10(2σ²)`. `+∞` dB gives the canonical state, `σ = 0`.
pub fn gkp_sigma_from_db(s_db: f64) -> f64 {
    if s_db == f64::INFINITY {
        return 0.0;
    }
    (0.5 * 10f64.powf(-s_db / 10.0)).sqrt()
}

/// GKP squeezing in dB relative to vacuum variance 1/2.
pub fn gkp_db_from_sigma(sigma_gkp: f64) -> f64 {
    -10.0 * (2.0 * sigma_gkp * sigma_gkp).log10()
}
