//! Estimators that turn reshaped noise `z = S⁻¹ξ` into logical noise.
//!
//! Every decoder sees only what the physical protocol reveals: ancilla
//! syndromes, read modulo `√(2π)` for GKP ancillas or exactly for position
//! eigenstates. The data-mode entries of `z` are used only to form the
//! residual after the counter-displacement, which is the logical noise.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::codes::{AncillaKind, CodeFamily, CodeSpec};
use crate::error::{Error, Result};
use crate::modular::{modular_measure, reduce_gkp};
use crate::noise::NoiseVector;

/// Logical quadrature noise on the (single) data mode after correction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub logical_xi_q: f64,
    pub logical_xi_p: f64,
}

/// Linear estimator weights of the two-mode-squeezing decoder: the data
/// noise is estimated as `c_q z̄_q2` and `c_p z̄_p2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorCoefficients {
    pub c_q: f64,
    pub c_p: f64,
}

fn expect_modes(z: &NoiseVector, n: usize) -> Result<()> {
    if z.n_modes() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.n_modes() });
    }
    Ok(())
}

/// Maximum-likelihood correction of the `n`-mode Gaussian repetition code.
/// Position logical noise is the mean of the `ξ_q`; momentum is untouched.
pub fn decode_gaussian_repetition(z: &NoiseVector, n: usize) -> Result<DecodeOutcome> {
    expect_modes(z, n)?;
    let shift: f64 = (1..n).map(|k| z.q(k)).sum::<f64>() / n as f64;
    Ok(DecodeOutcome { logical_xi_q: z.q(0) + shift, logical_xi_p: z.p(0) })
}

/// Two-mode GKP repetition code: half of the position syndrome and all of
/// the momentum syndrome are fed back to the data mode.
pub fn decode_gkp_repetition<R: Rng + ?Sized>(z: &NoiseVector, sigma_gkp: f64, rng: &mut R) -> Result<DecodeOutcome> {
    expect_modes(z, 2)?;
    let zq = modular_measure(z.q(1), sigma_gkp, rng).value();
    let zp = modular_measure(z.p(1), sigma_gkp, rng).value();
    Ok(DecodeOutcome { logical_xi_q: z.q(0) + 0.5 * zq, logical_xi_p: z.p(0) - zp })
}

/// Minimum-mean-square-error weights for the two-mode-squeezing code.
pub fn mmse_coefficients(gain: f64, sigma: f64, sigma_gkp: f64) -> Result<EstimatorCoefficients> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(Error::Domain(format!("gain must be >= 1, got {gain}")));
    }
    if !(sigma >= 0.0 && sigma_gkp >= 0.0) {
        return Err(Error::Domain(format!("noise levels must be >= 0, got {sigma}, {sigma_gkp}")));
    }
    let num = 2.0 * (gain * (gain - 1.0)).sqrt() * sigma * sigma;
    let den = (2.0 * gain - 1.0) * sigma * sigma + 2.0 * sigma_gkp * sigma_gkp;
    let c = if num == 0.0 { 0.0 } else { num / den };
    Ok(EstimatorCoefficients { c_q: -c, c_p: c })
}

/// GKP two-mode-squeezing code with MMSE counter-displacement.
pub fn decode_gkp_tms<R: Rng + ?Sized>(
    z: &NoiseVector,
    gain: f64,
    sigma: f64,
    sigma_gkp: f64,
    rng: &mut R,
) -> Result<DecodeOutcome> {
    expect_modes(z, 2)?;
    let c = mmse_coefficients(gain, sigma, sigma_gkp)?;
    Ok(tms_apply(z, c, sigma_gkp, rng))
}

#[inline]
fn tms_apply<R: Rng + ?Sized>(z: &NoiseVector, c: EstimatorCoefficients, sigma_gkp: f64, rng: &mut R) -> DecodeOutcome {
    let zq = modular_measure(z.q(1), sigma_gkp, rng).value();
    let zp = modular_measure(z.p(1), sigma_gkp, rng).value();
    DecodeOutcome { logical_xi_q: z.q(0) - c.c_q * zq, logical_xi_p: z.p(0) - c.c_p * zp }
}

/// Sequential decoding schedule for one quadrature of a code whose encoder
/// does not mix positions with momenta.
///
/// Ancillas are read one at a time, always picking the one whose value is
/// least uncertain given the readings so far. Each reading is unwrapped
/// around its conditional mean, so a syndrome far larger than the GKP
/// window is still recovered once its predictable part is known. The data
/// mode is then counter-displaced by the combination of readings that
/// cancels every physical noise source except one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraturePlan {
    order: Vec<usize>,
    predictors: Vec<Vec<f64>>,
    prior_std: Vec<f64>,
    weights: Vec<f64>,
    kept_source: usize,
    residual_gain: f64,
}

impl QuadraturePlan {
    /// `block` maps physical noise to reshaped noise for this quadrature
    /// (`z = block · ξ`); mode 0 is the data mode. Physical noise has
    /// variance `sigma²` and reading ancilla `k` adds variance
    /// `2·sigma_gkp[k-1]²`.
    pub fn new(block: &DMatrix<f64>, sigma: f64, sigma_gkp: &[f64]) -> Result<Self> {
        let n = block.nrows();
        if block.ncols() != n || n < 2 || sigma_gkp.len() != n - 1 {
            return Err(Error::DimensionMismatch { expected: n.max(2), found: sigma_gkp.len() + 1 });
        }
        // Covariance of z; conditioning only depends on ratios, so a unit
        // scale is used when the physical noise vanishes.
        let scale = if sigma > 0.0 { sigma * sigma } else { 1.0 };
        let cov = block * block.transpose() * scale;
        let meas_var = |k: usize| 2.0 * sigma_gkp[k - 1] * sigma_gkp[k - 1];

        let mut order: Vec<usize> = Vec::with_capacity(n - 1);
        let mut predictors = Vec::with_capacity(n - 1);
        let mut prior_std = Vec::with_capacity(n - 1);
        let mut remaining: Vec<usize> = (1..n).collect();
        while !remaining.is_empty() {
            let obs = observed_cov(&cov, &order, &meas_var);
            let inv = obs.clone().try_inverse().ok_or_else(|| Error::Numerical("singular syndrome covariance".into()))?;
            let mut best: Option<(usize, f64, Vec<f64>)> = None;
            for (pos, &k) in remaining.iter().enumerate() {
                let cross = DVector::from_iterator(order.len(), order.iter().map(|&j| cov[(k, j)]));
                let b = &inv * &cross;
                let var = cov[(k, k)] + meas_var(k) - cross.dot(&b);
                if best.as_ref().is_none_or(|(_, v, _)| var < *v - 1e-12 * v.abs()) {
                    best = Some((pos, var, b.iter().copied().collect()));
                }
            }
            let (pos, var, b) = best.expect("nonempty");
            let k = remaining.remove(pos);
            order.push(k);
            predictors.push(b);
            prior_std.push((var.max(0.0) / scale).sqrt());
        }

        let (weights, kept_source, residual_gain) = zero_forcing(block, &order)?;
        Ok(Self { order, predictors, prior_std, weights, kept_source, residual_gain })
    }

    /// Order in which ancilla modes are read.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Weight of each reading (in reading order) in the counter-displacement.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the physical noise source left in the output and the factor
    /// multiplying it.
    pub fn residual(&self) -> (usize, f64) {
        (self.kept_source, self.residual_gain)
    }

    /// Conditional standard deviation of each reading in units of `sigma`.
    pub fn prior_std(&self) -> &[f64] {
        &self.prior_std
    }

    /// Reads the ancillas of `z` (one quadrature, length `N`) and returns the
    /// corrected data-mode noise. `scratch` must hold `N - 1` values.
    pub fn decode<R: Rng + ?Sized>(&self, z: &[f64], sigma_gkp: &[f64], rng: &mut R, scratch: &mut [f64]) -> f64 {
        for (step, &k) in self.order.iter().enumerate() {
            let mean: f64 = self.predictors[step].iter().zip(&scratch[..step]).map(|(b, y)| b * y).sum();
            let read = modular_measure(z[k], sigma_gkp[k - 1], rng).value();
            scratch[step] = mean + reduce_gkp(read - mean);
        }
        z[0] - self.weights.iter().zip(&scratch[..self.order.len()]).map(|(a, y)| a * y).sum::<f64>()
    }
}

fn observed_cov(cov: &DMatrix<f64>, order: &[usize], meas_var: &impl Fn(usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(order.len(), order.len(), |a, b| cov[(order[a], order[b])] + if a == b { meas_var(order[a]) } else { 0.0 })
}

/// For every candidate source `j`, solves for reading weights that remove
/// all other sources from `z_0 − Σ a_k z_k`; keeps the `j` with the smallest
/// leftover factor.
fn zero_forcing(block: &DMatrix<f64>, order: &[usize]) -> Result<(Vec<f64>, usize, f64)> {
    let n = block.nrows();
    let mut best: Option<(Vec<f64>, usize, f64)> = None;
    for j in 0..n {
        let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        let m = DMatrix::from_fn(n - 1, n - 1, |r, c| block[(order[c], others[r])]);
        let rhs = DVector::from_iterator(n - 1, others.iter().map(|&i| block[(0, i)]));
        let Some(a) = m.lu().solve(&rhs) else { continue };
        let leftover = block[(0, j)] - order.iter().zip(a.iter()).map(|(&k, ak)| ak * block[(k, j)]).sum::<f64>();
        if best.as_ref().is_none_or(|b| leftover.abs() < b.2.abs()) {
            best = Some((a.iter().copied().collect(), j, leftover));
        }
    }
    best.ok_or_else(|| Error::Numerical("no zero-forcing solution for this encoder".into()))
}

/// Precomputed schedules for both quadratures of a squeezed-repetition (or
/// any other quadrature-separating, single-data-mode GKP) code.
#[derive(Clone, Debug, PartialEq)]
pub struct SequentialDecoder {
    q: QuadraturePlan,
    p: QuadraturePlan,
    sigma_gkp: Vec<f64>,
}

impl SequentialDecoder {
    pub fn new(code: &CodeSpec, sigma: f64) -> Result<Self> {
        if code.data_modes() != 1 || code.ancilla_kind() != AncillaKind::Gkp {
            return Err(Error::Unsupported("sequential decoding needs one data mode and GKP ancillas".into()));
        }
        let inv = code.encoder().inverse();
        if !inv.separates_quadratures() {
            return Err(Error::Unsupported("sequential decoding needs an encoder that keeps q and p apart".into()));
        }
        let sg = code.ancilla_sigma_gkp();
        Ok(Self {
            q: QuadraturePlan::new(&inv.position_block(), sigma, sg)?,
            p: QuadraturePlan::new(&inv.momentum_block(), sigma, sg)?,
            sigma_gkp: sg.to_vec(),
        })
    }

    pub fn position_plan(&self) -> &QuadraturePlan {
        &self.q
    }

    pub fn momentum_plan(&self) -> &QuadraturePlan {
        &self.p
    }

    pub fn decode<R: Rng + ?Sized>(&self, z: &NoiseVector, rng: &mut R) -> Result<DecodeOutcome> {
        let n = self.sigma_gkp.len() + 1;
        expect_modes(z, n)?;
        let zq: Vec<f64> = (0..n).map(|k| z.q(k)).collect();
        let zp: Vec<f64> = (0..n).map(|k| z.p(k)).collect();
        let mut scratch = vec![0.0; n - 1];
        let xq = self.q.decode(&zq, &self.sigma_gkp, rng, &mut scratch);
        let xp = self.p.decode(&zp, &self.sigma_gkp, rng, &mut scratch);
        Ok(DecodeOutcome { logical_xi_q: xq, logical_xi_p: xp })
    }
}

/// One-shot decoding of the `n`-mode squeezed repetition code. Builds the
/// schedule on every call; use [`SequentialDecoder`] in loops.
pub fn decode_gkp_squeezed_repetition<R: Rng + ?Sized>(
    z: &NoiseVector,
    n: usize,
    lam: f64,
    sigma: f64,
    sigma_gkp: f64,
    rng: &mut R,
) -> Result<DecodeOutcome> {
    let code = CodeSpec::gkp_squeezed_repetition(n, lam)?.with_gkp_noise(sigma_gkp)?;
    SequentialDecoder::new(&code, sigma)?.decode(z, rng)
}

/// Decoder selector for the Monte Carlo engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    GaussianRepetition,
    GkpRepetition,
    GkpTwoModeSqueezing,
    GkpSqueezedRepetition,
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoderKind::GaussianRepetition => "gaussian-repetition",
            DecoderKind::GkpRepetition => "gkp-repetition",
            DecoderKind::GkpTwoModeSqueezing => "gkp-tms",
            DecoderKind::GkpSqueezedRepetition => "gkp-squeezed-repetition",
        })
    }
}

/// A decoder bound to a code and an input noise level.
#[derive(Clone, Debug, PartialEq)]
pub enum Decoder {
    GaussianRepetition { n: usize },
    GkpRepetition { sigma_gkp: f64 },
    GkpTwoModeSqueezing { coefficients: EstimatorCoefficients, sigma_gkp: f64 },
    Sequential(Box<SequentialDecoder>),
}

impl Decoder {
    /// Binds `kind` to `code`; fails when the code is not the one the
    /// decoder was derived for.
    pub fn new(kind: DecoderKind, code: &CodeSpec, sigma: f64) -> Result<Self> {
        let mismatch = || Error::DecoderMismatch { decoder: kind.to_string(), code: code.family().to_string() };
        let sg0 = code.ancilla_sigma_gkp().first().copied().unwrap_or(0.0);
        match (kind, code.family()) {
            (DecoderKind::GaussianRepetition, CodeFamily::GaussianRepetition { n }) => Ok(Decoder::GaussianRepetition { n }),
            (DecoderKind::GkpRepetition, CodeFamily::GkpRepetition) => Ok(Decoder::GkpRepetition { sigma_gkp: sg0 }),
            (DecoderKind::GkpTwoModeSqueezing, CodeFamily::GkpTwoModeSqueezing { gain }) => {
                Ok(Decoder::GkpTwoModeSqueezing { coefficients: mmse_coefficients(gain, sigma, sg0)?, sigma_gkp: sg0 })
            }
            (DecoderKind::GkpSqueezedRepetition, CodeFamily::GkpSqueezedRepetition { .. }) => {
                Ok(Decoder::Sequential(Box::new(SequentialDecoder::new(code, sigma)?)))
            }
            _ => Err(mismatch()),
        }
    }

    pub fn decode<R: Rng + ?Sized>(&self, z: &NoiseVector, rng: &mut R) -> Result<DecodeOutcome> {
        match self {
            Decoder::GaussianRepetition { n } => decode_gaussian_repetition(z, *n),
            Decoder::GkpRepetition { sigma_gkp } => decode_gkp_repetition(z, *sigma_gkp, rng),
            Decoder::GkpTwoModeSqueezing { coefficients, sigma_gkp } => {
                expect_modes(z, 2)?;
                Ok(tms_apply(z, *coefficients, *sigma_gkp, rng))
            }
            Decoder::Sequential(d) => d.decode(z, rng),
        }
    }
}
