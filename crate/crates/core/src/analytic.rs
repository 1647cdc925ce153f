//! Closed-form and quadrature-based statistics of the logical noise.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::modular::{GKP_HALF_PERIOD, GKP_PERIOD};
use crate::quadrature::{integrate, normal_cdf, normal_interval, normal_pdf, Tolerance};

/// Cells whose Gaussian mass falls below this are dropped from lattice sums.
pub const CELL_CUTOFF: f64 = 1e-16;

/// Density of `N(0, sigma²)`.
pub fn gaussian_pdf(z: f64, sigma: f64) -> f64 {
    normal_pdf(z, sigma)
}

/// Anything the Monte Carlo engine can be compared against.
pub trait AnalyticDistribution {
    fn cdf(&self, x: f64) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;
    fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// Zero-mean normal distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normal {
    pub sigma: f64,
}

impl AnalyticDistribution for Normal {
    fn cdf(&self, x: f64) -> f64 {
        if self.sigma == 0.0 {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        normal_cdf(x, self.sigma)
    }

    fn mean(&self) -> f64 {
        0.0
    }

    fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// Symmetric mixture `Σ_n q_n N(μ_n, base_sigma²)` over `n = -n_max..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixturePdf {
    weights: Vec<f64>,
    shifts: Vec<f64>,
    base_sigma: f64,
    truncation_n_max: usize,
}

impl MixturePdf {
    /// Mixture whose weight `q_n` is the mass of `N(0, cell_sigma²)` in the
    /// `n`-th period cell `[(n-½)√(2π), (n+½)√(2π)]` and whose shift is
    /// `μ_n = shift_per_cell · n`.
    pub fn from_cells(cell_sigma: f64, shift_per_cell: f64, base_sigma: f64) -> Result<Self> {
        if !(cell_sigma > 0.0 && base_sigma > 0.0) {
            return Err(Error::Domain(format!("standard deviations must be positive, got {cell_sigma}, {base_sigma}")));
        }
        let mut n_max = cell_count(cell_sigma);
        while cell_mass(n_max as f64 + 1.0, cell_sigma) >= CELL_CUTOFF {
            n_max += 1;
        }
        let idx = -(n_max as i64)..=n_max as i64;
        let weights = idx.clone().map(|n| cell_mass(n as f64, cell_sigma)).collect();
        let shifts = idx.map(|n| shift_per_cell * n as f64).collect();
        Ok(Self { weights, shifts, base_sigma, truncation_n_max: n_max })
    }

    /// A single Gaussian component.
    pub fn single(base_sigma: f64) -> Result<Self> {
        if !(base_sigma > 0.0) {
            return Err(Error::Domain(format!("standard deviation must be positive, got {base_sigma}")));
        }
        Ok(Self { weights: vec![1.0], shifts: vec![0.0], base_sigma, truncation_n_max: 0 })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn base_sigma(&self) -> f64 {
        self.base_sigma
    }

    pub fn truncation_n_max(&self) -> usize {
        self.truncation_n_max
    }

    /// `q_n` for lattice index `n` (zero outside the truncation).
    pub fn weight(&self, n: i64) -> f64 {
        let i = n + self.truncation_n_max as i64;
        if i < 0 {
            return 0.0;
        }
        self.weights.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components().map(|(w, mu)| w * normal_pdf(x - mu, self.base_sigma)).sum()
    }

    /// `Σ q_n μ_n²`, the lattice part of the variance.
    pub fn shift_second_moment(&self) -> f64 {
        self.components().map(|(w, mu)| w * mu * mu).sum()
    }

    fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.shifts.iter().copied())
    }
}

impl AnalyticDistribution for MixturePdf {
    fn cdf(&self, x: f64) -> f64 {
        self.components().map(|(w, mu)| w * normal_cdf(x - mu, self.base_sigma)).sum()
    }

    fn mean(&self) -> f64 {
        self.components().map(|(w, mu)| w * mu).sum()
    }

    fn variance(&self) -> f64 {
        let m = self.mean();
        self.base_sigma * self.base_sigma + self.shift_second_moment() - m * m
    }
}

/// Number of cells kept on each side: `max(5, ⌈6·s/√(2π)⌉)`.
fn cell_count(s: f64) -> usize {
    5usize.max((6.0 * s / GKP_PERIOD).ceil() as usize)
}

fn cell_mass(n: f64, s: f64) -> f64 {
    normal_interval((n - 0.5) * GKP_PERIOD, (n + 0.5) * GKP_PERIOD, s)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

fn check_gain(gain: f64) -> Result<()> {
    if !(gain >= 1.0 && gain.is_finite()) {
        return Err(Error::Domain(format!("gain must be >= 1, got {gain}")));
    }
    Ok(())
}

/// Density `Q(ξ_q)` of the GKP-repetition logical position noise, as a
/// lattice sum of integrals over the reduced syndrome `r ∈ [-√(π/2), √(π/2)]`
/// of `p_σ(ξ - r/2) p_σ(ξ + r/2 + √(2π) n)`.
pub fn gkp_rep_q_pdf(xi: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let n_max = cell_count(SQRT_2 * sigma) as i64 + 1;
    let tol = Tolerance { abs: 1e-17, rel: 1e-11, max_intervals: 400 };
    let mut total = 0.0;
    for n in -n_max..=n_max {
        let shift = GKP_PERIOD * n as f64;
        // the integrand is a Gaussian in r centred at -shift with std √2σ
        let center = -shift;
        let width = SQRT_2 * sigma;
        let lo = -GKP_HALF_PERIOD;
        let hi = GKP_HALF_PERIOD;
        if center + 12.0 * width < lo || center - 12.0 * width > hi {
            continue;
        }
        let f = |r: f64| normal_pdf(xi - 0.5 * r, sigma) * normal_pdf(xi + 0.5 * r + shift, sigma);
        let mut breaks = vec![lo, hi];
        for k in [-6.0, -2.0, 0.0, 2.0, 6.0] {
            let b = center + k * width;
            if b > lo && b < hi {
                breaks.push(b);
            }
        }
        breaks.sort_by(f64::total_cmp);
        for w in breaks.windows(2) {
            total += integrate(f, w[0], w[1], tol)?;
        }
    }
    Ok(total)
}

/// Mixture form of the GKP-repetition momentum density `P(ξ_p)`: cell
/// masses of `N(0, σ²)` times `N(√(2π) n, σ²)`.
pub fn gkp_rep_p_mixture(sigma: f64) -> Result<MixturePdf> {
    check_sigma(sigma)?;
    MixturePdf::from_cells(sigma, GKP_PERIOD, sigma)
}

/// `(Q(ξ), P(ξ))` for the two-mode GKP-repetition code.
pub fn gkp_rep_pdfs(xi: f64, sigma: f64) -> Result<(f64, f64)> {
    Ok((gkp_rep_q_pdf(xi, sigma)?, gkp_rep_p_mixture(sigma)?.pdf(xi)))
}

/// Mass, mean and variance of a density by piecewise adaptive quadrature
/// over `[lo, hi]` split at `breaks`.
pub fn density_moments<F: FnMut(f64) -> Result<f64>>(mut pdf: F, breaks: &[f64]) -> Result<(f64, f64, f64)> {
    let tol = Tolerance { abs: 1e-15, rel: 1e-10, max_intervals: 400 };
    let mut m = [0.0; 3];
    let mut failure = None;
    for w in breaks.windows(2) {
        for (p, slot) in m.iter_mut().enumerate() {
            *slot += integrate(
                |x| match pdf(x) {
                    Ok(v) => v * x.powi(p as i32),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                w[0],
                w[1],
                tol,
            )?;
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let mean = m[1] / m[0];
    Ok((m[0], mean, m[2] / m[0] - mean * mean))
}

/// Standard deviations `(σ_q, σ_p)` of the GKP-repetition logical noise,
/// obtained by integrating the two densities numerically.
pub fn gkp_rep_stds(sigma: f64) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    let q_breaks = lattice_breaks(GKP_HALF_PERIOD, sigma / SQRT_2, cell_count(SQRT_2 * sigma) + 1);
    let (_, _, var_q) = density_moments(|x| gkp_rep_q_pdf(x, sigma), &q_breaks)?;
    let p = gkp_rep_p_mixture(sigma)?;
    let p_breaks = lattice_breaks(GKP_PERIOD, sigma, p.truncation_n_max());
    let (_, _, var_p) = density_moments(|x| Ok(p.pdf(x)), &p_breaks)?;
    Ok((var_q.sqrt(), var_p.sqrt()))
}

/// Integration breakpoints around peaks at `spacing · n`, `|n| <= n_max`,
/// each of width `width`.
pub fn lattice_breaks(spacing: f64, width: f64, n_max: usize) -> Vec<f64> {
    let reach = spacing * n_max as f64 + 12.0 * width;
    let step = width.min(0.5 * spacing);
    let pieces = ((2.0 * reach / step).ceil() as usize).max(2);
    (0..=pieces).map(|i| -reach + 2.0 * reach * i as f64 / pieces as f64).collect()
}

/// Mixture representation of the GKP-repetition position density, used as
/// an independent check of [`gkp_rep_q_pdf`]. The syndrome difference
/// `ξ_q2 - ξ_q1 ~ N(0, 2σ²)` picks the cell, and the output is the
/// independent average `N(0, σ²/2)` shifted by `-√(π/2)·n`.
pub fn gkp_rep_q_mixture(sigma: f64) -> Result<MixturePdf> {
    check_sigma(sigma)?;
    MixturePdf::from_cells(SQRT_2 * sigma, -GKP_HALF_PERIOD, sigma / SQRT_2)
}

/// Logical-noise density of the GKP two-mode-squeezing code with ideal
/// ancillas (identical for both quadratures).
pub fn tms_mixture(sigma: f64, gain: f64) -> Result<MixturePdf> {
    check_sigma(sigma)?;
    check_gain(gain)?;
    let k = 2.0 * gain - 1.0;
    if gain == 1.0 {
        return MixturePdf::single(sigma);
    }
    let shift = 2.0 * (gain * (gain - 1.0)).sqrt() / k * GKP_PERIOD;
    MixturePdf::from_cells(k.sqrt() * sigma, shift, sigma / k.sqrt())
}

/// Exact logical variance `σ²/(2G-1) + Σ q_n μ_n²`.
pub fn tms_variance(sigma: f64, gain: f64) -> Result<f64> {
    check_gain(gain)?;
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let mix = tms_mixture(sigma, gain)?;
    Ok(sigma * sigma / (2.0 * gain - 1.0) + mix.shift_second_moment())
}

/// Leading-order variance keeping only the nearest cells `n = ±1`:
/// `σ²/(2G-1) + 8πG(G-1)/(2G-1)² · erfc(√π / (2√(2G-1)σ))`.
pub fn tms_variance_erfc_approx(sigma: f64, gain: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_gain(gain)?;
    let k = 2.0 * gain - 1.0;
    let tail = crate::quadrature::erfc(PI.sqrt() / (2.0 * k.sqrt() * sigma));
    Ok(sigma * sigma / k + 8.0 * PI * gain * (gain - 1.0) / (k * k) * tail)
}

/// Asymptotic optimum `(G*, σ_L*)` for small `sigma`.
pub fn tms_asymptotic_optimum(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma < 0.3) {
        return Err(Error::Domain(format!("asymptotic optimum needs 0 < sigma < 0.3, got {sigma}")));
    }
    let log = (PI.powf(1.5) / (2.0 * sigma.powi(4))).ln();
    let g = PI / (8.0 * sigma * sigma) / log + 0.5;
    let s = 2.0 * sigma * sigma / PI.sqrt() * log.sqrt();
    Ok((g, s))
}

struct NoisyTms {
    sigma: f64,
    k: f64,
    a: f64,
    sw: f64,
}

impl NoisyTms {
    fn new(sigma: f64, sigma_gkp: f64, gain: f64) -> Result<Self> {
        check_gain(gain)?;
        if !(sigma >= 0.0 && sigma_gkp >= 0.0 && sigma.is_finite() && sigma_gkp.is_finite()) {
            return Err(Error::Domain(format!("noise levels must be finite and >= 0, got {sigma}, {sigma_gkp}")));
        }
        let k = 2.0 * gain - 1.0;
        let sw = (k * sigma * sigma + 2.0 * sigma_gkp * sigma_gkp).sqrt();
        Ok(Self { sigma, k, a: 2.0 * (gain * (gain - 1.0)).sqrt(), sw })
    }

    fn c(&self) -> f64 {
        self.a * self.sigma * self.sigma / (self.sw * self.sw)
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n_max = cell_count(self.sw) as i64;
        (-n_max..=n_max).map(move |n| (n as f64, cell_mass(n as f64, self.sw))).filter(|&(_, m)| m >= CELL_CUTOFF)
    }
}

/// Logical variance of the two-mode-squeezing code with finitely squeezed
/// GKP ancillas, by direct two-dimensional quadrature over the ancilla
/// syndrome and the GKP noise, cell by cell.
pub fn tms_variance_noisy_gkp(sigma: f64, sigma_gkp: f64, gain: f64) -> Result<f64> {
    let m = NoisyTms::new(sigma, sigma_gkp, gain)?;
    if sigma == 0.0 || gain == 1.0 {
        return Ok(sigma * sigma);
    }
    if sigma_gkp == 0.0 {
        return tms_variance(sigma, gain);
    }
    let c = m.c();
    let d = m.a * 2.0 * sigma_gkp * sigma_gkp / (m.k * m.sw * m.sw);
    let sz = m.k.sqrt() * sigma;
    let sg = SQRT_2 * sigma_gkp;
    let base = sigma * sigma / m.k;
    // g given w = z + g is normal with this mean factor and spread
    let g_mean = sg * sg / (m.sw * m.sw);
    let g_std = sg * sz / m.sw;
    let inner_tol = Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 400 };
    let outer_tol = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 2000 };
    let mut total = 0.0;
    for (n, _) in m.cells() {
        let shift = GKP_PERIOD * n;
        let lo = (shift - GKP_HALF_PERIOD).max(-14.0 * m.sw);
        let hi = (shift + GKP_HALF_PERIOD).min(14.0 * m.sw);
        if lo >= hi {
            continue;
        }
        let mut inner_err = None;
        let mut outer = |w: f64| {
            let centre = g_mean * w;
            let f = |g: f64| {
                let z = w - g;
                let resid = c * (g - shift) - d * z;
                normal_pdf(z, sz) * normal_pdf(g, sg) * (base + resid * resid)
            };
            let span = 10.0 * g_std;
            let parts = [centre - span, centre - 2.0 * g_std, centre + 2.0 * g_std, centre + span];
            parts.windows(2).map(|p| integrate(f, p[0], p[1], inner_tol)).sum::<Result<f64>>().unwrap_or_else(|e| {
                inner_err.get_or_insert(e);
                0.0
            })
        };
        let mut breaks = vec![lo, hi];
        for k in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
            let b = k * m.sw;
            if b > lo && b < hi {
                breaks.push(b);
            }
        }
        breaks.sort_by(f64::total_cmp);
        for w in breaks.windows(2) {
            total += integrate(&mut outer, w[0], w[1], outer_tol)?;
        }
        if let Some(e) = inner_err {
            return Err(Error::Numerical(format!("inner GKP-noise integral in cell {n}: {e}")));
        }
    }
    Ok(total)
}

/// Same quantity as [`tms_variance_noisy_gkp`] with the Gaussian integrals
/// done analytically: with `w = z_2 + g`, the counter-displacement leaves
/// `(2G-1)σ² - c·2√(G(G-1))σ²` plus `c²·2π·Σ n² P(w ∈ cell n)`.
pub fn tms_variance_noisy_gkp_closed(sigma: f64, sigma_gkp: f64, gain: f64) -> Result<f64> {
    let m = NoisyTms::new(sigma, sigma_gkp, gain)?;
    if sigma == 0.0 || gain == 1.0 {
        return Ok(sigma * sigma);
    }
    let c = m.c();
    let lattice: f64 = m.cells().map(|(n, mass)| n * n * mass).sum();
    Ok((m.k - c * m.a) * sigma * sigma + c * c * 2.0 * PI * lattice)
}
