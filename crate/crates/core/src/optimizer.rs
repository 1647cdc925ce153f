//! Gain optimization of the GKP two-mode-squeezing code and the derived
//! thresholds.

use serde::Serialize;

use crate::analytic::{tms_variance, tms_variance_erfc_approx, tms_variance_noisy_gkp_closed};
use crate::error::{Error, Result};
use crate::noise::gkp_sigma_from_db;

/// Grid points of the coarse scan over the gain.
pub const GRID_POINTS: usize = 256;

/// Relative accuracy of the refined gain.
pub const GAIN_RTOL: f64 = 1e-6;

/// Which logical-variance expression is minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Objective {
    /// Full lattice sum with ideal GKP ancillas.
    Exact,
    /// Nearest-cell erfc approximation.
    ErfcApprox,
    /// Finitely squeezed GKP ancillas.
    NoisyGkp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainOptimum {
    pub g_star: f64,
    pub lambda_star: f64,
    pub squeeze_db: f64,
    pub sigma_l_star: f64,
    pub qec_gain: f64,
}

impl GainOptimum {
    fn at(gain: f64, sigma: f64, variance: f64) -> Self {
        let sigma_l = variance.sqrt();
        Self {
            g_star: gain,
            lambda_star: gain.sqrt() + (gain - 1.0).sqrt(),
            squeeze_db: db_from_gain(gain),
            sigma_l_star: sigma_l,
            qec_gain: sigma * sigma / variance,
        }
    }

    /// True when encoding beats leaving the mode alone.
    pub fn is_nontrivial(&self) -> bool {
        self.g_star > 1.0 && self.qec_gain > 1.0
    }
}

/// Single-mode squeezing `20·log10(√G + √(G-1))` of the decomposed
/// two-mode squeezer.
pub fn db_from_gain(gain: f64) -> f64 {
    20.0 * (gain.sqrt() + (gain - 1.0).max(0.0).sqrt()).log10()
}

/// Logical variance at `gain` for the chosen objective.
pub fn objective_variance(objective: Objective, sigma: f64, sigma_gkp: f64, gain: f64) -> Result<f64> {
    match objective {
        Objective::Exact => tms_variance(sigma, gain),
        Objective::ErfcApprox => tms_variance_erfc_approx(sigma, gain),
        Objective::NoisyGkp => tms_variance_noisy_gkp_closed(sigma, sigma_gkp, gain),
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]` until the
/// bracket is below `rtol` relative to its midpoint. Returns `(x, f(x))`.
pub fn golden_section<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, rtol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= rtol * (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Log-spaced gain grid over `[1, max(2, π/(2σ²))]`.
pub fn gain_grid(sigma: f64) -> Vec<f64> {
    let top = (std::f64::consts::PI / (2.0 * sigma * sigma)).max(2.0);
    (0..GRID_POINTS).map(|i| (top.ln() * i as f64 / (GRID_POINTS - 1) as f64).exp()).collect()
}

/// Brute-force minimization of the logical standard deviation over the
/// gain: a coarse grid, then golden-section refinement around the best grid
/// point. Falls back to `G = 1` whenever encoding does not help.
pub fn optimize(sigma: f64, sigma_gkp: f64, objective: Objective) -> Result<GainOptimum> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(sigma_gkp >= 0.0 && sigma_gkp.is_finite()) {
        return Err(Error::Domain(format!("GKP noise must be >= 0, got {sigma_gkp}")));
    }
    let var = |g: f64| objective_variance(objective, sigma, sigma_gkp, g);
    let grid = gain_grid(sigma);
    let values = grid.iter().map(|&g| var(g)).collect::<Result<Vec<_>>>()?;
    let (best, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("grid is nonempty");

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (mut g, mut v) = golden_section(var, lo, hi, GAIN_RTOL)?;
    if values[best] < v {
        g = grid[best];
        v = values[best];
    }
    if v >= sigma * sigma || g <= 1.0 {
        return Ok(GainOptimum::at(1.0, sigma, sigma * sigma));
    }
    Ok(GainOptimum::at(g, sigma, v))
}

/// Largest input noise for which encoding still reduces the logical noise,
/// for GKP ancilla noise `sigma_gkp`. `None` when no input noise level
/// benefits at all.
pub fn threshold_sigma(sigma_gkp: f64) -> Result<Option<f64>> {
    let nontrivial = |s: f64| optimize(s, sigma_gkp, Objective::NoisyGkp).map(|o| o.is_nontrivial());
    // scan downward from a level where coding is useless
    let scan: Vec<f64> = (1..=200).map(|i| 0.005 * i as f64).collect();
    let mut upper = None;
    for w in scan.windows(2).rev() {
        if nontrivial(w[0])? {
            if !nontrivial(w[1])? {
                upper = Some((w[0], w[1]));
            }
            break;
        }
    }
    let Some((mut a, mut b)) = upper else {
        return if nontrivial(scan[0])? { Err(Error::Numerical("no trivial region below sigma = 1".into())) } else { Ok(None) };
    };
    while b - a > 1e-7 {
        let m = 0.5 * (a + b);
        if nontrivial(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

/// Best QEC gain over all input noise levels for GKP ancilla noise
/// `sigma_gkp`, with the input noise where it is reached.
pub fn best_qec_gain(sigma_gkp: f64) -> Result<(f64, f64)> {
    let gain_at = |s: f64| optimize(s, sigma_gkp, Objective::NoisyGkp).map(|o| o.qec_gain);
    let grid: Vec<f64> = (0..=48).map(|i| 0.02 + 0.02 * i as f64).collect();
    let gains = grid.iter().map(|&s| gain_at(s)).collect::<Result<Vec<_>>>()?;
    let (i, _) = gains.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (s, neg) = golden_section(|s| gain_at(s).map(|g| -g), lo, hi, 1e-6)?;
    Ok(if -neg >= gains[i] { (-neg, s) } else { (gains[i], grid[i]) })
}

/// Smallest GKP squeezing (dB) at which some input noise level gets a QEC
/// gain above one.
pub fn critical_gkp_squeezing() -> Result<f64> {
    let helps = |db: f64| best_qec_gain(gkp_sigma_from_db(db)).map(|(g, _)| g > 1.0);
    let (mut lo, mut hi) = (0.0, 30.0);
    if helps(lo)? || !helps(hi)? {
        return Err(Error::Numerical("critical squeezing is not bracketed by [0, 30] dB".into()));
    }
    while hi - lo > 1e-5 {
        let m = 0.5 * (lo + hi);
        if helps(m)? {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(0.5 * (lo + hi))
}
