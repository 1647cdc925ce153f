//! Centered modular reduction and the modular quadrature measurement.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Lattice spacing `√(2π)` of the canonical GKP state.
pub const GKP_PERIOD: f64 = 2.506_628_274_631_000_2;

/// Half-width `√(π/2)` of the unambiguously distinguishable window.
pub const GKP_HALF_PERIOD: f64 = 0.5 * GKP_PERIOD;

/// Outcome of a measurement modulo `modulus`; `|value| <= modulus / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularOutcome {
    value: f64,
    modulus: f64,
}

impl ModularOutcome {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }
}

/// `R_s(z) = z - n* s` with `n*` the integer minimizing `|z - n s|`.
///
/// Exact half-period ties go to the smaller `|n|`, which keeps the map odd.
pub fn reduce(z: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("modulus must be positive, got {s}")));
    }
    Ok(reduce_unchecked(z, s))
}

#[inline]
pub(crate) fn reduce_unchecked(z: f64, s: f64) -> f64 {
    let half = 0.5 * s;
    let mut n = (z / s).round();
    let mut r = z - n * s;
    if r > half {
        n += 1.0;
        r = z - n * s;
    } else if r < -half {
        n -= 1.0;
        r = z - n * s;
    }
    if r.abs() == half && n != 0.0 {
        // the other candidate sits at n - signum(n)
        let m = n - n.signum();
        r = z - m * s;
    }
    r.clamp(-half, half)
}

/// Centered reduction modulo `√(2π)`.
#[inline]
pub fn reduce_gkp(z: f64) -> f64 {
    reduce_unchecked(z, GKP_PERIOD)
}

/// Lattice index `n*` with `z = R(z) + n* √(2π)`.
#[inline]
pub fn gkp_cell_index(z: f64) -> i64 {
    ((z - reduce_gkp(z)) / GKP_PERIOD).round() as i64
}

/// Measures a quadrature noise value modulo `√(2π)` with finitely squeezed
/// GKP states. The ancilla and the measurement ancilla each contribute
/// `N(0, σ_gkp²)`, so the value is shifted by `N(0, 2σ_gkp²)` before
/// reduction. `sigma_gkp = 0` draws nothing from `rng`.
pub fn modular_measure<R: Rng + ?Sized>(true_value: f64, sigma_gkp: f64, rng: &mut R) -> ModularOutcome {
    let shifted = if sigma_gkp > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        true_value + std::f64::consts::SQRT_2 * sigma_gkp * z
    } else {
        true_value
    };
    ModularOutcome { value: reduce_gkp(shifted), modulus: GKP_PERIOD }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::stream_rng;

    const S: f64 = GKP_PERIOD;

    fn brute_force(z: f64, s: f64) -> f64 {
        (-5..=5).map(|n| z - n as f64 * s).min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap()
    }

    #[test]
    fn period_constant() {
        assert_eq!(GKP_PERIOD, (2.0 * std::f64::consts::PI).sqrt());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(0.0, S).unwrap(), 0.0);
        assert_eq!(reduce(S, S).unwrap(), 0.0);
        let expected = brute_force(1.5, S);
        assert!((expected - (1.5 - 2.506_628_274_631)).abs() < 1e-12);
        assert!((reduce(1.5, S).unwrap() - expected).abs() < 1e-15);
        assert!(reduce(1.0, 0.0).is_err());
        assert!(reduce(1.0, -2.0).is_err());
    }

    #[test]
    fn reduce_ties_prefer_smaller_index() {
        assert_eq!(reduce(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(reduce(-1.0, 2.0).unwrap(), -1.0);
        assert_eq!(reduce(3.0, 2.0).unwrap(), 1.0);
        assert_eq!(reduce(-3.0, 2.0).unwrap(), -1.0);
    }

    #[test]
    fn reduce_matches_brute_force_on_grid() {
        for i in -400..=400 {
            let z = i as f64 * 0.0173 + 0.001;
            assert!((reduce_gkp(z) - brute_force(z, S)).abs() < 1e-14, "z = {z}");
        }
    }

    #[test]
    fn cell_index() {
        assert_eq!(gkp_cell_index(0.3), 0);
        assert_eq!(gkp_cell_index(S + 0.1), 1);
        assert_eq!(gkp_cell_index(-2.0 * S - 0.2), -2);
    }

    #[test]
    fn ideal_measurement_is_reduction() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(modular_measure(0.3, 0.0, &mut rng).value(), 0.3);
        let out = modular_measure(2.0, 0.0, &mut rng);
        assert!((out.value() - (2.0 - S)).abs() < 1e-15);
        assert_eq!(out.modulus(), S);
    }

    #[test]
    fn measurement_noise_variance() {
        // Empirical variance of the outcome for a zero true value must be
        // 2σ_gkp² within 3 standard errors; SE = 2σ_gkp²·sqrt(2/(n-1)).
        let sg = crate::noise::gkp_sigma_from_db(30.0);
        let n = 1_000_000;
        let mut rng = stream_rng(5, 3);
        let mut acc = 0.0;
        for _ in 0..n {
            let v = modular_measure(0.0, sg, &mut rng).value();
            acc += v * v;
        }
        let var = acc / n as f64;
        let target = 2.0 * sg * sg;
        let se = target * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((var - target).abs() < 3.0 * se, "var {var} target {target}");
    }
}
