//! Special functions and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Density of `N(0, sigma²)` at `z`.
pub fn normal_pdf(z: f64, sigma: f64) -> f64 {
    let u = z / sigma;
    (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// `P(X <= z)` for `X ~ N(0, sigma²)`.
pub fn normal_cdf(z: f64, sigma: f64) -> f64 {
    0.5 * erfc(-z / (sigma * std::f64::consts::SQRT_2))
}

/// `P(a <= X <= b)` for `X ~ N(0, sigma²)`, accurate in both tails.
pub fn normal_interval(a: f64, b: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    if a >= 0.0 {
        0.5 * (erfc(a / s) - erfc(b / s))
    } else if b <= 0.0 {
        0.5 * (erfc(-b / s) - erfc(-a / s))
    } else {
        0.5 * (erf(b / s) - erf(a / s))
    }
}

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights at the odd indices.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Settings for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-12, max_intervals: 2000 }
    }
}

/// Globally adaptive G7K15 integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `max(abs, rel·|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if intervals.len() >= tol.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total:.6e}, error {err:.3e} after {} intervals",
                intervals.len()
            )));
        }
        let (idx, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("nonempty");
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::Numerical(format!("integrand not finite on [{lo}, {hi}]")));
        }
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // resum to shed accumulated rounding from the running updates
    Ok(intervals.iter().map(|x| x.2).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_values() {
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-18);
        assert_eq!(erf(0.0), 0.0);
    }

    #[test]
    fn normal_helpers() {
        assert!((normal_pdf(0.0, 1.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(normal_pdf(0.7, 0.3), normal_pdf(-0.7, 0.3));
        assert!((normal_cdf(0.0, 2.0) - 0.5).abs() < 1e-16);
        let far = normal_interval(8.0, 9.0, 1.0);
        assert!(far > 0.0 && (far - 6.219_831_985_865_787e-16).abs() < 1e-28);
        assert!((normal_interval(-1.0, 1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-15);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0 + 3.0)).abs() < 1e-13);
    }

    #[test]
    fn normal_density_integrates_to_one() {
        let v = integrate(|x| normal_pdf(x, 0.37), -10.0 * 0.37, 10.0 * 0.37, Tolerance::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn handles_kinks() {
        let v = integrate(|x: f64| x.abs(), -1.0, 3.0, Tolerance::default()).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
    }

    #[test]
    fn reports_failure() {
        let tol = Tolerance { abs: 0.0, rel: 0.0, max_intervals: 4 };
        assert!(matches!(integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, tol), Err(Error::Numerical(_))));
        assert!(integrate(|x| x, 0.0, f64::INFINITY, Tolerance::default()).is_err());
    }
}
