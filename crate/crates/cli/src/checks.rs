//! Structural identities and density normalization, reported as pass/fail.

use nalgebra::DMatrix;
use rand::Rng;

use gkp_osc::analytic::{
    density_moments, gkp_rep_p_mixture, gkp_rep_q_pdf, lattice_breaks, tms_mixture,
};
use gkp_osc::modular::GKP_HALF_PERIOD;
use gkp_osc::noise::{propagate_covariance, reshape_noise, stream_rng, NoiseCovariance, NoiseVector};
use gkp_osc::symplectic::{symplectic_deviation, SYMPLECTIC_TOL};
use gkp_osc::{CodeSpec, SymplecticTransform};

use crate::CliError;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn random_circuit<R: Rng>(rng: &mut R, n: usize) -> gkp_osc::Result<SymplecticTransform> {
    let mut s = SymplecticTransform::identity(n);
    for _ in 0..rng.random_range(1..8) {
        let j = rng.random_range(0..n);
        let k = (j + rng.random_range(1..n)) % n;
        let gate = match rng.random_range(0..4) {
            0 => SymplecticTransform::sum_gate(j, k, n),
            1 => SymplecticTransform::single_mode_squeeze((rng.random::<f64>() * 4.0 - 2.0).exp(), j, n),
            2 => SymplecticTransform::two_mode_squeeze(1.0 + rng.random::<f64>() * 20.0, j, k, n),
            _ => SymplecticTransform::beam_splitter(rng.random::<f64>(), j, k, n),
        }?;
        s = gate.compose(&s)?;
    }
    Ok(s)
}

fn symplectic_invariants(seed: u64, inject: bool) -> Result<Check, CliError> {
    let mut rng = stream_rng(seed, 0);
    let mut matrices = Vec::new();
    for _ in 0..500 {
        let n = rng.random_range(2..6);
        matrices.push(random_circuit(&mut rng, n)?.matrix().clone());
    }
    if inject {
        // stretches q without shrinking p, so phase-space area grows
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = 2.0;
        matrices.push(m);
    }
    let worst = matrices.iter().map(symplectic_deviation).fold(0.0, f64::max);
    Ok(Check {
        name: "symplectic invariants",
        pass: worst <= SYMPLECTIC_TOL,
        detail: format!("{} matrices, worst relative deviation {worst:.2e}", matrices.len()),
    })
}

fn tms_decomposition() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let g = 1.0 + 0.5 * i as f64 + 1e-3 * (i as f64).powi(3);
        let lam = g.sqrt() + (g - 1.0).sqrt();
        let bs = SymplecticTransform::beam_splitter(0.5, 0, 1, 2)?;
        let sq = SymplecticTransform::single_mode_squeeze(1.0 / lam, 0, 2)?
            .compose(&SymplecticTransform::single_mode_squeeze(lam, 1, 2)?)?;
        let lhs = bs.compose(&sq)?.compose(&bs.inverse())?;
        worst = worst.max(lhs.max_abs_diff(&SymplecticTransform::two_mode_squeeze(g, 0, 1, 2)?) / g);
    }
    Ok(Check {
        name: "two-mode squeezer decomposition",
        pass: worst <= 1e-12,
        detail: format!("worst scaled difference {worst:.2e}"),
    })
}

fn tms_reshaping(seed: u64) -> Result<Check, CliError> {
    let mut rng = stream_rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let g = 1.0 + 50.0 * rng.random::<f64>();
        let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let z = reshape_noise(CodeSpec::gkp_tms(g)?.encoder(), &NoiseVector::from_vec(x.clone())?)?;
        let (a, b) = (g.sqrt(), (g - 1.0).sqrt());
        let expected = [a * x[0] - b * x[2], a * x[1] + b * x[3], a * x[2] - b * x[0], a * x[3] + b * x[1]];
        for (u, v) in z.as_slice().iter().zip(expected) {
            worst = worst.max((u - v).abs() / (1.0 + a));
        }
    }
    Ok(Check {
        name: "two-mode squeezing noise reshaping",
        pass: worst <= 1e-12,
        detail: format!("worst scaled difference {worst:.2e}"),
    })
}

fn transversality() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for gi in 0..12 {
        let pair = CodeSpec::gkp_tms(1.0 + 2.0 * gi as f64)?.parallel(2)?;
        for ei in 0..=10 {
            let eta = ei as f64 / 10.0;
            let bs = SymplecticTransform::beam_splitter(eta, 0, 1, 2)?;
            let physical = pair.logical_gate(&bs, &bs)?;
            let direct = SymplecticTransform::beam_splitter(eta, 0, 1, 4)?
                .compose(&SymplecticTransform::beam_splitter(eta, 2, 3, 4)?)?;
            worst = worst.max(physical.max_abs_diff(&direct));
        }
    }
    Ok(Check {
        name: "beam splitter transversality",
        pass: worst <= 1e-10,
        detail: format!("worst difference {worst:.2e}"),
    })
}

fn noise_commutation(seed: u64) -> Result<Check, CliError> {
    let mut rng = stream_rng(seed, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..5);
        let mut bs = SymplecticTransform::identity(n);
        for _ in 0..4 {
            let j = rng.random_range(0..n - 1);
            bs = SymplecticTransform::beam_splitter(rng.random::<f64>(), j, j + 1, n)?.compose(&bs)?;
        }
        let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| rng.random::<f64>() - 0.5);
        let v = NoiseCovariance::new(&a * a.transpose())?;
        let noise = DMatrix::identity(2 * n, 2 * n) * rng.random::<f64>();
        // propagate_covariance maps through S⁻¹, so hand it the inverse
        let forward = bs.inverse();
        let then_noise = propagate_covariance(&forward, &v)?.matrix() + &noise;
        let noise_then = propagate_covariance(&forward, &NoiseCovariance::new(v.matrix() + &noise)?)?;
        worst = worst.max((then_noise - noise_then.matrix()).amax());
    }
    Ok(Check {
        name: "beam splitters commute with isotropic noise",
        pass: worst <= 1e-12,
        detail: format!("worst covariance difference {worst:.2e}"),
    })
}

fn normalization() -> Result<Check, CliError> {
    let mut worst: f64 = 0.0;
    for sigma in [0.05, 0.2, 0.5, 0.8] {
        let breaks = lattice_breaks(GKP_HALF_PERIOD, sigma / std::f64::consts::SQRT_2, 12);
        let (mass, _, _) = density_moments(|x| gkp_rep_q_pdf(x, sigma), &breaks)?;
        worst = worst.max((mass - 1.0).abs());
        worst = worst.max((gkp_rep_p_mixture(sigma)?.total_weight() - 1.0).abs());
        for g in [1.0, 2.0, 4.806, 20.0] {
            worst = worst.max((tms_mixture(sigma, g)?.total_weight() - 1.0).abs());
        }
    }
    Ok(Check {
        name: "density normalization",
        pass: worst <= 1e-9,
        detail: format!("worst |mass - 1| {worst:.2e}"),
    })
}

/// Runs every check. Failures are reported, not returned as errors.
pub fn run_checks(seed: u64, inject_non_symplectic: bool) -> Result<Vec<Check>, CliError> {
    Ok(vec![
        symplectic_invariants(seed, inject_non_symplectic)?,
        tms_decomposition()?,
        tms_reshaping(seed)?,
        transversality()?,
        noise_commutation(seed)?,
        normalization()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_build_passes() {
        for c in run_checks(1, false).unwrap() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn injected_matrix_fails() {
        let r = run_checks(1, true).unwrap();
        assert!(!r[0].pass);
        assert!(r[1..].iter().all(|c| c.pass));
    }
}
