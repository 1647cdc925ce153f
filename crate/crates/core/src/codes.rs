//! Encoders of the oscillator-into-oscillators codes and logical Gaussian
//! operations.
//!
//! A code stores `M` data modes in the first `M` modes and `N - M` ancilla
//! modes after them. Every encoder is a [`SymplecticTransform`] on all `N`
//! modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::SymplecticTransform;

/// How the ancilla modes are initialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AncillaKind {
    /// Canonical (or noisy) GKP state; syndromes are read modulo `√(2π)`.
    Gkp,
    /// Position eigenstate `|q = 0⟩`; homodyne reads the reshaped position
    /// noise exactly and reveals nothing about momentum.
    PositionEigenstate,
}

/// Which family a [`CodeSpec`] was built from. Decoders use this to refuse
/// codes they were not derived for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CodeFamily {
    GaussianRepetition { n: usize },
    GkpRepetition,
    GkpTwoModeSqueezing { gain: f64 },
    GkpSqueezedRepetition { n: usize, lam: f64 },
    Parallel { copies: usize },
}

impl std::fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeFamily::GaussianRepetition { n } => write!(f, "gaussian-repetition(n={n})"),
            CodeFamily::GkpRepetition => write!(f, "gkp-repetition"),
            CodeFamily::GkpTwoModeSqueezing { gain } => write!(f, "gkp-tms(G={gain})"),
            CodeFamily::GkpSqueezedRepetition { n, lam } => write!(f, "gkp-squeezed-repetition(n={n}, lambda={lam})"),
            CodeFamily::Parallel { copies } => write!(f, "parallel(x{copies})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    family: CodeFamily,
    data_modes: usize,
    encoder: SymplecticTransform,
    ancilla_kind: AncillaKind,
    ancilla_sigma_gkp: Vec<f64>,
}

impl CodeSpec {
    /// Generic GKP-stabilizer code from an encoder.
    pub fn new(family: CodeFamily, data_modes: usize, encoder: SymplecticTransform, ancilla_kind: AncillaKind) -> Result<Self> {
        let n = encoder.n_modes();
        if data_modes == 0 || data_modes >= n {
            return Err(Error::Domain(format!("need 0 < M < N, got M = {data_modes}, N = {n}")));
        }
        Ok(Self { family, data_modes, encoder, ancilla_kind, ancilla_sigma_gkp: vec![0.0; n - data_modes] })
    }

    /// `N`-mode Gaussian repetition: `SUM_{1->k}` for every ancilla `k`,
    /// ancillas in position eigenstates.
    pub fn gaussian_repetition(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("repetition code needs n >= 2, got {n}")));
        }
        let mut encoder = SymplecticTransform::identity(n);
        for k in 1..n {
            encoder = SymplecticTransform::sum_gate(0, k, n)?.compose(&encoder)?;
        }
        Self::new(CodeFamily::GaussianRepetition { n }, 1, encoder, AncillaKind::PositionEigenstate)
    }

    /// Two-mode GKP repetition: `SUM_{1->2}` onto a GKP ancilla.
    pub fn gkp_repetition() -> Self {
        let encoder = SymplecticTransform::sum_gate(0, 1, 2).expect("valid modes");
        Self::new(CodeFamily::GkpRepetition, 1, encoder, AncillaKind::Gkp).expect("valid code")
    }

    /// GKP two-mode-squeezing code `TS_{1,2}(G)`.
    pub fn gkp_tms(gain: f64) -> Result<Self> {
        let encoder = SymplecticTransform::two_mode_squeeze(gain, 0, 1, 2)?;
        Self::new(CodeFamily::GkpTwoModeSqueezing { gain }, 1, encoder, AncillaKind::Gkp)
    }

    /// `N`-mode GKP squeezed repetition. The base case has matrix
    /// `Sq1(1/λ) Sq2(λ) SUM_{1->2}`; for `N >= 3` the matrix is
    /// `(I ⊕ S[N-1]) Sq2(λ^{N-1}) Sq1(1/λ) SUM_{1->2} Sq1(λ^{-(N-2)})`,
    /// the ordering that yields the reshaping `z_q1 = λ^{N-1} ξ_q1`,
    /// `z_qk = -λ ξ_q(k-1) + ξ_qk / λ`.
    pub fn gkp_squeezed_repetition(n: usize, lam: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("squeezed repetition needs n >= 2, got {n}")));
        }
        if !(lam > 1.0 && lam.is_finite()) {
            return Err(Error::Domain(format!("squeezing factor must exceed 1, got {lam}")));
        }
        let encoder = squeezed_repetition_encoder(n, lam)?;
        Self::new(CodeFamily::GkpSqueezedRepetition { n, lam }, 1, encoder, AncillaKind::Gkp)
    }

    /// `copies` independent copies of `self` laid out with all data modes
    /// first: copy `c` keeps its data mode `i` at `c·M + i` and its ancilla
    /// `j` at `copies·M + c·(N - M) + j`.
    pub fn parallel(&self, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::Domain("need at least one copy".into()));
        }
        let n = self.n_modes();
        let m = self.data_modes;
        let total = copies * n;
        let mut encoder = SymplecticTransform::identity(total);
        for c in 0..copies {
            let modes: Vec<usize> = (0..m).map(|i| c * m + i).chain((0..n - m).map(|j| copies * m + c * (n - m) + j)).collect();
            encoder = self.encoder.embed(&modes, total)?.compose(&encoder)?;
        }
        let mut spec = Self::new(CodeFamily::Parallel { copies }, copies * m, encoder, self.ancilla_kind)?;
        spec.ancilla_sigma_gkp = (0..copies).flat_map(|_| self.ancilla_sigma_gkp.iter().copied()).collect();
        Ok(spec)
    }

    /// Sets the same GKP noise standard deviation on every ancilla.
    pub fn with_gkp_noise(mut self, sigma_gkp: f64) -> Result<Self> {
        if !(sigma_gkp >= 0.0 && sigma_gkp.is_finite()) {
            return Err(Error::Domain(format!("GKP noise must be >= 0, got {sigma_gkp}")));
        }
        self.ancilla_sigma_gkp.iter_mut().for_each(|s| *s = sigma_gkp);
        Ok(self)
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn n_modes(&self) -> usize {
        self.encoder.n_modes()
    }

    pub fn data_modes(&self) -> usize {
        self.data_modes
    }

    pub fn encoder(&self) -> &SymplecticTransform {
        &self.encoder
    }

    pub fn ancilla_kind(&self) -> AncillaKind {
        self.ancilla_kind
    }

    pub fn ancilla_sigma_gkp(&self) -> &[f64] {
        &self.ancilla_sigma_gkp
    }

    /// Physical transform realizing a logical Gaussian operation:
    /// `Enc · (gate ⊕ aux) · Enc⁻¹`.
    pub fn logical_gate(&self, gate: &SymplecticTransform, aux: &SymplecticTransform) -> Result<SymplecticTransform> {
        if gate.n_modes() != self.data_modes {
            return Err(Error::DimensionMismatch { expected: self.data_modes, found: gate.n_modes() });
        }
        let ancillas = self.n_modes() - self.data_modes;
        if aux.n_modes() != ancillas {
            return Err(Error::DimensionMismatch { expected: ancillas, found: aux.n_modes() });
        }
        self.encoder.compose(&gate.direct_sum(aux))?.compose(&self.encoder.inverse())
    }
}

fn squeezed_repetition_encoder(n: usize, lam: f64) -> Result<SymplecticTransform> {
    if n == 2 {
        let sq = SymplecticTransform::single_mode_squeeze(1.0 / lam, 0, 2)?
            .compose(&SymplecticTransform::single_mode_squeeze(lam, 1, 2)?)?;
        return sq.compose(&SymplecticTransform::sum_gate(0, 1, 2)?);
    }
    let inner = squeezed_repetition_encoder(n - 1, lam)?;
    let lifted = SymplecticTransform::identity(1).direct_sum(&inner);
    let chain = [
        lifted,
        SymplecticTransform::single_mode_squeeze(lam.powi(n as i32 - 1), 1, n)?,
        SymplecticTransform::single_mode_squeeze(1.0 / lam, 0, n)?,
        SymplecticTransform::sum_gate(0, 1, n)?,
        SymplecticTransform::single_mode_squeeze(lam.powi(2 - n as i32), 0, n)?,
    ];
    let mut acc = SymplecticTransform::identity(n);
    for s in &chain {
        acc = acc.compose(s)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{reshape_noise, NoiseVector};
    use nalgebra::DMatrix;

    #[test]
    fn gaussian_repetition_encoder() {
        let spec = CodeSpec::gaussian_repetition(3).unwrap();
        // p1 -> p1 - p2 - p3, q_k -> q_k + q1
        let m = spec.encoder().matrix();
        assert_eq!(m[(1, 1)], 1.0);
        assert_eq!(m[(1, 3)], -1.0);
        assert_eq!(m[(1, 5)], -1.0);
        assert_eq!(m[(2, 0)], 1.0);
        assert_eq!(m[(4, 0)], 1.0);
        assert_eq!(spec.ancilla_kind(), AncillaKind::PositionEigenstate);
        assert_eq!(CodeSpec::gaussian_repetition(2).unwrap().encoder(), &SymplecticTransform::sum_gate(0, 1, 2).unwrap());
        assert!(CodeSpec::gaussian_repetition(5).unwrap().encoder().is_symplectic());
        assert!(CodeSpec::gaussian_repetition(1).is_err());
    }

    #[test]
    fn gkp_repetition_spec() {
        let spec = CodeSpec::gkp_repetition();
        assert_eq!((spec.n_modes(), spec.data_modes()), (2, 1));
        assert_eq!(spec.ancilla_sigma_gkp(), &[0.0]);
        let xi = NoiseVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let z = reshape_noise(spec.encoder(), &xi).unwrap();
        assert_eq!(z.as_slice(), &[0.1, 0.2 + 0.4, 0.3 - 0.1, 0.4]);
    }

    #[test]
    fn gkp_tms_spec() {
        assert_eq!(CodeSpec::gkp_tms(1.0).unwrap().encoder(), &SymplecticTransform::identity(2));
        assert!(CodeSpec::gkp_tms(0.5).is_err());
        let spec = CodeSpec::gkp_tms(2.0).unwrap();
        assert_eq!(spec.encoder(), &SymplecticTransform::two_mode_squeeze(2.0, 0, 1, 2).unwrap());
    }

    #[test]
    fn squeezed_repetition_two_modes() {
        let lam = 3.0;
        let spec = CodeSpec::gkp_squeezed_repetition(2, lam).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[1.0 / lam, 0.0, 0.0, 0.0, 0.0, lam, 0.0, -lam, lam, 0.0, lam, 0.0, 0.0, 0.0, 0.0, 1.0 / lam],
        );
        assert!((spec.encoder().matrix() - expected).amax() < 1e-14);
    }

    #[test]
    fn squeezed_repetition_three_modes() {
        let l: f64 = 2.7;
        let spec = CodeSpec::gkp_squeezed_repetition(3, l).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(6, 6, &[
            1.0 / (l * l), 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, l * l, 0.0, -l, 0.0, 0.0,
            1.0, 0.0, l, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0 / l, 0.0, -l,
            l * l, 0.0, l.powi(3), 0.0, l, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / l,
        ]);
        assert!((spec.encoder().matrix() - expected).amax() < 1e-12);
        assert!(spec.encoder().is_symplectic());

        let (xq1, xp1, xq2, xp2, xq3, xp3) = (0.11, -0.07, 0.05, 0.13, -0.02, 0.09);
        let xi = NoiseVector::from_vec(vec![xq1, xp1, xq2, xp2, xq3, xp3]).unwrap();
        let z = reshape_noise(spec.encoder(), &xi).unwrap();
        let expected_z = [
            l * l * xq1,
            xp1 / (l * l) + xp2 + l * l * xp3,
            -l * xq1 + xq2 / l,
            l * xp2 + l.powi(3) * xp3,
            -l * xq2 + xq3 / l,
            l * xp3,
        ];
        for (a, b) in z.as_slice().iter().zip(expected_z) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn squeezed_repetition_validation() {
        assert!(CodeSpec::gkp_squeezed_repetition(1, 2.0).is_err());
        assert!(CodeSpec::gkp_squeezed_repetition(3, 1.0).is_err());
        for n in 2..=6 {
            assert!(CodeSpec::gkp_squeezed_repetition(n, 4.0).unwrap().encoder().is_symplectic());
        }
    }

    #[test]
    fn logical_identity_is_identity() {
        let spec = CodeSpec::gkp_tms(3.3).unwrap();
        let out = spec.logical_gate(&SymplecticTransform::identity(1), &SymplecticTransform::identity(1)).unwrap();
        assert!(out.max_abs_diff(&SymplecticTransform::identity(2)) < 1e-12);
        assert!(spec.logical_gate(&SymplecticTransform::identity(2), &SymplecticTransform::identity(1)).is_err());
    }

    #[test]
    fn logical_squeeze_on_repetition_is_symplectic() {
        let spec = CodeSpec::gkp_repetition();
        let out = spec
            .logical_gate(&SymplecticTransform::single_mode_squeeze(1.7, 0, 1).unwrap(), &SymplecticTransform::identity(1))
            .unwrap();
        assert!(out.is_symplectic());
        assert!((out.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parallel_tms_layout() {
        let g = 4.806;
        let pair = CodeSpec::gkp_tms(g).unwrap().parallel(2).unwrap();
        assert_eq!((pair.n_modes(), pair.data_modes()), (4, 2));
        let expected = SymplecticTransform::two_mode_squeeze(g, 0, 2, 4)
            .unwrap()
            .compose(&SymplecticTransform::two_mode_squeeze(g, 1, 3, 4).unwrap())
            .unwrap();
        assert!(pair.encoder().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn beam_splitter_is_transversal() {
        let pair = CodeSpec::gkp_tms(4.806).unwrap().parallel(2).unwrap();
        let bs = SymplecticTransform::beam_splitter(0.5, 0, 1, 2).unwrap();
        let physical = pair.logical_gate(&bs, &bs).unwrap();
        let direct = SymplecticTransform::beam_splitter(0.5, 0, 1, 4)
            .unwrap()
            .compose(&SymplecticTransform::beam_splitter(0.5, 2, 3, 4).unwrap())
            .unwrap();
        assert!(physical.max_abs_diff(&direct) < 1e-10);
    }
}
