//! Symplectic matrices of the Gaussian circuit elements.
//!
//! Quadratures are ordered `(q1, p1, q2, p2, ..., qN, pN)` and a transform
//! acts in the Heisenberg picture, `x -> S x`. A circuit `A B` (with `B`
//! applied first) has symplectic matrix `S_A S_B`, so [`SymplecticTransform::compose`]
//! is the plain matrix product. Mode indices are zero-based.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::noise::NoiseVector;

/// Relative tolerance used by [`SymplecticTransform::is_symplectic`].
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// Looser tolerance accepted when wrapping a user-supplied matrix.
pub const IMPORT_TOL: f64 = 1e-9;

/// Real `2N x 2N` matrix `S` with `S Ω Sᵀ = Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

/// The symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]` on `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Largest elementwise deviation of `M Ω Mᵀ` from `Ω`, divided by
/// `max(1, max|M_ij|²)` so that matrices with large squeezing entries are
/// judged on the scale of their own rounding error.
pub fn symplectic_deviation(matrix: &DMatrix<f64>) -> f64 {
    let dim = matrix.nrows();
    if dim != matrix.ncols() || dim % 2 != 0 {
        return f64::INFINITY;
    }
    let omega = symplectic_form(dim / 2);
    let product = matrix * &omega * matrix.transpose();
    let scale = matrix.amax().powi(2).max(1.0);
    (product - omega).amax() / scale
}

fn check_mode(j: usize, n_modes: usize) -> Result<()> {
    if n_modes == 0 {
        return Err(Error::InvalidMode("transform must act on at least one mode".into()));
    }
    if j >= n_modes {
        return Err(Error::InvalidMode(format!("mode {j} out of range for {n_modes} modes")));
    }
    Ok(())
}

fn check_pair(j: usize, k: usize, n_modes: usize) -> Result<()> {
    check_mode(j, n_modes)?;
    check_mode(k, n_modes)?;
    if j == k {
        return Err(Error::InvalidMode(format!("two-mode gate needs distinct modes, got {j} twice")));
    }
    Ok(())
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Self {
        Self { n_modes, matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Wraps a raw matrix after checking that it is square, even-dimensioned
    /// and symplectic.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 || matrix.nrows() % 2 != 0 {
            return Err(Error::Domain(format!("matrix dimension {} is not a positive even number", matrix.nrows())));
        }
        let deviation = symplectic_deviation(&matrix);
        if !(deviation <= IMPORT_TOL) {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(Self { n_modes: matrix.nrows() / 2, matrix })
    }

    /// `SUM_{j->k}`: `q_k -> q_k + q_j` and `p_j -> p_j - p_k`.
    pub fn sum_gate(j: usize, k: usize, n_modes: usize) -> Result<Self> {
        check_pair(j, k, n_modes)?;
        let mut s = Self::identity(n_modes);
        s.matrix[(2 * k, 2 * j)] = 1.0;
        s.matrix[(2 * j + 1, 2 * k + 1)] = -1.0;
        Ok(s)
    }

    /// `Sq_j(λ)`: `q_j -> λ q_j`, `p_j -> p_j / λ`.
    pub fn single_mode_squeeze(lam: f64, j: usize, n_modes: usize) -> Result<Self> {
        check_mode(j, n_modes)?;
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::Domain(format!("squeezing factor must be positive, got {lam}")));
        }
        let mut s = Self::identity(n_modes);
        s.matrix[(2 * j, 2 * j)] = lam;
        s.matrix[(2 * j + 1, 2 * j + 1)] = 1.0 / lam;
        Ok(s)
    }

    /// `TS_{j,k}(G)` with block form `[[√G I, √(G-1) Z], [√(G-1) Z, √G I]]`.
    pub fn two_mode_squeeze(gain: f64, j: usize, k: usize, n_modes: usize) -> Result<Self> {
        check_pair(j, k, n_modes)?;
        if !(gain >= 1.0 && gain.is_finite()) {
            return Err(Error::Domain(format!("two-mode squeezing gain must be >= 1, got {gain}")));
        }
        let diag = gain.sqrt();
        let off = (gain - 1.0).sqrt();
        let mut s = Self::identity(n_modes);
        s.set_two_mode_block(j, k, [[diag, 0.0], [0.0, diag]], [[off, 0.0], [0.0, -off]], [[off, 0.0], [0.0, -off]], [[diag, 0.0], [0.0, diag]]);
        Ok(s)
    }

    /// `BS_{j,k}(η)` with block form `[[√η I, √(1-η) I], [-√(1-η) I, √η I]]`.
    pub fn beam_splitter(eta: f64, j: usize, k: usize, n_modes: usize) -> Result<Self> {
        check_pair(j, k, n_modes)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmissivity must lie in [0, 1], got {eta}")));
        }
        let t = eta.sqrt();
        let r = (1.0 - eta).sqrt();
        let mut s = Self::identity(n_modes);
        s.set_two_mode_block(j, k, [[t, 0.0], [0.0, t]], [[r, 0.0], [0.0, r]], [[-r, 0.0], [0.0, -r]], [[t, 0.0], [0.0, t]]);
        Ok(s)
    }

    fn set_two_mode_block(&mut self, j: usize, k: usize, jj: [[f64; 2]; 2], jk: [[f64; 2]; 2], kj: [[f64; 2]; 2], kk: [[f64; 2]; 2]) {
        for a in 0..2 {
            for b in 0..2 {
                self.matrix[(2 * j + a, 2 * j + b)] = jj[a][b];
                self.matrix[(2 * j + a, 2 * k + b)] = jk[a][b];
                self.matrix[(2 * k + a, 2 * j + b)] = kj[a][b];
                self.matrix[(2 * k + a, 2 * k + b)] = kk[a][b];
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Matrix product `self · other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, found: other.n_modes });
        }
        Ok(Self { n_modes: self.n_modes, matrix: &self.matrix * &other.matrix })
    }

    /// `S⁻¹ = Ω Sᵀ Ωᵀ`, exact for any symplectic `S`.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.n_modes);
        let matrix = &omega * self.matrix.transpose() * omega.transpose();
        Self { n_modes: self.n_modes, matrix }
    }

    pub fn apply(&self, v: &NoiseVector) -> Result<NoiseVector> {
        if v.n_modes() != self.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, found: v.n_modes() });
        }
        let mut out = vec![0.0; 2 * self.n_modes];
        self.apply_into(v.as_slice(), &mut out);
        Ok(NoiseVector::from_vec(out).expect("even length"))
    }

    /// Allocation-free matrix-vector product for hot loops. Both slices must
    /// have length `2N`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let dim = 2 * self.n_modes;
        debug_assert_eq!(v.len(), dim);
        debug_assert_eq!(out.len(), dim);
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (col, x) in v.iter().enumerate() {
                acc += self.matrix[(row, col)] * x;
            }
            *slot = acc;
        }
    }

    pub fn symplectic_deviation(&self) -> f64 {
        symplectic_deviation(&self.matrix)
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_deviation() <= SYMPLECTIC_TOL
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }

    /// Block-diagonal `self ⊕ other`; the modes of `other` follow those of `self`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.n_modes + other.n_modes;
        let d1 = 2 * self.n_modes;
        let mut matrix = DMatrix::zeros(2 * n, 2 * n);
        matrix.view_mut((0, 0), (d1, d1)).copy_from(&self.matrix);
        matrix.view_mut((d1, d1), (2 * other.n_modes, 2 * other.n_modes)).copy_from(&other.matrix);
        Self { n_modes: n, matrix }
    }

    /// Embeds `self` into `n_modes` modes, its mode `i` landing on `modes[i]`;
    /// every other mode is left untouched.
    pub fn embed(&self, modes: &[usize], n_modes: usize) -> Result<Self> {
        if modes.len() != self.n_modes {
            return Err(Error::DimensionMismatch { expected: self.n_modes, found: modes.len() });
        }
        for (i, &m) in modes.iter().enumerate() {
            check_mode(m, n_modes)?;
            if modes[..i].contains(&m) {
                return Err(Error::InvalidMode(format!("mode {m} listed twice")));
            }
        }
        let mut out = Self::identity(n_modes);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for x in 0..2 {
                    for y in 0..2 {
                        out.matrix[(2 * ma + x, 2 * mb + y)] = self.matrix[(2 * a + x, 2 * b + y)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Elementwise distance to another transform of the same size.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n_modes != other.n_modes {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix).amax()
    }

    /// The `N x N` block acting on positions (`q_i -> Σ S[q_i, q_j] q_j`),
    /// meaningful when the transform does not mix `q` with `p`.
    pub(crate) fn position_block(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_modes, self.n_modes, |i, j| self.matrix[(2 * i, 2 * j)])
    }

    pub(crate) fn momentum_block(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_modes, self.n_modes, |i, j| self.matrix[(2 * i + 1, 2 * j + 1)])
    }

    /// True when no entry couples a position to a momentum.
    pub(crate) fn separates_quadratures(&self) -> bool {
        let dim = 2 * self.n_modes;
        (0..dim).all(|r| (0..dim).all(|c| (r + c) % 2 == 0 || self.matrix[(r, c)] == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec4(v: [f64; 4]) -> NoiseVector {
        NoiseVector::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn sum_gate_copies_position_forward() {
        let s = SymplecticTransform::sum_gate(0, 1, 2).unwrap();
        assert_eq!(s.apply(&vec4([1.0, 0.0, 0.0, 0.0])).unwrap().as_slice(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.apply(&vec4([0.0; 4])).unwrap().as_slice(), &[0.0; 4]);
        // p1 -> p1 - p2
        assert_eq!(s.apply(&vec4([0.0, 0.0, 0.0, 1.0])).unwrap().as_slice(), &[0.0, -1.0, 0.0, 1.0]);
        let round = s.compose(&s.inverse()).unwrap();
        assert!(round.max_abs_diff(&SymplecticTransform::identity(2)) == 0.0);
    }

    #[test]
    fn sum_gate_rejects_bad_modes() {
        assert!(matches!(SymplecticTransform::sum_gate(1, 1, 2), Err(Error::InvalidMode(_))));
        assert!(matches!(SymplecticTransform::sum_gate(0, 2, 2), Err(Error::InvalidMode(_))));
    }

    #[test]
    fn single_mode_squeeze_scales_quadratures() {
        let s = SymplecticTransform::single_mode_squeeze(2.0, 0, 1).unwrap();
        let out = s.apply(&NoiseVector::from_vec(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(out.as_slice(), &[2.0, 0.5]);
        assert_eq!(SymplecticTransform::single_mode_squeeze(1.0, 0, 1).unwrap(), SymplecticTransform::identity(1));
        assert!(SymplecticTransform::single_mode_squeeze(3.7, 0, 1).unwrap().is_symplectic());
        assert!(matches!(SymplecticTransform::single_mode_squeeze(0.0, 0, 1), Err(Error::Domain(_))));
        assert!(matches!(SymplecticTransform::single_mode_squeeze(-1.0, 0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn two_mode_squeeze_blocks() {
        assert_eq!(SymplecticTransform::two_mode_squeeze(1.0, 0, 1, 2).unwrap(), SymplecticTransform::identity(2));
        let s = SymplecticTransform::two_mode_squeeze(2.0, 0, 1, 2).unwrap();
        let r2 = 2f64.sqrt();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[r2, 0.0, 1.0, 0.0, 0.0, r2, 0.0, -1.0, 1.0, 0.0, r2, 0.0, 0.0, -1.0, 0.0, r2],
        );
        assert!((s.matrix() - expected).amax() < 1e-15);
        assert!(SymplecticTransform::two_mode_squeeze(4.806, 0, 1, 2).unwrap().symplectic_deviation() < 1e-12);
        assert!(matches!(SymplecticTransform::two_mode_squeeze(0.99, 0, 1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn beam_splitter_blocks() {
        assert_eq!(SymplecticTransform::beam_splitter(1.0, 0, 1, 2).unwrap(), SymplecticTransform::identity(2));
        let s = SymplecticTransform::beam_splitter(0.5, 0, 1, 2).unwrap();
        let h = 0.5f64.sqrt();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[h, 0.0, h, 0.0, 0.0, h, 0.0, h, -h, 0.0, h, 0.0, 0.0, -h, 0.0, h],
        );
        assert!((s.matrix() - expected).amax() < 1e-15);
        let det = SymplecticTransform::beam_splitter(0.3, 0, 1, 2).unwrap().determinant();
        assert!((det - 1.0).abs() < 1e-9);
        assert!(SymplecticTransform::beam_splitter(1.2, 0, 1, 2).is_err());
        assert!(SymplecticTransform::beam_splitter(-0.1, 0, 1, 2).is_err());
    }

    #[test]
    fn compose_checks_dimensions() {
        let a = SymplecticTransform::identity(2);
        let b = SymplecticTransform::identity(3);
        assert!(matches!(a.compose(&b), Err(Error::DimensionMismatch { .. })));
        assert!(a.apply(&NoiseVector::zeros(3)).is_err());
        assert_eq!(SymplecticTransform::identity(3).inverse(), SymplecticTransform::identity(3));
    }

    #[test]
    fn from_matrix_rejects_non_symplectic() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(SymplecticTransform::from_matrix(m), Err(Error::NotSymplectic { .. })));
        let ok = SymplecticTransform::two_mode_squeeze(3.0, 0, 1, 2).unwrap();
        assert_eq!(SymplecticTransform::from_matrix(ok.matrix().clone()).unwrap(), ok);
    }

    #[test]
    fn embed_matches_direct_construction() {
        let small = SymplecticTransform::two_mode_squeeze(2.5, 0, 1, 2).unwrap();
        let big = small.embed(&[1, 3], 4).unwrap();
        let direct = SymplecticTransform::two_mode_squeeze(2.5, 1, 3, 4).unwrap();
        assert_eq!(big, direct);
        let sum = SymplecticTransform::identity(1).direct_sum(&SymplecticTransform::single_mode_squeeze(2.0, 0, 1).unwrap());
        assert_eq!(sum, SymplecticTransform::single_mode_squeeze(2.0, 1, 2).unwrap());
    }
}
