use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::case::NetworkCase;
use super::laplacian::LaplacianPair;
use super::power_factor::PowerFactorProfile;
use crate::error::{Error, Result};

/// The system Laplacian `L` and its graph Fourier basis.
///
/// `l_inv = R + X K` maps injections to voltage deviations. When `K = κI`
/// it is symmetric and `l_inv = W Λ⁻¹ Wᵀ` exactly. Otherwise the basis is
/// taken from the symmetric part `½(l_inv + l_invᵀ)` and `symmetrized` is
/// set; `l_inv` itself keeps the full non-symmetric map.
///
/// Eigenvalues `λ` of `L` are the reciprocals of those of `l_inv`, sorted
/// ascending. Each eigenvector's first nonzero entry is positive.
#[derive(Debug, Clone)]
pub struct SystemLaplacian {
    l_inv: DMatrix<f64>,
    basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    symmetrized: bool,
}

pub fn build_system_laplacian(case: &NetworkCase, pf: &PowerFactorProfile) -> Result<SystemLaplacian> {
    SystemLaplacian::from_pair(&LaplacianPair::from_case(case)?, pf)
}

impl SystemLaplacian {
    pub fn from_pair(pair: &LaplacianPair, pf: &PowerFactorProfile) -> Result<Self> {
        let k = pf.k_diagonal(pair.dim())?;
        let mut l_inv = pair.r.clone();
        for (j, &kj) in k.iter().enumerate() {
            if kj != 0.0 {
                l_inv.column_mut(j).axpy(kj, &pair.x.column(j), 1.0);
            }
        }
        Self::from_inverse(l_inv, pf.uniform_kappa().is_none())
    }

    /// Decomposes a given injection-to-voltage map.
    pub fn from_inverse(l_inv: DMatrix<f64>, symmetrize: bool) -> Result<Self> {
        if !l_inv.is_square() {
            return Err(Error::Dimension { expected: l_inv.nrows(), got: l_inv.ncols() });
        }
        if l_inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("system matrix has non-finite entries".into()));
        }
        let n = l_inv.nrows();
        // Uniform-κ matrices are symmetric up to rounding; average them anyway.
        let sym = (&l_inv + l_inv.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numeric("eigen-solver did not converge".into()))?;

        let scale = eig.eigenvalues.amax();
        let tiny = scale * 1e-13;
        if let Some(mu) = eig.eigenvalues.iter().find(|mu| mu.abs() <= tiny) {
            return Err(Error::Numeric(format!("system matrix is singular (eigenvalue {mu:.3e})")));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (la, lb) = (1.0 / eig.eigenvalues[a], 1.0 / eig.eigenvalues[b]);
            la.total_cmp(&lb).then(a.cmp(&b))
        });

        let mut basis = DMatrix::zeros(n, n);
        let mut eigenvalues = DVector::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).clone_owned();
            let cut = col.amax() * 1e-10;
            if let Some(first) = col.iter().find(|v| v.abs() > cut) {
                if *first < 0.0 {
                    col.neg_mut();
                }
            }
            basis.set_column(dst, &col);
            eigenvalues[dst] = 1.0 / eig.eigenvalues[src];
        }

        Ok(Self { l_inv, basis, eigenvalues, symmetrized: symmetrize })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `R + XK`, the matrix that maps injections to voltage deviations.
    pub fn l_inv(&self) -> &DMatrix<f64> {
        &self.l_inv
    }

    /// Orthonormal `W`; column `k` is the eigenvector for `eigenvalues()[k]`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `λ₁ ≤ … ≤ λₙ`, eigenvalues of `L`.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Row `i` of `W`: the spectral feature vector of node `i`.
    pub fn node_feature(&self, i: usize) -> DVector<f64> {
        self.basis.row(i).transpose()
    }

    /// `|λ|`, the diagonal of the spectral regularizer.
    ///
    /// Equal to `Λ` whenever `L ⪰ 0`. The symmetric part of a non-uniform
    /// `R + XK` can be indefinite, and the regularizer must stay positive.
    pub fn regularizer_weights(&self) -> DVector<f64> {
        self.eigenvalues.abs()
    }

    /// `‖R + XK‖_op` for the decomposed (symmetric) matrix, `1 / min |λ|`.
    pub fn inverse_operator_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| 1.0 / l.abs()).fold(0.0, f64::max)
    }

    /// `Σ |1/λ|`, the trace of `R + XK` when it is positive semidefinite.
    pub fn inverse_trace(&self) -> f64 {
        self.eigenvalues.iter().map(|l| 1.0 / l.abs()).sum()
    }

    /// `‖Λ⁻¹ w_i‖₂` for node `i`.
    pub fn filtered_row_norm(&self, i: usize) -> f64 {
        self.basis
            .row(i)
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(w, l)| (w / l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `W Λ Wᵀ`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        &self.basis * DMatrix::from_diagonal(&self.eigenvalues) * self.basis.transpose()
    }

    /// `W Λ⁻¹ Wᵀ`; equals `l_inv` unless the basis was symmetrized.
    pub fn spectral_inverse(&self) -> DMatrix<f64> {
        &self.basis * DMatrix::from_diagonal(&self.eigenvalues.map(|l| 1.0 / l)) * self.basis.transpose()
    }

    /// Graph Fourier transform `Wᵀ s`.
    pub fn gft_forward(&self, signal: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_dim(self.dim(), signal.len())?;
        Ok(self.basis.tr_mul(signal))
    }

    /// Inverse transform `W c`.
    pub fn gft_inverse(&self, coeffs: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_dim(self.dim(), coeffs.len())?;
        Ok(&self.basis * coeffs)
    }

    /// Fourier coefficients `ψ = Wᵀ (R + XK) p` of the voltage deviation
    /// caused by injection `p`. With uniform `κ` this is `Λ⁻¹ Wᵀ p`.
    pub fn voltage_coefficients(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_dim(self.dim(), p.len())?;
        Ok(self.basis.tr_mul(&(&self.l_inv * p)))
    }
}
