use nalgebra::{DMatrix, DVector};

use super::case::NetworkCase;
use crate::error::{Error, Result};

/// Branch-to-node incidence matrix with the slack column removed.
///
/// Row `k` corresponds to branch `k` of the case and carries `+1` in the
/// column of its from-bus and `-1` in the column of its to-bus. For a radial
/// network the matrix is square and invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl IncidenceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }
}

pub fn build_incidence(case: &NetworkCase) -> Result<IncidenceMatrix> {
    let n = case.node_count();
    let mut a = DMatrix::zeros(case.branches().len(), n);
    for (k, br) in case.branches().iter().enumerate() {
        if let Some(c) = case.node_index(br.from) {
            a[(k, c)] = 1.0;
        }
        if let Some(c) = case.node_index(br.to) {
            a[(k, c)] = -1.0;
        }
    }
    Error::check_dim(n, a.nrows())?;
    let inverse = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Structure("reduced incidence matrix is singular".into()))?;
    Ok(IncidenceMatrix { matrix: a, inverse })
}

/// The resistive and reactive Laplacians of the feeder and their inverses.
///
/// `G = Aᵀ diag(r)⁻¹ A`, `B = Aᵀ diag(x)⁻¹ A`, `R = G⁻¹`, `X = B⁻¹`.
/// `R` and `X` are formed as `A⁻¹ diag(·) A⁻ᵀ`, which stays defined when a
/// branch has zero reactance: such a branch is left out of `B` and adds
/// nothing to `X`. In that case `X·B ≠ I`.
#[derive(Debug, Clone)]
pub struct LaplacianPair {
    pub g: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

impl LaplacianPair {
    pub fn from_case(case: &NetworkCase) -> Result<Self> {
        let inc = build_incidence(case)?;
        let r: Vec<f64> = case.branches().iter().map(|b| b.r).collect();
        let x: Vec<f64> = case.branches().iter().map(|b| b.x).collect();
        let recip = |v: &[f64]| DVector::from_iterator(v.len(), v.iter().map(|&e| if e == 0.0 { 0.0 } else { 1.0 / e }));

        let a = inc.matrix();
        let a_inv = inc.inverse();
        let sandwich_inv = |w: &[f64]| a_inv * DMatrix::from_diagonal(&DVector::from_column_slice(w)) * a_inv.transpose();
        let laplacian = |w: DVector<f64>| a.transpose() * DMatrix::from_diagonal(&w) * a;

        Ok(Self {
            g: laplacian(recip(&r)),
            b: laplacian(recip(&x)),
            r: sandwich_inv(&r),
            x: sandwich_inv(&x),
        })
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }
}
