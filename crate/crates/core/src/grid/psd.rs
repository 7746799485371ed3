use std::collections::HashMap;

use nalgebra::DMatrix;

use super::case::{NetworkCase, UnionFind};
use super::power_factor::PowerFactorProfile;
use crate::error::{Error, Result};

/// Outcome of the effective-resistance test for `L ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdCertificate {
    pub psd: bool,
    /// Negative-weight branches `(from, to)` whose weight magnitude falls
    /// short of the effective resistance of the positive subnetwork.
    pub violating_edges: Vec<(usize, usize)>,
}

/// Checks `|r_ij + κ x_ij| ≥ e_ijᵀ L₊† e_ij` for every branch with negative
/// weight `r_ij + κ x_ij`, where `L₊` is the conductance Laplacian of the
/// branches with positive weight.
///
/// Endpoints that the positive subnetwork does not connect have infinite
/// effective resistance, so such a branch always violates the condition.
/// Requires a uniform `κ`.
pub fn check_psd_condition(case: &NetworkCase, pf: &PowerFactorProfile) -> Result<PsdCertificate> {
    let kappa = pf
        .uniform_kappa()
        .ok_or_else(|| Error::Domain("the PSD condition needs a uniform reactive ratio".into()))?;

    let pos: HashMap<usize, usize> = case.buses().iter().enumerate().map(|(k, b)| (b.id, k)).collect();
    let m = case.bus_count();

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for br in case.branches() {
        let w = br.r + kappa * br.x;
        let ends = (pos[&br.from], pos[&br.to]);
        if w > 0.0 {
            positive.push((ends, w));
        } else if w < 0.0 {
            negative.push((ends, w, (br.from, br.to)));
        } else {
            return Err(Error::Domain(format!(
                "branch {}-{} has zero weight r + κx, L is undefined",
                br.from, br.to
            )));
        }
    }

    let mut components = UnionFind::new(m);
    let mut l_plus = DMatrix::<f64>::zeros(m, m);
    for &((i, j), w) in &positive {
        components.union(i, j);
        let g = 1.0 / w;
        l_plus[(i, i)] += g;
        l_plus[(j, j)] += g;
        l_plus[(i, j)] -= g;
        l_plus[(j, i)] -= g;
    }

    let mut pinv: Option<DMatrix<f64>> = None;
    let mut violating_edges = Vec::new();
    for &((i, j), w, ids) in &negative {
        let resistance = if components.find(i) != components.find(j) {
            f64::INFINITY
        } else {
            let p = match &pinv {
                Some(p) => p,
                None => pinv.insert(
                    l_plus
                        .clone()
                        .pseudo_inverse(1e-12)
                        .map_err(|e| Error::Numeric(e.to_string()))?,
                ),
            };
            p[(i, i)] + p[(j, j)] - p[(i, j)] - p[(j, i)]
        };
        if w.abs() < resistance {
            violating_edges.push(ids);
        }
    }

    Ok(PsdCertificate { psd: violating_edges.is_empty(), violating_edges })
}
