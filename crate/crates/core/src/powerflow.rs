//! Nodal voltage magnitudes under LinDistFlow and under the full AC power
//! flow equations.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::grid::{LaplacianPair, NetworkCase, PowerFactorProfile};

type C64 = Complex<f64>;

/// Sweep stops once no complex voltage moves by more than this (pu).
pub const AC_TOLERANCE: f64 = 1e-10;
pub const AC_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowModel {
    LinDistFlow,
    Ac,
}

/// Voltage magnitudes at the non-slack nodes, in node order.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageProfile {
    pub magnitudes: DVector<f64>,
    pub model: FlowModel,
    /// Slack voltage `v•`.
    pub nominal: f64,
}

impl VoltageProfile {
    /// `v − v•𝟙`.
    pub fn centered(&self) -> DVector<f64> {
        self.magnitudes.add_scalar(-self.nominal)
    }

    /// `|v_i − v•|` per node.
    pub fn deviations(&self) -> DVector<f64> {
        self.centered().abs()
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }
}

/// `q = K p`.
pub fn reactive_from_active(p: &DVector<f64>, pf: &PowerFactorProfile) -> Result<DVector<f64>> {
    Ok(pf.k_diagonal(p.len())?.component_mul(p))
}

/// `v = v•𝟙 + R p + X K p`.
pub fn lindistflow_voltages(
    lap: &LaplacianPair,
    pf: &PowerFactorProfile,
    p: &DVector<f64>,
    v_nom: f64,
) -> Result<VoltageProfile> {
    Error::check_dim(lap.dim(), p.len())?;
    let q = reactive_from_active(p, pf)?;
    lindistflow_pq(lap, p, &q, v_nom)
}

/// `v = v•𝟙 + R p + X q` for an arbitrary reactive injection.
pub fn lindistflow_pq(
    lap: &LaplacianPair,
    p: &DVector<f64>,
    q: &DVector<f64>,
    v_nom: f64,
) -> Result<VoltageProfile> {
    Error::check_dim(lap.dim(), p.len())?;
    Error::check_dim(lap.dim(), q.len())?;
    let magnitudes = (&lap.r * p + &lap.x * q).add_scalar(v_nom);
    Ok(VoltageProfile { magnitudes, model: FlowModel::LinDistFlow, nominal: v_nom })
}

/// Tree layout used by the sweep: every node knows its parent (`None` for
/// the slack) and the impedance of the branch to it.
#[derive(Debug, Clone)]
pub struct RadialTopology {
    /// Nodes in breadth-first order from the slack.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    impedance: Vec<C64>,
}

impl RadialTopology {
    pub fn new(case: &NetworkCase) -> Self {
        let n = case.node_count();
        let slack = case.slack();
        let mut adjacency: Vec<Vec<(Option<usize>, C64)>> = vec![Vec::new(); n + 1];
        // index n stands for the slack
        let slot = |bus: usize| case.node_index(bus).unwrap_or(n);
        for br in case.branches() {
            let (a, b) = (slot(br.from), slot(br.to));
            let z = C64::new(br.r, br.x);
            let tag = |k: usize| (k != n).then_some(k);
            adjacency[a].push((tag(b), z));
            adjacency[b].push((tag(a), z));
        }
        debug_assert!(case.node_index(slack).is_none());

        let mut parent = vec![None; n];
        let mut impedance = vec![C64::new(0.0, 0.0); n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::from([(n, None::<usize>)]);
        while let Some((slot_idx, node)) = queue.pop_front() {
            for &(next, z) in &adjacency[slot_idx] {
                let Some(next) = next else { continue };
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                parent[next] = node;
                impedance[next] = z;
                order.push(next);
                queue.push_back((next, Some(next)));
            }
        }
        Self { order, parent, impedance }
    }
}

/// Result of the AC sweep.
#[derive(Debug, Clone)]
pub struct AcSolution {
    pub voltages: DVector<C64>,
    pub iterations: usize,
    pub nominal: f64,
}

impl AcSolution {
    pub fn profile(&self) -> VoltageProfile {
        VoltageProfile {
            magnitudes: self.voltages.map(|v| v.norm()),
            model: FlowModel::Ac,
            nominal: self.nominal,
        }
    }
}

/// Backward/forward sweep with the slack held at `v_nom∠0`.
pub fn ac_solve_backward_forward(
    case: &NetworkCase,
    p: &DVector<f64>,
    q: &DVector<f64>,
    v_nom: f64,
) -> Result<AcSolution> {
    ac_solve_with(&RadialTopology::new(case), p, q, v_nom)
}

/// Same as [`ac_solve_backward_forward`] with a prebuilt topology.
pub fn ac_solve_with(
    topo: &RadialTopology,
    p: &DVector<f64>,
    q: &DVector<f64>,
    v_nom: f64,
) -> Result<AcSolution> {
    let n = topo.parent.len();
    Error::check_dim(n, p.len())?;
    Error::check_dim(n, q.len())?;
    let slack_v = C64::new(v_nom, 0.0);
    let mut v = DVector::from_element(n, slack_v);
    let mut current = vec![C64::new(0.0, 0.0); n];
    let mut last_update = f64::INFINITY;

    for iteration in 1..=AC_MAX_ITERATIONS {
        // backward: branch current into each node's subtree
        for k in 0..n {
            let s = C64::new(p[k], q[k]);
            current[k] = -(s / v[k]).conj();
        }
        for &k in topo.order.iter().rev() {
            if let Some(up) = topo.parent[k] {
                let c = current[k];
                current[up] += c;
            }
        }
        // forward: voltage drops from the slack outwards
        last_update = 0.0;
        for &k in &topo.order {
            let upstream = topo.parent[k].map_or(slack_v, |u| v[u]);
            let next = upstream - topo.impedance[k] * current[k];
            last_update = f64::max(last_update, (next - v[k]).norm());
            v[k] = next;
        }
        if !last_update.is_finite() {
            break;
        }
        if last_update < AC_TOLERANCE {
            return Ok(AcSolution { voltages: v, iterations: iteration, nominal: v_nom });
        }
    }
    Err(Error::Convergence { iterations: AC_MAX_ITERATIONS, last_update })
}

/// Largest `|S_calc − S|` over non-slack nodes, where `S_calc = V ∘ conj(Y V)`
/// is evaluated from the admittance matrix of the case.
pub fn ac_power_mismatch(case: &NetworkCase, sol: &AcSolution, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let n = case.node_count();
    let slack_v = C64::new(sol.nominal, 0.0);
    let volt = |bus: usize| case.node_index(bus).map_or(slack_v, |k| sol.voltages[k]);
    let mut injected = vec![C64::new(0.0, 0.0); n];
    for br in case.branches() {
        let y = C64::new(1.0, 0.0) / C64::new(br.r, br.x);
        let flow = y * (volt(br.from) - volt(br.to));
        if let Some(k) = case.node_index(br.from) {
            injected[k] += flow;
        }
        if let Some(k) = case.node_index(br.to) {
            injected[k] -= flow;
        }
    }
    (0..n)
        .map(|k| (sol.voltages[k] * injected[k].conj() - C64::new(p[k], q[k])).norm())
        .fold(0.0, f64::max)
}
