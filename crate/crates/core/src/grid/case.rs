use std::collections::HashMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bus with its nominal injection in per unit (loads are negative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub p_nominal: f64,
    #[serde(default)]
    pub q_nominal: f64,
}

/// A line between two buses with series impedance `r + jx` in per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
}

/// A validated radial feeder.
///
/// The buses that are not the slack are the *nodes* of the network model.
/// Node `k` is the `k`-th non-slack bus in bus-list order; every matrix in
/// the crate is indexed by node, never by bus id.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkCase {
    base_mva: f64,
    nominal_voltage: f64,
    slack: usize,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    node_ids: Vec<usize>,
    node_of: HashMap<usize, usize>,
}

impl NetworkCase {
    /// Validates topology and impedances.
    ///
    /// Unknown bus references are parse errors; everything that makes the
    /// network non-radial is a structural error.
    pub fn new(
        base_mva: f64,
        nominal_voltage: f64,
        slack: usize,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
    ) -> Result<Self> {
        if !(base_mva.is_finite() && base_mva > 0.0) {
            return Err(Error::Domain(format!("base MVA must be positive, got {base_mva}")));
        }
        if !(nominal_voltage.is_finite() && nominal_voltage > 0.0) {
            return Err(Error::Domain(format!(
                "nominal voltage must be positive, got {nominal_voltage}"
            )));
        }

        let mut position = HashMap::with_capacity(buses.len());
        for (k, bus) in buses.iter().enumerate() {
            if position.insert(bus.id, k).is_some() {
                return Err(Error::Structure(format!("duplicate bus id {}", bus.id)));
            }
            if !bus.p_nominal.is_finite() || !bus.q_nominal.is_finite() {
                return Err(Error::Numeric(format!("non-finite injection at bus {}", bus.id)));
            }
        }
        if !position.contains_key(&slack) {
            return Err(Error::parse(0, format!("slack bus {slack} is not in the bus list")));
        }
        if buses.len() < 2 {
            return Err(Error::Structure("network needs at least one non-slack bus".into()));
        }

        let mut seen = HashMap::with_capacity(branches.len());
        for (k, br) in branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !position.contains_key(&end) {
                    return Err(Error::parse(
                        0,
                        format!("branch {} references unknown bus {end}", k + 1),
                    ));
                }
            }
            if br.from == br.to {
                return Err(Error::Structure(format!("branch {} is a self-loop", k + 1)));
            }
            if !(br.r.is_finite() && br.r > 0.0) {
                return Err(Error::Structure(format!(
                    "branch {}-{} has non-positive resistance {}",
                    br.from, br.to, br.r
                )));
            }
            if !br.x.is_finite() {
                return Err(Error::Numeric(format!("branch {}-{} has non-finite reactance", br.from, br.to)));
            }
            let key = (br.from.min(br.to), br.from.max(br.to));
            if seen.insert(key, k).is_some() {
                return Err(Error::Structure(format!("duplicate branch {}-{}", key.0, key.1)));
            }
        }

        if branches.len() + 1 != buses.len() {
            return Err(Error::Structure(format!(
                "radial network with {} buses needs {} branches, found {} ({})",
                buses.len(),
                buses.len() - 1,
                branches.len(),
                if branches.len() + 1 < buses.len() { "disconnected" } else { "meshed" }
            )));
        }

        // With exactly n-1 edges, acyclic is equivalent to connected.
        let mut forest = UnionFind::new(buses.len());
        for br in &branches {
            if !forest.union(position[&br.from], position[&br.to]) {
                return Err(Error::Structure(format!(
                    "branch {}-{} closes a cycle",
                    br.from, br.to
                )));
            }
        }

        let node_ids: Vec<usize> = buses.iter().map(|b| b.id).filter(|&id| id != slack).collect();
        let node_of = node_ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();

        Ok(Self {
            base_mva,
            nominal_voltage,
            slack,
            buses,
            branches,
            node_ids,
            node_of,
        })
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn nominal_voltage(&self) -> f64 {
        self.nominal_voltage
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Number of buses including the slack.
    pub fn bus_count(&self) -> usize {
        self.buses.len()
    }

    /// Number of non-slack buses, the dimension of every network matrix.
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Bus ids of the nodes, in node order.
    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    /// Node index of a bus, `None` for the slack or an unknown id.
    pub fn node_index(&self, bus: usize) -> Option<usize> {
        self.node_of.get(&bus).copied()
    }

    /// Nominal active injections `p★` per node.
    pub fn nominal_injections(&self) -> DVector<f64> {
        self.node_vector(|b| b.p_nominal)
    }

    /// Nominal reactive injections per node as listed in the case.
    pub fn nominal_reactive(&self) -> DVector<f64> {
        self.node_vector(|b| b.q_nominal)
    }

    fn node_vector(&self, f: impl Fn(&Bus) -> f64) -> DVector<f64> {
        DVector::from_iterator(
            self.node_count(),
            self.buses.iter().filter(|b| b.id != self.slack).map(f),
        )
    }

    /// Same network with every branch weight replaced, keeping topology.
    ///
    /// Used by the property tests that sweep impedance signs.
    pub fn with_impedances(&self, r: &[f64], x: &[f64]) -> Result<Self> {
        Error::check_dim(self.branches.len(), r.len())?;
        Error::check_dim(self.branches.len(), x.len())?;
        let branches = self
            .branches
            .iter()
            .zip(r.iter().zip(x))
            .map(|(b, (&r, &x))| Branch { r, x, ..b.clone() })
            .collect();
        Self::new(self.base_mva, self.nominal_voltage, self.slack, self.buses.clone(), branches)
    }
}

/// Disjoint sets over `0..n`.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bus(id: usize, p: f64) -> Bus {
        Bus { id, p_nominal: p, q_nominal: 0.0 }
    }

    fn line(from: usize, to: usize) -> Branch {
        Branch { from, to, r: 0.1, x: 0.1 }
    }

    #[test]
    fn two_bus_case() {
        let case = NetworkCase::new(1.0, 1.0, 1, vec![bus(1, 0.0), bus(2, -0.1)], vec![line(1, 2)]).unwrap();
        assert_eq!(case.bus_count(), 2);
        assert_eq!(case.node_count(), 1);
        assert_eq!(case.node_ids(), &[2]);
        assert_eq!(case.nominal_injections()[0], -0.1);
        assert_eq!(case.node_index(1), None);
    }

    #[test]
    fn rejects_cycle() {
        let buses = vec![bus(1, 0.0), bus(2, 0.0), bus(3, 0.0)];
        let err = NetworkCase::new(1.0, 1.0, 1, buses, vec![line(1, 2), line(2, 3), line(3, 1)]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn rejects_cycle_with_right_edge_count() {
        // four buses, three edges, but 1-2-3 is a triangle and 4 is isolated
        let buses = vec![bus(1, 0.0), bus(2, 0.0), bus(3, 0.0), bus(4, 0.0)];
        let err = NetworkCase::new(1.0, 1.0, 1, buses, vec![line(1, 2), line(2, 3), line(3, 1)]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
    }

    #[test]
    fn rejects_disconnected() {
        let err = NetworkCase::new(1.0, 1.0, 1, vec![bus(1, 0.0), bus(2, 0.0)], vec![]).unwrap_err();
        assert!(matches!(err, Error::Structure(ref m) if m.contains("disconnected")), "{err}");
    }

    #[test]
    fn rejects_unknown_bus_and_duplicates() {
        let err = NetworkCase::new(1.0, 1.0, 1, vec![bus(1, 0.0), bus(2, 0.0)], vec![line(1, 7)]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");

        let buses = vec![bus(1, 0.0), bus(2, 0.0), bus(3, 0.0)];
        let err = NetworkCase::new(1.0, 1.0, 1, buses, vec![line(1, 2), line(2, 1)]).unwrap_err();
        assert!(matches!(err, Error::Structure(ref m) if m.contains("duplicate")), "{err}");
    }

    #[test]
    fn rejects_nonpositive_resistance() {
        let mut br = line(1, 2);
        br.r = 0.0;
        let err = NetworkCase::new(1.0, 1.0, 1, vec![bus(1, 0.0), bus(2, 0.0)], vec![br]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }
}
