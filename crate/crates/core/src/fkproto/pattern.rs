//! Measurement patterns: total order, per-vertex angles, and the standard
//! chain adaptation rule (sign flips from the X-dependency, π-offsets from
//! the Z-dependency).

use super::graph::{GraphSpec, Role};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pattern {
    /// Total measurement order over all vertices.
    pub order: Vec<usize>,
    /// Pattern angle per vertex in units of π/4; set for computation
    /// vertices only (traps are pinned to 0, dummy angles are sampled fresh
    /// each run).
    pub phi: Vec<Option<u8>>,
    /// Earlier vertices whose unblinded outcomes flip this angle's sign.
    pub x_deps: Vec<Vec<usize>>,
    /// Earlier vertices whose unblinded outcomes add π to this angle.
    pub z_deps: Vec<Vec<usize>>,
    /// Designated output vertices, in output-bit order.
    pub outputs: Vec<usize>,
}

impl Pattern {
    pub fn validate(&self, graph: &GraphSpec) -> Result<()> {
        let n = graph.n;
        if self.order.len() != n
            || self.phi.len() != n
            || self.x_deps.len() != n
            || self.z_deps.len() != n
        {
            return Err(Error::BadPattern("length mismatch with graph".into()));
        }
        let mut position = vec![usize::MAX; n];
        for (i, &v) in self.order.iter().enumerate() {
            if v >= n {
                return Err(Error::BadPattern(format!("vertex {v} out of range")));
            }
            if position[v] != usize::MAX {
                return Err(Error::BadPattern(format!("vertex {v} ordered twice")));
            }
            position[v] = i;
        }
        for v in 0..n {
            match (graph.roles[v], self.phi[v]) {
                (Role::Computation, Some(idx)) if idx < 8 => {}
                (Role::Computation, _) => {
                    return Err(Error::BadPattern(format!(
                        "computation vertex {v} needs an angle in 0..8"
                    )))
                }
                (_, None) => {}
                (role, Some(_)) => {
                    return Err(Error::BadPattern(format!(
                        "{role:?} vertex {v} must not carry a pattern angle"
                    )))
                }
            }
            for &d in self.x_deps[v].iter().chain(&self.z_deps[v]) {
                if d >= n || position[d] >= position[v] {
                    return Err(Error::BadPattern(format!(
                        "dependency {d} of {v} does not precede it"
                    )));
                }
            }
        }
        for &o in &self.outputs {
            if o >= n || graph.roles[o] != Role::Computation {
                return Err(Error::BadPattern(format!(
                    "output vertex {o} is not a computation vertex"
                )));
            }
        }
        Ok(())
    }

    /// Build the standard pattern for a role assignment whose computation
    /// subgraph is a disjoint union of simple chains (isolated vertices
    /// included): dummies and traps first, then each chain walked end to
    /// end with the usual predecessor dependencies. All pattern angles
    /// default to 0; callers adjust `phi` for their computation. The last
    /// vertex of each chain is an output.
    pub fn for_roles(graph: &GraphSpec) -> Result<Pattern> {
        graph.validate()?;
        let n = graph.n;
        let comp: Vec<usize> = graph.vertices_with_role(Role::Computation);
        let comp_neighbors = |v: usize| -> Vec<usize> {
            graph
                .neighbors(v)
                .into_iter()
                .filter(|&u| graph.roles[u] == Role::Computation)
                .collect()
        };
        for &v in &comp {
            if comp_neighbors(v).len() > 2 {
                return Err(Error::BadPattern(format!(
                    "computation subgraph is not a chain at vertex {v}"
                )));
            }
        }
        let mut order: Vec<usize> = graph.vertices_with_role(Role::Dummy);
        order.extend(graph.vertices_with_role(Role::Trap));
        let mut visited = vec![false; n];
        let mut chains: Vec<Vec<usize>> = Vec::new();
        // walk chains from endpoints (degree ≤ 1 in the computation subgraph)
        for &start in &comp {
            if visited[start] || comp_neighbors(start).len() > 1 {
                continue;
            }
            let mut chain = vec![start];
            visited[start] = true;
            let mut current = start;
            loop {
                let next = comp_neighbors(current)
                    .into_iter()
                    .find(|&u| !visited[u]);
                match next {
                    Some(u) => {
                        visited[u] = true;
                        chain.push(u);
                        current = u;
                    }
                    None => break,
                }
            }
            chains.push(chain);
        }
        if comp.iter().any(|&v| !visited[v]) {
            return Err(Error::BadPattern(
                "computation subgraph contains a cycle".into(),
            ));
        }
        let mut phi = vec![None; n];
        let mut x_deps = vec![Vec::new(); n];
        let mut z_deps = vec![Vec::new(); n];
        let mut outputs = Vec::new();
        for chain in &chains {
            for (i, &v) in chain.iter().enumerate() {
                phi[v] = Some(0);
                if i >= 1 {
                    x_deps[v] = vec![chain[i - 1]];
                }
                if i >= 2 {
                    z_deps[v] = vec![chain[i - 2]];
                }
            }
            order.extend(chain.iter().cloned());
            outputs.push(*chain.last().expect("nonempty chain"));
        }
        let pattern = Pattern {
            order,
            phi,
            x_deps,
            z_deps,
            outputs,
        };
        pattern.validate(graph)?;
        Ok(pattern)
    }
}
