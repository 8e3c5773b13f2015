//! Graphs, vertex roles, and role assignment under trap isolation.

use crate::error::{Error, Result};
use crate::qsim::MAX_QUBITS;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Computation,
    Trap,
    Dummy,
}

/// An undirected graph with a role per vertex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub roles: Vec<Role>,
}

impl GraphSpec {
    /// All-computation graph over the given edges.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = GraphSpec {
            n,
            edges,
            roles: vec![Role::Computation; n],
        };
        g.validate_structure()?;
        Ok(g)
    }

    fn validate_structure(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("empty graph".into()));
        }
        if self.roles.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.roles.len(),
                right: self.n,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(Error::QubitOutOfRange {
                    index: u.max(v),
                    n_qubits: self.n,
                });
            }
            if u == v {
                return Err(Error::InvalidConfig(format!("self-loop at {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidConfig(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(())
    }

    /// Structure plus trap isolation: every neighbor of a trap is a dummy.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        for v in 0..self.n {
            if self.roles[v] == Role::Trap {
                for u in self.neighbors(v) {
                    if self.roles[u] != Role::Dummy {
                        return Err(Error::InfeasibleRoles(format!(
                            "trap {v} has non-dummy neighbor {u}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.push(b);
            } else if b == v {
                out.push(a);
            }
        }
        out
    }

    pub fn n_dummies(&self) -> usize {
        self.roles.iter().filter(|&&r| r == Role::Dummy).count()
    }

    pub fn n_traps(&self) -> usize {
        self.roles.iter().filter(|&&r| r == Role::Trap).count()
    }

    pub fn vertices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.n).filter(|&v| self.roles[v] == role).collect()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.edges
            .iter()
            .any(|&(a, b)| (a == u && b == v) || (a == v && b == u))
    }
}

/// Complete graph K_n with every edge subdivided by an added vertex.
/// Primaries are 0..n−1; subdividers follow in lexicographic pair order.
pub fn build_dotted_complete(n: usize) -> Result<GraphSpec> {
    if n < 2 {
        return Err(Error::InvalidConfig("dotted-complete needs n ≥ 2".into()));
    }
    let total = n + n * (n - 1) / 2;
    if total > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            requested: total,
            cap: MAX_QUBITS,
        });
    }
    let mut edges = Vec::new();
    let mut next = n;
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, next));
            edges.push((next, j));
            next += 1;
        }
    }
    GraphSpec::new(total, edges)
}

/// All n_t-subsets of vertices that are pairwise non-adjacent (so each can be
/// isolated by declaring its neighborhood dummy).
pub fn feasible_trap_sets(graph: &GraphSpec, n_t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(
        graph: &GraphSpec,
        n_t: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == n_t {
            out.push(current.clone());
            return;
        }
        for v in start..graph.n {
            if current.iter().any(|&t| graph.is_adjacent(t, v)) {
                continue;
            }
            current.push(v);
            recurse(graph, n_t, v + 1, current, out);
            current.pop();
        }
    }
    recurse(graph, n_t, 0, &mut current, &mut out);
    out
}

fn roles_from(graph: &GraphSpec, traps: &[usize], extra_dummies: &[usize]) -> Vec<Role> {
    let mut roles = vec![Role::Computation; graph.n];
    for &t in traps {
        roles[t] = Role::Trap;
    }
    for &t in traps {
        for u in graph.neighbors(t) {
            roles[u] = Role::Dummy;
        }
    }
    for &d in extra_dummies {
        roles[d] = Role::Dummy;
    }
    roles
}

/// Uniformly random assignment with `n_t` isolated traps and the minimal
/// dummy set (exactly the union of trap neighborhoods).
pub fn assign_roles(graph: &GraphSpec, n_t: usize, rng: &mut impl Rng) -> Result<GraphSpec> {
    let sets = feasible_trap_sets(graph, n_t);
    if sets.is_empty() {
        return Err(Error::InfeasibleRoles(format!(
            "no isolated placement of {n_t} traps"
        )));
    }
    let traps = &sets[rng.gen_range(0..sets.len())];
    let mut out = graph.clone();
    out.roles = roles_from(graph, traps, &[]);
    out.validate()?;
    Ok(out)
}

/// Uniformly random assignment with exactly `n_t` traps and `n_d` dummies:
/// the dummies cover every trap neighborhood, and any surplus dummies land
/// uniformly on the remaining vertices. Uniform over all valid
/// (trap set, dummy set) pairs.
pub fn assign_roles_constrained(
    graph: &GraphSpec,
    n_t: usize,
    n_d: usize,
    rng: &mut impl Rng,
) -> Result<GraphSpec> {
    let sets = feasible_trap_sets(graph, n_t);
    // weight each trap set by the number of ways to place surplus dummies
    let mut weighted: Vec<(&Vec<usize>, Vec<usize>, f64)> = Vec::new();
    for traps in &sets {
        let mut hood: Vec<usize> = traps
            .iter()
            .flat_map(|&t| graph.neighbors(t))
            .collect();
        hood.sort_unstable();
        hood.dedup();
        if hood.len() > n_d {
            continue;
        }
        let free: Vec<usize> = (0..graph.n)
            .filter(|v| !traps.contains(v) && !hood.contains(v))
            .collect();
        let surplus = n_d - hood.len();
        if surplus > free.len() {
            continue;
        }
        let weight = binomial(free.len(), surplus);
        weighted.push((traps, free, weight));
    }
    if weighted.is_empty() {
        return Err(Error::InfeasibleRoles(format!(
            "no placement with {n_t} traps and {n_d} dummies"
        )));
    }
    let total: f64 = weighted.iter().map(|(_, _, w)| w).sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut chosen = &weighted[weighted.len() - 1];
    for item in &weighted {
        if draw < item.2 {
            chosen = item;
            break;
        }
        draw -= item.2;
    }
    let (traps, free, _) = chosen;
    let mut hood: Vec<usize> = traps.iter().flat_map(|&t| graph.neighbors(t)).collect();
    hood.sort_unstable();
    hood.dedup();
    let surplus = n_d - hood.len();
    let extra = sample_subset(free, surplus, rng);
    let mut out = graph.clone();
    out.roles = roles_from(graph, traps, &extra);
    out.validate()?;
    if out.n_dummies() != n_d {
        return Err(Error::InfeasibleRoles(
            "dummy count constraint not satisfiable".into(),
        ));
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn sample_subset(pool: &[usize], k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pool = pool.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let i = rng.gen_range(0..pool.len());
        out.push(pool.swap_remove(i));
    }
    out
}

/// The 3N_T = N bookkeeping partition: N_T sets of three vertices, each
/// holding exactly one trap at a uniformly random in-set position. Metadata
/// for the verifiability accounting; fails unless 3·n_traps = n.
pub fn appendix_partition(graph: &GraphSpec, rng: &mut impl Rng) -> Result<Vec<[usize; 3]>> {
    let traps = graph.vertices_with_role(Role::Trap);
    if 3 * traps.len() != graph.n {
        return Err(Error::InvalidConfig(format!(
            "partition regime needs 3·N_T = N (got N_T = {}, N = {})",
            traps.len(),
            graph.n
        )));
    }
    let mut others: Vec<usize> = (0..graph.n)
        .filter(|v| graph.roles[*v] != Role::Trap)
        .collect();
    use rand::seq::SliceRandom;
    others.shuffle(rng);
    let mut out = Vec::with_capacity(traps.len());
    for (i, &t) in traps.iter().enumerate() {
        let mut set = [others[2 * i], others[2 * i + 1], t];
        let pos = rng.gen_range(0..3);
        set.swap(2, pos);
        out.push(set);
    }
    Ok(out)
}
