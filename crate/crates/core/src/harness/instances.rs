//! The benchmark instances the experiments run on.

use crate::error::Result;
use crate::fkproto::{build_dotted_complete, GraphSpec, Pattern, Role};

/// The six-vertex instance (dotted triangle) with two isolated traps, three
/// dummies, and one isolated computation vertex — the 3·N_T = N regime.
/// Role placement is randomized per trial by the experiments; this fixed
/// representative is used where a concrete assignment suffices.
pub fn n6_fixed() -> Result<(GraphSpec, Pattern)> {
    let mut g = build_dotted_complete(3)?;
    g.roles = vec![
        Role::Dummy,
        Role::Dummy,
        Role::Dummy,
        Role::Trap,
        Role::Computation,
        Role::Trap,
    ];
    g.validate()?;
    let pattern = Pattern::for_roles(&g)?;
    Ok((g, pattern))
}

/// The bare six-vertex graph (all computation) for per-trial role sampling.
pub fn n6_graph() -> Result<GraphSpec> {
    build_dotted_complete(3)
}

/// Twelve-vertex line instances with n_t ∈ {1, 2, 3} traps, each isolated by
/// its own pair of dummies (environments are disjoint, so per-trap failures
/// are independent and acceptance factorizes exactly). The base layout is
/// D T D C D T D C D T D C; lowering n_t turns the later traps into
/// computation vertices.
pub fn line_trap_sweep(n_t: usize) -> Result<(GraphSpec, Pattern)> {
    assert!((1..=3).contains(&n_t));
    let n = 12;
    let mut g = GraphSpec::new(n, (0..n - 1).map(|i| (i, i + 1)).collect())?;
    let mut roles = vec![Role::Dummy; n];
    for c in [3usize, 7, 11] {
        roles[c] = Role::Computation;
    }
    for (i, t) in [1usize, 5, 9].into_iter().enumerate() {
        roles[t] = if i < n_t {
            Role::Trap
        } else {
            Role::Computation
        };
    }
    g.roles = roles;
    g.validate()?;
    let pattern = Pattern::for_roles(&g)?;
    Ok((g, pattern))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_consistent() {
        let (g, pattern) = n6_fixed().unwrap();
        assert_eq!((g.n_traps(), g.n_dummies()), (2, 3));
        assert_eq!(pattern.outputs.len(), 1);

        for n_t in 1..=3 {
            let (g, pattern) = line_trap_sweep(n_t).unwrap();
            assert_eq!(g.n_traps(), n_t);
            // all computation vertices are isolated (dummy-surrounded)
            for &o in &pattern.outputs {
                assert!(g
                    .neighbors(o)
                    .iter()
                    .all(|&u| g.roles[u] == Role::Dummy));
            }
            // disjoint trap environments: two exclusive dummy neighbors each
            let mut seen = std::collections::BTreeSet::new();
            for v in g.vertices_with_role(Role::Trap) {
                let nbrs = g.neighbors(v);
                assert_eq!(nbrs.len(), 2);
                for u in nbrs {
                    assert!(seen.insert(u), "dummy {u} shared between traps");
                }
            }
        }
    }
}
