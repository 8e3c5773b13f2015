use super::*;
use crate::adversary::AdversaryStrategy;
use crate::gadget::BaseState;
use crate::qsim::PauliLetter;
use crate::rng::RandomStream;
use approx::assert_relative_eq;

fn rng() -> RandomStream {
    RandomStream::from_seed(7)
}

fn plus_label(k: u8) -> StateLabel {
    StateLabel {
        base: BaseState::Plus(k),
        x_power: 0,
        z_power: 0,
    }
}

fn z_label(bit: u8) -> StateLabel {
    StateLabel {
        base: if bit == 0 { BaseState::Z0 } else { BaseState::Z1 },
        x_power: 0,
        z_power: 0,
    }
}

fn path_graph(n: usize) -> GraphSpec {
    GraphSpec::new(n, (0..n - 1).map(|i| (i, i + 1)).collect()).unwrap()
}

/// The dotted triangle with traps on two subdividers; primaries become
/// dummies and the remaining subdivider is the single (isolated) output.
pub fn dotted_triangle_instance() -> GraphSpec {
    let mut g = build_dotted_complete(3).unwrap();
    g.roles = vec![
        Role::Dummy,
        Role::Dummy,
        Role::Dummy,
        Role::Trap,
        Role::Computation,
        Role::Trap,
    ];
    g.validate().unwrap();
    g
}

fn honest_prepared(graph: &GraphSpec, rng: &mut impl rand::Rng) -> Vec<PreparedQubit> {
    (0..graph.n)
        .map(|v| {
            let label = match graph.roles[v] {
                Role::Dummy => random_z_label(rng),
                _ => random_plus_label(rng),
            };
            PreparedQubit::honest(label)
        })
        .collect()
}

#[test]
fn dotted_complete_counts() {
    assert_eq!(build_dotted_complete(2).unwrap().n, 3);
    let g3 = build_dotted_complete(3).unwrap();
    assert_eq!((g3.n, g3.edges.len()), (6, 6));
    assert_eq!(build_dotted_complete(4).unwrap().n, 10);
    assert!(build_dotted_complete(6).is_err()); // 21 vertices exceeds the cap
}

#[test]
fn path_of_two_subdivides_to_a_path() {
    let g = build_dotted_complete(2).unwrap();
    // vertices 0,1 primaries, 2 the subdivider: edges (0,2),(2,1)
    assert!(g.is_adjacent(0, 2) && g.is_adjacent(1, 2) && !g.is_adjacent(0, 1));
}

#[test]
fn assign_roles_on_a_path_of_three() {
    let g = path_graph(3);
    let sets = feasible_trap_sets(&g, 1);
    assert_eq!(sets, vec![vec![0], vec![1], vec![2]]);
    let mut r = rng();
    for _ in 0..20 {
        let assigned = assign_roles(&g, 1, &mut r).unwrap();
        assigned.validate().unwrap();
        // a middle trap forces both ends dummy
        if assigned.roles[1] == Role::Trap {
            assert_eq!(assigned.roles[0], Role::Dummy);
            assert_eq!(assigned.roles[2], Role::Dummy);
        }
    }
    // n_t = 0 always feasible
    let assigned = assign_roles(&g, 0, &mut r).unwrap();
    assert_eq!(assigned.n_traps(), 0);
}

#[test]
fn feasible_sets_match_brute_force_on_dotted_triangle() {
    let g = build_dotted_complete(3).unwrap();
    let fast = feasible_trap_sets(&g, 1);
    // brute force: every single vertex can be isolated
    assert_eq!(fast.len(), 6);
    let mut brute: Vec<Vec<usize>> = (0..64u32)
        .filter(|bits| bits.count_ones() == 2)
        .map(|bits| (0..6).filter(|v| bits >> v & 1 == 1).collect::<Vec<_>>())
        .filter(|set: &Vec<usize>| !g.is_adjacent(set[0], set[1]))
        .collect();
    brute.sort();
    let mut fast2 = feasible_trap_sets(&g, 2);
    fast2.sort();
    assert_eq!(fast2, brute);
}

#[test]
fn constrained_assignment_hits_exact_dummy_count() {
    let g = build_dotted_complete(3).unwrap();
    let mut r = rng();
    let mut comp_seen = std::collections::BTreeSet::new();
    for _ in 0..200 {
        let assigned = assign_roles_constrained(&g, 2, 3, &mut r).unwrap();
        assert_eq!(assigned.n_dummies(), 3);
        assert_eq!(assigned.n_traps(), 2);
        let comp = assigned.vertices_with_role(Role::Computation);
        assert_eq!(comp.len(), 1);
        comp_seen.insert(comp[0]);
    }
    // all six vertices occur as the computation vertex
    assert_eq!(comp_seen.len(), 6);
}

#[test]
fn appendix_partition_structure() {
    let g = dotted_triangle_instance();
    let mut r = rng();
    let parts = appendix_partition(&g, &mut r).unwrap();
    assert_eq!(parts.len(), 2);
    let mut all: Vec<usize> = parts.iter().flatten().cloned().collect();
    all.sort_unstable();
    assert_eq!(all, (0..6).collect::<Vec<_>>());
    for set in parts {
        let traps = set
            .iter()
            .filter(|&&v| g.roles[v] == Role::Trap)
            .count();
        assert_eq!(traps, 1);
    }
}

#[test]
fn compute_delta_examples() {
    use std::f64::consts::{FRAC_PI_4, PI};
    assert_relative_eq!(compute_delta(0, FRAC_PI_4, 0, 0).unwrap(), FRAC_PI_4);
    assert_relative_eq!(compute_delta(1, 0.0, 1, 1).unwrap(), FRAC_PI_4);
    assert_relative_eq!(compute_delta(4, 0.0, 0, 0).unwrap(), PI);
    assert!(compute_delta(0, 0.3, 0, 0).is_err());
}

#[test]
fn honest_runs_always_accept() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    for _ in 0..2_000 {
        let prepared = honest_prepared(&g, &mut r);
        let run = run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r).unwrap();
        assert!(run.result.accepted);
    }
}

#[test]
fn honest_isolated_output_is_deterministic() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    for _ in 0..500 {
        let prepared = honest_prepared(&g, &mut r);
        let run = run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r).unwrap();
        assert_eq!(run.corrected_output, vec![0]);
    }
}

#[test]
fn trap_attack_rejects_deterministically() {
    // Path of three, trap at one end isolated by a dummy neighbor; an X
    // right before the trap's readout flips it with certainty.
    let mut g = path_graph(3);
    g.roles = vec![Role::Computation, Role::Dummy, Role::Trap];
    g.validate().unwrap();
    let pattern = Pattern::for_roles(&g).unwrap();
    let attack = AdversaryStrategy::Pauli {
        stage: Stage::FkBeforeMeasurement,
        positions: vec![2],
        letters: vec![PauliLetter::X],
    };
    let mut r = rng();
    for _ in 0..300 {
        let prepared = honest_prepared(&g, &mut r);
        let run = run_fk(&g, &pattern, &prepared, &attack, &mut r).unwrap();
        assert!(!run.result.accepted);
    }
}

#[test]
fn one_dimensional_cluster_matches_circuit_oracle() {
    // Chain of three computation vertices measured at (φ₁, φ₂, 0): the
    // corrected output reads X on H·Rz(φ₂)·H·Rz(φ₁)|+⟩. Checked against a
    // direct statevector computation of that circuit.
    let g = path_graph(3);
    let mut pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    for (phi1, phi2) in [(0u8, 0u8), (1, 0), (2, 3), (7, 5)] {
        pattern.phi[0] = Some(phi1);
        pattern.phi[1] = Some(phi2);
        pattern.phi[2] = Some(0);

        // oracle probability of corrected output 1
        let mut oracle = PureState::plus_k(0);
        oracle
            .apply_gate(
                Gate::Rz(f64::from(phi1) * std::f64::consts::FRAC_PI_4),
                &[0],
            )
            .unwrap();
        oracle.apply_gate(Gate::H, &[0]).unwrap();
        oracle
            .apply_gate(
                Gate::Rz(f64::from(phi2) * std::f64::consts::FRAC_PI_4),
                &[0],
            )
            .unwrap();
        oracle.apply_gate(Gate::H, &[0]).unwrap();
        let (_, p1) = oracle.outcome_probabilities(0, Basis::X).unwrap();

        let trials = 4_000u32;
        let mut ones = 0u32;
        for _ in 0..trials {
            let prepared = honest_prepared(&g, &mut r);
            let run =
                run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r).unwrap();
            ones += u32::from(run.corrected_output[0] == 1);
        }
        let freq = f64::from(ones) / f64::from(trials);
        let sigma = (p1.max(1e-3) * (1.0 - p1).max(1e-3) / f64::from(trials)).sqrt();
        assert!(
            (freq - p1).abs() < 4.0 * sigma.max(1e-3),
            "phi ({phi1},{phi2}): freq {freq} vs oracle {p1}"
        );
    }
}

#[test]
fn dummy_compensation_leaves_output_invariant() {
    // The π-term for |1⟩ dummies must cancel their Z-kick exactly: the
    // output-vertex marginal conditioned on any dummy values equals the
    // all-zero-dummy marginal.
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    let mut freqs = [[0u32; 2]; 2];
    for _ in 0..4_000 {
        let prepared = honest_prepared(&g, &mut r);
        let dummy_ones = prepared
            .iter()
            .zip(&g.roles)
            .filter(|(q, &role)| {
                role == Role::Dummy && matches!(q.label.class(), StateClass::Z(1))
            })
            .count();
        let run = run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r).unwrap();
        freqs[usize::from(dummy_ones > 0)][usize::from(run.corrected_output[0] == 1)] += 1;
    }
    // corrected output is deterministic 0 in both strata
    assert_eq!(freqs[0][1], 0);
    assert_eq!(freqs[1][1], 0);
    assert!(freqs[0][0] > 0 && freqs[1][0] > 0);
}

#[test]
fn delta_messages_are_uniform_per_role() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    let runs: Vec<FkRun> = (0..4_000)
        .map(|_| {
            let prepared = honest_prepared(&g, &mut r);
            run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r).unwrap()
        })
        .collect();
    let hist = delta_histograms(&runs);
    for row in hist {
        let total: u64 = row.iter().sum();
        if total == 0 {
            continue;
        }
        // chi-square against uniform over 8 bins, 4σ-equivalent quantile for
        // df = 7 is ≈ 33.4
        let expect = total as f64 / 8.0;
        let chi2: f64 = row
            .iter()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        assert!(chi2 < 33.4, "chi2 {chi2} for {row:?}");
    }
}

#[test]
fn label_role_mismatch_is_rejected() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    let mut prepared = honest_prepared(&g, &mut r);
    prepared[0] = PreparedQubit::honest(plus_label(3)); // dummy fed a plus state
    let err = run_fk(&g, &pattern, &prepared, &AdversaryStrategy::Honest, &mut r);
    assert!(matches!(err, Err(Error::RoleMismatch { .. })));
}

#[test]
fn compose_honest_accepts_and_round_count_matches_dp_oracle() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let p = 0.45;
    let p_prime = solve_p_prime(g.n, g.n_dummies(), p).unwrap();
    let mut r = rng();
    let trials = 400u32;
    let mut rounds = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let out = compose_protocol(
            &g,
            &pattern,
            p,
            p_prime,
            &AdversaryStrategy::Honest,
            PrepBackend::Logical,
            &mut r,
        )
        .unwrap();
        assert!(out.run.result.accepted);
        rounds.push(out.gadget_rounds as f64);
    }
    let mean: f64 = rounds.iter().sum::<f64>() / f64::from(trials);
    let expect = expected_gadget_rounds(g.n, g.n_dummies(), p, p_prime).unwrap();
    let var: f64 =
        rounds.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / f64::from(trials - 1);
    let sigma_mean = (var / f64::from(trials)).sqrt();
    assert!(
        (mean - expect).abs() < 4.0 * sigma_mean,
        "mean {mean} vs dp {expect}"
    );
}

#[test]
fn compose_rejects_inconsistent_dummy_fraction() {
    let g = dotted_triangle_instance(); // N_D/N = 1/2
    let pattern = Pattern::for_roles(&g).unwrap();
    let mut r = rng();
    // p, p′ implying a different fraction
    let err = compose_protocol(
        &g,
        &pattern,
        0.25,
        0.5,
        &AdversaryStrategy::Honest,
        PrepBackend::Logical,
        &mut r,
    );
    assert!(err.is_err());
    // n_d = 0 is unreachable for p < 1/2
    assert!(solve_p_prime(6, 0, 0.45).is_err());
}

#[test]
fn z_labels_never_feed_traps() {
    let g = dotted_triangle_instance();
    let pattern = Pattern::for_roles(&g).unwrap();
    let p = 0.45;
    let p_prime = solve_p_prime(g.n, g.n_dummies(), p).unwrap();
    let mut r = rng();
    let out = compose_protocol(
        &g,
        &pattern,
        p,
        p_prime,
        &AdversaryStrategy::Honest,
        PrepBackend::Logical,
        &mut r,
    )
    .unwrap();
    for v in 0..g.n {
        match g.roles[v] {
            Role::Dummy => assert!(out.run.secrets.labels[v].is_z_class()),
            _ => assert!(!out.run.secrets.labels[v].is_z_class()),
        }
    }
    let _ = z_label(0);
}
