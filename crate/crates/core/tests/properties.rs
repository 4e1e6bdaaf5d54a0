use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use epitopo::complex::{
    find_isomorphism, invariants, AgentId, Agents, ModelBuilder, SimplicialModel,
};
use epitopo::del::{check_morphism, product_update, ActionModel};
use epitopo::duality::{
    roundtrip_kripke, roundtrip_simplicial, to_kripke, to_kripke_action, to_simplicial,
};
use epitopo::generators::{
    agent_names, binary_inputs, random_formula, random_kripke, random_kripke_with_agents,
};
use epitopo::kripke::{self, product_update_kripke, satisfying_states};
use epitopo::logic::{parse, satisfying_facets, Formula};
use epitopo::protocols::{aview, immediate_snapshot, ordered_partitions, view};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_model(seed: u64) -> SimplicialModel {
    to_simplicial(&random_kripke(&mut rng(seed), 3, 12, 3)).unwrap()
}

/// Ordered partitions counted as maps agent → rank onto `0..m` for some `m`.
fn brute_force_partitions(n: usize) -> usize {
    let mut count = 0;
    let total = n.pow(n as u32);
    for code in 0..total {
        let ranks: Vec<usize> = (0..n).map(|i| code / n.pow(i as u32) % n).collect();
        let used: BTreeSet<usize> = ranks.iter().copied().collect();
        if used.iter().copied().eq(0..used.len()) {
            count += 1;
        }
    }
    count
}

#[test]
fn partition_counts_match_brute_force() {
    for n in 1..=4 {
        let agents: Vec<AgentId> = (0..n).map(AgentId).collect();
        let parts = ordered_partitions(&agents);
        let distinct: HashSet<_> = parts.iter().collect();
        assert_eq!(distinct.len(), parts.len());
        assert_eq!(parts.len(), brute_force_partitions(n));
    }
    assert_eq!(
        (1..=4).map(brute_force_partitions).collect::<Vec<_>>(),
        vec![1, 3, 13, 75]
    );
}

/// Vertices of the one-round protocol complex counted from views alone:
/// distinct pairs (agent, seen values).
fn view_vertex_oracle(m: &SimplicialModel) -> usize {
    let agents = m.agents().all();
    let mut seen = HashSet::new();
    for x in 0..m.num_facets() {
        for c in ordered_partitions(&agents) {
            for &a in &agents {
                seen.insert((a, view(m, x, a, &c).unwrap()));
            }
        }
    }
    seen.len()
}

#[test]
fn snapshot_vertices_match_view_oracle() {
    let square = binary_inputs(2);
    let octahedron = binary_inputs(3);
    assert_eq!(view_vertex_oracle(&square), 12);
    assert_eq!(view_vertex_oracle(&octahedron), 54);
    for m in [square, octahedron] {
        let a = immediate_snapshot(&m).unwrap();
        assert_eq!(a.complex().vertices().len(), view_vertex_oracle(&m));
    }
}

#[test]
fn action_facets_share_a_vertex_iff_views_agree() {
    let m = binary_inputs(3);
    let agents = m.agents().all();
    let parts = ordered_partitions(&agents);
    let a = immediate_snapshot(&m).unwrap();
    // action facets are listed by input facet, then partition
    let key = |i: usize| (i / parts.len(), &parts[i % parts.len()]);
    let facets = a.complex().facets();
    for i in 0..facets.len() {
        for j in i + 1..facets.len() {
            let ((x, c), (y, d)) = (key(i), key(j));
            for &ag in &agents {
                let shared = facets[i].vertex(ag) == facets[j].vertex(ag);
                let same_view = aview(ag, c).unwrap() == aview(ag, d).unwrap()
                    && view(&m, x, ag, c).unwrap() == view(&m, y, ag, d).unwrap();
                assert_eq!(shared, same_view, "facets {i} {j} agent {ag:?}");
            }
        }
    }
}

#[test]
fn protocol_projection_is_a_morphism() {
    let m = binary_inputs(3);
    let up = epitopo::protocols::protocol_model(&m, 1, 1_000_000).unwrap();
    assert!(check_morphism(&up.projection));
    let inv = invariants(up.model.complex());
    assert_eq!(up.model.num_facets(), 104);
    assert_eq!(inv.euler_characteristic, 2);
}

fn s5_loc_axioms(agents: &Agents, phi: &Formula, psi: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    for a in agents.ids() {
        let k = |f: Formula| Formula::knows(a, f);
        out.push(Formula::implies(
            k(Formula::implies(phi.clone(), psi.clone())),
            Formula::implies(k(phi.clone()), k(psi.clone())),
        ));
        out.push(Formula::implies(k(phi.clone()), phi.clone()));
        out.push(Formula::implies(k(phi.clone()), k(k(phi.clone()))));
        out.push(Formula::implies(
            Formula::not(k(phi.clone())),
            k(Formula::not(k(phi.clone()))),
        ));
        for v in 0..3 {
            let p = Formula::atom(a, v.to_string());
            out.push(Formula::or(k(p.clone()), k(Formula::not(p))));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplicial_and_kripke_semantics_agree(seed in any::<u64>()) {
        let m = random_model(seed);
        let k = to_kripke(&m);
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..8 {
            let phi = random_formula(&mut r, m.agents(), 3, 3, false);
            prop_assert_eq!(satisfying_facets(&m, &phi).unwrap(), satisfying_states(&k, &phi).unwrap());
        }
    }

    #[test]
    fn duality_round_trips(seed in any::<u64>()) {
        let k = random_kripke(&mut rng(seed), 3, 12, 3);
        prop_assert!(roundtrip_kripke(&k));
        prop_assert!(roundtrip_simplicial(&to_simplicial(&k).unwrap()));
    }

    #[test]
    fn s5_and_locality_hold_everywhere(seed in any::<u64>()) {
        let m = random_model(seed);
        let mut r = rng(seed ^ 0xa5);
        let phi = random_formula(&mut r, m.agents(), 3, 2, false);
        let psi = random_formula(&mut r, m.agents(), 3, 2, false);
        for ax in s5_loc_axioms(m.agents(), &phi, &psi) {
            prop_assert!(satisfying_facets(&m, &ax).unwrap().iter().all(|&b| b));
        }
    }

    #[test]
    fn update_commutes_with_duality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(seed);
        let n = m.agents().len();
        let frame = to_simplicial(&random_kripke_with_agents(&mut r, n, 5, 2)).unwrap();
        let pres = (0..frame.num_facets())
            .map(|_| random_formula(&mut r, m.agents(), 3, 2, false))
            .collect();
        let action = ActionModel::new(frame.complex().clone(), pres).unwrap();
        let up = product_update(&m, &action).unwrap();
        let kup = product_update_kripke(&to_kripke(&m), &to_kripke_action(&action)).unwrap();
        prop_assert_eq!(up.model.num_facets(), kup.num_states());
        prop_assert!(kripke::find_isomorphism(&to_kripke(&up.model), &kup).is_some());
    }

    #[test]
    fn projections_never_create_positive_knowledge(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(seed);
        let n = m.agents().len();
        let frame = to_simplicial(&random_kripke_with_agents(&mut r, n, 5, 2)).unwrap();
        let pres = (0..frame.num_facets())
            .map(|_| random_formula(&mut r, m.agents(), 3, 1, true))
            .collect();
        let action = ActionModel::new(frame.complex().clone(), pres).unwrap();
        let up = product_update(&m, &action).unwrap();
        let image = up.projection.facet_map();
        for _ in 0..8 {
            let phi = random_formula(&mut r, m.agents(), 3, 3, true);
            let before = satisfying_facets(&m, &phi).unwrap();
            let after = satisfying_facets(&up.model, &phi).unwrap();
            for (x, y) in image.iter().enumerate() {
                prop_assert!(!before[y.unwrap()] || after[x]);
            }
        }
    }

    #[test]
    fn formulas_print_and_parse_back(seed in any::<u64>()) {
        let agents = agent_names(3);
        let phi = random_formula(&mut rng(seed), &agents, 3, 3, false);
        let text = phi.display(&agents).to_string();
        prop_assert_eq!(parse(&text, &agents).unwrap(), phi);
    }

    #[test]
    fn isomorphism_ignores_vertex_names(seed in any::<u64>()) {
        let m = random_model(seed);
        let k = to_kripke(&m);
        let renamed = epitopo::kripke::KripkeModel::from_block_ids(
            k.agents().clone(),
            (0..k.num_states()).map(|s| format!("t{s}")).collect(),
            k.agents().ids().map(|a| (0..k.num_states()).map(|s| k.block(a, s)).collect()).collect(),
            (0..k.num_states()).map(|s| k.valuation(s).clone()).collect(),
        ).unwrap();
        prop_assert!(kripke::find_isomorphism(&renamed, &k).is_some());
        let back = to_simplicial(&renamed).unwrap();
        prop_assert!(find_isomorphism(&back, &m).is_some());
    }
}

#[test]
fn subdivided_square_is_a_longer_cycle() {
    let mut b = ModelBuilder::new(Agents::new(["g", "w"]).unwrap());
    for r in [["0", "0"], ["0", "1"], ["1", "1"], ["1", "0"]] {
        b.values_row(&r);
    }
    let m = Arc::new(b.glue_by_label().build().unwrap());
    for r in 1..=3 {
        let up = epitopo::protocols::protocol_model(&m, r, 1_000_000).unwrap();
        let expected = 4 * 3usize.pow(r as u32);
        assert_eq!(
            invariants(up.model.complex()).counts,
            vec![expected, expected]
        );
    }
}
