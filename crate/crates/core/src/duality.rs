//! The functors between simplicial models and proper local Kripke models.
//!
//! `to_kripke` takes facets to states; two facets are `a`-related when they
//! share their `a`-colored vertex. `to_simplicial` builds one facet per state
//! and glues the `a_i`-vertices of `∼_{a_i}`-related states.

use thiserror::Error;

use crate::complex::{
    complex_isomorphism_with, find_isomorphism, AgentId, ChromaticComplex, Label, SimplicialModel,
    Vertex,
};
use crate::del::ActionModel;
use crate::kripke::{self, KripkeActionModel, KripkeModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("NotProper: states `{0}` and `{1}` are indistinguishable by every agent")]
    NotProper(String, String),
    #[error("NotLocal: agent `{agent}` relates states with different own values (`{state}`)")]
    NotLocal { agent: String, state: String },
}

/// Block ids per agent for the frame of a complex: `blocks[a][X]` is the
/// `a`-vertex of facet `X`. Sharing a vertex is already an equivalence on
/// facets of a chromatic complex, so these ids are the generated closure.
pub fn frame_blocks(c: &ChromaticComplex) -> Vec<Vec<usize>> {
    c.agents()
        .ids()
        .map(|a| c.facets().iter().map(|f| f.vertex(a)).collect())
        .collect()
}

/// `F`: simplicial model to Kripke model.
pub fn to_kripke(m: &SimplicialModel) -> KripkeModel {
    let states = m.facet_names();
    let valuation = (0..m.num_facets()).map(|x| m.facet_atoms(x)).collect();
    KripkeModel::from_block_ids(
        m.agents().clone(),
        states,
        frame_blocks(m.complex()),
        valuation,
    )
    .expect("facets of a valid model form a valid Kripke model")
}

/// `F` on action models: the frame of the action complex, preconditions
/// copied to the corresponding points.
pub fn to_kripke_action(a: &ActionModel) -> KripkeActionModel {
    let c = a.complex();
    KripkeActionModel {
        agents: c.agents().clone(),
        points: (0..c.facets().len()).map(|i| format!("t{i}")).collect(),
        blocks: frame_blocks(c),
        preconditions: a.preconditions().to_vec(),
    }
}

/// `G`: proper local Kripke model to simplicial model.
pub fn to_simplicial(m: &KripkeModel) -> Result<SimplicialModel, DualityError> {
    if !m.is_proper() {
        let (s, t) = indistinguishable_pair(m);
        return Err(DualityError::NotProper(
            m.states()[s].clone(),
            m.states()[t].clone(),
        ));
    }
    if let Some((a, s)) = locality_violation(m) {
        return Err(DualityError::NotLocal {
            agent: m.agents().name(a).to_string(),
            state: m.states()[s].clone(),
        });
    }
    let agents = m.agents().clone();
    let mut vertices = Vec::new();
    let mut labels = Vec::new();
    // vertex index of (agent, block)
    let mut offset = Vec::with_capacity(agents.len());
    for a in agents.ids() {
        offset.push(vertices.len());
        for block in m.partition(a) {
            let s = block[0];
            vertices.push(Vertex {
                id: format!("{}.{}", agents.name(a), m.block(a, s)),
                color: a,
            });
            labels.push(
                m.local_valuation(a, s)
                    .into_iter()
                    .map(str::to_string)
                    .collect::<Label>(),
            );
        }
    }
    let facets = (0..m.num_states())
        .map(|s| agents.ids().map(|a| offset[a.0] + m.block(a, s)).collect())
        .collect();
    let complex = ChromaticComplex::new(agents, vertices, facets)
        .expect("a proper Kripke model gives distinct facets");
    Ok(SimplicialModel::new(complex, labels).expect("one label per vertex"))
}

fn indistinguishable_pair(m: &KripkeModel) -> (usize, usize) {
    for s in 0..m.num_states() {
        for t in s + 1..m.num_states() {
            if m.agents().ids().all(|a| m.related(a, s, t)) {
                return (s, t);
            }
        }
    }
    unreachable!("called on an improper model")
}

fn locality_violation(m: &KripkeModel) -> Option<(AgentId, usize)> {
    for a in m.agents().ids() {
        for block in m.partition(a) {
            let first = m.local_valuation(a, block[0]);
            if let Some(&s) = block.iter().find(|&&s| m.local_valuation(a, s) != first) {
                return Some((a, s));
            }
        }
    }
    None
}

/// `G(F(m)) ≅ m`.
pub fn roundtrip_simplicial(m: &SimplicialModel) -> bool {
    match to_simplicial(&to_kripke(m)) {
        Ok(back) => find_isomorphism(&back, m).is_some(),
        Err(_) => false,
    }
}

/// `F(G(m)) ≅ m`.
pub fn roundtrip_kripke(m: &KripkeModel) -> bool {
    match to_simplicial(m) {
        Ok(s) => kripke::find_isomorphism(&to_kripke(&s), m).is_some(),
        Err(_) => false,
    }
}

/// Isomorphism of two action models: a frame isomorphism that carries each
/// facet to one with an equal precondition.
pub fn action_isomorphism(a: &ActionModel, b: &ActionModel) -> Option<Vec<usize>> {
    complex_isomorphism_with(
        a.complex(),
        b.complex(),
        |_, _| true,
        |x, y| a.preconditions()[x] == b.preconditions()[y],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{Agents, Atom, ModelBuilder};
    use std::collections::BTreeSet;

    fn square() -> SimplicialModel {
        let agents = Agents::new(["g", "w"]).unwrap();
        let mut b = ModelBuilder::new(agents);
        for r in [["0", "0"], ["0", "1"], ["1", "1"], ["1", "0"]] {
            b.values_row(&r);
        }
        b.glue_by_label().build().unwrap()
    }

    #[test]
    fn square_becomes_alternating_cycle() {
        let k = to_kripke(&square());
        assert_eq!(k.num_states(), 4);
        assert!(k.is_proper() && k.is_local());
        let (g, w) = (AgentId(0), AgentId(1));
        let s = |n: &str| k.state_index(n).unwrap();
        assert!(k.related(g, s("00"), s("01")));
        assert!(k.related(w, s("01"), s("11")));
        assert!(k.related(g, s("11"), s("10")));
        assert!(k.related(w, s("10"), s("00")));
        assert!(!k.related(g, s("00"), s("11")));
        assert!(!k.related(w, s("00"), s("11")));
    }

    #[test]
    fn single_facet_round_trips() {
        let agents = Agents::new(["b", "g", "w"]).unwrap();
        let m = ModelBuilder::new(agents)
            .values_row(&["0", "0", "1"])
            .build()
            .unwrap();
        let k = to_kripke(&m);
        assert_eq!(k.num_states(), 1);
        assert!(roundtrip_simplicial(&m));
        assert!(roundtrip_kripke(&k));
    }

    #[test]
    fn square_round_trips_both_ways() {
        let m = square();
        assert!(roundtrip_simplicial(&m));
        let k = to_kripke(&m);
        let back = to_simplicial(&k).unwrap();
        assert_eq!(back.num_facets(), 4);
        assert_eq!(back.complex().vertices().len(), 4);
        assert!(roundtrip_kripke(&k));
    }

    #[test]
    fn improper_and_nonlocal_models_are_rejected() {
        let agents = Agents::new(["g", "w"]).unwrap();
        let g = AgentId(0);
        let improper = KripkeModel::from_block_ids(
            agents.clone(),
            vec!["s".into(), "t".into()],
            vec![vec![0, 0], vec![0, 0]],
            vec![Default::default(), Default::default()],
        )
        .unwrap();
        assert!(matches!(
            to_simplicial(&improper),
            Err(DualityError::NotProper(..))
        ));
        let nonlocal = KripkeModel::from_block_ids(
            agents,
            vec!["s".into(), "t".into()],
            vec![vec![0, 0], vec![0, 1]],
            vec![
                BTreeSet::from([Atom::new(g, "0")]),
                BTreeSet::from([Atom::new(g, "1")]),
            ],
        )
        .unwrap();
        assert!(matches!(
            to_simplicial(&nonlocal),
            Err(DualityError::NotLocal { .. })
        ));
    }
}
