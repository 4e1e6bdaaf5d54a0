//! Built-in input models and seeded random models and formulas.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{AgentId, Agents, Atom, ModelBuilder, SimplicialModel};
use crate::kripke::KripkeModel;
use crate::logic::Formula;

/// `g, w` for two agents, `b, g, w` for three, `a0, a1, …` otherwise.
pub fn agent_names(n: usize) -> Agents {
    let names: Vec<String> = match n {
        2 => vec!["g".into(), "w".into()],
        3 => vec!["b".into(), "g".into(), "w".into()],
        _ => (0..n).map(|i| format!("a{i}")).collect(),
    };
    Agents::new(names).expect("at least one agent")
}

/// Every assignment of `values` to `n` agents, lexicographic, glued by label.
pub fn value_inputs(n: usize, values: &[&str]) -> SimplicialModel {
    let mut b = ModelBuilder::new(agent_names(n));
    let mut rows: Vec<Vec<&str>> = vec![Vec::new()];
    for _ in 0..n {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                values.iter().map(move |v| {
                    let mut r = r.clone();
                    r.push(v);
                    r
                })
            })
            .collect();
    }
    for r in rows {
        b.values_row(&r);
    }
    b.glue_by_label().build().expect("input complex")
}

/// Binary inputs: the square for two agents, the octahedron for three.
pub fn binary_inputs(n: usize) -> SimplicialModel {
    value_inputs(n, &["0", "1"])
}

/// Three agents each hold a distinct card from `0..deck`.
pub fn cards(deck: usize) -> SimplicialModel {
    let mut b = ModelBuilder::new(agent_names(3));
    for x in 0..deck {
        for y in (0..deck).filter(|&y| y != x) {
            for z in (0..deck).filter(|&z| z != x && z != y) {
                b.values_row(&[x.to_string(), y.to_string(), z.to_string()]);
            }
        }
    }
    b.glue_by_label().build().expect("card complex")
}

/// Three triangles `000, 100, 111`: the first two share the `g,w` edge, the
/// last two the `b` vertex.
pub fn strip() -> SimplicialModel {
    let mut b = ModelBuilder::new(agent_names(3));
    for r in [["0", "0", "0"], ["1", "0", "0"], ["1", "1", "1"]] {
        b.values_row(&r);
    }
    b.glue_by_label().build().expect("strip")
}

/// One facet, every agent holding `0`.
pub fn single_facet(n: usize) -> SimplicialModel {
    let zeros = vec!["0"; n];
    ModelBuilder::new(agent_names(n))
        .values_row(&zeros)
        .build()
        .expect("single facet")
}

/// Named built-ins used by tests and the command line.
pub fn builtins() -> Vec<(&'static str, SimplicialModel)> {
    vec![
        ("binary-2", binary_inputs(2)),
        ("binary-3", binary_inputs(3)),
        ("strip", strip()),
        ("single-2", single_facet(2)),
        ("single-3", single_facet(3)),
        ("cards-3", cards(3)),
        ("cards-4", cards(4)),
    ]
}

/// A proper, local Kripke model: states are distinct tuples of per-agent
/// class indices, and each agent's value is a function of its class.
pub fn random_kripke<R: Rng>(
    rng: &mut R,
    max_agents: usize,
    max_states: usize,
    num_values: usize,
) -> KripkeModel {
    let n = rng.gen_range(1..=max_agents.max(1));
    random_kripke_with_agents(rng, n, max_states, num_values)
}

/// As [`random_kripke`], with exactly `n` agents.
pub fn random_kripke_with_agents<R: Rng>(
    rng: &mut R,
    n: usize,
    max_states: usize,
    num_values: usize,
) -> KripkeModel {
    let states = rng.gen_range(1..=max_states.max(1));
    let classes: Vec<usize> = loop {
        let c: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=states)).collect();
        if c.iter().product::<usize>() >= states {
            break c;
        }
    };
    let mut tuples = BTreeSet::new();
    while tuples.len() < states {
        let t: Vec<usize> = classes.iter().map(|&k| rng.gen_range(0..k)).collect();
        tuples.insert(t);
    }
    let mut tuples: Vec<Vec<usize>> = tuples.into_iter().collect();
    tuples.shuffle(rng);
    let values: Vec<Vec<usize>> = classes
        .iter()
        .map(|&k| {
            (0..k)
                .map(|_| rng.gen_range(0..num_values.max(1)))
                .collect()
        })
        .collect();
    let agents = agent_names(n);
    let names = (0..states).map(|s| format!("s{s}")).collect();
    let blocks = (0..n)
        .map(|a| tuples.iter().map(|t| t[a]).collect())
        .collect();
    let valuation = tuples
        .iter()
        .map(|t| {
            (0..n)
                .map(|a| Atom::new(AgentId(a), values[a][t[a]].to_string()))
                .collect()
        })
        .collect();
    KripkeModel::from_block_ids(agents, names, blocks, valuation).expect("well-formed")
}

/// Random formula of modal depth at most `depth` over `agents` and values
/// `0..num_values`. With `positive`, no negation and no implication.
pub fn random_formula<R: Rng>(
    rng: &mut R,
    agents: &Agents,
    num_values: usize,
    depth: usize,
    positive: bool,
) -> Formula {
    let n = agents.len();
    let atom = |rng: &mut R| -> Formula {
        match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(
                AgentId(rng.gen_range(0..n)),
                rng.gen_range(0..num_values.max(1)).to_string(),
            ),
        }
    };
    let group = |rng: &mut R| -> Vec<AgentId> {
        let mut g: Vec<AgentId> = (0..n).map(AgentId).filter(|_| rng.gen_bool(0.6)).collect();
        if g.is_empty() {
            g.push(AgentId(rng.gen_range(0..n)));
        }
        g
    };
    fn go<R: Rng>(
        rng: &mut R,
        depth: usize,
        size: usize,
        positive: bool,
        n: usize,
        atom: &dyn Fn(&mut R) -> Formula,
        group: &dyn Fn(&mut R) -> Vec<AgentId>,
    ) -> Formula {
        if size == 0 {
            return atom(rng);
        }
        let pick = rng.gen_range(0..9);
        let sub = |rng: &mut R, d: usize| go(rng, d, size - 1, positive, n, atom, group);
        match pick {
            0 => atom(rng),
            1 if !positive => Formula::not(sub(rng, depth)),
            2 | 1 => Formula::and(sub(rng, depth), sub(rng, depth)),
            3 => Formula::or(sub(rng, depth), sub(rng, depth)),
            4 if !positive => Formula::implies(sub(rng, depth), sub(rng, depth)),
            _ if depth == 0 => Formula::or(sub(rng, 0), sub(rng, 0)),
            4 | 5 => Formula::knows(AgentId(rng.gen_range(0..n)), sub(rng, depth - 1)),
            6 => Formula::everyone(group(rng), sub(rng, depth - 1)),
            _ => Formula::common(group(rng), sub(rng, depth - 1)),
        }
    }
    go(rng, depth, 4, positive, n, &atom, &group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::invariants;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtin_shapes() {
        let sq = invariants(binary_inputs(2).complex());
        assert_eq!(
            (sq.counts.clone(), sq.euler_characteristic),
            (vec![4, 4], 0)
        );
        let oct = invariants(binary_inputs(3).complex());
        assert_eq!(
            (oct.counts.clone(), oct.euler_characteristic),
            (vec![6, 12, 8], 2)
        );
        let torus = invariants(cards(4).complex());
        assert_eq!(
            (torus.counts.clone(), torus.euler_characteristic),
            (vec![12, 36, 24], 0)
        );
        let s = invariants(strip().complex());
        assert_eq!(
            (s.counts.clone(), s.euler_characteristic),
            (vec![6, 8, 3], 1)
        );
        assert!(s.connected && !s.strongly_connected && !s.pseudomanifold_with_boundary);
    }

    #[test]
    fn random_kripke_models_are_proper_and_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = random_kripke(&mut rng, 3, 12, 3);
            assert!(k.is_proper() && k.is_local());
            assert!(k.num_states() <= 12 && k.agents().len() <= 3);
        }
    }

    #[test]
    fn random_formulas_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let agents = agent_names(3);
        for _ in 0..200 {
            let f = random_formula(&mut rng, &agents, 2, 3, false);
            assert!(f.depth() <= 3);
            let p = random_formula(&mut rng, &agents, 2, 3, true);
            assert!(p.depth() <= 3 && p.is_positive());
        }
    }
}
