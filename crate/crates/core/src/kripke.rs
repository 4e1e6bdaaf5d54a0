//! Kripke models with per-agent partitions, S5 semantics, and product update.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::complex::{AgentId, Agents, Atom, UnionFind};
use crate::logic::{validate_signature, CheckError, Formula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("relation of agent `{agent}` is not a partition: {reason}")]
    NotPartition { agent: String, reason: String },
    #[error("expected {expected} entries, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("valuation of state `{state}` mentions agent #{agent} outside the signature")]
    UnknownAgent { state: String, agent: usize },
}

/// Kripke model `⟨S, ∼, L⟩`. Each `∼_a` is stored as a block id per state,
/// numbered by first occurrence, so equivalence laws hold by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    agents: Agents,
    states: Vec<String>,
    blocks: Vec<Vec<usize>>,
    valuation: Vec<BTreeSet<Atom>>,
}

impl KripkeModel {
    /// Builds a model from explicit partitions (`partitions[a]` is a list of
    /// blocks of state indices). Blocks must be disjoint and cover all states.
    pub fn from_partitions(
        agents: Agents,
        states: Vec<String>,
        partitions: Vec<Vec<Vec<usize>>>,
        valuation: Vec<BTreeSet<Atom>>,
    ) -> Result<Self, KripkeError> {
        if partitions.len() != agents.len() {
            return Err(KripkeError::Arity {
                expected: agents.len(),
                found: partitions.len(),
            });
        }
        let ns = states.len();
        let mut blocks = Vec::with_capacity(agents.len());
        for (a, part) in partitions.iter().enumerate() {
            let agent = agents.name(AgentId(a)).to_string();
            let mut of = vec![usize::MAX; ns];
            for (bi, block) in part.iter().enumerate() {
                if block.is_empty() {
                    return Err(KripkeError::NotPartition {
                        agent,
                        reason: format!("block {bi} is empty"),
                    });
                }
                for &s in block {
                    if s >= ns {
                        return Err(KripkeError::UnknownState(format!("#{s}")));
                    }
                    if of[s] != usize::MAX {
                        return Err(KripkeError::NotPartition {
                            agent,
                            reason: format!("state `{}` is in two blocks", states[s]),
                        });
                    }
                    of[s] = bi;
                }
            }
            if let Some(s) = of.iter().position(|&b| b == usize::MAX) {
                return Err(KripkeError::NotPartition {
                    agent,
                    reason: format!("state `{}` is in no block", states[s]),
                });
            }
            blocks.push(of);
        }
        Self::from_block_ids(agents, states, blocks, valuation)
    }

    /// Builds a model from arbitrary block labels per state (`blocks[a][s]`).
    pub fn from_block_ids(
        agents: Agents,
        states: Vec<String>,
        blocks: Vec<Vec<usize>>,
        valuation: Vec<BTreeSet<Atom>>,
    ) -> Result<Self, KripkeError> {
        let ns = states.len();
        let mut names = HashSet::new();
        for s in &states {
            if !names.insert(s.as_str()) {
                return Err(KripkeError::DuplicateState(s.clone()));
            }
        }
        if blocks.len() != agents.len() {
            return Err(KripkeError::Arity {
                expected: agents.len(),
                found: blocks.len(),
            });
        }
        if valuation.len() != ns {
            return Err(KripkeError::Arity {
                expected: ns,
                found: valuation.len(),
            });
        }
        for (s, val) in valuation.iter().enumerate() {
            if let Some(atom) = val.iter().find(|a| a.agent.0 >= agents.len()) {
                return Err(KripkeError::UnknownAgent {
                    state: states[s].clone(),
                    agent: atom.agent.0,
                });
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|ids| {
                if ids.len() != ns {
                    return Err(KripkeError::Arity {
                        expected: ns,
                        found: ids.len(),
                    });
                }
                Ok(canonical_blocks(&ids))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KripkeModel {
            agents,
            states,
            blocks,
            valuation,
        })
    }

    pub fn agents(&self) -> &Agents {
        &self.agents
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn valuation(&self, s: usize) -> &BTreeSet<Atom> {
        &self.valuation[s]
    }

    /// Block id of `s` under `∼_a`.
    pub fn block(&self, a: AgentId, s: usize) -> usize {
        self.blocks[a.0][s]
    }

    pub fn related(&self, a: AgentId, s: usize, t: usize) -> bool {
        self.blocks[a.0][s] == self.blocks[a.0][t]
    }

    /// The partition of `∼_a` as lists of states.
    pub fn partition(&self, a: AgentId) -> Vec<Vec<usize>> {
        let ids = &self.blocks[a.0];
        let nb = ids.iter().max().map_or(0, |b| b + 1);
        let mut out = vec![Vec::new(); nb];
        for (s, &b) in ids.iter().enumerate() {
            out[b].push(s);
        }
        out
    }

    /// Valuation restricted to one agent's propositions (`L(s) ∩ AP_a`).
    pub fn local_valuation(&self, a: AgentId, s: usize) -> BTreeSet<&str> {
        self.valuation[s]
            .iter()
            .filter(|atom| atom.agent == a)
            .map(|atom| atom.value.as_str())
            .collect()
    }

    /// Any two distinct states are distinguished by some agent.
    pub fn is_proper(&self) -> bool {
        let mut seen = HashSet::new();
        (0..self.num_states()).all(|s| {
            let sig: Vec<usize> = self.blocks.iter().map(|b| b[s]).collect();
            seen.insert(sig)
        })
    }

    /// `s ∼_a t` implies `L(s) ∩ AP_a = L(t) ∩ AP_a`.
    pub fn is_local(&self) -> bool {
        self.agents.ids().all(|a| {
            let mut first: HashMap<usize, usize> = HashMap::new();
            (0..self.num_states()).all(|s| {
                let b = self.block(a, s);
                match first.get(&b) {
                    Some(&t) => self.local_valuation(a, s) == self.local_valuation(a, t),
                    None => {
                        first.insert(b, s);
                        true
                    }
                }
            })
        })
    }
}

fn canonical_blocks(ids: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    ids.iter()
        .map(|&b| {
            let next = map.len();
            *map.entry(b).or_insert(next)
        })
        .collect()
}

/// `M, s ⊨_K φ` under S5 semantics.
pub fn check_kripke(m: &KripkeModel, state: usize, phi: &Formula) -> Result<bool, CheckError> {
    if state >= m.num_states() {
        return Err(CheckError::FacetNotInModel(state));
    }
    Ok(satisfying_states(m, phi)?[state])
}

pub fn satisfying_states(m: &KripkeModel, phi: &Formula) -> Result<Vec<bool>, CheckError> {
    validate_signature(phi, m.agents.len())?;
    Ok(sat(m, phi))
}

fn sat(m: &KripkeModel, phi: &Formula) -> Vec<bool> {
    let ns = m.num_states();
    match phi {
        Formula::True => vec![true; ns],
        Formula::False => vec![false; ns],
        Formula::Atom(atom) => m.valuation.iter().map(|v| v.contains(atom)).collect(),
        Formula::Not(f) => sat(m, f).into_iter().map(|b| !b).collect(),
        Formula::And(l, r) => pairwise(sat(m, l), sat(m, r), |a, b| a && b),
        Formula::Or(l, r) => pairwise(sat(m, l), sat(m, r), |a, b| a || b),
        Formula::Implies(l, r) => pairwise(sat(m, l), sat(m, r), |a, b| !a || b),
        Formula::Knows(a, f) => knows(m, *a, &sat(m, f)),
        Formula::Everyone(group, f) => {
            let inner = sat(m, f);
            group.iter().fold(vec![true; ns], |acc, &a| {
                pairwise(acc, knows(m, a, &inner), |x, y| x && y)
            })
        }
        Formula::Common(group, f) => {
            let inner = sat(m, f);
            let reach = group_reachability(m, group);
            let nc = reach.iter().max().map_or(0, |k| k + 1);
            let mut ok = vec![true; nc];
            for (s, &k) in reach.iter().enumerate() {
                ok[k] &= inner[s];
            }
            reach.iter().map(|&k| ok[k]).collect()
        }
    }
}

fn knows(m: &KripkeModel, a: AgentId, inner: &[bool]) -> Vec<bool> {
    let ids = &m.blocks[a.0];
    let nb = ids.iter().max().map_or(0, |b| b + 1);
    let mut ok = vec![true; nb];
    for (s, &b) in ids.iter().enumerate() {
        ok[b] &= inner[s];
    }
    ids.iter().map(|&b| ok[b]).collect()
}

/// Classes of the reflexive-transitive closure of `⋃_{a∈B} ∼_a`, found by
/// breadth-first search.
pub fn group_reachability(m: &KripkeModel, group: &[AgentId]) -> Vec<usize> {
    let ns = m.num_states();
    let parts: Vec<Vec<Vec<usize>>> = group.iter().map(|&a| m.partition(a)).collect();
    let mut comp = vec![usize::MAX; ns];
    let mut next = 0;
    for start in 0..ns {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for (gi, &a) in group.iter().enumerate() {
                for &t in &parts[gi][m.block(a, s)] {
                    if comp[t] == usize::MAX {
                        comp[t] = next;
                        queue.push_back(t);
                    }
                }
            }
        }
        next += 1;
    }
    comp
}

fn pairwise(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// Kripke action model `⟨T, ∼, pre⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeActionModel {
    pub agents: Agents,
    pub points: Vec<String>,
    /// `blocks[a][t]`: block of action point `t` under `∼_a`.
    pub blocks: Vec<Vec<usize>>,
    pub preconditions: Vec<Formula>,
}

/// Product update `M[𝒜]`: pairs `(s,t)` with `M,s ⊨ pre(t)`, related when
/// both components are related, valuation copied from `s`. An empty result
/// is returned as a model with no states.
pub fn product_update_kripke(
    m: &KripkeModel,
    action: &KripkeActionModel,
) -> Result<KripkeModel, CheckError> {
    let mut pairs = Vec::new();
    for (t, pre) in action.preconditions.iter().enumerate() {
        let holds = satisfying_states(m, pre)?;
        for (s, &ok) in holds.iter().enumerate() {
            if ok {
                pairs.push((s, t));
            }
        }
    }
    pairs.sort();
    let states = pairs
        .iter()
        .map(|&(s, t)| format!("({},{})", m.states[s], action.points[t]))
        .collect();
    let blocks = m
        .agents
        .ids()
        .map(|a| {
            let mut key: HashMap<(usize, usize), usize> = HashMap::new();
            pairs
                .iter()
                .map(|&(s, t)| {
                    let next = key.len();
                    *key.entry((m.block(a, s), action.blocks[a.0][t]))
                        .or_insert(next)
                })
                .collect()
        })
        .collect();
    let valuation = pairs.iter().map(|&(s, _)| m.valuation[s].clone()).collect();
    Ok(
        KripkeModel::from_block_ids(m.agents.clone(), states, blocks, valuation)
            .expect("product of valid models is valid"),
    )
}

/// State bijection `a → b` preserving valuations and every `∼_a`.
pub fn find_isomorphism(a: &KripkeModel, b: &KripkeModel) -> Option<Vec<usize>> {
    if a.agents != b.agents || a.num_states() != b.num_states() {
        return None;
    }
    let ns = a.num_states();
    let sizes = |m: &KripkeModel, s: usize| -> Vec<usize> {
        m.agents
            .ids()
            .map(|ag| {
                m.blocks[ag.0]
                    .iter()
                    .filter(|&&x| x == m.block(ag, s))
                    .count()
            })
            .collect()
    };
    let candidates: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let sa = sizes(a, s);
            (0..ns)
                .filter(|&t| a.valuation[s] == b.valuation[t] && sizes(b, t) == sa)
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    // visit states so each one is related to an earlier one where possible
    let mut order = Vec::with_capacity(ns);
    let mut placed = vec![false; ns];
    let all = a.agents.all();
    let reach = group_reachability(a, &all);
    for start in 0..ns {
        if placed[start] {
            continue;
        }
        for s in 0..ns {
            if reach[s] == reach[start] && !placed[s] {
                placed[s] = true;
                order.push(s);
            }
        }
    }
    let n_agents = a.agents.len();
    let mut state_map = vec![usize::MAX; ns];
    let mut used = vec![false; ns];
    let mut fwd: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n_agents];
    let mut back: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n_agents];

    fn extend(
        a: &KripkeModel,
        b: &KripkeModel,
        order: &[usize],
        depth: usize,
        candidates: &[Vec<usize>],
        state_map: &mut [usize],
        used: &mut [bool],
        fwd: &mut [HashMap<usize, usize>],
        back: &mut [HashMap<usize, usize>],
    ) -> bool {
        let Some(&s) = order.get(depth) else {
            return true;
        };
        for &t in &candidates[s] {
            if used[t] {
                continue;
            }
            let ok = a.agents.ids().all(|ag| {
                let (bs, bt) = (a.block(ag, s), b.block(ag, t));
                match (fwd[ag.0].get(&bs), back[ag.0].get(&bt)) {
                    (None, None) => true,
                    (Some(&x), Some(&y)) => x == bt && y == bs,
                    _ => false,
                }
            });
            if !ok {
                continue;
            }
            let mut added = Vec::new();
            for ag in a.agents.ids() {
                let (bs, bt) = (a.block(ag, s), b.block(ag, t));
                if !fwd[ag.0].contains_key(&bs) {
                    fwd[ag.0].insert(bs, bt);
                    back[ag.0].insert(bt, bs);
                    added.push((ag.0, bs, bt));
                }
            }
            state_map[s] = t;
            used[t] = true;
            if extend(
                a,
                b,
                order,
                depth + 1,
                candidates,
                state_map,
                used,
                fwd,
                back,
            ) {
                return true;
            }
            used[t] = false;
            state_map[s] = usize::MAX;
            for (ag, bs, bt) in added {
                fwd[ag].remove(&bs);
                back[ag].remove(&bt);
            }
        }
        false
    }

    if extend(
        a,
        b,
        &order,
        0,
        &candidates,
        &mut state_map,
        &mut used,
        &mut fwd,
        &mut back,
    ) {
        Some(state_map)
    } else {
        None
    }
}

/// Connected components of the union of all relations, via union-find.
pub fn components(m: &KripkeModel) -> Vec<usize> {
    let mut uf = UnionFind::new(m.num_states());
    for ids in &m.blocks {
        let mut first: HashMap<usize, usize> = HashMap::new();
        for (s, &b) in ids.iter().enumerate() {
            match first.get(&b) {
                Some(&t) => uf.union(s, t),
                None => {
                    first.insert(b, s);
                }
            }
        }
    }
    uf.labels()
}
