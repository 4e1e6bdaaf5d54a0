//! Immediate-snapshot action models and their iteration.
//!
//! An execution of one round is an ordered partition of the agents into
//! concurrency classes. Agent `a` in class `c_j` sees everything written by
//! `c_1 ∪ … ∪ c_j`. After `r` rounds an agent's local state is the nested
//! tuple of the states it saw; action vertices with equal states are shared,
//! which glues the subdivided facets along their common boundary.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{AgentId, Agents, ChromaticComplex, SimplicialModel, Vertex};
use crate::del::{product_update, ActionModel, DelError, Update};
use crate::logic::Formula;

/// Facet bound on generated protocol complexes.
pub const DEFAULT_FACET_LIMIT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("AgentNotInPartition: agent {0} does not occur in the partition")]
    AgentNotInPartition(usize),
    #[error("facets `{0}` and `{1}` carry the same atoms; snapshot views cannot tell them apart")]
    IndistinguishableFacets(String, String),
    #[error("ResourceLimit: {facets} facets exceed the limit of {limit}")]
    ResourceLimit { facets: usize, limit: usize },
    #[error(transparent)]
    Del(#[from] DelError),
}

/// Ordered partition `c_1, …, c_m` of the agent set; classes are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequentialPartition(pub Vec<Vec<AgentId>>);

impl SequentialPartition {
    pub fn classes(&self) -> &[Vec<AgentId>] {
        &self.0
    }

    /// Index of the class containing `a`.
    pub fn class_of(&self, a: AgentId) -> Option<usize> {
        self.0.iter().position(|c| c.contains(&a))
    }

    pub fn display(&self, agents: &Agents) -> String {
        let classes: Vec<String> = self
            .0
            .iter()
            .map(|c| {
                let names: Vec<&str> = c.iter().map(|&a| agents.name(a)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect();
        format!("[{}]", classes.join(","))
    }
}

impl fmt::Display for SequentialPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes: Vec<String> = self
            .0
            .iter()
            .map(|c| {
                let ids: Vec<String> = c.iter().map(|a| a.0.to_string()).collect();
                format!("{{{}}}", ids.join(","))
            })
            .collect();
        write!(f, "[{}]", classes.join(","))
    }
}

/// All ordered partitions of `agents`, fewest classes first, then
/// lexicographic by classes.
pub fn ordered_partitions(agents: &[AgentId]) -> Vec<SequentialPartition> {
    fn rec(rest: &[AgentId], prefix: &mut Vec<Vec<AgentId>>, out: &mut Vec<SequentialPartition>) {
        if rest.is_empty() {
            out.push(SequentialPartition(prefix.clone()));
            return;
        }
        let n = rest.len();
        for mask in 1u64..(1 << n) {
            let (first, remaining): (Vec<_>, Vec<_>) = rest
                .iter()
                .enumerate()
                .partition(|(i, _)| mask & (1 << i) != 0);
            prefix.push(first.into_iter().map(|(_, &a)| a).collect());
            let remaining: Vec<AgentId> = remaining.into_iter().map(|(_, &a)| a).collect();
            rec(&remaining, prefix, out);
            prefix.pop();
        }
    }
    let mut sorted = agents.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(&sorted, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

/// `Aview_a(c)`: agents in `a`'s class or an earlier one, sorted.
pub fn aview(a: AgentId, c: &SequentialPartition) -> Result<Vec<AgentId>, ProtocolError> {
    let j = c
        .class_of(a)
        .ok_or(ProtocolError::AgentNotInPartition(a.0))?;
    let mut seen: Vec<AgentId> = c.0[..=j].iter().flatten().copied().collect();
    seen.sort();
    Ok(seen)
}

/// What `a` learns in one round at facet `x`: the label of every agent it
/// sees, `None` for agents it does not see.
pub fn view(
    m: &SimplicialModel,
    x: usize,
    a: AgentId,
    c: &SequentialPartition,
) -> Result<Vec<Option<BTreeSet<String>>>, ProtocolError> {
    let seen = aview(a, c)?;
    let f = &m.facets()[x];
    Ok(m.agents()
        .ids()
        .map(|b| seen.contains(&b).then(|| m.label(f.vertex(b)).clone()))
        .collect())
}

/// Interned local states of one round: id → (agent, [(seen agent, previous state)]).
#[derive(Default)]
struct Round {
    index: HashMap<Vec<(usize, usize)>, usize>,
    names: Vec<String>,
}

impl Round {
    fn intern(&mut self, key: Vec<(usize, usize)>, prev: &[String], agents: &Agents) -> usize {
        let next = self.names.len();
        *self.index.entry(key).or_insert_with_key(|key| {
            let parts: Vec<String> = key
                .iter()
                .map(|&(b, s)| format!("{}={}", agents.name(AgentId(b)), prev[s]))
                .collect();
            self.names.push(format!("({})", parts.join(",")));
            next
        })
    }
}

/// `𝒮ʳ` over `m` as one action model: one action per input facet and
/// sequence of `r` ordered partitions. The precondition of an action is the
/// conjunction of its input facet's atoms.
pub fn iterated_immediate_snapshot(
    m: &SimplicialModel,
    rounds: usize,
) -> Result<ActionModel, ProtocolError> {
    iterated_with_limit(m, rounds, DEFAULT_FACET_LIMIT)
}

/// `𝒮` over `m`.
pub fn immediate_snapshot(m: &SimplicialModel) -> Result<ActionModel, ProtocolError> {
    iterated_immediate_snapshot(m, 1)
}

fn require_distinct_facets(m: &SimplicialModel) -> Result<(), ProtocolError> {
    let mut seen: HashMap<_, usize> = HashMap::new();
    for x in 0..m.num_facets() {
        if let Some(&y) = seen.get(&m.facet_atoms(x)) {
            let names: Vec<String> = m.facet_names();
            return Err(ProtocolError::IndistinguishableFacets(
                names[y].clone(),
                names[x].clone(),
            ));
        }
        seen.insert(m.facet_atoms(x), x);
    }
    Ok(())
}

fn iterated_with_limit(
    m: &SimplicialModel,
    rounds: usize,
    limit: usize,
) -> Result<ActionModel, ProtocolError> {
    require_distinct_facets(m)?;
    let agents = m.agents().clone();
    let n = agents.len();
    let partitions = ordered_partitions(&agents.all());
    let total = (partitions.len() as u128)
        .checked_pow(rounds as u32)
        .and_then(|k| k.checked_mul(m.num_facets() as u128))
        .unwrap_or(u128::MAX);
    if total > limit as u128 {
        return Err(ProtocolError::ResourceLimit {
            facets: usize::try_from(total).unwrap_or(usize::MAX),
            limit,
        });
    }
    let views: Vec<Vec<Vec<usize>>> = partitions
        .iter()
        .map(|c| {
            agents
                .ids()
                .map(|a| {
                    aview(a, c)
                        .expect("partition covers agents")
                        .iter()
                        .map(|b| b.0)
                        .collect()
                })
                .collect()
        })
        .collect();

    // round 0 states are the input vertices themselves
    let base: Vec<String> = m
        .complex()
        .vertices()
        .iter()
        .map(|v| v.id.clone())
        .collect();
    let mut names: Vec<Vec<String>> = vec![base];
    let mut rounds_tables: Vec<Round> = (0..rounds).map(|_| Round::default()).collect();

    let mut final_states: Vec<(usize, Vec<usize>)> = Vec::new();
    for x in 0..m.num_facets() {
        let start = m.facets()[x].vertices().to_vec();
        let mut frontier = vec![start];
        for (k, table) in rounds_tables.iter_mut().enumerate() {
            let prev = &names[k];
            let mut next = Vec::with_capacity(frontier.len() * views.len());
            for state in &frontier {
                for view in &views {
                    let s: Vec<usize> = (0..n)
                        .map(|a| {
                            let key = view[a].iter().map(|&b| (b, state[b])).collect();
                            table.intern(key, prev, &agents)
                        })
                        .collect();
                    next.push(s);
                }
            }
            frontier = next;
            if names.len() == k + 1 {
                names.push(Vec::new());
            }
            names[k + 1] = table.names.clone();
        }
        final_states.extend(frontier.into_iter().map(|s| (x, s)));
    }

    let last = &names[rounds];
    let mut vertex_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(final_states.len());
    let mut preconditions = Vec::with_capacity(final_states.len());
    let pres: Vec<Formula> = (0..m.num_facets())
        .map(|x| Formula::and_all(m.facet_atoms(x).into_iter().map(Formula::Atom)))
        .collect();
    for (x, state) in final_states {
        let facet = state
            .iter()
            .enumerate()
            .map(|(a, &s)| {
                *vertex_of.entry((a, s)).or_insert_with(|| {
                    vertices.push(Vertex {
                        id: format!("{}:{}", agents.name(AgentId(a)), last[s]),
                        color: AgentId(a),
                    });
                    vertices.len() - 1
                })
            })
            .collect();
        facets.push(facet);
        preconditions.push(pres[x].clone());
    }
    let complex = ChromaticComplex::new(agents, vertices, facets)
        .expect("distinct executions give distinct views");
    Ok(ActionModel::new(complex, preconditions)?)
}

/// `𝓘[𝒮ʳ]` with its projection onto `m`; `rounds = 0` is the identity.
pub fn protocol_model(
    m: &SimplicialModel,
    rounds: usize,
    limit: usize,
) -> Result<Update, ProtocolError> {
    if rounds == 0 {
        return Ok(Update::identity(Arc::new(m.clone())));
    }
    let action = iterated_with_limit(m, rounds, limit)?;
    Ok(product_update(m, &action)?)
}
