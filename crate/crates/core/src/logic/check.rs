//! Satisfaction on simplicial models.
//!
//! Truth is computed for all facets at once, bottom-up over the formula.
//! `K_a φ` holds at `X` iff φ holds on every facet through the `a`-vertex of
//! `X`; `C_B φ` holds iff φ holds on the whole component of `X` under
//! "shares a `B`-colored vertex".

use thiserror::Error;

use super::Formula;
use crate::complex::{facet_components, AgentId, SimplicialModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("FacetNotInModel: facet {0} does not exist")]
    FacetNotInModel(usize),
    #[error("UnknownAgent: agent #{0} is not in the model signature")]
    UnknownAgent(usize),
    #[error("empty agent group in modality")]
    EmptyGroup,
}

/// `M, X ⊨ φ`.
pub fn check(m: &SimplicialModel, facet: usize, phi: &Formula) -> Result<bool, CheckError> {
    if facet >= m.num_facets() {
        return Err(CheckError::FacetNotInModel(facet));
    }
    Ok(satisfying_facets(m, phi)?[facet])
}

/// Truth value of φ at every facet.
pub fn satisfying_facets(m: &SimplicialModel, phi: &Formula) -> Result<Vec<bool>, CheckError> {
    validate_signature(phi, m.agents().len())?;
    Ok(sat(m, phi))
}

pub(crate) fn validate_signature(phi: &Formula, n_agents: usize) -> Result<(), CheckError> {
    if let Some(a) = phi.agents().into_iter().find(|a| a.0 >= n_agents) {
        return Err(CheckError::UnknownAgent(a.0));
    }
    if has_empty_group(phi) {
        return Err(CheckError::EmptyGroup);
    }
    Ok(())
}

fn has_empty_group(phi: &Formula) -> bool {
    match phi {
        Formula::True | Formula::False | Formula::Atom(_) => false,
        Formula::Not(f) | Formula::Knows(_, f) => has_empty_group(f),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            has_empty_group(l) || has_empty_group(r)
        }
        Formula::Everyone(g, f) | Formula::Common(g, f) => g.is_empty() || has_empty_group(f),
    }
}

fn sat(m: &SimplicialModel, phi: &Formula) -> Vec<bool> {
    let nf = m.num_facets();
    match phi {
        Formula::True => vec![true; nf],
        Formula::False => vec![false; nf],
        Formula::Atom(atom) => m
            .facets()
            .iter()
            .map(|f| m.label(f.vertex(atom.agent)).contains(&atom.value))
            .collect(),
        Formula::Not(f) => sat(m, f).into_iter().map(|b| !b).collect(),
        Formula::And(l, r) => zip_with(sat(m, l), sat(m, r), |a, b| a && b),
        Formula::Or(l, r) => zip_with(sat(m, l), sat(m, r), |a, b| a || b),
        Formula::Implies(l, r) => zip_with(sat(m, l), sat(m, r), |a, b| !a || b),
        Formula::Knows(a, f) => knows(m, *a, &sat(m, f)),
        Formula::Everyone(group, f) => {
            let inner = sat(m, f);
            group.iter().fold(vec![true; nf], |acc, &a| {
                zip_with(acc, knows(m, a, &inner), |x, y| x && y)
            })
        }
        Formula::Common(group, f) => {
            let inner = sat(m, f);
            let comps = facet_components(m.complex(), group);
            let ncomp = comps.iter().max().map_or(0, |k| k + 1);
            let mut ok = vec![true; ncomp];
            for (x, &k) in comps.iter().enumerate() {
                ok[k] &= inner[x];
            }
            comps.iter().map(|&k| ok[k]).collect()
        }
    }
}

fn knows(m: &SimplicialModel, a: AgentId, inner: &[bool]) -> Vec<bool> {
    let inc = m.complex().incidence();
    m.facets()
        .iter()
        .map(|f| inc[f.vertex(a)].iter().all(|&y| inner[y]))
        .collect()
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}
