//! Task action models. A task facet assigns a decision to every agent and
//! carries a precondition over the inputs; vertices with the same agent and
//! decision are shared.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{AgentId, ChromaticComplex, SimplicialModel, Value, Vertex};
use crate::del::{product_update, ActionModel, DelError, Update};
use crate::logic::{parse, satisfying_facets, CheckError, Formula, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("invalid task parameter: {0}")]
    InvalidParameter(String),
    #[error("task has no facets")]
    EmptyTask,
    #[error("task schema: {0}")]
    Schema(String),
    #[error("task agents {task:?} differ from model agents {model:?}")]
    AgentMismatch {
        task: Vec<String>,
        model: Vec<String>,
    },
    #[error("task facet {facet} has no decision for agent `{agent}`")]
    MissingDecision { facet: usize, agent: String },
    #[error("task facet {facet} names unknown agent `{agent}`")]
    UnknownAgent { facet: usize, agent: String },
    #[error("task facet {0} repeats an earlier decision vector")]
    DuplicateFacet(usize),
    #[error("precondition of task facet {facet}: {source}")]
    Syntax { facet: usize, source: ParseError },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Del(#[from] DelError),
}

/// Non-fatal findings while loading a task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskWarning {
    UnsatisfiablePrecondition(usize),
}

impl std::fmt::Display for TaskWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskWarning::UnsatisfiablePrecondition(i) => {
                write!(
                    f,
                    "UnsatisfiablePrecondition: task facet {i} holds on no input facet"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    pub params: BTreeMap<String, String>,
    /// Decision per agent, per action facet.
    pub decisions: Vec<Vec<Value>>,
    pub action: ActionModel,
}

impl Task {
    /// `𝓘[𝒯]` with its projection onto the inputs.
    pub fn model(&self, inputs: &SimplicialModel) -> Result<Update, TaskError> {
        Ok(product_update(inputs, &self.action)?)
    }
}

/// `φ_v`: some agent started with `v`.
pub fn some_input(m: &SimplicialModel, v: &str) -> Formula {
    Formula::or_all(m.agents().ids().map(|a| Formula::atom(a, v)))
}

fn assemble(
    m: &SimplicialModel,
    name: &str,
    params: BTreeMap<String, String>,
    rows: Vec<(Vec<Value>, Formula)>,
    drop_unsatisfiable: bool,
) -> Result<(Task, Vec<TaskWarning>), TaskError> {
    let agents = m.agents().clone();
    let mut cache: HashMap<Formula, bool> = HashMap::new();
    let mut kept = Vec::new();
    let mut warnings = Vec::new();
    for (decisions, pre) in rows {
        let ok = match cache.get(&pre) {
            Some(&ok) => ok,
            None => {
                let ok = satisfying_facets(m, &pre)?.into_iter().any(|b| b);
                cache.insert(pre.clone(), ok);
                ok
            }
        };
        if !ok {
            if drop_unsatisfiable {
                continue;
            }
            warnings.push(TaskWarning::UnsatisfiablePrecondition(kept.len()));
        }
        kept.push((decisions, pre));
    }
    if kept.is_empty() {
        return Err(TaskError::EmptyTask);
    }
    let mut index: HashMap<(usize, Value), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(kept.len());
    let mut seen = HashSet::new();
    for (i, (decisions, _)) in kept.iter().enumerate() {
        if !seen.insert(decisions.clone()) {
            return Err(TaskError::DuplicateFacet(i));
        }
        let facet = decisions
            .iter()
            .enumerate()
            .map(|(a, d)| {
                *index.entry((a, d.clone())).or_insert_with(|| {
                    vertices.push(Vertex {
                        id: format!("{}:{}", agents.name(AgentId(a)), d),
                        color: AgentId(a),
                    });
                    vertices.len() - 1
                })
            })
            .collect();
        facets.push(facet);
    }
    let complex = ChromaticComplex::new(agents, vertices, facets)
        .expect("distinct decision vectors give distinct facets");
    let (decisions, pres): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
    let action = ActionModel::new(complex, pres)?;
    Ok((
        Task {
            name: name.to_string(),
            params,
            decisions,
            action,
        },
        warnings,
    ))
}

/// Every vector in `values^n`, lexicographic.
fn vectors(values: &[Value], n: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn sorted_values(values: &[Value]) -> Result<Vec<Value>, TaskError> {
    let set: BTreeSet<Value> = values.iter().cloned().collect();
    if set.is_empty() {
        return Err(TaskError::InvalidParameter("no values given".into()));
    }
    Ok(set.into_iter().collect())
}

/// At most `k` distinct decisions, each the input of some agent.
pub fn k_set_agreement(m: &SimplicialModel, values: &[Value], k: usize) -> Result<Task, TaskError> {
    let values = sorted_values(values)?;
    if k == 0 || k > values.len() {
        return Err(TaskError::InvalidParameter(format!(
            "k = {k} with {} values",
            values.len()
        )));
    }
    let rows = vectors(&values, m.agents().len())
        .into_iter()
        .filter_map(|d| {
            let distinct: BTreeSet<&Value> = d.iter().collect();
            (distinct.len() <= k).then(|| {
                let pre = Formula::and_all(distinct.iter().map(|v| some_input(m, v)));
                (d.clone(), pre)
            })
        })
        .collect();
    let params = BTreeMap::from([
        ("k".to_string(), k.to_string()),
        ("values".to_string(), values.join(",")),
    ]);
    Ok(assemble(m, &format!("{k}-set-agreement"), params, rows, true)?.0)
}

/// All agents decide the same input value.
pub fn consensus(m: &SimplicialModel, values: &[Value]) -> Result<Task, TaskError> {
    let mut t = k_set_agreement(m, values, 1)?;
    t.name = "consensus".into();
    t.params.remove("k");
    Ok(t)
}

/// Binary inputs; decisions are numerators `0..=n` of multiples of `1/n`,
/// at most one step apart and inside the range of the inputs.
pub fn approximate_agreement(m: &SimplicialModel, n: u32) -> Result<Task, TaskError> {
    if n == 0 {
        return Err(TaskError::InvalidParameter(
            "granularity must be at least 1".into(),
        ));
    }
    let steps: Vec<Value> = (0..=n).map(|i| i.to_string()).collect();
    let rows = vectors(&steps, m.agents().len())
        .into_iter()
        .filter_map(|d| {
            let nums: Vec<u32> = d.iter().map(|v| v.parse().expect("numerator")).collect();
            let (lo, hi) = (*nums.iter().min()?, *nums.iter().max()?);
            if hi - lo > 1 {
                return None;
            }
            let mut parts = Vec::new();
            if lo < n {
                parts.push(some_input(m, "0"));
            }
            if hi > 0 {
                parts.push(some_input(m, "1"));
            }
            Some((d, Formula::and_all(parts)))
        })
        .collect();
    let params = BTreeMap::from([("n".to_string(), n.to_string())]);
    Ok(assemble(m, "approximate-agreement", params, rows, true)?.0)
}

/// Decide your own input: one facet per input facet, pinned to it.
pub fn identity_task(m: &SimplicialModel) -> Result<Task, TaskError> {
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for x in 0..m.num_facets() {
        let d: Vec<Value> = m.facets()[x]
            .vertices()
            .iter()
            .map(|&v| m.label(v).iter().cloned().collect::<Vec<_>>().join("+"))
            .collect();
        if seen.insert(d.clone()) {
            let pre = Formula::and_all(m.facet_atoms(x).into_iter().map(Formula::Atom));
            rows.push((d, pre));
        }
    }
    Ok(assemble(m, "identity", BTreeMap::new(), rows, false)?.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub agents: Vec<String>,
    pub facets: Vec<TaskFacetSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskFacetSpec {
    pub decisions: BTreeMap<String, serde_json::Value>,
    pub pre: String,
}

/// A task read from JSON, plus warnings for preconditions that hold nowhere
/// on `m`.
pub fn custom_task(m: &SimplicialModel, json: &str) -> Result<(Task, Vec<TaskWarning>), TaskError> {
    let spec: TaskSpec =
        serde_json::from_str(json).map_err(|e| TaskError::Schema(e.to_string()))?;
    from_spec(m, &spec)
}

pub fn from_spec(
    m: &SimplicialModel,
    spec: &TaskSpec,
) -> Result<(Task, Vec<TaskWarning>), TaskError> {
    let agents = m.agents();
    if spec.agents != agents.names() {
        return Err(TaskError::AgentMismatch {
            task: spec.agents.clone(),
            model: agents.names().to_vec(),
        });
    }
    if spec.facets.is_empty() {
        return Err(TaskError::EmptyTask);
    }
    let mut rows = Vec::with_capacity(spec.facets.len());
    for (i, f) in spec.facets.iter().enumerate() {
        if let Some(agent) = f.decisions.keys().find(|k| agents.id(k).is_none()) {
            return Err(TaskError::UnknownAgent {
                facet: i,
                agent: agent.clone(),
            });
        }
        let decisions = agents
            .names()
            .iter()
            .map(|a| match f.decisions.get(a) {
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(serde_json::Value::Number(n)) => Ok(n.to_string()),
                Some(other) => Err(TaskError::Schema(format!(
                    "decision of `{a}` in facet {i} must be a string or number, got {other}"
                ))),
                None => Err(TaskError::MissingDecision {
                    facet: i,
                    agent: a.clone(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pre = parse(&f.pre, agents).map_err(|source| TaskError::Syntax { facet: i, source })?;
        rows.push((decisions, pre));
    }
    assemble(m, &spec.name, BTreeMap::new(), rows, false)
}

/// JSON form of a task, readable by `custom_task`.
pub fn to_spec(t: &Task) -> TaskSpec {
    let agents = t.action.complex().agents();
    TaskSpec {
        name: t.name.clone(),
        agents: agents.names().to_vec(),
        facets: t
            .decisions
            .iter()
            .zip(t.action.preconditions())
            .map(|(d, pre)| TaskFacetSpec {
                decisions: agents
                    .names()
                    .iter()
                    .cloned()
                    .zip(d.iter().map(|v| serde_json::Value::String(v.clone())))
                    .collect(),
                pre: pre.display(agents).to_string(),
            })
            .collect(),
    }
}
