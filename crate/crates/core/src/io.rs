//! JSON formats for simplicial models, Kripke models and action models.
//!
//! Simplicial model:
//! `{"agents": [..], "vertices": [{"id", "color", "label": {agent: [values]}}], "facets": [[ids]]}`.
//! A label may also be written as a bare value or a list of values of the
//! vertex's own color. Action models add `"preconditions": {facet index: formula}`;
//! missing entries default to `true`. Protocol models may carry
//! `"projection": {vertex id: input vertex id}`.
//!
//! Kripke model:
//! `{"agents": [..], "states": [..], "relations": {agent: [[state]]}, "valuation": {state: {agent: [values]}}}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::complex::{Agents, Atom, ChromaticComplex, Label, ModelError, SimplicialModel, Vertex};
use crate::del::{ActionModel, DelError};
use crate::kripke::{KripkeError, KripkeModel};
use crate::logic::{parse, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error("precondition of facet {facet}: {source}")]
    Precondition { facet: String, source: ParseError },
    #[error(transparent)]
    Del(#[from] DelError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub agents: Vec<String>,
    pub vertices: Vec<VertexJson>,
    pub facets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preconditions: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: String,
    pub color: String,
    #[serde(default)]
    pub label: Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KripkeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<String>>,
    pub states: Vec<String>,
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, BTreeMap<String, Json>>,
}

fn scalar(v: &Json) -> Result<String, IoError> {
    match v {
        Json::String(s) => Ok(s.clone()),
        Json::Number(n) => Ok(n.to_string()),
        Json::Bool(b) => Ok(b.to_string()),
        other => Err(IoError::Schema(format!("expected a value, got {other}"))),
    }
}

fn values(v: &Json) -> Result<Vec<String>, IoError> {
    match v {
        Json::Null => Ok(Vec::new()),
        Json::Array(items) => items.iter().map(scalar).collect(),
        other => Ok(vec![scalar(other)?]),
    }
}

fn vertex_label(v: &VertexJson, agents: &Agents) -> Result<Label, IoError> {
    match &v.label {
        Json::Object(map) => {
            let mut label = Label::new();
            for (agent, vals) in map {
                agents.require(agent)?;
                let vals = values(vals)?;
                if agent != &v.color && !vals.is_empty() {
                    return Err(ModelError::LabelLocality {
                        vertex: v.id.clone(),
                        color: v.color.clone(),
                        agent: agent.clone(),
                    }
                    .into());
                }
                label.extend(vals);
            }
            Ok(label)
        }
        other => Ok(values(other)?.into_iter().collect()),
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
}

pub fn model_from_spec(spec: &ModelJson) -> Result<SimplicialModel, IoError> {
    let agents = Agents::new(spec.agents.iter().cloned())?;
    let mut index = HashMap::new();
    let mut vertices = Vec::with_capacity(spec.vertices.len());
    let mut labels = Vec::with_capacity(spec.vertices.len());
    for v in &spec.vertices {
        let color = agents.require(&v.color)?;
        if index.insert(v.id.clone(), vertices.len()).is_some() {
            return Err(ModelError::DuplicateVertex(v.id.clone()).into());
        }
        labels.push(vertex_label(v, &agents)?);
        vertices.push(Vertex {
            id: v.id.clone(),
            color,
        });
    }
    let facets = spec
        .facets
        .iter()
        .map(|f| {
            f.iter()
                .map(|id| {
                    index
                        .get(id)
                        .copied()
                        .ok_or_else(|| ModelError::UnknownVertex(id.clone()))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let complex = ChromaticComplex::new(agents, vertices, facets)?;
    Ok(SimplicialModel::new(complex, labels)?)
}

pub fn model_from_json(text: &str) -> Result<SimplicialModel, IoError> {
    model_from_spec(&parse_json(text)?)
}

fn complex_spec(c: &ChromaticComplex, labels: Option<&[Label]>) -> ModelJson {
    let agents = c.agents();
    ModelJson {
        agents: agents.names().to_vec(),
        vertices: c
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let color = agents.name(v.color).to_string();
                let label = match labels {
                    Some(l) => json!({ color.clone(): l[i].iter().collect::<Vec<_>>() }),
                    None => json!({}),
                };
                VertexJson {
                    id: v.id.clone(),
                    color,
                    label,
                }
            })
            .collect(),
        facets: c
            .facets()
            .iter()
            .map(|f| {
                f.vertices()
                    .iter()
                    .map(|&v| c.vertex(v).id.clone())
                    .collect()
            })
            .collect(),
        preconditions: None,
        projection: None,
    }
}

pub fn model_to_spec(m: &SimplicialModel) -> ModelJson {
    complex_spec(m.complex(), Some(m.labels()))
}

pub fn model_to_json(m: &SimplicialModel) -> String {
    to_pretty(&model_to_spec(m))
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// A protocol or task model together with its projection onto the inputs.
pub fn projected_model_to_json(
    m: &SimplicialModel,
    inputs: &SimplicialModel,
    map: &[usize],
) -> String {
    let mut spec = model_to_spec(m);
    spec.projection = Some(
        map.iter()
            .enumerate()
            .map(|(v, &u)| {
                (
                    m.complex().vertex(v).id.clone(),
                    inputs.complex().vertex(u).id.clone(),
                )
            })
            .collect(),
    );
    to_pretty(&spec)
}

pub fn action_from_json(text: &str) -> Result<ActionModel, IoError> {
    let spec: ModelJson = parse_json(text)?;
    let model = model_from_spec(&spec)?;
    let agents = model.agents();
    let pres = spec.preconditions.unwrap_or_default();
    if let Some(k) = pres
        .keys()
        .find(|k| k.parse::<usize>().map_or(true, |i| i >= model.num_facets()))
    {
        return Err(IoError::Schema(format!(
            "precondition for unknown facet `{k}`"
        )));
    }
    let preconditions = (0..model.num_facets())
        .map(|i| match pres.get(&i.to_string()) {
            Some(text) => parse(text, agents).map_err(|source| IoError::Precondition {
                facet: i.to_string(),
                source,
            }),
            None => Ok(crate::logic::Formula::True),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ActionModel::new(model.complex().clone(), preconditions)?)
}

pub fn action_to_json(a: &ActionModel) -> String {
    let c = a.complex();
    let mut spec = complex_spec(c, None);
    spec.preconditions = Some(
        a.preconditions()
            .iter()
            .enumerate()
            .map(|(i, p)| (i.to_string(), p.display(c.agents()).to_string()))
            .collect(),
    );
    to_pretty(&spec)
}

pub fn kripke_from_spec(spec: &KripkeJson) -> Result<KripkeModel, IoError> {
    let names = match &spec.agents {
        Some(a) => a.clone(),
        None => spec.relations.keys().cloned().collect(),
    };
    let agents = Agents::new(names)?;
    let index: HashMap<&str, usize> = spec
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let state = |s: &str| {
        index
            .get(s)
            .copied()
            .ok_or_else(|| KripkeError::UnknownState(s.to_string()))
    };
    if let Some(a) = spec.relations.keys().find(|a| agents.id(a).is_none()) {
        return Err(ModelError::UnknownAgent(a.clone()).into());
    }
    let partitions = agents
        .names()
        .iter()
        .map(|a| match spec.relations.get(a) {
            Some(blocks) => blocks
                .iter()
                .map(|b| b.iter().map(|s| state(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>(),
            // an agent without a relation distinguishes every state
            None => Ok((0..spec.states.len()).map(|s| vec![s]).collect()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut valuation = vec![BTreeSet::new(); spec.states.len()];
    for (s, per_agent) in &spec.valuation {
        let si = state(s)?;
        for (a, vals) in per_agent {
            let a = agents.require(a)?;
            for v in values(vals)? {
                valuation[si].insert(Atom::new(a, v));
            }
        }
    }
    Ok(KripkeModel::from_partitions(
        agents,
        spec.states.clone(),
        partitions,
        valuation,
    )?)
}

pub fn kripke_from_json(text: &str) -> Result<KripkeModel, IoError> {
    kripke_from_spec(&parse_json(text)?)
}

pub fn kripke_to_spec(k: &KripkeModel) -> KripkeJson {
    let agents = k.agents();
    KripkeJson {
        agents: Some(agents.names().to_vec()),
        states: k.states().to_vec(),
        relations: agents
            .ids()
            .map(|a| {
                (
                    agents.name(a).to_string(),
                    k.partition(a)
                        .into_iter()
                        .map(|b| b.into_iter().map(|s| k.states()[s].clone()).collect())
                        .collect(),
                )
            })
            .collect(),
        valuation: (0..k.num_states())
            .map(|s| {
                let mut per: BTreeMap<String, Vec<String>> = BTreeMap::new();
                for atom in k.valuation(s) {
                    per.entry(agents.name(atom.agent).to_string())
                        .or_default()
                        .push(atom.value.clone());
                }
                (
                    k.states()[s].clone(),
                    per.into_iter().map(|(a, v)| (a, json!(v))).collect(),
                )
            })
            .collect(),
    }
}

pub fn kripke_to_json(k: &KripkeModel) -> String {
    to_pretty(&kripke_to_spec(k))
}

/// Which of the two model formats a JSON document is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Simplicial,
    Kripke,
}

pub fn detect_format(text: &str) -> Result<Format, IoError> {
    let v: Json = parse_json(text)?;
    if v.get("states").is_some() {
        Ok(Format::Kripke)
    } else if v.get("facets").is_some() {
        Ok(Format::Simplicial)
    } else {
        Err(IoError::Schema(
            "expected a simplicial model (`facets`) or a Kripke model (`states`)".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{find_isomorphism, ModelBuilder};
    use crate::duality::to_kripke;

    fn square() -> SimplicialModel {
        let mut b = ModelBuilder::new(Agents::new(["g", "w"]).unwrap());
        for r in [["0", "0"], ["0", "1"], ["1", "1"], ["1", "0"]] {
            b.values_row(&r);
        }
        b.glue_by_label().build().unwrap()
    }

    #[test]
    fn model_round_trip() {
        let m = square();
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn kripke_round_trip() {
        let k = to_kripke(&square());
        let back = kripke_from_json(&kripke_to_json(&k)).unwrap();
        assert!(crate::kripke::find_isomorphism(&back, &k).is_some());
        assert_eq!(back.states(), k.states());
    }

    #[test]
    fn label_shorthands() {
        let text = r#"{"agents":["g","w"],
            "vertices":[{"id":"a","color":"g","label":"0"},{"id":"b","color":"w","label":[1]}],
            "facets":[["b","a"]]}"#;
        let m = model_from_json(text).unwrap();
        let expected = ModelBuilder::new(Agents::new(["g", "w"]).unwrap())
            .values_row(&["0", "1"])
            .build()
            .unwrap();
        assert!(find_isomorphism(&m, &expected).is_some());
    }

    #[test]
    fn errors_are_reported() {
        let non_chromatic = r#"{"agents":["g","w"],
            "vertices":[{"id":"a","color":"g"},{"id":"b","color":"g"}],
            "facets":[["a","b"]]}"#;
        assert!(matches!(
            model_from_json(non_chromatic),
            Err(IoError::Model(ModelError::NonChromatic { .. }))
        ));
        let foreign = r#"{"agents":["g","w"],
            "vertices":[{"id":"a","color":"g","label":{"w":["1"]}},{"id":"b","color":"w"}],
            "facets":[["a","b"]]}"#;
        assert!(matches!(
            model_from_json(foreign),
            Err(IoError::Model(ModelError::LabelLocality { .. }))
        ));
        assert!(matches!(model_from_json("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn action_round_trip() {
        let m = square();
        let a = crate::protocols::immediate_snapshot(&m).unwrap();
        let back = action_from_json(&action_to_json(&a)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn format_detection() {
        let m = square();
        assert_eq!(
            detect_format(&model_to_json(&m)).unwrap(),
            Format::Simplicial
        );
        assert_eq!(
            detect_format(&kripke_to_json(&to_kripke(&m))).unwrap(),
            Format::Kripke
        );
    }
}
