//! Pure chromatic simplicial complexes and simplicial models.
//!
//! A complex stores only its facets. Because every facet of a pure chromatic
//! complex has exactly one vertex per agent, a [`Facet`] is a vector indexed
//! by agent: `facet[a]` is the vertex of color `a`. Lower faces are derived
//! on demand.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Index of an agent in its [`Agents`] list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

/// Atomic proposition value. Values are opaque tokens compared literally.
pub type Value = String;

/// Label of a vertex: the values held by the vertex's own agent.
///
/// Locality (`ℓ(v) ⊆ AP_χ(v)`) is structural here: a label only stores values,
/// the agent is always the vertex color.
pub type Label = BTreeSet<Value>;

/// Atomic proposition `p[agent,value]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub agent: AgentId,
    pub value: Value,
}

impl Atom {
    pub fn new(agent: AgentId, value: impl Into<Value>) -> Self {
        Atom {
            agent,
            value: value.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("agent list is empty")]
    EmptyAgents,
    #[error("duplicate agent name `{0}`")]
    DuplicateAgent(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("NonChromatic: facet {facet} has two vertices colored `{agent}`")]
    NonChromatic { facet: usize, agent: String },
    #[error("NonPure: facet {facet} has {found} vertices, expected {expected}")]
    NonPure {
        facet: usize,
        expected: usize,
        found: usize,
    },
    #[error("NonPure: vertex `{0}` lies in no facet")]
    OrphanVertex(String),
    #[error(
        "LabelLocality: vertex `{vertex}` colored `{color}` is labeled with an atom of `{agent}`"
    )]
    LabelLocality {
        vertex: String,
        color: String,
        agent: String,
    },
    #[error("MergeConflict: cannot identify {left} with {right}: {reason}")]
    MergeConflict {
        left: String,
        right: String,
        reason: String,
    },
    #[error("duplicate facet {0}")]
    DuplicateFacet(usize),
    #[error("label table has {labels} entries for {vertices} vertices")]
    LabelCount { labels: usize, vertices: usize },
    #[error("no facet matches `{0}`")]
    NoSuchFacet(String),
    #[error("facet selector `{0}` is ambiguous")]
    AmbiguousFacet(String),
}

/// The finite, ordered agent set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Agents {
    names: Vec<String>,
}

impl Agents {
    pub fn new<I, S>(names: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ModelError::EmptyAgents);
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(ModelError::DuplicateAgent(n.clone()));
            }
        }
        Ok(Agents { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, a: AgentId) -> &str {
        &self.names[a.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<AgentId> {
        self.names.iter().position(|n| n == name).map(AgentId)
    }

    pub fn require(&self, name: &str) -> Result<AgentId, ModelError> {
        self.id(name)
            .ok_or_else(|| ModelError::UnknownAgent(name.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.names.len()).map(AgentId)
    }

    pub fn all(&self) -> Vec<AgentId> {
        self.ids().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    pub color: AgentId,
}

/// A facet, stored as one vertex index per agent (`facet[a]` has color `a`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet(pub Vec<usize>);

impl Facet {
    pub fn vertex(&self, a: AgentId) -> usize {
        self.0[a.0]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Agents whose vertex is shared by both facets (`χ(X ∩ Y)`).
    pub fn shared_colors(&self, other: &Facet) -> Vec<AgentId> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter(|(_, (u, v))| u == v)
            .map(|(i, _)| AgentId(i))
            .collect()
    }
}

/// Pure chromatic simplicial complex, stored by its facets.
#[derive(Debug)]
pub struct ChromaticComplex {
    agents: Agents,
    vertices: Vec<Vertex>,
    facets: Vec<Facet>,
    incidence: OnceLock<Vec<Vec<usize>>>,
}

impl Clone for ChromaticComplex {
    fn clone(&self) -> Self {
        ChromaticComplex {
            agents: self.agents.clone(),
            vertices: self.vertices.clone(),
            facets: self.facets.clone(),
            incidence: OnceLock::new(),
        }
    }
}

impl PartialEq for ChromaticComplex {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents
            && self.vertices == other.vertices
            && self.facets == other.facets
    }
}

impl Eq for ChromaticComplex {}

impl ChromaticComplex {
    /// Validates and builds a complex. Facets are given as unordered vertex
    /// index lists; they are reordered by color.
    pub fn new(
        agents: Agents,
        vertices: Vec<Vertex>,
        facets: Vec<Vec<usize>>,
    ) -> Result<Self, ModelError> {
        let n = agents.len();
        let mut ids = HashSet::new();
        for v in &vertices {
            if v.color.0 >= n {
                return Err(ModelError::UnknownAgent(format!("#{}", v.color.0)));
            }
            if !ids.insert(v.id.as_str()) {
                return Err(ModelError::DuplicateVertex(v.id.clone()));
            }
        }
        let mut out = Vec::with_capacity(facets.len());
        let mut seen = HashSet::new();
        let mut used = vec![false; vertices.len()];
        for (fi, raw) in facets.into_iter().enumerate() {
            let mut slots = vec![usize::MAX; n];
            for &v in &raw {
                let vert = vertices
                    .get(v)
                    .ok_or_else(|| ModelError::UnknownVertex(format!("#{v}")))?;
                let c = vert.color.0;
                if slots[c] != usize::MAX {
                    return Err(ModelError::NonChromatic {
                        facet: fi,
                        agent: agents.names[c].clone(),
                    });
                }
                slots[c] = v;
            }
            if raw.len() != n {
                return Err(ModelError::NonPure {
                    facet: fi,
                    expected: n,
                    found: raw.len(),
                });
            }
            for &v in &slots {
                used[v] = true;
            }
            let facet = Facet(slots);
            if !seen.insert(facet.clone()) {
                return Err(ModelError::DuplicateFacet(fi));
            }
            out.push(facet);
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(ModelError::OrphanVertex(vertices[i].id.clone()));
        }
        Ok(ChromaticComplex {
            agents,
            vertices,
            facets: out,
            incidence: OnceLock::new(),
        })
    }

    pub fn agents(&self) -> &Agents {
        &self.agents
    }

    /// Dimension `n = |A| - 1`.
    pub fn dimension(&self) -> usize {
        self.agents.len() - 1
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, i: usize) -> &Facet {
        &self.facets[i]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// For each vertex, the facets containing it (ascending).
    pub fn incidence(&self) -> &[Vec<usize>] {
        self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.vertices.len()];
            for (fi, f) in self.facets.iter().enumerate() {
                for &v in &f.0 {
                    inc[v].push(fi);
                }
            }
            inc
        })
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence()[v].len()
    }

    /// Index from facet vertex vector to facet index.
    pub fn facet_index(&self) -> HashMap<&Facet, usize> {
        self.facets
            .iter()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect()
    }
}

/// A pure chromatic complex with a label on every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialModel {
    complex: ChromaticComplex,
    labels: Vec<Label>,
}

impl SimplicialModel {
    pub fn new(complex: ChromaticComplex, labels: Vec<Label>) -> Result<Self, ModelError> {
        if labels.len() != complex.vertices.len() {
            return Err(ModelError::LabelCount {
                labels: labels.len(),
                vertices: complex.vertices.len(),
            });
        }
        Ok(SimplicialModel { complex, labels })
    }

    pub fn complex(&self) -> &ChromaticComplex {
        &self.complex
    }

    pub fn agents(&self) -> &Agents {
        &self.complex.agents
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.labels[v]
    }

    pub fn facets(&self) -> &[Facet] {
        self.complex.facets()
    }

    pub fn num_facets(&self) -> usize {
        self.complex.facets.len()
    }

    /// `ℓ(X)`: all atoms true at a facet.
    pub fn facet_atoms(&self, x: usize) -> BTreeSet<Atom> {
        let f = &self.complex.facets[x];
        let mut out = BTreeSet::new();
        for (i, &v) in f.0.iter().enumerate() {
            for val in &self.labels[v] {
                out.insert(Atom::new(AgentId(i), val.clone()));
            }
        }
        out
    }

    /// Values of a facet in agent order, e.g. `01` for the binary square.
    pub fn facet_word(&self, x: usize) -> String {
        let parts: Vec<String> = self.complex.facets[x]
            .0
            .iter()
            .map(|&v| {
                let l: Vec<&str> = self.labels[v].iter().map(String::as_str).collect();
                l.join("+")
            })
            .collect();
        if parts.iter().all(|p| p.chars().count() == 1) {
            parts.concat()
        } else {
            parts.join(",")
        }
    }

    /// Human-readable facet names: the value word when it is unique,
    /// `#index` otherwise.
    pub fn facet_names(&self) -> Vec<String> {
        let words: Vec<String> = (0..self.num_facets()).map(|x| self.facet_word(x)).collect();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for w in &words {
            *counts.entry(w.as_str()).or_default() += 1;
        }
        words
            .iter()
            .enumerate()
            .map(|(i, w)| {
                if counts[w.as_str()] == 1 && !w.is_empty() {
                    w.clone()
                } else {
                    format!("#{i}")
                }
            })
            .collect()
    }

    /// Resolves a facet selector: `#index`, a value word such as `01`, or a
    /// comma-separated list of vertex ids.
    pub fn find_facet(&self, selector: &str) -> Result<usize, ModelError> {
        if let Some(idx) = selector.strip_prefix('#') {
            return idx
                .parse::<usize>()
                .ok()
                .filter(|&i| i < self.num_facets())
                .ok_or_else(|| ModelError::NoSuchFacet(selector.to_string()));
        }
        let by_word: Vec<usize> = (0..self.num_facets())
            .filter(|&x| self.facet_word(x) == selector)
            .collect();
        match by_word.len() {
            1 => return Ok(by_word[0]),
            0 => {}
            _ => return Err(ModelError::AmbiguousFacet(selector.to_string())),
        }
        let ids: BTreeSet<&str> = selector.split(',').map(str::trim).collect();
        self.complex
            .facets
            .iter()
            .position(|f| {
                let fs: BTreeSet<&str> =
                    f.0.iter()
                        .map(|&v| self.complex.vertices[v].id.as_str())
                        .collect();
                fs == ids
            })
            .ok_or_else(|| ModelError::NoSuchFacet(selector.to_string()))
    }

    /// All values appearing in labels, sorted.
    pub fn values(&self) -> BTreeSet<Value> {
        self.labels.iter().flatten().cloned().collect()
    }
}

/// One row of a model under construction: a labeled vertex per agent.
pub type Row = Vec<(AgentId, Vec<Atom>)>;

/// A vertex slot of the builder: agent `agent` in row `row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub row: usize,
    pub agent: AgentId,
}

/// Builds a [`SimplicialModel`] from facet rows plus vertex identifications.
///
/// Every row creates fresh vertices; vertices are shared only where an
/// identification says so (or, with [`ModelBuilder::glue_by_label`], where
/// color and label coincide).
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    agents: Agents,
    rows: Vec<Row>,
    identify: Vec<(Slot, Slot)>,
    by_label: bool,
}

impl ModelBuilder {
    pub fn new(agents: Agents) -> Self {
        ModelBuilder {
            agents,
            rows: Vec::new(),
            identify: Vec::new(),
            by_label: false,
        }
    }

    pub fn row(&mut self, row: Row) -> &mut Self {
        self.rows.push(row);
        self
    }

    /// Adds a row giving one value per agent, in agent order.
    pub fn values_row<S: AsRef<str>>(&mut self, values: &[S]) -> &mut Self {
        let row = values
            .iter()
            .enumerate()
            .map(|(i, v)| (AgentId(i), vec![Atom::new(AgentId(i), v.as_ref())]))
            .collect();
        self.row(row)
    }

    pub fn identify(&mut self, a: Slot, b: Slot) -> &mut Self {
        self.identify.push((a, b));
        self
    }

    /// Identify all vertices with equal color and equal label.
    pub fn glue_by_label(&mut self) -> &mut Self {
        self.by_label = true;
        self
    }

    pub fn build(&self) -> Result<SimplicialModel, ModelError> {
        let n = self.agents.len();
        let slot_name = |s: Slot| format!("row {} agent `{}`", s.row, self.agents.name(s.agent));
        // slot index = row * n + agent
        let mut labels: Vec<Label> = vec![Label::new(); self.rows.len() * n];
        for (ri, row) in self.rows.iter().enumerate() {
            let mut seen = vec![false; n];
            for (a, atoms) in row {
                if a.0 >= n {
                    return Err(ModelError::UnknownAgent(format!("#{}", a.0)));
                }
                if seen[a.0] {
                    return Err(ModelError::NonChromatic {
                        facet: ri,
                        agent: self.agents.name(*a).to_string(),
                    });
                }
                seen[a.0] = true;
                for atom in atoms {
                    if atom.agent != *a {
                        return Err(ModelError::LabelLocality {
                            vertex: slot_name(Slot { row: ri, agent: *a }),
                            color: self.agents.name(*a).to_string(),
                            agent: self
                                .agents
                                .names
                                .get(atom.agent.0)
                                .cloned()
                                .unwrap_or_default(),
                        });
                    }
                    labels[ri * n + a.0].insert(atom.value.clone());
                }
            }
            if row.len() != n {
                return Err(ModelError::NonPure {
                    facet: ri,
                    expected: n,
                    found: row.len(),
                });
            }
        }

        let mut uf = UnionFind::new(self.rows.len() * n);
        for &(l, r) in &self.identify {
            for s in [l, r] {
                if s.row >= self.rows.len() || s.agent.0 >= n {
                    return Err(ModelError::UnknownVertex(slot_name(s)));
                }
            }
            if l.agent != r.agent {
                return Err(ModelError::MergeConflict {
                    left: slot_name(l),
                    right: slot_name(r),
                    reason: "different colors".into(),
                });
            }
            if labels[l.row * n + l.agent.0] != labels[r.row * n + r.agent.0] {
                return Err(ModelError::MergeConflict {
                    left: slot_name(l),
                    right: slot_name(r),
                    reason: "different labels".into(),
                });
            }
            uf.union(l.row * n + l.agent.0, r.row * n + r.agent.0);
        }
        if self.by_label {
            let mut first: HashMap<(usize, &Label), usize> = HashMap::new();
            for (s, label) in labels.iter().enumerate() {
                let key = (s % n, label);
                match first.get(&key) {
                    Some(&t) => uf.union(s, t),
                    None => {
                        first.insert(key, s);
                    }
                }
            }
        }

        // one vertex per class, numbered by first slot
        let mut class_vertex: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut vlabels = Vec::new();
        let mut slot_vertex = vec![0; labels.len()];
        for (s, sv) in slot_vertex.iter_mut().enumerate() {
            let root = uf.find(s);
            let v = *class_vertex.entry(root).or_insert_with(|| {
                vertices.push(AgentId(s % n));
                vlabels.push(labels[s].clone());
                vertices.len() - 1
            });
            *sv = v;
        }
        let names = vertex_names(&self.agents, &vertices, &vlabels);
        let vertices: Vec<Vertex> = vertices
            .into_iter()
            .zip(names)
            .map(|(color, id)| Vertex { id, color })
            .collect();
        let facets = (0..self.rows.len())
            .map(|r| (0..n).map(|a| slot_vertex[r * n + a]).collect())
            .collect();
        let complex = ChromaticComplex::new(self.agents.clone(), vertices, facets)?;
        SimplicialModel::new(complex, vlabels)
    }
}

/// Ids of the form `g0` (agent name + label values); duplicates get `#k`.
fn vertex_names(agents: &Agents, colors: &[AgentId], labels: &[Label]) -> Vec<String> {
    let base: Vec<String> = colors
        .iter()
        .zip(labels)
        .map(|(c, l)| {
            let vals: Vec<&str> = l.iter().map(String::as_str).collect();
            format!("{}{}", agents.name(*c), vals.join("+"))
        })
        .collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for b in &base {
        *counts.entry(b.as_str()).or_default() += 1;
    }
    let mut next: HashMap<&str, usize> = HashMap::new();
    base.iter()
        .map(|b| {
            if counts[b.as_str()] == 1 {
                b.clone()
            } else {
                let k = next.entry(b.as_str()).or_default();
                *k += 1;
                format!("{b}#{}", *k)
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Dense component labels in order of first appearance.
    pub(crate) fn labels(&mut self) -> Vec<usize> {
        let mut map = HashMap::new();
        (0..self.parent.len())
            .map(|x| {
                let r = self.find(x);
                let next = map.len();
                *map.entry(r).or_insert(next)
            })
            .collect()
    }
}

/// Component id per facet, where facets are linked when they share a vertex
/// whose color is in `agents`.
pub fn facet_components(c: &ChromaticComplex, agents: &[AgentId]) -> Vec<usize> {
    let mut uf = UnionFind::new(c.facets.len());
    for (v, inc) in c.incidence().iter().enumerate() {
        if !agents.contains(&c.vertices[v].color) {
            continue;
        }
        for w in inc.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    uf.labels()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetEdge {
    pub a: usize,
    pub b: usize,
    /// Agents in the queried subset whose vertex both facets share.
    pub agents: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetGraph {
    pub nodes: usize,
    pub edges: Vec<FacetEdge>,
}

/// Facet-adjacency graph: `X -- Y` iff they share a vertex colored by some
/// agent in `subset` (all agents when `None`).
pub fn facet_adjacency(c: &ChromaticComplex, subset: Option<&[AgentId]>) -> FacetGraph {
    let all = c.agents.all();
    let subset = subset.unwrap_or(&all);
    let mut edges: BTreeMap<(usize, usize), BTreeSet<AgentId>> = BTreeMap::new();
    for (v, inc) in c.incidence().iter().enumerate() {
        let color = c.vertices[v].color;
        if !subset.contains(&color) {
            continue;
        }
        for (i, &x) in inc.iter().enumerate() {
            for &y in &inc[i + 1..] {
                edges.entry((x, y)).or_default().insert(color);
            }
        }
    }
    FacetGraph {
        nodes: c.facets.len(),
        edges: edges
            .into_iter()
            .map(|((a, b), s)| FacetEdge {
                a,
                b,
                agents: s.into_iter().collect(),
            })
            .collect(),
    }
}

/// Topological summary of a pure chromatic complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub connected: bool,
    pub strongly_connected: bool,
    pub pseudomanifold_with_boundary: bool,
    pub euler_characteristic: i64,
    /// f-vector: number of faces of each dimension `0..=n`.
    pub counts: Vec<usize>,
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "f-vector: {:?}", self.counts)?;
        writeln!(f, "euler characteristic: {}", self.euler_characteristic)?;
        writeln!(f, "connected: {}", self.connected)?;
        writeln!(f, "strongly connected: {}", self.strongly_connected)?;
        write!(
            f,
            "pseudomanifold with boundary: {}",
            self.pseudomanifold_with_boundary
        )
    }
}

pub fn invariants(c: &ChromaticComplex) -> InvariantReport {
    let n = c.agents.len();
    let counts = f_vector(c);
    let euler_characteristic = counts
        .iter()
        .enumerate()
        .map(|(d, &k)| if d % 2 == 0 { k as i64 } else { -(k as i64) })
        .sum();

    let all = c.agents.all();
    let comps = facet_components(c, &all);
    let connected = comps.iter().all(|&k| k == 0);

    // ridges: facets with one vertex dropped; a 0-dimensional complex has none
    let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    if n >= 2 {
        for (fi, f) in c.facets.iter().enumerate() {
            for skip in 0..n {
                let mut r = f.0.clone();
                r[skip] = usize::MAX;
                ridges.entry(r).or_default().push(fi);
            }
        }
    }
    let mut uf = UnionFind::new(c.facets.len());
    for fs in ridges.values() {
        for w in fs.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let strongly_connected = !c.facets.is_empty()
        && (c.facets.len() == 1 || (n >= 2 && uf.labels().iter().all(|&k| k == 0)));
    let thin = ridges.values().all(|fs| fs.len() <= 2);

    InvariantReport {
        connected: connected && !c.facets.is_empty(),
        strongly_connected,
        pseudomanifold_with_boundary: strongly_connected && thin,
        euler_characteristic,
        counts,
    }
}

/// Counts all faces by subset expansion of facets, with deduplication.
pub fn f_vector(c: &ChromaticComplex) -> Vec<usize> {
    let n = c.agents.len();
    let mut faces: HashSet<Vec<usize>> = HashSet::new();
    for f in &c.facets {
        for mask in 1u32..(1u32 << n) {
            let face: Vec<usize> = (0..n)
                .map(|i| {
                    if mask & (1 << i) != 0 {
                        f.0[i]
                    } else {
                        usize::MAX
                    }
                })
                .collect();
            faces.insert(face);
        }
    }
    let mut counts = vec![0; n];
    for face in &faces {
        let k = face.iter().filter(|&&v| v != usize::MAX).count();
        counts[k - 1] += 1;
    }
    counts
}

/// Searches for a color- and label-preserving vertex bijection `a → b` that
/// maps the facets of `a` onto the facets of `b`. Returns `map[v_a] = v_b`.
pub fn find_isomorphism(a: &SimplicialModel, b: &SimplicialModel) -> Option<Vec<usize>> {
    complex_isomorphism(a.complex(), b.complex(), |u, v| a.label(u) == b.label(v))
}

/// Isomorphism of chromatic complexes with an extra vertex compatibility
/// predicate (used as the first pruning key).
pub fn complex_isomorphism<F>(
    a: &ChromaticComplex,
    b: &ChromaticComplex,
    compatible: F,
) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    complex_isomorphism_with(a, b, compatible, |_, _| true)
}

/// As [`complex_isomorphism`], additionally requiring `facet_ok(x, y)` for
/// every facet `x` of `a` mapped onto facet `y` of `b`.
pub fn complex_isomorphism_with<F, G>(
    a: &ChromaticComplex,
    b: &ChromaticComplex,
    compatible: F,
    facet_ok: G,
) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
    G: Fn(usize, usize) -> bool,
{
    if a.agents != b.agents
        || a.vertices.len() != b.vertices.len()
        || a.facets.len() != b.facets.len()
    {
        return None;
    }
    let nv = a.vertices.len();
    let candidates: Vec<Vec<usize>> = (0..nv)
        .map(|u| {
            (0..nv)
                .filter(|&v| {
                    a.vertices[u].color == b.vertices[v].color
                        && a.degree(u) == b.degree(v)
                        && compatible(u, v)
                })
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let order = search_order(a);
    let mut map = vec![usize::MAX; nv];
    let mut used = vec![false; nv];
    let ctx = IsoSearch {
        a,
        b,
        order: &order,
        candidates: &candidates,
        facet_ok: &facet_ok,
    };
    if ctx.extend(0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Vertex order for the isomorphism search: grow from the highest-degree
/// vertex through facets, so each new vertex meets assigned neighbours.
fn search_order(c: &ChromaticComplex) -> Vec<usize> {
    let nv = c.vertices.len();
    let mut placed = vec![false; nv];
    let mut order = Vec::with_capacity(nv);
    let mut by_degree: Vec<usize> = (0..nv).collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(c.degree(v)), v));
    for &start in &by_degree {
        if placed[start] {
            continue;
        }
        placed[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = c.incidence()[v]
                .iter()
                .flat_map(|&f| c.facets[f].0.iter().copied())
                .filter(|&w| !placed[w])
                .collect();
            next.sort_by_key(|&w| (std::cmp::Reverse(c.degree(w)), w));
            next.dedup();
            for w in next {
                if !placed[w] {
                    placed[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

struct IsoSearch<'a, G> {
    a: &'a ChromaticComplex,
    b: &'a ChromaticComplex,
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    facet_ok: &'a G,
}

impl<G: Fn(usize, usize) -> bool> IsoSearch<'_, G> {
    fn extend(&self, depth: usize, map: &mut [usize], used: &mut [bool]) -> bool {
        let Some(&u) = self.order.get(depth) else {
            return true;
        };
        for &v in &self.candidates[u] {
            if used[v] {
                continue;
            }
            map[u] = v;
            if self.consistent(u, map) {
                used[v] = true;
                if self.extend(depth + 1, map, used) {
                    return true;
                }
                used[v] = false;
            }
            map[u] = usize::MAX;
        }
        false
    }

    /// Every facet through `u` must have its assigned part inside some facet
    /// of `b` through `map[u]`; complete facets must also pass `facet_ok`.
    fn consistent(&self, u: usize, map: &[usize]) -> bool {
        let v = map[u];
        self.a.incidence()[u].iter().all(|&fx| {
            let fa = &self.a.facets[fx];
            let complete = fa.0.iter().all(|&x| map[x] != usize::MAX);
            self.b.incidence()[v].iter().any(|&fy| {
                let fb = &self.b.facets[fy];
                fa.0.iter()
                    .zip(&fb.0)
                    .all(|(&x, &y)| map[x] == usize::MAX || map[x] == y)
                    && (!complete || (self.facet_ok)(fx, fy))
            })
        })
    }
}
