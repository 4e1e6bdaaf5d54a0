//! Task solvability: search for a morphism `δ` from a protocol model to a
//! task model that commutes with both projections onto the inputs.
//!
//! Each protocol vertex is a variable whose domain is the task vertices of
//! its color over the same input vertex. Each protocol facet is a table
//! constraint whose tuples are the task facets over the same input facet.
//! Search is depth-first with generalized arc consistency after every
//! assignment.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::complex::{facet_components, SimplicialModel};
use crate::del::{check_morphism, compose, Morphism, Update};
use crate::logic::{satisfying_facets, CheckError, Formula};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const NODE_BUDGET_VAR: &str = "EPITOPO_NODE_BUDGET";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("ProjectionMismatch: protocol and task project onto different input models")]
    ProjectionMismatch,
    #[error("NotPositive: obstruction formula must be positive")]
    NotPositive,
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub node_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl SolveOptions {
    /// Default options, with the budget overridden by `EPITOPO_NODE_BUDGET`
    /// when it holds a number.
    pub fn from_env() -> Self {
        let node_budget = std::env::var(NODE_BUDGET_VAR)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_NODE_BUDGET);
        SolveOptions { node_budget }
    }
}

/// Two facets of one protocol component whose candidate images lie in
/// disjoint sets of task components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityCertificate {
    /// Protocol facets, consecutive ones sharing a vertex.
    pub path: Vec<usize>,
    pub candidates_start: Vec<usize>,
    pub candidates_end: Vec<usize>,
    pub components_start: Vec<usize>,
    pub components_end: Vec<usize>,
}

/// A protocol facet where a positive formula fails although it holds at every
/// admissible image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalCertificate {
    pub facet: usize,
    pub formula: Formula,
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// The complete search tree was explored without a solution.
    Exhausted,
    Connectivity(ConnectivityCertificate),
    Logical(LogicalCertificate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Solvable(Morphism),
    Unsolvable(Certificate),
    Unknown(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Solvable(_) => "SOLVABLE",
            Status::Unsolvable(_) => "UNSOLVABLE",
            Status::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Value assignments tried.
    pub nodes: u64,
    pub backtracks: u64,
    /// Constraint revisions during propagation.
    pub revisions: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub stats: Stats,
}

/// Candidate structure shared by the search and the obstructions.
struct Instance<'a> {
    protocol: &'a Update,
    task: &'a Update,
    /// Input facet under each protocol facet.
    input_of: Vec<usize>,
    /// Task facets over each input facet.
    task_facets_over: Vec<Vec<usize>>,
    /// Task vertices over each input vertex, ascending.
    cands: Vec<Vec<usize>>,
}

impl<'a> Instance<'a> {
    fn new(protocol: &'a Update, task: &'a Update) -> Result<Self, SolverError> {
        let same = Arc::ptr_eq(&protocol.projection.target, &task.projection.target)
            || protocol.projection.target == task.projection.target;
        if !same {
            return Err(SolverError::ProjectionMismatch);
        }
        let inputs = &protocol.projection.target;
        let input_of = protocol
            .projection
            .facet_map()
            .into_iter()
            .map(|x| x.ok_or(SolverError::ProjectionMismatch))
            .collect::<Result<Vec<_>, _>>()?;
        let mut task_facets_over = vec![Vec::new(); inputs.num_facets()];
        for (y, x) in task.projection.facet_map().into_iter().enumerate() {
            task_facets_over[x.ok_or(SolverError::ProjectionMismatch)?].push(y);
        }
        let mut cands = vec![Vec::new(); inputs.complex().vertices().len()];
        for (w, &u) in task.projection.map.iter().enumerate() {
            cands[u].push(w);
        }
        Ok(Instance {
            protocol,
            task,
            input_of,
            task_facets_over,
            cands,
        })
    }

    fn candidate_facets(&self, x: usize) -> &[usize] {
        &self.task_facets_over[self.input_of[x]]
    }
}

/// Search for `δ` with `π_T ∘ δ = π_A`.
pub fn solve(
    protocol: &Update,
    task: &Update,
    opts: &SolveOptions,
) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let inst = Instance::new(protocol, task)?;
    let mut search = Search::new(&inst, opts.node_budget);
    let outcome = search.run();
    let mut stats = search.stats.clone();
    stats.elapsed = start.elapsed();
    let status = match outcome {
        Outcome::Found(assignment) => Status::Solvable(Morphism::new(
            protocol.model.clone(),
            task.model.clone(),
            assignment,
        )),
        Outcome::Exhausted => Status::Unsolvable(Certificate::Exhausted),
        Outcome::Budget => {
            Status::Unknown(format!("node budget of {} exhausted", opts.node_budget))
        }
    };
    Ok(SolveResult { status, stats })
}

enum Outcome {
    Found(Vec<usize>),
    Exhausted,
    Budget,
}

struct Search<'a> {
    inst: &'a Instance<'a>,
    budget: u64,
    stats: Stats,
    /// Protocol vertex → input vertex.
    base: Vec<usize>,
    /// Constraint tuples per input facet, as positions in the candidate lists.
    tuples: Vec<Vec<Vec<usize>>>,
    degree: Vec<usize>,
}

type Domains = Vec<Vec<bool>>;

impl<'a> Search<'a> {
    fn new(inst: &'a Instance<'a>, budget: u64) -> Self {
        let inputs = &inst.protocol.projection.target;
        let task = &inst.task.model;
        let tuples = (0..inputs.num_facets())
            .map(|i| {
                let input = &inputs.facets()[i];
                inst.task_facets_over[i]
                    .iter()
                    .map(|&y| {
                        task.facets()[y]
                            .vertices()
                            .iter()
                            .zip(input.vertices())
                            .map(|(w, &u)| {
                                inst.cands[u]
                                    .binary_search(w)
                                    .expect("task vertex over input")
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let pc = inst.protocol.model.complex();
        Search {
            inst,
            budget,
            stats: Stats::default(),
            base: inst.protocol.projection.map.clone(),
            tuples,
            degree: (0..pc.vertices().len()).map(|v| pc.degree(v)).collect(),
        }
    }

    fn run(&mut self) -> Outcome {
        let mut domains: Domains = self
            .base
            .iter()
            .map(|&u| vec![true; self.inst.cands[u].len()])
            .collect();
        let all: Vec<usize> = (0..self.inst.input_of.len()).collect();
        if !self.propagate(&mut domains, all) {
            return Outcome::Exhausted;
        }
        match self.dfs(domains) {
            Some(Ok(a)) => Outcome::Found(a),
            Some(Err(())) => Outcome::Budget,
            None => Outcome::Exhausted,
        }
    }

    /// `None` when the subtree has no solution, `Some(Err)` on budget.
    fn dfs(&mut self, domains: Domains) -> Option<Result<Vec<usize>, ()>> {
        let var = (0..domains.len())
            .filter_map(|v| {
                let size = domains[v].iter().filter(|&&b| b).count();
                (size > 1).then_some((size, std::cmp::Reverse(self.degree[v]), v))
            })
            .min();
        let Some((_, _, v)) = var else {
            let assignment = domains
                .iter()
                .zip(&self.base)
                .map(|(d, &u)| self.inst.cands[u][d.iter().position(|&b| b).expect("nonempty")])
                .collect();
            return Some(Ok(assignment));
        };
        for value in 0..domains[v].len() {
            if !domains[v][value] {
                continue;
            }
            if self.stats.nodes >= self.budget {
                return Some(Err(()));
            }
            self.stats.nodes += 1;
            let mut next = domains.clone();
            next[v].iter_mut().for_each(|b| *b = false);
            next[v][value] = true;
            let incident = self.inst.protocol.model.complex().incidence()[v].clone();
            if self.propagate(&mut next, incident) {
                if let Some(r) = self.dfs(next) {
                    return Some(r);
                }
            }
            self.stats.backtracks += 1;
        }
        None
    }

    /// Generalized arc consistency over facet constraints, starting from the
    /// queued facets. False on a wipe-out.
    fn propagate(&mut self, domains: &mut Domains, queue: Vec<usize>) -> bool {
        let pc = self.inst.protocol.model.complex();
        let mut queued = vec![false; pc.facets().len()];
        let mut queue: VecDeque<usize> = queue.into();
        for &x in &queue {
            queued[x] = true;
        }
        while let Some(x) = queue.pop_front() {
            queued[x] = false;
            self.stats.revisions += 1;
            let facet = pc.facets()[x].vertices();
            let tuples = &self.tuples[self.inst.input_of[x]];
            let mut support: Vec<Vec<bool>> = facet
                .iter()
                .map(|&v| vec![false; domains[v].len()])
                .collect();
            for t in tuples {
                if t.iter().zip(facet).all(|(&i, &v)| domains[v][i]) {
                    for (a, &i) in t.iter().enumerate() {
                        support[a][i] = true;
                    }
                }
            }
            for (a, &v) in facet.iter().enumerate() {
                let mut changed = false;
                let mut any = false;
                for (d, &s) in domains[v].iter_mut().zip(&support[a]) {
                    if *d && !s {
                        *d = false;
                        changed = true;
                    }
                    any |= *d;
                }
                if !any {
                    return false;
                }
                if changed {
                    for &y in &pc.incidence()[v] {
                        if y != x && !queued[y] {
                            queued[y] = true;
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        true
    }
}

/// Connected-component argument: a simplicial map keeps a connected protocol
/// component inside one task component.
pub fn connectivity_obstruction(
    protocol: &Update,
    task: &Update,
) -> Result<Option<ConnectivityCertificate>, SolverError> {
    let inst = Instance::new(protocol, task)?;
    let pc = protocol.model.complex();
    let tc = task.model.complex();
    let pcomp = facet_components(pc, &pc.agents().all());
    let tcomp = facet_components(tc, &tc.agents().all());
    let comps_of = |x: usize| -> BTreeSet<usize> {
        inst.candidate_facets(x).iter().map(|&y| tcomp[y]).collect()
    };
    // one representative facet per (protocol component, candidate components)
    let mut groups: HashMap<usize, Vec<(BTreeSet<usize>, usize)>> = HashMap::new();
    for x in 0..pc.facets().len() {
        let cs = comps_of(x);
        let g = groups.entry(pcomp[x]).or_default();
        if !g.iter().any(|(s, _)| *s == cs) {
            g.push((cs, x));
        }
    }
    let mut keys: Vec<usize> = groups.keys().copied().collect();
    keys.sort();
    for k in keys {
        let g = &groups[&k];
        for (i, (s, x)) in g.iter().enumerate() {
            for (t, y) in &g[i + 1..] {
                if s.is_disjoint(t) {
                    return Ok(Some(ConnectivityCertificate {
                        path: facet_path(&protocol.model, *x, *y).expect("same component"),
                        candidates_start: inst.candidate_facets(*x).to_vec(),
                        candidates_end: inst.candidate_facets(*y).to_vec(),
                        components_start: s.iter().copied().collect(),
                        components_end: t.iter().copied().collect(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Shortest sequence of facets from `from` to `to`, consecutive ones sharing
/// a vertex.
pub fn facet_path(m: &SimplicialModel, from: usize, to: usize) -> Option<Vec<usize>> {
    let c = m.complex();
    let mut prev = vec![usize::MAX; c.facets().len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            let mut path = vec![to];
            while *path.last().unwrap() != from {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for &v in c.facets()[x].vertices() {
            for &y in &c.incidence()[v] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
    }
    None
}

/// Knowledge-gain argument: a positive φ true at every admissible image of a
/// facet where φ fails rules out every `δ`.
pub fn logical_obstruction(
    protocol: &Update,
    task: &Update,
    phi: &Formula,
) -> Result<Option<LogicalCertificate>, SolverError> {
    if !phi.is_positive() {
        return Err(SolverError::NotPositive);
    }
    let inst = Instance::new(protocol, task)?;
    let at_protocol = satisfying_facets(&protocol.model, phi)?;
    let at_task = satisfying_facets(&task.model, phi)?;
    Ok((0..at_protocol.len())
        .find(|&x| !at_protocol[x] && inst.candidate_facets(x).iter().all(|&y| at_task[y]))
        .map(|x| LogicalCertificate {
            facet: x,
            formula: phi.clone(),
            candidates: inst.candidate_facets(x).to_vec(),
        }))
}

/// `C_A φ_v0 ∨ C_A φ_v1 ∨ …`: the inputs of some agent are common knowledge.
pub fn agreement_formula(m: &SimplicialModel, values: &[String]) -> Formula {
    let all = m.agents().all();
    Formula::or_all(values.iter().map(|v| {
        Formula::common(
            all.iter().copied(),
            Formula::or_all(all.iter().map(|&a| Formula::atom(a, v.as_str()))),
        )
    }))
}

/// Independent check of a result: the morphism and commuting square for
/// `Solvable`, a replay for obstruction certificates, a fresh unbounded
/// search for an exhausted one.
pub fn verify(result: &SolveResult, protocol: &Update, task: &Update) -> bool {
    match &result.status {
        Status::Solvable(delta) => verify_morphism(delta, protocol, task),
        Status::Unsolvable(Certificate::Connectivity(c)) => replay_connectivity(c, protocol, task),
        Status::Unsolvable(Certificate::Logical(c)) => replay_logical(c, protocol, task),
        Status::Unsolvable(Certificate::Exhausted) => matches!(
            solve(
                protocol,
                task,
                &SolveOptions {
                    node_budget: u64::MAX
                }
            ),
            Ok(SolveResult {
                status: Status::Unsolvable(_),
                ..
            })
        ),
        Status::Unknown(_) => false,
    }
}

pub fn verify_morphism(delta: &Morphism, protocol: &Update, task: &Update) -> bool {
    if delta.source != protocol.model || delta.target != task.model || !check_morphism(delta) {
        return false;
    }
    match compose(delta, &task.projection) {
        Ok(c) => c.map == protocol.projection.map,
        Err(_) => false,
    }
}

fn replay_connectivity(c: &ConnectivityCertificate, protocol: &Update, task: &Update) -> bool {
    let Ok(inst) = Instance::new(protocol, task) else {
        return false;
    };
    let pc = protocol.model.complex();
    let n = pc.facets().len();
    if c.path.is_empty() || c.path.iter().any(|&x| x >= n) {
        return false;
    }
    let linked = c.path.windows(2).all(|w| {
        let (a, b) = (&pc.facets()[w[0]], &pc.facets()[w[1]]);
        a.vertices().iter().zip(b.vertices()).any(|(u, v)| u == v)
    });
    let tc = task.model.complex();
    let tcomp = facet_components(tc, &tc.agents().all());
    let comps = |x: usize| -> BTreeSet<usize> {
        inst.candidate_facets(x).iter().map(|&y| tcomp[y]).collect()
    };
    let (s, e) = (c.path[0], *c.path.last().unwrap());
    linked
        && inst.candidate_facets(s) == c.candidates_start.as_slice()
        && inst.candidate_facets(e) == c.candidates_end.as_slice()
        && comps(s).is_disjoint(&comps(e))
}

fn replay_logical(c: &LogicalCertificate, protocol: &Update, task: &Update) -> bool {
    let Ok(inst) = Instance::new(protocol, task) else {
        return false;
    };
    if !c.formula.is_positive() || c.facet >= protocol.model.num_facets() {
        return false;
    }
    let (Ok(at_protocol), Ok(at_task)) = (
        satisfying_facets(&protocol.model, &c.formula),
        satisfying_facets(&task.model, &c.formula),
    ) else {
        return false;
    };
    inst.candidate_facets(c.facet) == c.candidates.as_slice()
        && !at_protocol[c.facet]
        && c.candidates.iter().all(|&y| at_task[y])
}

/// Counts used by `stats` and reports.
pub fn candidate_counts(protocol: &Update, task: &Update) -> Result<Vec<usize>, SolverError> {
    let inst = Instance::new(protocol, task)?;
    Ok(protocol
        .projection
        .map
        .iter()
        .map(|&u| inst.cands[u].len())
        .collect())
}
