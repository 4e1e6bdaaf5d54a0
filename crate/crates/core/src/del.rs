//! Simplicial action models, chromatic products, product update and
//! morphisms of simplicial models.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{ChromaticComplex, Facet, SimplicialModel, Vertex};
use crate::logic::{satisfying_facets, CheckError, Formula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DelError {
    #[error("DimensionMismatch: factors are over different agent sets")]
    DimensionMismatch,
    #[error("action model has {preconditions} preconditions for {facets} facets")]
    PreconditionCount { preconditions: usize, facets: usize },
    #[error("CompositionMismatch: target of the first morphism is not the source of the second")]
    CompositionMismatch,
    #[error(transparent)]
    Check(#[from] CheckError),
}

/// Simplicial action model `⟨T, χ, pre⟩`. Vertex ids of `T` are the action
/// payloads (views, decisions); they are used for gluing only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionModel {
    complex: ChromaticComplex,
    preconditions: Vec<Formula>,
}

impl ActionModel {
    pub fn new(complex: ChromaticComplex, preconditions: Vec<Formula>) -> Result<Self, DelError> {
        if complex.facets().len() != preconditions.len() {
            return Err(DelError::PreconditionCount {
                preconditions: preconditions.len(),
                facets: complex.facets().len(),
            });
        }
        Ok(ActionModel {
            complex,
            preconditions,
        })
    }

    pub fn complex(&self) -> &ChromaticComplex {
        &self.complex
    }

    pub fn preconditions(&self) -> &[Formula] {
        &self.preconditions
    }

    pub fn precondition(&self, facet: usize) -> &Formula {
        &self.preconditions[facet]
    }
}

/// Chromatic simplicial map between simplicial models, given on vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub source: Arc<SimplicialModel>,
    pub target: Arc<SimplicialModel>,
    pub map: Vec<usize>,
}

impl Morphism {
    pub fn new(
        source: Arc<SimplicialModel>,
        target: Arc<SimplicialModel>,
        map: Vec<usize>,
    ) -> Self {
        Morphism {
            source,
            target,
            map,
        }
    }

    pub fn identity(m: Arc<SimplicialModel>) -> Self {
        let map = (0..m.complex().vertices().len()).collect();
        Morphism {
            source: m.clone(),
            target: m,
            map,
        }
    }

    /// Image of a source facet as a vertex vector.
    pub fn image(&self, facet: usize) -> Facet {
        Facet(
            self.source.facets()[facet]
                .vertices()
                .iter()
                .map(|&v| self.map[v])
                .collect(),
        )
    }

    /// Target facet index of each source facet, `None` where the image is not
    /// a facet of the target.
    pub fn facet_map(&self) -> Vec<Option<usize>> {
        let index = self.target.complex().facet_index();
        (0..self.source.num_facets())
            .map(|x| index.get(&self.image(x)).copied())
            .collect()
    }
}

/// Color preservation, label preservation, and facets to facets.
pub fn check_morphism(f: &Morphism) -> bool {
    let (src, tgt) = (f.source.complex(), f.target.complex());
    if f.map.len() != src.vertices().len() || src.agents() != tgt.agents() {
        return false;
    }
    let vertices_ok = f.map.iter().enumerate().all(|(v, &w)| {
        w < tgt.vertices().len()
            && src.vertex(v).color == tgt.vertex(w).color
            && f.source.label(v) == f.target.label(w)
    });
    vertices_ok && f.facet_map().iter().all(Option::is_some)
}

/// `g ∘ f` (first `f`, then `g`).
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism, DelError> {
    if !(Arc::ptr_eq(&f.target, &g.source) || f.target == g.source) {
        return Err(DelError::CompositionMismatch);
    }
    Ok(Morphism {
        source: f.source.clone(),
        target: g.target.clone(),
        map: f.map.iter().map(|&v| g.map[v]).collect(),
    })
}

/// Result of a product update: the updated model and its first projection.
#[derive(Debug, Clone)]
pub struct Update {
    pub model: Arc<SimplicialModel>,
    pub projection: Morphism,
}

impl Update {
    /// The identity "protocol": no communication at all.
    pub fn identity(m: Arc<SimplicialModel>) -> Self {
        Update {
            model: m.clone(),
            projection: Morphism::identity(m),
        }
    }

    /// No pair satisfied any precondition.
    pub fn is_empty(&self) -> bool {
        self.model.num_facets() == 0
    }
}

/// Sub-complex of `C × T` spanned by the given facet pairs. Returns the
/// complex and, per product vertex, its `(u, v)` origin.
fn product_complex(
    c: &ChromaticComplex,
    t: &ChromaticComplex,
    pairs: &[(usize, usize)],
) -> (ChromaticComplex, Vec<(usize, usize)>) {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut origins = Vec::new();
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let (fx, fy) = (c.facet(x), t.facet(y));
        let facet = fx
            .vertices()
            .iter()
            .zip(fy.vertices())
            .map(|(&u, &v)| {
                *index.entry((u, v)).or_insert_with(|| {
                    origins.push((u, v));
                    vertices.push(Vertex {
                        id: format!("({},{})", c.vertex(u).id, t.vertex(v).id),
                        color: c.vertex(u).color,
                    });
                    vertices.len() - 1
                })
            })
            .collect();
        facets.push(facet);
    }
    let complex = ChromaticComplex::new(c.agents().clone(), vertices, facets)
        .expect("distinct facet pairs give distinct chromatic facets");
    (complex, origins)
}

/// Full chromatic product `C × T`: every pair of facets, vertices paired by
/// color.
pub fn cartesian_product(
    c: &ChromaticComplex,
    t: &ChromaticComplex,
) -> Result<ChromaticComplex, DelError> {
    if c.agents() != t.agents() {
        return Err(DelError::DimensionMismatch);
    }
    let pairs: Vec<(usize, usize)> = (0..c.facets().len())
        .flat_map(|x| (0..t.facets().len()).map(move |y| (x, y)))
        .collect();
    Ok(product_complex(c, t, &pairs).0)
}

/// `M[𝒜]`: the facets `X × Y` of `C × T` with `M, X ⊨ pre(Y)`, labels copied
/// from the model side. Facets are ordered by `(X, Y)`.
pub fn product_update(m: &SimplicialModel, a: &ActionModel) -> Result<Update, DelError> {
    if m.agents() != a.complex().agents() {
        return Err(DelError::DimensionMismatch);
    }
    let mut cache: HashMap<&Formula, Vec<bool>> = HashMap::new();
    for pre in &a.preconditions {
        if !cache.contains_key(pre) {
            cache.insert(pre, satisfying_facets(m, pre)?);
        }
    }
    let mut pairs = Vec::new();
    for x in 0..m.num_facets() {
        for (y, pre) in a.preconditions.iter().enumerate() {
            if cache[pre][x] {
                pairs.push((x, y));
            }
        }
    }
    let (complex, origins) = product_complex(m.complex(), a.complex(), &pairs);
    let labels = origins.iter().map(|&(u, _)| m.label(u).clone()).collect();
    let model = Arc::new(SimplicialModel::new(complex, labels).expect("label per vertex"));
    let projection = Morphism {
        source: model.clone(),
        target: Arc::new(m.clone()),
        map: origins.iter().map(|&(u, _)| u).collect(),
    };
    Ok(Update { model, projection })
}

/// Facet pairs `(X, Y)` of an update, recovered from the projection and the
/// action complex. Exposed for tests that compare with the Kripke side.
pub fn distinct_inputs(update: &Update) -> usize {
    let seen: HashSet<Facet> = (0..update.model.num_facets())
        .map(|x| update.projection.image(x))
        .collect();
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{invariants, Agents, ModelBuilder};

    fn square() -> SimplicialModel {
        let agents = Agents::new(["g", "w"]).unwrap();
        let mut b = ModelBuilder::new(agents);
        for r in [["0", "0"], ["0", "1"], ["1", "1"], ["1", "0"]] {
            b.values_row(&r);
        }
        b.glue_by_label().build().unwrap()
    }

    fn single_action(m: &SimplicialModel, pre: Formula) -> ActionModel {
        let c = ChromaticComplex::new(
            m.agents().clone(),
            m.agents()
                .ids()
                .map(|a| Vertex {
                    id: format!("t{}", a.0),
                    color: a,
                })
                .collect(),
            vec![(0..m.agents().len()).collect()],
        )
        .unwrap();
        ActionModel::new(c, vec![pre]).unwrap()
    }

    #[test]
    fn product_with_single_facet_is_identity_like() {
        let m = square();
        let a = single_action(&m, Formula::True);
        let p = cartesian_product(m.complex(), a.complex()).unwrap();
        assert_eq!(p.facets().len(), 4);
        assert_eq!(p.vertices().len(), 4);
        let up = product_update(&m, &a).unwrap();
        assert!(crate::complex::find_isomorphism(&up.model, &m).is_some());
        assert!(check_morphism(&up.projection));
    }

    #[test]
    fn square_times_square_has_sixteen_facets() {
        let m = square();
        let p = cartesian_product(m.complex(), m.complex()).unwrap();
        assert_eq!(p.facets().len(), 16);
        assert_eq!(invariants(&p).counts[0], 8);
    }

    #[test]
    fn mismatched_agents_rejected() {
        let m = square();
        let other = ModelBuilder::new(Agents::new(["b", "g", "w"]).unwrap())
            .values_row(&["0", "0", "0"])
            .build()
            .unwrap();
        assert_eq!(
            cartesian_product(m.complex(), other.complex()),
            Err(DelError::DimensionMismatch)
        );
    }

    #[test]
    fn unsatisfiable_precondition_gives_empty_update() {
        let m = square();
        let up = product_update(&m, &single_action(&m, Formula::False)).unwrap();
        assert!(up.is_empty());
    }

    #[test]
    fn facet_pinned_actions_reproduce_the_model() {
        // one action per facet, precondition true exactly there
        let m = square();
        let pres: Vec<Formula> = (0..m.num_facets())
            .map(|x| Formula::and_all(m.facet_atoms(x).into_iter().map(Formula::Atom)))
            .collect();
        let action = ActionModel::new(m.complex().clone(), pres).unwrap();
        let up = product_update(&m, &action).unwrap();
        assert!(crate::complex::find_isomorphism(&up.model, &m).is_some());
    }

    #[test]
    fn morphism_checks() {
        let m = Arc::new(square());
        let id = Morphism::identity(m.clone());
        assert!(check_morphism(&id));
        assert_eq!(compose(&id, &id).unwrap(), id);

        // send the g-vertex g0 to the w-vertex w0
        let g0 = m.complex().vertex_index("g0").unwrap();
        let w0 = m.complex().vertex_index("w0").unwrap();
        let mut bad = id.clone();
        bad.map[g0] = w0;
        assert!(!check_morphism(&bad));

        // collapse g1 onto g0: colors fine, labels not
        let g1 = m.complex().vertex_index("g1").unwrap();
        let mut relabel = id.clone();
        relabel.map[g1] = g0;
        assert!(!check_morphism(&relabel));
    }

    #[test]
    fn composition_requires_matching_models() {
        let m = Arc::new(square());
        let up = product_update(&m, &single_action(&m, Formula::True)).unwrap();
        let other = Morphism::identity(up.model.clone());
        assert_eq!(
            compose(&Morphism::identity(m.clone()), &other),
            Err(DelError::CompositionMismatch)
        );
        let pi = compose(&other, &up.projection).unwrap();
        assert_eq!(pi.map, up.projection.map);
    }
}
