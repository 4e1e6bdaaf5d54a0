use std::fmt;

use crate::complex::{AgentId, Agents, Atom, Value};

/// Epistemic formula with individual, group and common knowledge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Knows(AgentId, Box<Formula>),
    /// `E_B φ`: every agent of the (nonempty, sorted) group knows φ.
    Everyone(Vec<AgentId>, Box<Formula>),
    /// `C_B φ`: φ is common knowledge in the group.
    Common(Vec<AgentId>, Box<Formula>),
}

impl Formula {
    pub fn atom(agent: AgentId, value: impl Into<Value>) -> Self {
        Formula::Atom(Atom::new(agent, value))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn knows(a: AgentId, f: Formula) -> Self {
        Formula::Knows(a, Box::new(f))
    }

    pub fn everyone(group: impl IntoIterator<Item = AgentId>, f: Formula) -> Self {
        Formula::Everyone(normalize_group(group), Box::new(f))
    }

    pub fn common(group: impl IntoIterator<Item = AgentId>, f: Formula) -> Self {
        Formula::Common(normalize_group(group), Box::new(f))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` when empty.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// Modal depth (nesting of K/E/C).
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => f.depth(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.depth().max(r.depth())
            }
            Formula::Knows(_, f) | Formula::Everyone(_, f) | Formula::Common(_, f) => 1 + f.depth(),
        }
    }

    /// True iff negation occurs only directly above atoms. `->` hides a
    /// negation and so counts as negative.
    pub fn is_positive(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            Formula::And(l, r) | Formula::Or(l, r) => l.is_positive() && r.is_positive(),
            Formula::Implies(..) => false,
            Formula::Knows(_, f) | Formula::Everyone(_, f) | Formula::Common(_, f) => {
                f.is_positive()
            }
        }
    }

    /// Every agent mentioned anywhere in the formula.
    pub fn agents(&self) -> Vec<AgentId> {
        let mut out = Vec::new();
        self.visit_agents(&mut |a| out.push(a));
        out.sort();
        out.dedup();
        out
    }

    fn visit_agents(&self, f: &mut impl FnMut(AgentId)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a.agent),
            Formula::Not(x) => x.visit_agents(f),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.visit_agents(f);
                r.visit_agents(f);
            }
            Formula::Knows(a, x) => {
                f(*a);
                x.visit_agents(f);
            }
            Formula::Everyone(g, x) | Formula::Common(g, x) => {
                g.iter().copied().for_each(&mut *f);
                x.visit_agents(f);
            }
        }
    }

    /// Rewrites `∨` and `→` into `∧`/`¬`. Used to check that the sugar is
    /// conservative.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.desugar()),
            Formula::And(l, r) => Formula::and(l.desugar(), r.desugar()),
            Formula::Or(l, r) => Formula::not(Formula::and(
                Formula::not(l.desugar()),
                Formula::not(r.desugar()),
            )),
            Formula::Implies(l, r) => {
                Formula::not(Formula::and(l.desugar(), Formula::not(r.desugar())))
            }
            Formula::Knows(a, f) => Formula::knows(*a, f.desugar()),
            Formula::Everyone(g, f) => Formula::Everyone(g.clone(), Box::new(f.desugar())),
            Formula::Common(g, f) => Formula::Common(g.clone(), Box::new(f.desugar())),
        }
    }

    /// Renders the formula in the ASCII grammar accepted by [`super::parse`].
    pub fn display<'a>(&'a self, agents: &'a Agents) -> impl fmt::Display + 'a {
        Printer {
            formula: self,
            agents,
        }
    }
}

fn normalize_group(group: impl IntoIterator<Item = AgentId>) -> Vec<AgentId> {
    let mut g: Vec<AgentId> = group.into_iter().collect();
    g.sort();
    g.dedup();
    g
}

struct Printer<'a> {
    formula: &'a Formula,
    agents: &'a Agents,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self.formula, self.agents, 0)
    }
}

// binding strength: -> 1 (right assoc), | 2, & 3, prefix operators 4
fn write_prec(f: &mut fmt::Formatter<'_>, phi: &Formula, ag: &Agents, min: u8) -> fmt::Result {
    let open = match phi {
        Formula::Implies(..) => min > 1,
        Formula::Or(..) => min > 2,
        Formula::And(..) => min > 3,
        _ => false,
    };
    if open {
        f.write_str("(")?;
    }
    match phi {
        Formula::True => f.write_str("true")?,
        Formula::False => f.write_str("false")?,
        Formula::Atom(a) => write!(f, "p[{},{}]", ag.name(a.agent), a.value)?,
        Formula::Not(x) => {
            f.write_str("!")?;
            write_prec(f, x, ag, 4)?;
        }
        Formula::And(l, r) => {
            write_prec(f, l, ag, 3)?;
            f.write_str(" & ")?;
            write_prec(f, r, ag, 4)?;
        }
        Formula::Or(l, r) => {
            write_prec(f, l, ag, 2)?;
            f.write_str(" | ")?;
            write_prec(f, r, ag, 3)?;
        }
        Formula::Implies(l, r) => {
            write_prec(f, l, ag, 2)?;
            f.write_str(" -> ")?;
            write_prec(f, r, ag, 1)?;
        }
        Formula::Knows(a, x) => {
            write!(f, "K[{}] ", ag.name(*a))?;
            write_prec(f, x, ag, 4)?;
        }
        Formula::Everyone(g, x) | Formula::Common(g, x) => {
            let op = if matches!(phi, Formula::Everyone(..)) {
                'E'
            } else {
                'C'
            };
            let names: Vec<&str> = g.iter().map(|a| ag.name(*a)).collect();
            write!(f, "{op}[{}] ", names.join(","))?;
            write_prec(f, x, ag, 4)?;
        }
    }
    if open {
        f.write_str(")")?;
    }
    Ok(())
}
