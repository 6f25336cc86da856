//! Frames: one-to-one sets of ground deduction facts in reduced form.

use crate::rewrite::{RewriteSystem, Rewriter, StepCapExceeded};
use crate::term::{ParamId, Signature, Term};
use std::collections::HashMap;

/// A recipe paired with the plain term it computes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeductionFact {
    pub recipe: Term,
    pub term: Term,
}

/// A finite set of ground deduction facts with at most one recipe per term,
/// every term in reduced form. Facts keep insertion order, which the engine
/// relies on for deterministic output and FIFO discovery.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    facts: Vec<DeductionFact>,
    by_term: HashMap<Term, usize>,
}

impl Frame {
    pub fn new() -> Frame {
        Frame::default()
    }

    pub fn facts(&self) -> &[DeductionFact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn fact(&self, idx: usize) -> &DeductionFact {
        &self.facts[idx]
    }

    pub fn recipe_for(&self, term: &Term) -> Option<&Term> {
        self.by_term.get(term).map(|&i| &self.facts[i].recipe)
    }

    pub fn index_of_term(&self, term: &Term) -> Option<usize> {
        self.by_term.get(term).copied()
    }

    pub fn carries(&self, term: &Term) -> bool {
        self.by_term.contains_key(term)
    }

    /// Adds a fact; panics if the term is already carried (the engine checks
    /// first, so a duplicate is a bug).
    pub fn push(&mut self, fact: DeductionFact) -> usize {
        debug_assert!(fact.recipe.is_recipe(), "fact recipe contains a private symbol");
        debug_assert!(fact.term.is_plain(), "fact term contains a parameter");
        let idx = self.facts.len();
        let prev = self.by_term.insert(fact.term.clone(), idx);
        assert!(prev.is_none(), "one-to-one violated: term already carried");
        self.facts.push(fact);
        idx
    }

    pub fn image(&self) -> impl Iterator<Item = &Term> {
        self.facts.iter().map(|f| &f.term)
    }
}

/// An initial frame: distinct parameters mapped to ground plain terms, in
/// file order.
#[derive(Debug, Clone, Default)]
pub struct InitialFrame {
    pub name: String,
    pub entries: Vec<(ParamId, Term)>,
}

impl InitialFrame {
    pub fn domain(&self) -> Vec<ParamId> {
        self.entries.iter().map(|(p, _)| *p).collect()
    }

    pub fn lookup(&self, p: ParamId) -> Option<&Term> {
        self.entries
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, t)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InitError {
    #[error("frame term for w{0} is not ground")]
    NonGroundTerm(u32),
    #[error("frame term for w{0} contains a parameter")]
    ParameterInTerm(u32),
    #[error("duplicate parameter w{0}")]
    DuplicateParameter(u32),
    #[error(transparent)]
    StepCap(#[from] StepCapExceeded),
}

/// Reduces an initial frame into a one-to-one frame plus the parameter
/// equations for duplicated terms, processing entries in parameter order.
/// The equations are returned as recipe pairs `(w, w')` with `w'` the
/// first carrier.
pub fn init_frame(
    sig: &Signature,
    system: &RewriteSystem,
    initial: &InitialFrame,
    step_cap: u64,
) -> Result<(Frame, Vec<(Term, Term)>), InitError> {
    let mut rewriter = Rewriter::new(sig, system);
    rewriter.step_cap = step_cap;
    let mut frame = Frame::new();
    let mut equations = Vec::new();
    let mut seen_params = std::collections::HashSet::new();
    for (p, t) in &initial.entries {
        if !seen_params.insert(*p) {
            return Err(InitError::DuplicateParameter(p.0));
        }
        if !t.is_plain() {
            return Err(InitError::ParameterInTerm(p.0));
        }
        if !t.is_ground() {
            return Err(InitError::NonGroundTerm(p.0));
        }
        let reduced = rewriter.normalize(t)?;
        let recipe = Term::param(*p);
        match frame.recipe_for(&reduced) {
            Some(existing) => equations.push((recipe, existing.clone())),
            None => {
                frame.push(DeductionFact {
                    recipe,
                    term: reduced,
                });
            }
        }
    }
    Ok((frame, equations))
}
