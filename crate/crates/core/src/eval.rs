//! Evaluation of recipes on an initial frame: substitute the frame's terms
//! for parameters and normalize, with bound variables inert.
//!
//! Saturated frames carry recipes whose tree size can be exponential in the
//! input while their distinct-node count stays small, so the evaluator fuses
//! substitution with normalization and memoizes per node. Shared subrecipes
//! evaluate once.

use std::collections::HashMap;

use crate::frame::InitialFrame;
use crate::rewrite::{RewriteSystem, Rewriter, StepCapExceeded};
use crate::term::{ParamId, Signature, Term, TermKind};

pub struct FrameEvaluator<'s> {
    sig: &'s Signature,
    rewriter: Rewriter<'s>,
    frame: HashMap<ParamId, Term>,
    memo: HashMap<usize, Term>,
    keep_alive: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("recipe uses parameter w{0} outside the frame domain")]
    UnknownParameter(u32),
    #[error(transparent)]
    StepCap(#[from] StepCapExceeded),
}

impl<'s> FrameEvaluator<'s> {
    pub fn new(
        sig: &'s Signature,
        system: &'s RewriteSystem,
        frame: &InitialFrame,
        step_cap: u64,
    ) -> FrameEvaluator<'s> {
        let mut rewriter = Rewriter::new(sig, system);
        rewriter.step_cap = step_cap;
        FrameEvaluator {
            sig,
            rewriter,
            frame: frame.entries.iter().cloned().collect(),
            memo: HashMap::new(),
            keep_alive: Vec::new(),
        }
    }

    /// `(recipe·frame)↓`, variables inert.
    pub fn eval(&mut self, recipe: &Term) -> Result<Term, EvalError> {
        if let Some(v) = self.memo.get(&recipe.ptr_key()) {
            return Ok(v.clone());
        }
        let value = match recipe.kind() {
            TermKind::Var(_) => recipe.clone(),
            TermKind::Param(p) => {
                let t = self
                    .frame
                    .get(p)
                    .ok_or(EvalError::UnknownParameter(p.0))?
                    .clone();
                self.rewriter.normalize(&t)?
            }
            TermKind::App(f, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let t = Term::app(self.sig, *f, vals);
                self.rewriter.normalize(&t)?
            }
        };
        // The memo is keyed by pointer; keep the key's node alive so the
        // address cannot be reused.
        self.keep_alive.push(recipe.clone());
        self.memo.insert(recipe.ptr_key(), value.clone());
        Ok(value)
    }

    /// Evaluates both sides of an equation and compares the normal forms.
    pub fn sides_equal(&mut self, lhs: &Term, rhs: &Term) -> Result<bool, EvalError> {
        Ok(self.eval(lhs)? == self.eval(rhs)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::RewriteRule;
    use crate::term::{SymbolOrigin, Visibility};

    #[test]
    fn evaluates_recipes_on_a_frame() {
        let mut sig = Signature::with_reserved();
        let enc = sig.intern("enc", 2, Visibility::Public, SymbolOrigin::Declared);
        let dec = sig.intern("dec", 2, Visibility::Public, SymbolOrigin::Declared);
        let c0 = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let k = sig.intern("k", 0, Visibility::Private, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let y = sig.intern_var("y");
        let rule = RewriteRule::new(
            Term::app(
                &sig,
                dec,
                vec![
                    Term::app(&sig, enc, vec![Term::var(x), Term::var(y)]),
                    Term::var(y),
                ],
            ),
            Term::var(x),
            0,
        );
        let system = RewriteSystem::new(vec![rule]);
        let c0t = Term::constant(&sig, c0);
        let kt = Term::constant(&sig, k);
        let frame = InitialFrame {
            name: "phi0".into(),
            entries: vec![
                (ParamId(1), Term::app(&sig, enc, vec![c0t.clone(), kt.clone()])),
                (ParamId(2), kt),
            ],
        };
        let mut ev = FrameEvaluator::new(&sig, &system, &frame, 10_000);
        // dec(w1,w2) evaluates to c0
        let recipe = Term::app(
            &sig,
            dec,
            vec![Term::param(ParamId(1)), Term::param(ParamId(2))],
        );
        assert_eq!(ev.eval(&recipe).unwrap(), c0t);
        assert!(ev.sides_equal(&recipe, &c0t).unwrap());
        // unknown parameter is an error
        let bad = Term::param(ParamId(9));
        assert!(matches!(ev.eval(&bad), Err(EvalError::UnknownParameter(9))));
    }
}
