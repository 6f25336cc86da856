//! A validated theory: signature, rewrite system, and the per-rule
//! decomposition cache.

use crate::decompose::{decompose_system, Decomposition};
use crate::rewrite::{check_system_wellformed, RewriteSystem, RuleError};
use crate::term::Signature;

#[derive(Debug, Clone)]
pub struct Theory {
    pub sig: Signature,
    pub system: RewriteSystem,
    decompositions: Vec<Vec<Decomposition>>,
}

impl Theory {
    pub fn new(mut sig: Signature, system: RewriteSystem) -> Result<Theory, Vec<RuleError>> {
        sig.ensure_reserved();
        let errors = check_system_wellformed(&sig, &system);
        if !errors.is_empty() {
            return Err(errors);
        }
        let decompositions = decompose_system(&sig, &system);
        Ok(Theory {
            sig,
            system,
            decompositions,
        })
    }

    /// Proper decompositions of rule `i`, cached at construction.
    pub fn decompositions(&self, rule: usize) -> &[Decomposition] {
        &self.decompositions[rule]
    }

    pub fn rule_display(&self, rule: usize) -> String {
        let r = &self.system.rules()[rule];
        format!(
            "{} -> {}",
            r.lhs.display(&self.sig),
            r.rhs.display(&self.sig)
        )
    }
}
