//! Term-closure helpers backing the saturation growth bounds: plain subterm
//! closure for weakly subterm convergent systems, and the extended-subterm
//! closure that additionally covers prefix extraction from encrypted pairs.

use std::collections::HashSet;

use crate::rewrite::{RewriteSystem, Rewriter};
use crate::term::{Signature, SymbolId, Term, TermKind};

/// Number of distinct subterms across the given terms.
pub fn distinct_subterm_count<'a>(terms: impl Iterator<Item = &'a Term>) -> usize {
    let mut seen = HashSet::new();
    for t in terms {
        for s in t.distinct_subterms() {
            seen.insert(s);
        }
    }
    seen.len()
}

/// Distinct subterm closure of a set of terms.
pub fn subterm_closure<'a>(terms: impl Iterator<Item = &'a Term>) -> HashSet<Term> {
    let mut seen = HashSet::new();
    for t in terms {
        for s in t.distinct_subterms() {
            seen.insert(s);
        }
    }
    seen
}

/// Every rule right-hand side that is ground and reduced.
pub fn ground_reduced_rhs(sig: &Signature, system: &RewriteSystem) -> HashSet<Term> {
    let mut out = HashSet::new();
    let mut rw = Rewriter::new(sig, system);
    for rule in system.rules() {
        if rule.rhs.is_ground() {
            if let Ok(true) = rw.is_reduced(&rule.rhs) {
                out.insert(rule.rhs.clone());
            }
        }
    }
    out
}

/// The extended-subterm closure: ordinary subterms, except that an encryption
/// of a pair additionally contributes the encryption of the pair's first
/// component under the same key.
pub fn extended_subterm_closure<'a>(
    sig: &Signature,
    enc: SymbolId,
    pair: SymbolId,
    terms: impl Iterator<Item = &'a Term>,
) -> HashSet<Term> {
    fn walk(sig: &Signature, enc: SymbolId, pair: SymbolId, t: &Term, out: &mut HashSet<Term>) {
        if !out.insert(t.clone()) {
            return;
        }
        match t.kind() {
            TermKind::App(f, args) if *f == enc && args.len() == 2 => {
                if let Some((g, pargs)) = args[0].as_app() {
                    if g == pair && pargs.len() == 2 {
                        let prefix = Term::app(sig, enc, vec![pargs[0].clone(), args[1].clone()]);
                        walk(sig, enc, pair, &prefix, out);
                    }
                }
                for a in args {
                    walk(sig, enc, pair, a, out);
                }
            }
            TermKind::App(_, args) => {
                for a in args {
                    walk(sig, enc, pair, a, out);
                }
            }
            _ => {}
        }
    }
    let mut out = HashSet::new();
    for t in terms {
        walk(sig, enc, pair, t, &mut out);
    }
    out
}
