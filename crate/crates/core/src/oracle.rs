//! Brute-force semantic ground truth at small depth: enumerate recipes over
//! the frame's parameters, the theory's public symbols, and a small pool of
//! fresh constants, and evaluate them by normalization. Results are one-sided
//! by construction — "not found" only means "not found within the budget".
//! The engine never consults the oracle; it exists for differential testing
//! and the `oracle` CLI command.

use std::collections::HashMap;

use crate::eval::FrameEvaluator;
use crate::frame::InitialFrame;
use crate::rewrite::Rewriter;
use crate::term::{SymbolOrigin, Term};
use crate::theory::Theory;

#[derive(Debug, Clone, Copy)]
pub struct RecipeBudget {
    pub max_depth: u32,
    /// How many constants of the fresh pool the enumeration may use.
    pub fresh_constants: usize,
    /// Hard cap on enumerated recipes.
    pub cap: usize,
}

impl Default for RecipeBudget {
    fn default() -> RecipeBudget {
        RecipeBudget {
            max_depth: 3,
            fresh_constants: 2,
            cap: 200_000,
        }
    }
}

impl RecipeBudget {
    pub fn with_depth(depth: u32) -> RecipeBudget {
        RecipeBudget {
            max_depth: depth,
            ..Default::default()
        }
    }
}

/// Recipes paired with their values on a frame, in enumeration order (depth
/// first, total term order within a depth). `complete` is false when the cap
/// truncated the enumeration or an evaluation hit the rewrite cap.
pub struct Evaluated {
    pub entries: Vec<(Term, Term)>,
    pub complete: bool,
}

fn enumeration_leaves(th: &Theory, frame: &InitialFrame, budget: &RecipeBudget) -> Vec<Term> {
    let mut leaves: Vec<Term> = frame
        .entries
        .iter()
        .map(|(p, _)| Term::param(*p))
        .collect();
    for (id, info) in th.sig.symbols() {
        if info.arity == 0
            && info.visibility == crate::term::Visibility::Public
            && info.origin != SymbolOrigin::Reserved
        {
            leaves.push(Term::constant(&th.sig, id));
        }
    }
    for id in th.sig.fresh_pool().iter().take(budget.fresh_constants) {
        leaves.push(Term::constant(&th.sig, *id));
    }
    leaves
}

/// All recipes up to the budget's depth, in enumeration order.
pub fn enumerate_recipes(th: &Theory, frame: &InitialFrame, budget: &RecipeBudget) -> (Vec<Term>, bool) {
    let mut by_depth: Vec<Vec<Term>> = Vec::new();
    let mut leaves = enumeration_leaves(th, frame, budget);
    leaves.sort_by(|a, b| a.cmp_total(b));
    let mut total = leaves.len();
    by_depth.push(leaves);
    let functions: Vec<_> = th
        .sig
        .symbols()
        .filter(|(_, info)| {
            info.arity > 0 && info.visibility == crate::term::Visibility::Public
        })
        .map(|(id, info)| (id, info.arity))
        .collect();
    let mut complete = true;
    'depth: for d in 1..budget.max_depth as usize {
        let mut level = Vec::new();
        // Arguments draw from all earlier levels, with at least one argument
        // of maximal depth so each recipe is enumerated exactly once.
        let pool: Vec<&Term> = by_depth.iter().flatten().collect();
        let deepest_from = pool.len() - by_depth[d - 1].len();
        for &(f, arity) in &functions {
            let mut indices = vec![0usize; arity];
            loop {
                if indices.iter().any(|&i| i >= deepest_from) {
                    let args: Vec<Term> = indices.iter().map(|&i| pool[i].clone()).collect();
                    level.push(Term::app(&th.sig, f, args));
                    total += 1;
                    if total >= budget.cap {
                        complete = false;
                        level.sort_by(|a, b| a.cmp_total(b));
                        by_depth.push(level);
                        break 'depth;
                    }
                }
                // odometer over the argument pool
                let mut pos = arity;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < pool.len() {
                        break;
                    }
                    indices[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX || arity == 0 {
                    break;
                }
            }
        }
        level.sort_by(|a, b| a.cmp_total(b));
        by_depth.push(level);
    }
    (by_depth.into_iter().flatten().collect(), complete)
}

/// Enumerates and evaluates recipes on a frame.
pub fn evaluate_recipes(th: &Theory, frame: &InitialFrame, budget: &RecipeBudget) -> Evaluated {
    let (recipes, mut complete) = enumerate_recipes(th, frame, budget);
    let mut eval = FrameEvaluator::new(&th.sig, &th.system, frame, crate::rewrite::DEFAULT_STEP_CAP);
    let mut entries = Vec::with_capacity(recipes.len());
    for r in recipes {
        match eval.eval(&r) {
            Ok(v) => entries.push((r, v)),
            Err(_) => complete = false,
        }
    }
    Evaluated { entries, complete }
}

#[derive(Debug, Clone)]
pub struct OracleDeduction {
    pub recipe: Option<Term>,
    /// False when the search was truncated; a `None` recipe is then only
    /// "not found within budget".
    pub complete: bool,
}

/// Searches for a recipe evaluating to `t` (modulo normalization). The
/// returned recipe is self-checked by evaluation before being reported.
pub fn oracle_deducible(
    th: &Theory,
    frame: &InitialFrame,
    t: &Term,
    budget: &RecipeBudget,
) -> OracleDeduction {
    let mut rw = Rewriter::new(&th.sig, &th.system);
    let Ok(target) = rw.normalize(t) else {
        return OracleDeduction {
            recipe: None,
            complete: false,
        };
    };
    let evaluated = evaluate_recipes(th, frame, budget);
    for (recipe, value) in &evaluated.entries {
        if *value == target {
            let mut check = FrameEvaluator::new(
                &th.sig,
                &th.system,
                frame,
                crate::rewrite::DEFAULT_STEP_CAP,
            );
            debug_assert_eq!(check.eval(recipe).ok(), Some(target.clone()));
            let _ = &mut check;
            return OracleDeduction {
                recipe: Some(recipe.clone()),
                complete: evaluated.complete,
            };
        }
    }
    OracleDeduction {
        recipe: None,
        complete: evaluated.complete,
    }
}

#[derive(Debug, Clone)]
pub struct OracleDistinction {
    pub test: Option<(Term, Term)>,
    pub complete: bool,
}

/// Searches for a pair of recipes that evaluate equal on one frame and
/// different on the other. Frames must share their domain.
pub fn oracle_distinguish(
    th: &Theory,
    left: &InitialFrame,
    right: &InitialFrame,
    budget: &RecipeBudget,
) -> OracleDistinction {
    let (recipes, enum_complete) = enumerate_recipes(th, left, budget);
    let mut eval_l = FrameEvaluator::new(&th.sig, &th.system, left, crate::rewrite::DEFAULT_STEP_CAP);
    let mut eval_r = FrameEvaluator::new(&th.sig, &th.system, right, crate::rewrite::DEFAULT_STEP_CAP);
    let mut complete = enum_complete;
    // First recipe seen per left-value and per right-value; a later recipe
    // joining a class with a different opposite-side value is a test.
    let mut by_left: HashMap<Term, (Term, Term)> = HashMap::new();
    let mut by_right: HashMap<Term, (Term, Term)> = HashMap::new();
    for recipe in recipes {
        let (vl, vr) = match (eval_l.eval(&recipe), eval_r.eval(&recipe)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                complete = false;
                continue;
            }
        };
        if let Some((first, first_vr)) = by_left.get(&vl) {
            if *first_vr != vr {
                return OracleDistinction {
                    test: Some((first.clone(), recipe)),
                    complete,
                };
            }
        } else {
            by_left.insert(vl.clone(), (recipe.clone(), vr.clone()));
        }
        if let Some((first, first_vl)) = by_right.get(&vr) {
            if *first_vl != vl {
                return OracleDistinction {
                    test: Some((first.clone(), recipe)),
                    complete,
                };
            }
        } else {
            by_right.insert(vr, (recipe, vl));
        }
    }
    OracleDistinction {
        test: None,
        complete,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{RewriteRule, RewriteSystem};
    use crate::term::{ParamId, Signature, SymbolOrigin, Visibility};

    struct Setup {
        th: Theory,
        enc: crate::term::SymbolId,
        dec: crate::term::SymbolId,
        c0: crate::term::SymbolId,
        c1: crate::term::SymbolId,
        k: crate::term::SymbolId,
        s: crate::term::SymbolId,
    }

    fn setup() -> Setup {
        let mut sig = Signature::with_reserved();
        let enc = sig.intern("enc", 2, Visibility::Public, SymbolOrigin::Declared);
        let dec = sig.intern("dec", 2, Visibility::Public, SymbolOrigin::Declared);
        let c0 = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let c1 = sig.intern("c1", 0, Visibility::Public, SymbolOrigin::Declared);
        let k = sig.intern("k", 0, Visibility::Private, SymbolOrigin::Declared);
        let s = sig.intern("s", 0, Visibility::Private, SymbolOrigin::Declared);
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
        let th = Theory::new(sig, RewriteSystem::new(vec![rule])).unwrap();
        Setup {
            th,
            enc,
            dec,
            c0,
            c1,
            k,
            s,
        }
    }

    fn phi(s: &Setup, body: crate::term::SymbolId, with_key: bool) -> InitialFrame {
        let sig = &s.th.sig;
        let mut entries = vec![(
            ParamId(1),
            Term::app(
                sig,
                s.enc,
                vec![Term::constant(sig, body), Term::constant(sig, s.k)],
            ),
        )];
        if with_key {
            entries.push((ParamId(2), Term::constant(sig, s.k)));
        }
        InitialFrame {
            name: "phi".into(),
            entries,
        }
    }

    #[test]
    fn finds_the_plaintext_with_the_key() {
        let s = setup();
        let frame = phi(&s, s.c0, true);
        let c0 = Term::constant(&s.th.sig, s.c0);
        let found = oracle_deducible(&s.th, &frame, &c0, &RecipeBudget::with_depth(3));
        let recipe = found.recipe.expect("c0 is deducible");
        let mut eval = FrameEvaluator::new(&s.th.sig, &s.th.system, &frame, 10_000);
        assert_eq!(eval.eval(&recipe).unwrap(), c0);
    }

    #[test]
    fn secret_without_key_is_not_found() {
        let s = setup();
        let sig = &s.th.sig;
        let frame = InitialFrame {
            name: "f".into(),
            entries: vec![(
                ParamId(1),
                Term::app(
                    sig,
                    s.enc,
                    vec![Term::constant(sig, s.s), Term::constant(sig, s.k)],
                ),
            )],
        };
        let res = oracle_deducible(
            &s.th,
            &frame,
            &Term::constant(sig, s.s),
            &RecipeBudget::with_depth(4),
        );
        assert!(res.recipe.is_none());
        assert!(res.complete, "small search space should be exhaustive");
    }

    #[test]
    fn distinguishes_revealed_key_frames() {
        let s = setup();
        let phi0 = phi(&s, s.c0, true);
        let phi1 = phi(&s, s.c1, true);
        let d = oracle_distinguish(&s.th, &phi0, &phi1, &RecipeBudget::with_depth(3));
        let (m, n) = d.test.expect("frames are distinguishable");
        let mut e0 = FrameEvaluator::new(&s.th.sig, &s.th.system, &phi0, 10_000);
        let mut e1 = FrameEvaluator::new(&s.th.sig, &s.th.system, &phi1, 10_000);
        let l0 = e0.eval(&m).unwrap() == e0.eval(&n).unwrap();
        let l1 = e1.eval(&m).unwrap() == e1.eval(&n).unwrap();
        assert_ne!(l0, l1, "a test holds on exactly one frame");
    }

    #[test]
    fn no_distinction_without_key() {
        let s = setup();
        let phi0 = phi(&s, s.c0, false);
        let phi1 = phi(&s, s.c1, false);
        let d = oracle_distinguish(&s.th, &phi0, &phi1, &RecipeBudget::with_depth(3));
        assert!(d.test.is_none());
        // identical frames never distinguish
        let d = oracle_distinguish(&s.th, &phi0, &phi0, &RecipeBudget::with_depth(3));
        assert!(d.test.is_none());
        let _ = s.dec;
    }
}
