//! Convergent rewrite systems and normalization.
//!
//! Normalization is innermost-leftmost with first-listed-rule priority, which
//! is reproducible and, for a convergent system, agrees with every other
//! strategy. Results are memoized by node identity so that heavily shared
//! terms normalize in time proportional to their distinct nodes. A step cap
//! guards against non-terminating user systems.

use std::collections::HashMap;

use crate::term::{match_term, Position, Signature, Subst, Term, TermKind, VarId};

#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub lhs: Term,
    pub rhs: Term,
    /// 0-based layer index; rules of stratum `i` may only rely on rules of
    /// strictly lower strata in the layered-theory analysis.
    pub stratum: usize,
}

impl RewriteRule {
    pub fn new(lhs: Term, rhs: Term, stratum: usize) -> RewriteRule {
        RewriteRule { lhs, rhs, stratum }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RewriteSystem {
    rules: Vec<RewriteRule>,
}

impl RewriteSystem {
    pub fn new(rules: Vec<RewriteRule>) -> RewriteSystem {
        RewriteSystem { rules }
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn max_stratum(&self) -> usize {
        self.rules.iter().map(|r| r.stratum).max().unwrap_or(0)
    }
}

/// A rule violated the well-formedness conditions.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule {index}: left-hand side is a variable")]
    LhsIsVariable { index: usize },
    #[error("rule {index}: variable {var} occurs in the right-hand side but not the left")]
    UnboundRhsVariable { index: usize, var: String },
    #[error("rule {index}: {side} side contains a parameter")]
    ParameterInRule { index: usize, side: &'static str },
}

/// Checks one rule: the lhs is not a variable, `var(rhs) ⊆ var(lhs)`, and
/// both sides are plain terms.
pub fn check_rule_wellformed(sig: &Signature, index: usize, rule: &RewriteRule) -> Vec<RuleError> {
    let mut errs = Vec::new();
    if rule.lhs.is_var() {
        errs.push(RuleError::LhsIsVariable { index });
    }
    if !rule.lhs.is_plain() {
        errs.push(RuleError::ParameterInRule {
            index,
            side: "left",
        });
    }
    if !rule.rhs.is_plain() {
        errs.push(RuleError::ParameterInRule {
            index,
            side: "right",
        });
    }
    let lhs_vars = rule.lhs.vars();
    for v in rule.rhs.vars() {
        if !lhs_vars.contains(&v) {
            errs.push(RuleError::UnboundRhsVariable {
                index,
                var: sig.var_name(v),
            });
        }
    }
    errs
}

pub fn check_system_wellformed(sig: &Signature, system: &RewriteSystem) -> Vec<RuleError> {
    system
        .rules()
        .iter()
        .enumerate()
        .flat_map(|(i, r)| check_rule_wellformed(sig, i, r))
        .collect()
}

/// The per-call rewrite step cap was exhausted; the user system may not
/// terminate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("rewrite step cap of {cap} exceeded while normalizing")]
pub struct StepCapExceeded {
    pub cap: u64,
}

pub const DEFAULT_STEP_CAP: u64 = 100_000;

struct PtrKey(Term);

impl PartialEq for PtrKey {
    fn eq(&self, other: &PtrKey) -> bool {
        Term::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for PtrKey {}
impl std::hash::Hash for PtrKey {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_usize(self.0.ptr_key());
    }
}

/// Normalizer for one rewrite system, with a node-identity memo shared across
/// calls. Not shared between threads; each saturation run owns one.
pub struct Rewriter<'s> {
    sig: &'s Signature,
    system: &'s RewriteSystem,
    /// Only rules with stratum strictly below this bound apply, when set.
    stratum_below: Option<usize>,
    memo: HashMap<PtrKey, Term>,
    steps_in_call: u64,
    pub step_cap: u64,
    pub total_steps: u64,
}

impl<'s> Rewriter<'s> {
    pub fn new(sig: &'s Signature, system: &'s RewriteSystem) -> Rewriter<'s> {
        Rewriter {
            sig,
            system,
            stratum_below: None,
            memo: HashMap::new(),
            steps_in_call: 0,
            step_cap: DEFAULT_STEP_CAP,
            total_steps: 0,
        }
    }

    /// A normalizer restricted to rules of stratum < `bound`.
    pub fn below_stratum(
        sig: &'s Signature,
        system: &'s RewriteSystem,
        bound: usize,
    ) -> Rewriter<'s> {
        let mut r = Rewriter::new(sig, system);
        r.stratum_below = Some(bound);
        r
    }

    fn rule_applies(&self, rule: &RewriteRule) -> bool {
        match self.stratum_below {
            Some(bound) => rule.stratum < bound,
            None => true,
        }
    }

    /// The unique reduced form of `t`. Variables and parameters are inert
    /// leaves, though rule variables may bind them.
    pub fn normalize(&mut self, t: &Term) -> Result<Term, StepCapExceeded> {
        self.steps_in_call = 0;
        self.norm(t)
    }

    fn norm(&mut self, t: &Term) -> Result<Term, StepCapExceeded> {
        match t.kind() {
            TermKind::Var(_) | TermKind::Param(_) => return Ok(t.clone()),
            TermKind::App(..) => {}
        }
        if let Some(n) = self.memo.get(&PtrKey(t.clone())) {
            return Ok(n.clone());
        }
        let (f, args) = t.as_app().expect("leaf handled above");
        let mut nargs = Vec::with_capacity(args.len());
        let mut changed = false;
        for a in args {
            let na = self.norm(a)?;
            changed |= !Term::ptr_eq(&na, a);
            nargs.push(na);
        }
        let mut u = if changed {
            Term::app(self.sig, f, nargs)
        } else {
            t.clone()
        };
        // Root rewriting: children are reduced, so any redex is at the root.
        // First matching rule in listing order wins; the contractum is
        // normalized in full, so no further root attempt is needed.
        for rule in self.system.rules() {
            if !self.rule_applies(rule) {
                continue;
            }
            if let Some(sigma) = match_term(&rule.lhs, &u) {
                self.steps_in_call += 1;
                self.total_steps += 1;
                if self.steps_in_call > self.step_cap {
                    return Err(StepCapExceeded { cap: self.step_cap });
                }
                let contractum = rule.rhs.apply_subst(self.sig, &sigma);
                u = self.norm(&contractum)?;
                break;
            }
        }
        self.memo.insert(PtrKey(t.clone()), u.clone());
        if !Term::ptr_eq(&u, t) {
            self.memo.insert(PtrKey(u.clone()), u.clone());
        }
        Ok(u)
    }

    /// True when `t` carries no redex.
    pub fn is_reduced(&mut self, t: &Term) -> Result<bool, StepCapExceeded> {
        Ok(self.normalize(t)? == *t)
    }
}

/// One innermost-leftmost reduction step with provenance: the reduct, the
/// redex position, and the index of the rule applied. `None` means `t` is
/// reduced.
pub fn reduce_once(
    sig: &Signature,
    system: &RewriteSystem,
    t: &Term,
) -> Option<(Term, Position, usize)> {
    fn go(
        sig: &Signature,
        system: &RewriteSystem,
        t: &Term,
        pos: &mut Vec<u32>,
    ) -> Option<(Term, Position, usize)> {
        if let TermKind::App(f, args) = t.kind() {
            for (i, a) in args.iter().enumerate() {
                pos.push(i as u32);
                if let Some((red, p, ri)) = go(sig, system, a, pos) {
                    pos.pop();
                    let mut new_args = args.to_vec();
                    new_args[i] = red;
                    return Some((Term::app(sig, *f, new_args), p, ri));
                }
                pos.pop();
            }
            for (ri, rule) in system.rules().iter().enumerate() {
                if let Some(sigma) = match_term(&rule.lhs, t) {
                    return Some((
                        rule.rhs.apply_subst(sig, &sigma),
                        Position(pos.clone()),
                        ri,
                    ));
                }
            }
        }
        None
    }
    go(sig, system, t, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Convergence lint: critical pairs and bounded joinability. Advisory only.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ConvergenceVerdict {
    Pass,
    Warn,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct CriticalPairReport {
    pub outer_rule: usize,
    pub inner_rule: usize,
    pub position: Position,
    pub left: Term,
    pub right: Term,
    pub joinable: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub verdict: ConvergenceVerdict,
    pub pairs: Vec<CriticalPairReport>,
}

/// Robinson unification, local to the lint: the engine itself only ever
/// needs matching.
fn unify(sig: &Signature, a: &Term, b: &Term) -> Option<Subst> {
    fn resolve(t: &Term, s: &Subst) -> Term {
        let mut cur = t.clone();
        while let TermKind::Var(v) = cur.kind() {
            match s.get(*v) {
                Some(bound) => cur = bound.clone(),
                None => break,
            }
        }
        cur
    }
    fn occurs(v: VarId, t: &Term, s: &Subst) -> bool {
        match t.kind() {
            TermKind::Var(u) => {
                if *u == v {
                    return true;
                }
                match s.get(*u) {
                    Some(bound) => occurs(v, &bound.clone(), s),
                    None => false,
                }
            }
            TermKind::Param(_) => false,
            TermKind::App(_, args) => args.iter().any(|a| occurs(v, a, s)),
        }
    }
    fn go(sig: &Signature, a: &Term, b: &Term, s: &mut Subst) -> bool {
        let a = resolve(a, s);
        let b = resolve(b, s);
        if a == b {
            return true;
        }
        match (a.kind(), b.kind()) {
            (TermKind::Var(v), _) => {
                if occurs(*v, &b, s) {
                    false
                } else {
                    s.insert(*v, b.clone());
                    true
                }
            }
            (_, TermKind::Var(v)) => {
                if occurs(*v, &a, s) {
                    false
                } else {
                    s.insert(*v, a.clone());
                    true
                }
            }
            (TermKind::App(f, fa), TermKind::App(g, ga)) if f == g => fa
                .iter()
                .zip(ga.iter())
                .all(|(x, y)| go(sig, x, y, s)),
            _ => false,
        }
    }
    let mut s = Subst::new();
    go(sig, a, b, &mut s).then(|| {
        // Flatten chains so application is a single pass.
        let mut flat = Subst::new();
        for (v, t) in s.iter() {
            let mut resolved = t.clone();
            loop {
                let next = resolved.apply_subst(sig, &s);
                if next == resolved {
                    break;
                }
                resolved = next;
            }
            flat.insert(v, resolved);
        }
        flat
    })
}

fn rename_apart(sig: &Signature, t: &Term, offset: u32) -> Term {
    match t.kind() {
        TermKind::Var(v) => Term::var(VarId(v.0 + offset)),
        TermKind::Param(_) => t.clone(),
        TermKind::App(f, args) => {
            let args = args.iter().map(|a| rename_apart(sig, a, offset)).collect();
            Term::app(sig, *f, args)
        }
    }
}

/// Computes the critical pairs of the system and checks each for joinability
/// within `budget` rewrite steps. Never blocks execution.
pub fn lint_convergence(
    sig: &Signature,
    system: &RewriteSystem,
    budget: u64,
) -> ConvergenceReport {
    // Offset that takes the inner rule's variables clear of the outer's.
    let var_offset = (sig.var_count() as u32).max(1);
    let mut pairs = Vec::new();
    let mut verdict = ConvergenceVerdict::Pass;

    for (oi, outer) in system.rules().iter().enumerate() {
        for (ii, inner) in system.rules().iter().enumerate() {
            let inner_lhs = rename_apart(sig, &inner.lhs, var_offset);
            let inner_rhs = rename_apart(sig, &inner.rhs, var_offset);
            for (pos, sub) in outer.lhs.subterms() {
                if sub.is_var() {
                    continue;
                }
                // The trivial overlap of a rule with itself at the root is
                // not a critical pair.
                if oi == ii && pos.is_root() {
                    continue;
                }
                let Some(sigma) = unify(sig, &sub, &inner_lhs) else {
                    continue;
                };
                let peak = outer.lhs.apply_subst(sig, &sigma);
                let left = outer.rhs.apply_subst(sig, &sigma);
                let right = peak.replace_at(sig, &pos, &inner_rhs.apply_subst(sig, &sigma));
                let mut rw = Rewriter::new(sig, system);
                rw.step_cap = budget;
                let joinable = match (rw.normalize(&left), rw.normalize(&right)) {
                    (Ok(l), Ok(r)) => Some(l == r),
                    _ => None,
                };
                match joinable {
                    Some(true) => {}
                    Some(false) => verdict = ConvergenceVerdict::Warn,
                    None => {
                        if verdict == ConvergenceVerdict::Pass {
                            verdict = ConvergenceVerdict::Inconclusive;
                        }
                    }
                }
                pairs.push(CriticalPairReport {
                    outer_rule: oi,
                    inner_rule: ii,
                    position: pos,
                    left,
                    right,
                    joinable,
                });
            }
        }
    }
    ConvergenceReport { verdict, pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{SymbolOrigin, Visibility};

    struct EncTheory {
        sig: Signature,
        system: RewriteSystem,
        enc: crate::term::SymbolId,
        dec: crate::term::SymbolId,
        pair: crate::term::SymbolId,
        proj1: crate::term::SymbolId,
        c0: crate::term::SymbolId,
        c1: crate::term::SymbolId,
        k: crate::term::SymbolId,
    }

    fn enc_theory() -> EncTheory {
        let mut sig = Signature::with_reserved();
        let enc = sig.intern("enc", 2, Visibility::Public, SymbolOrigin::Declared);
        let dec = sig.intern("dec", 2, Visibility::Public, SymbolOrigin::Declared);
        let pair = sig.intern("pair", 2, Visibility::Public, SymbolOrigin::Declared);
        let proj1 = sig.intern("proj1", 1, Visibility::Public, SymbolOrigin::Declared);
        let proj2 = sig.intern("proj2", 1, Visibility::Public, SymbolOrigin::Declared);
        let c0 = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let c1 = sig.intern("c1", 0, Visibility::Public, SymbolOrigin::Declared);
        let k = sig.intern("k", 0, Visibility::Private, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let y = sig.intern_var("y");
        let vx = Term::var(x);
        let vy = Term::var(y);
        let rules = vec![
            RewriteRule::new(
                Term::app(
                    &sig,
                    dec,
                    vec![
                        Term::app(&sig, enc, vec![vx.clone(), vy.clone()]),
                        vy.clone(),
                    ],
                ),
                vx.clone(),
                0,
            ),
            RewriteRule::new(
                Term::app(
                    &sig,
                    proj1,
                    vec![Term::app(&sig, pair, vec![vx.clone(), vy.clone()])],
                ),
                vx.clone(),
                0,
            ),
            RewriteRule::new(
                Term::app(
                    &sig,
                    proj2,
                    vec![Term::app(&sig, pair, vec![vx.clone(), vy.clone()])],
                ),
                vy.clone(),
                0,
            ),
        ];
        let system = RewriteSystem::new(rules);
        EncTheory {
            sig,
            system,
            enc,
            dec,
            pair,
            proj1,
            c0,
            c1,
            k,
        }
    }

    #[test]
    fn reduce_once_decryption() {
        let th = enc_theory();
        let c0 = Term::constant(&th.sig, th.c0);
        let k = Term::constant(&th.sig, th.k);
        let t = Term::app(
            &th.sig,
            th.dec,
            vec![Term::app(&th.sig, th.enc, vec![c0.clone(), k.clone()]), k],
        );
        let (red, pos, rule) = reduce_once(&th.sig, &th.system, &t).unwrap();
        assert_eq!(red, c0);
        assert_eq!(pos, Position::root());
        assert_eq!(rule, 0);
        // a normal form yields nothing
        assert!(reduce_once(&th.sig, &th.system, &c0).is_none());
    }

    #[test]
    fn reduce_once_projection() {
        let th = enc_theory();
        let k = Term::constant(&th.sig, th.k);
        let t = Term::app(
            &th.sig,
            th.proj1,
            vec![Term::app(&th.sig, th.pair, vec![k.clone(), k.clone()])],
        );
        let (red, pos, rule) = reduce_once(&th.sig, &th.system, &t).unwrap();
        assert_eq!(red, k);
        assert_eq!(pos, Position::root());
        assert_eq!(rule, 1);
    }

    #[test]
    fn normalize_two_steps_and_idempotence() {
        let th = enc_theory();
        let c0 = Term::constant(&th.sig, th.c0);
        let k = Term::constant(&th.sig, th.k);
        let inner = Term::app(
            &th.sig,
            th.dec,
            vec![
                Term::app(&th.sig, th.enc, vec![c0.clone(), k.clone()]),
                k.clone(),
            ],
        );
        // dec(enc(dec(enc(c0,k),k), k), k) normalizes to c0
        let t = Term::app(
            &th.sig,
            th.dec,
            vec![
                Term::app(&th.sig, th.enc, vec![inner, k.clone()]),
                k.clone(),
            ],
        );
        let mut rw = Rewriter::new(&th.sig, &th.system);
        let n = rw.normalize(&t).unwrap();
        assert_eq!(n, c0);
        assert_eq!(rw.normalize(&n).unwrap(), n);
        // reduced input is returned unchanged
        let e = Term::app(&th.sig, th.enc, vec![c0, k]);
        assert_eq!(rw.normalize(&e).unwrap(), e);
    }

    #[test]
    fn normalize_homomorphic_push() {
        // enc(<c0,c1>,k) -> <enc(c0,k),enc(c1,k)> under the pair-homomorphic
        // encryption rule.
        let mut sig = Signature::with_reserved();
        let enc = sig.intern("enc", 2, Visibility::Public, SymbolOrigin::Declared);
        let pair = sig.intern("pair", 2, Visibility::Public, SymbolOrigin::Declared);
        let c0s = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let c1s = sig.intern("c1", 0, Visibility::Public, SymbolOrigin::Declared);
        let ks = sig.intern("k", 0, Visibility::Private, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let y = sig.intern_var("y");
        let z = sig.intern_var("z");
        let rule = RewriteRule::new(
            Term::app(
                &sig,
                enc,
                vec![
                    Term::app(&sig, pair, vec![Term::var(x), Term::var(y)]),
                    Term::var(z),
                ],
            ),
            Term::app(
                &sig,
                pair,
                vec![
                    Term::app(&sig, enc, vec![Term::var(x), Term::var(z)]),
                    Term::app(&sig, enc, vec![Term::var(y), Term::var(z)]),
                ],
            ),
            0,
        );
        let system = RewriteSystem::new(vec![rule]);
        let c0 = Term::constant(&sig, c0s);
        let c1 = Term::constant(&sig, c1s);
        let k = Term::constant(&sig, ks);
        let t = Term::app(
            &sig,
            enc,
            vec![
                Term::app(&sig, pair, vec![c0.clone(), c1.clone()]),
                k.clone(),
            ],
        );
        let mut rw = Rewriter::new(&sig, &system);
        let expect = Term::app(
            &sig,
            pair,
            vec![
                Term::app(&sig, enc, vec![c0, k.clone()]),
                Term::app(&sig, enc, vec![c1, k]),
            ],
        );
        assert_eq!(rw.normalize(&t).unwrap(), expect);
    }

    #[test]
    fn wellformedness_checks() {
        let mut sig = Signature::with_reserved();
        let f = sig.intern("f", 1, Visibility::Public, SymbolOrigin::Declared);
        let c = sig.intern("c", 0, Visibility::Public, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let y = sig.intern_var("y");
        // f(x) -> y : unbound rhs variable
        let bad1 = RewriteRule::new(
            Term::app(&sig, f, vec![Term::var(x)]),
            Term::var(y),
            0,
        );
        let errs = check_rule_wellformed(&sig, 0, &bad1);
        assert!(matches!(errs[0], RuleError::UnboundRhsVariable { .. }));
        // x -> c : variable lhs
        let bad2 = RewriteRule::new(Term::var(x), Term::constant(&sig, c), 0);
        let errs = check_rule_wellformed(&sig, 1, &bad2);
        assert!(matches!(errs[0], RuleError::LhsIsVariable { index: 1 }));
        // ok
        let good = RewriteRule::new(
            Term::app(&sig, f, vec![Term::var(x)]),
            Term::var(x),
            0,
        );
        assert!(check_rule_wellformed(&sig, 2, &good).is_empty());
    }

    #[test]
    fn lint_enc_theory_passes() {
        let th = enc_theory();
        let report = lint_convergence(&th.sig, &th.system, 1000);
        assert_eq!(report.verdict, ConvergenceVerdict::Pass);
        let _ = th.c1;
    }

    #[test]
    fn lint_empty_system_passes() {
        let sig = Signature::with_reserved();
        let report = lint_convergence(&sig, &RewriteSystem::default(), 1000);
        assert_eq!(report.verdict, ConvergenceVerdict::Pass);
        assert!(report.pairs.is_empty());
    }

    #[test]
    fn lint_self_overlap_warns() {
        // f(f(x)) -> a overlaps itself below the root; the pair (a, f(a)) is
        // not joinable.
        let mut sig = Signature::with_reserved();
        let f = sig.intern("f", 1, Visibility::Public, SymbolOrigin::Declared);
        let a = sig.intern("a", 0, Visibility::Public, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let rule = RewriteRule::new(
            Term::app(&sig, f, vec![Term::app(&sig, f, vec![Term::var(x)])]),
            Term::constant(&sig, a),
            0,
        );
        let system = RewriteSystem::new(vec![rule]);
        let report = lint_convergence(&sig, &system, 1000);
        assert_eq!(report.verdict, ConvergenceVerdict::Warn);
        assert!(report.pairs.iter().any(|p| p.joinable == Some(false)));
    }

    #[test]
    fn step_cap_surfaces() {
        // f(x) -> f(f(x)) diverges immediately.
        let mut sig = Signature::with_reserved();
        let f = sig.intern("f", 1, Visibility::Public, SymbolOrigin::Declared);
        let c = sig.intern("c", 0, Visibility::Public, SymbolOrigin::Declared);
        let x = sig.intern_var("x");
        let rule = RewriteRule::new(
            Term::app(&sig, f, vec![Term::var(x)]),
            Term::app(&sig, f, vec![Term::app(&sig, f, vec![Term::var(x)])]),
            0,
        );
        let system = RewriteSystem::new(vec![rule]);
        let mut rw = Rewriter::new(&sig, &system);
        rw.step_cap = 50;
        let t = Term::app(&sig, f, vec![Term::constant(&sig, c)]);
        assert!(rw.normalize(&t).is_err());
    }
}
