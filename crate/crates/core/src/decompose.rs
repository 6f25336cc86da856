//! Cutting a rule's left-hand side into a public context over core pieces,
//! bound variables, and free variables. Every application of an A rule is
//! driven by one of these decompositions.
//!
//! A decomposition of `l` is a public context `D` with
//! `D[l1..ln, y1..yp, z1..zq] = l`, where the `li` are distinct non-variable
//! subterms, the `y` are variables occurring in some `li`, and the `z` are
//! the remaining variables. Equal subterms and repeated variables share one
//! parameter, so nonlinearity survives the cut. Enumeration walks the lhs
//! choosing, per non-variable node, cut-as-core versus expand-into-context; a
//! private head forces a cut. The root is never cut: that would be the
//! improper decomposition `D = w1`.

use std::collections::HashMap;

use crate::rewrite::{RewriteRule, RewriteSystem};
use crate::term::{ParamId, Position, Signature, Term, TermKind, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decomposition {
    /// Public context over parameters `w1..w(n+p+q)`.
    pub context: Term,
    /// Core terms `l1..ln`, mutually distinct, non-variable.
    pub cores: Vec<Term>,
    /// Variables occurring in some core.
    pub bound_vars: Vec<VarId>,
    /// Variables of the lhs outside every core.
    pub free_vars: Vec<VarId>,
    pub rule_index: usize,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.cores.len()
    }

    pub fn p(&self) -> usize {
        self.bound_vars.len()
    }

    pub fn q(&self) -> usize {
        self.free_vars.len()
    }

    pub fn is_proper(&self) -> bool {
        !matches!(self.context.kind(), TermKind::Param(_))
    }

    /// The improper decomposition `D = w1`, `l1 = lhs`. Only the layered
    /// checker looks at it.
    pub fn improper(rule: &RewriteRule, rule_index: usize) -> Decomposition {
        Decomposition {
            context: Term::param(ParamId(1)),
            cores: vec![rule.lhs.clone()],
            bound_vars: Vec::new(),
            free_vars: Vec::new(),
            rule_index,
        }
    }

    /// Parameter assigned to the j-th slot overall (cores, then bound, then
    /// free variables), 1-based.
    pub fn slot_count(&self) -> usize {
        self.n() + self.p() + self.q()
    }

    /// Fills the context with the given terms for core slots, bound-variable
    /// slots, and free-variable slots, in that order.
    pub fn fill(&self, sig: &Signature, cores: &[Term], bound: &[Term], free: &[Term]) -> Term {
        assert_eq!(cores.len(), self.n());
        assert_eq!(bound.len(), self.p());
        assert_eq!(free.len(), self.q());
        let mut map = std::collections::BTreeMap::new();
        for (i, t) in cores.iter().chain(bound).chain(free).enumerate() {
            map.insert(ParamId(i as u32 + 1), t.clone());
        }
        self.context.fill_params(sig, &map)
    }

    /// Rebuilds the lhs from the decomposition's own components.
    pub fn reconstruct(&self, sig: &Signature) -> Term {
        let bound: Vec<Term> = self.bound_vars.iter().map(|v| Term::var(*v)).collect();
        let free: Vec<Term> = self.free_vars.iter().map(|v| Term::var(*v)).collect();
        self.fill(sig, &self.cores, &bound, &free)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> crate::term::TermDisplay<'a> {
        self.context.display(sig)
    }
}

/// All cut frontiers of `t`: sets of positions at which a core is carved out.
/// The root is never in a frontier. A private-headed node below the root has
/// no expand option, so every frontier covers it.
fn enumerate_frontiers(
    sig: &Signature,
    t: &Term,
    pos: &mut Vec<u32>,
    is_root: bool,
) -> Vec<Vec<Position>> {
    match t.kind() {
        TermKind::Var(_) => vec![Vec::new()],
        TermKind::Param(_) => unreachable!("rule lhs contains no parameters"),
        TermKind::App(f, args) => {
            let mut out = Vec::new();
            if !is_root {
                out.push(vec![Position(pos.clone())]);
            }
            if sig.is_public(*f) {
                // Expand: combine the children's frontier choices.
                let mut combos: Vec<Vec<Position>> = vec![Vec::new()];
                let mut dead = false;
                for (i, a) in args.iter().enumerate() {
                    pos.push(i as u32);
                    let child = enumerate_frontiers(sig, a, pos, false);
                    pos.pop();
                    if child.is_empty() {
                        dead = true;
                        break;
                    }
                    let mut next = Vec::with_capacity(combos.len() * child.len());
                    for base in &combos {
                        for ext in &child {
                            let mut merged = base.clone();
                            merged.extend(ext.iter().cloned());
                            next.push(merged);
                        }
                    }
                    combos = next;
                }
                if !dead {
                    out.extend(combos);
                }
            }
            out
        }
    }
}

fn build_decomposition(
    sig: &Signature,
    rule: &RewriteRule,
    rule_index: usize,
    frontier: &[Position],
) -> Decomposition {
    let cut: std::collections::HashSet<&Position> = frontier.iter().collect();

    // First pass: cores in preorder first-occurrence order, and the variables
    // appearing at slot positions, also in first-occurrence order.
    let mut cores: Vec<Term> = Vec::new();
    let mut slot_vars: Vec<VarId> = Vec::new();
    {
        let mut pos = Vec::new();
        fn walk(
            t: &Term,
            pos: &mut Vec<u32>,
            cut: &std::collections::HashSet<&Position>,
            cores: &mut Vec<Term>,
            slot_vars: &mut Vec<VarId>,
        ) {
            let here = Position(pos.clone());
            if cut.contains(&here) {
                if !cores.contains(t) {
                    cores.push(t.clone());
                }
                return;
            }
            match t.kind() {
                TermKind::Var(v) => {
                    if !slot_vars.contains(v) {
                        slot_vars.push(*v);
                    }
                }
                TermKind::App(_, args) => {
                    for (i, a) in args.iter().enumerate() {
                        pos.push(i as u32);
                        walk(a, pos, cut, cores, slot_vars);
                        pos.pop();
                    }
                }
                TermKind::Param(_) => unreachable!(),
            }
        }
        walk(&rule.lhs, &mut pos, &cut, &mut cores, &mut slot_vars);
    }

    let core_vars: std::collections::HashSet<VarId> =
        cores.iter().flat_map(|c| c.vars()).collect();
    let bound_vars: Vec<VarId> = slot_vars
        .iter()
        .copied()
        .filter(|v| core_vars.contains(v))
        .collect();
    let free_vars: Vec<VarId> = slot_vars
        .iter()
        .copied()
        .filter(|v| !core_vars.contains(v))
        .collect();

    let mut param_of_core: HashMap<Term, ParamId> = HashMap::new();
    for (i, c) in cores.iter().enumerate() {
        param_of_core.insert(c.clone(), ParamId(i as u32 + 1));
    }
    let mut param_of_var: HashMap<VarId, ParamId> = HashMap::new();
    for (j, v) in bound_vars.iter().enumerate() {
        param_of_var.insert(*v, ParamId((cores.len() + j) as u32 + 1));
    }
    for (k, v) in free_vars.iter().enumerate() {
        param_of_var.insert(*v, ParamId((cores.len() + bound_vars.len() + k) as u32 + 1));
    }

    // Second pass: rebuild the context with parameters at the slots.
    fn rebuild(
        sig: &Signature,
        t: &Term,
        pos: &mut Vec<u32>,
        cut: &std::collections::HashSet<&Position>,
        param_of_core: &HashMap<Term, ParamId>,
        param_of_var: &HashMap<VarId, ParamId>,
    ) -> Term {
        let here = Position(pos.clone());
        if cut.contains(&here) {
            return Term::param(param_of_core[t]);
        }
        match t.kind() {
            TermKind::Var(v) => Term::param(param_of_var[v]),
            TermKind::App(f, args) => {
                let new_args = args
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        pos.push(i as u32);
                        let r = rebuild(sig, a, pos, cut, param_of_core, param_of_var);
                        pos.pop();
                        r
                    })
                    .collect();
                Term::app(sig, *f, new_args)
            }
            TermKind::Param(_) => unreachable!(),
        }
    }
    let mut pos = Vec::new();
    let context = rebuild(
        sig,
        &rule.lhs,
        &mut pos,
        &cut,
        &param_of_core,
        &param_of_var,
    );

    Decomposition {
        context,
        cores,
        bound_vars,
        free_vars,
        rule_index,
    }
}

/// Every proper decomposition of the rule, exactly once up to parameter
/// permutation, in a deterministic order.
pub fn enumerate_decompositions(
    sig: &Signature,
    rule: &RewriteRule,
    rule_index: usize,
) -> Vec<Decomposition> {
    let mut pos = Vec::new();
    let frontiers = enumerate_frontiers(sig, &rule.lhs, &mut pos, true);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for frontier in frontiers {
        let d = build_decomposition(sig, rule, rule_index, &frontier);
        debug_assert_eq!(d.reconstruct(sig), rule.lhs, "decomposition must rebuild the lhs");
        if seen.insert(d.clone()) {
            out.push(d);
        }
    }
    out
}

/// Proper decompositions of every rule, indexed by rule. Computed once at
/// theory elaboration and cached.
pub fn decompose_system(sig: &Signature, system: &RewriteSystem) -> Vec<Vec<Decomposition>> {
    system
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| enumerate_decompositions(sig, r, i))
        .collect()
}
