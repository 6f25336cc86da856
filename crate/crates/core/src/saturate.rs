//! The saturation engine: starting from a reduced initial frame, apply the
//! syntactic composition rules (B) and the context-reduction rules (A) until
//! nothing changes, failure becomes unavoidable, or the step budget runs out.
//!
//! Scheduling follows the fair strategy: B rules run to fixpoint with highest
//! priority, A-rule instances are applied FIFO and each fires at most once.
//! An instance whose reduct is neither deducible nor ground is parked rather
//! than failing immediately; parked instances are retried whenever the frame
//! grows, and the run fails only when one of them is still stuck at
//! quiescence. Public constants are available as recipe leaves everywhere but
//! are never stored as facts.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::decompose::Decomposition;
use crate::equation::{EquationSet, QuantifiedEquation};
use crate::eval::FrameEvaluator;
use crate::frame::{init_frame, DeductionFact, Frame, InitError, InitialFrame};
use crate::rewrite::{Rewriter, DEFAULT_STEP_CAP};
use crate::term::{Signature, Subst, SymbolId, Term, TermKind, VarId};
use crate::theory::Theory;

pub const DEFAULT_MAX_STEPS: u64 = 50_000;

#[derive(Debug, Clone)]
pub struct SaturateOptions {
    /// Budget of strict (state-changing) rule applications.
    pub max_steps: u64,
    /// Per-call rewrite step cap.
    pub rewrite_cap: u64,
    pub trace: bool,
    /// Re-verify every added fact and equation against the initial frame by
    /// normalization.
    pub assert_soundness: bool,
}

impl Default for SaturateOptions {
    fn default() -> SaturateOptions {
        SaturateOptions {
            max_steps: DEFAULT_MAX_STEPS,
            rewrite_cap: DEFAULT_STEP_CAP,
            trace: false,
            assert_soundness: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct SaturationStats {
    pub strict_steps: u64,
    pub b1_equations: u64,
    pub b2_facts: u64,
    pub a1_equations: u64,
    pub a2_facts: u64,
    pub deferrals: u64,
    pub deferred_retries: u64,
    pub instances_discovered: u64,
    pub dropped_equations: u64,
}

#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub label: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct FailureDiagnostic {
    pub rule_index: usize,
    pub rule: String,
    pub decomposition: String,
    pub core_terms: Vec<Term>,
    pub reduct: Term,
}

impl FailureDiagnostic {
    pub fn render(&self, sig: &Signature) -> String {
        let cores: Vec<String> = self
            .core_terms
            .iter()
            .map(|t| t.display(sig).to_string())
            .collect();
        format!(
            "rule {} with decomposition {} on facts for [{}]: reduct {} is neither ground nor deducible",
            self.rule, self.decomposition, cores.join(", "),
            self.reduct.display(sig)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BudgetKind {
    StrictSteps,
    RewriteCap,
}

#[derive(Debug, Clone)]
pub struct BudgetDiagnostic {
    pub kind: BudgetKind,
    pub strict_steps: u64,
}

#[derive(Debug, Clone)]
pub enum SaturationStatus {
    Saturated,
    Failed(FailureDiagnostic),
    Indeterminate(BudgetDiagnostic),
}

impl SaturationStatus {
    pub fn is_saturated(&self) -> bool {
        matches!(self, SaturationStatus::Saturated)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SoundnessReport {
    pub checked: u64,
    pub violations: Vec<String>,
}

#[derive(Debug)]
pub struct SaturationResult {
    pub status: SaturationStatus,
    pub frame: Frame,
    pub equations: EquationSet,
    /// Facts `0..init_fact_count` came from the initial frame.
    pub init_fact_count: usize,
    pub stats: SaturationStats,
    pub trace: Vec<TraceEvent>,
    pub soundness: Option<SoundnessReport>,
}

/// Recipe for `t` over the frame's facts and public constants, preferring a
/// direct fact match at each node before decomposing through a public head.
pub fn syntactic_deduce(sig: &Signature, frame: &Frame, t: &Term) -> Option<Term> {
    deduce_with(sig, frame, &[], t)
}

/// As [`syntactic_deduce`], with the given variables available as recipes for
/// themselves.
pub fn deduce_with(sig: &Signature, frame: &Frame, zvars: &[VarId], t: &Term) -> Option<Term> {
    if let Some(r) = frame.recipe_for(t) {
        return Some(r.clone());
    }
    match t.kind() {
        TermKind::Var(v) => zvars.contains(v).then(|| t.clone()),
        TermKind::Param(_) => None,
        TermKind::App(f, args) => {
            if !sig.is_public(*f) {
                return None;
            }
            let mut recipes = Vec::with_capacity(args.len());
            for a in args {
                recipes.push(deduce_with(sig, frame, zvars, a)?);
            }
            Some(Term::app(sig, *f, recipes))
        }
    }
}

/// The Ctx function used by rule A.1: normalize, then search for a syntactic
/// recipe over the facts, the free variables, and public constants.
pub fn ctx_recipe(
    sig: &Signature,
    rewriter: &mut Rewriter,
    frame: &Frame,
    zvars: &[VarId],
    t: &Term,
) -> Result<Option<Term>, crate::rewrite::StepCapExceeded> {
    let reduced = rewriter.normalize(t)?;
    Ok(deduce_with(sig, frame, zvars, &reduced))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InstanceStatus {
    Queued,
    Processed,
    Deferred,
    WaitingPremise,
}

#[derive(Debug)]
struct Instance {
    rule: usize,
    decomp: usize,
    core_terms: Vec<Term>,
    subst: Subst,
    status: InstanceStatus,
}

enum Stop {
    StrictBudget,
    RewriteCap,
}

struct Engine<'t> {
    th: &'t Theory,
    opts: SaturateOptions,
    rewriter: Rewriter<'t>,
    frame: Frame,
    equations: EquationSet,
    stats: SaturationStats,
    trace: Vec<TraceEvent>,
    checker: Option<(FrameEvaluator<'t>, SoundnessReport)>,

    // B machinery: distinct public composite subterms of fact terms, each
    // firing at most once, woken when a child or the term itself gets carried.
    composite_fired: HashMap<Term, bool>,
    const_seen: HashSet<Term>,
    const_fired: HashSet<Term>,
    waiters: HashMap<Term, Vec<Term>>,
    ready: VecDeque<Term>,
    registered: HashSet<Term>,

    // A machinery.
    facts_by_head: HashMap<SymbolId, Vec<usize>>,
    instances: Vec<Instance>,
    instance_ids: HashMap<(usize, usize, Vec<Term>), usize>,
    worklist: VecDeque<usize>,
    discovered_upto: usize,
    early_stop: Option<Stop>,
}

impl<'t> Engine<'t> {
    fn new(th: &'t Theory, initial: &InitialFrame, opts: SaturateOptions) -> Result<Engine<'t>, InitError> {
        let (frame, init_eqs) = init_frame(&th.sig, &th.system, initial, opts.rewrite_cap)?;
        let mut rewriter = Rewriter::new(&th.sig, &th.system);
        rewriter.step_cap = opts.rewrite_cap;
        let checker = opts.assert_soundness.then(|| {
            (
                FrameEvaluator::new(&th.sig, &th.system, initial, opts.rewrite_cap),
                SoundnessReport::default(),
            )
        });
        let mut engine = Engine {
            th,
            opts,
            rewriter,
            frame: Frame::new(),
            equations: EquationSet::new(),
            stats: SaturationStats::default(),
            trace: Vec::new(),
            checker,
            composite_fired: HashMap::new(),
            const_seen: HashSet::new(),
            const_fired: HashSet::new(),
            waiters: HashMap::new(),
            ready: VecDeque::new(),
            registered: HashSet::new(),
            facts_by_head: HashMap::new(),
            instances: Vec::new(),
            instance_ids: HashMap::new(),
            worklist: VecDeque::new(),
            discovered_upto: 0,
            early_stop: None,
        };
        // Re-play the reduced initial frame through the fact path so the B
        // index sees it, without counting strict steps.
        let replay = (|| -> Result<(), Stop> {
            for fact in frame.facts() {
                engine.push_fact(fact.clone(), false, "init-fact")?;
            }
            for (a, b) in init_eqs {
                engine.add_equation(&a, &b, false, "init-eq")?;
            }
            Ok(())
        })();
        if let Err(stop) = replay {
            engine.early_stop = Some(stop);
        }
        Ok(engine)
    }

    fn emit(&mut self, label: &'static str, detail: impl FnOnce(&Signature) -> String) {
        if self.opts.trace {
            let detail = detail(&self.th.sig);
            self.trace.push(TraceEvent { label, detail });
        }
    }

    fn count_strict(&mut self) -> Result<(), Stop> {
        self.stats.strict_steps += 1;
        if self.stats.strict_steps > self.opts.max_steps {
            Err(Stop::StrictBudget)
        } else {
            Ok(())
        }
    }

    fn soundcheck_fact(&mut self, fact: &DeductionFact) {
        if let Some((eval, report)) = self.checker.as_mut() {
            report.checked += 1;
            match eval.eval(&fact.recipe) {
                Ok(v) if v == fact.term => {}
                Ok(v) => report.violations.push(format!(
                    "fact {} |> {} evaluates to {}",
                    fact.recipe.display(&self.th.sig),
                    fact.term.display(&self.th.sig),
                    v.display(&self.th.sig)
                )),
                Err(e) => report
                    .violations
                    .push(format!("fact check did not terminate: {e}")),
            }
        }
    }

    fn soundcheck_equation(&mut self, eq: &QuantifiedEquation) {
        if self.checker.is_none() {
            return;
        }
        // Ground the bound variables with the reserved constant before
        // evaluating both sides on the initial frame.
        let a = Term::constant(&self.th.sig, self.th.sig.reserved_const());
        let mut subst = Subst::new();
        for v in eq.lhs().vars().into_iter().chain(eq.rhs().vars()) {
            subst.insert(v, a.clone());
        }
        let l = eq.lhs().apply_subst(&self.th.sig, &subst);
        let r = eq.rhs().apply_subst(&self.th.sig, &subst);
        let rendered = format!("{}", eq.display(&self.th.sig));
        let (eval, report) = self.checker.as_mut().unwrap();
        report.checked += 1;
        match eval.sides_equal(&l, &r) {
            Ok(true) => {}
            Ok(false) => report
                .violations
                .push(format!("equation {rendered} does not hold on the frame")),
            Err(e) => report
                .violations
                .push(format!("equation check did not terminate: {e}")),
        }
    }

    /// Adds a canonicalized equation unless it is a reflexivity instance or a
    /// consequence of the theory alone (both sides normalize equal with
    /// variables and parameters inert). Returns whether the set grew.
    fn add_equation(
        &mut self,
        a: &Term,
        b: &Term,
        strict: bool,
        label: &'static str,
    ) -> Result<bool, Stop> {
        let eq = QuantifiedEquation::new(&self.th.sig, a, b);
        if eq.is_trivial() {
            return Ok(false);
        }
        let nl = self
            .rewriter
            .normalize(eq.lhs())
            .map_err(|_| Stop::RewriteCap)?;
        let nr = self
            .rewriter
            .normalize(eq.rhs())
            .map_err(|_| Stop::RewriteCap)?;
        if nl == nr {
            self.stats.dropped_equations += 1;
            return Ok(false);
        }
        if !self.equations.insert(eq.clone()) {
            return Ok(false);
        }
        self.soundcheck_equation(&eq);
        self.emit(label, |sig| format!("{}", eq.display(sig)));
        if strict {
            self.count_strict()?;
        }
        Ok(true)
    }

    fn push_fact(
        &mut self,
        fact: DeductionFact,
        strict: bool,
        label: &'static str,
    ) -> Result<usize, Stop> {
        self.soundcheck_fact(&fact);
        self.emit(label, |sig| {
            format!(
                "{} |> {}",
                fact.recipe.display(sig),
                fact.term.display(sig)
            )
        });
        let term = fact.term.clone();
        let idx = self.frame.push(fact);
        let head = match term.kind() {
            TermKind::App(f, _) => *f,
            _ => unreachable!("fact terms are ground plain terms"),
        };
        self.facts_by_head.entry(head).or_default().push(idx);
        self.register_subterms(&term);
        if let Some(list) = self.waiters.get(&term) {
            self.ready.extend(list.iter().cloned());
        }
        if self.composite_fired.contains_key(&term) {
            self.ready.push_back(term.clone());
        }
        if self.const_seen.contains(&term) {
            self.fire_const(&term, strict)?;
        }
        if strict {
            self.count_strict()?;
        }
        Ok(idx)
    }

    /// Registers every distinct public-headed subterm of a fact term; private
    /// subtrees without public applications are skipped.
    fn register_subterms(&mut self, t: &Term) {
        if !t.has_public_app() {
            return;
        }
        if !self.registered.insert(t.clone()) {
            return;
        }
        if let TermKind::App(f, args) = t.kind() {
            if self.th.sig.is_public(*f) {
                if args.is_empty() {
                    self.const_seen.insert(t.clone());
                    if self.frame.carries(t) {
                        self.ready.push_back(t.clone());
                    }
                } else {
                    self.composite_fired.insert(t.clone(), false);
                    for a in args {
                        self.waiters.entry(a.clone()).or_default().push(t.clone());
                    }
                    self.ready.push_back(t.clone());
                }
            }
            for a in args {
                self.register_subterms(a);
            }
        }
    }

    /// Recipe available for a composition child: a carried fact first, then a
    /// public constant as itself.
    fn child_recipe(&self, t: &Term) -> Option<Term> {
        if let Some(r) = self.frame.recipe_for(t) {
            return Some(r.clone());
        }
        t.as_public_constant(&self.th.sig).map(|_| t.clone())
    }

    fn fire_const(&mut self, c: &Term, strict: bool) -> Result<(), Stop> {
        if self.const_fired.contains(c) {
            return Ok(());
        }
        if let Some(recipe) = self.frame.recipe_for(c) {
            let recipe = recipe.clone();
            self.const_fired.insert(c.clone());
            if self.add_equation(&c.clone(), &recipe, strict, "B.1")? {
                self.stats.b1_equations += 1;
            }
        }
        Ok(())
    }

    /// Drains the B ready-queue to fixpoint. Composition through a public
    /// head: if the subterm is already carried we record the visible equation
    /// (B.1, constants usable as children); otherwise, when every child is
    /// carried by a real fact, the composed recipe becomes a new fact (B.2).
    fn b_fixpoint(&mut self) -> Result<(), Stop> {
        while let Some(s) = self.ready.pop_front() {
            if self.const_seen.contains(&s) {
                self.fire_const(&s, true)?;
                continue;
            }
            let Some(&fired) = self.composite_fired.get(&s) else {
                continue;
            };
            if fired {
                continue;
            }
            let (f, args) = s.as_app().expect("composites are applications");
            if let Some(recipe_s) = self.frame.recipe_for(&s).cloned() {
                let mut recipes = Vec::with_capacity(args.len());
                let mut ok = true;
                for a in args {
                    match self.child_recipe(a) {
                        Some(r) => recipes.push(r),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    self.composite_fired.insert(s.clone(), true);
                    let composed = Term::app(&self.th.sig, f, recipes);
                    if self.add_equation(&composed, &recipe_s, true, "B.1")? {
                        self.stats.b1_equations += 1;
                    }
                }
            } else {
                let mut recipes = Vec::with_capacity(args.len());
                let mut ok = true;
                for a in args {
                    match self.frame.recipe_for(a) {
                        Some(r) => recipes.push(r.clone()),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    self.composite_fired.insert(s.clone(), true);
                    let composed = Term::app(&self.th.sig, f, recipes);
                    self.stats.b2_facts += 1;
                    self.push_fact(
                        DeductionFact {
                            recipe: composed,
                            term: s.clone(),
                        },
                        true,
                        "B.2",
                    )?;
                }
            }
        }
        Ok(())
    }

    fn instance_key(&self, rule: usize, decomp: usize, cores: &[Term]) -> (usize, usize, Vec<Term>) {
        (rule, decomp, cores.to_vec())
    }

    fn enqueue_instance(&mut self, rule: usize, decomp: usize, cores: Vec<Term>, subst: Subst) {
        let key = self.instance_key(rule, decomp, &cores);
        if self.instance_ids.contains_key(&key) {
            return;
        }
        let id = self.instances.len();
        self.instances.push(Instance {
            rule,
            decomp,
            core_terms: cores,
            subst,
            status: InstanceStatus::Queued,
        });
        self.instance_ids.insert(key, id);
        self.worklist.push_back(id);
        self.stats.instances_discovered += 1;
    }

    /// Seeds the instances that involve no facts at all (decompositions with
    /// no cores); they exist regardless of the frame.
    fn seed_coreless_instances(&mut self) {
        for rule in 0..self.th.system.len() {
            for (di, d) in self.th.decompositions(rule).iter().enumerate() {
                if d.n() == 0 {
                    self.enqueue_instance(rule, di, Vec::new(), Subst::new());
                }
            }
        }
    }

    /// Semi-naive discovery: every simultaneous match of a decomposition's
    /// cores against fact terms where at least one slot uses a new fact.
    /// Candidates are indexed by head symbol.
    fn discover_instances(&mut self, new_start: usize) {
        let total = self.frame.len();
        let mut found: Vec<(usize, usize, Vec<Term>, Subst)> = Vec::new();
        for rule in 0..self.th.system.len() {
            for (di, d) in self.th.decompositions(rule).iter().enumerate() {
                let n = d.n();
                if n == 0 {
                    continue;
                }
                // Slot `pivot` takes a new fact, earlier slots old facts only,
                // later slots any fact; this partitions the assignments.
                for pivot in 0..n {
                    let mut cores = vec![Term::var(VarId(0)); n];
                    self.match_slots(
                        d, 0, pivot, new_start, total, &Subst::new(), &mut cores, &mut found, rule,
                        di,
                    );
                }
            }
        }
        for (rule, di, cores, subst) in found {
            self.enqueue_instance(rule, di, cores, subst);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn match_slots(
        &self,
        d: &Decomposition,
        slot: usize,
        pivot: usize,
        new_start: usize,
        total: usize,
        subst: &Subst,
        cores: &mut Vec<Term>,
        found: &mut Vec<(usize, usize, Vec<Term>, Subst)>,
        rule: usize,
        di: usize,
    ) {
        if slot == d.n() {
            found.push((rule, di, cores.clone(), subst.clone()));
            return;
        }
        let head = match d.cores[slot].kind() {
            TermKind::App(f, _) => *f,
            _ => unreachable!("cores are non-variable terms"),
        };
        let (lo, hi) = if slot == pivot {
            (new_start, total)
        } else if slot < pivot {
            (0, new_start)
        } else {
            (0, total)
        };
        let Some(candidates) = self.facts_by_head.get(&head) else {
            return;
        };
        for &idx in candidates {
            if idx < lo || idx >= hi {
                continue;
            }
            let term = self.frame.fact(idx).term.clone();
            let mut next = subst.clone();
            if crate::term::match_into(&d.cores[slot], &term, &mut next) {
                cores[slot] = term;
                self.match_slots(d, slot + 1, pivot, new_start, total, &next, cores, found, rule, di);
            }
        }
    }

    /// Moves parked instances (deferred or waiting on an underivable premise)
    /// back onto the worklist after frame growth.
    fn requeue_parked(&mut self) {
        for id in 0..self.instances.len() {
            let st = self.instances[id].status;
            if st == InstanceStatus::Deferred || st == InstanceStatus::WaitingPremise {
                if st == InstanceStatus::Deferred {
                    self.stats.deferred_retries += 1;
                }
                self.instances[id].status = InstanceStatus::Queued;
                self.worklist.push_back(id);
            }
        }
    }

    /// B fixpoint, then instance discovery and parked-instance retry, looping
    /// until the frame stops growing.
    fn settle(&mut self) -> Result<(), Stop> {
        loop {
            self.b_fixpoint()?;
            if self.discovered_upto == self.frame.len() {
                return Ok(());
            }
            let new_start = self.discovered_upto;
            self.discovered_upto = self.frame.len();
            self.discover_instances(new_start);
            self.requeue_parked();
        }
    }

    fn apply_instance(&mut self, id: usize) -> Result<(), Stop> {
        let (rule_idx, decomp_idx) = {
            let inst = &self.instances[id];
            (inst.rule, inst.decomp)
        };
        let d = &self.th.decompositions(rule_idx)[decomp_idx];
        let rule = &self.th.system.rules()[rule_idx];
        let subst = self.instances[id].subst.clone();
        let core_terms = self.instances[id].core_terms.clone();

        // Recipes for the core facts (terms are carried for good) and for the
        // bound-variable premises; a bound premise may also be any
        // syntactically deducible term, and if it is not derivable yet the
        // instance waits for more facts.
        let core_recipes: Vec<Term> = core_terms
            .iter()
            .map(|t| self.frame.recipe_for(t).cloned().expect("core fact present"))
            .collect();
        let mut bound_recipes = Vec::with_capacity(d.p());
        for y in &d.bound_vars {
            let yterm = subst.get(*y).expect("bound variable covered by core match").clone();
            match syntactic_deduce(&self.th.sig, &self.frame, &yterm) {
                Some(r) => bound_recipes.push(r),
                None => {
                    self.instances[id].status = InstanceStatus::WaitingPremise;
                    return Ok(());
                }
            }
        }

        let rsigma = rule.rhs.apply_subst(&self.th.sig, &subst);
        let reduct = self
            .rewriter
            .normalize(&rsigma)
            .map_err(|_| Stop::RewriteCap)?;

        let zvars = d.free_vars.clone();
        let zterms: Vec<Term> = zvars.iter().map(|v| Term::var(*v)).collect();
        let quantified_lhs = d.fill(&self.th.sig, &core_recipes, &bound_recipes, &zterms);

        if reduct.is_ground()
            && !self.frame.carries(&reduct)
            && reduct.as_public_constant(&self.th.sig).is_none()
        {
            // A.2: the reduct is a fresh ground term; name it with the
            // reserved constant at the free slots.
            let a = Term::constant(&self.th.sig, self.th.sig.reserved_const());
            let aterms: Vec<Term> = vec![a; d.q()];
            let m0 = d.fill(&self.th.sig, &core_recipes, &bound_recipes, &aterms);
            self.instances[id].status = InstanceStatus::Processed;
            self.stats.a2_facts += 1;
            self.push_fact(
                DeductionFact {
                    recipe: m0.clone(),
                    term: reduct,
                },
                true,
                "A.2",
            )?;
            self.add_equation(&quantified_lhs, &m0, true, "A.2")?;
            return Ok(());
        }

        match deduce_with(&self.th.sig, &self.frame, &zvars, &reduct) {
            Some(recipe) => {
                self.instances[id].status = InstanceStatus::Processed;
                if self.add_equation(&quantified_lhs, &recipe, true, "A.1")? {
                    self.stats.a1_equations += 1;
                }
                Ok(())
            }
            None => {
                self.instances[id].status = InstanceStatus::Deferred;
                self.stats.deferrals += 1;
                self.emit("A.3-defer", |sig| {
                    format!(
                        "rule {} decomposition {} reduct {}",
                        rule_idx,
                        d.context.display(sig),
                        reduct.display(sig)
                    )
                });
                Ok(())
            }
        }
    }

    fn failure_diagnostic(&self) -> Option<FailureDiagnostic> {
        let id = (0..self.instances.len())
            .find(|&i| self.instances[i].status == InstanceStatus::Deferred)?;
        let inst = &self.instances[id];
        let d = &self.th.decompositions(inst.rule)[inst.decomp];
        let rule = &self.th.system.rules()[inst.rule];
        let rsigma = rule.rhs.apply_subst(&self.th.sig, &inst.subst);
        Some(FailureDiagnostic {
            rule_index: inst.rule,
            rule: self.th.rule_display(inst.rule),
            decomposition: d.context.display(&self.th.sig).to_string(),
            core_terms: inst.core_terms.clone(),
            reduct: rsigma,
        })
    }

    fn run(&mut self) -> Result<SaturationStatus, Stop> {
        if let Some(stop) = self.early_stop.take() {
            return Err(stop);
        }
        self.seed_coreless_instances();
        self.discovered_upto = 0;
        self.settle()?;
        loop {
            let Some(id) = self.worklist.pop_front() else {
                return Ok(match self.failure_diagnostic() {
                    Some(diag) => SaturationStatus::Failed(diag),
                    None => SaturationStatus::Saturated,
                });
            };
            if self.instances[id].status != InstanceStatus::Queued {
                continue;
            }
            self.apply_instance(id)?;
            self.settle()?;
        }
    }
}

/// Saturates the initial frame. Input errors (ill-formed frames) are distinct
/// from engine outcomes.
pub fn saturate(
    th: &Theory,
    initial: &InitialFrame,
    opts: &SaturateOptions,
) -> Result<SaturationResult, InitError> {
    let mut engine = Engine::new(th, initial, opts.clone())?;
    let init_fact_count = engine.frame.len();
    let status = match engine.run() {
        Ok(status) => status,
        Err(stop) => SaturationStatus::Indeterminate(BudgetDiagnostic {
            kind: match stop {
                Stop::StrictBudget => BudgetKind::StrictSteps,
                Stop::RewriteCap => BudgetKind::RewriteCap,
            },
            strict_steps: engine.stats.strict_steps,
        }),
    };
    debug_assert!(
        engine.stats.b2_facts
            <= crate::bounds::distinct_subterm_count(engine.frame.image()) as u64,
        "composition added more facts than distinct subterms"
    );
    let soundness = engine.checker.take().map(|(_, report)| report);
    Ok(SaturationResult {
        status,
        frame: engine.frame,
        equations: engine.equations,
        init_fact_count,
        stats: engine.stats,
        trace: engine.trace,
        soundness,
    })
}
