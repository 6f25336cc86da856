//! First-order terms over a signature of public/private symbols, with
//! variables and frame parameters as distinct leaf kinds.
//!
//! Terms are immutable and reference-counted. Subterms are shared freely, so
//! structurally exponential recipes stay linear in memory; equality and
//! hashing stay cheap through pointer short-cuts and a precomputed structural
//! hash. Sharing is invisible to callers: equality is structural.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Index of a function symbol in its [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

/// A variable. Ids below [`VarId::BOUND_BASE`] index the signature's variable
/// table; ids at or above it are canonical bound variables of quantified
/// equations, printed `z1`, `z2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub const BOUND_BASE: u32 = 1 << 31;

    pub fn bound(index: u32) -> VarId {
        VarId(Self::BOUND_BASE + index)
    }

    pub fn is_bound(self) -> bool {
        self.0 >= Self::BOUND_BASE
    }

    pub fn bound_index(self) -> Option<u32> {
        self.is_bound().then(|| self.0 - Self::BOUND_BASE)
    }
}

/// A frame parameter `w1`, `w2`, ... (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Visibility {
    Public,
    Private,
}

/// How a symbol entered the signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolOrigin {
    Declared,
    /// Undeclared nullary identifier elaborated as a free public constant.
    ImplicitPublicConstant,
    /// Internal constants: the fixed constant used when instantiating bound
    /// variables, and the oracle's fresh pool. Unparseable from user input.
    Reserved,
}

#[derive(Debug, Clone)]
pub struct SymbolInfo {
    pub name: String,
    pub arity: usize,
    pub visibility: Visibility,
    pub origin: SymbolOrigin,
}

/// Symbol and variable tables. Names are unique; reserved symbols use a `#`
/// prefix that the theory lexer cannot produce.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    symbols: Vec<SymbolInfo>,
    by_name: std::collections::HashMap<String, SymbolId>,
    vars: Vec<String>,
    var_by_name: std::collections::HashMap<String, VarId>,
    reserved: Option<SymbolId>,
    fresh_pool: Vec<SymbolId>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    /// A signature with the reserved constant and the oracle fresh pool
    /// already registered. This is what elaboration produces.
    pub fn with_reserved() -> Signature {
        let mut sig = Signature::new();
        sig.ensure_reserved();
        sig
    }

    pub fn ensure_reserved(&mut self) {
        if self.reserved.is_none() {
            let a = self.intern("#a", 0, Visibility::Public, SymbolOrigin::Reserved);
            let n1 = self.intern("#n1", 0, Visibility::Public, SymbolOrigin::Reserved);
            let n2 = self.intern("#n2", 0, Visibility::Public, SymbolOrigin::Reserved);
            self.reserved = Some(a);
            self.fresh_pool = vec![n1, n2];
        }
    }

    pub fn intern(
        &mut self,
        name: &str,
        arity: usize,
        visibility: Visibility,
        origin: SymbolOrigin,
    ) -> SymbolId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolInfo {
            name: name.to_string(),
            arity,
            visibility,
            origin,
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn intern_var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.var_by_name.get(name) {
            return v;
        }
        let v = VarId(self.vars.len() as u32);
        self.vars.push(name.to_string());
        self.var_by_name.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn lookup_var(&self, name: &str) -> Option<VarId> {
        self.var_by_name.get(name).copied()
    }

    pub fn info(&self, id: SymbolId) -> &SymbolInfo {
        &self.symbols[id.0 as usize]
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.info(id).arity
    }

    pub fn is_public(&self, id: SymbolId) -> bool {
        self.info(id).visibility == Visibility::Public
    }

    pub fn var_name(&self, v: VarId) -> String {
        match v.bound_index() {
            Some(i) => format!("z{}", i + 1),
            None => self.vars[v.0 as usize].clone(),
        }
    }

    /// The fixed public constant substituted for bound variables.
    pub fn reserved_const(&self) -> SymbolId {
        self.reserved.expect("signature built without reserved symbols")
    }

    /// Fresh public constants available to the brute-force oracle.
    pub fn fresh_pool(&self) -> &[SymbolId] {
        &self.fresh_pool
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &SymbolInfo)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, info)| (SymbolId(i as u32), info))
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }
}

#[derive(Debug)]
pub enum TermKind {
    Var(VarId),
    Param(ParamId),
    App(SymbolId, Vec<Term>),
}

#[derive(Debug)]
struct TermNode {
    kind: TermKind,
    hash: u64,
    size: u64,
    height: u32,
    has_var: bool,
    has_param: bool,
    has_private: bool,
    /// Some application node in this tree has a public head symbol.
    has_public_app: bool,
}

/// An immutable shared term.
#[derive(Clone)]
pub struct Term {
    node: Arc<TermNode>,
}

// FNV-1a, fixed seed: hashes must be stable across runs for deterministic
// ordering of otherwise-equal-size terms.
fn fnv(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = seed ^ 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

impl Term {
    pub fn var(v: VarId) -> Term {
        Term {
            node: Arc::new(TermNode {
                hash: fnv(1, &v.0.to_le_bytes()),
                size: 1,
                height: 1,
                has_var: true,
                has_param: false,
                has_private: false,
                has_public_app: false,
                kind: TermKind::Var(v),
            }),
        }
    }

    pub fn param(p: ParamId) -> Term {
        Term {
            node: Arc::new(TermNode {
                hash: fnv(2, &p.0.to_le_bytes()),
                size: 1,
                height: 1,
                has_var: false,
                has_param: true,
                has_private: false,
                has_public_app: false,
                kind: TermKind::Param(p),
            }),
        }
    }

    /// Builds an application node. Panics if the argument count does not match
    /// the symbol's declared arity; elaboration rejects ill-formed input, so a
    /// mismatch here is a programming error.
    pub fn app(sig: &Signature, f: SymbolId, args: Vec<Term>) -> Term {
        let info = sig.info(f);
        assert_eq!(
            info.arity,
            args.len(),
            "arity mismatch applying {}: expected {}, got {}",
            info.name,
            info.arity,
            args.len()
        );
        let public = info.visibility == Visibility::Public;
        let mut hash = fnv(3, &f.0.to_le_bytes());
        let mut size: u64 = 1;
        let mut height = 0;
        let mut has_var = false;
        let mut has_param = false;
        let mut has_private = !public;
        let mut has_public_app = public;
        for a in &args {
            hash = fnv(hash, &a.node.hash.to_le_bytes());
            size = size.saturating_add(a.node.size);
            height = height.max(a.node.height);
            has_var |= a.node.has_var;
            has_param |= a.node.has_param;
            has_private |= a.node.has_private;
            has_public_app |= a.node.has_public_app;
        }
        Term {
            node: Arc::new(TermNode {
                kind: TermKind::App(f, args),
                hash,
                size,
                height: height + 1,
                has_var,
                has_param,
                has_private,
                has_public_app,
            }),
        }
    }

    pub fn constant(sig: &Signature, c: SymbolId) -> Term {
        Term::app(sig, c, Vec::new())
    }

    pub fn kind(&self) -> &TermKind {
        &self.node.kind
    }

    pub fn size(&self) -> u64 {
        self.node.size
    }

    pub fn height(&self) -> u32 {
        self.node.height
    }

    pub fn is_ground(&self) -> bool {
        !self.node.has_var
    }

    /// A plain term contains no parameters.
    pub fn is_plain(&self) -> bool {
        !self.node.has_param
    }

    /// A recipe contains no private symbols.
    pub fn is_recipe(&self) -> bool {
        !self.node.has_private
    }

    pub fn has_public_app(&self) -> bool {
        self.node.has_public_app
    }

    pub fn is_var(&self) -> bool {
        matches!(self.node.kind, TermKind::Var(_))
    }

    pub fn as_app(&self) -> Option<(SymbolId, &[Term])> {
        match &self.node.kind {
            TermKind::App(f, args) => Some((*f, args)),
            _ => None,
        }
    }

    /// True for a nullary application of a public symbol.
    pub fn as_public_constant(&self, sig: &Signature) -> Option<SymbolId> {
        match &self.node.kind {
            TermKind::App(f, args) if args.is_empty() && sig.is_public(*f) => Some(*f),
            _ => None,
        }
    }

    /// Stable pointer identity, used as a memoization key.
    pub fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.node) as usize
    }

    pub fn ptr_eq(a: &Term, b: &Term) -> bool {
        Arc::ptr_eq(&a.node, &b.node)
    }

    /// Every position of the term paired with the subterm there, in preorder.
    /// Positions use 0-based child indices.
    pub fn subterms(&self) -> Vec<(Position, Term)> {
        let mut out = Vec::new();
        fn walk(t: &Term, pos: &mut Vec<u32>, out: &mut Vec<(Position, Term)>) {
            out.push((Position(pos.clone()), t.clone()));
            if let TermKind::App(_, args) = &t.node.kind {
                for (i, a) in args.iter().enumerate() {
                    pos.push(i as u32);
                    walk(a, pos, out);
                    pos.pop();
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Distinct subterms, deduplicated, in first-visit preorder.
    pub fn distinct_subterms(&self) -> Vec<Term> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        fn walk(t: &Term, seen: &mut std::collections::HashSet<Term>, out: &mut Vec<Term>) {
            if !seen.insert(t.clone()) {
                return;
            }
            out.push(t.clone());
            if let TermKind::App(_, args) = &t.node.kind {
                for a in args {
                    walk(a, seen, out);
                }
            }
        }
        walk(self, &mut seen, &mut out);
        out
    }

    pub fn at(&self, pos: &Position) -> Option<Term> {
        let mut cur = self.clone();
        for &i in &pos.0 {
            let next = match cur.as_app() {
                Some((_, args)) => args.get(i as usize).cloned(),
                None => None,
            }?;
            cur = next;
        }
        Some(cur)
    }

    /// Replaces the subterm at `pos` with `u`. Panics on an invalid position;
    /// callers are expected to pass positions obtained from this term.
    pub fn replace_at(&self, sig: &Signature, pos: &Position, u: &Term) -> Term {
        fn go(t: &Term, sig: &Signature, path: &[u32], u: &Term) -> Term {
            match path.split_first() {
                None => u.clone(),
                Some((&i, rest)) => match t.kind() {
                    TermKind::App(f, args) => {
                        let i = i as usize;
                        assert!(i < args.len(), "invalid position in replace_at");
                        let mut new_args = args.clone();
                        new_args[i] = go(&args[i], sig, rest, u);
                        Term::app(sig, *f, new_args)
                    }
                    _ => panic!("invalid position in replace_at"),
                },
            }
        }
        go(self, sig, &pos.0, u)
    }

    /// The set of variables occurring in the term, sorted.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        let mut seen_nodes = std::collections::HashSet::new();
        fn walk(t: &Term, seen: &mut std::collections::HashSet<usize>, out: &mut Vec<VarId>) {
            if !t.node.has_var || !seen.insert(t.ptr_key()) {
                return;
            }
            match &t.node.kind {
                TermKind::Var(v) => out.push(*v),
                TermKind::App(_, args) => args.iter().for_each(|a| walk(a, seen, out)),
                TermKind::Param(_) => {}
            }
        }
        walk(self, &mut seen_nodes, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// The set of parameters occurring in the term, sorted.
    pub fn params(&self) -> Vec<ParamId> {
        let mut out = Vec::new();
        let mut seen_nodes = std::collections::HashSet::new();
        fn walk(t: &Term, seen: &mut std::collections::HashSet<usize>, out: &mut Vec<ParamId>) {
            if !t.node.has_param || !seen.insert(t.ptr_key()) {
                return;
            }
            match &t.node.kind {
                TermKind::Param(p) => out.push(*p),
                TermKind::App(_, args) => args.iter().for_each(|a| walk(a, seen, out)),
                TermKind::Var(_) => {}
            }
        }
        walk(self, &mut seen_nodes, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Simultaneous capture-free replacement of variables.
    pub fn apply_subst(&self, sig: &Signature, subst: &Subst) -> Term {
        if !self.node.has_var || subst.is_empty() {
            return self.clone();
        }
        match &self.node.kind {
            TermKind::Var(v) => subst.get(*v).cloned().unwrap_or_else(|| self.clone()),
            TermKind::Param(_) => self.clone(),
            TermKind::App(f, args) => {
                let new_args: Vec<Term> = args.iter().map(|a| a.apply_subst(sig, subst)).collect();
                if new_args
                    .iter()
                    .zip(args.iter())
                    .all(|(a, b)| Term::ptr_eq(a, b))
                {
                    self.clone()
                } else {
                    Term::app(sig, *f, new_args)
                }
            }
        }
    }

    /// Replacement of parameters by terms, used to fill decomposition
    /// contexts. Parameters with no entry are left as is.
    pub fn fill_params(&self, sig: &Signature, map: &BTreeMap<ParamId, Term>) -> Term {
        if !self.node.has_param {
            return self.clone();
        }
        match &self.node.kind {
            TermKind::Param(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            TermKind::Var(_) => self.clone(),
            TermKind::App(f, args) => {
                let new_args: Vec<Term> = args.iter().map(|a| a.fill_params(sig, map)).collect();
                if new_args
                    .iter()
                    .zip(args.iter())
                    .all(|(a, b)| Term::ptr_eq(a, b))
                {
                    self.clone()
                } else {
                    Term::app(sig, *f, new_args)
                }
            }
        }
    }

    /// Total order: by size, then leaf kind (parameter < variable <
    /// application), then ids, then arguments lexicographically. Stable
    /// across runs on the same input file.
    pub fn cmp_total(&self, other: &Term) -> Ordering {
        if Term::ptr_eq(self, other) {
            return Ordering::Equal;
        }
        match self.node.size.cmp(&other.node.size) {
            Ordering::Equal => {}
            ord => return ord,
        }
        match (&self.node.kind, &other.node.kind) {
            (TermKind::Param(a), TermKind::Param(b)) => a.cmp(b),
            (TermKind::Param(_), _) => Ordering::Less,
            (_, TermKind::Param(_)) => Ordering::Greater,
            (TermKind::Var(a), TermKind::Var(b)) => a.cmp(b),
            (TermKind::Var(_), _) => Ordering::Less,
            (_, TermKind::Var(_)) => Ordering::Greater,
            (TermKind::App(f, fa), TermKind::App(g, ga)) => match f.cmp(g) {
                Ordering::Equal => {
                    for (a, b) in fa.iter().zip(ga.iter()) {
                        match a.cmp_total(b) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                    }
                    Ordering::Equal
                }
                ord => ord,
            },
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if Arc::ptr_eq(&self.node, &other.node) {
            return true;
        }
        if self.node.hash != other.node.hash || self.node.size != other.node.size {
            return false;
        }
        match (&self.node.kind, &other.node.kind) {
            (TermKind::Var(a), TermKind::Var(b)) => a == b,
            (TermKind::Param(a), TermKind::Param(b)) => a == b,
            (TermKind::App(f, fa), TermKind::App(g, ga)) => {
                f == g && fa.iter().zip(ga.iter()).all(|(a, b)| a == b)
            }
            _ => false,
        }
    }
}

impl Eq for Term {}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.node.hash);
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node.kind {
            TermKind::Var(v) => write!(f, "x{}", v.0),
            TermKind::Param(p) => write!(f, "w{}", p.0),
            TermKind::App(s, args) => {
                write!(f, "s{}", s.0)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{:?}", a)?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Term, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t.kind() {
                TermKind::Var(v) => write!(f, "{}", sig.var_name(*v)),
                TermKind::Param(p) => write!(f, "w{}", p.0),
                TermKind::App(s, args) => {
                    let info = sig.info(*s);
                    // <a,b> sugar for the binary symbol literally named "pair".
                    if info.name == "pair" && args.len() == 2 {
                        write!(f, "<")?;
                        go(&args[0], sig, f)?;
                        write!(f, ",")?;
                        go(&args[1], sig, f)?;
                        return write!(f, ">");
                    }
                    write!(f, "{}", info.name)?;
                    if !args.is_empty() {
                        write!(f, "(")?;
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            go(a, sig, f)?;
                        }
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self.term, self.sig, f)
    }
}

/// A path of 0-based child indices; empty means the root. Displayed 1-based
/// with `.` separators to match the usual positional notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position(pub Vec<u32>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", x + 1)?;
        }
        Ok(())
    }
}

/// A finite mapping from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    map: BTreeMap<VarId, Term>,
}

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn singleton(v: VarId, t: Term) -> Subst {
        let mut s = Subst::new();
        s.insert(v, t);
        s
    }

    pub fn insert(&mut self, v: VarId, t: Term) {
        self.map.insert(v, t);
    }

    pub fn get(&self, v: VarId) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Term)> {
        self.map.iter().map(|(v, t)| (*v, t))
    }

    pub fn is_ground(&self) -> bool {
        self.map.values().all(|t| t.is_ground())
    }
}

/// Syntactic matching: the unique substitution with `pattern·σ = subject`, if
/// one exists. Nonlinear patterns require consistent bindings. Subject
/// variables and parameters behave as inert constants; a pattern variable may
/// bind them.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut subst = Subst::new();
    match_into(pattern, subject, &mut subst).then_some(subst)
}

/// Matching that extends an existing binding set; used for the simultaneous
/// match of decomposition cores.
pub fn match_into(pattern: &Term, subject: &Term, subst: &mut Subst) -> bool {
    match pattern.kind() {
        TermKind::Var(v) => match subst.get(*v) {
            Some(bound) => bound == subject,
            None => {
                subst.insert(*v, subject.clone());
                true
            }
        },
        TermKind::Param(p) => matches!(subject.kind(), TermKind::Param(q) if p == q),
        TermKind::App(f, pargs) => match subject.kind() {
            TermKind::App(g, sargs) if f == g => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(p, s, subst)),
            _ => false,
        },
    }
}
