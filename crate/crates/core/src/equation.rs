//! Quantified equations between recipes, kept in canonical form.
//!
//! The relation is commutative and bound variables are nameless, so an
//! equation is stored with its sides ordered by the total term order and its
//! variables renamed by first occurrence. Renaming and ordering interact
//! (renaming depends on which side comes first), so canonicalization tries
//! both orientations and keeps the smaller result.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::term::{Signature, Term, TermKind, VarId};

/// `forall z1..zq. lhs ~ rhs`, canonicalized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantifiedEquation {
    bound_count: u32,
    lhs: Term,
    rhs: Term,
}

fn rename_by_first_occurrence(
    sig: &Signature,
    t: &Term,
    map: &mut HashMap<VarId, VarId>,
) -> Term {
    match t.kind() {
        TermKind::Var(v) => {
            let next = map.len() as u32;
            let canon = *map.entry(*v).or_insert_with(|| VarId::bound(next));
            Term::var(canon)
        }
        TermKind::Param(_) => t.clone(),
        TermKind::App(f, args) => {
            if t.is_ground() {
                return t.clone();
            }
            let args = args
                .iter()
                .map(|a| rename_by_first_occurrence(sig, a, map))
                .collect();
            Term::app(sig, *f, args)
        }
    }
}

impl QuantifiedEquation {
    /// Canonicalizes a raw recipe pair. All variables of both sides are
    /// treated as bound.
    pub fn new(sig: &Signature, a: &Term, b: &Term) -> QuantifiedEquation {
        let orient = |first: &Term, second: &Term| {
            let mut map = HashMap::new();
            let l = rename_by_first_occurrence(sig, first, &mut map);
            let r = rename_by_first_occurrence(sig, second, &mut map);
            (map.len() as u32, l, r)
        };
        let (qa, la, ra) = orient(a, b);
        let (qb, lb, rb) = orient(b, a);
        let pick_a = match la.cmp_total(&lb) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => ra.cmp_total(&rb) != Ordering::Greater,
        };
        if pick_a {
            QuantifiedEquation {
                bound_count: qa,
                lhs: la,
                rhs: ra,
            }
        } else {
            QuantifiedEquation {
                bound_count: qb,
                lhs: lb,
                rhs: rb,
            }
        }
    }

    pub fn bound_count(&self) -> u32 {
        self.bound_count
    }

    pub fn lhs(&self) -> &Term {
        &self.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.rhs
    }

    /// Both sides syntactically equal: a reflexivity instance.
    pub fn is_trivial(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn cmp_canonical(&self, other: &QuantifiedEquation) -> Ordering {
        self.lhs
            .cmp_total(&other.lhs)
            .then_with(|| self.rhs.cmp_total(&other.rhs))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> EquationDisplay<'a> {
        EquationDisplay { eq: self, sig }
    }
}

pub struct EquationDisplay<'a> {
    eq: &'a QuantifiedEquation,
    sig: &'a Signature,
}

impl fmt::Display for EquationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.eq.bound_count > 0 {
            write!(f, "forall ")?;
            for i in 0..self.eq.bound_count {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "z{}", i + 1)?;
            }
            write!(f, ". ")?;
        }
        // Larger side first: composed recipes read before the value they
        // reduce to.
        let (first, second) = match self.eq.lhs.cmp_total(&self.eq.rhs) {
            Ordering::Less => (&self.eq.rhs, &self.eq.lhs),
            _ => (&self.eq.lhs, &self.eq.rhs),
        };
        write!(
            f,
            "{} ~ {}",
            first.display(self.sig),
            second.display(self.sig)
        )
    }
}

/// A deduplicating equation set ordered canonically.
#[derive(Debug, Clone, Default)]
pub struct EquationSet {
    set: std::collections::BTreeSet<OrderedEq>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OrderedEq(QuantifiedEquation);

impl PartialOrd for OrderedEq {
    fn partial_cmp(&self, other: &OrderedEq) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrderedEq {
    fn cmp(&self, other: &OrderedEq) -> Ordering {
        self.0.cmp_canonical(&other.0)
    }
}

impl EquationSet {
    pub fn new() -> EquationSet {
        EquationSet::default()
    }

    /// Returns true if the equation was new.
    pub fn insert(&mut self, eq: QuantifiedEquation) -> bool {
        self.set.insert(OrderedEq(eq))
    }

    pub fn contains(&self, eq: &QuantifiedEquation) -> bool {
        self.set.contains(&OrderedEq(eq.clone()))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QuantifiedEquation> {
        self.set.iter().map(|o| &o.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{ParamId, SymbolOrigin, Visibility};

    #[test]
    fn canonical_form_is_orientation_insensitive() {
        let mut sig = Signature::with_reserved();
        let dec = sig.intern("dec", 2, Visibility::Public, SymbolOrigin::Declared);
        let c0 = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let m = Term::app(
            &sig,
            dec,
            vec![Term::param(ParamId(1)), Term::param(ParamId(2))],
        );
        let n = Term::constant(&sig, c0);
        assert_eq!(
            QuantifiedEquation::new(&sig, &m, &n),
            QuantifiedEquation::new(&sig, &n, &m)
        );
    }

    #[test]
    fn bound_variables_are_renamed_consistently() {
        let mut sig = Signature::with_reserved();
        let dec = sig.intern("dec", 2, Visibility::Public, SymbolOrigin::Declared);
        let u = sig.intern_var("u");
        let v = sig.intern_var("v");
        let m1 = Term::app(&sig, dec, vec![Term::param(ParamId(1)), Term::var(u)]);
        let m2 = Term::app(&sig, dec, vec![Term::param(ParamId(1)), Term::var(v)]);
        // Alpha-equivalent pairs canonicalize identically.
        let e1 = QuantifiedEquation::new(&sig, &m1, &m1);
        let e2 = QuantifiedEquation::new(&sig, &m2, &m2);
        assert_eq!(e1, e2);
        assert_eq!(e1.bound_count(), 1);
        assert!(e1.is_trivial());
    }

    #[test]
    fn shared_variables_stay_shared() {
        let mut sig = Signature::with_reserved();
        let enc = sig.intern("enc", 2, Visibility::Public, SymbolOrigin::Declared);
        let u = sig.intern_var("u");
        let v = sig.intern_var("v");
        let m = Term::app(&sig, enc, vec![Term::var(u), Term::var(v)]);
        let n = Term::var(u);
        let eq = QuantifiedEquation::new(&sig, &m, &n);
        assert_eq!(eq.bound_count(), 2);
        assert!(!eq.is_trivial());
        // The u on the right maps to the same canonical variable as in m.
        let (small, big) = (eq.lhs(), eq.rhs());
        let (_vside, eside) = if small.size() < big.size() {
            (small, big)
        } else {
            (big, small)
        };
        let evars = eside.vars();
        assert_eq!(evars.len(), 2);
    }

    #[test]
    fn set_deduplicates() {
        let mut sig = Signature::with_reserved();
        let c0 = sig.intern("c0", 0, Visibility::Public, SymbolOrigin::Declared);
        let m = Term::param(ParamId(1));
        let n = Term::constant(&sig, c0);
        let mut set = EquationSet::new();
        assert!(set.insert(QuantifiedEquation::new(&sig, &m, &n)));
        assert!(!set.insert(QuantifiedEquation::new(&sig, &n, &m)));
        assert_eq!(set.len(), 1);
    }
}
