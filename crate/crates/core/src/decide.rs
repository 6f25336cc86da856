//! The two decision procedures on top of saturation: deducibility of a
//! ground term, and static equivalence of two frames, both with verified
//! witnesses.

use crate::eval::FrameEvaluator;
use crate::frame::{InitError, InitialFrame};
use crate::par;
use crate::saturate::{
    saturate, syntactic_deduce, SaturateOptions, SaturationResult, SaturationStatus,
};
use crate::equation::QuantifiedEquation;
use crate::term::{Signature, Subst, Term};
use crate::theory::Theory;

#[derive(Debug)]
pub enum DeductionAnswer {
    Yes { recipe: Term },
    No,
    Failed,
    Indeterminate,
}

#[derive(Debug)]
pub struct DeductionVerdict {
    pub answer: DeductionAnswer,
    pub saturation: SaturationResult,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecideError {
    #[error(transparent)]
    Init(#[from] InitError),
    #[error("deduction query term is not ground")]
    NonGroundQuery,
    #[error("frames have different domains")]
    DomainMismatch,
    #[error("equation mentions parameters outside the frame domain")]
    ParameterOutsideDomain,
}

/// Is `t` deducible from `frame` modulo the theory? On success the witness
/// recipe is re-verified by evaluation.
pub fn deducible(
    th: &Theory,
    frame: &InitialFrame,
    t: &Term,
    opts: &SaturateOptions,
) -> Result<DeductionVerdict, DecideError> {
    if !t.is_ground() || !t.is_plain() {
        return Err(DecideError::NonGroundQuery);
    }
    let saturation = saturate(th, frame, opts)?;
    let answer = match &saturation.status {
        SaturationStatus::Saturated => {
            let mut rewriter = crate::rewrite::Rewriter::new(&th.sig, &th.system);
            rewriter.step_cap = opts.rewrite_cap;
            let reduced = rewriter
                .normalize(t)
                .map_err(crate::frame::InitError::from)?;
            match syntactic_deduce(&th.sig, &saturation.frame, &reduced) {
                Some(recipe) => {
                    let mut eval = FrameEvaluator::new(&th.sig, &th.system, frame, opts.rewrite_cap);
                    debug_assert_eq!(
                        eval.eval(&recipe).ok().as_ref(),
                        Some(&reduced),
                        "deduction witness must evaluate to the query's reduced form"
                    );
                    let _ = &mut eval;
                    DeductionAnswer::Yes { recipe }
                }
                None => DeductionAnswer::No,
            }
        }
        SaturationStatus::Failed(_) => DeductionAnswer::Failed,
        SaturationStatus::Indeterminate(_) => DeductionAnswer::Indeterminate,
    };
    Ok(DeductionVerdict { answer, saturation })
}

/// A distinguishing test: an equation from the saturated set of one frame
/// which the other frame falsifies, together with a ground instantiation.
#[derive(Debug, Clone)]
pub struct DistinguishingWitness {
    pub equation: QuantifiedEquation,
    /// 1 or 2: the frame whose saturation produced the equation.
    pub holds_on: u8,
    /// The equation's sides with bound variables instantiated to the
    /// reserved constant; these evaluate equal on `holds_on` and different
    /// on the other frame.
    pub ground_lhs: Term,
    pub ground_rhs: Term,
}

#[derive(Debug)]
pub enum EquivalenceAnswer {
    Equivalent,
    Inequivalent(DistinguishingWitness),
    Failed,
    Indeterminate,
}

#[derive(Debug)]
pub struct EquivalenceVerdict {
    pub answer: EquivalenceAnswer,
    pub saturation_left: SaturationResult,
    pub saturation_right: SaturationResult,
}

/// `(Mφ)↓ = (Nφ)↓` with bound variables inert.
pub fn check_equation_on_frame(
    th: &Theory,
    eq: &QuantifiedEquation,
    frame: &InitialFrame,
    rewrite_cap: u64,
) -> Result<bool, DecideError> {
    let domain = frame.domain();
    for p in eq.lhs().params().into_iter().chain(eq.rhs().params()) {
        if !domain.contains(&p) {
            return Err(DecideError::ParameterOutsideDomain);
        }
    }
    let mut eval = FrameEvaluator::new(&th.sig, &th.system, frame, rewrite_cap);
    eval.sides_equal(eq.lhs(), eq.rhs())
        .map_err(|_| DecideError::Init(InitError::StepCap(
            crate::rewrite::StepCapExceeded { cap: rewrite_cap },
        )))
}

fn ground_sides(sig: &Signature, eq: &QuantifiedEquation) -> (Term, Term) {
    let a = Term::constant(sig, sig.reserved_const());
    let mut subst = Subst::new();
    for v in eq.lhs().vars().into_iter().chain(eq.rhs().vars()) {
        subst.insert(v, a.clone());
    }
    (
        eq.lhs().apply_subst(sig, &subst),
        eq.rhs().apply_subst(sig, &subst),
    )
}

/// Are the two frames statically equivalent? Saturates both frames (in
/// parallel when enabled), then cross-checks each saturated equation set
/// against the other frame. The first failing equation, in canonical order,
/// becomes the witness and is re-verified on both frames.
pub fn statically_equivalent(
    th: &Theory,
    left: &InitialFrame,
    right: &InitialFrame,
    opts: &SaturateOptions,
) -> Result<EquivalenceVerdict, DecideError> {
    if left.domain() != right.domain() {
        return Err(DecideError::DomainMismatch);
    }
    let (sat_left, sat_right) = par::join2(
        || saturate(th, left, opts),
        || saturate(th, right, opts),
    );
    let sat_left = sat_left?;
    let sat_right = sat_right?;

    let failed = matches!(sat_left.status, SaturationStatus::Failed(_))
        || matches!(sat_right.status, SaturationStatus::Failed(_));
    let indeterminate = matches!(sat_left.status, SaturationStatus::Indeterminate(_))
        || matches!(sat_right.status, SaturationStatus::Indeterminate(_));
    if failed || indeterminate {
        return Ok(EquivalenceVerdict {
            answer: if failed {
                EquivalenceAnswer::Failed
            } else {
                EquivalenceAnswer::Indeterminate
            },
            saturation_left: sat_left,
            saturation_right: sat_right,
        });
    }

    let mut witness = None;
    'outer: for (source, equations, other_frame, own_frame) in [
        (1u8, &sat_left.equations, right, left),
        (2u8, &sat_right.equations, left, right),
    ] {
        let mut eval = FrameEvaluator::new(&th.sig, &th.system, other_frame, opts.rewrite_cap);
        for eq in equations.iter() {
            let (gl, gr) = ground_sides(&th.sig, eq);
            let holds = eval
                .sides_equal(&gl, &gr)
                .map_err(|_| DecideError::Init(InitError::StepCap(
                    crate::rewrite::StepCapExceeded {
                        cap: opts.rewrite_cap,
                    },
                )))?;
            if !holds {
                // Confirm the equation does hold on its own frame.
                let mut own =
                    FrameEvaluator::new(&th.sig, &th.system, own_frame, opts.rewrite_cap);
                debug_assert!(
                    own.sides_equal(&gl, &gr).unwrap_or(false),
                    "saturated equation must hold on its own frame"
                );
                let _ = &mut own;
                witness = Some(DistinguishingWitness {
                    equation: eq.clone(),
                    holds_on: source,
                    ground_lhs: gl,
                    ground_rhs: gr,
                });
                break 'outer;
            }
        }
    }

    Ok(EquivalenceVerdict {
        answer: match witness {
            Some(w) => EquivalenceAnswer::Inequivalent(w),
            None => EquivalenceAnswer::Equivalent,
        },
        saturation_left: sat_left,
        saturation_right: sat_right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{RewriteRule, RewriteSystem};
    use crate::term::{ParamId, SymbolOrigin, Visibility};

    struct Setup {
        th: Theory,
        enc: crate::term::SymbolId,
        dec: crate::term::SymbolId,
        pair: crate::term::SymbolId,
        c0: crate::term::SymbolId,
        c1: crate::term::SymbolId,
        k: crate::term::SymbolId,
    }

    fn setup() -> Setup {
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
                    vec![Term::app(&sig, enc, vec![vx.clone(), vy.clone()]), vy.clone()],
                ),
                vx.clone(),
                0,
            ),
            RewriteRule::new(
                Term::app(&sig, proj1, vec![Term::app(&sig, pair, vec![vx.clone(), vy.clone()])]),
                vx.clone(),
                0,
            ),
            RewriteRule::new(
                Term::app(&sig, proj2, vec![Term::app(&sig, pair, vec![vx.clone(), vy.clone()])]),
                vy.clone(),
                0,
            ),
        ];
        let th = Theory::new(sig, RewriteSystem::new(rules)).unwrap();
        Setup {
            th,
            enc,
            dec,
            pair,
            c0,
            c1,
            k,
        }
    }

    fn frame_enc_const(s: &Setup, body: crate::term::SymbolId, with_key: bool) -> InitialFrame {
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
    fn deduction_examples() {
        let s = setup();
        let sig = &s.th.sig;
        let phi0 = frame_enc_const(&s, s.c0, true);
        let opts = SaturateOptions::default();
        // <k,k> and c0 are both deducible.
        let kk = Term::app(
            sig,
            s.pair,
            vec![Term::constant(sig, s.k), Term::constant(sig, s.k)],
        );
        assert!(matches!(
            deducible(&s.th, &phi0, &kk, &opts).unwrap().answer,
            DeductionAnswer::Yes { .. }
        ));
        assert!(matches!(
            deducible(&s.th, &phi0, &Term::constant(sig, s.c0), &opts)
                .unwrap()
                .answer,
            DeductionAnswer::Yes { .. }
        ));
        // Without the key, the secret stays out of reach.
        let mut sig2 = s.th.sig.clone();
        let secret = sig2.intern("sec", 0, Visibility::Private, SymbolOrigin::Declared);
        let th2 = Theory::new(sig2, s.th.system.clone()).unwrap();
        let frame = InitialFrame {
            name: "f".into(),
            entries: vec![(
                ParamId(1),
                Term::app(
                    &th2.sig,
                    s.enc,
                    vec![Term::constant(&th2.sig, secret), Term::constant(&th2.sig, s.k)],
                ),
            )],
        };
        assert!(matches!(
            deducible(&th2, &frame, &Term::constant(&th2.sig, secret), &opts)
                .unwrap()
                .answer,
            DeductionAnswer::No
        ));
    }

    #[test]
    fn equivalence_examples() {
        let s = setup();
        let opts = SaturateOptions::default();
        // With the key revealed the frames are distinguishable...
        let phi0 = frame_enc_const(&s, s.c0, true);
        let phi1 = frame_enc_const(&s, s.c1, true);
        let v = statically_equivalent(&s.th, &phi0, &phi1, &opts).unwrap();
        match v.answer {
            EquivalenceAnswer::Inequivalent(w) => {
                // The witness evaluates equal on its own frame, different on
                // the other.
                let own = if w.holds_on == 1 { &phi0 } else { &phi1 };
                let other = if w.holds_on == 1 { &phi1 } else { &phi0 };
                let mut e1 = FrameEvaluator::new(&s.th.sig, &s.th.system, own, 10_000);
                assert!(e1.sides_equal(&w.ground_lhs, &w.ground_rhs).unwrap());
                let mut e2 = FrameEvaluator::new(&s.th.sig, &s.th.system, other, 10_000);
                assert!(!e2.sides_equal(&w.ground_lhs, &w.ground_rhs).unwrap());
            }
            other => panic!("expected inequivalent, got {:?}", other),
        }
        // ... without it they are equivalent.
        let psi0 = frame_enc_const(&s, s.c0, false);
        let psi1 = frame_enc_const(&s, s.c1, false);
        assert!(matches!(
            statically_equivalent(&s.th, &psi0, &psi1, &opts).unwrap().answer,
            EquivalenceAnswer::Equivalent
        ));
        // Reflexivity.
        assert!(matches!(
            statically_equivalent(&s.th, &phi0, &phi0, &opts).unwrap().answer,
            EquivalenceAnswer::Equivalent
        ));
        // Symmetry of the verdict.
        assert!(matches!(
            statically_equivalent(&s.th, &phi1, &phi0, &opts).unwrap().answer,
            EquivalenceAnswer::Inequivalent(_)
        ));
    }

    #[test]
    fn domain_mismatch_is_an_input_error() {
        let s = setup();
        let phi0 = frame_enc_const(&s, s.c0, true);
        let psi = frame_enc_const(&s, s.c1, false);
        assert!(matches!(
            statically_equivalent(&s.th, &phi0, &psi, &SaturateOptions::default()),
            Err(DecideError::DomainMismatch)
        ));
        let _ = s.dec;
    }

    #[test]
    fn equation_check_on_frames() {
        let s = setup();
        let sig = &s.th.sig;
        let phi0 = frame_enc_const(&s, s.c0, true);
        let phi1 = frame_enc_const(&s, s.c1, true);
        let eq = QuantifiedEquation::new(
            sig,
            &Term::app(sig, s.dec, vec![Term::param(ParamId(1)), Term::param(ParamId(2))]),
            &Term::constant(sig, s.c0),
        );
        assert!(check_equation_on_frame(&s.th, &eq, &phi0, 10_000).unwrap());
        assert!(!check_equation_on_frame(&s.th, &eq, &phi1, 10_000).unwrap());
    }
}
