//! Deciding intruder deducibility and static equivalence of frames modulo a
//! user-supplied convergent rewrite system, by frame saturation.

pub mod bounds;
pub mod decompose;
pub mod equation;
pub mod eval;
pub mod frame;
pub mod rewrite;
pub mod saturate;
pub mod term;
pub mod theory;

pub use decompose::{enumerate_decompositions, Decomposition};
pub use equation::{EquationSet, QuantifiedEquation};
pub use eval::FrameEvaluator;
pub use frame::{DeductionFact, Frame, InitError, InitialFrame};
pub use rewrite::{
    check_rule_wellformed, lint_convergence, reduce_once, RewriteRule, RewriteSystem, Rewriter,
};
pub use saturate::{
    ctx_recipe, saturate, syntactic_deduce, SaturateOptions, SaturationResult, SaturationStatus,
};
pub use term::{match_term, ParamId, Position, Signature, Subst, SymbolId, Term, VarId};
pub use theory::Theory;
