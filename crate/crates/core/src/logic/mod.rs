//! Datalog-style inference with strong negation and three truth values.
//!
//! Programs are grounded eagerly over their finite symbolic domains, then
//! saturated to the least fixpoint. Rule heads may carry evaluable function
//! terms (for example `score(P, niss(P))`); these are resolved through a
//! [`FunctionTable`] when the rule fires and embedded as numbers in the
//! derived atom.

mod error;
mod explain;
mod fixpoint;
mod functions;
mod ground;
mod parse;
mod program;
pub mod properties;
mod term;

pub use error::LogicError;
pub use explain::{explain, Explanation};
pub use fixpoint::{extend, fixpoint, query, Derivation, Interpretation, Reasoner, TruthValue};
pub use functions::{Function, FunctionTable};
pub use ground::{ground, GroundRule};
pub use parse::{parse_atom, parse_literal, parse_program};
pub use program::{is_comparison, Domain, Program, Rule, COMPARISONS};
pub use term::{Atom, Binding, Constant, GroundAtom, GroundLiteral, Literal, Number, Term};

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one() -> &'static str {
        "#sig insultsAvailable(personnel). #sig vitalsAvailable(personnel).
         #sig score(personnel, number).
         @score_niss score(P, niss(P)) :- insultsAvailable(P), not vitalsAvailable(P).
         @score_rts score(P, rts(P)) :- not insultsAvailable(P), vitalsAvailable(P).
         @score_life score(P, life(P)) :- insultsAvailable(P), vitalsAvailable(P)."
    }

    fn scoring_functions() -> FunctionTable {
        let mut t = FunctionTable::new();
        t.register("niss", |_| Ok(0.42));
        t.register("rts", |_| Ok(0.25));
        t.register("life", |_| Ok(0.5));
        t
    }

    #[test]
    fn table_one_grounds_to_three_rules_per_casualty() {
        let mut src = table_one().to_string();
        src.push_str(" #domain personnel p1 p2 p3.");
        let p = parse_program(&src).unwrap();
        assert_eq!(ground(&p).unwrap().len(), 9);
    }

    #[test]
    fn niss_branch_fires_with_evaluated_score() {
        let mut src = table_one().to_string();
        src.push_str(" insultsAvailable(p1). not vitalsAvailable(p1).");
        let p = parse_program(&src).unwrap();
        let interp = fixpoint(&p, &scoring_functions()).unwrap();
        let score = GroundAtom::new("score", vec!["p1".into(), Constant::num(0.42)]);
        assert_eq!(interp.value(&score), TruthValue::True);
        assert_eq!(query(&interp, &parse_atom("score(P, X)").unwrap()).len(), 1);
    }

    #[test]
    fn empty_program_gives_empty_interpretation() {
        let interp = fixpoint(&Program::new(), &FunctionTable::new()).unwrap();
        assert!(interp.is_empty());
        assert!(interp.log().is_empty());
    }

    #[test]
    fn conflicting_derivations_are_reported() {
        let p = parse_program("#sig a. #sig b. a. @neg_a not a :- b. @b b.").unwrap();
        let err = fixpoint(&p, &FunctionTable::new()).unwrap_err();
        match err {
            LogicError::Inconsistency { atom, existing, conflicting } => {
                assert_eq!(atom.predicate, "a");
                assert_eq!(existing.rule_id, None);
                assert_eq!(conflicting.rule_id.as_deref(), Some("neg_a"));
            }
            other => panic!("expected inconsistency, got {other}"),
        }
    }

    #[test]
    fn strong_negation_requires_explicit_falsity() {
        let p = parse_program("#sig a. #sig b. @r b :- not a.").unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        assert_eq!(interp.value(&GroundAtom::new("b", vec![])), TruthValue::Uncertain);
    }

    #[test]
    fn query_examples() {
        let p = parse_program(
            "#sig evac(personnel). #sig assign_a(personnel, asset).
             evac(p1). assign_a(p1, a2). not assign_a(p2, a1).",
        )
        .unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        assert_eq!(
            query(&interp, &parse_atom("evac(P)").unwrap()),
            vec![(GroundAtom::new("evac", vec!["p1".into()]), TruthValue::True)]
        );
        assert!(query(&interp, &parse_atom("evac(p9)").unwrap()).is_empty());
        let hits = query(&interp, &parse_atom("assign_a(p1, A)").unwrap());
        assert_eq!(hits, vec![(GroundAtom::new("assign_a", vec!["p1".into(), "a2".into()]), TruthValue::True)]);
    }

    #[test]
    fn explain_life_score_down_to_facts() {
        let mut src = table_one().to_string();
        src.push_str(" insultsAvailable(p1). vitalsAvailable(p1).");
        let p = parse_program(&src).unwrap();
        let mut functions = FunctionTable::new();
        functions.register("life", |_| Ok(0.42));
        let interp = fixpoint(&p, &functions).unwrap();
        let tree = explain(&interp, &GroundAtom::new("score", vec!["p1".into(), Constant::num(0.42)])).unwrap();
        assert_eq!(tree.rule_id.as_deref(), Some("score_life"));
        let leaves: Vec<String> = tree.leaves().iter().map(|l| l.to_string()).collect();
        assert_eq!(leaves, vec!["insultsAvailable(p1)", "vitalsAvailable(p1)"]);
        assert!(tree.premises.iter().all(Explanation::is_base_fact));
    }

    #[test]
    fn explain_base_fact_and_uncertain_atom() {
        let p = parse_program("#sig a. #sig b. a.").unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        let tree = explain(&interp, &GroundAtom::new("a", vec![])).unwrap();
        assert!(tree.is_base_fact());
        assert_eq!(tree.depth(), 1);
        assert!(matches!(explain(&interp, &GroundAtom::new("b", vec![])), Err(LogicError::NoDerivation(_))));
    }

    #[test]
    fn extend_with_nothing_is_identity() {
        let p = parse_program("#sig a. #sig b. a. @r b :- a.").unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        assert_eq!(extend(&interp, &p, &[], &FunctionTable::new()).unwrap(), interp);
    }

    #[test]
    fn extend_contradicting_derived_atom_fails() {
        let p = parse_program("#sig a. #sig b. a. @r b :- a.").unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        let contradiction = GroundLiteral::neg(GroundAtom::new("b", vec![]));
        assert!(matches!(
            extend(&interp, &p, &[contradiction], &FunctionTable::new()),
            Err(LogicError::Inconsistency { .. })
        ));
    }

    #[test]
    fn comparisons_bind_numeric_variables_by_matching() {
        let p = parse_program(
            "#sig value(number, objective, number). #sig best(objective, number). #sig theta(number).
             #sig eligible(number).
             value(1, o_scr, 10). value(2, o_scr, 6). best(o_scr, 10). theta(0.66).
             @elig eligible(I) :- value(I, o_scr, V), best(o_scr, M), theta(T), ge(V, mul(T, M)).
             @inelig not eligible(I) :- value(I, o_scr, V), best(o_scr, M), theta(T), lt(V, mul(T, M)).",
        )
        .unwrap();
        let interp = fixpoint(&p, &FunctionTable::new()).unwrap();
        assert_eq!(interp.value(&GroundAtom::new("eligible", vec![Constant::num(1.0)])), TruthValue::True);
        assert_eq!(interp.value(&GroundAtom::new("eligible", vec![Constant::num(2.0)])), TruthValue::False);
    }

    #[test]
    fn interpretation_json_round_trip() {
        let mut src = table_one().to_string();
        src.push_str(" insultsAvailable(p1). vitalsAvailable(p1).");
        let p = parse_program(&src).unwrap();
        let interp = fixpoint(&p, &scoring_functions()).unwrap();
        let json = serde_json::to_string(&interp).unwrap();
        let back: Interpretation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, interp);
    }

    #[test]
    fn program_json_round_trip() {
        let p = parse_program(table_one()).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains(r#""apply":{"function":"niss""#), "{json}");
        let back: Program = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
