//! Eager grounding over the finite symbolic domains of a program.

use std::collections::BTreeMap;

use super::error::LogicError;
use super::program::{is_comparison, Domain, Program, Rule};
use super::term::{Binding, Constant, Term};

/// A rule instance with every symbolic-domain variable substituted.
///
/// Variables that only occur in numeric argument positions stay in place;
/// they are bound by matching when the rule fires.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundRule {
    pub rule_id: String,
    pub substitution: Binding,
    pub rule: Rule,
}

impl GroundRule {
    pub fn is_fully_ground(&self) -> bool {
        self.rule.variables().is_empty()
    }
}

/// Domain of each variable that occurs in a symbolic position of some body
/// atom (or, failing that, of the head).
fn symbolic_variable_domains(program: &Program, rule: &Rule) -> Result<BTreeMap<String, Domain>, LogicError> {
    let mut out = BTreeMap::new();
    let atoms = rule
        .body
        .iter()
        .filter(|l| !is_comparison(&l.atom))
        .map(|l| &l.atom)
        .chain(std::iter::once(&rule.head.atom));
    for atom in atoms {
        let domains = program.signature(&atom.predicate, atom.arity()).ok_or_else(|| {
            LogicError::UnknownPredicate { predicate: atom.predicate.clone(), arity: atom.arity() }
        })?;
        for (term, domain) in atom.terms.iter().zip(domains) {
            if let Term::Var(v) = term {
                if domain.is_symbolic() {
                    out.entry(v.clone()).or_insert(*domain);
                }
            }
        }
    }
    Ok(out)
}

/// Returns every ground instance of every rule in `program`.
///
/// Variables are enumerated in name order and constants in registry order,
/// so the output order is deterministic.
pub fn ground(program: &Program) -> Result<Vec<GroundRule>, LogicError> {
    program.validate()?;
    let mut out = Vec::new();
    for rule in &program.rules {
        let domains = symbolic_variable_domains(program, rule)?;
        let vars: Vec<(&String, Vec<&Constant>)> = domains
            .iter()
            .map(|(v, d)| (v, program.domain_constants(*d).collect()))
            .collect();
        if vars.is_empty() {
            out.push(GroundRule { rule_id: rule.id.clone(), substitution: Binding::new(), rule: rule.clone() });
            continue;
        }
        if vars.iter().any(|(_, cs)| cs.is_empty()) {
            continue;
        }
        // odometer over the domain product, last variable fastest
        let mut counters = vec![0usize; vars.len()];
        'product: loop {
            let binding: Binding = vars
                .iter()
                .zip(&counters)
                .map(|((v, cs), &i)| ((*v).clone(), cs[i].clone()))
                .collect();
            out.push(instantiate(rule, binding));

            let mut pos = vars.len();
            loop {
                if pos == 0 {
                    break 'product;
                }
                pos -= 1;
                counters[pos] += 1;
                if counters[pos] < vars[pos].1.len() {
                    continue 'product;
                }
                counters[pos] = 0;
            }
        }
    }
    Ok(out)
}

fn instantiate(rule: &Rule, binding: Binding) -> GroundRule {
    let mut head = rule.head.clone();
    head.atom = head.atom.substitute(&binding);
    let body = rule
        .body
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.atom = l.atom.substitute(&binding);
            l
        })
        .collect();
    GroundRule {
        rule_id: rule.id.clone(),
        substitution: binding,
        rule: Rule { id: rule.id.clone(), head, body },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_program;

    #[test]
    fn singleton_domain_yields_one_instance() {
        let p = parse_program(
            "#sig score(personnel, number). #sig insultsAvailable(personnel). #sig vitalsAvailable(personnel).
             #domain personnel p1.
             score(P, niss(P)) :- insultsAvailable(P), not vitalsAvailable(P).",
        )
        .unwrap();
        let g = ground(&p).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].substitution.get("P"), Some(&Constant::sym("p1")));
        assert_eq!(
            g[0].rule.head.atom.to_string(),
            "score(p1, niss(p1))",
            "head function stays symbolic until the rule fires"
        );
    }

    #[test]
    fn variable_free_rules_pass_through() {
        let p = parse_program("#sig a. #sig b. a :- b.").unwrap();
        let g = ground(&p).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].rule, p.rules[0]);
    }

    #[test]
    fn unregistered_predicate_is_named() {
        let p = parse_program("#sig a(personnel). #domain personnel p1. a(X) :- mystery(X).");
        let err = p.and_then(|p| ground(&p)).unwrap_err();
        assert!(err.to_string().contains("mystery"), "{err}");
    }

    #[test]
    fn cartesian_product_over_two_domains() {
        let p = parse_program(
            "#sig can(personnel, asset). #sig near(personnel, asset).
             #domain personnel p1 p2 p3. #domain asset a1 a2.
             can(P, A) :- near(P, A).",
        )
        .unwrap();
        assert_eq!(ground(&p).unwrap().len(), 6);
    }

    #[test]
    fn numeric_variables_stay_residual() {
        let p = parse_program(
            "#sig value(number, objective, number). #sig good(number).
             #domain objective o_scr.
             good(I) :- value(I, o_scr, V), gt(V, 1).",
        )
        .unwrap();
        let g = ground(&p).unwrap();
        assert_eq!(g.len(), 1);
        assert!(!g[0].is_fully_ground());
    }
}
