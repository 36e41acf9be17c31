//! Monotone three-valued fixpoint deduction.
//!
//! Every ground atom starts out uncertain. A rule fires when each positive
//! body literal is true and each strongly negated body literal is false; the
//! head atom then becomes true (or false for a negated head). Values never
//! change once set, so an attempt to flip one is reported as an
//! inconsistency carrying both derivations.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::LogicError;
use super::functions::FunctionTable;
use super::ground::{ground, GroundRule};
use super::program::{is_comparison, Program};
use super::term::{Atom, Binding, Constant, GroundAtom, GroundLiteral, Literal, Term};

const DEFAULT_FIRING_LIMIT: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthValue {
    Uncertain,
    True,
    False,
}

impl TruthValue {
    /// Uncertain may move to either definite value; definite values are final.
    pub fn can_become(self, next: TruthValue) -> bool {
        self == next || self == TruthValue::Uncertain
    }
}

/// One recorded rule firing (or base fact).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    /// `None` for base facts.
    pub rule_id: Option<String>,
    #[serde(default)]
    pub substitution: Binding,
    pub literal: GroundLiteral,
    #[serde(default)]
    pub premises: Vec<GroundLiteral>,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule_id {
            None => write!(f, "fact {}", self.literal),
            Some(id) => {
                write!(f, "{} via rule {id}", self.literal)?;
                if !self.substitution.is_empty() {
                    let parts: Vec<String> = self.substitution.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    write!(f, " [{}]", parts.join(", "))?;
                }
                Ok(())
            }
        }
    }
}

/// Result of deduction: truth values of ground atoms plus the derivation log.
/// Atoms absent from the map are uncertain.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Interpretation {
    values: BTreeMap<GroundAtom, TruthValue>,
    log: Vec<Derivation>,
    first: BTreeMap<GroundAtom, usize>,
}

#[derive(Serialize, Deserialize)]
struct InterpretationDoc {
    atoms: Vec<GroundLiteral>,
    log: Vec<Derivation>,
}

impl Serialize for Interpretation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        InterpretationDoc { atoms: self.literals().collect(), log: self.log.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interpretation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = InterpretationDoc::deserialize(deserializer)?;
        let mut interp = Interpretation::default();
        for lit in doc.atoms {
            let truth = lit.truth();
            interp.values.insert(lit.atom, truth);
        }
        for (i, d) in doc.log.iter().enumerate() {
            if interp.values.get(&d.literal.atom) == Some(&d.literal.truth()) {
                interp.first.entry(d.literal.atom.clone()).or_insert(i);
            }
        }
        interp.log = doc.log;
        Ok(interp)
    }
}

impl Interpretation {
    pub fn value(&self, atom: &GroundAtom) -> TruthValue {
        self.values.get(atom).copied().unwrap_or(TruthValue::Uncertain)
    }

    pub fn is_true(&self, atom: &GroundAtom) -> bool {
        self.value(atom) == TruthValue::True
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn log(&self) -> &[Derivation] {
        &self.log
    }

    /// The derivation that first set `atom`'s value.
    pub fn first_derivation(&self, atom: &GroundAtom) -> Option<&Derivation> {
        self.first.get(atom).map(|&i| &self.log[i])
    }

    /// All definite atoms as literals, in atom order.
    pub fn literals(&self) -> impl Iterator<Item = GroundLiteral> + '_ {
        self.values.iter().map(|(a, v)| GroundLiteral { atom: a.clone(), negated: *v == TruthValue::False })
    }

    pub fn values(&self) -> &BTreeMap<GroundAtom, TruthValue> {
        &self.values
    }

    /// Definite atoms of one predicate, in atom order.
    pub fn atoms_of<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = (&'a GroundAtom, TruthValue)> + 'a {
        let start = GroundAtom { predicate: predicate.to_string(), args: Vec::new() };
        self.values.range(start..).take_while(move |(a, _)| a.predicate == predicate).map(|(a, v)| (a, *v))
    }

    /// True atoms of `predicate` with the given arity.
    pub fn true_atoms<'a>(&'a self, predicate: &'a str, arity: usize) -> impl Iterator<Item = &'a GroundAtom> + 'a {
        self.atoms_of(predicate).filter(move |(a, v)| a.arity() == arity && *v == TruthValue::True).map(|(a, _)| a)
    }

    /// Records a derivation. Returns whether the atom's value changed.
    fn assert(&mut self, derivation: Derivation) -> Result<bool, LogicError> {
        let atom = &derivation.literal.atom;
        let truth = derivation.literal.truth();
        match self.values.get(atom) {
            None => {
                self.values.insert(atom.clone(), truth);
                self.first.insert(atom.clone(), self.log.len());
                self.log.push(derivation);
                Ok(true)
            }
            Some(current) if *current == truth => {
                self.log.push(derivation);
                Ok(false)
            }
            Some(_) => {
                let existing = self.first_derivation(atom).cloned().expect("definite atoms have a derivation");
                Err(LogicError::Inconsistency {
                    atom: atom.clone(),
                    existing: Box::new(existing),
                    conflicting: Box::new(derivation),
                })
            }
        }
    }

    fn fired_keys(&self) -> HashSet<(String, Binding)> {
        self.log
            .iter()
            .filter_map(|d| d.rule_id.as_ref().map(|id| (id.clone(), d.substitution.clone())))
            .collect()
    }
}

/// Fixpoint engine over a function table.
#[derive(Clone, Debug)]
pub struct Reasoner<'a> {
    functions: &'a FunctionTable,
    firing_limit: usize,
}

impl<'a> Reasoner<'a> {
    pub fn new(functions: &'a FunctionTable) -> Self {
        Reasoner { functions, firing_limit: DEFAULT_FIRING_LIMIT }
    }

    pub fn with_firing_limit(mut self, limit: usize) -> Self {
        self.firing_limit = limit;
        self
    }

    /// Least fixpoint of `program`.
    pub fn fixpoint(&self, program: &Program) -> Result<Interpretation, LogicError> {
        let rules = ground(program)?;
        let mut interp = Interpretation::default();
        for fact in &program.facts {
            interp.assert(base_fact(fact))?;
        }
        self.saturate(&mut interp, &rules, HashSet::new())?;
        Ok(interp)
    }

    /// Adds `new_facts` to a fixpoint of `program` and deduces to the new
    /// fixpoint. Equivalent to the fixpoint of `program` plus the facts;
    /// existing values are kept.
    pub fn extend(
        &self,
        interp: &Interpretation,
        program: &Program,
        new_facts: &[GroundLiteral],
    ) -> Result<Interpretation, LogicError> {
        if new_facts.is_empty() {
            return Ok(interp.clone());
        }
        let mut merged = program.clone();
        for fact in new_facts {
            merged.add_fact(fact.clone())?;
        }
        let rules = ground(&merged)?;
        let mut next = interp.clone();
        for fact in new_facts {
            next.assert(base_fact(fact))?;
        }
        let fired = next.fired_keys();
        self.saturate(&mut next, &rules, fired)?;
        Ok(next)
    }

    fn saturate(
        &self,
        interp: &mut Interpretation,
        rules: &[GroundRule],
        mut fired: HashSet<(String, Binding)>,
    ) -> Result<(), LogicError> {
        loop {
            let mut changed = false;
            for rule in rules {
                for (binding, premises) in self.matches(&rule.rule.body, interp)? {
                    let mut full = rule.substitution.clone();
                    full.extend(binding.iter().map(|(k, v)| (k.clone(), v.clone())));
                    if !fired.insert((rule.rule_id.clone(), full.clone())) {
                        continue;
                    }
                    if fired.len() > self.firing_limit {
                        return Err(LogicError::FiringLimit(self.firing_limit));
                    }
                    let head = self.instantiate_head(&rule.rule.head, &binding)?;
                    let derivation =
                        Derivation { rule_id: Some(rule.rule_id.clone()), substitution: full, literal: head, premises };
                    changed |= interp.assert(derivation)?;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn instantiate_head(&self, head: &Literal, binding: &Binding) -> Result<GroundLiteral, LogicError> {
        let args = head
            .atom
            .terms
            .iter()
            .map(|t| self.functions.evaluate(&t.substitute(binding)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroundLiteral { atom: GroundAtom { predicate: head.atom.predicate.clone(), args }, negated: head.negated })
    }

    /// All bindings of the residual variables that satisfy `body`, with the
    /// matched premises.
    fn matches(&self, body: &[Literal], interp: &Interpretation) -> Result<Vec<(Binding, Vec<GroundLiteral>)>, LogicError> {
        let mut states = vec![(Binding::new(), Vec::new())];
        for lit in body.iter().filter(|l| !is_comparison(&l.atom)) {
            let want = if lit.negated { TruthValue::False } else { TruthValue::True };
            let mut next = Vec::new();
            for (binding, premises) in states {
                let atom = lit.atom.substitute(&binding);
                if let Some(g) = atom.to_ground() {
                    if interp.value(&g) == want {
                        let mut p = premises.clone();
                        p.push(GroundLiteral { atom: g, negated: lit.negated });
                        next.push((binding, p));
                    }
                    continue;
                }
                for (candidate, value) in interp.atoms_of(&atom.predicate) {
                    if value != want {
                        continue;
                    }
                    if let Some(b) = atom.unify(candidate, &binding) {
                        let mut p = premises.clone();
                        p.push(GroundLiteral { atom: candidate.clone(), negated: lit.negated });
                        next.push((b, p));
                    }
                }
            }
            states = next;
            if states.is_empty() {
                return Ok(states);
            }
        }
        let mut out = Vec::with_capacity(states.len());
        'state: for (binding, premises) in states {
            for lit in body.iter().filter(|l| is_comparison(&l.atom)) {
                if !self.compare(&lit.atom, &binding)? {
                    continue 'state;
                }
            }
            out.push((binding, premises));
        }
        Ok(out)
    }

    fn compare(&self, atom: &Atom, binding: &Binding) -> Result<bool, LogicError> {
        let lhs = self.functions.evaluate(&atom.terms[0].substitute(binding))?;
        let rhs = self.functions.evaluate(&atom.terms[1].substitute(binding))?;
        let op = atom.predicate.as_str();
        match op {
            "eq" => return Ok(lhs == rhs),
            "ne" => return Ok(lhs != rhs),
            _ => {}
        }
        let (Constant::Num(a), Constant::Num(b)) = (&lhs, &rhs) else {
            return Err(LogicError::Evaluation {
                function: op.to_string(),
                message: format!("cannot order non-numeric constants {lhs} and {rhs}"),
            });
        };
        Ok(match op {
            "lt" => a < b,
            "le" => a <= b,
            "gt" => a > b,
            "ge" => a >= b,
            _ => unreachable!("comparison predicates are fixed"),
        })
    }
}

fn base_fact(fact: &GroundLiteral) -> Derivation {
    Derivation { rule_id: None, substitution: Binding::new(), literal: fact.clone(), premises: Vec::new() }
}

/// Convenience wrapper: fixpoint with the given functions.
pub fn fixpoint(program: &Program, functions: &FunctionTable) -> Result<Interpretation, LogicError> {
    Reasoner::new(functions).fixpoint(program)
}

/// Convenience wrapper around [`Reasoner::extend`].
pub fn extend(
    interp: &Interpretation,
    program: &Program,
    new_facts: &[GroundLiteral],
    functions: &FunctionTable,
) -> Result<Interpretation, LogicError> {
    Reasoner::new(functions).extend(interp, program, new_facts)
}

/// Definite atoms unifying with `pattern`, in atom order.
pub fn query(interp: &Interpretation, pattern: &Atom) -> Vec<(GroundAtom, TruthValue)> {
    if pattern.terms.iter().any(Term::has_application) {
        return Vec::new();
    }
    interp
        .atoms_of(&pattern.predicate)
        .filter(|(a, _)| pattern.unify(a, &Binding::new()).is_some())
        .map(|(a, v)| (a.clone(), v))
        .collect()
}
