use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::LogicError;
use super::term::{Atom, Constant, GroundLiteral, Literal, Term};

/// Domain tag of a predicate argument position.
///
/// Symbolic domains are enumerated during grounding. Variables that only
/// occur in `Number` positions are bound by matching against the
/// interpretation when the rule fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Personnel,
    Asset,
    Facility,
    Objective,
    Constraint,
    Other,
    Number,
}

impl Domain {
    pub fn is_symbolic(self) -> bool {
        self != Domain::Number
    }

    pub fn parse(name: &str) -> Option<Domain> {
        Some(match name {
            "personnel" => Domain::Personnel,
            "asset" => Domain::Asset,
            "facility" => Domain::Facility,
            "objective" => Domain::Objective,
            "constraint" => Domain::Constraint,
            "other" => Domain::Other,
            "number" => Domain::Number,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Personnel => "personnel",
            Domain::Asset => "asset",
            Domain::Facility => "facility",
            Domain::Objective => "objective",
            Domain::Constraint => "constraint",
            Domain::Other => "other",
            Domain::Number => "number",
        }
    }
}

/// Comparison predicates evaluated in rule bodies rather than looked up.
pub const COMPARISONS: [&str; 6] = ["eq", "ne", "lt", "le", "gt", "ge"];

pub fn is_comparison(atom: &Atom) -> bool {
    atom.arity() == 2 && COMPARISONS.contains(&atom.predicate.as_str())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub head: Literal,
    #[serde(default)]
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(id: impl Into<String>, head: Literal, body: Vec<Literal>) -> Self {
        Rule { id: id.into(), head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = self.head.atom.variables();
        for lit in &self.body {
            for v in lit.atom.variables() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{} {}", self.id, self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                lit.fmt(f)?;
            }
        }
        f.write_str(".")
    }
}

fn signature_key(predicate: &str, arity: usize) -> String {
    format!("{predicate}/{arity}")
}

/// A logic program: rules, ground facts, predicate signatures and the
/// constant registry partitioned by domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    #[serde(default)]
    pub signatures: BTreeMap<String, Vec<Domain>>,
    #[serde(default)]
    pub constants: BTreeMap<Domain, BTreeSet<Constant>>,
    #[serde(default)]
    pub facts: Vec<GroundLiteral>,
    #[serde(default)]
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, predicate: &str, domains: &[Domain]) {
        self.signatures.insert(signature_key(predicate, domains.len()), domains.to_vec());
    }

    pub fn signature(&self, predicate: &str, arity: usize) -> Option<&[Domain]> {
        self.signatures.get(&signature_key(predicate, arity)).map(Vec::as_slice)
    }

    pub fn register(&mut self, domain: Domain, constant: impl Into<Constant>) {
        self.constants.entry(domain).or_default().insert(constant.into());
    }

    pub fn domain_constants(&self, domain: Domain) -> impl Iterator<Item = &Constant> {
        self.constants.get(&domain).into_iter().flatten()
    }

    /// Adds a ground fact and registers its symbolic constants under the
    /// predicate signature.
    pub fn add_fact(&mut self, fact: GroundLiteral) -> Result<(), LogicError> {
        let domains = self
            .signature(&fact.atom.predicate, fact.atom.arity())
            .ok_or_else(|| LogicError::UnknownPredicate {
                predicate: fact.atom.predicate.clone(),
                arity: fact.atom.arity(),
            })?
            .to_vec();
        for (domain, arg) in domains.iter().zip(&fact.atom.args) {
            if domain.is_symbolic() {
                self.register(*domain, arg.clone());
            }
        }
        self.facts.push(fact);
        Ok(())
    }

    pub fn add_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    /// Union of two programs. Rules from `other` keep their ids.
    pub fn merge(&mut self, other: &Program) {
        for (k, v) in &other.signatures {
            self.signatures.insert(k.clone(), v.clone());
        }
        for (domain, set) in &other.constants {
            self.constants.entry(*domain).or_default().extend(set.iter().cloned());
        }
        self.facts.extend(other.facts.iter().cloned());
        self.rules.extend(other.rules.iter().cloned());
    }

    pub fn has_rule_for(&self, predicate: &str) -> bool {
        self.rules.iter().any(|r| r.head.atom.predicate == predicate)
    }

    /// Checks rule well-formedness: unique ids, registered signatures, function
    /// terms only in heads, every variable bound by some body atom.
    pub fn validate(&self) -> Result<(), LogicError> {
        let mut ids = BTreeSet::new();
        for rule in &self.rules {
            if !ids.insert(rule.id.as_str()) {
                return Err(LogicError::DuplicateRuleId(rule.id.clone()));
            }
            self.validate_rule(rule)?;
        }
        for fact in &self.facts {
            self.require_signature(&fact.atom.predicate, fact.atom.arity())?;
        }
        Ok(())
    }

    fn require_signature(&self, predicate: &str, arity: usize) -> Result<&[Domain], LogicError> {
        self.signature(predicate, arity).ok_or_else(|| LogicError::UnknownPredicate {
            predicate: predicate.to_string(),
            arity,
        })
    }

    fn validate_rule(&self, rule: &Rule) -> Result<(), LogicError> {
        let malformed = |message: String| LogicError::MalformedRule { rule: rule.id.clone(), message };
        if is_comparison(&rule.head.atom) {
            return Err(malformed(format!("comparison {} cannot be a rule head", rule.head.atom.predicate)));
        }
        self.require_signature(&rule.head.atom.predicate, rule.head.atom.arity())?;
        let mut bound = Vec::new();
        for lit in &rule.body {
            if is_comparison(&lit.atom) {
                if lit.negated {
                    return Err(malformed(format!("comparison {} cannot be negated", lit.atom)));
                }
                continue;
            }
            self.require_signature(&lit.atom.predicate, lit.atom.arity())?;
            if lit.atom.terms.iter().any(Term::has_application) {
                return Err(malformed(format!("function application in body atom {}", lit.atom)));
            }
            for v in lit.atom.variables() {
                if !bound.contains(&v) {
                    bound.push(v);
                }
            }
        }
        for v in rule.variables() {
            if !bound.contains(&v) {
                return Err(LogicError::UnsafeVariable { rule: rule.id.clone(), variable: v });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (key, domains) in &self.signatures {
            let (name, _) = key.rsplit_once('/').unwrap_or((key, ""));
            if domains.is_empty() {
                writeln!(f, "#sig {name}.")?;
            } else {
                let names: Vec<_> = domains.iter().map(|d| d.name()).collect();
                writeln!(f, "#sig {name}({}).", names.join(", "))?;
            }
        }
        for (domain, set) in &self.constants {
            if set.is_empty() {
                continue;
            }
            let names: Vec<_> = set.iter().map(ToString::to_string).collect();
            writeln!(f, "#domain {} {}.", domain.name(), names.join(" "))?;
        }
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}
