use thiserror::Error;

use super::fixpoint::Derivation;
use super::term::GroundAtom;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("no signature registered for predicate {predicate}/{arity}")]
    UnknownPredicate { predicate: String, arity: usize },

    #[error("rule {rule}: variable {variable} does not occur in any body atom")]
    UnsafeVariable { rule: String, variable: String },

    #[error("rule {rule}: {message}")]
    MalformedRule { rule: String, message: String },

    #[error("duplicate rule id {0}")]
    DuplicateRuleId(String),

    #[error("fact {0} is not ground")]
    NonGroundFact(String),

    #[error("inconsistency on {atom}: {existing} conflicts with {conflicting}")]
    Inconsistency {
        atom: GroundAtom,
        existing: Box<Derivation>,
        conflicting: Box<Derivation>,
    },

    #[error("unknown function {0}")]
    UnknownFunction(String),

    #[error("function {function}: {message}")]
    Evaluation { function: String, message: String },

    #[error("no derivation for {0}: atom is uncertain")]
    NoDerivation(String),

    #[error("fixpoint exceeded {0} rule firings")]
    FiringLimit(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}
