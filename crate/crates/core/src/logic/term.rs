//! Terms, atoms and literals.
//!
//! Numbers are stored as fixed-point nano-units so that two numeric
//! constants closer than 1e-9 denote the same atom argument and atoms can be
//! hashed and ordered without floating-point surprises.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

const NANOS_PER_UNIT: f64 = 1e9;

/// A numeric constant with 1e-9 resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Number(i64);

impl Number {
    pub fn from_f64(value: f64) -> Self {
        Number((value * NANOS_PER_UNIT).round() as i64)
    }

    pub fn from_nanos(nanos: i64) -> Self {
        Number(nanos)
    }

    pub fn nanos(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / NANOS_PER_UNIT
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / 1_000_000_000;
        let frac = abs % 1_000_000_000;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:09}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0 % 1_000_000_000 == 0 {
            serializer.serialize_i64(self.0 / 1_000_000_000)
        } else {
            serializer.serialize_f64(self.value())
        }
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Number::from_f64)
    }
}

/// A ground constant: a symbol such as `p1` or a number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Num(Number),
    Sym(String),
}

impl Constant {
    pub fn sym(name: impl Into<String>) -> Self {
        Constant::Sym(name.into())
    }

    pub fn num(value: f64) -> Self {
        Constant::Num(Number::from_f64(value))
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Constant::Num(n) => Some(n.value()),
            Constant::Sym(_) => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Constant::Sym(s) => Some(s),
            Constant::Num(_) => None,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Num(n) => n.fmt(f),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Constant {
    fn from(s: &str) -> Self {
        Constant::sym(s)
    }
}

impl From<f64> for Constant {
    fn from(v: f64) -> Self {
        Constant::num(v)
    }
}

impl From<u32> for Constant {
    fn from(v: u32) -> Self {
        Constant::Num(Number::from_nanos(i64::from(v) * 1_000_000_000))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Const(Constant),
    Var(String),
    /// Evaluable function application, resolved when the enclosing rule fires.
    Apply { function: String, args: Vec<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Term::Const(Constant::sym(name))
    }

    pub fn num(value: f64) -> Self {
        Term::Const(Constant::num(value))
    }

    pub fn apply(function: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Apply { function: function.into(), args }
    }

    /// Collects variable names, including those nested in applications.
    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Apply { args, .. } => args.iter().for_each(|a| a.variables(out)),
            Term::Const(_) => {}
        }
    }

    pub fn substitute(&self, binding: &Binding) -> Term {
        match self {
            Term::Var(v) => match binding.get(v) {
                Some(c) => Term::Const(c.clone()),
                None => self.clone(),
            },
            Term::Apply { function, args } => Term::Apply {
                function: function.clone(),
                args: args.iter().map(|a| a.substitute(binding)).collect(),
            },
            Term::Const(_) => self.clone(),
        }
    }

    pub fn has_application(&self) -> bool {
        matches!(self, Term::Apply { .. })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => c.fmt(f),
            Term::Var(v) => f.write_str(v),
            Term::Apply { function, args } => {
                write!(f, "{function}(")?;
                write_joined(f, args)?;
                f.write_str(")")
            }
        }
    }
}

/// Variable assignment produced by grounding or matching.
pub type Binding = BTreeMap<String, Constant>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), terms }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.terms.iter().for_each(|t| t.variables(&mut out));
        out
    }

    pub fn substitute(&self, binding: &Binding) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            terms: self.terms.iter().map(|t| t.substitute(binding)).collect(),
        }
    }

    /// Returns the ground form when every term is a constant.
    pub fn to_ground(&self) -> Option<GroundAtom> {
        let args = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom { predicate: self.predicate.clone(), args })
    }

    /// Unifies this pattern against a ground atom, extending `binding`.
    pub fn unify(&self, ground: &GroundAtom, binding: &Binding) -> Option<Binding> {
        if self.predicate != ground.predicate || self.terms.len() != ground.args.len() {
            return None;
        }
        let mut out = binding.clone();
        for (term, value) in self.terms.iter().zip(&ground.args) {
            match term {
                Term::Const(c) if c == value => {}
                Term::Const(_) => return None,
                Term::Var(v) => match out.get(v) {
                    Some(bound) if bound == value => {}
                    Some(_) => return None,
                    None => {
                        out.insert(v.clone(), value.clone());
                    }
                },
                Term::Apply { .. } => return None,
            }
        }
        Some(out)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.terms.is_empty() {
            f.write_str("(")?;
            write_joined(f, &self.terms)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Constant>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Constant>) -> Self {
        GroundAtom { predicate: predicate.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn to_atom(&self) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            terms: self.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_joined(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// An atom with polarity. `negated` means strong negation: the atom is
/// explicitly false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    #[serde(default)]
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        self.atom.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundLiteral {
    pub atom: GroundAtom,
    #[serde(default)]
    pub negated: bool,
}

impl GroundLiteral {
    pub fn pos(atom: GroundAtom) -> Self {
        GroundLiteral { atom, negated: false }
    }

    pub fn neg(atom: GroundAtom) -> Self {
        GroundLiteral { atom, negated: true }
    }

    pub fn truth(&self) -> super::TruthValue {
        if self.negated {
            super::TruthValue::False
        } else {
            super::TruthValue::True
        }
    }

    pub fn to_literal(&self) -> Literal {
        Literal { atom: self.atom.to_atom(), negated: self.negated }
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        self.atom.fmt(f)
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        item.fmt(f)?;
    }
    Ok(())
}
