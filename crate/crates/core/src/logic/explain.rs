use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::LogicError;
use super::fixpoint::Interpretation;
use super::term::{Binding, GroundAtom, GroundLiteral};

/// Derivation tree for one literal, expanded down to base facts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub literal: GroundLiteral,
    /// `None` when the literal is a base fact.
    pub rule_id: Option<String>,
    #[serde(default, skip_serializing_if = "Binding::is_empty")]
    pub substitution: Binding,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Explanation>,
}

impl Explanation {
    pub fn is_base_fact(&self) -> bool {
        self.rule_id.is_none()
    }

    /// Literals at the leaves of the tree, left to right.
    pub fn leaves(&self) -> Vec<&GroundLiteral> {
        if self.premises.is_empty() {
            return vec![&self.literal];
        }
        self.premises.iter().flat_map(Explanation::leaves).collect()
    }

    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Explanation::depth).max().unwrap_or(0)
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        match &self.rule_id {
            None => writeln!(f, "{pad}{}  [fact]", self.literal)?,
            Some(id) => writeln!(f, "{pad}{}  [rule {id}]", self.literal)?,
        }
        for p in &self.premises {
            p.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Builds the derivation tree of `atom` from the first derivation of each
/// atom in log order.
pub fn explain(interp: &Interpretation, atom: &GroundAtom) -> Result<Explanation, LogicError> {
    let derivation = interp.first_derivation(atom).ok_or_else(|| LogicError::NoDerivation(atom.to_string()))?;
    let premises = derivation
        .premises
        .iter()
        .map(|p| explain(interp, &p.atom))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Explanation {
        literal: derivation.literal.clone(),
        rule_id: derivation.rule_id.clone(),
        substitution: derivation.substitution.clone(),
        premises,
    })
}
