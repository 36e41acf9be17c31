use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::error::LogicError;
use super::term::{Constant, Term};

pub type Function = Arc<dyn Fn(&[Constant]) -> Result<f64, String> + Send + Sync>;

/// Evaluable functions keyed by name. Arithmetic helpers (`add`, `sub`,
/// `mul`, `div`, `min`, `max`) are always present.
#[derive(Clone)]
pub struct FunctionTable {
    functions: BTreeMap<String, Function>,
}

impl fmt::Debug for FunctionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.functions.keys()).finish()
    }
}

impl Default for FunctionTable {
    fn default() -> Self {
        Self::new()
    }
}

fn numeric_args(args: &[Constant]) -> Result<Vec<f64>, String> {
    args.iter()
        .map(|a| a.as_number().ok_or_else(|| format!("expected a number, got {a}")))
        .collect()
}

fn binary(op: fn(f64, f64) -> f64) -> Function {
    Arc::new(move |args: &[Constant]| {
        let xs = numeric_args(args)?;
        match xs.as_slice() {
            [a, b] => Ok(op(*a, *b)),
            _ => Err(format!("expected 2 arguments, got {}", xs.len())),
        }
    })
}

impl FunctionTable {
    pub fn new() -> Self {
        let mut table = FunctionTable { functions: BTreeMap::new() };
        table.functions.insert("add".into(), binary(|a, b| a + b));
        table.functions.insert("sub".into(), binary(|a, b| a - b));
        table.functions.insert("mul".into(), binary(|a, b| a * b));
        table.functions.insert("min".into(), binary(f64::min));
        table.functions.insert("max".into(), binary(f64::max));
        table.functions.insert(
            "div".into(),
            Arc::new(|args: &[Constant]| {
                let xs = numeric_args(args)?;
                match xs.as_slice() {
                    [_, b] if *b == 0.0 => Err("division by zero".into()),
                    [a, b] => Ok(a / b),
                    _ => Err(format!("expected 2 arguments, got {}", xs.len())),
                }
            }),
        );
        table
    }

    pub fn register<F>(&mut self, name: impl Into<String>, f: F)
    where
        F: Fn(&[Constant]) -> Result<f64, String> + Send + Sync + 'static,
    {
        self.functions.insert(name.into(), Arc::new(f));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    /// Evaluates a variable-free term to a constant.
    pub fn evaluate(&self, term: &Term) -> Result<Constant, LogicError> {
        match term {
            Term::Const(c) => Ok(c.clone()),
            Term::Var(v) => Err(LogicError::Evaluation {
                function: "<term>".into(),
                message: format!("unbound variable {v}"),
            }),
            Term::Apply { function, args } => {
                let f = self
                    .functions
                    .get(function)
                    .ok_or_else(|| LogicError::UnknownFunction(function.clone()))?;
                let values = args.iter().map(|a| self.evaluate(a)).collect::<Result<Vec<_>, _>>()?;
                let out = f(&values).map_err(|message| LogicError::Evaluation {
                    function: function.clone(),
                    message,
                })?;
                if !out.is_finite() {
                    return Err(LogicError::Evaluation {
                        function: function.clone(),
                        message: format!("non-finite result {out}"),
                    });
                }
                Ok(Constant::num(out))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_arithmetic() {
        let t = FunctionTable::new();
        let term = Term::apply("mul", vec![Term::num(0.5), Term::apply("add", vec![Term::num(1.0), Term::num(3.0)])]);
        assert_eq!(t.evaluate(&term).unwrap(), Constant::num(2.0));
    }

    #[test]
    fn unknown_function_errors() {
        let t = FunctionTable::new();
        let err = t.evaluate(&Term::apply("nope", vec![])).unwrap_err();
        assert!(matches!(err, LogicError::UnknownFunction(name) if name == "nope"));
    }

    #[test]
    fn division_by_zero_errors() {
        let t = FunctionTable::new();
        assert!(t.evaluate(&Term::apply("div", vec![Term::num(1.0), Term::num(0.0)])).is_err());
    }
}
