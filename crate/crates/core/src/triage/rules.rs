use std::collections::BTreeMap;
use std::sync::Arc;

use crate::logic::{parse_program, Constant, Domain, FunctionTable, GroundAtom, GroundLiteral, Program, Rule};

use super::model::Scenario;
use super::scoring::{life_score, niss_score, rts_score};

pub const O_SCR: &str = "o_scr";
pub const O_RTD: &str = "o_rtd";
pub const C_LSI: &str = "c_lsi";
pub const C_SCR: &str = "c_scr";
pub const C_RTD: &str = "c_rtd";
pub const C_AIR: &str = "c_air";

/// Predicate signatures understood by the orchestrator. Problem indices and
/// thresholds live in number positions.
pub fn vocabulary() -> Program {
    use Domain::*;
    let mut p = Program::new();
    let sigs: &[(&str, &[Domain])] = &[
        ("casualty", &[Personnel]),
        ("asset", &[Asset]),
        ("facility", &[Facility]),
        ("insultsAvailable", &[Personnel]),
        ("vitalsAvailable", &[Personnel]),
        ("score", &[Personnel, Number]),
        ("rtdScore", &[Personnel, Number]),
        ("lsiScore", &[Personnel, Number]),
        ("use_o", &[Objective]),
        ("use_o", &[Objective, Number]),
        ("use_c", &[Constraint]),
        // (c_lsi, i) or (thresholded c, k) with the index left implicit.
        ("use_c", &[Constraint, Number]),
        ("use_c", &[Constraint, Number, Number]),
        ("evac", &[Personnel]),
        ("evac", &[Personnel, Number]),
        ("assign_a", &[Personnel, Asset]),
        ("assign_a", &[Personnel, Asset, Number]),
        ("assign_f", &[Personnel, Facility]),
        ("assign_f", &[Personnel, Facility, Number]),
        ("value", &[Number, Objective, Number]),
        ("best", &[Objective, Number]),
        ("theta", &[Number]),
        ("problem_first", &[Number]),
        ("problem_next", &[Number, Number]),
        ("problem_last", &[Number]),
        ("eligible", &[Number]),
        ("beats", &[Number, Number]),
        ("unbeaten", &[Number, Number]),
        ("selected", &[Number]),
    ];
    for (name, domains) in sigs {
        p.declare(name, domains);
    }
    for o in [O_SCR, O_RTD] {
        p.register(Objective, o);
    }
    for c in [C_LSI, C_SCR, C_RTD, C_AIR] {
        p.register(Constraint, c);
    }
    p
}

const SCORE_RULES: &str = "
@score_niss score(P, niss(P)) :- insultsAvailable(P), not vitalsAvailable(P).
@score_rts score(P, rts(P)) :- not insultsAvailable(P), vitalsAvailable(P).
@score_life score(P, life(P)) :- insultsAvailable(P), vitalsAvailable(P).
";

/// The three score-selection rules: NISS when only insults are known, RTS
/// when only vitals are, LIFE when both are.
pub fn default_score_rules() -> Vec<Rule> {
    let mut src = vocabulary().to_string();
    src.push_str(SCORE_RULES);
    parse_program(&src).expect("built-in score rules parse").rules
}

/// Entity and availability facts for a scenario. Availability is always
/// stated explicitly, true or false, so strongly negated bodies can fire.
pub fn scenario_facts(scenario: &Scenario) -> Vec<GroundLiteral> {
    let unary = |pred: &str, name: &str| GroundAtom::new(pred, vec![Constant::sym(name)]);
    let flag = |atom: GroundAtom, on: bool| if on { GroundLiteral::pos(atom) } else { GroundLiteral::neg(atom) };
    let mut out = Vec::new();
    for c in &scenario.casualties {
        out.push(GroundLiteral::pos(unary("casualty", &c.name)));
        out.push(flag(unary("insultsAvailable", &c.name), c.insults_available));
        out.push(flag(unary("vitalsAvailable", &c.name), c.vitals_available));
    }
    for a in &scenario.assets {
        out.push(GroundLiteral::pos(unary("asset", &a.name)));
    }
    for f in &scenario.facilities {
        out.push(GroundLiteral::pos(unary("facility", &f.name)));
    }
    out
}

/// Vocabulary, default score rules and scenario facts.
pub fn scenario_program(scenario: &Scenario) -> Program {
    let mut p = vocabulary();
    for r in default_score_rules() {
        p.add_rule(r);
    }
    for f in scenario_facts(scenario) {
        p.add_fact(f).expect("scenario predicates are in the vocabulary");
    }
    p
}

/// Registers `niss`, `rts` and `life` over the scenario's casualties.
pub fn scenario_functions(scenario: &Scenario) -> FunctionTable {
    let casualties: Arc<BTreeMap<String, _>> =
        Arc::new(scenario.casualties.iter().map(|c| (c.name.clone(), c.clone())).collect());
    let mut table = FunctionTable::new();
    let lookup = move |args: &[Constant]| {
        let name = match args {
            [c] => c.as_symbol().ok_or_else(|| format!("expected a casualty name, got {c}"))?,
            _ => return Err(format!("expected 1 argument, got {}", args.len())),
        };
        casualties.get(name).cloned().ok_or_else(|| format!("unknown casualty {name}"))
    };
    let l = lookup.clone();
    table.register("niss", move |args| niss_score(&l(args)?).map(|s| s.norm).map_err(|e| e.to_string()));
    let l = lookup.clone();
    table.register("rts", move |args| rts_score(&l(args)?).map(|s| s.norm).map_err(|e| e.to_string()));
    table.register("life", move |args| life_score(&lookup(args)?).map_err(|e| e.to_string()));
    table
}

/// Parses `text` against the vocabulary and adds its signatures, facts and
/// rules to `program`.
pub fn extend_program(program: &mut Program, text: &str) -> Result<(), crate::logic::LogicError> {
    let mut src = vocabulary().to_string();
    for (key, domains) in &program.signatures {
        let (name, _) = key.rsplit_once('/').unwrap_or((key, ""));
        let names: Vec<_> = domains.iter().map(|d| d.name()).collect();
        if names.is_empty() {
            src.push_str(&format!("#sig {name}.\n"));
        } else {
            src.push_str(&format!("#sig {name}({}).\n", names.join(", ")));
        }
    }
    src.push_str(text);
    let parsed = parse_program(&src)?;
    for (k, v) in parsed.signatures {
        program.signatures.entry(k).or_insert(v);
    }
    for fact in parsed.facts {
        program.add_fact(fact)?;
    }
    for rule in parsed.rules {
        program.add_rule(rule);
    }
    Ok(())
}
