//! Property checks for the deduction engine and the fixture programs they
//! run against.
//!
//! The oracle is a naive evaluator that treats `a` and `not a` as unrelated
//! propositions, enumerates every variable assignment over the program's
//! constants and closes under the rules. A program is consistent exactly when
//! that closure never contains both signs of an atom, and for consistent
//! programs it must agree with the engine atom for atom.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    extend, fixpoint, parse_program, Atom, Binding, Constant, Domain, FunctionTable, GroundAtom, GroundLiteral,
    Interpretation, Literal, LogicError, Program, Rule, Term, TruthValue,
};

pub const FIXTURE_COUNT: usize = 30;
pub const SHUFFLES: u64 = 20;

const HAND_WRITTEN: &[(&str, &str)] = &[
    (
        "score_selection",
        "#sig insultsAvailable(personnel). #sig vitalsAvailable(personnel). #sig scored(personnel, other).
         insultsAvailable(p1). not vitalsAvailable(p1). not insultsAvailable(p2). vitalsAvailable(p2).
         insultsAvailable(p3). vitalsAvailable(p3). #domain other niss rts life.
         @niss scored(P, niss) :- insultsAvailable(P), not vitalsAvailable(P).
         @rts scored(P, rts) :- not insultsAvailable(P), vitalsAvailable(P).
         @life scored(P, life) :- insultsAvailable(P), vitalsAvailable(P).",
    ),
    ("fact_then_negated_rule", "#sig a. #sig b. a. @neg_a not a :- b. @b b."),
    ("negation_needs_falsity", "#sig a. #sig b. @r b :- not a."),
    (
        "chain",
        "#sig edge(other, other). #sig reach(other, other).
         edge(n1, n2). edge(n2, n3). edge(n3, n4).
         @base reach(X, Y) :- edge(X, Y). @step reach(X, Z) :- reach(X, Y), edge(Y, Z).",
    ),
    (
        "negated_chain",
        "#sig up(other). #sig down(other). #sig link(other, other).
         not up(n1). link(n1, n2). link(n2, n3).
         @prop not up(Y) :- not up(X), link(X, Y). @down down(X) :- not up(X).",
    ),
    (
        "late_conflict",
        "#sig p(other). #sig q(other). #sig link(other, other).
         p(n1). link(n1, n2). link(n2, n3). not q(n3).
         @fwd p(Y) :- p(X), link(X, Y). @q q(X) :- p(X).",
    ),
];

/// Hand-written programs followed by seeded random ones, `FIXTURE_COUNT` in
/// total. Some are inconsistent on purpose.
pub fn fixture_programs() -> Vec<(String, Program)> {
    let mut out: Vec<(String, Program)> = HAND_WRITTEN
        .iter()
        .map(|(name, src)| (name.to_string(), parse_program(src).expect("fixture parses")))
        .collect();
    let mut seed = 0;
    while out.len() < FIXTURE_COUNT {
        out.push((format!("random_{seed}"), random_program(seed)));
        seed += 1;
    }
    out
}

const UNARY: [&str; 4] = ["u0", "u1", "u2", "u3"];
const BINARY: [&str; 2] = ["b0", "b1"];
const NULLARY: [&str; 2] = ["z0", "z1"];
const CONSTANTS: [&str; 3] = ["c1", "c2", "c3"];

fn random_atom(rng: &mut ChaCha8Rng, args: &[&str]) -> Atom {
    let term = |s: &str| if s.starts_with(char::is_uppercase) { Term::var(s) } else { Term::sym(s) };
    match rng.random_range(0..10) {
        0 => Atom::new(*NULLARY.choose(rng).unwrap(), vec![]),
        1..=6 => Atom::new(*UNARY.choose(rng).unwrap(), vec![term(args.choose(rng).unwrap())]),
        _ => Atom::new(
            *BINARY.choose(rng).unwrap(),
            vec![term(args.choose(rng).unwrap()), term(args.choose(rng).unwrap())],
        ),
    }
}

fn literal(atom: Atom, negated: bool) -> Literal {
    if negated {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

/// Small random program over unary, binary and nullary predicates with
/// strong negation in heads, bodies and facts.
pub fn random_program(seed: u64) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Program::new();
    for u in UNARY {
        p.declare(u, &[Domain::Other]);
    }
    for b in BINARY {
        p.declare(b, &[Domain::Other, Domain::Other]);
    }
    for z in NULLARY {
        p.declare(z, &[]);
    }
    for c in CONSTANTS {
        p.register(Domain::Other, c);
    }
    for _ in 0..rng.random_range(2..=6) {
        let atom = random_atom(&mut rng, &CONSTANTS).to_ground().expect("constants only");
        let neg = rng.random_bool(0.3);
        p.add_fact(if neg { GroundLiteral::neg(atom) } else { GroundLiteral::pos(atom) })
            .expect("declared");
    }
    let vars_and_consts = ["X", "Y", "X", "Y", "c1", "c2"];
    for i in 0..rng.random_range(2..=6) {
        let body: Vec<Literal> = (0..rng.random_range(1..=3))
            .map(|_| {
                let atom = random_atom(&mut rng, &vars_and_consts);
                literal(atom, rng.random_bool(0.3))
            })
            .collect();
        let bound: BTreeSet<String> = body.iter().flat_map(|l| l.atom.variables()).collect();
        let mut head_args: Vec<&str> = CONSTANTS.to_vec();
        head_args.extend(bound.iter().map(String::as_str));
        let head = random_atom(&mut rng, &head_args);
        p.add_rule(Rule::new(format!("g{i}"), literal(head, rng.random_bool(0.3)), body));
    }
    p
}

/// Oracle result: the value map, or an atom derivable with both signs.
pub fn oracle(program: &Program) -> Result<BTreeMap<GroundAtom, TruthValue>, GroundAtom> {
    let constants: Vec<Constant> =
        program.constants.iter().filter(|(d, _)| d.is_symbolic()).flat_map(|(_, s)| s.iter().cloned()).collect();
    let mut pos: BTreeSet<GroundAtom> = BTreeSet::new();
    let mut neg: BTreeSet<GroundAtom> = BTreeSet::new();
    for f in &program.facts {
        if f.negated { neg.insert(f.atom.clone()) } else { pos.insert(f.atom.clone()) };
    }
    loop {
        let mut changed = false;
        for rule in &program.rules {
            let vars = rule.variables();
            if constants.is_empty() && !vars.is_empty() {
                continue;
            }
            let mut index = vec![0usize; vars.len()];
            'assignments: loop {
                let binding: Binding =
                    vars.iter().cloned().zip(index.iter().map(|&i| constants[i].clone())).collect();
                let holds = rule.body.iter().all(|l| match l.atom.substitute(&binding).to_ground() {
                    Some(a) if l.negated => neg.contains(&a),
                    Some(a) => pos.contains(&a),
                    None => false,
                });
                if holds {
                    let head = rule.head.atom.substitute(&binding).to_ground().expect("safe rule");
                    changed |= if rule.head.negated { neg.insert(head) } else { pos.insert(head) };
                }
                // Odometer over all assignments; an empty variable list runs once.
                for slot in index.iter_mut() {
                    *slot += 1;
                    if *slot < constants.len() {
                        continue 'assignments;
                    }
                    *slot = 0;
                }
                break;
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(a) = pos.intersection(&neg).next() {
        return Err(a.clone());
    }
    let mut values: BTreeMap<GroundAtom, TruthValue> = pos.into_iter().map(|a| (a, TruthValue::True)).collect();
    values.extend(neg.into_iter().map(|a| (a, TruthValue::False)));
    Ok(values)
}

fn run(program: &Program) -> Result<Interpretation, LogicError> {
    fixpoint(program, &FunctionTable::new())
}

/// Engine raises an inconsistency iff the oracle finds a doubly derivable
/// atom, and otherwise agrees with it on every value.
pub fn check_consistency(program: &Program) -> Result<(), String> {
    match (run(program), oracle(program)) {
        (Ok(i), Ok(values)) if i.values() == &values => Ok(()),
        (Ok(i), Ok(values)) => Err(format!("engine {:?} differs from oracle {:?}", i.values(), values)),
        (Err(LogicError::Inconsistency { .. }), Err(_)) => Ok(()),
        (Err(e), Ok(_)) => Err(format!("engine reported {e} on a consistent program")),
        (Ok(_), Err(a)) => Err(format!("engine missed the conflict on {a}")),
        (Err(e), Err(_)) => Err(format!("expected an inconsistency, got {e}")),
    }
}

/// Re-running deduction over the program plus its own conclusions changes
/// nothing.
pub fn check_idempotence(program: &Program) -> Result<(), String> {
    let Ok(first) = run(program) else { return Ok(()) };
    let mut augmented = program.clone();
    for lit in first.literals() {
        augmented.add_fact(lit).map_err(|e| e.to_string())?;
    }
    let second = run(&augmented).map_err(|e| format!("augmented program failed: {e}"))?;
    if second.values() == first.values() {
        Ok(())
    } else {
        Err("values changed on re-deduction".into())
    }
}

/// Shuffling rules and facts leaves the outcome unchanged: the same values,
/// or an inconsistency every time.
pub fn check_order_independence(program: &Program, shuffles: u64) -> Result<(), String> {
    let reference = run(program).map(|i| i.values().clone()).ok();
    for seed in 0..shuffles {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = program.clone();
        shuffled.rules.shuffle(&mut rng);
        shuffled.facts.shuffle(&mut rng);
        let got = run(&shuffled).map(|i| i.values().clone()).ok();
        if got != reference {
            return Err(format!("shuffle {seed} changed the outcome"));
        }
    }
    Ok(())
}

/// Every firing of a rule was justified at the time: each premise, negated
/// ones included, had already been set to the required value.
pub fn check_negation_discipline(program: &Program) -> Result<(), String> {
    let Ok(interp) = run(program) else { return Ok(()) };
    let mut set_at: BTreeMap<&GroundAtom, (usize, TruthValue)> = BTreeMap::new();
    for (i, d) in interp.log().iter().enumerate() {
        for premise in &d.premises {
            match set_at.get(&premise.atom) {
                Some((_, v)) if *v == premise.truth() => {}
                _ => return Err(format!("derivation {i} ({d}) used {premise} before it was established")),
            }
        }
        set_at.entry(&d.literal.atom).or_insert((i, d.literal.truth()));
    }
    Ok(())
}

/// Adding facts never revises a definite value, and extending an existing
/// fixpoint matches deducing from scratch.
pub fn check_monotonicity(program: &Program, seed: u64) -> Result<(), String> {
    let Ok(before) = run(program) else { return Ok(()) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra: Vec<GroundLiteral> = (0..rng.random_range(1..=3))
        .filter_map(|_| {
            let atom = random_atom(&mut rng, &CONSTANTS).to_ground()?;
            program.signature(&atom.predicate, atom.arity())?;
            Some(if rng.random_bool(0.3) { GroundLiteral::neg(atom) } else { GroundLiteral::pos(atom) })
        })
        .collect();
    let mut union = program.clone();
    for f in &extra {
        union.add_fact(f.clone()).map_err(|e| e.to_string())?;
    }
    let scratch = run(&union).map(|i| i.values().clone()).ok();
    match extend(&before, program, &extra, &FunctionTable::new()) {
        Ok(after) => {
            for (atom, v) in before.values() {
                if after.value(atom) != *v {
                    return Err(format!("{atom} changed from {v:?} to {:?}", after.value(atom)));
                }
            }
            if scratch.as_ref() != Some(after.values()) {
                return Err("extend differs from deducing the union".into());
            }
            Ok(())
        }
        Err(LogicError::Inconsistency { .. }) if scratch.is_none() => Ok(()),
        Err(e) => Err(format!("extend failed with {e} but the union deduces")),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyOutcome {
    pub property: &'static str,
    pub programs: usize,
    pub failures: Vec<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every property over the fixture set.
pub fn run_suite() -> Vec<PropertyOutcome> {
    let fixtures = fixture_programs();
    type Check = fn(&Program) -> Result<(), String>;
    let checks: [(&'static str, Check); 5] = [
        ("monotonicity", |p| (0..5).try_for_each(|s| check_monotonicity(p, s))),
        ("idempotence", check_idempotence),
        ("order independence", |p| check_order_independence(p, SHUFFLES)),
        ("negation discipline", check_negation_discipline),
        ("consistency soundness and completeness", check_consistency),
    ];
    checks
        .iter()
        .map(|(property, check)| PropertyOutcome {
            property,
            programs: fixtures.len(),
            failures: fixtures.iter().filter_map(|(name, p)| check(p).err().map(|e| format!("{name}: {e}"))).collect(),
        })
        .collect()
}
