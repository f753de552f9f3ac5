//! Compiling CNF satisfiability into recognition for ε-free grammars.
//!
//! For a formula with variables `v1..vn` and clauses `c1..cm` the input is
//! `c_m .. c_1 c0 v1 .. vn v(n+1) d_n .. d_1`. A derivation guesses an
//! assignment over `c0 v1 .. v(n+1)` (one of two entries per variable),
//! passes the assignment stack through every clause word, where a clause
//! only lets it through if one of its literals is made true, and finally
//! pops the stack against the `d` words.

use std::fmt;

use thiserror::Error;

use crate::category::{Argument, Atom, Category};
use crate::derivation::Derivation;
use crate::grammar::{Grammar, LexEntry, Rule};
use crate::parser::{parse, ParseConfig, ParseError, ParseResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Literal {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Literal {
        Literal { var, negated: true }
    }

    fn from_dimacs(value: i64) -> Literal {
        Literal {
            var: value.unsigned_abs() as usize,
            negated: value < 0,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> CnfFormula {
        CnfFormula { num_vars, clauses }
    }

    /// Total number of literal occurrences.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&format!("{lit} "));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Truth values for `v1..vn`, stored at indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn value(&self, var: usize) -> bool {
        self.0[var - 1]
    }

    pub fn satisfies_literal(&self, lit: Literal) -> bool {
        self.value(lit.var) != lit.negated
    }

    pub fn satisfies(&self, phi: &CnfFormula) -> bool {
        phi.clauses
            .iter()
            .all(|clause| clause.iter().any(|&lit| self.satisfies_literal(lit)))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "v{}={}", i + 1, u8::from(b))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were given")]
    ClauseCount { declared: usize, found: usize },
    #[error("line {line}: variable {var} out of range 1..={num_vars}")]
    VarOutOfRange { line: usize, var: usize, num_vars: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line == "%" {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(DimacsError::Syntax {
                    line: line_no,
                    message: "duplicate header".into(),
                });
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["cnf", n, m] => n.parse().ok().zip(m.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| DimacsError::Syntax {
                line: line_no,
                message: "expected `p cnf <vars> <clauses>`".into(),
            })?);
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for token in line.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| DimacsError::Syntax {
                line: line_no,
                message: format!("bad literal `{token}`"),
            })?;
            if value == 0 {
                if current.is_empty() {
                    return Err(DimacsError::EmptyClause { line: line_no });
                }
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            let lit = Literal::from_dimacs(value);
            if lit.var > num_vars {
                return Err(DimacsError::VarOutOfRange {
                    line: line_no,
                    var: lit.var,
                    num_vars,
                });
            }
            current.push(lit);
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

/// First satisfying assignment in lexicographic order with false < true
/// and `v1` most significant.
pub fn brute_force_sat(phi: &CnfFormula) -> Option<Assignment> {
    let n = phi.num_vars;
    assert!(n <= 20, "brute force limited to 20 variables");
    (0u32..1 << n)
        .map(|bits| Assignment((0..n).map(|j| bits >> (n - 1 - j) & 1 == 1).collect()))
        .find(|a| a.satisfies(phi))
}

#[derive(Clone, Debug)]
pub struct SatInstance {
    pub grammar: Grammar,
    pub input: Vec<String>,
    pub arity_bound: usize,
    pub num_vars: usize,
    pub num_clauses: usize,
    /// Number of clause-checking rules.
    pub clause_rules: usize,
}

impl SatInstance {
    pub fn input_refs(&self) -> Vec<&str> {
        self.input.iter().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("clause {0} is empty")]
    EmptyClause(usize),
    #[error("literal of variable {var} exceeds the {num_vars} declared variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("derivation yield differs from the instance input")]
    YieldMismatch,
    #[error("no leaf for word v{0} with an assignment category")]
    MissingVariable(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn atom(name: String) -> Atom {
    Atom::new(&name).expect("generated atom names are valid")
}

fn cent() -> Category {
    Category::atomic(atom("cent".into()))
}

fn value_atom(j: usize, value: bool) -> Category {
    Category::atomic(atom(format!("v{j}{}", if value { 'T' } else { 'F' })))
}

fn clause_atom(i: usize) -> Atom {
    atom(format!("c{i}"))
}

fn fwd(target: Atom, args: &[Category]) -> Category {
    Category::new(target, args.iter().cloned().map(Argument::forward).collect())
}

/// Builds the grammar and input string for `phi`.
pub fn build_sat_instance(phi: &CnfFormula) -> Result<SatInstance, SatError> {
    let n = phi.num_vars;
    let m = phi.clauses.len();
    for (i, clause) in phi.clauses.iter().enumerate() {
        if clause.is_empty() {
            return Err(SatError::EmptyClause(i + 1));
        }
        if let Some(lit) = clause.iter().find(|l| l.var == 0 || l.var > n) {
            return Err(SatError::VarOutOfRange { var: lit.var, num_vars: n });
        }
    }
    let cent_atom = atom("cent".into());
    let mut lexicon = vec![LexEntry::new("c0", fwd(clause_atom(0), &[cent()]))];
    for j in 1..=n {
        for value in [true, false] {
            lexicon.push(LexEntry::new(
                &format!("v{j}"),
                fwd(cent_atom, &[value_atom(j, value), cent()]),
            ));
        }
    }
    lexicon.push(LexEntry::new(&format!("v{}", n + 1), cent()));
    for i in 1..=m {
        lexicon.push(LexEntry::new(
            &format!("c{i}"),
            fwd(clause_atom(i), &[Category::atomic(clause_atom(i - 1))]),
        ));
    }
    for j in 1..=n {
        for value in [true, false] {
            lexicon.push(LexEntry::new(&format!("d{j}"), value_atom(j, value)));
        }
    }

    let mut rules = Vec::new();
    for j in 1..=n {
        for value in [true, false] {
            rules.push(
                Rule::forward_composition(2)
                    .with_y([cent()])
                    .with_z(1, [value_atom(j, value)])
                    .with_z(2, [cent()]),
            );
        }
    }
    rules.push(Rule::forward_composition(0).with_y([cent()]));
    let mut clause_rules = 0;
    for (i, clause) in phi.clauses.iter().enumerate() {
        let mut seen = Vec::new();
        for &lit in clause {
            if seen.contains(&lit) {
                continue;
            }
            seen.push(lit);
            rules.push(
                Rule::forward_composition(n)
                    .with_y([Category::atomic(clause_atom(i))])
                    .with_z(lit.var, [value_atom(lit.var, !lit.negated)]),
            );
            clause_rules += 1;
        }
    }
    for j in 1..=n {
        for value in [true, false] {
            rules.push(Rule::forward_composition(0).with_y([value_atom(j, value)]));
        }
    }

    let mut input: Vec<String> = (0..=m).rev().map(|i| format!("c{i}")).collect();
    input.extend((1..=n + 1).map(|j| format!("v{j}")));
    input.extend((1..=n).rev().map(|j| format!("d{j}")));
    let grammar = Grammar::new(clause_atom(m), lexicon, rules).expect("generated grammar is valid");
    Ok(SatInstance {
        grammar,
        input,
        arity_bound: n + 2,
        num_vars: n,
        num_clauses: m,
        clause_rules,
    })
}

/// Reads the assignment guessed by a derivation from its variable leaves.
pub fn decode_assignment(inst: &SatInstance, t: &Derivation) -> Result<Assignment, SatError> {
    if t.yield_words() != inst.input_refs() {
        return Err(SatError::YieldMismatch);
    }
    let leaves = t.leaves();
    let mut values = Vec::with_capacity(inst.num_vars);
    for j in 1..=inst.num_vars {
        let word = format!("v{j}");
        let leaf = leaves
            .iter()
            .find(|e| e.word.as_deref() == Some(word.as_str()))
            .ok_or(SatError::MissingVariable(j))?;
        let value = match leaf.category.args() {
            [_, _] if leaf.category.args()[0].category == value_atom(j, true) => true,
            [_, _] if leaf.category.args()[0].category == value_atom(j, false) => false,
            _ => return Err(SatError::MissingVariable(j)),
        };
        values.push(value);
    }
    Ok(Assignment(values))
}

/// Outcome of solving through the grammar, with the intermediate artifacts.
#[derive(Clone, Debug)]
pub struct SatRun {
    /// Absent when the formula has an empty clause.
    pub instance: Option<SatInstance>,
    pub parse: Option<ParseResult>,
    pub assignment: Option<Assignment>,
}

pub fn solve_run(phi: &CnfFormula) -> Result<SatRun, SatError> {
    solve_run_budgeted(phi, None)
}

/// [`solve_run`] giving up after `max_items` chart items.
pub fn solve_run_budgeted(phi: &CnfFormula, max_items: Option<usize>) -> Result<SatRun, SatError> {
    if phi.clauses.iter().any(Vec::is_empty) {
        return Ok(SatRun {
            instance: None,
            parse: None,
            assignment: None,
        });
    }
    let inst = build_sat_instance(phi)?;
    let cfg = ParseConfig {
        arity_cap: Some(inst.arity_bound),
        max_items,
        ..ParseConfig::default()
    };
    let result = parse(&inst.grammar, &inst.input_refs(), &cfg)?;
    let assignment = match &result.derivation {
        Some(t) => Some(decode_assignment(&inst, t)?),
        None => None,
    };
    Ok(SatRun {
        instance: Some(inst),
        parse: Some(result),
        assignment,
    })
}

/// A satisfying assignment found by parsing the compiled instance, if any.
pub fn solve_via_ccg(phi: &CnfFormula) -> Result<Option<Assignment>, SatError> {
    Ok(solve_run(phi)?.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::Slash;
    use crate::derivation::check_certificate;
    use crate::fixtures::RUNNING_EXAMPLE_CNF;

    fn running() -> CnfFormula {
        parse_dimacs(RUNNING_EXAMPLE_CNF).unwrap()
    }

    #[test]
    fn dimacs_examples() {
        let phi = running();
        assert_eq!(phi.num_vars, 2);
        assert_eq!(
            phi.clauses,
            vec![
                vec![Literal::pos(1), Literal::neg(2)],
                vec![Literal::pos(1), Literal::pos(2)],
                vec![Literal::neg(1), Literal::neg(2)],
            ]
        );
        let one = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(one.clauses, vec![vec![Literal::pos(1)]]);
        let dup = parse_dimacs("p cnf 1 1\n1 1 0\n").unwrap();
        assert_eq!(dup.clauses, vec![vec![Literal::pos(1), Literal::pos(1)]]);
        assert_eq!(parse_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }

    #[test]
    fn dimacs_errors() {
        assert_eq!(
            parse_dimacs("p cnf 2 2\n1 0\n"),
            Err(DimacsError::ClauseCount { declared: 2, found: 1 })
        );
        assert_eq!(parse_dimacs("p cnf 1 1\n0\n"), Err(DimacsError::EmptyClause { line: 2 }));
        assert_eq!(
            parse_dimacs("p cnf 1 1\n2 0\n"),
            Err(DimacsError::VarOutOfRange {
                line: 2,
                var: 2,
                num_vars: 1
            })
        );
        assert_eq!(parse_dimacs("1 0\n"), Err(DimacsError::MissingHeader));
        assert_eq!(parse_dimacs("p cnf 1 1\n1\n"), Err(DimacsError::Unterminated));
        assert!(matches!(parse_dimacs("p cnf x 1\n"), Err(DimacsError::Syntax { line: 1, .. })));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_sat(&running()), Some(Assignment(vec![true, false])));
        let contradiction = CnfFormula::new(1, vec![vec![Literal::pos(1)], vec![Literal::neg(1)]]);
        assert_eq!(brute_force_sat(&contradiction), None);
        let either = CnfFormula::new(2, vec![vec![Literal::pos(1), Literal::pos(2)]]);
        assert_eq!(brute_force_sat(&either), Some(Assignment(vec![false, true])));
    }

    #[test]
    fn running_example_instance() {
        let inst = build_sat_instance(&running()).unwrap();
        assert_eq!(inst.input, ["c3", "c2", "c1", "c0", "v1", "v2", "v3", "d2", "d1"]);
        assert_eq!(inst.clause_rules, 6);
        assert_eq!(inst.arity_bound, 4);
        assert!(inst.grammar.is_epsilon_free());
        assert_eq!(inst.grammar.start().name().as_ref(), "c3");
    }

    #[test]
    fn single_literal_instance() {
        let phi = CnfFormula::new(1, vec![vec![Literal::pos(1)]]);
        let inst = build_sat_instance(&phi).unwrap();
        assert_eq!(inst.input, ["c1", "c0", "v1", "v2", "d1"]);
        assert_eq!(solve_via_ccg(&phi).unwrap(), Some(Assignment(vec![true])));
    }

    #[test]
    fn running_example_solves() {
        let phi = running();
        let run = solve_run(&phi).unwrap();
        let inst = run.instance.unwrap();
        let result = run.parse.unwrap();
        assert!(!result.cap_hit);
        let t = result.derivation.unwrap();
        assert_eq!(check_certificate(&inst.grammar, &t, &inst.input_refs()), Ok(()));
        assert_eq!(run.assignment, Some(Assignment(vec![true, false])));
    }

    #[test]
    fn unsat_and_empty_clause() {
        let contradiction = CnfFormula::new(1, vec![vec![Literal::pos(1)], vec![Literal::neg(1)]]);
        assert_eq!(solve_via_ccg(&contradiction).unwrap(), None);
        let empty = CnfFormula::new(1, vec![vec![]]);
        assert_eq!(build_sat_instance(&empty).unwrap_err(), SatError::EmptyClause(1));
        assert_eq!(solve_via_ccg(&empty).unwrap(), None);
    }

    #[test]
    fn no_clauses() {
        let phi = CnfFormula::new(2, vec![]);
        let inst = build_sat_instance(&phi).unwrap();
        assert_eq!(inst.grammar.start().name().as_ref(), "c0");
        assert!(solve_via_ccg(&phi).unwrap().is_some());
    }

    #[test]
    fn duplicate_literals_share_a_rule() {
        let phi = CnfFormula::new(1, vec![vec![Literal::pos(1), Literal::pos(1)]]);
        assert_eq!(build_sat_instance(&phi).unwrap().clause_rules, 1);
    }

    #[test]
    fn decode_rejects_foreign_yield() {
        let inst = build_sat_instance(&running()).unwrap();
        let t = Derivation::leaf(LexEntry::new("d1", value_atom(1, true)));
        assert_eq!(decode_assignment(&inst, &t), Err(SatError::YieldMismatch));
    }

    #[test]
    fn slash_directions_are_forward() {
        let inst = build_sat_instance(&running()).unwrap();
        for rule in inst.grammar.rules() {
            assert!(rule.arg_slashes.iter().all(|&s| s == Slash::Forward));
        }
    }
}
