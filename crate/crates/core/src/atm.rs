//! Alternating Turing machines with a circular, polynomially bounded tape.
//!
//! The head only moves right: a transition `(q, a) -> (q', a')` on the
//! configuration `(q, aα)` yields `(q', αa')`. Acceptance is the least
//! fixpoint of the usual alternating conditions over the finite graph of
//! configurations reachable from the initial one.
//!
//! Machine files look like
//!
//! ```text
//! states q0:E q1:U q2:A q3:R
//! alphabet a b            (blank `#` is implicit, written `_` in transitions)
//! start q0
//! poly 1 1                (p(n) = 1 + n, low-order coefficient first)
//! trans q0 a -> q1 _
//! ```

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateType {
    Existential,
    Universal,
    Accepting,
    Rejecting,
}

impl StateType {
    pub fn letter(self) -> char {
        match self {
            StateType::Existential => 'E',
            StateType::Universal => 'U',
            StateType::Accepting => 'A',
            StateType::Rejecting => 'R',
        }
    }

    fn from_letter(c: &str) -> Option<StateType> {
        Some(match c {
            "E" => StateType::Existential,
            "U" => StateType::Universal,
            "A" => StateType::Accepting,
            "R" => StateType::Rejecting,
            _ => return None,
        })
    }
}

/// Tape symbols are indices into the machine alphabet; 0 is the blank.
pub type Symbol = u8;
pub const BLANK: Symbol = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub read: Symbol,
    pub to: usize,
    pub write: Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub states: Vec<String>,
    pub types: Vec<StateType>,
    /// Printable symbols; index 0 is the blank `#`.
    pub alphabet: Vec<char>,
    pub transitions: Vec<Transition>,
    pub start: usize,
    /// Coefficients of the tape-length polynomial, lowest degree first.
    pub poly: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{0}` line")]
    Missing(&'static str),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(char),
    #[error("transition {index} leaves {kind} state `{state}`")]
    TransitionFromHalting { index: usize, state: String, kind: &'static str },
    #[error("universal state `{state}` has {count} transitions on `{symbol}`; exactly two are required")]
    UniversalFanOut { state: String, symbol: char, count: usize },
    #[error("tape of {cells} cells cannot hold an input of length {input}")]
    TapeTooShort { cells: usize, input: usize },
    #[error("more than {limit} reachable configurations")]
    Budget { limit: usize },
    #[error("transition {0} does not apply to the configuration")]
    Inapplicable(usize),
}

fn syntax(line: usize, message: impl Into<String>) -> MachineError {
    MachineError::Syntax {
        line,
        message: message.into(),
    }
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Machine {
    /// Parses the machine file format; see [`validate_machine`] for the
    /// universal fan-out check.
    pub fn parse(text: &str) -> Result<Machine, MachineError> {
        let mut states: Vec<String> = Vec::new();
        let mut types = Vec::new();
        let mut alphabet = vec!['#'];
        let mut start_name: Option<String> = None;
        let mut poly = None;
        let mut raw_transitions = Vec::new();
        let mut seen_states = false;
        let mut seen_alphabet = false;
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap_or("");
            let rest: Vec<&str> = words.collect();
            match keyword {
                "states" => {
                    seen_states = true;
                    for decl in rest {
                        let (name, kind) = decl
                            .split_once(':')
                            .ok_or_else(|| syntax(line_no, format!("expected `name:TYPE`, found `{decl}`")))?;
                        let kind = StateType::from_letter(kind)
                            .ok_or_else(|| syntax(line_no, format!("unknown state type `{kind}`")))?;
                        if !is_name(name) {
                            return Err(syntax(line_no, format!("illegal state name `{name}`")));
                        }
                        if states.iter().any(|s| s == name) {
                            return Err(syntax(line_no, format!("duplicate state `{name}`")));
                        }
                        states.push(name.to_string());
                        types.push(kind);
                    }
                }
                "alphabet" => {
                    seen_alphabet = true;
                    for sym in rest {
                        let mut chars = sym.chars();
                        let c = match (chars.next(), chars.next()) {
                            (Some(c), None) if c.is_ascii_alphanumeric() => c,
                            _ => return Err(syntax(line_no, format!("symbols are single letters or digits, found `{sym}`"))),
                        };
                        if alphabet.contains(&c) {
                            return Err(syntax(line_no, format!("duplicate symbol `{c}`")));
                        }
                        alphabet.push(c);
                    }
                }
                "start" => match rest.as_slice() {
                    [name] => start_name = Some(name.to_string()),
                    _ => return Err(syntax(line_no, "expected `start <state>`")),
                },
                "poly" => {
                    let coeffs = rest
                        .iter()
                        .map(|c| c.parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| syntax(line_no, "coefficients must be non-negative integers"))?;
                    if coeffs.is_empty() {
                        return Err(syntax(line_no, "empty polynomial"));
                    }
                    poly = Some(coeffs);
                }
                "trans" => match rest.as_slice() {
                    [q, a, "->", q2, a2] => raw_transitions.push((line_no, *q, *a, *q2, *a2)),
                    _ => return Err(syntax(line_no, "expected `trans <q> <a> -> <q'> <a'>`")),
                },
                other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
            }
        }
        if !seen_states {
            return Err(MachineError::Missing("states"));
        }
        if !seen_alphabet {
            return Err(MachineError::Missing("alphabet"));
        }
        let start_name = start_name.ok_or(MachineError::Missing("start"))?;
        let poly = poly.ok_or(MachineError::Missing("poly"))?;
        let state = |name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| MachineError::UnknownState(name.to_string()))
        };
        let symbol = |line: usize, text: &str| -> Result<Symbol, MachineError> {
            let mut chars = text.chars();
            match (chars.next(), chars.next()) {
                (Some('_'), None) => Ok(BLANK),
                (Some(c), None) => alphabet
                    .iter()
                    .position(|&s| s == c && c != '#')
                    .map(|i| i as Symbol)
                    .ok_or(MachineError::UnknownSymbol(c)),
                _ => Err(syntax(line, format!("bad symbol `{text}`"))),
            }
        };
        let mut transitions = Vec::new();
        for (line, q, a, q2, a2) in raw_transitions {
            transitions.push(Transition {
                from: state(q)?,
                read: symbol(line, a)?,
                to: state(q2)?,
                write: symbol(line, a2)?,
            });
        }
        let m = Machine {
            start: state(&start_name)?,
            states,
            types,
            alphabet,
            transitions,
            poly,
        };
        m.check_domains()?;
        Ok(m)
    }

    fn check_domains(&self) -> Result<(), MachineError> {
        for (index, t) in self.transitions.iter().enumerate() {
            let kind = match self.types[t.from] {
                StateType::Accepting => "accepting",
                StateType::Rejecting => "rejecting",
                _ => continue,
            };
            return Err(MachineError::TransitionFromHalting {
                index,
                state: self.states[t.from].clone(),
                kind,
            });
        }
        Ok(())
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn symbol_char(&self, s: Symbol) -> char {
        self.alphabet[s as usize]
    }

    /// Character used for `s` in transition lines.
    pub fn symbol_token(&self, s: Symbol) -> char {
        if s == BLANK {
            '_'
        } else {
            self.symbol_char(s)
        }
    }

    /// Transition indices with left-hand side `(q, a)`, in file order.
    pub fn transitions_on(&self, q: usize, a: Symbol) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&i| self.transitions[i].from == q && self.transitions[i].read == a)
            .collect()
    }

    /// Reads an input word; `_` and `#` denote the blank.
    pub fn input(&self, w: &str) -> Result<Vec<Symbol>, MachineError> {
        w.chars()
            .map(|c| match c {
                '_' | '#' => Ok(BLANK),
                c => self
                    .alphabet
                    .iter()
                    .position(|&s| s == c)
                    .map(|i| i as Symbol)
                    .ok_or(MachineError::UnknownSymbol(c)),
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("states");
        for (name, kind) in self.states.iter().zip(&self.types) {
            out.push_str(&format!(" {name}:{}", kind.letter()));
        }
        out.push_str("\nalphabet");
        for c in &self.alphabet[1..] {
            out.push_str(&format!(" {c}"));
        }
        out.push_str(&format!("\nstart {}\npoly", self.states[self.start]));
        for c in &self.poly {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
        for t in &self.transitions {
            out.push_str(&format!(
                "trans {} {} -> {} {}\n",
                self.states[t.from],
                self.symbol_token(t.read),
                self.states[t.to],
                self.symbol_token(t.write)
            ));
        }
        out
    }

    pub fn render_tape(&self, tape: &[Symbol]) -> String {
        tape.iter().map(|&s| self.symbol_char(s)).collect()
    }
}

/// Duplicates the sole transition of every universal `(q, a)` that has
/// exactly one; fails if some universal `(q, a)` has more than two.
pub fn pad_universal(m: &Machine) -> Result<Machine, MachineError> {
    let mut out = m.clone();
    for q in 0..m.states.len() {
        if m.types[q] != StateType::Universal {
            continue;
        }
        for a in 0..m.num_symbols() as Symbol {
            let on = m.transitions_on(q, a);
            match on.len() {
                0 | 2 => {}
                1 => out.transitions.push(m.transitions[on[0]]),
                count => {
                    return Err(MachineError::UniversalFanOut {
                        state: m.states[q].clone(),
                        symbol: m.symbol_char(a),
                        count,
                    })
                }
            }
        }
    }
    Ok(out)
}

/// Checks the transition domain and universal fan-out. Universal pairs
/// without transitions are allowed and returned as warnings.
pub fn validate_machine(m: &Machine) -> Result<Vec<String>, MachineError> {
    if m.start >= m.states.len() {
        return Err(MachineError::UnknownState(format!("#{}", m.start)));
    }
    for (i, c) in m.alphabet.iter().enumerate() {
        if m.alphabet[..i].contains(c) {
            return Err(MachineError::UnknownSymbol(*c));
        }
    }
    m.check_domains()?;
    let mut warnings = Vec::new();
    for q in 0..m.states.len() {
        if m.types[q] != StateType::Universal {
            continue;
        }
        for a in 0..m.num_symbols() as Symbol {
            match m.transitions_on(q, a).len() {
                2 => {}
                0 => warnings.push(format!(
                    "universal state `{}` has no transition on `{}`",
                    m.states[q],
                    m.symbol_char(a)
                )),
                count => {
                    return Err(MachineError::UniversalFanOut {
                        state: m.states[q].clone(),
                        symbol: m.symbol_char(a),
                        count,
                    })
                }
            }
        }
    }
    Ok(warnings)
}

/// `p(|w|)`, the number of tape cells.
pub fn tape_cells(m: &Machine, input_len: usize) -> Result<usize, MachineError> {
    let n = input_len as u64;
    let mut value = 0u64;
    for &c in m.poly.iter().rev() {
        value = value.saturating_mul(n).saturating_add(c);
    }
    let cells = usize::try_from(value).unwrap_or(usize::MAX);
    if cells < input_len.max(1) {
        return Err(MachineError::TapeTooShort {
            cells,
            input: input_len,
        });
    }
    Ok(cells)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub state: usize,
    pub tape: Vec<Symbol>,
}

pub fn initial_config(m: &Machine, w: &[Symbol]) -> Result<Config, MachineError> {
    let cells = tape_cells(m, w.len())?;
    let mut tape = w.to_vec();
    tape.resize(cells, BLANK);
    Ok(Config { state: m.start, tape })
}

/// The configuration after taking transition `t` from `c`.
pub fn successor(m: &Machine, c: &Config, t: usize) -> Result<Config, MachineError> {
    let tr = m.transitions.get(t).ok_or(MachineError::Inapplicable(t))?;
    if tr.from != c.state || c.tape.first() != Some(&tr.read) {
        return Err(MachineError::Inapplicable(t));
    }
    let mut tape = c.tape[1..].to_vec();
    tape.push(tr.write);
    Ok(Config { state: tr.to, tape })
}

/// Default bound on the number of reachable configurations explored.
pub const DEFAULT_CONFIG_BUDGET: usize = 1 << 20;

/// The reachable configuration graph with acceptance levels: level 0 for
/// accepting configurations, `1 + min` over successors for existential and
/// `1 + max` over all successors for universal ones.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub configs: Vec<Config>,
    /// `(transition, successor id)` for each configuration.
    pub successors: Vec<Vec<(usize, usize)>>,
    pub levels: Vec<Option<usize>>,
    /// Number of fixpoint rounds until stabilization.
    pub rounds: usize,
}

impl Analysis {
    pub fn level(&self, id: usize) -> Option<usize> {
        self.levels[id]
    }

    pub fn accepts(&self) -> bool {
        self.levels[0].is_some()
    }

    fn id(&self, c: &Config) -> Option<usize> {
        self.configs.iter().position(|x| x == c)
    }
}

pub fn analyze(m: &Machine, w: &[Symbol], budget: usize) -> Result<Analysis, MachineError> {
    let init = initial_config(m, w)?;
    let mut ids: HashMap<Config, usize> = HashMap::new();
    let mut configs = vec![init.clone()];
    ids.insert(init, 0);
    let mut successors = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let c = configs[id].clone();
        let mut out = Vec::new();
        if matches!(m.types[c.state], StateType::Existential | StateType::Universal) {
            for t in m.transitions_on(c.state, c.tape[0]) {
                let next = successor(m, &c, t)?;
                let next_id = match ids.get(&next) {
                    Some(&i) => i,
                    None => {
                        if configs.len() >= budget {
                            return Err(MachineError::Budget { limit: budget });
                        }
                        let i = configs.len();
                        ids.insert(next.clone(), i);
                        configs.push(next);
                        queue.push_back(i);
                        i
                    }
                };
                out.push((t, next_id));
            }
        }
        if successors.len() <= id {
            successors.resize(id + 1, Vec::new());
        }
        successors[id] = out;
    }
    successors.resize(configs.len(), Vec::new());

    let mut levels: Vec<Option<usize>> = configs
        .iter()
        .map(|c| (m.types[c.state] == StateType::Accepting).then_some(0))
        .collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut next = levels.clone();
        for (id, c) in configs.iter().enumerate() {
            if levels[id].is_some() {
                continue;
            }
            let succ_levels = successors[id].iter().map(|&(_, s)| levels[s]);
            next[id] = match m.types[c.state] {
                StateType::Existential => succ_levels.flatten().min().map(|l| l + 1),
                StateType::Universal if !successors[id].is_empty() => succ_levels
                    .collect::<Option<Vec<_>>>()
                    .and_then(|ls| ls.into_iter().max())
                    .map(|l| l + 1),
                _ => None,
            };
        }
        if next == levels {
            break;
        }
        levels = next;
    }
    Ok(Analysis {
        configs,
        successors,
        levels,
        rounds,
    })
}

pub fn accepts(m: &Machine, w: &[Symbol]) -> Result<bool, MachineError> {
    Ok(analyze(m, w, DEFAULT_CONFIG_BUDGET)?.accepts())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationTree {
    pub config: Config,
    /// The transition that produced this node from its parent.
    pub via: Option<usize>,
    pub children: Vec<ComputationTree>,
}

impl ComputationTree {
    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ComputationTree::size).sum::<usize>()
    }

    /// Configurations of all nodes, sorted.
    pub fn config_multiset(&self) -> Vec<Config> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t.config.clone());
            stack.extend(&t.children);
        }
        out.sort();
        out
    }

    pub fn to_json(&self, m: &Machine) -> Value {
        json!({
            "state": m.states[self.config.state],
            "tape": m.render_tape(&self.config.tape),
            "via": self.via,
            "children": self.children.iter().map(|c| c.to_json(m)).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self, m: &Machine) -> String {
        let mut out = String::new();
        let mut stack = vec![(self, 0usize)];
        while let Some((t, depth)) = stack.pop() {
            let via = t.via.map(|v| format!("  via t{v}")).unwrap_or_default();
            out.push_str(&format!(
                "{}({}, {}) [{}]{via}\n",
                "  ".repeat(depth),
                m.states[t.config.state],
                m.render_tape(&t.config.tape),
                m.types[t.config.state].letter()
            ));
            for c in t.children.iter().rev() {
                stack.push((c, depth + 1));
            }
        }
        out
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q#{}, {:?})", self.state, self.tape)
    }
}

/// An accepting computation of least height; existential nodes take the
/// first transition (in file order) whose successor has the least level.
pub fn accepting_computation(m: &Machine, w: &[Symbol]) -> Result<Option<ComputationTree>, MachineError> {
    let a = analyze(m, w, DEFAULT_CONFIG_BUDGET)?;
    Ok(computation_from(m, &a, 0, None))
}

pub(crate) fn computation_from(m: &Machine, a: &Analysis, id: usize, via: Option<usize>) -> Option<ComputationTree> {
    a.levels[id]?;
    let config = a.configs[id].clone();
    let children = match m.types[config.state] {
        StateType::Accepting => Vec::new(),
        StateType::Existential => {
            let &(t, s) = a
                .successors[id]
                .iter()
                .filter(|(_, s)| a.levels[*s].is_some())
                .min_by_key(|(t, s)| (a.levels[*s], *t))?;
            vec![computation_from(m, a, s, Some(t))?]
        }
        StateType::Universal => a.successors[id]
            .iter()
            .map(|&(t, s)| computation_from(m, a, s, Some(t)))
            .collect::<Option<Vec<_>>>()?,
        StateType::Rejecting => return None,
    };
    Some(ComputationTree { config, via, children })
}

/// Level of the initial configuration, i.e. the least possible height of
/// an accepting computation.
pub fn acceptance_depth(m: &Machine, w: &[Symbol]) -> Result<Option<usize>, MachineError> {
    let a = analyze(m, w, DEFAULT_CONFIG_BUDGET)?;
    Ok(a.id(&initial_config(m, w)?).and_then(|i| a.level(i)))
}

/// Checks that `tree` is an accepting computation of `m` on `w`.
pub fn validate_computation(m: &Machine, w: &[Symbol], tree: &ComputationTree) -> Result<(), String> {
    let init = initial_config(m, w).map_err(|e| e.to_string())?;
    if tree.config != init {
        return Err("root is not the initial configuration".into());
    }
    let mut stack = vec![(tree, String::from("root"))];
    while let Some((t, path)) = stack.pop() {
        let c = &t.config;
        if c.state >= m.states.len() || c.tape.len() != init.tape.len() {
            return Err(format!("{path}: malformed configuration"));
        }
        let expected = match m.types[c.state] {
            StateType::Accepting => 0,
            StateType::Existential => 1,
            StateType::Universal => 2,
            StateType::Rejecting => return Err(format!("{path}: rejecting state")),
        };
        if t.children.len() != expected {
            return Err(format!(
                "{path}: {} state with {} children",
                m.types[c.state].letter(),
                t.children.len()
            ));
        }
        for (k, child) in t.children.iter().enumerate() {
            let via = child.via.ok_or_else(|| format!("{path}.{k}: missing transition"))?;
            let next = successor(m, c, via).map_err(|e| format!("{path}.{k}: {e}"))?;
            if next != child.config {
                return Err(format!("{path}.{k}: not the successor under transition {via}"));
            }
            stack.push((child, format!("{path}.{k}")));
        }
        if expected == 2 && t.children[0].via == t.children[1].via {
            return Err(format!("{path}: universal node uses one transition twice"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_STEP: &str = "states q0:E q1:A\nalphabet a\nstart q0\npoly 0 1\ntrans q0 a -> q1 a\n";

    fn machine(text: &str) -> Machine {
        pad_universal(&Machine::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn accept_everything() {
        let m = machine("states q0:A\nalphabet a\nstart q0\npoly 1 1\n");
        assert_eq!(validate_machine(&m), Ok(vec![]));
        for w in ["", "a", "aa"] {
            let w = m.input(w).unwrap();
            assert!(accepts(&m, &w).unwrap());
            let t = accepting_computation(&m, &w).unwrap().unwrap();
            assert_eq!(t.size(), 1);
        }
    }

    #[test]
    fn reject_machine() {
        let m = machine("states q0:R\nalphabet a\nstart q0\npoly 1 1\n");
        assert!(!accepts(&m, &m.input("a").unwrap()).unwrap());
        assert_eq!(accepting_computation(&m, &[]).unwrap(), None);
    }

    #[test]
    fn one_step_existential() {
        let m = machine(ONE_STEP);
        let a = m.input("a").unwrap();
        assert!(accepts(&m, &a).unwrap());
        let t = accepting_computation(&m, &a).unwrap().unwrap();
        assert_eq!(t.size(), 2);
        assert_eq!(validate_computation(&m, &a, &t), Ok(()));
        assert!(!accepts(&m, &m.input("_").unwrap()).unwrap());
    }

    #[test]
    fn universal_two_branches() {
        let m = machine(
            "states q0:U q1:A q2:A\nalphabet a\nstart q0\npoly 0 1\ntrans q0 a -> q1 a\ntrans q0 a -> q2 a\n",
        );
        let w = m.input("a").unwrap();
        let t = accepting_computation(&m, &w).unwrap().unwrap();
        assert_eq!(t.size(), 3);
        assert_eq!(t.children.len(), 2);
        assert_eq!(validate_computation(&m, &w, &t), Ok(()));

        let mut one_child = t.clone();
        one_child.children.pop();
        assert!(validate_computation(&m, &w, &one_child).is_err());

        let mut retyped = m.clone();
        retyped.types[1] = StateType::Existential;
        assert!(validate_computation(&retyped, &w, &t).is_err());
    }

    #[test]
    fn padding() {
        let raw = Machine::parse("states q0:U q1:A\nalphabet a\nstart q0\npoly 0 1\ntrans q0 a -> q1 a\n").unwrap();
        assert!(validate_machine(&raw).is_err());
        let padded = pad_universal(&raw).unwrap();
        assert_eq!(padded.transitions, vec![raw.transitions[0]; 2]);
        assert_eq!(validate_machine(&padded).unwrap().len(), 1);
        assert_eq!(pad_universal(&padded).unwrap(), padded);
        let three = Machine::parse(
            "states q0:U q1:A\nalphabet a\nstart q0\npoly 0 1\ntrans q0 a -> q1 a\ntrans q0 a -> q1 a\ntrans q0 a -> q0 a\n",
        )
        .unwrap();
        assert!(matches!(pad_universal(&three), Err(MachineError::UniversalFanOut { count: 3, .. })));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            Machine::parse("states q0:A\nalphabet a\nstart q0\npoly 1\ntrans q0 a -> q0 a\n"),
            Err(MachineError::TransitionFromHalting { .. })
        ));
        assert!(matches!(
            Machine::parse("states q0:E\nalphabet a\nstart q9\npoly 1\n"),
            Err(MachineError::UnknownState(_))
        ));
        assert!(matches!(
            Machine::parse("states q0:E\nalphabet a\nstart q0\npoly 1\ntrans q0 b -> q0 a\n"),
            Err(MachineError::UnknownSymbol('b'))
        ));
        assert!(matches!(
            Machine::parse("states q0:E\nalphabet a a\nstart q0\npoly 1\n"),
            Err(MachineError::Syntax { line: 2, .. })
        ));
        assert_eq!(Machine::parse("states q0:E\nalphabet a\npoly 1\n"), Err(MachineError::Missing("start")));
    }

    #[test]
    fn tape_sizes() {
        let mut m = machine(ONE_STEP);
        assert_eq!(tape_cells(&m, 3), Ok(3));
        assert!(tape_cells(&m, 0).is_err());
        m.poly = vec![2, 1];
        assert_eq!(tape_cells(&m, 3), Ok(5));
        let c = initial_config(&m, &m.input("a").unwrap()).unwrap();
        assert_eq!(m.render_tape(&c.tape), "a##");
    }

    #[test]
    fn successor_rotates() {
        let m = machine("states q0:E q1:E\nalphabet a b x\nstart q0\npoly 0 1\ntrans q0 a -> q1 x\ntrans q1 x -> q0 a\n");
        let c = Config { state: 0, tape: m.input("ab").unwrap() };
        let next = successor(&m, &c, 0).unwrap();
        assert_eq!((next.state, m.render_tape(&next.tape)), (1, "bx".to_string()));
        assert!(successor(&m, &next, 0).is_err());

        let single = Config { state: 0, tape: m.input("a").unwrap() };
        let one = successor(&m, &single, 0).unwrap();
        assert_eq!(m.render_tape(&one.tape), "x");
        assert_eq!(successor(&m, &one, 1).unwrap(), single);
    }

    #[test]
    fn text_round_trip() {
        let m = machine(ONE_STEP);
        assert_eq!(Machine::parse(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn least_height_choice() {
        // q0 can reach acceptance in one step via t1 or in two via t0.
        let m = machine(
            "states q0:E q1:E q2:A\nalphabet a\nstart q0\npoly 0 1\ntrans q0 a -> q1 a\ntrans q0 a -> q2 a\ntrans q1 a -> q2 a\n",
        );
        let w = m.input("a").unwrap();
        let t = accepting_computation(&m, &w).unwrap().unwrap();
        assert_eq!(t.children[0].via, Some(1));
        assert_eq!(acceptance_depth(&m, &w), Ok(Some(1)));
    }
}
