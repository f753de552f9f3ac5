//! Compiling an alternating machine and its input into a grammar whose
//! lexicon only has empty-string entries, such that the grammar generates
//! the empty string iff the machine accepts.
//!
//! A configuration `(q, a1..am)` is encoded as `q_q/s_a1/../s_am`, the
//! symbol under the head being the innermost argument. Derivations are
//! built from fragments, one per node of an accepting computation, with the
//! initial configuration nearest the root and accepting configurations at
//! the bottom. Every fragment works on reserved target atoms so fragments
//! cannot be mixed.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde_json::{json, Value};
use thiserror::Error;

use crate::atm::{
    initial_config, tape_cells, validate_machine, ComputationTree, Config, Machine, MachineError, StateType,
    Symbol,
};
use crate::category::{Argument, Atom, Category};
use crate::derivation::Derivation;
use crate::grammar::{Grammar, LexEntry, Rule};
use crate::parser::{parse_chart, Back, Chart, ParseConfig, ParseError, ParseResult};

/// Atoms standing for machine objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomRegistry {
    /// Indexed by state.
    pub states: Vec<Atom>,
    /// Indexed by symbol; index 0 is the blank.
    pub symbols: Vec<Atom>,
    /// Indexed by transition.
    pub transitions: Vec<Atom>,
    /// Transition pairs out of universal `(q, a)`, first in file order.
    pub pairs: Vec<(usize, usize)>,
    pub init: Atom,
    pub accept: Atom,
    pub cent: Atom,
}

impl AtomRegistry {
    fn new(m: &Machine) -> AtomRegistry {
        let atom = |name: String| Atom::new(&name).expect("generated atom names are valid");
        AtomRegistry {
            states: m.states.iter().map(|q| atom(format!("q_{q}"))).collect(),
            symbols: (0..m.num_symbols())
                .map(|s| atom(format!("s_{}", m.symbol_token(s as Symbol))))
                .collect(),
            transitions: (0..m.transitions.len()).map(|k| atom(format!("t_{k}"))).collect(),
            pairs: Vec::new(),
            init: atom("init".into()),
            accept: atom("accept".into()),
            cent: atom("cent".into()),
        }
    }

    pub fn pair_minus(&self, k: usize) -> Atom {
        Atom::new(&format!("pi{k}m")).unwrap()
    }

    pub fn pair_plus(&self, k: usize) -> Atom {
        Atom::new(&format!("pi{k}p")).unwrap()
    }

    /// Equality-test atom for position `i` (1-based).
    pub fn pair_eq(&self, k: usize, i: usize) -> Atom {
        Atom::new(&format!("pi{k}eq{i}")).unwrap()
    }

    pub fn state_of(&self, atom: Atom) -> Option<usize> {
        self.states.iter().position(|&a| a == atom)
    }

    pub fn symbol_of(&self, atom: Atom) -> Option<Symbol> {
        self.symbols.iter().position(|&a| a == atom).map(|s| s as Symbol)
    }

    pub fn transition_of(&self, atom: Atom) -> Option<usize> {
        self.transitions.iter().position(|&a| a == atom)
    }
}

#[derive(Clone, Debug)]
pub struct AtmInstance {
    pub grammar: Grammar,
    /// Number of tape cells.
    pub m: usize,
    pub arity_bound: usize,
    pub registry: AtomRegistry,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("universal state `{state}` needs exactly two transitions on `{symbol}`, found {count}")]
    FanOut { state: String, symbol: char, count: usize },
    #[error("no configuration-shaped node below the root")]
    NoConfiguration,
    #[error("derivation does not encode an accepting computation: {0}")]
    Invalid(String),
}

fn atomic(a: Atom) -> Category {
    Category::atomic(a)
}

fn slashed(target: Atom, args: &[Atom]) -> Category {
    Category::new(target, args.iter().map(|&a| Argument::forward(atomic(a))).collect())
}

/// Construction variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Restrict every otherwise free secondary argument position to the tape
    /// symbols. Without it, for two tape cells the lexical entry
    /// `t/s_a/q` fits the degree-2 rules expecting a configuration-shaped
    /// `t` category, and the grammar can accept when the machine does not.
    pub guard_tape_args: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions { guard_tape_args: true }
    }
}

/// Builds the grammar for machine `mach` on input `w`.
pub fn build_atm_instance(mach: &Machine, w: &[Symbol]) -> Result<AtmInstance, ReductionError> {
    build_atm_instance_with(mach, w, ReductionOptions::default())
}

pub fn build_atm_instance_with(
    mach: &Machine,
    w: &[Symbol],
    options: ReductionOptions,
) -> Result<AtmInstance, ReductionError> {
    validate_machine(mach)?;
    let m = tape_cells(mach, w.len())?;
    let init_config = initial_config(mach, w)?;
    let mut reg = AtomRegistry::new(mach);
    let sigma: Vec<Symbol> = (0..mach.num_symbols() as Symbol).collect();
    for q in 0..mach.states.len() {
        if mach.types[q] != StateType::Universal {
            continue;
        }
        for &a in &sigma {
            let on = mach.transitions_on(q, a);
            if on.len() != 2 {
                return Err(ReductionError::FanOut {
                    state: mach.states[q].clone(),
                    symbol: mach.symbol_char(a),
                    count: on.len(),
                });
            }
            reg.pairs.push((on[0], on[1]));
        }
    }
    let sym = |a: Symbol| reg.symbols[a as usize];
    let sym_cat = |a: Symbol| atomic(sym(a));
    let cent = reg.cent;
    let mut lexicon = Vec::new();
    let mut rules = Vec::new();
    let eps = |c: Category| LexEntry::epsilon(c);

    // Initial configuration.
    lexicon.push(eps(slashed(reg.init, &[reg.states[mach.start]])));
    for &a in &sigma {
        lexicon.push(eps(sym_cat(a)));
    }
    for &a in &sigma {
        rules.push(Rule::forward_composition(0).with_target([reg.init]).with_y([sym_cat(a)]));
    }
    let mut init_rule = Rule::forward_composition(m)
        .with_target([reg.init])
        .with_y([atomic(reg.states[mach.start])]);
    for (i, &a) in init_config.tape.iter().enumerate() {
        init_rule = init_rule.with_z(i + 1, [sym_cat(a)]);
    }
    rules.push(init_rule);

    // Accepting configurations.
    let accepting: Vec<usize> = (0..mach.states.len())
        .filter(|&q| mach.types[q] == StateType::Accepting)
        .collect();
    if !accepting.is_empty() {
        for &q in &accepting {
            lexicon.push(eps(slashed(reg.states[q], &[reg.accept])));
        }
        lexicon.push(eps(slashed(reg.accept, &[cent])));
        for &a in &sigma {
            lexicon.push(eps(slashed(cent, &[sym(a), cent])));
        }
        lexicon.push(eps(atomic(cent)));
        rules.push(
            Rule::forward_composition(m)
                .with_target(accepting.iter().map(|&q| reg.states[q]))
                .with_y([atomic(reg.accept)]),
        );
        rules.push(Rule::forward_composition(0).with_target([reg.accept]).with_y([atomic(cent)]));
        for &a in &sigma {
            rules.push(
                Rule::forward_composition(2)
                    .with_target([reg.accept])
                    .with_y([atomic(cent)])
                    .with_z(1, [sym_cat(a)])
                    .with_z(2, [atomic(cent)]),
            );
        }
    }

    // Transitions out of existential states, and the shared tail that turns
    // a transition target into the successor encoding.
    let transition_tail = |k: usize, lexicon: &mut Vec<LexEntry>, rules: &mut Vec<Rule>| {
        let t = mach.transitions[k];
        let tk = reg.transitions[k];
        lexicon.push(eps(slashed(tk, &[sym(t.read), reg.states[t.to]])));
        rules.push(Rule::forward_composition(0).with_target([tk]).with_y([sym_cat(t.write)]));
        rules.push(
            Rule::forward_composition(m)
                .with_target([tk])
                .with_y([atomic(reg.states[t.to])]),
        );
    };
    for (k, t) in mach.transitions.iter().enumerate() {
        if mach.types[t.from] != StateType::Existential {
            continue;
        }
        let tk = reg.transitions[k];
        lexicon.push(eps(slashed(reg.states[t.from], &[tk])));
        rules.push(
            Rule::forward_composition(m)
                .with_target([reg.states[t.from]])
                .with_y([atomic(tk)]),
        );
        transition_tail(k, &mut lexicon, &mut rules);
    }

    // Transition pairs out of universal states.
    for (p, &(t1, t2)) in reg.pairs.iter().enumerate() {
        let q = reg.states[mach.transitions[t1].from];
        let minus = reg.pair_minus(p);
        let plus = reg.pair_plus(p);
        let eq = |i: usize| reg.pair_eq(p, i);
        let (a1, a2) = (reg.transitions[t1], reg.transitions[t2]);

        // Copy the tape stack and check both halves agree.
        lexicon.push(eps(slashed(q, &[minus])));
        lexicon.push(eps(slashed(minus, &[eq(1)])));
        for i in 1..m {
            lexicon.push(eps(slashed(eq(i), &[eq(i + 1)])));
        }
        lexicon.push(eps(slashed(eq(m), &[plus])));
        rules.push(Rule::forward_composition(m).with_target([q]).with_y([atomic(minus)]));
        for &b in &sigma {
            rules.push(Rule::forward_composition(0).with_target([minus]).with_y([sym_cat(b)]));
        }
        rules.push(Rule::forward_composition(2 * m).with_target([minus]).with_y([atomic(eq(1))]));
        for i in 1..=m {
            let next = if i < m { eq(i + 1) } else { plus };
            for &b in &sigma {
                rules.push(
                    Rule::forward_composition(2 * m)
                        .with_target([eq(i)])
                        .with_y([atomic(next)])
                        .with_z(i, [sym_cat(b)])
                        .with_z(m + i, [sym_cat(b)]),
                );
            }
        }

        // Split the copies between the two transitions.
        lexicon.push(eps(slashed(plus, &[a1])));
        for &b in &sigma {
            lexicon.push(eps(slashed(sym(b), &[sym(b), a2])));
        }
        rules.push(Rule::forward_composition(m).with_target([plus]).with_y([atomic(a2)]));
        for &b in &sigma {
            rules.push(
                Rule::forward_composition(2)
                    .with_target([plus])
                    .with_y([sym_cat(b)])
                    .with_z(1, [sym_cat(b)])
                    .with_z(2, [atomic(a2)]),
            );
        }
        rules.push(Rule::forward_composition(m).with_target([plus]).with_y([atomic(a1)]));
        transition_tail(t1, &mut lexicon, &mut rules);
        transition_tail(t2, &mut lexicon, &mut rules);
    }

    let mut unique_lexicon: Vec<LexEntry> = Vec::new();
    for entry in lexicon {
        if !unique_lexicon.contains(&entry) {
            unique_lexicon.push(entry);
        }
    }
    let mut unique_rules: Vec<Rule> = Vec::new();
    for mut rule in rules {
        if options.guard_tape_args {
            for z in rule.z.iter_mut().filter(|z| z.is_none()) {
                *z = Some(sigma.iter().map(|&a| sym_cat(a)).collect());
            }
        }
        if !unique_rules.contains(&rule) {
            unique_rules.push(rule);
        }
    }
    let grammar = Grammar::new(reg.init, unique_lexicon, unique_rules).expect("generated grammar is valid");
    Ok(AtmInstance {
        grammar,
        m,
        arity_bound: 2 * m + 2,
        registry: reg,
    })
}

impl AtmInstance {
    /// Registry and sizes as a JSON document to accompany the grammar file.
    pub fn sidecar(&self, mach: &Machine) -> Value {
        let reg = &self.registry;
        let states: BTreeMap<String, String> = mach
            .states
            .iter()
            .zip(&reg.states)
            .map(|(q, a)| (q.clone(), a.to_string()))
            .collect();
        let symbols: BTreeMap<String, String> = (0..mach.num_symbols())
            .map(|s| (mach.symbol_char(s as Symbol).to_string(), reg.symbols[s].to_string()))
            .collect();
        let pairs: Vec<Value> = reg
            .pairs
            .iter()
            .enumerate()
            .map(|(p, &(t1, t2))| {
                json!({
                    "index": p,
                    "t1": t1,
                    "t2": t2,
                    "minus": reg.pair_minus(p).to_string(),
                    "plus": reg.pair_plus(p).to_string(),
                    "eq": (1..=self.m).map(|i| reg.pair_eq(p, i).to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "m": self.m,
            "arity_bound": self.arity_bound,
            "start": reg.init.to_string(),
            "accept": reg.accept.to_string(),
            "cent": reg.cent.to_string(),
            "states": states,
            "symbols": symbols,
            "transitions": reg.transitions.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "pairs": pairs,
        })
    }

    /// Parses the empty string under the construction's arity bound. The
    /// derivation returned encodes a computation that is as shallow as
    /// possible below every configuration.
    pub fn run_empty(&self) -> Result<ParseResult, ParseError> {
        self.run_empty_budgeted(None)
    }

    pub fn run_empty_budgeted(&self, max_items: Option<usize>) -> Result<ParseResult, ParseError> {
        let cfg = ParseConfig {
            arity_cap: Some(self.arity_bound),
            max_items,
            keep_alternatives: true,
        };
        let chart = parse_chart(&self.grammar, &[], &cfg)?;
        Ok(ParseResult {
            accepted: chart.accepted(),
            items_created: chart.len(),
            derivation: self.shallowest_derivation(&chart),
            cap_hit: chart.cap_hit(),
            arity_cap: chart.arity_cap(),
        })
    }

    /// Best-first search over all backpointers. The cost of a derivation is
    /// the height of the configuration tree it encodes, a max-plus function,
    /// so an item's cost is final when it is popped and the chosen
    /// backpointers only point to items popped earlier.
    fn shallowest_derivation(&self, chart: &Chart) -> Option<Derivation> {
        let goal = chart.goal()?;
        let n = chart.len();
        let is_config: Vec<bool> = (0..n).map(|i| self.config_of(&chart.item(i).category).is_some()).collect();
        let mut edges: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        for head in 0..n {
            for (k, back) in chart.backpointers(head).iter().enumerate() {
                let children = match *back {
                    Back::Lexical(_) => Vec::new(),
                    Back::Combined { left, right, .. } if left == right => vec![left],
                    Back::Combined { left, right, .. } => vec![left, right],
                };
                edges.push((head, k, children));
            }
        }
        let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut waiting: Vec<usize> = Vec::with_capacity(edges.len());
        let mut heap = BinaryHeap::new();
        // 0 for no configuration below, h + 1 for a configuration tree of height h.
        let cost = |e: usize, value: &[u32]| {
            let (head, _, children) = &edges[e];
            let below = children.iter().map(|&c| value[c]).max().unwrap_or(0);
            below + u32::from(is_config[*head])
        };
        let mut value = vec![0u32; n];
        for (e, (_, _, children)) in edges.iter().enumerate() {
            for &c in children {
                uses[c].push(e);
            }
            waiting.push(children.len());
            if children.is_empty() {
                heap.push(Reverse((cost(e, &value), e)));
            }
        }
        let mut chosen: Vec<Option<usize>> = vec![None; n];
        while let Some(Reverse((c, e))) = heap.pop() {
            let (head, k, _) = edges[e];
            if chosen[head].is_some() {
                continue;
            }
            chosen[head] = Some(k);
            value[head] = c;
            for &user in &uses[head] {
                waiting[user] -= 1;
                if waiting[user] == 0 {
                    heap.push(Reverse((cost(user, &value), user)));
                }
            }
        }
        let pick = |i: usize| chart.backpointers(i)[chosen[i].expect("every chart item is derivable")];
        Some(chart.derivation_by(goal, &pick))
    }

    /// The configuration encoded by `c`, if `c` has that shape.
    pub fn config_of(&self, c: &Category) -> Option<Config> {
        let state = self.registry.state_of(c.target())?;
        if c.arity() != self.m {
            return None;
        }
        let tape = c
            .args()
            .iter()
            .map(|arg| {
                if arg.slash != crate::category::Slash::Forward || !arg.category.is_atomic() {
                    return None;
                }
                self.registry.symbol_of(arg.category.target())
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Config { state, tape })
    }

    pub fn encode(&self, c: &Config) -> Category {
        let args: Vec<Atom> = c.tape.iter().map(|&s| self.registry.symbols[s as usize]).collect();
        slashed(self.registry.states[c.state], &args)
    }
}

/// Whether the grammar generates the empty string.
pub fn recognize_empty(inst: &AtmInstance) -> Result<bool, ParseError> {
    Ok(inst.run_empty()?.accepted)
}

/// Reads the accepting computation off a derivation of `init`: every node
/// whose category encodes a configuration starts a fragment, and the
/// transition leading to it is the last transition atom seen as a target on
/// the way down from the enclosing fragment.
pub fn decode_computation(inst: &AtmInstance, t: &Derivation) -> Result<ComputationTree, ReductionError> {
    let mut roots = Vec::new();
    collect(inst, t, None, &mut roots);
    match roots.len() {
        0 => Err(ReductionError::NoConfiguration),
        1 => {
            let mut root = roots.pop().unwrap();
            root.via = None;
            Ok(root)
        }
        n => Err(ReductionError::Invalid(format!("{n} configurations directly below the root"))),
    }
}

/// Configuration trees for the nearest configuration-shaped descendants.
fn collect(inst: &AtmInstance, t: &Derivation, via: Option<usize>, out: &mut Vec<ComputationTree>) {
    let mut stack: Vec<(&Derivation, Option<usize>)> = vec![(t, via)];
    while let Some((node, via)) = stack.pop() {
        let category = node.top();
        if let Some(config) = inst.config_of(category) {
            let mut children = Vec::new();
            if let Derivation::Node { left, right, .. } = node {
                collect(inst, left, None, &mut children);
                collect(inst, right, None, &mut children);
            }
            out.push(ComputationTree { config, via, children });
            continue;
        }
        let via = inst.registry.transition_of(category.target()).or(via);
        if let Derivation::Node { left, right, .. } = node {
            stack.push((right.as_ref(), via));
            stack.push((left.as_ref(), via));
        }
    }
}

/// Decodes and validates in one step.
pub fn decode_and_validate(
    inst: &AtmInstance,
    mach: &Machine,
    w: &[Symbol],
    t: &Derivation,
) -> Result<ComputationTree, ReductionError> {
    let tree = decode_computation(inst, t)?;
    crate::atm::validate_computation(mach, w, &tree).map_err(ReductionError::Invalid)?;
    Ok(tree)
}
