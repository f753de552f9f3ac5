#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vwccg::atm::{pad_universal, tape_cells, Machine, Symbol};
use vwccg::sat::{CnfFormula, Literal};

/// Every clause over `n` variables with 1..=`width` distinct literals, in a
/// fixed order.
pub fn clauses(n: usize, width: usize) -> Vec<Vec<Literal>> {
    let literals: Vec<Literal> = (1..=n).flat_map(|v| [Literal::pos(v), Literal::neg(v)]).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn go(lits: &[Literal], start: usize, width: usize, chosen: &mut Vec<Literal>, out: &mut Vec<Vec<Literal>>) {
        if !chosen.is_empty() {
            out.push(chosen.clone());
        }
        if chosen.len() == width {
            return;
        }
        for i in start..lits.len() {
            chosen.push(lits[i]);
            go(lits, i + 1, width, chosen, out);
            chosen.pop();
        }
    }
    go(&literals, 0, width, &mut chosen, &mut out);
    out
}

/// All formulas with exactly `n` variables and up to `max_clauses` pairwise
/// distinct clauses, clause order mattering.
pub fn formulas(n: usize, max_clauses: usize, width: usize) -> Vec<CnfFormula> {
    let pool = clauses(n, width);
    let mut out = Vec::new();
    let mut seq: Vec<usize> = Vec::new();
    fn go(pool: &[Vec<Literal>], n: usize, max: usize, seq: &mut Vec<usize>, out: &mut Vec<CnfFormula>) {
        out.push(CnfFormula::new(n, seq.iter().map(|&i| pool[i].clone()).collect()));
        if seq.len() == max {
            return;
        }
        for i in 0..pool.len() {
            if !seq.contains(&i) {
                seq.push(i);
                go(pool, n, max, seq, out);
                seq.pop();
            }
        }
    }
    go(&pool, n, max_clauses, &mut seq, &mut out);
    out
}

const TYPES: [char; 4] = ['E', 'U', 'A', 'R'];

/// Machine text with random transitions: existential pairs get 0 to 2
/// transitions, universal pairs 1 or 2 (a single one is padded later).
fn random_machine(typing: &[char], alphabet: &[char], poly: &[u64], rng: &mut ChaCha8Rng) -> String {
    let states: Vec<String> = (0..typing.len()).map(|i| format!("q{i}")).collect();
    let mut text = String::from("states");
    for (q, t) in states.iter().zip(typing) {
        text.push_str(&format!(" {q}:{t}"));
    }
    text.push_str("\nalphabet");
    for a in alphabet {
        text.push_str(&format!(" {a}"));
    }
    text.push_str("\nstart q0\npoly");
    for c in poly {
        text.push_str(&format!(" {c}"));
    }
    text.push('\n');
    let symbols: Vec<char> = std::iter::once('_').chain(alphabet.iter().copied()).collect();
    for (q, &t) in states.iter().zip(typing) {
        let range = match t {
            'E' => 0..=2,
            'U' => 1..=2,
            _ => continue,
        };
        for &a in &symbols {
            for _ in 0..rng.gen_range(range.clone()) {
                let to = &states[rng.gen_range(0..states.len())];
                let write = symbols[rng.gen_range(0..symbols.len())];
                text.push_str(&format!("trans {q} {a} -> {to} {write}\n"));
            }
        }
    }
    text
}

/// Machines with up to three states under every typing, alphabets `{a}` and
/// `{a, b}`, tape length `n` or `n + 1`, and `variants` random transition
/// tables each. Universal fan-out is padded to two.
pub fn machine_pool(variants: usize, seed: u64) -> Vec<Machine> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::new();
    for size in 1..=3usize {
        for code in 0..4usize.pow(size as u32) {
            let typing: Vec<char> = (0..size).map(|i| TYPES[code / 4usize.pow(i as u32) % 4]).collect();
            for alphabet in [&['a'][..], &['a', 'b'][..]] {
                for poly in [&[0u64, 1][..], &[1, 1][..]] {
                    for _ in 0..variants {
                        let text = random_machine(&typing, alphabet, poly, &mut rng);
                        let m = Machine::parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
                        pool.push(pad_universal(&m).unwrap());
                    }
                }
            }
        }
    }
    pool
}

/// Inputs of length at most 2 over the machine alphabet whose tape has at
/// most `max_cells` cells.
pub fn machine_inputs(m: &Machine, max_cells: usize) -> Vec<Vec<Symbol>> {
    let letters: Vec<Symbol> = (1..m.num_symbols() as Symbol).collect();
    let mut out = Vec::new();
    for len in 0..=2usize {
        match tape_cells(m, len) {
            Ok(cells) if cells <= max_cells => {}
            _ => continue,
        }
        for w in words(&letters, len) {
            out.push(w);
        }
    }
    out
}

/// All sequences of exactly `len` items over `alphabet`.
pub fn words<T: Clone>(alphabet: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut v = w.clone();
                    v.push(a.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// All sequences of length `1..=max_len` over `alphabet`.
pub fn words_up_to<T: Clone>(alphabet: &[T], max_len: usize) -> Vec<Vec<T>> {
    (1..=max_len).flat_map(|n| words(alphabet, n)).collect()
}

pub fn vocabulary(g: &vwccg::Grammar) -> Vec<String> {
    g.vocabulary().iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}
