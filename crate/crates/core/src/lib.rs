//! Vijay-Shanker/Weir combinatory categorial grammar: categories, grammars
//! with rule restrictions and empty-string entries, a chart parser, a
//! derivation checker, and compilers from CNF-SAT and from alternating
//! Turing machines into grammar recognition.

pub mod atm;
pub mod atm_reduction;
pub mod category;
pub mod cli;
pub mod derivation;
pub mod fixtures;
pub mod grammar;
pub mod parser;
pub mod sat;

pub use category::{cat, Argument, Atom, Category, CategoryError, Slash};
pub use derivation::{check_derivation, enumerate_derivations, Derivation, Violation};
pub use grammar::{Grammar, GrammarError, GrammarStats, LexEntry, Rule, Schema};
pub use parser::{default_arity_cap, parse, recognize, saturate_empty, ParseConfig, ParseError, ParseResult};
