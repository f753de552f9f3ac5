//! Small grammars used throughout the tests and documentation.

use crate::grammar::Grammar;

pub const FIGURE1: &str = include_str!("../fixtures/fig1.ccg");
pub const FIGURE3: &str = include_str!("../fixtures/fig3.ccg");
pub const FIGURE3_RESTRICTED: &str = include_str!("../fixtures/fig3_restricted.ccg");
pub const EXAMPLE33: &str = include_str!("../fixtures/ex33.ccg");
pub const ANBN: &str = include_str!("../fixtures/anbn.ccg");
pub const COMPOSITION: &str = include_str!("../fixtures/composition.ccg");
pub const CROSSED: &str = include_str!("../fixtures/crossed.ccg");
pub const RUNNING_EXAMPLE_CNF: &str = include_str!("../fixtures/running_example.cnf");

fn load(text: &str) -> Grammar {
    Grammar::parse(text).expect("bundled fixture parses")
}

/// "We prove two theorems" with forward and backward application.
pub fn figure1() -> Grammar {
    load(FIGURE1)
}

/// Application plus unrestricted backward crossed composition.
pub fn figure3() -> Grammar {
    load(FIGURE3)
}

/// As [`figure3`] with crossed composition limited to `Y = S\NP`, target `S`.
pub fn figure3_restricted() -> Grammar {
    load(FIGURE3_RESTRICTED)
}

/// The a^n b^n / (ab)^n grammar with four empty-string entries.
pub fn example33() -> Grammar {
    load(EXAMPLE33)
}

/// Grammars without empty-string entries, keyed by fixture name.
pub fn epsilon_free() -> Vec<(&'static str, Grammar)> {
    vec![
        ("fig1", figure1()),
        ("fig3", figure3()),
        ("fig3_restricted", figure3_restricted()),
        ("anbn", load(ANBN)),
        ("composition", load(COMPOSITION)),
        ("crossed", load(CROSSED)),
    ]
}
