//! Ranks the two readings of an ambiguous sentence under two weightings of
//! the same grammar.
//!
//! ```bash
//! cargo run -p qclp --example grammar_ambiguity
//! ```

use qclp::grammar::{parse_sentence, tokenize_sentence, Grammar};
use qclp::solver::SearchOptions;

const GRAMMARS: [(&str, &str); 2] = [
    ("clause reading favoured", include_str!("../data/ambiguity.wclg")),
    ("compound reading favoured", include_str!("../data/ambiguity_flipped.wclg")),
];

fn main() {
    let tokens = tokenize_sentence("john believes peter saw mary");
    for (name, text) in GRAMMARS {
        let grammar = Grammar::parse(text).expect("valid grammar");
        println!("{name}:");
        for analysis in parse_sentence(&grammar, &tokens, &SearchOptions::default()) {
            println!("  {} {}", analysis.value, analysis.tree.shape());
        }
    }
}
