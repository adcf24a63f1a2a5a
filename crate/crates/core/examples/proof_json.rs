//! Expands the min/max tree for a query and round-trips it through JSON.
//!
//! ```bash
//! cargo run -p qclp --example proof_json
//! ```

use qclp::program::{parse_goal, Program};
use qclp::solver::{expand_minmax, ProofNode, SearchOptions};

fn main() {
    let prog = Program::parse("p(X) <- 0.7 : X = phi.\np(X) <- 0.5 : X = phi.\np(X) <- 0.9 : X = psi.\n").expect("valid program");
    let (prog, goal) = parse_goal("p(X) & X = phi", &prog).expect("valid query");
    let tree = expand_minmax(&goal, &prog, &SearchOptions::default().with_depth(2));
    print!("{}", tree.to_text());
    let json = tree.to_json();
    println!("{json}");
    let back = ProofNode::from_json(&json).expect("round trip");
    assert_eq!(back, tree);
}
