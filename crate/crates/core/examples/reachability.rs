//! Weighted reachability under both combination modes.
//!
//! ```bash
//! cargo run -p qclp --example reachability
//! ```

use qclp::fixpoint::minimal_model;
use qclp::program::{parse_goal, Program};
use qclp::solver::{enumerate_answers_deepening, SearchOptions};
use qclp::value::CombinationMode;

const PROGRAM: &str = include_str!("../data/reachability.qclp");

fn main() {
    let base = Program::parse(PROGRAM).expect("valid program");
    for mode in [CombinationMode::Min, CombinationMode::Product] {
        let prog = base.clone().with_mode(mode);
        println!("{mode:?} mode");
        let (model, _) = minimal_model(&prog).expect("function-free program");
        for (atom, value) in model.iter().filter(|(a, _)| &*a.relation == "path") {
            println!("  {atom} = {value}");
        }
        let (prog, goal) = parse_goal("path(a,Z)", &prog).expect("valid query");
        let found = enumerate_answers_deepening(&goal, &prog, &SearchOptions::default().with_mode(mode).with_depth(8));
        for a in &found.answers {
            println!("  path(a,Z): {a}");
        }
    }
}
