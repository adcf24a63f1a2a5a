//! Best answer under alpha-beta and exhaustive search, with node counts and
//! the proof tree.
//!
//! ```bash
//! cargo run -p qclp --example best_proof
//! ```

use qclp::program::{parse_goal, Program};
use qclp::solver::{best_proof, enumerate_answers, SearchOptions, Strategy};

const PROGRAM: &str = "\
p(X) <- 0.7 : X = phi.
p(X) <- 0.5 : X = phi.
p(X) <- 0.9 : X = psi.
";

fn main() {
    let prog = Program::parse(PROGRAM).expect("valid program");
    let (prog, goal) = parse_goal("p(X) & X = phi", &prog).expect("valid query");

    let all = enumerate_answers(&goal, &prog, &SearchOptions::default().with_strategy(Strategy::Exhaustive));
    println!("all answers:");
    for a in &all.answers {
        println!("  {a}");
    }

    for strategy in [Strategy::Exhaustive, Strategy::AlphaBeta] {
        let (answer, stats) = best_proof(&goal, &prog, &SearchOptions::default().with_strategy(strategy));
        let answer = answer.expect("the query has a proof");
        println!("{strategy:?}: {answer} ({stats})");
        print!("{}", answer.proof.to_text());
    }
}
