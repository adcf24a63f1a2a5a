//! Runs the three-way check (oracle, alpha-beta, exhaustive) on every
//! ground goal of a small recursive program.
//!
//! ```bash
//! cargo run -p qclp --example check_program
//! ```

use qclp::check::check_program;
use qclp::program::Program;
use qclp::solver::SearchOptions;

const PROGRAM: &str = "\
e(a,b) <- 0.8.
e(b,c) <- 0.6.
e(c,a) <- 0.9.
t(X,Y) <- e(X,Y).
t(X,Z) <- 0.9 : e(X,Y) & t(Y,Z).
";

fn main() {
    let prog = Program::parse(PROGRAM).expect("valid program");
    let report = check_program(&prog, &SearchOptions::default()).expect("function-free program");
    for g in &report.goals {
        println!(
            "{} {}: oracle {} alphabeta {} exhaustive {} nodes {}/{}",
            if g.passed() { "pass" } else { "FAIL" },
            g.atom,
            g.oracle,
            g.alphabeta,
            g.exhaustive,
            g.alphabeta_nodes,
            g.exhaustive_nodes
        );
    }
    println!("{} goals, depth bound {}", report.goals.len(), report.depth_bound);
}
