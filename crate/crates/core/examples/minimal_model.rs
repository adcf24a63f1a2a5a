//! Computes the fuzzy minimal model of a three-clause program and prints
//! every chain step.
//!
//! ```bash
//! cargo run -p qclp --example minimal_model
//! ```

use qclp::fixpoint::{minimal_model, model_check};
use qclp::program::Program;

const PROGRAM: &str = "\
p(X) <- 0.7 : X = phi.
p(X) <- 0.5 : X = phi.
p(X) <- 0.9 : X = psi.
";

fn main() {
    let prog = Program::parse(PROGRAM).expect("valid program");
    let (model, trace) = minimal_model(&prog).expect("function-free program");
    for (i, step) in trace.steps.iter().enumerate() {
        println!("step {i}:");
        for (atom, value) in step.iter() {
            println!("  {atom} = {value}");
        }
    }
    println!("stabilized at step {}", trace.stabilized_at);
    println!("model check: {}", model_check(&prog, &model));
    print!("{}", model.export());
}
