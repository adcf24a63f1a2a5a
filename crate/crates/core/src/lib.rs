pub mod check;
pub mod cli;
pub mod constraint;
pub mod fixpoint;
pub mod grammar;
pub mod program;
pub mod solver;
pub mod syntax;
pub mod term;
pub mod value;
