//! The source language: a first-order calculus with state effects tracked by
//! an ordered list of get/put tokens.

pub mod effect;
pub mod equations;
pub mod eval;
pub mod infer;
pub mod parse;
pub mod program;
pub mod term;

pub use effect::{EffectAlgebra, EffectAnnotation, EffectToken, StateEffects};
pub use equations::{apply_equation, Equation, RewriteError};
pub use infer::{infer, TypeEnv, TypeError};
pub use parse::{parse_program, parse_term};
pub use program::{Program, StoreValue};
pub use term::{ConstName, OpName, Term, ValueType};
