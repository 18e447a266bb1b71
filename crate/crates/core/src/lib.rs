//! Compiles a small effect calculus with state into a session-typed
//! π-calculus, checks both sides, runs processes, and compares them up to
//! weak bisimulation.

pub mod corpus;
pub mod effcalc;
pub mod embedding;
pub mod equivalence;
pub mod semantics;
pub mod sesscalc;
pub mod syntax;

pub use effcalc::{infer, parse_program, parse_term, EffectAnnotation, EffectToken, Program, Term, TypeEnv, ValueType};
pub use sesscalc::{parse_process, session_check, Endpoint, Process, SessionEnv, SessionType, Value};
pub use syntax::SyntaxError;
pub use embedding::{effect_to_session, embed_top, session_to_effect, EmbeddingResult};
pub use equivalence::{build_lts, weak_bisimilar, Lts, LtsOptions, Verdict};
