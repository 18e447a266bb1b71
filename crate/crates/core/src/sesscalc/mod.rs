//! The target language: a π-calculus with binary sessions, recursion and
//! shared channels, with its session types and type checker.

pub mod check;
pub mod parse;
pub mod process;
pub mod types;

pub use check::{session_check, session_check_traced, CheckError, CheckTrace, DefSignature, ParSplit, ProcEnv, SessionEnv};
pub use parse::{parse_process, parse_process_file, parse_session_type, ProcessFile};
pub use process::{Def, Endpoint, Process, Value};
pub use types::{select_subtype, store_protocol, type_equal, MalformedType, Payload, SessionType};
