use crate::effcalc::ValueType;
use crate::sesscalc::{store_protocol, Def, Endpoint, Process, Value};

pub const STORE_DEF: &str = "Store";

/// The store agent holding `init`, serving on `c`:
///
/// ```text
/// def Store(x: τ; c: mu a. &{get: ![τ]. a, put: ?[τ]. a, stop: end}) =
///   c >> {get: c!<x>. Store<x; c>, put: c?(y). Store<y; c>, stop: 0}
/// in Store<init; c>
/// ```
pub fn store_agent(init: Value, c: &Endpoint, store_type: ValueType) -> Process {
    let ch = Endpoint::plain("c");
    let again = |v: &str| Process::call(STORE_DEF, vec![Value::var(v)], vec![ch.clone()]);
    let body = Process::branch(
        ch.clone(),
        [
            ("get", Process::send(ch.clone(), Value::var("x"), again("x"))),
            ("put", Process::recv(ch.clone(), "y", again("y"))),
            ("stop", Process::Nil),
        ],
    );
    let def = Def {
        name: STORE_DEF.into(),
        value_params: vec![("x".into(), Some(store_type))],
        chan_params: vec![("c".into(), Some(store_protocol(store_type)))],
        body,
    };
    Process::def(def, Process::call(STORE_DEF, vec![init], vec![c.clone()]))
}
