//! The store behind a shared channel. Each get or put opens its own
//! session with the store, so concurrent clients interleave one whole
//! operation at a time.

use crate::effcalc::{ConstName, OpName, Term, ValueType};
use crate::sesscalc::{Def, Endpoint, Process, SessionType, Value};

use super::names::ChannelNameSupply;
use super::terms::{as_value, EmbedError};

pub const SHARED_STORE_DEF: &str = "SharedStore";

/// What the store side of one session on `k` does.
pub fn shared_store_type(store_type: ValueType) -> SessionType {
    SessionType::branch([
        ("get", SessionType::send(store_type, SessionType::End)),
        ("put", SessionType::recv(store_type, SessionType::End)),
    ])
}

/// `def SharedStore(x: τ;) = accept k(c). c >> {get: c!<x>. SharedStore<x;>,
/// put: c?(y). SharedStore<y;>} in SharedStore<init;>`
pub fn shared_store_agent(init: Value, k: &str, store_type: ValueType) -> Process {
    let c = Endpoint::plain("c");
    let again = |v: &str| Process::call(SHARED_STORE_DEF, vec![Value::var(v)], vec![]);
    let body = Process::accept(
        k,
        "c",
        Process::branch(
            c.clone(),
            [
                ("get", Process::send(c.clone(), Value::var("x"), again("x"))),
                ("put", Process::recv(c.clone(), "y", again("y"))),
            ],
        ),
    );
    let def = Def {
        name: SHARED_STORE_DEF.into(),
        value_params: vec![("x".into(), Some(store_type))],
        chan_params: vec![],
        body,
    };
    Process::def(def, Process::call(SHARED_STORE_DEF, vec![init], vec![]))
}

/// `request k(c). ~c <+ get. ~c?(x). p`
pub fn shared_get(k: &str, c: &str, x: &str, p: Process) -> Process {
    let e = Endpoint::co(c);
    Process::request(k, c, Process::select(e.clone(), "get", Process::recv(e, x, p)))
}

/// `request k(c). ~c <+ put. ~c!<v>. p`
pub fn shared_put(k: &str, c: &str, v: Value, p: Process) -> Process {
    let e = Endpoint::co(c);
    Process::request(k, c, Process::select(e.clone(), "put", Process::send(e, v, p)))
}

/// Embeds `t` against the shared store on `k`. Sequencing comes from the
/// result channels alone, as in the pure embedding.
pub fn embed_shared(t: &Term, k: &str, r: &Endpoint, names: &mut ChannelNameSupply) -> Result<Process, EmbedError> {
    if let Some(v) = as_value(t) {
        return Ok(Process::send(r.clone(), v, Process::Nil));
    }
    let via = |names: &mut ChannelNameSupply, m: &Term, then: &dyn Fn(String) -> Process| {
        let q = names.fresh("q");
        let x = names.fresh("x");
        let left = embed_shared(m, k, &Endpoint::plain(&q), names)?;
        let right = Process::recv(Endpoint::co(&q), &x, then(x.clone()));
        Ok::<_, EmbedError>(Process::new_chan(q, Process::par(left, right)))
    };
    match t {
        Term::Let(x, m, n) => {
            let q = names.fresh("q");
            let left = embed_shared(m, k, &Endpoint::plain(&q), names)?;
            let right = Process::recv(Endpoint::co(&q), x, embed_shared(n, k, r, names)?);
            Ok(Process::new_chan(q, Process::par(left, right)))
        }
        Term::Const(ConstName::Get) => {
            let c = names.fresh("c");
            let x = names.fresh("x");
            Ok(shared_get(k, &c, &x, Process::send(r.clone(), Value::var(&x), Process::Nil)))
        }
        Term::Op(OpName::Suc, m) => via(names, m, &|x| Process::send(r.clone(), Value::suc(Value::var(x)), Process::Nil)),
        Term::Op(OpName::Put, m) => {
            let c = names.fresh("c");
            via(names, m, &|x| shared_put(k, &c, Value::var(x), Process::send(r.clone(), Value::Unit, Process::Nil)))
        }
        Term::Var(_) | Term::Const(_) => unreachable!("handled by as_value"),
    }
}

/// The store on `k` running beside every client term; once all of them
/// have finished, `unit` is sent on `r`.
pub fn shared_race(
    k: &str,
    init: Value,
    store_type: ValueType,
    clients: &[Term],
    r: &Endpoint,
) -> Result<Process, EmbedError> {
    let mut names = ChannelNameSupply::new(clients.iter().flat_map(|t| t.identifiers()));
    names.reserve(k);
    names.reserve(&r.name);
    let mut results = Vec::new();
    let mut parts = vec![shared_store_agent(init, k, store_type)];
    for t in clients {
        let q = names.fresh("q");
        parts.push(embed_shared(t, k, &Endpoint::plain(&q), &mut names)?);
        results.push(q);
    }
    let mut join = Process::send(r.clone(), Value::Unit, Process::Nil);
    for q in results.iter().rev() {
        let x = names.fresh("x");
        join = Process::recv(Endpoint::co(q), x, join);
    }
    parts.push(join);
    Ok(Process::new_chans(results, Process::par_all(parts)))
}
