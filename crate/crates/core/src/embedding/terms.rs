//! Term embeddings: pure terms send their result on `r`; effectful terms
//! additionally thread an effect channel received on `ei` and handed on
//! over `~eo`.

use thiserror::Error;

use crate::effcalc::{infer, ConstName, EffectAnnotation, OpName, Program, StoreValue, Term, TypeEnv, TypeError, ValueType};
use crate::sesscalc::{Endpoint, Process, ProcessFile, SessionEnv, SessionType, Value};

use super::bijection::effect_to_session;
use super::names::ChannelNameSupply;
use super::store::store_agent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("`{0}` is effectful and has no pure embedding")]
    Effectful(Term),
}

/// A translated program with the session environment it must check under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingResult {
    pub process: Process,
    pub delta: SessionEnv,
    pub ty: ValueType,
    pub effect: EffectAnnotation,
}

impl EmbeddingResult {
    /// The process with its expected environment as header lines.
    pub fn to_file(&self) -> ProcessFile {
        ProcessFile {
            delta: self.delta.clone(),
            shared: Default::default(),
            process: self.process.clone(),
        }
    }
}

/// The result channel's type for a term of type `ty`.
pub fn result_type(ty: ValueType) -> SessionType {
    SessionType::send(ty, SessionType::End)
}

/// The term as a π-calculus value, when it is built from variables,
/// constants and `suc` alone.
pub fn as_value(t: &Term) -> Option<Value> {
    match t {
        Term::Var(x) => Some(Value::var(x)),
        Term::Const(ConstName::Zero) => Some(Value::Nat(0)),
        Term::Const(ConstName::Unit) => Some(Value::Unit),
        Term::Op(OpName::Suc, m) => as_value(m).map(Value::suc),
        _ => None,
    }
}

/// Builds embeddings, drawing every introduced name from one supply.
pub struct Embedder {
    pub names: ChannelNameSupply,
}

impl Embedder {
    pub fn new(names: ChannelNameSupply) -> Self {
        Embedder { names }
    }

    /// A fresh embedder avoiding `t`'s identifiers and the given channels.
    pub fn for_term(t: &Term, channels: &[&Endpoint]) -> Self {
        Embedder::new(ChannelNameSupply::for_term(t, channels.iter().map(|e| e.name.as_str())))
    }

    fn fresh(&mut self, base: &str) -> String {
        self.names.fresh(base)
    }

    /// `⟦t⟧_r`, followed by `k` once the result has been sent.
    pub fn pure(&mut self, t: &Term, r: &Endpoint, k: Process) -> Result<Process, EmbedError> {
        if let Some(v) = as_value(t) {
            return Ok(Process::send(r.clone(), v, k));
        }
        match t {
            Term::Let(x, m, n) => {
                let q = self.fresh("q");
                let left = self.pure(m, &Endpoint::plain(&q), Process::Nil)?;
                let right = Process::recv(Endpoint::co(&q), x, self.pure(n, r, k)?);
                Ok(Process::new_chan(q, Process::par(left, right)))
            }
            Term::Op(OpName::Suc, m) => {
                let q = self.fresh("q");
                let y = self.fresh("x");
                let left = self.pure(m, &Endpoint::plain(&q), Process::Nil)?;
                let right = Process::recv(
                    Endpoint::co(&q),
                    &y,
                    Process::send(r.clone(), Value::suc(Value::var(&y)), k),
                );
                Ok(Process::new_chan(q, Process::par(left, right)))
            }
            _ => Err(EmbedError::Effectful(t.clone())),
        }
    }

    /// `⟦t⟧^{ei,eo}_r`: receives the effect channel on `ei`, returns it on `~eo`.
    pub fn intermediate(
        &mut self,
        t: &Term,
        ei: &Endpoint,
        eo: &Endpoint,
        r: &Endpoint,
    ) -> Result<Process, EmbedError> {
        match t {
            Term::Let(x, m, n) => {
                let q = self.fresh("q");
                let ea = self.fresh("ea");
                let left = self.intermediate(m, ei, &Endpoint::plain(&ea), &Endpoint::plain(&q))?;
                let right = Process::recv(Endpoint::co(&q), x, self.intermediate(n, &Endpoint::plain(&ea), eo, r)?);
                Ok(Process::new_chans([q, ea], Process::par(left, right)))
            }
            Term::Const(ConstName::Get) => {
                let c = self.fresh("c");
                let x = self.fresh("x");
                let ch = Endpoint::plain(&c);
                Ok(Process::recv_chan(
                    ei.clone(),
                    &c,
                    Process::select(
                        ch.clone(),
                        "get",
                        Process::recv(
                            ch.clone(),
                            &x,
                            Process::send(r.clone(), Value::var(&x), Process::send_chan(eo.flip(), ch, Process::Nil)),
                        ),
                    ),
                ))
            }
            Term::Op(OpName::Put, m) => {
                let q = self.fresh("q");
                let c = self.fresh("c");
                let x = self.fresh("x");
                let ch = Endpoint::plain(&c);
                let left = self.pure(m, &Endpoint::plain(&q), Process::Nil)?;
                let right = Process::recv_chan(
                    ei.clone(),
                    &c,
                    Process::recv(
                        Endpoint::co(&q),
                        &x,
                        Process::select(
                            ch.clone(),
                            "put",
                            Process::send(
                                ch.clone(),
                                Value::var(&x),
                                Process::send(r.clone(), Value::Unit, Process::send_chan(eo.flip(), ch, Process::Nil)),
                            ),
                        ),
                    ),
                );
                Ok(Process::new_chan(q, Process::par(left, right)))
            }
            // Variables, pure constants and pure operations.
            _ => {
                let c = self.fresh("c");
                let fwd = Process::send_chan(eo.flip(), Endpoint::plain(&c), Process::Nil);
                Ok(Process::recv_chan(ei.clone(), &c, self.pure(t, r, fwd)?))
            }
        }
    }

    /// `new ei, eo. (inner | ~ei![eff]. eo?[c]. tail)` where `inner` is
    /// built from the chosen `ei` and `eo`.
    pub fn top_with(
        &mut self,
        eff: &Endpoint,
        tail: impl FnOnce(&Endpoint) -> Process,
        inner: impl FnOnce(&mut Self, &Endpoint, &Endpoint) -> Result<Process, EmbedError>,
    ) -> Result<Process, EmbedError> {
        let ei = self.fresh("ei");
        let eo = self.fresh("eo");
        let c = self.fresh("c");
        let body = inner(self, &Endpoint::plain(&ei), &Endpoint::plain(&eo))?;
        let handler = Process::send_chan(
            Endpoint::co(&ei),
            eff.clone(),
            Process::recv_chan(Endpoint::plain(&eo), &c, tail(&Endpoint::plain(&c))),
        );
        Ok(Process::new_chans([ei, eo], Process::par(body, handler)))
    }

    /// `⟦t⟧^eff_r`, the closing form around the intermediate embedding.
    pub fn top(&mut self, t: &Term, eff: &Endpoint, r: &Endpoint) -> Result<Process, EmbedError> {
        self.top_with(eff, |_| Process::Nil, |me, ei, eo| me.intermediate(t, ei, eo, r))
    }
}

pub fn embed_pure(t: &Term, r: &Endpoint) -> Result<Process, EmbedError> {
    Embedder::for_term(t, &[r]).pure(t, r, Process::Nil)
}

pub fn embed_intermediate(t: &Term, ei: &Endpoint, eo: &Endpoint, r: &Endpoint) -> Result<Process, EmbedError> {
    Embedder::for_term(t, &[ei, eo, r]).intermediate(t, ei, eo, r)
}

/// Expected environment of a top-level translation.
pub fn top_delta(eff: &Endpoint, r: &Endpoint, ty: ValueType, effect: &EffectAnnotation) -> SessionEnv {
    SessionEnv::new()
        .with(r.clone(), result_type(ty))
        .with(eff.clone(), effect_to_session(effect))
}

pub fn embed_top(prog: &Program, eff: &Endpoint, r: &Endpoint) -> Result<EmbeddingResult, EmbedError> {
    let (ty, effect) = infer(&TypeEnv::new(), prog.store_type, &prog.root)?;
    let process = Embedder::for_term(&prog.root, &[eff, r]).top(&prog.root, eff, r)?;
    Ok(EmbeddingResult {
        delta: top_delta(eff, r, ty, &effect),
        process,
        ty,
        effect,
    })
}

pub fn store_value(v: StoreValue) -> Value {
    match v {
        StoreValue::Nat(n) => Value::Nat(n),
        StoreValue::Unit => Value::Unit,
    }
}

/// `new eff. (p | Store<init; ~eff>)`.
pub fn compose_with_store(p: Process, eff: &Endpoint, init: Value, store_type: ValueType) -> Process {
    Process::new_chan(eff.name.clone(), Process::par(p, store_agent(init, &eff.flip(), store_type)))
}

/// The closed, runnable form of a program: its translation on `r`
/// composed with a store initialised from the program. With `send_stop`
/// the effect channel is closed with `stop` once the term is done, so the
/// store terminates too.
pub fn compile_for_run(prog: &Program, send_stop: bool) -> Result<Process, EmbedError> {
    infer(&TypeEnv::new(), prog.store_type, &prog.root)?;
    let eff = Endpoint::plain("eff");
    let r = Endpoint::plain("r");
    let tail = |c: &Endpoint| {
        if send_stop {
            Process::select(c.clone(), "stop", Process::Nil)
        } else {
            Process::Nil
        }
    };
    let mut em = Embedder::for_term(&prog.root, &[&eff, &r]);
    let p = em.top_with(&eff, tail, |me, ei, eo| me.intermediate(&prog.root, ei, eo, &r))?;
    Ok(compose_with_store(p, &eff, store_value(prog.init), prog.store_type))
}

