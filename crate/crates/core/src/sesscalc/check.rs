//! Session typing for processes.
//!
//! Endpoints bound by `new`, channel input or `request` have no annotation,
//! so their types are inferred: each starts as a metavariable that usage
//! refines. When a restriction closes, the two endpoint types must be dual,
//! except that a selection may offer fewer labels than the opposite branch.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::effcalc::term::fresh_name;
use crate::effcalc::ValueType;

use super::process::{Endpoint, Process, Value};
use super::types::{MalformedType, Payload, SessionType};

/// Δ: the session types of the endpoints a process owns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionEnv(BTreeMap<Endpoint, SessionType>);

impl SessionEnv {
    pub fn new() -> Self {
        SessionEnv::default()
    }

    pub fn with(mut self, e: Endpoint, s: SessionType) -> Self {
        self.0.insert(e, s);
        self
    }

    pub fn insert(&mut self, e: Endpoint, s: SessionType) -> Option<SessionType> {
        self.0.insert(e, s)
    }

    pub fn get(&self, e: &Endpoint) -> Option<&SessionType> {
        self.0.get(e)
    }

    pub fn remove(&mut self, e: &Endpoint) -> Option<SessionType> {
        self.0.remove(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Endpoint, &SessionType)> {
        self.0.iter()
    }

    pub fn endpoints(&self) -> BTreeSet<Endpoint> {
        self.0.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Endpoint, SessionType)> for SessionEnv {
    fn from_iter<I: IntoIterator<Item = (Endpoint, SessionType)>>(iter: I) -> Self {
        SessionEnv(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefSignature {
    pub values: Vec<ValueType>,
    pub chans: Vec<SessionType>,
}

/// Γ for processes: value variables, process definitions and shared names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcEnv {
    pub vars: BTreeMap<String, ValueType>,
    pub defs: BTreeMap<String, DefSignature>,
    /// The type the accepting side of each shared name receives.
    pub shared: BTreeMap<String, SessionType>,
}

impl ProcEnv {
    pub fn new() -> Self {
        ProcEnv::default()
    }

    pub fn with_var(mut self, x: impl Into<String>, t: ValueType) -> Self {
        self.vars.insert(x.into(), t);
        self
    }

    pub fn with_def(mut self, x: impl Into<String>, sig: DefSignature) -> Self {
        self.defs.insert(x.into(), sig);
        self
    }

    pub fn with_shared(mut self, k: impl Into<String>, s: SessionType) -> Self {
        self.shared.insert(k.into(), s);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("linearity violation: `{endpoint}` is used on both sides of a parallel composition")]
    Linearity { channel: String, endpoint: Endpoint },
    #[error("endpoint `{0}` is not available here (unbound or already used)")]
    UnboundEndpoint(Endpoint),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unbound process variable `{0}`")]
    UnboundDef(String),
    #[error("unknown shared channel `{0}`")]
    UnboundShared(String),
    #[error("the endpoints of `{channel}` have types `{left}` and `{right}`, which are not dual")]
    Duality {
        channel: String,
        left: SessionType,
        right: SessionType,
    },
    #[error("`{endpoint}` selects `{label}`, which its type `{ty}` does not offer")]
    LabelNotOffered {
        endpoint: Endpoint,
        label: String,
        ty: SessionType,
    },
    #[error("`{endpoint}` is used for {action} but has type `{ty}`")]
    Mismatch {
        endpoint: Endpoint,
        action: String,
        ty: SessionType,
    },
    #[error("value `{value}` has type {found}, expected {expected}")]
    ValueMismatch {
        value: Value,
        expected: ValueType,
        found: ValueType,
    },
    #[error("pair `{0}` cannot be sent on a session channel")]
    PairPayload(Value),
    #[error("`{endpoint}` still has type `{ty}` where it must be `end`")]
    Leftover { endpoint: Endpoint, ty: SessionType },
    #[error("`{def}` takes {expected} {what} but is called with {found}")]
    Arity {
        def: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("parameter `{param}` of `{def}` needs a type annotation")]
    MissingAnnotation { def: String, param: String },
    #[error("parameter `{param}` of `{def}` is declared twice")]
    DuplicateParam { def: String, param: String },
    #[error("call to `{def}`: argument `{endpoint}` has type `{found}`, expected `{expected}`")]
    CallMismatch {
        def: String,
        endpoint: Endpoint,
        expected: SessionType,
        found: SessionType,
    },
    #[error("`{endpoint}` cannot be sent over itself")]
    SelfSend { endpoint: Endpoint },
    #[error("malformed session type `{ty}`: {err}")]
    Malformed { ty: SessionType, err: MalformedType },
}

/// How one `|` divided the endpoints available to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParSplit {
    pub available: BTreeSet<Endpoint>,
    pub left: BTreeSet<Endpoint>,
    pub right: BTreeSet<Endpoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckTrace {
    pub splits: Vec<ParSplit>,
}

pub fn session_check(env: &ProcEnv, delta: &SessionEnv, p: &Process) -> Result<(), CheckError> {
    session_check_traced(env, delta, p).map(|_| ())
}

/// Like [`session_check`], also recording every parallel split.
pub fn session_check_traced(
    env: &ProcEnv,
    delta: &SessionEnv,
    p: &Process,
) -> Result<CheckTrace, CheckError> {
    for s in delta.0.values().chain(env.shared.values()) {
        s.validate().map_err(|err| CheckError::Malformed { ty: s.clone(), err })?;
    }
    let mut ck = Checker::default();
    let cenv = Env {
        vars: env.vars.iter().map(|(x, t)| (x.clone(), VTy::Known(*t))).collect(),
        defs: env.defs.clone(),
        shared: env.shared.clone(),
    };
    let d: Delta = delta.0.iter().map(|(e, s)| (e.clone(), Ty::from(s))).collect();
    ck.check(&cenv, d, p)?;
    Ok(ck.trace)
}

// ---------------------------------------------------------------------------
// Types with metavariables

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum VTy {
    Known(ValueType),
    Meta(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PTy {
    Val(VTy),
    Sess(Box<Ty>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Ty {
    Send(PTy, Box<Ty>),
    Recv(PTy, Box<Ty>),
    Select(BTreeMap<String, Ty>),
    Branch(BTreeMap<String, Ty>),
    Mu(String, Box<Ty>),
    Var(String),
    End,
    /// An unknown type; `true` stands for the dual of the unknown.
    Meta(usize, bool),
}

impl From<&SessionType> for Ty {
    fn from(s: &SessionType) -> Ty {
        let pay = |p: &Payload| match p {
            Payload::Val(v) => PTy::Val(VTy::Known(*v)),
            Payload::Sess(s) => PTy::Sess(Box::new(Ty::from(&**s))),
        };
        let arms = |a: &BTreeMap<String, SessionType>| a.iter().map(|(l, s)| (l.clone(), Ty::from(s))).collect();
        match s {
            SessionType::Send(p, k) => Ty::Send(pay(p), Box::new(Ty::from(&**k))),
            SessionType::Recv(p, k) => Ty::Recv(pay(p), Box::new(Ty::from(&**k))),
            SessionType::Select(a) => Ty::Select(arms(a)),
            SessionType::Branch(a) => Ty::Branch(arms(a)),
            SessionType::Mu(x, b) => Ty::Mu(x.clone(), Box::new(Ty::from(&**b))),
            SessionType::Var(x) => Ty::Var(x.clone()),
            SessionType::End => Ty::End,
        }
    }
}

impl Ty {
    fn dual(&self) -> Ty {
        match self {
            Ty::Send(p, k) => Ty::Recv(p.clone(), Box::new(k.dual())),
            Ty::Recv(p, k) => Ty::Send(p.clone(), Box::new(k.dual())),
            Ty::Select(a) => Ty::Branch(a.iter().map(|(l, s)| (l.clone(), s.dual())).collect()),
            Ty::Branch(a) => Ty::Select(a.iter().map(|(l, s)| (l.clone(), s.dual())).collect()),
            Ty::Mu(x, b) => Ty::Mu(x.clone(), Box::new(b.dual())),
            Ty::Meta(i, f) => Ty::Meta(*i, !f),
            Ty::Var(_) | Ty::End => self.clone(),
        }
    }

    fn substitute(&self, var: &str, with: &Ty) -> Ty {
        let pay = |p: &PTy| match p {
            PTy::Sess(s) => PTy::Sess(Box::new(s.substitute(var, with))),
            v => v.clone(),
        };
        match self {
            Ty::Send(p, k) => Ty::Send(pay(p), Box::new(k.substitute(var, with))),
            Ty::Recv(p, k) => Ty::Recv(pay(p), Box::new(k.substitute(var, with))),
            Ty::Select(a) => Ty::Select(a.iter().map(|(l, s)| (l.clone(), s.substitute(var, with))).collect()),
            Ty::Branch(a) => Ty::Branch(a.iter().map(|(l, s)| (l.clone(), s.substitute(var, with))).collect()),
            Ty::Mu(x, _) if x == var => self.clone(),
            Ty::Mu(x, b) => Ty::Mu(x.clone(), Box::new(b.substitute(var, with))),
            Ty::Var(x) if x == var => with.clone(),
            _ => self.clone(),
        }
    }
}

type Delta = BTreeMap<Endpoint, Ty>;

struct Env {
    vars: BTreeMap<String, VTy>,
    defs: BTreeMap<String, DefSignature>,
    shared: BTreeMap<String, SessionType>,
}

#[derive(Default)]
struct Checker {
    sess: Vec<Option<Ty>>,
    vals: Vec<Option<VTy>>,
    trace: CheckTrace,
}

/// Unification failure; callers attach context.
struct Clash;

impl Checker {
    fn meta(&mut self) -> Ty {
        self.sess.push(None);
        Ty::Meta(self.sess.len() - 1, false)
    }

    fn vmeta(&mut self) -> VTy {
        self.vals.push(None);
        VTy::Meta(self.vals.len() - 1)
    }

    /// Resolves bound metavariables and leading `mu`s at the root.
    fn head(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        loop {
            match &t {
                Ty::Meta(i, f) => match &self.sess[*i] {
                    Some(b) => t = if *f { b.dual() } else { b.clone() },
                    None => return t,
                },
                Ty::Mu(x, b) => t = b.substitute(x, &t),
                _ => return t,
            }
        }
    }

    fn vhead(&self, v: &VTy) -> VTy {
        let mut v = v.clone();
        while let VTy::Meta(i) = v {
            match &self.vals[i] {
                Some(b) => v = b.clone(),
                None => break,
            }
        }
        v
    }

    fn occurs(&self, id: usize, t: &Ty) -> bool {
        match t {
            Ty::Meta(i, f) => match &self.sess[*i] {
                Some(b) => self.occurs(id, &if *f { b.dual() } else { b.clone() }),
                None => *i == id,
            },
            Ty::Send(p, k) | Ty::Recv(p, k) => {
                matches!(p, PTy::Sess(s) if self.occurs(id, s)) || self.occurs(id, k)
            }
            Ty::Select(a) | Ty::Branch(a) => a.values().any(|s| self.occurs(id, s)),
            Ty::Mu(_, b) => self.occurs(id, b),
            Ty::Var(_) | Ty::End => false,
        }
    }

    fn bind(&mut self, id: usize, flipped: bool, t: Ty) -> Result<(), Clash> {
        let t = if flipped { t.dual() } else { t };
        if let Ty::Meta(j, false) = self.head(&t) {
            if j == id {
                return Ok(());
            }
        }
        if self.occurs(id, &t) {
            return Err(Clash);
        }
        self.sess[id] = Some(t);
        Ok(())
    }

    fn unify_v(&mut self, a: &VTy, b: &VTy) -> Result<(), Clash> {
        match (self.vhead(a), self.vhead(b)) {
            (VTy::Known(x), VTy::Known(y)) if x == y => Ok(()),
            (VTy::Meta(i), VTy::Meta(j)) if i == j => Ok(()),
            (VTy::Meta(i), other) | (other, VTy::Meta(i)) => {
                self.vals[i] = Some(other);
                Ok(())
            }
            _ => Err(Clash),
        }
    }

    fn unify_payload(&mut self, p: &PTy, q: &PTy, seen: &mut HashSet<(Ty, Ty)>) -> Result<(), Clash> {
        match (p, q) {
            (PTy::Val(a), PTy::Val(b)) => self.unify_v(a, b),
            (PTy::Sess(a), PTy::Sess(b)) => self.unify_in(a, b, seen),
            _ => Err(Clash),
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> Result<(), Clash> {
        self.unify_in(a, b, &mut HashSet::new())
    }

    fn unify_in(&mut self, a: &Ty, b: &Ty, seen: &mut HashSet<(Ty, Ty)>) -> Result<(), Clash> {
        if !seen.insert((a.clone(), b.clone())) {
            return Ok(());
        }
        let (x, y) = (self.head(a), self.head(b));
        match (&x, &y) {
            (Ty::Meta(i, f), Ty::Meta(j, g)) if i == j => {
                if f == g {
                    Ok(())
                } else {
                    Err(Clash)
                }
            }
            (Ty::Meta(i, f), t) | (t, Ty::Meta(i, f)) => self.bind(*i, *f, t.clone()),
            (Ty::End, Ty::End) => Ok(()),
            (Ty::Send(p, k), Ty::Send(q, l)) | (Ty::Recv(p, k), Ty::Recv(q, l)) => {
                self.unify_payload(p, q, seen)?;
                self.unify_in(k, l, seen)
            }
            (Ty::Select(xs), Ty::Select(ys)) | (Ty::Branch(xs), Ty::Branch(ys)) => {
                if !xs.keys().eq(ys.keys()) {
                    return Err(Clash);
                }
                for (l, s) in xs {
                    self.unify_in(s, &ys[l], seen)?;
                }
                Ok(())
            }
            _ => Err(Clash),
        }
    }

    /// The two endpoint types of one channel: dual, with a selection
    /// allowed to use a subset of the labels its partner offers.
    fn compatible(&mut self, a: &Ty, b: &Ty, seen: &mut HashSet<(Ty, Ty)>) -> Result<(), Clash> {
        if !seen.insert((a.clone(), b.clone())) {
            return Ok(());
        }
        let (x, y) = (self.head(a), self.head(b));
        match (&x, &y) {
            (Ty::Meta(i, f), t) | (t, Ty::Meta(i, f)) => self.bind(*i, *f, t.dual()),
            (Ty::End, Ty::End) => Ok(()),
            (Ty::Send(p, k), Ty::Recv(q, l)) | (Ty::Recv(p, k), Ty::Send(q, l)) => {
                self.unify_payload(p, q, &mut HashSet::new())?;
                self.compatible(k, l, seen)
            }
            (Ty::Select(sel), Ty::Branch(br)) | (Ty::Branch(br), Ty::Select(sel)) => {
                for (l, s) in sel {
                    let t = br.get(l).ok_or(Clash)?;
                    self.compatible(s, t, seen)?;
                }
                Ok(())
            }
            _ => Err(Clash),
        }
    }

    /// The type with all solved metavariables substituted. Unsolved ones
    /// print as `_n`.
    fn zonk(&self, t: &Ty) -> SessionType {
        let pay = |p: &PTy| match p {
            PTy::Val(v) => Payload::Val(self.zonk_v(v)),
            PTy::Sess(s) => Payload::sess(self.zonk(s)),
        };
        let arms = |a: &BTreeMap<String, Ty>| a.iter().map(|(l, s)| (l.clone(), self.zonk(s))).collect();
        match t {
            Ty::Meta(i, f) => match &self.sess[*i] {
                Some(b) => {
                    let z = self.zonk(b);
                    if *f {
                        z.dual()
                    } else {
                        z
                    }
                }
                None => SessionType::Var(format!("{}_{i}", if *f { "~" } else { "" })),
            },
            Ty::Send(p, k) => SessionType::Send(pay(p), Box::new(self.zonk(k))),
            Ty::Recv(p, k) => SessionType::Recv(pay(p), Box::new(self.zonk(k))),
            Ty::Select(a) => SessionType::Select(arms(a)),
            Ty::Branch(a) => SessionType::Branch(arms(a)),
            Ty::Mu(x, b) => SessionType::Mu(x.clone(), Box::new(self.zonk(b))),
            Ty::Var(x) => SessionType::Var(x.clone()),
            Ty::End => SessionType::End,
        }
    }

    fn zonk_v(&self, v: &VTy) -> ValueType {
        match self.vhead(v) {
            VTy::Known(t) => t,
            // An unconstrained value type never reaches a session type that
            // anything depends on; nat is as good as any.
            VTy::Meta(_) => ValueType::Nat,
        }
    }

    // -----------------------------------------------------------------------
    // Processes

    fn value_ty(&mut self, env: &Env, v: &Value) -> Result<VTy, CheckError> {
        match v {
            Value::Nat(_) => Ok(VTy::Known(ValueType::Nat)),
            Value::Unit => Ok(VTy::Known(ValueType::Unit)),
            Value::Var(x) => env
                .vars
                .get(x)
                .cloned()
                .ok_or_else(|| CheckError::UnboundVariable(x.clone())),
            Value::Suc(w) => {
                let t = self.value_ty(env, w)?;
                self.unify_v(&t, &VTy::Known(ValueType::Nat)).map_err(|_| CheckError::ValueMismatch {
                    value: (**w).clone(),
                    expected: ValueType::Nat,
                    found: self.zonk_v(&t),
                })?;
                Ok(VTy::Known(ValueType::Nat))
            }
            Value::Pair(..) => Err(CheckError::PairPayload(v.clone())),
        }
    }

    fn take(&self, delta: &mut Delta, e: &Endpoint) -> Result<Ty, CheckError> {
        delta.remove(e).ok_or_else(|| CheckError::UnboundEndpoint(e.clone()))
    }

    fn mismatch(&self, e: &Endpoint, action: &str, t: &Ty) -> CheckError {
        CheckError::Mismatch {
            endpoint: e.clone(),
            action: action.to_string(),
            ty: self.zonk(t),
        }
    }

    fn all_end(&mut self, delta: Delta) -> Result<(), CheckError> {
        for (e, t) in delta {
            self.unify(&t, &Ty::End).map_err(|_| CheckError::Leftover {
                endpoint: e.clone(),
                ty: self.zonk(&t),
            })?;
        }
        Ok(())
    }

    /// Renames binder `c` in `p` if it would shadow an endpoint in `delta`.
    fn freshen(&self, delta: &Delta, c: &str, p: &Process) -> (String, Process) {
        if !delta.keys().any(|e| e.name == c) {
            return (c.to_string(), p.clone());
        }
        let mut avoid = p.all_names();
        avoid.extend(delta.keys().map(|e| e.name.clone()));
        let c2 = fresh_name(c, &avoid);
        (c2.clone(), p.subst_endpoint(c, &Endpoint::plain(c2)))
    }

    fn check(&mut self, env: &Env, mut delta: Delta, p: &Process) -> Result<(), CheckError> {
        match p {
            Process::Nil => self.all_end(delta),
            Process::Send(c, v, k) => {
                let t = self.take(&mut delta, c)?;
                let vt = self.value_ty(env, v)?;
                let cont = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let m = self.meta();
                        self.bind(i, f, Ty::Send(PTy::Val(vt), Box::new(m.clone())))
                            .map_err(|_| self.mismatch(c, "output", &t))?;
                        m
                    }
                    Ty::Send(PTy::Val(want), rest) => {
                        self.unify_v(&want, &vt).map_err(|_| CheckError::Mismatch {
                            endpoint: c.clone(),
                            action: format!("sending `{v}` of type {}", self.zonk_v(&vt)),
                            ty: self.zonk(&t),
                        })?;
                        *rest
                    }
                    _ => return Err(self.mismatch(c, &format!("sending `{v}`"), &t)),
                };
                delta.insert(c.clone(), cont);
                self.check(env, delta, k)
            }
            Process::Recv(c, x, k) => {
                let t = self.take(&mut delta, c)?;
                let (vt, cont) = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let (v, m) = (self.vmeta(), self.meta());
                        self.bind(i, f, Ty::Recv(PTy::Val(v.clone()), Box::new(m.clone())))
                            .map_err(|_| self.mismatch(c, "input", &t))?;
                        (v, m)
                    }
                    Ty::Recv(PTy::Val(v), rest) => (v, *rest),
                    _ => return Err(self.mismatch(c, &format!("receiving a value into `{x}`"), &t)),
                };
                delta.insert(c.clone(), cont);
                let mut inner = Env {
                    vars: env.vars.clone(),
                    defs: env.defs.clone(),
                    shared: env.shared.clone(),
                };
                inner.vars.insert(x.clone(), vt);
                self.check(&inner, delta, k)
            }
            Process::RecvChan(c, d, k) => {
                let t = self.take(&mut delta, c)?;
                let (sd, cont) = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let (sd, m) = (self.meta(), self.meta());
                        self.bind(i, f, Ty::Recv(PTy::Sess(Box::new(sd.clone())), Box::new(m.clone())))
                            .map_err(|_| self.mismatch(c, "channel input", &t))?;
                        (sd, m)
                    }
                    Ty::Recv(PTy::Sess(s), rest) => (*s, *rest),
                    _ => return Err(self.mismatch(c, &format!("receiving a channel into `{d}`"), &t)),
                };
                delta.insert(c.clone(), cont);
                let (d2, k2) = self.freshen(&delta, d, k);
                delta.insert(Endpoint::plain(d2), sd);
                self.check(env, delta, &k2)
            }
            Process::SendChan(c, d, k) => {
                if c == d {
                    return Err(CheckError::SelfSend { endpoint: c.clone() });
                }
                let t = self.take(&mut delta, c)?;
                let td = self.take(&mut delta, d)?;
                let cont = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let m = self.meta();
                        self.bind(i, f, Ty::Send(PTy::Sess(Box::new(td)), Box::new(m.clone())))
                            .map_err(|_| self.mismatch(c, "channel output", &t))?;
                        m
                    }
                    Ty::Send(PTy::Sess(want), rest) => {
                        self.unify(&want, &td).map_err(|_| CheckError::Mismatch {
                            endpoint: c.clone(),
                            action: format!("sending `{d}` of type `{}`", self.zonk(&td)),
                            ty: self.zonk(&t),
                        })?;
                        *rest
                    }
                    _ => return Err(self.mismatch(c, &format!("sending channel `{d}`"), &t)),
                };
                delta.insert(c.clone(), cont);
                self.check(env, delta, k)
            }
            Process::Select(c, l, k) => {
                let t = self.take(&mut delta, c)?;
                let cont = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let m = self.meta();
                        self.bind(i, f, Ty::Select(BTreeMap::from([(l.clone(), m.clone())])))
                            .map_err(|_| self.mismatch(c, "selection", &t))?;
                        m
                    }
                    Ty::Select(mut arms) => match arms.remove(l) {
                        Some(s) => s,
                        None => {
                            return Err(CheckError::LabelNotOffered {
                                endpoint: c.clone(),
                                label: l.clone(),
                                ty: self.zonk(&t),
                            })
                        }
                    },
                    _ => return Err(self.mismatch(c, &format!("selecting `{l}`"), &t)),
                };
                delta.insert(c.clone(), cont);
                self.check(env, delta, k)
            }
            Process::Branch(c, arms) => {
                let t = self.take(&mut delta, c)?;
                let conts: BTreeMap<String, Ty> = match self.head(&t) {
                    Ty::Meta(i, f) => {
                        let ms: BTreeMap<String, Ty> = arms.keys().map(|l| (l.clone(), self.meta())).collect();
                        self.bind(i, f, Ty::Branch(ms.clone()))
                            .map_err(|_| self.mismatch(c, "branching", &t))?;
                        ms
                    }
                    Ty::Branch(tys) if tys.keys().eq(arms.keys()) => tys,
                    _ => {
                        let labels: Vec<&str> = arms.keys().map(|s| s.as_str()).collect();
                        return Err(self.mismatch(c, &format!("branching on {{{}}}", labels.join(", ")), &t));
                    }
                };
                for (l, q) in arms {
                    let mut d = delta.clone();
                    d.insert(c.clone(), conts[l].clone());
                    self.check(env, d, q)?;
                }
                Ok(())
            }
            Process::New(c, k) => {
                let (c2, k2) = self.freshen(&delta, c, k);
                let (a, b) = (self.meta(), self.meta());
                delta.insert(Endpoint::plain(&c2), a.clone());
                delta.insert(Endpoint::co(&c2), b.clone());
                self.check(env, delta, &k2)?;
                self.compatible(&a, &b, &mut HashSet::new())
                    .map_err(|_| CheckError::Duality {
                        channel: c.clone(),
                        left: self.zonk(&a),
                        right: self.zonk(&b),
                    })
            }
            Process::Par(l, r) => {
                let (fl, fr) = (l.free_endpoints(), r.free_endpoints());
                if let Some(e) = fl.intersection(&fr).next() {
                    return Err(if delta.contains_key(e) {
                        CheckError::Linearity {
                            channel: e.name.clone(),
                            endpoint: e.clone(),
                        }
                    } else {
                        CheckError::UnboundEndpoint(e.clone())
                    });
                }
                let available: BTreeSet<Endpoint> = delta.keys().cloned().collect();
                let (right, left): (Delta, Delta) = delta.into_iter().partition(|(e, _)| fr.contains(e));
                self.trace.splits.push(ParSplit {
                    available,
                    left: left.keys().cloned().collect(),
                    right: right.keys().cloned().collect(),
                });
                self.check(env, left, l)?;
                self.check(env, right, r)
            }
            Process::Def(d, scope) => {
                let mut values = Vec::new();
                let mut chans = Vec::new();
                let mut seen = BTreeSet::new();
                for (x, t) in &d.value_params {
                    if !seen.insert(x.clone()) {
                        return Err(CheckError::DuplicateParam { def: d.name.clone(), param: x.clone() });
                    }
                    values.push(t.ok_or_else(|| CheckError::MissingAnnotation {
                        def: d.name.clone(),
                        param: x.clone(),
                    })?);
                }
                for (c, s) in &d.chan_params {
                    if !seen.insert(c.clone()) {
                        return Err(CheckError::DuplicateParam { def: d.name.clone(), param: c.clone() });
                    }
                    let s = s.clone().ok_or_else(|| CheckError::MissingAnnotation {
                        def: d.name.clone(),
                        param: c.clone(),
                    })?;
                    s.validate().map_err(|err| CheckError::Malformed { ty: s.clone(), err })?;
                    chans.push(s);
                }
                let sig = DefSignature { values, chans };
                let mut defs = env.defs.clone();
                defs.insert(d.name.clone(), sig.clone());
                let body_env = Env {
                    vars: d
                        .value_params
                        .iter()
                        .zip(&sig.values)
                        .map(|((x, _), t)| (x.clone(), VTy::Known(*t)))
                        .collect(),
                    defs: defs.clone(),
                    shared: env.shared.clone(),
                };
                let body_delta: Delta = d
                    .chan_params
                    .iter()
                    .zip(&sig.chans)
                    .map(|((c, _), s)| (Endpoint::plain(c), Ty::from(s)))
                    .collect();
                self.check(&body_env, body_delta, &d.body)?;
                let scope_env = Env {
                    vars: env.vars.clone(),
                    defs,
                    shared: env.shared.clone(),
                };
                self.check(&scope_env, delta, scope)
            }
            Process::Call(x, vs, cs) => {
                let sig = env.defs.get(x).cloned().ok_or_else(|| CheckError::UnboundDef(x.clone()))?;
                for (what, expected, found) in [("value arguments", sig.values.len(), vs.len()), ("channel arguments", sig.chans.len(), cs.len())] {
                    if expected != found {
                        return Err(CheckError::Arity { def: x.clone(), what, expected, found });
                    }
                }
                for (v, want) in vs.iter().zip(&sig.values) {
                    let t = self.value_ty(env, v)?;
                    self.unify_v(&t, &VTy::Known(*want)).map_err(|_| CheckError::ValueMismatch {
                        value: v.clone(),
                        expected: *want,
                        found: self.zonk_v(&t),
                    })?;
                }
                for (c, want) in cs.iter().zip(&sig.chans) {
                    let t = self.take(&mut delta, c)?;
                    self.unify(&t, &Ty::from(want)).map_err(|_| CheckError::CallMismatch {
                        def: x.clone(),
                        endpoint: c.clone(),
                        expected: want.clone(),
                        found: self.zonk(&t),
                    })?;
                }
                self.all_end(delta)
            }
            Process::Accept(k, c, body) => {
                let s = env.shared.get(k).cloned().ok_or_else(|| CheckError::UnboundShared(k.clone()))?;
                let (c2, body2) = self.freshen(&delta, c, body);
                delta.insert(Endpoint::plain(c2), Ty::from(&s));
                self.check(env, delta, &body2)
            }
            Process::Request(k, c, body) => {
                let s = env.shared.get(k).cloned().ok_or_else(|| CheckError::UnboundShared(k.clone()))?;
                let (c2, body2) = self.freshen(&delta, c, body);
                let m = self.meta();
                delta.insert(Endpoint::co(&c2), m.clone());
                self.check(env, delta, &body2)?;
                self.compatible(&m, &Ty::from(&s), &mut HashSet::new())
                    .map_err(|_| CheckError::Duality {
                        channel: k.clone(),
                        left: self.zonk(&m),
                        right: s.clone(),
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sesscalc::parse::{parse_process, parse_session_type};
    use crate::sesscalc::types::store_protocol;
    use ValueType::Nat;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn ty(s: &str) -> SessionType {
        parse_session_type(s).unwrap()
    }

    const STORE: &str = "def Store(x: nat; c: mu a. &{get: ![nat]. a, put: ?[nat]. a, stop: end}) = \
                         c >> {get: c!<x>.Store<x; c>, put: c?(y).Store<y; c>, stop: 0} in Store<0; eff>";

    #[test]
    fn store_agent_checks_against_recursive_branch() {
        let delta = SessionEnv::new().with(Endpoint::plain("eff"), store_protocol(Nat));
        session_check(&ProcEnv::new(), &delta, &p(STORE)).unwrap();
        let wrong = SessionEnv::new().with(Endpoint::plain("eff"), ty("&{get: ![nat]}"));
        assert!(session_check(&ProcEnv::new(), &wrong, &p(STORE)).is_err());
    }

    #[test]
    fn nil_under_end() {
        let delta = SessionEnv::new().with(Endpoint::plain("c"), SessionType::End);
        session_check(&ProcEnv::new(), &delta, &Process::Nil).unwrap();
        let open = SessionEnv::new().with(Endpoint::plain("c"), ty("![nat]"));
        assert!(matches!(
            session_check(&ProcEnv::new(), &open, &Process::Nil),
            Err(CheckError::Leftover { .. })
        ));
    }

    #[test]
    fn shared_endpoint_across_par_is_linearity_error() {
        let delta = SessionEnv::new().with(Endpoint::plain("eff"), ty("+{get: ?[nat]}"));
        let err = session_check(&ProcEnv::new(), &delta, &p("(eff <+ get.eff?(x).0 | eff <+ get.eff?(y).0)")).unwrap_err();
        assert!(matches!(&err, CheckError::Linearity { channel, .. } if channel == "eff"), "{err}");
        assert!(err.to_string().contains("eff"));
    }

    #[test]
    fn restriction_infers_dual_types() {
        session_check(&ProcEnv::new(), &SessionEnv::new(), &p("new c. (c!<zero>.0 | ~c?(y).0)")).unwrap();
        let err = session_check(&ProcEnv::new(), &SessionEnv::new(), &p("new c. (c!<zero>.0 | ~c!<1>.0)")).unwrap_err();
        assert!(matches!(err, CheckError::Duality { .. }), "{err}");
        let err = session_check(&ProcEnv::new(), &SessionEnv::new(), &p("new c. (c!<zero>.0 | ~c?(y).~c?(z).0)")).unwrap_err();
        assert!(matches!(err, CheckError::Duality { .. }), "{err}");
    }

    #[test]
    fn restriction_allows_narrower_selection() {
        let store = STORE.replace("Store<0; eff>", "Store<0; ~eff>");
        let client = "eff <+ get.eff?(x).eff <+ put.eff!<suc x>.eff <+ stop.r!<unit>.0";
        let prog = format!("new eff. ({client} | {store})");
        let delta = SessionEnv::new().with(Endpoint::plain("r"), ty("![unit]"));
        session_check(&ProcEnv::new(), &delta, &p(&prog)).unwrap();
        // without stop the client ends while the store still offers
        let no_stop = prog.replace("eff <+ stop.", "");
        assert!(matches!(
            session_check(&ProcEnv::new(), &delta, &p(&no_stop)),
            Err(CheckError::Duality { .. })
        ));
    }

    #[test]
    fn channel_passing_forwards_types() {
        let delta = SessionEnv::new()
            .with(Endpoint::plain("eff"), ty("+{get: ?[nat]}"))
            .with(Endpoint::plain("r"), ty("![nat]"));
        let proc = "new ei, eo. (ei?[c].c <+ get.c?(x).r!<x>.~eo![c].0 | ~ei![eff].eo?[c].0)";
        let trace = session_check_traced(&ProcEnv::new(), &delta, &p(proc)).unwrap();
        for s in &trace.splits {
            assert!(s.left.is_disjoint(&s.right));
            let union: BTreeSet<_> = s.left.union(&s.right).cloned().collect();
            assert_eq!(union, s.available);
        }
        let wrong = delta.clone().with(Endpoint::plain("eff"), ty("+{put: ![nat]}"));
        assert!(session_check(&ProcEnv::new(), &wrong, &p(proc)).is_err());
    }

    #[test]
    fn label_not_offered() {
        let delta = SessionEnv::new().with(Endpoint::plain("eff"), ty("+{get: ?[nat]}"));
        let err = session_check(&ProcEnv::new(), &delta, &p("eff <+ put.eff!<1>")).unwrap_err();
        assert!(matches!(err, CheckError::LabelNotOffered { .. }), "{err}");
    }

    #[test]
    fn value_errors() {
        let delta = SessionEnv::new().with(Endpoint::plain("r"), ty("![nat]"));
        assert_eq!(
            session_check(&ProcEnv::new(), &delta, &p("r!<x>")),
            Err(CheckError::UnboundVariable("x".into()))
        );
        assert!(matches!(
            session_check(&ProcEnv::new(), &delta, &p("r!<(1, 2)>")),
            Err(CheckError::PairPayload(_))
        ));
        assert!(matches!(
            session_check(&ProcEnv::new(), &delta, &p("r!<unit>")),
            Err(CheckError::Mismatch { .. })
        ));
        assert!(matches!(
            session_check(&ProcEnv::new(), &delta, &p("r!<suc unit>")),
            Err(CheckError::ValueMismatch { .. })
        ));
    }

    #[test]
    fn shared_channels() {
        let s = ty("&{get: ![nat], put: ?[nat]}");
        let env = ProcEnv::new().with_shared("k", s);
        let store = "def S(x: nat;) = accept k(c).c >> {get: c!<x>.S<x;>, put: c?(y).S<y;>} in S<0;>";
        session_check(&env, &SessionEnv::new(), &p(store)).unwrap();
        let client = "request k(c).~c <+ get.~c?(x).request k(d).~d <+ put.~d!<suc x>.0";
        session_check(&env, &SessionEnv::new(), &p(client)).unwrap();
        let bad = "request k(c).~c <+ stop.0";
        assert!(session_check(&env, &SessionEnv::new(), &p(bad)).is_err());
        assert!(matches!(
            session_check(&ProcEnv::new(), &SessionEnv::new(), &p(client)),
            Err(CheckError::UnboundShared(_))
        ));
    }

    #[test]
    fn def_annotations_and_arity() {
        assert!(matches!(
            session_check(&ProcEnv::new(), &SessionEnv::new(), &p("def X(;c) = X<;c> in 0")),
            Err(CheckError::MissingAnnotation { .. })
        ));
        assert!(matches!(
            session_check(&ProcEnv::new(), &SessionEnv::new(), &p("def X(x: nat;) = 0 in X<;>")),
            Err(CheckError::Arity { .. })
        ));
        assert_eq!(
            session_check(&ProcEnv::new(), &SessionEnv::new(), &p("Y<;>")),
            Err(CheckError::UnboundDef("Y".into()))
        );
    }

    #[test]
    fn shadowing_binder_is_renamed() {
        let delta = SessionEnv::new().with(Endpoint::plain("c"), ty("![nat]"));
        session_check(&ProcEnv::new(), &delta, &p("c!<1>.new c. (c!<2> | ~c?(z))")).unwrap();
        // the inner restriction must not hide the outer obligation
        assert!(session_check(&ProcEnv::new(), &delta, &p("new c. (c!<2> | ~c?(z))")).is_err());
    }
}
