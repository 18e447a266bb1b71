use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::effcalc::term::fresh_name;
use crate::effcalc::ValueType;

use super::types::SessionType;

/// One end of a binary channel: `c` or its opposite `~c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endpoint {
    pub name: String,
    pub dual: bool,
}

impl Endpoint {
    pub fn plain(name: impl Into<String>) -> Self {
        Endpoint {
            name: name.into(),
            dual: false,
        }
    }

    pub fn co(name: impl Into<String>) -> Self {
        Endpoint {
            name: name.into(),
            dual: true,
        }
    }

    pub fn flip(&self) -> Self {
        Endpoint {
            name: self.name.clone(),
            dual: !self.dual,
        }
    }

    /// The endpoint this one denotes once its base name is replaced by `e`.
    fn substituted(&self, e: &Endpoint) -> Endpoint {
        if self.dual {
            e.flip()
        } else {
            e.clone()
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dual {
            write!(f, "~{}", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Nat(u64),
    Unit,
    Var(String),
    Suc(Box<Value>),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn var(x: impl Into<String>) -> Self {
        Value::Var(x.into())
    }

    pub fn suc(v: Value) -> Self {
        Value::Suc(Box::new(v))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Value::Var(x) => {
                out.insert(x.clone());
            }
            Value::Suc(v) => v.collect_vars(out),
            Value::Pair(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Value::Nat(_) | Value::Unit => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn subst(&self, x: &str, v: &Value) -> Value {
        match self {
            Value::Var(y) if y == x => v.clone(),
            Value::Suc(w) => Value::suc(w.subst(x, v)),
            Value::Pair(a, b) => Value::pair(a.subst(x, v), b.subst(x, v)),
            _ => self.clone(),
        }
    }

    /// Folds `suc` over literals: `suc 2` becomes `3`. Symbolic parts stay.
    pub fn fold(&self) -> Value {
        match self {
            Value::Suc(v) => match v.fold() {
                Value::Nat(n) => Value::Nat(n + 1),
                other => Value::suc(other),
            },
            Value::Pair(a, b) => Value::pair(a.fold(), b.fold()),
            _ => self.clone(),
        }
    }

    pub fn rename_var(&self, from: &str, to: &str) -> Value {
        self.subst(from, &Value::var(to))
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Nat(n)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Unit => f.write_str("unit"),
            Value::Var(x) => f.write_str(x),
            Value::Suc(v) => match **v {
                Value::Pair(..) => write!(f, "suc ({v})"),
                _ => write!(f, "suc {v}"),
            },
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Def {
    pub name: String,
    pub value_params: Vec<(String, Option<ValueType>)>,
    pub chan_params: Vec<(String, Option<SessionType>)>,
    pub body: Process,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Process {
    /// `c?(x).P`
    Recv(Endpoint, String, Box<Process>),
    /// `c!<V>.P`
    Send(Endpoint, Value, Box<Process>),
    /// `c?[d].P`, binding the base name `d`.
    RecvChan(Endpoint, String, Box<Process>),
    /// `c![d].P`
    SendChan(Endpoint, Endpoint, Box<Process>),
    Branch(Endpoint, BTreeMap<String, Process>),
    Select(Endpoint, String, Box<Process>),
    Def(Box<Def>, Box<Process>),
    Call(String, Vec<Value>, Vec<Endpoint>),
    New(String, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Nil,
    Accept(String, String, Box<Process>),
    Request(String, String, Box<Process>),
}

impl Process {
    pub fn recv(c: Endpoint, x: impl Into<String>, p: Process) -> Self {
        Process::Recv(c, x.into(), Box::new(p))
    }

    pub fn send(c: Endpoint, v: Value, p: Process) -> Self {
        Process::Send(c, v, Box::new(p))
    }

    pub fn recv_chan(c: Endpoint, d: impl Into<String>, p: Process) -> Self {
        Process::RecvChan(c, d.into(), Box::new(p))
    }

    pub fn send_chan(c: Endpoint, d: Endpoint, p: Process) -> Self {
        Process::SendChan(c, d, Box::new(p))
    }

    pub fn select(c: Endpoint, l: impl Into<String>, p: Process) -> Self {
        Process::Select(c, l.into(), Box::new(p))
    }

    pub fn branch<I, L>(c: Endpoint, arms: I) -> Self
    where
        I: IntoIterator<Item = (L, Process)>,
        L: Into<String>,
    {
        Process::Branch(c, arms.into_iter().map(|(l, p)| (l.into(), p)).collect())
    }

    pub fn new_chan(c: impl Into<String>, p: Process) -> Self {
        Process::New(c.into(), Box::new(p))
    }

    /// Nested restriction, outermost first.
    pub fn new_chans<I, S>(names: I, p: Process) -> Self
    where
        I: IntoIterator<Item = S>,
        I::IntoIter: DoubleEndedIterator,
        S: Into<String>,
    {
        names
            .into_iter()
            .rev()
            .fold(p, |acc, n| Process::new_chan(n, acc))
    }

    pub fn par(p: Process, q: Process) -> Self {
        Process::Par(Box::new(p), Box::new(q))
    }

    /// Right-nested parallel composition; the empty list is `0`.
    pub fn par_all<I: IntoIterator<Item = Process>>(ps: I) -> Self {
        let mut v: Vec<Process> = ps.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Process::Nil;
        };
        while let Some(p) = v.pop() {
            acc = Process::par(p, acc);
        }
        acc
    }

    pub fn def(d: Def, scope: Process) -> Self {
        Process::Def(Box::new(d), Box::new(scope))
    }

    pub fn call(x: impl Into<String>, vals: Vec<Value>, chans: Vec<Endpoint>) -> Self {
        Process::Call(x.into(), vals, chans)
    }

    pub fn accept(k: impl Into<String>, c: impl Into<String>, p: Process) -> Self {
        Process::Accept(k.into(), c.into(), Box::new(p))
    }

    pub fn request(k: impl Into<String>, c: impl Into<String>, p: Process) -> Self {
        Process::Request(k.into(), c.into(), Box::new(p))
    }

    /// The components of a (possibly nested) parallel composition.
    pub fn par_components(&self) -> Vec<&Process> {
        match self {
            Process::Par(a, b) => {
                let mut v = a.par_components();
                v.extend(b.par_components());
                v
            }
            p => vec![p],
        }
    }

    pub fn free_endpoints(&self) -> BTreeSet<Endpoint> {
        let mut out = BTreeSet::new();
        self.collect_endpoints(&mut Vec::new(), &mut out);
        out
    }

    pub fn free_channel_names(&self) -> BTreeSet<String> {
        self.free_endpoints().into_iter().map(|e| e.name).collect()
    }

    fn collect_endpoints(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Endpoint>) {
        let mut note = |e: &Endpoint, bound: &Vec<String>| {
            if !bound.contains(&e.name) {
                out.insert(e.clone());
            }
        };
        match self {
            Process::Recv(c, _, p) | Process::Send(c, _, p) | Process::Select(c, _, p) => {
                note(c, bound);
                p.collect_endpoints(bound, out);
            }
            Process::RecvChan(c, d, p) => {
                note(c, bound);
                bound.push(d.clone());
                p.collect_endpoints(bound, out);
                bound.pop();
            }
            Process::SendChan(c, d, p) => {
                note(c, bound);
                note(d, bound);
                p.collect_endpoints(bound, out);
            }
            Process::Branch(c, arms) => {
                note(c, bound);
                for p in arms.values() {
                    p.collect_endpoints(bound, out);
                }
            }
            Process::Def(d, scope) => {
                let depth = bound.len();
                bound.extend(d.chan_params.iter().map(|(c, _)| c.clone()));
                d.body.collect_endpoints(bound, out);
                bound.truncate(depth);
                scope.collect_endpoints(bound, out);
            }
            Process::Call(_, _, cs) => {
                for c in cs {
                    note(c, bound);
                }
            }
            Process::New(c, p) | Process::Accept(_, c, p) | Process::Request(_, c, p) => {
                bound.push(c.clone());
                p.collect_endpoints(bound, out);
                bound.pop();
            }
            Process::Par(a, b) => {
                a.collect_endpoints(bound, out);
                b.collect_endpoints(bound, out);
            }
            Process::Nil => {}
        }
    }

    /// Free value variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Process::Recv(_, x, p) => {
                let mut s = p.free_vars();
                s.remove(x);
                s
            }
            Process::Send(_, v, p) => {
                let mut s = p.free_vars();
                s.extend(v.free_vars());
                s
            }
            Process::RecvChan(_, _, p)
            | Process::SendChan(_, _, p)
            | Process::Select(_, _, p)
            | Process::New(_, p)
            | Process::Accept(_, _, p)
            | Process::Request(_, _, p) => p.free_vars(),
            Process::Branch(_, arms) => arms.values().flat_map(|p| p.free_vars()).collect(),
            Process::Def(d, scope) => {
                let mut s = d.body.free_vars();
                for (x, _) in &d.value_params {
                    s.remove(x);
                }
                s.extend(scope.free_vars());
                s
            }
            Process::Call(_, vs, _) => vs.iter().flat_map(|v| v.free_vars()).collect(),
            Process::Par(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Process::Nil => BTreeSet::new(),
        }
    }

    /// Names of process variables called but not defined in scope.
    pub fn free_defs(&self) -> BTreeSet<String> {
        match self {
            Process::Call(x, _, _) => BTreeSet::from([x.clone()]),
            Process::Def(d, scope) => {
                let mut s = d.body.free_defs();
                s.extend(scope.free_defs());
                s.remove(&d.name);
                s
            }
            Process::Branch(_, arms) => arms.values().flat_map(|p| p.free_defs()).collect(),
            Process::Par(a, b) => {
                let mut s = a.free_defs();
                s.extend(b.free_defs());
                s
            }
            Process::Nil => BTreeSet::new(),
            Process::Recv(_, _, p)
            | Process::Send(_, _, p)
            | Process::RecvChan(_, _, p)
            | Process::SendChan(_, _, p)
            | Process::Select(_, _, p)
            | Process::New(_, p)
            | Process::Accept(_, _, p)
            | Process::Request(_, _, p) => p.free_defs(),
        }
    }

    /// Shared names used by `accept` or `request`.
    pub fn shared_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Process::Accept(k, _, _) | Process::Request(k, _, _) = p {
                out.insert(k.clone());
            }
        });
        out
    }

    /// Every identifier occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            let ep = |out: &mut BTreeSet<String>, e: &Endpoint| {
                out.insert(e.name.clone());
            };
            match p {
                Process::Recv(c, x, _) | Process::RecvChan(c, x, _) => {
                    ep(&mut out, c);
                    out.insert(x.clone());
                }
                Process::Send(c, v, _) => {
                    ep(&mut out, c);
                    out.extend(v.free_vars());
                }
                Process::SendChan(c, d, _) => {
                    ep(&mut out, c);
                    ep(&mut out, d);
                }
                Process::Select(c, _, _) | Process::Branch(c, _) => ep(&mut out, c),
                Process::Def(d, _) => {
                    out.insert(d.name.clone());
                    out.extend(d.value_params.iter().map(|(x, _)| x.clone()));
                    out.extend(d.chan_params.iter().map(|(x, _)| x.clone()));
                }
                Process::Call(x, vs, cs) => {
                    out.insert(x.clone());
                    for v in vs {
                        out.extend(v.free_vars());
                    }
                    for c in cs {
                        ep(&mut out, c);
                    }
                }
                Process::New(c, _) => {
                    out.insert(c.clone());
                }
                Process::Accept(k, c, _) | Process::Request(k, c, _) => {
                    out.insert(k.clone());
                    out.insert(c.clone());
                }
                Process::Par(..) | Process::Nil => {}
            }
        });
        out
    }

    /// Preorder traversal, including def bodies.
    pub fn visit(&self, f: &mut impl FnMut(&Process)) {
        f(self);
        match self {
            Process::Recv(_, _, p)
            | Process::Send(_, _, p)
            | Process::RecvChan(_, _, p)
            | Process::SendChan(_, _, p)
            | Process::Select(_, _, p)
            | Process::New(_, p)
            | Process::Accept(_, _, p)
            | Process::Request(_, _, p) => p.visit(f),
            Process::Branch(_, arms) => arms.values().for_each(|p| p.visit(f)),
            Process::Def(d, scope) => {
                d.body.visit(f);
                scope.visit(f);
            }
            Process::Par(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Process::Call(..) | Process::Nil => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Capture-avoiding substitution of value `v` for variable `x`.
    pub fn subst_value(&self, x: &str, v: &Value) -> Process {
        let fv = v.free_vars();
        match self {
            Process::Recv(c, y, p) => {
                if y == x {
                    return self.clone();
                }
                if fv.contains(y) {
                    let y2 = self.fresh(y, &fv);
                    let p2 = p.subst_value(y, &Value::var(&y2));
                    return Process::recv(c.clone(), y2, p2.subst_value(x, v));
                }
                Process::recv(c.clone(), y.clone(), p.subst_value(x, v))
            }
            Process::Send(c, w, p) => Process::send(c.clone(), w.subst(x, v), p.subst_value(x, v)),
            Process::Def(d, scope) => {
                let scope2 = scope.subst_value(x, v);
                if d.value_params.iter().any(|(y, _)| y == x) {
                    return Process::def((**d).clone(), scope2);
                }
                let mut d2 = (**d).clone();
                for i in 0..d2.value_params.len() {
                    let y = d2.value_params[i].0.clone();
                    if fv.contains(&y) {
                        let y2 = fresh_name(&y, &self.all_names().union(&fv).cloned().collect());
                        d2.body = d2.body.subst_value(&y, &Value::var(&y2));
                        d2.value_params[i].0 = y2;
                    }
                }
                d2.body = d2.body.subst_value(x, v);
                Process::def(d2, scope2)
            }
            Process::Call(n, vs, cs) => {
                Process::Call(n.clone(), vs.iter().map(|w| w.subst(x, v)).collect(), cs.clone())
            }
            _ => self.map_children(|p| p.subst_value(x, v)),
        }
    }

    /// Capture-avoiding replacement of base name `name` by endpoint `e`:
    /// `name` becomes `e` and `~name` becomes the opposite of `e`.
    pub fn subst_endpoint(&self, name: &str, e: &Endpoint) -> Process {
        let sub = |c: &Endpoint| {
            if c.name == name {
                c.substituted(e)
            } else {
                c.clone()
            }
        };
        // Rebinds `d` away from `e.name` when it would capture it.
        let under = |d: &String, p: &Process| -> Option<(String, Process)> {
            if d == name {
                return None;
            }
            if *d == e.name {
                let avoid = BTreeSet::from([e.name.clone(), name.to_string()]);
                let d2 = self.fresh(d, &avoid);
                let p2 = p.subst_endpoint(d, &Endpoint::plain(&d2));
                return Some((d2, p2.subst_endpoint(name, e)));
            }
            Some((d.clone(), p.subst_endpoint(name, e)))
        };
        match self {
            Process::Recv(c, x, p) => Process::recv(sub(c), x.clone(), p.subst_endpoint(name, e)),
            Process::Send(c, v, p) => Process::send(sub(c), v.clone(), p.subst_endpoint(name, e)),
            Process::SendChan(c, d, p) => {
                Process::send_chan(sub(c), sub(d), p.subst_endpoint(name, e))
            }
            Process::Select(c, l, p) => Process::select(sub(c), l.clone(), p.subst_endpoint(name, e)),
            Process::Branch(c, arms) => Process::Branch(
                sub(c),
                arms.iter()
                    .map(|(l, p)| (l.clone(), p.subst_endpoint(name, e)))
                    .collect(),
            ),
            Process::RecvChan(c, d, p) => match under(d, p) {
                None => Process::RecvChan(sub(c), d.clone(), p.clone()),
                Some((d2, p2)) => Process::recv_chan(sub(c), d2, p2),
            },
            Process::New(d, p) => match under(d, p) {
                None => self.clone(),
                Some((d2, p2)) => Process::new_chan(d2, p2),
            },
            Process::Accept(k, d, p) => match under(d, p) {
                None => self.clone(),
                Some((d2, p2)) => Process::accept(k.clone(), d2, p2),
            },
            Process::Request(k, d, p) => match under(d, p) {
                None => self.clone(),
                Some((d2, p2)) => Process::request(k.clone(), d2, p2),
            },
            Process::Call(x, vs, cs) => Process::Call(x.clone(), vs.clone(), cs.iter().map(sub).collect()),
            Process::Def(d, scope) => {
                let scope2 = scope.subst_endpoint(name, e);
                if d.chan_params.iter().any(|(c, _)| c == name) {
                    return Process::def((**d).clone(), scope2);
                }
                let mut d2 = (**d).clone();
                for i in 0..d2.chan_params.len() {
                    let c = d2.chan_params[i].0.clone();
                    if c == e.name {
                        let avoid = BTreeSet::from([e.name.clone(), name.to_string()]);
                        let c2 = self.fresh(&c, &avoid);
                        d2.body = d2.body.subst_endpoint(&c, &Endpoint::plain(&c2));
                        d2.chan_params[i].0 = c2;
                    }
                }
                d2.body = d2.body.subst_endpoint(name, e);
                Process::def(d2, scope2)
            }
            Process::Par(..) | Process::Nil => self.map_children(|p| p.subst_endpoint(name, e)),
        }
    }

    /// Renames calls to and the definition of process variable `from`.
    pub fn rename_def(&self, from: &str, to: &str) -> Process {
        match self {
            Process::Call(x, vs, cs) if x == from => Process::Call(to.to_string(), vs.clone(), cs.clone()),
            Process::Def(d, scope) => {
                let mut d2 = (**d).clone();
                if d2.name == from {
                    // Shadowed below: only the binder itself changes, and the
                    // scope with it.
                    d2.name = to.to_string();
                }
                d2.body = d2.body.rename_def(from, to);
                Process::def(d2, scope.rename_def(from, to))
            }
            _ => self.map_children(|p| p.rename_def(from, to)),
        }
    }

    fn fresh(&self, base: &str, extra: &BTreeSet<String>) -> String {
        let mut avoid = self.all_names();
        avoid.extend(extra.iter().cloned());
        fresh_name(base, &avoid)
    }

    /// Rebuilds the node with `f` applied to each direct subprocess. Def
    /// bodies are included.
    pub fn map_children(&self, mut f: impl FnMut(&Process) -> Process) -> Process {
        match self {
            Process::Recv(c, x, p) => Process::recv(c.clone(), x.clone(), f(p)),
            Process::Send(c, v, p) => Process::send(c.clone(), v.clone(), f(p)),
            Process::RecvChan(c, d, p) => Process::recv_chan(c.clone(), d.clone(), f(p)),
            Process::SendChan(c, d, p) => Process::send_chan(c.clone(), d.clone(), f(p)),
            Process::Select(c, l, p) => Process::select(c.clone(), l.clone(), f(p)),
            Process::Branch(c, arms) => {
                Process::Branch(c.clone(), arms.iter().map(|(l, p)| (l.clone(), f(p))).collect())
            }
            Process::Def(d, scope) => {
                let mut d2 = (**d).clone();
                d2.body = f(&d.body);
                Process::def(d2, f(scope))
            }
            Process::New(c, p) => Process::new_chan(c.clone(), f(p)),
            Process::Accept(k, c, p) => Process::accept(k.clone(), c.clone(), f(p)),
            Process::Request(k, c, p) => Process::request(k.clone(), c.clone(), f(p)),
            Process::Par(a, b) => Process::par(f(a), f(b)),
            Process::Call(..) | Process::Nil => self.clone(),
        }
    }
}

impl fmt::Display for Def {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "def {}(", self.name)?;
        for (i, (x, t)) in self.value_params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match t {
                Some(t) => write!(f, "{x}: {t}")?,
                None => f.write_str(x)?,
            }
        }
        f.write_str("; ")?;
        for (i, (c, s)) in self.chan_params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match s {
                Some(s) => write!(f, "{c}: {s}")?,
                None => f.write_str(c)?,
            }
        }
        write!(f, ") = {}", self.body)
    }
}

/// Prints a continuation after a prefix dot. Defs extend to the right, so
/// they need parentheses here.
struct Cont<'a>(&'a Process);

impl fmt::Display for Cont<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Process::Def(..) => write!(f, "({})", self.0),
            p => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Recv(c, x, p) => write!(f, "{c}?({x}).{}", Cont(p)),
            Process::Send(c, v, p) => write!(f, "{c}!<{v}>.{}", Cont(p)),
            Process::RecvChan(c, d, p) => write!(f, "{c}?[{d}].{}", Cont(p)),
            Process::SendChan(c, d, p) => write!(f, "{c}![{d}].{}", Cont(p)),
            Process::Select(c, l, p) => write!(f, "{c} <+ {l}.{}", Cont(p)),
            Process::Branch(c, arms) => {
                write!(f, "{c} >> {{")?;
                for (i, (l, p)) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}: {p}")?;
                }
                f.write_str("}")
            }
            Process::Def(d, scope) => write!(f, "{d} in {scope}"),
            Process::Call(x, vs, cs) => {
                write!(f, "{x}<")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("; ")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(">")
            }
            Process::New(..) => {
                let mut names = Vec::new();
                let mut p = self;
                while let Process::New(c, q) = p {
                    names.push(c.as_str());
                    p = q;
                }
                write!(f, "new {}. {}", names.join(", "), Cont(p))
            }
            Process::Par(..) => {
                f.write_str("(")?;
                for (i, p) in self.par_components().into_iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{}", Cont(p))?;
                }
                f.write_str(")")
            }
            Process::Nil => f.write_str("0"),
            Process::Accept(k, c, p) => write!(f, "accept {k}({c}).{}", Cont(p)),
            Process::Request(k, c, p) => write!(f, "request {k}({c}).{}", Cont(p)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Endpoint {
        Endpoint::plain("c")
    }

    #[test]
    fn free_endpoints_respect_binders() {
        let p = Process::new_chan(
            "c",
            Process::par(
                Process::send(c(), Value::Nat(0), Process::Nil),
                Process::recv(Endpoint::co("c"), "y", Process::send(Endpoint::plain("r"), Value::var("y"), Process::Nil)),
            ),
        );
        assert_eq!(p.free_endpoints(), BTreeSet::from([Endpoint::plain("r")]));
        assert!(p.free_vars().is_empty());
    }

    #[test]
    fn endpoint_substitution_tracks_polarity() {
        let p = Process::send(Endpoint::co("d"), Value::Unit, Process::select(Endpoint::plain("d"), "get", Process::Nil));
        let q = p.subst_endpoint("d", &Endpoint::co("c"));
        assert_eq!(
            q,
            Process::send(Endpoint::plain("c"), Value::Unit, Process::select(Endpoint::co("c"), "get", Process::Nil))
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        // new c binds c; substituting d := c must rename the binder
        let p = Process::new_chan("c", Process::send_chan(Endpoint::plain("c"), Endpoint::plain("d"), Process::Nil));
        let q = p.subst_endpoint("d", &c());
        let Process::New(b, body) = &q else { panic!() };
        assert_ne!(b, "c");
        assert_eq!(**body, Process::send_chan(Endpoint::plain(b), c(), Process::Nil));

        let p = Process::recv(c(), "y", Process::send(c(), Value::pair(Value::var("x"), Value::var("y")), Process::Nil));
        let q = p.subst_value("x", &Value::var("y"));
        let Process::Recv(_, y2, body) = &q else { panic!() };
        assert_ne!(y2, "y");
        assert_eq!(
            **body,
            Process::send(c(), Value::pair(Value::var("y"), Value::var(y2)), Process::Nil)
        );
    }

    #[test]
    fn value_folding() {
        assert_eq!(Value::suc(Value::suc(Value::Nat(1))).fold(), Value::Nat(3));
        assert_eq!(Value::suc(Value::var("x")).fold(), Value::suc(Value::var("x")));
    }

    #[test]
    fn display() {
        let p = Process::new_chans(
            ["q", "ea"],
            Process::par(Process::Nil, Process::select(c(), "get", Process::Nil)),
        );
        assert_eq!(p.to_string(), "new q, ea. (0 | c <+ get.0)");
    }
}
