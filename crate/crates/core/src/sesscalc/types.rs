use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::effcalc::ValueType;

/// What a send or receive carries: a plain value or a session channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    Val(ValueType),
    Sess(Box<SessionType>),
}

impl Payload {
    pub fn sess(s: SessionType) -> Payload {
        Payload::Sess(Box::new(s))
    }
}

/// Binary session types with equi-recursive `mu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SessionType {
    Send(Payload, Box<SessionType>),
    Recv(Payload, Box<SessionType>),
    Select(BTreeMap<String, SessionType>),
    Branch(BTreeMap<String, SessionType>),
    Mu(String, Box<SessionType>),
    Var(String),
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedType {
    #[error("type variable `{0}` is not bound by an enclosing `mu`")]
    Unbound(String),
    #[error("`mu {0}` is not contractive")]
    NotContractive(String),
    #[error("choice with no labels")]
    EmptyChoice,
}

impl SessionType {
    pub fn send(v: ValueType, cont: SessionType) -> Self {
        SessionType::Send(Payload::Val(v), Box::new(cont))
    }

    pub fn recv(v: ValueType, cont: SessionType) -> Self {
        SessionType::Recv(Payload::Val(v), Box::new(cont))
    }

    pub fn send_chan(s: SessionType, cont: SessionType) -> Self {
        SessionType::Send(Payload::sess(s), Box::new(cont))
    }

    pub fn recv_chan(s: SessionType, cont: SessionType) -> Self {
        SessionType::Recv(Payload::sess(s), Box::new(cont))
    }

    pub fn select<I, L>(arms: I) -> Self
    where
        I: IntoIterator<Item = (L, SessionType)>,
        L: Into<String>,
    {
        SessionType::Select(arms.into_iter().map(|(l, s)| (l.into(), s)).collect())
    }

    pub fn branch<I, L>(arms: I) -> Self
    where
        I: IntoIterator<Item = (L, SessionType)>,
        L: Into<String>,
    {
        SessionType::Branch(arms.into_iter().map(|(l, s)| (l.into(), s)).collect())
    }

    pub fn mu(var: impl Into<String>, body: SessionType) -> Self {
        SessionType::Mu(var.into(), Box::new(body))
    }

    pub fn var(name: impl Into<String>) -> Self {
        SessionType::Var(name.into())
    }

    pub fn dual(&self) -> SessionType {
        match self {
            SessionType::Send(p, s) => SessionType::Recv(p.clone(), Box::new(s.dual())),
            SessionType::Recv(p, s) => SessionType::Send(p.clone(), Box::new(s.dual())),
            SessionType::Select(arms) => {
                SessionType::Branch(arms.iter().map(|(l, s)| (l.clone(), s.dual())).collect())
            }
            SessionType::Branch(arms) => {
                SessionType::Select(arms.iter().map(|(l, s)| (l.clone(), s.dual())).collect())
            }
            SessionType::Mu(a, s) => SessionType::Mu(a.clone(), Box::new(s.dual())),
            SessionType::Var(_) | SessionType::End => self.clone(),
        }
    }

    /// Replaces free occurrences of `var` by `with`, which must be closed.
    pub fn substitute(&self, var: &str, with: &SessionType) -> SessionType {
        let sub_payload = |p: &Payload| match p {
            Payload::Val(v) => Payload::Val(*v),
            Payload::Sess(s) => Payload::sess(s.substitute(var, with)),
        };
        match self {
            SessionType::Send(p, s) => SessionType::Send(sub_payload(p), Box::new(s.substitute(var, with))),
            SessionType::Recv(p, s) => SessionType::Recv(sub_payload(p), Box::new(s.substitute(var, with))),
            SessionType::Select(arms) => SessionType::Select(
                arms.iter().map(|(l, s)| (l.clone(), s.substitute(var, with))).collect(),
            ),
            SessionType::Branch(arms) => SessionType::Branch(
                arms.iter().map(|(l, s)| (l.clone(), s.substitute(var, with))).collect(),
            ),
            SessionType::Mu(a, _) if a == var => self.clone(),
            SessionType::Mu(a, s) => SessionType::Mu(a.clone(), Box::new(s.substitute(var, with))),
            SessionType::Var(a) if a == var => with.clone(),
            SessionType::Var(_) | SessionType::End => self.clone(),
        }
    }

    /// One-step unfolding of a top-level `mu`; other types are returned as is.
    pub fn unfold(&self) -> SessionType {
        let mut t = self.clone();
        // Contractiveness bounds this loop by the number of leading binders.
        while let SessionType::Mu(a, body) = &t {
            t = body.substitute(a, &t);
        }
        t
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(t: &SessionType, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match t {
                SessionType::Send(p, s) | SessionType::Recv(p, s) => {
                    if let Payload::Sess(ps) = p {
                        go(ps, bound, out);
                    }
                    go(s, bound, out);
                }
                SessionType::Select(arms) | SessionType::Branch(arms) => {
                    arms.values().for_each(|s| go(s, bound, out))
                }
                SessionType::Mu(a, s) => {
                    bound.push(a.clone());
                    go(s, bound, out);
                    bound.pop();
                }
                SessionType::Var(a) => {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
                SessionType::End => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Checks closedness, nonempty choices and contractive `mu` bodies.
    pub fn validate(&self) -> Result<(), MalformedType> {
        if let Some(v) = self.free_vars().into_iter().next() {
            return Err(MalformedType::Unbound(v));
        }
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<(), MalformedType> {
        match self {
            SessionType::Send(p, s) | SessionType::Recv(p, s) => {
                if let Payload::Sess(ps) = p {
                    ps.validate_shape()?;
                }
                s.validate_shape()
            }
            SessionType::Select(arms) | SessionType::Branch(arms) => {
                if arms.is_empty() {
                    return Err(MalformedType::EmptyChoice);
                }
                arms.values().try_for_each(|s| s.validate_shape())
            }
            SessionType::Mu(a, body) => {
                let mut inner = &**body;
                while let SessionType::Mu(_, b) = inner {
                    inner = b;
                }
                if matches!(inner, SessionType::Var(_)) {
                    return Err(MalformedType::NotContractive(a.clone()));
                }
                body.validate_shape()
            }
            SessionType::Var(_) | SessionType::End => Ok(()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SessionType::Send(p, s) | SessionType::Recv(p, s) => {
                let pd = match p {
                    Payload::Sess(ps) => ps.depth(),
                    Payload::Val(_) => 0,
                };
                1 + pd.max(s.depth())
            }
            SessionType::Select(arms) | SessionType::Branch(arms) => {
                1 + arms.values().map(|s| s.depth()).max().unwrap_or(0)
            }
            SessionType::Mu(_, s) => 1 + s.depth(),
            SessionType::Var(_) | SessionType::End => 1,
        }
    }
}

/// Equality up to renaming of `mu` binders and finite unfolding.
pub fn type_equal(s: &SessionType, t: &SessionType) -> bool {
    Coinductive::new(Mode::Equal).relate(s, t)
}

/// `s ≺ t`: `s` arises from `t` by dropping labels from selections, at any
/// depth. Branches must offer exactly the same labels.
pub fn select_subtype(s: &SessionType, t: &SessionType) -> bool {
    Coinductive::new(Mode::SelectWidth).relate(s, t)
}

pub fn payload_equal(p: &Payload, q: &Payload) -> bool {
    match (p, q) {
        (Payload::Val(a), Payload::Val(b)) => a == b,
        (Payload::Sess(a), Payload::Sess(b)) => type_equal(a, b),
        _ => false,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Equal,
    SelectWidth,
}

/// Pair exploration that assumes a pair related while it is being checked,
/// which is sound for the greatest fixed point.
struct Coinductive {
    mode: Mode,
    assumed: HashSet<(SessionType, SessionType)>,
}

impl Coinductive {
    fn new(mode: Mode) -> Self {
        Coinductive {
            mode,
            assumed: HashSet::new(),
        }
    }

    fn relate(&mut self, s: &SessionType, t: &SessionType) -> bool {
        if matches!(s, SessionType::Mu(..)) || matches!(t, SessionType::Mu(..)) {
            if !self.assumed.insert((s.clone(), t.clone())) {
                return true;
            }
            return self.relate(&s.unfold(), &t.unfold());
        }
        match (s, t) {
            (SessionType::End, SessionType::End) => true,
            (SessionType::Send(p, a), SessionType::Send(q, b))
            | (SessionType::Recv(p, a), SessionType::Recv(q, b)) => {
                payload_equal(p, q) && self.relate(a, b)
            }
            (SessionType::Select(xs), SessionType::Select(ys)) => {
                let labels_ok = match self.mode {
                    Mode::Equal => xs.len() == ys.len(),
                    Mode::SelectWidth => true,
                };
                labels_ok
                    && xs
                        .iter()
                        .all(|(l, a)| ys.get(l).is_some_and(|b| self.relate(a, b)))
            }
            (SessionType::Branch(xs), SessionType::Branch(ys)) => {
                xs.len() == ys.len()
                    && xs
                        .iter()
                        .all(|(l, a)| ys.get(l).is_some_and(|b| self.relate(a, b)))
            }
            // Free variables only arise in open types, which are unrelated.
            _ => false,
        }
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Val(v) => write!(f, "{v}"),
            Payload::Sess(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arms = |f: &mut fmt::Formatter<'_>, sigil: &str, arms: &BTreeMap<String, SessionType>| {
            write!(f, "{sigil}{{")?;
            for (i, (l, s)) in arms.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}: {s}")?;
            }
            f.write_str("}")
        };
        match self {
            SessionType::Send(p, s) => write!(f, "![{p}]. {s}"),
            SessionType::Recv(p, s) => write!(f, "?[{p}]. {s}"),
            SessionType::Select(a) => arms(f, "+", a),
            SessionType::Branch(a) => arms(f, "&", a),
            SessionType::Mu(a, s) => write!(f, "mu {a}. {s}"),
            SessionType::Var(a) => f.write_str(a),
            SessionType::End => f.write_str("end"),
        }
    }
}

/// The recursive type offered by the store agent at value type `tau`:
/// `mu a. &{get: ![tau]. a, put: ?[tau]. a, stop: end}`.
pub fn store_protocol(tau: ValueType) -> SessionType {
    SessionType::mu(
        "a",
        SessionType::branch([
            ("get", SessionType::send(tau, SessionType::var("a"))),
            ("put", SessionType::recv(tau, SessionType::var("a"))),
            ("stop", SessionType::End),
        ]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ValueType::*;

    #[test]
    fn dual_swaps_directions_and_choices() {
        assert_eq!(
            SessionType::send(Nat, SessionType::End).dual(),
            SessionType::recv(Nat, SessionType::End)
        );
        assert_eq!(
            SessionType::select([("get", SessionType::recv(Nat, SessionType::End))]).dual(),
            SessionType::branch([("get", SessionType::send(Nat, SessionType::End))])
        );
        let s = SessionType::mu(
            "a",
            SessionType::branch([("get", SessionType::send(Nat, SessionType::var("a")))]),
        );
        assert_eq!(s.dual().dual(), s);
    }

    #[test]
    fn equality_unfolds_and_renames() {
        let s = SessionType::mu("a", SessionType::send(Nat, SessionType::var("a")));
        let once = SessionType::send(Nat, s.clone());
        assert!(type_equal(&s, &once));
        assert!(type_equal(&once, &s));
        assert!(!type_equal(&SessionType::End, &SessionType::send(Nat, SessionType::End)));
        let a = SessionType::mu("a", SessionType::branch([("get", SessionType::var("a"))]));
        let b = SessionType::mu("b", SessionType::branch([("get", SessionType::var("b"))]));
        assert!(type_equal(&a, &b));
        // Two-step and one-step loops describe the same stream.
        let two = SessionType::mu(
            "x",
            SessionType::send(Nat, SessionType::send(Nat, SessionType::var("x"))),
        );
        assert!(type_equal(&two, &s));
        let alt = SessionType::mu(
            "x",
            SessionType::send(Nat, SessionType::send(Unit, SessionType::var("x"))),
        );
        assert!(!type_equal(&alt, &s));
    }

    #[test]
    fn select_width_rule() {
        let narrow = SessionType::select([("get", SessionType::recv(Nat, SessionType::End))]);
        let wide = SessionType::select([
            ("get", SessionType::recv(Nat, SessionType::End)),
            ("put", SessionType::send(Nat, SessionType::End)),
        ]);
        assert!(select_subtype(&narrow, &wide));
        assert!(!select_subtype(&wide, &narrow));
        assert!(select_subtype(&wide, &wide));
        let b1 = SessionType::branch([("get", SessionType::End)]);
        let b2 = SessionType::branch([("get", SessionType::End), ("put", SessionType::End)]);
        assert!(!select_subtype(&b1, &b2));
    }

    #[test]
    fn client_chain_with_stop_is_subtype_of_store_dual() {
        let client = SessionType::select([(
            "get",
            SessionType::recv(
                Nat,
                SessionType::select([("put", SessionType::send(Nat, SessionType::select([("stop", SessionType::End)])))]),
            ),
        )]);
        assert!(select_subtype(&client, &store_protocol(Nat).dual()));
        let no_stop = SessionType::select([("get", SessionType::recv(Nat, SessionType::End))]);
        assert!(!select_subtype(&no_stop, &store_protocol(Nat).dual()));
    }

    #[test]
    fn validation() {
        assert_eq!(
            SessionType::var("a").validate(),
            Err(MalformedType::Unbound("a".into()))
        );
        assert_eq!(
            SessionType::mu("a", SessionType::mu("b", SessionType::var("a"))).validate(),
            Err(MalformedType::NotContractive("a".into()))
        );
        assert_eq!(
            SessionType::Select(BTreeMap::new()).validate(),
            Err(MalformedType::EmptyChoice)
        );
        assert!(store_protocol(Nat).validate().is_ok());
    }

    #[test]
    fn display() {
        let s = SessionType::select([(
            "get",
            SessionType::recv(Nat, SessionType::select([("put", SessionType::send(Nat, SessionType::End))])),
        )]);
        assert_eq!(s.to_string(), "+{get: ?[nat]. +{put: ![nat]. end}}");
        assert_eq!(
            store_protocol(Nat).to_string(),
            "mu a. &{get: ![nat]. a, put: ?[nat]. a, stop: end}"
        );
    }
}
