//! Surface syntax for processes, session types and process files.
//!
//! ```text
//! P := c?(x).P | c!<V>.P | c?[d].P | c![d].P | c >> {l: P, ...} | c <+ l.P
//!    | def X(x: nat, ...; c: S, ...) = P in P | X<V, ...; c, ...>
//!    | new c, d. P | (P | P | ...) | 0 | accept k(c).P | request k(c).P
//! S := ![nat].S | ?[unit].S | ![S].S | ?[S].S | +{l: S, ...} | &{l: S, ...}
//!    | mu a. S | a | end
//! ```
//!
//! A missing `.P` means `.0` and a missing `.S` means `.end`. Endpoints are
//! `c` or `~c`. Process files may start with header lines `@delta c : S` and
//! `@shared k : S`.

use std::collections::BTreeMap;
use std::fmt;

use crate::effcalc::parse::value_type;
use crate::syntax::{Cursor, Pos, SyntaxError, Tok};

use super::check::SessionEnv;
use super::process::{Def, Endpoint, Process, Value};
use super::types::{Payload, SessionType};

const RESERVED: &[&str] = &[
    "new", "def", "in", "accept", "request", "suc", "zero", "unit", "mu", "end", "nat",
];

pub fn parse_process(text: &str) -> Result<Process, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let p = process(&mut cur)?;
    cur.expect_eof()?;
    Ok(p)
}

pub fn parse_session_type(text: &str) -> Result<SessionType, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let s = session_type(&mut cur)?;
    cur.expect_eof()?;
    Ok(s)
}

/// A process together with the session environment it should check under
/// and the types of the shared names it uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessFile {
    pub delta: SessionEnv,
    pub shared: BTreeMap<String, SessionType>,
    pub process: Process,
}

impl fmt::Display for ProcessFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in &self.shared {
            writeln!(f, "@shared {k} : {s}")?;
        }
        for (e, s) in self.delta.iter() {
            writeln!(f, "@delta {e} : {s}")?;
        }
        writeln!(f, "{}", self.process)
    }
}

pub fn parse_process_file(text: &str) -> Result<ProcessFile, SyntaxError> {
    let mut delta = SessionEnv::new();
    let mut shared = BTreeMap::new();
    let mut body = String::with_capacity(text.len());
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        let Some(header) = trimmed.strip_prefix('@') else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        body.push('\n');
        let offset = line.len() - trimmed.len() + 1;
        let relocate = |e: SyntaxError| SyntaxError {
            pos: Pos {
                line: i + 1,
                col: e.pos.col + offset,
            },
            message: e.message,
        };
        let mut cur = Cursor::new(header).map_err(relocate)?;
        let at = cur.pos();
        if cur.eat_keyword("delta") {
            let e = endpoint(&mut cur).map_err(relocate)?;
            cur.expect_sym(":").map_err(relocate)?;
            let s = session_type(&mut cur).map_err(relocate)?;
            cur.expect_eof().map_err(relocate)?;
            if delta.get(&e).is_some() {
                return Err(relocate(SyntaxError::new(at, format!("duplicate @delta for `{e}`"))));
            }
            delta.insert(e, s);
        } else if cur.eat_keyword("shared") {
            let k = cur.expect_ident("a shared channel name").map_err(relocate)?;
            cur.expect_sym(":").map_err(relocate)?;
            let s = session_type(&mut cur).map_err(relocate)?;
            cur.expect_eof().map_err(relocate)?;
            if shared.insert(k.clone(), s).is_some() {
                return Err(relocate(SyntaxError::new(at, format!("duplicate @shared for `{k}`"))));
            }
        } else {
            return Err(relocate(cur.unexpected("`delta` or `shared` after `@`")));
        }
    }
    Ok(ProcessFile {
        delta,
        shared,
        process: parse_process(&body)?,
    })
}

fn name(cur: &mut Cursor, what: &str) -> Result<String, SyntaxError> {
    let pos = cur.pos();
    let x = cur.expect_ident(what)?;
    if RESERVED.contains(&x.as_str()) {
        return Err(SyntaxError::new(pos, format!("`{x}` is a keyword")));
    }
    Ok(x)
}

fn endpoint(cur: &mut Cursor) -> Result<Endpoint, SyntaxError> {
    let dual = cur.eat_sym("~");
    let n = name(cur, "a channel name")?;
    Ok(Endpoint { name: n, dual })
}

fn process(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let mut parts = vec![item(cur)?];
    while cur.eat_sym("|") {
        parts.push(item(cur)?);
    }
    Ok(Process::par_all(parts))
}

fn cont(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    if cur.eat_sym(".") {
        item(cur)
    } else {
        Ok(Process::Nil)
    }
}

fn item(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    if cur.eat_keyword("def") {
        return def(cur);
    }
    if cur.eat_keyword("new") {
        let mut names = vec![name(cur, "a channel name")?];
        while cur.eat_sym(",") {
            names.push(name(cur, "a channel name")?);
        }
        cur.expect_sym(".")?;
        return Ok(Process::new_chans(names, item(cur)?));
    }
    for kw in ["accept", "request"] {
        if cur.eat_keyword(kw) {
            let k = name(cur, "a shared channel name")?;
            cur.expect_sym("(")?;
            let c = name(cur, "a channel name")?;
            cur.expect_sym(")")?;
            let p = cont(cur)?;
            return Ok(if kw == "accept" {
                Process::accept(k, c, p)
            } else {
                Process::request(k, c, p)
            });
        }
    }
    match cur.peek().clone() {
        Tok::Num(0) => {
            cur.bump();
            return Ok(Process::Nil);
        }
        Tok::Sym("(") => {
            cur.bump();
            let p = process(cur)?;
            cur.expect_sym(")")?;
            return Ok(p);
        }
        Tok::Ident(_) if *cur.peek_at(1) == Tok::Sym("<") => return call(cur),
        Tok::Ident(_) | Tok::Sym("~") => {}
        _ => return Err(cur.unexpected("a process")),
    }
    let c = endpoint(cur)?;
    let pos = cur.pos();
    match cur.bump() {
        Tok::Sym("?(") => {
            let x = name(cur, "a variable name")?;
            cur.expect_sym(")")?;
            Ok(Process::recv(c, x, cont(cur)?))
        }
        Tok::Sym("?[") => {
            let d = name(cur, "a channel name")?;
            cur.expect_sym("]")?;
            Ok(Process::recv_chan(c, d, cont(cur)?))
        }
        Tok::Sym("!<") => {
            let v = value(cur)?;
            cur.expect_sym(">")?;
            Ok(Process::send(c, v, cont(cur)?))
        }
        Tok::Sym("![") => {
            let d = endpoint(cur)?;
            cur.expect_sym("]")?;
            Ok(Process::send_chan(c, d, cont(cur)?))
        }
        Tok::Sym("<+") => {
            let l = cur.expect_ident("a label")?;
            Ok(Process::select(c, l, cont(cur)?))
        }
        Tok::Sym(">>") => {
            cur.expect_sym("{")?;
            let mut arms = BTreeMap::new();
            loop {
                let at = cur.pos();
                let l = cur.expect_ident("a label")?;
                cur.expect_sym(":")?;
                let p = process(cur)?;
                if arms.insert(l.clone(), p).is_some() {
                    return Err(SyntaxError::new(at, format!("duplicate label `{l}`")));
                }
                if !cur.eat_sym(",") {
                    break;
                }
            }
            cur.expect_sym("}")?;
            Ok(Process::Branch(c, arms))
        }
        tok => Err(SyntaxError::new(
            pos,
            format!("expected an action on `{c}` (`?(`, `?[`, `!<`, `![`, `<+` or `>>`), found {tok}"),
        )),
    }
}

fn call(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let x = name(cur, "a process name")?;
    cur.expect_sym("<")?;
    let mut vals = Vec::new();
    let mut chans = Vec::new();
    if !cur.at_sym(";") && !cur.at_sym(">") {
        vals.push(value(cur)?);
        while cur.eat_sym(",") {
            vals.push(value(cur)?);
        }
    }
    if cur.eat_sym(";") && !cur.at_sym(">") {
        chans.push(endpoint(cur)?);
        while cur.eat_sym(",") {
            chans.push(endpoint(cur)?);
        }
    }
    cur.expect_sym(">")?;
    Ok(Process::call(x, vals, chans))
}

fn def(cur: &mut Cursor) -> Result<Process, SyntaxError> {
    let x = name(cur, "a process name")?;
    cur.expect_sym("(")?;
    let mut value_params = Vec::new();
    let mut chan_params = Vec::new();
    if !cur.at_sym(";") && !cur.at_sym(")") {
        loop {
            let p = name(cur, "a parameter name")?;
            let ty = if cur.eat_sym(":") { Some(value_type(cur)?) } else { None };
            value_params.push((p, ty));
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    if cur.eat_sym(";") && !cur.at_sym(")") {
        loop {
            let c = name(cur, "a channel parameter")?;
            let ty = if cur.eat_sym(":") { Some(session_type(cur)?) } else { None };
            chan_params.push((c, ty));
            if !cur.eat_sym(",") {
                break;
            }
        }
    }
    cur.expect_sym(")")?;
    cur.expect_sym("=")?;
    let body = process(cur)?;
    cur.expect_keyword("in")?;
    let scope = process(cur)?;
    Ok(Process::def(
        Def {
            name: x,
            value_params,
            chan_params,
            body,
        },
        scope,
    ))
}

pub(crate) fn value(cur: &mut Cursor) -> Result<Value, SyntaxError> {
    match cur.peek().clone() {
        Tok::Num(n) => {
            cur.bump();
            Ok(Value::Nat(n))
        }
        Tok::Sym("(") => {
            cur.bump();
            let a = value(cur)?;
            if cur.eat_sym(",") {
                let b = value(cur)?;
                cur.expect_sym(")")?;
                return Ok(Value::pair(a, b));
            }
            cur.expect_sym(")")?;
            Ok(a)
        }
        Tok::Ident(s) if s == "zero" => {
            cur.bump();
            Ok(Value::Nat(0))
        }
        Tok::Ident(s) if s == "unit" => {
            cur.bump();
            Ok(Value::Unit)
        }
        Tok::Ident(s) if s == "suc" => {
            cur.bump();
            Ok(Value::suc(value(cur)?))
        }
        Tok::Ident(_) => Ok(Value::Var(name(cur, "a value")?)),
        _ => Err(cur.unexpected("a value")),
    }
}

pub(crate) fn session_type(cur: &mut Cursor) -> Result<SessionType, SyntaxError> {
    let pos = cur.pos();
    match cur.bump() {
        Tok::Sym(sym @ ("![" | "?[")) => {
            let p = if cur.at_keyword("nat") || cur.at_keyword("unit") {
                Payload::Val(value_type(cur)?)
            } else {
                Payload::sess(session_type(cur)?)
            };
            cur.expect_sym("]")?;
            let k = if cur.eat_sym(".") { session_type(cur)? } else { SessionType::End };
            Ok(if sym == "![" {
                SessionType::Send(p, Box::new(k))
            } else {
                SessionType::Recv(p, Box::new(k))
            })
        }
        Tok::Sym(sym @ ("+{" | "&{")) => {
            let mut arms = BTreeMap::new();
            if !cur.at_sym("}") {
                loop {
                    let at = cur.pos();
                    let l = cur.expect_ident("a label")?;
                    cur.expect_sym(":")?;
                    let s = session_type(cur)?;
                    if arms.insert(l.clone(), s).is_some() {
                        return Err(SyntaxError::new(at, format!("duplicate label `{l}`")));
                    }
                    if !cur.eat_sym(",") {
                        break;
                    }
                }
            }
            cur.expect_sym("}")?;
            if arms.is_empty() {
                return Err(SyntaxError::new(pos, "a choice needs at least one label"));
            }
            Ok(if sym == "+{" {
                SessionType::Select(arms)
            } else {
                SessionType::Branch(arms)
            })
        }
        Tok::Sym("(") => {
            let s = session_type(cur)?;
            cur.expect_sym(")")?;
            Ok(s)
        }
        Tok::Ident(s) if s == "end" => Ok(SessionType::End),
        Tok::Ident(s) if s == "mu" => {
            let a = name(cur, "a type variable")?;
            cur.expect_sym(".")?;
            Ok(SessionType::mu(a, session_type(cur)?))
        }
        Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => Ok(SessionType::Var(s)),
        tok => Err(SyntaxError::new(pos, format!("expected a session type, found {tok}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effcalc::ValueType::Nat;

    fn ep(s: &str) -> Endpoint {
        Endpoint::plain(s)
    }

    #[test]
    fn restriction_with_parallel_body() {
        let p = parse_process("new c. (c!<zero>.0 | ~c?(y).0)").unwrap();
        assert_eq!(
            p,
            Process::new_chan(
                "c",
                Process::par(
                    Process::send(ep("c"), Value::Nat(0), Process::Nil),
                    Process::recv(Endpoint::co("c"), "y", Process::Nil)
                )
            )
        );
    }

    #[test]
    fn select_then_receive_then_send() {
        let p = parse_process("c <+ get . c?(x). r!<x>.0").unwrap();
        assert_eq!(
            p,
            Process::select(
                ep("c"),
                "get",
                Process::recv(ep("c"), "x", Process::send(ep("r"), Value::var("x"), Process::Nil))
            )
        );
    }

    #[test]
    fn duplicate_branch_label() {
        assert!(parse_process("c >> { get: 0 }").is_ok());
        let err = parse_process("c >> { get: 0, get: 0 }").unwrap_err();
        assert!(err.message.contains("duplicate label"), "{err}");
    }

    #[test]
    fn trailing_nil_and_end_are_optional() {
        assert_eq!(parse_process("r!<x>").unwrap(), parse_process("r!<x>.0").unwrap());
        assert_eq!(
            parse_session_type("![nat]").unwrap(),
            SessionType::send(Nat, SessionType::End)
        );
    }

    #[test]
    fn defs_calls_and_channel_passing() {
        let src = "def Store(x: nat; c: mu a. &{get: ![nat]. a, put: ?[nat]. a, stop: end}) = \
                   c >> {get: c!<x>.Store<x; c>, put: c?(y).Store<y; c>, stop: 0} \
                   in Store<0; ~eff>";
        let p = parse_process(src).unwrap();
        let Process::Def(d, scope) = &p else { panic!("{p:?}") };
        assert_eq!(d.value_params, vec![("x".to_string(), Some(Nat))]);
        assert_eq!(d.chan_params[0].1.as_ref().unwrap().to_string(), "mu a. &{get: ![nat]. a, put: ?[nat]. a, stop: end}");
        assert_eq!(**scope, Process::call("Store", vec![Value::Nat(0)], vec![Endpoint::co("eff")]));
        let q = parse_process("ei?[c].~eo![c]").unwrap();
        assert_eq!(
            q,
            Process::recv_chan(ep("ei"), "c", Process::send_chan(Endpoint::co("eo"), ep("c"), Process::Nil))
        );
        assert_eq!(
            parse_process("def X(;c) = X<;c> in X<;c>").unwrap().to_string(),
            "def X(; c) = X<; c> in X<; c>"
        );
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "new c. (c!<suc 2>.0 | ~c?(y).r!<(y, unit)>.0)",
            "accept k(c).c >> {get: c!<1>.0, put: c?(y).0}",
            "request k(c).~c <+ put.~c!<3>.0",
            "new q, ea. (def X(x: nat; c: end) = 0 in X<x; c> | ea?[d].~eo![d].0)",
            "c!<1>.(def X(; c: end) = 0 in X<; c>)",
        ] {
            let p = parse_process(src).unwrap();
            let again = parse_process(&p.to_string()).unwrap();
            assert_eq!(p, again, "{src} printed as {p}");
        }
    }

    #[test]
    fn session_type_forms() {
        let s = parse_session_type("+{get: ?[nat]. +{put: ![nat]. end}}").unwrap();
        assert_eq!(s.to_string(), "+{get: ?[nat]. +{put: ![nat]. end}}");
        let t = parse_session_type("?[+{get: ?[nat]}]. end").unwrap();
        assert!(matches!(t, SessionType::Recv(Payload::Sess(_), _)));
        assert!(parse_session_type("+{}").is_err());
        assert!(parse_session_type("&{a: end, a: end}").is_err());
    }

    #[test]
    fn process_file_headers() {
        let f = parse_process_file(
            "-- increment\n@delta r : ![unit]. end\n@delta ~eff : end\n@shared k : &{get: ![nat]}\nr!<unit>\n",
        )
        .unwrap();
        assert_eq!(f.delta.get(&ep("r")), Some(&SessionType::send(crate::effcalc::ValueType::Unit, SessionType::End)));
        assert_eq!(f.delta.get(&Endpoint::co("eff")), Some(&SessionType::End));
        assert_eq!(f.shared.len(), 1);
        let again = parse_process_file(&f.to_string()).unwrap();
        assert_eq!(f, again);
        let err = parse_process_file("0\n  @delta r ; end\n").unwrap_err();
        assert_eq!(err.pos.line, 2);
    }
}
