//! Surface syntax for terms and program files.
//!
//! ```text
//! term := "let" IDENT "=" term "in" term | "get" | "put" term | "suc" term
//!       | "zero" | "unit" | IDENT | "(" term ")"
//! program := "store" ("nat" | "unit") "init" literal term
//! ```

use crate::syntax::{Cursor, SyntaxError, Tok};

use super::program::{Program, StoreValue};
use super::term::{ConstName, OpName, Term, ValueType};

const KEYWORDS: &[&str] = &["let", "in", "get", "put", "suc", "zero", "unit", "store", "init", "nat"];

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let t = term(&mut cur)?;
    cur.expect_eof()?;
    Ok(t)
}

pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_keyword("store")?;
    let store_type = value_type(&mut cur)?;
    cur.expect_keyword("init")?;
    let pos = cur.pos();
    let init = match (cur.bump(), store_type) {
        (Tok::Num(n), ValueType::Nat) => StoreValue::Nat(n),
        (Tok::Ident(s), ValueType::Nat) if s == "zero" => StoreValue::Nat(0),
        (Tok::Ident(s), ValueType::Unit) if s == "unit" => StoreValue::Unit,
        (tok, ty) => {
            return Err(SyntaxError::new(
                pos,
                format!("initial value {tok} does not inhabit store type {ty}"),
            ))
        }
    };
    let root = term(&mut cur)?;
    cur.expect_eof()?;
    Ok(Program {
        store_type,
        init,
        root,
    })
}

pub(crate) fn value_type(cur: &mut Cursor) -> Result<ValueType, SyntaxError> {
    if cur.eat_keyword("nat") {
        Ok(ValueType::Nat)
    } else if cur.eat_keyword("unit") {
        Ok(ValueType::Unit)
    } else {
        Err(cur.unexpected("a value type (`nat` or `unit`)"))
    }
}

fn term(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    if cur.eat_keyword("let") {
        let x = binder(cur)?;
        cur.expect_sym("=")?;
        let m = term(cur)?;
        cur.expect_keyword("in")?;
        let n = term(cur)?;
        return Ok(Term::let_in(x, m, n));
    }
    for op in [OpName::Put, OpName::Suc] {
        if cur.at_keyword(op.keyword()) {
            cur.bump();
            if !starts_term(cur.peek()) {
                return Err(cur.unexpected(&format!("an argument for `{}`", op.keyword())));
            }
            return Ok(Term::op(op, term(cur)?));
        }
    }
    atom(cur)
}

fn starts_term(t: &Tok) -> bool {
    match t {
        Tok::Sym(s) => *s == "(",
        Tok::Ident(s) => s != "in",
        Tok::Num(_) => true,
        Tok::Eof => false,
    }
}

fn atom(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    let pos = cur.pos();
    match cur.peek().clone() {
        Tok::Sym("(") => {
            cur.bump();
            let t = term(cur)?;
            cur.expect_sym(")")?;
            Ok(t)
        }
        Tok::Num(n) => {
            cur.bump();
            Ok(Term::numeral(n))
        }
        Tok::Ident(s) => {
            let c = match s.as_str() {
                "zero" => Some(ConstName::Zero),
                "unit" => Some(ConstName::Unit),
                "get" => Some(ConstName::Get),
                _ => None,
            };
            if let Some(c) = c {
                cur.bump();
                return Ok(Term::Const(c));
            }
            if KEYWORDS.contains(&s.as_str()) {
                return Err(SyntaxError::new(pos, format!("unexpected keyword `{s}`")));
            }
            cur.bump();
            Ok(Term::Var(s))
        }
        _ => Err(cur.unexpected("a term")),
    }
}

fn binder(cur: &mut Cursor) -> Result<String, SyntaxError> {
    let pos = cur.pos();
    let x = cur.expect_ident("a variable name")?;
    if KEYWORDS.contains(&x.as_str()) {
        return Err(SyntaxError::new(pos, format!("`{x}` is a keyword")));
    }
    Ok(x)
}
