//! Direct big-step evaluator for the effect calculus, threading one store.
//! Serves as the reference against which compiled processes are run.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::program::{Program, StoreValue};
use super::term::{ConstName, OpName, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Nat(u64),
    Unit,
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Nat(n) => write!(f, "{n}"),
            Val::Unit => f.write_str("unit"),
        }
    }
}

impl From<StoreValue> for Val {
    fn from(v: StoreValue) -> Self {
        match v {
            StoreValue::Nat(n) => Val::Nat(n),
            StoreValue::Unit => Val::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`suc` applied to {0}")]
    NotANat(Val),
}

pub fn evaluate(
    t: &Term,
    env: &BTreeMap<String, Val>,
    store: Val,
) -> Result<(Val, Val), EvalError> {
    match t {
        Term::Var(x) => env
            .get(x)
            .map(|v| (*v, store))
            .ok_or_else(|| EvalError::Unbound(x.clone())),
        Term::Const(ConstName::Zero) => Ok((Val::Nat(0), store)),
        Term::Const(ConstName::Unit) => Ok((Val::Unit, store)),
        Term::Const(ConstName::Get) => Ok((store, store)),
        Term::Op(OpName::Suc, m) => match evaluate(m, env, store)? {
            (Val::Nat(n), s) => Ok((Val::Nat(n + 1), s)),
            (v, _) => Err(EvalError::NotANat(v)),
        },
        Term::Op(OpName::Put, m) => {
            let (v, _) = evaluate(m, env, store)?;
            Ok((Val::Unit, v))
        }
        Term::Let(x, m, n) => {
            let (v, s) = evaluate(m, env, store)?;
            let mut inner = env.clone();
            inner.insert(x.clone(), v);
            evaluate(n, &inner, s)
        }
    }
}

/// Runs a closed program from its initial store: (result, final store).
pub fn evaluate_program(p: &Program) -> Result<(Val, Val), EvalError> {
    evaluate(&p.root, &BTreeMap::new(), p.init.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effcalc::parse::parse_term;

    #[test]
    fn increment() {
        let p = Program::nat(0, parse_term("let x = get in put (suc x)").unwrap());
        assert_eq!(evaluate_program(&p).unwrap(), (Val::Unit, Val::Nat(1)));
    }

    #[test]
    fn reads_see_latest_write() {
        let t = parse_term("let a = put 3 in let b = get in let c = put (suc b) in get").unwrap();
        assert_eq!(
            evaluate(&t, &BTreeMap::new(), Val::Nat(0)).unwrap(),
            (Val::Nat(4), Val::Nat(4))
        );
    }
}
