use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Value types of the effect calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueType {
    Unit,
    Nat,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Unit => "unit",
            ValueType::Nat => "nat",
        })
    }
}

/// Unary operations. `put` is effectful, `suc` is pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpName {
    Suc,
    Put,
}

/// Constants. `get` is effectful, the rest are pure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstName {
    Zero,
    Unit,
    Get,
}

impl OpName {
    pub fn keyword(self) -> &'static str {
        match self {
            OpName::Suc => "suc",
            OpName::Put => "put",
        }
    }

    pub fn is_pure(self) -> bool {
        matches!(self, OpName::Suc)
    }
}

impl ConstName {
    pub fn keyword(self) -> &'static str {
        match self {
            ConstName::Zero => "zero",
            ConstName::Unit => "unit",
            ConstName::Get => "get",
        }
    }

    pub fn is_pure(self) -> bool {
        !matches!(self, ConstName::Get)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Let(String, Box<Term>, Box<Term>),
    Op(OpName, Box<Term>),
    Const(ConstName),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn let_in(name: impl Into<String>, bound: Term, body: Term) -> Term {
        Term::Let(name.into(), Box::new(bound), Box::new(body))
    }

    pub fn op(op: OpName, arg: Term) -> Term {
        Term::Op(op, Box::new(arg))
    }

    pub fn suc(arg: Term) -> Term {
        Term::op(OpName::Suc, arg)
    }

    pub fn put(arg: Term) -> Term {
        Term::op(OpName::Put, arg)
    }

    pub fn zero() -> Term {
        Term::Const(ConstName::Zero)
    }

    pub fn unit() -> Term {
        Term::Const(ConstName::Unit)
    }

    pub fn get() -> Term {
        Term::Const(ConstName::Get)
    }

    /// `suc` applied `n` times to `zero`.
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::zero(), |t, _| Term::suc(t))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Let(x, m, n) => {
                m.collect_free(bound, out);
                bound.push(x.clone());
                n.collect_free(bound, out);
                bound.pop();
            }
            Term::Op(_, m) => m.collect_free(bound, out),
            Term::Const(_) => {}
        }
    }

    /// Every identifier occurring in the term, bound or free.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Var(x) | Term::Let(x, _, _) => {
                out.insert(x.clone());
            }
            _ => {}
        });
        out
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Let(_, m, n) => {
                m.visit(f);
                n.visit(f);
            }
            Term::Op(_, m) => m.visit(f),
            Term::Var(_) | Term::Const(_) => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Op(_, m) => 1 + m.depth(),
            Term::Let(_, m, n) => 1 + m.depth().max(n.depth()),
        }
    }

    /// Capture-avoiding substitution of the variable `y` by the variable `x`.
    pub fn rename_free(&self, y: &str, x: &str) -> Term {
        match self {
            Term::Var(v) if v == y => Term::Var(x.to_string()),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Op(op, m) => Term::op(*op, m.rename_free(y, x)),
            Term::Let(b, m, n) => {
                let m2 = m.rename_free(y, x);
                if b == y {
                    return Term::let_in(b.clone(), m2, (**n).clone());
                }
                if b == x && n.free_vars().contains(y) {
                    let mut avoid = n.identifiers();
                    avoid.insert(x.to_string());
                    avoid.insert(y.to_string());
                    let fresh = fresh_name(b, &avoid);
                    let n2 = n.rename_free(b, &fresh).rename_free(y, x);
                    return Term::let_in(fresh, m2, n2);
                }
                Term::let_in(b.clone(), m2, n.rename_free(y, x))
            }
        }
    }
}

/// First of `base'`, `base''`, ... not in `avoid`.
pub(crate) fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut candidate = format!("{base}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Const(c) => f.write_str(c.keyword()),
            Term::Op(op, m) => match **m {
                Term::Let(..) => write!(f, "{} ({m})", op.keyword()),
                _ => write!(f, "{} {m}", op.keyword()),
            },
            Term::Let(x, m, n) => match **m {
                Term::Let(..) => write!(f, "let {x} = ({m}) in {n}"),
                _ => write!(f, "let {x} = {m} in {n}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_respect_let_scope() {
        assert_eq!(Term::var("x").free_vars(), BTreeSet::from(["x".to_string()]));
        assert!(Term::let_in("x", Term::get(), Term::var("x")).free_vars().is_empty());
        assert_eq!(
            Term::put(Term::var("y")).free_vars(),
            BTreeSet::from(["y".to_string()])
        );
        // The binder does not scope over the bound term.
        let t = Term::let_in("x", Term::var("x"), Term::var("x"));
        assert_eq!(t.free_vars(), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn rename_avoids_capture() {
        // (let x = get in put y)[x/y] must not capture the new x.
        let t = Term::let_in("x", Term::get(), Term::put(Term::var("y")));
        let r = t.rename_free("y", "x");
        match &r {
            Term::Let(b, _, body) => {
                assert_ne!(b, "x");
                assert_eq!(**body, Term::put(Term::var("x")));
            }
            _ => panic!("shape changed"),
        }
        assert_eq!(r.free_vars(), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn display_parenthesizes_let_arguments() {
        let t = Term::suc(Term::let_in("x", Term::zero(), Term::var("x")));
        assert_eq!(t.to_string(), "suc (let x = zero in x)");
        assert_eq!(Term::numeral(2).to_string(), "suc suc zero");
    }
}
