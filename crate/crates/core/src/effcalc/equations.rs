//! The equational theory of the effect calculus as directed rewrites.
//!
//! Positions are preorder indices: the root is 0, a `let` numbers its bound
//! term before its body.

use std::fmt;

use thiserror::Error;

use super::infer::{infer, TypeEnv, TypeError};
use super::term::{fresh_name, Term, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    /// `let y = (let x = M in N) in P` to `let x = M in (let y = N in P)`.
    Assoc,
    /// The reverse of [`Equation::Assoc`].
    AssocInv,
    /// `let y = x in M` to `M[x/y]`.
    UnitL,
    /// `let x = M in x` to `M`.
    UnitR,
    /// `M` to `let x = M in x` for a fresh `x`.
    UnitRInv,
    /// Swap two adjacent lets when one bound term is pure.
    Comm,
}

impl Equation {
    pub const ALL: [Equation; 6] = [
        Equation::Assoc,
        Equation::AssocInv,
        Equation::UnitL,
        Equation::UnitR,
        Equation::UnitRInv,
        Equation::Comm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Equation::Assoc => "assoc",
            Equation::AssocInv => "assoc-inv",
            Equation::UnitL => "unitL",
            Equation::UnitR => "unitR",
            Equation::UnitRInv => "unitR-inv",
            Equation::Comm => "comm",
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no subterm at position {0}")]
    NoSuchPosition(usize),
    #[error("{rule}: subterm `{found}` does not match the rule's left-hand side")]
    ShapeMismatch { rule: Equation, found: String },
    #[error("{rule}: side condition violated: {condition}")]
    SideCondition { rule: Equation, condition: String },
    #[error(transparent)]
    Type(#[from] TypeError),
}

pub fn apply_equation(
    t: &Term,
    rule: Equation,
    path: usize,
    env: &TypeEnv,
    store_type: ValueType,
) -> Result<Term, RewriteError> {
    let mut counter = 0;
    match rewrite_at(t, rule, path, &mut counter, env, store_type) {
        Some(r) => r,
        None => Err(RewriteError::NoSuchPosition(path)),
    }
}

fn rewrite_at(
    t: &Term,
    rule: Equation,
    target: usize,
    counter: &mut usize,
    env: &TypeEnv,
    store: ValueType,
) -> Option<Result<Term, RewriteError>> {
    let here = *counter;
    *counter += 1;
    if here == target {
        return Some(rewrite_root(t, rule, env, store));
    }
    match t {
        Term::Var(_) | Term::Const(_) => None,
        Term::Op(op, m) => {
            rewrite_at(m, rule, target, counter, env, store).map(|r| r.map(|m2| Term::op(*op, m2)))
        }
        Term::Let(x, m, n) => {
            if let Some(r) = rewrite_at(m, rule, target, counter, env, store) {
                return Some(r.map(|m2| Term::let_in(x.clone(), m2, (**n).clone())));
            }
            // The body sees the binder at the bound term's type. If the bound
            // term is ill-typed the rewrite below reports it.
            let inner_env = match infer(env, store, m) {
                Ok((sigma, _)) => env.extended(x, sigma),
                Err(e) => {
                    return rewrite_at(n, rule, target, counter, env, store).map(|_| Err(e.into()))
                }
            };
            rewrite_at(n, rule, target, counter, &inner_env, store)
                .map(|r| r.map(|n2| Term::let_in(x.clone(), (**m).clone(), n2)))
        }
    }
}

fn mismatch(rule: Equation, t: &Term) -> RewriteError {
    RewriteError::ShapeMismatch {
        rule,
        found: t.to_string(),
    }
}

fn side(rule: Equation, condition: impl Into<String>) -> RewriteError {
    RewriteError::SideCondition {
        rule,
        condition: condition.into(),
    }
}

fn rewrite_root(
    t: &Term,
    rule: Equation,
    env: &TypeEnv,
    store: ValueType,
) -> Result<Term, RewriteError> {
    // Every rule relates well-typed terms.
    infer(env, store, t)?;
    match rule {
        Equation::Assoc => {
            let Term::Let(y, outer_bound, p) = t else {
                return Err(mismatch(rule, t));
            };
            let Term::Let(x, m, n) = &**outer_bound else {
                return Err(mismatch(rule, t));
            };
            if p.free_vars().contains(x) {
                return Err(side(rule, format!("`{x}` must not occur free in `{p}`")));
            }
            Ok(Term::let_in(
                x.clone(),
                (**m).clone(),
                Term::let_in(y.clone(), (**n).clone(), (**p).clone()),
            ))
        }
        Equation::AssocInv => {
            let Term::Let(x, m, rest) = t else {
                return Err(mismatch(rule, t));
            };
            let Term::Let(y, n, p) = &**rest else {
                return Err(mismatch(rule, t));
            };
            if p.free_vars().contains(x) {
                return Err(side(rule, format!("`{x}` must not occur free in `{p}`")));
            }
            Ok(Term::let_in(
                y.clone(),
                Term::let_in(x.clone(), (**m).clone(), (**n).clone()),
                (**p).clone(),
            ))
        }
        Equation::UnitL => {
            let Term::Let(y, bound, m) = t else {
                return Err(mismatch(rule, t));
            };
            let Term::Var(x) = &**bound else {
                return Err(side(rule, format!("bound term `{bound}` must be a variable")));
            };
            Ok(m.rename_free(y, x))
        }
        Equation::UnitR => match t {
            Term::Let(x, m, body) if **body == Term::Var(x.clone()) => Ok((**m).clone()),
            _ => Err(mismatch(rule, t)),
        },
        Equation::UnitRInv => {
            let x = if t.identifiers().contains("x") {
                fresh_name("x", &t.identifiers())
            } else {
                "x".to_string()
            };
            Ok(Term::let_in(x.clone(), t.clone(), Term::Var(x)))
        }
        Equation::Comm => {
            let Term::Let(a, first, rest) = t else {
                return Err(mismatch(rule, t));
            };
            let Term::Let(b, second, p) = &**rest else {
                return Err(mismatch(rule, t));
            };
            let (_, f_first) = infer(env, store, first)?;
            let env_b = env.extended(a, infer(env, store, first)?.0);
            let (_, f_second) = infer(&env_b, store, second)?;
            if !f_first.is_pure() && !f_second.is_pure() {
                return Err(side(
                    rule,
                    format!("bound term `{first}` is not pure (effect {f_first})"),
                ));
            }
            if a == b {
                return Err(side(rule, format!("binders must differ, both are `{a}`")));
            }
            if second.free_vars().contains(a) {
                return Err(side(rule, format!("`{a}` must not occur free in `{second}`")));
            }
            if first.free_vars().contains(b) {
                return Err(side(rule, format!("`{b}` must not occur free in `{first}`")));
            }
            Ok(Term::let_in(
                b.clone(),
                (**second).clone(),
                Term::let_in(a.clone(), (**first).clone(), (**p).clone()),
            ))
        }
    }
}

/// Preorder positions at which `rule` applies without error.
pub fn applicable_positions(
    t: &Term,
    rule: Equation,
    env: &TypeEnv,
    store_type: ValueType,
) -> Vec<usize> {
    (0..t.size())
        .filter(|p| apply_equation(t, rule, *p, env, store_type).is_ok())
        .collect()
}
