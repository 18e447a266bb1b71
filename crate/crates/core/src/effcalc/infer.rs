//! Syntax-directed type-and-effect inference.

use std::collections::BTreeMap;

use thiserror::Error;

use super::effect::{EffectAlgebra, EffectAnnotation, EffectToken, StateEffects};
use super::term::{ConstName, OpName, Term, ValueType};

/// Value-type assumptions for free variables. Extending an existing name
/// shadows it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv(BTreeMap<String, ValueType>);

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn with(mut self, name: impl Into<String>, ty: ValueType) -> Self {
        self.0.insert(name.into(), ty);
        self
    }

    pub fn extended(&self, name: &str, ty: ValueType) -> Self {
        let mut env = self.clone();
        env.0.insert(name.to_string(), ty);
        env
    }

    pub fn lookup(&self, name: &str) -> Option<ValueType> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ValueType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, ValueType)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (String, ValueType)>>(iter: I) -> Self {
        TypeEnv(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    Mismatch {
        context: String,
        expected: ValueType,
        found: ValueType,
    },
    #[error("argument of `{op}` must be pure, but has effect {effect}")]
    ImpureArgument { op: &'static str, effect: EffectAnnotation },
}

/// Signature of a registered operation: argument type, result type, effect.
/// `None` stands for the declared store type.
#[derive(Debug, Clone, Copy)]
pub struct OpSignature {
    pub arg: Option<ValueType>,
    pub result: Option<ValueType>,
    pub effect: Option<fn(ValueType) -> EffectToken>,
}

#[derive(Debug, Clone, Copy)]
pub struct ConstSignature {
    pub ty: Option<ValueType>,
    pub effect: Option<fn(ValueType) -> EffectToken>,
}

pub fn op_signature(op: OpName) -> OpSignature {
    match op {
        OpName::Suc => OpSignature {
            arg: Some(ValueType::Nat),
            result: Some(ValueType::Nat),
            effect: None,
        },
        OpName::Put => OpSignature {
            arg: None,
            result: Some(ValueType::Unit),
            effect: Some(EffectToken::Put),
        },
    }
}

pub fn const_signature(c: ConstName) -> ConstSignature {
    match c {
        ConstName::Zero => ConstSignature {
            ty: Some(ValueType::Nat),
            effect: None,
        },
        ConstName::Unit => ConstSignature {
            ty: Some(ValueType::Unit),
            effect: None,
        },
        ConstName::Get => ConstSignature {
            ty: None,
            effect: Some(EffectToken::Get),
        },
    }
}

fn effect_of(tok: Option<fn(ValueType) -> EffectToken>, store: ValueType) -> EffectAnnotation {
    tok.map(|mk| EffectAnnotation::single(mk(store)))
        .unwrap_or_default()
}

pub fn infer(
    env: &TypeEnv,
    store_type: ValueType,
    t: &Term,
) -> Result<(ValueType, EffectAnnotation), TypeError> {
    let alg = StateEffects;
    match t {
        Term::Var(x) => env
            .lookup(x)
            .map(|ty| (ty, alg.identity()))
            .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Term::Let(x, m, n) => {
            let (sigma, f) = infer(env, store_type, m)?;
            let (tau, g) = infer(&env.extended(x, sigma), store_type, n)?;
            Ok((tau, alg.combine(&f, &g)))
        }
        Term::Const(c) => {
            let sig = const_signature(*c);
            Ok((
                sig.ty.unwrap_or(store_type),
                effect_of(sig.effect, store_type),
            ))
        }
        Term::Op(op, m) => {
            let sig = op_signature(*op);
            let (arg_ty, arg_eff) = infer(env, store_type, m)?;
            if !alg.is_identity(&arg_eff) {
                return Err(TypeError::ImpureArgument {
                    op: op.keyword(),
                    effect: arg_eff,
                });
            }
            let expected = sig.arg.unwrap_or(store_type);
            if arg_ty != expected {
                return Err(TypeError::Mismatch {
                    context: format!("argument of `{}`", op.keyword()),
                    expected,
                    found: arg_ty,
                });
            }
            Ok((
                sig.result.unwrap_or(store_type),
                effect_of(sig.effect, store_type),
            ))
        }
    }
}

/// True when `t` type-checks with the pure effect.
pub fn is_pure(env: &TypeEnv, store_type: ValueType, t: &Term) -> bool {
    matches!(infer(env, store_type, t), Ok((_, f)) if f.is_pure())
}
