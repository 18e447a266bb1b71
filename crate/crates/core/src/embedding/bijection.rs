//! Effect annotations as session types: each token becomes a one-label
//! selection followed by the matching value exchange.

use thiserror::Error;

use crate::effcalc::{EffectAnnotation, EffectToken};
use crate::sesscalc::{Payload, SessionType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is not the image of an effect annotation")]
pub struct NotInImage(pub SessionType);

pub fn effect_to_session(f: &EffectAnnotation) -> SessionType {
    f.tokens().iter().rev().fold(SessionType::End, |rest, tok| match tok {
        EffectToken::Get(t) => SessionType::select([("get", SessionType::recv(*t, rest))]),
        EffectToken::Put(t) => SessionType::select([("put", SessionType::send(*t, rest))]),
    })
}

pub fn session_to_effect(s: &SessionType) -> Result<EffectAnnotation, NotInImage> {
    let mut out = Vec::new();
    let mut cur = s;
    loop {
        let bad = || NotInImage(s.clone());
        match cur {
            SessionType::End => return Ok(EffectAnnotation(out)),
            SessionType::Select(arms) if arms.len() == 1 => {
                let (l, k) = arms.iter().next().expect("one arm");
                match (l.as_str(), k) {
                    ("get", SessionType::Recv(Payload::Val(t), rest)) => {
                        out.push(EffectToken::Get(*t));
                        cur = rest;
                    }
                    ("put", SessionType::Send(Payload::Val(t), rest)) => {
                        out.push(EffectToken::Put(*t));
                        cur = rest;
                    }
                    _ => return Err(bad()),
                }
            }
            _ => return Err(bad()),
        }
    }
}
