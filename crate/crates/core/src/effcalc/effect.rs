//! Causal state effects and the monoid interface they instantiate.

use std::fmt;

use super::term::ValueType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectToken {
    Get(ValueType),
    Put(ValueType),
}

impl fmt::Display for EffectToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectToken::Get(t) => write!(f, "G {t}"),
            EffectToken::Put(t) => write!(f, "P {t}"),
        }
    }
}

/// An ordered list of effect tokens. The empty list is the pure effect.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EffectAnnotation(pub Vec<EffectToken>);

impl EffectAnnotation {
    pub fn pure() -> Self {
        EffectAnnotation(Vec::new())
    }

    pub fn single(token: EffectToken) -> Self {
        EffectAnnotation(vec![token])
    }

    pub fn is_pure(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[EffectToken] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every get reads the type written by the nearest preceding put, or the
    /// store's declared type when no put precedes it.
    pub fn is_well_causal(&self, store_type: ValueType) -> bool {
        let mut current = store_type;
        for tok in &self.0 {
            match *tok {
                EffectToken::Put(t) => current = t,
                EffectToken::Get(t) if t != current => return false,
                EffectToken::Get(_) => {}
            }
        }
        true
    }
}

impl From<Vec<EffectToken>> for EffectAnnotation {
    fn from(v: Vec<EffectToken>) -> Self {
        EffectAnnotation(v)
    }
}

impl fmt::Display for EffectAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, tok) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{tok}")?;
        }
        f.write_str("]")
    }
}

/// A monoid of effect annotations: sequential composition with a pure unit.
pub trait EffectAlgebra {
    type Effect: Clone + PartialEq + fmt::Debug;

    fn identity(&self) -> Self::Effect;

    fn combine(&self, first: &Self::Effect, then: &Self::Effect) -> Self::Effect;

    fn equal(&self, a: &Self::Effect, b: &Self::Effect) -> bool {
        a == b
    }

    fn is_identity(&self, f: &Self::Effect) -> bool {
        self.equal(f, &self.identity())
    }

    /// The no-inverses condition for one pair: if `f • g` is pure then both
    /// `f` and `g` are pure.
    fn no_inverses(&self, f: &Self::Effect, g: &Self::Effect) -> bool {
        !self.is_identity(&self.combine(f, g)) || (self.is_identity(f) && self.is_identity(g))
    }
}

/// Lists of get/put tokens under concatenation.
#[derive(Debug, Clone, Copy, Default)]
pub struct StateEffects;

impl EffectAlgebra for StateEffects {
    type Effect = EffectAnnotation;

    fn identity(&self) -> EffectAnnotation {
        EffectAnnotation::pure()
    }

    fn combine(&self, first: &EffectAnnotation, then: &EffectAnnotation) -> EffectAnnotation {
        let mut v = first.0.clone();
        v.extend_from_slice(&then.0);
        EffectAnnotation(v)
    }
}

/// All annotations over `alphabet` of length at most `max_len`, shortest first.
pub fn enumerate_annotations(alphabet: &[EffectToken], max_len: usize) -> Vec<EffectAnnotation> {
    let mut out = vec![EffectAnnotation::pure()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &layer {
            for tok in alphabet {
                let mut v: Vec<EffectToken> = prefix.clone();
                v.push(*tok);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(EffectAnnotation));
        layer = next;
    }
    out
}

pub const ALL_TOKENS: [EffectToken; 4] = [
    EffectToken::Get(ValueType::Nat),
    EffectToken::Put(ValueType::Nat),
    EffectToken::Get(ValueType::Unit),
    EffectToken::Put(ValueType::Unit),
];

#[cfg(test)]
mod tests {
    use super::*;
    use EffectToken::*;
    use ValueType::*;

    #[test]
    fn monoid_laws_exhaustive_to_length_four() {
        let alg = StateEffects;
        let all = enumerate_annotations(&ALL_TOKENS, 4);
        assert_eq!(all.len(), 1 + 4 + 16 + 64 + 256);
        let e = alg.identity();
        for f in &all {
            assert_eq!(alg.combine(&e, f), *f);
            assert_eq!(alg.combine(f, &e), *f);
        }
        // Associativity over a length <= 2 slice keeps the cube small.
        let small: Vec<_> = all.iter().filter(|f| f.len() <= 2).collect();
        for f in &small {
            for g in &small {
                for h in &small {
                    let l = alg.combine(&alg.combine(f, g), h);
                    let r = alg.combine(f, &alg.combine(g, h));
                    assert_eq!(l, r);
                }
            }
        }
    }

    #[test]
    fn lists_have_no_inverses() {
        let alg = StateEffects;
        let all = enumerate_annotations(&ALL_TOKENS, 4);
        for f in &all {
            for g in &all {
                assert!(alg.no_inverses(f, g));
            }
        }
    }

    #[test]
    fn causality_tracks_nearest_put() {
        let f = EffectAnnotation(vec![Get(Nat), Put(Unit), Get(Unit)]);
        assert!(f.is_well_causal(Nat));
        assert!(!f.is_well_causal(Unit));
        assert!(!EffectAnnotation(vec![Put(Unit), Get(Nat)]).is_well_causal(Nat));
    }

    #[test]
    fn display_matches_bracket_notation() {
        let f = EffectAnnotation(vec![Get(Nat), Put(Nat)]);
        assert_eq!(f.to_string(), "[G nat, P nat]");
        assert_eq!(EffectAnnotation::pure().to_string(), "[]");
    }
}
