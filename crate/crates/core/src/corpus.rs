//! Seeded random generation of well-typed programs over a `nat` store.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::effcalc::{Program, Term, ValueType};
use crate::sesscalc::SessionType;

const BINDERS: [&str; 4] = ["x", "y", "z", "w"];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn leaf(&mut self, ctx: &[(String, ValueType)], ty: ValueType, pure: bool) -> Term {
        // only the innermost binding of a name is visible
        let mut seen = BTreeSet::new();
        let mut options: Vec<Term> = ctx
            .iter()
            .rev()
            .filter(|(x, _)| seen.insert(x.clone()))
            .filter(|(_, t)| *t == ty)
            .map(|(x, _)| Term::var(x))
            .collect();
        match ty {
            ValueType::Nat => {
                options.push(Term::zero());
                if !pure {
                    options.push(Term::get());
                    options.push(Term::get());
                }
            }
            ValueType::Unit => options.push(Term::unit()),
        }
        options.choose(&mut self.rng).cloned().expect("a constant is always available")
    }

    fn term(&mut self, ctx: &mut Vec<(String, ValueType)>, ty: ValueType, depth: usize, pure: bool) -> Term {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return self.leaf(ctx, ty, pure);
        }
        let roll: u32 = self.rng.gen_range(0..10);
        match (ty, roll) {
            (ValueType::Nat, 0..=1) => Term::suc(self.term(ctx, ValueType::Nat, depth - 1, true)),
            (ValueType::Unit, 0..=2) if !pure => Term::put(self.term(ctx, ValueType::Nat, depth - 1, true)),
            _ => {
                let sigma = if self.rng.gen_bool(0.7) { ValueType::Nat } else { ValueType::Unit };
                let x = BINDERS.choose(&mut self.rng).expect("nonempty").to_string();
                let m = self.term(ctx, sigma, depth - 1, pure);
                ctx.push((x.clone(), sigma));
                let n = self.term(ctx, ty, depth - 1, pure);
                ctx.pop();
                Term::let_in(x, m, n)
            }
        }
    }
}

/// One closed, well-typed term of depth at most `max_depth`.
pub fn generate_term(rng: &mut ChaCha8Rng, max_depth: usize, pure: bool) -> Term {
    let mut g = Gen { rng: rng.clone() };
    let ty = if g.rng.gen_bool(0.5) { ValueType::Nat } else { ValueType::Unit };
    let t = g.term(&mut Vec::new(), ty, max_depth.max(1), pure);
    *rng = g.rng;
    t
}

/// `count` distinct programs with store `nat`, initial value 0.
pub fn corpus(seed: u64, count: usize, max_depth: usize) -> Vec<Program> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..count * 50 {
        if out.len() == count {
            break;
        }
        let t = generate_term(&mut rng, max_depth, false);
        if seen.insert(t.to_string()) {
            out.push(Program::nat(0, t));
        }
    }
    out
}

/// Distinct closed terms with the pure effect.
pub fn pure_terms(seed: u64, count: usize, max_depth: usize) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..count * 50 {
        if out.len() == count {
            break;
        }
        let t = generate_term(&mut rng, max_depth, true);
        if seen.insert(t.to_string()) {
            out.push(t);
        }
    }
    out
}

/// A random contractive session type of depth at most `depth` over the
/// type variables in `vars`.
pub fn session_type(rng: &mut ChaCha8Rng, depth: usize, vars: &mut Vec<String>) -> SessionType {
    let vt = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { ValueType::Nat } else { ValueType::Unit };
    if depth <= 1 {
        return match vars.choose(rng) {
            Some(v) if rng.gen_bool(0.5) => SessionType::var(v),
            _ => SessionType::End,
        };
    }
    let labels = |rng: &mut ChaCha8Rng| {
        let mut ls = vec!["get", "put", "stop", "l"];
        ls.shuffle(rng);
        ls.truncate(rng.gen_range(1..=3));
        ls
    };
    match rng.gen_range(0..8) {
        0 => SessionType::send(vt(rng), session_type(rng, depth - 1, vars)),
        1 => SessionType::recv(vt(rng), session_type(rng, depth - 1, vars)),
        2 => {
            let payload = session_type(rng, depth - 1, &mut Vec::new());
            SessionType::send_chan(payload, session_type(rng, depth - 1, vars))
        }
        3 => {
            let payload = session_type(rng, depth - 1, &mut Vec::new());
            SessionType::recv_chan(payload, session_type(rng, depth - 1, vars))
        }
        4 => {
            let arms: Vec<_> = labels(rng).into_iter().map(|l| (l, session_type(rng, depth - 1, vars))).collect();
            SessionType::select(arms)
        }
        5 => {
            let arms: Vec<_> = labels(rng).into_iter().map(|l| (l, session_type(rng, depth - 1, vars))).collect();
            SessionType::branch(arms)
        }
        6 if depth > 2 => {
            // a guard keeps the body contractive
            let v = format!("a{}", vars.len());
            vars.push(v.clone());
            let body = session_type(rng, depth - 2, vars);
            vars.pop();
            SessionType::mu(v, SessionType::send(vt(rng), body))
        }
        _ => SessionType::End,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effcalc::{infer, TypeEnv};

    #[test]
    fn everything_generated_type_checks() {
        let progs = corpus(7, 200, 5);
        assert_eq!(progs.len(), 200);
        for p in &progs {
            assert!(p.root.depth() <= 5, "{}", p.root);
            infer(&TypeEnv::new(), ValueType::Nat, &p.root).unwrap_or_else(|e| panic!("{}: {e}", p.root));
        }
        assert!(progs.iter().any(|p| !infer(&TypeEnv::new(), ValueType::Nat, &p.root).unwrap().1.is_pure()));
    }

    #[test]
    fn pure_terms_are_pure() {
        for t in pure_terms(3, 30, 4) {
            assert!(infer(&TypeEnv::new(), ValueType::Nat, &t).unwrap().1.is_pure(), "{t}");
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        assert_eq!(corpus(11, 20, 5), corpus(11, 20, 5));
    }

    #[test]
    fn session_types_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = session_type(&mut rng, 5, &mut Vec::new());
            assert!(s.depth() <= 5, "{s}");
            s.validate().unwrap_or_else(|e| panic!("{s}: {e}"));
        }
    }
}
