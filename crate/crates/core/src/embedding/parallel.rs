//! Parallel forms: the ill-typed naive encoding of `M | N`, and the
//! optimizer that runs a pure let-bound term beside its neighbour.

use crate::effcalc::{infer, Program, Term, TypeEnv, ValueType};
use crate::sesscalc::{Endpoint, Process, Value};

use super::names::ChannelNameSupply;
use super::terms::{top_delta, EmbedError, Embedder, EmbeddingResult};

/// `new q1, q2. (⟦m⟧^eff_q1 | ⟦n⟧^eff_q2 | ~q1?(x). ~q2?(y). r!<(x, y)>)`.
/// Both halves use `eff`, which the session checker refuses.
pub fn naive_parallel_encode(m: &Term, n: &Term, eff: &Endpoint, r: &Endpoint) -> Result<Process, EmbedError> {
    let mut names = ChannelNameSupply::new(m.identifiers().into_iter().chain(n.identifiers()));
    names.reserve(&eff.name);
    names.reserve(&r.name);
    let mut em = Embedder::new(names);
    let q1 = em.names.fresh("q1");
    let q2 = em.names.fresh("q2");
    let left = em.top(m, eff, &Endpoint::plain(&q1))?;
    let right = em.top(n, eff, &Endpoint::plain(&q2))?;
    let x = em.names.fresh("x");
    let y = em.names.fresh("y");
    let join = Process::recv(
        Endpoint::co(&q1),
        &x,
        Process::recv(
            Endpoint::co(&q2),
            &y,
            Process::send(r.clone(), Value::pair(Value::var(&x), Value::var(&y)), Process::Nil),
        ),
    );
    Ok(Process::new_chans([q1, q2], Process::par_all([left, right, join])))
}

/// A let pair whose pure half can run beside the other.
struct Commuting<'a> {
    x: &'a str,
    m: &'a Term,
    y: &'a str,
    n: &'a Term,
    p: &'a Term,
}

fn commuting<'a>(t: &'a Term, env: &TypeEnv, store_type: ValueType) -> Result<Option<Commuting<'a>>, EmbedError> {
    let Term::Let(a, t1, rest) = t else {
        return Ok(None);
    };
    let Term::Let(b, t2, p) = &**rest else {
        return Ok(None);
    };
    let (_, f1) = infer(env, store_type, t1)?;
    // let x = M in let y = N in P, M pure
    if f1.is_pure() && !t2.free_vars().contains(a) {
        return Ok(Some(Commuting { x: a, m: t1, y: b, n: t2, p }));
    }
    // let y = N in let x = M in P, M pure and independent of y
    if a != b && !t2.free_vars().contains(a) {
        let (_, f2) = infer(env, store_type, t2)?;
        if f2.is_pure() {
            return Ok(Some(Commuting { x: b, m: t2, y: a, n: t1, p }));
        }
    }
    Ok(None)
}

impl Embedder {
    /// The intermediate embedding with every commuting let pair replaced by
    /// `new q, s, ea. (⟦M⟧_q | ⟦N⟧^{ei,ea}_s | ~q?(x). ~s?(y). ⟦P⟧^{ea,eo}_r)`.
    pub fn optimized(
        &mut self,
        t: &Term,
        env: &TypeEnv,
        store_type: ValueType,
        ei: &Endpoint,
        eo: &Endpoint,
        r: &Endpoint,
    ) -> Result<Process, EmbedError> {
        if let Some(c) = commuting(t, env, store_type)? {
            let (sx, _) = infer(env, store_type, c.m)?;
            let (sy, _) = infer(env, store_type, c.n)?;
            let q = self.names.fresh("q");
            let s = self.names.fresh("s");
            let ea = self.names.fresh("ea");
            let ea_e = Endpoint::plain(&ea);
            let m = self.pure(c.m, &Endpoint::plain(&q), Process::Nil)?;
            let n = self.optimized(c.n, env, store_type, ei, &ea_e, &Endpoint::plain(&s))?;
            let inner = env.extended(c.x, sx).extended(c.y, sy);
            let p = self.optimized(c.p, &inner, store_type, &ea_e, eo, r)?;
            let join = Process::recv(Endpoint::co(&q), c.x, Process::recv(Endpoint::co(&s), c.y, p));
            return Ok(Process::new_chans([q, s, ea], Process::par_all([m, n, join])));
        }
        match t {
            Term::Let(x, m, n) => {
                let (sx, _) = infer(env, store_type, m)?;
                let q = self.names.fresh("q");
                let ea = self.names.fresh("ea");
                let left = self.optimized(m, env, store_type, ei, &Endpoint::plain(&ea), &Endpoint::plain(&q))?;
                let right = self.optimized(n, &env.extended(x, sx), store_type, &Endpoint::plain(&ea), eo, r)?;
                Ok(Process::new_chans(
                    [q.clone(), ea],
                    Process::par(left, Process::recv(Endpoint::co(&q), x, right)),
                ))
            }
            _ => self.intermediate(t, ei, eo, r),
        }
    }
}

pub fn optimize_commuting(
    t: &Term,
    env: &TypeEnv,
    store_type: ValueType,
    ei: &Endpoint,
    eo: &Endpoint,
    r: &Endpoint,
) -> Result<Process, EmbedError> {
    infer(env, store_type, t)?;
    Embedder::for_term(t, &[ei, eo, r]).optimized(t, env, store_type, ei, eo, r)
}

/// [`super::embed_top`] with the optimizer in place of the plain
/// intermediate embedding.
pub fn embed_top_optimized(prog: &Program, eff: &Endpoint, r: &Endpoint) -> Result<EmbeddingResult, EmbedError> {
    let env = TypeEnv::new();
    let (ty, effect) = infer(&env, prog.store_type, &prog.root)?;
    let mut em = Embedder::for_term(&prog.root, &[eff, r]);
    let process = em.top_with(eff, |_| Process::Nil, |me, ei, eo| {
        me.optimized(&prog.root, &env, prog.store_type, ei, eo, r)
    })?;
    Ok(EmbeddingResult {
        delta: top_delta(eff, r, ty, &effect),
        process,
        ty,
        effect,
    })
}

/// Strips leading restrictions and flattens the parallel composition
/// underneath: (restricted names, components).
pub fn parallel_components(p: &Process) -> (Vec<String>, Vec<Process>) {
    let mut names = Vec::new();
    let mut cur = p;
    while let Process::New(c, body) = cur {
        names.push(c.clone());
        cur = body;
    }
    (names, cur.par_components().into_iter().cloned().collect())
}
