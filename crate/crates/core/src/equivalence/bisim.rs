//! Bisimilarity by partition refinement, with a distinguishing
//! observation sequence when the answer is no.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::semantics::TransitionLabel;

use super::lts::Lts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// A sequence both processes can follow up to its last label, which only
/// `last_by` can take from the states reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinction {
    pub trace: Vec<TransitionLabel>,
    pub last_by: Side,
}

impl fmt::Display for Distinction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ls: Vec<String> = self.trace.iter().map(|l| l.to_string()).collect();
        write!(f, "{} (last step: {} only)", ls.join(", "), self.last_by)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Bisimilar,
    NotBisimilar(Distinction),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Bisimilar)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("the {0} LTS is partial (exploration hit its depth bound)")]
    PartialLts(Side),
}

const TAU: usize = 0;

/// Both systems in one state space, moves already saturated as needed.
struct Game {
    labels: Vec<TransitionLabel>,
    /// Per state: sorted (label, target) moves.
    moves: Vec<Vec<(usize, usize)>>,
    a_init: usize,
    b_init: usize,
}

impl Game {
    fn new(a: &Lts, b: &Lts, weak: bool) -> Game {
        let mut labels = vec![TransitionLabel::Tau];
        let mut ids: HashMap<TransitionLabel, usize> = HashMap::from([(TransitionLabel::Tau, TAU)]);
        let off = a.len();
        let mut edges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(a.len() + b.len());
        for (lts, shift) in [(a, 0), (b, off)] {
            for out in &lts.edges {
                let row = out
                    .iter()
                    .map(|(l, t)| {
                        let id = *ids.entry(l.clone()).or_insert_with(|| {
                            labels.push(l.clone());
                            labels.len() - 1
                        });
                        (id, t + shift)
                    })
                    .collect();
                edges.push(row);
            }
        }
        let moves = if weak { saturate(&edges) } else { edges };
        Game {
            labels,
            moves,
            a_init: a.initial,
            b_init: b.initial + off,
        }
    }
}

/// Weak moves: `s =τ=> t` for every τ*-reachable `t` (including `s`),
/// and `s =a=> t` along τ* a τ*.
fn saturate(edges: &[Vec<(usize, usize)>]) -> Vec<Vec<(usize, usize)>> {
    let n = edges.len();
    let closure: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(l, t) in &edges[u] {
                    if l == TAU && seen.insert(t) {
                        stack.push(t);
                    }
                }
            }
            seen.into_iter().collect()
        })
        .collect();
    (0..n)
        .map(|s| {
            let mut out: BTreeSet<(usize, usize)> = closure[s].iter().map(|&t| (TAU, t)).collect();
            for &u in &closure[s] {
                for &(l, t) in &edges[u] {
                    if l != TAU {
                        out.extend(closure[t].iter().map(|&v| (l, v)));
                    }
                }
            }
            out.into_iter().collect()
        })
        .collect()
}

/// Successive partitions, coarsest first, until stable.
fn refine(moves: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let n = moves.len();
    let mut levels = vec![vec![0usize; n]];
    loop {
        let cur = levels.last().expect("nonempty");
        let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let next: Vec<usize> = (0..n)
            .map(|s| {
                let mut sig: Vec<(usize, usize)> = moves[s].iter().map(|&(l, t)| (l, cur[t])).collect();
                sig.sort_unstable();
                sig.dedup();
                let k = ids.len();
                *ids.entry((cur[s], sig)).or_insert(k)
            })
            .collect();
        let before = cur.iter().collect::<BTreeSet<_>>().len();
        let stable = ids.len() == before;
        levels.push(next);
        if stable {
            return levels;
        }
    }
}

fn first_split(levels: &[Vec<usize>], s: usize, t: usize) -> Option<usize> {
    levels.iter().position(|l| l[s] != l[t])
}

/// Builds the observation sequence separating `s` and `t`, which first
/// fall into different blocks at `level`.
fn explain(game: &Game, levels: &[Vec<usize>], s: usize, t: usize, side_of_s: Side, out: &mut Vec<TransitionLabel>) -> Side {
    let level = first_split(levels, s, t).expect("states are split");
    let prev = &levels[level - 1];
    let other = |side: Side| match side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    for (lead, follow, side) in [(s, t, side_of_s), (t, s, other(side_of_s))] {
        for &(l, lead_next) in &game.moves[lead] {
            let answers: Vec<usize> = game.moves[follow]
                .iter()
                .filter(|&&(m, _)| m == l)
                .map(|&(_, f)| f)
                .collect();
            if answers.iter().any(|&f| prev[f] == prev[lead_next]) {
                continue;
            }
            out.push(game.labels[l].clone());
            // The follower's strongest reply: the one split latest.
            let Some(&reply) = answers
                .iter()
                .max_by_key(|&&f| first_split(levels, lead_next, f).unwrap_or(usize::MAX))
            else {
                return side;
            };
            return explain(game, levels, lead_next, reply, side, out);
        }
    }
    unreachable!("a split always has a witnessing move")
}

fn decide(a: &Lts, b: &Lts, weak: bool) -> Result<Verdict, BisimError> {
    if a.partial {
        return Err(BisimError::PartialLts(Side::Left));
    }
    if b.partial {
        return Err(BisimError::PartialLts(Side::Right));
    }
    let game = Game::new(a, b, weak);
    let levels = refine(&game.moves);
    if first_split(&levels, game.a_init, game.b_init).is_none() {
        return Ok(Verdict::Bisimilar);
    }
    let mut trace = Vec::new();
    let last_by = explain(&game, &levels, game.a_init, game.b_init, Side::Left, &mut trace);
    Ok(Verdict::NotBisimilar(Distinction { trace, last_by }))
}

pub fn weak_bisimilar(a: &Lts, b: &Lts) -> Result<Verdict, BisimError> {
    decide(a, b, true)
}

/// τ counts as an ordinary label.
pub fn strong_bisimilar(a: &Lts, b: &Lts) -> Result<Verdict, BisimError> {
    decide(a, b, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::lts::{build_lts, LtsOptions};
    use crate::sesscalc::parse_process;

    fn lts(src: &str) -> Lts {
        build_lts(&parse_process(src).unwrap(), &LtsOptions::observing(["a", "b", "r"])).unwrap()
    }

    #[test]
    fn reflexive() {
        let p = lts("a!<1>. (b!<0> | r!<1>)");
        assert!(weak_bisimilar(&p, &p).unwrap().holds());
        assert!(strong_bisimilar(&p, &p).unwrap().holds());
    }

    #[test]
    fn internal_steps_are_invisible_weakly_only() {
        let p = lts("a!<1>");
        let q = lts("new h. (h!<0> | ~h?(x). a!<1>)");
        assert!(weak_bisimilar(&p, &q).unwrap().holds());
        assert!(!strong_bisimilar(&p, &q).unwrap().holds());
    }

    #[test]
    fn different_outputs_give_a_trace() {
        let p = lts("a!<1>. r!<0>");
        let q = lts("a!<1>. r!<1>");
        let Verdict::NotBisimilar(d) = weak_bisimilar(&p, &q).unwrap() else {
            panic!("should differ");
        };
        let ls: Vec<String> = d.trace.iter().map(|l| l.to_string()).collect();
        assert_eq!(ls, vec!["a!<1>", "r!<0>"]);
        assert_eq!(d.last_by, Side::Left);
    }

    #[test]
    fn when_the_choice_is_made_matters() {
        let late = lts("a!<0>. new h. (h!<0> | ~h?(v). b!<0> | ~h?(w). r!<0>)");
        let early = lts("new h. (h!<0> | ~h?(v). a!<0>. b!<0> | ~h?(w). a!<0>. r!<0>)");
        // same traces
        assert_eq!(late.maximal_traces(10), early.maximal_traces(10));
        let Verdict::NotBisimilar(d) = weak_bisimilar(&late, &early).unwrap() else {
            panic!("should differ");
        };
        assert!(!d.trace.is_empty());
        assert!(!weak_bisimilar(&early, &late).unwrap().holds());
    }

    #[test]
    fn partial_input_is_an_error() {
        let p = build_lts(
            &parse_process("r!<1>. r!<2>").unwrap(),
            &LtsOptions { fuel: 1, ..LtsOptions::observing(["r"]) },
        )
        .unwrap();
        assert_eq!(weak_bisimilar(&p, &p).unwrap_err(), BisimError::PartialLts(Side::Left));
    }
}
