//! Closed-world execution: internal steps plus outputs on a result channel.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::sesscalc::{Endpoint, Process, Value};

use super::config::Configuration;
use super::step::{transitions, RuntimeError, TransitionLabel};

pub const DEFAULT_FUEL: usize = 10_000;
pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Follow one path, resolving choices with a seeded generator.
    One { seed: u64 },
    /// Explore every interleaving.
    All,
}

/// Reads a store's current value out of a configuration.
pub type StoreHook = fn(&Configuration) -> Option<Value>;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub schedule: Schedule,
    pub fuel: usize,
    pub state_cap: usize,
    pub result: Endpoint,
    pub store: Option<StoreHook>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            schedule: Schedule::One { seed: 0 },
            fuel: DEFAULT_FUEL,
            state_cap: DEFAULT_STATE_CAP,
            result: Endpoint::plain("r"),
            store: Some(store_value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    #[serde(serialize_with = "display_values")]
    pub result_values: Vec<Value>,
    #[serde(serialize_with = "display_option")]
    pub store: Option<Value>,
    pub residual_hash: String,
    #[serde(serialize_with = "display_process")]
    pub residual: Process,
    pub steps: usize,
}

fn display_values<S: serde::Serializer>(vs: &[Value], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(vs.iter().map(|v| v.to_string()))
}

fn display_option<S: serde::Serializer>(v: &Option<Value>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

fn display_process<S: serde::Serializer>(p: &Process, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("fuel exhausted after {fuel} steps ({} outcomes reached before that)", partial.len())]
    FuelExhausted { fuel: usize, partial: Vec<Outcome> },
    #[error("more than {cap} distinct configurations")]
    StateCapExceeded { cap: usize },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// The value held by a store agent: the `get` arm of a waiting
/// `c >> {get: c!<v>. ...}`, possibly behind `accept k(c)`.
pub fn store_value(cfg: &Configuration) -> Option<Value> {
    fn from_branch(p: &Process) -> Option<Value> {
        match p {
            Process::Branch(_, arms) => match arms.get("get") {
                Some(Process::Send(_, v, _)) => Some(v.clone()),
                _ => None,
            },
            Process::Accept(_, _, body) => from_branch(body),
            _ => None,
        }
    }
    cfg.threads.iter().find_map(from_branch)
}

/// Steps a closed run may take: τ and outputs on the result channel.
fn moves(
    cfg: &Configuration,
    result: &Endpoint,
) -> Result<Vec<(Option<Value>, Configuration)>, RuntimeError> {
    let mut out = Vec::new();
    for (l, next) in transitions(cfg, &[])? {
        match l {
            TransitionLabel::Tau | TransitionLabel::SharedInit(_) => out.push((None, next)),
            TransitionLabel::OutVal(e, v) if e == *result => out.push((Some(v), next)),
            _ => {}
        }
    }
    Ok(out)
}

fn outcome(cfg: &Configuration, values: Vec<Value>, steps: usize, hook: Option<StoreHook>) -> Outcome {
    Outcome {
        result_values: values,
        store: hook.and_then(|h| h(cfg)),
        residual_hash: cfg.hash(),
        residual: cfg.to_process(),
        steps,
    }
}

/// Runs `p` to quiescence. Outcomes come back sorted and deduplicated.
pub fn run(p: &Process, opts: &RunOptions) -> Result<Vec<Outcome>, RunError> {
    let start = Configuration::from_process(p);
    match opts.schedule {
        Schedule::One { seed } => run_one(start, seed, opts).map(|o| vec![o]),
        Schedule::All => run_all(start, opts),
    }
}

fn run_one(start: Configuration, seed: u64, opts: &RunOptions) -> Result<Outcome, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = start;
    let mut values = Vec::new();
    for steps in 0..=opts.fuel {
        let ms = moves(&cfg, &opts.result)?;
        let Some((v, next)) = ms.choose(&mut rng).cloned() else {
            return Ok(outcome(&cfg, values, steps, opts.store));
        };
        values.extend(v);
        cfg = next;
    }
    Err(RunError::FuelExhausted {
        fuel: opts.fuel,
        partial: vec![outcome(&cfg, values, opts.fuel, opts.store)],
    })
}

type State = (Configuration, Vec<Value>);

fn run_all(start: Configuration, opts: &RunOptions) -> Result<Vec<Outcome>, RunError> {
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let init = (start, Vec::new());
    index.insert(init.clone(), 0);
    states.push(init);
    depth.push(0);
    succ.push(Vec::new());
    queue.push_back(0);
    let mut finals = BTreeSet::new();

    while let Some(s) = queue.pop_front() {
        let (cfg, values) = states[s].clone();
        let ms = moves(&cfg, &opts.result)?;
        if ms.is_empty() {
            finals.insert(s);
            continue;
        }
        for (v, next) in ms {
            let mut vs = values.clone();
            vs.extend(v);
            let key = (next, vs);
            let t = match index.get(&key) {
                Some(&t) => t,
                None => {
                    if states.len() >= opts.state_cap {
                        return Err(RunError::StateCapExceeded { cap: opts.state_cap });
                    }
                    let t = states.len();
                    index.insert(key.clone(), t);
                    states.push(key);
                    depth.push(depth[s] + 1);
                    succ.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            succ[s].push(t);
        }
    }

    let outcomes = || -> Vec<Outcome> {
        let set: BTreeSet<Outcome> = finals
            .iter()
            .map(|&s| outcome(&states[s].0, states[s].1.clone(), depth[s], opts.store))
            .collect();
        set.into_iter().collect()
    };
    match longest_path(&succ) {
        Some(len) if len <= opts.fuel => Ok(outcomes()),
        _ => Err(RunError::FuelExhausted {
            fuel: opts.fuel,
            partial: outcomes(),
        }),
    }
}

/// Length of the longest path from state 0, or `None` when a cycle is
/// reachable (some schedule never stops).
fn longest_path(succ: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; succ.len()];
    let mut best = vec![0usize; succ.len()];
    // Iterative post-order DFS.
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    mark[0] = Mark::Open;
    while let Some(top) = stack.last_mut() {
        let s = top.0;
        if top.1 < succ[s].len() {
            let t = succ[s][top.1];
            top.1 += 1;
            match mark[t] {
                Mark::Open => return None,
                Mark::New => {
                    mark[t] = Mark::Open;
                    stack.push((t, 0));
                }
                Mark::Done => {}
            }
        } else {
            best[s] = succ[s].iter().map(|&t| best[t] + 1).max().unwrap_or(0);
            mark[s] = Mark::Done;
            stack.pop();
        }
    }
    Some(best[0])
}

/// Outcome values grouped for reporting: result sequences to stores.
pub fn summarize(outcomes: &[Outcome]) -> BTreeMap<Vec<String>, BTreeSet<String>> {
    let mut m: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
    for o in outcomes {
        m.entry(o.result_values.iter().map(|v| v.to_string()).collect())
            .or_default()
            .insert(o.store.as_ref().map(|v| v.to_string()).unwrap_or_else(|| "-".into()));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sesscalc::parse_process;

    fn all(src: &str) -> Result<Vec<Outcome>, RunError> {
        run(
            &parse_process(src).unwrap(),
            &RunOptions {
                schedule: Schedule::All,
                ..RunOptions::default()
            },
        )
    }

    const STORE: &str = "def Store(x: nat; c: mu a. &{get: ![nat]. a, put: ?[nat]. a, stop: end}) = \
                         c >> {get: c!<x>.Store<x; c>, put: c?(y).Store<y; c>, stop: 0} in Store<0; ~eff>";

    #[test]
    fn increment_leaves_store_at_one() {
        let client = "eff <+ get.eff?(x).eff <+ put.eff!<suc x>.r!<unit>";
        let os = all(&format!("new eff. ({client} | {STORE})")).unwrap();
        assert_eq!(os.len(), 1);
        assert_eq!(os[0].result_values, vec![Value::Unit]);
        assert_eq!(os[0].store, Some(Value::Nat(1)));
        // the single schedule agrees
        let one = run(&parse_process(&format!("new eff. ({client} | {STORE})")).unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(one[0].store, Some(Value::Nat(1)));
    }

    #[test]
    fn races_give_every_interleaving() {
        let store = "def S(x: nat;) = accept k(c).c >> {get: c!<x>.S<x;>, put: c?(y).S<y;>} in S<0;>";
        let client = |n: &str| format!("request k(c).~c <+ get.~c?(x).request k(d).~d <+ put.~d!<{n}>.0");
        let src = format!("({store} | {} | {})", client("suc suc x"), client("suc x"));
        let stores: BTreeSet<Value> = all(&src).unwrap().into_iter().filter_map(|o| o.store).collect();
        assert_eq!(stores, BTreeSet::from([Value::Nat(1), Value::Nat(2), Value::Nat(3)]));
    }

    #[test]
    fn infinite_loop_exhausts_fuel() {
        let p = parse_process("def X(; c: end) = X<; c> in X<; c>").unwrap();
        let opts = RunOptions {
            fuel: 10,
            ..RunOptions::default()
        };
        assert!(matches!(run(&p, &opts), Err(RunError::FuelExhausted { .. })));
        let all = RunOptions {
            schedule: Schedule::All,
            ..opts
        };
        assert!(matches!(run(&p, &all), Err(RunError::FuelExhausted { .. })));
    }

    #[test]
    fn safety_violation_is_reported() {
        assert!(matches!(all("new c. (c!<1> | ~c!<2>)"), Err(RunError::Runtime(_))));
    }

    #[test]
    fn state_cap() {
        let opts = RunOptions {
            schedule: Schedule::All,
            state_cap: 2,
            ..RunOptions::default()
        };
        let p = parse_process("new a, b. (a!<1> | ~a?(x).0 | b!<1> | ~b?(y).0)").unwrap();
        assert_eq!(run(&p, &opts), Err(RunError::StateCapExceeded { cap: 2 }));
    }
}
