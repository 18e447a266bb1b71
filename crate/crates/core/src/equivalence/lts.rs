//! Finite labelled transition systems over canonical configurations.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::semantics::{transitions, Configuration, RuntimeError, TransitionLabel, DEFAULT_STATE_CAP};
use crate::sesscalc::{Process, Value};

pub const DEFAULT_LTS_FUEL: usize = 10_000;

pub fn default_value_domain() -> Vec<Value> {
    vec![Value::Nat(0), Value::Nat(1)]
}

#[derive(Debug, Clone)]
pub struct LtsOptions {
    /// Channels whose actions stay visible; everything else becomes τ.
    pub observables: BTreeSet<String>,
    /// Values the environment may send on a free input.
    pub value_domain: Vec<Value>,
    /// Exploration depth bound.
    pub fuel: usize,
    /// Maximum number of states.
    pub cap: usize,
}

impl LtsOptions {
    pub fn observing<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LtsOptions {
            observables: names.into_iter().map(Into::into).collect(),
            value_domain: default_value_domain(),
            fuel: DEFAULT_LTS_FUEL,
            cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("more than {cap} states")]
    StateCapExceeded { cap: usize },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Debug, Clone)]
pub struct Lts {
    pub states: Vec<Configuration>,
    /// Outgoing edges per state, sorted and without duplicates.
    pub edges: Vec<Vec<(TransitionLabel, usize)>>,
    pub initial: usize,
    pub observables: BTreeSet<String>,
    /// Set when the depth bound stopped exploration with states left to expand.
    pub partial: bool,
}

impl Lts {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Visible label sequences along maximal paths, τ dropped. Gives up
    /// (returns `None`) on cycles or past `limit` sequences.
    pub fn maximal_traces(&self, limit: usize) -> Option<BTreeSet<Vec<TransitionLabel>>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![(self.initial, Vec::new(), vec![self.initial])];
        while let Some((s, trace, path)) = stack.pop() {
            if self.edges[s].is_empty() {
                out.insert(trace);
                if out.len() > limit {
                    return None;
                }
                continue;
            }
            for (l, t) in &self.edges[s] {
                if path.contains(t) {
                    return None;
                }
                let mut tr = trace.clone();
                if !l.is_tau() {
                    tr.push(l.clone());
                }
                let mut p = path.clone();
                p.push(*t);
                stack.push((*t, tr, p));
            }
        }
        Some(out)
    }
}

/// Breadth-first closure of `p` under its transitions.
pub fn build_lts(p: &Process, opts: &LtsOptions) -> Result<Lts, LtsError> {
    let start = Configuration::from_process(p);
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    let mut depth = vec![0usize];
    let mut edges: Vec<Vec<(TransitionLabel, usize)>> = vec![Vec::new()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut partial = false;

    while let Some(s) = queue.pop_front() {
        let steps = transitions(&states[s], &opts.value_domain)?;
        if depth[s] >= opts.fuel {
            partial |= !steps.is_empty();
            continue;
        }
        let mut out = BTreeSet::new();
        for (label, next) in steps {
            let label = label.hide(&opts.observables);
            let t = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= opts.cap {
                        return Err(LtsError::StateCapExceeded { cap: opts.cap });
                    }
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    depth.push(depth[s] + 1);
                    edges.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            out.insert((label, t));
        }
        edges[s] = out.into_iter().collect();
    }

    Ok(Lts {
        states,
        edges,
        initial: 0,
        observables: opts.observables.clone(),
        partial,
    })
}
