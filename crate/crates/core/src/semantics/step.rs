//! Early labelled transitions between configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sesscalc::{Def, Endpoint, Process, Value};

use super::config::Configuration;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionLabel {
    Tau,
    OutVal(Endpoint, Value),
    InVal(Endpoint, Value),
    /// Output of a channel. Restricted channels are extruded under a
    /// fresh `$n` name.
    OutChan(Endpoint, Endpoint),
    /// Input of a fresh `$n` channel from the environment.
    InChan(Endpoint, String),
    SelectL(Endpoint, String),
    OfferL(Endpoint, String),
    SharedInit(String),
}

impl TransitionLabel {
    pub fn is_tau(&self) -> bool {
        matches!(self, TransitionLabel::Tau)
    }

    /// The channel the action happens on, if visible.
    pub fn subject(&self) -> Option<&str> {
        match self {
            TransitionLabel::Tau => None,
            TransitionLabel::OutVal(e, _)
            | TransitionLabel::InVal(e, _)
            | TransitionLabel::OutChan(e, _)
            | TransitionLabel::InChan(e, _)
            | TransitionLabel::SelectL(e, _)
            | TransitionLabel::OfferL(e, _) => Some(&e.name),
            TransitionLabel::SharedInit(k) => Some(k),
        }
    }

    /// Turns actions on channels outside `observables` into τ. Names the
    /// environment created (`$n`) stay visible.
    pub fn hide(self, observables: &BTreeSet<String>) -> TransitionLabel {
        match self.subject() {
            Some(n) if !observables.contains(n) && !is_extern(n) => TransitionLabel::Tau,
            _ => self,
        }
    }
}

/// Names of the form `$n` stand for channels exchanged with the
/// environment.
pub fn is_extern(name: &str) -> bool {
    name.strip_prefix('$').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Tau => f.write_str("tau"),
            TransitionLabel::OutVal(e, v) => write!(f, "{e}!<{v}>"),
            TransitionLabel::InVal(e, v) => write!(f, "{e}?({v})"),
            TransitionLabel::OutChan(e, d) => write!(f, "{e}![{d}]"),
            TransitionLabel::InChan(e, d) => write!(f, "{e}?[{d}]"),
            TransitionLabel::SelectL(e, l) => write!(f, "{e}<+{l}"),
            TransitionLabel::OfferL(e, l) => write!(f, "{e}>>{l}"),
            TransitionLabel::SharedInit(k) => write!(f, "init {k}"),
        }
    }
}

impl Serialize for TransitionLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("runtime safety violation on `{channel}`: `{left}` meets `{right}`")]
    SafetyViolation {
        channel: String,
        left: String,
        right: String,
    },
    #[error("call to undefined process `{0}`")]
    UndefinedProcess(String),
    #[error("`{def}` called with {found} arguments, expects {expected}")]
    CallArity { def: String, expected: usize, found: usize },
}

/// The channel a thread is about to act on.
fn head(p: &Process) -> Option<&Endpoint> {
    match p {
        Process::Recv(c, _, _)
        | Process::Send(c, _, _)
        | Process::RecvChan(c, _, _)
        | Process::SendChan(c, _, _)
        | Process::Select(c, _, _)
        | Process::Branch(c, _) => Some(c),
        _ => None,
    }
}

fn head_text(p: &Process) -> String {
    match p {
        Process::Recv(c, x, _) => format!("{c}?({x})"),
        Process::Send(c, v, _) => format!("{c}!<{v}>"),
        Process::RecvChan(c, d, _) => format!("{c}?[{d}]"),
        Process::SendChan(c, d, _) => format!("{c}![{d}]"),
        Process::Select(c, l, _) => format!("{c} <+ {l}"),
        Process::Branch(c, arms) => {
            let ls: Vec<&str> = arms.keys().map(|s| s.as_str()).collect();
            format!("{c} >> {{{}}}", ls.join(", "))
        }
        other => other.to_string(),
    }
}

fn assemble(restricted: &[String], defs: &BTreeMap<String, Def>, threads: Vec<Process>) -> Configuration {
    let mut p = Process::par_all(threads);
    for d in defs.values().rev() {
        p = Process::def(d.clone(), p);
    }
    Configuration::from_process(&Process::new_chans(restricted.iter().cloned(), p))
}

/// Replaces threads `i` (and `j`) by the given continuations.
fn replace(cfg: &Configuration, edits: &[(usize, Process)]) -> Vec<Process> {
    let mut ts = cfg.threads.clone();
    for (i, p) in edits {
        ts[*i] = p.clone();
    }
    ts
}

/// Lowest `$n` not free anywhere in `names`.
fn fresh_extern(names: &BTreeSet<String>) -> String {
    (0..)
        .map(|k| format!("${k}"))
        .find(|n| !names.contains(n))
        .expect("unbounded supply")
}

fn synchronize(a: &Process, b: &Process) -> Result<(Process, Process), ()> {
    match (a, b) {
        (Process::Send(_, v, k), Process::Recv(_, x, l)) => Ok(((**k).clone(), l.subst_value(x, v))),
        (Process::SendChan(_, d, k), Process::RecvChan(_, y, l)) => {
            Ok(((**k).clone(), l.subst_endpoint(y, d)))
        }
        (Process::Select(_, lab, k), Process::Branch(_, arms)) => match arms.get(lab) {
            Some(p) => Ok(((**k).clone(), p.clone())),
            None => Err(()),
        },
        _ => match (b, a) {
            (Process::Send(..), Process::Recv(..))
            | (Process::SendChan(..), Process::RecvChan(..))
            | (Process::Select(..), Process::Branch(..)) => synchronize(b, a).map(|(q, p)| (p, q)),
            _ => Err(()),
        },
    }
}

/// Instantiates a definition at a call site.
pub fn unfold_call(
    defs: &BTreeMap<String, Def>,
    x: &str,
    vs: &[Value],
    cs: &[Endpoint],
) -> Result<Process, RuntimeError> {
    let d = defs.get(x).ok_or_else(|| RuntimeError::UndefinedProcess(x.to_string()))?;
    if d.value_params.len() != vs.len() || d.chan_params.len() != cs.len() {
        return Err(RuntimeError::CallArity {
            def: x.to_string(),
            expected: d.value_params.len() + d.chan_params.len(),
            found: vs.len() + cs.len(),
        });
    }
    // Two phases, so an argument never meets a later parameter's name.
    let mut body = d.body.clone();
    for (i, (p, _)) in d.value_params.iter().enumerate() {
        body = body.subst_value(p, &Value::var(format!("%%a{i}")));
    }
    for (i, (c, _)) in d.chan_params.iter().enumerate() {
        body = body.subst_endpoint(c, &Endpoint::plain(format!("%%b{i}")));
    }
    for (i, v) in vs.iter().enumerate() {
        body = body.subst_value(&format!("%%a{i}"), v);
    }
    for (i, c) in cs.iter().enumerate() {
        body = body.subst_endpoint(&format!("%%b{i}"), c);
    }
    Ok(body)
}

/// Every one-step transition of `cfg`. Labels are not hidden; see
/// [`TransitionLabel::hide`].
///
/// Two threads whose heads sit on opposite endpoints of one channel
/// synchronize with τ. An action on a free endpoint `e` is visible only
/// when `~e` does not occur free in the configuration, since otherwise the
/// partner owns that session.
pub fn transitions(
    cfg: &Configuration,
    value_domain: &[Value],
) -> Result<Vec<(TransitionLabel, Configuration)>, RuntimeError> {
    let mut out = Vec::new();
    let ts = &cfg.threads;
    let n = ts.len();

    for i in 0..n {
        for j in (i + 1)..n {
            let (Some(a), Some(b)) = (head(&ts[i]), head(&ts[j])) else {
                continue;
            };
            if a.name != b.name || a.dual == b.dual {
                continue;
            }
            let (p, q) = synchronize(&ts[i], &ts[j]).map_err(|_| RuntimeError::SafetyViolation {
                channel: a.name.clone(),
                left: head_text(&ts[i]),
                right: head_text(&ts[j]),
            })?;
            out.push((
                TransitionLabel::Tau,
                assemble(&cfg.restricted, &cfg.defs, replace(cfg, &[(i, p), (j, q)])),
            ));
        }
    }

    for (i, t) in ts.iter().enumerate() {
        match t {
            Process::Call(x, vs, cs) => {
                let body = unfold_call(&cfg.defs, x, vs, cs)?;
                out.push((
                    TransitionLabel::Tau,
                    assemble(&cfg.restricted, &cfg.defs, replace(cfg, &[(i, body)])),
                ));
            }
            Process::Accept(k, c, p) => {
                for (j, other) in ts.iter().enumerate() {
                    let Process::Request(k2, d, q) = other else {
                        continue;
                    };
                    if k2 != k {
                        continue;
                    }
                    let fresh = "%%s".to_string();
                    let p2 = p.subst_endpoint(c, &Endpoint::plain(&fresh));
                    let q2 = q.subst_endpoint(d, &Endpoint::plain(&fresh));
                    let mut restricted = cfg.restricted.clone();
                    restricted.push(fresh);
                    out.push((
                        TransitionLabel::SharedInit(k.clone()),
                        assemble(&restricted, &cfg.defs, replace(cfg, &[(i, p2), (j, q2)])),
                    ));
                }
            }
            _ => {}
        }
    }

    let free = cfg.free_endpoints();
    let free_names: BTreeSet<String> = cfg.to_process().all_names();
    for (i, t) in ts.iter().enumerate() {
        let Some(e) = head(t) else { continue };
        if cfg.is_restricted(&e.name) || free.contains(&e.flip()) {
            continue;
        }
        let step = |p: Process| assemble(&cfg.restricted, &cfg.defs, replace(cfg, &[(i, p)]));
        match t {
            Process::Send(_, v, k) => out.push((TransitionLabel::OutVal(e.clone(), v.clone()), step((**k).clone()))),
            Process::Recv(_, x, k) => {
                for v in value_domain {
                    out.push((TransitionLabel::InVal(e.clone(), v.clone()), step(k.subst_value(x, v))));
                }
            }
            Process::RecvChan(_, d, k) => {
                let fresh = fresh_extern(&free_names);
                let next = step(k.subst_endpoint(d, &Endpoint::plain(&fresh)));
                out.push((TransitionLabel::InChan(e.clone(), fresh), next));
            }
            Process::SendChan(_, d, k) => {
                if cfg.is_restricted(&d.name) {
                    let fresh = fresh_extern(&free_names);
                    let to = Endpoint::plain(&fresh);
                    let restricted: Vec<String> =
                        cfg.restricted.iter().filter(|r| **r != d.name).cloned().collect();
                    let mut threads = replace(cfg, &[(i, (**k).clone())]);
                    for t in threads.iter_mut() {
                        *t = t.subst_endpoint(&d.name, &to);
                    }
                    let defs = cfg
                        .defs
                        .iter()
                        .map(|(x, df)| {
                            let mut df = df.clone();
                            df.body = df.body.subst_endpoint(&d.name, &to);
                            (x.clone(), df)
                        })
                        .collect();
                    let shown = Endpoint {
                        name: fresh,
                        dual: d.dual,
                    };
                    out.push((
                        TransitionLabel::OutChan(e.clone(), shown),
                        assemble(&restricted, &defs, threads),
                    ));
                } else {
                    out.push((TransitionLabel::OutChan(e.clone(), d.clone()), step((**k).clone())));
                }
            }
            Process::Select(_, l, k) => out.push((TransitionLabel::SelectL(e.clone(), l.clone()), step((**k).clone()))),
            Process::Branch(_, arms) => {
                for (l, p) in arms {
                    out.push((TransitionLabel::OfferL(e.clone(), l.clone()), step(p.clone())));
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sesscalc::parse_process;

    fn cfg(s: &str) -> Configuration {
        Configuration::from_process(&parse_process(s).unwrap())
    }

    fn labels(s: &str) -> Vec<String> {
        transitions(&cfg(s), &[Value::Nat(0), Value::Nat(1)])
            .unwrap()
            .into_iter()
            .map(|(l, _)| l.to_string())
            .collect()
    }

    #[test]
    fn restricted_exchange_is_a_single_tau_to_nil() {
        let ts = transitions(&cfg("new c. (c!<zero>.0 | ~c?(y).0)"), &[]).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0, TransitionLabel::Tau);
        assert!(ts[0].1.is_nil());
    }

    #[test]
    fn free_output_is_visible() {
        assert_eq!(labels("r!<zero>.0"), vec!["r!<0>"]);
        assert_eq!(labels("eff <+ get . eff?(x). r!<x>"), vec!["eff<+get"]);
        assert_eq!(labels("eff?(x).r!<x>"), vec!["eff?(0)", "eff?(1)"]);
    }

    #[test]
    fn partner_present_means_no_visible_action() {
        // both ends free: the only move is the synchronization
        assert_eq!(labels("(c!<1> | ~c?(y).0)"), vec!["tau"]);
    }

    #[test]
    fn channel_input_draws_fresh_extern_names() {
        let ts = transitions(&cfg("ei?[c].~eo![c]"), &[]).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0.to_string(), "ei?[$0]");
        let next = transitions(&ts[0].1, &[]).unwrap();
        assert_eq!(next[0].0.to_string(), "~eo![$0]");
    }

    #[test]
    fn extrusion_renames_restricted_channel() {
        let ts = transitions(&cfg("new d. (o![d].0 | ~d?(x).r!<x>)"), &[]).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0.to_string(), "o![$0]");
        assert!(ts[0].1.restricted.is_empty());
    }

    #[test]
    fn mismatch_is_a_safety_violation() {
        let err = transitions(&cfg("new c. (c!<1> | ~c!<2>)"), &[]).unwrap_err();
        assert!(matches!(err, RuntimeError::SafetyViolation { .. }), "{err}");
        let err = transitions(&cfg("new c. (c <+ put | ~c >> {get: 0})"), &[]).unwrap_err();
        assert!(matches!(err, RuntimeError::SafetyViolation { .. }), "{err}");
    }

    #[test]
    fn calls_unfold_silently() {
        let ts = transitions(&cfg("def X(n: nat; c: ![nat]) = c!<n> in X<3; r>"), &[]).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts[0].0.is_tau());
        assert_eq!(ts[0].1.to_string(), "r!<3>.0");
    }

    #[test]
    fn accept_meets_request() {
        let ts = transitions(&cfg("(accept k(c).c!<1> | request k(d).~d?(x).r!<x>)"), &[]).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].0, TransitionLabel::SharedInit("k".into()));
        assert!(ts[0].0.clone().hide(&BTreeSet::new()).is_tau());
        assert_eq!(ts[0].1.restricted.len(), 1);
    }

    #[test]
    fn hiding_keeps_extern_names() {
        let obs = BTreeSet::from(["r".to_string()]);
        let l = TransitionLabel::SelectL(Endpoint::plain("eff"), "get".into());
        assert!(l.hide(&obs).is_tau());
        let l = TransitionLabel::SelectL(Endpoint::plain("$0"), "get".into());
        assert!(!l.hide(&obs).is_tau());
    }
}
