//! Configurations: processes in structural-congruence normal form.
//!
//! A configuration is a set of restricted names, a set of process
//! definitions and a multiset of threads (prefixed processes, calls and
//! session initiations). Restrictions and definitions are hoisted to the top.
//! Restricted names are renamed `%0, %1, ...`, bound names by binding depth,
//! and definitions get content-derived names, so α-equivalent processes give
//! identical configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::sesscalc::{Def, Endpoint, Process, Value};

/// Upper bound on thread orderings tried when breaking ties between threads
/// that differ only in restricted names.
const MAX_ORDERINGS: usize = 720;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub restricted: Vec<String>,
    pub defs: BTreeMap<String, Def>,
    pub threads: Vec<Process>,
}

pub fn normalize(p: &Process) -> Process {
    Configuration::from_process(p).to_process()
}

impl Configuration {
    pub fn from_process(p: &Process) -> Configuration {
        let mut st = Flat::default();
        st.flatten(p);
        st.finish()
    }

    pub fn to_process(&self) -> Process {
        let mut p = Process::par_all(self.threads.iter().cloned());
        for d in self.defs.values().rev() {
            p = Process::def(d.clone(), p);
        }
        Process::new_chans(self.restricted.iter().cloned(), p)
    }

    /// Endpoints on channels that are not restricted.
    pub fn free_endpoints(&self) -> BTreeSet<Endpoint> {
        self.to_process().free_endpoints()
    }

    pub fn is_restricted(&self, name: &str) -> bool {
        self.restricted.iter().any(|r| r == name)
    }

    /// Short stable digest of the configuration text.
    pub fn hash(&self) -> String {
        digest(&self.to_string(), 16)
    }

    pub fn is_nil(&self) -> bool {
        self.threads.is_empty()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_process())
    }
}

fn digest(text: &str, hex_len: usize) -> String {
    let bytes = Sha256::digest(text.as_bytes());
    bytes.iter().map(|b| format!("{b:02x}")).collect::<String>()[..hex_len].to_string()
}

/// The part of a definition name before any `#` suffix added here.
fn base_name(name: &str) -> &str {
    name.split(['#', '%']).next().unwrap_or(name)
}

#[derive(Default)]
struct Flat {
    threads: Vec<Process>,
    restricted: Vec<String>,
    defs: Vec<Def>,
    counter: usize,
}

impl Flat {
    fn temp(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("%%{prefix}{}", self.counter)
    }

    fn flatten(&mut self, p: &Process) {
        match p {
            Process::Nil => {}
            Process::Par(a, b) => {
                self.flatten(a);
                self.flatten(b);
            }
            Process::New(c, q) => {
                let t = self.temp("t");
                self.restricted.push(t.clone());
                self.flatten(&q.subst_endpoint(c, &Endpoint::plain(t)));
            }
            Process::Def(d, scope) => {
                // Keep the name unless an earlier definition already took it.
                let mut d = (**d).clone();
                let mut scope = (**scope).clone();
                if self.defs.iter().any(|e| e.name == d.name) {
                    let fresh = format!("{}{}", d.name, self.temp("d"));
                    d.body = d.body.rename_def(&d.name, &fresh);
                    scope = scope.rename_def(&d.name, &fresh);
                    d.name = fresh;
                }
                self.defs.push(d);
                self.flatten(&scope);
            }
            _ => self.threads.push(p.clone()),
        }
    }

    fn finish(self) -> Configuration {
        let Flat {
            threads,
            restricted,
            defs,
            ..
        } = self;
        let mut threads: Vec<Process> = threads.iter().map(|t| canon_bound(t, 0)).collect();
        let mut defs: Vec<Def> = defs.iter().map(canon_def).collect();

        // Content-derived definition names, callees first.
        let anon = |p: &Process| anonymize(p, &restricted);
        for i in def_order(&defs) {
            let old = defs[i].name.clone();
            let mut text_def = defs[i].clone();
            text_def.body = anon(&text_def.body.rename_def(&old, "@self"));
            text_def.name = "@self".to_string();
            let mut name = format!("{}#{}", base_name(&old), digest(&text_def.to_string(), 8));
            while defs.iter().enumerate().any(|(j, d)| j != i && d.name == name) {
                name.push('\'');
            }
            if name != old {
                for t in threads.iter_mut() {
                    *t = t.rename_def(&old, &name);
                }
                for d in defs.iter_mut() {
                    d.body = d.body.rename_def(&old, &name);
                }
                defs[i].name = name;
            }
        }

        // Drop unreachable definitions.
        let by_name: BTreeMap<String, Def> = defs.into_iter().map(|d| (d.name.clone(), d)).collect();
        let mut live = BTreeSet::new();
        let mut todo: Vec<String> = threads.iter().flat_map(|t| t.free_defs()).collect();
        while let Some(x) = todo.pop() {
            if let Some(d) = by_name.get(&x) {
                if live.insert(x.clone()) {
                    todo.extend(d.body.free_defs());
                }
            }
        }
        let defs: Vec<Def> = by_name.into_values().filter(|d| live.contains(&d.name)).collect();

        // Drop unused restrictions.
        let mut used = BTreeSet::new();
        for t in &threads {
            used.extend(t.free_channel_names());
        }
        for d in &defs {
            used.extend(d.body.free_channel_names());
        }
        let restricted: Vec<String> = restricted.iter().filter(|r| used.contains(*r)).cloned().collect();

        // Order threads by their shape with restricted names blanked out, then
        // pick the tie-breaking permutation with the least rendering.
        threads.sort_by_cached_key(|t| anon(t).to_string());
        let keys: Vec<String> = threads.iter().map(|t| anon(t).to_string()).collect();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for i in 1..=threads.len() {
            if i == threads.len() || keys[i] != keys[start] {
                groups.push((start, i));
                start = i;
            }
        }
        let orderings = tie_orderings(&groups, threads.len());
        let mut best: Option<Configuration> = None;
        for order in orderings {
            let ts: Vec<Process> = order.iter().map(|&i| threads[i].clone()).collect();
            let cand = assign_names(&restricted, &defs, ts);
            let better = match &best {
                None => true,
                Some(b) => cand.to_string() < b.to_string(),
            };
            if better {
                best = Some(cand);
            }
        }
        best.unwrap_or_else(|| assign_names(&restricted, &defs, threads))
    }
}

/// All orderings that permute threads only within tie groups, up to
/// [`MAX_ORDERINGS`]. Past the cap only the sorted order is used.
fn tie_orderings(groups: &[(usize, usize)], n: usize) -> Vec<Vec<usize>> {
    let mut total: usize = 1;
    for (a, b) in groups {
        for k in 1..=(b - a) {
            total = total.saturating_mul(k);
        }
    }
    if total > MAX_ORDERINGS {
        return vec![(0..n).collect()];
    }
    let mut out = vec![Vec::new()];
    for &(a, b) in groups {
        let perms = permutations(&(a..b).collect::<Vec<_>>());
        out = out
            .into_iter()
            .flat_map(|prefix| {
                perms.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend(p);
                    v
                })
            })
            .collect();
    }
    out
}

fn permutations(xs: &[usize]) -> Vec<Vec<usize>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Renames restricted names to `%k` by first occurrence.
fn assign_names(restricted: &[String], defs: &[Def], threads: Vec<Process>) -> Configuration {
    let mut order: Vec<String> = Vec::new();
    let mut note = |n: &str| {
        if restricted.iter().any(|r| r == n) && !order.iter().any(|o| o == n) {
            order.push(n.to_string());
        }
    };
    for t in &threads {
        for n in occurrence_order(t) {
            note(&n);
        }
    }
    for d in defs {
        for n in occurrence_order(&d.body) {
            note(&n);
        }
    }
    let rename = |p: &Process| {
        order
            .iter()
            .enumerate()
            .fold(p.clone(), |acc, (k, old)| acc.subst_endpoint(old, &Endpoint::plain(format!("%{k}"))))
    };
    Configuration {
        restricted: (0..order.len()).map(|k| format!("%{k}")).collect(),
        defs: defs
            .iter()
            .map(|d| {
                let mut d2 = d.clone();
                d2.body = rename(&d.body);
                (d2.name.clone(), d2)
            })
            .collect(),
        threads: threads.iter().map(rename).collect(),
    }
}

/// Channel names in preorder, each once.
fn occurrence_order(p: &Process) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    p.visit(&mut |q| {
        let mut push = |e: &Endpoint| {
            if !out.contains(&e.name) {
                out.push(e.name.clone());
            }
        };
        match q {
            Process::Recv(c, _, _)
            | Process::Send(c, _, _)
            | Process::RecvChan(c, _, _)
            | Process::Select(c, _, _)
            | Process::Branch(c, _) => push(c),
            Process::SendChan(c, d, _) => {
                push(c);
                push(d);
            }
            Process::Call(_, _, cs) => cs.iter().for_each(push),
            _ => {}
        }
    });
    out
}

/// Replaces every restricted name by the placeholder `%`.
fn anonymize(p: &Process, restricted: &[String]) -> Process {
    restricted
        .iter()
        .fold(p.clone(), |acc, r| acc.subst_endpoint(r, &Endpoint::plain("%")))
}

/// Definition indices with callees before callers where possible.
fn def_order(defs: &[Def]) -> Vec<usize> {
    let mut done: Vec<usize> = Vec::new();
    while done.len() < defs.len() {
        let before = done.len();
        for (i, d) in defs.iter().enumerate() {
            if done.contains(&i) {
                continue;
            }
            let ready = d.body.free_defs().iter().all(|callee| {
                callee == &d.name
                    || defs
                        .iter()
                        .enumerate()
                        .all(|(j, e)| &e.name != callee || done.contains(&j))
            });
            if ready {
                done.push(i);
            }
        }
        if done.len() == before {
            // Mutual recursion: fall back to declaration order.
            done.extend((0..defs.len()).filter(|i| !done.contains(i)).collect::<Vec<_>>());
        }
    }
    done
}

fn canon_def(d: &Def) -> Def {
    let mut body = d.body.clone();
    let mut value_params = Vec::new();
    let mut chan_params = Vec::new();
    for (i, (x, t)) in d.value_params.iter().enumerate() {
        let nx = format!("_p{i}");
        body = body.subst_value(x, &Value::var(&nx));
        value_params.push((nx, *t));
    }
    for (i, (c, s)) in d.chan_params.iter().enumerate() {
        let nc = format!("_q{i}");
        body = body.subst_endpoint(c, &Endpoint::plain(&nc));
        chan_params.push((nc, s.clone()));
    }
    Def {
        name: d.name.clone(),
        value_params,
        chan_params,
        body: canon_bound(&body, 0),
    }
}

/// Renames binders by depth and folds closed values.
fn canon_bound(p: &Process, depth: usize) -> Process {
    let fold_all = |vs: &[Value]| vs.iter().map(Value::fold).collect::<Vec<_>>();
    match p {
        Process::Recv(c, x, k) => {
            let nx = format!("_v{depth}");
            let k2 = if *x == nx { (**k).clone() } else { k.subst_value(x, &Value::var(&nx)) };
            Process::recv(c.clone(), nx, canon_bound(&k2, depth + 1))
        }
        Process::RecvChan(c, d, k) => {
            let nd = format!("_c{depth}");
            let k2 = rename_chan(k, d, &nd);
            Process::recv_chan(c.clone(), nd, canon_bound(&k2, depth + 1))
        }
        Process::New(c, k) => {
            let nc = format!("_n{depth}");
            Process::new_chan(nc.clone(), canon_bound(&rename_chan(k, c, &nc), depth + 1))
        }
        Process::Accept(s, c, k) => {
            let nc = format!("_c{depth}");
            Process::accept(s.clone(), nc.clone(), canon_bound(&rename_chan(k, c, &nc), depth + 1))
        }
        Process::Request(s, c, k) => {
            let nc = format!("_c{depth}");
            Process::request(s.clone(), nc.clone(), canon_bound(&rename_chan(k, c, &nc), depth + 1))
        }
        Process::Send(c, v, k) => Process::send(c.clone(), v.fold(), canon_bound(k, depth)),
        Process::Call(x, vs, cs) => Process::Call(x.clone(), fold_all(vs), cs.clone()),
        Process::Def(d, scope) => {
            let d2 = canon_def(d);
            Process::def(d2, canon_bound(scope, depth))
        }
        _ => p.map_children(|q| canon_bound(q, depth)),
    }
}

fn rename_chan(p: &Process, from: &str, to: &str) -> Process {
    if from == to {
        p.clone()
    } else {
        p.subst_endpoint(from, &Endpoint::plain(to))
    }
}
