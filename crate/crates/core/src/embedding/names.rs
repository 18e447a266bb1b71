use std::collections::{BTreeMap, BTreeSet};

use crate::effcalc::Term;

/// Fresh names for the channels and binders an embedding introduces.
///
/// A base such as `q` is handed out as `q`, then `q1`, `q2`, ... skipping
/// anything already taken. Source identifiers and the reserved names `r`
/// and `eff` are never produced.
#[derive(Debug, Clone)]
pub struct ChannelNameSupply {
    taken: BTreeSet<String>,
    next: BTreeMap<String, usize>,
}

pub const RESERVED: [&str; 2] = ["r", "eff"];

impl ChannelNameSupply {
    pub fn new<I, S>(avoid: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut taken: BTreeSet<String> = avoid.into_iter().map(Into::into).collect();
        taken.extend(RESERVED.iter().map(|s| s.to_string()));
        ChannelNameSupply {
            taken,
            next: BTreeMap::new(),
        }
    }

    /// A supply avoiding every identifier of `t`, plus `extra`.
    pub fn for_term<'a>(t: &Term, extra: impl IntoIterator<Item = &'a str>) -> Self {
        let mut s = ChannelNameSupply::new(t.identifiers());
        for e in extra {
            s.reserve(e);
        }
        s
    }

    pub fn reserve(&mut self, name: &str) {
        self.taken.insert(name.to_string());
    }

    pub fn is_taken(&self, name: &str) -> bool {
        self.taken.contains(name)
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let n = self.next.entry(base.to_string()).or_insert(0);
        loop {
            let candidate = if *n == 0 { base.to_string() } else { format!("{base}{n}") };
            *n += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}
