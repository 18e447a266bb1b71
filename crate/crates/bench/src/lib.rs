//! Inputs shared by the pipeline benchmarks.

/// Source programs of increasing size, all with a `nat` store.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("increment", "store nat init 0\nlet x = get in put (suc x)"),
    ("read-twice", "store nat init 0\nlet x = get in let y = get in put (suc y)"),
    (
        "swap-chain",
        "store nat init 1\nlet a = get in let b = put (suc a) in let c = get in let d = put (suc c) in get",
    ),
];
