use super::*;
use crate::effcalc::{parse_program, parse_term, Program};
use crate::embedding::{embed_intermediate, embed_pure, embed_top};
use crate::semantics::{normalize, TransitionLabel};
use crate::sesscalc::{parse_process, Endpoint, Process};

fn e(n: &str) -> Endpoint {
    Endpoint::plain(n)
}

fn top(src: &str) -> Process {
    let prog = Program::nat(0, parse_term(src).unwrap());
    embed_top(&prog, &e("eff"), &e("r")).unwrap().process
}

fn top_equiv(a: &str, b: &str) -> Verdict {
    equivalent(&top(a), &top(b), &LtsOptions::observing(["r", "eff"])).unwrap()
}

#[test]
fn increment_trace_follows_its_effect() {
    let prog = parse_program("store nat init 0 let x = get in put (suc x)").unwrap();
    let res = embed_top(&prog, &e("eff"), &e("r")).unwrap();
    let lts = build_lts(&res.process, &LtsOptions::observing(["r", "eff"])).unwrap();
    let traces = lts.maximal_traces(100).unwrap();
    assert_eq!(traces.len(), 2);
    for tr in &traces {
        let eff: Vec<&TransitionLabel> = tr.iter().filter(|l| l.subject() == Some("eff")).collect();
        assert_eq!(eff.len(), 4);
        assert!(matches!(eff[0], TransitionLabel::SelectL(_, l) if l == "get"));
        assert!(matches!(eff[1], TransitionLabel::InVal(..)));
        assert!(matches!(eff[2], TransitionLabel::SelectL(_, l) if l == "put"));
        assert!(matches!(eff[3], TransitionLabel::OutVal(..)));
    }
}

#[test]
fn unit_right() {
    assert!(top_equiv("let x = get in x", "get").holds());
}

#[test]
fn different_writes_are_told_apart() {
    let Verdict::NotBisimilar(d) = top_equiv("put zero", "put (suc zero)") else {
        panic!("expected a difference");
    };
    let last = d.trace.last().unwrap();
    assert!(matches!(last, TransitionLabel::OutVal(c, _) if c.name == "eff"), "{d}");
}

#[test]
fn normalize_equal_processes_are_bisimilar() {
    let p = parse_process("new c. (c!<1> | ~c?(x). r!<x>) | a!<0>").unwrap();
    let opts = LtsOptions::observing(["r", "a"]);
    assert!(equivalent(&p, &normalize(&p), &opts).unwrap().holds());
}

#[test]
fn forwarding_on_the_output_side() {
    let m = parse_term("let x = get in put (suc x)").unwrap();
    let lhs = Process::new_chan(
        "ea",
        Process::par(
            embed_intermediate(&m, &e("ei"), &e("ea"), &e("r")).unwrap(),
            parse_process("ea?[c]. ~eo![c]").unwrap(),
        ),
    );
    let rhs = embed_intermediate(&m, &e("ei"), &e("eo"), &e("r")).unwrap();
    let opts = LtsOptions::observing(["r", "ei", "eo"]);
    assert!(equivalent(&lhs, &rhs, &opts).unwrap().holds());
}

fn purity_sides(m: &str, ctx: &str) -> (Process, Process) {
    let m = parse_term(m).unwrap();
    let ctx = parse_process(ctx).unwrap();
    let lhs = Process::par(embed_intermediate(&m, &e("ei"), &e("eo"), &e("r")).unwrap(), ctx.clone());
    let rhs = Process::par_all([
        parse_process("ei?[c]. ~eo![c]").unwrap(),
        embed_pure(&m, &e("r")).unwrap(),
        ctx,
    ]);
    (lhs, rhs)
}

#[test]
fn purity_in_context() {
    let (lhs, rhs) = purity_sides("let y = zero in suc y", "eo?[c]. p!<unit> | ~r?(x). o!<x>");
    let opts = LtsOptions::observing(["ei", "eo", "r", "p"]);
    assert!(equivalent(&lhs, &rhs, &opts).unwrap().holds());
}

#[test]
fn purity_fails_when_the_result_is_observed() {
    // The pure side may emit its result before any effect channel arrives.
    let (lhs, rhs) = purity_sides("zero", "eo?[c]. p!<unit> | ~r?(x). o!<x>");
    let opts = LtsOptions::observing(["ei", "eo", "r", "p", "o"]);
    let Verdict::NotBisimilar(d) = equivalent(&lhs, &rhs, &opts).unwrap() else {
        panic!("expected a difference");
    };
    assert_eq!(d.last_by, Side::Right);
    assert_eq!(d.trace.last().unwrap().to_string(), "o!<0>");
}
