use super::*;
use crate::effcalc::{parse_program, parse_term, Program, Term, TypeEnv, ValueType};
use crate::semantics::{normalize, run, RunOptions, Schedule};
use crate::sesscalc::{parse_process, session_check, CheckError, Endpoint, ProcEnv, Value};

fn e(n: &str) -> Endpoint {
    Endpoint::plain(n)
}

fn t(src: &str) -> Term {
    parse_term(src).unwrap()
}

fn same(p: &crate::sesscalc::Process, src: &str) {
    assert_eq!(normalize(p), normalize(&parse_process(src).unwrap()), "\n got: {p}\nwant: {src}");
}

#[test]
fn pure_variable_and_zero() {
    assert_eq!(embed_pure(&t("x"), &e("r")).unwrap().to_string(), "r!<x>.0");
    assert_eq!(embed_pure(&t("zero"), &e("r")).unwrap(), parse_process("r!<zero>.0").unwrap());
}

#[test]
fn pure_let() {
    let p = embed_pure(&t("let x = zero in suc x"), &e("r")).unwrap();
    assert_eq!(p, parse_process("new q. (q!<zero> | ~q?(x). r!<suc x>)").unwrap());
}

#[test]
fn pure_rejects_effects() {
    assert!(matches!(embed_pure(&t("get"), &e("r")), Err(EmbedError::Effectful(_))));
    assert!(matches!(embed_pure(&t("let x = zero in put x"), &e("r")), Err(EmbedError::Effectful(_))));
}

#[test]
fn intermediate_variable() {
    let p = embed_intermediate(&t("x"), &e("ei"), &e("eo"), &e("r")).unwrap();
    same(&p, "ei?[c]. r!<x>. ~eo![c]");
}

#[test]
fn intermediate_get_and_put() {
    let p = embed_intermediate(&t("get"), &e("ei"), &e("eo"), &e("r")).unwrap();
    same(&p, "ei?[c]. c <+ get. c?(x). r!<x>. ~eo![c]");
    let p = embed_intermediate(&t("put zero"), &e("ei"), &e("eo"), &e("r")).unwrap();
    same(&p, "new q. (q!<0> | ei?[c]. ~q?(x). c <+ put. c!<x>. r!<unit>. ~eo![c])");
}

#[test]
fn intermediate_let_threads_through_ea() {
    let p = embed_intermediate(&t("let y = get in put y"), &e("ei"), &e("eo"), &e("r")).unwrap();
    same(
        &p,
        "new q, ea. (ei?[c]. c <+ get. c?(x). q!<x>. ~ea![c] \
         | ~q?(y). new q1. (q1!<y> | ea?[c1]. ~q1?(x1). c1 <+ put. c1!<x1>. r!<unit>. ~eo![c1]))",
    );
}

#[test]
fn intermediate_pure_op_wraps_pure_embedding() {
    let p = embed_intermediate(&t("suc (let z = zero in z)"), &e("ei"), &e("eo"), &e("r")).unwrap();
    same(
        &p,
        "ei?[c]. new q. (new q1. (q1!<0> | ~q1?(z). q!<z>) | ~q?(x). r!<suc x>. ~eo![c])",
    );
}

fn increment() -> Program {
    parse_program("store nat init 0 let x = get in put (suc x)").unwrap()
}

#[test]
fn top_level_shape_and_delta() {
    let res = embed_top(&increment(), &e("eff"), &e("r")).unwrap();
    let (restricted, parts) = parallel_components(&res.process);
    assert_eq!(restricted, vec!["ei", "eo"]);
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[1].to_string(), "~ei![eff].eo?[c].0");
    assert_eq!(res.delta.get(&e("eff")).unwrap().to_string(), "+{get: ?[nat]. +{put: ![nat]. end}}");
    assert_eq!(res.delta.get(&e("r")).unwrap().to_string(), "![unit]. end");
    session_check(&ProcEnv::new(), &res.delta, &res.process).unwrap();
    // the printed form parses back
    assert_eq!(parse_process(&res.process.to_string()).unwrap(), res.process);
}

#[test]
fn pure_program_has_end_on_eff() {
    let prog = parse_program("store nat init 0 let x = zero in suc x").unwrap();
    let res = embed_top(&prog, &e("eff"), &e("r")).unwrap();
    assert_eq!(res.delta.get(&e("eff")).unwrap().to_string(), "end");
    session_check(&ProcEnv::new(), &res.delta, &res.process).unwrap();
}

#[test]
fn running_increment_with_store() {
    let p = compile_for_run(&increment(), false).unwrap();
    let opts = RunOptions {
        schedule: Schedule::All,
        ..RunOptions::default()
    };
    let os = run(&p, &opts).unwrap();
    assert_eq!(os.len(), 1);
    assert_eq!(os[0].result_values, vec![Value::Unit]);
    assert_eq!(os[0].store, Some(Value::Nat(1)));
}

#[test]
fn send_stop_closes_the_store_and_types() {
    let p = compile_for_run(&increment(), true).unwrap();
    let os = run(&p, &RunOptions::default()).unwrap();
    assert_eq!(os[0].result_values, vec![Value::Unit]);
    assert!(os[0].residual.to_string() == "0");
    session_check(&ProcEnv::new(), &crate::sesscalc::SessionEnv::new().with(e("r"), terms::result_type(ValueType::Unit)), &p)
        .unwrap();
}

#[test]
fn naive_parallel_is_rejected_on_eff() {
    let p = naive_parallel_encode(&t("get"), &t("put zero"), &e("eff"), &e("r")).unwrap();
    let delta = crate::sesscalc::SessionEnv::new()
        .with(e("eff"), crate::sesscalc::SessionType::End)
        .with(e("r"), terms::result_type(ValueType::Nat));
    match session_check(&ProcEnv::new(), &delta, &p) {
        Err(CheckError::Linearity { channel, .. }) => assert_eq!(channel, "eff"),
        other => panic!("expected linearity error, got {other:?}"),
    }
    // also when the second half never touches eff
    let p = naive_parallel_encode(&t("get"), &t("zero"), &e("eff"), &e("r")).unwrap();
    assert!(matches!(session_check(&ProcEnv::new(), &delta, &p), Err(CheckError::Linearity { .. })));
}

#[test]
fn optimizer_runs_pure_let_beside_neighbour() {
    let src = t("let x = zero in let y = get in put y");
    let p = optimize_commuting(&src, &TypeEnv::new(), ValueType::Nat, &e("ei"), &e("eo"), &e("r")).unwrap();
    let (restricted, parts) = parallel_components(&p);
    assert_eq!(restricted.len(), 3);
    assert_eq!(parts.len(), 3);
    assert_eq!(parts[0].to_string(), format!("{}!<0>.0", restricted[0]));
    same(
        &parts[1],
        &format!("ei?[c]. c <+ get. c?(x1). {}!<x1>. ~{}![c]", restricted[1], restricted[2]),
    );
}

#[test]
fn optimizer_leaves_impure_pairs_alone() {
    let src = t("let x = get in let y = get in put y");
    let opt = optimize_commuting(&src, &TypeEnv::new(), ValueType::Nat, &e("ei"), &e("eo"), &e("r")).unwrap();
    let plain = embed_intermediate(&src, &e("ei"), &e("eo"), &e("r")).unwrap();
    assert_eq!(normalize(&opt), normalize(&plain));
}

#[test]
fn optimized_top_still_checks() {
    let prog = parse_program("store nat init 0 let y = get in let x = suc zero in put x").unwrap();
    let res = embed_top_optimized(&prog, &e("eff"), &e("r")).unwrap();
    session_check(&ProcEnv::new(), &res.delta, &res.process).unwrap();
}

#[test]
fn shared_single_client_matches_linear_store() {
    let prog = parse_program("store nat init 2 let x = get in let u = put (suc x) in get").unwrap();
    let opts = RunOptions {
        schedule: Schedule::All,
        ..RunOptions::default()
    };
    let linear = run(&compile_for_run(&prog, false).unwrap(), &opts).unwrap();
    let mut names = ChannelNameSupply::for_term(&prog.root, ["k"]);
    let shared = Process::par(
        shared_store_agent(Value::Nat(2), "k", ValueType::Nat),
        embed_shared(&prog.root, "k", &e("r"), &mut names).unwrap(),
    );
    let shared = run(&shared, &opts).unwrap();
    assert_eq!(linear.len(), 1);
    assert_eq!(shared.len(), 1);
    assert_eq!(linear[0].result_values, shared[0].result_values);
    assert_eq!(linear[0].store, shared[0].store);
    assert_eq!(shared[0].store, Some(Value::Nat(3)));
}

use crate::sesscalc::Process;
