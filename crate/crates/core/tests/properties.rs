mod common;

use mungo::ast::{Expr, Program, Value};
use mungo::harness::{verify_program, with_large_stack, VerifyOptions};
use mungo::interp::{initial_configuration, step, StepResult, StuckReason};
use mungo::lts::{successors, Lts};
use mungo::monitor::check_error;
use mungo::typeck::type_program;
use proptest::prelude::*;

fn agree(p: &Program) -> Result<(), TestCaseError> {
    let Ok(mut cfg) = initial_configuration(p) else { return Ok(()) };
    for _ in 0..500 {
        let predicted = check_error(&cfg).map(|e| e.kind.stuck_reason());
        match step(p, &mut cfg) {
            StepResult::Stepped(_) | StepResult::Terminal(_) => {
                prop_assert_eq!(predicted, None);
            }
            StepResult::Stuck(reason) => {
                let monitored = matches!(
                    reason,
                    StuckReason::NullCall1 | StuckReason::NullCall2 | StuckReason::MthdNotAv1 | StuckReason::MthdNotAv2
                );
                if monitored || predicted.is_some() {
                    prop_assert_eq!(predicted, Some(reason));
                }
                break;
            }
        }
        if cfg.expr.as_value().is_some() && cfg.stack.len() == 1 {
            break;
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn accepted_programs_run_safely(p in common::arb_program()) {
        if type_program(&p).accepted() {
            let opts = VerifyOptions { max_steps: 1_000, wtc_every_step: true };
            let violations = with_large_stack(|| verify_program(&p, &opts).violations);
            prop_assert!(violations.is_empty(), "{:?}\n{}", violations, mungo::parser::print_program(&p));
        }
    }

    #[test]
    fn predicate_and_step_agree(p in common::arb_program()) {
        with_large_stack(|| agree(&p))?;
    }

    #[test]
    fn reachable_states_are_closed(u in common::arb_usage(
        common::METHODS.iter().map(|s| s.to_string()).collect(),
        vec!["YES".into(), "NO".into()],
    )) {
        let lts = Lts::explore(&u).unwrap();
        prop_assert_eq!(&lts.states[0], &u);
        for s in &lts.states {
            for (_, next) in successors(s).unwrap() {
                prop_assert!(lts.states.contains(&next));
            }
        }
        let edges: usize = lts.states.iter().map(|s| successors(s).unwrap().len()).sum();
        prop_assert_eq!(edges, lts.edges.len());
    }
}

fn accepted_corpus() -> Vec<Program> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut out = Vec::new();
    for f in mungo::harness::corpus_files(&dir).unwrap() {
        let expect = std::fs::read_to_string(f.with_extension("expect")).unwrap();
        if expect.trim() == "accept" {
            let text = std::fs::read_to_string(&f).unwrap();
            out.push(mungo::parser::parse_program("corpus", &text).unwrap());
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Mutation {
    Unit,
    Null,
    DropFirst,
    Duplicate,
    Swap,
}

/// Applies `m` at the `n`th node in preorder, counting down `n`.
fn mutate(e: &Expr, n: &mut usize, m: Mutation) -> Expr {
    if *n == 0 {
        *n = usize::MAX;
        return match (m, e) {
            (Mutation::Unit, _) => Expr::unit(),
            (Mutation::Null, _) => Expr::Value(Value::Null),
            (Mutation::DropFirst, Expr::Seq(_, b)) => (**b).clone(),
            (Mutation::Duplicate, Expr::Seq(a, _)) => Expr::seq((**a).clone(), e.clone()),
            (Mutation::Swap, Expr::Seq(a, b)) => Expr::seq((**b).clone(), (**a).clone()),
            _ => e.clone(),
        };
    }
    *n = n.saturating_sub(1);
    let mut go = |x: &Expr| Box::new(mutate(x, n, m));
    match e {
        Expr::Assign(f, rhs) => Expr::Assign(f.clone(), go(rhs)),
        Expr::Call(r, name, arg) => Expr::Call(r.clone(), name.clone(), go(arg)),
        Expr::Seq(a, b) => {
            let a = go(a);
            Expr::Seq(a, go(b))
        }
        Expr::If(c, a, b) => {
            let c = go(c);
            let a = go(a);
            Expr::If(c, a, go(b))
        }
        Expr::Switch { receiver, method, scrutinee, branches } => {
            let scrutinee = match scrutinee.as_ref() {
                Expr::Call(r, name, arg) => Box::new(Expr::Call(r.clone(), name.clone(), go(arg))),
                other => Box::new(other.clone()),
            };
            let branches = branches.iter().map(|(l, b)| (l.clone(), *go(b))).collect();
            Expr::Switch { receiver: receiver.clone(), method: method.clone(), scrutinee, branches }
        }
        Expr::Label(k, body) => Expr::Label(k.clone(), go(body)),
        Expr::Return(body) => Expr::Return(go(body)),
        _ => e.clone(),
    }
}

fn arb_mutation() -> impl Strategy<Value = Mutation> {
    prop_oneof![
        Just(Mutation::Unit),
        Just(Mutation::Null),
        Just(Mutation::DropFirst),
        Just(Mutation::Duplicate),
        Just(Mutation::Swap),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn accepted_mutants_run_safely(
        which in any::<prop::sample::Index>(),
        edits in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), 0usize..40, arb_mutation()), 1..=3),
    ) {
        let corpus = accepted_corpus();
        let mut p = which.get(&corpus).clone();
        for (class, method, node, m) in edits {
            let c = class.index(p.classes.len());
            if p.classes[c].methods.is_empty() {
                continue;
            }
            let k = method.index(p.classes[c].methods.len());
            let body = &mut p.classes[c].methods[k].body;
            *body = mutate(body, &mut node.clone(), m);
        }
        if type_program(&p).accepted() {
            let opts = VerifyOptions { max_steps: 5_000, wtc_every_step: true };
            let violations = with_large_stack(|| verify_program(&p, &opts).violations);
            prop_assert!(violations.is_empty(), "{:?}\n{}", violations, mungo::parser::print_program(&p));
        }
    }
}
