//! Properties of the cost semantics and of potentials: metered and profiled
//! runs agree, instrumentation only adds cost, sharing splits potential
//! additively, and captured stacks compose with the stack they came from.

mod support;

use std::cell::Cell;

use aara_fx::check::{Checker, Junction};
use aara_fx::corpus::ExpectedStatus;
use aara_fx::machine::{init_entry_state, run, step, Focus, Mode, OutcomeKind, RunOptions, StepResult};
use aara_fx::pipeline::compile;
use aara_fx::potential::potential;
use aara_fx::rational::{rat, ratio};
use aara_fx::surface::CostMetric;
use aara_fx::syntax::{Frame, Program, SType};
use aara_fx::types::{Ann, AnnType, FunRef};
use proptest::prelude::*;

fn runnable() -> Vec<(aara_fx::corpus::GoldenEntry, String)> {
    support::corpus()
        .into_iter()
        .filter(|g| g.status != ExpectedStatus::Rejected)
        .map(|g| {
            let s = g.source().unwrap();
            (g, s)
        })
        .collect()
}

#[test]
fn metered_runs_agree_with_profiling() {
    for (g, src) in runnable() {
        let p = compile(&src, CostMetric::default()).unwrap().program;
        let ty = p.fun(&g.entry).unwrap().param_ty.clone();
        support::for_inputs(&p, &ty, 8, 20, |v| {
            let prof = run(&p, &g.entry, v.clone(), Mode::Profile, RunOptions::default()).unwrap();
            let hwm = prof.high_water.clone();
            let exact = run(&p, &g.entry, v.clone(), Mode::Metered(hwm.clone()), RunOptions::default()).unwrap();
            prop_assert_eq!(&exact.kind, &prof.kind);
            prop_assert_eq!(&exact.net_cost, &prof.net_cost);
            prop_assert_eq!(exact.remaining, Some(&hwm - &prof.net_cost));
            if hwm > rat(0) {
                let short = run(&p, &g.entry, v.clone(), Mode::Metered(hwm - ratio(1, 100)), RunOptions::default()).unwrap();
                prop_assert!(matches!(short.kind, OutcomeKind::ResourceExhausted { .. }), "{}", short.kind);
            }
            Ok(())
        });
    }
}

#[test]
fn instrumentation_only_adds_cost() {
    let metrics = [
        CostMetric { tick_calls: true, tick_handlers: false },
        CostMetric { tick_calls: false, tick_handlers: true },
        CostMetric { tick_calls: true, tick_handlers: true },
    ];
    for (g, src) in runnable() {
        let base = compile(&src, CostMetric::default()).unwrap().program;
        let ticked: Vec<Program> = metrics.iter().map(|m| compile(&src, *m).unwrap().program).collect();
        let ty = base.fun(&g.entry).unwrap().param_ty.clone();
        support::for_inputs(&base, &ty, 6, 10, |v| {
            let b = run(&base, &g.entry, v.clone(), Mode::Profile, RunOptions::default()).unwrap();
            for t in &ticked {
                let o = run(t, &g.entry, v.clone(), Mode::Profile, RunOptions::default()).unwrap();
                prop_assert_eq!(&o.kind, &b.kind);
                prop_assert!(o.net_cost >= b.net_cost);
                prop_assert!(o.high_water >= b.high_water);
            }
            Ok(())
        });
    }
}

fn first_order() -> impl Strategy<Value = SType> {
    let leaf = prop_oneof![Just(SType::Unit), Just(SType::Int)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SType::list),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SType::prod(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| SType::sum(a, b)),
        ]
    })
}

fn annotate(t: &SType, pots: &[i64]) -> AnnType {
    let mut it = pots.iter().cycle();
    Ann::from_stype(
        t,
        &mut || rat(*it.next().unwrap()),
        &mut |_| -> FunRef { unreachable!("first-order") },
        &mut |_| unreachable!("first-order"),
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sharing_splits_potential_additively(
        (t, v) in first_order().prop_flat_map(|t| {
            let vs = support::values::value_of(&Program::default(), &t, 4);
            (Just(t), vs)
        }),
        left in proptest::collection::vec(0i64..5, 1..8),
        right in proptest::collection::vec(0i64..5, 1..8),
    ) {
        // sum the two annotations position by position
        let n = left.len().max(right.len());
        let l: Vec<i64> = (0..n).map(|i| left[i % left.len()]).collect();
        let r: Vec<i64> = (0..n).map(|i| right[i % right.len()]).collect();
        let s: Vec<i64> = l.iter().zip(&r).map(|(a, b)| a + b).collect();
        let pl = potential(&v, &annotate(&t, &l)).unwrap();
        let pr = potential(&v, &annotate(&t, &r)).unwrap();
        let ps = potential(&v, &annotate(&t, &s)).unwrap();
        prop_assert_eq!(ps, pl + pr);
    }
}

#[test]
fn captured_stacks_append_to_their_origin() {
    let harvested = Cell::new(0u32);
    for (g, src) in runnable() {
        let p = compile(&src, CostMetric::default()).unwrap().program;
        let ty = p.fun(&g.entry).unwrap().param_ty.clone();
        let c = Checker::new(&p);
        support::for_inputs(&p, &ty, 5, 8, |v| {
            let mut s = init_entry_state(&p, &g.entry, v, Mode::Profile).unwrap();
            while let StepResult::Next(_) = step(&p, &mut s) {
                let Focus::Propagate { captured, .. } = &s.focus else { continue };
                harvested.set(harvested.get() + 1);
                let segment: Vec<Frame> = captured.iter().rev().cloned().collect();
                let bottom = Junction {
                    ty: s.result_ty.clone(),
                    effects: None,
                };
                let below = c.stack_accepts(&s.stack, bottom.clone()).unwrap();
                let composed = c.stack_accepts(&segment, below);
                let mut whole = s.stack.clone();
                whole.extend(segment.iter().cloned());
                let appended = c.stack_accepts(&whole, bottom);
                prop_assert_eq!(composed.is_ok(), appended.is_ok());
                if let (Ok(a), Ok(b)) = (composed, appended) {
                    prop_assert_eq!(a.ty, b.ty);
                    prop_assert_eq!(a.effects, b.effects);
                }
            }
            Ok(())
        });
    }
    assert!(harvested.get() > 100, "only {} captured stacks", harvested.get());
}
