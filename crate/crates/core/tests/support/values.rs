//! Proptest strategies for closed first-order values of a structural type.

use aara_fx::syntax::{Program, SType, Value};
use proptest::prelude::*;

fn int() -> BoxedStrategy<i64> {
    prop_oneof![-3i64..=3, any::<i32>().prop_map(i64::from)].boxed()
}

/// Values of `t` whose lists have at most `max_len` elements. Function
/// positions draw from the program's functions of the same shape.
pub fn value_of(p: &Program, t: &SType, max_len: usize) -> BoxedStrategy<Value> {
    match t {
        SType::Unit => Just(Value::Unit).boxed(),
        SType::Int => int().prop_map(Value::Int).boxed(),
        SType::Prod(a, b) => (value_of(p, a, max_len), value_of(p, b, max_len))
            .prop_map(|(x, y)| Value::pair(x, y))
            .boxed(),
        SType::Sum(a, b) => prop_oneof![
            value_of(p, a, max_len).prop_map(Value::inl),
            value_of(p, b, max_len).prop_map(Value::inr)
        ]
        .boxed(),
        SType::List(e) => proptest::collection::vec(value_of(p, e, max_len), 0..=max_len)
            .prop_map(Value::list)
            .boxed(),
        SType::Fun(shape) => {
            let names: Vec<Value> = p
                .funs
                .iter()
                .filter(|d| d.fn_type() == **shape)
                .map(|d| Value::Fun(d.name.clone()))
                .collect();
            assert!(!names.is_empty(), "no function of type {t}");
            proptest::sample::select(names).boxed()
        }
        SType::Void | SType::LinFun(_) => panic!("no closed values of type {t}"),
    }
}
