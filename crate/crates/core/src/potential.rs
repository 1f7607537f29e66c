//! The potential function: how much resource a value stores under a type.

use num_traits::Zero;

use crate::rational::Rational;
use crate::syntax::Value;
use crate::types::{AnnType, ConcreteTy, Ty};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("value `{value}` does not inhabit `{ty}`")]
pub struct StructuralMismatch {
    pub value: String,
    pub ty: String,
}

/// Potential of a closed value. The top-level annotation of `t` is not
/// counted; it belongs to the surrounding context.
pub fn potential(v: &Value, t: &AnnType) -> Result<Rational, StructuralMismatch> {
    potential_ty(v, &t.ty)
}

pub fn potential_ty(v: &Value, t: &ConcreteTy) -> Result<Rational, StructuralMismatch> {
    let mut acc = Rational::zero();
    accumulate(v, t, &mut acc)?;
    Ok(acc)
}

fn accumulate(v: &Value, t: &ConcreteTy, acc: &mut Rational) -> Result<(), StructuralMismatch> {
    match (v, t) {
        (Value::Unit, Ty::Unit) | (Value::Int(_), Ty::Int) => Ok(()),
        (Value::Pair(a, b), Ty::Prod(ta, tb)) => {
            *acc += &ta.pot + &tb.pot;
            accumulate(a, &ta.ty, acc)?;
            accumulate(b, &tb.ty, acc)
        }
        (Value::Inl(a), Ty::Sum(ta, _)) => {
            *acc += &ta.pot;
            accumulate(a, &ta.ty, acc)
        }
        (Value::Inr(b), Ty::Sum(_, tb)) => {
            *acc += &tb.pot;
            accumulate(b, &tb.ty, acc)
        }
        (Value::Nil, Ty::List(_)) => Ok(()),
        (Value::Cons(..), Ty::List(elem)) => {
            // iterative over the spine so long lists do not recurse deeply
            let mut cur = v;
            loop {
                match cur {
                    Value::Nil => return Ok(()),
                    Value::Cons(h, tl) => {
                        *acc += &elem.pot;
                        accumulate(h, &elem.ty, acc)?;
                        cur = tl;
                    }
                    _ => return Err(mismatch(cur, t)),
                }
            }
        }
        (Value::Fun(_), Ty::Fun(_)) => Ok(()),
        (Value::LinLam(_) | Value::Dcont(_), Ty::LinFun(_)) => Ok(()),
        _ => Err(mismatch(v, t)),
    }
}

fn mismatch(v: &Value, t: &ConcreteTy) -> StructuralMismatch {
    StructuralMismatch {
        value: v.to_string(),
        ty: t.to_string(),
    }
}
