//! Seeded random inputs for the verifier.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use aara_fx::syntax::{Name, Program, SType, Value};

/// Longest list generated at the end of the size ramp.
pub const MAX_LEN: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("cannot generate random values of type `{0}`")]
    Unsupported(String),
}

/// Random well-typed values from a splitmix64 stream.
pub struct InputGen<'p> {
    program: &'p Program,
    rng: SplitMix64,
}

impl<'p> InputGen<'p> {
    pub fn new(program: &'p Program, seed: u64) -> InputGen<'p> {
        InputGen {
            program,
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    /// Uniform in `0..n`; `n` must be positive.
    fn below(&mut self, n: u64) -> u64 {
        self.rng.next_u64() % n
    }

    /// A quarter of the integers are small so that comparisons with zero
    /// and equalities come up; the rest spread over a wide range.
    fn int(&mut self) -> i64 {
        if self.below(4) == 0 {
            self.below(5) as i64 - 2
        } else {
            self.below(2_000_001) as i64 - 1_000_000
        }
    }

    /// Maximum list length for trial `i` of `n`, ramping from 0 to `MAX_LEN`.
    pub fn ramp(i: u32, n: u32) -> u64 {
        if n <= 1 {
            return MAX_LEN;
        }
        (i as u64 * MAX_LEN) / (n as u64 - 1)
    }

    /// A value of type `t` whose lists have at most `max_len` elements. The
    /// outermost list draws from the upper half of the range.
    pub fn value(&mut self, t: &SType, max_len: u64) -> Result<Value, InputError> {
        self.value_at(t, max_len, true)
    }

    fn value_at(&mut self, t: &SType, max_len: u64, outer: bool) -> Result<Value, InputError> {
        Ok(match t {
            SType::Unit => Value::Unit,
            SType::Int => Value::Int(self.int()),
            SType::Prod(a, b) => {
                let va = self.value_at(a, max_len, outer)?;
                Value::pair(va, self.value_at(b, max_len, outer)?)
            }
            SType::Sum(a, b) => {
                if self.below(2) == 0 {
                    Value::inl(self.value_at(a, max_len, outer)?)
                } else {
                    Value::inr(self.value_at(b, max_len, outer)?)
                }
            }
            SType::List(e) => {
                let len = if outer {
                    max_len / 2 + self.below(max_len - max_len / 2 + 1)
                } else {
                    self.below(max_len + 1)
                };
                let items = (0..len)
                    .map(|_| self.value_at(e, max_len, false))
                    .collect::<Result<Vec<_>, _>>()?;
                Value::list(items)
            }
            SType::Fun(shape) => {
                let candidates: Vec<&Name> = self
                    .program
                    .funs
                    .iter()
                    .filter(|d| d.fn_type() == **shape)
                    .map(|d| &d.name)
                    .collect();
                if candidates.is_empty() {
                    return Err(InputError::Unsupported(t.to_string()));
                }
                let i = self.below(candidates.len() as u64) as usize;
                Value::Fun(candidates[i].clone())
            }
            SType::Void | SType::LinFun(_) => return Err(InputError::Unsupported(t.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aara_fx::analysis::bound::inhabits;

    #[test]
    fn values_inhabit_their_type_and_respect_the_ramp() {
        let p = Program::default();
        let t = SType::prod(SType::list(SType::list(SType::Int)), SType::Sum(Box::new(SType::Unit), Box::new(SType::Int)));
        let mut g = InputGen::new(&p, 7);
        for i in 0..20 {
            let max = InputGen::ramp(i, 20);
            let v = g.value(&t, max).unwrap();
            assert!(inhabits(&v, &t), "{v}");
            let Value::Pair(l, _) = &v else { panic!() };
            let items = l.list_items().unwrap();
            assert!(items.len() as u64 <= max && items.len() as u64 >= max / 2);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let p = Program::default();
        let t = SType::list(SType::Int);
        let a: Vec<Value> = (0..5).map(|_| InputGen::new(&p, 42).value(&t, 8).unwrap()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut g = InputGen::new(&p, 42);
        let b = g.value(&t, 8).unwrap();
        assert_eq!(a[0], b);
    }

    #[test]
    fn ramp_spans_zero_to_max() {
        assert_eq!(InputGen::ramp(0, 100), 0);
        assert_eq!(InputGen::ramp(99, 100), MAX_LEN);
    }
}
