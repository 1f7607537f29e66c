//! Two-phase primal simplex over exact rationals with Bland's rule.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::{Assignment, Constraint, LpError, Objective, Rel, Var};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Values for every variable mentioned by the constraints or objective.
    pub assignment: Assignment,
    pub objective: Rational,
    pub pivots: usize,
}

type Row = Vec<(usize, Rational)>;

struct Tableau {
    rows: Vec<Row>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs, dense over all columns.
    cost: Vec<Rational>,
    value: Rational,
    /// Columns allowed to enter the basis.
    enterable: Vec<bool>,
    pivots: usize,
}

fn coeff(row: &Row, col: usize) -> Option<&Rational> {
    row.binary_search_by(|(c, _)| c.cmp(&col))
        .ok()
        .map(|i| &row[i].1)
}

/// `target - factor * source`, both sorted by column.
fn axpy(target: &Row, factor: &Rational, source: &Row) -> Row {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let order = match (target.get(i), source.get(j)) {
            (Some(a), Some(b)) => a.0.cmp(&b.0),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => unreachable!(),
        };
        match order {
            Ordering::Less => {
                out.push(target[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                let (c, v) = &source[j];
                out.push((*c, -(factor * v)));
                j += 1;
            }
            Ordering::Equal => {
                let (c, a) = &target[i];
                let v = a - factor * &source[j].1;
                if !v.is_zero() {
                    out.push((*c, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let p = coeff(&self.rows[r], c).cloned().expect("pivot on zero entry");
        if !p.is_one() {
            let inv = p.recip();
            for (_, v) in self.rows[r].iter_mut() {
                *v *= &inv;
            }
            self.rhs[r] *= &inv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = coeff(&self.rows[i], c).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] -= &f * &prhs;
            }
        }
        let dc = self.cost[c].clone();
        if !dc.is_zero() {
            for (col, v) in &prow {
                self.cost[*col] -= &dc * v;
            }
            self.value += &dc * &prhs;
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality. Errors if the objective is unbounded.
    fn optimize(&mut self) -> Result<(), LpError> {
        loop {
            let entering = (0..self.cost.len())
                .find(|&j| self.enterable[j] && self.cost[j].is_negative());
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let Some(a) = coeff(&self.rows[r], c) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bq)) => match ratio.cmp(bq) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*br],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(LpError::Internal("objective is unbounded".into())),
            }
        }
    }

    /// Recomputes reduced costs and objective value for the given column costs.
    fn set_costs(&mut self, costs: &[Rational]) {
        self.cost = costs.to_vec();
        self.value = Rational::zero();
        for r in 0..self.rows.len() {
            let cb = &costs[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (col, v) in &self.rows[r] {
                self.cost[*col] -= cb * v;
            }
            self.value += cb * &self.rhs[r];
        }
    }
}

/// Minimizes the objective subject to the constraints and `var >= 0`.
///
/// The returned assignment is re-checked against every constraint.
pub fn solve(constraints: &[Constraint], objective: &Objective) -> Result<Solution, LpError> {
    let mut vars: BTreeSet<Var> = BTreeSet::new();
    for c in constraints {
        vars.extend(c.expr.vars());
    }
    vars.extend(objective.weights().map(|(v, _)| v));
    let vars: Vec<Var> = vars.into_iter().collect();
    let index = |v: Var| vars.binary_search(&v).expect("variable indexed");
    let n = vars.len();

    let mut rows: Vec<(Row, Rational, Rel)> = Vec::new();
    for c in constraints {
        if c.is_trivial() {
            let k = c.expr.constant_part();
            let ok = match c.rel {
                Rel::Ge => !k.is_negative(),
                Rel::Eq => k.is_zero(),
            };
            if !ok {
                return Err(LpError::Infeasible);
            }
            continue;
        }
        let row: Row = c.expr.terms().map(|(v, q)| (index(v), q.clone())).collect();
        rows.push((row, -c.expr.constant_part().clone(), c.rel));
    }

    let slack_count = rows.iter().filter(|r| r.2 == Rel::Ge).count();
    let mut next_slack = n;
    let mut next_art = n + slack_count;
    let mut t = Tableau {
        rows: Vec::with_capacity(rows.len()),
        rhs: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        cost: Vec::new(),
        value: Rational::zero(),
        enterable: Vec::new(),
        pivots: 0,
    };
    let mut artificial_rows = Vec::new();
    for (mut row, mut b, rel) in rows {
        let mut basic = None;
        match rel {
            Rel::Ge => {
                // row - s = b; flip to -row + s = -b when that keeps rhs >= 0
                let s = next_slack;
                next_slack += 1;
                if !b.is_positive() {
                    for (_, v) in row.iter_mut() {
                        *v = -v.clone();
                    }
                    b = -b;
                    row.push((s, Rational::one()));
                    basic = Some(s);
                } else {
                    row.push((s, -Rational::one()));
                }
            }
            Rel::Eq => {
                if b.is_negative() {
                    for (_, v) in row.iter_mut() {
                        *v = -v.clone();
                    }
                    b = -b;
                }
            }
        }
        let basic = match basic {
            Some(s) => s,
            None => {
                let a = next_art;
                next_art += 1;
                row.push((a, Rational::one()));
                artificial_rows.push(t.rows.len());
                a
            }
        };
        t.rows.push(row);
        t.rhs.push(b);
        t.basis.push(basic);
    }
    let total = next_art;
    let first_art = n + slack_count;
    t.enterable = vec![true; total];

    if !artificial_rows.is_empty() {
        let mut costs = vec![Rational::zero(); total];
        for c in costs.iter_mut().skip(first_art) {
            *c = Rational::one();
        }
        t.set_costs(&costs);
        t.optimize()?;
        if t.value.is_positive() {
            return Err(LpError::Infeasible);
        }
        // drive remaining (zero-valued) artificials out of the basis
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= first_art {
                let replacement = t.rows[r]
                    .iter()
                    .find(|(c, v)| *c < first_art && !v.is_zero())
                    .map(|(c, _)| *c);
                match replacement {
                    Some(c) => {
                        t.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        // redundant row
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in t.rows.iter_mut() {
            row.retain(|(c, _)| *c < first_art);
        }
        for e in t.enterable.iter_mut().skip(first_art) {
            *e = false;
        }
    }

    let mut costs = vec![Rational::zero(); total];
    for (v, w) in objective.weights() {
        costs[index(v)] = w.clone();
    }
    t.set_costs(&costs);
    t.optimize()?;

    let mut values = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            values[b] = t.rhs[r].clone();
        }
    }
    let mut assignment = Assignment::new();
    for (i, v) in vars.iter().enumerate() {
        if values[i].is_negative() {
            return Err(LpError::Internal(format!("negative value for {v}")));
        }
        assignment.set(*v, values[i].clone());
    }
    for c in constraints {
        match c.holds(&assignment) {
            Ok(true) => {}
            Ok(false) => {
                return Err(LpError::Internal(format!(
                    "solution violates constraint `{c}` ({})",
                    c.tag
                )))
            }
            Err(e) => return Err(LpError::Internal(e.to_string())),
        }
    }
    let value = objective
        .value(&assignment)
        .map_err(|e| LpError::Internal(e.to_string()))?;
    Ok(Solution {
        assignment,
        objective: value,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinExpr;
    use crate::rational::rat;

    fn expr(terms: &[(u32, i64)], k: i64) -> LinExpr {
        let mut e = LinExpr::constant(rat(k));
        for (v, c) in terms {
            e.add_term(Var(*v), rat(*c));
        }
        e
    }

    fn obj(weights: &[(u32, i64)]) -> Objective {
        let mut o = Objective::new();
        for (v, w) in weights {
            o.add(Var(*v), rat(*w));
        }
        o
    }

    #[test]
    fn single_lower_bound() {
        let cs = [Constraint::ge(expr(&[(0, 1)], -3), "x>=3")];
        let s = solve(&cs, &obj(&[(0, 1)])).unwrap();
        assert_eq!(s.assignment.value(Var(0)).unwrap(), rat(3));
        assert_eq!(s.objective, rat(3));
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let cs = [
            Constraint::ge(expr(&[(0, 1)], -1), "x>=1"),
            Constraint::ge(expr(&[(0, -1)], 0), "-x>=0"),
        ];
        assert_eq!(solve(&cs, &obj(&[(0, 1)])), Err(LpError::Infeasible));
    }

    #[test]
    fn two_variable_optimum() {
        // min 2a + b s.t. a + b >= 4, a >= 1
        let cs = [
            Constraint::ge(expr(&[(0, 1), (1, 1)], -4), "sum"),
            Constraint::ge(expr(&[(0, 1)], -1), "a"),
        ];
        let s = solve(&cs, &obj(&[(0, 2), (1, 1)])).unwrap();
        assert_eq!(s.assignment.value(Var(0)).unwrap(), rat(1));
        assert_eq!(s.assignment.value(Var(1)).unwrap(), rat(3));
        assert_eq!(s.objective, rat(5));
    }

    #[test]
    fn equalities_and_redundant_rows() {
        let cs = [
            Constraint::eq(expr(&[(0, 1), (1, -1)], 0), "a=b"),
            Constraint::eq(expr(&[(0, 2), (1, -2)], 0), "2a=2b"),
            Constraint::ge(expr(&[(1, 1)], -2), "b>=2"),
        ];
        let s = solve(&cs, &obj(&[(0, 1), (1, 1)])).unwrap();
        assert_eq!(s.assignment.value(Var(0)).unwrap(), rat(2));
        assert_eq!(s.objective, rat(4));
    }

    #[test]
    fn trivial_constraints() {
        let cs = [Constraint::ge(expr(&[], -1), "bad")];
        assert_eq!(solve(&cs, &Objective::new()), Err(LpError::Infeasible));
        let cs = [Constraint::eq(expr(&[], 0), "ok")];
        assert!(solve(&cs, &Objective::new()).is_ok());
    }

    #[test]
    fn deterministic() {
        let cs = [
            Constraint::ge(expr(&[(0, 1), (1, 1), (2, 1)], -1), "s"),
            Constraint::ge(expr(&[(0, 1), (2, -1)], 0), "t"),
        ];
        let o = obj(&[(0, 1), (1, 1), (2, 1)]);
        assert_eq!(solve(&cs, &o).unwrap(), solve(&cs, &o).unwrap());
    }
}
