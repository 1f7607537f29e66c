//! Brute-force LP oracle: the optimum of a small system over `x >= 0` is
//! attained at a vertex, so try every choice of tight rows.

use aara_fx::lp::{Constraint, LinExpr, Objective, Var};
use aara_fx::rational::{rat, Rational};
use num_traits::{Signed, Zero};

/// One row `coeffs . x + constant (>= | =) 0` over `Var(0) .. Var(n-1)`.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<i64>,
    pub constant: i64,
    pub eq: bool,
}

pub fn to_constraints(rows: &[Row]) -> Vec<Constraint> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let mut e = LinExpr::constant(rat(r.constant));
            for (j, c) in r.coeffs.iter().enumerate() {
                if *c != 0 {
                    e.add_term(Var(j as u32), rat(*c));
                }
            }
            let tag = format!("row{i}");
            if r.eq {
                Constraint::eq(e, tag)
            } else {
                Constraint::ge(e, tag)
            }
        })
        .collect()
}

pub fn to_objective(weights: &[i64]) -> Objective {
    let mut o = Objective::new();
    for (j, w) in weights.iter().enumerate() {
        o.add(Var(j as u32), rat(*w));
    }
    o
}

/// Solves the square system `a x = b`; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                let pivot = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= &f * p;
                }
                let d = &f * &b[col];
                b[r] -= d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn feasible(rows: &[Row], x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().all(|r| {
            let val: Rational = r.coeffs.iter().zip(x).map(|(c, v)| rat(*c) * v).sum::<Rational>() + rat(r.constant);
            if r.eq {
                val.is_zero()
            } else {
                !val.is_negative()
            }
        })
}

/// Minimum of `weights . x` subject to `rows` and `x >= 0` over `n`
/// variables; `None` when infeasible. Weights must be positive.
pub fn vertex_minimum(n: usize, rows: &[Row], weights: &[i64]) -> Option<Rational> {
    // candidate tight rows: each constraint, then each bound x_j = 0
    let mut lines: Vec<(Vec<Rational>, Rational)> = rows
        .iter()
        .map(|r| (r.coeffs.iter().map(|c| rat(*c)).collect(), rat(-r.constant)))
        .collect();
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = rat(1);
        lines.push((e, Rational::zero()));
    }
    let mut best: Option<Rational> = None;
    let m = lines.len();
    let mut pick = Vec::new();
    fn choose(
        start: usize,
        m: usize,
        n: usize,
        pick: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if pick.len() == n {
            f(pick);
            return;
        }
        for i in start..m {
            pick.push(i);
            choose(i + 1, m, n, pick, f);
            pick.pop();
        }
    }
    choose(0, m, n, &mut pick, &mut |sel| {
        let a = sel.iter().map(|&i| lines[i].0.clone()).collect();
        let b = sel.iter().map(|&i| lines[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(rows, &x) {
                let v: Rational = weights.iter().zip(&x).map(|(w, v)| rat(*w) * v).sum();
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
        }
    });
    if n == 0 && feasible(rows, &[]) {
        best = Some(Rational::zero());
    }
    best
}

/// Whether `rows` hold at the given assignment values.
pub fn satisfies(rows: &[Row], x: &[Rational]) -> bool {
    feasible(rows, x)
}

