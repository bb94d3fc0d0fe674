//! Exact dense simplex over rationals with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

/// `Σ coeffs·x ≥ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// Minimise `objective·x` over free variables subject to `≥` constraints.
/// `≤` constraints are stored negated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    /// The objective is unbounded below, or the problem is infeasible as well.
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn geq(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, rhs });
    }

    pub fn leq(&mut self, coeffs: Vec<(usize, Rational)>, rhs: Rational) {
        let coeffs = coeffs.into_iter().map(|(j, a)| (j, -a)).collect();
        self.constraints.push(Constraint { coeffs, rhs: -rhs });
    }

    /// Solves the program through its dual `max b·y, Aᵀy = c, y ≥ 0`, whose
    /// tableau has one row per variable. The primal minimiser is read off
    /// the final reduced costs of the artificial columns.
    pub fn solve(&self) -> LpOutcome {
        let n = self.num_vars;
        let m = self.constraints.len();
        // rows scaled so that the right-hand side c is nonnegative
        let sign: Vec<Rational> = self
            .objective
            .iter()
            .map(|c| if c.is_negative() { -Rational::one() } else { Rational::one() })
            .collect();
        let mut tab = Tableau::new(n, m);
        for (k, con) in self.constraints.iter().enumerate() {
            for (j, a) in &con.coeffs {
                tab.rows[*j][k] += a * &sign[*j];
            }
        }
        for j in 0..n {
            tab.rows[j][m + j] = Rational::one();
            tab.rhs[j] = &self.objective[j] * &sign[j];
        }
        // phase 1: minimise the sum of artificials
        let mut cost = vec![Rational::zero(); m + n];
        for c in cost.iter_mut().skip(m) {
            *c = Rational::one();
        }
        tab.price(&cost);
        if !tab.run(m + n) {
            unreachable!("phase 1 is bounded below by zero");
        }
        if tab.objective_value(&cost).is_positive() {
            return LpOutcome::Unbounded;
        }
        tab.expel_artificials(m);
        // phase 2: minimise −b·y, artificials barred from entering
        let mut cost: Vec<Rational> = self.constraints.iter().map(|c| -c.rhs.clone()).collect();
        cost.extend(std::iter::repeat_n(Rational::zero(), n));
        tab.price(&cost);
        if !tab.run(m) {
            return LpOutcome::Infeasible;
        }
        let value = -tab.objective_value(&cost);
        let x = (0..n).map(|j| &sign[j] * &tab.reduced[m + j]).collect();
        LpOutcome::Optimal { value, x }
    }

    /// Largest violation of a constraint by `x` (zero when feasible).
    pub fn max_violation(&self, x: &[Rational]) -> Rational {
        self.constraints
            .iter()
            .map(|c| {
                let lhs = c.coeffs.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]);
                let gap = &c.rhs - lhs;
                if gap.is_positive() {
                    gap
                } else {
                    Rational::zero()
                }
            })
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
}

impl Tableau {
    fn new(n: usize, m: usize) -> Self {
        Tableau {
            rows: vec![vec![Rational::zero(); m + n]; n],
            rhs: vec![Rational::zero(); n],
            basis: (m..m + n).collect(),
            reduced: Vec::new(),
        }
    }

    fn price(&mut self, cost: &[Rational]) {
        let mut r = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (rj, a) in r.iter_mut().zip(row) {
                if !a.is_zero() {
                    *rj -= cb * a;
                }
            }
        }
        self.reduced = r;
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(Rational::zero(), |acc, (&b, v)| acc + &cost[b] * v)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for a in self.rows[row].iter_mut() {
            if !a.is_zero() {
                *a /= &p;
            }
        }
        self.rhs[row] /= &p;
        let prow = self.rows[row].clone();
        let prhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for (a, q) in self.rows[i].iter_mut().zip(&prow) {
                if !q.is_zero() {
                    *a -= &f * q;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        let f = self.reduced[col].clone();
        if !f.is_zero() {
            for (a, q) in self.reduced.iter_mut().zip(&prow) {
                if !q.is_zero() {
                    *a -= &f * q;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule with entering columns restricted to `0..limit`.
    /// Returns `false` if the objective is unbounded below.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| self.reduced[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else { return false };
            self.pivot(row, col);
        }
    }

    /// Pivots zero-level artificials out of the basis where a real column
    /// allows it; rows where none does are redundant and keep their
    /// artificial, which then stays at zero.
    fn expel_artificials(&mut self, m: usize) {
        for i in 0..self.rows.len() {
            if self.basis[i] < m {
                continue;
            }
            if let Some(col) = (0..m).find(|&j| !self.rows[i][j].is_zero()) {
                self.pivot(i, col);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn one_variable_bound() {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = rat(1, 1);
        lp.geq(vec![(0, rat(1, 1))], rat(3, 1));
        assert_eq!(lp.solve(), LpOutcome::Optimal { value: rat(3, 1), x: vec![rat(3, 1)] });
    }

    #[test]
    fn small_two_dimensional_program() {
        // min −x − y  s.t. x + 2y ≤ 4, 3x + y ≤ 6, x ≥ 0, y ≥ 0 → x = 8/5, y = 6/5
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat(-1, 1), rat(-1, 1)];
        lp.leq(vec![(0, rat(1, 1)), (1, rat(2, 1))], rat(4, 1));
        lp.leq(vec![(0, rat(3, 1)), (1, rat(1, 1))], rat(6, 1));
        lp.geq(vec![(0, rat(1, 1))], rat(0, 1));
        lp.geq(vec![(1, rat(1, 1))], rat(0, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(-14, 5));
                assert_eq!(x, vec![rat(8, 5), rat(6, 5)]);
                assert_eq!(lp.max_violation(&x), rat(0, 1));
                assert_eq!(lp.objective_at(&x), value);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_unbounded_and_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = rat(-1, 1);
        lp.geq(vec![(0, rat(1, 1))], rat(0, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
        let mut lp = LinearProgram::new(1);
        lp.objective[0] = rat(1, 1);
        lp.geq(vec![(0, rat(1, 1))], rat(2, 1));
        lp.leq(vec![(0, rat(1, 1))], rat(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn degenerate_and_redundant_rows() {
        // min x + y with x ≥ 1, y ≥ 1, x + y ≥ 2 (degenerate vertex)
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![rat(1, 1), rat(1, 1)];
        lp.geq(vec![(0, rat(1, 1))], rat(1, 1));
        lp.geq(vec![(1, rat(1, 1))], rat(1, 1));
        lp.geq(vec![(0, rat(1, 1)), (1, rat(1, 1))], rat(2, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(2, 1));
                assert_eq!(lp.max_violation(&x), rat(0, 1));
                assert_eq!(lp.objective_at(&x), rat(2, 1));
            }
            other => panic!("{other:?}"),
        }
        // a variable absent from the objective and constraints
        let mut lp = LinearProgram::new(2);
        lp.objective[0] = rat(1, 1);
        lp.geq(vec![(0, rat(1, 1))], rat(-2, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-2, 1)),
            other => panic!("{other:?}"),
        }
    }
}
