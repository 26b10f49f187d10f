//! Dense-tableau dual simplex for `min c·x, x ≥ 0` with `c ≥ 0`, used as an
//! independent LP oracle.
//!
//! Nonnegative costs make the all-slack basis dual feasible, so no phase 1
//! is needed.

use hopnet::scalar::LpFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpError {
    NegativeCost(usize),
    Infeasible(usize),
    PivotLimit(usize),
}

#[derive(Debug, Clone)]
pub struct DualSimplex<F: LpFloat> {
    structural: usize,
    cost: Vec<F>,
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    reduced: Vec<F>,
    tolerance: F,
    pivots: usize,
}

impl<F: LpFloat> DualSimplex<F> {
    pub fn new(cost: Vec<F>, tolerance: F) -> Result<Self, LpError> {
        if let Some(j) = cost.iter().position(|&c| c < F::zero()) {
            return Err(LpError::NegativeCost(j));
        }
        let structural = cost.len();
        Ok(DualSimplex {
            structural,
            reduced: cost.clone(),
            cost,
            rows: Vec::new(),
            rhs: Vec::new(),
            basis: Vec::new(),
            basic_row: vec![None; structural],
            tolerance,
            pivots: 0,
        })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn width(&self) -> usize {
        self.reduced.len()
    }

    /// Appends `Σ coeffs · x (sense) rhs` with a fresh slack column, written
    /// in terms of the current basis.
    pub fn add_row(&mut self, coeffs: &[(usize, F)], sense: Sense, rhs: F) {
        for row in &mut self.rows {
            row.push(F::zero());
        }
        self.reduced.push(F::zero());
        self.basic_row.push(None);
        let width = self.width();
        let sign = match sense {
            Sense::Le => F::one(),
            Sense::Ge => -F::one(),
        };
        let mut row = vec![F::zero(); width];
        let mut b = sign * rhs;
        for &(j, a) in coeffs {
            debug_assert!(j < self.structural);
            row[j] += sign * a;
        }
        for &(j, _) in coeffs {
            let alpha = row[j];
            if alpha == F::zero() {
                continue;
            }
            if let Some(i) = self.basic_row[j] {
                let src = &self.rows[i];
                for (dst, &s) in row.iter_mut().zip(src) {
                    if s != F::zero() {
                        *dst -= alpha * s;
                    }
                }
                row[j] = F::zero();
                b -= alpha * self.rhs[i];
            }
        }
        row[width - 1] = F::one();
        let r = self.rows.len();
        self.rows.push(row);
        self.rhs.push(b);
        self.basis.push(width - 1);
        self.basic_row[width - 1] = Some(r);
    }

    /// Re-optimizes until every basic variable is nonnegative.
    pub fn solve(&mut self, max_pivots: usize) -> Result<(), LpError> {
        let tol = self.tolerance;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let start = self.pivots;
        loop {
            let leaving = if bland {
                (0..self.rows.len()).filter(|&i| self.rhs[i] < -tol).min_by_key(|&i| self.basis[i])
            } else {
                let mut best: Option<usize> = None;
                for i in 0..self.rows.len() {
                    if self.rhs[i] < -tol {
                        let better = match best {
                            None => true,
                            Some(b) => {
                                self.rhs[i] < self.rhs[b] || (self.rhs[i] == self.rhs[b] && self.basis[i] < self.basis[b])
                            }
                        };
                        if better {
                            best = Some(i);
                        }
                    }
                }
                best
            };
            let Some(r) = leaving else { return Ok(()) };

            let row = &self.rows[r];
            let pivot_tol = tol * F::of(100.0);
            let candidates = || {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &a)| a < -pivot_tol && self.basic_row[j].is_none())
                    .map(|(j, &a)| (j, -a, self.reduced[j].max(F::zero())))
            };
            let entering = if bland {
                candidates().fold(None, |best: Option<(usize, F, F)>, (j, a, d)| match best {
                    Some((_, _, t)) if d / a >= t => best,
                    _ => Some((j, a, d / a)),
                })
            } else {
                // Harris two-pass ratio test
                let bound = candidates().map(|(_, a, d)| (d + tol) / a).fold(F::infinity(), F::min);
                candidates().filter(|&(_, a, d)| d / a <= bound).fold(None, |best: Option<(usize, F, F)>, (j, a, d)| {
                    match best {
                        Some((_, b, _)) if a <= b => best,
                        _ => Some((j, a, d / a)),
                    }
                })
            };
            let Some((e, _, ratio)) = entering else {
                return Err(LpError::Infeasible(r));
            };

            if ratio <= tol {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
            if self.pivots - start >= max_pivots {
                return Err(LpError::PivotLimit(max_pivots));
            }
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        self.pivots += 1;
        let tiny = F::of(1e-13);
        let p = self.rows[r][e];
        let pivot_row = {
            let row = &mut self.rows[r];
            for v in row.iter_mut() {
                *v /= p;
                if v.abs() < tiny {
                    *v = F::zero();
                }
            }
            row[e] = F::one();
            row.clone()
        };
        self.rhs[r] /= p;
        let rhs_r = self.rhs[r];
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| pivot_row[j] != F::zero()).collect();

        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][e];
            if f == F::zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for &j in &nz {
                let v = row[j] - f * pivot_row[j];
                row[j] = if v.abs() < tiny { F::zero() } else { v };
            }
            row[e] = F::zero();
            self.rhs[i] -= f * rhs_r;
        }
        let f = self.reduced[e];
        if f != F::zero() {
            for &j in &nz {
                self.reduced[j] -= f * pivot_row[j];
            }
        }
        self.reduced[e] = F::zero();

        let old = self.basis[r];
        self.basic_row[old] = None;
        self.basis[r] = e;
        self.basic_row[e] = Some(r);
    }

    /// Values of the structural variables at the current basis.
    pub fn primal(&self) -> Vec<F> {
        let mut x = vec![F::zero(); self.structural];
        for (i, &col) in self.basis.iter().enumerate() {
            if col < self.structural {
                x[col] = self.rhs[i].max(F::zero());
            }
        }
        x
    }

    /// `c·x` at the current basis.
    pub fn objective(&self) -> F {
        self.primal().iter().zip(&self.cost).fold(F::zero(), |acc, (&x, &c)| acc + x * c)
    }
}
