//! Exact Gaussian elimination over a field.

use crate::field::{FieldElement, FieldSpec};

/// Row-reduced echelon form built one row at a time.
#[derive(Debug, Clone)]
pub struct Echelon {
    spec: FieldSpec,
    ncols: usize,
    /// `(pivot column, row)`, each row scaled to 1 at its pivot and zero in
    /// every other pivot column.
    rows: Vec<(usize, Vec<FieldElement>)>,
}

impl Echelon {
    pub fn new(spec: FieldSpec, ncols: usize) -> Self {
        Echelon {
            spec,
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Adds a row; returns whether the rank grew.
    pub fn push(&mut self, mut row: Vec<FieldElement>) -> bool {
        assert_eq!(row.len(), self.ncols);
        for (pc, prow) in &self.rows {
            if !row[*pc].is_zero() {
                let factor = row[*pc].clone();
                for (x, p) in row.iter_mut().zip(prow) {
                    if !p.is_zero() {
                        *x = &*x - &(&factor * p);
                    }
                }
            }
        }
        let Some(pivot) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = row[pivot].inverse().expect("pivot is nonzero");
        for x in row.iter_mut() {
            *x = &*x * &inv;
        }
        for (_, prow) in self.rows.iter_mut() {
            if !prow[pivot].is_zero() {
                let factor = prow[pivot].clone();
                for (x, r) in prow.iter_mut().zip(&row) {
                    if !r.is_zero() {
                        *x = &*x - &(&factor * r);
                    }
                }
            }
        }
        self.rows.push((pivot, row));
        true
    }

    /// A basis of the solutions of `A v = 0`, one vector per free column,
    /// in column order.
    pub fn nullspace(&self) -> Vec<Vec<FieldElement>> {
        let mut pivot_of = vec![None; self.ncols];
        for (k, (pc, _)) in self.rows.iter().enumerate() {
            pivot_of[*pc] = Some(k);
        }
        (0..self.ncols)
            .filter(|c| pivot_of[*c].is_none())
            .map(|free| {
                let mut v = vec![FieldElement::zero(self.spec); self.ncols];
                v[free] = FieldElement::one(self.spec);
                for (pc, row) in &self.rows {
                    v[*pc] = -&row[free];
                }
                v
            })
            .collect()
    }
}
