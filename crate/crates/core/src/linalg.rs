//! Dense linear algebra over a [`Field`]. Matrices are row-major `Vec<Vec<Fe>>`.
//!
//! Pivoting always takes the first nonzero entry; there is no notion of
//! numerical stability in a finite field.

use crate::gf::{Fe, Field};

pub type Matrix = Vec<Vec<Fe>>;

/// Reduced row echelon form. Returns the nonzero reduced rows and the pivot
/// column of each.
pub fn rref(field: &Field, rows: &[Vec<Fe>]) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = field.inv(m[r][c]).expect("pivot is nonzero");
        m[r] = field.scale_vec(inv, &m[r]);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = field.neg(m[i][c]);
                let pivot_row = m[r].clone();
                field.axpy(&mut m[i], factor, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(field: &Field, rows: &[Vec<Fe>]) -> usize {
    rref(field, rows).1.len()
}

/// Basis (as rows) of `{ v : rows * v^T = 0 }` for vectors of length `ncols`.
pub fn null_space(field: &Field, rows: &[Vec<Fe>], ncols: usize) -> Matrix {
    let (reduced, pivots) = rref(field, rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Fe::ZERO; ncols];
            v[f] = Fe::ONE;
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = field.neg(row[f]);
            }
            v
        })
        .collect()
}

/// Some solution `x` of `a * x = b` where `a` has `b.len()` rows, or `None`
/// if the system is inconsistent.
pub fn solve(field: &Field, a: &[Vec<Fe>], b: &[Fe]) -> Option<Vec<Fe>> {
    debug_assert_eq!(a.len(), b.len());
    let ncols = a.first().map_or(0, Vec::len);
    let augmented: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let (reduced, pivots) = rref(field, &augmented);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Fe::ZERO; ncols];
    for (row, &pc) in reduced.iter().zip(&pivots) {
        x[pc] = row[ncols];
    }
    Some(x)
}

pub fn mat_vec(field: &Field, m: &[Vec<Fe>], v: &[Fe]) -> Vec<Fe> {
    m.iter().map(|row| field.dot(row, v)).collect()
}

pub fn transpose(m: &[Vec<Fe>]) -> Matrix {
    let ncols = m.first().map_or(0, Vec::len);
    (0..ncols).map(|c| m.iter().map(|row| row[c]).collect()).collect()
}

/// Incrementally maintained row-reduced span, used to test membership of new
/// vectors one at a time.
#[derive(Debug, Clone)]
pub struct EchelonSpan {
    field: Field,
    rows: Vec<(usize, Vec<Fe>)>,
}

impl EchelonSpan {
    pub fn new(field: &Field) -> Self {
        EchelonSpan {
            field: field.clone(),
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Fe]) -> Vec<Fe> {
        let mut r = v.to_vec();
        for (pc, row) in &self.rows {
            let c = r[*pc];
            if !c.is_zero() {
                self.field.axpy(&mut r, self.field.neg(c), row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Adds `v` to the span; returns `false` if it was already inside.
    pub fn insert(&mut self, v: &[Fe]) -> bool {
        let r = self.reduce(v);
        let Some(pc) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = self.field.inv(r[pc]).expect("nonzero");
        let r = self.field.scale_vec(inv, &r);
        for (_, row) in self.rows.iter_mut() {
            let c = row[pc];
            if !c.is_zero() {
                self.field.axpy(row, self.field.neg(c), &r);
            }
        }
        self.rows.push((pc, r));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[u32]) -> Vec<Fe> {
        xs.iter().map(|&x| Fe(x)).collect()
    }

    #[test]
    fn null_space_is_orthogonal() {
        let f = Field::prime(7).unwrap();
        let m = vec![v(&[1, 2, 3, 4]), v(&[0, 1, 5, 6])];
        let ns = null_space(&f, &m, 4);
        assert_eq!(ns.len(), 2);
        for n in &ns {
            assert!(mat_vec(&f, &m, n).iter().all(|x| x.is_zero()));
        }
        assert_eq!(rank(&f, &ns), 2);
    }

    #[test]
    fn solve_consistent_and_not() {
        let f = Field::prime(5).unwrap();
        let a = vec![v(&[1, 1]), v(&[1, 2])];
        let x = solve(&f, &a, &v(&[3, 4])).unwrap();
        assert_eq!(mat_vec(&f, &a, &x), v(&[3, 4]));
        let singular = vec![v(&[1, 1]), v(&[2, 2])];
        assert_eq!(solve(&f, &singular, &v(&[1, 1])), None);
    }

    #[test]
    fn echelon_span_membership() {
        let f = Field::prime(7).unwrap();
        let mut span = EchelonSpan::new(&f);
        assert!(span.insert(&v(&[1, 2, 0])));
        assert!(!span.insert(&v(&[2, 4, 0])));
        assert!(span.insert(&v(&[0, 1, 1])));
        assert!(span.contains(&v(&[1, 3, 1])));
        assert!(!span.contains(&v(&[0, 0, 1])));
        assert_eq!(span.dim(), 2);
    }
}
