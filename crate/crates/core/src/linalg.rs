//! Dense Gauss-Jordan elimination over [`Scalar`].
//!
//! Exact inputs eliminate exactly. Float inputs use partial pivoting and treat
//! entries below `tol` (relative to the largest entry) as zero.

use crate::scalar::Scalar;

/// Reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: Vec<Vec<Scalar>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
    /// Smallest accepted pivot relative to the largest input entry.
    pub min_pivot: Option<Scalar>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of the nullspace, one vector per free column (free entry = 1).
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let like = match self.rows.first().and_then(|r| r.first()) {
            Some(x) => x.zero_like(),
            None => return Vec::new(),
        };
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&j| {
                let mut v = vec![like.clone(); self.ncols];
                v[j] = like.one_like();
                for (i, &pc) in self.pivots.iter().enumerate() {
                    v[pc] = -&self.rows[i][j];
                }
                v
            })
            .collect()
    }
}

fn max_abs(rows: &[Vec<Scalar>]) -> Option<Scalar> {
    rows.iter()
        .flat_map(|r| r.iter())
        .map(|x| x.abs())
        .fold(None, |acc: Option<Scalar>, x| match acc {
            Some(a) if a >= x => Some(a),
            _ => Some(x),
        })
}

/// Row reduces `rows` (each of length `ncols`). `tol` is ignored for exact
/// entries.
pub fn rref(mut rows: Vec<Vec<Scalar>>, ncols: usize, tol: Option<&Scalar>) -> Rref {
    let exact = rows.iter().flatten().all(|x| x.is_exact());
    let threshold = match (exact, tol, max_abs(&rows)) {
        (false, Some(t), Some(m)) => Some(t * &m),
        _ => None,
    };
    let is_zero = |x: &Scalar| match &threshold {
        Some(t) => x.abs() <= *t,
        None => x.is_zero(),
    };
    let mut pivots = Vec::new();
    let mut min_pivot: Option<Scalar> = None;
    let mut top = 0;
    for col in 0..ncols {
        if top == rows.len() {
            break;
        }
        let pick = if exact {
            (top..rows.len()).find(|&i| !rows[i][col].is_zero())
        } else {
            (top..rows.len())
                .filter(|&i| !is_zero(&rows[i][col]))
                .max_by(|&a, &b| {
                    rows[a][col]
                        .abs()
                        .partial_cmp(&rows[b][col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        };
        let Some(pr) = pick else { continue };
        rows.swap(top, pr);
        let piv = rows[top][col].clone();
        let pa = piv.abs();
        if min_pivot.as_ref().is_none_or(|m| pa < *m) {
            min_pivot = Some(pa);
        }
        for x in rows[top].iter_mut() {
            *x = &*x / &piv;
        }
        let prow = rows[top].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == top || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(prow.iter()) {
                if !p.is_zero() {
                    *x = &*x - &(&f * p);
                }
            }
            if !exact {
                row[col] = f.zero_like();
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    if let (Some(m), Some(big)) = (min_pivot.as_mut(), max_abs(&rows)) {
        if !big.is_zero() {
            *m = &*m / &big;
        }
    }
    Rref {
        rows,
        pivots,
        ncols,
        min_pivot,
    }
}

/// Whether the unit vector `e_col` lies in the row space.
pub fn forces_zero(r: &Rref, col: usize) -> bool {
    r.nullspace().iter().all(|v| v[col].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mode;

    #[test]
    fn exact_nullspace() {
        let m = Mode::Exact;
        let rows = vec![
            vec![m.int(1), m.int(2), m.int(3)],
            vec![m.int(2), m.int(4), m.int(6)],
            vec![m.int(0), m.int(1), m.int(1)],
        ];
        let r = rref(rows.clone(), 3, None);
        assert_eq!(r.rank(), 2);
        let ns = r.nullspace();
        assert_eq!(ns.len(), 1);
        for row in &rows {
            let dot: Scalar = row.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert!(!forces_zero(&r, 0));
    }

    #[test]
    fn float_rank() {
        let m = Mode::Float { bits: 256 };
        let third = m.ratio(1, 3);
        let rows = vec![
            vec![third.clone(), m.int(1)],
            vec![m.int(1), m.int(3)],
        ];
        let r = rref(rows, 2, Some(&m.pow10(-60)));
        assert_eq!(r.rank(), 1);
    }
}
