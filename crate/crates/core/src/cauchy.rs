//! Cauchy matrices: entry `(i, j)` is `1 / (x_i - y_j)` for an injective
//! sequence `x ∪ y`. Every square submatrix of such a matrix is nonsingular.

use thiserror::Error;

use crate::gf::PrimeField;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CauchyError {
    #[error("value {0} appears more than once in x ∪ y")]
    NotInjective(u32),
    #[error("a {s}x{t} Cauchy matrix needs q >= {needed}, got q = {q}")]
    FieldTooSmall {
        s: usize,
        t: usize,
        needed: usize,
        q: u32,
    },
    #[error("value {value} is not a residue of GF({q})")]
    OutOfField { value: u32, q: u32 },
}

/// Evaluation points of a Cauchy matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauchySpec {
    field: PrimeField,
    xs: Vec<u32>,
    ys: Vec<u32>,
}

impl CauchySpec {
    pub fn new(field: PrimeField, xs: Vec<u32>, ys: Vec<u32>) -> Result<Self, CauchyError> {
        let (s, t) = (xs.len(), ys.len());
        if s + t > field.size() {
            return Err(CauchyError::FieldTooSmall {
                s,
                t,
                needed: s + t,
                q: field.modulus(),
            });
        }
        let mut seen = vec![false; field.size()];
        for &v in xs.iter().chain(&ys) {
            if !field.contains(v) {
                return Err(CauchyError::OutOfField {
                    value: v,
                    q: field.modulus(),
                });
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(CauchyError::NotInjective(v));
            }
        }
        Ok(Self { field, xs, ys })
    }

    /// `x_i = t + i`, `y_j = j` (zero-based), which is injective whenever
    /// `s + t <= q`.
    pub fn default_for(s: usize, t: usize, field: PrimeField) -> Result<Self, CauchyError> {
        if s + t > field.size() {
            return Err(CauchyError::FieldTooSmall {
                s,
                t,
                needed: s + t,
                q: field.modulus(),
            });
        }
        let xs = (0..s).map(|i| (t + i) as u32).collect();
        let ys = (0..t).map(|j| j as u32).collect();
        Self::new(field, xs, ys)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn xs(&self) -> &[u32] {
        &self.xs
    }

    pub fn ys(&self) -> &[u32] {
        &self.ys
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.xs.len(), self.ys.len())
    }

    pub fn build(&self) -> Matrix {
        let f = self.field;
        Matrix::from_fn(f, self.xs.len(), self.ys.len(), |i, j| {
            f.inv(f.sub(self.xs[i], self.ys[j]))
                .expect("x and y are disjoint")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u32) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn reproduces_psi_over_f7() {
        let spec = CauchySpec::new(field(7), vec![4, 5, 6], vec![1, 2, 3]).unwrap();
        assert_eq!(
            spec.build(),
            Matrix::from_rows(field(7), &[[5, 4, 1], [2, 5, 4], [3, 2, 5]]).unwrap()
        );
    }

    #[test]
    fn single_entry() {
        let spec = CauchySpec::new(field(5), vec![1], vec![2]).unwrap();
        assert_eq!(spec.build().data(), &[4]);
    }

    #[test]
    fn rejects_repeated_value() {
        assert_eq!(
            CauchySpec::new(field(7), vec![1, 2], vec![2, 3]),
            Err(CauchyError::NotInjective(2))
        );
        assert_eq!(
            CauchySpec::new(field(7), vec![1, 1], vec![3]),
            Err(CauchyError::NotInjective(1))
        );
    }

    #[test]
    fn rejects_out_of_field() {
        assert!(matches!(
            CauchySpec::new(field(7), vec![9], vec![0]),
            Err(CauchyError::OutOfField { value: 9, q: 7 })
        ));
    }

    #[test]
    fn default_sequences() {
        let s = CauchySpec::default_for(3, 3, field(7)).unwrap();
        assert_eq!(s.xs(), &[3, 4, 5]);
        assert_eq!(s.ys(), &[0, 1, 2]);
        let s = CauchySpec::default_for(1, 1, field(2)).unwrap();
        assert_eq!(s.xs(), &[1]);
        assert_eq!(s.ys(), &[0]);
        assert!(matches!(
            CauchySpec::default_for(4, 4, field(7)),
            Err(CauchyError::FieldTooSmall {
                needed: 8,
                q: 7,
                ..
            })
        ));
    }

    #[test]
    fn default_builds_whenever_field_is_large_enough() {
        for q in [2u32, 3, 5, 7, 11, 13] {
            let f = field(q);
            for s in 1..=q as usize {
                for t in 1..=(q as usize - s.min(q as usize)) {
                    let m = CauchySpec::default_for(s, t, f).unwrap().build();
                    assert_eq!(m.shape(), (s, t));
                    assert!(m.data().iter().all(|&v| v != 0));
                }
            }
        }
    }
}
