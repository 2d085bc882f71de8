//! Small square matrices over a cyclotomic field.

use std::fmt;
use std::sync::Arc;

use crate::arith::Q;
use crate::cyclotomic::{Cyclo, CycloField};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mat {
    d: usize,
    e: Vec<Cyclo>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 1 {
            return write!(f, "{}", self.e[0]);
        }
        let rows: Vec<String> = (0..self.d)
            .map(|i| {
                let r: Vec<String> = (0..self.d).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl Mat {
    pub fn zero(field: &Arc<CycloField>, d: usize) -> Self {
        Mat {
            d,
            e: vec![Cyclo::zero(field); d * d],
        }
    }

    pub fn scalar(c: Cyclo) -> Self {
        Mat { d: 1, e: vec![c] }
    }

    pub fn diag(entries: Vec<Cyclo>) -> Self {
        let d = entries.len();
        let field = entries[0].field().clone();
        let mut m = Self::zero(&field, d);
        for (i, c) in entries.into_iter().enumerate() {
            m.e[i * d + i] = c;
        }
        m
    }

    pub fn identity(field: &Arc<CycloField>, d: usize) -> Self {
        Self::diag(vec![Cyclo::one(field); d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclo {
        &self.e[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Cyclo) {
        self.e[i * self.d + j] = c;
    }

    pub fn entries(&self) -> &[Cyclo] {
        &self.e
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, r: &Q) -> Self {
        Mat {
            d: self.d,
            e: self.e.iter().map(|c| c.scale(r)).collect(),
        }
    }

    pub fn scale_c(&self, c: &Cyclo) -> Self {
        Mat {
            d: self.d,
            e: self.e.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, o: &Mat) -> Self {
        Mat {
            d: self.d,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Mat) -> Self {
        Mat {
            d: self.d,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, o: &Mat) -> Self {
        if self.d == 1 {
            return Mat::scalar(&self.e[0] * &o.e[0]);
        }
        let d = self.d;
        let field = self.e[0].field().clone();
        let mut out = Self::zero(&field, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = Cyclo::zero(&field);
                for l in 0..d {
                    let (a, b) = (self.get(i, l), o.get(l, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// `diag(left) * self * diag(right)`.
    pub fn twist(&self, left: &[Cyclo], right: &[Cyclo]) -> Self {
        let d = self.d;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                let c = self.get(i, j);
                if !c.is_zero() {
                    out.set(i, j, &(&left[i] * c) * &right[j]);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let d = self.d;
        let mut out = self.clone();
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, self.get(j, i).conj());
            }
        }
        out
    }
}
