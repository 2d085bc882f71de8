use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{egcd_big, pow_big};
use crate::error::{HeckeError, Result};

/// An element of `Z_p` known modulo `p^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct ZpApprox {
    p: u64,
    prec: u32,
    residue: BigInt,
}

impl fmt::Debug for ZpApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.p, self.prec)
    }
}

impl ZpApprox {
    pub fn new(p: u64, prec: u32, value: &BigInt) -> Self {
        let residue = value.mod_floor(&pow_big(p, prec));
        ZpApprox { p, prec, residue }
    }

    pub fn from_i64(p: u64, prec: u32, v: i64) -> Self {
        Self::new(p, prec, &BigInt::from(v))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Representative in `[0, p^N)`.
    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> BigInt {
        pow_big(self.p, self.prec)
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "mixing Z_p for different primes");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        Self::new(self.p, self.prec.min(o.prec), &(&self.residue + &o.residue))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        Self::new(self.p, self.prec.min(o.prec), &(&self.residue - &o.residue))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.prec, &-&self.residue)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        Self::new(self.p, self.prec.min(o.prec), &(&self.residue * &o.residue))
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.prec > 0 && !(&self.residue % self.p).is_zero()
    }

    /// Valuation, or `None` when the element is zero at this precision.
    pub fn valuation(&self) -> Option<u32> {
        if self.residue.is_zero() {
            return None;
        }
        let mut v = 0;
        let mut r = self.residue.clone();
        while (&r % self.p).is_zero() {
            r /= self.p;
            v += 1;
        }
        Some(v)
    }

    /// Inverse of a unit by the extended Euclidean algorithm.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(HeckeError::Domain(format!(
                "{self:?} is not a unit of Z_{}",
                self.p
            )));
        }
        let (g, x, _) = egcd_big(&self.residue, &self.modulus());
        debug_assert!(g.is_one());
        Ok(Self::new(self.p, self.prec, &x))
    }

    /// Base-`p` digits, least significant first, exactly `N` of them.
    pub fn digits(&self) -> Vec<u64> {
        let mut r = self.residue.clone();
        let pb = BigInt::from(self.p);
        (0..self.prec)
            .map(|_| {
                let (q, d) = r.div_mod_floor(&pb);
                r = q;
                u64::try_from(d).expect("digit")
            })
            .collect()
    }

    pub fn from_digits(p: u64, digits: &[u64]) -> Self {
        let mut r = BigInt::zero();
        for d in digits.iter().rev() {
            r = r * p + d;
        }
        Self::new(p, digits.len() as u32, &r)
    }

    pub fn truncate(&self, prec: u32) -> Self {
        Self::new(self.p, prec.min(self.prec), &self.residue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_three_mod_32() {
        let u = ZpApprox::from_i64(2, 5, 3);
        assert_eq!(u.invert().unwrap().residue(), &BigInt::from(11));
        assert!(ZpApprox::from_i64(2, 5, 4).invert().is_err());
    }

    #[test]
    fn digits_round_trip() {
        let u = ZpApprox::from_i64(3, 6, -1);
        assert_eq!(u.digits(), vec![2; 6]);
        assert_eq!(ZpApprox::from_digits(3, &u.digits()), u);
        assert_eq!(ZpApprox::from_i64(5, 4, 50).valuation(), Some(2));
    }
}
