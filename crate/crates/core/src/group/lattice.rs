//! Full-rank sublattices of `Z^2` in Hermite normal form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::Q;

/// The lattice spanned by the rows `(a, b)` and `(0, d)` with `a, d > 0` and `0 <= b < d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lattice2 {
    a: BigInt,
    b: BigInt,
    d: BigInt,
}

impl fmt::Debug for Lattice2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<({},{}),(0,{})>", self.a, self.b, self.d)
    }
}

impl Lattice2 {
    pub fn full() -> Self {
        Lattice2 {
            a: BigInt::one(),
            b: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    /// `aZ x dZ`.
    pub fn rectangular(a: i64, d: i64) -> Self {
        Self::from_rows(BigInt::from(a), BigInt::zero(), BigInt::from(d))
    }

    fn from_rows(a: BigInt, b: BigInt, d: BigInt) -> Self {
        assert!(a.is_positive() && d.is_positive());
        let b = b.mod_floor(&d);
        Lattice2 { a, b, d }
    }

    pub fn rows(&self) -> [(BigInt, BigInt); 2] {
        [
            (self.a.clone(), self.b.clone()),
            (BigInt::zero(), self.d.clone()),
        ]
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d
    }

    pub fn contains(&self, m: &BigInt, n: &BigInt) -> bool {
        if !m.is_multiple_of(&self.a) {
            return false;
        }
        let i = m / &self.a;
        (n - i * &self.b).is_multiple_of(&self.d)
    }

    pub fn contains_lattice(&self, other: &Lattice2) -> bool {
        other.rows().iter().all(|(m, n)| self.contains(m, n))
    }

    /// The sublattice `{(m, n) in self : g1 m + g2 n in Z}`.
    pub fn cut(&self, g1: &Q, g2: &Q) -> Lattice2 {
        // in basis coordinates (i, j): i c1 + j c2 in Z
        let a = Q::from_integer(self.a.clone());
        let b = Q::from_integer(self.b.clone());
        let d = Q::from_integer(self.d.clone());
        let c1 = g1 * &a + g2 * &b;
        let c2 = g2 * &d;
        let den = c1.denom().lcm(c2.denom());
        let a1 = (&c1 * Q::from_integer(den.clone())).to_integer();
        let a2 = (&c2 * Q::from_integer(den.clone())).to_integer();
        // A1 i + A2 j = 0 mod den
        let g = a2.gcd(&den);
        let step_i = &g / g.gcd(&a1);
        let step_j = &den / &g;
        // solve A2 j = -A1 step_i mod den
        let rhs = (-(&a1 * &step_i)).mod_floor(&den);
        let j0 = if den.is_one() {
            BigInt::zero()
        } else {
            let a2r = a2.mod_floor(&den);
            let (gg, x, _) = ext_gcd(&a2r, &den);
            debug_assert!(rhs.is_multiple_of(&gg));
            ((&rhs / &gg) * x).mod_floor(&step_j)
        };
        // rows in (i, j) coordinates: (step_i, j0), (0, step_j)
        let m = &step_i * &self.a;
        let n = &step_i * &self.b + &j0 * &self.d;
        let dd = &step_j * &self.d;
        Lattice2::from_rows(m, n, dd)
    }

    pub fn intersect(&self, other: &Lattice2) -> Lattice2 {
        // other: m/a2 in Z and (n - (m/a2) b2)/d2 in Z
        let a2 = Q::from_integer(other.a.clone());
        let b2 = Q::from_integer(other.b.clone());
        let d2 = Q::from_integer(other.d.clone());
        let zero = Q::zero();
        let step = self.cut(&(Q::one() / &a2), &zero);
        step.cut(&(-(&b2 / (&a2 * &d2))), &(Q::one() / d2))
    }

    /// Residues of `Z^2 / self`, one per coset.
    pub fn transversal(&self) -> Vec<(BigInt, BigInt)> {
        let mut out = Vec::new();
        let mut i = BigInt::zero();
        while i < self.a {
            let mut j = BigInt::zero();
            while j < self.d {
                out.push((i.clone(), j.clone()));
                j += 1;
            }
            i += 1;
        }
        out
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    (e.gcd, e.x, e.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qf;

    fn brute(l: &Lattice2, r: i64) -> Vec<(i64, i64)> {
        let mut v = Vec::new();
        for m in -r..=r {
            for n in -r..=r {
                if l.contains(&BigInt::from(m), &BigInt::from(n)) {
                    v.push((m, n));
                }
            }
        }
        v
    }

    #[test]
    fn cut_matches_brute_force() {
        let base = Lattice2::full();
        let k = base.cut(&qf(1, 2), &qf(1, 3));
        assert_eq!(k.det(), BigInt::from(6));
        for (m, n) in brute(&Lattice2::full(), 12) {
            let ok = (qf(m, 2) + qf(n, 3)).is_integer();
            assert_eq!(k.contains(&BigInt::from(m), &BigInt::from(n)), ok, "({m},{n})");
        }
        let l = Lattice2::rectangular(2, 3).cut(&qf(1, 4), &qf(5, 6));
        for (m, n) in brute(&Lattice2::rectangular(2, 3), 30) {
            let ok = (qf(m, 4) + qf(5 * n, 6)).is_integer();
            assert_eq!(l.contains(&BigInt::from(m), &BigInt::from(n)), ok, "({m},{n})");
        }
    }

    #[test]
    fn intersection_and_index() {
        let a = Lattice2::full().cut(&qf(1, 2), &qf(1, 3));
        let b = Lattice2::rectangular(4, 1);
        let c = a.intersect(&b);
        assert!(a.contains_lattice(&c) && b.contains_lattice(&c));
        for (m, n) in brute(&Lattice2::full(), 15) {
            let (mm, nn) = (BigInt::from(m), BigInt::from(n));
            assert_eq!(c.contains(&mm, &nn), a.contains(&mm, &nn) && b.contains(&mm, &nn));
        }
        assert_eq!(c.transversal().len(), c.det().try_into().unwrap_or(0usize));
    }
}
