//! Exact arithmetic in the cyclotomic field `Q(zeta_M)`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^(phi(M)-1)`,
//! reduced modulo the `M`-th cyclotomic polynomial, so equality is
//! coefficient equality.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factor, gcd_u, Q};

/// Integer polynomial, lowest degree first.
type IPoly = Vec<i64>;

fn poly_divexact(num: &IPoly, den: &IPoly) -> IPoly {
    let mut rem = num.clone();
    let dn = den.len() - 1;
    assert_eq!(*den.last().unwrap(), 1, "monic divisor expected");
    if rem.len() < den.len() {
        return vec![0];
    }
    let mut out = vec![0i64; rem.len() - dn];
    for i in (0..out.len()).rev() {
        let c = rem[i + dn];
        out[i] = c;
        for (j, d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    out
}

fn cyclotomic_poly(m: u64) -> IPoly {
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    let mut acc = num;
    for d in 1..m {
        if m % d == 0 {
            acc = poly_divexact(&acc, &cyclotomic_poly(d));
        }
    }
    acc
}

/// Context for `Q(zeta_M)`: the modulus polynomial and a table of reduced powers.
pub struct CycloField {
    order: u64,
    degree: usize,
    /// `powers[k]` = `x^k mod Phi_M` for `k < max(M, 2*degree)`.
    powers: Vec<IPoly>,
}

impl fmt::Debug for CycloField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(zeta_{})", self.order)
    }
}

impl CycloField {
    pub fn new(order: u64) -> Arc<Self> {
        assert!(order >= 1);
        let phi = cyclotomic_poly(order);
        let degree = phi.len() - 1;
        let count = std::cmp::max(order as usize, 2 * degree).max(1);
        let mut powers = Vec::with_capacity(count);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..count {
            powers.push(cur.clone());
            // multiply by x and reduce: x^degree = -sum phi[i] x^i
            let top = cur[degree - 1];
            let mut next = vec![0i64; degree];
            for i in (1..degree).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..degree {
                next[i] -= top * phi[i];
            }
            cur = next;
        }
        Arc::new(CycloField {
            order,
            degree,
            powers,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn power(&self, k: u64) -> &IPoly {
        &self.powers[(k % self.order) as usize]
    }
}

/// An element of `Q(zeta_M)`.
#[derive(Clone)]
pub struct Cyclo {
    field: Arc<CycloField>,
    coeffs: Vec<Q>,
}

impl Cyclo {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Cyclo {
            field: field.clone(),
            coeffs: vec![Q::zero(); field.degree],
        }
    }

    pub fn one(field: &Arc<CycloField>) -> Self {
        Self::from_rational(field, Q::one())
    }

    pub fn from_rational(field: &Arc<CycloField>, r: Q) -> Self {
        let mut z = Self::zero(field);
        z.coeffs[0] = r;
        z
    }

    /// `zeta_M^k`.
    pub fn root(field: &Arc<CycloField>, k: i64) -> Self {
        let m = field.order as i64;
        let e = k.rem_euclid(m) as u64;
        Cyclo {
            field: field.clone(),
            coeffs: field
                .power(e)
                .iter()
                .map(|&c| Q::from_integer(BigInt::from(c)))
                .collect(),
        }
    }

    /// `exp(2 pi i r)` for a rational `r` whose denominator divides `M`.
    pub fn from_phase(field: &Arc<CycloField>, r: &Q) -> Option<Self> {
        let k = phase_to_root_index(field.order, r)?;
        Some(Self::root(field, k as i64))
    }

    pub fn field(&self) -> &Arc<CycloField> {
        &self.field
    }

    /// The same number in `Q(zeta_N)` for `M | N`, via `zeta_M = zeta_N^(N/M)`.
    pub fn embed(&self, target: &Arc<CycloField>) -> Option<Self> {
        if target.order % self.field.order != 0 {
            return None;
        }
        let step = (target.order / self.field.order) as i64;
        Some(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| Cyclo::root(target, i as i64 * step).scale(c))
                .fold(Cyclo::zero(target), |acc, t| &acc + &t),
        )
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value, if the element is rational.
    pub fn as_rational(&self) -> Option<Q> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn reduce_wide(field: &Arc<CycloField>, wide: Vec<Q>) -> Self {
        let d = field.degree;
        let mut out = vec![Q::zero(); d];
        for (k, c) in wide.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < d {
                out[k] += c;
            } else {
                for (i, &t) in field.powers[k].iter().enumerate() {
                    if t != 0 {
                        out[i] += &c * Q::from_integer(BigInt::from(t));
                    }
                }
            }
        }
        Cyclo {
            field: field.clone(),
            coeffs: out,
        }
    }

    /// Multiply by `zeta^k`.
    pub fn mul_root(&self, k: i64) -> Self {
        let m = self.field.order as i64;
        let k = k.rem_euclid(m) as usize;
        if k == 0 {
            return self.clone();
        }
        let d = self.field.degree;
        let mut out = vec![Q::zero(); d];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (i + k) as u64;
            for (j, &t) in self.field.power(e).iter().enumerate() {
                if t != 0 {
                    out[j] += c * Q::from_integer(BigInt::from(t));
                }
            }
        }
        Cyclo {
            field: self.field.clone(),
            coeffs: out,
        }
    }

    pub fn scale(&self, r: &Q) -> Self {
        Cyclo {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Complex conjugation, `zeta -> zeta^(M-1)`.
    pub fn conj(&self) -> Self {
        let m = self.field.order;
        let d = self.field.degree;
        let mut out = vec![Q::zero(); d];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (m - (i as u64 % m)) % m;
            for (j, &t) in self.field.power(e).iter().enumerate() {
                if t != 0 {
                    out[j] += c * Q::from_integer(BigInt::from(t));
                }
            }
        }
        Cyclo {
            field: self.field.clone(),
            coeffs: out,
        }
    }

    /// `|z|^2 = z * conj(z)`, exact.
    pub fn norm_sq(&self) -> Cyclo {
        self * &self.conj()
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let m = self.field.order as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let ang = 2.0 * std::f64::consts::PI * i as f64 / m;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// A certified enclosure `[lo, hi]` of `|z|`.
    pub fn abs_enclosure(&self) -> (f64, f64) {
        if let Some(r) = self.norm_sq().as_rational() {
            if let Some(s) = exact_sqrt(&r) {
                let v = s.to_f64().unwrap_or(f64::NAN);
                return (v, v);
            }
        }
        let (re, im) = self.to_complex();
        let v = (re * re + im * im).sqrt();
        let mass: f64 = self
            .coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum();
        let err = mass * (self.field.degree as f64 + 4.0) * 8.0 * f64::EPSILON + 1e-300;
        ((v - err).max(0.0), v + err)
    }

    /// Hard error if the fields differ; elements of different fields never mix.
    fn check(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field.order == other.field.order,
            "cyclotomic field mismatch"
        );
    }
}

/// Index `k` with `exp(2 pi i r) = zeta_M^k`.
pub fn phase_to_root_index(order: u64, r: &Q) -> Option<u64> {
    let den = r.denom().to_u64()?;
    if order % den != 0 {
        return None;
    }
    let num = r.numer().clone() * BigInt::from(order / den);
    let m = BigInt::from(order);
    let k = ((num % &m) + &m) % &m;
    k.to_u64()
}

/// Exact rational square root, if `r` is the square of a rational.
pub fn exact_sqrt(r: &Q) -> Option<Q> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Smallest cyclotomic order containing `sqrt(p)`.
pub fn sqrt_order(p: u64) -> u64 {
    if p == 2 {
        8
    } else if p % 4 == 1 {
        p
    } else {
        4 * p
    }
}

fn legendre(a: u64, p: u64) -> i64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else if r == 0 {
        0
    } else {
        -1
    }
}

/// `sqrt(p)` for a prime `p`, via `zeta_8 + zeta_8^-1` or a quadratic Gauss sum.
pub fn sqrt_prime(field: &Arc<CycloField>, p: u64) -> Option<Cyclo> {
    let m = field.order;
    if m % sqrt_order(p) != 0 {
        return None;
    }
    if p == 2 {
        let s = (m / 8) as i64;
        return Some(&Cyclo::root(field, s) + &Cyclo::root(field, -s));
    }
    let step = (m / p) as i64;
    let mut g = Cyclo::zero(field);
    for a in 1..p {
        let term = Cyclo::root(field, step * a as i64);
        if legendre(a, p) == 1 {
            g = &g + &term;
        } else {
            g = &g - &term;
        }
    }
    if p % 4 == 1 {
        Some(g)
    } else {
        // g = i sqrt(p)
        Some(g.mul_root(-((m / 4) as i64)))
    }
}

/// Square root of a positive rational inside the field, when it lies there.
pub fn sqrt_rational(field: &Arc<CycloField>, r: &Q) -> Option<Cyclo> {
    if !r.is_positive() {
        return None;
    }
    if let Some(s) = exact_sqrt(r) {
        return Some(Cyclo::from_rational(field, s));
    }
    // sqrt(a/b) = sqrt(a b) / b
    let ab = r.numer() * r.denom();
    let ab = ab.to_u64()?;
    let mut square = 1u64;
    let mut out = Cyclo::one(field);
    for (p, e) in factor(ab) {
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            out = &out * &sqrt_prime(field, p)?;
        }
    }
    let scale = BigRational::new(BigInt::from(square), r.denom().clone());
    Some(out.scale(&scale))
}

/// Smallest order divisible by `base` and containing `sqrt(p)` for each listed prime.
pub fn order_with_sqrts(base: u64, primes: &[u64]) -> u64 {
    primes.iter().fold(base.max(1), |acc, &p| {
        let s = sqrt_order(p);
        acc / gcd_u(acc, s) * s
    })
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}
impl Eq for Cyclo {}

impl PartialOrd for Cyclo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cyclo {
    fn cmp(&self, other: &Self) -> Ordering {
        self.field
            .order
            .cmp(&other.field.order)
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = crate::arith::fmt_q(c);
            terms.push(match i {
                0 => c,
                1 => format!("{}*z{}", c, self.field.order),
                _ => format!("{}*z{}^{}", c, self.field.order, i),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl<'a> std::ops::Add<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        Cyclo {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> std::ops::Sub<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        Cyclo {
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        self.scale(&-Q::one())
    }
}

impl<'a> std::ops::Mul<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        let d = self.field.degree;
        let mut wide = vec![Q::zero(); 2 * d];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    wide[i + j] += a * b;
                }
            }
        }
        Cyclo::reduce_wide(&self.field, wide)
    }
}

impl std::iter::Sum for Cyclo {
    fn sum<I: Iterator<Item = Cyclo>>(mut iter: I) -> Cyclo {
        let first = iter.next().expect("sum of an empty cyclotomic iterator");
        iter.fold(first, |a, b| &a + &b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qf};

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_have_order_m() {
        for m in [1, 2, 3, 6, 7, 12, 24] {
            let f = CycloField::new(m);
            let z = Cyclo::root(&f, 1);
            let mut acc = Cyclo::one(&f);
            for k in 1..=m {
                acc = &acc * &z;
                assert_eq!(acc == Cyclo::one(&f), k == m, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn sum_of_roots_vanishes() {
        let f = CycloField::new(12);
        let s: Cyclo = (0..12).map(|k| Cyclo::root(&f, k)).sum();
        assert!(s.is_zero());
    }

    #[test]
    fn conjugate_is_inverse_on_roots() {
        let f = CycloField::new(7);
        for k in 0..7 {
            let z = Cyclo::root(&f, k);
            assert_eq!(&z * &z.conj(), Cyclo::one(&f));
            assert_eq!(z.mul_root(3), &z * &Cyclo::root(&f, 3));
        }
    }

    #[test]
    fn phases() {
        let f = CycloField::new(6);
        assert_eq!(Cyclo::from_phase(&f, &qf(1, 3)), Some(Cyclo::root(&f, 2)));
        assert_eq!(Cyclo::from_phase(&f, &qf(-1, 2)), Some(Cyclo::root(&f, 3)));
        assert!(Cyclo::from_phase(&f, &qf(1, 4)).is_none());
    }

    #[test]
    fn square_roots_square_back() {
        for (p, m) in [(2u64, 8u64), (3, 12), (5, 5), (7, 28), (2, 24), (3, 24)] {
            let f = CycloField::new(m);
            let s = sqrt_prime(&f, p).unwrap();
            assert_eq!(&s * &s, Cyclo::from_rational(&f, q(p as i64)), "p={p} m={m}");
            assert_eq!(s.conj(), s);
        }
        let f = CycloField::new(24);
        let s = sqrt_rational(&f, &qf(8, 3)).unwrap();
        assert_eq!(&s * &s, Cyclo::from_rational(&f, qf(8, 3)));
        assert_eq!(sqrt_rational(&f, &qf(9, 4)), Some(Cyclo::from_rational(&f, qf(3, 2))));
        assert!(sqrt_rational(&CycloField::new(3), &q(2)).is_none());
    }

    #[test]
    fn abs_enclosure_contains_value() {
        let f = CycloField::new(6);
        let z = &Cyclo::one(&f) + &Cyclo::root(&f, 1);
        let (lo, hi) = z.abs_enclosure();
        let exact = 3f64.sqrt();
        assert!(lo <= exact && exact <= hi);
        assert_eq!(Cyclo::root(&f, 1).abs_enclosure(), (1.0, 1.0));
    }

    #[test]
    fn order_with_sqrts_covers() {
        assert_eq!(order_with_sqrts(3, &[2]), 24);
        assert_eq!(order_with_sqrts(7, &[2]), 56);
        assert_eq!(order_with_sqrts(2, &[3]), 12);
        assert_eq!(order_with_sqrts(4, &[5]), 20);
    }
}
