//! Small exact-arithmetic helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Parses `"a"`, `"-a"` or `"a/b"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Representative of `x mod 1` in `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Representative of `x mod m` in `[0, m)` for rational `m > 0`.
pub fn rem_q(x: &Q, m: &Q) -> Q {
    // a/b mod c/d = (ad mod bc) / bd
    let (a, b) = (x.numer(), x.denom());
    let (c, d) = (m.numer(), m.denom());
    let modulus = (c * b).abs();
    Q::new((a * d).mod_floor(&modulus), b * d)
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn to_i64(x: &BigInt) -> Option<i64> {
    x.to_i64()
}

pub fn gcd_u(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a.lcm(&b)
    }
}

/// Extended gcd on `i128`: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn egcd_big(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let (g, x, _) = egcd_big(&a.mod_floor(m), m);
    if g.is_one() {
        Some(x.mod_floor(m))
    } else {
        None
    }
}

pub fn inv_mod_u(a: u64, m: u64) -> Option<u64> {
    inv_mod(&BigInt::from(a), &BigInt::from(m)).and_then(|v| v.to_u64())
}

pub fn pow_big(b: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(b), e as usize)
}

/// `b^e` for a possibly negative exponent.
pub fn pow_q(b: u64, e: i64) -> Q {
    let p = pow_big(b, e.unsigned_abs() as u32);
    if e >= 0 {
        Q::from_integer(p)
    } else {
        Q::new(BigInt::one(), p)
    }
}

/// `p`-adic valuation of a non-zero integer.
pub fn val_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a non-zero rational.
pub fn val_q(x: &Q, p: u64) -> i64 {
    val_int(x.numer(), p) - val_int(x.denom(), p)
}

/// Whether `x` lies in `Z[1/p]`.
pub fn in_z_inv_p(x: &Q, p: u64) -> bool {
    let mut d = x.denom().clone();
    let pb = BigInt::from(p);
    while (&d % &pb).is_zero() {
        d /= &pb;
    }
    d.is_one()
}

/// Prime factorization by trial division (inputs here are small).
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn factor_big(n: &BigInt) -> Option<Vec<(u64, u32)>> {
    n.abs().to_u64().map(factor)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n).len() == 1 && factor(n)[0].1 == 1
}

/// Multiplicative order of `a` modulo `m` (1 when `m == 1`).
pub fn mult_order(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd_u(a % m, m) != 1 {
        return None;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % m as u128) as u64;
        k += 1;
    }
    Some(k)
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_q("-4"), Some(q(-4)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(fmt_q(&qf(-2, 4)), "-1/2");
    }

    #[test]
    fn frac_and_rem() {
        assert_eq!(frac(&qf(-1, 3)), qf(2, 3));
        assert_eq!(rem_q(&qf(7, 4), &qf(1, 2)), qf(1, 4));
    }

    #[test]
    fn orders() {
        assert_eq!(mult_order(2, 7), Some(3));
        assert_eq!(mult_order(2, 3), Some(2));
        assert_eq!(mult_order(5, 1), Some(1));
        assert_eq!(mult_order(2, 4), None);
    }

    #[test]
    fn inverses_and_valuations() {
        assert_eq!(inv_mod_u(3, 32), Some(11));
        assert_eq!(val_q(&qf(12, 5), 2), 2);
        assert_eq!(val_q(&qf(5, 8), 2), -3);
        assert!(in_z_inv_p(&qf(3, 16), 2));
        assert!(!in_z_inv_p(&qf(1, 6), 2));
        assert_eq!(egcd(4, 6).0, 2);
    }
}
