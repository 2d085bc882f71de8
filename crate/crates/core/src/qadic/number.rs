use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::zp::ZpApprox;
use crate::arith::{fmt_q, inv_mod, parse_q, pow_big, val_int, Q};
use crate::error::{HeckeError, Result};

/// An element of `Omega_q`, stored as `u / p^i0` with `u` known modulo
/// `q p^(N + i0)`, i.e. the number is known modulo `q p^N Omega_q^0`.
#[derive(Clone)]
pub struct QAdicNumber {
    p: u64,
    q: u64,
    i0: u32,
    prec: i64,
    u: BigInt,
}

/// The canonical form `a = a_- + a_* + q a_+`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formal {
    /// In `Z[1/p] ∩ [0, 1)`.
    pub tail: Q,
    /// In `[0, q)`.
    pub head: u64,
    pub deep: ZpApprox,
}

impl fmt::Debug for QAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

impl QAdicNumber {
    fn raw(p: u64, q: u64, i0: u32, prec: i64, u: BigInt) -> Self {
        assert!(prec + i0 as i64 >= 0, "precision below the tail");
        let m = (prec + i0 as i64) as u32;
        let modulus = pow_big(p, m) * q;
        let mut out = QAdicNumber {
            p,
            q,
            i0,
            prec,
            u: u.mod_floor(&modulus),
        };
        out.normalize();
        out
    }

    fn m(&self) -> u32 {
        (self.prec + self.i0 as i64) as u32
    }

    fn normalize(&mut self) {
        while self.i0 > 0 && self.m() >= 1 && (&self.u % self.p).is_zero() {
            self.u /= self.p;
            self.i0 -= 1;
        }
    }

    /// A rational with denominator coprime to `q`.
    pub fn from_rational(p: u64, q: u64, x: &Q, prec: i64) -> Result<Self> {
        let d = x.denom();
        if !d.gcd(&BigInt::from(q)).is_one() {
            return Err(HeckeError::Domain(format!(
                "{} has a denominator sharing a factor with q = {q}",
                fmt_q(x)
            )));
        }
        let i = val_int(d, p) as u32;
        let dprime = d / pow_big(p, i);
        let m = prec + i as i64;
        if m < 0 {
            return Err(HeckeError::Domain("negative working precision".into()));
        }
        let modulus = pow_big(p, m as u32) * q;
        let inv = inv_mod(&dprime, &modulus).expect("denominator is a unit");
        Ok(Self::raw(p, q, i, prec, x.numer() * inv))
    }

    pub fn from_int(p: u64, q: u64, n: i64, prec: i64) -> Self {
        Self::raw(p, q, 0, prec, BigInt::from(n))
    }

    /// The element of `Omega_q^0 = Z/q x Z_p` with the given components.
    pub fn from_crt(q: u64, r: u64, z: &ZpApprox) -> Self {
        let p = z.p();
        let pn = z.modulus();
        let qb = BigInt::from(q);
        // u = r mod q, u = z mod p^N
        let t = inv_mod(&pn, &qb).expect("p and q coprime");
        let u = z.residue() + &pn * ((BigInt::from(r) - z.residue()) * t).mod_floor(&qb);
        Self::raw(p, q, 0, z.precision() as i64, u)
    }

    pub fn from_formal(p: u64, q: u64, f: &Formal) -> Result<Self> {
        let prec = f.deep.precision() as i64;
        let tail = Self::from_rational(p, q, &f.tail, prec)?;
        let rest = Self::raw(
            p,
            q,
            0,
            prec,
            BigInt::from(f.head) + BigInt::from(q) * f.deep.residue(),
        );
        Ok(tail.add(&rest))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `N`: the number is known modulo `q p^N Omega_q^0`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    fn check(&self, o: &Self) {
        assert!(self.p == o.p && self.q == o.q, "mixing different (p, q)");
    }

    fn lifted(&self, i0: u32) -> BigInt {
        &self.u * pow_big(self.p, i0 - self.i0)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let i0 = self.i0.max(o.i0);
        let prec = self.prec.min(o.prec);
        Self::raw(self.p, self.q, i0, prec, self.lifted(i0) + o.lifted(i0))
    }

    pub fn neg(&self) -> Self {
        Self::raw(self.p, self.q, self.i0, self.prec, -&self.u)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let prec = (self.prec - o.i0 as i64).min(o.prec - self.i0 as i64);
        Self::raw(self.p, self.q, self.i0 + o.i0, prec, &self.u * &o.u)
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Self::raw(self.p, self.q, self.i0, self.prec, &self.u * n)
    }

    /// Multiplication by `p^k`, `k` of either sign.
    pub fn scale_p(&self, k: i64) -> Self {
        let prec = self.prec + k;
        let e = self.i0 as i64 - k;
        if e >= 0 {
            Self::raw(self.p, self.q, e as u32, prec, self.u.clone())
        } else {
            let u = &self.u * pow_big(self.p, (-e) as u32);
            Self::raw(self.p, self.q, 0, prec, u)
        }
    }

    /// Whether the number vanishes modulo `q p^N Omega_q^0`.
    pub fn is_zero_at_precision(&self) -> bool {
        self.u.is_zero()
    }

    pub fn eq_at_precision(&self, o: &Self) -> bool {
        self.sub(o).is_zero_at_precision()
    }

    /// The `Z/q` component, always exact.
    pub fn crt_q(&self) -> u64 {
        let qb = BigInt::from(self.q);
        let pinv = inv_mod(&BigInt::from(self.p), &qb).expect("p and q coprime");
        let v = (&self.u * pinv.modpow(&BigInt::from(self.i0), &qb)).mod_floor(&qb);
        v.to_u64().expect("small")
    }

    /// The `Q_p` component as `p^-i0 * z` with `z` known modulo `p^(N + i0)`.
    pub fn crt_p(&self) -> (ZpApprox, u32) {
        (ZpApprox::new(self.p, self.m(), &self.u), self.i0)
    }

    /// The `Z_p` component of an element of `Omega_q^0`.
    pub fn crt_zp(&self) -> Result<ZpApprox> {
        if !self.in_omega0()? {
            return Err(HeckeError::Domain(format!("{self:?} is not in Omega_q^0")));
        }
        Ok(ZpApprox::new(self.p, self.prec.max(0) as u32, &self.u))
    }

    /// `a_- = 0`.
    pub fn in_omega0(&self) -> Result<bool> {
        if self.i0 == 0 {
            return Ok(true);
        }
        if self.prec < 0 {
            return Err(self.indeterminate("the tail is not determined"));
        }
        Ok(false)
    }

    fn indeterminate(&self, reason: &str) -> HeckeError {
        HeckeError::Indeterminate {
            precision: self.prec,
            reason: reason.to_string(),
        }
    }

    pub fn formal(&self) -> Result<Formal> {
        if self.prec < 0 {
            return Err(self.indeterminate("the tail is not determined"));
        }
        let pi = pow_big(self.p, self.i0);
        let r = self.u.mod_floor(&pi);
        let tail = Q::new(r.clone(), pi.clone());
        let c = (&self.u - &r) / &pi;
        let qb = BigInt::from(self.q);
        let head = c.mod_floor(&qb);
        let deep = (&c - &head) / &qb;
        Ok(Formal {
            tail,
            head: head.to_u64().expect("small"),
            deep: ZpApprox::new(self.p, self.prec as u32, &deep),
        })
    }

    /// `"p,q,N; tail; head; digits"` with the base-`p` digits of `a_+`
    /// least significant first, separated by `.`.
    pub fn encode(&self) -> String {
        match self.formal() {
            Ok(f) => {
                let digits: Vec<String> = f.deep.digits().iter().map(|d| d.to_string()).collect();
                format!(
                    "{},{},{}; {}; {}; {}",
                    self.p,
                    self.q,
                    self.prec,
                    fmt_q(&f.tail),
                    f.head,
                    digits.join(".")
                )
            }
            Err(_) => format!("{},{},{}; ?", self.p, self.q, self.prec),
        }
    }

    pub fn decode(s: &str) -> Result<Self> {
        let bad = |why: &str| HeckeError::Parse(format!("q-adic number '{s}': {why}"));
        let parts: Vec<&str> = s.split(';').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(bad("expected 'p,q,N; tail; head; digits'"));
        }
        let hdr: Vec<&str> = parts[0].split(',').map(str::trim).collect();
        if hdr.len() != 3 {
            return Err(bad("header must be p,q,N"));
        }
        let p: u64 = hdr[0].parse().map_err(|_| bad("p"))?;
        let q: u64 = hdr[1].parse().map_err(|_| bad("q"))?;
        let n: u32 = hdr[2].parse().map_err(|_| bad("N"))?;
        if p < 2 || !crate::arith::is_prime(p) || q < 1 || crate::arith::gcd_u(p, q) != 1 {
            return Err(bad("need a prime p and q >= 1 coprime to p"));
        }
        let tail = parse_q(parts[1]).ok_or_else(|| bad("tail"))?;
        if tail.is_negative() || tail >= Q::one() || !crate::arith::in_z_inv_p(&tail, p) {
            return Err(bad("tail must lie in Z[1/p] ∩ [0, 1)"));
        }
        let head: u64 = parts[2].parse().map_err(|_| bad("head"))?;
        if head >= q {
            return Err(bad("head must lie in [0, q)"));
        }
        let digits: Vec<u64> = if parts[3].is_empty() {
            Vec::new()
        } else {
            parts[3]
                .split('.')
                .map(|d| d.trim().parse::<u64>().ok().filter(|d| *d < p))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("digits"))?
        };
        if digits.len() != n as usize {
            return Err(bad("number of digits must equal N"));
        }
        let f = Formal {
            tail,
            head,
            deep: ZpApprox::from_digits(p, &digits),
        };
        Self::from_formal(p, q, &f)
    }
}

/// Addition carried out digit-wise on formal forms, carrying from the tail
/// into the head and from the head into the deep part.
pub fn formal_add(q: u64, a: &Formal, b: &Formal) -> Formal {
    let s = &a.tail + &b.tail;
    let carry1 = if s >= Q::one() { 1 } else { 0 };
    let tail = s - Q::from_integer(carry1.into());
    let h = a.head + b.head + carry1 as u64;
    let carry2 = h / q;
    let p = a.deep.p();
    let prec = a.deep.precision().min(b.deep.precision());
    let deep = a
        .deep
        .add(&b.deep)
        .add(&ZpApprox::from_i64(p, prec, carry2 as i64));
    Formal {
        tail,
        head: h % q,
        deep,
    }
}

/// Componentwise product on `Z/q x Z_p`.
pub fn crt_mul(q: u64, a: (u64, &ZpApprox), b: (u64, &ZpApprox)) -> (u64, ZpApprox) {
    ((a.0 * b.0) % q, a.1.mul(b.1))
}

/// Componentwise sum on `Z/q x Z_p`.
pub fn crt_add(q: u64, a: (u64, &ZpApprox), b: (u64, &ZpApprox)) -> (u64, ZpApprox) {
    ((a.0 + b.0) % q, a.1.add(b.1))
}
