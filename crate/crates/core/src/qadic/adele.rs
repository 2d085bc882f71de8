use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{factor, fmt_q, inv_mod, pow_big, pow_q, val_q, Q};
use crate::error::{HeckeError, Result};

/// A `Q_l` coordinate known modulo `l^prec Z_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdeleCoord {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub prec: u32,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl AdeleCoord {
    /// Lower bound for the valuation, exact when below the precision.
    fn valuation(&self, l: u64) -> i64 {
        if self.value.is_zero() {
            return self.prec as i64;
        }
        val_q(&self.value, l).min(self.prec as i64)
    }

    fn vanishes(&self, l: u64) -> bool {
        self.valuation(l) >= self.prec as i64
    }
}

/// A finite adele: stored coordinates at finitely many primes, integral at
/// every other prime.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteAdele {
    pub coords: BTreeMap<u64, AdeleCoord>,
    /// Set when the adele is the diagonal image of this rational.
    #[serde(skip)]
    pub global: Option<Q>,
}

impl FiniteAdele {
    pub fn new(coords: BTreeMap<u64, AdeleCoord>) -> Result<Self> {
        for l in coords.keys() {
            if !crate::arith::is_prime(*l) {
                return Err(HeckeError::Domain(format!("{l} is not a prime")));
            }
        }
        Ok(FiniteAdele { coords, global: None })
    }

    /// The diagonal rational `r`, storing the primes of its denominator and `extra`.
    pub fn from_rational(r: &Q, extra: &[u64], prec: u32) -> Self {
        let mut primes: Vec<u64> = extra.to_vec();
        if let Some(fs) = crate::arith::factor_big(r.denom()) {
            primes.extend(fs.into_iter().map(|(p, _)| p));
        }
        let coords = primes
            .into_iter()
            .map(|l| (l, AdeleCoord { value: r.clone(), prec }))
            .collect();
        FiniteAdele {
            coords,
            global: Some(r.clone()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum OmegaWitness {
    /// `x = t (1/n + z)` with `z` integral; `z` listed at the stored primes as
    /// residues, integral elsewhere because `t` has no positive valuation there.
    Witness {
        #[serde(serialize_with = "ser_q")]
        t: Q,
        z: BTreeMap<u64, AdeleCoord>,
        route: &'static str,
    },
    Reject { prime: u64, reason: String },
}

impl OmegaWitness {
    pub fn is_witness(&self) -> bool {
        matches!(self, OmegaWitness::Witness { .. })
    }
}

/// Writes `x = t (1/n + z)` with `t > 0` rational and `z` in the integral adeles,
/// or rejects because a coordinate at a prime dividing `n` vanishes.
pub fn omega_n_witness(x: &FiniteAdele, n: u64) -> Result<OmegaWitness> {
    if n == 0 {
        return Err(HeckeError::Domain("n must be positive".into()));
    }
    let primes_n = factor(n);
    for (l, _) in &primes_n {
        match x.coords.get(l) {
            None => {
                return Err(HeckeError::Indeterminate {
                    precision: 0,
                    reason: format!("the coordinate at {l} divides n but is not stored"),
                })
            }
            Some(c) if c.vanishes(*l) => {
                return Ok(OmegaWitness::Reject {
                    prime: *l,
                    reason: format!("x_{l} = 0 modulo {l}^{}", c.prec),
                })
            }
            _ => {}
        }
    }
    let (t, route) = match &x.global {
        Some(r) if r.is_positive() => (r * Q::from_integer(n.into()), "rational"),
        _ => (crt_scale(x, n, &primes_n)?, "crt"),
    };
    let z = certify(x, n, &t)?;
    Ok(OmegaWitness::Witness { t, z, route })
}

/// `t` from local conditions glued by the Chinese remainder theorem.
fn crt_scale(x: &FiniteAdele, n: u64, primes_n: &[(u64, u32)]) -> Result<Q> {
    let nq = Q::from_integer(n.into());
    // exponents of t at the stored primes
    let mut exps: BTreeMap<u64, i64> = BTreeMap::new();
    let mut targets = Vec::new();
    for (l, e) in primes_n {
        let c = &x.coords[l];
        let v = c.valuation(*l);
        if c.prec as i64 - v < *e as i64 {
            return Err(HeckeError::Indeterminate {
                precision: c.prec as i64,
                reason: format!("x_{l} is not known to {} digits past its valuation", e),
            });
        }
        let xn = &c.value * &nq;
        let vx = v + *e as i64;
        let mu = xn / pow_q(*l, vx);
        exps.insert(*l, vx);
        targets.push((*l, *e, mu));
    }
    for (l, c) in &x.coords {
        if n % l != 0 {
            exps.insert(*l, c.valuation(*l).min(0));
        }
    }
    // D = c_l / mu_l mod l^e for each l | n, where c_l is t's numerator without l
    let mut residue = BigInt::zero();
    let mut modulus = BigInt::one();
    for (l, e, mu) in &targets {
        let le = pow_big(*l, *e);
        let mut c_l = Q::one();
        for (l2, k) in &exps {
            if l2 != l {
                c_l *= pow_q(*l2, *k);
            }
        }
        let ratio = c_l / mu;
        let num = ratio.numer().mod_floor(&le);
        let den_inv = inv_mod(ratio.denom(), &le).expect("unit");
        let want = (num * den_inv).mod_floor(&le);
        // combine residue mod modulus with want mod le
        let inv = inv_mod(&modulus, &le).expect("coprime moduli");
        let step = ((&want - &residue) * inv).mod_floor(&le);
        residue += &modulus * step;
        modulus *= le;
    }
    let d = if residue.is_zero() { modulus } else { residue };
    let mut t = Q::new(BigInt::one(), d);
    for (l, k) in &exps {
        t *= pow_q(*l, *k);
    }
    Ok(t)
}

/// Checks integrality of `z = x/t - 1/n` everywhere and the round trip at the
/// stored coordinates.
fn certify(x: &FiniteAdele, n: u64, t: &Q) -> Result<BTreeMap<u64, AdeleCoord>> {
    let inv_n = Q::new(BigInt::one(), n.into());
    let unstored_ok = match &x.global {
        // every coordinate is r: z = r/t - 1/n must be integral off the stored primes
        Some(r) => {
            let zg = r / t - &inv_n;
            crate::arith::factor_big(zg.denom())
                .map(|fs| fs.iter().all(|(l, _)| x.coords.contains_key(l)))
        }
        // an arbitrary integral coordinate: need v(t) <= 0 there (n's primes are stored)
        None => crate::arith::factor_big(t.numer())
            .map(|fs| fs.iter().all(|(l, _)| x.coords.contains_key(l))),
    };
    match unstored_ok {
        Some(true) => {}
        Some(false) => {
            return Err(HeckeError::Domain(format!(
                "t = {} leaves z non-integral at an unstored prime",
                fmt_q(t)
            )))
        }
        None => return Err(HeckeError::Domain("t is too large to factor".into())),
    }
    let mut z = BTreeMap::new();
    for (l, c) in &x.coords {
        let vt = val_q(t, *l);
        let prec = c.prec as i64 - vt;
        if prec < 0 {
            return Err(HeckeError::Indeterminate {
                precision: c.prec as i64,
                reason: format!("z_{l} is only known modulo {l}^{prec}"),
            });
        }
        let zv = &c.value / t - &inv_n;
        if !zv.is_zero() && val_q(&zv, *l) < 0 {
            return Err(HeckeError::Domain(format!(
                "z_{l} = {} is not integral",
                fmt_q(&zv)
            )));
        }
        let m = pow_big(*l, prec as u32);
        let res = (zv.numer() * inv_mod(zv.denom(), &m).expect("unit")).mod_floor(&m);
        let zr = Q::from_integer(res);
        // round trip: t (1/n + z) = x modulo l^prec(x)
        let back = t * (&inv_n + &zr) - &c.value;
        if !back.is_zero() && val_q(&back, *l) < c.prec as i64 {
            return Err(HeckeError::Domain(format!("round trip fails at {l}")));
        }
        z.insert(*l, AdeleCoord { value: zr, prec: prec as u32 });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qf};

    #[test]
    fn rational_three_for_n_two() {
        let x = FiniteAdele::from_rational(&q(3), &[2], 64);
        match omega_n_witness(&x, 2).unwrap() {
            OmegaWitness::Witness { t, z, route } => {
                assert_eq!(t, q(6));
                assert_eq!(route, "rational");
                assert!(z.values().all(|c| c.value.is_zero()));
            }
            r => panic!("{r:?}"),
        }
        let x = FiniteAdele::from_rational(&qf(1, 6), &[], 64);
        match omega_n_witness(&x, 6).unwrap() {
            OmegaWitness::Witness { t, .. } => assert_eq!(t, q(1)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn crt_route_and_rejection() {
        let mut coords = BTreeMap::new();
        coords.insert(2, AdeleCoord { value: qf(5, 4), prec: 64 });
        coords.insert(3, AdeleCoord { value: q(7), prec: 64 });
        coords.insert(5, AdeleCoord { value: qf(1, 25), prec: 64 });
        let x = FiniteAdele::new(coords.clone()).unwrap();
        assert!(omega_n_witness(&x, 12).unwrap().is_witness());
        coords.insert(3, AdeleCoord { value: q(0), prec: 64 });
        let x = FiniteAdele::new(coords).unwrap();
        assert!(!omega_n_witness(&x, 12).unwrap().is_witness());
        assert!(omega_n_witness(&x, 4).unwrap().is_witness());
    }
}
