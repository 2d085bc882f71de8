//! Truncated arithmetic in `Z_p`, the mixed ring `Omega_q` and finite adeles,
//! with the distinguished objects of the `p`-adic `ax+b` completion.

mod adele;
mod number;
mod zp;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use serde::Serialize;

pub use adele::{omega_n_witness, AdeleCoord, FiniteAdele, OmegaWitness};
pub use number::{crt_add, crt_mul, formal_add, Formal, QAdicNumber};
pub use zp::ZpApprox;

use crate::arith::{gcd_u, mult_order, Q};
use crate::error::{HeckeError, Result};

pub const DEFAULT_PRECISION: u32 = 64;

/// Multiplicative order of `p` modulo `q`.
pub fn n0(p: u64, q: u64) -> Result<u64> {
    if q == 0 || gcd_u(p, q) != 1 {
        return Err(HeckeError::Domain(format!("gcd({p}, {q}) != 1")));
    }
    Ok(mult_order(p, q).expect("coprime"))
}

/// `w_0 = -q^-1` in `Z_p`.
pub fn w0(p: u64, q: u64, prec: u32) -> ZpApprox {
    ZpApprox::from_i64(p, prec, q as i64)
        .invert()
        .expect("q is a p-adic unit")
        .neg()
}

/// `z_0 = 1 + q w_0`, the element `(1, 0)` of `Z/q x Z_p`.
pub fn z0(p: u64, q: u64, prec: u32) -> QAdicNumber {
    let f = Formal {
        tail: Q::from_integer(0.into()),
        head: 1 % q,
        deep: w0(p, q, prec),
    };
    QAdicNumber::from_formal(p, q, &f).expect("formal z0")
}

/// `H_inf = { j z_0 : 0 <= j < q }`.
pub fn h_infinity(p: u64, q: u64, prec: u32) -> Vec<QAdicNumber> {
    let z = z0(p, q, prec);
    (0..q as i64).map(|j| z.mul_int(j)).collect()
}

/// `a` lies in `p^(k n_0) Omega_q^0` for every `k` with `k n_0 <= limit`.
pub fn h_infinity_membership(a: &QAdicNumber, limit: u32) -> Result<bool> {
    let n = n0(a.p(), a.q())? as i64;
    let mut k = 0i64;
    while k * n <= limit as i64 {
        if !a.scale_p(-k * n).in_omega0()? {
            return Ok(false);
        }
        k += 1;
    }
    Ok(true)
}

/// `<a, b> = e((c_- + c_*) / q)` with `c = ab`; returns the exponent in `[0, 1)`.
pub fn duality_pair(a: &QAdicNumber, b: &QAdicNumber) -> Result<Q> {
    let c = a.mul(b);
    let f = c.formal().map_err(|_| HeckeError::Indeterminate {
        precision: a.precision().min(b.precision()),
        reason: "the product's tail and head are not determined".into(),
    })?;
    let v = (f.tail + Q::from_integer(f.head.into())) / Q::from_integer(a.q().into());
    Ok(crate::arith::frac(&v))
}

/// `a in 1 + q Z_p`.
pub fn sigma_ext_membership(a: &QAdicNumber) -> Result<bool> {
    let f = a.formal()?;
    Ok(f.tail == Q::from_integer(0.into()) && f.head == 1 % a.q())
}

/// Whether `p^(k n_0) a in q Z_p` for some `k <= k_max`, decided by scanning
/// and cross-checked against the `Z/q` component.
pub fn h_infinity_perp_membership(a: &QAdicNumber, k_max: u32) -> Result<bool> {
    let n = n0(a.p(), a.q())? as i64;
    let mut scan = None;
    for k in 0..=k_max as i64 {
        let b = a.scale_p(k * n);
        if let Ok(f) = b.formal() {
            if f.tail == Q::from_integer(0.into()) && f.head == 0 {
                scan = Some(k);
                break;
            }
        }
    }
    // second route: a in H_perp iff its Z/q component vanishes
    let by_component = if a.crt_q() != 0 {
        Some(false)
    } else {
        let (_, i0) = a.crt_p();
        let k_min = (i0 as i64 + n - 1) / n;
        if k_min <= k_max as i64 { Some(true) } else { None }
    };
    match (scan, by_component) {
        (Some(_), Some(true)) => Ok(true),
        (None, Some(false)) => Ok(false),
        (None, None) => Err(HeckeError::Indeterminate {
            precision: a.precision(),
            reason: format!("no k <= {k_max} scales the element into q Z_p"),
        }),
        _ => Err(HeckeError::Domain(format!(
            "characterizations of H_perp disagree on {a:?}"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Stratum {
    /// Congruent to `z_0` at the working precision.
    Z0,
    /// `p^(-k n_0) a in X_0`.
    Level(i64),
}

/// `b in X_0 = (1 + q Z_p) \ p^(n_0)(1 + q Z_p)`; `None` when undecidable.
fn in_x0(b: &QAdicNumber, n: u32) -> Option<bool> {
    if !sigma_ext_membership(b).ok()? {
        return Some(false);
    }
    let z = b.crt_zp().ok()?;
    match z.valuation() {
        Some(v) => Some(v < n),
        None if z.precision() >= n => Some(false),
        None => None,
    }
}

/// The unique stratum of `{z_0} ∪ ⋃_k p^(k n_0) X_0` containing `a`.
pub fn stratify(a: &QAdicNumber, k_range: RangeInclusive<i64>) -> Result<Stratum> {
    let n = n0(a.p(), a.q())?;
    let mut hits = Vec::new();
    if a.precision() >= 0 {
        let z = z0(a.p(), a.q(), a.precision() as u32);
        if a.eq_at_precision(&z) {
            hits.push(Stratum::Z0);
        }
    }
    for k in k_range.clone() {
        if in_x0(&a.scale_p(-k * n as i64), n as u32) == Some(true) {
            hits.push(Stratum::Level(k));
        }
    }
    match hits.len() {
        1 => Ok(hits.pop().unwrap()),
        0 => Err(HeckeError::Indeterminate {
            precision: a.precision(),
            reason: format!("{a:?} lies in no stratum with k in {k_range:?}"),
        }),
        _ => Err(HeckeError::Domain(format!("{a:?} lies in several strata: {hits:?}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StratificationTable {
    pub p: u64,
    pub q: u64,
    pub precision: u32,
    pub residues: u64,
    pub counts: BTreeMap<String, u64>,
    pub indeterminate: u64,
    pub overlaps: u64,
}

impl StratificationTable {
    /// Disjoint and exhaustive, with the level counts the valuation predicts.
    pub fn is_partition(&self) -> bool {
        if self.indeterminate != 0 || self.overlaps != 0 {
            return false;
        }
        let n = n0(self.p, self.q).expect("coprime");
        let total: u64 = self.counts.values().sum();
        // level k collects residues of valuation in [k n0, (k+1) n0)
        let mut expected = BTreeMap::new();
        expected.insert("z0".to_string(), 1u64);
        for v in 0..self.precision as u64 {
            let count = (self.p - 1) * self.p.pow(self.precision - 1 - v as u32);
            *expected.entry(format!("k={}", v / n)).or_insert(0) += count;
        }
        total == self.residues && expected == self.counts
    }
}

/// Stratifies every residue `1 + q t`, `0 <= t < p^N`, of `1 + q Z_p`.
pub fn stratification_table(p: u64, q: u64, prec: u32) -> Result<StratificationTable> {
    let n = n0(p, q)?;
    let k_hi = (prec as u64 / n) as i64 + 1;
    let mut counts = BTreeMap::new();
    let mut indeterminate = 0;
    let mut overlaps = 0;
    let count = p.pow(prec);
    for t in 0..count {
        let f = Formal {
            tail: Q::from_integer(0.into()),
            head: 1 % q,
            deep: ZpApprox::new(p, prec, &BigInt::from(t)),
        };
        let a = QAdicNumber::from_formal(p, q, &f)?;
        match stratify(&a, -1..=k_hi) {
            Ok(Stratum::Z0) => *counts.entry("z0".to_string()).or_insert(0) += 1,
            Ok(Stratum::Level(k)) => *counts.entry(format!("k={k}")).or_insert(0) += 1,
            Err(HeckeError::Indeterminate { .. }) => indeterminate += 1,
            Err(_) => overlaps += 1,
        }
    }
    Ok(StratificationTable {
        p,
        q,
        precision: prec,
        residues: count,
        counts,
        indeterminate,
        overlaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q, qf};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orders() {
        assert_eq!(n0(2, 7).unwrap(), 3);
        assert_eq!(n0(2, 3).unwrap(), 2);
        assert_eq!(n0(5, 1).unwrap(), 1);
        assert!(n0(2, 4).is_err());
    }

    #[test]
    fn z0_small_precision() {
        let z = z0(2, 3, 5);
        assert_eq!(w0(2, 3, 5).residue(), &BigInt::from(21));
        let f = z.formal().unwrap();
        assert_eq!((f.head, f.deep.residue().clone()), (1, BigInt::from(21)));
        assert_eq!(z.crt_q(), 1);
        assert!(z.crt_zp().unwrap().is_zero());
        assert!(z.mul_int(3).is_zero_at_precision());
        for (p, qq) in [(2, 3), (2, 7), (3, 2), (5, 4)] {
            let n = n0(p, qq).unwrap() as i64;
            let z = z0(p, qq, 40);
            assert!(z.scale_p(n).sub(&z).truncate_check(40));
            assert!(z.mul(&z).eq_at_precision(&z));
        }
    }

    impl QAdicNumber {
        fn truncate_check(&self, prec: i64) -> bool {
            self.precision() >= prec && self.is_zero_at_precision()
        }
    }

    #[test]
    fn h_infinity_examples() {
        let h = h_infinity(2, 3, 64);
        assert_eq!(h.len(), 3);
        for a in &h {
            assert!(h_infinity_membership(a, 32).unwrap());
            assert!(a.scale_p(2).eq_at_precision(&a.scale_p(0)));
        }
        let a = QAdicNumber::from_int(2, 3, 3 * 5, 64);
        assert!(!h_infinity_membership(&a, 32).unwrap());
        let low = z0(2, 3, 4);
        assert!(h_infinity_membership(&low, 32).is_err());
    }

    #[test]
    fn pairing_examples() {
        let one = QAdicNumber::from_int(2, 3, 1, 64);
        assert_eq!(duality_pair(&one, &one).unwrap(), qf(1, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = QAdicNumber::from_rational(2, 7, &qf(rng.gen_range(-50..50), 1 << rng.gen_range(0..5)), 64).unwrap();
            let a2 = QAdicNumber::from_rational(2, 7, &qf(rng.gen_range(-50..50), 1 << rng.gen_range(0..5)), 64).unwrap();
            let b = QAdicNumber::from_int(2, 7, rng.gen_range(-500..500), 64);
            let lhs = duality_pair(&a.add(&a2), &b).unwrap();
            let rhs = crate::arith::frac(&(duality_pair(&a, &b).unwrap() + duality_pair(&a2, &b).unwrap()));
            assert_eq!(lhs, rhs);
            let qa = QAdicNumber::from_int(2, 7, 7 * rng.gen_range(-500..500), 64);
            assert_eq!(duality_pair(&qa, &b).unwrap(), q(0));
        }
    }

    #[test]
    fn memberships() {
        let one = QAdicNumber::from_int(2, 3, 1, 64);
        assert!(sigma_ext_membership(&one).unwrap());
        assert!(sigma_ext_membership(&z0(2, 3, 64)).unwrap());
        assert!(!sigma_ext_membership(&QAdicNumber::from_int(2, 3, 2, 64)).unwrap());
        assert!(h_infinity_perp_membership(&QAdicNumber::from_int(2, 3, 3, 64), 4).unwrap());
        assert!(!h_infinity_perp_membership(&z0(2, 3, 64), 4).unwrap());
        let a = QAdicNumber::from_rational(2, 3, &qf(3, 2), 64).unwrap();
        let f = a.formal().unwrap();
        assert_eq!((f.tail.clone(), f.head, f.deep.is_zero()), (qf(1, 2), 1, true));
        assert!(h_infinity_perp_membership(&a, 4).unwrap());
        let deep = QAdicNumber::from_rational(2, 3, &qf(3, 1 << 20), 64).unwrap();
        assert!(h_infinity_perp_membership(&deep, 2).is_err());
    }

    #[test]
    fn strata() {
        assert_eq!(stratify(&z0(2, 3, 64), -2..=40).unwrap(), Stratum::Z0);
        assert_eq!(stratify(&QAdicNumber::from_int(2, 3, 1, 64), -2..=40).unwrap(), Stratum::Level(0));
        assert_eq!(stratify(&QAdicNumber::from_int(2, 3, 16, 64), -2..=40).unwrap(), Stratum::Level(2));
        let t = stratification_table(2, 3, 10).unwrap();
        assert!(t.is_partition(), "{t:?}");
        let t = stratification_table(2, 7, 9).unwrap();
        assert!(t.is_partition(), "{t:?}");
    }

    #[test]
    fn formal_and_crt_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, qq) in [(2u64, 3u64), (2, 7), (3, 2), (5, 4)] {
            for _ in 0..250 {
                let prec = 30;
                let mk = |rng: &mut ChaCha8Rng| {
                    let r = rng.gen_range(0..qq);
                    let z = ZpApprox::new(p, prec, &BigInt::from(rng.gen::<u64>()));
                    (r, z)
                };
                let (r1, z1) = mk(&mut rng);
                let (r2, z2) = mk(&mut rng);
                let a = QAdicNumber::from_crt(qq, r1, &z1);
                let b = QAdicNumber::from_crt(qq, r2, &z2);
                let (sr, sz) = crt_add(qq, (r1, &z1), (r2, &z2));
                assert!(a.add(&b).eq_at_precision(&QAdicNumber::from_crt(qq, sr, &sz)));
                let (mr, mz) = crt_mul(qq, (r1, &z1), (r2, &z2));
                assert!(a.mul(&b).eq_at_precision(&QAdicNumber::from_crt(qq, mr, &mz)));
                let fs = formal_add(qq, &a.formal().unwrap(), &b.formal().unwrap());
                assert_eq!(fs, a.add(&b).formal().unwrap());
                // with tails
                let x = a.scale_p(-(rng.gen_range(0..4)));
                let y = b.scale_p(-(rng.gen_range(0..4)));
                let fx = formal_add(qq, &x.formal().unwrap(), &y.formal().unwrap());
                assert!(QAdicNumber::from_formal(p, qq, &fx).unwrap().eq_at_precision(&x.add(&y)));
                assert!(QAdicNumber::decode(&x.encode()).unwrap().eq_at_precision(&x));
            }
        }
    }
}
