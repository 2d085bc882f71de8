//! The `p`-adic `ax+b` group `Z[1/p] ⋊ Z` with `H = Z` and `sigma(n) = n/q`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::{
    mismatch, params, split_tuple, Decomposition, Family, FamilyRef, GroupElement, LeftCoset,
    SubgroupDescriptor, SubgroupInfo,
};
use crate::arith::{
    fmt_q, frac, gcd_u, in_z_inv_p, is_integer, is_prime, lcm_u, mult_order, parse_q, pow_q, q,
    rem_q, val_q, Q,
};
use crate::error::{HeckeError, Result};

#[derive(Debug, Clone)]
pub struct PadicAxb {
    p: u64,
    qs: Vec<u64>,
}

pub(super) fn build(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let prime = params::int(p, "p", None)?;
    if prime < 2 || !is_prime(prime as u64) {
        return Err(HeckeError::Config(format!("p = {prime} is not a prime")));
    }
    let qs = params::list(p, "q", Some(vec![1]), |v| params::int_value(v, "q"))?;
    let mut out = Vec::new();
    for qq in qs {
        if qq < 1 {
            return Err(HeckeError::Config(format!("q must be >= 1, got {qq}")));
        }
        if gcd_u(qq as u64, prime as u64) != 1 {
            return Err(HeckeError::Config(format!("q = {qq} is not coprime to p = {prime}")));
        }
        out.push(qq as u64);
    }
    Ok(Arc::new(PadicAxb::new(prime as u64, out)))
}

fn el(b: Q, k: i64) -> GroupElement {
    GroupElement::PadicAxb { b, k }
}

fn coords(x: &GroupElement) -> (&Q, i64) {
    match x {
        GroupElement::PadicAxb { b, k } => (b, *k),
        _ => panic!("padic-axb element expected, got {x}"),
    }
}

fn cyc(s: &SubgroupDescriptor) -> &Q {
    match s {
        SubgroupDescriptor::Cyclic(g) => g,
        _ => panic!("ax+b subgroups are cyclic"),
    }
}

/// `lcm` of two positive rationals: the generator of `aZ ∩ bZ`.
pub(crate) fn lcm_q(a: &Q, b: &Q) -> Q {
    use num_integer::Integer;
    let n = a.numer().lcm(b.numer());
    let d = a.denom().gcd(b.denom());
    Q::new(n, d)
}

impl PadicAxb {
    pub fn new(p: u64, qs: Vec<u64>) -> Self {
        assert!(!qs.is_empty());
        PadicAxb { p, qs }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn qs(&self) -> &[u64] {
        &self.qs
    }

    /// `lcm` of the character moduli.
    pub fn modulus(&self) -> u64 {
        self.qs.iter().fold(1, |a, b| lcm_u(a, *b))
    }

    /// Multiplicative order of `p` modulo the character modulus.
    pub fn n0(&self) -> u64 {
        mult_order(self.p, self.modulus()).expect("p is coprime to q")
    }

    fn pk(&self, k: i64) -> Q {
        pow_q(self.p, k)
    }
}

impl Family for PadicAxb {
    fn name(&self) -> &'static str {
        "padic-axb"
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn params(&self) -> Vec<(String, String)> {
        let qs: Vec<String> = self.qs.iter().map(|q| q.to_string()).collect();
        vec![("p".into(), self.p.to_string()), ("q".into(), qs.join(","))]
    }

    fn dim(&self) -> usize {
        self.qs.len()
    }

    fn identity(&self) -> GroupElement {
        el(Q::zero(), 0)
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        let GroupElement::PadicAxb { b, .. } = x else {
            return Err(mismatch(self.name(), x));
        };
        if !in_z_inv_p(b, self.p) {
            return Err(HeckeError::Domain(format!(
                "{} is not in Z[1/{}]",
                fmt_q(b),
                self.p
            )));
        }
        Ok(())
    }

    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let (b1, k1) = coords(x);
        let (b2, k2) = coords(y);
        el(b1 + self.pk(k1) * b2, k1 + k2)
    }

    fn invert_raw(&self, x: &GroupElement) -> GroupElement {
        let (b, k) = coords(x);
        el(-(self.pk(-k) * b), -k)
    }

    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        Ok(x.clone())
    }

    /// Accepts `(b,t)` with `t` a power of `p`, or `(b,p^k)`.
    fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let bad = || HeckeError::Parse(format!("padic-axb element '{s}' (expected (b,p^k) or (b,t))"));
        let f = split_tuple(s, '(', ')').ok_or_else(bad)?;
        if f.len() != 2 {
            return Err(bad());
        }
        let b = parse_q(&f[0]).ok_or_else(bad)?;
        let k = if let Some(e) = f[1].strip_prefix("p^") {
            e.trim().parse::<i64>().map_err(|_| bad())?
        } else {
            let t = parse_q(&f[1]).ok_or_else(bad)?;
            let k = val_q(&t, self.p);
            if t != self.pk(k) {
                return Err(HeckeError::Domain(format!(
                    "{} is not a power of {}",
                    f[1], self.p
                )));
            }
            k
        };
        let x = el(b, k);
        self.validate(&x)?;
        Ok(x)
    }

    fn in_h(&self, x: &GroupElement) -> bool {
        let (b, k) = coords(x);
        k == 0 && is_integer(b)
    }

    fn h_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(Q::one())
    }

    fn kernel_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(q(self.modulus() as i64))
    }

    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor {
        let (_, k) = coords(x);
        SubgroupDescriptor::Cyclic(cyc(s) * self.pk(k))
    }

    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(lcm_q(cyc(a), cyc(b)))
    }

    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool {
        let (b, k) = coords(x);
        k == 0 && is_integer(&(b / cyc(s)))
    }

    fn sub_contains_sub(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> bool {
        is_integer(&(cyc(b) / cyc(a)))
    }

    fn sub_is_trivial(&self, _s: &SubgroupDescriptor) -> bool {
        false
    }

    fn sub_index(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> Option<u64> {
        let r = cyc(b) / cyc(a);
        if is_integer(&r) {
            r.to_integer().to_u64()
        } else {
            None
        }
    }

    fn hx(&self, x: &GroupElement) -> SubgroupInfo {
        let (_, k) = coords(x);
        let g = self.pk(k.max(0));
        SubgroupInfo {
            descriptor: SubgroupDescriptor::Cyclic(g.clone()),
            generators: vec![el(g, 0)],
        }
    }

    fn index_l(&self, x: &GroupElement) -> u64 {
        let (_, k) = coords(x);
        self.p.pow(k.max(0) as u32)
    }

    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement> {
        (0..self.index_l(x) as i64).map(|m| el(q(m), 0)).collect()
    }

    fn double_coset(&self, x: &GroupElement) -> Decomposition {
        let (b, k) = coords(x);
        let modulus = self.pk(k.min(0));
        let canon = rem_q(b, &modulus);
        let j = (b - &canon) / &modulus;
        let (m1, m2) = if k >= 0 { (j, Q::zero()) } else { (Q::zero(), j) };
        Decomposition {
            h: el(m1, 0),
            z: el(canon, k),
            k: el(m2, 0),
        }
    }

    fn left_coset(&self, x: &GroupElement) -> LeftCoset {
        let (b, k) = coords(x);
        let modulus = self.pk(k);
        let rep = rem_q(b, &modulus);
        let m = (b - &rep) / &modulus;
        LeftCoset {
            rep: el(rep, k),
            h: el(m, 0),
        }
    }

    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>> {
        self.validate(h)?;
        if !self.in_h(h) {
            return Err(HeckeError::Domain(format!("{h} is not in H")));
        }
        let (b, _) = coords(h);
        Ok(self
            .qs
            .iter()
            .map(|qq| frac(&(b / q(*qq as i64))))
            .collect())
    }

    fn sigma_order(&self) -> u64 {
        self.modulus()
    }

    fn extension(&self, x: &GroupElement) -> Option<Vec<Q>> {
        // only when p = 1 mod q: then n/p^j -> n/q mod 1 is a character of N fixed by p
        if self.qs.iter().any(|qq| (self.p - 1) % qq != 0) {
            return None;
        }
        let (b, _) = coords(x);
        let num = b.numer();
        Some(
            self.qs
                .iter()
                .map(|qq| frac(&Q::new(num.clone(), BigInt::from(*qq))))
                .collect(),
        )
    }

    fn trivial_character(&self) -> Arc<dyn Family> {
        Arc::new(PadicAxb::new(self.p, vec![1]))
    }

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64;
        let j = rng.gen_range(0..=2u32);
        let den = (self.p as i64).pow(j);
        let b = Q::new(rng.gen_range(-h * den..=h * den).into(), den.into());
        el(b, rng.gen_range(-h..=h))
    }

    fn sample_h(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = 2 * height.max(1) as i64;
        el(q(rng.gen_range(-h..=h)), 0)
    }

    fn ball(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        let mut bs: Vec<Q> = Vec::new();
        for j in 0..=1u32 {
            let den = (self.p as i64).pow(j);
            for a in -r..=r {
                let b = Q::new(a.into(), den.into());
                if !bs.contains(&b) {
                    bs.push(b);
                }
            }
        }
        let mut out = Vec::new();
        for k in -r..=r {
            for b in &bs {
                out.push(el(b.clone(), k));
            }
        }
        out
    }

    fn coset_window(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        let p = self.p as i64;
        let mut out = Vec::new();
        for k in -r..=r {
            // b in [0, p^k) with denominator p^max(-k, 0) + 1
            let e = (-k).max(0) + 1;
            let den = p.pow(e as u32);
            let top = self.pk(k) * q(den);
            let top = top.to_integer().to_i64().unwrap();
            for a in 0..top {
                out.push(el(Q::new(a.into(), den.into()), k));
            }
        }
        out
    }

    fn sqrt_primes(&self) -> Vec<u64> {
        vec![self.p]
    }

    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)> {
        let (r, k) = coords(b);
        if k % self.n0() as i64 != 0 {
            return None;
        }
        let k1 = -k.max(0);
        let x = el(Q::zero(), k1);
        let y = el(self.pk(k1) * r, k1 + k);
        Some((x, y))
    }

    fn continuity_obstruction(&self) -> Option<String> {
        let m = self.modulus();
        if m == 1 {
            return None;
        }
        Some(format!(
            "every conjugate x H x^-1 is p^k Z and finite intersections of them are again \
             of this form; p^k Z ⊆ K = {m}Z would force {m} | {p}^k, impossible since {m} > 1 \
             is prime to p = {p}",
            p = self.p
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_scales_by_p_power() {
        let g = PadicAxb::new(2, vec![3]);
        let x = g.parse_element("(1/2,4)").unwrap();
        assert_eq!(x, el(Q::new(1.into(), 2.into()), 2));
        for m in -16..=16 {
            let h = el(q(m), 0);
            let c = g.multiply_raw(&g.multiply_raw(&x, &h), &g.invert_raw(&x));
            assert_eq!(c, el(q(4 * m), 0));
        }
    }

    #[test]
    fn index_examples() {
        let g = PadicAxb::new(2, vec![3]);
        assert_eq!(g.index_l(&el(Q::zero(), 1)), 2);
        assert_eq!(g.index_l(&el(Q::zero(), -1)), 1);
        assert_eq!(g.n0(), 2);
        assert_eq!(PadicAxb::new(2, vec![7]).n0(), 3);
    }

    #[test]
    fn extension_only_when_p_is_one_mod_q() {
        assert!(PadicAxb::new(5, vec![4]).extension(&el(Q::zero(), 1)).is_some());
        assert!(PadicAxb::new(2, vec![3]).extension(&el(Q::zero(), 1)).is_none());
    }
}
