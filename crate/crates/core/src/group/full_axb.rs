//! The full `ax+b` group `Q ⋊ Q*_+` as matrices `[[1, b], [0, a]]`, with `H = Z`
//! and `sigma(m) = m/n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::padic_axb::lcm_q;
use super::{
    mismatch, params, split_tuple, Decomposition, Family, FamilyRef, GroupElement, LeftCoset,
    SubgroupDescriptor, SubgroupInfo,
};
use crate::arith::{fmt_q, frac, inv_mod_u, is_integer, lcm_u, parse_q, q, rem_q, Q};
use crate::error::{HeckeError, Result};

#[derive(Debug, Clone)]
pub struct FullAxb {
    ns: Vec<u64>,
}

pub(super) fn build(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let ns = params::list(p, "n", Some(vec![1]), |v| params::int_value(v, "n"))?;
    let mut out = Vec::new();
    for n in ns {
        if n < 1 {
            return Err(HeckeError::Config(format!("n must be >= 1, got {n}")));
        }
        out.push(n as u64);
    }
    Ok(Arc::new(FullAxb::new(out)))
}

fn el(b: Q, a: Q) -> GroupElement {
    GroupElement::FullAxb { b, a }
}

fn coords(x: &GroupElement) -> (&Q, &Q) {
    match x {
        GroupElement::FullAxb { b, a } => (b, a),
        _ => panic!("full-axb element expected, got {x}"),
    }
}

fn cyc(s: &SubgroupDescriptor) -> &Q {
    match s {
        SubgroupDescriptor::Cyclic(g) => g,
        _ => panic!("ax+b subgroups are cyclic"),
    }
}

impl FullAxb {
    pub fn new(ns: Vec<u64>) -> Self {
        assert!(!ns.is_empty());
        FullAxb { ns }
    }

    pub fn modulus(&self) -> u64 {
        self.ns.iter().fold(1, |a, b| lcm_u(a, *b))
    }

    /// The element `(b, a)`.
    pub fn element(b: Q, a: Q) -> GroupElement {
        el(b, a)
    }
}

impl Family for FullAxb {
    fn name(&self) -> &'static str {
        "full-axb"
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn params(&self) -> Vec<(String, String)> {
        let ns: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
        vec![("n".into(), ns.join(","))]
    }

    fn dim(&self) -> usize {
        self.ns.len()
    }

    fn identity(&self) -> GroupElement {
        el(Q::zero(), Q::one())
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        let GroupElement::FullAxb { a, .. } = x else {
            return Err(mismatch(self.name(), x));
        };
        if !a.is_positive() {
            return Err(HeckeError::Domain(format!("a = {} must be positive", fmt_q(a))));
        }
        Ok(())
    }

    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let (b1, a1) = coords(x);
        let (b2, a2) = coords(y);
        el(b1 * a2 + b2, a1 * a2)
    }

    fn invert_raw(&self, x: &GroupElement) -> GroupElement {
        let (b, a) = coords(x);
        el(-(b / a), a.recip())
    }

    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        Ok(x.clone())
    }

    fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let bad = || HeckeError::Parse(format!("full-axb element '{s}' (expected (b,a))"));
        let f = split_tuple(s, '(', ')').ok_or_else(bad)?;
        if f.len() != 2 {
            return Err(bad());
        }
        let x = el(
            parse_q(&f[0]).ok_or_else(bad)?,
            parse_q(&f[1]).ok_or_else(bad)?,
        );
        self.validate(&x)?;
        Ok(x)
    }

    fn in_h(&self, x: &GroupElement) -> bool {
        let (b, a) = coords(x);
        a.is_one() && is_integer(b)
    }

    fn h_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(Q::one())
    }

    fn kernel_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(q(self.modulus() as i64))
    }

    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor {
        let (_, a) = coords(x);
        SubgroupDescriptor::Cyclic(cyc(s) / a)
    }

    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor {
        SubgroupDescriptor::Cyclic(lcm_q(cyc(a), cyc(b)))
    }

    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool {
        let (b, a) = coords(x);
        a.is_one() && is_integer(&(b / cyc(s)))
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
        let (_, a) = coords(x);
        let d = Q::from_integer(a.denom().clone());
        SubgroupInfo {
            descriptor: SubgroupDescriptor::Cyclic(d.clone()),
            generators: vec![el(d, Q::one())],
        }
    }

    fn index_l(&self, x: &GroupElement) -> u64 {
        let (_, a) = coords(x);
        a.denom().to_u64().expect("index fits in u64")
    }

    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement> {
        (0..self.index_l(x) as i64)
            .map(|m| el(q(m), Q::one()))
            .collect()
    }

    fn double_coset(&self, x: &GroupElement) -> Decomposition {
        let (b, a) = coords(x);
        let (c, d) = (a.numer().clone(), a.denom().clone());
        let step = Q::new(BigInt::one(), d.clone());
        let canon = rem_q(b, &step);
        // b - canon = j/d = m1 c/d + m2
        let j = ((b - &canon) * Q::from_integer(d.clone())).to_integer();
        let e = c.extended_gcd(&d);
        debug_assert!(e.gcd.is_one());
        let m1 = &j * &e.x;
        let m2 = &j * &e.y;
        Decomposition {
            h: el(Q::from_integer(m1), Q::one()),
            z: el(canon, a.clone()),
            k: el(Q::from_integer(m2), Q::one()),
        }
    }

    fn left_coset(&self, x: &GroupElement) -> LeftCoset {
        let (b, a) = coords(x);
        let r = frac(b);
        LeftCoset {
            h: el(b - &r, Q::one()),
            rep: el(r, a.clone()),
        }
    }

    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>> {
        self.validate(h)?;
        if !self.in_h(h) {
            return Err(HeckeError::Domain(format!("{h} is not in H")));
        }
        let (b, _) = coords(h);
        Ok(self.ns.iter().map(|n| frac(&(b / q(*n as i64)))).collect())
    }

    fn sigma_order(&self) -> u64 {
        self.modulus()
    }

    fn extension(&self, _x: &GroupElement) -> Option<Vec<Q>> {
        if self.modulus() == 1 {
            Some(vec![Q::zero(); self.ns.len()])
        } else {
            None
        }
    }

    fn trivial_character(&self) -> Arc<dyn Family> {
        Arc::new(FullAxb::new(vec![1]))
    }

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64 + 1;
        let c = rng.gen_range(1..=h);
        let d = rng.gen_range(1..=h);
        let e = rng.gen_range(1..=3);
        let b = Q::new(rng.gen_range(-2 * e..=2 * e).into(), e.into());
        el(b, Q::new(c.into(), d.into()))
    }

    fn sample_h(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = 2 * height.max(1) as i64;
        el(q(rng.gen_range(-h..=h)), Q::one())
    }

    fn ball(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius.max(1) as i64;
        let mut a_vals: Vec<Q> = Vec::new();
        for c in 1..=r + 1 {
            for d in 1..=r + 1 {
                let a = Q::new(c.into(), d.into());
                if !a_vals.contains(&a) {
                    a_vals.push(a);
                }
            }
        }
        let mut b_vals: Vec<Q> = Vec::new();
        for e in 1..=2 {
            for j in -r..=r {
                let b = Q::new(j.into(), e.into());
                if !b_vals.contains(&b) {
                    b_vals.push(b);
                }
            }
        }
        let mut out = Vec::new();
        for a in &a_vals {
            for b in &b_vals {
                out.push(el(b.clone(), a.clone()));
            }
        }
        out
    }

    fn coset_window(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius.max(1) as i64;
        let mut out = Vec::new();
        for c in 1..=r + 1 {
            for d in 1..=r + 1 {
                if c.gcd(&d) != 1 {
                    continue;
                }
                for e in 1..=r {
                    for j in 0..e {
                        if j.gcd(&e) == 1 || (j == 0 && e == 1) {
                            out.push(el(Q::new(j.into(), e.into()), Q::new(c.into(), d.into())));
                        }
                    }
                }
            }
        }
        out
    }

    fn sqrt_primes(&self) -> Vec<u64> {
        vec![]
    }

    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)> {
        let (r, a) = coords(b);
        let n = self.modulus();
        let (c, d) = (a.numer().to_u64()?, a.denom().to_u64()?);
        if (c % n) != (d % n) {
            return None;
        }
        let k = if n == 1 { 1 } else { inv_mod_u(c % n, n)? };
        let x = el(Q::zero(), q((d * k) as i64));
        let y = el(r.clone(), q((c * k) as i64));
        Some((x, y))
    }

    fn continuity_obstruction(&self) -> Option<String> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qf;

    #[test]
    fn conjugation_divides_by_a() {
        let g = FullAxb::new(vec![5]);
        let x = el(q(1), qf(1, 5));
        for m in -10..=10 {
            let c = g.multiply_raw(&g.multiply_raw(&x, &el(q(m), Q::one())), &g.invert_raw(&x));
            assert_eq!(c, el(q(5 * m), Q::one()));
        }
    }

    #[test]
    fn double_coset_normal_form() {
        let g = FullAxb::new(vec![3]);
        let x = el(qf(7, 4), qf(3, 4));
        let dc = g.double_coset(&x);
        let back = g.multiply_raw(&g.multiply_raw(&dc.h, &dc.z), &dc.k);
        assert_eq!(back, x);
        assert_eq!(dc.z, el(Q::zero(), qf(3, 4)));
    }
}
