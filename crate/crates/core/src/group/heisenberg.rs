//! The rational Heisenberg group `[u, v, w]` (`u, v` in `Q`, `w` in `Q/Z`) with
//! `H = {[m, n, 0] : m, n in Z}`, and its `Z[1/p]` variant.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::{
    mismatch, params, split_tuple, Decomposition, Family, FamilyRef, GroupElement, Lattice2,
    LeftCoset, SubgroupDescriptor, SubgroupInfo,
};
use crate::arith::{egcd, frac, gcd_u, in_z_inv_p, is_integer, lcm_u, parse_q, q, Q};
use crate::error::{HeckeError, Result};

#[derive(Debug, Clone)]
pub struct Heisenberg {
    /// Restricts coordinates to `Z[1/p]` when set.
    prime: Option<u64>,
    /// Character components `sigma([m, n, 0]) = s m + t n`.
    chars: Vec<(Q, Q)>,
}

pub(super) fn build(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let s = params::list(p, "s", Some(vec![Q::zero()]), |v| params::rational_value(v, "s"))?;
    let t = params::list(p, "t", Some(vec![Q::zero()]), |v| params::rational_value(v, "t"))?;
    if s.len() != t.len() {
        return Err(HeckeError::Config("s and t must have the same length".into()));
    }
    Ok(Arc::new(Heisenberg::rational(s.into_iter().zip(t).collect())))
}

pub(super) fn build_padic(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let prime = params::int(p, "p", None)?;
    let qq = params::int(p, "q", Some(1))?;
    let r = params::int(p, "r", Some(1))?;
    if prime < 2 || !crate::arith::is_prime(prime as u64) {
        return Err(HeckeError::Config(format!("p = {prime} is not a prime")));
    }
    if qq < 1 || r < 1 {
        return Err(HeckeError::Config("q and r must be positive".into()));
    }
    let (pu, qu, ru) = (prime as u64, qq as u64, r as u64);
    if gcd_u(pu, qu) != 1 || gcd_u(pu, ru) != 1 || gcd_u(qu, ru) != 1 {
        return Err(HeckeError::Config(
            "p, q, r must be pairwise coprime".into(),
        ));
    }
    Ok(Arc::new(Heisenberg::padic(pu, qu, ru)))
}

fn el(u: Q, v: Q, w: Q) -> GroupElement {
    GroupElement::Heisenberg { u, v, w: frac(&w) }
}

fn coords(x: &GroupElement) -> (&Q, &Q, &Q) {
    match x {
        GroupElement::Heisenberg { u, v, w } => (u, v, w),
        _ => panic!("heisenberg element expected, got {x}"),
    }
}

fn hel(m: &BigInt, n: &BigInt) -> GroupElement {
    el(Q::from_integer(m.clone()), Q::from_integer(n.clone()), Q::zero())
}

fn den_u64(x: &Q) -> u64 {
    x.denom().to_u64().expect("denominator fits in u64")
}

impl Heisenberg {
    pub fn rational(chars: Vec<(Q, Q)>) -> Self {
        assert!(!chars.is_empty());
        Heisenberg {
            prime: None,
            chars,
        }
    }

    pub fn padic(p: u64, q: u64, r: u64) -> Self {
        Heisenberg {
            prime: Some(p),
            chars: vec![(
                Q::new(BigInt::one(), BigInt::from(q)),
                Q::new(BigInt::one(), BigInt::from(r)),
            )],
        }
    }

    pub fn prime(&self) -> Option<u64> {
        self.prime
    }

    fn lattice_of(s: &SubgroupDescriptor) -> (&Lattice2, &Q, &Q) {
        match s {
            SubgroupDescriptor::HeisLattice {
                lattice,
                alpha,
                beta,
            } => (lattice, alpha, beta),
            _ => panic!("heisenberg subgroups are lattice subgroups"),
        }
    }

    fn sample_coord(&self, rng: &mut dyn RngCore, height: u32) -> Q {
        let h = height.max(1) as i64;
        let num = rng.gen_range(-2 * h..=2 * h);
        let den = match self.prime {
            Some(p) => (p as i64).pow(rng.gen_range(0..=2)),
            None => rng.gen_range(1..=h.min(6) + 1),
        };
        Q::new(num.into(), den.into())
    }

    /// Candidate fractional coordinates for balls and windows.
    fn fractions(&self, radius: u32) -> Vec<Q> {
        let mut out = vec![Q::zero()];
        let dens: Vec<i64> = match self.prime {
            Some(p) => (1..=radius.min(3)).map(|j| (p as i64).pow(j)).collect(),
            None => (2..=(radius as i64 + 1)).collect(),
        };
        for d in dens {
            for a in 1..d {
                let x = Q::new(a.into(), d.into());
                if !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        out
    }
}

impl Family for Heisenberg {
    fn name(&self) -> &'static str {
        if self.prime.is_some() {
            "padic-heisenberg"
        } else {
            "heisenberg"
        }
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn params(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Some(p) = self.prime {
            out.push(("p".into(), p.to_string()));
        }
        let s: Vec<String> = self.chars.iter().map(|c| crate::arith::fmt_q(&c.0)).collect();
        let t: Vec<String> = self.chars.iter().map(|c| crate::arith::fmt_q(&c.1)).collect();
        out.push(("s".into(), s.join(",")));
        out.push(("t".into(), t.join(",")));
        out
    }

    fn dim(&self) -> usize {
        self.chars.len()
    }

    fn identity(&self) -> GroupElement {
        el(Q::zero(), Q::zero(), Q::zero())
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        let GroupElement::Heisenberg { u, v, w } = x else {
            return Err(mismatch(self.name(), x));
        };
        if let Some(p) = self.prime {
            for c in [u, v, w] {
                if !in_z_inv_p(c, p) {
                    return Err(HeckeError::Domain(format!(
                        "coordinate {} of {x} is not in Z[1/{p}]",
                        crate::arith::fmt_q(c)
                    )));
                }
            }
        }
        Ok(())
    }

    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let (u1, v1, w1) = coords(x);
        let (u2, v2, w2) = coords(y);
        el(u1 + u2, v1 + v2, w1 + w2 + v1 * u2)
    }

    fn invert_raw(&self, x: &GroupElement) -> GroupElement {
        let (u, v, w) = coords(x);
        el(-u, -v, u * v - w)
    }

    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        let (u, v, w) = coords(x);
        Ok(el(u.clone(), v.clone(), w.clone()))
    }

    fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let bad = || HeckeError::Parse(format!("heisenberg element '{s}' (expected [u,v,w])"));
        let f = split_tuple(s, '[', ']').ok_or_else(bad)?;
        if f.len() != 3 {
            return Err(bad());
        }
        let c: Vec<Q> = f.iter().map(|t| parse_q(t).ok_or_else(bad)).collect::<Result<_>>()?;
        let x = el(c[0].clone(), c[1].clone(), c[2].clone());
        self.validate(&x)?;
        Ok(x)
    }

    fn in_h(&self, x: &GroupElement) -> bool {
        let (u, v, w) = coords(x);
        is_integer(u) && is_integer(v) && w.is_zero()
    }

    fn h_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::HeisLattice {
            lattice: Lattice2::full(),
            alpha: Q::zero(),
            beta: Q::zero(),
        }
    }

    fn kernel_descriptor(&self) -> SubgroupDescriptor {
        let mut l = Lattice2::full();
        for (s, t) in &self.chars {
            l = l.cut(s, t);
        }
        SubgroupDescriptor::HeisLattice {
            lattice: l,
            alpha: Q::zero(),
            beta: Q::zero(),
        }
    }

    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor {
        let (l, a, b) = Self::lattice_of(s);
        let (u, v, _) = coords(x);
        SubgroupDescriptor::HeisLattice {
            lattice: l.clone(),
            alpha: frac(&(a + v)),
            beta: frac(&(b - u)),
        }
    }

    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor {
        let (la, aa, ba) = Self::lattice_of(a);
        let (lb, ab, bb) = Self::lattice_of(b);
        let l = la.intersect(lb).cut(&(aa - ab), &(ba - bb));
        SubgroupDescriptor::HeisLattice {
            lattice: l,
            alpha: aa.clone(),
            beta: ba.clone(),
        }
    }

    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool {
        let (l, a, b) = Self::lattice_of(s);
        let (u, v, w) = coords(x);
        is_integer(u)
            && is_integer(v)
            && l.contains(&u.to_integer(), &v.to_integer())
            && frac(&(a * u + b * v)) == *w
    }

    fn sub_contains_sub(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> bool {
        let (lb, ab, bb) = Self::lattice_of(b);
        lb.rows().iter().all(|(m, n)| {
            let (mq, nq) = (Q::from_integer(m.clone()), Q::from_integer(n.clone()));
            let c = ab * &mq + bb * &nq;
            self.sub_contains(a, &el(mq, nq, c))
        })
    }

    fn sub_is_trivial(&self, _s: &SubgroupDescriptor) -> bool {
        false
    }

    fn sub_index(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> Option<u64> {
        if !self.sub_contains_sub(a, b) {
            return None;
        }
        let (la, _, _) = Self::lattice_of(a);
        let (lb, _, _) = Self::lattice_of(b);
        (lb.det() / la.det()).to_u64()
    }

    fn hx(&self, x: &GroupElement) -> SubgroupInfo {
        let (u, v, _) = coords(x);
        let lattice = Lattice2::full().cut(v, &-u);
        let generators = lattice.rows().iter().map(|(m, n)| hel(m, n)).collect();
        SubgroupInfo {
            descriptor: SubgroupDescriptor::HeisLattice {
                lattice,
                alpha: Q::zero(),
                beta: Q::zero(),
            },
            generators,
        }
    }

    fn index_l(&self, x: &GroupElement) -> u64 {
        let (u, v, _) = coords(x);
        lcm_u(den_u64(u), den_u64(v))
    }

    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement> {
        let SubgroupDescriptor::HeisLattice { lattice, .. } = self.hx(x).descriptor else {
            unreachable!()
        };
        lattice.transversal().iter().map(|(m, n)| hel(m, n)).collect()
    }

    fn double_coset(&self, x: &GroupElement) -> Decomposition {
        let (u, v, w) = coords(x);
        let (uf, vf) = (frac(u), frac(v));
        let (big_u, big_v) = ((u - &uf).to_integer(), (v - &vf).to_integer());
        let d = lcm_u(den_u64(&uf), den_u64(&vf));
        let dq = q(d as i64);
        let c = (w * &dq).floor();
        // n1 A + m2 B = -c mod D
        let a = (&uf * &dq).to_integer().to_i128().unwrap();
        let b = (&vf * &dq).to_integer().to_i128().unwrap();
        let cc = c.to_integer().to_i128().unwrap();
        let dd = d as i128;
        let (g1, x1, y1) = egcd(a, b);
        let (_, x2, _) = egcd(g1, dd);
        let n1 = (-cc * x2 * x1).rem_euclid(dd.max(1));
        let m2 = (-cc * x2 * y1).rem_euclid(dd.max(1));
        let m1 = -BigInt::from(m2) - &big_u;
        let n2 = -BigInt::from(n1) - &big_v;
        let h1 = hel(&m1, &BigInt::from(n1));
        let h2 = hel(&BigInt::from(m2), &n2);
        let z = self.multiply_raw(&self.multiply_raw(&h1, x), &h2);
        debug_assert_eq!(
            z,
            el(uf.clone(), vf.clone(), w - c / &dq),
            "double coset normal form"
        );
        Decomposition {
            h: self.invert_raw(&h1),
            z,
            k: self.invert_raw(&h2),
        }
    }

    fn left_coset(&self, x: &GroupElement) -> LeftCoset {
        let (u, v, w) = coords(x);
        let (uf, vf) = (frac(u), frac(v));
        let (m, n) = (u - &uf, v - &vf);
        let rep = el(uf, vf.clone(), w - &vf * &m);
        LeftCoset {
            rep,
            h: el(m, n, Q::zero()),
        }
    }

    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>> {
        self.validate(h)?;
        if !self.in_h(h) {
            return Err(HeckeError::Domain(format!("{h} is not in H")));
        }
        let (m, n, _) = coords(h);
        Ok(self.chars.iter().map(|(s, t)| frac(&(s * m + t * n))).collect())
    }

    fn sigma_order(&self) -> u64 {
        self.chars
            .iter()
            .fold(1, |acc, (s, t)| lcm_u(acc, lcm_u(den_u64(s), den_u64(t))))
    }

    fn extension(&self, x: &GroupElement) -> Option<Vec<Q>> {
        let (u, v, _) = coords(x);
        Some(self.chars.iter().map(|(s, t)| frac(&(s * u + t * v))).collect())
    }

    fn trivial_character(&self) -> Arc<dyn Family> {
        Arc::new(Heisenberg {
            prime: self.prime,
            chars: vec![(Q::zero(), Q::zero())],
        })
    }

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let u = self.sample_coord(rng, height);
        let v = self.sample_coord(rng, height);
        let w = self.sample_coord(rng, height);
        el(u, v, w)
    }

    fn sample_h(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64;
        el(q(rng.gen_range(-h..=h)), q(rng.gen_range(-h..=h)), Q::zero())
    }

    fn ball(&self, radius: u32) -> Vec<GroupElement> {
        let fr = self.fractions(radius);
        let r = radius.min(1) as i64;
        let mut coords = Vec::new();
        for i in -r..=r {
            for f in &fr {
                let c = q(i) + f;
                if !coords.contains(&c) {
                    coords.push(c);
                }
            }
        }
        let ws = [Q::zero(), fr.last().cloned().unwrap_or_else(Q::zero)];
        let mut out = Vec::new();
        for u in &coords {
            for v in &coords {
                for w in &ws {
                    let x = el(u.clone(), v.clone(), w.clone());
                    if !out.contains(&x) {
                        out.push(x);
                    }
                }
            }
        }
        out
    }

    fn coset_window(&self, radius: u32) -> Vec<GroupElement> {
        let fr = self.fractions(radius);
        let ws = self.fractions(radius + 1);
        let mut out = Vec::new();
        for u in &fr {
            for v in &fr {
                for w in &ws {
                    out.push(el(u.clone(), v.clone(), w.clone()));
                }
            }
        }
        out
    }

    fn sqrt_primes(&self) -> Vec<u64> {
        vec![]
    }

    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)> {
        // B^+ = {[m, n, w] : m, n in Z} is a group; only it factors
        let (u, v, _) = coords(b);
        if is_integer(u) && is_integer(v) {
            Some((self.identity(), b.clone()))
        } else {
            None
        }
    }

    fn continuity_obstruction(&self) -> Option<String> {
        let p = self.prime?;
        let k = self.kernel_descriptor();
        let hk = self.sub_index(&self.h_descriptor(), &k)?;
        if hk > 1 && gcd_u(hk, p) == 1 {
            Some(format!(
                "every finite intersection of conjugates of H meets H in a subgroup p^kZ x p^lZ \
                 of {p}-power index, while [H:K] = {hk} is prime to {p} and > 1, so no such \
                 subgroup lies in K"
            ))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qf;

    #[test]
    fn multiplication_law() {
        let g = Heisenberg::rational(vec![(qf(1, 2), qf(1, 3))]);
        let x = g.parse_element("[1/2,1/3,1/4]").unwrap();
        let y = g.parse_element("[1,2,0]").unwrap();
        assert_eq!(g.multiply_raw(&x, &y), el(qf(3, 2), qf(7, 3), qf(1, 4) + qf(1, 3)));
        assert_eq!(g.multiply_raw(&x, &g.invert_raw(&x)), g.identity());
    }

    #[test]
    fn sigma_values() {
        let g = Heisenberg::rational(vec![(qf(1, 2), qf(1, 3))]);
        assert_eq!(g.sigma(&el(q(1), q(1), Q::zero())).unwrap(), vec![qf(5, 6)]);
        assert!(g.sigma(&el(qf(1, 2), q(0), Q::zero())).is_err());
    }

    #[test]
    fn central_elements_have_index_one() {
        let g = Heisenberg::rational(vec![(qf(1, 2), qf(1, 3))]);
        for w in [qf(1, 7), qf(2, 5), Q::zero()] {
            assert_eq!(g.index_l(&el(Q::zero(), Q::zero(), w)), 1);
        }
    }

    #[test]
    fn padic_coordinates_are_checked() {
        let g = Heisenberg::padic(2, 3, 5);
        assert!(g.parse_element("[1/4,3,1/2]").is_ok());
        assert!(g.parse_element("[1/3,0,0]").is_err());
    }
}
