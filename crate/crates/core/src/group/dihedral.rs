//! The infinite dihedral group `<a, b | b^2 = 1, bab = a^-1>` with `H = <b>`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{
    mismatch, params, Decomposition, Family, FamilyRef, GroupElement, LeftCoset, SubgroupDescriptor,
    SubgroupInfo,
};
use crate::arith::{qf, Q};
use crate::error::{HeckeError, Result};
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct Dihedral {
    /// `sigma_i(b) = -1` when true.
    flips: Vec<bool>,
}

pub(super) fn build(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let flips = params::list(p, "sigma_b", Some(vec![true]), |v| {
        match params::int_value(v, "sigma_b")? {
            1 => Ok(false),
            -1 => Ok(true),
            other => Err(HeckeError::Config(format!("sigma_b must be 1 or -1, got {other}"))),
        }
    })?;
    Ok(Arc::new(Dihedral::new(flips)))
}

fn el(m: i64, flip: bool) -> GroupElement {
    GroupElement::Dihedral { m, flip }
}

fn coords(x: &GroupElement) -> (i64, bool) {
    match x {
        GroupElement::Dihedral { m, flip } => (*m, *flip),
        _ => panic!("dihedral element expected, got {x}"),
    }
}

impl Dihedral {
    pub fn new(flips: Vec<bool>) -> Self {
        assert!(!flips.is_empty());
        Dihedral { flips }
    }

    fn h_elements() -> Vec<GroupElement> {
        vec![el(0, false), el(0, true)]
    }
}

impl Family for Dihedral {
    fn name(&self) -> &'static str {
        "dihedral"
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn params(&self) -> Vec<(String, String)> {
        let s: Vec<&str> = self.flips.iter().map(|f| if *f { "-1" } else { "1" }).collect();
        vec![("sigma_b".into(), s.join(","))]
    }

    fn dim(&self) -> usize {
        self.flips.len()
    }

    fn identity(&self) -> GroupElement {
        el(0, false)
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        match x {
            GroupElement::Dihedral { .. } => Ok(()),
            _ => Err(mismatch(self.name(), x)),
        }
    }

    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let (m, e) = coords(x);
        let (n, d) = coords(y);
        el(if e { m - n } else { m + n }, e ^ d)
    }

    fn invert_raw(&self, x: &GroupElement) -> GroupElement {
        let (m, e) = coords(x);
        if e {
            el(m, true)
        } else {
            el(-m, false)
        }
    }

    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement> {
        self.validate(x)?;
        Ok(x.clone())
    }

    fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let bad = || HeckeError::Parse(format!("dihedral element '{s}' (expected e, b, a^m or a^m b)"));
        let t = s.trim();
        match t {
            "e" => return Ok(el(0, false)),
            "b" => return Ok(el(0, true)),
            _ => {}
        }
        let (head, flip) = match t.strip_suffix('b') {
            Some(h) => (h.trim(), true),
            None => (t, false),
        };
        let m = if head == "a" {
            1
        } else {
            head.strip_prefix("a^")
                .ok_or_else(bad)?
                .trim()
                .parse::<i64>()
                .map_err(|_| bad())?
        };
        Ok(el(m, flip))
    }

    fn in_h(&self, x: &GroupElement) -> bool {
        coords(x).0 == 0
    }

    fn h_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Finite(Self::h_elements())
    }

    fn kernel_descriptor(&self) -> SubgroupDescriptor {
        if self.flips.iter().any(|f| *f) {
            SubgroupDescriptor::Finite(vec![self.identity()])
        } else {
            self.h_descriptor()
        }
    }

    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor {
        let SubgroupDescriptor::Finite(v) = s else {
            panic!("dihedral subgroups are finite")
        };
        let xi = self.invert_raw(x);
        let mut out: Vec<GroupElement> = v
            .iter()
            .map(|h| self.multiply_raw(&self.multiply_raw(x, h), &xi))
            .collect();
        out.sort();
        SubgroupDescriptor::Finite(out)
    }

    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor {
        let (SubgroupDescriptor::Finite(a), SubgroupDescriptor::Finite(b)) = (a, b) else {
            panic!("dihedral subgroups are finite")
        };
        SubgroupDescriptor::Finite(a.iter().filter(|x| b.contains(x)).cloned().collect())
    }

    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool {
        matches!(s, SubgroupDescriptor::Finite(v) if v.contains(x))
    }

    fn sub_contains_sub(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> bool {
        match b {
            SubgroupDescriptor::Finite(v) => v.iter().all(|x| self.sub_contains(a, x)),
            _ => false,
        }
    }

    fn sub_is_trivial(&self, s: &SubgroupDescriptor) -> bool {
        matches!(s, SubgroupDescriptor::Finite(v) if v.len() == 1)
    }

    fn sub_index(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> Option<u64> {
        match (a, b) {
            (SubgroupDescriptor::Finite(x), SubgroupDescriptor::Finite(y))
                if self.sub_contains_sub(a, b) =>
            {
                Some((x.len() / y.len()) as u64)
            }
            _ => None,
        }
    }

    fn hx(&self, x: &GroupElement) -> SubgroupInfo {
        if self.in_h(x) {
            SubgroupInfo {
                descriptor: self.h_descriptor(),
                generators: vec![el(0, true)],
            }
        } else {
            SubgroupInfo {
                descriptor: SubgroupDescriptor::Finite(vec![self.identity()]),
                generators: vec![],
            }
        }
    }

    fn index_l(&self, x: &GroupElement) -> u64 {
        if self.in_h(x) {
            1
        } else {
            2
        }
    }

    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement> {
        if self.in_h(x) {
            vec![self.identity()]
        } else {
            Self::h_elements()
        }
    }

    fn double_coset(&self, x: &GroupElement) -> Decomposition {
        let (m, e) = coords(x);
        let bpow = |f: bool| el(0, f);
        if m == 0 {
            Decomposition {
                h: x.clone(),
                z: self.identity(),
                k: self.identity(),
            }
        } else if m > 0 {
            Decomposition {
                h: self.identity(),
                z: el(m, false),
                k: bpow(e),
            }
        } else {
            Decomposition {
                h: bpow(true),
                z: el(-m, false),
                k: bpow(!e),
            }
        }
    }

    fn left_coset(&self, x: &GroupElement) -> LeftCoset {
        let (m, e) = coords(x);
        LeftCoset {
            rep: el(m, false),
            h: el(0, e),
        }
    }

    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>> {
        self.validate(h)?;
        let (m, e) = coords(h);
        if m != 0 {
            return Err(HeckeError::Domain(format!("{h} is not in H")));
        }
        Ok(self
            .flips
            .iter()
            .map(|f| if *f && e { qf(1, 2) } else { Q::zero() })
            .collect())
    }

    fn sigma_order(&self) -> u64 {
        if self.flips.iter().any(|f| *f) {
            2
        } else {
            1
        }
    }

    fn extension(&self, x: &GroupElement) -> Option<Vec<Q>> {
        let (_, e) = coords(x);
        Some(
            self.flips
                .iter()
                .map(|f| if *f && e { qf(1, 2) } else { Q::zero() })
                .collect(),
        )
    }

    fn trivial_character(&self) -> Arc<dyn Family> {
        Arc::new(Dihedral::new(vec![false]))
    }

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64;
        el(rng.gen_range(-h..=h), rng.gen_bool(0.5))
    }

    fn sample_h(&self, rng: &mut dyn RngCore, _height: u32) -> GroupElement {
        el(0, rng.gen_bool(0.5))
    }

    fn ball(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        (-r..=r)
            .flat_map(|m| [el(m, false), el(m, true)])
            .collect()
    }

    fn coset_window(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        (-r..=r).map(|m| el(m, false)).collect()
    }

    fn sqrt_primes(&self) -> Vec<u64> {
        vec![]
    }

    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)> {
        // B^+ = H here, so only elements of H factor
        if self.in_h(b) {
            Some((self.identity(), b.clone()))
        } else {
            None
        }
    }

    fn continuity_obstruction(&self) -> Option<String> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bab_is_a_inverse() {
        let g = Dihedral::new(vec![true]);
        let a = g.parse_element("a").unwrap();
        let b = g.parse_element("b").unwrap();
        let bab = g.multiply_raw(&g.multiply_raw(&b, &a), &b);
        assert_eq!(bab, el(-1, false));
        assert_eq!(bab.to_string(), "a^-1");
        assert_eq!(g.parse_element("a^-3 b").unwrap(), el(-3, true));
    }
}
