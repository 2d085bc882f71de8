//! The lamplighter group `(⊕_Z F) ⋊ Z` with `F = Z/f`, `H = ⊕_{j>=1} F` and
//! `sigma(y) = sum_j a_j y_j / f` for an eventually periodic sequence `(a_j)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{
    mismatch, params, Decomposition, Family, FamilyRef, GroupElement, LeftCoset,
    SubgroupDescriptor, SubgroupInfo,
};
use crate::arith::{factor, frac, lcm_u, Q};
use crate::error::{HeckeError, Result};

/// An eventually periodic sequence `(a_j)_{j >= 1}` in `Z/f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicSeq {
    pre: Vec<u64>,
    period: Vec<u64>,
}

impl PeriodicSeq {
    /// Builds and normalizes (shortest preperiod and period).
    pub fn new(pre: Vec<u64>, period: Vec<u64>, f: u64) -> Result<Self> {
        if period.is_empty() {
            return Err(HeckeError::Unsupported(
                "lamplighter character must be eventually periodic (empty period)".into(),
            ));
        }
        let mut pre: Vec<u64> = pre.into_iter().map(|a| a % f).collect();
        let mut period: Vec<u64> = period.into_iter().map(|a| a % f).collect();
        // shortest period
        let n = period.len();
        for t in 1..=n {
            if n % t == 0 && (0..n).all(|i| period[i] == period[i % t]) {
                period.truncate(t);
                break;
            }
        }
        // absorb the preperiod from the right
        while let Some(&last) = pre.last() {
            let t = period.len();
            if last == period[t - 1] {
                pre.pop();
                period.rotate_right(1);
            } else {
                break;
            }
        }
        Ok(PeriodicSeq { pre, period })
    }

    pub fn at(&self, j: i64) -> u64 {
        assert!(j >= 1, "sequence index {j} < 1");
        let i = (j - 1) as usize;
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn preperiod(&self) -> usize {
        self.pre.len()
    }

    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn pre(&self) -> &[u64] {
        &self.pre
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    pub fn is_constant(&self) -> bool {
        self.pre.is_empty() && self.period.len() == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.is_constant() && self.period[0] == 0
    }
}

#[derive(Debug, Clone)]
pub struct Lamplighter {
    f: u64,
    seqs: Vec<PeriodicSeq>,
}

pub(super) fn build(p: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
    let f = params::int(p, "f", Some(2))?;
    if f < 2 {
        return Err(HeckeError::Config(format!("f must be >= 2, got {f}")));
    }
    let read = |key: &str, default: Vec<u64>| -> Result<Vec<u64>> {
        params::list(p, key, Some(default), |v| {
            let x = params::int_value(v, key)?;
            if x < 0 {
                return Err(HeckeError::Config(format!("{key} entries must be >= 0")));
            }
            Ok(x as u64)
        })
    };
    let pre = read("sigma_pre", vec![])?;
    let period = read("sigma_period", vec![1])?;
    let seq = PeriodicSeq::new(pre, period, f as u64).map_err(|e| HeckeError::Config(e.to_string()))?;
    Ok(Arc::new(Lamplighter::new(f as u64, vec![seq])))
}

type Lamps = BTreeMap<i64, u64>;

fn el(y: Lamps, k: i64) -> GroupElement {
    GroupElement::Lamplighter { y, k }
}

fn coords(x: &GroupElement) -> (&Lamps, i64) {
    match x {
        GroupElement::Lamplighter { y, k } => (y, *k),
        _ => panic!("lamplighter element expected, got {x}"),
    }
}

fn lamp_of(s: &SubgroupDescriptor) -> (i64, &[(i64, usize)]) {
    match s {
        SubgroupDescriptor::Lamp { start, forms } => (*start, forms),
        _ => panic!("lamplighter subgroups are lamp subgroups"),
    }
}

impl Lamplighter {
    pub fn new(f: u64, seqs: Vec<PeriodicSeq>) -> Self {
        assert!(f >= 2 && !seqs.is_empty());
        Lamplighter { f, seqs }
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    pub fn seqs(&self) -> &[PeriodicSeq] {
        &self.seqs
    }

    fn add(&self, a: &Lamps, b: &Lamps, shift: i64, sign: u64) -> Lamps {
        let mut out = a.clone();
        for (j, c) in b {
            let e = out.entry(j + shift).or_insert(0);
            *e = (*e + sign * c) % self.f;
        }
        out.retain(|_, c| *c != 0);
        out
    }

    fn neg(&self, a: &Lamps) -> Lamps {
        a.iter().map(|(j, c)| (*j, (self.f - c) % self.f)).filter(|(_, c)| *c != 0).collect()
    }

    fn shift(a: &Lamps, s: i64) -> Lamps {
        a.iter().map(|(j, c)| (j + s, *c)).collect()
    }

    /// Largest preperiod and common period of the components.
    fn pre_and_period(&self) -> (i64, i64) {
        let pre = self.seqs.iter().map(|s| s.preperiod()).max().unwrap_or(0) as i64;
        let t = self.seqs.iter().fold(1, |a, s| lcm_u(a, s.period_len() as u64)) as i64;
        (pre, t)
    }

    /// Coordinates `j >= start` whose form-value vectors represent all values.
    fn coordinate_range(&self, start: i64, forms: &[(i64, usize)]) -> std::ops::Range<i64> {
        let (pre, t) = self.pre_and_period();
        let max_shift = forms.iter().map(|(s, _)| *s).max().unwrap_or(0);
        let stable = start.max(pre + 1 + max_shift);
        start..stable + t
    }

    /// The subgroup of `(Z/f)^r` spanned by the images of the unit vectors.
    fn image(&self, vectors: &[Vec<u64>], r: usize) -> BTreeSet<Vec<u64>> {
        assert!(
            (self.f as f64).powi(r as i32) <= 1e6,
            "lamp form image too large to enumerate"
        );
        let mut set = BTreeSet::new();
        set.insert(vec![0; r]);
        let mut frontier = vec![vec![0; r]];
        while let Some(v) = frontier.pop() {
            for g in vectors {
                let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % self.f).collect();
                if set.insert(w.clone()) {
                    frontier.push(w);
                }
            }
        }
        set
    }

    fn form_vectors(&self, start: i64, forms: &[(i64, usize)], extra: &[(i64, usize)]) -> Vec<Vec<u64>> {
        let all: Vec<(i64, usize)> = forms.iter().chain(extra).cloned().collect();
        let range = self.coordinate_range(start, &all);
        range
            .map(|j| {
                all.iter()
                    .map(|(s, c)| self.seqs[*c].at(j - s))
                    .collect::<Vec<u64>>()
            })
            .filter(|v| v.iter().any(|a| *a != 0))
            .collect()
    }

    /// `|sigma(H)|`-style count: size of the image of `⊕_{j>=start}` under the forms.
    fn image_size(&self, start: i64, forms: &[(i64, usize)]) -> u64 {
        if forms.is_empty() {
            return 1;
        }
        self.image(&self.form_vectors(start, forms, &[]), forms.len()).len() as u64
    }

    /// The constant value of each component, when every component is 1-periodic.
    pub fn constant_values(&self) -> Option<Vec<u64>> {
        self.seqs
            .iter()
            .map(|s| if s.is_constant() { Some(s.period[0]) } else { None })
            .collect()
    }

    pub fn element(y: &[(i64, u64)], k: i64) -> GroupElement {
        el(y.iter().cloned().filter(|(_, c)| *c != 0).collect(), k)
    }
}

impl Family for Lamplighter {
    fn name(&self) -> &'static str {
        "lamplighter"
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn params(&self) -> Vec<(String, String)> {
        let mut out = vec![("f".into(), self.f.to_string())];
        for (i, s) in self.seqs.iter().enumerate() {
            out.push((format!("sigma{i}_pre"), format!("{:?}", s.pre)));
            out.push((format!("sigma{i}_period"), format!("{:?}", s.period)));
        }
        out
    }

    fn dim(&self) -> usize {
        self.seqs.len()
    }

    fn identity(&self) -> GroupElement {
        el(Lamps::new(), 0)
    }

    fn validate(&self, x: &GroupElement) -> Result<()> {
        let GroupElement::Lamplighter { y, .. } = x else {
            return Err(mismatch(self.name(), x));
        };
        if y.values().any(|c| *c == 0 || *c >= self.f) {
            return Err(HeckeError::Domain(format!(
                "lamp values of {x} must lie in 1..{}",
                self.f
            )));
        }
        Ok(())
    }

    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let (y1, k1) = coords(x);
        let (y2, k2) = coords(y);
        el(self.add(y1, y2, k1, 1), k1 + k2)
    }

    fn invert_raw(&self, x: &GroupElement) -> GroupElement {
        let (y, k) = coords(x);
        el(Self::shift(&self.neg(y), -k), -k)
    }

    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement> {
        let GroupElement::Lamplighter { y, k } = x else {
            return Err(mismatch(self.name(), x));
        };
        let y: Lamps = y
            .iter()
            .map(|(j, c)| (*j, c % self.f))
            .filter(|(_, c)| *c != 0)
            .collect();
        Ok(el(y, *k))
    }

    /// `([j:c,...],k)`.
    fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let bad = || HeckeError::Parse(format!("lamplighter element '{s}' (expected ([j:c,...],k))"));
        let t = s.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (lamps, k) = t.rsplit_once(',').ok_or_else(bad)?;
        let k: i64 = k.trim().parse().map_err(|_| bad())?;
        let inner = lamps
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(bad)?;
        let mut y = Lamps::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (j, c) = part.split_once(':').ok_or_else(bad)?;
            let j: i64 = j.trim().parse().map_err(|_| bad())?;
            let c: u64 = c.trim().parse().map_err(|_| bad())?;
            *y.entry(j).or_insert(0) += c;
        }
        self.canonicalize(&el(y, k))
    }

    fn in_h(&self, x: &GroupElement) -> bool {
        let (y, k) = coords(x);
        k == 0 && y.keys().all(|j| *j >= 1)
    }

    fn h_descriptor(&self) -> SubgroupDescriptor {
        SubgroupDescriptor::Lamp {
            start: 1,
            forms: vec![],
        }
    }

    fn kernel_descriptor(&self) -> SubgroupDescriptor {
        let forms: Vec<(i64, usize)> = (0..self.seqs.len())
            .filter(|c| !self.seqs[*c].is_trivial())
            .map(|c| (0, c))
            .collect();
        SubgroupDescriptor::Lamp { start: 1, forms }
    }

    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor {
        let (start, forms) = lamp_of(s);
        let (_, k) = coords(x);
        SubgroupDescriptor::Lamp {
            start: start + k,
            forms: forms.iter().map(|(s, c)| (s + k, *c)).collect(),
        }
    }

    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor {
        let (sa, fa) = lamp_of(a);
        let (sb, fb) = lamp_of(b);
        let set: BTreeSet<(i64, usize)> = fa.iter().chain(fb).cloned().collect();
        SubgroupDescriptor::Lamp {
            start: sa.max(sb),
            forms: set.into_iter().collect(),
        }
    }

    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool {
        let (start, forms) = lamp_of(s);
        let (y, k) = coords(x);
        k == 0
            && y.keys().all(|j| *j >= start)
            && forms.iter().all(|(sh, c)| {
                y.iter().map(|(j, v)| self.seqs[*c].at(j - sh) * v).sum::<u64>() % self.f == 0
            })
    }

    fn sub_contains_sub(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> bool {
        let (sa, fa) = lamp_of(a);
        let (sb, fb) = lamp_of(b);
        if sb < sa {
            return false;
        }
        let r = fb.len();
        fa.iter().all(|phi| {
            let vecs = self.form_vectors(sb, fb, std::slice::from_ref(phi));
            let img = self.image(&vecs, r + 1);
            img.iter().all(|v| v[..r].iter().any(|a| *a != 0) || v[r] == 0)
        })
    }

    fn sub_is_trivial(&self, _s: &SubgroupDescriptor) -> bool {
        false
    }

    fn sub_index(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> Option<u64> {
        if !self.sub_contains_sub(a, b) {
            return None;
        }
        let (sa, fa) = lamp_of(a);
        let (sb, fb) = lamp_of(b);
        let num = self.f.checked_pow((sb - sa) as u32)? * self.image_size(sb, fb);
        Some(num / self.image_size(sa, fa))
    }

    fn hx(&self, x: &GroupElement) -> SubgroupInfo {
        let (_, k) = coords(x);
        let start = 1 + k.max(0);
        // enough unit vectors to see the eventually periodic tail on both sides of the shift
        let range = self.coordinate_range(start, &[(0, 0), (k, 0)]);
        let generators = range.map(|j| Self::element(&[(j, 1)], 0)).collect();
        SubgroupInfo {
            descriptor: SubgroupDescriptor::Lamp {
                start,
                forms: vec![],
            },
            generators,
        }
    }

    fn index_l(&self, x: &GroupElement) -> u64 {
        let (_, k) = coords(x);
        self.f.pow(k.max(0) as u32)
    }

    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement> {
        let (_, k) = coords(x);
        let k = k.max(0);
        let mut out = Vec::new();
        let total = self.f.pow(k as u32);
        for mut code in 0..total {
            let mut y = Lamps::new();
            for j in 1..=k {
                let c = code % self.f;
                code /= self.f;
                if c != 0 {
                    y.insert(j, c);
                }
            }
            out.push(el(y, 0));
        }
        out
    }

    fn double_coset(&self, x: &GroupElement) -> Decomposition {
        let (y, k) = coords(x);
        let cut = 1 + k.min(0);
        let head: Lamps = y.range(..cut).map(|(j, c)| (*j, *c)).collect();
        let tail: Lamps = y.range(cut..).map(|(j, c)| (*j, *c)).collect();
        let z = el(head, k);
        if k >= 0 {
            Decomposition {
                h: el(tail, 0),
                z,
                k: self.identity(),
            }
        } else {
            Decomposition {
                h: self.identity(),
                z,
                k: el(Self::shift(&tail, -k), 0),
            }
        }
    }

    fn left_coset(&self, x: &GroupElement) -> LeftCoset {
        let (y, k) = coords(x);
        let head: Lamps = y.range(..=k).map(|(j, c)| (*j, *c)).collect();
        let tail: Lamps = y.range(k + 1..).map(|(j, c)| (*j, *c)).collect();
        LeftCoset {
            rep: el(head, k),
            h: el(Self::shift(&tail, -k), 0),
        }
    }

    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>> {
        self.validate(h)?;
        if !self.in_h(h) {
            return Err(HeckeError::Domain(format!("{h} is not in H")));
        }
        let (y, _) = coords(h);
        Ok(self
            .seqs
            .iter()
            .map(|s| {
                let tot: u64 = y.iter().map(|(j, c)| s.at(*j) * c).sum();
                Q::new(((tot % self.f) as i64).into(), (self.f as i64).into())
            })
            .collect())
    }

    fn sigma_order(&self) -> u64 {
        // the attained values generate the subgroup of (1/f)Z/Z spanned by the a_j
        let mut order = 1;
        for s in &self.seqs {
            let g = s
                .pre
                .iter()
                .chain(&s.period)
                .fold(self.f, |g, a| crate::arith::gcd_u(g, *a));
            order = lcm_u(order, self.f / g);
        }
        order
    }

    fn extension(&self, x: &GroupElement) -> Option<Vec<Q>> {
        let vals = self.constant_values()?;
        let (y, _) = coords(x);
        let tot: u64 = y.values().sum();
        Some(
            vals.iter()
                .map(|a| frac(&Q::new(((a * tot) as i64).into(), (self.f as i64).into())))
                .collect(),
        )
    }

    fn trivial_character(&self) -> Arc<dyn Family> {
        Arc::new(Lamplighter::new(
            self.f,
            vec![PeriodicSeq::new(vec![], vec![0], self.f).unwrap()],
        ))
    }

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64;
        let mut y = Lamps::new();
        for j in -h..=h {
            if rng.gen_bool(0.4) {
                y.insert(j, rng.gen_range(1..self.f));
            }
        }
        el(y, rng.gen_range(-h..=h))
    }

    fn sample_h(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement {
        let h = height.max(1) as i64 + 1;
        let mut y = Lamps::new();
        for j in 1..=h {
            if rng.gen_bool(0.5) {
                y.insert(j, rng.gen_range(1..self.f));
            }
        }
        el(y, 0)
    }

    fn ball(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        let mut out = Vec::new();
        let span = [-1i64, 0, 1];
        let total = self.f.pow(span.len() as u32);
        for k in -r..=r {
            for mut code in 0..total {
                let mut y = Lamps::new();
                for j in span {
                    let c = code % self.f;
                    code /= self.f;
                    if c != 0 {
                        y.insert(j, c);
                    }
                }
                out.push(el(y, k));
            }
        }
        out
    }

    fn coset_window(&self, radius: u32) -> Vec<GroupElement> {
        let r = radius as i64;
        let mut out = Vec::new();
        for k in -r..=r {
            for code in 0..self.f * self.f {
                let mut y = Lamps::new();
                if code % self.f != 0 {
                    y.insert(k, code % self.f);
                }
                if code / self.f != 0 {
                    y.insert(k - 1, code / self.f);
                }
                out.push(el(y, k));
            }
        }
        out
    }

    fn sqrt_primes(&self) -> Vec<u64> {
        factor(self.f).into_iter().map(|(p, _)| p).collect()
    }

    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)> {
        let (_, k) = coords(b);
        let x = el(Lamps::new(), -k.max(0));
        let y = self.multiply_raw(&x, b);
        Some((x, y))
    }

    fn continuity_obstruction(&self) -> Option<String> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_normalization() {
        let s = PeriodicSeq::new(vec![1, 1], vec![1, 1], 2).unwrap();
        assert!(s.is_constant());
        let s = PeriodicSeq::new(vec![1], vec![0], 2).unwrap();
        assert_eq!((s.preperiod(), s.period_len()), (1, 1));
        assert_eq!((s.at(1), s.at(2), s.at(9)), (1, 0, 0));
        let s = PeriodicSeq::new(vec![0, 1], vec![0, 1], 2).unwrap();
        assert_eq!((s.preperiod(), s.period_len()), (0, 2));
    }

    #[test]
    fn group_law() {
        let g = Lamplighter::new(2, vec![PeriodicSeq::new(vec![], vec![1], 2).unwrap()]);
        let x = g.parse_element("([0:1,2:1],1)").unwrap();
        let y = g.parse_element("([0:1],-2)").unwrap();
        assert_eq!(g.multiply_raw(&x, &y), Lamplighter::element(&[(0, 1), (1, 1), (2, 1)], -1));
        assert_eq!(g.multiply_raw(&x, &g.invert_raw(&x)), g.identity());
    }

    #[test]
    fn kernel_index_matches_image() {
        let g = Lamplighter::new(2, vec![PeriodicSeq::new(vec![1], vec![0], 2).unwrap()]);
        let k = g.kernel_descriptor();
        assert_eq!(g.sub_index(&g.h_descriptor(), &k), Some(2));
    }
}
