//! Finite-level data of the Schlichting completion: Hecke-topology
//! neighbourhoods, continuity of the character, group algebras of the finite
//! quotients `U_m / W_k` of the `p`-adic `ax+b` completion, and directedness.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{fmt_q, frac, gcd_u, inv_mod_u, val_q, Q};
use crate::characters::{in_b, in_b_plus};
use crate::cyclotomic::{Cyclo, CycloField};
use crate::error::{HeckeError, Result};
use crate::group::{Family, GroupElement, PadicAxb, SubgroupDescriptor};
use crate::qadic;

/// `K_F = ⋂_{y in F} y K y^-1`.
#[derive(Clone, Debug)]
pub struct NeighbourhoodBasis {
    pub f: Vec<GroupElement>,
    pub descriptor: SubgroupDescriptor,
}

pub fn neighbourhood(fam: &dyn Family, f: &[GroupElement]) -> NeighbourhoodBasis {
    let k = fam.kernel_descriptor();
    let mut acc = k.clone();
    for y in f {
        acc = fam.intersect(&acc, &fam.conjugate(&k, y));
    }
    NeighbourhoodBasis {
        f: f.to_vec(),
        descriptor: acc,
    }
}

/// `H ∩ ⋂_{y in F} y H y^-1`, the basic open subgroups for the topology from `(G, H)`.
pub fn hecke_neighbourhood(fam: &dyn Family, f: &[GroupElement]) -> SubgroupDescriptor {
    let h = fam.h_descriptor();
    let mut acc = h.clone();
    for y in f {
        acc = fam.intersect(&acc, &fam.conjugate(&h, y));
    }
    acc
}

#[derive(Clone, Debug, Serialize)]
pub enum ContinuityVerdict {
    /// `H ∩ ⋂_{y in F} y H y^-1 ⊆ K` for the listed `F`.
    Continuous { witness: Vec<String>, subgroup: String },
    /// No open subgroup of `H` lies in `K`, by the shape of the subgroups.
    NotContinuous { proof: String },
    NoWitnessInBall { scanned: usize },
}

impl ContinuityVerdict {
    pub fn is_continuous(&self) -> bool {
        matches!(self, ContinuityVerdict::Continuous { .. })
    }
}

/// Searches for a finite `F` (singletons, then pairs) whose neighbourhood lies in `K`.
pub fn sigma_continuity_probe(fam: &dyn Family, ball: &[GroupElement]) -> ContinuityVerdict {
    let k = fam.kernel_descriptor();
    if let Some(proof) = fam.continuity_obstruction() {
        return ContinuityVerdict::NotContinuous { proof };
    }
    let found = |f: &[GroupElement]| {
        let s = hecke_neighbourhood(fam, f);
        fam.sub_contains_sub(&k, &s).then(|| ContinuityVerdict::Continuous {
            witness: f.iter().map(|y| y.to_string()).collect(),
            subgroup: s.to_string(),
        })
    };
    for y in ball {
        if let Some(v) = found(std::slice::from_ref(y)) {
            return v;
        }
    }
    let head = &ball[..ball.len().min(80)];
    for (i, y1) in head.iter().enumerate() {
        for y2 in &head[i + 1..] {
            if let Some(v) = found(&[y1.clone(), y2.clone()]) {
                return v;
            }
        }
    }
    ContinuityVerdict::NoWitnessInBall { scanned: ball.len() }
}

/// The group algebra of `U_m / W_k ≅ Z / (q p^(m n_0 + k))` for the `p`-adic
/// `ax+b` completion, where `u` stands for `p^(-m n_0) u`.
#[derive(Clone, Debug)]
pub struct FiniteQuotientAlgebra {
    pub p: u64,
    pub q: u64,
    pub n0: u64,
    pub m: u32,
    pub k: u32,
    pub modulus: u64,
    field: std::sync::Arc<CycloField>,
}

/// A finitely supported function on the quotient with values in `Z[C_q]`
/// (exponents of `zeta_q`), times a common rational factor.
#[derive(Clone, Debug)]
pub struct QuotientElement {
    pub scale: Q,
    pub coeffs: HashMap<u64, Vec<i64>>,
}

pub const MAX_QUOTIENT: u64 = 1 << 20;

impl FiniteQuotientAlgebra {
    pub fn new(fam: &dyn Family, m: u32, k: u32) -> Result<Self> {
        let axb = fam.as_any().downcast_ref::<PadicAxb>().ok_or_else(|| {
            HeckeError::Unsupported(format!(
                "finite quotient algebras are built for padic-axb, not {}",
                fam.name()
            ))
        })?;
        if axb.qs().len() != 1 {
            return Err(HeckeError::Unsupported(
                "finite quotient algebras need a single modulus q".into(),
            ));
        }
        let (p, q) = (axb.p(), axb.qs()[0]);
        let n0 = qadic::n0(p, q)?;
        let e = m as u64 * n0 + k as u64;
        let modulus = p
            .checked_pow(e as u32)
            .and_then(|v| v.checked_mul(q))
            .filter(|v| *v <= MAX_QUOTIENT)
            .ok_or_else(|| HeckeError::Domain(format!("level (m, k) = ({m}, {k}) is too fine")))?;
        Ok(FiniteQuotientAlgebra {
            p,
            q,
            n0,
            m,
            k,
            modulus,
            field: CycloField::new(q),
        })
    }

    /// `q p^(m n_0 + k)`.
    pub fn size(&self) -> u64 {
        self.modulus
    }

    pub fn zero(&self) -> QuotientElement {
        QuotientElement {
            scale: Q::one(),
            coeffs: HashMap::new(),
        }
    }

    pub fn delta(&self, u: u64) -> QuotientElement {
        let mut c = vec![0; self.q as usize];
        c[0] = 1;
        QuotientElement {
            scale: Q::one(),
            coeffs: HashMap::from([(u % self.modulus, c)]),
        }
    }

    /// `(1/|S|) sum_{t} e(t phi) [g t]` over the image `S` of `p^e Omega_q^0`,
    /// with `phi` the character's value on the generator `p^e`.
    pub fn subgroup_measure(&self, e: i64, phi: &Q) -> Result<QuotientElement> {
        let shift = self.m as i64 * self.n0 as i64 + e;
        if shift < 0 {
            return Err(HeckeError::Domain(format!(
                "p^{e} Omega_q^0 is not inside U_{}",
                self.m
            )));
        }
        let step = BigInt::from(self.p).pow(shift as u32) % self.modulus;
        let step = step.to_u64().expect("reduced");
        let order = self.modulus / gcd_u(step, self.modulus);
        let phase_num = phi * Q::from_integer(self.q.into());
        if !phase_num.is_integer() {
            return Err(HeckeError::Domain(format!(
                "character value {} is not a q-th root of unity",
                fmt_q(phi)
            )));
        }
        let a = phase_num.to_integer().mod_floor(&BigInt::from(self.q)).to_u64().unwrap();
        if (order * a) % self.q != 0 {
            return Err(HeckeError::Domain("the character does not descend to this level".into()));
        }
        let mut out = self.zero();
        for t in 0..order {
            let u = ((t as u128 * step as u128) % self.modulus as u128) as u64;
            let mut c = vec![0; self.q as usize];
            c[((t * a) % self.q) as usize] = 1;
            out.coeffs.insert(u, c);
        }
        out.scale = Q::new(BigInt::one(), order.into());
        Ok(out)
    }

    pub fn convolve(&self, f: &QuotientElement, g: &QuotientElement) -> QuotientElement {
        let n = self.q as usize;
        let mut acc: HashMap<u64, Vec<i64>> = HashMap::new();
        for (u, a) in &f.coeffs {
            for (v, b) in &g.coeffs {
                let w = (u + v) % self.modulus;
                let slot = acc.entry(w).or_insert_with(|| vec![0; n]);
                for (i, x) in a.iter().enumerate() {
                    if *x == 0 {
                        continue;
                    }
                    for (j, y) in b.iter().enumerate() {
                        slot[(i + j) % n] += x * y;
                    }
                }
            }
        }
        QuotientElement {
            scale: &f.scale * &g.scale,
            coeffs: acc,
        }
    }

    /// `f*(u) = conj f(-u)`.
    pub fn adjoint(&self, f: &QuotientElement) -> QuotientElement {
        let n = self.q as usize;
        let coeffs = f
            .coeffs
            .iter()
            .map(|(u, a)| {
                let mut c = vec![0; n];
                for (i, x) in a.iter().enumerate() {
                    c[(n - i) % n] += x;
                }
                ((self.modulus - u) % self.modulus, c)
            })
            .collect();
        QuotientElement {
            scale: f.scale.clone(),
            coeffs,
        }
    }

    /// Values in `Q(zeta_q)`, zero entries dropped.
    pub fn normal_form(&self, f: &QuotientElement) -> BTreeMap<u64, Cyclo> {
        let mut out = BTreeMap::new();
        for (u, a) in &f.coeffs {
            let mut v = Cyclo::zero(&self.field);
            for (i, x) in a.iter().enumerate() {
                if *x != 0 {
                    let r = Q::from_integer((*x).into()) * &f.scale;
                    v = &v + &Cyclo::root(&self.field, i as i64).scale(&r);
                }
            }
            if !v.is_zero() {
                out.insert(*u, v);
            }
        }
        out
    }

    pub fn equal(&self, f: &QuotientElement, g: &QuotientElement) -> bool {
        self.normal_form(f) == self.normal_form(g)
    }

    pub fn is_projection(&self, f: &QuotientElement) -> bool {
        self.equal(&self.convolve(f, f), f) && self.equal(&self.adjoint(f), f)
    }

    /// Support size after normalization.
    pub fn support_len(&self, f: &QuotientElement) -> usize {
        self.normal_form(f).len()
    }

    /// The image of `p^-(m n_0) u` for `u` given by its `Z/q` and `Z_p` parts.
    fn from_crt(&self, r: u64, zp: &BigInt) -> u64 {
        let pe = self.modulus / self.q;
        let zp = zp.mod_floor(&BigInt::from(pe)).to_u64().unwrap();
        // u = zp mod p^e, u = r mod q
        let inv = inv_mod_u(pe % self.q, self.q).unwrap_or(0);
        let t = ((r + self.q - zp % self.q) % self.q) * inv % self.q;
        zp + pe * t
    }
}

/// `x^-1 p_sigma x`: the normalized average of `g -> sigma(x g x^-1)` over the
/// image of `x^-1 H x`.
pub fn p_sigma_projection(
    alg: &FiniteQuotientAlgebra,
    fam: &dyn Family,
    x: &GroupElement,
) -> Result<QuotientElement> {
    let xi = fam.invert_raw(x);
    let sub = fam.conjugate(&fam.h_descriptor(), &xi);
    let g = match &sub {
        SubgroupDescriptor::Cyclic(g) => g.clone(),
        s => return Err(HeckeError::Unsupported(format!("subgroup {s} is not cyclic"))),
    };
    let e = val_q(&g, alg.p);
    if g != crate::arith::pow_q(alg.p, e) {
        return Err(HeckeError::Domain(format!("{} is not a power of p", fmt_q(&g))));
    }
    let gen = GroupElement::PadicAxb { b: g, k: 0 };
    let conj = fam.multiply_raw(&fam.multiply_raw(x, &gen), &xi);
    let phi = fam.sigma(&conj)?[0].clone();
    alg.subgroup_measure(e, &phi)
}

/// `p_sigma,inf`: the average of `sigma` over the image of `H_inf = {j z_0}`,
/// built from the `q`-adic `z_0`.
pub fn p_sigma_infinity(alg: &FiniteQuotientAlgebra) -> Result<QuotientElement> {
    let prec = alg.m * alg.n0 as u32 + alg.k;
    let z = qadic::z0(alg.p, alg.q, prec.max(1));
    let head = z.formal()?.head;
    let scaled = z.scale_p(alg.m as i64 * alg.n0 as i64);
    let zp = scaled.crt_zp()?;
    let u0 = alg.from_crt(scaled.crt_q(), zp.residue());
    let mut out = alg.zero();
    for j in 0..alg.q {
        let u = (j * u0) % alg.modulus;
        let mut c = vec![0; alg.q as usize];
        c[((j * head) % alg.q) as usize] = 1;
        out.coeffs.insert(u, c);
    }
    out.scale = Q::new(BigInt::one(), alg.q.into());
    Ok(out)
}

/// The element of `B^+ \ H` in the ball with the smallest `[H : x^-1 H x]`.
pub fn b_plus_generator(fam: &dyn Family, ball: &[GroupElement]) -> Result<Option<GroupElement>> {
    let mut best: Option<(u64, GroupElement)> = None;
    for x in ball {
        if fam.in_h(x) || !in_b_plus(fam, x)? {
            continue;
        }
        let l = fam.index_l(&fam.invert_raw(x));
        if l > 1 && best.as_ref().is_none_or(|(b, _)| l < *b) {
            best = Some((l, x.clone()));
        }
    }
    Ok(best.map(|(_, x)| x))
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizationReport {
    pub level: (u32, u32),
    pub quotient_size: u64,
    pub generator: String,
    pub chain: Vec<String>,
    pub image_sizes: Vec<usize>,
    pub h_infinity_image: usize,
    /// First `j` whose conjugated subgroup has the image of `H_inf`.
    pub predicted_index: Option<usize>,
    /// First `j` from which `p_sigma,x_j` equals `p_sigma,inf`.
    pub observed_index: Option<usize>,
    pub projections: bool,
    pub ordered: bool,
    pub dominates_p_sigma: bool,
    pub infinity_absorbs: bool,
}

impl StabilizationReport {
    pub fn passed(&self) -> bool {
        self.projections
            && self.ordered
            && self.dominates_p_sigma
            && self.infinity_absorbs
            && self.predicted_index.is_some()
            && self.predicted_index == self.observed_index
    }
}

/// Follows `p_sigma,x_j` for `x_j = x^j` up to `len` steps at level `(m, k)`.
pub fn stabilization(
    fam: &dyn Family,
    generator: &GroupElement,
    m: u32,
    k: u32,
    len: usize,
) -> Result<StabilizationReport> {
    let alg = FiniteQuotientAlgebra::new(fam, m, k)?;
    let p_sigma = p_sigma_projection(&alg, fam, &fam.identity())?;
    let p_inf = p_sigma_infinity(&alg)?;
    let inf_support: BTreeSet<u64> = alg.normal_form(&p_inf).keys().copied().collect();
    let mut chain = Vec::new();
    let mut projs = Vec::new();
    let mut x = fam.identity();
    for _ in 0..len {
        projs.push(p_sigma_projection(&alg, fam, &x)?);
        chain.push(x.clone());
        x = fam.multiply_raw(&x, generator);
    }
    let supports: Vec<BTreeSet<u64>> = projs
        .iter()
        .map(|f| alg.normal_form(f).keys().copied().collect())
        .collect();
    let predicted_index = supports.iter().position(|s| *s == inf_support);
    let equal: Vec<bool> = projs.iter().map(|f| alg.equal(f, &p_inf)).collect();
    let observed_index = (0..len).find(|j| equal[*j..].iter().all(|e| *e));
    let projections = projs.iter().all(|f| alg.is_projection(f)) && alg.is_projection(&p_inf);
    let ordered = projs
        .windows(2)
        .all(|w| alg.equal(&alg.convolve(&w[0], &w[1]), &w[0]));
    let dominates_p_sigma = projs
        .iter()
        .skip(1)
        .all(|f| alg.equal(&alg.convolve(f, &p_sigma), &p_sigma));
    let infinity_absorbs = alg.equal(&alg.convolve(&p_inf, &p_sigma), &p_sigma);
    Ok(StabilizationReport {
        level: (m, k),
        quotient_size: alg.size(),
        generator: generator.to_string(),
        chain: chain.iter().map(|c| c.to_string()).collect(),
        image_sizes: supports.iter().map(|s| s.len()).collect(),
        h_infinity_image: inf_support.len(),
        predicted_index,
        observed_index,
        projections,
        ordered,
        dominates_p_sigma,
        infinity_absorbs,
    })
}

/// `ceil(k / n_0)`: the first power of the generator whose conjugate of `H`
/// meets `W_k` in the image of `H_inf`.
pub fn predicted_stabilization(k: u32, n0: u64) -> usize {
    (k as u64).div_ceil(n0) as usize
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectednessReport {
    pub applicable: bool,
    pub reason: String,
    pub checked: usize,
    pub factorizations: Vec<(String, String, String)>,
    pub failures: Vec<String>,
}

impl DirectednessReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.failures.is_empty() && self.checked > 0
    }
}

/// For each `b in B` in the ball, a factorization `b = x^-1 y` with `x, y in B^+`.
pub fn directedness_probe(fam: &dyn Family, ball: &[GroupElement]) -> Result<DirectednessReport> {
    let mut bs = Vec::new();
    for b in ball {
        if in_b(fam, b)? {
            bs.push(b.clone());
        }
    }
    // B must be a group, checked on the ball
    let head = &bs[..bs.len().min(40)];
    for b1 in head {
        for b2 in head {
            let prod = fam.multiply_raw(b1, &fam.invert_raw(b2));
            if !in_b(fam, &prod)? {
                return Ok(DirectednessReport {
                    applicable: false,
                    reason: format!("B is not a group: {b1} * {b2}^-1 = {prod} is outside B"),
                    checked: 0,
                    factorizations: Vec::new(),
                    failures: Vec::new(),
                });
            }
        }
    }
    let mut factorizations = Vec::new();
    let mut failures = Vec::new();
    for b in &bs {
        let ok = match fam.ore_factor(b) {
            Some((x, y)) => {
                let back = fam.multiply_raw(&fam.invert_raw(&x), &y);
                let good = in_b_plus(fam, &x)? && in_b_plus(fam, &y)? && fam.canonicalize(&back)? == fam.canonicalize(b)?;
                if good && factorizations.len() < 12 {
                    factorizations.push((b.to_string(), x.to_string(), y.to_string()));
                }
                good
            }
            None => false,
        };
        if !ok {
            failures.push(b.to_string());
        }
    }
    Ok(DirectednessReport {
        applicable: true,
        reason: "B is closed under x y^-1 on the ball".into(),
        checked: bs.len(),
        factorizations,
        failures,
    })
}

/// `sigma` on an element of `H`, as a phase.
pub fn phase_of(fam: &dyn Family, h: &GroupElement) -> Result<Q> {
    Ok(frac(&fam.sigma(h)?[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FullAxb, Heisenberg};
    use num_traits::Zero;
    use std::sync::Arc;

    fn axb(p: u64, q: u64) -> Arc<dyn Family> {
        Arc::new(PadicAxb::new(p, vec![q]))
    }

    #[test]
    fn quotient_sizes() {
        let f = axb(2, 3);
        assert_eq!(FiniteQuotientAlgebra::new(f.as_ref(), 0, 0).unwrap().size(), 3);
        assert_eq!(FiniteQuotientAlgebra::new(f.as_ref(), 0, 2).unwrap().size(), 12);
        assert_eq!(FiniteQuotientAlgebra::new(f.as_ref(), 1, 3).unwrap().size(), 3 * 32);
        assert!(FiniteQuotientAlgebra::new(f.as_ref(), 20, 20).is_err());
    }

    #[test]
    fn projection_tables() {
        let f = axb(2, 3);
        let alg = FiniteQuotientAlgebra::new(f.as_ref(), 0, 4).unwrap();
        let ps = p_sigma_projection(&alg, f.as_ref(), &f.identity()).unwrap();
        assert_eq!(alg.support_len(&ps), 48);
        assert!(alg.is_projection(&ps));
        let x = GroupElement::PadicAxb { b: Q::zero(), k: -2 };
        let px = p_sigma_projection(&alg, f.as_ref(), &x).unwrap();
        assert_eq!(alg.support_len(&px), 12);
        assert!(alg.is_projection(&px));
        assert!(alg.equal(&alg.convolve(&px, &ps), &ps));
    }

    #[test]
    fn chain_stabilizes_where_predicted() {
        for (p, q) in [(2, 3), (2, 7), (3, 2)] {
            let f = axb(p, q);
            let ball = f.ball(3);
            let g = b_plus_generator(f.as_ref(), &ball).unwrap().unwrap();
            let n0 = qadic::n0(p, q).unwrap();
            for (m, k) in [(0, 3), (1, 2), (0, 5)] {
                let r = stabilization(f.as_ref(), &g, m, k, 6).unwrap();
                assert!(r.passed(), "{r:?}");
                assert_eq!(r.observed_index, Some(predicted_stabilization(k, n0)));
            }
        }
    }

    #[test]
    fn continuity_verdicts() {
        let full: Arc<dyn Family> = Arc::new(FullAxb::new(vec![4]));
        assert!(sigma_continuity_probe(full.as_ref(), &full.ball(3)).is_continuous());
        let heis: Arc<dyn Family> = Arc::new(Heisenberg::rational(vec![(crate::arith::qf(1, 2), crate::arith::qf(1, 3))]));
        assert!(sigma_continuity_probe(heis.as_ref(), &heis.ball(3)).is_continuous());
        let f = axb(2, 3);
        assert!(matches!(
            sigma_continuity_probe(f.as_ref(), &f.ball(3)),
            ContinuityVerdict::NotContinuous { .. }
        ));
        let n = neighbourhood(f.as_ref(), &[f.identity()]);
        assert!(f.sub_contains_sub(&n.descriptor, &f.kernel_descriptor()));
        assert!(f.sub_contains_sub(&f.kernel_descriptor(), &n.descriptor));
    }

    #[test]
    fn axb_is_directed() {
        let f = axb(2, 3);
        let r = directedness_probe(f.as_ref(), &f.ball(3)).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
