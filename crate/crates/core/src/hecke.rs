//! Elements of `H_sigma(G, H)`: finitely supported functions on `H\G/H`
//! stored by canonical double-coset representative.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use crate::arith::{factor_big, q, Q};
use crate::characters::entry_allowed;
use crate::cyclotomic::{exact_sqrt, phase_to_root_index, Cyclo};
use crate::error::{HeckeError, Result};
use crate::group::{coset_reps, modular_delta, GroupElement, Relative};
use crate::matrix::Mat;
use crate::scenario::HeckeScenario;

#[derive(Clone)]
pub struct HeckeElement {
    sc: Arc<HeckeScenario>,
    support: BTreeMap<GroupElement, Mat>,
}

impl PartialEq for HeckeElement {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support
    }
}
impl Eq for HeckeElement {}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .support
            .iter()
            .map(|(z, m)| format!("({m:?}) eps[{z}]"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl HeckeElement {
    pub fn zero(sc: &Arc<HeckeScenario>) -> Self {
        HeckeElement {
            sc: sc.clone(),
            support: BTreeMap::new(),
        }
    }

    /// `eps_H`, the identity.
    pub fn identity(sc: &Arc<HeckeScenario>) -> Self {
        let mut f = Self::zero(sc);
        f.support.insert(
            sc.fam().identity(),
            Mat::identity(&sc.field, sc.dim()),
        );
        f
    }

    /// Builds from values at arbitrary points; each value is moved to the
    /// canonical representative by the invariance rule.
    pub fn from_values(
        sc: &Arc<HeckeScenario>,
        values: impl IntoIterator<Item = (GroupElement, Mat)>,
    ) -> Result<Self> {
        let fam = sc.fam();
        let mut f = Self::zero(sc);
        for (x, m) in values {
            fam.validate(&x)?;
            let dc = fam.double_coset(&x);
            for i in 0..sc.dim() {
                for j in 0..sc.dim() {
                    if !m.get(i, j).is_zero() && !entry_allowed(fam, &dc.z, i, j) {
                        return Err(HeckeError::NotInB(format!("{x} (entry {i},{j})")));
                    }
                }
            }
            // f(z) = sigma(h)^-1 f(x) sigma(k)^-1
            let left: Vec<Cyclo> = sc.sigma_diag(&dc.h).iter().map(|c| c.conj()).collect();
            let right: Vec<Cyclo> = sc.sigma_diag(&dc.k).iter().map(|c| c.conj()).collect();
            f.add_at(dc.z, m.twist(&left, &right));
        }
        Ok(f)
    }

    /// The basis element `eps_x` with `eps_x(x) = 1`.
    pub fn epsilon(sc: &Arc<HeckeScenario>, x: &GroupElement) -> Result<Self> {
        sc.require_dim_one("eps_x")?;
        if !crate::characters::in_b(sc.fam(), x)? {
            return Err(HeckeError::NotInB(x.to_string()));
        }
        Self::from_values(sc, [(x.clone(), Mat::scalar(Cyclo::one(&sc.field)))])
    }

    pub fn scenario(&self) -> &Arc<HeckeScenario> {
        &self.sc
    }

    pub fn support(&self) -> &BTreeMap<GroupElement, Mat> {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    fn add_at(&mut self, z: GroupElement, m: Mat) {
        match self.support.get_mut(&z) {
            Some(v) => {
                *v = v.add(&m);
                if v.is_zero() {
                    self.support.remove(&z);
                }
            }
            None => {
                if !m.is_zero() {
                    self.support.insert(z, m);
                }
            }
        }
    }

    /// Coefficient of `eps_z` for a canonical `z` (scalar case).
    pub fn coefficient(&self, z: &GroupElement) -> Cyclo {
        self.support
            .get(z)
            .map(|m| m.get(0, 0).clone())
            .unwrap_or_else(|| Cyclo::zero(&self.sc.field))
    }

    /// `f(y)` from the stored values and the invariance rule.
    pub fn eval(&self, y: &GroupElement) -> Mat {
        let fam = self.sc.fam();
        let dc = fam.double_coset(y);
        match self.support.get(&dc.z) {
            None => Mat::zero(&self.sc.field, self.sc.dim()),
            Some(m) => m.twist(&self.sc.sigma_diag(&dc.h), &self.sc.sigma_diag(&dc.k)),
        }
    }

    pub fn add(&self, g: &HeckeElement) -> HeckeElement {
        let mut out = self.clone();
        for (z, m) in &g.support {
            out.add_at(z.clone(), m.clone());
        }
        out
    }

    pub fn sub(&self, g: &HeckeElement) -> HeckeElement {
        self.add(&g.scale(&-Q::one()))
    }

    pub fn scale(&self, r: &Q) -> HeckeElement {
        let mut out = Self::zero(&self.sc);
        for (z, m) in &self.support {
            out.add_at(z.clone(), m.scale(r));
        }
        out
    }

    pub fn scale_c(&self, c: &Cyclo) -> HeckeElement {
        let mut out = Self::zero(&self.sc);
        for (z, m) in &self.support {
            out.add_at(z.clone(), m.scale_c(c));
        }
        out
    }

    /// Left-coset representatives `y` of the support with their values `f(y)`.
    pub fn expand(&self) -> Vec<(GroupElement, Mat)> {
        let fam = self.sc.fam();
        let mut out = Vec::new();
        for (a, m) in &self.support {
            for t in fam.h_transversal(a) {
                let y = fam.multiply_raw(&t, a);
                let id = vec![Cyclo::one(&self.sc.field); self.sc.dim()];
                out.push((y, m.twist(&self.sc.sigma_diag(&t), &id)));
            }
        }
        out
    }

    /// `f * g (x) = sum_{yH} f(y) g(y^-1 x)`, accumulated over pairs of
    /// left-coset representatives and re-canonicalized.
    pub fn convolve(&self, g: &HeckeElement) -> HeckeElement {
        let sc = &self.sc;
        let fam = sc.fam();
        let d = sc.dim();
        let ef = self.expand();
        let eg = g.expand();
        let mut acc: HashMap<GroupElement, Mat> = HashMap::new();
        let order = sc.field.order();
        for (y, fy) in &ef {
            for (w, gw) in &eg {
                let yw = fam.multiply_raw(y, w);
                let lc = fam.left_coset(&yw);
                // (y^-1 rep) = w h^-1, so g(y^-1 rep) = g(w) sigma(h)^-1
                let phases = fam.sigma(&lc.h).expect("left_coset returns an element of H");
                let term = if d == 1 {
                    let k = phase_to_root_index(order, &phases[0]).expect("phase in field");
                    Mat::scalar((fy.get(0, 0) * gw.get(0, 0)).mul_root(-(k as i64)))
                } else {
                    let right: Vec<Cyclo> = phases.iter().map(|r| sc.phase(r).conj()).collect();
                    fy.mul(gw).twist(&vec![Cyclo::one(&sc.field); d], &right)
                };
                match acc.get_mut(&lc.rep) {
                    Some(v) => *v = v.add(&term),
                    None => {
                        acc.insert(lc.rep, term);
                    }
                }
            }
        }
        let mut out = HeckeElement::zero(sc);
        let mut seen = std::collections::BTreeSet::new();
        for x in acc.keys() {
            let z = fam.double_coset(x).z;
            if !seen.insert(z.clone()) {
                continue;
            }
            let lz = fam.left_coset(&z);
            if let Some(v) = acc.get(&lz.rep) {
                let id = vec![Cyclo::one(&sc.field); d];
                out.add_at(z, v.twist(&id, &sc.sigma_diag(&lz.h)));
            }
        }
        if cfg!(debug_assertions) {
            for (x, v) in acc.iter().take(32) {
                debug_assert_eq!(&out.eval(x), v, "convolution is not biequivariant at {x}");
            }
        }
        out
    }

    /// `f*(x) = Delta_K(x^-1) f(x^-1)^*`.
    pub fn involution(&self) -> Result<HeckeElement> {
        let fam = self.sc.fam();
        let mut out = HeckeElement::zero(&self.sc);
        for (z, m) in &self.support {
            let zi = fam.invert_raw(z);
            let dc = fam.double_coset(&zi);
            // zi = h c k, so c^-1 = k z h and f(c^-1) = sigma(k) f(z) sigma(h)
            let c = dc.z.clone();
            let val = m.twist(&self.sc.sigma_diag(&dc.k), &self.sc.sigma_diag(&dc.h));
            let delta = modular_delta(fam, &fam.invert_raw(&c), Relative::K)?;
            out.add_at(c, val.adjoint().scale(&delta));
        }
        Ok(out)
    }

    /// `||f||_1 = sum_{yH} ||f(y)|| = sum_z L(z) ||f(z)||`.
    pub fn l1_norm(&self) -> L1Norm {
        let fam = self.sc.fam();
        let mut norm = L1Norm::zero();
        for (z, m) in &self.support {
            let l = q(fam.index_l(z) as i64);
            norm.add(&l, &OpNorm::of(m));
        }
        norm
    }

    /// `Phi(f)(x) = conj(sigma~(x)) f(x)`, landing in the trivial-character algebra `target`.
    pub fn phi_transport(&self, target: &Arc<HeckeScenario>) -> Result<HeckeElement> {
        self.sc.require_dim_one("Phi")?;
        let fam = self.sc.fam();
        if fam.extension(&fam.identity()).is_none() {
            return Err(HeckeError::Unsupported(
                "the character has no extension to G".into(),
            ));
        }
        if target.field.order() != self.sc.field.order() || target.fam().sigma_order() != 1 {
            return Err(HeckeError::Unsupported(
                "Phi needs a trivial-character target over the same field".into(),
            ));
        }
        let mut out = HeckeElement::zero(target);
        for (z, m) in &self.support {
            let s = fam.extension(z).expect("extension exists");
            let c = Cyclo::from_phase(&self.sc.field, &s[0]).ok_or_else(|| {
                HeckeError::Unsupported(format!(
                    "sigma~({z}) is not in Q(zeta_{})",
                    self.sc.field.order()
                ))
            })?;
            out.add_at(z.clone(), m.scale_c(&c.conj()));
        }
        Ok(out)
    }

    /// The same function over a larger coefficient field `target` (same family).
    pub fn embed(&self, target: &Arc<HeckeScenario>) -> Result<HeckeElement> {
        let mut out = HeckeElement::zero(target);
        for (z, m) in &self.support {
            let mut v = Mat::zero(&target.field, m.dim());
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    let c = m.get(i, j).embed(&target.field).ok_or_else(|| {
                        HeckeError::Unsupported(format!(
                            "Q(zeta_{}) does not embed in Q(zeta_{})",
                            self.sc.field.order(),
                            target.field.order()
                        ))
                    })?;
                    v.set(i, j, c);
                }
            }
            out.add_at(z.clone(), v);
        }
        Ok(out)
    }

    /// Random element with `terms` keys sampled from `B` (or allowed entries for `dim > 1`).
    pub fn random(sc: &Arc<HeckeScenario>, rng: &mut dyn RngCore, terms: usize, height: u32) -> Self {
        let fam = sc.fam();
        let d = sc.dim();
        let m = sc.field.order() as i64;
        let mut out = Self::zero(sc);
        let mut attempts = 0;
        while out.support.len() < terms && attempts < 400 * terms.max(1) {
            attempts += 1;
            let x = if rng.gen_bool(0.15) {
                fam.sample_h(rng, height)
            } else {
                fam.sample(rng, height)
            };
            let z = fam.double_coset(&x).z;
            let mut val = Mat::zero(&sc.field, d);
            for i in 0..d {
                for j in 0..d {
                    if entry_allowed(fam, &z, i, j) && (d == 1 || rng.gen_bool(0.7)) {
                        let nums = [1i64, -1, 2, -2, 3];
                        let dens = [1i64, 1, 2, 3];
                        let r = Q::new(
                            nums[rng.gen_range(0..nums.len())].into(),
                            dens[rng.gen_range(0..dens.len())].into(),
                        );
                        let c = Cyclo::root(&sc.field, rng.gen_range(0..m)).scale(&r);
                        val.set(i, j, c);
                    }
                }
            }
            if !val.is_zero() {
                out.add_at(z, val);
            }
        }
        out
    }
}

/// The scenario over `Q(zeta_N)` with `N` large enough that the extension of
/// the character takes values in it on the supports of `elements`, hence on
/// everything they generate.
pub fn extension_scenario(
    sc: &Arc<HeckeScenario>,
    elements: &[&HeckeElement],
) -> Result<Arc<HeckeScenario>> {
    let fam = sc.fam();
    let mut n = sc.field.order();
    for f in elements {
        for z in f.support.keys() {
            let s = fam.extension(z).ok_or_else(|| {
                HeckeError::Unsupported("the character has no extension to G".into())
            })?;
            for r in s {
                let d = r.denom().to_u64().ok_or_else(|| {
                    HeckeError::Unsupported(format!("phase {r} has a huge denominator"))
                })?;
                n = crate::arith::lcm_u(n, d);
            }
        }
    }
    Ok(HeckeScenario::with_order(sc.label.clone(), sc.family.clone(), n))
}

/// Brute-force `(f * g)(x) = sum_{y in supp f / H} f(y) g(y^-1 x)`, evaluating
/// `g` through its invariance rule.
pub fn pointwise_oracle(f: &HeckeElement, g: &HeckeElement, x: &GroupElement) -> Mat {
    let sc = &f.sc;
    let fam = sc.fam();
    let mut acc = Mat::zero(&sc.field, sc.dim());
    for (a, m) in &f.support {
        for y in coset_reps(fam, a) {
            let fy = f.eval(&y);
            debug_assert!(fy.dim() == m.dim());
            let arg = fam.multiply_raw(&fam.invert_raw(&y), x);
            let gv = g.eval(&arg);
            if !gv.is_zero() {
                acc = acc.add(&fy.mul(&gv));
            }
        }
    }
    acc
}

/// `p_sigma x p_sigma`, computed from the average of the character
/// `l -> sigma(l) - sigma(x^-1 l x)` over `H_x`: `(avg / L(x)) eps_x`.
pub fn p_sigma_sandwich(sc: &Arc<HeckeScenario>, x: &GroupElement) -> Result<HeckeElement> {
    sc.require_dim_one("p_sigma x p_sigma")?;
    let fam = sc.fam();
    let xi = fam.invert_raw(x);
    // the image of H_x under psi is the cyclic group generated by the generator values
    let mut den = BigInt::one();
    for g in fam.hx(x).generators {
        let a = &fam.sigma(&g)?[0];
        let b = &fam.sigma(&fam.multiply_raw(&fam.multiply_raw(&xi, &g), x))?[0];
        let v = crate::arith::frac(&(a - b));
        den = den.lcm(v.denom());
    }
    let n = den.to_i64().expect("character order fits in i64");
    let mut avg = Cyclo::zero(&sc.field);
    for j in 0..n {
        avg = &avg + &sc.phase(&Q::new(j.into(), n.into()));
    }
    let avg = avg.scale(&Q::new(BigInt::one(), n.into()));
    let avg = avg.as_rational().expect("character average is rational");
    if avg.is_zero() {
        return Ok(HeckeElement::zero(sc));
    }
    let l = q(fam.index_l(x) as i64);
    let mut out = HeckeElement::zero(sc);
    let dc = fam.double_coset(x);
    // value at x is avg / L(x); move it to the canonical representative
    let left = sc.sigma_diag(&dc.h)[0].conj();
    let right = sc.sigma_diag(&dc.k)[0].conj();
    let v = (&left * &right).scale(&(avg / l));
    out.add_at(dc.z, Mat::scalar(v));
    Ok(out)
}

/// Coefficients of `eps_x * eps_y` in the basis `{eps_z}`.
pub fn structure_constants(
    sc: &Arc<HeckeScenario>,
    x: &GroupElement,
    y: &GroupElement,
) -> Result<BTreeMap<GroupElement, Cyclo>> {
    let ex = HeckeElement::epsilon(sc, x)?;
    let ey = HeckeElement::epsilon(sc, y)?;
    let prod = ex.convolve(&ey);
    Ok(prod
        .support
        .iter()
        .map(|(z, m)| (z.clone(), m.get(0, 0).clone()))
        .collect())
}

/// Structure constants re-validated against the pointwise oracle.
pub fn structure_constants_checked(
    sc: &Arc<HeckeScenario>,
    x: &GroupElement,
    y: &GroupElement,
) -> Result<BTreeMap<GroupElement, Cyclo>> {
    let table = structure_constants(sc, x, y)?;
    let ex = HeckeElement::epsilon(sc, x)?;
    let ey = HeckeElement::epsilon(sc, y)?;
    for (z, c) in &table {
        let o = pointwise_oracle(&ex, &ey, z);
        if o.get(0, 0) != c {
            return Err(HeckeError::Domain(format!(
                "structure constant at {z} disagrees with the pointwise oracle"
            )));
        }
        if !crate::characters::in_b(sc.fam(), z)? {
            return Err(HeckeError::Domain(format!("structure constant at {z} outside B")));
        }
    }
    Ok(table)
}

/// Exact or enclosed operator norm of a value.
#[derive(Clone, Debug)]
pub struct OpNorm {
    /// `Some(rho)` when the norm is `sqrt(rho)` for an exactly known `rho = |c|^2`.
    radicand: Option<Cyclo>,
    lo: f64,
    hi: f64,
}

impl OpNorm {
    pub fn of(m: &Mat) -> OpNorm {
        if m.dim() == 1 {
            let c = m.get(0, 0);
            let (lo, hi) = c.abs_enclosure();
            return OpNorm {
                radicand: Some(c.norm_sq()),
                lo,
                hi,
            };
        }
        // exact when A^* A is diagonal and rational
        let ata = m.adjoint().mul(m);
        let d = m.dim();
        let diag_rational = (0..d).all(|i| {
            (0..d).all(|j| i == j || ata.get(i, j).is_zero()) && ata.get(i, i).as_rational().is_some()
        });
        if diag_rational {
            let best = (0..d)
                .map(|i| ata.get(i, i).as_rational().unwrap())
                .max()
                .unwrap();
            let v = best.to_f64().unwrap_or(f64::NAN).sqrt();
            let field = m.get(0, 0).field().clone();
            return OpNorm {
                radicand: Some(Cyclo::from_rational(&field, best)),
                lo: v * (1.0 - 4.0 * f64::EPSILON),
                hi: v * (1.0 + 4.0 * f64::EPSILON),
            };
        }
        // Frobenius bounds: ||A||_F / sqrt(d) <= ||A|| <= ||A||_F
        let mut flo = 0.0;
        let mut fhi = 0.0;
        for c in m.entries() {
            let (l, h) = c.abs_enclosure();
            flo += l * l;
            fhi += h * h;
        }
        OpNorm {
            radicand: None,
            lo: (flo / d as f64).sqrt() * (1.0 - 1e-12),
            hi: fhi.sqrt() * (1.0 + 1e-12),
        }
    }
}

/// `sum_i r_i sqrt(n_i) sqrt(rho_i)` with `n_i` square-free integers and `rho_i`
/// primitive cyclotomic radicands, plus a floating enclosure.
#[derive(Clone, Debug)]
pub struct L1Norm {
    terms: Option<BTreeMap<(BigInt, Cyclo), Q>>,
    pub lo: f64,
    pub hi: f64,
}

impl L1Norm {
    pub fn zero() -> Self {
        L1Norm {
            terms: Some(BTreeMap::new()),
            lo: 0.0,
            hi: 0.0,
        }
    }

    fn add(&mut self, weight: &Q, n: &OpNorm) {
        let w = weight.to_f64().unwrap_or(f64::NAN);
        self.lo += w * n.lo;
        self.hi += w * n.hi;
        self.lo *= 1.0 - 4.0 * f64::EPSILON;
        self.hi *= 1.0 + 4.0 * f64::EPSILON;
        match (&mut self.terms, &n.radicand) {
            (Some(terms), Some(rho)) => {
                if rho.is_zero() {
                    return;
                }
                let (key, coeff) = normalize_sqrt(rho);
                let e = terms.entry(key).or_insert_with(Q::zero);
                *e += coeff * weight;
            }
            _ => self.terms = None,
        }
    }

    /// The exact value when it is rational.
    pub fn exact(&self) -> Option<Q> {
        let terms = self.terms.as_ref()?;
        let mut out = Q::zero();
        for ((n, rho), c) in terms {
            if !n.is_one() || rho.as_rational() != Some(Q::one()) {
                return None;
            }
            out += c;
        }
        Some(out)
    }

    /// Certified equality (identical normal forms).
    pub fn certainly_eq(&self, o: &L1Norm) -> bool {
        matches!((&self.terms, &o.terms), (Some(a), Some(b)) if a == b)
    }

    /// Certified `self <= other` (exactly when both are rational, else by enclosures).
    pub fn certainly_le(&self, o: &L1Norm) -> bool {
        if let (Some(a), Some(b)) = (self.exact(), o.exact()) {
            return a <= b;
        }
        self.certainly_eq(o) || self.hi <= o.lo
    }

    pub fn mul(&self, o: &L1Norm) -> L1Norm {
        let terms = match (&self.terms, &o.terms) {
            (Some(a), Some(b)) if a.keys().chain(b.keys()).all(|(_, r)| r.as_rational() == Some(Q::one())) => {
                let mut t: BTreeMap<(BigInt, Cyclo), Q> = BTreeMap::new();
                for ((n1, r1), c1) in a {
                    for ((n2, _), c2) in b {
                        let prod = n1 * n2;
                        let g = n1.gcd(n2);
                        let key = (&prod / (&g * &g), r1.clone());
                        *t.entry(key).or_insert_with(Q::zero) += c1 * c2 * Q::from_integer(g);
                    }
                }
                Some(t)
            }
            _ => None,
        };
        L1Norm {
            terms,
            lo: self.lo * o.lo * (1.0 - 4.0 * f64::EPSILON),
            hi: self.hi * o.hi * (1.0 + 4.0 * f64::EPSILON),
        }
    }

    pub fn describe(&self) -> String {
        match self.exact() {
            Some(v) => crate::arith::fmt_q(&v),
            None => format!("[{:.12}, {:.12}]", self.lo, self.hi),
        }
    }
}

/// `sqrt(rho) = coeff * sqrt(n) * sqrt(rho')` with `n` square-free and `rho'` primitive.
fn normalize_sqrt(rho: &Cyclo) -> ((BigInt, Cyclo), Q) {
    let field = rho.field().clone();
    let (content, prim) = match rho.as_rational() {
        Some(r) => (r, Cyclo::one(&field)),
        None => {
            let mut num = BigInt::zero();
            let mut den = BigInt::one();
            for c in rho.coeffs() {
                if !c.is_zero() {
                    num = num.gcd(c.numer());
                    den = den.lcm(c.denom());
                }
            }
            let content = Q::new(num, den);
            let prim = rho.scale(&content.recip());
            (content, prim)
        }
    };
    if let Some(s) = exact_sqrt(&content) {
        return ((BigInt::one(), prim), s);
    }
    // sqrt(a/b) = sqrt(a b) / b
    let ab = content.numer() * content.denom();
    let b = Q::from_integer(content.denom().clone());
    let ab_abs = ab.abs();
    match factor_big(&ab_abs) {
        Some(fs) => {
            let mut sq = BigInt::one();
            let mut free = BigInt::one();
            for (p, e) in fs {
                sq *= BigInt::from(p).pow(e / 2);
                if e % 2 == 1 {
                    free *= p;
                }
            }
            ((free, prim), Q::from_integer(sq) / b)
        }
        None => ((ab_abs, prim), b.recip()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Dihedral, PadicAxb};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn axb(p: u64, qq: u64) -> Arc<HeckeScenario> {
        HeckeScenario::new("axb", Arc::new(PadicAxb::new(p, vec![qq])))
    }

    fn x(b: i64, k: i64) -> GroupElement {
        GroupElement::PadicAxb { b: q(b), k }
    }

    #[test]
    fn epsilon_squares_in_axb() {
        let sc = axb(2, 3);
        let e = HeckeElement::epsilon(&sc, &x(0, 2)).unwrap();
        let sq = e.convolve(&e);
        assert_eq!(sq, HeckeElement::epsilon(&sc, &x(0, 4)).unwrap());
        assert!(HeckeElement::epsilon(&sc, &x(0, 1)).is_err());
        let table = structure_constants_checked(&sc, &x(0, 2), &x(0, 2)).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[&x(0, 4)], Cyclo::one(&sc.field));
    }

    #[test]
    fn epsilon_against_its_inverse_at_identity() {
        let sc = axb(2, 3);
        let e = HeckeElement::epsilon(&sc, &x(0, 2)).unwrap();
        let ei = HeckeElement::epsilon(&sc, &x(0, -2)).unwrap();
        let v = pointwise_oracle(&e, &ei, &x(0, 0));
        assert_eq!(v.get(0, 0).as_rational(), Some(q(4)));
        assert_eq!(e.convolve(&ei).coefficient(&x(0, 0)).as_rational(), Some(q(4)));
    }

    #[test]
    fn norms_and_sandwich() {
        let sc = axb(2, 3);
        let e = HeckeElement::epsilon(&sc, &x(0, 2)).unwrap();
        assert_eq!(e.l1_norm().exact(), Some(q(4)));
        let s = p_sigma_sandwich(&sc, &x(0, 2)).unwrap();
        assert_eq!(s, e.scale(&crate::arith::qf(1, 4)));
        assert_eq!(s.l1_norm().exact(), Some(q(1)));
        assert!(p_sigma_sandwich(&sc, &x(0, 1)).unwrap().is_zero());
    }

    #[test]
    fn scaling_law_for_epsilon() {
        let sc = axb(2, 3);
        // x' = h0 x k0 with h0 = (1, 1), k0 = (2, 1)
        let fam = sc.fam();
        let h0 = x(1, 0);
        let k0 = x(2, 0);
        let xp = fam.multiply_raw(&fam.multiply_raw(&h0, &x(0, 2)), &k0);
        let e = HeckeElement::epsilon(&sc, &x(0, 2)).unwrap();
        let ep = HeckeElement::epsilon(&sc, &xp).unwrap();
        let c = (&sc.sigma_diag(&h0)[0] * &sc.sigma_diag(&k0)[0]).conj();
        assert_eq!(ep, e.scale_c(&c));
    }

    #[test]
    fn random_products_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sc in [axb(2, 3), axb(3, 2), HeckeScenario::new("d", Arc::new(Dihedral::new(vec![true])))] {
            for _ in 0..10 {
                let f = HeckeElement::random(&sc, &mut rng, 3, 2);
                let g = HeckeElement::random(&sc, &mut rng, 3, 2);
                let fg = f.convolve(&g);
                for (z, m) in fg.support() {
                    assert_eq!(&pointwise_oracle(&f, &g, z), m);
                }
                let inv = f.involution().unwrap();
                assert_eq!(inv.involution().unwrap(), f);
                let fam = sc.fam();
                for (y, _) in inv.expand().iter().chain(f.expand().iter()) {
                    let yi = fam.invert_raw(y);
                    let d = modular_delta(fam, &yi, Relative::K).unwrap();
                    assert_eq!(inv.eval(y), f.eval(&yi).adjoint().scale(&d));
                }
                assert!(inv.l1_norm().certainly_eq(&f.l1_norm()));
            }
        }
    }
}
