//! The acceptance suite: eleven named criteria, each reduced to a pass/fail
//! verdict with a one-line detail.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{factor, q, qf, val_q, Q};
use crate::characters::{in_b, lamplighter_b_classification, LampClassification};
use crate::completion::{
    b_plus_generator, directedness_probe, hecke_neighbourhood, predicted_stabilization,
    sigma_continuity_probe, stabilization, ContinuityVerdict,
};
use crate::group::{
    lattice::Lattice2, modular_delta, Family, FamilyRef, FamilyRegistry, FullAxb, GroupElement,
    PadicAxb, Relative, SubgroupDescriptor,
};
use crate::hecke::{extension_scenario, p_sigma_sandwich, pointwise_oracle, HeckeElement};
use crate::induced::{commutation_residual, irreducibility_probe, CosetWindow, IrreducibilityVerdict};
use crate::matrix::Mat;
use crate::qadic::{self, AdeleCoord, FiniteAdele, OmegaWitness, QAdicNumber};
use crate::scenario::HeckeScenario;

pub const CRITERIA: [&str; 11] = [
    "oracle equivalence",
    "star-algebra laws",
    "p_sigma sandwich",
    "B-set reproduction",
    "Phi isomorphism",
    "q-adic suite",
    "Omega_n witnesses",
    "induced-representation commutation",
    "completion suite",
    "sigma-continuity verdicts",
    "modular-function consistency",
];

/// Deliberate corruptions, used to check that the suite notices them.
#[derive(Clone, Debug, Default)]
pub struct Faults {
    /// Perturb one structure constant of every computed convolution.
    pub corrupt_structure_constants: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

type Outcome = std::result::Result<String, String>;

pub fn run_all(faults: &Faults) -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(|i| run_criterion(i, faults)).collect()
}

pub fn run_criterion(id: usize, faults: &Faults) -> CriterionResult {
    let outcome = match id {
        1 => oracle_equivalence(faults),
        2 => algebra_laws(),
        3 => sandwich(),
        4 => b_sets(),
        5 => phi_isomorphism(),
        6 => qadic_suite(),
        7 => omega_witnesses(),
        8 => induced_commutation(),
        9 => completion_suite(),
        10 => continuity_verdicts(),
        11 => modular_consistency(),
        _ => Err(format!("no criterion {id}")),
    };
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionResult {
        id,
        name: CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"),
        passed,
        detail,
    }
}

fn family(name: &str, params: &[(&str, toml::Value)]) -> FamilyRef {
    let p: BTreeMap<String, toml::Value> =
        params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    FamilyRegistry::default()
        .build(name, &p)
        .expect("acceptance families are valid")
}

fn int(v: i64) -> toml::Value {
    toml::Value::Integer(v)
}

fn text(s: &str) -> toml::Value {
    toml::Value::String(s.to_string())
}

fn padic(p: i64, qq: i64) -> FamilyRef {
    family("padic-axb", &[("p", int(p)), ("q", int(qq))])
}

const PADIC_PAIRS: [(i64, i64); 4] = [(2, 3), (2, 7), (3, 2), (5, 4)];

/// The seven families of the algebraic criteria.
fn algebra_families() -> Vec<(String, FamilyRef)> {
    let mut out: Vec<(String, FamilyRef)> = PADIC_PAIRS
        .iter()
        .map(|&(p, qq)| (format!("padic-axb({p},{qq})"), padic(p, qq)))
        .collect();
    out.push(("dihedral(sigma(b)=-1)".into(), family("dihedral", &[("sigma_b", int(-1))])));
    out.push((
        "heisenberg(1/2,1/3)".into(),
        family("heisenberg", &[("s", text("1/2")), ("t", text("1/3"))]),
    ));
    out.push(("lamplighter(Z/2)".into(), family("lamplighter", &[("f", int(2))])));
    out
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Deterministic random pairs for criteria 1 and 2.
fn sample_pairs(sc: &Arc<HeckeScenario>, seed: u64, n: usize) -> Vec<(HeckeElement, HeckeElement)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let f = HeckeElement::random(sc, &mut rng, 3, 2);
            let g = HeckeElement::random(sc, &mut rng, 3, 2);
            (f, g)
        })
        .collect()
}

const PAIRS: usize = 200;

/// Runs `check` on every algebra family in parallel; the first failure wins.
fn per_family<F>(check: F) -> std::result::Result<Vec<String>, String>
where
    F: Fn(u64, &str, FamilyRef) -> Outcome + Sync,
{
    let fams = algebra_families();
    std::thread::scope(|s| {
        let handles: Vec<_> = fams
            .into_iter()
            .enumerate()
            .map(|(i, (name, fam))| {
                let check = &check;
                s.spawn(move || check(i as u64, &name, fam))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("a family check panicked".into())))
            .collect()
    })
}

fn oracle_equivalence(faults: &Faults) -> Outcome {
    let counts = per_family(|i, name, fam| {
        let sc = HeckeScenario::new(name, fam);
        let mut keys = 0;
        for (f, g) in sample_pairs(&sc, 100 + i, PAIRS) {
            let mut h = f.convolve(&g);
            if faults.corrupt_structure_constants {
                if let Some(z) = h.support().keys().next().cloned() {
                    let bump = Mat::identity(&sc.field, sc.dim());
                    h = h.add(&HeckeElement::from_values(&sc, [(z, bump)]).map_err(|e| e.to_string())?);
                }
            }
            // every key of the product, plus the factors' keys where it may vanish
            let mut probe: Vec<&GroupElement> = h.support().keys().collect();
            probe.extend(f.support().keys().chain(g.support().keys()));
            for x in probe {
                keys += 1;
                let o = pointwise_oracle(&f, &g, x);
                let v = h.support().get(x).cloned().unwrap_or_else(|| Mat::zero(&sc.field, sc.dim()));
                ensure(o == v, || format!("{name}: convolution and oracle differ at {x}"))?;
            }
        }
        Ok(keys.to_string())
    })?;
    let total: usize = counts.iter().map(|c| c.parse::<usize>().unwrap_or(0)).sum();
    Ok(format!("{} families x {PAIRS} pairs, {total} coefficients equal", counts.len()))
}

fn algebra_laws() -> Outcome {
    let done = per_family(|i, name, fam| {
        let sc = HeckeScenario::new(name, fam);
        let pairs = sample_pairs(&sc, 100 + i, PAIRS);
        let e = HeckeElement::identity(&sc);
        for (j, (f, g)) in pairs.iter().enumerate() {
            let h = &pairs[(j + 1) % pairs.len()].0;
            let err = |what: &str| format!("{name}: {what} fails on sample {j}");
            let fg = f.convolve(g);
            ensure(fg.convolve(h) == f.convolve(&g.convolve(h)), || err("associativity"))?;
            ensure(e.convolve(f) == *f && f.convolve(&e) == *f, || err("identity"))?;
            let star = |x: &HeckeElement| x.involution().map_err(|e| e.to_string());
            let (fs, gs) = (star(f)?, star(g)?);
            ensure(star(&fg)? == gs.convolve(&fs), || err("(f*g)* = g* f*"))?;
            ensure(star(&fs)? == *f, || err("f** = f"))?;
            ensure(fs.l1_norm().certainly_eq(&f.l1_norm()), || err("|f*| = |f|"))?;
            ensure(
                fg.l1_norm().certainly_le(&f.l1_norm().mul(&g.l1_norm())),
                || err("|f g| <= |f| |g|"),
            )?;
        }
        Ok(String::new())
    })?;
    Ok(format!("{} families x {PAIRS} samples satisfy all six laws", done.len()))
}

fn sandwich() -> Outcome {
    let mut count = 0;
    for (name, fam) in algebra_families() {
        let sc = HeckeScenario::new(name.clone(), fam.clone());
        for x in fam.ball(2) {
            if !in_b(fam.as_ref(), &x).map_err(|e| e.to_string())? {
                continue;
            }
            let s = p_sigma_sandwich(&sc, &x).map_err(|e| e.to_string())?;
            let l = fam.index_l(&x);
            let expected = HeckeElement::epsilon(&sc, &x)
                .map_err(|e| e.to_string())?
                .scale(&qf(1, l as i64));
            ensure(s == expected, || format!("{name}: p x p differs from eps/L at {x}"))?;
            ensure(s.l1_norm().exact() == Some(Q::one()), || {
                format!("{name}: |p x p|_1 = {} at {x}", s.l1_norm().describe())
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} ball elements of B: p x p = eps_x / L(x) with norm 1"))
}

/// Smallest `n > 0` with `p^n = 1 mod q`, by direct search.
fn order_oracle(p: u64, qq: u64) -> u64 {
    let mut acc = p % qq;
    let mut n = 1;
    while acc != 1 % qq {
        acc = acc * p % qq;
        n += 1;
    }
    n
}

fn b_sets() -> Outcome {
    let mut parts = Vec::new();
    for (p, qq) in PADIC_PAIRS {
        let fam = padic(p, qq);
        let n0 = order_oracle(p as u64, qq as u64);
        let pa = fam.as_any().downcast_ref::<PadicAxb>().expect("padic-axb");
        ensure(pa.n0() == n0, || format!("({p},{qq}): n0 = {} but the order is {n0}", pa.n0()))?;
        let ball = fam.ball(3);
        for x in &ball {
            let GroupElement::PadicAxb { k, .. } = x else { unreachable!() };
            let member = in_b(fam.as_ref(), x).map_err(|e| e.to_string())?;
            ensure(member == (k.rem_euclid(n0 as i64) == 0), || {
                format!("({p},{qq}): membership of {x} contradicts Z[1/{p}] x| {n0}Z")
            })?;
        }
        parts.push(format!("({p},{qq}) n0={n0}"));
    }
    let dih = family("dihedral", &[("sigma_b", int(-1))]);
    for x in dih.ball(3) {
        ensure(in_b(dih.as_ref(), &x).map_err(|e| e.to_string())?, || {
            format!("dihedral: {x} not in B")
        })?;
    }
    let periodic = family("lamplighter", &[("f", int(2)), ("sigma_period", toml::Value::Array(vec![int(1)]))]);
    let broken = family(
        "lamplighter",
        &[
            ("f", int(2)),
            ("sigma_pre", toml::Value::Array(vec![int(0)])),
            ("sigma_period", toml::Value::Array(vec![int(1)])),
        ],
    );
    let cls = |f: &FamilyRef| lamplighter_b_classification(f.as_ref(), 6).map_err(|e| e.to_string());
    let (a, b) = (cls(&periodic)?, cls(&broken)?);
    ensure(a == LampClassification::AllShifts, || format!("1-periodic lamplighter: {a:?}"))?;
    ensure(b == LampClassification::OnlyN, || format!("prefix-broken lamplighter: {b:?}"))?;
    for x in periodic.ball(2) {
        ensure(in_b(periodic.as_ref(), &x).map_err(|e| e.to_string())?, || {
            format!("1-periodic lamplighter: {x} not in B")
        })?;
    }
    Ok(format!(
        "{}; dihedral B = G; lamplighter periodic B = G, prefix-broken no shifts",
        parts.join(", ")
    ))
}

fn phi_isomorphism() -> Outcome {
    let fams = [
        ("heisenberg(1/2,1/3)", family("heisenberg", &[("s", text("1/2")), ("t", text("1/3"))])),
        ("heisenberg(1/5,2/5)", family("heisenberg", &[("s", text("1/5")), ("t", text("2/5"))])),
        ("dihedral(sigma(b)=-1)", family("dihedral", &[("sigma_b", int(-1))])),
    ];
    let n = 100;
    for (i, (name, fam)) in fams.into_iter().enumerate() {
        let base = HeckeScenario::new(name, fam);
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
        for j in 0..n {
            let f = HeckeElement::random(&base, &mut rng, 3, 2);
            let g = HeckeElement::random(&base, &mut rng, 3, 2);
            let s = |e: crate::HeckeError| e.to_string();
            let sc = extension_scenario(&base, &[&f, &g]).map_err(s)?;
            let (f, g) = (f.embed(&sc).map_err(s)?, g.embed(&sc).map_err(s)?);
            let target = sc.trivial();
            let phi = |x: &HeckeElement| x.phi_transport(&target).map_err(s);
            let (pf, pg) = (phi(&f)?, phi(&g)?);
            ensure(phi(&f.convolve(&g))? == pf.convolve(&pg), || {
                format!("{name}: Phi(f g) != Phi(f) Phi(g) on sample {j}")
            })?;
            ensure(phi(&f.involution().map_err(s)?)? == pf.involution().map_err(s)?, || {
                format!("{name}: Phi(f*) != Phi(f)* on sample {j}")
            })?;
            ensure(pf.l1_norm().certainly_eq(&f.l1_norm()), || {
                format!("{name}: Phi changes the norm on sample {j}")
            })?;
        }
    }
    Ok(format!("3 families x {n} pairs: Phi multiplicative, *-preserving, isometric"))
}

fn qadic_suite() -> Outcome {
    let s = |e: crate::HeckeError| e.to_string();
    let mut parts = Vec::new();
    for (p, qq) in [(2u64, 3u64), (2, 7)] {
        let prec = 64;
        let n0 = order_oracle(p, qq);
        let z = qadic::z0(p, qq, prec);
        ensure(z.scale_p(n0 as i64).eq_at_precision(&z), || format!("({p},{qq}): p^n0 z0 != z0"))?;
        ensure(z.mul_int(qq as i64).is_zero_at_precision(), || format!("({p},{qq}): q z0 != 0"))?;
        let h = qadic::h_infinity(p, qq, prec);
        ensure(h.len() == qq as usize, || format!("({p},{qq}): |H_inf| = {}", h.len()))?;
        for (i, a) in h.iter().enumerate() {
            for b in &h[i + 1..] {
                ensure(!a.eq_at_precision(b), || format!("({p},{qq}): H_inf has repeats"))?;
            }
            ensure(qadic::h_infinity_membership(a, 32).map_err(s)?, || {
                format!("({p},{qq}): {} fails membership", a.encode())
            })?;
        }
        // annihilator: q u pairs trivially with every residue mod p^8
        let mut us: Vec<QAdicNumber> = h.clone();
        us.extend((1..6).map(|j| QAdicNumber::from_int(p, qq, j, prec as i64)));
        let mut pairs = 0;
        for u in &us {
            let qu = u.mul_int(qq as i64);
            for t in 0..p.pow(8) {
                let b = QAdicNumber::from_int(p, qq, t as i64, prec as i64);
                let v = qadic::duality_pair(&qu, &b).map_err(s)?;
                ensure(v.is_zero(), || format!("({p},{qq}): <q u, {t}> = e({v})"))?;
                pairs += 1;
            }
        }
        let one = QAdicNumber::from_int(p, qq, 1, prec as i64);
        ensure(!qadic::duality_pair(&one, &one).map_err(s)?.is_zero(), || {
            format!("({p},{qq}): the pairing is trivial on 1")
        })?;
        let table = qadic::stratification_table(p, qq, 16).map_err(s)?;
        ensure(table.is_partition(), || format!("({p},{qq}): stratification {table:?}"))?;
        parts.push(format!(
            "({p},{qq}) n0={n0}, {pairs} pairings, {} residues in {} strata",
            table.residues,
            table.counts.len()
        ));
    }
    Ok(parts.join("; "))
}

fn random_unit(rng: &mut ChaCha8Rng, l: u64) -> Q {
    loop {
        let a: i64 = rng.gen_range(-200..=200);
        let b: i64 = rng.gen_range(1..=60);
        if a != 0 && a % l as i64 != 0 && b % l as i64 != 0 {
            return qf(a, b);
        }
    }
}

fn random_adele(rng: &mut ChaCha8Rng, n: u64) -> FiniteAdele {
    let mut primes: Vec<u64> = factor(n).into_iter().map(|(l, _)| l).collect();
    for l in [5u64, 7, 11] {
        if rng.gen_bool(0.4) && !primes.contains(&l) {
            primes.push(l);
        }
    }
    let coords = primes
        .into_iter()
        .map(|l| {
            let v = rng.gen_range(-3i64..=3);
            let value = random_unit(rng, l) * crate::arith::pow_q(l, v);
            (l, AdeleCoord { value, prec: rng.gen_range(20..=64) })
        })
        .collect();
    FiniteAdele::new(coords).expect("primes")
}

/// Checks `x = t (1/n + z)` from the definition, independently of the solver.
fn verify_witness(x: &FiniteAdele, n: u64, t: &Q, z: &BTreeMap<u64, AdeleCoord>) -> bool {
    if !t.is_positive() {
        return false;
    }
    let inv_n = qf(1, n as i64);
    for (l, c) in &x.coords {
        let Some(zl) = z.get(l) else { return false };
        if !zl.value.is_zero() && val_q(&zl.value, *l) < 0 {
            return false;
        }
        let diff = t * (&inv_n + &zl.value) - &c.value;
        let need = (c.prec as i64).min(val_q(t, *l) + zl.prec as i64);
        if !diff.is_zero() && val_q(&diff, *l) < need {
            return false;
        }
    }
    // off the stored primes x is integral, so z = x/t - 1/n needs l not dividing t's numerator
    factor_numer(t).iter().all(|l| x.coords.contains_key(l))
}

fn factor_numer(t: &Q) -> Vec<u64> {
    crate::arith::factor_big(t.numer())
        .unwrap_or_default()
        .into_iter()
        .map(|(l, _)| l)
        .collect()
}

fn omega_witnesses() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let mut rejected = 0;
    for n in [2u64, 4, 6, 12] {
        for i in 0..100 {
            let x = random_adele(&mut rng, n);
            match qadic::omega_n_witness(&x, n).map_err(|e| e.to_string())? {
                OmegaWitness::Witness { t, z, .. } => {
                    ensure(verify_witness(&x, n, &t, &z), || {
                        format!("n={n}: witness t={t} does not reproduce adele {i}")
                    })?;
                }
                OmegaWitness::Reject { prime, reason } => {
                    return Err(format!("n={n}: adele {i} rejected at {prime}: {reason}"));
                }
            }
            // zeroing a coordinate at a prime of n must be rejected
            let (l, _) = factor(n)[i % factor(n).len()];
            let mut y = x.clone();
            y.coords.get_mut(&l).expect("stored").value = Q::zero();
            match qadic::omega_n_witness(&y, n).map_err(|e| e.to_string())? {
                OmegaWitness::Reject { prime, .. } if prime == l => rejected += 1,
                other => return Err(format!("n={n}: zero coordinate at {l} gave {other:?}")),
            }
        }
    }
    Ok(format!("400 witnesses certified, {rejected} zero-coordinate adeles rejected"))
}

fn induced_commutation() -> Outcome {
    let cases: Vec<(&str, FamilyRef, u32)> = vec![
        ("padic-axb(2,3)", padic(2, 3), 3),
        ("dihedral(sigma(b)=-1)", family("dihedral", &[("sigma_b", int(-1))]), 16),
        ("heisenberg(1/2,1/3)", family("heisenberg", &[("s", text("1/2")), ("t", text("1/3"))]), 2),
        ("lamplighter(Z/2)", family("lamplighter", &[("f", int(2))]), 4),
    ];
    let s = |e: crate::HeckeError| e.to_string();
    let mut parts = Vec::new();
    for (name, fam, radius) in cases {
        let sc = HeckeScenario::with_sqrt(name, fam.clone());
        let window = CosetWindow::around(&sc, radius).map_err(s)?;
        ensure(window.len() >= 32, || format!("{name}: window has {} cosets", window.len()))?;
        let ball = fam.ball(2);
        let mut bs = Vec::new();
        for x in &ball {
            if in_b(fam.as_ref(), x).map_err(s)? {
                bs.push(x.clone());
            }
        }
        let mut pairs = 0;
        'outer: for x in bs.iter().take(8) {
            let e = HeckeElement::epsilon(&sc, x).map_err(s)?;
            for w in ball.iter().take(10) {
                let r = commutation_residual(&sc, w, &e, &window).map_err(s)?;
                match r.residual_zero {
                    Some(true) => pairs += 1,
                    Some(false) => return Err(format!("{name}: nonzero residual at w={w}, x={x}")),
                    None => {}
                }
                if pairs >= 60 {
                    break 'outer;
                }
            }
        }
        ensure(pairs >= 50, || format!("{name}: only {pairs} pairs with nonempty interior"))?;
        let b_ne_h = bs.iter().any(|x| !fam.in_h(x));
        let verdict = irreducibility_probe(&sc, &ball, &window).map_err(s)?;
        let reducible = match &verdict {
            IrreducibilityVerdict::Reducible { non_scalar, witness } => {
                ensure(*non_scalar, || format!("{name}: witness {witness} acts as a scalar"))?;
                true
            }
            IrreducibilityVerdict::IrreducibleOnBall { .. } => false,
        };
        ensure(reducible == b_ne_h, || {
            format!("{name}: probe says reducible={reducible} but B != H is {b_ne_h}")
        })?;
        // on a ball inside H, B = H there and the probe must find nothing
        let mut rng = ChaCha8Rng::seed_from_u64(800);
        let h_ball: Vec<GroupElement> = (0..12).map(|_| fam.sample_h(&mut rng, 3)).collect();
        match irreducibility_probe(&sc, &h_ball, &window).map_err(s)? {
            IrreducibilityVerdict::IrreducibleOnBall { .. } => {}
            v => return Err(format!("{name}: reducibility reported on a ball inside H: {v:?}")),
        }
        parts.push(format!("{name}: {} cosets, {pairs} pairs, reducible={reducible}", window.len()));
    }
    Ok(parts.join("; "))
}

const QUOTIENT_LIMIT: u64 = 10_000;

fn completion_suite() -> Outcome {
    let s = |e: crate::HeckeError| e.to_string();
    let mut levels = 0;
    for (p, qq) in PADIC_PAIRS {
        let fam = padic(p, qq);
        let n0 = order_oracle(p as u64, qq as u64);
        let ball = fam.ball(3);
        let gen = b_plus_generator(fam.as_ref(), &ball)
            .map_err(s)?
            .ok_or_else(|| format!("({p},{qq}): no B+ generator"))?;
        for m in 0..=1u32 {
            for k in 1..=6u32 {
                let size = qq as u64 * (p as u64).pow(m * n0 as u32 + k);
                if size > QUOTIENT_LIMIT || size > 1000 && m + k > 3 {
                    continue;
                }
                let predicted = predicted_stabilization(k, n0);
                let r = stabilization(fam.as_ref(), &gen, m, k, predicted + 2).map_err(s)?;
                ensure(r.dominates_p_sigma, || format!("({p},{qq}) level ({m},{k}): p_x p != p"))?;
                ensure(r.passed(), || format!("({p},{qq}) level ({m},{k}): {r:?}"))?;
                ensure(r.observed_index == Some(predicted), || {
                    format!(
                        "({p},{qq}) level ({m},{k}): stabilizes at {:?}, expected {predicted}",
                        r.observed_index
                    )
                })?;
                levels += 1;
            }
        }
        let d = directedness_probe(fam.as_ref(), &ball).map_err(s)?;
        ensure(d.passed(), || format!("({p},{qq}): directedness {d:?}"))?;
    }
    Ok(format!("{levels} quotient levels stabilize as predicted; (B, H) directed for 4 pairs"))
}

fn continuity_verdicts() -> Outcome {
    let mut parts = Vec::new();
    for n in [1i64, 2, 3, 5] {
        let fam = family("full-axb", &[("n", int(n))]);
        let v = sigma_continuity_probe(fam.as_ref(), &fam.ball(n.max(3) as u32));
        ensure(v.is_continuous(), || format!("full ax+b n={n}: {v:?}"))?;
        // x0 = (1, 1/n): x0 H x0^-1 = nZ lies in K
        let x0 = FullAxb::element(q(1), qf(1, n));
        let conj = fam.conjugate(&fam.h_descriptor(), &x0);
        ensure(fam.sub_contains_sub(&fam.kernel_descriptor(), &conj), || {
            format!("full ax+b n={n}: x0 H x0^-1 = {conj} not in K")
        })?;
    }
    parts.push("full ax+b continuous via (1, 1/n)".to_string());
    for (st, b, d) in [(("1/2", "1/3"), 2, 3), (("1/5", "2/5"), 5, 5), (("3/4", "1/6"), 4, 6)] {
        let fam = family("heisenberg", &[("s", text(st.0)), ("t", text(st.1))]);
        // H_{d,b}: u in bZ, v in dZ
        let hdb = SubgroupDescriptor::HeisLattice {
            lattice: Lattice2::rectangular(b, d),
            alpha: Q::zero(),
            beta: Q::zero(),
        };
        let f = [
            fam.parse_element(&format!("[1/{d},0,0]")).map_err(|e| e.to_string())?,
            fam.parse_element(&format!("[0,1/{b},0]")).map_err(|e| e.to_string())?,
        ];
        let mut search = f.to_vec();
        search.extend(fam.ball(2));
        let v = sigma_continuity_probe(fam.as_ref(), &search);
        ensure(v.is_continuous(), || format!("heisenberg {st:?}: {v:?}"))?;
        let open = hecke_neighbourhood(fam.as_ref(), &f);
        ensure(fam.sub_contains_sub(&open, &hdb) && fam.sub_contains_sub(&hdb, &open), || {
            format!("heisenberg {st:?}: neighbourhood {open} is not H_d,b")
        })?;
        ensure(fam.sub_contains_sub(&fam.kernel_descriptor(), &hdb), || {
            format!("heisenberg {st:?}: H_d,b not in K")
        })?;
    }
    parts.push("rational Heisenberg continuous with H_d,b in K".to_string());
    let not_cont: Vec<(String, FamilyRef)> = vec![
        ("padic-axb(2,3)".into(), padic(2, 3)),
        ("padic-axb(3,2)".into(), padic(3, 2)),
        (
            "padic-heisenberg(2,3,5)".into(),
            family("padic-heisenberg", &[("p", int(2)), ("q", int(3)), ("r", int(5))]),
        ),
    ];
    for (name, fam) in not_cont {
        match sigma_continuity_probe(fam.as_ref(), &fam.ball(2)) {
            ContinuityVerdict::NotContinuous { proof } if !proof.is_empty() => {}
            v => return Err(format!("{name}: expected a non-continuity proof, got {v:?}")),
        }
    }
    parts.push("p-adic ax+b and p-adic Heisenberg not continuous".to_string());
    Ok(parts.join("; "))
}

fn modular_consistency() -> Outcome {
    let mut fams = algebra_families();
    fams.push(("full-axb(3)".into(), family("full-axb", &[("n", int(3))])));
    fams.push((
        "padic-heisenberg(2,3,5)".into(),
        family("padic-heisenberg", &[("p", int(2)), ("q", int(3)), ("r", int(5))]),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(1100);
    let mut checked = 0;
    for (name, fam) in fams {
        let f: &dyn Family = fam.as_ref();
        let xs: Vec<GroupElement> = (0..40).map(|i| f.sample(&mut rng, 1 + i % 3)).collect();
        let delta = |x: &GroupElement, r| modular_delta(f, x, r).map_err(|e| format!("{name}: {e}"));
        for x in &xs {
            ensure(delta(x, Relative::H)? == delta(x, Relative::K)?, || {
                format!("{name}: Delta_H != Delta_K at {x}")
            })?;
        }
        for (x, y) in xs.iter().zip(xs.iter().skip(1)) {
            let xy = f.multiply_raw(x, y);
            ensure(delta(&xy, Relative::H)? == delta(x, Relative::H)? * delta(y, Relative::H)?, || {
                format!("{name}: Delta not multiplicative at ({x}, {y})")
            })?;
            checked += 1;
        }
    }
    Ok(format!("9 families: Delta_H = Delta_K, {checked} products multiplicative"))
}
