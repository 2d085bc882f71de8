//! Finite-range characters: evaluation, the set `B`, extensions to `G`, and the
//! lamplighter classification.

use std::collections::BTreeSet;

use rand::RngCore;
use serde::Serialize;

use crate::arith::{fmt_q, frac, Q};
use crate::error::{HeckeError, Result};
use crate::group::{Family, GroupElement, Lamplighter};

/// `sigma(h)` as phase exponents in `[0, 1)`.
pub fn sigma_eval(fam: &dyn Family, h: &GroupElement) -> Result<Vec<Q>> {
    fam.sigma(h)
}

/// Whether the `(i, j)` matrix entry of a function on `HxH` may be non-zero:
/// `sigma_i(g) = sigma_j(x^-1 g x)` for every generator `g` of `H_x`.
pub fn entry_allowed(fam: &dyn Family, x: &GroupElement, i: usize, j: usize) -> bool {
    let xi = fam.invert_raw(x);
    fam.hx(x).generators.iter().all(|g| {
        let c = fam.multiply_raw(&fam.multiply_raw(&xi, g), x);
        let a = fam.sigma(g).expect("generator of H_x lies in H");
        let b = fam.sigma(&c).expect("x^-1 H_x x lies in H");
        a[i] == b[j]
    })
}

/// `x ∈ B` for a one-dimensional character.
pub fn in_b(fam: &dyn Family, x: &GroupElement) -> Result<bool> {
    if fam.dim() != 1 {
        return Err(HeckeError::Unsupported(
            "B is defined here for one-dimensional characters only".into(),
        ));
    }
    fam.validate(x)?;
    Ok(entry_allowed(fam, x, 0, 0))
}

/// `x ∈ B^+`: `x ∈ B` and `x H x^-1 ⊇ H`.
pub fn in_b_plus(fam: &dyn Family, x: &GroupElement) -> Result<bool> {
    let h = fam.h_descriptor();
    Ok(in_b(fam, x)? && fam.sub_contains_sub(&fam.conjugate(&h, x), &h))
}

/// A verified global extension of the character, or the reason none was found.
#[derive(Clone, Debug, Serialize)]
pub enum ExtensionCertificate {
    Extension {
        rule: String,
        checked_pairs: usize,
        checked_h: usize,
    },
    None {
        reason: String,
    },
}

impl ExtensionCertificate {
    pub fn exists(&self) -> bool {
        matches!(self, ExtensionCertificate::Extension { .. })
    }
}

/// Tries the family's explicit extension and verifies it on the ball.
pub fn extendability_check(fam: &dyn Family, ball: &[GroupElement], rng: &mut dyn RngCore) -> ExtensionCertificate {
    if fam.extension(&fam.identity()).is_none() {
        let witness = ball
            .iter()
            .find(|x| fam.dim() == 1 && !in_b(fam, x).unwrap_or(true));
        let reason = match witness {
            Some(x) => format!("{x} is not in B, so no extension to G exists (an extension forces B = G)"),
            None => "no extension rule known for this character".to_string(),
        };
        return ExtensionCertificate::None { reason };
    }
    let ext = |x: &GroupElement| fam.extension(x).expect("extension defined everywhere");
    let mut pairs = 0;
    for x in ball {
        for y in ball.iter().take(12) {
            let lhs = ext(&fam.multiply_raw(x, y));
            let rhs: Vec<Q> = ext(x).iter().zip(ext(y)).map(|(a, b)| frac(&(a + b))).collect();
            if lhs != rhs {
                return ExtensionCertificate::None {
                    reason: format!("extension is not multiplicative at ({x}, {y})"),
                };
            }
            pairs += 1;
        }
    }
    let mut hs = 0;
    for _ in 0..64 {
        let h = fam.sample_h(rng, 4);
        if ext(&h) != fam.sigma(&h).expect("sample_h lies in H") {
            return ExtensionCertificate::None {
                reason: format!("extension disagrees with sigma at {h}"),
            };
        }
        hs += 1;
    }
    ExtensionCertificate::Extension {
        rule: extension_rule(fam),
        checked_pairs: pairs,
        checked_h: hs,
    }
}

fn extension_rule(fam: &dyn Family) -> String {
    match fam.name() {
        "dihedral" => "a^m b^e -> e * sigma(b)".into(),
        "heisenberg" | "padic-heisenberg" => "[u,v,w] -> s u + t v mod 1".into(),
        "padic-axb" => "(n/p^j, p^k) -> n/q mod 1".into(),
        "lamplighter" => "(y, k) -> a * sum_j y_j / f mod 1".into(),
        _ => "trivial".into(),
    }
}

/// Distinct values of `sigma` on a sample of `H`.
pub fn sigma_image(fam: &dyn Family, rng: &mut dyn RngCore, samples: usize) -> BTreeSet<Vec<Q>> {
    let mut out = BTreeSet::new();
    out.insert(fam.sigma(&fam.identity()).expect("identity lies in H"));
    for i in 0..samples {
        let h = fam.sample_h(rng, 2 + (i % 6) as u32);
        out.insert(fam.sigma(&h).expect("sample_h lies in H"));
    }
    out
}

/// Outcome of scanning the shifts of the lamplighter group for membership in `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LampClassification {
    /// Every shift in the window lies in `B`.
    AllShifts,
    /// No non-zero shift in the window lies in `B`.
    OnlyN,
    /// Some but not all shifts pass.
    Mixed { passing: Vec<i64> },
}

pub fn lamplighter_b_classification(fam: &dyn Family, window: i64) -> Result<LampClassification> {
    let lamp = fam
        .as_any()
        .downcast_ref::<Lamplighter>()
        .ok_or_else(|| HeckeError::Unsupported("classification is for the lamplighter family".into()))?;
    let mut passing = Vec::new();
    for k in -window..=window {
        if k == 0 {
            continue;
        }
        if in_b(lamp, &Lamplighter::element(&[], k))? {
            passing.push(k);
        }
    }
    Ok(if passing.len() as i64 == 2 * window {
        LampClassification::AllShifts
    } else if passing.is_empty() {
        LampClassification::OnlyN
    } else {
        LampClassification::Mixed { passing }
    })
}

/// Human-readable phase list.
pub fn fmt_phases(v: &[Q]) -> String {
    let s: Vec<String> = v.iter().map(fmt_q).collect();
    s.join(",")
}
