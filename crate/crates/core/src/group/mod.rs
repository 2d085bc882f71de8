//! Group families, their elements, subgroup descriptors and Hecke-pair combinatorics.

mod dihedral;
mod full_axb;
mod heisenberg;
mod lamplighter;
pub mod lattice;
mod padic_axb;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::arith::{fmt_q, Q};
use crate::error::{HeckeError, Result};

pub use dihedral::Dihedral;
pub use full_axb::FullAxb;
pub use heisenberg::Heisenberg;
pub use lamplighter::{Lamplighter, PeriodicSeq};
pub use lattice::Lattice2;
pub use padic_axb::PadicAxb;

/// A group element in the canonical coordinates of its family.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    /// `a^m b^flip`.
    Dihedral { m: i64, flip: bool },
    /// `[u, v, w]` with `w` in `[0, 1)`.
    Heisenberg { u: Q, v: Q, w: Q },
    /// `(b, p^k)`.
    PadicAxb { b: Q, k: i64 },
    /// `(b, a)` with `a > 0`.
    FullAxb { b: Q, a: Q },
    /// `(y, k)`: lamp configuration with no zero values, shift `k`.
    Lamplighter { y: BTreeMap<i64, u64>, k: i64 },
}

impl GroupElement {
    pub fn tag(&self) -> &'static str {
        match self {
            GroupElement::Dihedral { .. } => "dihedral",
            GroupElement::Heisenberg { .. } => "heisenberg",
            GroupElement::PadicAxb { .. } => "padic-axb",
            GroupElement::FullAxb { .. } => "full-axb",
            GroupElement::Lamplighter { .. } => "lamplighter",
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Dihedral { m, flip } => match (m, flip) {
                (0, false) => write!(f, "e"),
                (0, true) => write!(f, "b"),
                (m, false) => write!(f, "a^{m}"),
                (m, true) => write!(f, "a^{m} b"),
            },
            GroupElement::Heisenberg { u, v, w } => {
                write!(f, "[{},{},{}]", fmt_q(u), fmt_q(v), fmt_q(w))
            }
            GroupElement::PadicAxb { b, k } => write!(f, "({},p^{})", fmt_q(b), k),
            GroupElement::FullAxb { b, a } => write!(f, "({},{})", fmt_q(b), fmt_q(a)),
            GroupElement::Lamplighter { y, k } => {
                let ys: Vec<String> = y.iter().map(|(j, c)| format!("{j}:{c}")).collect();
                write!(f, "([{}],{})", ys.join(","), k)
            }
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parametrized subgroups used by the families.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SubgroupDescriptor {
    /// A finite subgroup listed element by element (sorted).
    Finite(Vec<GroupElement>),
    /// `g Z` inside the normal subgroup of an `ax+b` group.
    Cyclic(Q),
    /// `{[m, n, alpha m + beta n] : (m, n) in lattice}`.
    HeisLattice { lattice: Lattice2, alpha: Q, beta: Q },
    /// Configurations supported on `[start, inf)` annihilated by each form
    /// `y -> sum_j sigma^{c}_{j - shift}(y_j)` listed as `(shift, c)`.
    Lamp { start: i64, forms: Vec<(i64, usize)> },
}

impl fmt::Display for SubgroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupDescriptor::Finite(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}", s.join(", "))
            }
            SubgroupDescriptor::Cyclic(g) => write!(f, "{}Z", fmt_q(g)),
            SubgroupDescriptor::HeisLattice {
                lattice,
                alpha,
                beta,
            } => {
                let [(a, b), (_, d)] = lattice.rows();
                write!(
                    f,
                    "{{[m,n,{}m+{}n] : (m,n) in <({a},{b}),(0,{d})>}}",
                    fmt_q(alpha),
                    fmt_q(beta)
                )
            }
            SubgroupDescriptor::Lamp { start, forms } => {
                write!(f, "sum_{{j>={start}}} F")?;
                for (s, c) in forms {
                    write!(f, " | sigma{c}(shift {s}) = 0")?;
                }
                Ok(())
            }
        }
    }
}

/// A subgroup descriptor with generators sufficient for evaluating characters.
#[derive(Clone, Debug)]
pub struct SubgroupInfo {
    pub descriptor: SubgroupDescriptor,
    pub generators: Vec<GroupElement>,
}

/// `y = h z k` with `h, k` in `H` and `z` the canonical double-coset representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub h: GroupElement,
    pub z: GroupElement,
    pub k: GroupElement,
}

/// `y = rep h` with `h` in `H` and `rep` the canonical left-coset representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftCoset {
    pub rep: GroupElement,
    pub h: GroupElement,
}

/// A concrete family of Hecke triples `(G, H, sigma)`.
///
/// The character is diagonal with `dim()` components, each given by a
/// phase exponent in `Q/Z`.
pub trait Family: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn as_any(&self) -> &dyn std::any::Any;
    fn params(&self) -> Vec<(String, String)>;
    fn dim(&self) -> usize;

    fn identity(&self) -> GroupElement;
    /// Checks the family tag and that the coordinates describe an element of `G`.
    fn validate(&self, x: &GroupElement) -> Result<()>;
    fn multiply_raw(&self, x: &GroupElement, y: &GroupElement) -> GroupElement;
    fn invert_raw(&self, x: &GroupElement) -> GroupElement;
    fn canonicalize(&self, x: &GroupElement) -> Result<GroupElement>;
    fn parse_element(&self, s: &str) -> Result<GroupElement>;

    fn in_h(&self, x: &GroupElement) -> bool;
    fn h_descriptor(&self) -> SubgroupDescriptor;
    fn kernel_descriptor(&self) -> SubgroupDescriptor;
    /// `x S x^-1`.
    fn conjugate(&self, s: &SubgroupDescriptor, x: &GroupElement) -> SubgroupDescriptor;
    fn intersect(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> SubgroupDescriptor;
    fn sub_contains(&self, s: &SubgroupDescriptor, x: &GroupElement) -> bool;
    /// `a ⊇ b`.
    fn sub_contains_sub(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> bool;
    fn sub_is_trivial(&self, s: &SubgroupDescriptor) -> bool;
    /// `[a : b]` for `b ⊆ a`.
    fn sub_index(&self, a: &SubgroupDescriptor, b: &SubgroupDescriptor) -> Option<u64>;

    /// `H ∩ x H x^-1` with generators.
    fn hx(&self, x: &GroupElement) -> SubgroupInfo;
    /// `[H : H_x]` by the family's closed form.
    fn index_l(&self, x: &GroupElement) -> u64;
    /// A transversal of `H / H_x` (length `L(x)`).
    fn h_transversal(&self, x: &GroupElement) -> Vec<GroupElement>;
    fn double_coset(&self, x: &GroupElement) -> Decomposition;
    fn left_coset(&self, x: &GroupElement) -> LeftCoset;

    /// Phase exponents of the character components at `h`.
    fn sigma(&self, h: &GroupElement) -> Result<Vec<Q>>;
    /// Least common denominator of the attained phases.
    fn sigma_order(&self) -> u64;
    /// A global extension of the character, evaluated at `x`, when one is known.
    fn extension(&self, x: &GroupElement) -> Option<Vec<Q>>;
    /// The same group with the trivial character.
    fn trivial_character(&self) -> Arc<dyn Family>;

    fn sample(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement;
    fn sample_h(&self, rng: &mut dyn RngCore, height: u32) -> GroupElement;
    /// A deterministic finite ball around the identity.
    fn ball(&self, radius: u32) -> Vec<GroupElement>;
    /// Distinct canonical left-coset representatives near the identity.
    fn coset_window(&self, radius: u32) -> Vec<GroupElement>;
    /// Primes whose square roots may be needed for `Delta^(1/2)`.
    fn sqrt_primes(&self) -> Vec<u64>;
    /// `b = x^-1 y` with `x, y` in `B^+`, when the family knows such a factorization.
    fn ore_factor(&self, b: &GroupElement) -> Option<(GroupElement, GroupElement)>;
    /// A structural reason why no `x` with `x H x^-1 ⊆ K` exists.
    fn continuity_obstruction(&self) -> Option<String>;
}

pub type FamilyRef = Arc<dyn Family>;

/// Multiplication with a family check.
pub fn multiply(fam: &dyn Family, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
    fam.validate(x)?;
    fam.validate(y)?;
    Ok(fam.multiply_raw(x, y))
}

pub fn invert(fam: &dyn Family, x: &GroupElement) -> Result<GroupElement> {
    fam.validate(x)?;
    Ok(fam.invert_raw(x))
}

pub(crate) fn mismatch(fam: &str, x: &GroupElement) -> HeckeError {
    HeckeError::FamilyMismatch {
        expected: fam.to_string(),
        found: x.tag().to_string(),
    }
}

/// Product of a list of elements.
pub fn product(fam: &dyn Family, xs: &[&GroupElement]) -> GroupElement {
    xs.iter()
        .fold(fam.identity(), |acc, x| fam.multiply_raw(&acc, x))
}

/// Left coset representatives of `HxH / H`.
pub fn coset_reps(fam: &dyn Family, x: &GroupElement) -> Vec<GroupElement> {
    fam.h_transversal(x)
        .iter()
        .map(|t| fam.multiply_raw(t, x))
        .collect()
}

/// `H ∩ x H x^-1` computed through descriptors.
pub fn hx_by_descriptors(fam: &dyn Family, x: &GroupElement) -> SubgroupDescriptor {
    let h = fam.h_descriptor();
    fam.intersect(&h, &fam.conjugate(&h, x))
}

/// `[H : H_x]` computed through descriptors (independent of `index_l`).
pub fn index_l_by_descriptors(fam: &dyn Family, x: &GroupElement) -> Option<u64> {
    fam.sub_index(&fam.h_descriptor(), &hx_by_descriptors(fam, x))
}

/// `[K : K ∩ x K x^-1]`.
pub fn index_lk(fam: &dyn Family, x: &GroupElement) -> Option<u64> {
    let k = fam.kernel_descriptor();
    let kx = fam.intersect(&k, &fam.conjugate(&k, x));
    fam.sub_index(&k, &kx)
}

/// Which subgroup a modular function is taken relative to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relative {
    H,
    K,
}

/// `Delta(x) = L(x) / L(x^-1)` relative to `H` or `K`.
pub fn modular_delta(fam: &dyn Family, x: &GroupElement, rel: Relative) -> Result<Q> {
    let xi = fam.invert_raw(x);
    let (a, b) = match rel {
        Relative::H => (Some(fam.index_l(x)), Some(fam.index_l(&xi))),
        Relative::K => (index_lk(fam, x), index_lk(fam, &xi)),
    };
    match (a, b) {
        (Some(a), Some(b)) => Ok(Q::new((a as i64).into(), (b as i64).into())),
        _ => Err(HeckeError::Unsupported(format!(
            "index relative to {rel:?} not computable at {x}"
        ))),
    }
}

/// Result of intersecting conjugates of `K` over a finite ball.
#[derive(Clone, Debug)]
pub struct ReducednessReport {
    pub intersection: SubgroupDescriptor,
    pub trivial: bool,
    /// Whether every step of the ball strictly shrank or kept the running intersection.
    pub shrinking: bool,
    pub witness: Option<GroupElement>,
}

/// Intersects `y K y^-1` over the ball.
pub fn reducedness_probe(fam: &dyn Family, ball: &[GroupElement]) -> ReducednessReport {
    let k = fam.kernel_descriptor();
    let mut acc = k.clone();
    let mut last_change = false;
    for y in ball {
        let next = fam.intersect(&acc, &fam.conjugate(&k, y));
        last_change = next != acc;
        acc = next;
    }
    let trivial = fam.sub_is_trivial(&acc);
    ReducednessReport {
        trivial,
        shrinking: !trivial && last_change,
        witness: None,
        intersection: acc,
    }
}

type Builder = fn(&BTreeMap<String, toml::Value>) -> Result<FamilyRef>;

/// Name to constructor map for the shipped families.
pub struct FamilyRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut builders: BTreeMap<&'static str, Builder> = BTreeMap::new();
        builders.insert("dihedral", dihedral::build);
        builders.insert("heisenberg", heisenberg::build);
        builders.insert("padic-heisenberg", heisenberg::build_padic);
        builders.insert("padic-axb", padic_axb::build);
        builders.insert("full-axb", full_axb::build);
        builders.insert("lamplighter", lamplighter::build);
        FamilyRegistry { builders }
    }
}

impl FamilyRegistry {
    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, name: &str, params: &BTreeMap<String, toml::Value>) -> Result<FamilyRef> {
        let b = self.builders.get(name).ok_or_else(|| {
            HeckeError::Config(format!(
                "unknown family '{name}' (known: {})",
                self.names().join(", ")
            ))
        })?;
        b(params)
    }
}

/// Parameter readers shared by the family builders.
pub(crate) mod params {
    use std::collections::BTreeMap;

    use crate::arith::{parse_q, Q};
    use crate::error::{HeckeError, Result};

    pub fn int(p: &BTreeMap<String, toml::Value>, key: &str, default: Option<i64>) -> Result<i64> {
        match p.get(key) {
            Some(toml::Value::Integer(v)) => Ok(*v),
            Some(other) => Err(HeckeError::Config(format!(
                "parameter '{key}' must be an integer, got {other}"
            ))),
            None => default.ok_or_else(|| HeckeError::Config(format!("missing parameter '{key}'"))),
        }
    }

    pub fn rational_value(v: &toml::Value, key: &str) -> Result<Q> {
        match v {
            toml::Value::Integer(i) => Ok(Q::from_integer((*i).into())),
            toml::Value::String(s) => parse_q(s)
                .ok_or_else(|| HeckeError::Config(format!("parameter '{key}': bad rational '{s}'"))),
            other => Err(HeckeError::Config(format!(
                "parameter '{key}' must be a rational (integer or \"a/b\"), got {other}"
            ))),
        }
    }

    /// A scalar or an array of scalars.
    pub fn list<T>(
        p: &BTreeMap<String, toml::Value>,
        key: &str,
        default: Option<Vec<T>>,
        f: impl Fn(&toml::Value) -> Result<T>,
    ) -> Result<Vec<T>> {
        match p.get(key) {
            Some(toml::Value::Array(a)) => a.iter().map(&f).collect(),
            Some(v) => Ok(vec![f(v)?]),
            None => default.ok_or_else(|| HeckeError::Config(format!("missing parameter '{key}'"))),
        }
    }

    pub fn int_value(v: &toml::Value, key: &str) -> Result<i64> {
        match v {
            toml::Value::Integer(i) => Ok(*i),
            other => Err(HeckeError::Config(format!(
                "parameter '{key}' must be an integer, got {other}"
            ))),
        }
    }
}

/// Splits `"(x,y)"` or `"[x,y,z]"` into trimmed fields.
pub(crate) fn split_tuple(s: &str, open: char, close: char) -> Option<Vec<String>> {
    let s = s.trim();
    let inner = s.strip_prefix(open)?.strip_suffix(close)?;
    Some(inner.split(',').map(|t| t.trim().to_string()).collect())
}
