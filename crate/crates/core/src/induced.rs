//! Finite-window matrices of the induced representation `lambda_sigma` and of
//! the right action `R~` of the Hecke algebra on `l^2(G, H, sigma)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::characters::in_b;
use crate::cyclotomic::Cyclo;
use crate::error::{HeckeError, Result};
use crate::group::{coset_reps, GroupElement};
use crate::hecke::HeckeElement;
use crate::scenario::HeckeScenario;

/// Canonical left-coset representatives indexing the basis `delta_y`.
#[derive(Clone, Debug)]
pub struct CosetWindow {
    reps: Vec<GroupElement>,
    index: BTreeMap<GroupElement, usize>,
}

impl CosetWindow {
    pub fn new(sc: &HeckeScenario, reps: Vec<GroupElement>) -> Result<Self> {
        let fam = sc.fam();
        let mut index = BTreeMap::new();
        for (i, r) in reps.iter().enumerate() {
            let c = fam.left_coset(r).rep;
            if &c != r {
                return Err(HeckeError::Domain(format!("{r} is not a canonical coset representative")));
            }
            if index.insert(c, i).is_some() {
                return Err(HeckeError::Domain(format!("{r} appears twice in the window")));
            }
        }
        Ok(CosetWindow { reps, index })
    }

    /// The family's window of the given radius.
    pub fn around(sc: &HeckeScenario, radius: u32) -> Result<Self> {
        Self::new(sc, sc.fam().coset_window(radius))
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    pub fn position(&self, y: &GroupElement) -> Option<usize> {
        self.index.get(y).copied()
    }
}

/// A sparse matrix over the window with the columns whose image left it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowedOperator {
    pub n: usize,
    pub entries: BTreeMap<(usize, usize), Cyclo>,
    pub leaked: Vec<bool>,
}

impl WindowedOperator {
    fn new(n: usize) -> Self {
        WindowedOperator {
            n,
            entries: BTreeMap::new(),
            leaked: vec![false; n],
        }
    }

    fn add(&mut self, row: usize, col: usize, v: Cyclo) {
        let e = self.entries.entry((row, col)).or_insert_with(|| Cyclo::zero(v.field()));
        *e = &*e + &v;
        if e.is_zero() {
            self.entries.remove(&(row, col));
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Cyclo> {
        self.entries.get(&(row, col))
    }

    pub fn column(&self, col: usize) -> Vec<(usize, &Cyclo)> {
        self.entries
            .iter()
            .filter(|((_, c), _)| *c == col)
            .map(|((r, _), v)| (*r, v))
            .collect()
    }

    /// Product with columns valid wherever `rhs` did not leak.
    pub fn mul(&self, rhs: &WindowedOperator) -> WindowedOperator {
        assert_eq!(self.n, rhs.n);
        let mut by_col: BTreeMap<usize, Vec<(usize, &Cyclo)>> = BTreeMap::new();
        for ((r, c), v) in &self.entries {
            by_col.entry(*c).or_default().push((*r, v));
        }
        let mut out = WindowedOperator::new(self.n);
        for ((u, x), b) in &rhs.entries {
            if let Some(col) = by_col.get(u) {
                for (y, a) in col {
                    out.add(*y, *x, *a * b);
                }
            }
        }
        for x in 0..self.n {
            // a leaked column of rhs loses terms, a leaked column of self at u loses rows only
            out.leaked[x] = rhs.leaked[x] || rhs.column(x).iter().any(|(u, _)| self.leaked[*u]);
        }
        out
    }

    pub fn sub(&self, rhs: &WindowedOperator) -> WindowedOperator {
        let mut out = self.clone();
        for ((r, c), v) in &rhs.entries {
            out.add(*r, *c, -v);
        }
        for x in 0..self.n {
            out.leaked[x] = self.leaked[x] || rhs.leaked[x];
        }
        out
    }

    pub fn adjoint(&self) -> WindowedOperator {
        let mut out = WindowedOperator::new(self.n);
        for ((r, c), v) in &self.entries {
            out.entries.insert((*c, *r), v.conj());
        }
        out.leaked = self.leaked.clone();
        out
    }

    /// Columns that did not leak.
    pub fn interior(&self) -> BTreeSet<usize> {
        (0..self.n).filter(|x| !self.leaked[*x]).collect()
    }

    /// The block on `cols x cols`.
    pub fn block(&self, cols: &BTreeSet<usize>) -> BTreeMap<(usize, usize), Cyclo> {
        self.entries
            .iter()
            .filter(|((r, c), _)| cols.contains(r) && cols.contains(c))
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }

    /// Dense exact dump, each entry in the scalar's display form.
    pub fn to_json(&self, window: &CosetWindow) -> serde_json::Value {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|r| {
                (0..self.n)
                    .map(|c| self.get(r, c).map(|v| v.to_string()).unwrap_or_else(|| "0".into()))
                    .collect()
            })
            .collect();
        serde_json::json!({
            "basis": window.reps().iter().map(|y| y.to_string()).collect::<Vec<_>>(),
            "leaked_columns": self.leaked.iter().enumerate().filter(|(_, l)| **l).map(|(i, _)| i).collect::<Vec<_>>(),
            "matrix": rows,
        })
    }
}

/// `(lambda(w) delta_x | delta_y) = sigma(y^-1 w x)` when `y^-1 w x in H`.
pub fn lambda_matrix(sc: &HeckeScenario, w: &GroupElement, window: &CosetWindow) -> Result<WindowedOperator> {
    sc.require_dim_one("lambda_sigma")?;
    let fam = sc.fam();
    fam.validate(w)?;
    let mut op = WindowedOperator::new(window.len());
    for (col, x) in window.reps().iter().enumerate() {
        let lc = fam.left_coset(&fam.multiply_raw(w, x));
        match window.position(&lc.rep) {
            Some(row) => op.add(row, col, sc.sigma_diag(&lc.h)[0].clone()),
            None => op.leaked[col] = true,
        }
    }
    Ok(op)
}

/// `(R~(f) delta_x | delta_y) = Delta_K(y^-1 x)^(1/2) f(y^-1 x)`.
pub fn rtilde_matrix(sc: &HeckeScenario, f: &HeckeElement, window: &CosetWindow) -> Result<WindowedOperator> {
    sc.require_dim_one("R~")?;
    let fam = sc.fam();
    if f.scenario().field.order() != sc.field.order() {
        return Err(HeckeError::Unsupported(
            "the element and the window scenario use different coefficient fields".into(),
        ));
    }
    let mut roots = BTreeMap::new();
    for z in f.support().keys() {
        roots.insert(z.clone(), sc.delta_sqrt(z)?);
    }
    let mut op = WindowedOperator::new(window.len());
    for (col, x) in window.reps().iter().enumerate() {
        for z in f.support().keys() {
            // y ranges over x (H z^-1 H) / H
            let zi = fam.invert_raw(z);
            for c in coset_reps(fam, &zi) {
                let y = fam.left_coset(&fam.multiply_raw(x, &c)).rep;
                let Some(row) = window.position(&y) else {
                    op.leaked[col] = true;
                    continue;
                };
                let arg = fam.multiply_raw(&fam.invert_raw(&y), x);
                let v = f.eval(&arg);
                let v = v.get(0, 0);
                if !v.is_zero() {
                    op.add(row, col, v * &roots[z]);
                }
            }
        }
    }
    Ok(op)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub window: usize,
    pub interior: usize,
    /// `None` when the interior is empty.
    pub residual_zero: Option<bool>,
    pub max_residual: f64,
}

/// `lambda(w) R~(f) - R~(f) lambda(w)` on the columns where neither operator leaked.
pub fn commutation_residual(
    sc: &HeckeScenario,
    w: &GroupElement,
    f: &HeckeElement,
    window: &CosetWindow,
) -> Result<CommutationReport> {
    let l = lambda_matrix(sc, w, window)?;
    let r = rtilde_matrix(sc, f, window)?;
    let d = l.mul(&r).sub(&r.mul(&l));
    let interior = d.interior();
    let mut max: f64 = 0.0;
    let mut zero = true;
    for ((_, c), v) in &d.entries {
        if interior.contains(c) {
            zero = false;
            max = max.max(v.abs_enclosure().1);
        }
    }
    Ok(CommutationReport {
        window: window.len(),
        interior: interior.len(),
        residual_zero: if interior.is_empty() { None } else { Some(zero) },
        max_residual: max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub enum IrreducibilityVerdict {
    /// No element of `B \ H` in the ball; says nothing beyond it.
    IrreducibleOnBall { scanned: usize },
    /// `eps_x` for `x in B \ H` commutes with `lambda_sigma` and acts as a
    /// non-scalar operator on the window interior.
    Reducible { witness: String, non_scalar: bool },
}

pub fn irreducibility_probe(
    sc: &Arc<HeckeScenario>,
    ball: &[GroupElement],
    window: &CosetWindow,
) -> Result<IrreducibilityVerdict> {
    sc.require_dim_one("irreducibility probe")?;
    let fam = sc.fam();
    for x in ball {
        if fam.in_h(x) || !in_b(fam, x)? {
            continue;
        }
        let e = HeckeElement::epsilon(sc, x)?;
        let r = rtilde_matrix(sc, &e, window)?;
        let interior = r.interior();
        let block = r.block(&interior);
        // a scalar block is diagonal with one repeated value
        let diag: BTreeSet<&Cyclo> = interior.iter().filter_map(|i| block.get(&(*i, *i))).collect();
        let off_diag = block.keys().any(|(a, b)| a != b);
        let missing_diag = interior.iter().any(|i| !block.contains_key(&(*i, *i)));
        let non_scalar = off_diag || diag.len() > 1 || (missing_diag && !block.is_empty());
        return Ok(IrreducibilityVerdict::Reducible {
            witness: x.to_string(),
            non_scalar,
        });
    }
    Ok(IrreducibilityVerdict::IrreducibleOnBall { scanned: ball.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Dihedral, PadicAxb};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn axb() -> Arc<HeckeScenario> {
        HeckeScenario::with_sqrt("axb", Arc::new(PadicAxb::new(2, vec![3])))
    }

    fn el(b: i64, k: i64) -> GroupElement {
        GroupElement::PadicAxb { b: crate::arith::q(b), k }
    }

    #[test]
    fn identity_operators() {
        let sc = axb();
        let w = CosetWindow::around(&sc, 3).unwrap();
        assert!(w.len() >= 32);
        let l = lambda_matrix(&sc, &el(0, 0), &w).unwrap();
        let r = rtilde_matrix(&sc, &HeckeElement::identity(&sc), &w).unwrap();
        assert_eq!(l, r);
        assert_eq!(l.entries.len(), w.len());
        assert!(l.entries.iter().all(|((a, b), v)| a == b && *v == Cyclo::one(&sc.field)));
    }

    #[test]
    fn commutation_in_axb() {
        let sc = axb();
        let w = CosetWindow::around(&sc, 3).unwrap();
        let e = HeckeElement::epsilon(&sc, &el(0, 2)).unwrap();
        let rep = commutation_residual(&sc, &el(1, 0), &e, &w).unwrap();
        assert_eq!(rep.residual_zero, Some(true), "{rep:?}");
        let rep = commutation_residual(&sc, &el(1, 1), &e, &w).unwrap();
        assert_eq!(rep.residual_zero, Some(true), "{rep:?}");
    }

    #[test]
    fn representation_properties() {
        let sc = axb();
        let w = CosetWindow::around(&sc, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f = HeckeElement::random(&sc, &mut rng, 2, 2);
            let g = HeckeElement::random(&sc, &mut rng, 2, 2);
            let rf = rtilde_matrix(&sc, &f, &w).unwrap();
            let rg = rtilde_matrix(&sc, &g, &w).unwrap();
            let rfg = rtilde_matrix(&sc, &f.convolve(&g), &w).unwrap();
            // R~(f * g) = R~(f) R~(g) on columns where the product is exact
            let prod = rf.mul(&rg);
            let cols: BTreeSet<usize> = prod.interior().intersection(&rfg.interior()).copied().collect();
            for c in &cols {
                for r in 0..w.len() {
                    assert_eq!(prod.get(r, *c), rfg.get(r, *c));
                }
            }
            let rstar = rtilde_matrix(&sc, &f.involution().unwrap(), &w).unwrap();
            let adj = rf.adjoint();
            let both: BTreeSet<usize> = rf.interior().intersection(&rstar.interior()).copied().collect();
            assert_eq!(adj.block(&both), rstar.block(&both));
        }
    }

    #[test]
    fn lambda_is_multiplicative() {
        let sc = HeckeScenario::new("d", Arc::new(Dihedral::new(vec![true])));
        let w = CosetWindow::around(&sc, 10).unwrap();
        let a = GroupElement::Dihedral { m: 1, flip: false };
        let b = GroupElement::Dihedral { m: 0, flip: true };
        let ab = sc.fam().multiply_raw(&a, &b);
        let la = lambda_matrix(&sc, &a, &w).unwrap();
        let lb = lambda_matrix(&sc, &b, &w).unwrap();
        let lab = lambda_matrix(&sc, &ab, &w).unwrap();
        let prod = la.mul(&lb);
        let cols: BTreeSet<usize> = prod.interior().intersection(&lab.interior()).copied().collect();
        assert!(!cols.is_empty());
        assert_eq!(prod.block(&cols), lab.block(&cols));
        let sq = sc.fam().multiply_raw(&a, &a);
        let e = HeckeElement::epsilon(&sc, &sq).unwrap();
        assert_eq!(commutation_residual(&sc, &a, &e, &w).unwrap().residual_zero, Some(true));
    }

    #[test]
    fn probe_verdicts() {
        let sc = axb();
        let w = CosetWindow::around(&sc, 3).unwrap();
        let ball = sc.fam().ball(2);
        match irreducibility_probe(&sc, &ball, &w).unwrap() {
            IrreducibilityVerdict::Reducible { non_scalar, .. } => assert!(non_scalar),
            v => panic!("{v:?}"),
        }
        let only_e = vec![el(0, 0)];
        assert!(matches!(
            irreducibility_probe(&sc, &only_e, &w).unwrap(),
            IrreducibilityVerdict::IrreducibleOnBall { .. }
        ));
    }
}
