//! A presented Hecke triple together with its exact coefficient field.

use std::sync::Arc;

use crate::arith::Q;
use crate::cyclotomic::{order_with_sqrts, sqrt_rational, Cyclo, CycloField};
use crate::error::{HeckeError, Result};
use crate::group::{Family, FamilyRef, GroupElement, Relative};

#[derive(Debug, Clone)]
pub struct HeckeScenario {
    pub label: String,
    pub family: FamilyRef,
    pub field: Arc<CycloField>,
}

impl HeckeScenario {
    /// Coefficients in `Q(zeta_M)` with `M` the order of the character.
    pub fn new(label: impl Into<String>, family: FamilyRef) -> Arc<Self> {
        let m = family.sigma_order().max(1);
        Self::with_order(label, family, m)
    }

    /// Also adjoins the square roots needed for `Delta^(1/2)`.
    pub fn with_sqrt(label: impl Into<String>, family: FamilyRef) -> Arc<Self> {
        let m = order_with_sqrts(family.sigma_order().max(1), &family.sqrt_primes());
        Self::with_order(label, family, m)
    }

    pub fn with_order(label: impl Into<String>, family: FamilyRef, order: u64) -> Arc<Self> {
        assert_eq!(order % family.sigma_order().max(1), 0);
        Arc::new(HeckeScenario {
            label: label.into(),
            family,
            field: CycloField::new(order),
        })
    }

    /// The same group with the trivial character, sharing this coefficient field.
    pub fn trivial(&self) -> Arc<Self> {
        Arc::new(HeckeScenario {
            label: format!("{} (trivial character)", self.label),
            family: self.family.trivial_character(),
            field: self.field.clone(),
        })
    }

    pub fn fam(&self) -> &dyn Family {
        self.family.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn phase(&self, r: &Q) -> Cyclo {
        Cyclo::from_phase(&self.field, r).expect("character phase lies in the coefficient field")
    }

    /// Diagonal entries of `sigma(h)`.
    pub fn sigma_diag(&self, h: &GroupElement) -> Vec<Cyclo> {
        self.family
            .sigma(h)
            .expect("sigma evaluated on H")
            .iter()
            .map(|r| self.phase(r))
            .collect()
    }

    /// `Delta_K(x)^(1/2)` in the coefficient field.
    pub fn delta_sqrt(&self, x: &GroupElement) -> Result<Cyclo> {
        let d = crate::group::modular_delta(self.fam(), x, Relative::K)?;
        sqrt_rational(&self.field, &d).ok_or_else(|| {
            HeckeError::Unsupported(format!(
                "Delta({x}) = {} has no square root in Q(zeta_{})",
                crate::arith::fmt_q(&d),
                self.field.order()
            ))
        })
    }

    pub fn require_dim_one(&self, what: &str) -> Result<()> {
        if self.dim() == 1 {
            Ok(())
        } else {
            Err(HeckeError::Unsupported(format!(
                "{what} needs a one-dimensional character (dim = {})",
                self.dim()
            )))
        }
    }
}
