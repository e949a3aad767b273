use serde::{Deserialize, Serialize};

use super::space::QuerySet;
use super::spectral::{MeasureRef, SpectralMeasure};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub weight: f64,
    pub measure: MeasureRef,
}

/// Realization `Σ w_k ε_k` of a random measure whose atoms `ε_k` are
/// references into a spectral measure.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedMeasureSample {
    pub terms: Vec<WeightedTerm>,
    /// Expected total mass of the neglected series tail (0 when exact).
    pub truncation_budget: f64,
}

impl WeightedMeasureSample {
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `ζ(B) = Σ w_k ε_k(B)`.
    pub fn mass(&self, sigma: &SpectralMeasure, set: &QuerySet) -> Result<f64> {
        let mut total = 0.0;
        for t in &self.terms {
            total += t.weight * sigma.resolve(&t.measure).mass(set)?;
        }
        Ok(total)
    }
}
