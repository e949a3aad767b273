//! Phase spaces, probability measures, spectral measures and point patterns.

mod pattern;
mod sample;
mod space;
mod spec;
mod spectral;

pub use pattern::{thin_pattern, PatternPoint, PointPattern};
pub use sample::{WeightedMeasureSample, WeightedTerm};
pub use space::{ensure_disjoint, Location, PhaseSpace, Point, QuerySet, Rect};
pub use spec::{Atom, ProbabilityMeasureSpec};
pub use spectral::{ComponentPicker, MeasureRef, Regularity, SpectralComponent, SpectralMeasure};

/// `σ(S)`; infinite only for unbounded centre regions, which are not
/// representable, so the value is always finite here.
pub fn spectral_total(sigma: &SpectralMeasure) -> f64 {
    sigma.total()
}

pub fn classify_regularity(sigma: &SpectralMeasure) -> Regularity {
    sigma.regularity()
}

pub fn measure_mass(mu: &ProbabilityMeasureSpec, set: &QuerySet) -> crate::Result<f64> {
    mu.mass(set)
}

pub fn sample_point(mu: &ProbabilityMeasureSpec, rng: &mut crate::RandomSource) -> Location {
    mu.sample_point(rng)
}
