//! Fixtures shared by the sampler benchmarks.

use das_core::measure::Rect;
use das_core::process::stationary_gaussian;
use das_core::{DasProcessSpec, Exponent, PhaseSpace, ProbabilityMeasureSpec, QuerySet, SpectralMeasure};

pub fn alpha(a: f64) -> Exponent {
    Exponent::new(a).expect("valid exponent")
}

/// Two overlapping components on three labels.
pub fn two_component(a: f64) -> DasProcessSpec {
    let sigma = SpectralMeasure::finite([
        (1.0, ProbabilityMeasureSpec::on_labels(&[0.6, 0.4, 0.0]).unwrap()),
        (0.5, ProbabilityMeasureSpec::on_labels(&[0.0, 0.5, 0.5]).unwrap()),
    ])
    .unwrap();
    DasProcessSpec::new(sigma, alpha(a), PhaseSpace::finite(["a", "b", "c"]).unwrap()).unwrap()
}

pub fn label_bins() -> Vec<QuerySet> {
    (0..3).map(|i| QuerySet::labels([i])).collect()
}

/// The stationary Gaussian-kernel process of the README figure.
pub fn figure(a: f64) -> DasProcessSpec {
    stationary_gaussian(0.03, 30.0, Rect::unit(), alpha(a)).unwrap()
}
