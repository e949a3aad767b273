//! Discrete α-stable point processes and strictly α-stable random measures:
//! samplers, closed-form oracles and the statistical checks that tie them
//! together.

pub mod error;
pub mod measure;
pub mod naturals;
pub mod plot;
pub mod process;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stable_measure;
pub mod stats;
pub mod vector;

pub use error::{Error, Result};
pub use measure::{
    Location, MeasureRef, PhaseSpace, Point, PointPattern, ProbabilityMeasureSpec, QuerySet, Rect,
    SpectralMeasure, WeightedMeasureSample,
};
pub use naturals::{FactorizationMeasure, PrimeBasis};
pub use process::{DasProcessSpec, MarkedRealization, ProcessRoute};
pub use rng::RandomSource;
pub use scalar::{DiscreteStableParams, DiscreteStableRoute, Exponent};
pub use stable_measure::{LePageConfig, Quadrature, StepFunction};
pub use stats::{Harness, McEstimate, TestReport};
pub use vector::{SimplexMeasure, VectorRoute};
