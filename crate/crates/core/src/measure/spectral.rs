use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::space::{Point, QuerySet, Rect};
use super::spec::ProbabilityMeasureSpec;
use crate::error::{param, Result};
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralComponent {
    pub weight: f64,
    pub measure: ProbabilityMeasureSpec,
}

/// Spectral measure on probability measures.
///
/// `Finite` is `σ = Σ c_i δ_{μ_i}`. `TranslationFamily` places the kernel
/// translated to every centre `x` of the dilated window `W ⊕ margin` with
/// intensity `λ dx`, i.e. `σ = λ ∫ δ_{kernel + x} dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpectralMeasure {
    Finite {
        components: Vec<SpectralComponent>,
    },
    TranslationFamily {
        /// Kernel centred at the origin.
        kernel: ProbabilityMeasureSpec,
        lambda: f64,
        window: Rect,
        margin: f64,
    },
}

/// Which spectral atom a draw selected: a component index or a translation
/// centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureRef {
    Component(usize),
    Translate(Point),
}

/// Regular/singular dichotomy of a spectral measure. Every representable
/// spectral measure charges only probability measures, so only `Regular`
/// is ever produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    Singular,
}

impl SpectralMeasure {
    pub fn finite(components: impl IntoIterator<Item = (f64, ProbabilityMeasureSpec)>) -> Result<Self> {
        let sigma = Self::Finite {
            components: components
                .into_iter()
                .map(|(weight, measure)| SpectralComponent { weight, measure })
                .collect(),
        };
        sigma.validate()?;
        Ok(sigma)
    }

    pub fn empty() -> Self {
        Self::Finite { components: Vec::new() }
    }

    pub fn translation_family(
        kernel: ProbabilityMeasureSpec,
        lambda: f64,
        window: Rect,
        margin: f64,
    ) -> Result<Self> {
        let sigma = Self::TranslationFamily { kernel, lambda, window, margin };
        sigma.validate()?;
        Ok(sigma)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite { components } => {
                for c in components {
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return param(format!("spectral weight must be positive, got {}", c.weight));
                    }
                    c.measure.validate()?;
                }
                if let Some(first) = components.first() {
                    let planar = first.measure.is_planar();
                    if components.iter().any(|c| c.measure.is_planar() != planar) {
                        return param("spectral components mix planar and discrete measures");
                    }
                }
            }
            Self::TranslationFamily { kernel, lambda, margin, .. } => {
                kernel.validate()?;
                if !kernel.is_planar() {
                    return param("translation family needs a planar kernel");
                }
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return param("centre intensity must be finite and non-negative");
                }
                if !(*margin >= 0.0 && margin.is_finite()) {
                    return param("margin must be finite and non-negative");
                }
            }
        }
        Ok(())
    }

    /// `σ(S)`: `Σ c_i`, or `λ · area(W ⊕ margin)`.
    pub fn total(&self) -> f64 {
        match self {
            Self::Finite { components } => components.iter().map(|c| c.weight).sum(),
            Self::TranslationFamily { lambda, window, margin, .. } => {
                lambda * window.dilate(*margin).area()
            }
        }
    }

    pub fn regularity(&self) -> Regularity {
        Regularity::Regular
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0.0
    }

    pub fn is_planar(&self) -> bool {
        match self {
            Self::Finite { components } => components.first().is_none_or(|c| c.measure.is_planar()),
            Self::TranslationFamily { .. } => true,
        }
    }

    /// True iff every spectral atom is a point mass (independent scattering).
    pub fn is_independently_scattered(&self) -> bool {
        match self {
            Self::Finite { components } => components.iter().all(|c| c.measure.is_dirac()),
            Self::TranslationFamily { kernel, .. } => kernel.is_dirac(),
        }
    }

    /// Region of translation centres, `W ⊕ margin`.
    pub fn centre_region(&self) -> Option<Rect> {
        match self {
            Self::TranslationFamily { window, margin, .. } => Some(window.dilate(*margin)),
            Self::Finite { .. } => None,
        }
    }

    pub fn resolve(&self, r: &MeasureRef) -> Cow<'_, ProbabilityMeasureSpec> {
        match (self, r) {
            (Self::Finite { components }, MeasureRef::Component(i)) => {
                Cow::Borrowed(&components[*i].measure)
            }
            (Self::TranslationFamily { kernel, .. }, MeasureRef::Translate(p)) => {
                Cow::Owned(kernel.translate(p.x, p.y))
            }
            _ => panic!("measure reference {r:?} does not belong to this spectral measure"),
        }
    }

    /// `μ_i(B)` for every component of a finite spectral measure.
    pub fn component_masses(&self, set: &QuerySet) -> Result<Vec<f64>> {
        match self {
            Self::Finite { components } => components.iter().map(|c| c.measure.mass(set)).collect(),
            Self::TranslationFamily { .. } => param("component masses need a finite spectral measure"),
        }
    }

    /// Sampler of `σ / σ(S)`.
    pub fn picker(&self) -> ComponentPicker<'_> {
        let cumulative = match self {
            Self::Finite { components } => {
                let mut acc = 0.0;
                components
                    .iter()
                    .map(|c| {
                        acc += c.weight;
                        acc
                    })
                    .collect()
            }
            Self::TranslationFamily { .. } => Vec::new(),
        };
        ComponentPicker { sigma: self, cumulative }
    }
}

/// Draws spectral atoms from the normalized spectral measure.
pub struct ComponentPicker<'a> {
    sigma: &'a SpectralMeasure,
    cumulative: Vec<f64>,
}

impl ComponentPicker<'_> {
    pub fn draw(&self, rng: &mut RandomSource) -> MeasureRef {
        match self.sigma {
            SpectralMeasure::Finite { .. } => {
                let total = *self.cumulative.last().expect("empty spectral measure");
                let u = rng.uniform() * total;
                let i = self.cumulative.partition_point(|&c| c <= u);
                MeasureRef::Component(i.min(self.cumulative.len() - 1))
            }
            SpectralMeasure::TranslationFamily { window, margin, .. } => {
                let region = window.dilate(*margin);
                MeasureRef::Translate(Point::new(
                    region.x0() + region.width() * rng.uniform(),
                    region.y0() + region.height() * rng.uniform(),
                ))
            }
        }
    }
}
