//! JSON experiment configuration.

use std::collections::BTreeSet;

use das_core::measure::SpectralComponent;
use das_core::naturals::PrimeBasis;
use das_core::process::gaussian_margin;
use das_core::{
    DasProcessSpec, Exponent, LePageConfig, PhaseSpace, ProbabilityMeasureSpec, ProcessRoute,
    QuerySet, Rect, SpectralMeasure,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    #[serde(default)]
    pub spectral: Option<SpectralConfig>,
    /// Observation window: `[x0, x1, y0, y1]` or `{"labels": [...]}`.
    #[serde(default)]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_draws")]
    pub draws: u64,
    #[serde(default)]
    pub route: Option<String>,
    #[serde(default)]
    pub bins: Vec<SetConfig>,
    #[serde(default)]
    pub lepage: Option<LePageConfig>,
    #[serde(default)]
    pub quadrature_grid: Option<usize>,
    #[serde(default)]
    pub test: Option<TestConfig>,
    #[serde(default)]
    pub tables: Vec<TableConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_draws() -> u64 {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralConfig {
    Finite {
        components: Vec<SpectralComponent>,
    },
    Translation {
        kernel: ProbabilityMeasureSpec,
        lambda: f64,
        window: Rect,
        /// Omitted: chosen so the neglected edge intensity is below 1e-3
        /// (Gaussian kernels only).
        #[serde(default)]
        margin: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowConfig {
    Rect(Rect),
    Labels { labels: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetConfig {
    Rect(Rect),
    Labels { labels: BTreeSet<usize> },
}

impl From<&SetConfig> for QuerySet {
    fn from(s: &SetConfig) -> Self {
        match s {
            SetConfig::Rect(r) => QuerySet::Rect(*r),
            SetConfig::Labels { labels } => QuerySet::Labels(labels.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestConfig {
    /// `Φ` against `t^{1/α}∘Φ′ + (1−t)^{1/α}∘Φ″`; `scaling_alpha` overrides
    /// the exponent used in the thinning factors.
    Stability {
        t: f64,
        #[serde(default)]
        scaling_alpha: Option<f64>,
    },
    Superposition {
        n: u32,
    },
    /// Two routes on the bins; `alpha_b` replaces α in the second arm.
    RouteEquivalence {
        routes: [String; 2],
        #[serde(default)]
        alpha_b: Option<f64>,
    },
    GofSibuya,
    Avoidance {
        set: SetConfig,
    },
    MultNaturals {
        basis: PrimeBasis,
    },
}

impl TestConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stability { .. } => "stability",
            Self::Superposition { .. } => "superposition",
            Self::RouteEquivalence { .. } => "route_equivalence",
            Self::GofSibuya => "gof_sibuya",
            Self::Avoidance { .. } => "avoidance",
            Self::MultNaturals { .. } => "mult_naturals",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableConfig {
    DiscreteStablePmf { c: f64, n_max: usize },
    SibuyaPmf { alphas: Vec<f64>, n_max: u64 },
    MultNaturals { basis: PrimeBasis, min_prob: f64 },
    /// Avoidance probabilities of the configured process on each set.
    Avoidance { sets: Vec<SetConfig> },
    /// `exp{-c(1-s)^α}` on a grid of `s`.
    Pgf { c: f64, s: Vec<f64> },
    VectorPmf { components: Vec<VectorComponent>, max_counts: Vec<usize> },
}

impl TableConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DiscreteStablePmf { .. } => "discrete_stable_pmf",
            Self::SibuyaPmf { .. } => "sibuya_pmf",
            Self::MultNaturals { .. } => "mult_naturals",
            Self::Avoidance { .. } => "avoidance",
            Self::Pgf { .. } => "pgf",
            Self::VectorPmf { .. } => "vector_pmf",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorComponent {
    pub weight: f64,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn exponent(&self) -> Result<Exponent, CliError> {
        Ok(Exponent::new(self.alpha)?)
    }

    pub fn route(&self) -> Result<ProcessRoute, CliError> {
        Ok(self.route.as_deref().unwrap_or("cluster").parse()?)
    }

    pub fn lepage(&self) -> Result<LePageConfig, CliError> {
        let cfg = self.lepage.unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bins(&self) -> Vec<QuerySet> {
        self.bins.iter().map(QuerySet::from).collect()
    }

    pub fn quadrature(&self) -> das_core::Quadrature {
        das_core::Quadrature {
            grid: self.quadrature_grid.unwrap_or(das_core::Quadrature::default().grid),
            tolerance: None,
        }
    }

    /// The DαS process described by `alpha`, `spectral` and `window`.
    pub fn process(&self) -> Result<DasProcessSpec, CliError> {
        let alpha = self.exponent()?;
        let spectral = self
            .spectral
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `spectral` section".into()))?;
        let sigma = match spectral {
            SpectralConfig::Finite { components } => SpectralMeasure::Finite { components: components.clone() },
            SpectralConfig::Translation { kernel, lambda, window, margin } => {
                let margin = match (margin, kernel) {
                    (Some(m), _) => *m,
                    (None, ProbabilityMeasureSpec::GaussianKernel { scale, .. }) => {
                        gaussian_margin(*scale, *lambda, window, alpha, das_core::process::EDGE_TOLERANCE)?
                    }
                    (None, _) => {
                        return Err(CliError::Config(
                            "translation `margin` may only be omitted for Gaussian kernels".into(),
                        ))
                    }
                };
                SpectralMeasure::TranslationFamily { kernel: kernel.clone(), lambda: *lambda, window: *window, margin }
            }
        };
        let window = match (&self.window, spectral) {
            (Some(WindowConfig::Rect(r)), _) => PhaseSpace::PlanarWindow(*r),
            (Some(WindowConfig::Labels { labels }), _) => PhaseSpace::finite(labels.clone())?,
            (None, SpectralConfig::Translation { window, .. }) => PhaseSpace::PlanarWindow(*window),
            (None, SpectralConfig::Finite { .. }) => {
                return Err(CliError::Config("finite spectral measures need a `window`".into()))
            }
        };
        Ok(DasProcessSpec::new(sigma, alpha, window)?)
    }
}
