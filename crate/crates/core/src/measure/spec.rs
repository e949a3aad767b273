use serde::{Deserialize, Serialize};

use super::space::{Location, Point, QuerySet, Rect};
use crate::error::{param, Result};
use crate::rng::RandomSource;
use crate::special::{normal_cdf, normal_quantile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Location,
    pub weight: f64,
}

/// A probability measure that can be sampled and evaluated on query sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbabilityMeasureSpec {
    Atomic { atoms: Vec<Atom> },
    UniformOnBall { center: Point, radius: f64 },
    /// Isotropic Gaussian with per-coordinate standard deviation `scale`.
    GaussianKernel { center: Point, scale: f64 },
    UniformOnWindow { window: Rect },
}

const WEIGHT_TOLERANCE: f64 = 1e-9;

impl ProbabilityMeasureSpec {
    pub fn atomic(atoms: impl IntoIterator<Item = (Location, f64)>) -> Result<Self> {
        let spec = Self::Atomic {
            atoms: atoms
                .into_iter()
                .map(|(point, weight)| Atom { point, weight })
                .collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Point mass at a discrete label.
    pub fn dirac_label(label: usize) -> Self {
        Self::Atomic {
            atoms: vec![Atom { point: Location::Label(label), weight: 1.0 }],
        }
    }

    /// Distribution on labels `0..probs.len()` with the given probabilities;
    /// zero entries are dropped.
    pub fn on_labels(probs: &[f64]) -> Result<Self> {
        Self::atomic(
            probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0.0)
                .map(|(i, &p)| (Location::Label(i), p)),
        )
    }

    pub fn gaussian(center: Point, scale: f64) -> Result<Self> {
        let spec = Self::GaussianKernel { center, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform_ball(center: Point, radius: f64) -> Result<Self> {
        let spec = Self::UniformOnBall { center, radius };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform_window(window: Rect) -> Self {
        Self::UniformOnWindow { window }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Atomic { atoms } => {
                if atoms.is_empty() {
                    return param("atomic measure needs at least one atom");
                }
                if atoms.iter().any(|a| !(a.weight > 0.0 && a.weight.is_finite())) {
                    return param("atom weights must be positive");
                }
                let planar = matches!(atoms[0].point, Location::Planar(_));
                if atoms.iter().any(|a| matches!(a.point, Location::Planar(_)) != planar) {
                    return param("atoms must all be labels or all be planar points");
                }
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                if (total - 1.0).abs() > WEIGHT_TOLERANCE {
                    return param(format!("atom weights sum to {total}, expected 1"));
                }
            }
            Self::UniformOnBall { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                return param("ball radius must be positive");
            }
            Self::GaussianKernel { scale, .. } if !(*scale > 0.0 && scale.is_finite()) => {
                return param("Gaussian scale must be positive");
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether the measure is a single point mass.
    pub fn is_dirac(&self) -> bool {
        matches!(self, Self::Atomic { atoms } if atoms.len() == 1)
    }

    pub fn is_planar(&self) -> bool {
        match self {
            Self::Atomic { atoms } => matches!(atoms[0].point, Location::Planar(_)),
            _ => true,
        }
    }

    /// Copy shifted by `(dx, dy)`. Label atoms are left in place.
    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        match self {
            Self::Atomic { atoms } => Self::Atomic {
                atoms: atoms
                    .iter()
                    .map(|a| Atom {
                        point: match a.point {
                            Location::Planar(p) => Location::Planar(p.offset(dx, dy)),
                            label => label,
                        },
                        weight: a.weight,
                    })
                    .collect(),
            },
            Self::UniformOnBall { center, radius } => Self::UniformOnBall {
                center: center.offset(dx, dy),
                radius: *radius,
            },
            Self::GaussianKernel { center, scale } => Self::GaussianKernel {
                center: center.offset(dx, dy),
                scale: *scale,
            },
            Self::UniformOnWindow { window } => Self::UniformOnWindow {
                window: window.translate(dx, dy),
            },
        }
    }

    /// `μ(B)`.
    pub fn mass(&self, set: &QuerySet) -> Result<f64> {
        let mass = match (self, set) {
            (Self::Atomic { atoms }, _) => {
                if self.is_planar() != matches!(set, QuerySet::Rect(_)) {
                    return param("query set does not match the measure's phase space");
                }
                atoms
                    .iter()
                    .filter(|a| set.contains(&a.point))
                    .map(|a| a.weight)
                    .sum()
            }
            (Self::UniformOnWindow { window }, QuerySet::Rect(r)) => window
                .intersect(r)
                .map_or(0.0, |i| i.area() / window.area()),
            (Self::UniformOnBall { center, radius }, QuerySet::Rect(r)) => {
                disk_rect_area(*center, *radius, r) / (std::f64::consts::PI * radius * radius)
            }
            (Self::GaussianKernel { center, scale }, QuerySet::Rect(r)) => {
                normal_interval(r.x0(), r.x1(), center.x, *scale)
                    * normal_interval(r.y0(), r.y1(), center.y, *scale)
            }
            (_, QuerySet::Labels(_)) => {
                return param("planar measures can only be evaluated on rectangles")
            }
        };
        Ok(mass.clamp(0.0, 1.0))
    }

    pub fn sample_point(&self, rng: &mut RandomSource) -> Location {
        match self {
            Self::Atomic { atoms } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.weight;
                    if u < acc {
                        return a.point;
                    }
                }
                atoms[atoms.len() - 1].point
            }
            Self::UniformOnBall { center, radius } => {
                let r = radius * rng.uniform().sqrt();
                let theta = std::f64::consts::TAU * rng.uniform();
                Location::Planar(center.offset(r * theta.cos(), r * theta.sin()))
            }
            Self::GaussianKernel { center, scale } => Location::Planar(
                center.offset(scale * rng.normal(), scale * rng.normal()),
            ),
            Self::UniformOnWindow { window } => Location::Planar(Point::new(
                window.x0() + window.width() * rng.uniform(),
                window.y0() + window.height() * rng.uniform(),
            )),
        }
    }

    /// Draw from the measure conditioned on the planar rectangle `r`.
    /// Returns `None` when `μ(r) = 0`.
    pub fn sample_point_in(&self, r: &Rect, rng: &mut RandomSource) -> Option<Point> {
        match self {
            Self::Atomic { atoms } => {
                let inside: Vec<(Point, f64)> = atoms
                    .iter()
                    .filter_map(|a| match a.point {
                        Location::Planar(p) if r.contains(p) => Some((p, a.weight)),
                        _ => None,
                    })
                    .collect();
                let total: f64 = inside.iter().map(|(_, w)| w).sum();
                if total <= 0.0 {
                    return None;
                }
                let u = rng.uniform() * total;
                let mut acc = 0.0;
                for (p, w) in &inside {
                    acc += w;
                    if u < acc {
                        return Some(*p);
                    }
                }
                inside.last().map(|(p, _)| *p)
            }
            Self::UniformOnWindow { window } => {
                let i = window.intersect(r)?;
                Some(Point::new(
                    i.x0() + i.width() * rng.uniform(),
                    i.y0() + i.height() * rng.uniform(),
                ))
            }
            Self::UniformOnBall { center, radius } => {
                let bbox = Rect::new(
                    center.x - radius,
                    center.x + radius,
                    center.y - radius,
                    center.y + radius,
                )
                .ok()?;
                let i = bbox.intersect(r)?;
                if disk_rect_area(*center, *radius, &i) <= 0.0 {
                    return None;
                }
                loop {
                    let p = Point::new(
                        i.x0() + i.width() * rng.uniform(),
                        i.y0() + i.height() * rng.uniform(),
                    );
                    let (dx, dy) = (p.x - center.x, p.y - center.y);
                    if dx * dx + dy * dy <= radius * radius {
                        return Some(p);
                    }
                }
            }
            Self::GaussianKernel { center, scale } => {
                let x = truncated_normal(r.x0(), r.x1(), center.x, *scale, rng)?;
                let y = truncated_normal(r.y0(), r.y1(), center.y, *scale, rng)?;
                Some(Point::new(x, y))
            }
        }
    }
}

/// `P{lo <= m + s Z < hi}`, evaluated on the tail away from the mean so that
/// both far-tail intervals keep relative precision.
fn normal_interval(lo: f64, hi: f64, mean: f64, scale: f64) -> f64 {
    let a = (lo - mean) / scale;
    let b = (hi - mean) / scale;
    if a > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

fn truncated_normal(lo: f64, hi: f64, mean: f64, scale: f64, rng: &mut RandomSource) -> Option<f64> {
    let a = (lo - mean) / scale;
    let b = (hi - mean) / scale;
    // Work on the side of the mean closest to the interval.
    let flip = a > 0.0;
    let (a, b) = if flip { (-b, -a) } else { (a, b) };
    let (fa, fb) = (normal_cdf(a), normal_cdf(b));
    if fb <= fa {
        return None;
    }
    let z = normal_quantile(fa + (fb - fa) * rng.uniform()).clamp(a, b);
    let z = if flip { -z } else { z };
    Some(mean + scale * z)
}

/// Area of the disk of radius `r` centred at `c` intersected with `rect`.
pub(crate) fn disk_rect_area(c: Point, r: f64, rect: &Rect) -> f64 {
    let f = |a: f64, b: f64| disk_quadrant_area(r, a - c.x, b - c.y);
    let area = f(rect.x1(), rect.y1()) - f(rect.x0(), rect.y1()) - f(rect.x1(), rect.y0())
        + f(rect.x0(), rect.y0());
    area.max(0.0)
}

/// Area of `{x² + y² <= r², x <= a, y <= b}`.
fn disk_quadrant_area(r: f64, a: f64, b: f64) -> f64 {
    if b <= -r || a <= -r {
        return 0.0;
    }
    // Antiderivative of the half-chord sqrt(r² - x²).
    let g = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
    };
    let chord = |p: f64, q: f64| if q > p { g(q) - g(p) } else { 0.0 };
    let end = a.min(r);
    if b >= r {
        return 2.0 * chord(-r, end);
    }
    let w = (r * r - b * b).sqrt();
    let outer = |p: f64, q: f64| if b >= 0.0 { 2.0 * chord(p, q) } else { 0.0 };
    let inner_hi = end.min(w);
    let inner = if inner_hi > -w { b * (inner_hi + w) + chord(-w, inner_hi) } else { 0.0 };
    outer(-r, end.min(-w)) + inner + outer(w, end)
}
