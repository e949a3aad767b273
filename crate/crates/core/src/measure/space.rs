use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// Location in a phase space: either an index into a discrete label set or a
/// point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    Label(usize),
    Planar(Point),
}

/// Axis-aligned rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return param(format!("rectangle [{x0}, {x1}) x [{y0}, {y1}) must have finite positive sides"));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn unit() -> Self {
        Self { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
    }

    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, lo, hi)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }

    /// Minkowski sum with the square `[-margin, margin]²`.
    pub fn dilate(&self, margin: f64) -> Self {
        Self {
            x0: self.x0 - margin,
            x1: self.x1 + margin,
            y0: self.y0 - margin,
            y1: self.y1 + margin,
        }
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        Rect::new(
            self.x0.max(other.x0),
            self.x1.min(other.x1),
            self.y0.max(other.y0),
            self.y1.min(other.y1),
        )
        .ok()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x0: self.x0 + dx,
            x1: self.x1 + dx,
            y0: self.y0 + dy,
            y1: self.y1 + dy,
        }
    }

    /// Split into an `nx × ny` grid of cells, row-major in `y`.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<Rect> {
        let dx = self.width() / nx as f64;
        let dy = self.height() / ny as f64;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x0 = self.x0 + i as f64 * dx;
                let y0 = self.y0 + j as f64 * dy;
                let x1 = if i + 1 == nx { self.x1 } else { x0 + dx };
                let y1 = if j + 1 == ny { self.y1 } else { y0 + dy };
                cells.push(Rect { x0, x1, y0, y1 });
            }
        }
        cells
    }
}

impl TryFrom<[f64; 4]> for Rect {
    type Error = crate::Error;

    fn try_from(v: [f64; 4]) -> Result<Self> {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x0, r.x1, r.y0, r.y1]
    }
}

/// Sets on which measures are evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuerySet {
    Rect(Rect),
    Labels(BTreeSet<usize>),
}

impl QuerySet {
    pub fn labels(labels: impl IntoIterator<Item = usize>) -> Self {
        Self::Labels(labels.into_iter().collect())
    }

    pub fn contains(&self, loc: &Location) -> bool {
        match (self, loc) {
            (QuerySet::Rect(r), Location::Planar(p)) => r.contains(*p),
            (QuerySet::Labels(set), Location::Label(l)) => set.contains(l),
            _ => false,
        }
    }

    /// True when the two sets overlap in a set of positive measure.
    pub fn overlaps(&self, other: &QuerySet) -> bool {
        match (self, other) {
            (QuerySet::Rect(a), QuerySet::Rect(b)) => a.intersect(b).is_some(),
            (QuerySet::Labels(a), QuerySet::Labels(b)) => !a.is_disjoint(b),
            _ => false,
        }
    }
}

/// Check that the query sets are pairwise disjoint.
pub fn ensure_disjoint(sets: &[QuerySet]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if a.overlaps(b) {
                return param(format!("query sets {a:?} and {b:?} overlap"));
            }
        }
    }
    Ok(())
}

/// The space points live in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpace {
    FiniteSet { labels: Vec<String> },
    /// Countably many labels `prefix0, prefix1, ...`.
    CountableSet { prefix: String },
    PlanarWindow(Rect),
}

impl PhaseSpace {
    pub fn finite(labels: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let space = Self::FiniteSet { labels };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if let PhaseSpace::FiniteSet { labels } = self {
            if labels.is_empty() {
                return param("a finite phase space needs at least one label");
            }
            let distinct: BTreeSet<&String> = labels.iter().collect();
            if distinct.len() != labels.len() {
                return param("finite phase space labels must be distinct");
            }
        }
        Ok(())
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, PhaseSpace::PlanarWindow(_))
    }

    /// Display name of a discrete location.
    pub fn label_name(&self, index: usize) -> String {
        match self {
            PhaseSpace::FiniteSet { labels } => labels
                .get(index)
                .cloned()
                .unwrap_or_else(|| index.to_string()),
            PhaseSpace::CountableSet { prefix } => format!("{prefix}{index}"),
            PhaseSpace::PlanarWindow(_) => index.to_string(),
        }
    }

    pub fn contains(&self, loc: &Location) -> bool {
        match (self, loc) {
            (PhaseSpace::FiniteSet { labels }, Location::Label(i)) => *i < labels.len(),
            (PhaseSpace::CountableSet { .. }, Location::Label(_)) => true,
            (PhaseSpace::PlanarWindow(w), Location::Planar(p)) => w.contains(*p),
            _ => false,
        }
    }
}
