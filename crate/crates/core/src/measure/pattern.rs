use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::space::{Location, PhaseSpace, QuerySet};
use crate::error::{param, Result};
use crate::rng::RandomSource;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternPoint {
    pub location: Location,
    pub multiplicity: u64,
    pub cluster: Option<u64>,
}

/// Finite counting measure stored as located multiplicities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    points: Vec<PatternPoint>,
}

impl PointPattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `multiplicity` points at `location`; zero multiplicities are
    /// dropped.
    pub fn push(&mut self, location: Location, multiplicity: u64, cluster: Option<u64>) {
        if multiplicity > 0 {
            self.points.push(PatternPoint { location, multiplicity, cluster });
        }
    }

    pub fn points(&self) -> &[PatternPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total number of points (saturating).
    pub fn total(&self) -> u64 {
        self.points.iter().fold(0u64, |acc, p| acc.saturating_add(p.multiplicity))
    }

    pub fn count_in(&self, set: &QuerySet) -> u64 {
        self.points
            .iter()
            .filter(|p| set.contains(&p.location))
            .fold(0u64, |acc, p| acc.saturating_add(p.multiplicity))
    }

    pub fn counts(&self, sets: &[QuerySet]) -> Vec<u64> {
        sets.iter().map(|s| self.count_in(s)).collect()
    }

    /// Points per cluster tag; untagged points are ignored.
    pub fn cluster_sizes(&self) -> BTreeMap<u64, u64> {
        let mut sizes = BTreeMap::new();
        for p in &self.points {
            if let Some(tag) = p.cluster {
                let e = sizes.entry(tag).or_insert(0u64);
                *e = e.saturating_add(p.multiplicity);
            }
        }
        sizes
    }

    pub fn superpose(&mut self, other: PointPattern) {
        self.points.extend(other.points);
    }

    /// Independent thinning: every unit mass survives with probability `t`.
    /// The result is dominated by `self` pointwise on every realization.
    pub fn thin(&self, t: f64, rng: &mut RandomSource) -> Result<PointPattern> {
        if !(0.0..=1.0).contains(&t) {
            return param(format!("thinning probability must lie in [0, 1], got {t}"));
        }
        let mut out = PointPattern::new();
        for p in &self.points {
            out.push(p.location, rng.binomial(p.multiplicity, t), p.cluster);
        }
        Ok(out)
    }

    /// CSV with header `x,y,mult,cluster` for planar spaces and
    /// `label,mult,cluster` otherwise. Untagged points leave `cluster` empty.
    pub fn write_csv<W: Write>(&self, space: &PhaseSpace, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if space.is_planar() {
            w.write_record(["x", "y", "mult", "cluster"])?;
        } else {
            w.write_record(["label", "mult", "cluster"])?;
        }
        for p in &self.points {
            let mult = p.multiplicity.to_string();
            let cluster = p.cluster.map(|c| c.to_string()).unwrap_or_default();
            match p.location {
                Location::Planar(pt) => {
                    w.write_record([pt.x.to_string(), pt.y.to_string(), mult, cluster])?
                }
                Location::Label(l) => w.write_record([space.label_name(l), mult, cluster])?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Thin `phi` independently with retention probability `t`.
pub fn thin_pattern(phi: &PointPattern, t: f64, rng: &mut RandomSource) -> Result<PointPattern> {
    phi.thin(t, rng)
}
