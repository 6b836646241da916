//! Finite metric spaces and chain states.

use crate::error::{Error, Result};

/// A point a chain can occupy: an index into a finite [`MetricSpace`], or a
/// raw coordinate for chains living on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    Finite(usize),
    Real(f64),
}

impl State {
    /// The 1-D coordinate of this state, if it has one. Finite states only
    /// have a coordinate through their space, so they return `None` here.
    pub fn real(&self) -> Option<f64> {
        match self {
            State::Real(x) => Some(*x),
            State::Finite(_) => None,
        }
    }
}

impl std::fmt::Display for State {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            State::Finite(i) => write!(f, "{i}"),
            State::Real(x) => write!(f, "{x}"),
        }
    }
}

/// A finite list of labelled points with coordinates in R^d and the Euclidean
/// metric evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    labels: Vec<String>,
    coords: Vec<Vec<f64>>,
    dim: usize,
}

impl MetricSpace {
    /// Build a space from explicit coordinates. All points must share one
    /// dimension and every coordinate must be finite.
    pub fn new(coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParam("metric space needs at least one point".into()));
        }
        let dim = coords[0].len();
        if dim == 0 {
            return Err(Error::InvalidParam("metric space points need at least one coordinate".into()));
        }
        for (i, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::LengthMismatch(format!(
                    "point {i} has dimension {} but point 0 has {dim}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParam(format!("point {i} has a non-finite coordinate")));
            }
        }
        let labels = (0..coords.len()).map(|i| i.to_string()).collect();
        Ok(Self { labels, coords, dim })
    }

    /// Points 0, 1, ..., n-1 placed at those positions on the real line.
    pub fn line(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| vec![i as f64]).collect())
    }

    /// Points on the real line at the given positions.
    pub fn line_at(positions: &[f64]) -> Result<Self> {
        Self::new(positions.iter().map(|&x| vec![x]).collect())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.coords.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                self.coords.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i]
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.coords[i]
            .iter()
            .zip(&self.coords[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The 1-D positions of all points, if the space is one-dimensional.
    pub fn positions_1d(&self) -> Option<Vec<f64>> {
        (self.dim == 1).then(|| self.coords.iter().map(|c| c[0]).collect())
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                d = f64::max(d, self.dist(i, j));
            }
        }
        d
    }
}
