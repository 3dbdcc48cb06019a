use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_0, hi_0] × … × [lo_{d-1}, hi_{d-1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty()
            || lo
                .iter()
                .zip(&hi)
                .any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h))
        {
            return Err(Error::DegenerateBox);
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    /// Smallest box containing all points.
    pub fn around<'a>(points: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut it = points.into_iter();
        let first = it.next().ok_or(Error::DegenerateBox)?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in it {
            for (c, v) in p.iter().enumerate() {
                lo[c] = lo[c].min(*v);
                hi[c] = hi[c].max(*v);
            }
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }

    /// Grows every side by `fraction` of its extent (and at least `min_pad`).
    pub fn enlarged(&self, fraction: f64, min_pad: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| {
                let pad = ((h - l) * fraction).max(min_pad);
                (l - pad, h + pad)
            })
            .unzip();
        Self { lo, hi }
    }

    pub fn hull(&self, other: &BoxDomain) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((a, b), (c, d))| (a.min(*c), b.max(*d)))
            .unzip();
        Self { lo, hi }
    }

    pub fn intersection(&self, other: &BoxDomain) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((a, b), (c, d))| {
                let l = a.max(*c);
                (l, b.min(*d).max(l))
            })
            .unzip();
        Self { lo, hi }
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxDomain) -> Self {
        Self {
            lo: self.lo.iter().chain(&other.lo).copied().collect(),
            hi: self.hi.iter().chain(&other.hi).copied().collect(),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute coordinate over the box.
    pub fn max_abs(&self) -> f64 {
        self.lo
            .iter()
            .chain(&self.hi)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}
