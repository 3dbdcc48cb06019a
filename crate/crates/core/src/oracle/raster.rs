use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::BoxDomain;
use crate::network::ReluNet;

/// How raw field values become pixel samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Values stored as-is.
    Raw,
    /// `1` where the value is `≥ 0`, else `0`.
    Sign,
    /// Clamped to `[0, 1]`.
    Unit,
}

impl ThresholdMode {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ThresholdMode::Raw => v,
            ThresholdMode::Sign => {
                if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ThresholdMode::Unit => v.clamp(0.0, 1.0),
        }
    }

    /// Binary reading of a stored sample.
    pub fn is_on(self, sample: f64) -> bool {
        match self {
            ThresholdMode::Raw => sample >= 0.0,
            ThresholdMode::Sign | ThresholdMode::Unit => sample >= 0.5,
        }
    }
}

/// Row-major grid of samples, row 0 at the top of the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub bbox: BoxDomain,
    pub mode: ThresholdMode,
    pub samples: Vec<f64>,
}

impl Raster {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.width + col]
    }

    pub fn is_on(&self, row: usize, col: usize) -> bool {
        self.mode.is_on(self.get(row, col))
    }

    /// Plain PBM, `1` (black) for pixels that are on.
    pub fn to_pbm(&self) -> String {
        let mut s = format!("P1\n{} {}\n", self.width, self.height);
        for r in 0..self.height {
            let row: Vec<&str> = (0..self.width)
                .map(|c| if self.is_on(r, c) { "1" } else { "0" })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Plain PGM with maxval 255. Samples are clamped to `[0, 1]` and drawn as ink,
    /// so `1` is black like the `1` pixels of the PBM form.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n255\n", self.width, self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                if c > 0 {
                    s.push(' ');
                }
                let g = ((1.0 - self.get(r, c).clamp(0.0, 1.0)) * 255.0).round() as u8;
                write!(s, "{g}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn save_pbm(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pbm())?;
        Ok(())
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pgm())?;
        Ok(())
    }
}

/// Model coordinates of a pixel center. Axes past the second sit at the box center.
pub fn pixel_center(
    bbox: &BoxDomain,
    width: usize,
    height: usize,
    row: usize,
    col: usize,
) -> Vec<f64> {
    let mut x = bbox.center();
    x[0] = bbox.lo[0] + (col as f64 + 0.5) / width as f64 * (bbox.hi[0] - bbox.lo[0]);
    if x.len() > 1 {
        x[1] = bbox.hi[1] - (row as f64 + 0.5) / height as f64 * (bbox.hi[1] - bbox.lo[1]);
    }
    x
}

fn check_grid(bbox: &BoxDomain, width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(
            "raster resolution must be positive".into(),
        ));
    }
    let axes = bbox.dim().min(2);
    if axes == 0 || (0..axes).any(|a| !(bbox.hi[a] > bbox.lo[a])) {
        return Err(Error::DegenerateBox);
    }
    Ok(())
}

/// Samples a field at every pixel center. `make` is called once per row so the
/// field may keep scratch state.
pub fn rasterize_with<M, F>(
    make: M,
    bbox: &BoxDomain,
    width: usize,
    height: usize,
    mode: ThresholdMode,
) -> Result<Raster>
where
    M: Fn() -> F + Sync,
    F: FnMut(&[f64]) -> f64,
{
    check_grid(bbox, width, height)?;
    let rows: Vec<Vec<f64>> = (0..height)
        .into_par_iter()
        .map(|r| {
            let mut field = make();
            (0..width)
                .map(|c| mode.apply(field(&pixel_center(bbox, width, height, r, c))))
                .collect()
        })
        .collect();
    Ok(Raster {
        width,
        height,
        bbox: bbox.clone(),
        mode,
        samples: rows.concat(),
    })
}

pub fn rasterize<F>(
    field: F,
    bbox: &BoxDomain,
    width: usize,
    height: usize,
    mode: ThresholdMode,
) -> Result<Raster>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    rasterize_with(|| &field, bbox, width, height, mode)
}

/// Scalar net output at each pixel.
pub fn rasterize_net(
    net: &ReluNet,
    bbox: &BoxDomain,
    width: usize,
    height: usize,
    mode: ThresholdMode,
) -> Result<Raster> {
    if net.input_dim() != bbox.dim() || net.output_dim() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "net maps {} -> {}, raster box has dimension {}",
            net.input_dim(),
            net.output_dim(),
            bbox.dim()
        )));
    }
    rasterize_with(
        || {
            let mut ev = net.evaluator();
            move |x: &[f64]| ev.run(x)[0]
        },
        bbox,
        width,
        height,
        mode,
    )
}

/// `{0, 1}` raster of a predicate.
pub fn rasterize_predicate<P>(
    pred: P,
    bbox: &BoxDomain,
    width: usize,
    height: usize,
) -> Result<Raster>
where
    P: Fn(&[f64]) -> bool + Sync,
{
    rasterize(
        |x| if pred(x) { 1.0 } else { -1.0 },
        bbox,
        width,
        height,
        ThresholdMode::Sign,
    )
}

/// Pixel-level disagreement between two rasters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RasterComparison {
    pub width: usize,
    pub height: usize,
    pub mismatches: usize,
    /// `(row, col)` of the first 100 mismatches in row-major order.
    pub first: Vec<(usize, usize)>,
    pub agreement: f64,
}

pub fn compare_rasters(a: &Raster, b: &Raster) -> Result<RasterComparison> {
    if a.width != b.width || a.height != b.height || a.bbox != b.bbox {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} over {:?} vs {}x{} over {:?}",
            a.width, a.height, a.bbox, b.width, b.height, b.bbox
        )));
    }
    let mut mismatches = 0;
    let mut first = Vec::new();
    for r in 0..a.height {
        for c in 0..a.width {
            if a.is_on(r, c) != b.is_on(r, c) {
                mismatches += 1;
                if first.len() < 100 {
                    first.push((r, c));
                }
            }
        }
    }
    let total = a.width * a.height;
    Ok(RasterComparison {
        width: a.width,
        height: a.height,
        mismatches,
        first,
        agreement: 1.0 - mismatches as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> BoxDomain {
        BoxDomain::cube(1, 0.0, 1.0)
    }

    #[test]
    fn cantor_first_iterate_pattern() {
        let c1 = crate::geometry::systems::cantor().first_iterate();
        let r = rasterize(|x| c1.indicator(x), &unit_box(), 8, 1, ThresholdMode::Sign).unwrap();
        assert_eq!(r.samples, vec![1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn constant_and_raw() {
        let r = rasterize(
            |_| 1.0,
            &BoxDomain::cube(2, 0.0, 1.0),
            4,
            3,
            ThresholdMode::Unit,
        )
        .unwrap();
        assert!(r.samples.iter().all(|&v| v == 1.0));
        let raw = rasterize(|x| x[0] - 7.0, &unit_box(), 2, 1, ThresholdMode::Raw).unwrap();
        assert_eq!(raw.samples, vec![0.25 - 7.0, 0.75 - 7.0]);
    }

    #[test]
    fn comparisons() {
        let b = BoxDomain::cube(2, 0.0, 1.0);
        let ones = rasterize(|_| 1.0, &b, 8, 8, ThresholdMode::Sign).unwrap();
        let zeros = rasterize(|_| -1.0, &b, 8, 8, ThresholdMode::Sign).unwrap();
        let same = compare_rasters(&ones, &ones).unwrap();
        assert_eq!((same.mismatches, same.agreement), (0, 1.0));
        assert_eq!(compare_rasters(&ones, &zeros).unwrap().mismatches, 64);
        let small = rasterize(|_| 1.0, &b, 4, 8, ThresholdMode::Sign).unwrap();
        assert!(matches!(
            compare_rasters(&ones, &small),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn row_zero_is_the_top() {
        let b = BoxDomain::cube(2, 0.0, 1.0);
        let r = rasterize(|x| x[1] - 0.5, &b, 1, 2, ThresholdMode::Sign).unwrap();
        assert_eq!(r.samples, vec![1.0, 0.0]);
    }

    #[test]
    fn file_formats() {
        let b = BoxDomain::cube(2, 0.0, 1.0);
        let r = rasterize(|x| x[0], &b, 2, 2, ThresholdMode::Unit).unwrap();
        assert_eq!(r.to_pgm(), "P2\n2 2\n255\n191 64\n191 64\n");
        assert_eq!(r.to_pbm(), "P1\n2 2\n0 1\n0 1\n");
    }

    #[test]
    fn degenerate_box() {
        let b = BoxDomain::cube(1, 1.0, 1.0);
        assert!(matches!(
            rasterize(|_| 0.0, &b, 2, 2, ThresholdMode::Raw),
            Err(Error::DegenerateBox)
        ));
    }
}
