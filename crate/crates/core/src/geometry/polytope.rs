use nalgebra::DVector;

use super::affine::AffineMap;
use super::bbox::BoxDomain;
use super::EPS_GEOM;
use crate::error::{Error, Result};

/// Closed half-space `{x : ⟨normal, x⟩ + offset ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() || normal.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidPolytope(
                "half-space normal must be nonzero".into(),
            ));
        }
        if normal.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidPolytope(
                "non-finite half-space coefficient".into(),
            ));
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Indicator value `⟨normal, x⟩ + offset`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(x)
            .fold(self.offset, |acc, (a, v)| acc + a * v)
    }

    pub fn norm(&self) -> f64 {
        self.normal.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Signed distance to the bounding hyperplane (positive inside).
    pub fn normalized_value(&self, x: &[f64]) -> f64 {
        self.value(x) / self.norm()
    }

    /// Membership with a tolerance measured in distance units.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normalized_value(x) >= -tol
    }

    /// Rewrites the half-space in the coordinates `y = f(x)`: `⟨a, f⁻¹(y)⟩ + b ≥ 0`,
    /// rescaled so the normal keeps its original length.
    pub fn pull_back(&self, f_inv: &AffineMap) -> Self {
        let g = f_inv.matrix();
        let n = DVector::from_column_slice(&self.normal);
        let new_normal = g.transpose() * &n;
        let new_offset = n.dot(f_inv.offset()) + self.offset;
        let scale = self.norm() / new_normal.norm();
        Self {
            normal: new_normal.iter().map(|v| v * scale).collect(),
            offset: new_offset * scale,
        }
    }

    /// Same set, scaled so that `‖normal‖ = 1`.
    pub fn unit(&self) -> Self {
        let s = 1.0 / self.norm();
        Self {
            normal: self.normal.iter().map(|v| v * s).collect(),
            offset: self.offset * s,
        }
    }
}

/// Bounded convex polytope in both half-space and vertex form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolytope {
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Vec<f64>>,
}

impl ConvexPolytope {
    pub fn new(halfspaces: Vec<HalfSpace>, vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = match halfspaces.first() {
            Some(h) => h.dim(),
            None => return Err(Error::InvalidPolytope("no half-spaces".into())),
        };
        if vertices.is_empty() {
            return Err(Error::InvalidPolytope("no vertices".into()));
        }
        if halfspaces.iter().any(|h| h.dim() != d) || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                context: "polytope",
                expected: d,
                found: vertices
                    .iter()
                    .map(Vec::len)
                    .chain(halfspaces.iter().map(HalfSpace::dim))
                    .find(|&n| n != d)
                    .unwrap_or(d),
            });
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolytope("non-finite vertex".into()));
        }
        for (vi, v) in vertices.iter().enumerate() {
            let scale = 1.0 + v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let tol = EPS_GEOM * scale;
            let mut tight = 0;
            for (hi, h) in halfspaces.iter().enumerate() {
                let s = h.normalized_value(v);
                if s < -tol {
                    return Err(Error::InvalidPolytope(format!(
                        "vertex {vi} violates half-space {hi} by {:e}",
                        -s
                    )));
                }
                if s.abs() <= tol {
                    tight += 1;
                }
            }
            if tight < d {
                return Err(Error::InvalidPolytope(format!(
                    "vertex {vi} is tight on {tight} half-spaces, need at least {d}"
                )));
            }
        }
        Ok(Self {
            halfspaces,
            vertices,
        })
    }

    /// Axis-aligned box polytope.
    pub fn from_box(b: &BoxDomain) -> Result<Self> {
        let d = b.dim();
        let mut hs = Vec::with_capacity(2 * d);
        for c in 0..d {
            let mut n = vec![0.0; d];
            n[c] = 1.0;
            hs.push(HalfSpace::new(n.clone(), -b.lo[c])?);
            n[c] = -1.0;
            hs.push(HalfSpace::new(n, b.hi[c])?);
        }
        let vertices = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|c| if mask >> c & 1 == 1 { b.hi[c] } else { b.lo[c] })
                    .collect()
            })
            .collect();
        Self::new(hs, vertices)
    }

    /// Polygon from counter-clockwise vertices; edges become unit-normal half-spaces.
    pub fn polygon_ccw(vertices: &[[f64; 2]]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolytope(
                "polygon needs at least 3 vertices".into(),
            ));
        }
        let mut hs = Vec::with_capacity(n);
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            // inward normal of a ccw edge is the left normal
            let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
            let len = (ex * ex + ey * ey).sqrt();
            let normal = vec![-ey / len, ex / len];
            let offset = -(normal[0] * p[0] + normal[1] * p[1]);
            hs.push(HalfSpace::new(normal, offset)?);
        }
        Self::new(hs, vertices.iter().map(|v| v.to_vec()).collect())
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn facet_count(&self) -> usize {
        self.halfspaces.len()
    }

    /// `min_h φ_h(x)`, the polytope's CPwL indicator evaluated directly.
    pub fn indicator(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.value(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `min_h` of signed facet distances.
    pub fn normalized_indicator(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.normalized_value(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(x, tol))
    }

    /// Strict interior membership: every facet distance exceeds `tol`.
    pub fn contains_open(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.normalized_value(x) > tol)
    }

    pub fn bounding_box(&self) -> BoxDomain {
        BoxDomain::around(self.vertices.iter().map(Vec::as_slice)).expect("nonempty vertex list")
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.vertices.len() as f64;
        let mut c = vec![0.0; self.dim()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi / n;
            }
        }
        c
    }

    /// Image under an invertible affine map.
    pub fn map(&self, f: &AffineMap) -> Result<Self> {
        map_polytope(f, self)
    }

    /// Cartesian product with the interval `[lo, hi]` on a new last axis.
    pub fn extrude(&self, lo: f64, hi: f64) -> Result<Self> {
        let d = self.dim();
        let mut hs: Vec<HalfSpace> = self
            .halfspaces
            .iter()
            .map(|h| {
                let mut n = h.normal.clone();
                n.push(0.0);
                HalfSpace::new(n, h.offset)
            })
            .collect::<Result<_>>()?;
        let mut n = vec![0.0; d + 1];
        n[d] = 1.0;
        hs.push(HalfSpace::new(n.clone(), -lo)?);
        n[d] = -1.0;
        hs.push(HalfSpace::new(n, hi)?);
        let vertices = [lo, hi]
            .iter()
            .flat_map(|t| {
                self.vertices.iter().map(move |v| {
                    let mut w = v.clone();
                    w.push(*t);
                    w
                })
            })
            .collect();
        Self::new(hs, vertices)
    }
}

/// `f(P)`: vertices pushed forward, half-spaces pulled back through `f⁻¹`.
pub fn map_polytope(f: &AffineMap, p: &ConvexPolytope) -> Result<ConvexPolytope> {
    if f.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "map_polytope",
            expected: p.dim(),
            found: f.dim(),
        });
    }
    let inv = f.invert()?;
    Ok(ConvexPolytope {
        halfspaces: p.halfspaces.iter().map(|h| h.pull_back(&inv)).collect(),
        vertices: p.vertices.iter().map(|v| f.apply_unchecked(v)).collect(),
    })
}

/// Finite union of convex polytopes.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeUnion {
    parts: Vec<ConvexPolytope>,
}

impl PolytopeUnion {
    pub fn new(parts: Vec<ConvexPolytope>) -> Result<Self> {
        let d = parts
            .first()
            .ok_or_else(|| Error::InvalidPolytope("union needs at least one part".into()))?
            .dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                context: "polytope union",
                expected: d,
                found: p.dim(),
            });
        }
        Ok(Self { parts })
    }

    pub fn single(p: ConvexPolytope) -> Self {
        Self { parts: vec![p] }
    }

    pub fn parts(&self) -> &[ConvexPolytope] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    /// Max half-space count over parts (`m`).
    pub fn max_facets(&self) -> usize {
        self.parts
            .iter()
            .map(ConvexPolytope::facet_count)
            .max()
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x, tol))
    }

    pub fn contains_open(&self, x: &[f64], tol: f64) -> bool {
        self.parts.iter().any(|p| p.contains_open(x, tol))
    }

    /// `max_parts min_facets φ`, evaluated directly.
    pub fn indicator(&self, x: &[f64]) -> f64 {
        self.parts
            .iter()
            .map(|p| p.indicator(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn bounding_box(&self) -> BoxDomain {
        BoxDomain::around(
            self.parts
                .iter()
                .flat_map(|p| p.vertices().iter().map(Vec::as_slice)),
        )
        .expect("nonempty union")
    }

    pub fn map(&self, f: &AffineMap) -> Result<Self> {
        Ok(Self {
            parts: self
                .parts
                .iter()
                .map(|p| map_polytope(f, p))
                .collect::<Result<_>>()?,
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.parts
            .iter()
            .flat_map(|p| p.vertices().iter().map(Vec::as_slice))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval() -> ConvexPolytope {
        ConvexPolytope::from_box(&BoxDomain::cube(1, 0.0, 1.0)).unwrap()
    }

    #[test]
    fn cantor_image_halfspaces_rescale() {
        let f1 = AffineMap::scaling(1.0 / 3.0, &[0.0]);
        let img = unit_interval().map(&f1).unwrap();
        let hs = img.halfspaces();
        assert!((hs[0].normal()[0] - 1.0).abs() < 1e-15 && hs[0].offset().abs() < 1e-15);
        assert!((hs[1].normal()[0] + 1.0).abs() < 1e-15);
        assert!((hs[1].offset() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(img.vertices().len(), 2);
        assert!((img.vertices()[1][0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_map_preserves_polytope() {
        let p = ConvexPolytope::polygon_ccw(&[[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        let q = p.map(&AffineMap::identity(2)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn sierpinski_first_image_vertices() {
        let h = 3f64.sqrt() / 2.0;
        let v = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
        let tri = ConvexPolytope::polygon_ccw(&v).unwrap();
        let f1 = AffineMap::scaling(0.5, &[0.0, 0.0]);
        let img = tri.map(&f1).unwrap();
        let expect = [[0.0, 0.0], [0.5, 0.0], [0.25, h / 2.0]];
        for (got, want) in img.vertices().iter().zip(expect) {
            assert!((got[0] - want[0]).abs() < 1e-15 && (got[1] - want[1]).abs() < 1e-15);
        }
        // every mapped vertex is tight on two mapped facets
        for vtx in img.vertices() {
            let tight = img
                .halfspaces()
                .iter()
                .filter(|hs| hs.value(vtx).abs() < 1e-12)
                .count();
            assert_eq!(tight, 2);
        }
    }

    #[test]
    fn rejects_vertex_outside() {
        let hs = vec![
            HalfSpace::new(vec![1.0], 0.0).unwrap(),
            HalfSpace::new(vec![-1.0], 1.0).unwrap(),
        ];
        assert!(ConvexPolytope::new(hs, vec![vec![0.0], vec![2.0]]).is_err());
    }

    #[test]
    fn rejects_zero_normal() {
        assert!(HalfSpace::new(vec![0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn extrude_adds_two_facets() {
        let p = unit_interval().extrude(0.0, 1.0).unwrap();
        assert_eq!(p.facet_count(), 4);
        assert_eq!(p.vertices().len(), 4);
        assert!(p.contains(&[0.5, 0.5], 0.0));
        assert!(!p.contains(&[0.5, 1.5], 1e-9));
    }
}
