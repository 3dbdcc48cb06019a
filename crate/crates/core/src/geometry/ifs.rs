use super::affine::AffineMap;
use super::lp::lp_max_min_affine;
use super::polytope::PolytopeUnion;
use super::EPS_GEOM;
use crate::error::{Error, Result};

/// Whether the seed is a nice compact set or a nice open set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Images are pairwise disjoint closed sets.
    TotallyDisconnected,
    /// Images may share boundary points; the seed is read as an open set.
    JustTouching,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TotallyDisconnected => "compact",
            Mode::JustTouching => "open",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "compact" => Some(Mode::TotallyDisconnected),
            "open" => Some(Mode::JustTouching),
            _ => None,
        }
    }
}

/// `J` invertible contractive affine maps and a polytope-union seed.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    maps: Vec<AffineMap>,
    inverses: Vec<AffineMap>,
    seed: PolytopeUnion,
    mode: Mode,
}

impl IfsSystem {
    /// Checks structure (map count, dimensions, invertibility, contractivity).
    /// Niceness of the seed is checked separately by [`verify_nice`].
    pub fn new(maps: Vec<AffineMap>, seed: PolytopeUnion, mode: Mode) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "need at least 2 maps, got {}",
                maps.len()
            )));
        }
        let d = seed.dim();
        for f in &maps {
            if f.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "IFS map",
                    expected: d,
                    found: f.dim(),
                });
            }
        }
        let inverses = maps
            .iter()
            .map(AffineMap::invert)
            .collect::<Result<Vec<_>>>()?;
        for (j, f) in maps.iter().enumerate() {
            let norm = f.operator_norm();
            if norm >= 1.0 {
                return Err(Error::NotContractive { map: j + 1, norm });
            }
        }
        Ok(Self {
            maps,
            inverses,
            seed,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.seed.dim()
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn inverses(&self) -> &[AffineMap] {
        &self.inverses
    }

    pub fn seed(&self) -> &PolytopeUnion {
        &self.seed
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    /// `p_0`.
    pub fn seed_parts(&self) -> usize {
        self.seed.len()
    }

    /// `m`.
    pub fn max_facets(&self) -> usize {
        self.seed.max_facets()
    }

    /// `f_i(seed)` with `i` zero-based.
    pub fn image(&self, i: usize) -> PolytopeUnion {
        self.seed.map(&self.maps[i]).expect("maps are invertible")
    }

    /// `C_1 = ∪_j f_j(seed)` as one union with `J·p_0` parts, map-major.
    pub fn first_iterate(&self) -> PolytopeUnion {
        let parts = (0..self.num_maps())
            .flat_map(|i| self.image(i).parts().to_vec())
            .collect();
        PolytopeUnion::new(parts).expect("nonempty")
    }

    /// Largest operator norm over the maps.
    pub fn contraction_factor(&self) -> f64 {
        self.maps
            .iter()
            .map(AffineMap::operator_norm)
            .fold(0.0, f64::max)
    }
}

/// Evidence that the seed is nice.
#[derive(Debug, Clone, PartialEq)]
pub struct NiceCertificate {
    /// `containment[j][i]`: seed part holding `f_j(P_i)`.
    pub containment: Vec<Vec<usize>>,
    /// `separation[i][j]`: `−max_{x ∈ f_j(seed)} φ_{f_i(seed)}(x)`; `None` on the diagonal.
    pub separation: Vec<Vec<Option<f64>>>,
    pub mode: Mode,
}

impl NiceCertificate {
    /// Smallest off-diagonal margin.
    pub fn min_margin(&self) -> f64 {
        self.separation
            .iter()
            .flatten()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Certifies containment and pairwise separation of the seed images.
/// Map and part indices inside errors are one-based.
pub fn verify_nice(sys: &IfsSystem) -> Result<NiceCertificate> {
    let seed = sys.seed();
    let j_count = sys.num_maps();
    let images: Vec<PolytopeUnion> = (0..j_count).map(|i| sys.image(i)).collect();

    let mut containment = Vec::with_capacity(j_count);
    for (j, img) in images.iter().enumerate() {
        let mut row = Vec::with_capacity(img.len());
        for (i, part) in img.parts().iter().enumerate() {
            let host = seed
                .parts()
                .iter()
                .position(|q| part.vertices().iter().all(|v| q.contains(v, EPS_GEOM)));
            match host {
                Some(q) => row.push(q),
                None => {
                    let witness = part
                        .vertices()
                        .iter()
                        .max_by(|a, b| outside_depth(seed, a).total_cmp(&outside_depth(seed, b)))
                        .cloned()
                        .unwrap_or_default();
                    return Err(Error::ContainmentViolation {
                        map: j + 1,
                        part: i + 1,
                        witness,
                    });
                }
            }
        }
        containment.push(row);
    }

    let mut separation = vec![vec![None; j_count]; j_count];
    for i in 0..j_count {
        for j in 0..j_count {
            if i == j {
                continue;
            }
            let (value, witness) = max_indicator_over(&images[i], &images[j])?;
            let margin = -value;
            separation[i][j] = Some(margin);
            let ok = match sys.mode() {
                Mode::TotallyDisconnected => margin > EPS_GEOM,
                Mode::JustTouching => margin >= -EPS_GEOM,
            };
            if !ok {
                let (first, second) = if i < j { (i, j) } else { (j, i) };
                return Err(Error::SeparationViolation {
                    first: first + 1,
                    second: second + 1,
                    margin,
                    witness,
                });
            }
        }
    }
    Ok(NiceCertificate {
        containment,
        separation,
        mode: sys.mode(),
    })
}

/// How far a point is outside the closest seed part.
fn outside_depth(seed: &PolytopeUnion, v: &[f64]) -> f64 {
    seed.parts()
        .iter()
        .map(|p| -p.normalized_indicator(v))
        .fold(f64::INFINITY, f64::min)
}

/// `max_{x ∈ Q} φ_P(x)` over all parts of both unions, with a maximizer.
fn max_indicator_over(p: &PolytopeUnion, q: &PolytopeUnion) -> Result<(f64, Vec<f64>)> {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for pp in p.parts() {
        for qq in q.parts() {
            let s = lp_max_min_affine(pp.halfspaces(), qq)?;
            if s.value > best.0 {
                best = (s.value, s.point);
            }
        }
    }
    Ok(best)
}

/// `M_i = max |f_i⁻¹(v)_c|` over seed vertices `v` and coordinates `c` (zero-based `i`).
pub fn compute_inverse_bound(sys: &IfsSystem, i: usize) -> Result<f64> {
    let inv = sys
        .inverses()
        .get(i)
        .ok_or_else(|| Error::InvalidParameter(format!("map index {i} out of range")))?;
    Ok(sys
        .seed()
        .vertices()
        .flat_map(|v| inv.apply_unchecked(v))
        .map(f64::abs)
        .fold(0.0, f64::max))
}

/// `δ_i = −max_{x ∈ ∪_{j≠i} f_j(seed)} φ_{f_i(seed)}(x)` (zero-based `i`).
pub fn compute_separation(sys: &IfsSystem, i: usize) -> Result<f64> {
    if i >= sys.num_maps() {
        return Err(Error::InvalidParameter(format!(
            "map index {i} out of range"
        )));
    }
    let own = sys.image(i);
    let mut worst = f64::NEG_INFINITY;
    for j in (0..sys.num_maps()).filter(|&j| j != i) {
        worst = worst.max(max_indicator_over(&own, &sys.image(j))?.0);
    }
    let delta = -worst;
    if delta <= EPS_GEOM {
        return Err(Error::NonPositiveSeparation { map: i + 1, delta });
    }
    Ok(delta)
}

/// `max_x φ_{f_i(seed)}(x)` over all of space: each part's indicator peaks inside that part.
pub fn image_indicator_max(sys: &IfsSystem, i: usize) -> Result<f64> {
    let img = sys.image(i);
    let mut best = f64::NEG_INFINITY;
    for p in img.parts() {
        best = best.max(lp_max_min_affine(p.halfspaces(), p)?.value);
    }
    Ok(best)
}
