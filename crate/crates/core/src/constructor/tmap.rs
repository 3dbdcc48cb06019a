use super::indicator::build_union_indicator_above;
use crate::error::{Error, Result};
use crate::geometry::{
    compute_inverse_bound, compute_separation, image_indicator_max, BoxDomain, IfsSystem,
};
use crate::network::{
    add_many, compose_chain, gadget_clamp, gadget_vec_scalar_min_above, split, AffineStage, ReluNet,
};

/// Where the ramp of the selector sits relative to the image boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampPlacement {
    /// Ramp over `φ_i ∈ [−δ, 0]`: exact on the closed image, zero on the other images.
    Outside,
    /// Ramp over `φ_i ∈ [0, δ]`: zero on and outside the image boundary.
    Inside,
}

impl RampPlacement {
    /// Offset added to the indicator before scaling by `4M/δ`.
    fn shift(self, delta: f64) -> f64 {
        match self {
            RampPlacement::Outside => delta / 2.0,
            RampPlacement::Inside => -delta / 2.0,
        }
    }
}

/// Per-map constants of the selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapConstants {
    /// Bound on `|f_i⁻¹|` over the seed.
    pub m: f64,
    pub delta: f64,
    /// Largest value of the image indicator anywhere.
    pub phi_max: f64,
}

impl MapConstants {
    /// Supremum of the scaled indicator lane `y_2`.
    pub fn y2_max(&self, placement: RampPlacement) -> f64 {
        4.0 * self.m / self.delta * (self.phi_max + placement.shift(self.delta))
    }
}

/// Computes `M_i`, `δ_i` (or the supplied `δ`) and the indicator maxima.
pub fn map_constants(sys: &IfsSystem, delta: Option<f64>) -> Result<Vec<MapConstants>> {
    (0..sys.num_maps())
        .map(|i| {
            let delta = match delta {
                Some(d) if d > 0.0 && d.is_finite() => d,
                Some(d) => return Err(Error::NonPositiveDelta { delta: d }),
                None => compute_separation(sys, i)?,
            };
            Ok(MapConstants {
                m: compute_inverse_bound(sys, i)?,
                delta,
                phi_max: image_indicator_max(sys, i)?,
            })
        })
        .collect()
}

/// Box containing `T(x)` for every `x ∈ ℝ^d`: each selector lands in `[−M_i, max(0, sup y_2)]`.
pub fn t_output_box(consts: &[MapConstants], dim: usize, placement: RampPlacement) -> BoxDomain {
    let lo: f64 = consts.iter().map(|c| -c.m).sum();
    let hi: f64 = consts.iter().map(|c| c.y2_max(placement).max(0.0)).sum();
    BoxDomain::cube(dim, lo, hi)
}

/// The selector `T_i`: `f_i⁻¹(x)` on `f_i(seed)` and `0` on the other images.
/// `i` is zero-based; `domain` is where the net must be exact.
pub fn build_ti(
    sys: &IfsSystem,
    i: usize,
    consts: &MapConstants,
    placement: RampPlacement,
    domain: &BoxDomain,
) -> Result<ReluNet> {
    let d = sys.dim();
    let (m, delta) = (consts.m, consts.delta);
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta { delta });
    }
    let inv = &sys.inverses()[i];
    let inv_net = ReluNet::affine(
        &inv.rows(),
        inv.offset().iter().copied().collect(),
        domain.clone(),
    )?;
    // below −δ the gate sends y_2 under −2M with either placement, so φ_i is
    // only needed exactly above that
    let phi = build_union_indicator_above(&sys.image(i), domain, -delta)?.net;
    let l1 = split(&inv_net, &phi)?;

    let s = 4.0 * m / delta;
    let mut rows = vec![vec![0.0; d + 1]; d + 1];
    for (c, row) in rows.iter_mut().enumerate().take(d) {
        row[c] = 1.0;
    }
    rows[d][d] = s;
    let mut bias = vec![0.0; d + 1];
    bias[d] = s * placement.shift(delta);
    let l2 = ReluNet::new(vec![AffineStage::from_rows(&rows, bias)?], dummy(d + 1))?;

    let l12 = compose_chain(&[&l1, &l2])?;
    let (lo, hi) = l12.output_interval();
    // the clamp zeroes everything at or below −2M, so ℓ_3 only has to be exact above it
    let l3 = gadget_vec_scalar_min_above(d, &BoxDomain::new(lo, hi)?, -2.0 * m)?;
    let l123 = compose_chain(&[&l12, &l3])?;
    let (lo, hi) = l123.output_interval();
    let l4 = gadget_clamp(d, m, &BoxDomain::new(lo, hi)?)?;
    compose_chain(&[&l123, &l4])
}

fn dummy(n: usize) -> BoxDomain {
    BoxDomain::cube(n, 0.0, 0.0)
}

/// `T = Σ_i T_i` with its parts and constants.
#[derive(Debug, Clone, PartialEq)]
pub struct TNetBundle {
    pub t_net: ReluNet,
    pub per_map: Vec<ReluNet>,
    pub constants: Vec<MapConstants>,
    pub placement: RampPlacement,
}

impl TNetBundle {
    pub fn output_box(&self) -> BoxDomain {
        t_output_box(&self.constants, self.t_net.output_dim(), self.placement)
    }
}

/// Builds every selector on `domain` and sums them.
pub fn build_t(
    sys: &IfsSystem,
    consts: &[MapConstants],
    placement: RampPlacement,
    domain: &BoxDomain,
) -> Result<TNetBundle> {
    let per_map: Vec<ReluNet> = (0..sys.num_maps())
        .map(|i| build_ti(sys, i, &consts[i], placement, domain))
        .collect::<Result<_>>()?;
    let refs: Vec<&ReluNet> = per_map.iter().collect();
    Ok(TNetBundle {
        t_net: add_many(&refs)?,
        per_map,
        constants: consts.to_vec(),
        placement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::systems::cantor;

    fn cantor_t() -> TNetBundle {
        let sys = cantor();
        let consts = map_constants(&sys, None).unwrap();
        build_t(
            &sys,
            &consts,
            RampPlacement::Outside,
            &BoxDomain::cube(1, -0.5, 1.5),
        )
        .unwrap()
    }

    #[test]
    fn cantor_constants() {
        let c = map_constants(&cantor(), None).unwrap();
        assert!((c[0].m - 3.0).abs() < 1e-12 && (c[1].m - 2.0).abs() < 1e-12);
        assert!((c[0].delta - 1.0 / 3.0).abs() < 1e-12);
        assert!((c[1].delta - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cantor_selectors_by_hand() {
        let t = cantor_t();
        assert!((t.per_map[0].eval_scalar(&[1.0 / 9.0]) - 1.0 / 3.0).abs() < 1e-12);
        assert!(t.per_map[0].eval_scalar(&[1.0]).abs() < 1e-12);
        assert!(t.t_net.eval_scalar(&[2.0 / 3.0]).abs() < 1e-12);
        assert!((t.t_net.eval_scalar(&[1.0 / 3.0]) - 1.0).abs() < 1e-12);
        // word (1, 2) on the vertex 1: 1/3 ↦ 1 ↦ 1
        let once = t.t_net.eval_scalar(&[1.0 / 3.0]);
        assert!((t.t_net.eval_scalar(&[once]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cantor_t_width_and_depth() {
        let t = cantor_t();
        // W_T = J max{d + m p0, 2d} = 6 and L_T = 2 + 1 + 0 = 3
        assert_eq!(t.t_net.width(), 6);
        assert_eq!(t.t_net.depth(), 3);
    }

    #[test]
    fn rejects_nonpositive_delta() {
        assert!(matches!(
            map_constants(&cantor(), Some(0.0)),
            Err(Error::NonPositiveDelta { .. })
        ));
    }
}
