use super::indicator::{Convention, IndicatorNet, Target};
use super::iterate::{assemble, Layout, PhiK};
use super::tmap::{map_constants, RampPlacement};
use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, IfsSystem, Mode};
use crate::network::{compose, gadget_ramp};

/// `ψ_δ` together with the intermediate `φ^δ_k`.
#[derive(Debug, Clone)]
pub struct PsiDelta {
    pub indicator: IndicatorNet,
    pub phi: PhiK,
    pub delta: f64,
    /// Reference point placed well outside the first iterate.
    pub origin: Vec<f64>,
    /// `φ^δ_k` at `origin`; always negative.
    pub origin_value: f64,
}

/// Default `δ`: a thousandth of the seed diameter.
pub fn default_delta(sys: &IfsSystem) -> f64 {
    1e-3 * sys.seed().bounding_box().diameter()
}

/// Point `centroid(U_1) + 2·diam·e_1`, outside the closure of the first iterate.
pub fn reference_origin(sys: &IfsSystem) -> Vec<f64> {
    let c1 = sys.first_iterate();
    let bb = c1.bounding_box();
    let n = c1.vertices().count() as f64;
    let mut o = vec![0.0; sys.dim()];
    for v in c1.vertices() {
        for (oc, vc) in o.iter_mut().zip(v) {
            *oc += vc / n;
        }
    }
    o[0] += 2.0 * bb.diameter();
    o
}

/// Indicator of the open iterate `U_k` for a just-touching system: selectors
/// ramp inside each image over `φ_i ∈ [0, δ]`, the running minimum is taken as
/// usual, and the result passes through `f_{0,δ}` so the output lies in `[0, 1]`.
pub fn build_psi_delta(sys: &IfsSystem, k: usize, delta: f64, layout: Layout) -> Result<PsiDelta> {
    if sys.mode() != Mode::JustTouching {
        return Err(Error::ModeMismatch(
            "system is in compact mode; use the compact construction".into(),
        ));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::NonPositiveDelta { delta });
    }
    let consts = map_constants(sys, Some(delta))?;
    let phi = assemble(sys, k, &consts, RampPlacement::Inside, layout)?;
    let origin = reference_origin(sys);
    let origin_value = phi.recurrent.evaluate(&origin);
    if origin_value >= 0.0 {
        return Err(Error::OriginInsideU1 {
            value: origin_value,
        });
    }
    let ramp = gadget_ramp(0.0, delta, &BoxDomain::cube(1, 0.0, 0.0))?;
    let net = compose(&ramp, &phi.indicator.net)?;
    Ok(PsiDelta {
        indicator: IndicatorNet {
            net,
            target: Target::OpenIterate { k, delta },
            convention: Convention::UnitInside,
        },
        phi,
        delta,
        origin,
        origin_value,
    })
}
