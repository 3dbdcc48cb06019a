use super::indicator::{Convention, IndicatorNet, Target};
use crate::error::{Error, Result};
use crate::geometry::BoxDomain;
use crate::network::{compose, gadget_ramp, AffineStage, ReluNet};

/// `ψ_t(x) = f_{−2,−1}(t·φ(x))`: 1 where `φ ≥ 0`, 0 where `φ ≤ −2/t`.
/// The value of `φ` is scaled, not its argument.
pub fn sharpen(phi: &IndicatorNet, t: f64) -> Result<IndicatorNet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sharpening factor must be positive, got {t}"
        )));
    }
    if phi.net.output_dim() != 1 {
        return Err(Error::DimensionMismatch {
            context: "sharpen",
            expected: 1,
            found: phi.net.output_dim(),
        });
    }
    let scale = ReluNet::new(
        vec![AffineStage::from_rows(&[vec![t]], vec![0.0])?],
        BoxDomain::cube(1, 0.0, 0.0),
    )?;
    let ramp = gadget_ramp(-2.0, -1.0, &BoxDomain::cube(1, 0.0, 0.0))?;
    let net = compose(&ramp, &compose(&scale, &phi.net)?)?;
    Ok(IndicatorNet {
        net,
        target: Target::Sharpened { t },
        convention: Convention::UnitInside,
    })
}
