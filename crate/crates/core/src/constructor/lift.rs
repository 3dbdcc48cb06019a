use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{verify_nice, AffineMap, IfsSystem, Mode, PolytopeUnion};

/// Lifts to `ℝ^{d+1}` with `f̂_j(x, t) = (f_j(x), t/(3(J+1)) + j/(J+1))` (one-based `j`)
/// and seed `seed × [0, 1]`. The result is certified in compact mode.
pub fn lift_ifs(sys: &IfsSystem) -> Result<IfsSystem> {
    let j_count = sys.num_maps();
    if j_count < 2 {
        return Err(Error::InvalidSystem("lifting needs at least 2 maps".into()));
    }
    let d = sys.dim();
    let band = 1.0 / (j_count as f64 + 1.0);
    let maps = sys
        .maps()
        .iter()
        .enumerate()
        .map(|(idx, f)| {
            let mut a = DMatrix::zeros(d + 1, d + 1);
            a.view_mut((0, 0), (d, d)).copy_from(f.matrix());
            a[(d, d)] = band / 3.0;
            let mut b = DVector::zeros(d + 1);
            b.rows_mut(0, d).copy_from(f.offset());
            b[d] = (idx + 1) as f64 * band;
            AffineMap::new(a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    let parts = sys
        .seed()
        .parts()
        .iter()
        .map(|p| p.extrude(0.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let lifted = IfsSystem::new(maps, PolytopeUnion::new(parts)?, Mode::TotallyDisconnected)?;
    verify_nice(&lifted)?;
    Ok(lifted)
}
