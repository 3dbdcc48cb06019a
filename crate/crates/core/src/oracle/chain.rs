use super::words::MEMBER_TOL;
use crate::error::{Error, Result};
use crate::geometry::{IfsSystem, Mode};

/// Membership by following the orbit: `x ∈ C_k` iff `x, Tx, …, T^{k-1}x` all lie in `C_1`,
/// where `T` inverts whichever map's image holds the current point.
///
/// Fails with `AmbiguousBranch` if two images both claim a point.
pub fn member_chain(sys: &IfsSystem, k: usize, x: &[f64]) -> Result<bool> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "member_chain",
            expected: sys.dim(),
            found: x.len(),
        });
    }
    if sys.mode() != Mode::TotallyDisconnected {
        return Err(Error::ModeMismatch(
            "the orbit chain needs disjoint images".into(),
        ));
    }
    let inside = |u: &crate::geometry::PolytopeUnion, p: &[f64]| u.contains(p, MEMBER_TOL);
    if k == 0 {
        return Ok(inside(sys.seed(), x));
    }
    let images: Vec<_> = (0..sys.num_maps()).map(|i| sys.image(i)).collect();
    let mut p = x.to_vec();
    for _ in 0..k {
        let mut hit = None;
        for (i, img) in images.iter().enumerate() {
            if inside(img, &p) {
                if hit.is_some() {
                    return Err(Error::AmbiguousBranch { point: p });
                }
                hit = Some(i);
            }
        }
        match hit {
            Some(i) => p = sys.inverses()[i].apply(&p)?,
            None => return Ok(false),
        }
    }
    Ok(true)
}
