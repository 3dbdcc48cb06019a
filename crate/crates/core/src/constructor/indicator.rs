use crate::error::Result;
use crate::geometry::{BoxDomain, ConvexPolytope, HalfSpace, PolytopeUnion};
use crate::network::{
    compose, gadget_vec_max, gadget_vec_min_above, split_many, AffineStage, ReluNet,
};

/// Which set an indicator describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    HalfSpace,
    Polytope,
    Union {
        parts: usize,
    },
    /// `C_k` for a compact system.
    Iterate {
        k: usize,
    },
    /// `U_k` for an open system, through the ramped variant.
    OpenIterate {
        k: usize,
        delta: f64,
    },
    /// Ramp-sharpened indicator with slope parameter `t`.
    Sharpened {
        t: f64,
    },
}

/// How to read the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `≥ 0` inside, `< 0` outside.
    SignInside,
    /// Values in `[0, 1]`, 1 inside.
    UnitInside,
}

/// A scalar-output net together with what it indicates.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorNet {
    pub net: ReluNet,
    pub target: Target,
    pub convention: Convention,
}

impl IndicatorNet {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.net.eval_scalar(x)
    }

    /// Membership read through the sign convention (unit nets threshold at 1/2).
    pub fn inside(&self, x: &[f64]) -> bool {
        let v = self.eval(x);
        match self.convention {
            Convention::SignInside => v >= 0.0,
            Convention::UnitInside => v >= 0.5,
        }
    }
}

fn stacked_halfspaces(hs: &[HalfSpace], domain: &BoxDomain) -> Result<ReluNet> {
    let rows: Vec<Vec<f64>> = hs.iter().map(|h| h.normal().to_vec()).collect();
    let bias = hs.iter().map(HalfSpace::offset).collect();
    ReluNet::new(vec![AffineStage::from_rows(&rows, bias)?], domain.clone())
}

/// Depth-0 net `x ↦ ⟨a, x⟩ + b`.
pub fn build_halfspace_indicator(h: &HalfSpace, domain: &BoxDomain) -> Result<IndicatorNet> {
    Ok(IndicatorNet {
        net: stacked_halfspaces(std::slice::from_ref(h), domain)?,
        target: Target::HalfSpace,
        convention: Convention::SignInside,
    })
}

/// Minimum over the facet functionals: width `m`, depth `⌈log₂ m⌉`.
pub fn build_polytope_indicator(p: &ConvexPolytope, domain: &BoxDomain) -> Result<IndicatorNet> {
    polytope_indicator_above(p, domain, f64::NEG_INFINITY)
}

fn polytope_indicator_above(
    p: &ConvexPolytope,
    domain: &BoxDomain,
    floor: f64,
) -> Result<IndicatorNet> {
    let h = stacked_halfspaces(p.halfspaces(), domain)?;
    let (lo, hi) = h.output_interval();
    let min = gadget_vec_min_above(p.facet_count(), &BoxDomain::new(lo, hi)?, floor)?;
    Ok(IndicatorNet {
        net: compose(&min, &h)?,
        target: Target::Polytope,
        convention: Convention::SignInside,
    })
}

/// Maximum over the part indicators: width `m·p`, depth `⌈log₂ m⌉ + ⌈log₂ p⌉`.
pub fn build_union_indicator(c: &PolytopeUnion, domain: &BoxDomain) -> Result<IndicatorNet> {
    build_union_indicator_above(c, domain, f64::NEG_INFINITY)
}

/// [`build_union_indicator`] that is exact where the value is `≥ floor` and stays
/// below `floor` elsewhere. Carry lanes then never reach far below `floor`.
pub fn build_union_indicator_above(
    c: &PolytopeUnion,
    domain: &BoxDomain,
    floor: f64,
) -> Result<IndicatorNet> {
    let parts: Vec<ReluNet> = c
        .parts()
        .iter()
        .map(|p| polytope_indicator_above(p, domain, floor).map(|i| i.net))
        .collect::<Result<_>>()?;
    let refs: Vec<&ReluNet> = parts.iter().collect();
    let stacked = split_many(&refs)?;
    let (lo, hi) = stacked.output_interval();
    let max = gadget_vec_max(c.len(), &BoxDomain::new(lo, hi)?)?;
    Ok(IndicatorNet {
        net: compose(&max, &stacked)?,
        target: Target::Union { parts: c.len() },
        convention: Convention::SignInside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::systems::cantor;

    fn k() -> BoxDomain {
        BoxDomain::cube(1, -0.5, 1.5)
    }

    #[test]
    fn halfspace_values() {
        let h = HalfSpace::new(vec![-1.0], 1.0 / 3.0).unwrap();
        let n = build_halfspace_indicator(&h, &k()).unwrap();
        assert!((n.eval(&[1.0]) + 2.0 / 3.0).abs() < 1e-15);
        assert_eq!((n.net.width(), n.net.depth()), (1, 0));
    }

    #[test]
    fn interval_indicator() {
        let p = ConvexPolytope::from_box(&BoxDomain::cube(1, 0.0, 1.0)).unwrap();
        let n = build_polytope_indicator(&p, &k()).unwrap();
        assert_eq!(n.eval(&[0.5]), 0.5);
        assert!((n.eval(&[1.2]) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn cantor_first_iterate_indicator() {
        let c1 = cantor().first_iterate();
        let n = build_union_indicator(&c1, &k()).unwrap();
        assert!((n.eval(&[0.5]) + 1.0 / 6.0).abs() < 1e-15);
        // on the boundary the carried lane rounds, so only the magnitude is pinned
        assert!(n.eval(&[0.0]).abs() < 1e-14);
        assert_eq!((n.net.width(), n.net.depth()), (4, 2));
    }
}
