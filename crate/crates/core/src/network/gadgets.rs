//! Min/max gadgets, clamps and ramps as explicit ReLU nets.
//!
//! A value `v` known to satisfy `v ≥ lo` is carried through a ReLU as
//! `relu(v − lo') + lo'` with the integer `lo' = ⌊lo⌋ − 1`.

use super::combinators::compose;
use super::net::{AffineStage, ReluNet};
use crate::error::{Error, Result};
use crate::geometry::BoxDomain;

/// Integer shift strictly below `lo`.
pub fn carry_shift(lo: f64) -> f64 {
    lo.floor() - 1.0
}

fn scalar_range(domain: &BoxDomain) -> (f64, f64) {
    let lo = domain.lo.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = domain.hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn unit_row(n: usize, entries: &[(usize, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; n];
    for &(c, v) in entries {
        r[c] = v;
    }
    r
}

/// `(a, b) ↦ min(a, b) = a − relu(a − b)`.
pub fn gadget_min2(domain: &BoxDomain) -> Result<ReluNet> {
    check_dim(domain, 2, "gadget_min2")?;
    let s = carry_shift(domain.lo[0]);
    let h = AffineStage::from_rows(&[vec![1.0, 0.0], vec![1.0, -1.0]], vec![-s, 0.0])?;
    let o = AffineStage::from_rows(&[vec![1.0, -1.0]], vec![s])?;
    ReluNet::new(vec![h, o], domain.clone())
}

/// `(a, b) ↦ max(a, b) = relu(a − b) + b`.
pub fn gadget_max2(domain: &BoxDomain) -> Result<ReluNet> {
    check_dim(domain, 2, "gadget_max2")?;
    let s = carry_shift(domain.lo[1]);
    let h = AffineStage::from_rows(&[vec![0.0, 1.0], vec![1.0, -1.0]], vec![-s, 0.0])?;
    let o = AffineStage::from_rows(&[vec![1.0, 1.0]], vec![s])?;
    ReluNet::new(vec![h, o], domain.clone())
}

fn check_dim(domain: &BoxDomain, n: usize, ctx: &'static str) -> Result<()> {
    if domain.dim() != n {
        return Err(Error::DimensionMismatch {
            context: ctx,
            expected: n,
            found: domain.dim(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Reduce {
    Min,
    Max,
}

/// One tree level: pairs are reduced, an odd last entry is carried.
fn tree_level(n: usize, shift: f64, op: Reduce, domain: BoxDomain) -> Result<ReluNet> {
    let mut hidden = Vec::with_capacity(n);
    let mut hb = Vec::with_capacity(n);
    let outs = n.div_ceil(2);
    let mut out_rows = Vec::with_capacity(outs);
    for p in 0..n / 2 {
        let (a, b) = (2 * p, 2 * p + 1);
        let k = hidden.len();
        match op {
            Reduce::Min => {
                hidden.push(unit_row(n, &[(a, 1.0)]));
                hb.push(-shift);
                hidden.push(unit_row(n, &[(a, 1.0), (b, -1.0)]));
                hb.push(0.0);
                out_rows.push((k, 1.0, k + 1, -1.0));
            }
            Reduce::Max => {
                hidden.push(unit_row(n, &[(b, 1.0)]));
                hb.push(-shift);
                hidden.push(unit_row(n, &[(a, 1.0), (b, -1.0)]));
                hb.push(0.0);
                out_rows.push((k, 1.0, k + 1, 1.0));
            }
        }
    }
    let odd = n % 2 == 1;
    if odd {
        hidden.push(unit_row(n, &[(n - 1, 1.0)]));
        hb.push(-shift);
    }
    let h = hidden.len();
    let mut o = Vec::with_capacity(outs);
    for &(i, wi, j, wj) in &out_rows {
        o.push(unit_row(h, &[(i, wi), (j, wj)]));
    }
    if odd {
        o.push(unit_row(h, &[(h - 1, 1.0)]));
    }
    ReluNet::new(
        vec![
            AffineStage::from_rows(&hidden, hb)?,
            AffineStage::from_rows(&o, vec![shift; outs])?,
        ],
        domain,
    )
}

fn vec_reduce(
    len: usize,
    domain: &BoxDomain,
    op: Reduce,
    floor: f64,
    name: &'static str,
) -> Result<ReluNet> {
    if len == 0 {
        return Err(Error::InvalidParameter(format!("{name} needs length ≥ 1")));
    }
    check_dim(domain, len, name)?;
    if len == 1 {
        return Ok(ReluNet::identity(domain.clone()));
    }
    // every tree level keeps values inside [lo, hi] of the input
    let (lo, hi) = scalar_range(domain);
    let shift = carry_shift(lo.max(floor));
    let mut n = len;
    let mut net = tree_level(n, shift, op, domain.clone())?;
    n = n.div_ceil(2);
    while n > 1 {
        let level = tree_level(n, shift, op, BoxDomain::cube(n, lo, hi))?;
        net = compose(&level, &net)?;
        n = n.div_ceil(2);
    }
    Ok(net)
}

/// Minimum of an `len`-vector by a pairwise tree: depth `⌈log₂ len⌉`, width `len`.
pub fn gadget_vec_min(len: usize, domain: &BoxDomain) -> Result<ReluNet> {
    vec_reduce(
        len,
        domain,
        Reduce::Min,
        f64::NEG_INFINITY,
        "gadget_vec_min",
    )
}

/// [`gadget_vec_min`] that is exact only where the minimum is `≥ floor`; elsewhere
/// the output is still `< floor`. A carried entry below the shift drags its pair
/// below the shift, so the guarantee survives every level of the tree.
pub fn gadget_vec_min_above(len: usize, domain: &BoxDomain, floor: f64) -> Result<ReluNet> {
    vec_reduce(len, domain, Reduce::Min, floor, "gadget_vec_min")
}

/// Maximum of an `len`-vector, mirror of [`gadget_vec_min`].
pub fn gadget_vec_max(len: usize, domain: &BoxDomain) -> Result<ReluNet> {
    vec_reduce(
        len,
        domain,
        Reduce::Max,
        f64::NEG_INFINITY,
        "gadget_vec_max",
    )
}

/// `(x_1, …, x_len, y) ↦ (min(x_1, y), …, min(x_len, y))` with depth 1 and width `len + 1`.
pub fn gadget_vec_scalar_min(len: usize, domain: &BoxDomain) -> Result<ReluNet> {
    gadget_vec_scalar_min_above(len, domain, f64::NEG_INFINITY)
}

/// [`gadget_vec_scalar_min`] that is exact only where the minimum is `≥ floor`;
/// elsewhere each output is still `< floor`. The carried `y` then needs a shift
/// near `floor` instead of near the lower bound of `y`, which keeps the lanes small.
pub fn gadget_vec_scalar_min_above(len: usize, domain: &BoxDomain, floor: f64) -> Result<ReluNet> {
    if len == 0 {
        return Err(Error::InvalidParameter(
            "gadget_vec_scalar_min needs length ≥ 1".into(),
        ));
    }
    check_dim(domain, len + 1, "gadget_vec_scalar_min")?;
    let n = len + 1;
    // y < shift gives relu(y − shift) = 0 and an output of at most shift
    let shift = carry_shift(domain.lo[len].max(floor));
    let mut hidden = Vec::with_capacity(n);
    let mut hb = Vec::with_capacity(n);
    for c in 0..len {
        hidden.push(unit_row(n, &[(len, 1.0), (c, -1.0)]));
        hb.push(0.0);
    }
    hidden.push(unit_row(n, &[(len, 1.0)]));
    hb.push(-shift);
    let out: Vec<Vec<f64>> = (0..len)
        .map(|c| unit_row(n, &[(len, 1.0), (c, -1.0)]))
        .collect();
    ReluNet::new(
        vec![
            AffineStage::from_rows(&hidden, hb)?,
            AffineStage::from_rows(&out, vec![shift; len])?,
        ],
        domain.clone(),
    )
}

/// Componentwise `t ↦ relu(2(t + M)) − relu(t + 2M)`: zero below `−2M`, identity above `−M`.
pub fn gadget_clamp(dim: usize, m: f64, domain: &BoxDomain) -> Result<ReluNet> {
    check_dim(domain, dim, "gadget_clamp")?;
    let mut hidden = Vec::with_capacity(2 * dim);
    let mut hb = Vec::with_capacity(2 * dim);
    for c in 0..dim {
        hidden.push(unit_row(dim, &[(c, 2.0)]));
        hb.push(2.0 * m);
        hidden.push(unit_row(dim, &[(c, 1.0)]));
        hb.push(2.0 * m);
    }
    let out: Vec<Vec<f64>> = (0..dim)
        .map(|c| unit_row(2 * dim, &[(2 * c, 1.0), (2 * c + 1, -1.0)]))
        .collect();
    ReluNet::new(
        vec![
            AffineStage::from_rows(&hidden, hb)?,
            AffineStage::from_rows(&out, vec![0.0; dim])?,
        ],
        domain.clone(),
    )
}

/// Scalar ramp `f_{a,b}(x) = (relu(x − a) − relu(x − b)) / (b − a)`: 0 below `a`, 1 above `b`.
pub fn gadget_ramp(a: f64, b: f64, domain: &BoxDomain) -> Result<ReluNet> {
    check_dim(domain, 1, "gadget_ramp")?;
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "ramp needs a < b, got a={a}, b={b}"
        )));
    }
    let inv = 1.0 / (b - a);
    ReluNet::new(
        vec![
            AffineStage::from_rows(&[vec![1.0], vec![1.0]], vec![-a, -b])?,
            AffineStage::from_rows(&[vec![inv, -inv]], vec![0.0])?,
        ],
        domain.clone(),
    )
}

/// Reference ramp for tests and oracles.
pub fn ramp_value(a: f64, b: f64, x: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        (x - a) / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize) -> BoxDomain {
        BoxDomain::cube(n, -100.0, 100.0)
    }

    #[test]
    fn max2_and_min2_values() {
        assert_eq!(gadget_max2(&dom(2)).unwrap().eval_scalar(&[3.0, 5.0]), 5.0);
        assert_eq!(gadget_min2(&dom(2)).unwrap().eval_scalar(&[3.0, 5.0]), 3.0);
        assert_eq!(gadget_max2(&dom(2)).unwrap().eval_scalar(&[7.5, -2.0]), 7.5);
    }

    #[test]
    fn max2_accounting() {
        let a = gadget_max2(&dom(2)).unwrap().accounting();
        // hidden: 2x2 weights + 2 biases; output: 1x2 weights + 1 bias
        assert_eq!((a.width, a.depth, a.params), (2, 1, 9));
    }

    #[test]
    fn vec_min_examples() {
        let net = gadget_vec_min(4, &dom(4)).unwrap();
        assert_eq!(net.eval_scalar(&[4.0, 1.0, 7.0, 2.0]), 1.0);
        assert_eq!(net.depth(), 2);
        let one = gadget_vec_min(1, &dom(1)).unwrap();
        assert_eq!(one.depth(), 0);
        assert_eq!(one.eval_scalar(&[-3.25]), -3.25);
        let three = gadget_vec_min(3, &dom(3)).unwrap();
        assert_eq!(three.eval_scalar(&[5.0, 5.0, 5.0]), 5.0);
        assert!(gadget_vec_min(0, &dom(1)).is_err());
    }

    #[test]
    fn vec_scalar_min_examples() {
        let net = gadget_vec_scalar_min(2, &dom(3)).unwrap();
        assert_eq!(net.evaluate(&[3.0, -1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        assert_eq!(net.evaluate(&[3.0, -1.0, 10.0]).unwrap(), vec![3.0, -1.0]);
        let a = net.accounting();
        assert_eq!((a.width, a.depth), (3, 1));
        assert_eq!(gadget_vec_scalar_min(1, &dom(2)).unwrap().width(), 2);
    }

    #[test]
    fn floored_vec_scalar_min() {
        let floor = -6.0;
        let net = gadget_vec_scalar_min_above(2, &BoxDomain::cube(3, -1e6, 1e6), floor).unwrap();
        for x in [
            [3.0f64, -1.0, 0.0],
            [3.0, -1.0, 10.0],
            [-5.5, 2.0, 4.0],
            [2.0, 1.0, -6.0],
        ] {
            let exact: Vec<f64> = x[..2].iter().map(|&v| v.min(x[2])).collect();
            assert_eq!(net.evaluate(&x).unwrap(), exact);
        }
        for x in [[3.0f64, -1.0, -2e5], [-9e5, 2.0, -8e5], [-7.0, -9e5, 1.0]] {
            let out = net.evaluate(&x).unwrap();
            for (o, v) in out.iter().zip(&x[..2]) {
                if v.min(x[2]) < floor {
                    assert!(*o < floor, "{x:?} -> {out:?}");
                } else {
                    assert_eq!(*o, v.min(x[2]));
                }
            }
        }
        assert!(net
            .stages()
            .iter()
            .flat_map(|s| s.bias())
            .all(|b| b.abs() < 10.0));
    }

    #[test]
    fn floored_vec_min() {
        let floor = -2.0;
        let net = gadget_vec_min_above(5, &BoxDomain::cube(5, -1e6, 1e6), floor).unwrap();
        let cases = [
            [4.0f64, 1.0, 7.0, 2.0, 3.0],
            [-2.0, 0.5, 8e5, 1.0, 9.0],
            [-9e5, 1.0, 7.0, 2.0, 3.0],
            [4.0, 1.0, 7.0, 2.0, -5e5],
            [-3.0, -7e5, -2.5, 1.0, 6e5],
        ];
        for x in cases {
            let truth = x.iter().copied().fold(f64::INFINITY, f64::min);
            let out = net.eval_scalar(&x);
            if truth >= floor {
                assert_eq!(out, truth, "{x:?}");
            } else {
                assert!(out < floor, "{x:?} -> {out}");
            }
        }
        assert!(net
            .stages()
            .iter()
            .flat_map(|s| s.bias())
            .all(|b| b.abs() < 10.0));
    }

    #[test]
    fn clamp_branches() {
        let m = 3.0;
        let net = gadget_clamp(1, m, &dom(1)).unwrap();
        assert_eq!(net.eval_scalar(&[-7.0]), 0.0);
        assert_eq!(net.eval_scalar(&[-6.0]), 0.0);
        assert_eq!(net.eval_scalar(&[-4.5]), -1.5);
        assert_eq!(net.eval_scalar(&[-3.0]), -3.0);
        assert_eq!(net.eval_scalar(&[2.0]), 2.0);
    }

    #[test]
    fn ramp_three_branches() {
        let net = gadget_ramp(-2.0, -1.0, &dom(1)).unwrap();
        assert_eq!(net.eval_scalar(&[0.0]), 1.0);
        assert_eq!(net.eval_scalar(&[-3.0]), 0.0);
        assert_eq!(net.eval_scalar(&[-1.5]), 0.5);
    }
}
