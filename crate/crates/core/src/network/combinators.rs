use nalgebra::{DMatrix, DVector};

use super::net::{AffineStage, ReluNet};
use crate::error::{Error, Result};

/// `g ∘ f`, merging the last affine stage of `f` into the first of `g`.
pub fn compose(g: &ReluNet, f: &ReluNet) -> Result<ReluNet> {
    if f.output_dim() != g.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "compose",
            expected: g.input_dim(),
            found: f.output_dim(),
        });
    }
    let fs = f.stages();
    let gs = g.stages();
    let mut stages = Vec::with_capacity(fs.len() + gs.len() - 1);
    stages.extend_from_slice(&fs[..fs.len() - 1]);
    stages.push(gs[0].after(&fs[fs.len() - 1])?);
    stages.extend_from_slice(&gs[1..]);
    ReluNet::new(stages, f.domain().clone())
}

/// Composes a chain listed innermost first.
pub fn compose_chain(nets: &[&ReluNet]) -> Result<ReluNet> {
    let (first, rest) = nets
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty composition".into()))?;
    let mut acc = (*first).clone();
    for n in rest {
        acc = compose(n, &acc)?;
    }
    Ok(acc)
}

/// A bound `b` with `‖f(x)‖_∞ < b` on the domain, from interval arithmetic.
pub fn pad_bound(f: &ReluNet) -> f64 {
    let (lo, hi) = f.output_interval();
    let m = lo.iter().chain(&hi).map(|v| v.abs()).fold(0.0, f64::max);
    m.ceil() + 1.0
}

/// Raises the depth of `f` to `target` by shifting its output by `+bound`,
/// chaining identity ReLU layers and shifting back. Exact on the domain when
/// `bound ≥ sup ‖f‖_∞` there; a smaller bound is not detected here (see [`check_pad`]).
pub fn pad_depth(f: &ReluNet, target: usize, bound: f64) -> Result<ReluNet> {
    let depth = f.depth();
    if target < depth {
        return Err(Error::InvalidParameter(format!(
            "cannot pad depth {depth} down to {target}"
        )));
    }
    if target == depth {
        return Ok(f.clone());
    }
    let n = f.output_dim();
    let mut stages = f.stages().to_vec();
    let last = stages.pop().expect("nonempty");
    let shifted: Vec<f64> = last.bias().iter().map(|b| b + bound).collect();
    stages.push(AffineStage::new(
        last.rows(),
        last.cols(),
        last.weights().to_vec(),
        shifted,
    )?);
    for _ in 0..target - depth - 1 {
        stages.push(AffineStage::identity(n));
    }
    let id = AffineStage::identity(n);
    stages.push(AffineStage::new(
        n,
        n,
        id.weights().to_vec(),
        vec![-bound; n],
    )?);
    ReluNet::new(stages, f.domain().clone())
}

/// [`pad_depth`] with the interval-arithmetic bound.
pub fn pad_depth_auto(f: &ReluNet, target: usize) -> Result<ReluNet> {
    pad_depth(f, target, pad_bound(f))
}

/// Largest deviation between two nets on a regular grid over the first net's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PadCheck {
    pub max_deviation: f64,
    pub worst_point: Vec<f64>,
}

pub fn check_pad(original: &ReluNet, padded: &ReluNet, per_axis: usize) -> Result<PadCheck> {
    let dom = original.domain();
    let d = dom.dim();
    let n = per_axis.max(2);
    let total = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    let mut best = PadCheck {
        max_deviation: 0.0,
        worst_point: dom.lo.clone(),
    };
    let mut x = vec![0.0; d];
    let mut ea = original.evaluator();
    let mut eb = padded.evaluator();
    for idx in 0..total {
        let mut rem = idx;
        for c in 0..d {
            let i = rem % n;
            rem /= n;
            x[c] = dom.lo[c] + (dom.hi[c] - dom.lo[c]) * i as f64 / (n - 1) as f64;
        }
        let dev = ea
            .run(&x)
            .iter()
            .zip(eb.run(&x))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > best.max_deviation {
            best = PadCheck {
                max_deviation: dev,
                worst_point: x.clone(),
            };
        }
    }
    Ok(best)
}

/// `x ↦ (f(x), g(x))`.
pub fn split(f: &ReluNet, g: &ReluNet) -> Result<ReluNet> {
    split_many(&[f, g])
}

/// `x ↦ (f_1(x), …, f_n(x))`; shallower nets are padded to the deepest.
pub fn split_many(nets: &[&ReluNet]) -> Result<ReluNet> {
    let first = nets
        .first()
        .ok_or_else(|| Error::InvalidParameter("split of no networks".into()))?;
    let d_in = first.input_dim();
    if let Some(bad) = nets.iter().find(|n| n.input_dim() != d_in) {
        return Err(Error::DimensionMismatch {
            context: "split",
            expected: d_in,
            found: bad.input_dim(),
        });
    }
    let depth = nets.iter().map(|n| n.depth()).max().unwrap_or(0);
    let padded: Vec<ReluNet> = nets
        .iter()
        .map(|n| pad_depth_auto(n, depth))
        .collect::<Result<_>>()?;
    let mut domain = first.domain().clone();
    for n in &nets[1..] {
        domain = domain.intersection(n.domain());
    }
    let mut stages = Vec::with_capacity(depth + 1);
    stages.push(stack_rows(padded.iter().map(|n| &n.stages()[0]))?);
    for l in 1..=depth {
        stages.push(block_diag(padded.iter().map(|n| &n.stages()[l]))?);
    }
    ReluNet::new(stages, domain)
}

fn stack_rows<'a>(parts: impl Iterator<Item = &'a AffineStage>) -> Result<AffineStage> {
    let parts: Vec<&AffineStage> = parts.collect();
    let cols = parts[0].cols();
    let rows = parts.iter().map(|p| p.rows()).sum();
    let mut w = Vec::with_capacity(rows * cols);
    let mut b = Vec::with_capacity(rows);
    for p in parts {
        w.extend_from_slice(p.weights());
        b.extend_from_slice(p.bias());
    }
    AffineStage::new(rows, cols, w, b)
}

fn block_diag<'a>(parts: impl Iterator<Item = &'a AffineStage>) -> Result<AffineStage> {
    let parts: Vec<&AffineStage> = parts.collect();
    let rows: usize = parts.iter().map(|p| p.rows()).sum();
    let cols: usize = parts.iter().map(|p| p.cols()).sum();
    let mut w = vec![0.0; rows * cols];
    let mut b = Vec::with_capacity(rows);
    let (mut r0, mut c0) = (0, 0);
    for p in parts {
        for r in 0..p.rows() {
            w[(r0 + r) * cols + c0..(r0 + r) * cols + c0 + p.cols()].copy_from_slice(p.row(r));
        }
        b.extend_from_slice(p.bias());
        r0 += p.rows();
        c0 += p.cols();
    }
    AffineStage::new(rows, cols, w, b)
}

/// `x ↦ f(x) + g(x)`; the summation is folded into the output stage.
pub fn add(f: &ReluNet, g: &ReluNet) -> Result<ReluNet> {
    add_many(&[f, g])
}

pub fn add_many(nets: &[&ReluNet]) -> Result<ReluNet> {
    let first = nets
        .first()
        .ok_or_else(|| Error::InvalidParameter("sum of no networks".into()))?;
    let d_out = first.output_dim();
    if let Some(bad) = nets.iter().find(|n| n.output_dim() != d_out) {
        return Err(Error::DimensionMismatch {
            context: "add",
            expected: d_out,
            found: bad.output_dim(),
        });
    }
    let stacked = split_many(nets)?;
    let summer = sum_blocks(nets.len(), d_out);
    let summer = ReluNet::new(vec![summer], dummy_domain(nets.len() * d_out))?;
    let out = compose(&summer, &stacked)?;
    out.with_domain(stacked.domain().clone())
}

fn sum_blocks(blocks: usize, d_out: usize) -> AffineStage {
    let cols = blocks * d_out;
    let mut w = vec![0.0; d_out * cols];
    for r in 0..d_out {
        for k in 0..blocks {
            w[r * cols + k * d_out + r] = 1.0;
        }
    }
    AffineStage::new(d_out, cols, w, vec![0.0; d_out]).expect("well formed")
}

/// Placeholder domain for adapter nets whose domain is never consulted.
pub(crate) fn dummy_domain(n: usize) -> crate::geometry::BoxDomain {
    crate::geometry::BoxDomain::cube(n, 0.0, 0.0)
}

/// Removes hidden neuron `idx` of hidden layer `hidden` (zero-based) when it is
/// active on the whole domain and its pre-activation is an affine combination of
/// other always-active neurons of the same layer; the next stage absorbs it.
/// `candidates` restricts which neurons may be used in the combination.
pub fn eliminate_linear_neuron(
    net: &ReluNet,
    hidden: usize,
    idx: usize,
    candidates: Option<&[usize]>,
) -> Result<ReluNet> {
    if hidden >= net.depth() {
        return Err(Error::InvalidParameter(format!(
            "hidden layer {hidden} out of range for depth {}",
            net.depth()
        )));
    }
    let stage = &net.stages()[hidden];
    if idx >= stage.rows() {
        return Err(Error::InvalidParameter(format!(
            "neuron {idx} out of range"
        )));
    }
    let (lo, _) = &net.interval_bounds()[hidden];
    if lo[idx] < 0.0 {
        return Err(Error::InvalidNetwork(format!(
            "neuron {idx} of hidden layer {hidden} is not always active"
        )));
    }
    let all: Vec<usize> = (0..stage.rows()).collect();
    let basis: Vec<usize> = candidates
        .unwrap_or(&all)
        .iter()
        .copied()
        .filter(|&j| j != idx && lo[j] >= 0.0)
        .collect();
    let cols = stage.cols();
    // unknowns: one coefficient per basis neuron plus a constant
    let mut a = DMatrix::zeros(cols + 1, basis.len() + 1);
    for (k, &j) in basis.iter().enumerate() {
        for c in 0..cols {
            a[(c, k)] = stage.weight(j, c);
        }
        a[(cols, k)] = stage.bias()[j];
    }
    a[(cols, basis.len())] = 1.0;
    let mut target = DVector::zeros(cols + 1);
    for c in 0..cols {
        target[c] = stage.weight(idx, c);
    }
    target[cols] = stage.bias()[idx];
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::InvalidNetwork(e.to_string()))?;
    let residual = (&a * &coef - &target).amax();
    let scale = 1.0 + target.amax();
    if residual > 1e-10 * scale {
        return Err(Error::InvalidNetwork(format!(
            "neuron {idx} is not an affine combination of active neurons (residual {residual:e})"
        )));
    }

    let next = &net.stages()[hidden + 1];
    let mut w = Vec::with_capacity(next.rows() * (next.cols() - 1));
    let mut b = next.bias().to_vec();
    for r in 0..next.rows() {
        let wi = next.weight(r, idx);
        let mut row = next.row(r).to_vec();
        for (k, &j) in basis.iter().enumerate() {
            row[j] += wi * coef[k];
        }
        b[r] += wi * coef[basis.len()];
        row.remove(idx);
        w.extend(row);
    }
    let new_next = AffineStage::new(next.rows(), next.cols() - 1, w, b)?;
    let new_stage = remove_row(stage, idx)?;
    let mut stages = net.stages().to_vec();
    stages[hidden] = new_stage;
    stages[hidden + 1] = new_next;
    ReluNet::new(stages, net.domain().clone())
}

fn remove_row(s: &AffineStage, idx: usize) -> Result<AffineStage> {
    let mut w = Vec::with_capacity((s.rows() - 1) * s.cols());
    let mut b = Vec::with_capacity(s.rows() - 1);
    for r in (0..s.rows()).filter(|&r| r != idx) {
        w.extend_from_slice(s.row(r));
        b.push(s.bias()[r]);
    }
    AffineStage::new(s.rows() - 1, s.cols(), w, b)
}

fn remove_cols(s: &AffineStage, keep: &[bool], extra_bias: &[f64]) -> Result<AffineStage> {
    let cols = keep.iter().filter(|k| **k).count();
    let mut w = Vec::with_capacity(s.rows() * cols);
    for r in 0..s.rows() {
        w.extend(
            s.row(r)
                .iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(v, _)| *v),
        );
    }
    let b = s
        .bias()
        .iter()
        .zip(extra_bias)
        .map(|(a, e)| a + e)
        .collect();
    AffineStage::new(s.rows(), cols, w, b)
}

fn keep_rows(s: &AffineStage, keep: &[bool]) -> Result<AffineStage> {
    let rows = keep.iter().filter(|k| **k).count();
    let mut w = Vec::with_capacity(rows * s.cols());
    let mut b = Vec::with_capacity(rows);
    for r in (0..s.rows()).filter(|&r| keep[r]) {
        w.extend_from_slice(s.row(r));
        b.push(s.bias()[r]);
    }
    AffineStage::new(rows, s.cols(), w, b)
}

/// Drops hidden neurons that never influence the output and folds constant
/// neurons (zero incoming weights) into the next bias. Keeps at least one neuron per layer.
pub fn prune_dead(net: &ReluNet) -> Result<ReluNet> {
    let mut stages = net.stages().to_vec();
    for h in (0..stages.len() - 1).rev() {
        let cur = &stages[h];
        let next = &stages[h + 1];
        let mut keep = vec![true; cur.rows()];
        let mut extra = vec![0.0; next.rows()];
        for j in 0..cur.rows() {
            let dead_out = (0..next.rows()).all(|r| next.weight(r, j) == 0.0);
            let constant_in = cur.row(j).iter().all(|v| *v == 0.0);
            if dead_out {
                keep[j] = false;
            } else if constant_in {
                let v = cur.bias()[j].max(0.0);
                for (r, e) in extra.iter_mut().enumerate() {
                    *e += next.weight(r, j) * v;
                }
                keep[j] = false;
            }
        }
        if !keep.iter().any(|k| *k) {
            // neuron 0 stays; undo its folding if it was constant
            keep[0] = true;
            if cur.row(0).iter().all(|x| *x == 0.0) {
                let v = cur.bias()[0].max(0.0);
                for (r, e) in extra.iter_mut().enumerate() {
                    *e -= next.weight(r, 0) * v;
                }
            }
        }
        if keep.iter().all(|k| *k) {
            continue;
        }
        let new_next = remove_cols(next, &keep, &extra)?;
        let new_cur = keep_rows(cur, &keep)?;
        stages[h] = new_cur;
        stages[h + 1] = new_next;
    }
    ReluNet::new(stages, net.domain().clone())
}

/// Merges hidden neurons with bitwise identical incoming weights and bias.
pub fn dedupe_neurons(net: &ReluNet) -> Result<ReluNet> {
    let mut stages = net.stages().to_vec();
    for h in 0..stages.len() - 1 {
        let cur = &stages[h];
        let n = cur.rows();
        let mut rep = (0..n).collect::<Vec<usize>>();
        let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        for j in 0..n {
            let key: Vec<u64> = cur
                .row(j)
                .iter()
                .chain(std::iter::once(&cur.bias()[j]))
                .map(|v| (v + 0.0).to_bits())
                .collect();
            rep[j] = *seen.entry(key).or_insert(j);
        }
        if rep.iter().enumerate().all(|(j, r)| j == *r) {
            continue;
        }
        let next = &stages[h + 1];
        let mut w = next.weights().to_vec();
        let cols = next.cols();
        for r in 0..next.rows() {
            for j in 0..n {
                if rep[j] != j {
                    let v = w[r * cols + j];
                    w[r * cols + rep[j]] += v;
                    w[r * cols + j] = 0.0;
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|j| rep[j] == j).collect();
        let merged = AffineStage::new(next.rows(), cols, w, next.bias().to_vec())?;
        let new_next = remove_cols(&merged, &keep, &vec![0.0; next.rows()])?;
        let new_cur = keep_rows(cur, &keep)?;
        stages[h + 1] = new_next;
        stages[h] = new_cur;
    }
    ReluNet::new(stages, net.domain().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxDomain;

    fn lin(a: f64, b: f64, dom: &BoxDomain) -> ReluNet {
        ReluNet::affine(&[vec![a]], vec![b], dom.clone()).unwrap()
    }

    #[test]
    fn compose_affines_merges() {
        let dom = BoxDomain::cube(1, -5.0, 5.0);
        let g = lin(2.0, 0.0, &dom);
        let f = lin(1.0, 1.0, &dom);
        let gf = compose(&g, &f).unwrap();
        assert_eq!(gf.depth(), 0);
        assert_eq!(gf.evaluate(&[3.0]).unwrap(), vec![8.0]);
    }

    #[test]
    fn pad_preserves_identity() {
        let dom = BoxDomain::cube(1, -1.0, 1.0);
        let id = ReluNet::identity(dom);
        let p = pad_depth(&id, 2, 1.0).unwrap();
        assert_eq!(p.depth(), 2);
        assert_eq!(p.evaluate(&[-0.5]).unwrap(), vec![-0.5]);
        assert_eq!(pad_depth(&id, 0, 1.0).unwrap(), id);
    }

    #[test]
    fn undersized_pad_bound_is_caught_by_check() {
        let dom = BoxDomain::cube(1, -2.0, 2.0);
        let id = ReluNet::identity(dom);
        let p = pad_depth(&id, 1, 1.0).unwrap();
        assert_eq!(p.evaluate(&[-2.0]).unwrap(), vec![-1.0]);
        let chk = check_pad(&id, &p, 5).unwrap();
        assert!((chk.max_deviation - 1.0).abs() < 1e-15);
        assert_eq!(chk.worst_point, vec![-2.0]);
    }

    #[test]
    fn split_and_add() {
        let dom = BoxDomain::cube(1, -5.0, 5.0);
        let s = split(&lin(1.0, 0.0, &dom), &lin(2.0, 0.0, &dom)).unwrap();
        assert_eq!(s.evaluate(&[3.0]).unwrap(), vec![3.0, 6.0]);
        let z = add(&lin(1.0, 0.0, &dom), &lin(-1.0, 0.0, &dom)).unwrap();
        assert_eq!(z.evaluate(&[1.7]).unwrap(), vec![0.0]);
    }

    #[test]
    fn eliminate_redundant_lane() {
        // hidden lanes relu(x + 3), relu(2x + 7), relu(x - y) on x, y ∈ [-1, 1]
        let dom = BoxDomain::cube(2, -1.0, 1.0);
        let s0 = AffineStage::from_rows(
            &[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, -1.0]],
            vec![3.0, 7.0, 0.0],
        )
        .unwrap();
        let s1 = AffineStage::from_rows(&[vec![1.0, 1.0, 1.0]], vec![0.0]).unwrap();
        let net = ReluNet::new(vec![s0, s1], dom).unwrap();
        let slim = eliminate_linear_neuron(&net, 0, 1, None).unwrap();
        assert_eq!(slim.hidden_widths(), vec![2]);
        for x in [-1.0, -0.3, 0.4, 1.0] {
            for y in [-1.0, 0.2, 1.0] {
                let a = net.eval_scalar(&[x, y]);
                let b = slim.eval_scalar(&[x, y]);
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(eliminate_linear_neuron(&net, 0, 2, None).is_err());
    }

    #[test]
    fn prune_and_dedupe() {
        let dom = BoxDomain::cube(1, -1.0, 1.0);
        let s0 = AffineStage::from_rows(
            &[vec![1.0], vec![1.0], vec![0.0], vec![-1.0]],
            vec![0.5, 0.5, 2.0, 0.0],
        )
        .unwrap();
        let s1 = AffineStage::from_rows(&[vec![1.0, 2.0, 1.0, 0.0]], vec![0.0]).unwrap();
        let net = ReluNet::new(vec![s0, s1], dom).unwrap();
        let small = dedupe_neurons(&prune_dead(&net).unwrap()).unwrap();
        assert_eq!(small.hidden_widths(), vec![1]);
        for x in [-1.0, -0.25, 0.0, 0.6, 1.0] {
            assert!((net.eval_scalar(&[x]) - small.eval_scalar(&[x])).abs() < 1e-15);
        }
    }
}
