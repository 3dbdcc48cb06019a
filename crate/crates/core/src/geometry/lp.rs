//! Dense two-phase simplex with Bland's rule, sized for a handful of variables.

use super::polytope::{ConvexPolytope, HalfSpace};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;

/// Result of `max c·z s.t. A z ≤ b, z ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, z: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes the objective row (reduced costs, positive = improving).
    /// Columns at or past `forbid_from` may not enter.
    fn optimize(&mut self, forbid_from: usize) -> bool {
        loop {
            let entering = (0..forbid_from).find(|&c| self.obj[c] > PIVOT_TOL);
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bv)) => {
                            if ratio < bv - PIVOT_TOL
                                || (ratio <= bv + PIVOT_TOL && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bv))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.obj = vec![0.0; self.ncols + 1];
        self.obj[..cost.len()].copy_from_slice(cost);
        for r in 0..self.rows.len() {
            let cb = self.obj[self.basis[r]];
            if cb != 0.0 {
                for (v, a) in self.obj.iter_mut().zip(&self.rows[r]) {
                    *v -= cb * a;
                }
            }
        }
    }
}

/// Solves `max c·z s.t. A z ≤ b, z ≥ 0`.
pub fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let n_art = b.iter().filter(|v| **v < 0.0).count();
    // columns: structural n, slacks m, artificials n_art, then rhs
    let ncols = n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = n + m;
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let mut row = vec![0.0; ncols + 1];
        let sign = if *bi < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in ai.iter().enumerate() {
            row[j] = sign * v;
        }
        row[n + i] = sign;
        row[ncols] = sign * bi;
        if *bi < 0.0 {
            row[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis,
        ncols,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        t.set_objective(&phase1);
        t.optimize(ncols);
        let infeas: f64 = (0..m)
            .filter(|&r| t.basis[r] >= n + m)
            .map(|r| t.rhs(r))
            .sum();
        if infeas > FEAS_TOL {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..m {
            if t.basis[r] >= n + m {
                if let Some(c) = (0..n + m).find(|&c| t.rows[r][c].abs() > PIVOT_TOL) {
                    t.pivot(r, c);
                }
            }
        }
    }

    t.set_objective(c);
    if !t.optimize(n + m) {
        return LpOutcome::Unbounded;
    }
    let mut z = vec![0.0; n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            z[bv] = t.rhs(r);
        }
    }
    let value = c.iter().zip(&z).map(|(ci, zi)| ci * zi).sum();
    LpOutcome::Optimal { value, z }
}

/// Maximum of `min_l φ_l` over a polytope, with a maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
}

/// `max_{x ∈ P} min_l (⟨a_l, x⟩ + b_l)`.
pub fn lp_max_min_affine(affines: &[HalfSpace], p: &ConvexPolytope) -> Result<LpSolution> {
    let d = p.dim();
    if affines.is_empty() {
        return Err(Error::InvalidParameter("no affine functionals".into()));
    }
    if let Some(h) = affines.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch {
            context: "lp_max_min_affine",
            expected: d,
            found: h.dim(),
        });
    }
    // variables: x⁺ (d), x⁻ (d), t⁺, t⁻
    let nv = 2 * d + 2;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for h in affines {
        // t − ⟨a, x⟩ ≤ b
        let mut row = vec![0.0; nv];
        for (c, ac) in h.normal().iter().enumerate() {
            row[c] = -ac;
            row[d + c] = *ac;
        }
        row[2 * d] = 1.0;
        row[2 * d + 1] = -1.0;
        a.push(row);
        b.push(h.offset());
    }
    for h in p.halfspaces() {
        // −⟨n, x⟩ ≤ c
        let mut row = vec![0.0; nv];
        for (c, nc) in h.normal().iter().enumerate() {
            row[c] = -nc;
            row[d + c] = *nc;
        }
        a.push(row);
        b.push(h.offset());
    }
    let mut cost = vec![0.0; nv];
    cost[2 * d] = 1.0;
    cost[2 * d + 1] = -1.0;
    match simplex_max(&cost, &a, &b) {
        LpOutcome::Optimal { z, .. } => {
            let point: Vec<f64> = (0..d).map(|c| z[c] - z[d + c]).collect();
            // report the objective at the recovered point to shed pivot noise
            let value = affines
                .iter()
                .map(|h| h.value(&point))
                .fold(f64::INFINITY, f64::min);
            Ok(LpSolution { value, point })
        }
        LpOutcome::Infeasible => Err(Error::InfeasibleRegion),
        LpOutcome::Unbounded => Err(Error::UnboundedProgram),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bbox::BoxDomain;

    fn interval(lo: f64, hi: f64) -> ConvexPolytope {
        ConvexPolytope::from_box(&BoxDomain::new(vec![lo], vec![hi]).unwrap()).unwrap()
    }

    fn hs(a: f64, b: f64) -> HalfSpace {
        HalfSpace::new(vec![a], b).unwrap()
    }

    #[test]
    fn cantor_separation_value() {
        let s = lp_max_min_affine(
            &[hs(1.0, 0.0), hs(-1.0, 1.0 / 3.0)],
            &interval(2.0 / 3.0, 1.0),
        )
        .unwrap();
        assert!((s.value + 1.0 / 3.0).abs() < 1e-12);
        assert!((s.point[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_increasing_functional() {
        let s = lp_max_min_affine(&[hs(1.0, 0.0)], &interval(0.0, 1.0)).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_tent() {
        let s = lp_max_min_affine(&[hs(1.0, 0.0), hs(-1.0, 0.0)], &interval(-1.0, 1.0)).unwrap();
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn classic_bounded_program() {
        // max 3x + 2y s.t. x + y ≤ 4, x + 3y ≤ 6, x ≤ 3
        let out = simplex_max(
            &[3.0, 2.0],
            &[vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]],
            &[4.0, 6.0, 3.0],
        );
        match out {
            LpOutcome::Optimal { value, z } => {
                assert!((value - 11.0).abs() < 1e-12);
                assert!((z[0] - 3.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x ≥ 2 and x ≤ 1
        assert_eq!(
            simplex_max(&[1.0], &[vec![-1.0], vec![1.0]], &[-2.0, 1.0]),
            LpOutcome::Infeasible
        );
        assert_eq!(
            simplex_max(&[1.0], &[vec![-1.0]], &[0.0]),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn degenerate_program_terminates() {
        // many constraints through the optimum vertex
        let a: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let th = i as f64 * 0.1;
                vec![th.cos(), th.sin()]
            })
            .collect();
        let b = vec![0.0; 12];
        match simplex_max(&[1.0, 1.0], &a, &b) {
            LpOutcome::Optimal { value, .. } => assert!(value.abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
