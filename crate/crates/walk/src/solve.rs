//! Solvers for the sub-stochastic fixed-point systems `u = b + A u`, where
//! `A` is a killed transition matrix restricted to an active state set.
//!
//! Conjugate gradients on `I - A` when the rows are symmetric, Neumann
//! iteration otherwise, and a dense partial-pivot elimination as a last
//! resort on small systems. Every solve verifies its residual directly
//! before returning; the residual contract is what callers rely on.

use thiserror::Error;

/// Default residual target (max-norm of `b + A u - u`).
pub const RESIDUAL_TARGET: f64 = 1e-13;

const CG_MAX_ITERS: usize = 100_000;
const NEUMANN_MAX_ITERS: usize = 2_000_000;
const DENSE_LIMIT: usize = 4_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver did not reach residual target: got {residual:.3e} after {iters} iterations")]
    NotConverged { residual: f64, iters: usize },
    #[error("singular dense system at pivot {0}")]
    Singular(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ConjugateGradient,
    Neumann,
    Dense,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub residual: f64,
    pub iters: usize,
    pub method: Method,
}

/// `out = A v` on the active set (rows outside `active` give zero; columns
/// outside `active` are ignored).
fn apply_masked(rows: &[Vec<(u32, f64)>], active: &[bool], v: &[f64], out: &mut [f64]) {
    for (y, row) in rows.iter().enumerate() {
        if !active[y] {
            out[y] = 0.0;
            continue;
        }
        let mut acc = 0.0;
        for &(z, p) in row {
            if active[z as usize] {
                acc += p * v[z as usize];
            }
        }
        out[y] = acc;
    }
}

fn residual_norm(rows: &[Vec<(u32, f64)>], active: &[bool], b: &[f64], u: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (y, row) in rows.iter().enumerate() {
        if !active[y] {
            continue;
        }
        let mut acc = b[y] - u[y];
        for &(z, p) in row {
            if active[z as usize] {
                acc += p * u[z as usize];
            }
        }
        worst = worst.max(acc.abs());
    }
    worst
}

/// Solves `u = b + A u` over the active set; inactive entries of the result
/// are zero. `symmetric` declares that the masked `A` is symmetric.
pub fn solve_fixed_point(
    rows: &[Vec<(u32, f64)>],
    active: &[bool],
    b: &[f64],
    symmetric: bool,
    tol: f64,
) -> Result<Solution, SolveError> {
    let n = rows.len();
    assert_eq!(active.len(), n);
    assert_eq!(b.len(), n);

    if symmetric {
        if let Some(mut sol) = solve_cg(rows, active, b, tol) {
            sol.residual = residual_norm(rows, active, b, &sol.u);
            if sol.residual <= tol {
                return Ok(sol);
            }
            // fall through to Neumann polish from the CG iterate
            if let Ok(polished) = neumann_from(rows, active, b, sol.u, tol, sol.iters) {
                return Ok(polished);
            }
        }
    }
    match neumann_from(rows, active, b, vec![0.0; n], tol, 0) {
        Ok(sol) => Ok(sol),
        Err(e) => {
            let count = active.iter().filter(|a| **a).count();
            if count <= DENSE_LIMIT {
                solve_dense(rows, active, b, tol)
            } else {
                Err(e)
            }
        }
    }
}

fn neumann_from(
    rows: &[Vec<(u32, f64)>],
    active: &[bool],
    b: &[f64],
    mut u: Vec<f64>,
    tol: f64,
    iters_so_far: usize,
) -> Result<Solution, SolveError> {
    let n = rows.len();
    let mut next = vec![0.0; n];
    let mut iters = iters_so_far;
    loop {
        apply_masked(rows, active, &u, &mut next);
        let mut update = 0.0f64;
        for y in 0..n {
            if active[y] {
                next[y] += b[y];
                update = update.max((next[y] - u[y]).abs());
            } else {
                next[y] = 0.0;
            }
        }
        std::mem::swap(&mut u, &mut next);
        iters += 1;
        // the update equals the residual at the previous iterate; one more
        // application keeps the final residual at or below it
        if update <= tol * 0.5 {
            let residual = residual_norm(rows, active, b, &u);
            if residual <= tol {
                return Ok(Solution {
                    u,
                    residual,
                    iters,
                    method: Method::Neumann,
                });
            }
        }
        if iters - iters_so_far >= NEUMANN_MAX_ITERS {
            let residual = residual_norm(rows, active, b, &u);
            return Err(SolveError::NotConverged { residual, iters });
        }
    }
}

fn dot(active: &[bool], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for y in 0..a.len() {
        if active[y] {
            acc += a[y] * b[y];
        }
    }
    acc
}

/// Conjugate gradients on `(I - A) u = b`.
fn solve_cg(rows: &[Vec<(u32, f64)>], active: &[bool], b: &[f64], tol: f64) -> Option<Solution> {
    let n = rows.len();
    let mut u = vec![0.0; n];
    let mut r: Vec<f64> = (0..n).map(|y| if active[y] { b[y] } else { 0.0 }).collect();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(active, &r, &r);
    if rr.sqrt() <= tol {
        return Some(Solution {
            u,
            residual: rr.sqrt(),
            iters: 0,
            method: Method::ConjugateGradient,
        });
    }
    for iters in 1..=CG_MAX_ITERS {
        apply_masked(rows, active, &p, &mut ap);
        for y in 0..n {
            if active[y] {
                ap[y] = p[y] - ap[y]; // (I - A) p
            }
        }
        let pap = dot(active, &p, &ap);
        if pap <= 0.0 {
            return None; // not positive definite as masked; bail out
        }
        let alpha = rr / pap;
        for y in 0..n {
            if active[y] {
                u[y] += alpha * p[y];
                r[y] -= alpha * ap[y];
            }
        }
        let rr_next = dot(active, &r, &r);
        // max-norm residual is bounded by the 2-norm
        if rr_next.sqrt() <= tol * 0.5 {
            return Some(Solution {
                u,
                residual: rr_next.sqrt(),
                iters,
                method: Method::ConjugateGradient,
            });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for y in 0..n {
            if active[y] {
                p[y] = r[y] + beta * p[y];
            }
        }
    }
    None
}

/// Dense partial-pivot elimination for `(I - A) u = b` on the active set.
fn solve_dense(
    rows: &[Vec<(u32, f64)>],
    active: &[bool],
    b: &[f64],
    tol: f64,
) -> Result<Solution, SolveError> {
    let ids: Vec<usize> = (0..rows.len()).filter(|&y| active[y]).collect();
    let m = ids.len();
    let mut pos = vec![usize::MAX; rows.len()];
    for (i, &y) in ids.iter().enumerate() {
        pos[y] = i;
    }
    let mut mat = vec![0.0f64; m * m];
    let mut rhs: Vec<f64> = ids.iter().map(|&y| b[y]).collect();
    for (i, &y) in ids.iter().enumerate() {
        mat[i * m + i] = 1.0;
        for &(z, p) in &rows[y] {
            let j = pos[z as usize];
            if j != usize::MAX {
                mat[i * m + j] -= p;
            }
        }
    }
    for col in 0..m {
        let mut piv = col;
        let mut best = mat[col * m + col].abs();
        for row in col + 1..m {
            let v = mat[row * m + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best < 1e-300 {
            return Err(SolveError::Singular(col));
        }
        if piv != col {
            for k in 0..m {
                mat.swap(col * m + k, piv * m + k);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * m + col];
        for row in col + 1..m {
            let f = mat[row * m + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..m {
                mat[row * m + k] -= f * mat[col * m + k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0f64; m];
    for row in (0..m).rev() {
        let mut acc = rhs[row];
        for k in row + 1..m {
            acc -= mat[row * m + k] * x[k];
        }
        x[row] = acc / mat[row * m + row];
    }
    let mut u = vec![0.0; rows.len()];
    for (i, &y) in ids.iter().enumerate() {
        u[y] = x[i];
    }
    let residual = residual_norm(rows, active, b, &u);
    if residual <= tol {
        Ok(Solution {
            u,
            residual,
            iters: m,
            method: Method::Dense,
        })
    } else {
        Err(SolveError::NotConverged {
            residual,
            iters: m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-state killed chain: 0 -> 1 with prob 1/2 (and 1/2 killed), state 1
    /// absorbing-dead. u = b + Au with b = [1, 0]: u0 = 1 + 0.5 u1, u1 = 0.
    #[test]
    fn tiny_fixed_point() {
        let rows = vec![vec![(1u32, 0.5)], vec![]];
        let active = vec![true, true];
        let b = vec![1.0, 0.0];
        let sol = solve_fixed_point(&rows, &active, &b, false, 1e-13).unwrap();
        assert!((sol.u[0] - 1.0).abs() < 1e-12);
        assert!(sol.u[1].abs() < 1e-12);
    }

    /// Symmetric random-walk ruin problem: on {0..10} with absorbing ends,
    /// u(k) = P[hit 10 before 0 | start k] = k/10.
    #[test]
    fn gambler_ruin_cg_and_neumann_agree() {
        let n = 11usize;
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for k in 1..n - 1 {
            rows[k] = vec![((k - 1) as u32, 0.5), ((k + 1) as u32, 0.5)];
        }
        let active: Vec<bool> = (0..n).map(|k| k != 0 && k != n - 1).collect();
        // b(k) = nu_k(10): only k = 9 feeds the target
        let mut b = vec![0.0; n];
        b[9] = 0.5;
        let sol = solve_fixed_point(&rows, &active, &b, true, 1e-13).unwrap();
        for k in 1..n - 1 {
            assert!(
                (sol.u[k] - k as f64 / 10.0).abs() < 1e-12,
                "u[{k}] = {}",
                sol.u[k]
            );
        }
        assert!(sol.residual <= 1e-13);
    }

    #[test]
    fn dense_matches_iterative() {
        let rows = vec![
            vec![(1u32, 0.3), (2u32, 0.3)],
            vec![(0u32, 0.25), (2u32, 0.25)],
            vec![],
        ];
        let active = vec![true, true, true];
        let b = vec![0.2, 0.7, 0.0];
        let it = solve_fixed_point(&rows, &active, &b, false, 1e-13).unwrap();
        let de = solve_dense(&rows, &active, &b, 1e-12).unwrap();
        for y in 0..3 {
            assert!((it.u[y] - de.u[y]).abs() < 1e-11);
        }
    }
}
