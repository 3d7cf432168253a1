//! Green functions of the killed chain and of the induced orbit chain, and
//! Martin kernels built from them.

use lsd_core::space::StateId;

use crate::hitting::HittingFamily;
use crate::solve::{solve_fixed_point, RESIDUAL_TARGET};
use crate::trunc::Truncated;
use crate::WalkError;

/// Expected visit counts `G(., x) = delta_.(x) + sum_{i>=1} P_.[omega_i = x]`
/// for the chain killed at the window boundary, returned for every window
/// state at once.
pub fn green_column(tr: &Truncated, x: StateId) -> Result<Vec<f64>, WalkError> {
    let n = tr.n();
    let active: Vec<bool> = (0..n as u32)
        .map(|y| !tr.is_boundary(StateId(y)))
        .collect();
    let mut b = vec![0.0f64; n];
    if active[x.0 as usize] {
        b[x.0 as usize] = 1.0;
    } else {
        // absorbing target: G(y, x) is the probability of being absorbed at x
        for y in 0..n as u32 {
            if active[y as usize] {
                for &(z, p) in tr.row(StateId(y)) {
                    if z == x.0 {
                        b[y as usize] += p;
                    }
                }
            }
        }
    }
    let sol = solve_fixed_point(tr.rows(), &active, &b, tr.model.symmetric, RESIDUAL_TARGET)?;
    let mut g = sol.u;
    // boundary states: absorbed immediately
    for y in 0..n as u32 {
        if !active[y as usize] {
            g[y as usize] = if y == x.0 { 1.0 } else { 0.0 };
        }
    }
    Ok(g)
}

/// Green function `g(., x)` of the orbit chain with transition family `mu`,
/// evaluated at every window state (for `y` off the orbit this is
/// `sum_{x1} mu_y(x1) g(x1, x)`; orbit-boundary states count as absorbed).
pub fn green_mu_column(
    tr: &Truncated,
    family: &HittingFamily,
    x: StateId,
) -> Result<Vec<f64>, WalkError> {
    if !tr.in_orbit(x) {
        return Err(WalkError::NotInOrbit(x));
    }
    let n = tr.n();
    let rows_mu = family.orbit_rows(tr);
    let active: Vec<bool> = (0..n as u32)
        .map(|y| {
            let y = StateId(y);
            tr.in_orbit(y) && !tr.is_boundary(y)
        })
        .collect();
    let mut b = vec![0.0f64; n];
    if active[x.0 as usize] {
        b[x.0 as usize] = 1.0;
        // plus nothing: mass through orbit-boundary states never returns
    } else {
        // x is an absorbing orbit-boundary state
        for y in 0..n as u32 {
            if active[y as usize] {
                b[y as usize] = family.row(StateId(y)).weight(x);
            }
        }
    }
    let sol = solve_fixed_point(&rows_mu, &active, &b, false, RESIDUAL_TARGET)?;
    let mut g = vec![0.0f64; n];
    for y in 0..n as u32 {
        let yid = StateId(y);
        if active[y as usize] {
            g[y as usize] = sol.u[y as usize];
        } else if tr.in_orbit(yid) {
            g[y as usize] = if yid == x { 1.0 } else { 0.0 };
        } else if !tr.is_boundary(yid) {
            // off-orbit: one mu-step into the orbit
            let mut acc = 0.0;
            for (x1, w) in family.row(yid).iter() {
                if active[x1.0 as usize] {
                    acc += w * sol.u[x1.0 as usize];
                } else if x1 == x {
                    acc += w;
                }
            }
            g[y as usize] = acc;
        }
    }
    Ok(g)
}

/// Martin kernel `K(y, x) = G(y, x) / G(x0, x)` from a precomputed Green
/// column. Guards the division when the base value is below 1e-14.
pub fn martin_kernel_from_column(
    g_col: &[f64],
    x0: StateId,
    y: StateId,
) -> Result<f64, WalkError> {
    let denom = g_col[x0.0 as usize];
    if denom < 1e-14 {
        return Err(WalkError::MartinDivisionGuard(denom));
    }
    Ok(g_col[y.0 as usize] / denom)
}

/// Convenience: `K(y, x)` with a fresh column solve.
pub fn martin_kernel(
    tr: &Truncated,
    x0: StateId,
    y: StateId,
    x: StateId,
) -> Result<f64, WalkError> {
    let col = green_column(tr, x)?;
    martin_kernel_from_column(&col, x0, y)
}
