//! Hitting-measure discretization onto the distinguished orbit.
//!
//! For the chain killed at the window boundary, `mu_y(x)` is the probability
//! that the first orbit visit at a step `>= 1` happens at `x` (so a start in
//! the orbit takes one forced step first). Three routes are provided: the
//! full family (all `y` at once), a single row (one `y`, all `x`), and a
//! single column (one `x`, all `y`); they agree up to the solver residual
//! and are used to cross-check each other.

use lsd_core::measure::KahanSum;
use lsd_core::space::StateId;
use lsd_core::FiniteMeasure;

use crate::solve::{solve_fixed_point, RESIDUAL_TARGET};
use crate::trunc::Truncated;
use crate::WalkError;

/// The full hitting family on a window: one measure `mu_y` per state.
#[derive(Debug, Clone)]
pub struct HittingFamily {
    rows: Vec<FiniteMeasure>,
    leak: Vec<f64>,
    /// max-norm residual of the defining recursion, verified over the window
    pub residual: f64,
}

impl HittingFamily {
    /// Assembles the whole family by monotone sweeps of
    /// `U = B + A U` over the non-orbit interior states, then evaluates the
    /// forced-step rows for orbit states. Verifies the recursion residual
    /// at every window state.
    pub fn full(tr: &Truncated) -> Result<HittingFamily, WalkError> {
        let n = tr.n();
        if tr.orbit_ids().next().is_none() {
            return Err(WalkError::EmptyOrbit);
        }
        // scratch accumulator over window ids, stamped per row build
        let mut scratch = vec![0.0f64; n];
        let mut stamp = vec![0u32; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut cur_stamp = 0u32;

        let active: Vec<bool> = (0..n as u32)
            .map(|y| {
                let y = StateId(y);
                !tr.in_orbit(y) && !tr.is_boundary(y)
            })
            .collect();

        // B rows: one-step mass into the orbit
        let b_rows: Vec<Vec<(u32, f64)>> = (0..n as u32)
            .map(|y| {
                let y = StateId(y);
                if tr.is_boundary(y) {
                    return Vec::new();
                }
                tr.row(y)
                    .iter()
                    .filter(|&&(z, _)| tr.in_orbit(StateId(z)))
                    .copied()
                    .collect()
            })
            .collect();

        let mut u: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for y in 0..n {
            if active[y] {
                u[y] = b_rows[y].clone();
            }
        }

        // Gauss-Seidel sweeps; masses only grow, so the sweep increment
        // bounds the remaining mass.
        let max_sweeps = 100_000;
        let mut sweeps = 0;
        loop {
            let mut increment = 0.0f64;
            for y in 0..n {
                if !active[y] {
                    continue;
                }
                cur_stamp += 1;
                touched.clear();
                for &(x, w) in &b_rows[y] {
                    accumulate(&mut scratch, &mut stamp, &mut touched, cur_stamp, x, w);
                }
                for &(z, p) in tr.row(StateId(y as u32)) {
                    if active[z as usize] {
                        for &(x, w) in &u[z as usize] {
                            accumulate(&mut scratch, &mut stamp, &mut touched, cur_stamp, x, p * w);
                        }
                    }
                }
                touched.sort_unstable();
                let old_total: f64 = u[y].iter().map(|&(_, w)| w).sum();
                let mut new_row = Vec::with_capacity(touched.len());
                let mut new_total = 0.0;
                for &x in &touched {
                    let w = scratch[x as usize];
                    if w >= 1e-300 {
                        new_row.push((x, w));
                        new_total += w;
                    }
                }
                increment = increment.max(new_total - old_total);
                u[y] = new_row;
            }
            sweeps += 1;
            if increment <= RESIDUAL_TARGET * 0.01 {
                break;
            }
            if sweeps >= max_sweeps {
                return Err(WalkError::Solve(crate::solve::SolveError::NotConverged {
                    residual: increment,
                    iters: sweeps,
                }));
            }
        }

        // final rows: forced-step evaluation for every non-boundary state
        let mut rows: Vec<FiniteMeasure> = vec![FiniteMeasure::new(); n];
        for y in 0..n {
            if tr.is_boundary(StateId(y as u32)) {
                continue;
            }
            cur_stamp += 1;
            touched.clear();
            for &(x, w) in &b_rows[y] {
                accumulate(&mut scratch, &mut stamp, &mut touched, cur_stamp, x, w);
            }
            for &(z, p) in tr.row(StateId(y as u32)) {
                if active[z as usize] {
                    for &(x, w) in &u[z as usize] {
                        accumulate(&mut scratch, &mut stamp, &mut touched, cur_stamp, x, p * w);
                    }
                }
            }
            touched.sort_unstable();
            rows[y] = FiniteMeasure::from_pairs(
                touched
                    .iter()
                    .map(|&x| (StateId(x), scratch[x as usize])),
            );
        }

        let leak: Vec<f64> = (0..n)
            .map(|y| {
                if tr.is_boundary(StateId(y as u32)) {
                    1.0
                } else {
                    (1.0 - rows[y].total()).max(0.0)
                }
            })
            .collect();

        let mut family = HittingFamily {
            rows,
            leak,
            residual: f64::INFINITY,
        };
        family.residual = family.recursion_residual(tr);
        Ok(family)
    }

    /// `mu_y` for one state.
    pub fn row(&self, y: StateId) -> &FiniteMeasure {
        &self.rows[y.0 as usize]
    }

    /// Mass lost to the window boundary before hitting the orbit.
    pub fn leak(&self, y: StateId) -> f64 {
        self.leak[y.0 as usize]
    }

    pub fn max_interior_leak(&self, tr: &Truncated) -> f64 {
        tr.interior_ids()
            .map(|y| self.leak(y))
            .fold(0.0f64, f64::max)
    }

    /// Max-norm residual of
    /// `mu_y(x) = nu_y(x) + sum_{z not in X} nu_y(z) mu_z(x)`
    /// over all non-boundary `y` and all `x` in the union of supports.
    pub fn recursion_residual(&self, tr: &Truncated) -> f64 {
        let mut worst = 0.0f64;
        for y in tr.interior_ids() {
            let mut expect = FiniteMeasure::new();
            for &(z, p) in tr.row(y) {
                let z = StateId(z);
                if tr.in_orbit(z) {
                    expect.add_mass(z, p);
                } else {
                    expect.add_scaled(&self.rows[z.0 as usize], p);
                }
            }
            let row = &self.rows[y.0 as usize];
            for (x, w) in row.iter() {
                worst = worst.max((w - expect.weight(x)).abs());
            }
            for (x, w) in expect.iter() {
                if row.weight(x) == 0.0 {
                    worst = worst.max(w);
                }
            }
        }
        worst
    }

    /// `mu_y(h) = sum_x mu_y(x) h(x)`.
    pub fn integrate_row(&self, y: StateId, h: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for (x, w) in self.rows[y.0 as usize].iter() {
            acc.add(w * h[x.0 as usize]);
        }
        acc.value()
    }

    /// One application of the orbit transition operator:
    /// `(P_mu f)(y) = sum_x mu_y(x) f(x)` for every window state.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.rows.len())
            .map(|y| self.integrate_row(StateId(y as u32), f))
            .collect()
    }

    /// Transition rows restricted to orbit states, for chain solves.
    pub fn orbit_rows(&self, tr: &Truncated) -> Vec<Vec<(u32, f64)>> {
        (0..self.rows.len())
            .map(|y| {
                if tr.in_orbit(StateId(y as u32)) {
                    self.rows[y].iter().map(|(x, w)| (x.0, w)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect()
    }
}

#[inline]
fn accumulate(
    scratch: &mut [f64],
    stamp: &mut [u32],
    touched: &mut Vec<u32>,
    cur: u32,
    x: u32,
    w: f64,
) {
    if stamp[x as usize] != cur {
        stamp[x as usize] = cur;
        scratch[x as usize] = 0.0;
        touched.push(x);
    }
    scratch[x as usize] += w;
}

/// Single-row route: `mu_y` for one `y` via the adjoint (visit-count) solve.
/// Returns the measure and its leak.
pub fn hitting_measure(tr: &Truncated, y: StateId) -> Result<(FiniteMeasure, f64), WalkError> {
    let n = tr.n();
    if tr.is_boundary(y) {
        return Ok((FiniteMeasure::new(), 1.0));
    }
    let active: Vec<bool> = (0..n as u32)
        .map(|s| {
            let s = StateId(s);
            !tr.in_orbit(s) && !tr.is_boundary(s)
        })
        .collect();
    // transpose of the active-restricted transition matrix
    let mut rows_t: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for z in 0..n as u32 {
        if !active[z as usize] {
            continue;
        }
        for &(w, p) in tr.row(StateId(z)) {
            if active[w as usize] {
                rows_t[w as usize].push((z, p));
            }
        }
    }
    // first-step distribution restricted to active states
    let mut b = vec![0.0f64; n];
    for &(z, p) in tr.row(y) {
        if active[z as usize] {
            b[z as usize] = p;
        }
    }
    let sol = solve_fixed_point(&rows_t, &active, &b, false, RESIDUAL_TARGET)?;
    // mu_y = nu_y|X + sum_z visits(z) nu_z|X
    let mut mu = FiniteMeasure::new();
    for &(z, p) in tr.row(y) {
        if tr.in_orbit(StateId(z)) {
            mu.add_mass(StateId(z), p);
        }
    }
    for z in 0..n {
        if !active[z] || sol.u[z] == 0.0 {
            continue;
        }
        for &(x, p) in tr.row(StateId(z as u32)) {
            if tr.in_orbit(StateId(x)) {
                mu.add_mass(StateId(x), sol.u[z] * p);
            }
        }
    }
    let leak = (1.0 - mu.total()).max(0.0);
    Ok((mu, leak))
}

/// Single-column route: `y -> mu_y(x)` for one orbit target `x`, over the
/// whole window.
pub fn hitting_function(tr: &Truncated, x: StateId) -> Result<Vec<f64>, WalkError> {
    if !tr.in_orbit(x) {
        return Err(WalkError::NotInOrbit(x));
    }
    let n = tr.n();
    let active: Vec<bool> = (0..n as u32)
        .map(|s| {
            let s = StateId(s);
            !tr.in_orbit(s) && !tr.is_boundary(s)
        })
        .collect();
    let b: Vec<f64> = (0..n as u32)
        .map(|y| {
            if active[y as usize] {
                tr.row(StateId(y))
                    .iter()
                    .filter(|&&(z, _)| z == x.0)
                    .map(|&(_, p)| p)
                    .sum()
            } else {
                0.0
            }
        })
        .collect();
    let sol = solve_fixed_point(tr.rows(), &active, &b, false, RESIDUAL_TARGET)?;
    // evaluate the forced-step formula at every non-boundary state
    let mut out = vec![0.0f64; n];
    for y in 0..n as u32 {
        let yid = StateId(y);
        if tr.is_boundary(yid) {
            continue;
        }
        let mut acc = 0.0;
        for &(z, p) in tr.row(yid) {
            if z == x.0 {
                acc += p;
            }
            if active[z as usize] {
                acc += p * sol.u[z as usize];
            }
        }
        out[y as usize] = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::model::WalkModel;
    use lsd_core::site::Site;

    fn id_of(tr: &Truncated, s: &Site) -> StateId {
        tr.window.id_of(s).unwrap()
    }

    /// Z with X = 2Z: mu_0 = {0: 1/2, +2: 1/4, -2: 1/4} and
    /// mu_1 = {0: 1/2, 2: 1/2}. Hand-solved; also the parity argument gives
    /// mu_y = nu_y for odd y and nu^2_y for even y.
    #[test]
    fn z_stride2_hand_values() {
        let model = WalkModel::lattice_zd(1, 2);
        let tr = Truncated::at_origin(&model, 20);
        let fam = HittingFamily::full(&tr).unwrap();
        assert!(fam.residual < 1e-12, "residual {}", fam.residual);

        let zero = id_of(&tr, &Site::lattice(&[0]));
        let row0 = fam.row(zero);
        assert!((row0.weight(zero) - 0.5).abs() < 1e-12);
        assert!((row0.weight(id_of(&tr, &Site::lattice(&[2]))) - 0.25).abs() < 1e-12);
        assert!((row0.weight(id_of(&tr, &Site::lattice(&[-2]))) - 0.25).abs() < 1e-12);

        let one = id_of(&tr, &Site::lattice(&[1]));
        let row1 = fam.row(one);
        assert!((row1.weight(zero) - 0.5).abs() < 1e-12);
        assert!((row1.weight(id_of(&tr, &Site::lattice(&[2]))) - 0.5).abs() < 1e-12);
    }

    /// Path-enumeration oracle: on Z with X = 3Z, mu_1(0) equals the sum over
    /// all walks 1 -> 0 staying in {1, 2} before the end, enumerated to depth
    /// 60 (geometric tail < 1e-13).
    #[test]
    fn z_stride3_matches_path_enumeration() {
        let model = WalkModel::lattice_zd(1, 3);
        let tr = Truncated::at_origin(&model, 30);
        let fam = HittingFamily::full(&tr).unwrap();
        let one = id_of(&tr, &Site::lattice(&[1]));
        let zero = id_of(&tr, &Site::lattice(&[0]));
        let three = id_of(&tr, &Site::lattice(&[3]));

        // enumerate: state space {1, 2} transient, absorption at 0 or 3
        // p1(0): from 1 go to 0 (1/2) or to 2 (1/2); from 2 go to 1 (1/2) or 3 (1/2)
        let mut p1 = [0.0f64; 2]; // [P(absorb at 0), P(absorb at 3)] from 1
        let mut mass = [1.0f64, 0.0]; // distribution over {1, 2}
        for _ in 0..60 {
            p1[0] += mass[0] * 0.5;
            p1[1] += mass[1] * 0.5;
            let new1 = mass[1] * 0.5;
            let new2 = mass[0] * 0.5;
            mass = [new1, new2];
        }
        let row = fam.row(one);
        assert!((row.weight(zero) - p1[0]).abs() < 1e-12);
        assert!((row.weight(three) - p1[1]).abs() < 1e-12);
    }

    /// When the orbit is everything, R >= 1 forces exactly one step: mu = nu.
    #[test]
    fn orbit_everything_gives_nu() {
        let model = WalkModel::lattice_zd(2, 1);
        let tr = Truncated::at_origin(&model, 6);
        let fam = HittingFamily::full(&tr).unwrap();
        for y in tr.interior_ids() {
            let diff = lsd_core::measure::tv_distance(fam.row(y), &tr.step_measure(y));
            assert!(diff < 1e-14);
        }
    }

    /// The three routes (full family, adjoint row, column) agree.
    #[test]
    fn routes_agree() {
        let model = WalkModel::lattice_zd(2, 2);
        let tr = Truncated::at_origin(&model, 8);
        let fam = HittingFamily::full(&tr).unwrap();
        let y = id_of(&tr, &Site::lattice(&[1, 0]));
        let (row, leak) = hitting_measure(&tr, y).unwrap();
        assert!((leak - fam.leak(y)).abs() < 1e-11);
        assert!(lsd_core::measure::tv_distance(&row, fam.row(y)) < 1e-11);

        let x = id_of(&tr, &Site::lattice(&[2, 0]));
        let col = hitting_function(&tr, x).unwrap();
        assert!((col[y.0 as usize] - fam.row(y).weight(x)).abs() < 1e-11);
    }

    /// On the tree with even-word orbit, every odd word steps into the orbit,
    /// so mu_y = nu_y off the orbit (parity oracle).
    #[test]
    fn tree_parity_oracle() {
        let model = WalkModel::free_group_tree(2);
        let tr = Truncated::at_origin(&model, 6);
        let fam = HittingFamily::full(&tr).unwrap();
        assert!(fam.residual < 1e-12);
        for y in tr.interior_ids() {
            if !tr.in_orbit(y) {
                let diff = lsd_core::measure::tv_distance(fam.row(y), &tr.step_measure(y));
                assert!(diff < 1e-14);
            }
        }
    }

    /// Symmetric nu gives mu symmetric on interior orbit pairs (the time
    /// reversal needs both endpoints non-absorbing on the killed chain).
    #[test]
    fn mu_symmetric_on_orbit() {
        let model = WalkModel::lattice_zd(2, 2);
        let tr = Truncated::at_origin(&model, 8);
        let fam = HittingFamily::full(&tr).unwrap();
        for x in tr.orbit_ids().filter(|&x| !tr.is_boundary(x)) {
            for (y, w) in fam.row(x).iter() {
                if tr.is_boundary(y) {
                    continue;
                }
                assert!(
                    (w - fam.row(y).weight(x)).abs() < 1e-10,
                    "asymmetry at ({x:?},{y:?})"
                );
            }
        }
    }
}
