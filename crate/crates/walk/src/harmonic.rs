//! Harmonic functions on windows: residuals, extension from the orbit, and
//! the domination constants that control extensions of unbounded functions.

use lsd_core::space::StateId;
use lsd_core::FiniteMeasure;

use crate::hitting::HittingFamily;
use crate::solve::{solve_fixed_point, RESIDUAL_TARGET};
use crate::trunc::Truncated;
use crate::WalkError;

/// A real function on (part of) a window.
#[derive(Debug, Clone)]
pub struct WindowFn {
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl WindowFn {
    pub fn undefined(n: usize) -> Self {
        WindowFn {
            values: vec![0.0; n],
            defined: vec![false; n],
        }
    }

    pub fn from_fn(tr: &Truncated, mut f: impl FnMut(StateId) -> f64) -> Self {
        let n = tr.n();
        WindowFn {
            values: (0..n as u32).map(|y| f(StateId(y))).collect(),
            defined: vec![true; n],
        }
    }

    /// Defined only on the orbit.
    pub fn on_orbit(tr: &Truncated, mut f: impl FnMut(StateId) -> f64) -> Self {
        let mut out = Self::undefined(tr.n());
        for x in tr.orbit_ids() {
            out.set(x, f(x));
        }
        out
    }

    pub fn set(&mut self, s: StateId, v: f64) {
        self.values[s.0 as usize] = v;
        self.defined[s.0 as usize] = true;
    }

    pub fn get(&self, s: StateId) -> Option<f64> {
        self.defined[s.0 as usize].then(|| self.values[s.0 as usize])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Max residual of `h(y) = sum_z nu_y(z) h(z)` over interior states.
/// Errors if `h` is missing a value on some reachable state.
pub fn harmonic_residual_nu(tr: &Truncated, h: &WindowFn) -> Result<f64, WalkError> {
    let mut worst = 0.0f64;
    for y in tr.interior_ids() {
        let hy = h.get(y).ok_or(WalkError::MissingValue(y))?;
        let mut acc = 0.0;
        for &(z, p) in tr.row(y) {
            let hz = h.get(StateId(z)).ok_or(WalkError::MissingValue(StateId(z)))?;
            acc += p * hz;
        }
        worst = worst.max((hy - acc).abs());
    }
    Ok(worst)
}

/// Max residual of `h(x) = sum_z mu_x(z) h(z)` over interior orbit states.
pub fn harmonic_residual_mu(
    tr: &Truncated,
    family: &HittingFamily,
    h: &WindowFn,
) -> Result<f64, WalkError> {
    let mut worst = 0.0f64;
    for x in tr.orbit_ids() {
        if tr.is_boundary(x) {
            continue;
        }
        let hx = h.get(x).ok_or(WalkError::MissingValue(x))?;
        let mut acc = 0.0;
        for (z, w) in family.row(x).iter() {
            let hz = h.get(z).ok_or(WalkError::MissingValue(z))?;
            acc += w * hz;
        }
        worst = worst.max((hx - acc).abs());
    }
    Ok(worst)
}

/// Extends a function from the orbit to the whole window by
/// `h(y) = sum_x mu_y(x) h(x)`, realized as one Dirichlet solve for the
/// chain killed at the boundary (off-orbit boundary states get 0, matching
/// the killed hitting measures).
///
/// If `check_domination` is set (for functions not declared bounded), the
/// extension at each off-orbit state is verified against the domination
/// bound `mu_y(|h|) <= c * mu_{y0}(|h|)` from [`domination_constant`].
pub fn extend_harmonic(
    tr: &Truncated,
    family: &HittingFamily,
    h_orbit: &WindowFn,
    check_domination: bool,
) -> Result<WindowFn, WalkError> {
    let n = tr.n();
    let active: Vec<bool> = (0..n as u32)
        .map(|y| {
            let y = StateId(y);
            !tr.in_orbit(y) && !tr.is_boundary(y)
        })
        .collect();
    let mut b = vec![0.0f64; n];
    for y in 0..n as u32 {
        if !active[y as usize] {
            continue;
        }
        let mut acc = 0.0;
        for &(z, p) in tr.row(StateId(y)) {
            let z = StateId(z);
            if tr.in_orbit(z) {
                let hz = h_orbit.get(z).ok_or(WalkError::MissingValue(z))?;
                acc += p * hz;
            }
        }
        b[y as usize] = acc;
    }
    let sol = solve_fixed_point(tr.rows(), &active, &b, false, RESIDUAL_TARGET)?;
    let mut out = WindowFn::undefined(n);
    for y in 0..n as u32 {
        let yid = StateId(y);
        if tr.in_orbit(yid) {
            out.set(yid, h_orbit.get(yid).ok_or(WalkError::MissingValue(yid))?);
        } else if active[y as usize] {
            out.set(yid, sol.u[y as usize]);
        } else {
            out.set(yid, 0.0); // killed off-orbit boundary
        }
    }
    if check_domination {
        for y in tr.interior_ids() {
            if tr.in_orbit(y) {
                continue;
            }
            let (y0, c, _) = domination_constant(tr, family, y)?;
            let abs_at = |s: StateId| h_orbit.get(s).map(|v| v.abs()).unwrap_or(0.0);
            let lhs = family.row(y).iter().map(|(x, w)| w * abs_at(x)).sum::<f64>();
            let rhs = family
                .row(y0)
                .iter()
                .map(|(x, w)| w * abs_at(x))
                .sum::<f64>();
            if lhs > c * rhs + 1e-9 {
                return Err(WalkError::NoPositivePath(0));
            }
        }
    }
    Ok(out)
}

/// Finds `y0` in the orbit and `c > 0` with `mu_y <= c * mu_{y0}` pointwise,
/// by walking a positive-probability path `y0, y1, ..., yi, y` with all
/// intermediate states off the orbit; `c` is the reciprocal of the product
/// of the step probabilities. Verifies the inequality on the window when a
/// family is supplied.
pub fn domination_constant(
    tr: &Truncated,
    family: &HittingFamily,
    y: StateId,
) -> Result<(StateId, f64, Vec<StateId>), WalkError> {
    if tr.in_orbit(y) {
        return Ok((y, 1.0, vec![y]));
    }
    // BFS backwards from y through off-orbit states until an orbit state is
    // found; edges z -> w exist when nu_z(w) > 0.
    let n = tr.n();
    let mut prev: Vec<Option<(u32, f64)>> = vec![None; n]; // child -> (parent, step prob)
    let mut visited = vec![false; n];
    visited[y.0 as usize] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(y.0);
    let mut found: Option<u32> = None;
    'bfs: while let Some(cur) = queue.pop_front() {
        // predecessors z with nu_z(cur) > 0: scan neighbors and look up
        for (site, _) in tr.model.step_distribution(tr.window.site(StateId(cur))) {
            if let Some(z) = tr.window.id_of(&site) {
                let p = tr
                    .row(z)
                    .iter()
                    .find(|&&(w, _)| w == cur)
                    .map(|&(_, p)| p)
                    .unwrap_or(0.0);
                if p <= 0.0 {
                    continue;
                }
                if tr.in_orbit(z) {
                    prev[z.0 as usize] = Some((cur, p));
                    found = Some(z.0);
                    break 'bfs;
                }
                if !visited[z.0 as usize] && !tr.is_boundary(z) {
                    visited[z.0 as usize] = true;
                    prev[z.0 as usize] = Some((cur, p));
                    queue.push_back(z.0);
                }
            }
        }
    }
    let y0 = found.ok_or(WalkError::NoPositivePath(n))?;
    // reconstruct path y0 -> ... -> y and the product of probabilities
    let mut path = vec![StateId(y0)];
    let mut c = 1.0f64;
    let mut cur = y0;
    while cur != y.0 {
        let (next, p) = prev[cur as usize].unwrap();
        c /= p;
        cur = next;
        path.push(StateId(cur));
    }
    // verify mu_y <= c * mu_{y0} on the window
    let row_y = family.row(y);
    let row_y0 = family.row(StateId(y0));
    for (x, w) in row_y.iter() {
        if w > c * row_y0.weight(x) + 1e-10 {
            return Err(WalkError::NoPositivePath(path.len()));
        }
    }
    Ok((StateId(y0), c, path))
}

/// Integrates the orbit measure against a function that is defined on the
/// measure's support.
pub fn integrate(m: &FiniteMeasure, h: &WindowFn) -> Result<f64, WalkError> {
    let mut acc = 0.0;
    for (x, w) in m.iter() {
        let v = h.get(x).ok_or(WalkError::MissingValue(x))?;
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::model::WalkModel;
    use lsd_core::site::Site;

    #[test]
    fn constant_function_has_zero_residual() {
        let model = WalkModel::lattice_zd(2, 1);
        let tr = Truncated::at_origin(&model, 5);
        let h = WindowFn::from_fn(&tr, |_| 3.5);
        assert_eq!(harmonic_residual_nu(&tr, &h).unwrap(), 0.0);
    }

    /// h(n) = n is a martingale for the simple walk on Z.
    #[test]
    fn linear_function_is_harmonic_on_z() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 10);
        let h = WindowFn::from_fn(&tr, |y| match tr.window.site(y) {
            Site::Lattice(c) => c[0] as f64,
            _ => unreachable!(),
        });
        assert!(harmonic_residual_nu(&tr, &h).unwrap() < 1e-15);
    }

    #[test]
    fn missing_value_is_an_error() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 3);
        let mut h = WindowFn::undefined(tr.n());
        let zero = tr.window.id_of(&Site::lattice(&[0])).unwrap();
        h.set(zero, 1.0);
        assert!(matches!(
            harmonic_residual_nu(&tr, &h),
            Err(WalkError::MissingValue(_))
        ));
    }

    /// Z with X = 2Z and h(x) = x on the orbit: the harmonic extension is
    /// h(y) = y, with nu-residual at solver scale.
    #[test]
    fn linear_extension_on_z_stride2() {
        let model = WalkModel::lattice_zd(1, 2);
        let tr = Truncated::at_origin(&model, 20);
        let fam = HittingFamily::full(&tr).unwrap();
        let coord = |y: StateId| match tr.window.site(y) {
            Site::Lattice(c) => c[0] as f64,
            _ => unreachable!(),
        };
        let h = WindowFn::on_orbit(&tr, coord);
        let ext = extend_harmonic(&tr, &fam, &h, false).unwrap();
        for y in tr.interior_ids() {
            assert!(
                (ext.get(y).unwrap() - coord(y)).abs() < 1e-10,
                "at {:?}",
                tr.window.site(y)
            );
        }
        assert!(harmonic_residual_nu(&tr, &ext).unwrap() < 1e-10);
    }

    /// Constant 1 on the orbit extends to 1 - leak(y) exactly.
    #[test]
    fn constant_extension_tracks_leak() {
        let model = WalkModel::lattice_zd(1, 2);
        let tr = Truncated::at_origin(&model, 12);
        let fam = HittingFamily::full(&tr).unwrap();
        let h = WindowFn::on_orbit(&tr, |_| 1.0);
        let ext = extend_harmonic(&tr, &fam, &h, false).unwrap();
        for y in tr.interior_ids() {
            let expect = 1.0 - fam.leak(y);
            assert!((ext.get(y).unwrap() - expect).abs() < 1e-11);
        }
    }

    /// Z with X = 2Z, y = 1: a single positive step of probability 1/2 from
    /// an adjacent orbit point dominates, so c = 2.
    #[test]
    fn domination_constant_on_z() {
        let model = WalkModel::lattice_zd(1, 2);
        let tr = Truncated::at_origin(&model, 16);
        let fam = HittingFamily::full(&tr).unwrap();
        let y = tr.window.id_of(&Site::lattice(&[1])).unwrap();
        let (y0, c, path) = domination_constant(&tr, &fam, y).unwrap();
        let site = tr.window.site(y0);
        assert!(site == &Site::lattice(&[0]) || site == &Site::lattice(&[2]));
        assert!((c - 2.0).abs() < 1e-12);
        assert_eq!(path.len(), 2);
    }

    /// Tree with orbit = exponent sum in 4Z: the word `a b` sits at distance
    /// two from the orbit, giving c = 16 (two steps of probability 1/4).
    #[test]
    fn domination_constant_on_tree_distance_two() {
        let model = WalkModel::free_group_tree(4);
        let tr = Truncated::at_origin(&model, 8);
        let fam = HittingFamily::full(&tr).unwrap();
        let y = tr
            .window
            .id_of(&Site::Word(vec![
                lsd_core::site::LETTER_A,
                lsd_core::site::LETTER_B,
            ]))
            .unwrap();
        let (_, c, path) = domination_constant(&tr, &fam, y).unwrap();
        assert!((c - 16.0).abs() < 1e-12);
        assert_eq!(path.len(), 3);
    }

    /// Orbit states dominate themselves with c = 1.
    #[test]
    fn orbit_point_is_its_own_dominator() {
        let model = WalkModel::lattice_zd(1, 2);
        let tr = Truncated::at_origin(&model, 8);
        let fam = HittingFamily::full(&tr).unwrap();
        let x = tr.window.id_of(&Site::lattice(&[2])).unwrap();
        let (y0, c, _) = domination_constant(&tr, &fam, x).unwrap();
        assert_eq!(y0, x);
        assert_eq!(c, 1.0);
    }
}
