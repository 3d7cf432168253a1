//! A walk model materialized on a truncation window: the sub-stochastic
//! transition rows of the chain killed at the window boundary, plus orbit
//! membership flags.

use lsd_core::model::WalkModel;
use lsd_core::site::Site;
use lsd_core::space::{StateId, Window};
use lsd_core::FiniteMeasure;

/// Sparse transition rows over window ids; boundary rows are empty
/// (absorbing), so every matrix-vector product below is for the killed chain.
#[derive(Debug, Clone)]
pub struct Truncated {
    pub model: WalkModel,
    pub window: Window,
    rows: Vec<Vec<(u32, f64)>>,
    orbit: Vec<bool>,
}

impl Truncated {
    pub fn new(model: &WalkModel, center: &Site, radius: u32) -> Truncated {
        let window = model.window(center, radius);
        let n = window.len();
        let mut rows = Vec::with_capacity(n);
        let mut orbit = Vec::with_capacity(n);
        for id in window.ids() {
            orbit.push(model.in_orbit(window.site(id)));
            if window.is_boundary(id) {
                rows.push(Vec::new());
                continue;
            }
            let mut row = Vec::new();
            for (site, p) in model.step_distribution(window.site(id)) {
                if let Some(z) = window.id_of(&site) {
                    row.push((z.0, p));
                }
            }
            rows.push(row);
        }
        Truncated {
            model: model.clone(),
            window,
            rows,
            orbit,
        }
    }

    pub fn at_origin(model: &WalkModel, radius: u32) -> Truncated {
        Truncated::new(model, &model.origin(), radius)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, y: StateId) -> &[(u32, f64)] {
        &self.rows[y.0 as usize]
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    pub fn in_orbit(&self, y: StateId) -> bool {
        self.orbit[y.0 as usize]
    }

    pub fn is_boundary(&self, y: StateId) -> bool {
        self.window.is_boundary(y)
    }

    pub fn orbit_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        self.window.ids().filter(|&i| self.in_orbit(i))
    }

    /// Interior (non-absorbing) states.
    pub fn interior_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        self.window.interior_ids()
    }

    /// `nu_y` as a measure on window ids (empty at the boundary).
    pub fn step_measure(&self, y: StateId) -> FiniteMeasure {
        FiniteMeasure::from_pairs(self.row(y).iter().map(|&(z, p)| (StateId(z), p)))
    }

    /// Pushes a measure one step through the killed chain; mass at the
    /// boundary dies. Returns the new measure (the lost mass is the
    /// difference of totals).
    pub fn push_measure(&self, m: &FiniteMeasure) -> FiniteMeasure {
        let mut out = FiniteMeasure::new();
        for (y, w) in m.iter() {
            for &(z, p) in self.row(y) {
                out.add_mass(StateId(z), w * p);
            }
        }
        out
    }

    /// `sum_z nu_y(z) f(z)` over the window (killed chain).
    pub fn step_average(&self, y: StateId, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &(z, p) in self.row(y) {
            acc += p * f[z as usize];
        }
        acc
    }
}
