//! The catalogued discrete walk models: `Z^d` lattices with an optional
//! finite-index orbit sublattice, a biased walk on `Z`, and the 4-regular
//! tree (Cayley graph of F2) with orbits cut out by the exponent-sum
//! homomorphism.

use crate::error::CoreError;
use crate::group::GroupElem;
use crate::measure::FiniteMeasure;
use crate::site::{self, Site};
use crate::space::{StateId, Window};

/// A catalogued model family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Simple nearest-neighbor walk on `Z^d`; the distinguished orbit is the
    /// sublattice `(stride Z)^d` (stride 1 makes the orbit all of `Y`).
    LatticeZd { d: usize, stride: u32 },
    /// Nearest-neighbor walk on `Z` with `nu(+1) = p_right`; not symmetric
    /// unless `p_right = 1/2`. Orbit is all of `Z`.
    BiasedZ { p_right: f64 },
    /// Simple walk on the 4-regular tree; the orbit is the subgroup of F2
    /// with exponent sum divisible by `stride` (stride 1: everything,
    /// stride 2: words of even length).
    FreeGroupTree { stride: u32 },
}

/// A countable state space with its transition family, deck group, and
/// distinguished orbit.
#[derive(Debug, Clone)]
pub struct WalkModel {
    pub family: Family,
    pub symmetric: bool,
}

impl WalkModel {
    pub fn new(family: Family) -> Result<WalkModel, CoreError> {
        match &family {
            Family::LatticeZd { d, stride } => {
                if *d == 0 || *d > 3 {
                    return Err(CoreError::BadConfig(format!(
                        "lattice dimension {d} not in 1..=3"
                    )));
                }
                if *stride == 0 {
                    return Err(CoreError::BadConfig("stride must be >= 1".into()));
                }
            }
            Family::BiasedZ { p_right } => {
                if !(*p_right > 0.0 && *p_right < 1.0) {
                    return Err(CoreError::BadConfig(format!(
                        "p_right {p_right} not in (0,1)"
                    )));
                }
            }
            Family::FreeGroupTree { stride } => {
                if *stride == 0 {
                    return Err(CoreError::BadConfig("stride must be >= 1".into()));
                }
            }
        }
        let symmetric = match &family {
            Family::LatticeZd { .. } => true,
            Family::FreeGroupTree { .. } => true,
            Family::BiasedZ { p_right } => (*p_right - 0.5).abs() < 1e-15,
        };
        Ok(WalkModel { family, symmetric })
    }

    pub fn lattice_zd(d: usize, stride: u32) -> WalkModel {
        WalkModel::new(Family::LatticeZd { d, stride }).expect("valid lattice params")
    }

    pub fn free_group_tree(stride: u32) -> WalkModel {
        WalkModel::new(Family::FreeGroupTree { stride }).expect("valid tree params")
    }

    pub fn biased_z(p_right: f64) -> WalkModel {
        WalkModel::new(Family::BiasedZ { p_right }).expect("valid bias")
    }

    pub fn family_name(&self) -> &'static str {
        match &self.family {
            Family::LatticeZd { stride: 1, .. } => "zd-lattice",
            Family::LatticeZd { .. } => "sublattice-orbit",
            Family::BiasedZ { .. } => "biased-z",
            Family::FreeGroupTree { .. } => "free-group-tree",
        }
    }

    pub fn model_id(&self) -> String {
        match &self.family {
            Family::LatticeZd { d, stride } => format!("{}-d{d}-s{stride}", self.family_name()),
            Family::BiasedZ { p_right } => format!("biased-z-p{p_right}"),
            Family::FreeGroupTree { stride } => format!("free-group-tree-s{stride}"),
        }
    }

    /// Dimension for lattice word parsing; `None` for the tree.
    pub fn lattice_dim(&self) -> Option<usize> {
        match &self.family {
            Family::LatticeZd { d, .. } => Some(*d),
            Family::BiasedZ { .. } => Some(1),
            Family::FreeGroupTree { .. } => None,
        }
    }

    pub fn origin(&self) -> Site {
        match &self.family {
            Family::LatticeZd { .. } | Family::BiasedZ { .. } => Site::lattice(&[0, 0, 0]),
            Family::FreeGroupTree { .. } => Site::origin_word(),
        }
    }

    /// Neighbors in a fixed deterministic order (the order also fixes the
    /// step distribution layout).
    pub fn neighbors(&self, s: &Site) -> Vec<Site> {
        match (&self.family, s) {
            (Family::LatticeZd { d, .. }, Site::Lattice(c)) => {
                let mut out = Vec::with_capacity(2 * d);
                for axis in 0..*d {
                    for sign in [1i64, -1] {
                        let mut n = *c;
                        n[axis] += sign;
                        out.push(Site::Lattice(n));
                    }
                }
                out
            }
            (Family::BiasedZ { .. }, Site::Lattice(c)) => vec![
                Site::Lattice([c[0] + 1, 0, 0]),
                Site::Lattice([c[0] - 1, 0, 0]),
            ],
            (Family::FreeGroupTree { .. }, Site::Word(w)) => (0u8..4)
                .map(|l| Site::Word(Site::word_push(w, l)))
                .collect(),
            _ => panic!("site {s} does not belong to family {:?}", self.family),
        }
    }

    /// One-step distribution `nu_y` as `(site, probability)` pairs, in the
    /// `neighbors` order.
    pub fn step_distribution(&self, s: &Site) -> Vec<(Site, f64)> {
        match &self.family {
            Family::LatticeZd { d, .. } => {
                let p = 1.0 / (2.0 * *d as f64);
                self.neighbors(s).into_iter().map(|n| (n, p)).collect()
            }
            Family::BiasedZ { p_right } => {
                let ns = self.neighbors(s);
                vec![(ns[0].clone(), *p_right), (ns[1].clone(), 1.0 - *p_right)]
            }
            Family::FreeGroupTree { .. } => self
                .neighbors(s)
                .into_iter()
                .map(|n| (n, 0.25))
                .collect(),
        }
    }

    /// Membership in the distinguished orbit `X`.
    pub fn in_orbit(&self, s: &Site) -> bool {
        match (&self.family, s) {
            (Family::LatticeZd { d, stride }, Site::Lattice(c)) => {
                let k = *stride as i64;
                c[..*d].iter().all(|&x| x.rem_euclid(k) == 0)
            }
            (Family::BiasedZ { .. }, Site::Lattice(_)) => true,
            (Family::FreeGroupTree { stride }, Site::Word(w)) => {
                Site::word_exponent_sum(w).rem_euclid(*stride as i64) == 0
            }
            _ => false,
        }
    }

    /// Graph distance between two sites.
    pub fn graph_distance(&self, u: &Site, v: &Site) -> u64 {
        match (u, v) {
            (Site::Lattice(a), Site::Lattice(b)) => {
                (0..3).map(|i| (a[i] - b[i]).unsigned_abs()).sum()
            }
            (Site::Word(a), Site::Word(b)) => {
                Site::word_concat(&Site::word_inverse(a), b).len() as u64
            }
            _ => panic!("sites from different families"),
        }
    }

    /// A small canonical set of deck-group elements (elements of the group
    /// whose orbit is `X`), used by equivariance checks.
    pub fn deck_generators(&self) -> Vec<GroupElem> {
        match &self.family {
            Family::LatticeZd { d, stride } => {
                let k = *stride as i64;
                (0..*d)
                    .map(|axis| {
                        let mut v = [0i64; 3];
                        v[axis] = k;
                        GroupElem::Translation(v)
                    })
                    .collect()
            }
            Family::BiasedZ { .. } => vec![GroupElem::translation(&[1])],
            Family::FreeGroupTree { stride } => {
                let s = *stride as usize;
                let a_pow: Vec<u8> = std::iter::repeat(site::LETTER_A).take(s).collect();
                let b_pow: Vec<u8> = std::iter::repeat(site::LETTER_B).take(s).collect();
                let mut out = vec![GroupElem::LeftWord(a_pow), GroupElem::LeftWord(b_pow)];
                if s >= 2 {
                    // a^(s-1) b also has exponent sum s
                    let mut w: Vec<u8> = std::iter::repeat(site::LETTER_A).take(s - 1).collect();
                    w.push(site::LETTER_B);
                    out.push(GroupElem::LeftWord(w));
                }
                out
            }
        }
    }

    /// Solves `x = gamma . x0` for `gamma` given orbit points `x`, `x0`.
    pub fn deck_element_between(&self, x0: &Site, x: &Site) -> GroupElem {
        match (x0, x) {
            (Site::Lattice(a), Site::Lattice(b)) => {
                GroupElem::Translation([b[0] - a[0], b[1] - a[1], b[2] - a[2]])
            }
            (Site::Word(a), Site::Word(b)) => {
                GroupElem::LeftWord(Site::word_concat(b, &Site::word_inverse(a)))
            }
            _ => panic!("sites from different families"),
        }
    }

    /// Builds the truncation window of the given radius around `center`.
    pub fn window(&self, center: &Site, radius: u32) -> Window {
        Window::build(center.clone(), radius, |s| self.neighbors(s))
    }

    pub fn window_at_origin(&self, radius: u32) -> Window {
        self.window(&self.origin(), radius)
    }

    /// `nu_y` restricted to a window, as a measure on ids. Mass on sites
    /// outside the window is dropped (the killed chain); the caller can read
    /// the leak off the total.
    pub fn step_measure_on(&self, w: &Window, y: StateId) -> FiniteMeasure {
        let mut m = FiniteMeasure::new();
        if w.is_boundary(y) {
            return m; // absorbing
        }
        for (site, p) in self.step_distribution(w.site(y)) {
            if let Some(id) = w.id_of(&site) {
                m.add_mass(id, p);
            }
        }
        m
    }
}

/// Pushforward of a measure on a window under a deck element:
/// `(g.m)(g.A) = m(A)`. Errors if any support point leaves the window.
pub fn pushforward(
    g: &GroupElem,
    m: &FiniteMeasure,
    w: &Window,
) -> Result<FiniteMeasure, CoreError> {
    let mut out = FiniteMeasure::new();
    for (s, mass) in m.iter() {
        let image = g.act(w.site(s))?;
        match w.id_of(&image) {
            Some(id) => out.add_mass(id, mass),
            None => return Err(CoreError::SupportEscapes(image.to_string())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::tv_distance;

    #[test]
    fn z2_window_sizes() {
        let m = WalkModel::lattice_zd(2, 1);
        let w = m.window_at_origin(2);
        // L1 ball of radius 2 in Z^2: 1 + 4 + 8 = 13 states
        assert_eq!(w.len(), 13);
    }

    #[test]
    fn step_measures_are_probabilities_in_the_interior() {
        let m = WalkModel::lattice_zd(2, 1);
        let w = m.window_at_origin(4);
        for y in w.interior_ids() {
            let nu = m.step_measure_on(&w, y);
            assert!((nu.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tree_neighbors_are_symmetric() {
        let m = WalkModel::free_group_tree(2);
        let w = m.window_at_origin(4);
        for y in w.ids() {
            for n in m.neighbors(w.site(y)) {
                assert!(m.neighbors(&n).contains(w.site(y)));
            }
        }
    }

    #[test]
    fn orbit_membership_tree_even_words() {
        let m = WalkModel::free_group_tree(2);
        assert!(m.in_orbit(&Site::origin_word()));
        assert!(!m.in_orbit(&Site::Word(vec![site::LETTER_A])));
        assert!(m.in_orbit(&Site::Word(vec![site::LETTER_A, site::LETTER_B])));
        // a b^-1 has exponent sum 0
        assert!(m.in_orbit(&Site::Word(vec![site::LETTER_A, site::LETTER_B_INV])));
    }

    #[test]
    fn pushforward_identity_is_identity() {
        let m = WalkModel::lattice_zd(2, 1);
        let w = m.window_at_origin(3);
        let y = w.id_of(&Site::lattice(&[1, 0])).unwrap();
        let nu = m.step_measure_on(&w, y);
        let g = GroupElem::identity_translation();
        let pushed = pushforward(&g, &nu, &w).unwrap();
        assert_eq!(tv_distance(&nu, &pushed), 0.0);
    }

    #[test]
    fn pushforward_transports_dirac() {
        let m = WalkModel::lattice_zd(2, 1);
        let w = m.window_at_origin(4);
        let from = w.id_of(&Site::lattice(&[0, 0])).unwrap();
        let to = w.id_of(&Site::lattice(&[2, -1])).unwrap();
        let g = GroupElem::translation(&[2, -1]);
        let pushed = pushforward(&g, &FiniteMeasure::dirac(from), &w).unwrap();
        assert_eq!(pushed, FiniteMeasure::dirac(to));
    }

    #[test]
    fn pushforward_matches_translated_step_measure() {
        // nu_{(0,0)} pushed by (1,0) equals nu_{(1,0)} componentwise
        let m = WalkModel::lattice_zd(2, 1);
        let w = m.window_at_origin(5);
        let y0 = w.id_of(&Site::lattice(&[0, 0])).unwrap();
        let y1 = w.id_of(&Site::lattice(&[1, 0])).unwrap();
        let g = GroupElem::translation(&[1, 0]);
        let pushed = pushforward(&g, &m.step_measure_on(&w, y0), &w).unwrap();
        assert_eq!(pushed, m.step_measure_on(&w, y1));
    }

    #[test]
    fn pushforward_reports_escaping_state() {
        let m = WalkModel::lattice_zd(1, 1);
        let w = m.window_at_origin(2);
        let edge = w.id_of(&Site::lattice(&[2])).unwrap();
        let g = GroupElem::translation(&[1]);
        let err = pushforward(&g, &FiniteMeasure::dirac(edge), &w).unwrap_err();
        assert!(err.to_string().contains("(3,0,0)"));
    }

    #[test]
    fn deck_element_between_orbit_points() {
        let m = WalkModel::free_group_tree(2);
        let x0 = Site::origin_word();
        let gamma = GroupElem::parse("a b", None).unwrap();
        let x = gamma.act(&x0).unwrap();
        assert_eq!(m.deck_element_between(&x0, &x), gamma);
    }
}
