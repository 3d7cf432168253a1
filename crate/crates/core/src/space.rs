//! State registries and truncation windows.
//!
//! A window is a finite, connected piece of a countable state space,
//! enumerated breadth-first from a center so ids are dense and reproducible.
//! States at graph distance exactly `radius` form the absorbing boundary;
//! every exact solve on a window is a solve for the sub-stochastic chain
//! killed there.

use std::collections::HashMap;
use std::fmt;

use crate::site::Site;

/// Dense integer id of a state within one registered window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A truncation window: BFS-enumerated states, absorbing boundary at the
/// window's edge.
#[derive(Debug, Clone)]
pub struct Window {
    sites: Vec<Site>,
    index: HashMap<Site, StateId>,
    dist: Vec<u32>,
    radius: u32,
    center: Site,
}

impl Window {
    /// Builds a window by BFS from `center`, expanding with `neighbors` (the
    /// model's adjacency in a fixed deterministic order) out to `radius`.
    pub fn build(
        center: Site,
        radius: u32,
        mut neighbors: impl FnMut(&Site) -> Vec<Site>,
    ) -> Window {
        let mut sites = vec![center.clone()];
        let mut index = HashMap::new();
        index.insert(center.clone(), StateId(0));
        let mut dist = vec![0u32];
        let mut head = 0usize;
        while head < sites.len() {
            let d = dist[head];
            if d == radius {
                head += 1;
                continue;
            }
            let here = sites[head].clone();
            for n in neighbors(&here) {
                if !index.contains_key(&n) {
                    index.insert(n.clone(), StateId(sites.len() as u32));
                    sites.push(n);
                    dist.push(d + 1);
                }
            }
            head += 1;
        }
        Window {
            sites,
            index,
            dist,
            radius,
            center,
        }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn center(&self) -> &Site {
        &self.center
    }

    pub fn site(&self, id: StateId) -> &Site {
        &self.sites[id.0 as usize]
    }

    pub fn id_of(&self, s: &Site) -> Option<StateId> {
        self.index.get(s).copied()
    }

    /// Graph distance from the window center.
    pub fn dist_from_center(&self, id: StateId) -> u32 {
        self.dist[id.0 as usize]
    }

    /// A boundary state is absorbing: it sits at exactly the window's edge.
    pub fn is_boundary(&self, id: StateId) -> bool {
        self.dist[id.0 as usize] == self.radius
    }

    pub fn ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.sites.len() as u32).map(StateId)
    }

    pub fn interior_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        self.ids().filter(|&i| !self.is_boundary(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_neighbors(s: &Site) -> Vec<Site> {
        match s {
            Site::Lattice(c) => vec![
                Site::Lattice([c[0] + 1, 0, 0]),
                Site::Lattice([c[0] - 1, 0, 0]),
            ],
            _ => unreachable!(),
        }
    }

    #[test]
    fn bfs_ids_are_unique_and_dense() {
        let w = Window::build(Site::lattice(&[0]), 5, line_neighbors);
        assert_eq!(w.len(), 11);
        for id in w.ids() {
            assert_eq!(w.id_of(w.site(id)).unwrap(), id);
        }
    }

    #[test]
    fn boundary_sits_at_the_edge() {
        let w = Window::build(Site::lattice(&[0]), 5, line_neighbors);
        let b: Vec<i64> = w
            .ids()
            .filter(|&i| w.is_boundary(i))
            .map(|i| match w.site(i) {
                Site::Lattice(c) => c[0],
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(b.len(), 2);
        assert!(b.contains(&5) && b.contains(&-5));
    }

    #[test]
    fn distance_zero_at_center() {
        let w = Window::build(Site::lattice(&[0]), 3, line_neighbors);
        let c = w.id_of(&Site::lattice(&[0])).unwrap();
        assert_eq!(w.dist_from_center(c), 0);
    }
}
