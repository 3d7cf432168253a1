//! Kernel powers `nu^k` and irreducibility over a window.

use lsd_core::space::StateId;
use lsd_core::FiniteMeasure;

use crate::trunc::Truncated;

/// `nu^k_y` restricted to the window, with the leaked boundary mass.
/// `k = 0` returns the Dirac at `y` (the customary `nu^0 = delta`).
pub fn kernel_power(tr: &Truncated, k: u32, y: StateId) -> (FiniteMeasure, f64) {
    let mut m = FiniteMeasure::dirac(y);
    for _ in 0..k {
        m = tr.push_measure(&m);
    }
    let leak = (1.0 - m.total()).max(0.0);
    (m, leak)
}

/// Verdict of the irreducibility scan.
#[derive(Debug, Clone, PartialEq)]
pub enum IrreducibilityWitness {
    /// Every ordered pair `(y, z)` has `nu^k_y(z) > 0` for some `k <= kmax`;
    /// carries the largest `k` that was needed.
    Irreducible { max_k_used: u32 },
    /// A failing pair.
    Reducible { from: StateId, to: StateId },
}

/// Checks that for all `y, z` in the window some power `k <= kmax` gives
/// `nu^k_y(z) > 0`, walking reachability sets step by step (transitions are
/// window-restricted; killing is ignored for reachability so that edge
/// states are judged by the graph, not by absorption).
pub fn is_irreducible(tr: &Truncated, kmax: u32) -> IrreducibilityWitness {
    let n = tr.n();
    // window-restricted adjacency from every state (including boundary)
    let adj: Vec<Vec<u32>> = (0..n as u32)
        .map(|y| {
            tr.model
                .step_distribution(tr.window.site(StateId(y)))
                .into_iter()
                .filter_map(|(s, p)| {
                    if p > 0.0 {
                        tr.window.id_of(&s).map(|z| z.0)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let mut max_k_used = 0u32;
    let mut reach = vec![false; n];
    let mut frontier: Vec<u32> = Vec::new();
    for y in 0..n as u32 {
        // reached[z] = some k <= kmax with nu^k_y(z) > 0; track the set of
        // states reachable at exactly step k and union as k grows
        let mut seen_at_k: Vec<bool> = vec![false; n];
        let mut ever = vec![false; n];
        seen_at_k[y as usize] = true;
        let mut missing = n;
        let mut k_needed = 0u32;
        for k in 1..=kmax {
            reach.iter_mut().for_each(|r| *r = false);
            frontier.clear();
            for z in 0..n {
                if seen_at_k[z] {
                    for &w in &adj[z] {
                        if !reach[w as usize] {
                            reach[w as usize] = true;
                            frontier.push(w);
                        }
                    }
                }
            }
            for &w in &frontier {
                if !ever[w as usize] {
                    ever[w as usize] = true;
                    missing -= 1;
                    k_needed = k;
                }
            }
            std::mem::swap(&mut seen_at_k, &mut reach);
            if missing == 0 {
                break;
            }
        }
        if missing > 0 {
            let to = (0..n as u32).find(|&z| !ever[z as usize]).unwrap();
            return IrreducibilityWitness::Reducible {
                from: StateId(y),
                to: StateId(to),
            };
        }
        max_k_used = max_k_used.max(k_needed);
    }
    IrreducibilityWitness::Irreducible { max_k_used }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::model::WalkModel;
    use lsd_core::site::Site;

    #[test]
    fn k1_is_nu() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 5);
        let y = tr.window.id_of(&Site::lattice(&[0])).unwrap();
        let (m, leak) = kernel_power(&tr, 1, y);
        assert_eq!(leak, 0.0);
        assert_eq!(m, tr.step_measure(y));
    }

    #[test]
    fn k0_is_dirac() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 5);
        let y = tr.window.id_of(&Site::lattice(&[2])).unwrap();
        let (m, _) = kernel_power(&tr, 0, y);
        assert_eq!(m, FiniteMeasure::dirac(y));
    }

    /// Direct two-step convolution: simple walk on Z gives
    /// nu^2_0 = {-2: 1/4, 0: 1/2, 2: 1/4}.
    #[test]
    fn two_step_convolution() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 6);
        let w = &tr.window;
        let y = w.id_of(&Site::lattice(&[0])).unwrap();
        let (m, leak) = kernel_power(&tr, 2, y);
        assert_eq!(leak, 0.0);
        assert!((m.weight(w.id_of(&Site::lattice(&[-2])).unwrap()) - 0.25).abs() < 1e-15);
        assert!((m.weight(y) - 0.5).abs() < 1e-15);
        assert!((m.weight(w.id_of(&Site::lattice(&[2])).unwrap()) - 0.25).abs() < 1e-15);
    }

    /// Pushing past the boundary leaks mass.
    #[test]
    fn boundary_leak_is_reported() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 2);
        let y = tr.window.id_of(&Site::lattice(&[0])).unwrap();
        let (_, leak) = kernel_power(&tr, 4, y);
        assert!(leak > 0.0);
    }

    #[test]
    fn z2_window_is_irreducible() {
        let model = WalkModel::lattice_zd(2, 1);
        let tr = Truncated::at_origin(&model, 5);
        match is_irreducible(&tr, 20) {
            IrreducibilityWitness::Irreducible { max_k_used } => {
                assert!(max_k_used <= 20);
            }
            other => panic!("expected irreducible, got {other:?}"),
        }
    }

    /// Parity oracle on Z: pair (0,1) needs odd k, (0,2) even k; both are
    /// reachable with kmax = 2 steps of headroom over the distance.
    #[test]
    fn period_two_pairs_need_matching_parity() {
        let model = WalkModel::lattice_zd(1, 1);
        let tr = Truncated::at_origin(&model, 2);
        // states: -2..2; diameter 4
        match is_irreducible(&tr, 4) {
            IrreducibilityWitness::Irreducible { max_k_used } => assert_eq!(max_k_used, 4),
            other => panic!("{other:?}"),
        }
        // kmax below the diameter fails with a witness pair
        match is_irreducible(&tr, 2) {
            IrreducibilityWitness::Reducible { .. } => {}
            other => panic!("{other:?}"),
        }
    }
}
