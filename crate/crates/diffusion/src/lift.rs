//! Path lifting along the covering projection and the two-route sampler
//! behind the projection-law check.

use rayon::prelude::*;

use lsd_core::rng::{RngLineage, StreamRng};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::drift::DriftModel;
use crate::point::CoverPoint;
use crate::sim::step;

/// Lifts a base path, given by its per-step increments, to the cover
/// starting at `start`. The projection of the lift reproduces the base
/// path exactly because the increments are shared and the fraction
/// arithmetic is identical.
pub fn lift_path(start: &CoverPoint, increments: &[[f64; 3]], d: usize) -> Vec<CoverPoint> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut p = *start;
    out.push(p);
    for inc in increments {
        for i in 0..d {
            p.frac[i] += inc[i];
        }
        p.renormalize(d);
        out.push(p);
    }
    out
}

/// Simulates a base (torus) path and records its increments, so the same
/// randomness can be lifted from any fiber point.
pub fn base_path_increments(
    model: &DriftModel,
    start_frac: &[f64; 3],
    steps: usize,
    rng: &mut StreamRng,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let d = model.d;
    let mut p = CoverPoint {
        cell: [0; 3],
        frac: *start_frac,
    };
    p.renormalize(d);
    let sqrt_dt = model.dt.sqrt();
    let mut increments = Vec::with_capacity(steps);
    let mut fracs = Vec::with_capacity(steps + 1);
    fracs.push(p.frac);
    for _ in 0..steps {
        let g = model.drift(&p.frac);
        let mut inc = [0.0f64; 3];
        for i in 0..d {
            let xi: f64 = rng.sample(StandardNormal);
            inc[i] = g[i] * model.dt + sqrt_dt * xi;
            p.frac[i] += inc[i];
        }
        p.renormalize(d);
        increments.push(inc);
        fracs.push(p.frac);
    }
    (increments, fracs)
}

/// Time-t marginals of the two simulation routes behind the projection law:
/// (a) the cover diffusion from `x`, simulated in absolute coordinates and
/// projected to the torus at time `t`; (b) the base diffusion from `pi(x)`,
/// simulated directly on the torus. Independent streams per route.
pub fn projection_law_samples(
    model: &DriftModel,
    x: &[f64; 3],
    t: f64,
    n_paths: u64,
    lineage: &RngLineage,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let d = model.d;
    let steps = (t / model.dt).round() as usize;
    let cover_lineage = lineage.child("cover");
    let base_lineage = lineage.child("base");

    let cover: Vec<[f64; 3]> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = cover_lineage.stream(pid);
            // absolute-coordinate simulation of the cover diffusion
            let mut pos = *x;
            let sqrt_dt = model.dt.sqrt();
            for _ in 0..steps {
                let frac = [
                    pos[0] - pos[0].floor(),
                    pos[1] - pos[1].floor(),
                    pos[2] - pos[2].floor(),
                ];
                let g = model.drift(&frac);
                for i in 0..d {
                    let xi: f64 = rng.sample(StandardNormal);
                    pos[i] += g[i] * model.dt + sqrt_dt * xi;
                }
            }
            // project
            let mut frac = [0.0f64; 3];
            for i in 0..d {
                frac[i] = pos[i] - pos[i].floor();
            }
            frac
        })
        .collect();

    let base: Vec<[f64; 3]> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = base_lineage.stream(pid);
            let mut p = CoverPoint::new(d, &x[..d]);
            p.cell = [0; 3]; // forget the fiber: the base point
            for _ in 0..steps {
                step(model, &mut p, &mut rng);
            }
            p.frac
        })
        .collect();

    (cover, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_increments_give_constant_path() {
        let start = CoverPoint::new(2, &[0.25, 0.75]);
        let path = lift_path(&start, &[[0.0; 3]; 10], 2);
        assert!(path.iter().all(|p| *p == start));
    }

    /// Lift then project is the identity on the base path, bit-for-bit.
    #[test]
    fn lift_then_project_is_identity() {
        let model = DriftModel::brownian(2, 1e-3, 10.0);
        let lineage = RngLineage::new(31);
        for pid in 0..50u64 {
            let mut rng = lineage.stream(pid);
            let start_frac = [0.3, 0.8, 0.0];
            let (incs, fracs) = base_path_increments(&model, &start_frac, 200, &mut rng);
            let start = CoverPoint {
                cell: [4, -2, 0],
                frac: start_frac,
            };
            let lifted = lift_path(&start, &incs, 2);
            for (lp, bf) in lifted.iter().zip(&fracs) {
                assert_eq!(lp.frac[0].to_bits(), bf[0].to_bits());
                assert_eq!(lp.frac[1].to_bits(), bf[1].to_bits());
            }
        }
    }

    /// Deck equivariance of the lift: lifting from `x + gamma` is the
    /// translate of the lift from `x`, exactly.
    #[test]
    fn lift_is_deck_equivariant() {
        let model = DriftModel::brownian(1, 1e-3, 10.0);
        let mut rng = RngLineage::new(32).stream(0);
        let (incs, _) = base_path_increments(&model, &[0.6, 0.0, 0.0], 100, &mut rng);
        let a = lift_path(&CoverPoint::new(1, &[0.6]), &incs, 1);
        let start_b = CoverPoint {
            cell: [9, 0, 0],
            frac: [0.6, 0.0, 0.0],
        };
        let b = lift_path(&start_b, &incs, 1);
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.frac[0].to_bits(), pb.frac[0].to_bits());
            assert_eq!(pa.cell[0] + 9, pb.cell[0]);
        }
    }
}
