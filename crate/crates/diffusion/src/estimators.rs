//! First-passage Monte Carlo estimators: binned exit measures, balayage
//! onto the orbit union, and sojourn-time Green estimates. All loops are
//! parallel over path streams and reduce in path order, so results are
//! independent of worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use lsd_core::measure::compensated_sum;
use lsd_core::rng::RngLineage;

use crate::bins::BoundaryBins;
use crate::drift::DriftModel;
use crate::point::CoverPoint;
use crate::region::RegionSpec;
use crate::sim::{exit_ball, hit_region, step, Passage};

/// A binned probability measure on a sphere boundary with per-bin CIs.
#[derive(Debug, Clone)]
pub struct BinnedExit {
    pub counts: Vec<u64>,
    /// normalized masses; they sum to exactly 1
    pub masses: Vec<f64>,
    /// binomial standard error per bin
    pub se: Vec<f64>,
    /// bins whose expected count under uniformity is below 5
    pub sparse_bins: Vec<usize>,
    pub n_paths: u64,
    pub mean_exit_time: f64,
}

/// Estimates the exit measure `eps(start, V_site)` over boundary bins.
pub fn exit_measure_estimate(
    model: &DriftModel,
    site: [i64; 3],
    r_v: f64,
    start: &CoverPoint,
    n_paths: u64,
    bins: &BoundaryBins,
    lineage: &RngLineage,
) -> BinnedExit {
    let d = model.d;
    let results: Vec<(usize, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = lineage.stream(pid);
            let (t, z) = exit_ball(model, site, r_v, start, &mut rng);
            (bins.index(&z.offset_from(site, d)), t)
        })
        .collect();
    let mut counts = vec![0u64; bins.len()];
    for &(b, _) in &results {
        counts[b] += 1;
    }
    let mean_exit_time = compensated_sum(results.iter().map(|&(_, t)| t)) / n_paths as f64;
    finish_binned(counts, n_paths, mean_exit_time, bins)
}

fn finish_binned(
    counts: Vec<u64>,
    n_paths: u64,
    mean_exit_time: f64,
    bins: &BoundaryBins,
) -> BinnedExit {
    let n = n_paths as f64;
    let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let se: Vec<f64> = masses
        .iter()
        .map(|&p| (p * (1.0 - p) / n).sqrt())
        .collect();
    let sparse_bins = (0..counts.len())
        .filter(|&b| n * bins.uniform_fraction(b) < 5.0)
        .collect();
    BinnedExit {
        counts,
        masses,
        se,
        sparse_bins,
        n_paths,
        mean_exit_time,
    }
}

/// Balayage onto the orbit union of F-balls: per-component masses and entry
/// bins on each component boundary. Component masses sum to
/// `1 - timeout_fraction`.
#[derive(Debug, Clone)]
pub struct BalayageEstimate {
    pub component_mass: BTreeMap<[i64; 3], f64>,
    pub entry_bins: BTreeMap<[i64; 3], Vec<f64>>,
    pub timeout_fraction: f64,
    pub n_paths: u64,
}

pub fn balayage_estimate(
    model: &DriftModel,
    start: &CoverPoint,
    r_f: f64,
    n_paths: u64,
    bins: &BoundaryBins,
    lineage: &RngLineage,
) -> BalayageEstimate {
    let d = model.d;
    let f_region = RegionSpec::orbit_balls(r_f);
    let results: Vec<Option<([i64; 3], usize)>> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = lineage.stream(pid);
            match hit_region(model, &f_region, start, model.t_max, &mut rng) {
                Passage::Crossed { point, site, .. } => {
                    Some((site, bins.index(&point.offset_from(site, d))))
                }
                Passage::TimedOut { .. } => None,
            }
        })
        .collect();
    let mut component_mass: BTreeMap<[i64; 3], f64> = BTreeMap::new();
    let mut entry_bins: BTreeMap<[i64; 3], Vec<f64>> = BTreeMap::new();
    let mut timeouts = 0u64;
    let w = 1.0 / n_paths as f64;
    for r in &results {
        match r {
            Some((site, bin)) => {
                *component_mass.entry(*site).or_insert(0.0) += w;
                entry_bins.entry(*site).or_insert_with(|| vec![0.0; bins.len()])[*bin] += w;
            }
            None => timeouts += 1,
        }
    }
    BalayageEstimate {
        component_mass,
        entry_bins,
        timeout_fraction: timeouts as f64 / n_paths as f64,
        n_paths,
    }
}

/// Sojourn-time estimate of the Green function: for a transient model,
/// `E_x integral chi_B(omega_t) dt = integral_B G(x, y) phi^2 dv`, and with
/// `G(x, .)` harmonic on the probe ball the mean over the ball equals the
/// center value. For `phi = 1` the horizon is closed with the analytic
/// free-space tail `vol(B) G_free(pos_T, z)`; the correction's share of the
/// estimate is reported.
#[derive(Debug, Clone)]
pub struct SojournEstimate {
    /// estimated `G(x, z)` (occupation / (phi^2(z) vol B)), tail included
    pub green: f64,
    pub se: f64,
    /// the tail correction's share of the total
    pub tail_share: f64,
    pub n_paths: u64,
    pub t_max: f64,
}

pub fn sojourn_green_estimate(
    model: &DriftModel,
    start: &CoverPoint,
    probe: &CoverPoint,
    rho: f64,
    n_paths: u64,
    t_max: f64,
    lineage: &RngLineage,
) -> SojournEstimate {
    assert_eq!(model.d, 3, "sojourn Green estimates need a transient model");
    let d = model.d;
    let vol = 4.0 / 3.0 * std::f64::consts::PI * rho * rho * rho;
    let steps = (t_max / model.dt).ceil() as u64;
    let per_path: Vec<(f64, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = lineage.stream(pid);
            let mut p = *start;
            let mut occupation = 0.0f64;
            for _ in 0..steps {
                step(model, &mut p, &mut rng);
                let off = [
                    (p.cell[0] - probe.cell[0]) as f64 + (p.frac[0] - probe.frac[0]),
                    (p.cell[1] - probe.cell[1]) as f64 + (p.frac[1] - probe.frac[1]),
                    (p.cell[2] - probe.cell[2]) as f64 + (p.frac[2] - probe.frac[2]),
                ];
                if crate::point::norm(&off) <= rho {
                    occupation += model.dt;
                }
            }
            let tail = if model.is_brownian() {
                let off = [
                    (p.cell[0] - probe.cell[0]) as f64 + (p.frac[0] - probe.frac[0]),
                    (p.cell[1] - probe.cell[1]) as f64 + (p.frac[1] - probe.frac[1]),
                    (p.cell[2] - probe.cell[2]) as f64 + (p.frac[2] - probe.frac[2]),
                ];
                let dist = crate::point::norm(&off).max(rho);
                vol / (2.0 * std::f64::consts::PI * dist)
            } else {
                0.0
            };
            (occupation, tail)
        })
        .collect();
    let _ = d;
    let n = n_paths as f64;
    let phi_sq = model.phi_sq(&probe.frac);
    let totals: Vec<f64> = per_path.iter().map(|&(o, t)| o + t).collect();
    let mean = compensated_sum(totals.iter().copied()) / n;
    let var = compensated_sum(totals.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    let tail_mean = compensated_sum(per_path.iter().map(|&(_, t)| t)) / n;
    let scale = 1.0 / (phi_sq * vol);
    SojournEstimate {
        green: mean * scale,
        se: (var / n).sqrt() * scale,
        tail_share: if mean > 0.0 { tail_mean / mean } else { 0.0 },
        n_paths,
        t_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::poisson_density_vs_uniform;

    /// Exit from the center of a disk is uniform over the 64 equal-angle
    /// bins (chi-square-style 5-sigma screen per bin).
    #[test]
    fn center_exit_is_uniform_d2() {
        let model = DriftModel::brownian(2, 1e-4, 10.0);
        let bins = BoundaryBins::for_dim(2, 16);
        let est = exit_measure_estimate(
            &model,
            [0, 0, 0],
            0.3,
            &CoverPoint::at_site([0, 0, 0]),
            20_000,
            &bins,
            &RngLineage::new(21),
        );
        let total: f64 = est.masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (k, &m) in est.masses.iter().enumerate() {
            let z = (m - 1.0 / 16.0) / est.se[k].max(1e-12);
            assert!(z.abs() < 5.0, "bin {k}: z = {z}");
        }
        // mean exit time of BM from the center of a disk radius r is r^2/d
        let expect = 0.3 * 0.3 / 2.0;
        assert!((est.mean_exit_time - expect).abs() < 0.05 * expect);
    }

    /// Off-center exit density matches the Poisson kernel binwise (d = 2).
    #[test]
    fn off_center_exit_matches_poisson_kernel() {
        let model = DriftModel::brownian(2, 1e-4, 10.0);
        let nbins = 16usize;
        let bins = BoundaryBins::for_dim(2, nbins);
        let y = CoverPoint::new(2, &[0.1, 0.0]);
        let est = exit_measure_estimate(
            &model,
            [0, 0, 0],
            0.3,
            &y,
            40_000,
            &bins,
            &RngLineage::new(22),
        );
        for k in 0..nbins {
            // integrate the kernel over the bin with a small midpoint rule
            let mut expect = 0.0;
            let m = 32;
            for j in 0..m {
                let a = std::f64::consts::TAU * (k as f64 + (j as f64 + 0.5) / m as f64)
                    / nbins as f64;
                let z = [0.3 * a.cos(), 0.3 * a.sin(), 0.0];
                expect += poisson_density_vs_uniform(2, 0.3, &[0.1, 0.0, 0.0], &z)
                    / (m * nbins) as f64;
            }
            let z = (est.masses[k] - expect) / est.se[k].max(1e-9);
            assert!(z.abs() < 5.0, "bin {k}: got {} want {expect}", est.masses[k]);
        }
    }

    /// Balayage from a midpoint in d = 1 splits evenly between the two
    /// neighboring components, which receive (essentially) all the mass.
    #[test]
    fn d1_midpoint_balayage_splits_evenly() {
        let model = DriftModel::brownian(1, 1e-4, 100.0);
        let bins = BoundaryBins::for_dim(1, 2);
        let est = balayage_estimate(
            &model,
            &CoverPoint::new(1, &[0.5]),
            0.1,
            20_000,
            &bins,
            &RngLineage::new(23),
        );
        assert!(est.timeout_fraction < 1e-3);
        let m0 = est.component_mass.get(&[0, 0, 0]).copied().unwrap_or(0.0);
        let m1 = est.component_mass.get(&[1, 0, 0]).copied().unwrap_or(0.0);
        assert!((m0 + m1) > 0.999);
        let se = 0.5 / (est.n_paths as f64).sqrt();
        assert!((m0 - 0.5).abs() < 5.0 * se, "m0 = {m0}");
        // the only reachable entry bins face the start: component 0 is hit
        // on its + side, component 1 on its - side
        let b0 = &est.entry_bins[&[0, 0, 0]];
        assert!(b0[1] > 0.99 * m0);
    }

    /// Start inside F: balayage is the Dirac at the start's component.
    #[test]
    fn balayage_from_inside_is_immediate() {
        let model = DriftModel::brownian(2, 1e-4, 10.0);
        let bins = BoundaryBins::for_dim(2, 8);
        let est = balayage_estimate(
            &model,
            &CoverPoint::new(2, &[0.05, -0.02]),
            0.15,
            100,
            &bins,
            &RngLineage::new(24),
        );
        assert_eq!(est.component_mass.len(), 1);
        assert!((est.component_mass[&[0, 0, 0]] - 1.0).abs() < 1e-12);
    }
}
