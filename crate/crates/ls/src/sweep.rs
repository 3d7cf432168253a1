//! The sweep operator and the recursive LS-measure.
//!
//! Mass bookkeeping is pathwise: a unit of mass entering `F_x` at `y` and
//! exiting `V_x` at `z` deposits `kappa(x, y, z)` at the site `x` (the
//! atomic part mu'') and carries `1 - kappa` onto the exit-boundary bin of
//! `z` (the swept part mu'). The split conserves mass exactly, every
//! retained weight is nonnegative iff (D4) holds, and the per-round
//! residual decays by at least `1 - 1/C^2` since `kappa > 1/C^2`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use lsd_core::measure::compensated_sum;
use lsd_core::rng::RngLineage;
use lsd_diffusion::drift::DriftModel;
use lsd_diffusion::point::CoverPoint;
use lsd_diffusion::sim::{exit_ball, hit_region, Passage};

use crate::data::LsData;
use crate::kappa::KappaSource;
use crate::LsError;

/// A measure carried as atoms on (component site, boundary bin) pairs.
#[derive(Debug, Clone, Default)]
pub struct BoundaryMeasure {
    pub atoms: BTreeMap<([i64; 3], usize), f64>,
}

impl BoundaryMeasure {
    pub fn total(&self) -> f64 {
        compensated_sum(self.atoms.values().copied())
    }

    /// The exit measure from a site's center: exact uniform bin masses for
    /// `phi = 1`, estimated otherwise.
    pub fn from_site_exit(
        data: &LsData,
        model: &DriftModel,
        site: [i64; 3],
        n_paths: u64,
        lineage: &RngLineage,
    ) -> Result<BoundaryMeasure, LsError> {
        let bins = data.bins();
        let mut atoms = BTreeMap::new();
        if model.is_brownian() {
            for b in 0..bins.len() {
                atoms.insert((site, b), bins.uniform_fraction(b));
            }
        } else {
            let dens = crate::data::binned_exit_density(
                model,
                &CoverPoint::at_site(site),
                data.r_v,
                n_paths,
                &bins,
                lineage,
            )?;
            // densities are relative to the uniform bin measure
            let mut total = 0.0;
            for b in 0..bins.len() {
                let m = dens[b] * bins.uniform_fraction(b);
                atoms.insert((site, b), m);
                total += m;
            }
            for v in atoms.values_mut() {
                *v /= total;
            }
        }
        Ok(BoundaryMeasure { atoms })
    }
}

/// What a sweep starts from.
#[derive(Debug, Clone)]
pub enum SweepInput {
    /// A Dirac at a generic point (mu_{y,0} = delta_y for y off the orbit).
    Dirac(CoverPoint),
    /// A boundary-binned measure (either mu_{x,0} = eps(x, V_x) or a
    /// previous round's mu').
    Boundary(BoundaryMeasure),
}

/// One application of the sweep: `mu = mu' + mu''`.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// the swept part, binned on component boundaries
    pub mu_prime: BoundaryMeasure,
    /// the atomic part on orbit sites
    pub mu_atomic: BTreeMap<[i64; 3], f64>,
    /// mass lost to hitting-leg timeouts (reported, never hidden)
    pub timeout_mass: f64,
}

impl SweepOutcome {
    pub fn atomic_total(&self) -> f64 {
        compensated_sum(self.mu_atomic.values().copied())
    }
}

/// Sweeps a measure once. The input mass is distributed over paths; each
/// path runs to its first F-entry and on to the V-exit, then splits its
/// weight by kappa.
pub fn sweep_step(
    input: &SweepInput,
    data: &LsData,
    model: &DriftModel,
    kappa: &KappaSource,
    n_paths: u64,
    lineage: &RngLineage,
) -> Result<SweepOutcome, LsError> {
    // (start point, per-path weight, path count, stream salt)
    let mut jobs: Vec<(CoverPoint, f64, u64, u64)> = Vec::new();
    match input {
        SweepInput::Dirac(p) => {
            jobs.push((*p, 1.0 / n_paths as f64, n_paths, 0));
        }
        SweepInput::Boundary(bm) => {
            let total = bm.total();
            if total <= 0.0 {
                return Ok(SweepOutcome {
                    mu_prime: BoundaryMeasure::default(),
                    mu_atomic: BTreeMap::new(),
                    timeout_mass: 0.0,
                });
            }
            let bins = data.bins();
            for (salt, ((site, bin), w)) in bm.atoms.iter().enumerate() {
                if *w <= 0.0 {
                    continue;
                }
                let n_atom = ((n_paths as f64 * w / total).round() as u64).max(1);
                let dir = bins.representative(*bin);
                let mut p = CoverPoint::at_site(*site);
                for i in 0..data.d {
                    p.frac[i] = dir[i] * data.r_v;
                }
                p.renormalize(data.d);
                jobs.push((p, w / n_atom as f64, n_atom, salt as u64 + 1));
            }
        }
    }

    let f_region = data.f_region();
    let bins = data.bins();
    let results: Vec<Result<(BTreeMap<([i64; 3], usize), f64>, BTreeMap<[i64; 3], f64>, f64), LsError>> =
        jobs.par_iter()
            .map(|&(start, w_path, count, salt)| {
                let job_lineage = lineage.child(&format!("sweep-{salt}"));
                let mut prime: BTreeMap<([i64; 3], usize), f64> = BTreeMap::new();
                let mut atomic: BTreeMap<[i64; 3], f64> = BTreeMap::new();
                let mut timeout = 0.0f64;
                for pid in 0..count {
                    let mut rng = job_lineage.stream(pid);
                    match hit_region(model, &f_region, &start, model.t_max, &mut rng) {
                        Passage::Crossed { point, site, .. } => {
                            let (_, z) = exit_ball(model, site, data.r_v, &point, &mut rng);
                            let kp = kappa.kappa(data, site, &point, &z)?;
                            if kp.kappa > 1.0 + 1e-12 {
                                return Err(LsError::NegativeSweepMass {
                                    mass: w_path * (1.0 - kp.kappa),
                                    kappa: kp.kappa,
                                });
                            }
                            *atomic.entry(site).or_insert(0.0) += w_path * kp.kappa;
                            let zb = bins.index(&z.offset_from(site, data.d));
                            *prime.entry((site, zb)).or_insert(0.0) +=
                                w_path * (1.0 - kp.kappa);
                        }
                        Passage::TimedOut { .. } => timeout += w_path,
                    }
                }
                Ok((prime, atomic, timeout))
            })
            .collect();

    let mut mu_prime = BoundaryMeasure::default();
    let mut mu_atomic: BTreeMap<[i64; 3], f64> = BTreeMap::new();
    let mut timeout_mass = 0.0;
    for r in results {
        let (prime, atomic, timeout) = r?;
        for (k, v) in prime {
            *mu_prime.atoms.entry(k).or_insert(0.0) += v;
        }
        for (k, v) in atomic {
            *mu_atomic.entry(k).or_insert(0.0) += v;
        }
        timeout_mass += timeout;
    }
    Ok(SweepOutcome {
        mu_prime,
        mu_atomic,
        timeout_mass,
    })
}

/// The recursive LS-measure at `start`.
#[derive(Debug, Clone)]
pub struct LsMeasureResult {
    /// accumulated atomic measure on orbit sites
    pub mu: BTreeMap<[i64; 3], f64>,
    /// mass still in flight when iteration stopped
    pub residual_mass: f64,
    pub rounds: u32,
    /// atomic mass deposited per round (tau_{y,n} totals)
    pub round_tau: Vec<f64>,
    /// residual after each round
    pub round_residual: Vec<f64>,
    /// total mass lost to timeouts across rounds
    pub timeout_mass: f64,
}

impl LsMeasureResult {
    pub fn total(&self) -> f64 {
        compensated_sum(self.mu.values().copied())
    }

    pub fn weight(&self, site: [i64; 3]) -> f64 {
        self.mu.get(&site).copied().unwrap_or(0.0)
    }

    /// Books must balance: deposited + residual + timeouts = 1.
    pub fn mass_defect(&self) -> f64 {
        (self.total() + self.residual_mass + self.timeout_mass - 1.0).abs()
    }
}

/// Start of the recursion: `delta_y` off the orbit, `eps(y, V_y)` on it.
#[derive(Debug, Clone)]
pub enum LsStartKind {
    Point(CoverPoint),
    Site([i64; 3]),
}

/// Iterates the sweep until the residual drops below `tol`. Aborts when the
/// round count exceeds the decay cap `ceil(log tol / log(1 - 1/C^2)) + 10`.
pub fn ls_measure_recursive(
    start: &LsStartKind,
    data: &LsData,
    model: &DriftModel,
    kappa: &KappaSource,
    tol: f64,
    n_paths: u64,
    lineage: &RngLineage,
) -> Result<LsMeasureResult, LsError> {
    assert!(tol > 0.0 && tol < 1.0);
    let decay = 1.0 - 1.0 / (data.c * data.c);
    let cap = (tol.ln() / decay.ln()).ceil() as u32 + 10;

    let mut current: SweepInput = match start {
        LsStartKind::Point(p) => SweepInput::Dirac(*p),
        LsStartKind::Site(site) => SweepInput::Boundary(BoundaryMeasure::from_site_exit(
            data,
            model,
            *site,
            n_paths,
            &lineage.child("eps0"),
        )?),
    };
    let mut result = LsMeasureResult {
        mu: BTreeMap::new(),
        residual_mass: 1.0,
        rounds: 0,
        round_tau: Vec::new(),
        round_residual: Vec::new(),
        timeout_mass: 0.0,
    };
    while result.residual_mass > tol {
        if result.rounds >= cap {
            return Err(LsError::DecayContractBroken {
                cap,
                residual: result.residual_mass,
            });
        }
        let round_lineage = lineage.child(&format!("round-{}", result.rounds));
        let out = sweep_step(&current, data, model, kappa, n_paths, &round_lineage)?;
        for (site, w) in &out.mu_atomic {
            *result.mu.entry(*site).or_insert(0.0) += w;
        }
        result.timeout_mass += out.timeout_mass;
        result.residual_mass = out.mu_prime.total();
        result.rounds += 1;
        result.round_tau.push(out.atomic_total());
        result.round_residual.push(result.residual_mass);
        current = SweepInput::Boundary(out.mu_prime);
    }
    Ok(result)
}

/// Independent replicates of the recursive measure, for per-site standard
/// errors (each replicate runs `n_paths / n_replicates` paths per round).
pub struct ReplicatedLsMeasure {
    pub mean: BTreeMap<[i64; 3], f64>,
    pub se: BTreeMap<[i64; 3], f64>,
    pub replicates: Vec<LsMeasureResult>,
}

pub fn ls_measure_replicated(
    start: &LsStartKind,
    data: &LsData,
    model: &DriftModel,
    kappa: &KappaSource,
    tol: f64,
    n_paths_total: u64,
    n_replicates: u32,
    lineage: &RngLineage,
) -> Result<ReplicatedLsMeasure, LsError> {
    let per = (n_paths_total / n_replicates as u64).max(100);
    let replicates: Vec<LsMeasureResult> = (0..n_replicates)
        .map(|r| {
            ls_measure_recursive(
                start,
                data,
                model,
                kappa,
                tol,
                per,
                &lineage.child(&format!("rep-{r}")),
            )
        })
        .collect::<Result<_, _>>()?;
    let mut sites: Vec<[i64; 3]> = replicates
        .iter()
        .flat_map(|r| r.mu.keys().copied())
        .collect();
    sites.sort_unstable();
    sites.dedup();
    let m = n_replicates as f64;
    let mut mean = BTreeMap::new();
    let mut se = BTreeMap::new();
    for site in sites {
        let vals: Vec<f64> = replicates.iter().map(|r| r.weight(site)).collect();
        let mu = vals.iter().sum::<f64>() / m;
        let var = vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (m - 1.0);
        mean.insert(site, mu);
        se.insert(site, (var / m).sqrt());
    }
    Ok(ReplicatedLsMeasure {
        mean,
        se,
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup_d1() -> (LsData, DriftModel, KappaSource) {
        let data = LsData::new(1, 0.1, 0.3, 1.1 * 1.5).unwrap();
        let model = DriftModel::brownian(1, 1e-3, 50.0);
        (data, model, KappaSource::Analytic)
    }

    /// mu = delta_y with y already in F_x: beta is the Dirac at y, so the
    /// atomic part receives weight E[kappa] and everything books to x.
    #[test]
    fn dirac_inside_f_books_to_its_site() {
        let (data, model, kappa) = setup_d1();
        let start = CoverPoint::new(1, &[0.05]);
        let out = sweep_step(
            &SweepInput::Dirac(start),
            &data,
            &model,
            &kappa,
            2000,
            &RngLineage::new(1),
        )
        .unwrap();
        assert_eq!(out.mu_atomic.len(), 1);
        assert!(out.mu_atomic.contains_key(&[0, 0, 0]));
        // mass bookkeeping is exact
        let total = out.atomic_total() + out.mu_prime.total() + out.timeout_mass;
        assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    /// Mass conservation through a full sweep from a boundary measure.
    #[test]
    fn sweep_conserves_mass() {
        let (data, model, kappa) = setup_d1();
        let eps0 =
            BoundaryMeasure::from_site_exit(&data, &model, [0, 0, 0], 100, &RngLineage::new(2))
                .unwrap();
        assert!((eps0.total() - 1.0).abs() < 1e-15);
        let out = sweep_step(
            &SweepInput::Boundary(eps0),
            &data,
            &model,
            &kappa,
            4000,
            &RngLineage::new(3),
        )
        .unwrap();
        let total = out.atomic_total() + out.mu_prime.total() + out.timeout_mass;
        assert!((total - 1.0).abs() < 1e-12, "total {total}");
    }

    /// Residual decay: each round multiplies the in-flight mass by at most
    /// (1 - 1/C^2), pathwise.
    #[test]
    fn residual_decays_geometrically() {
        let (data, model, kappa) = setup_d1();
        let res = ls_measure_recursive(
            &LsStartKind::Site([0, 0, 0]),
            &data,
            &model,
            &kappa,
            1e-3,
            2000,
            &RngLineage::new(4),
        )
        .unwrap();
        let rate = 1.0 - 1.0 / (data.c * data.c);
        let mut bound = 1.0;
        for (n, r) in res.round_residual.iter().enumerate() {
            bound *= rate;
            assert!(*r <= bound + 1e-12, "round {}: {} > {}", n + 1, r, bound);
        }
        assert!(res.residual_mass <= 1e-3);
        assert!(res.mass_defect() < 1e-10);
        assert!(res.total() >= 1.0 - 1e-3 - res.timeout_mass);
    }

    /// Symmetry of the d = 1 measure from the origin: reflection-symmetric
    /// sites get equal mass within Monte Carlo error.
    #[test]
    fn d1_measure_is_reflection_symmetric() {
        let (data, model, kappa) = setup_d1();
        let res = ls_measure_recursive(
            &LsStartKind::Site([0, 0, 0]),
            &data,
            &model,
            &kappa,
            1e-3,
            4000,
            &RngLineage::new(5),
        )
        .unwrap();
        let m1 = res.weight([1, 0, 0]);
        let m_neg1 = res.weight([-1, 0, 0]);
        assert!(m1 > 0.05 && m_neg1 > 0.05);
        let se = (m1 / 4000f64).sqrt() + (m_neg1 / 4000f64).sqrt();
        assert!((m1 - m_neg1).abs() < 4.0 * se, "{m1} vs {m_neg1}");
    }

    /// Deck equivariance, bit-for-bit: the measure from gamma y under the
    /// same lineage is the translate of the measure from y.
    #[test]
    fn ls_measure_is_equivariant_bitwise() {
        let (data, model, kappa) = setup_d1();
        let lineage = RngLineage::new(6);
        let a = ls_measure_recursive(
            &LsStartKind::Point(CoverPoint::new(1, &[0.4])),
            &data,
            &model,
            &kappa,
            1e-2,
            500,
            &lineage,
        )
        .unwrap();
        let b = ls_measure_recursive(
            &LsStartKind::Point(CoverPoint {
                cell: [7, 0, 0],
                frac: [0.4, 0.0, 0.0],
            }),
            &data,
            &model,
            &kappa,
            1e-2,
            500,
            &lineage,
        )
        .unwrap();
        assert_eq!(a.mu.len(), b.mu.len());
        for (site, w) in &a.mu {
            let translated = [site[0] + 7, site[1], site[2]];
            assert_eq!(w.to_bits(), b.mu[&translated].to_bits());
        }
        assert_eq!(a.residual_mass.to_bits(), b.residual_mass.to_bits());
    }
}
