//! The Green function of the discretized chain,
//! `g(y, x) = delta_y(x) + sum_k P[X_{N_k} = x]`, estimated from sampled
//! chains, and the balayage route `(1/C) sum_n nu_{y,n}(F_x)` that must
//! agree with it.

use rayon::prelude::*;

use lsd_core::measure::compensated_sum;
use lsd_core::rng::RngLineage;
use lsd_diffusion::drift::DriftModel;
use lsd_diffusion::events::{simulate_ls_path, LsEventKind, LsStart};

use crate::data::LsData;
use crate::discretize::sample_discretized_chain;
use crate::kappa::KappaSource;
use crate::LsError;

#[derive(Debug, Clone)]
pub struct ChainGreenEstimate {
    pub g: f64,
    pub se: f64,
    /// visits tallied per chain step k (1-based)
    pub visits_per_k: Vec<f64>,
    /// geometric bound on the truncated-in-k tail
    pub tail_bound: f64,
    pub n_paths: u64,
}

/// Estimates `g(y, x)` by counting chain visits to `x` up to `k_max` steps.
/// Requires a transient model (d = 3): visit counts must decay in k, and
/// the geometric tail bound is reported.
pub fn chain_green_estimate(
    start: &LsStart,
    x: [i64; 3],
    k_max: u32,
    data: &LsData,
    model: &DriftModel,
    kappa: &KappaSource,
    n_paths: u64,
    lineage: &RngLineage,
) -> Result<ChainGreenEstimate, LsError> {
    if model.d != 3 {
        return Err(LsError::NeedsTransience("chain_green_estimate"));
    }
    let samples = sample_discretized_chain(start, k_max, data, model, kappa, n_paths, lineage)?;
    let delta = match start {
        LsStart::Site(s) if *s == x => 1.0,
        _ => 0.0,
    };
    let mut visits_per_k = vec![0.0f64; k_max as usize];
    let per_path: Vec<f64> = samples
        .site_seqs
        .iter()
        .map(|seq| seq.iter().filter(|s| **s == x).count() as f64)
        .collect();
    for seq in &samples.site_seqs {
        for (i, s) in seq.iter().enumerate() {
            if *s == x {
                visits_per_k[i] += 1.0;
            }
        }
    }
    let n = n_paths as f64;
    for v in visits_per_k.iter_mut() {
        *v /= n;
    }
    let mean_visits = compensated_sum(per_path.iter().copied()) / n;
    let var = compensated_sum(per_path.iter().map(|v| (v - mean_visits) * (v - mean_visits)))
        / (n - 1.0);
    // geometric tail: estimate the decay ratio from the last tallied steps
    let tail_bound = {
        let k = visits_per_k.len();
        if k >= 3 {
            let last = visits_per_k[k - 1];
            let prev = visits_per_k[k - 2].max(1e-300);
            let r = (last / prev).min(0.95);
            if last > 0.0 {
                last * r / (1.0 - r)
            } else {
                // no visit at the horizon: bound by one path's worth
                1.0 / n
            }
        } else {
            f64::INFINITY
        }
    };
    Ok(ChainGreenEstimate {
        g: delta + mean_visits,
        se: (var / n).sqrt(),
        visits_per_k,
        tail_bound,
        n_paths,
    })
}

#[derive(Debug, Clone)]
pub struct BalayageGreenReport {
    /// `(1/C) sum_{n <= N} nu_{y,n}(F_x)`, cumulative in n
    pub partial_sums: Vec<f64>,
    pub total: f64,
    pub se: f64,
    pub n_paths: u64,
}

/// The balayage route to the chain Green function: `nu_{y,n}` is the law of
/// the n-th F-entry; `g(y, x) = (1/C) sum_n nu_{y,n}(F_x)` for `y` outside
/// `V_x`. Estimated from the raw event stream (no alpha stream involved).
pub fn balayage_green_identity(
    start: &LsStart,
    x: [i64; 3],
    n_pairs: u32,
    data: &LsData,
    model: &DriftModel,
    n_paths: u64,
    lineage: &RngLineage,
) -> Result<BalayageGreenReport, LsError> {
    if model.d != 3 {
        return Err(LsError::NeedsTransience("balayage_green_identity"));
    }
    let path_lineage = lineage.child("omega");
    let per_path: Vec<(Vec<u32>, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            let mut rng = path_lineage.stream(pid);
            let path =
                simulate_ls_path(model, data.r_f, data.r_v, *start, n_pairs, pid, &mut rng);
            let mut hits = Vec::new();
            let mut count = 0.0;
            for e in &path.events {
                if e.kind == LsEventKind::EnterF && e.site == x {
                    hits.push(e.n);
                    count += 1.0;
                }
            }
            (hits, count)
        })
        .collect();
    let n = n_paths as f64;
    let mut per_n = vec![0.0f64; n_pairs as usize];
    for (hits, _) in &per_path {
        for &h in hits {
            per_n[(h - 1) as usize] += 1.0;
        }
    }
    let inv_c = 1.0 / data.c;
    let mut partial_sums = Vec::with_capacity(n_pairs as usize);
    let mut acc = 0.0;
    for v in &per_n {
        acc += inv_c * v / n;
        partial_sums.push(acc);
    }
    let counts: Vec<f64> = per_path.iter().map(|(_, c)| c * inv_c).collect();
    let mean = compensated_sum(counts.iter().copied()) / n;
    let var = compensated_sum(counts.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    Ok(BalayageGreenReport {
        partial_sums,
        total: mean,
        se: (var / n).sqrt(),
        n_paths,
    })
}
