//! Kappa-rejection discretization of simulated paths: accept the n-th
//! F-entry when `alpha_n < kappa(X_n, Y_n, Z_n)`; the accepted sites form
//! the discretized chain.

use rayon::prelude::*;

use lsd_core::rng::RngLineage;
use lsd_diffusion::drift::DriftModel;
use lsd_diffusion::events::{simulate_ls_path, LsEventKind, LsPath, LsStart};

use crate::data::LsData;
use crate::kappa::KappaSource;
use crate::LsError;

/// One accepted discretization step.
#[derive(Debug, Clone, Copy)]
pub struct Accepted {
    /// discretization index `k` (1-based)
    pub k: u32,
    /// the accepted pair index `N_k`
    pub n: u32,
    /// the site `X_{N_k}`
    pub site: [i64; 3],
    /// `T_k = S_{N_k}`
    pub time: f64,
}

/// The discretization of one path against one alpha stream.
#[derive(Debug, Clone)]
pub struct DiscretizedPath {
    pub accepted: Vec<Accepted>,
    /// number of (R, S) pairs inspected
    pub pairs_seen: u32,
    /// the event log ran out before the requested number of acceptances
    pub horizon_flag: bool,
}

/// Applies the alpha-comparison to a completed event log. Deterministic in
/// `(path, alphas)`.
pub fn discretize_path(
    path: &LsPath,
    alphas: &[f64],
    data: &LsData,
    kappa: &KappaSource,
    want_k: u32,
) -> Result<DiscretizedPath, LsError> {
    let mut out = DiscretizedPath {
        accepted: Vec::with_capacity(want_k as usize),
        pairs_seen: 0,
        horizon_flag: false,
    };
    let mut k = 0u32;
    let mut entry = None;
    for e in &path.events {
        match e.kind {
            LsEventKind::EnterF => entry = Some(*e),
            LsEventKind::ExitV => {
                let enter = entry.take().expect("exit follows an entry");
                out.pairs_seen = e.n;
                let kp = kappa.kappa(data, e.site, &enter.point, &e.point)?;
                let alpha = alphas
                    .get((e.n - 1) as usize)
                    .copied()
                    .unwrap_or(f64::INFINITY);
                if alpha < kp.kappa {
                    k += 1;
                    out.accepted.push(Accepted {
                        k,
                        n: e.n,
                        site: e.site,
                        time: e.time,
                    });
                    if k >= want_k {
                        return Ok(out);
                    }
                }
            }
        }
    }
    out.horizon_flag = k < want_k;
    Ok(out)
}

/// Sampled chains: the first `k_steps` accepted sites per path, plus
/// transition tallies for Markov-property tests.
#[derive(Debug, Clone)]
pub struct ChainSamples {
    /// per path: accepted sites in order (may be shorter on horizon flags)
    pub site_seqs: Vec<Vec<[i64; 3]>>,
    pub horizon_flags: u64,
    pub timeout_flags: u64,
    pub n_paths: u64,
}

impl ChainSamples {
    /// Empirical marginal of `X_{N_k}` (1-based k).
    pub fn marginal(&self, k: u32) -> std::collections::BTreeMap<[i64; 3], f64> {
        let mut counts: std::collections::BTreeMap<[i64; 3], u64> = Default::default();
        let mut n = 0u64;
        for seq in &self.site_seqs {
            if let Some(site) = seq.get((k - 1) as usize) {
                *counts.entry(*site).or_insert(0) += 1;
                n += 1;
            }
        }
        counts
            .into_iter()
            .map(|(s, c)| (s, c as f64 / n as f64))
            .collect()
    }

    /// Transition tallies out of each site at chain step `k -> k+1`,
    /// expressed site-relatively (the jump `X_{k+1} - X_k`), so tallies
    /// pool across translates.
    pub fn relative_transitions(
        &self,
        k: u32,
    ) -> std::collections::BTreeMap<[i64; 3], u64> {
        let mut tallies: std::collections::BTreeMap<[i64; 3], u64> = Default::default();
        for seq in &self.site_seqs {
            if let (Some(a), Some(b)) = (seq.get((k - 1) as usize), seq.get(k as usize)) {
                let jump = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                *tallies.entry(jump).or_insert(0) += 1;
            }
        }
        tallies
    }
}

/// Simulates `n_paths` chains of `k_steps` accepted sites each. Alpha
/// streams are independent of the path streams (`alpha` lineage child).
pub fn sample_discretized_chain(
    start: &LsStart,
    k_steps: u32,
    data: &LsData,
    model: &DriftModel,
    kappa: &KappaSource,
    n_paths: u64,
    lineage: &RngLineage,
) -> Result<ChainSamples, LsError> {
    // enough (R, S) pairs that k acceptances at rate kappa > 1/C^2 almost
    // surely fit
    let c2 = (data.c * data.c).ceil() as u32;
    let max_pairs = k_steps * (4 * c2 + 10) + 20;
    let path_lineage = lineage.child("omega");
    let alpha_lineage = lineage.child("alpha");
    let per_path: Vec<Result<(Vec<[i64; 3]>, bool, bool), LsError>> = (0..n_paths)
        .into_par_iter()
        .map(|pid| {
            use rand::Rng;
            let mut rng = path_lineage.stream(pid);
            let path = simulate_ls_path(model, data.r_f, data.r_v, *start, max_pairs, pid, &mut rng);
            let mut arng = alpha_lineage.stream(pid);
            let alphas: Vec<f64> = (0..path.events.len() / 2).map(|_| arng.gen()).collect();
            let disc = discretize_path(&path, &alphas, data, kappa, k_steps)?;
            Ok((
                disc.accepted.iter().map(|a| a.site).collect(),
                disc.horizon_flag,
                path.timed_out,
            ))
        })
        .collect();
    let mut site_seqs = Vec::with_capacity(n_paths as usize);
    let mut horizon_flags = 0u64;
    let mut timeout_flags = 0u64;
    for r in per_path {
        let (seq, horizon, timeout) = r?;
        if horizon {
            horizon_flags += 1;
        }
        if timeout {
            timeout_flags += 1;
        }
        site_seqs.push(seq);
    }
    Ok(ChainSamples {
        site_seqs,
        horizon_flags,
        timeout_flags,
        n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_diffusion::events::LsEvent;
    use lsd_diffusion::point::CoverPoint;

    fn synthetic_path(n_pairs: u32, r_f: f64, r_v: f64) -> LsPath {
        // entries at the site center direction, exits on the sphere
        let mut events = Vec::new();
        let mut t = 0.0;
        for n in 1..=n_pairs {
            t += 1.0;
            let mut y = CoverPoint::at_site([0, 0, 0]);
            y.frac[0] = r_f * 0.5;
            y.renormalize(1);
            events.push(LsEvent {
                kind: LsEventKind::EnterF,
                n,
                time: t,
                site: [0, 0, 0],
                point: y,
            });
            t += 1.0;
            let mut z = CoverPoint::at_site([0, 0, 0]);
            z.frac[0] = r_v;
            z.renormalize(1);
            events.push(LsEvent {
                kind: LsEventKind::ExitV,
                n,
                time: t,
                site: [0, 0, 0],
                point: z,
            });
        }
        LsPath {
            path_id: 0,
            start: CoverPoint::new(1, &[0.5]),
            s0_time: 0.0,
            s0_point: CoverPoint::new(1, &[0.5]),
            events,
            timed_out: false,
        }
    }

    /// alpha always below kappa accepts every entry: N_k = k.
    #[test]
    fn all_accept_gives_nk_equals_k() {
        let data = LsData::new(1, 0.1, 0.3, 1.65).unwrap();
        let kappa = KappaSource::Analytic;
        let path = synthetic_path(6, data.r_f, data.r_v);
        let alphas = vec![0.0; 6];
        let disc = discretize_path(&path, &alphas, &data, &kappa, 6).unwrap();
        assert_eq!(disc.accepted.len(), 6);
        for a in &disc.accepted {
            assert_eq!(a.k, a.n);
        }
        assert!(!disc.horizon_flag);
    }

    /// alpha above every kappa rejects everything and raises the flag.
    #[test]
    fn all_reject_raises_flag() {
        let data = LsData::new(1, 0.1, 0.3, 1.65).unwrap();
        let kappa = KappaSource::Analytic;
        let path = synthetic_path(6, data.r_f, data.r_v);
        let alphas = vec![1.0; 6];
        let disc = discretize_path(&path, &alphas, &data, &kappa, 2).unwrap();
        assert!(disc.accepted.is_empty());
        assert!(disc.horizon_flag);
    }

    /// Deterministic in (path, alphas): same inputs, same output.
    #[test]
    fn discretization_is_deterministic() {
        let data = LsData::new(1, 0.1, 0.3, 1.65).unwrap();
        let kappa = KappaSource::Analytic;
        let path = synthetic_path(8, data.r_f, data.r_v);
        let alphas = vec![0.7, 0.2, 0.9, 0.1, 0.5, 0.4, 0.99, 0.3];
        let a = discretize_path(&path, &alphas, &data, &kappa, 8).unwrap();
        let b = discretize_path(&path, &alphas, &data, &kappa, 8).unwrap();
        assert_eq!(a.accepted.len(), b.accepted.len());
        for (x, y) in a.accepted.iter().zip(&b.accepted) {
            assert_eq!(x.n, y.n);
            assert_eq!(x.time.to_bits(), y.time.to_bits());
        }
    }

    /// End-to-end d = 1 chain sampling: marginals are probability
    /// distributions and chains reach the requested length.
    #[test]
    fn chain_sampling_smoke() {
        let data = LsData::new(1, 0.1, 0.3, 1.65).unwrap();
        let model = DriftModel::brownian(1, 1e-3, 50.0);
        let kappa = KappaSource::Analytic;
        let samples = sample_discretized_chain(
            &LsStart::Site([0, 0, 0]),
            2,
            &data,
            &model,
            &kappa,
            400,
            &lsd_core::rng::RngLineage::new(9),
        )
        .unwrap();
        assert_eq!(samples.n_paths, 400);
        assert_eq!(samples.horizon_flags, 0);
        assert_eq!(samples.timeout_flags, 0);
        let marginal = samples.marginal(1);
        let total: f64 = marginal.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // the chain moves: step-2 jumps are not all zero
        let jumps = samples.relative_transitions(1);
        assert!(jumps.keys().any(|j| *j != [0, 0, 0]));
    }
}
