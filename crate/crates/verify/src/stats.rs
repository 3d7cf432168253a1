//! Statistical test machinery: chi-square goodness of fit and contingency
//! tests, two-sample Kolmogorov-Smirnov, permutation energy distance, and
//! the TV-with-SE comparison used for measure agreement. Pure functions of
//! their inputs.

use rand::seq::SliceRandom;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use lsd_core::rng::StreamRng;

/// Chi-square goodness of fit of counts against reference probabilities.
/// Cells with expected count below `min_expected` are pooled into the
/// largest cell. Returns `(statistic, p_value, dof)`.
pub fn chi2_goodness_of_fit(
    counts: &[u64],
    probs: &[f64],
    min_expected: f64,
) -> (f64, f64, usize) {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    // pool small-expectation cells
    let mut pooled_count = 0u64;
    let mut pooled_prob = 0.0f64;
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    for (c, p) in counts.iter().zip(probs) {
        let e = nf * p;
        if e < min_expected {
            pooled_count += c;
            pooled_prob += p;
        } else {
            cells.push((*c as f64, e));
        }
    }
    if pooled_prob > 0.0 {
        cells.push((pooled_count as f64, nf * pooled_prob));
    }
    let stat: f64 = cells
        .iter()
        .map(|(o, e)| {
            if *e > 0.0 {
                (o - e) * (o - e) / e
            } else {
                0.0
            }
        })
        .sum();
    let dof = cells.len().saturating_sub(1).max(1);
    (stat, chi2_sf(stat, dof as f64), dof)
}

/// Chi-square goodness of fit against a reference measured with its own
/// per-cell standard errors: each cell's variance is inflated from
/// `n p (1-p)` to `n p + n^2 se_p^2`, which keeps the statistic
/// asymptotically chi-square when the reference is an independent estimate.
/// Returns `(statistic, p_value, dof)`.
pub fn chi2_gof_with_reference_error(
    counts: &[u64],
    probs: &[f64],
    se_probs: &[f64],
    min_expected: f64,
) -> (f64, f64, usize) {
    assert_eq!(counts.len(), probs.len());
    assert_eq!(counts.len(), se_probs.len());
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let mut pooled = (0.0f64, 0.0f64, 0.0f64); // (obs, prob, se^2)
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for ((c, p), se) in counts.iter().zip(probs).zip(se_probs) {
        if nf * p < min_expected {
            pooled.0 += *c as f64;
            pooled.1 += p;
            pooled.2 += se * se;
        } else {
            cells.push((*c as f64, *p, se * se));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let stat: f64 = cells
        .iter()
        .map(|(o, p, se2)| {
            let e = nf * p;
            let var = e * (1.0 - p) + nf * nf * se2;
            if var > 0.0 {
                (o - e) * (o - e) / var
            } else {
                0.0
            }
        })
        .sum();
    let dof = cells.len().saturating_sub(1).max(1);
    (stat, chi2_sf(stat, dof as f64), dof)
}

/// Chi-square homogeneity / independence over a contingency table
/// (rows x columns of counts). Columns whose total expected contribution is
/// tiny are pooled. Returns `(statistic, p_value, dof)`.
pub fn chi2_contingency(table: &[Vec<u64>], min_expected: f64) -> (f64, f64, usize) {
    let rows = table.len();
    let cols = table.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut t = vec![vec![0u64; cols]; rows];
    for (i, r) in table.iter().enumerate() {
        for (j, c) in r.iter().enumerate() {
            t[i][j] = *c;
        }
    }
    let row_sum: Vec<f64> = t.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sum: Vec<f64> = (0..cols)
        .map(|j| t.iter().map(|r| r[j] as f64).sum())
        .collect();
    let total: f64 = row_sum.iter().sum();
    // pool columns with small expectation anywhere
    let keep: Vec<usize> = (0..cols)
        .filter(|&j| {
            row_sum
                .iter()
                .all(|rs| rs * col_sum[j] / total >= min_expected)
        })
        .collect();
    let pooled: Vec<usize> = (0..cols).filter(|j| !keep.contains(j)).collect();
    let eff_cols = keep.len() + usize::from(!pooled.is_empty());
    if eff_cols < 2 || rows < 2 {
        return (0.0, 1.0, 1);
    }
    let mut stat = 0.0;
    for i in 0..rows {
        let mut row_cells: Vec<(f64, f64)> = keep
            .iter()
            .map(|&j| (t[i][j] as f64, row_sum[i] * col_sum[j] / total))
            .collect();
        if !pooled.is_empty() {
            let obs: f64 = pooled.iter().map(|&j| t[i][j] as f64).sum();
            let exp: f64 = pooled
                .iter()
                .map(|&j| row_sum[i] * col_sum[j] / total)
                .sum();
            row_cells.push((obs, exp));
        }
        for (o, e) in row_cells {
            if e > 0.0 {
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    let dof = (rows - 1) * (eff_cols - 1);
    (stat, chi2_sf(stat, dof as f64), dof)
}

fn chi2_sf(stat: f64, dof: f64) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof).expect("positive dof");
    1.0 - dist.cdf(stat)
}

/// Two-sample Kolmogorov-Smirnov with the asymptotic p-value
/// (Stephens' small-sample correction). Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        let (fa, fb) = (i as f64 / n as f64, j as f64 / m as f64);
        d = d.max((fa - fb).abs());
        if xs[i] <= ys[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    d = d.max((1.0 - (j as f64 / m as f64)).abs().min(1.0));
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut acc = 0.0f64;
    for j in 1..=100i32 {
        let jf = j as f64;
        let term = 2.0 * (-1.0f64).powi(j - 1) * (-2.0 * jf * jf * lambda * lambda).exp();
        acc += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    acc.clamp(0.0, 1.0)
}

/// Energy distance between samples under a metric, with a permutation
/// p-value. The statistic is
/// `2 E d(A, B) - E d(A, A') - E d(B, B')`.
pub fn energy_distance_perm(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    metric: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    n_perm: usize,
    rng: &mut StreamRng,
) -> (f64, f64) {
    let stat = energy_stat(a, b, &metric);
    let mut pool: Vec<&Vec<f64>> = a.iter().chain(b.iter()).collect();
    let na = a.len();
    let mut ge = 1usize; // the observed statistic counts itself
    for _ in 0..n_perm {
        pool.shuffle(rng);
        let pa: Vec<Vec<f64>> = pool[..na].iter().map(|v| (*v).clone()).collect();
        let pb: Vec<Vec<f64>> = pool[na..].iter().map(|v| (*v).clone()).collect();
        if energy_stat(&pa, &pb, &metric) >= stat {
            ge += 1;
        }
    }
    (stat, ge as f64 / (n_perm + 1) as f64)
}

fn energy_stat(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    metric: &(impl Fn(&[f64], &[f64]) -> f64 + Sync),
) -> f64 {
    let cross = pair_mean(a, b, metric);
    let within_a = self_mean(a, metric);
    let within_b = self_mean(b, metric);
    2.0 * cross - within_a - within_b
}

fn pair_mean(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    metric: &(impl Fn(&[f64], &[f64]) -> f64 + Sync),
) -> f64 {
    let mut acc = 0.0;
    for x in a {
        for y in b {
            acc += metric(x, y);
        }
    }
    acc / (a.len() * b.len()) as f64
}

fn self_mean(a: &[Vec<f64>], metric: &(impl Fn(&[f64], &[f64]) -> f64 + Sync)) -> f64 {
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += metric(&a[i], &a[j]);
        }
    }
    2.0 * acc / (n * (n - 1)) as f64
}

/// Euclidean distance on the flat torus (coordinates in [0, 1)).
pub fn torus_metric(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = (a - b).abs();
        let d = d.min(1.0 - d);
        acc += d * d;
    }
    acc.sqrt()
}

/// TV distance between two site-keyed empirical measures, with the
/// comparison SE: half the summed per-site binomial errors of both sides.
pub fn tv_with_se(
    a: &std::collections::BTreeMap<[i64; 3], f64>,
    se_a: &std::collections::BTreeMap<[i64; 3], f64>,
    b: &std::collections::BTreeMap<[i64; 3], f64>,
    n_b: u64,
) -> (f64, f64) {
    let mut sites: Vec<[i64; 3]> = a.keys().chain(b.keys()).copied().collect();
    sites.sort_unstable();
    sites.dedup();
    let mut tv = 0.0;
    let mut se = 0.0;
    for s in sites {
        let wa = a.get(&s).copied().unwrap_or(0.0);
        let wb = b.get(&s).copied().unwrap_or(0.0);
        tv += (wa - wb).abs();
        let sa = se_a.get(&s).copied().unwrap_or(0.0);
        let sb = (wb * (1.0 - wb) / n_b as f64).sqrt();
        se += sa + sb;
    }
    (0.5 * tv, 0.5 * se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::rng::RngLineage;
    use rand::Rng;

    #[test]
    fn chi2_null_behaves() {
        let mut rng = RngLineage::new(100).stream(0);
        let mut rejections = 0;
        for _ in 0..100 {
            let mut counts = [0u64; 6];
            for _ in 0..10_000 {
                counts[rng.gen_range(0..6)] += 1;
            }
            let (_, p, _) = chi2_goodness_of_fit(&counts, &[1.0 / 6.0; 6], 5.0);
            if p <= 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 2, "chi2 false-positive rate too high: {rejections}/100");
    }

    #[test]
    fn chi2_detects_loaded_die() {
        let mut rng = RngLineage::new(101).stream(0);
        let mut counts = [0u64; 6];
        for _ in 0..10_000 {
            let face = if rng.gen::<f64>() < 0.25 {
                0
            } else {
                rng.gen_range(0..6)
            };
            counts[face] += 1;
        }
        let (_, p, _) = chi2_goodness_of_fit(&counts, &[1.0 / 6.0; 6], 5.0);
        assert!(p < 1e-6);
    }

    #[test]
    fn ks_null_and_alternative() {
        let lineage = RngLineage::new(102);
        let mut rejections = 0;
        for s in 0..100u64 {
            let mut rng = lineage.stream(s);
            let a: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
            let (_, p) = ks_two_sample(&a, &b);
            if p <= 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 2, "KS false-positive rate: {rejections}/100");

        let mut rng = lineage.stream(1000);
        let a: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>() + 0.1).collect();
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p < 0.01, "shifted alternative must be rejected, p = {p}");
    }

    #[test]
    fn energy_distance_null_and_shift() {
        let lineage = RngLineage::new(103);
        let mut rng = lineage.stream(0);
        let a: Vec<Vec<f64>> = (0..150)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let b: Vec<Vec<f64>> = (0..150)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let (_, p_null) = energy_distance_perm(&a, &b, torus_metric, 199, &mut rng);
        assert!(p_null > 0.01, "null energy test rejected: p = {p_null}");

        let c: Vec<Vec<f64>> = (0..150)
            .map(|_| {
                vec![
                    (rng.gen::<f64>() * 0.5) % 1.0,
                    (rng.gen::<f64>() * 0.5) % 1.0,
                ]
            })
            .collect();
        let (_, p_alt) = energy_distance_perm(&a, &c, torus_metric, 199, &mut rng);
        assert!(p_alt <= 0.01, "concentrated alternative accepted: p = {p_alt}");
    }

    #[test]
    fn torus_metric_wraps() {
        let d = torus_metric(&[0.05], &[0.95]);
        assert!((d - 0.1).abs() < 1e-14);
    }
}
