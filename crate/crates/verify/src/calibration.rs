//! Null calibration of every statistical test: the false-positive rate at
//! the p > 0.01 threshold must stay at or below 2% over 100 null seeds,
//! and the designed alternatives must be rejected.

use rand::Rng;

use lsd_core::rng::RngLineage;

use crate::report::CheckReport;
use crate::stats::{
    chi2_contingency, chi2_gof_with_reference_error, chi2_goodness_of_fit, energy_distance_perm,
    ks_two_sample, torus_metric,
};
use crate::Ctx;

const N_SEEDS: u64 = 100;
const MAX_FALSE_POSITIVES: u64 = 2;

pub fn calibrate_all(ctx: &Ctx) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let lineage = RngLineage::new(ctx.seed).child("calibration");

    // chi-square goodness of fit: fair die, 1e4 draws
    {
        let mut fp = 0u64;
        for s in 0..N_SEEDS {
            let mut rng = lineage.child("chi2").stream(s);
            let mut counts = [0u64; 6];
            for _ in 0..10_000 {
                counts[rng.gen_range(0..6)] += 1;
            }
            let (_, p, _) = chi2_goodness_of_fit(&counts, &[1.0 / 6.0; 6], 5.0);
            if p <= ctx.p_threshold {
                fp += 1;
            }
        }
        reports.push(fp_report(ctx, "calibration/chi2-gof", fp));
    }

    // chi-square with reference error: multinomial counts vs an
    // independently noisy reference with known per-cell SE
    {
        let probs = [0.35, 0.25, 0.15, 0.1, 0.08, 0.07];
        let n = 20_000u64;
        let m = 20_000f64;
        let mut fp = 0u64;
        for s in 0..N_SEEDS {
            let mut rng = lineage.child("chi2-ref").stream(s);
            let mut counts = [0u64; 6];
            for _ in 0..n {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut cell = 5;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        cell = i;
                        break;
                    }
                }
                counts[cell] += 1;
            }
            // reference: an independent multinomial estimate of the same law
            let mut ref_counts = [0u64; 6];
            for _ in 0..(m as u64) {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut cell = 5;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        cell = i;
                        break;
                    }
                }
                ref_counts[cell] += 1;
            }
            let ref_probs: Vec<f64> = ref_counts.iter().map(|c| *c as f64 / m).collect();
            let ref_se: Vec<f64> = ref_probs
                .iter()
                .map(|p| (p * (1.0 - p) / m).sqrt())
                .collect();
            let (_, p, _) = chi2_gof_with_reference_error(&counts, &ref_probs, &ref_se, 5.0);
            if p <= ctx.p_threshold {
                fp += 1;
            }
        }
        reports.push(fp_report(ctx, "calibration/chi2-reference-error", fp));
    }

    // chi-square contingency under homogeneity
    {
        let mut fp = 0u64;
        for s in 0..N_SEEDS {
            let mut rng = lineage.child("chi2-cont").stream(s);
            let mut table = vec![vec![0u64; 5]; 2];
            for row in table.iter_mut() {
                for _ in 0..5_000 {
                    row[rng.gen_range(0..5)] += 1;
                }
            }
            let (_, p, _) = chi2_contingency(&table, 5.0);
            if p <= ctx.p_threshold {
                fp += 1;
            }
        }
        reports.push(fp_report(ctx, "calibration/chi2-contingency", fp));
    }

    // two-sample KS under the null
    {
        let mut fp = 0u64;
        for s in 0..N_SEEDS {
            let mut rng = lineage.child("ks").stream(s);
            let a: Vec<f64> = (0..2_000).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..2_000).map(|_| rng.gen::<f64>()).collect();
            let (_, p) = ks_two_sample(&a, &b);
            if p <= ctx.p_threshold {
                fp += 1;
            }
        }
        reports.push(fp_report(ctx, "calibration/ks", fp));
    }

    // permutation energy distance under the null (smaller seed count: the
    // permutation inner loop dominates)
    {
        let mut fp = 0u64;
        for s in 0..N_SEEDS {
            let mut rng = lineage.child("energy").stream(s);
            let a: Vec<Vec<f64>> = (0..120)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let b: Vec<Vec<f64>> = (0..120)
                .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
                .collect();
            let (_, p) = energy_distance_perm(&a, &b, torus_metric, 199, &mut rng);
            if p <= ctx.p_threshold {
                fp += 1;
            }
        }
        reports.push(fp_report(ctx, "calibration/energy", fp));
    }

    // designed alternatives must be rejected
    {
        let mut rng = lineage.child("alt").stream(0);
        let a: Vec<f64> = (0..2_000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..2_000).map(|_| rng.gen::<f64>() * 0.85).collect();
        let (stat, p) = ks_two_sample(&a, &b);
        let mut r = CheckReport::from_p_value(
            "calibration/ks-power",
            "designed-alternative",
            stat,
            p,
            ctx.p_threshold,
            ctx.seed,
            2_000,
            "scaled sample must be rejected",
        );
        r.verdict = if p <= ctx.p_threshold {
            crate::report::Verdict::Pass
        } else {
            crate::report::Verdict::Fail
        };
        reports.push(r);
    }

    reports
}

fn fp_report(ctx: &Ctx, theorem: &str, fp: u64) -> CheckReport {
    CheckReport::from_statistic(
        theorem,
        "null-calibration",
        fp as f64,
        MAX_FALSE_POSITIVES as f64,
        0.0,
        ctx.seed,
        N_SEEDS,
        format!("{fp}/{N_SEEDS} null rejections at p <= {}", ctx.p_threshold),
    )
}
