use lsd_core::rng::RngLineage;
use lsd_diffusion::bins::BoundaryBins;
use lsd_diffusion::drift::DriftModel;
use lsd_diffusion::estimators::exit_measure_estimate;
use lsd_diffusion::kernels::poisson_density_vs_uniform;
use lsd_diffusion::point::CoverPoint;

fn bin_ref(y_off: &[f64; 3], r: f64, nbins: usize, k: usize) -> f64 {
    let m = 64;
    let mut expect = 0.0;
    for j in 0..m {
        let a = std::f64::consts::TAU * (k as f64 + (j as f64 + 0.5) / m as f64) / nbins as f64;
        let z = [r * a.cos(), r * a.sin(), 0.0];
        expect += poisson_density_vs_uniform(2, r, y_off, &z) / (m * nbins) as f64;
    }
    expect
}

fn smooth(v: &[f64]) -> Vec<f64> {
    let w: [f64; 3] = [5.0 / 19.0, 9.0 / 19.0, 5.0 / 19.0];
    (0..v.len())
        .map(|k| w[0] * v[(k + v.len() - 1) % v.len()] + w[1] * v[k] + w[2] * v[(k + 1) % v.len()])
        .collect()
}

fn fold(v: &[f64]) -> Vec<f64> {
    // mirror across the x-axis: bin k <-> bin (n-1-k)
    let n = v.len();
    (0..n).map(|k| 0.5 * (v[k] + v[n - 1 - k])).collect()
}

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let dt: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1e-4);
    let seeds: u64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(10);
    let model = DriftModel::new(2, &[], dt, 10.0).unwrap();
    let nbins = 64usize;
    let bins = BoundaryBins::for_dim(2, nbins);
    let y_off = [0.1, 0.0, 0.0];
    let mut y = CoverPoint::at_site([0, 0, 0]);
    y.frac[0] = 0.1;
    y.renormalize(2);
    let refs: Vec<f64> = (0..nbins).map(|k| bin_ref(&y_off, 0.3, nbins, k)).collect();
    let refs_fs = smooth(&fold(&refs));
    for seed in 0..seeds {
        let est = exit_measure_estimate(&model, [0, 0, 0], 0.3, &y, n, &bins, &RngLineage::new(900 + seed));
        let ms = smooth(&fold(&est.masses));
        let max_rel = (0..nbins)
            .map(|k| ((ms[k] - refs_fs[k]) / refs_fs[k]).abs())
            .fold(0.0f64, f64::max);
        println!("seed {seed}: fold+smooth max rel {max_rel:.4}");
    }
}
