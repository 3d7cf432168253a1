//! Analytic kernels for the driftless case: Poisson kernels of balls (exit
//! densities), ball Green functions, and the free-space Green function,
//! all for the generator (1/2) Laplacian. Exit locations do not feel the
//! time change, so the Poisson kernels are the classical harmonic-measure
//! densities.

use crate::point::norm;

/// Density ratio `d eps(y, V) / d eps(x, V)` at the boundary point `z`, for
/// the ball `V` of radius `r` centered at the site (`x` = center, `y` and
/// `z` given as offsets from the center, `|z| = r`).
pub fn poisson_ratio_to_center(d: usize, r: f64, y: &[f64; 3], z: &[f64; 3]) -> f64 {
    match d {
        1 => {
            // exit right with probability (r + y)/2r vs 1/2 from the center
            let s = if z[0] >= 0.0 { 1.0 } else { -1.0 };
            (r + s * y[0]) / r
        }
        2 => {
            let dy = [z[0] - y[0], z[1] - y[1], 0.0];
            (r * r - sq(y)) / sq(&dy)
        }
        3 => {
            let dy = [z[0] - y[0], z[1] - y[1], z[2] - y[2]];
            r * (r * r - sq(y)) / sq(&dy).powf(1.5)
        }
        _ => panic!("dimension {d} unsupported"),
    }
}

/// Poisson kernel of the ball of radius `r`: density of the exit measure
/// from `y` w.r.t. the *uniform probability measure* on the sphere
/// (so the center gives exactly 1).
pub fn poisson_density_vs_uniform(d: usize, r: f64, y: &[f64; 3], z: &[f64; 3]) -> f64 {
    poisson_ratio_to_center(d, r, y, z)
}

/// Exact extremum of `max(ratio, 1/ratio)` over `|y| <= r_f`, `|z| = r_v`
/// for the ball Poisson kernels: the analytic Harnack constant of the pair.
pub fn harnack_extremum(d: usize, r_f: f64, r_v: f64) -> f64 {
    assert!(r_f < r_v);
    let (r, p) = (r_v, r_f);
    match d {
        1 => {
            let up = (r + p) / r;
            let down = r / (r - p);
            up.max(down)
        }
        2 => (r + p) / (r - p),
        3 => {
            let up = r * (r + p) / ((r - p) * (r - p));
            let down = (r + p) * (r + p) / (r * (r - p));
            up.max(down)
        }
        _ => panic!("dimension {d} unsupported"),
    }
}

/// Green function of the ball of radius `big_r` for (1/2) Laplacian, pole at
/// the center, evaluated at distance `dist`.
pub fn green_ball_center(d: usize, big_r: f64, dist: f64) -> f64 {
    assert!(dist > 0.0 && dist <= big_r);
    match d {
        1 => big_r - dist,
        2 => (big_r / dist).ln() / std::f64::consts::PI,
        3 => (1.0 / dist - 1.0 / big_r) / (2.0 * std::f64::consts::PI),
        _ => panic!("dimension {d} unsupported"),
    }
}

/// Inverts `green_ball_center(d, big_r, rho) = b` for `rho`: the radius of
/// the level set `{G >= b}`.
pub fn green_ball_level_radius(d: usize, big_r: f64, b: f64) -> f64 {
    assert!(b > 0.0);
    match d {
        1 => big_r - b,
        2 => big_r * (-std::f64::consts::PI * b).exp(),
        3 => 1.0 / (2.0 * std::f64::consts::PI * b + 1.0 / big_r),
        _ => panic!("dimension {d} unsupported"),
    }
}

/// Free-space Green function of (1/2) Laplacian in d = 3.
pub fn green_free_d3(x: &[f64; 3], z: &[f64; 3]) -> f64 {
    let diff = [x[0] - z[0], x[1] - z[1], x[2] - z[2]];
    1.0 / (2.0 * std::f64::consts::PI * norm(&diff))
}

fn sq(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_ratio_is_one() {
        for d in 1..=3 {
            let z = [0.3, 0.0, 0.0];
            let r = poisson_ratio_to_center(d, 0.3, &[0.0; 3], &z);
            assert!((r - 1.0).abs() < 1e-14, "d={d}: {r}");
        }
    }

    /// d = 2 Poisson density integrates to 1 over the circle.
    #[test]
    fn d2_poisson_normalizes() {
        let r = 0.3;
        let y = [0.1, 0.05, 0.0];
        let n = 20_000;
        let mut acc = 0.0;
        for k in 0..n {
            let a = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            let z = [r * a.cos(), r * a.sin(), 0.0];
            acc += poisson_density_vs_uniform(2, r, &y, &z) / n as f64;
        }
        assert!((acc - 1.0).abs() < 1e-6, "integral {acc}");
    }

    /// d = 3 Poisson density integrates to 1 over the sphere (midpoint grid).
    #[test]
    fn d3_poisson_normalizes() {
        let r = 0.3;
        let y = [0.1, 0.0, 0.05];
        let n_theta = 400;
        let n_phi = 400;
        let mut acc = 0.0;
        for i in 0..n_theta {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
            for j in 0..n_phi {
                let phi = std::f64::consts::TAU * (j as f64 + 0.5) / n_phi as f64;
                let z = [
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                ];
                let w = theta.sin() * std::f64::consts::PI / n_theta as f64
                    * std::f64::consts::TAU
                    / n_phi as f64
                    / (4.0 * std::f64::consts::PI);
                acc += poisson_density_vs_uniform(3, r, &y, &z) * w;
            }
        }
        assert!((acc - 1.0).abs() < 1e-4, "integral {acc}");
    }

    #[test]
    fn harnack_extrema_hand_values() {
        assert!((harnack_extremum(1, 0.1, 0.3) - 1.5).abs() < 1e-12);
        assert!((harnack_extremum(2, 0.1, 0.3) - 2.0).abs() < 1e-12);
        assert!((harnack_extremum(3, 0.1, 0.3) - 3.0).abs() < 1e-12);
    }

    /// The balanced-radius inversion reproduces the d = 3 hand value:
    /// B = (1/2pi)(1/0.1 - 1/0.3) maps back to rho = 0.1.
    #[test]
    fn level_radius_round_trip() {
        let b = green_ball_center(3, 0.3, 0.1);
        let hand = (1.0 / 0.1 - 1.0 / 0.3) / (2.0 * std::f64::consts::PI);
        assert!((b - hand).abs() < 1e-15);
        let rho = green_ball_level_radius(3, 0.3, b);
        assert!((rho - 0.1).abs() < 1e-12);
        for d in 1..=3 {
            let b = green_ball_center(d, 0.4, 0.17);
            let rho = green_ball_level_radius(d, 0.4, b);
            assert!((rho - 0.17).abs() < 1e-12, "d={d}");
        }
    }
}
