//! The Euclidean covering model: Brownian motion with drift `grad ln phi`
//! on `R^d`, where `ln phi` is a trigonometric polynomial pulled back from
//! the torus (so the deck group `Z^d` leaves everything invariant).

use lsd_core::config::{LogPhiTerm, ModelConfig};
use lsd_core::CoreError;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Cos,
    Sin,
}

#[derive(Debug, Clone)]
struct Term {
    amp: f64,
    k: [i32; 3],
    phase: Phase,
}

/// Brownian motion with drift `grad ln phi` on the cover `R^d -> T^d`.
#[derive(Debug, Clone)]
pub struct DriftModel {
    pub d: usize,
    terms: Vec<Term>,
    pub dt: f64,
    pub t_max: f64,
}

impl DriftModel {
    pub fn new(d: usize, terms: &[LogPhiTerm], dt: f64, t_max: f64) -> Result<Self, CoreError> {
        if d == 0 || d > 3 {
            return Err(CoreError::BadConfig(format!("dimension {d} not in 1..=3")));
        }
        if dt <= 0.0 {
            return Err(CoreError::BadConfig("dt must be positive".into()));
        }
        let mut resolved = Vec::new();
        for t in terms {
            if t.k.len() != d {
                return Err(CoreError::BadConfig(format!(
                    "logphi wave vector {:?} has {} entries, model dimension is {d}",
                    t.k,
                    t.k.len()
                )));
            }
            let mut k = [0i32; 3];
            k[..d].copy_from_slice(&t.k);
            let phase = match t.phase.as_str() {
                "cos" => Phase::Cos,
                "sin" => Phase::Sin,
                other => {
                    return Err(CoreError::BadConfig(format!(
                        "logphi phase must be cos or sin, got `{other}`"
                    )))
                }
            };
            if t.amp != 0.0 {
                resolved.push(Term { amp: t.amp, k, phase });
            }
        }
        Ok(DriftModel {
            d,
            terms: resolved,
            dt,
            t_max,
        })
    }

    /// Pure Brownian motion (`phi = 1`).
    pub fn brownian(d: usize, dt: f64, t_max: f64) -> Self {
        DriftModel::new(d, &[], dt, t_max).expect("valid brownian params")
    }

    pub fn from_config(cfg: &ModelConfig) -> Result<Self, CoreError> {
        if cfg.family != "torus-cover" {
            return Err(CoreError::BadConfig(format!(
                "family `{}` is not a continuous covering model",
                cfg.family
            )));
        }
        let d = cfg.d.unwrap_or(1);
        let dt = cfg.dt.unwrap_or(if d == 3 { 2.5e-4 } else { 1e-4 });
        let t_max = cfg.t_max.unwrap_or(100.0);
        let empty = Vec::new();
        DriftModel::new(d, cfg.logphi.as_ref().unwrap_or(&empty), dt, t_max)
    }

    pub fn model_id(&self) -> String {
        if self.is_brownian() {
            format!("torus-cover-d{}", self.d)
        } else {
            format!("torus-cover-d{}-drift", self.d)
        }
    }

    /// True when `phi = 1`; the drift evaluator then short-circuits to an
    /// exact zero, making the pure-Brownian path bit-stable across models.
    pub fn is_brownian(&self) -> bool {
        self.terms.is_empty()
    }

    /// `ln phi` at a point of the fundamental domain.
    pub fn log_phi(&self, frac: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let arg = TWO_PI * Self::dot(&t.k, frac);
            acc += t.amp
                * match t.phase {
                    Phase::Cos => arg.cos(),
                    Phase::Sin => arg.sin(),
                };
        }
        acc
    }

    pub fn phi_sq(&self, frac: &[f64; 3]) -> f64 {
        if self.is_brownian() {
            1.0
        } else {
            (2.0 * self.log_phi(frac)).exp()
        }
    }

    /// `grad ln phi` evaluated on the fundamental domain (exactly zero for
    /// `phi = 1`).
    pub fn drift(&self, frac: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0f64; 3];
        if self.is_brownian() {
            return g;
        }
        for t in &self.terms {
            let arg = TWO_PI * Self::dot(&t.k, frac);
            let scale = t.amp
                * TWO_PI
                * match t.phase {
                    Phase::Cos => -arg.sin(),
                    Phase::Sin => arg.cos(),
                };
            for i in 0..self.d {
                g[i] += scale * t.k[i] as f64;
            }
        }
        g
    }

    fn dot(k: &[i32; 3], x: &[f64; 3]) -> f64 {
        k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_model() -> DriftModel {
        // ln phi = 0.3 cos(2 pi x1)
        DriftModel::new(
            2,
            &[LogPhiTerm {
                amp: 0.3,
                k: vec![1, 0],
                phase: "cos".into(),
            }],
            1e-4,
            100.0,
        )
        .unwrap()
    }

    #[test]
    fn brownian_drift_is_exactly_zero() {
        let m = DriftModel::brownian(3, 1e-4, 100.0);
        let g = m.drift(&[0.3, 0.7, 0.1]);
        assert_eq!(g, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn log_phi_is_periodic() {
        let m = cos_model();
        for p in [[0.13, 0.4, 0.0], [0.77, 0.9, 0.0], [0.01, 0.5, 0.0]] {
            let shifted = [p[0], p[1], p[2]]; // same fundamental-domain point
            assert!((m.log_phi(&p) - m.log_phi(&shifted)).abs() < 1e-12);
        }
    }

    /// Second-order finite differences reproduce the drift at O(h^2).
    #[test]
    fn drift_matches_finite_differences() {
        let m = cos_model();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..100 {
            let x = [0.01 * i as f64 % 1.0, 0.37 * i as f64 % 1.0, 0.0];
            let g = m.drift(&x);
            for axis in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[axis] += h;
                xm[axis] -= h;
                let fd = (m.log_phi(&xp) - m.log_phi(&xm)) / (2.0 * h);
                worst = worst.max((fd - g[axis]).abs());
            }
        }
        assert!(worst < 1e-7, "finite-difference mismatch {worst}");
    }

    #[test]
    fn wrong_wave_vector_length_is_rejected() {
        let r = DriftModel::new(
            1,
            &[LogPhiTerm {
                amp: 0.1,
                k: vec![1, 2],
                phase: "cos".into(),
            }],
            1e-4,
            100.0,
        );
        assert!(r.is_err());
    }
}
