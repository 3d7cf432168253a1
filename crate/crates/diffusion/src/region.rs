//! Regions used by the stopping times: single balls, deck-orbit unions of
//! balls, and radial level-set profiles.

use crate::point::{norm, CoverPoint};

/// Geometry of one region (or of the per-site copy in an orbit union).
#[derive(Debug, Clone)]
pub enum RegionKind {
    /// Euclidean ball of the given radius.
    Ball { radius: f64 },
    /// Direction-dependent radius, piecewise-linearly interpolated over
    /// equal-angle samples (d = 2) or taken constant (d = 1, 3 fall back to
    /// the mean).
    RadialProfile { samples: Vec<f64> },
}

impl RegionKind {
    pub fn radius_toward(&self, dir: &[f64; 3], d: usize) -> f64 {
        match self {
            RegionKind::Ball { radius } => *radius,
            RegionKind::RadialProfile { samples } => {
                if d == 2 && samples.len() >= 2 {
                    let mut a = dir[1].atan2(dir[0]);
                    if a < 0.0 {
                        a += std::f64::consts::TAU;
                    }
                    let t = a / std::f64::consts::TAU * samples.len() as f64;
                    let i = (t as usize) % samples.len();
                    let j = (i + 1) % samples.len();
                    let w = t - t.floor();
                    samples[i] * (1.0 - w) + samples[j] * w
                } else {
                    samples.iter().sum::<f64>() / samples.len() as f64
                }
            }
        }
    }

    pub fn max_radius(&self) -> f64 {
        match self {
            RegionKind::Ball { radius } => *radius,
            RegionKind::RadialProfile { samples } => {
                samples.iter().cloned().fold(0.0f64, f64::max)
            }
        }
    }
}

/// A region instantiated either once or as a deck-orbit union.
#[derive(Debug, Clone)]
pub enum RegionSpec {
    /// One region centered at a site of the orbit (or at an arbitrary
    /// point, given cell-relatively).
    At { center: [i64; 3], kind: RegionKind },
    /// The union over all orbit sites of a copy of `kind`.
    OrbitUnion { kind: RegionKind },
}

impl RegionSpec {
    pub fn orbit_balls(radius: f64) -> RegionSpec {
        RegionSpec::OrbitUnion {
            kind: RegionKind::Ball { radius },
        }
    }

    pub fn ball_at(center: [i64; 3], radius: f64) -> RegionSpec {
        RegionSpec::At {
            center,
            kind: RegionKind::Ball { radius },
        }
    }

    /// Membership; returns the site owning the containing component.
    pub fn contains(&self, p: &CoverPoint, d: usize) -> Option<[i64; 3]> {
        match self {
            RegionSpec::At { center, kind } => {
                let off = p.offset_from(*center, d);
                let r = norm(&off);
                (r <= kind.radius_toward(&off, d)).then_some(*center)
            }
            RegionSpec::OrbitUnion { kind } => {
                let site = p.nearest_site(d);
                let off = p.offset_from(site, d);
                let r = norm(&off);
                (r <= kind.radius_toward(&off, d)).then_some(site)
            }
        }
    }

    pub fn max_radius(&self) -> f64 {
        match self {
            RegionSpec::At { kind, .. } | RegionSpec::OrbitUnion { kind } => kind.max_radius(),
        }
    }
}
