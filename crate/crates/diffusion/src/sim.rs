//! The Euler-Maruyama stepper and the first-passage primitives built on it:
//! hitting a closed region, exiting an open ball, both with bisection
//! refinement of the crossing step.

use lsd_core::rng::StreamRng;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::drift::DriftModel;
use crate::point::{norm, CoverPoint};
use crate::region::RegionSpec;

/// Number of bisection iterations at a region crossing; the segment is
/// resolved to ~2^-48 of a step length.
const BISECT_ITERS: usize = 48;

/// One Euler-Maruyama increment:
/// `x <- x + grad ln phi(x) dt + sqrt(dt) xi`.
#[inline]
pub fn step(model: &DriftModel, p: &mut CoverPoint, rng: &mut StreamRng) {
    let sqrt_dt = model.dt.sqrt();
    if model.is_brownian() {
        for i in 0..model.d {
            let xi: f64 = rng.sample(StandardNormal);
            p.frac[i] += sqrt_dt * xi;
        }
    } else {
        let g = model.drift(&p.frac);
        for i in 0..model.d {
            let xi: f64 = rng.sample(StandardNormal);
            p.frac[i] += g[i] * model.dt + sqrt_dt * xi;
        }
    }
    p.renormalize(model.d);
}

/// Outcome of a first-passage leg.
#[derive(Debug, Clone)]
pub enum Passage {
    /// Crossed into/out of the region at `time`, located at `point`
    /// (bisection-refined); `site` is the owning orbit site when relevant.
    Crossed {
        time: f64,
        point: CoverPoint,
        site: [i64; 3],
    },
    /// No crossing by the (once-doubled) horizon.
    TimedOut { elapsed: f64, point: CoverPoint },
}

/// First hitting of a closed region, starting at `p` at local time zero.
/// A start inside the region returns time 0 at the start point. The horizon
/// `t_max` is retried once at double length before reporting a timeout.
pub fn hit_region(
    model: &DriftModel,
    region: &RegionSpec,
    start: &CoverPoint,
    t_max: f64,
    rng: &mut StreamRng,
) -> Passage {
    if let Some(site) = region.contains(start, model.d) {
        return Passage::Crossed {
            time: 0.0,
            point: *start,
            site,
        };
    }
    let mut prev = *start;
    let mut t = 0.0f64;
    let horizon = 2.0 * t_max;
    loop {
        let mut next = prev;
        step(model, &mut next, rng);
        t += model.dt;
        if let Some(_) = region.contains(&next, model.d) {
            // refine the crossing along the segment: prev outside, next inside
            let (point, frac_t) = bisect_entry(model, region, &prev, &next);
            let site = region
                .contains(&point, model.d)
                .unwrap_or_else(|| point.nearest_site(model.d));
            return Passage::Crossed {
                time: t - model.dt + frac_t * model.dt,
                point,
                site,
            };
        }
        if t >= horizon {
            return Passage::TimedOut {
                elapsed: t,
                point: next,
            };
        }
        prev = next;
    }
}

fn bisect_entry(
    model: &DriftModel,
    region: &RegionSpec,
    outside: &CoverPoint,
    inside: &CoverPoint,
) -> (CoverPoint, f64) {
    let mut lo = 0.0f64; // outside
    let mut hi = 1.0f64; // inside
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        let p = outside.lerp(inside, mid, model.d);
        if region.contains(&p, model.d).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (outside.lerp(inside, hi, model.d), hi)
}

/// First exit from the ball of radius `r_v` around `site`, starting inside.
/// The exit point is snapped radially onto the sphere, so downstream density
/// ratios get arguments exactly on the boundary. A start on or outside the
/// sphere exits immediately at its radial projection.
pub fn exit_ball(
    model: &DriftModel,
    site: [i64; 3],
    r_v: f64,
    start: &CoverPoint,
    rng: &mut StreamRng,
) -> (f64, CoverPoint) {
    let d = model.d;
    if start.dist_to_site(site, d) >= r_v {
        return (0.0, snap_to_sphere(start, site, r_v, d));
    }
    let mut prev = *start;
    let mut t = 0.0f64;
    loop {
        let mut next = prev;
        step(model, &mut next, rng);
        t += model.dt;
        if next.dist_to_site(site, d) >= r_v {
            // refine: prev inside, next outside
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                let p = prev.lerp(&next, mid, d);
                if p.dist_to_site(site, d) >= r_v {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let cross = prev.lerp(&next, hi, d);
            return (t - model.dt + hi * model.dt, snap_to_sphere(&cross, site, r_v, d));
        }
        prev = next;
    }
}

/// Radial projection onto the sphere of radius `r` around `site`.
pub fn snap_to_sphere(p: &CoverPoint, site: [i64; 3], r: f64, d: usize) -> CoverPoint {
    let off = p.offset_from(site, d);
    let n = norm(&off);
    let mut out = CoverPoint::at_site(site);
    if n == 0.0 {
        out.frac[0] = r;
        out.renormalize(d);
        return out;
    }
    for i in 0..d {
        out.frac[i] = off[i] / n * r;
    }
    out.renormalize(d);
    out
}
