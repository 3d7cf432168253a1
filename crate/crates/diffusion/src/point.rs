//! Points of the cover kept as (deck cell, fundamental-domain fraction).
//!
//! All region geometry is computed from the fraction and small integer cell
//! offsets, so a deck translation of the start shifts the cell and nothing
//! else: estimators at translated inputs replay bit-for-bit under the same
//! RNG stream.

/// A point of `R^d` as `cell + frac`, `frac` componentwise in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverPoint {
    pub cell: [i64; 3],
    pub frac: [f64; 3],
}

impl CoverPoint {
    pub fn new(d: usize, coords: &[f64]) -> CoverPoint {
        let mut p = CoverPoint {
            cell: [0; 3],
            frac: [0.0; 3],
        };
        for i in 0..d {
            p.frac[i] = coords[i];
        }
        p.renormalize(d);
        p
    }

    pub fn at_site(site: [i64; 3]) -> CoverPoint {
        CoverPoint {
            cell: site,
            frac: [0.0; 3],
        }
    }

    /// Absolute position (for reporting; geometry should use offsets).
    pub fn position(&self, d: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        for i in 0..d {
            x[i] = self.cell[i] as f64 + self.frac[i];
        }
        x
    }

    /// Moves fraction carries into the cell so `frac` is back in `[0,1)^d`.
    pub fn renormalize(&mut self, d: usize) {
        for i in 0..d {
            let carry = self.frac[i].floor();
            if carry != 0.0 {
                self.cell[i] += carry as i64;
                self.frac[i] -= carry;
            }
            // guard against -0.0 and 1.0-epsilon rounding artifacts
            if self.frac[i] >= 1.0 {
                self.cell[i] += 1;
                self.frac[i] -= 1.0;
            } else if self.frac[i] < 0.0 {
                self.cell[i] -= 1;
                self.frac[i] += 1.0;
            }
        }
    }

    /// The nearest deck-orbit site (lattice point).
    pub fn nearest_site(&self, d: usize) -> [i64; 3] {
        let mut s = self.cell;
        for i in 0..d {
            if self.frac[i] >= 0.5 {
                s[i] += 1;
            }
        }
        s
    }

    /// Offset `position - site`, computed cell-relatively so translated
    /// configurations produce identical floats.
    pub fn offset_from(&self, site: [i64; 3], d: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for i in 0..d {
            v[i] = (self.cell[i] - site[i]) as f64 + self.frac[i];
        }
        v
    }

    pub fn dist_to_site(&self, site: [i64; 3], d: usize) -> f64 {
        norm(&self.offset_from(site, d))
    }

    /// Distance to the nearest orbit site.
    pub fn dist_to_orbit(&self, d: usize) -> (f64, [i64; 3]) {
        let site = self.nearest_site(d);
        (self.dist_to_site(site, d), site)
    }

    pub fn translated(&self, gamma: [i64; 3]) -> CoverPoint {
        CoverPoint {
            cell: [
                self.cell[0] + gamma[0],
                self.cell[1] + gamma[1],
                self.cell[2] + gamma[2],
            ],
            frac: self.frac,
        }
    }

    /// Linear interpolation toward `other` (same cell basis); used by the
    /// crossing bisection. `t` in [0, 1].
    pub fn lerp(&self, other: &CoverPoint, t: f64, d: usize) -> CoverPoint {
        let mut p = *self;
        for i in 0..d {
            let delta = (other.cell[i] - self.cell[i]) as f64 + (other.frac[i] - self.frac[i]);
            p.frac[i] += t * delta;
        }
        p.renormalize(d);
        p
    }
}

pub fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
