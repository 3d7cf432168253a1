//! The rejection weight `kappa(x, y, z) = (1/C) d eps(x, V_x)/d eps(y, V_x)(z)`
//! for an F-entry at `y` that exits `V_x` at `z`. Analytic Poisson-kernel
//! ratios when `phi = 1`, binned density tables otherwise.

use lsd_core::rng::RngLineage;
use lsd_diffusion::bins::BoundaryBins;
use lsd_diffusion::drift::DriftModel;
use lsd_diffusion::kernels::poisson_ratio_to_center;
use lsd_diffusion::point::{norm, CoverPoint};

use crate::data::{binned_exit_density, LsData};
use crate::LsError;

/// Snap tolerance for "z on the V-sphere".
const SPHERE_TOL: f64 = 1e-6;

/// The inputs and value of one kappa evaluation.
#[derive(Debug, Clone)]
pub struct KappaParams {
    pub site: [i64; 3],
    pub y_offset: [f64; 3],
    pub z_offset: [f64; 3],
    pub kappa: f64,
}

/// Where the density ratios come from.
#[derive(Debug, Clone)]
pub enum KappaSource {
    /// `phi = 1`: exact ball Poisson kernels.
    Analytic,
    /// Binned, smoothed densities from the center and from entry
    /// representatives on the F-sphere (general drift).
    Table(KappaTable),
}

impl KappaSource {
    pub fn for_model(
        data: &LsData,
        model: &DriftModel,
        n_paths: u64,
        lineage: &RngLineage,
    ) -> Result<KappaSource, LsError> {
        if model.is_brownian() {
            Ok(KappaSource::Analytic)
        } else {
            Ok(KappaSource::Table(KappaTable::build(
                data, model, n_paths, lineage,
            )?))
        }
    }

    /// Evaluates kappa for an entry at `y` (in `F_x`) exiting at `z` (on
    /// the V-sphere). Offsets are site-relative.
    pub fn kappa(
        &self,
        data: &LsData,
        site: [i64; 3],
        y: &CoverPoint,
        z: &CoverPoint,
    ) -> Result<KappaParams, LsError> {
        let d = data.d;
        let y_off = y.offset_from(site, d);
        let z_off = z.offset_from(site, d);
        let y_dist = norm(&y_off);
        if y_dist > data.r_f + SPHERE_TOL {
            return Err(LsError::KappaEntryOutsideF {
                dist: y_dist,
                r_f: data.r_f,
            });
        }
        let z_err = (norm(&z_off) - data.r_v).abs();
        if z_err > SPHERE_TOL {
            return Err(LsError::KappaExitOffSphere { off: z_err });
        }
        let ratio_y_over_x = match self {
            KappaSource::Analytic => poisson_ratio_to_center(d, data.r_v, &y_off, &z_off),
            KappaSource::Table(table) => table.ratio(&y_off, &z_off),
        };
        Ok(KappaParams {
            site,
            y_offset: y_off,
            z_offset: z_off,
            kappa: 1.0 / (data.c * ratio_y_over_x),
        })
    }
}

/// Binned density table: smoothed exit densities from the ball center and
/// from entry representatives on the F-sphere; ratios are looked up at the
/// nearest representative and exit bin.
#[derive(Debug, Clone)]
pub struct KappaTable {
    bins: BoundaryBins,
    y_bins: BoundaryBins,
    center_density: Vec<f64>,
    rep_density: Vec<Vec<f64>>,
}

impl KappaTable {
    pub fn build(
        data: &LsData,
        model: &DriftModel,
        n_paths: u64,
        lineage: &RngLineage,
    ) -> Result<KappaTable, LsError> {
        let bins = data.bins();
        let y_bins = data.bins();
        let center = CoverPoint::at_site([0, 0, 0]);
        let center_density =
            binned_exit_density(model, &center, data.r_v, n_paths, &bins, &lineage.child("x"))?;
        let mut rep_density = Vec::with_capacity(y_bins.len());
        for rep in 0..y_bins.len() {
            let dir = y_bins.representative(rep);
            let mut y = CoverPoint::at_site([0, 0, 0]);
            for i in 0..data.d {
                y.frac[i] = dir[i] * data.r_f;
            }
            y.renormalize(data.d);
            rep_density.push(binned_exit_density(
                model,
                &y,
                data.r_v,
                n_paths,
                &bins,
                &lineage.child(&format!("y{rep}")),
            )?);
        }
        Ok(KappaTable {
            bins,
            y_bins,
            center_density,
            rep_density,
        })
    }

    fn ratio(&self, y_off: &[f64; 3], z_off: &[f64; 3]) -> f64 {
        let yb = self.y_bins.index(y_off);
        let zb = self.bins.index(z_off);
        self.rep_density[yb][zb] / self.center_density[zb]
    }
}
