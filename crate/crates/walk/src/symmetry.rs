//! Ratio bounds for central elements and the symmetry dichotomy for
//! positive harmonic functions.

use lsd_core::group::GroupElem;
use lsd_core::space::StateId;

use crate::harmonic::WindowFn;
use crate::hitting::HittingFamily;
use crate::trunc::Truncated;
use crate::WalkError;

/// Certificate that `sup gamma^* h / h <= 1/c` for every positive
/// mu-harmonic `h`: some power `mu^k_x(gamma x) >= c > 0` uniformly over
/// orbit representatives.
#[derive(Debug, Clone)]
pub struct RatioBound {
    pub c: f64,
    pub k: u32,
    pub bound: f64,
    /// max of h(gamma x)/h(x) actually observed for the checked function
    pub observed: f64,
}

/// Finds the smallest `k <= kmax` with `mu^k_x(gamma x)` uniformly positive
/// over interior orbit points whose translate stays in the window, and
/// verifies the implied ratio bound for the supplied positive function.
///
/// `g` must be central: translations always are; for the free group only the
/// identity is accepted.
pub fn center_ratio_bound(
    tr: &Truncated,
    family: &HittingFamily,
    g: &GroupElem,
    h: &WindowFn,
    kmax: u32,
) -> Result<RatioBound, WalkError> {
    match (&tr.model.family, g) {
        (_, g) if g.is_identity() => {}
        (lsd_core::model::Family::FreeGroupTree { .. }, g) => {
            return Err(WalkError::NotCentral(format!("{g:?}")));
        }
        (_, GroupElem::LeftWord(_)) => {
            return Err(WalkError::NotCentral(format!("{g:?}")));
        }
        _ => {}
    }

    // orbit points x with gamma x in the window, kept away from the edge so
    // the truncated powers still carry their mass
    let deep: Vec<(StateId, StateId)> = tr
        .orbit_ids()
        .filter(|&x| tr.window.dist_from_center(x) * 2 <= tr.window.radius())
        .filter_map(|x| {
            let image = g.act(tr.window.site(x)).ok()?;
            tr.window.id_of(&image).map(|gx| (x, gx))
        })
        .collect();
    if deep.is_empty() {
        return Err(WalkError::EmptyOrbit);
    }

    if g.is_identity() {
        let observed = observed_ratio(&deep, h)?;
        return Ok(RatioBound {
            c: 1.0,
            k: 0,
            bound: 1.0,
            observed,
        });
    }

    // iterate mu-powers from each representative and look for uniform
    // positivity
    let mut rows: Vec<lsd_core::FiniteMeasure> =
        deep.iter().map(|&(x, _)| family.row(x).clone()).collect();
    for k in 1..=kmax {
        let mut cmin = f64::INFINITY;
        for (i, &(_, gx)) in deep.iter().enumerate() {
            cmin = cmin.min(rows[i].weight(gx));
        }
        if cmin > 1e-12 {
            let observed = observed_ratio(&deep, h)?;
            return Ok(RatioBound {
                c: cmin,
                k,
                bound: 1.0 / cmin,
                observed,
            });
        }
        if k < kmax {
            for row in rows.iter_mut() {
                let mut next = lsd_core::FiniteMeasure::new();
                for (z, w) in row.iter() {
                    next.add_scaled(family.row(z), w);
                }
                *row = next;
            }
        }
    }
    Err(WalkError::NoPositivePath(kmax as usize))
}

fn observed_ratio(pairs: &[(StateId, StateId)], h: &WindowFn) -> Result<f64, WalkError> {
    let mut worst = 0.0f64;
    for &(x, gx) in pairs {
        let hx = h.get(x).ok_or(WalkError::MissingValue(x))?;
        let hgx = h.get(gx).ok_or(WalkError::MissingValue(gx))?;
        if hx > 0.0 {
            worst = worst.max(hgx / hx);
        }
    }
    Ok(worst)
}

/// Outcome of the symmetry dichotomy evaluation.
#[derive(Debug, Clone)]
pub struct DichotomyCertificate {
    /// per-gamma data: (orbit point gamma x0, mu-mass, c(gamma), term value)
    pub terms: Vec<(StateId, f64, f64, f64)>,
    /// `sum mu_{x0}(gamma x0) (c + 1/c - 2)`
    pub total: f64,
    /// true when the total vanishes within tolerance, certifying `c == 1`
    /// on the support and hence Gamma-invariance of `h`
    pub constant_verdict: bool,
}

/// Evaluates the dichotomy inequality chain for a symmetric model: for each
/// orbit point `z = gamma x0` in the support of `mu_{x0}`, the ratio
/// `c(gamma) = h(gamma x)/h(x)` must be constant over the orbit (relative
/// variance below 1e-6), and the nonnegative sum
/// `sum mu_{x0}(gamma x0)(c(gamma) + c(gamma)^{-1} - 2)` is reported; it
/// vanishes exactly when `c == 1` on the support.
pub fn dichotomy_certificate(
    tr: &Truncated,
    family: &HittingFamily,
    h: &WindowFn,
    x0: StateId,
    tol: f64,
) -> Result<DichotomyCertificate, WalkError> {
    if !tr.model.symmetric {
        return Err(WalkError::NotSymmetric("dichotomy_certificate"));
    }
    if !tr.in_orbit(x0) {
        return Err(WalkError::NotInOrbit(x0));
    }
    let x0_site = tr.window.site(x0).clone();
    let mut terms = Vec::new();
    let mut total = 0.0;
    for (z, mass) in family.row(x0).iter() {
        let gamma = tr.model.deck_element_between(&x0_site, tr.window.site(z));
        let c = ratio_constant(tr, h, &gamma)?;
        let term = mass * (c + 1.0 / c - 2.0);
        total += term;
        terms.push((z, mass, c, term));
    }
    Ok(DichotomyCertificate {
        constant_verdict: total.abs() < tol,
        terms,
        total,
    })
}

/// The constant `c(gamma) = h(gamma x) / h(x)`, verified constant over all
/// orbit points with both `x` and `gamma x` in the window.
pub fn ratio_constant(tr: &Truncated, h: &WindowFn, gamma: &GroupElem) -> Result<f64, WalkError> {
    let mut ratios = Vec::new();
    for x in tr.orbit_ids() {
        let image = match gamma.act(tr.window.site(x)) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if let Some(gx) = tr.window.id_of(&image) {
            let hx = h.get(x).ok_or(WalkError::MissingValue(x))?;
            let hgx = h.get(gx).ok_or(WalkError::MissingValue(gx))?;
            if hx.abs() > 0.0 {
                ratios.push(hgx / hx);
            }
        }
    }
    if ratios.is_empty() {
        return Err(WalkError::EmptyOrbit);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
    let rel_var = var / (mean * mean);
    if rel_var > 1e-6 {
        return Err(WalkError::RatioNotConstant(rel_var));
    }
    Ok(mean)
}
