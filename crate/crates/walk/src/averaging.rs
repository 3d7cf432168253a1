//! Averaging operators: the Cesaro stand-in for the invariant mean, and the
//! isotropy-averaging operator for proper actions.

use crate::WalkError;

/// Result of the Cesaro projection.
#[derive(Debug, Clone)]
pub struct CesaroResult {
    /// `(1/K) sum_{k<K} (P^k f)`
    pub averaged: Vec<f64>,
    /// max-norm oscillation of the partial averages over the last fifth of
    /// the horizon
    pub tail_oscillation: f64,
    /// harmonicity residual of the averaged function, when the oscillation
    /// is below the requested tolerance (`None` otherwise: non-convergence
    /// is a report, not an error)
    pub residual_of_limit: Option<f64>,
}

/// Cesaro average of the orbit sequence `k -> (P^k f)(x)`, a constructive
/// stand-in for pairing with an invariant mean. `rows` are the transition
/// rows of the chain (any sub-stochastic family).
pub fn cesaro_projection(
    rows: &[Vec<(u32, f64)>],
    f: &[f64],
    horizon: usize,
    osc_tol: f64,
) -> CesaroResult {
    assert!(horizon >= 1);
    let n = f.len();
    let mut power = f.to_vec(); // P^k f
    let mut sum = vec![0.0f64; n];
    let tail_start = horizon - horizon / 5;
    let mut tail_reference: Option<Vec<f64>> = None;
    let mut tail_oscillation = 0.0f64;
    for k in 0..horizon {
        for y in 0..n {
            sum[y] += power[y];
        }
        if k + 1 >= tail_start {
            let avg: Vec<f64> = sum.iter().map(|s| s / (k + 1) as f64).collect();
            match &tail_reference {
                None => tail_reference = Some(avg),
                Some(reference) => {
                    let osc = avg
                        .iter()
                        .zip(reference)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    tail_oscillation = tail_oscillation.max(osc);
                }
            }
        }
        if k + 1 < horizon {
            let mut next = vec![0.0f64; n];
            for (y, row) in rows.iter().enumerate() {
                let mut acc = 0.0;
                for &(z, p) in row {
                    acc += p * power[z as usize];
                }
                next[y] = acc;
            }
            power = next;
        }
    }
    let averaged: Vec<f64> = sum.iter().map(|s| s / horizon as f64).collect();
    let residual_of_limit = if tail_oscillation < osc_tol {
        let mut worst = 0.0f64;
        for (y, row) in rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let mut acc = 0.0;
            for &(z, p) in row {
                acc += p * averaged[z as usize];
            }
            worst = worst.max((averaged[y] - acc).abs());
        }
        Some(worst)
    } else {
        None
    };
    CesaroResult {
        averaged,
        tail_oscillation,
        residual_of_limit,
    }
}

/// A finite group given by its composition table; element 0 is the identity.
#[derive(Debug, Clone)]
pub struct MulTable {
    pub mul: Vec<Vec<usize>>,
}

impl MulTable {
    pub fn order(&self) -> usize {
        self.mul.len()
    }
}

/// An enumerated orbit for the isotropy average: every point of `X` is
/// written `gamma . r` for a representative `r`; isotropy subgroups are
/// listed per representative as element indices into the group.
#[derive(Debug, Clone)]
pub struct IsotropyOrbit {
    /// X points as (gamma index, representative index)
    pub points: Vec<(usize, usize)>,
    /// per representative: the isotropy subgroup (must contain 0 and be
    /// closed under composition)
    pub isotropy: Vec<Vec<usize>>,
}

/// The averaging operator `E(f)(gamma r) = (1/|G_r|) sum_{s in G_r}
/// f(gamma s)`. For free actions (all isotropy trivial) no composition
/// table is needed and `E(f)(gamma r) = f(gamma)`.
pub fn isotropy_average(
    orbit: &IsotropyOrbit,
    table: Option<&MulTable>,
    f: &[f64],
) -> Result<Vec<f64>, WalkError> {
    // validate isotropy groups
    for (r, iso) in orbit.isotropy.iter().enumerate() {
        if !iso.contains(&0) {
            return Err(WalkError::BadIsotropy(format!(
                "isotropy of representative {r} does not contain the identity"
            )));
        }
        if iso.len() > 1 {
            let table = table.ok_or_else(|| {
                WalkError::BadIsotropy("nontrivial isotropy requires a composition table".into())
            })?;
            for &a in iso {
                for &b in iso {
                    let ab = table.mul[a][b];
                    if !iso.contains(&ab) {
                        return Err(WalkError::BadIsotropy(format!(
                            "isotropy of representative {r} is not closed: {a} * {b} = {ab}"
                        )));
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(orbit.points.len());
    for &(gamma, r) in &orbit.points {
        let iso = &orbit.isotropy[r];
        if iso.len() == 1 {
            out.push(f[gamma]);
        } else {
            let table = table.unwrap();
            let mut acc = 0.0;
            for &s in iso {
                acc += f[table.mul[gamma][s]];
            }
            out.push(acc / iso.len() as f64);
        }
    }
    Ok(out)
}
