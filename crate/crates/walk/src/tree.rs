//! Tree-model harmonic functions: the probability of converging into (or,
//! on a truncation, being absorbed in) a fixed branch of the 4-regular tree.
//!
//! The radial part of the simple walk is a birth-death chain moving out with
//! probability 3/4 and in with probability 1/4, whose scale function
//! `S(k) = (3/2)(1 - 3^-k)` gives closed forms for everything here.

use lsd_core::site::{Letter, Site};
use lsd_core::space::StateId;

use crate::harmonic::WindowFn;
use crate::solve::{solve_fixed_point, RESIDUAL_TARGET};
use crate::trunc::Truncated;
use crate::WalkError;

/// Scale function of the radial chain.
fn scale(k: u32) -> f64 {
    1.5 * (1.0 - 3f64.powi(-(k as i32)))
}

/// Whether the word lies in the branch of `letter` (first letter agrees).
pub fn in_branch(s: &Site, letter: Letter) -> bool {
    match s {
        Site::Word(w) => w.first() == Some(&letter),
        _ => false,
    }
}

/// On the infinite tree: the probability that the walk started at `s`
/// converges to an end of the branch of `letter`.
///
/// From depth `n > 0` inside the branch the value is `1 - (3/4) 3^-n`;
/// outside it is `(1/4) 3^-n`; at the root it is `1/4`.
pub fn branch_hitting_infinite(s: &Site, letter: Letter) -> f64 {
    let n = match s {
        Site::Word(w) => w.len() as i32,
        _ => panic!("tree function on a lattice site"),
    };
    if n == 0 {
        0.25
    } else if in_branch(s, letter) {
        1.0 - 0.75 * 3f64.powi(-n)
    } else {
        0.25 * 3f64.powi(-n)
    }
}

/// On the radius-R truncation: the probability that the killed walk is
/// absorbed at a boundary word of the branch of `letter`. Closed form via
/// the scale function; `q_n = 1 - S(n)/S(R)` is the probability of hitting
/// the root before the boundary from depth `n`.
pub fn branch_absorption_truncated(s: &Site, letter: Letter, radius: u32) -> f64 {
    let n = match s {
        Site::Word(w) => w.len() as u32,
        _ => panic!("tree function on a lattice site"),
    };
    if n == 0 {
        return 0.25;
    }
    let q = 1.0 - scale(n) / scale(radius);
    if in_branch(s, letter) {
        (1.0 - q) + q * 0.25
    } else {
        q * 0.25
    }
}

/// The absorption function computed by a linear solve on the window:
/// `h(y) = P_y[absorbed at a boundary word in the branch]`. This is exactly
/// nu-harmonic on the window interior.
pub fn branch_absorption_solve(tr: &Truncated, letter: Letter) -> Result<WindowFn, WalkError> {
    let n = tr.n();
    let active: Vec<bool> = (0..n as u32)
        .map(|y| !tr.is_boundary(StateId(y)))
        .collect();
    let b: Vec<f64> = (0..n as u32)
        .map(|y| {
            let y = StateId(y);
            if !active[y.0 as usize] {
                return 0.0;
            }
            let mut acc = 0.0;
            for &(z, p) in tr.row(y) {
                let z = StateId(z);
                if tr.is_boundary(z) && in_branch(tr.window.site(z), letter) {
                    acc += p;
                }
            }
            acc
        })
        .collect();
    let sol = solve_fixed_point(tr.rows(), &active, &b, tr.model.symmetric, RESIDUAL_TARGET)?;
    let mut h = WindowFn::undefined(n);
    for y in 0..n as u32 {
        let yid = StateId(y);
        if active[y as usize] {
            h.set(yid, sol.u[y as usize]);
        } else {
            h.set(
                yid,
                if in_branch(tr.window.site(yid), letter) {
                    1.0
                } else {
                    0.0
                },
            );
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::harmonic_residual_nu;
    use lsd_core::model::WalkModel;
    use lsd_core::site::LETTER_A;

    #[test]
    fn infinite_formula_sanity() {
        assert!((branch_hitting_infinite(&Site::origin_word(), LETTER_A) - 0.25).abs() < 1e-15);
        let a = Site::Word(vec![LETTER_A]);
        assert!((branch_hitting_infinite(&a, LETTER_A) - 0.75).abs() < 1e-15);
        let b = Site::Word(vec![lsd_core::site::LETTER_B]);
        assert!((branch_hitting_infinite(&b, LETTER_A) - 1.0 / 12.0).abs() < 1e-15);
    }

    /// The solve matches the scale-function closed form at 1e-11 and is
    /// nu-harmonic at solver scale.
    #[test]
    fn solve_matches_closed_form() {
        let model = WalkModel::free_group_tree(2);
        let radius = 8u32;
        let tr = Truncated::at_origin(&model, radius);
        let h = branch_absorption_solve(&tr, LETTER_A).unwrap();
        for y in tr.window.ids() {
            let expect = branch_absorption_truncated(tr.window.site(y), LETTER_A, radius);
            assert!(
                (h.get(y).unwrap() - expect).abs() < 1e-11,
                "at {}",
                tr.window.site(y)
            );
        }
        assert!(harmonic_residual_nu(&tr, &h).unwrap() < 1e-11);
    }

    /// Truncated values converge to the infinite-tree formula.
    #[test]
    fn truncated_approaches_infinite() {
        let a2 = Site::Word(vec![LETTER_A, LETTER_A]);
        let e8 = (branch_absorption_truncated(&a2, LETTER_A, 8)
            - branch_hitting_infinite(&a2, LETTER_A))
        .abs();
        let e12 = (branch_absorption_truncated(&a2, LETTER_A, 12)
            - branch_hitting_infinite(&a2, LETTER_A))
        .abs();
        assert!(e12 < e8);
        assert!(e12 < 1e-4);
    }
}
