//! Named suites: the catalogued bundles of checks the CLI runs and the
//! acceptance gate exercises.

use lsd_core::model::WalkModel;

use crate::report::CheckReport;
use crate::{calibration, ls_checks, walk_checks, Ctx, VerifyError};

pub const SUITES: &[(&str, &str)] = &[
    (
        "discrete-section6",
        "exact solves: hitting recursion, mu-symmetry, g = G, extend/restrict, equivariance",
    ),
    ("sweeping", "balayage reproduces bounded harmonic functions; superharmonic direction"),
    ("lsm-properties", "LS-measure properties (1)-(5) on the d=1 cover"),
    ("ls-cross-validation", "recursive LS-measure vs X_{N_1} marginal (TV and chi-square)"),
    ("residual-decay", "per-round residual below (1 - 1/C^2)^n + 4SE (d=1, d=2)"),
    ("harmonicity-transfer", "mu_y(h) = h(y) for swept h; strict inequality otherwise"),
    ("green-ratio", "balanced data: G = BC g on d=3, plus the balayage route"),
    ("projection-law", "cover marginals project to base marginals (KS + energy)"),
    ("markov", "discretized chain is time-homogeneous Markov; counterexample rejected"),
    ("equivariance", "bit-for-bit deck equivariance of LS-measures under stream replay"),
    ("exit-oracle", "d=2 exit histogram vs the analytic Poisson kernel"),
    ("tail-agreement", "bounded-harmonic limits along paths vs X-subsequences (tree)"),
    ("harnack-sandwich", "Martin-kernel sandwich K(., x_n) <= eps^-2 K(., y_n)"),
    ("calibration", "false-positive rates of all statistical tests over 100 null seeds"),
];

pub const MODELS: &[&str] = &[
    "torus-cover-d1",
    "torus-cover-d2",
    "torus-cover-d3",
    "zd-lattice",
    "free-group-tree",
    "sublattice-orbit",
    "biased-z",
];

pub const CHECKS: &[&str] = &[
    "check_sweeping",
    "check_lsm_properties",
    "check_harmonicity_transfer",
    "check_green_ratio",
    "check_markov",
    "check_tail_agreement",
    "check_harnack_sandwich",
    "stat_tests",
];

/// Runs a named suite with its standard model matrix. Sample sizes scale
/// with `ctx.n_paths`; the acceptance gate pins the spec sizes.
pub fn run_suite(name: &str, ctx: &Ctx) -> Result<Vec<CheckReport>, VerifyError> {
    match name {
        "discrete-section6" => {
            let mut reports = Vec::new();
            reports.extend(walk_checks::check_section6_model(
                ctx,
                &WalkModel::lattice_zd(1, 2),
                30,
                8,
            )?);
            reports.extend(walk_checks::check_section6_model(
                ctx,
                &WalkModel::lattice_zd(1, 3),
                24,
                8,
            )?);
            reports.extend(walk_checks::check_section6_model(
                ctx,
                &WalkModel::lattice_zd(2, 2),
                12,
                6,
            )?);
            reports.extend(walk_checks::check_section6_model(
                ctx,
                &WalkModel::lattice_zd(3, 1),
                10,
                3,
            )?);
            reports.extend(walk_checks::check_section6_model(
                ctx,
                &WalkModel::free_group_tree(2),
                10,
                3,
            )?);
            Ok(reports)
        }
        "sweeping" => {
            let mut reports = walk_checks::check_sweeping_discrete(ctx)?;
            reports.extend(ls_checks::check_sweeping(ctx)?);
            Ok(reports)
        }
        "lsm-properties" => ls_checks::check_lsm_properties(ctx, 1),
        "ls-cross-validation" => ls_checks::check_cross_validation(ctx, ctx.n_paths),
        "residual-decay" => {
            let mut reports = ls_checks::check_residual_decay(ctx, 1)?;
            reports.extend(ls_checks::check_residual_decay(ctx, 2)?);
            Ok(reports)
        }
        "harmonicity-transfer" => {
            let mut reports = ls_checks::check_harmonicity_transfer(ctx)?;
            // the tree exact-equality branch rides on the discrete sweep
            reports.extend(walk_checks::check_sweeping_discrete(ctx)?);
            Ok(reports)
        }
        "green-ratio" => {
            let pairs: Vec<([f64; 3], [i64; 3])> = vec![
                ([0.5, 0.5, 0.5], [0, 0, 0]),
                ([0.5, 0.5, 0.5], [1, 0, 0]),
                ([0.5, 0.5, 0.5], [1, 1, 0]),
                ([0.5, 0.5, 0.5], [1, 1, 1]),
                ([0.5, 0.5, 0.5], [2, 0, 0]),
            ];
            let mut reports = ls_checks::check_green_ratio(ctx, 3, ctx.n_paths, &pairs)?;
            reports.extend(ls_checks::check_balayage_green(ctx, ctx.n_paths / 2)?);
            Ok(reports)
        }
        "green-ratio-d2" => {
            // deliberate gate exerciser
            ls_checks::check_green_ratio(ctx, 2, ctx.n_paths, &[])
        }
        "projection-law" => {
            let mut reports =
                ls_checks::check_projection_law(ctx, false, 0.5, ctx.n_paths.min(10_000))?;
            reports.extend(ls_checks::check_projection_law(
                ctx,
                true,
                0.5,
                ctx.n_paths.min(10_000),
            )?);
            Ok(reports)
        }
        "markov" => ls_checks::check_markov(ctx, ctx.n_paths),
        "equivariance" => ls_checks::check_equivariance(ctx),
        "exit-oracle" => ls_checks::check_exit_oracle(ctx, ctx.n_paths, 64),
        "tail-agreement" => walk_checks::check_tail_agreement(
            ctx,
            &WalkModel::free_group_tree(2),
            ctx.n_paths.min(10_000),
            200,
        ),
        "tail-agreement-z2" => {
            // deliberate gate exerciser
            walk_checks::check_tail_agreement(ctx, &WalkModel::lattice_zd(2, 1), 100, 10)
        }
        "harnack-sandwich" => {
            let mut reports =
                walk_checks::check_harnack_sandwich(ctx, &WalkModel::lattice_zd(3, 2), 12, 20)?;
            reports.extend(walk_checks::check_harnack_sandwich(
                ctx,
                &WalkModel::free_group_tree(2),
                9,
                20,
            )?);
            Ok(reports)
        }
        "calibration" => Ok(calibration::calibrate_all(ctx)),
        other => Err(VerifyError::Precondition(format!(
            "unknown suite `{other}`; see `list suites`"
        ))),
    }
}
