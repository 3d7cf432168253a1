//! Exact (linear-solve) theorem checks for the discrete engine: the
//! section-6 exactness suite, the discrete sweeping equality, tail
//! agreement along X-subsequences, and the Harnack sandwich for Martin
//! kernels.

use lsd_core::model::{Family, WalkModel};
use lsd_core::rng::RngLineage;
use lsd_core::site::{Site, LETTER_A};
use lsd_core::space::StateId;
use lsd_walk::green::{green_column, green_mu_column};
use lsd_walk::harmonic::{extend_harmonic, harmonic_residual_mu, harmonic_residual_nu, WindowFn};
use lsd_walk::hitting::HittingFamily;
use lsd_walk::kernel::kernel_power;
use lsd_walk::paths::{sample_path, x_subsequence};
use lsd_walk::tree;
use lsd_walk::Truncated;

use crate::report::CheckReport;
use crate::{Ctx, VerifyError};

/// The section-6 exactness suite on one model: recursion-identity residual,
/// mu-symmetry on interior orbit pairs, g = G at selected targets, and the
/// extend-then-restrict identity.
pub fn check_section6_model(
    ctx: &Ctx,
    model: &WalkModel,
    radius: u32,
    g_targets: usize,
) -> Result<Vec<CheckReport>, VerifyError> {
    let tr = Truncated::at_origin(model, radius);
    let fam = HittingFamily::full(&tr).map_err(VerifyError::Walk)?;
    let id = format!("{}-r{radius}", model.model_id());
    let mut reports = Vec::new();

    reports.push(CheckReport::from_statistic(
        "section6/recursion-residual",
        &id,
        fam.residual,
        1e-10,
        0.0,
        ctx.seed,
        tr.n() as u64,
        "mu_y(x) = nu_y(x) + sum_z nu_y(z) mu_z(x), every window state",
    ));

    // mu symmetric on interior orbit pairs for symmetric nu
    if model.symmetric {
        let mut worst = 0.0f64;
        for x in tr.orbit_ids().filter(|&x| !tr.is_boundary(x)) {
            for (y, w) in fam.row(x).iter() {
                if !tr.is_boundary(y) && tr.in_orbit(y) {
                    worst = worst.max((w - fam.row(y).weight(x)).abs());
                }
            }
        }
        reports.push(CheckReport::from_statistic(
            "section6/mu-symmetry",
            &id,
            worst,
            1e-10,
            0.0,
            ctx.seed,
            tr.n() as u64,
            "mu_x(y) = mu_y(x) over interior orbit pairs",
        ));
    }

    // g = G on the same killed chain at selected interior targets
    {
        let targets: Vec<StateId> = tr
            .orbit_ids()
            .filter(|&x| !tr.is_boundary(x))
            .take(g_targets)
            .collect();
        let mut worst = 0.0f64;
        for &x in &targets {
            let g_nu = green_column(&tr, x).map_err(VerifyError::Walk)?;
            let g_mu = green_mu_column(&tr, &fam, x).map_err(VerifyError::Walk)?;
            for y in tr.window.ids() {
                worst = worst.max((g_nu[y.0 as usize] - g_mu[y.0 as usize]).abs());
            }
        }
        reports.push(CheckReport::from_statistic(
            "section6/g-equals-G",
            &id,
            worst,
            1e-9,
            0.0,
            ctx.seed,
            targets.len() as u64,
            format!("orbit-chain vs nu-chain Green at {} targets", targets.len()),
        ));
    }

    // extend-then-restrict identity on a mu-harmonic function: the
    // absorption probability of a marked boundary set is exactly harmonic
    // for the truncated family
    {
        let h_full = boundary_absorption(&tr)?;
        let h_orbit = WindowFn::on_orbit(&tr, |x| h_full.get(x).unwrap());
        let mu_res = harmonic_residual_mu(&tr, &fam, &h_full).map_err(VerifyError::Walk)?;
        let ext = extend_harmonic(&tr, &fam, &h_orbit, false).map_err(VerifyError::Walk)?;
        let mut worst = 0.0f64;
        for y in tr.window.ids() {
            worst = worst.max((ext.get(y).unwrap() - h_full.get(y).unwrap()).abs());
        }
        reports.push(CheckReport::from_statistic(
            "section6/extend-restrict",
            &id,
            worst.max(mu_res),
            1e-9,
            0.0,
            ctx.seed,
            tr.n() as u64,
            format!("extension matches the direct Y-solve (mu-residual {mu_res:.2e})"),
        ));
        let nu_res = harmonic_residual_nu(&tr, &ext).map_err(VerifyError::Walk)?;
        reports.push(CheckReport::from_statistic(
            "section6/extension-harmonic",
            &id,
            nu_res,
            1e-9,
            0.0,
            ctx.seed,
            tr.n() as u64,
            "nu-harmonicity of the extension on the interior",
        ));
    }

    // Gamma-equivariance of hitting measures under window translation
    {
        let gamma = model.deck_generators().into_iter().next().unwrap();
        let center2 = gamma.act(&model.origin()).map_err(VerifyError::Core)?;
        let small_r = radius.min(8);
        let tr_a = Truncated::at_origin(model, small_r);
        let tr_b = Truncated::new(model, &center2, small_r);
        let fam_a = HittingFamily::full(&tr_a).map_err(VerifyError::Walk)?;
        let fam_b = HittingFamily::full(&tr_b).map_err(VerifyError::Walk)?;
        let mut worst = 0.0f64;
        for y in tr_a.window.ids().filter(|&y| !tr_a.is_boundary(y)) {
            let gy = tr_b
                .window
                .id_of(&gamma.act(tr_a.window.site(y)).map_err(VerifyError::Core)?)
                .expect("translated window contains the translate");
            for (x, w) in fam_a.row(y).iter() {
                let gx = tr_b
                    .window
                    .id_of(&gamma.act(tr_a.window.site(x)).map_err(VerifyError::Core)?)
                    .expect("translated window contains the translate");
                worst = worst.max((w - fam_b.row(gy).weight(gx)).abs());
            }
        }
        reports.push(CheckReport::from_statistic(
            "section6/hitting-equivariance",
            &id,
            worst,
            1e-10,
            0.0,
            ctx.seed,
            tr_a.n() as u64,
            "mu_{gamma y}(gamma x) = mu_y(x) on the translated window",
        ));
    }

    Ok(reports)
}

/// Absorption probability of a marked boundary subset lying inside the
/// orbit, computed by one Dirichlet solve; exactly mu-harmonic for the
/// truncated family.
fn boundary_absorption(tr: &Truncated) -> Result<WindowFn, VerifyError> {
    // mark: boundary orbit states in the "first coordinate positive" half /
    // a-branch for trees
    let marked: Vec<bool> = tr
        .window
        .ids()
        .map(|y| {
            tr.is_boundary(y)
                && tr.in_orbit(y)
                && match tr.window.site(y) {
                    Site::Lattice(c) => c[0] > 0,
                    Site::Word(w) => w.first() == Some(&LETTER_A),
                }
        })
        .collect();
    let n = tr.n();
    let active: Vec<bool> = (0..n as u32)
        .map(|y| !tr.is_boundary(StateId(y)))
        .collect();
    let b: Vec<f64> = (0..n as u32)
        .map(|y| {
            if !active[y as usize] {
                return 0.0;
            }
            tr.row(StateId(y))
                .iter()
                .filter(|&&(z, _)| marked[z as usize])
                .map(|&(_, p)| p)
                .sum()
        })
        .collect();
    let sol = lsd_walk::solve::solve_fixed_point(
        tr.rows(),
        &active,
        &b,
        tr.model.symmetric,
        lsd_walk::solve::RESIDUAL_TARGET,
    )
    .map_err(|e| VerifyError::Walk(lsd_walk::WalkError::Solve(e)))?;
    let mut h = WindowFn::undefined(n);
    for y in 0..n as u32 {
        let yid = StateId(y);
        if active[y as usize] {
            h.set(yid, sol.u[y as usize]);
        } else {
            h.set(yid, if marked[y as usize] { 1.0 } else { 0.0 });
        }
    }
    Ok(h)
}

/// Discrete sweeping equality: on the tree, the branch-hitting function is
/// bounded harmonic, and its balayage onto the orbit (the hitting measure)
/// reproduces it exactly.
pub fn check_sweeping_discrete(ctx: &Ctx) -> Result<Vec<CheckReport>, VerifyError> {
    let model = WalkModel::free_group_tree(2);
    let radius = 8u32;
    let tr = Truncated::at_origin(&model, radius);
    let fam = HittingFamily::full(&tr).map_err(VerifyError::Walk)?;
    let h = tree::branch_absorption_solve(&tr, LETTER_A).map_err(VerifyError::Walk)?;
    // with an even radius every boundary word has even length and is an
    // orbit word, so the hitting family leaks nothing and the balayage
    // identity is exact
    let mut worst = 0.0f64;
    for y in tr.interior_ids() {
        let beta_h = fam.integrate_row(y, h.values());
        worst = worst.max((h.get(y).unwrap() - beta_h).abs());
    }
    Ok(vec![CheckReport::from_statistic(
        "sweeping/discrete-tree-equality",
        format!("{}-r{radius}", model.model_id()),
        worst,
        1e-8,
        0.0,
        ctx.seed,
        tr.n() as u64,
        "h(y) = beta(y, X)(h) for the branch-hitting function",
    )])
}

/// Tail agreement: the limit of a bounded harmonic function along the path
/// agrees with its limit along the X-subsequence. Gated to the tree model
/// (the recurrent lattice has no nonconstant bounded harmonic functions).
pub fn check_tail_agreement(
    ctx: &Ctx,
    model: &WalkModel,
    n_paths: u64,
    horizon: usize,
) -> Result<Vec<CheckReport>, VerifyError> {
    match model.family {
        Family::FreeGroupTree { .. } => {}
        _ => {
            return Err(VerifyError::Precondition(format!(
                "tail-agreement needs a transient model with known bounded harmonic functions \
                 (free-group-tree); `{}` is recurrent so its bounded harmonic functions are constant",
                model.model_id()
            )))
        }
    }
    let lineage = RngLineage::new(ctx.seed).child("tail");
    let tolerance = 0.05f64;
    let agree: u64 = (0..n_paths)
        .map(|pid| {
            let mut rng = lineage.stream(pid);
            let path = sample_path(model, &model.origin(), horizon, &mut rng);
            let h_full = tree::branch_hitting_infinite(path.last().unwrap(), LETTER_A);
            let (sub, _) = x_subsequence(&path, |s| model.in_orbit(s));
            let h_sub = tree::branch_hitting_infinite(sub.last().unwrap(), LETTER_A);
            u64::from((h_full - h_sub).abs() <= tolerance)
        })
        .sum();
    let frac_disagree = 1.0 - agree as f64 / n_paths as f64;
    Ok(vec![CheckReport::from_statistic(
        "tail-agreement/tree",
        model.model_id(),
        frac_disagree,
        0.01,
        0.0,
        ctx.seed,
        n_paths,
        format!(
            "branch-hitting limits along path vs X-subsequence at horizon {horizon}; \
             disagreement fraction {frac_disagree:.4}"
        ),
    )])
}

/// Harnack sandwich for Martin kernels on a cofinite discrete model:
/// diverging states y_n with assigned orbit points x_n satisfy
/// `K(x, x_n) <= eps^-2 K(x, y_n)`, with eps from kernel-power positivity
/// over orbit representatives.
pub fn check_harnack_sandwich(
    ctx: &Ctx,
    model: &WalkModel,
    radius: u32,
    n_sequences: usize,
) -> Result<Vec<CheckReport>, VerifyError> {
    let tr = Truncated::at_origin(model, radius);
    let lineage = RngLineage::new(ctx.seed).child("sandwich");

    // representatives of Gamma \ Y and the positivity constant eps: for
    // each ordered pair some power k <= kmax has nu^k_a(b) > 0 (per-pair k;
    // the walk is bipartite so a single k cannot serve all pairs)
    let reps: Vec<StateId> = representative_states(&tr);
    let kmax = 2 * tr.window.radius().min(6) + 2;
    let mut eps = f64::INFINITY;
    for &a in &reps {
        for &b in &reps {
            let mut best = 0.0f64;
            for k in 1..=kmax {
                let (m, _) = kernel_power(&tr, k, a);
                best = best.max(m.weight(b));
                if best > 0.0 && k >= 2 {
                    break;
                }
            }
            if best <= 0.0 {
                return Err(VerifyError::Precondition(format!(
                    "no positive kernel power between representatives within k <= {kmax}"
                )));
            }
            eps = eps.min(best);
        }
    }
    let bound = 1.0 / (eps * eps);

    // test points and base point
    let x0 = tr.window.id_of(&model.origin()).unwrap();
    let test_xs: Vec<StateId> = tr
        .orbit_ids()
        .filter(|&x| tr.window.dist_from_center(x) <= 2)
        .take(3)
        .collect();
    let cols: Vec<Vec<f64>> = test_xs
        .iter()
        .map(|&x| green_column(&tr, x))
        .collect::<Result<_, _>>()
        .map_err(VerifyError::Walk)?;
    let col0 = green_column(&tr, x0).map_err(VerifyError::Walk)?;

    // diverging sequences: random interior states at growing distance with
    // their assigned nearest orbit points
    let mut rng = lineage.stream(0);
    use rand::Rng;
    let interior: Vec<StateId> = tr
        .interior_ids()
        .filter(|&y| tr.window.dist_from_center(y) >= 2)
        .collect();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut tested = 0u64;
    for _ in 0..n_sequences {
        let y = interior[rng.gen_range(0..interior.len())];
        let x_n = assign_orbit_point(&tr, y);
        for (xi, _x) in test_xs.iter().enumerate() {
            // K(x, x_n) and K(x, y_n) via the symmetry G(x, p) = G(p, x)
            let (kx, ky) = {
                let g_x_xn = cols[xi][x_n.0 as usize];
                let g_x0_xn = col0[x_n.0 as usize];
                let g_x_yn = cols[xi][y.0 as usize];
                let g_x0_yn = col0[y.0 as usize];
                if g_x0_xn < 1e-14 || g_x0_yn < 1e-14 {
                    continue;
                }
                (g_x_xn / g_x0_xn, g_x_yn / g_x0_yn)
            };
            worst_excess = worst_excess.max(kx - bound * ky);
            tested += 1;
        }
    }
    Ok(vec![CheckReport::from_statistic(
        "harnack-sandwich/kernel-ratio",
        format!("{}-r{radius}", model.model_id()),
        worst_excess,
        0.0,
        1e-12,
        ctx.seed,
        tested,
        format!("K(x, x_n) - eps^-2 K(x, y_n) <= 0 with eps = {eps:.4} (bound {bound:.2})"),
    )])
}

fn representative_states(tr: &Truncated) -> Vec<StateId> {
    match tr.model.family {
        Family::LatticeZd { d, stride } => {
            let k = stride as i64;
            let mut reps = Vec::new();
            let mut coords = vec![[0i64; 3]];
            for axis in 0..d {
                let mut next = Vec::new();
                for c in &coords {
                    for r in 0..k {
                        let mut n = *c;
                        n[axis] = r;
                        next.push(n);
                    }
                }
                coords = next;
            }
            for c in coords {
                if let Some(id) = tr.window.id_of(&Site::Lattice(c)) {
                    reps.push(id);
                }
            }
            reps
        }
        Family::FreeGroupTree { stride } => {
            // representatives: a^j for j = 0..stride-1
            (0..stride as usize)
                .filter_map(|j| {
                    let word: Vec<u8> = std::iter::repeat(LETTER_A).take(j).collect();
                    tr.window.id_of(&Site::Word(word))
                })
                .collect()
        }
        Family::BiasedZ { .. } => vec![tr.window.id_of(&tr.model.origin()).unwrap()],
    }
}

/// The *-uniform assignment: a nearby orbit point for every state.
fn assign_orbit_point(tr: &Truncated, y: StateId) -> StateId {
    if tr.in_orbit(y) {
        return y;
    }
    // breadth-first among neighbors; the covering by unit cells makes the
    // nearest orbit point at most a couple of steps away
    let mut frontier = vec![y];
    let mut seen = std::collections::HashSet::new();
    seen.insert(y);
    for _ in 0..4 {
        let mut next = Vec::new();
        for s in &frontier {
            for n in tr.model.neighbors(tr.window.site(*s)) {
                if let Some(id) = tr.window.id_of(&n) {
                    if tr.in_orbit(id) {
                        return id;
                    }
                    if seen.insert(id) {
                        next.push(id);
                    }
                }
            }
        }
        frontier = next;
    }
    y
}

