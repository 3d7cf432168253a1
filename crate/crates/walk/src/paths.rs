//! Monte Carlo sampling of the walk on its full (un-truncated) coordinate
//! space, and X-subsequences of sampled paths.

use lsd_core::model::WalkModel;
use lsd_core::rng::StreamRng;
use lsd_core::site::Site;
use rand::Rng;

/// Samples one step of the walk at `s`.
pub fn sample_step(model: &WalkModel, s: &Site, rng: &mut StreamRng) -> Site {
    let dist = model.step_distribution(s);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (site, p) in &dist {
        acc += p;
        if u < acc {
            return site.clone();
        }
    }
    dist.last().expect("nonempty step distribution").0.clone()
}

/// A path of `steps + 1` sites starting at `start`.
pub fn sample_path(
    model: &WalkModel,
    start: &Site,
    steps: usize,
    rng: &mut StreamRng,
) -> Vec<Site> {
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start.clone());
    let mut cur = start.clone();
    for _ in 0..steps {
        cur = sample_step(model, &cur, rng);
        path.push(cur.clone());
    }
    path
}

/// The X-subsequence of a path: its starting member followed by the members
/// lying in `X`, order preserved. The flag is raised when no X-visit occurs
/// in the final quarter of the recorded horizon (the horizon may have cut
/// the tail).
pub fn x_subsequence<T: Clone>(path: &[T], mut in_x: impl FnMut(&T) -> bool) -> (Vec<T>, bool) {
    let mut out = Vec::new();
    let mut last_visit = 0usize;
    for (i, s) in path.iter().enumerate() {
        if i == 0 {
            out.push(s.clone());
            continue;
        }
        if in_x(s) {
            out.push(s.clone());
            last_visit = i;
        }
    }
    let tail_flag = !path.is_empty() && last_visit + path.len() / 4 < path.len() - 1;
    (out, tail_flag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsd_core::rng::RngLineage;

    #[test]
    fn x_subsequence_filters_and_keeps_start() {
        let path = vec![1, 2, 4, 3, 6, 8];
        let (sub, flag) = x_subsequence(&path, |v| v % 2 == 0);
        assert_eq!(sub, vec![1, 2, 4, 6, 8]);
        assert!(!flag);
    }

    #[test]
    fn x_subsequence_all_in_x() {
        let path = vec![2, 4, 6];
        let (sub, _) = x_subsequence(&path, |v| v % 2 == 0);
        assert_eq!(sub, path);
    }

    #[test]
    fn x_subsequence_flags_cut_tail() {
        let path = vec![2, 1, 1, 1, 1, 1, 1, 1];
        let (sub, flag) = x_subsequence(&path, |v| v % 2 == 0);
        assert_eq!(sub, vec![2]);
        assert!(flag);
    }

    #[test]
    fn paths_replay_and_steps_are_adjacent() {
        let model = WalkModel::lattice_zd(2, 1);
        let lineage = RngLineage::new(1);
        let p1 = sample_path(&model, &model.origin(), 64, &mut lineage.stream(3));
        let p2 = sample_path(&model, &model.origin(), 64, &mut lineage.stream(3));
        assert_eq!(p1, p2);
        for w in p1.windows(2) {
            assert_eq!(model.graph_distance(&w[0], &w[1]), 1);
        }
    }

    /// Left translation commutes with sampling when the stream is replayed:
    /// the walk is sampled through generator choices, so the translated
    /// start yields the translated path bit-for-bit.
    #[test]
    fn equivariance_under_stream_replay() {
        let model = WalkModel::free_group_tree(2);
        let lineage = RngLineage::new(9);
        let gamma = lsd_core::group::GroupElem::parse("a b", None).unwrap();
        let start = model.origin();
        let translated = gamma.act(&start).unwrap();
        let p1 = sample_path(&model, &start, 40, &mut lineage.stream(0));
        let p2 = sample_path(&model, &translated, 40, &mut lineage.stream(0));
        for (a, b) in p1.iter().zip(&p2) {
            assert_eq!(gamma.act(a).unwrap(), *b);
        }
    }
}
