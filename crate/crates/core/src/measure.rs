//! Sparse nonnegative measures on enumerated states.
//!
//! The one carrier type for hitting measures, step distributions, balayage
//! and exit estimates, and the LS-measure bookkeeping. Weights live in a
//! `BTreeMap` so every iteration order is deterministic, and totals are
//! always computed with compensated summation so they are order-independent
//! to well below 1e-12.

use std::collections::BTreeMap;

use crate::space::StateId;

/// Weights below this threshold are dropped after arithmetic; they sit below
/// the solver residual target and keeping them only grows supports.
pub const PRUNE_EPS: f64 = 1e-15;

/// Neumaier compensated summation. Order-independent to ~1e-16 relative.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// A finite measure with sparse nonnegative weights on state ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FiniteMeasure {
    weights: BTreeMap<StateId, f64>,
}

impl FiniteMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// The Dirac measure at `s`.
    pub fn dirac(s: StateId) -> Self {
        let mut m = Self::new();
        m.add_mass(s, 1.0);
        m
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (StateId, f64)>) -> Self {
        let mut m = Self::new();
        for (s, w) in pairs {
            m.add_mass(s, w);
        }
        m
    }

    /// Adds `w >= 0` at `s`, pruning results below [`PRUNE_EPS`].
    pub fn add_mass(&mut self, s: StateId, w: f64) {
        debug_assert!(w >= 0.0, "negative mass {w} at {s:?}");
        if w == 0.0 {
            return;
        }
        let entry = self.weights.entry(s).or_insert(0.0);
        *entry += w;
        if *entry < PRUNE_EPS {
            self.weights.remove(&s);
        }
    }

    pub fn weight(&self, s: StateId) -> f64 {
        self.weights.get(&s).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Iterates `(state, weight)` in increasing state-id order.
    pub fn iter(&self) -> impl Iterator<Item = (StateId, f64)> + '_ {
        self.weights.iter().map(|(s, w)| (*s, *w))
    }

    /// Total mass, via compensated summation.
    pub fn total(&self) -> f64 {
        compensated_sum(self.weights.values().copied())
    }

    /// Integrates a function against the measure: `sum_s m(s) f(s)`.
    pub fn integrate(&self, mut f: impl FnMut(StateId) -> f64) -> f64 {
        compensated_sum(self.weights.iter().map(|(s, w)| w * f(*s)))
    }

    /// Scales every weight by `c >= 0`.
    pub fn scale(&mut self, c: f64) {
        debug_assert!(c >= 0.0);
        if c == 0.0 {
            self.weights.clear();
            return;
        }
        self.weights.retain(|_, w| {
            *w *= c;
            *w >= PRUNE_EPS
        });
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale(c);
        self
    }

    /// Adds `c * other` into `self`.
    pub fn add_scaled(&mut self, other: &FiniteMeasure, c: f64) {
        for (s, w) in other.iter() {
            self.add_mass(s, w * c);
        }
    }

    /// Normalizes to total mass one. No-op on the zero measure.
    pub fn normalized(mut self) -> Self {
        let t = self.total();
        if t > 0.0 {
            self.scale(1.0 / t);
        }
        self
    }

    /// Relabels the support through `f`, preserving mass. `f` must be
    /// injective on the support for the result to be a pushforward.
    pub fn map_support(&self, mut f: impl FnMut(StateId) -> StateId) -> Self {
        let mut out = Self::new();
        for (s, w) in self.iter() {
            out.add_mass(f(s), w);
        }
        out
    }
}

impl FromIterator<(StateId, f64)> for FiniteMeasure {
    fn from_iter<T: IntoIterator<Item = (StateId, f64)>>(iter: T) -> Self {
        Self::from_pairs(iter)
    }
}

/// Total-variation distance `1/2 * sum |m1 - m2|` over the union of supports.
pub fn tv_distance(m1: &FiniteMeasure, m2: &FiniteMeasure) -> f64 {
    let mut acc = KahanSum::new();
    for (s, w) in m1.iter() {
        acc.add((w - m2.weight(s)).abs());
    }
    for (s, w) in m2.iter() {
        if m1.weight(s) == 0.0 {
            acc.add(w.abs());
        }
    }
    0.5 * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(n: u32) -> StateId {
        StateId(n)
    }

    #[test]
    fn tv_of_equal_measures_is_zero() {
        let m = FiniteMeasure::from_pairs([(id(0), 0.25), (id(3), 0.75)]);
        assert_eq!(tv_distance(&m, &m), 0.0);
    }

    #[test]
    fn tv_of_disjoint_diracs_is_one() {
        let a = FiniteMeasure::dirac(id(1));
        let b = FiniteMeasure::dirac(id(2));
        assert_eq!(tv_distance(&a, &b), 1.0);
    }

    #[test]
    fn tv_of_dirac_and_half_mix() {
        let a = FiniteMeasure::dirac(id(1));
        let b = FiniteMeasure::from_pairs([(id(1), 0.5), (id(2), 0.5)]);
        assert!((tv_distance(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn prune_drops_dust() {
        let mut m = FiniteMeasure::new();
        m.add_mass(id(0), 1e-16);
        assert!(m.is_empty());
    }

    proptest! {
        /// Summation is order-independent to 1e-12 regardless of insertion order.
        #[test]
        fn total_is_order_independent(mut ws in proptest::collection::vec(0.0f64..1e6, 2..64)) {
            let fwd = FiniteMeasure::from_pairs(ws.iter().enumerate().map(|(i, w)| (id(i as u32), *w)));
            ws.reverse();
            let rev_total = compensated_sum(ws.iter().copied());
            prop_assert!((fwd.total() - rev_total).abs() <= 1e-12 * (1.0 + rev_total.abs()));
        }

        /// TV is symmetric and vanishes only on equal measures.
        #[test]
        fn tv_symmetric(ws in proptest::collection::vec((0u32..16, 0.0f64..1.0), 1..12),
                        vs in proptest::collection::vec((0u32..16, 0.0f64..1.0), 1..12)) {
            let a = FiniteMeasure::from_pairs(ws.iter().map(|(s, w)| (id(*s), *w)));
            let b = FiniteMeasure::from_pairs(vs.iter().map(|(s, w)| (id(*s), *w)));
            let d1 = tv_distance(&a, &b);
            let d2 = tv_distance(&b, &a);
            prop_assert!((d1 - d2).abs() < 1e-14);
            prop_assert!(d1 >= 0.0);
        }
    }
}
