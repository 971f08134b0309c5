//! The `ε` / `d_max` controller shared by all triplet finders.
//!
//! Each step searches at `ε_i = 2^{-i} ε` for `i = 0, 1, ...`, seeding every
//! round with the previous round's selection, and stops at the first
//! `i ≥ 1` whose count of new triplets `k_i` fails to double. Once `ε_i`
//! falls below [`EPS_FLOOR`] the search depth grows by one and `ε` resets.

use crate::model::Relaxation;
use crate::sac::{ProbeWitness, TripletSet};

pub const EPS_FLOOR: f64 = 1e-6;
pub const EPS_RESET: f64 = 0.1;

/// Accumulated output of a finder.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    pub triplets: TripletSet,
    /// Probes behind the selected clusters (SAC only).
    pub witnesses: Vec<ProbeWitness>,
    /// Selected nodes with `ℒ_r = 𝒴_r` (SAC only).
    pub full_coverage: Vec<usize>,
}

impl Selection {
    /// Genuine triplets not yet present in `model`.
    pub fn new_triplets(&self, model: &Relaxation) -> Vec<[usize; 3]> {
        self.triplets
            .genuine()
            .filter(|&t| !model.has_triplet(t))
            .collect()
    }
}

/// A cluster search that extends a seed selection.
pub trait TripletFinder: Sync {
    fn find(&self, model: &Relaxation, eps: f64, d_max: usize, seed: &Selection) -> Selection;

    /// True when a larger `d_max` cannot find anything new.
    fn saturated(&self, model: &Relaxation, d_max: usize) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleState {
    pub eps: f64,
    pub d_max: usize,
    /// `(ε_i, k_i)` of every round run so far.
    pub history: Vec<(f64, usize)>,
}

impl ScheduleState {
    pub fn new(eps: f64, d_max: usize) -> Self {
        ScheduleState {
            eps,
            d_max,
            history: Vec::new(),
        }
    }
}

impl Default for ScheduleState {
    fn default() -> Self {
        ScheduleState::new(EPS_RESET, 3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub selection: Selection,
    /// `ε` of the round whose selection was returned.
    pub eps: f64,
    /// The step ran out of `ε` and raised `d_max`.
    pub deepened: bool,
    pub rounds: usize,
}

pub fn schedule_step(
    state: &mut ScheduleState,
    model: &Relaxation,
    finder: &dyn TripletFinder,
) -> StepOutcome {
    let base = state.eps;
    let mut prev = finder.find(model, base, state.d_max, &Selection::default());
    let mut k_prev = prev.new_triplets(model).len();
    state.history.push((base, k_prev));
    let mut eps_prev = base;
    let mut rounds = 1;
    loop {
        let eps = eps_prev / 2.0;
        if eps < EPS_FLOOR {
            state.d_max += 1;
            state.eps = EPS_RESET;
            return StepOutcome {
                selection: prev,
                eps: eps_prev,
                deepened: true,
                rounds,
            };
        }
        let cur = finder.find(model, eps, state.d_max, &prev);
        rounds += 1;
        let k = cur.new_triplets(model).len();
        state.history.push((eps, k));
        if k < 2 * k_prev {
            state.eps = eps_prev;
            return StepOutcome {
                selection: prev,
                eps: eps_prev,
                deepened: false,
                rounds,
            };
        }
        prev = cur;
        k_prev = k;
        eps_prev = eps;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fc3;
    use crate::sac::SacFinder;
    use std::sync::Mutex;

    /// Returns a scripted number of fresh triplets per round.
    struct Scripted {
        counts: Vec<usize>,
        calls: Mutex<usize>,
    }

    impl TripletFinder for Scripted {
        fn find(&self, _: &Relaxation, _: f64, _: usize, seed: &Selection) -> Selection {
            let mut calls = self.calls.lock().unwrap();
            let k = self.counts.get(*calls).copied().unwrap_or(0);
            *calls += 1;
            let mut out = seed.clone();
            let have = out.triplets.num_genuine();
            for t in have..k.max(have) {
                out.triplets.insert_genuine([3 * t + 100, 3 * t + 101, 3 * t + 102]);
            }
            out
        }

        fn saturated(&self, _: &Relaxation, _: usize) -> bool {
            false
        }
    }

    #[test]
    fn stops_when_growth_stalls() {
        let f = Scripted {
            counts: vec![5, 7],
            calls: Mutex::new(0),
        };
        let mut st = ScheduleState::new(0.1, 3);
        let out = schedule_step(&mut st, &fc3(), &f);
        assert_eq!(out.selection.triplets.num_genuine(), 5);
        assert_eq!(st.eps, 0.1);
        assert_eq!(st.d_max, 3);
        assert_eq!(st.history, vec![(0.1, 5), (0.05, 7)]);
        assert!(!out.deepened);
    }

    #[test]
    fn keeps_halving_while_doubling() {
        let f = Scripted {
            counts: vec![1, 2, 4, 5],
            calls: Mutex::new(0),
        };
        let mut st = ScheduleState::new(0.1, 3);
        let out = schedule_step(&mut st, &fc3(), &f);
        assert_eq!(out.selection.triplets.num_genuine(), 4);
        assert_eq!(st.eps, 0.025);
        assert_eq!(out.rounds, 4);
    }

    #[test]
    fn zero_rounds_deepen() {
        let f = Scripted {
            counts: vec![],
            calls: Mutex::new(0),
        };
        let mut st = ScheduleState::new(0.1, 3);
        let out = schedule_step(&mut st, &fc3(), &f);
        assert!(out.selection.triplets.is_empty());
        assert!(out.deepened);
        assert_eq!((st.d_max, st.eps), (4, 0.1));
        assert!(st.history.last().unwrap().0 >= EPS_FLOOR);
    }

    #[test]
    fn fc3_single_triplet() {
        let mut st = ScheduleState::new(0.1, 3);
        let out = schedule_step(&mut st, &fc3(), &SacFinder);
        assert_eq!(out.selection.new_triplets(&fc3()), vec![[0, 1, 2]]);
        assert_eq!(st.history, vec![(0.1, 1), (0.05, 1)]);
        assert_eq!(st.eps, 0.1);
    }
}
