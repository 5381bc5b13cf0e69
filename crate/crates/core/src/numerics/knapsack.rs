//! 0/1 knapsack with real-valued sizes, solved exactly by branch and bound.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem<T> {
    pub id: usize,
    pub value: T,
    pub size: T,
}

impl<T: Real> KnapsackItem<T> {
    pub fn new(id: usize, value: T, size: T) -> Self {
        Self { id, value, size }
    }
}

/// Maximizes total value subject to `sum(size) <= capacity`.
///
/// Items are explored in decreasing value density (ties broken by ascending
/// id) with the Dantzig fractional bound. When every value is integral the
/// bound is floored, which keeps unit-value (cardinality) instances cheap.
/// Among solutions of equal value the first one reached in that order is
/// kept, so the result is deterministic. Returns the selected ids in
/// ascending order.
pub fn solve_knapsack<T: Real>(items: &[KnapsackItem<T>], capacity: T) -> Vec<usize> {
    let capacity = capacity.max(T::zero());
    let mut chosen: Vec<usize> = Vec::new();
    let mut candidates: Vec<KnapsackItem<T>> = Vec::with_capacity(items.len());
    for it in items {
        debug_assert!(it.size >= T::zero() && it.value >= T::zero());
        if it.size <= T::zero() {
            chosen.push(it.id);
        } else if it.size <= capacity {
            candidates.push(*it);
        }
    }
    candidates.sort_by(|a, b| {
        let da = a.value / a.size;
        let db = b.value / b.size;
        db.partial_cmp(&da)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
    let integral = candidates.iter().all(|it| it.value.fract() == T::zero());

    let mut search = Search {
        items: &candidates,
        integral,
        best_value: T::zero(),
        best: Vec::new(),
        current: Vec::with_capacity(candidates.len()),
    };
    // Greedy-by-density incumbent: the search can only improve on it.
    let mut room = capacity;
    for (i, it) in candidates.iter().enumerate() {
        if it.size <= room {
            room -= it.size;
            search.best_value += it.value;
            search.best.push(i);
        }
    }
    search.branch(0, capacity, T::zero());

    chosen.extend(search.best.iter().map(|&i| candidates[i].id));
    chosen.sort_unstable();
    chosen
}

struct Search<'a, T> {
    items: &'a [KnapsackItem<T>],
    integral: bool,
    best_value: T,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl<T: Real> Search<'_, T> {
    fn bound(&self, from: usize, mut room: T, value: T) -> T {
        let mut bound = value;
        for it in &self.items[from..] {
            if it.size <= room {
                room -= it.size;
                bound += it.value;
            } else {
                bound += it.value * room / it.size;
                break;
            }
        }
        if self.integral {
            // guard against the floor dropping an exact integer by rounding
            (bound + T::lit(1e-9)).floor()
        } else {
            bound
        }
    }

    fn branch(&mut self, idx: usize, room: T, value: T) {
        if idx == self.items.len() {
            if value > self.best_value + self.eps() {
                self.best_value = value;
                self.best = self.current.clone();
            }
            return;
        }
        if self.bound(idx, room, value) <= self.best_value + self.eps() {
            return;
        }
        let it = self.items[idx];
        if it.size <= room {
            self.current.push(idx);
            self.branch(idx + 1, room - it.size, value + it.value);
            self.current.pop();
        }
        self.branch(idx + 1, room, value);
    }

    fn eps(&self) -> T {
        T::epsilon() * T::lit(64.0) * self.best_value.abs().max(T::one())
    }
}
