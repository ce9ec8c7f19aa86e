//! Shared fixtures for the benchmarks.

use maxsym::random::{self, problem_jets, ProblemKind};
use maxsym::symbol_calculus::{coefficient_symbols, MetricJet};
use maxsym::{Metric3, SymbolSet};
use nalgebra::Vector2;

pub struct Fixture {
    pub eps: MetricJet,
    pub mu: MetricJet,
    pub symbols: SymbolSet,
    pub directions: Vec<Vector2<f64>>,
}

impl Fixture {
    pub fn new(seed: u64, kind: ProblemKind) -> Self {
        let (eps, mu) = problem_jets(seed, kind, 2);
        let symbols = coefficient_symbols(&eps, &mu, 1.0).expect("generated jets are valid");
        Self { eps, mu, symbols, directions: random::direction_grid(16) }
    }

    pub fn values(&self) -> (Metric3, Metric3) {
        (self.eps.value, self.mu.value)
    }
}
