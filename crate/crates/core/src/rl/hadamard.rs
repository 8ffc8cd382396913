use alloc::vec::Vec;

/// Deterministic `+-1` perturbations from a normalised Sylvester–Hadamard
/// matrix of order `2^ceil(log2(dim + 1))`.
///
/// Rows of the matrix restricted to columns `1..=dim` are emitted
/// cyclically. Over one period every coordinate sums to zero and distinct
/// coordinates are orthogonal, so one-measurement gradient estimates are
/// unbiased to first order after each full cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSequence {
    dim: usize,
    order: usize,
    rows: Vec<Vec<f64>>,
}

impl PerturbationSequence {
    pub fn new(dim: usize) -> Self {
        let order = (dim + 1).next_power_of_two();
        let rows = (0..order)
            .map(|r| (1..=dim).map(|c| sylvester_entry(r, c)).collect())
            .collect();
        Self { dim, order, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Period of the sequence.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `Delta_n`. Since entries are `+-1`, it is its own componentwise inverse.
    pub fn at(&self, n: u64) -> &[f64] {
        &self.rows[(n % self.order as u64) as usize]
    }
}

fn sylvester_entry(row: usize, col: usize) -> f64 {
    if (row & col).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn hadamard_perturbation(n: u64, dim: usize) -> Vec<f64> {
    PerturbationSequence::new(dim).at(n).to_vec()
}
