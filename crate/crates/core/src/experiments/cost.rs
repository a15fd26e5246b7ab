//! Closed-form operation counts for cross-entropy search and successive
//! refinement.
//!
//! CE costs `I * N * S * K^2`. Successive refinement costs
//! `I_iter * 2^Q * (K^3 + K^2 M + K M N)` with `I_iter = 10 N` iterations.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel {
    pub iterations: usize,
    pub candidates: usize,
    pub users: usize,
    pub bs_antennas: usize,
}

impl CostModel {
    pub fn ce_cost(&self, irs_elements: usize) -> f64 {
        let k = self.users as f64;
        self.iterations as f64 * irs_elements as f64 * self.candidates as f64 * k * k
    }

    /// Refinement iterations needed at `irs_elements` elements.
    pub fn sr_iterations(irs_elements: usize) -> f64 {
        10.0 * irs_elements as f64
    }

    pub fn sr_cost(&self, irs_elements: usize, bits: u32) -> f64 {
        let (k, m, n) = (self.users as f64, self.bs_antennas as f64, irs_elements as f64);
        Self::sr_iterations(irs_elements) * 2f64.powi(bits as i32) * (k * k * k + k * k * m + k * m * n)
    }

    /// Smallest `N` such that `ce_cost(N') < sr_cost(N', bits)` for every
    /// `N' >= N`.
    ///
    /// `sr_cost - ce_cost = N (c N + d)` with `c = 10 2^Q K M > 0`, so the
    /// sign changes at most once, at `N = -d / c`.
    pub fn crossover(&self, bits: u32) -> usize {
        let (k, m) = (self.users as f64, self.bs_antennas as f64);
        let scale = 10.0 * 2f64.powi(bits as i32);
        let c = scale * k * m;
        let d = scale * (k * k * k + k * k * m) - self.iterations as f64 * self.candidates as f64 * k * k;
        let mut n = if d >= 0.0 { 1 } else { ((-d / c).floor() as usize).max(1) };
        // Step over the root exactly with the same arithmetic as the costs.
        while n > 1 && self.ce_cost(n - 1) < self.sr_cost(n - 1, bits) {
            n -= 1;
        }
        while self.ce_cost(n) >= self.sr_cost(n, bits) {
            n += 1;
        }
        n
    }
}
