//! Per-robot self-healing push-sum estimation of the swarm moment vector.
//!
//! Each robot maintains two signals of length `m + 1` (the real embedding
//! plus a weight slot): `w`, which it broadcasts, and `v`, from which its
//! estimate is read as the ratio of the first `m` components to the last.
//! The update is
//!
//! ```text
//! v_i = u_i - d_i^out * w_i + sum over remembered neighbors of M_ki
//! w_i <- w_i + gamma * v_i
//! ```
//!
//! where `u_i = [phi(s_i); 1]` and `M_ki` is the last message received from
//! in-neighbor `k`, kept for up to `forget_horizon` consecutive silent
//! iterations. On a strongly connected constant digraph with lossless
//! delivery, every `v_i` converges exponentially to `[z_i sum phi; z_i N]`,
//! so the ratio estimate converges to the swarm mean of `phi` regardless of
//! how `w` was initialized; packet drops, state corruption, and robot churn
//! only cause transients.

use std::collections::BTreeMap;

use crate::error::EstimatorError;
use crate::numeric::CompensatedSum;

/// Denominator guard for the ratio estimate. During transients the weight
/// component can pass through zero; callers hold the previous estimate when
/// that happens.
pub const ESTIMATE_EPS: f64 = 1e-9;

/// A broadcast estimator signal. The payload borrows the sender's recorded
/// broadcast; receivers copy it into their memory tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message<'a> {
    pub sender: usize,
    pub payload: &'a [f64],
}

#[derive(Debug, Clone)]
struct MemoryEntry {
    payload: Vec<f64>,
    age: u32,
}

/// Push-sum state owned by one robot.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    w: Vec<f64>,
    v: Vec<f64>,
    memory: BTreeMap<usize, MemoryEntry>,
    gamma: f64,
    forget_horizon: u32,
    scratch: Vec<CompensatedSum>,
}

impl EstimatorState {
    /// Fresh state with `w = 0` and empty memory. `embedding_len` is the
    /// real embedding length `m`; the signals carry `m + 1` entries.
    pub fn new(embedding_len: usize, gamma: f64, forget_horizon: u32) -> Self {
        assert!(gamma > 0.0, "estimator gain must be positive");
        Self {
            w: vec![0.0; embedding_len + 1],
            v: vec![0.0; embedding_len + 1],
            memory: BTreeMap::new(),
            gamma,
            forget_horizon,
            scratch: Vec::new(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dimension(&self) -> usize {
        self.w.len()
    }

    /// The broadcast signal (current `w`).
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Ages of the remembered neighbors, keyed by sender id.
    pub fn memory_ages(&self) -> BTreeMap<usize, u32> {
        self.memory.iter().map(|(&k, e)| (k, e.age)).collect()
    }

    /// Replaces `w` wholesale. The estimator limit is independent of `w`,
    /// so this models transient computation errors in tests and demos.
    pub fn overwrite_w(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.w.len());
        self.w.copy_from_slice(values);
    }

    /// One synchronous estimator step.
    ///
    /// `input` is `[phi(s_i); 1]`, `received` the messages delivered this
    /// iteration, and `d_out` the robot's current out-degree. Memory is
    /// refreshed by receipts, aged otherwise, and entries silent for more
    /// than the forget horizon are dropped before the sum.
    pub fn step(
        &mut self,
        input: &[f64],
        received: &[Message],
        d_out: usize,
    ) -> Result<(), EstimatorError> {
        if input.len() != self.w.len() {
            return Err(EstimatorError::DimensionMismatch {
                got: input.len(),
                expected: self.w.len(),
            });
        }
        if self.gamma * d_out as f64 >= 1.0 {
            return Err(EstimatorError::GainTooLarge { gamma: self.gamma, d_out });
        }

        let horizon = self.forget_horizon;
        for entry in self.memory.values_mut() {
            entry.age += 1;
        }
        self.memory.retain(|_, entry| entry.age <= horizon);
        for msg in received {
            debug_assert_eq!(msg.payload.len(), self.w.len());
            self.memory.insert(
                msg.sender,
                MemoryEntry { payload: msg.payload.clone(), age: 0 },
            );
        }

        // v = u - d_out * w + sum of remembered messages. The broadcast
        // signals grow linearly along the consensus direction while v stays
        // bounded, so the sum is compensated to keep the global conservation
        // identity (sum_i v_i = sum_i u_i under lossless delivery) intact at
        // the 1e-12 level over long runs.
        let d = d_out as f64;
        for (c, v_c) in self.v.iter_mut().enumerate() {
            let mut acc = CompensatedSum::new();
            acc.add(input[c]);
            acc.add_product(-d, self.w[c]);
            for entry in self.memory.values() {
                acc.add(entry.payload[c]);
            }
            *v_c = acc.value();
        }

        for (w_c, v_c) in self.w.iter_mut().zip(&self.v) {
            *w_c += self.gamma * v_c;
        }
        Ok(())
    }

    /// The ratio estimate `v_{1..m} / v_{m+1}`, or `None` while the weight
    /// component is too close to zero to divide by.
    pub fn estimate(&self) -> Option<Vec<f64>> {
        let weight = *self.v.last().unwrap();
        if weight.abs() <= ESTIMATE_EPS {
            return None;
        }
        Some(self.v[..self.v.len() - 1].iter().map(|x| x / weight).collect())
    }
}

/// Builds the estimator input `[phi(s); 1]`.
pub fn estimator_input(phi_value: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(phi_value.len() + 1);
    u.extend_from_slice(phi_value);
    u.push(1.0);
    u
}
