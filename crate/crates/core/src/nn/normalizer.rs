//! Running per-feature mean/std normalization with clipping.

use serde::{Deserialize, Serialize};

const STD_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    pub clip: f64,
}

impl Normalizer {
    pub fn new(len: usize, clip: f64) -> Self {
        Self {
            count: 0,
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            clip,
        }
    }

    pub fn len(&self) -> usize {
        self.sum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sum.is_empty()
    }

    pub fn update(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.len());
        for ((s, q), v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(x) {
            *s += v;
            *q += v * v;
        }
        self.count += 1;
    }

    pub fn mean(&self, i: usize) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum[i] / self.count as f64
        }
    }

    pub fn std(&self, i: usize) -> f64 {
        if self.count == 0 {
            return 1.0;
        }
        let m = self.mean(i);
        let var = (self.sum_sq[i] / self.count as f64 - m * m).max(0.0);
        var.sqrt().max(STD_FLOOR)
    }

    /// `clip((x − mean)/std)`, identity before any update.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        if self.count == 0 {
            return x.to_vec();
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| ((v - self.mean(i)) / self.std(i)).clamp(-self.clip, self.clip))
            .collect()
    }

    pub fn normalize_in_place(&self, x: &mut [f64]) {
        if self.count == 0 {
            return;
        }
        for (i, v) in x.iter_mut().enumerate() {
            *v = ((*v - self.mean(i)) / self.std(i)).clamp(-self.clip, self.clip);
        }
    }
}
