//! Deterministic sample sets in coordinate boxes.

use serde::{Deserialize, Serialize};

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> SampleBox {
        SampleBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

pub const DEFAULT_SAMPLES: usize = 50;

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points mapped into `bx`, skipping the origin of the sequence.
pub fn halton(bx: &SampleBox, count: usize) -> Vec<Vec<f64>> {
    assert!(bx.dim() <= PRIMES.len(), "halton: dimension too large");
    (1..=count as u64)
        .map(|i| {
            (0..bx.dim())
                .map(|d| bx.lo[d] + (bx.hi[d] - bx.lo[d]) * radical_inverse(i + 7, PRIMES[d]))
                .collect()
        })
        .collect()
}

/// Max absolute entry; 0 for an empty slice.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_stay_in_box_and_are_distinct() {
        let b = SampleBox { lo: vec![-1.0, 2.0, 0.0], hi: vec![1.0, 3.0, 0.5] };
        let pts = halton(&b, 50);
        assert_eq!(pts.len(), 50);
        for p in &pts {
            for d in 0..3 {
                assert!(p[d] >= b.lo[d] && p[d] <= b.hi[d]);
            }
        }
        for i in 0..pts.len() {
            for j in 0..i {
                assert_ne!(pts[i], pts[j]);
            }
        }
    }
}

/// Absolute-plus-relative acceptance threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Tolerance {
        Tolerance { abs, rel }
    }

    pub const fn absolute(abs: f64) -> Tolerance {
        Tolerance { abs, rel: 0.0 }
    }

    /// `residual <= abs + rel * scale`.
    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual.is_finite() && residual <= self.abs + self.rel * scale.abs()
    }
}

impl Default for Tolerance {
    fn default() -> Tolerance {
        Tolerance::new(1e-8, 1e-8)
    }
}
