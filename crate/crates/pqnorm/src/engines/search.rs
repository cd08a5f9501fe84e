//! Deterministic search utilities shared by the engines.
//!
//! Every engine draws randomness from ChaCha streams keyed by (seed, stream
//! id), and candidate sequences are budget-prefixed: a larger budget replays
//! the same candidates and then continues, so bounds improve monotonically
//! and replays are byte-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::matrix::{gaussian_vector, C64};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Best-so-far maximizer state with deterministic tie-breaking (first wins).
pub struct Best<T> {
    pub value: f64,
    pub payload: Option<T>,
}

impl<T> Best<T> {
    pub fn new() -> Best<T> {
        Best { value: 0.0, payload: None }
    }

    pub fn offer(&mut self, value: f64, payload: T) -> bool {
        if value.is_finite() && (self.payload.is_none() || value > self.value) {
            self.value = value;
            self.payload = Some(payload);
            true
        } else {
            false
        }
    }
}

/// Best-so-far minimizer state.
pub struct Cheapest<T> {
    pub value: f64,
    pub payload: Option<T>,
}

impl<T> Cheapest<T> {
    pub fn new() -> Cheapest<T> {
        Cheapest { value: f64::INFINITY, payload: None }
    }

    pub fn offer(&mut self, value: f64, payload: T) -> bool {
        if value.is_finite() && value < self.value {
            self.value = value;
            self.payload = Some(payload);
            true
        } else {
            false
        }
    }
}

/// Hill climb over complex vectors: perturb, renormalize through `normalize`,
/// keep improvements.  `eval` is maximized.
pub fn ascent_vector(
    start: Vec<C64>,
    start_value: f64,
    rng: &mut ChaCha20Rng,
    iters: u32,
    mut normalize: impl FnMut(Vec<C64>) -> Option<Vec<C64>>,
    mut eval: impl FnMut(&[C64]) -> f64,
) -> (Vec<C64>, f64) {
    let mut best = start;
    let mut best_val = start_value;
    let n = best.len();
    let mut step = 0.5_f64;
    for it in 0..iters {
        let noise = gaussian_vector(rng, n);
        let cand: Vec<C64> = best.iter().zip(&noise).map(|(b, g)| b + g * step).collect();
        if let Some(cand) = normalize(cand) {
            let val = eval(&cand);
            if val > best_val {
                best = cand;
                best_val = val;
            } else {
                step *= 0.96;
            }
        }
        if it % 64 == 63 {
            step = step.max(0.05);
        }
    }
    (best, best_val)
}

/// Deterministic coarse grid over the moduli/phases of a low-dimensional
/// complex vector.  Yields unnormalized direction candidates; the caller
/// projects them onto its ball.
pub fn phase_magnitude_grid(dim: usize) -> Vec<Vec<C64>> {
    assert!(dim <= 3);
    let mags = [0.0_f64, 0.5, 1.0];
    let phases = [0.0_f64, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];
    let mut out = Vec::new();
    let mut mag_idx = vec![0usize; dim];
    loop {
        let magv: Vec<f64> = mag_idx.iter().map(|&i| mags[i]).collect();
        if magv.iter().any(|&m| m > 0.0) {
            // first nonzero coordinate keeps phase 0 (global phase is free)
            let first = magv.iter().position(|&m| m > 0.0).unwrap();
            let free: Vec<usize> = (first + 1..dim).filter(|&i| magv[i] > 0.0).collect();
            let mut ph_idx = vec![0usize; free.len()];
            loop {
                let mut v = vec![C64::default(); dim];
                for i in 0..dim {
                    v[i] = C64::new(magv[i], 0.0);
                }
                for (slot, &coord) in free.iter().enumerate() {
                    let ang = phases[ph_idx[slot]] * std::f64::consts::PI;
                    v[coord] = C64::new(magv[coord] * ang.cos(), magv[coord] * ang.sin());
                }
                out.push(v);
                // advance phase counter
                let mut carry = true;
                for slot in 0..free.len() {
                    if carry {
                        ph_idx[slot] += 1;
                        if ph_idx[slot] == phases.len() {
                            ph_idx[slot] = 0;
                        } else {
                            carry = false;
                        }
                    }
                }
                if carry {
                    break;
                }
            }
        }
        // advance magnitude counter
        let mut carry = true;
        for slot in 0..dim {
            if carry {
                mag_idx[slot] += 1;
                if mag_idx[slot] == mags.len() {
                    mag_idx[slot] = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    out
}
