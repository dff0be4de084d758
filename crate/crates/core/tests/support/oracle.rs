//! Brute-force reference for the association statistics.
//!
//! Written directly from the formulas with its own cosine, its own per-item
//! association, and bitmask enumeration of partitions. Shares no code with
//! `weat_core::stats`.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;

pub fn cos(u: &[f64], v: &[f64]) -> f64 {
    let mut uv = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for i in 0..u.len() {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    uv / (uu.sqrt() * vv.sqrt())
}

pub fn s_word(w: &[f64], a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let ma = a.iter().map(|x| cos(w, x)).sum::<f64>() / a.len() as f64;
    let mb = b.iter().map(|x| cos(w, x)).sum::<f64>() / b.len() as f64;
    ma - mb
}

pub struct OracleResult {
    pub s_obs: f64,
    pub per_item: Vec<f64>,
    pub effect_size: f64,
    pub p_value: f64,
    pub count: u64,
}

/// Exact WEAT statistics by enumerating every `|X|`-subset of `X ∪ Y` as a
/// bitmask. Requires `|X| + |Y| <= 24`.
pub fn brute_force(x: &[Vec<f64>], y: &[Vec<f64>], a: &[Vec<f64>], b: &[Vec<f64>]) -> OracleResult {
    let per_item: Vec<f64> = x.iter().chain(y).map(|w| s_word(w, a, b)).collect();
    let n = per_item.len();
    let k = x.len();
    let score = |mask: u32| {
        let mut inside = 0.0;
        let mut outside = 0.0;
        for (i, v) in per_item.iter().enumerate() {
            if mask >> i & 1 == 1 {
                inside += v;
            } else {
                outside += v;
            }
        }
        inside - outside
    };
    let observed_mask = (1u32 << k) - 1;
    let s_obs = score(observed_mask);
    let mut hits = 0u64;
    let mut count = 0u64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            count += 1;
            if score(mask) >= s_obs {
                hits += 1;
            }
        }
    }
    let mean = per_item.iter().sum::<f64>() / n as f64;
    let var = per_item.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let mx = per_item[..k].iter().sum::<f64>() / k as f64;
    let my = per_item[k..].iter().sum::<f64>() / (n - k) as f64;
    OracleResult {
        s_obs,
        effect_size: (mx - my) / var.sqrt(),
        p_value: hits as f64 / count as f64,
        count,
        per_item,
    }
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn gaussian_set<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| gaussian_vec(rng, dim)).collect()
}

/// Random orthogonal matrix (rows) by Gram-Schmidt on a Gaussian matrix.
pub fn random_rotation<R: Rng>(rng: &mut R, dim: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while q.len() < dim {
        let mut v = gaussian_vec(rng, dim);
        for _ in 0..2 {
            for row in &q {
                let d: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= d * ri;
                }
            }
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            q.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    q
}

pub fn rotate(q: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
