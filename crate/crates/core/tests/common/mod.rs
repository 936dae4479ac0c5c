#![allow(dead_code)]

use attractor_core::{ActivationSet, PromptMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

/// One prompt: its concept and one state per stored layer.
pub struct Row {
    pub concept: String,
    pub states: Vec<Vec<f64>>,
}

pub fn build_set(layers: Vec<u32>, rows: Vec<Row>) -> ActivationSet {
    let d = rows[0].states[0].len();
    let mut prompts = Vec::new();
    let mut data = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        prompts.push(PromptMeta::new(format!("p{i}"), r.concept.clone()));
        for s in &r.states {
            data.extend(s.iter().map(|&v| v as f32));
        }
    }
    ActivationSet::new(layers, d, prompts, data).unwrap()
}

pub fn basis(d: usize, k: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = scale;
    v
}

pub fn jitter(v: &[f64], sigma: f64, r: &mut ChaCha8Rng) -> Vec<f64> {
    v.iter().map(|x| x + sigma * normal(r)).collect()
}

/// Concepts are point masses (plus tiny noise) at orthonormal vectors on the
/// planted layer; every other layer holds i.i.d. isotropic Gaussian noise.
pub fn planted_layer_set(
    seed: u64,
    concepts: usize,
    per_concept: usize,
    layers: u32,
    planted: u32,
    d: usize,
) -> ActivationSet {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    for c in 0..concepts {
        for _ in 0..per_concept {
            let states = (0..layers)
                .map(|l| {
                    if l == planted {
                        jitter(&basis(d, c, 1.0), 0.01, &mut r)
                    } else {
                        (0..d).map(|_| normal(&mut r)).collect()
                    }
                })
                .collect();
            rows.push(Row {
                concept: format!("c{c}"),
                states,
            });
        }
    }
    build_set((0..layers).collect(), rows)
}
