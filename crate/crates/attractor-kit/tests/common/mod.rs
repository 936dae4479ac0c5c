#![allow(dead_code)]

use attractor_core::{ActivationSet, PromptMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid set with the given shape; concepts cycle over `concepts` labels.
pub fn random_set(seed: u64, n: usize, l: usize, d: usize, concepts: usize) -> ActivationSet {
    let mut r = rng(seed);
    let mut layers: Vec<u32> = Vec::with_capacity(l);
    let mut next = r.random_range(0..4u32);
    for _ in 0..l {
        layers.push(next);
        next += r.random_range(1..5u32);
    }
    let prompts = (0..n)
        .map(|i| {
            let mut digest = [0u8; 32];
            r.fill(&mut digest);
            PromptMeta {
                id: format!("prompt-{i}-{}", r.random_range(0..1000u32)),
                concept: format!("concept \"{}\", unicode é", i % concepts.max(1)),
                text_digest: digest,
                token_count: r.random_range(1..500u32),
            }
        })
        .collect();
    let data = (0..n * l * d).map(|_| r.sample::<f32, _>(StandardNormal)).collect();
    ActivationSet::new(layers, d, prompts, data).unwrap()
}

/// Concepts sit near orthonormal directions on `planted`; other layers are noise.
pub fn planted_set(seed: u64, concepts: usize, per: usize, layers: u32, planted: u32, d: usize) -> ActivationSet {
    let mut r = rng(seed);
    let mut prompts = Vec::new();
    let mut data = Vec::new();
    for c in 0..concepts {
        for j in 0..per {
            prompts.push(PromptMeta::new(format!("c{c}-{j}"), format!("c{c}")));
            for l in 0..layers {
                for k in 0..d {
                    let z: f64 = r.sample(StandardNormal);
                    let v = if l == planted {
                        f64::from(u8::from(k == c)) + 0.01 * z
                    } else {
                        z
                    };
                    data.push(v as f32);
                }
            }
        }
    }
    ActivationSet::new((0..layers).collect(), d, prompts, data).unwrap()
}

/// One structural or byte-level corruption of `base`.
pub fn mutate(base: &[u8], r: &mut ChaCha8Rng) -> Vec<u8> {
    let mut b = base.to_vec();
    let header_end = 9 + u32::from_le_bytes(base[5..9].try_into().unwrap()) as usize;
    match r.random_range(0..8u32) {
        0 => {
            let i = r.random_range(0..b.len());
            b[i] ^= 1 << r.random_range(0..8u32);
        }
        1 => {
            let i = r.random_range(0..b.len());
            b[i] = r.random();
        }
        2 => b.truncate(r.random_range(0..b.len())),
        3 => {
            let i = r.random_range(0..=b.len());
            let extra: Vec<u8> = (0..r.random_range(1..9)).map(|_| r.random()).collect();
            b.splice(i..i, extra);
        }
        4 => {
            // lie about the header length
            let h: u32 = match r.random_range(0..3u32) {
                0 => r.random(),
                1 => (header_end - 9) as u32 + r.random_range(1..16u32),
                _ => ((header_end - 9) as u32).saturating_sub(r.random_range(1..16u32)),
            };
            b[5..9].copy_from_slice(&h.to_le_bytes());
        }
        5 => {
            // rewrite one header character with something JSON-significant
            let i = r.random_range(9..header_end);
            const TOKENS: &[u8] = b"{}[]\",:0123456789-e.nulltrue ";
            b[i] = TOKENS[r.random_range(0..TOKENS.len())];
        }
        6 => {
            // poison one payload float
            if b.len() >= header_end + 4 {
                let k = r.random_range(0..(b.len() - header_end) / 4);
                let bad = [f32::NAN, f32::INFINITY, f32::NEG_INFINITY][r.random_range(0..3)];
                b[header_end + 4 * k..header_end + 4 * k + 4].copy_from_slice(&bad.to_le_bytes());
            }
        }
        _ => {
            // several independent flips
            for _ in 0..r.random_range(2..12) {
                let i = r.random_range(0..b.len());
                b[i] = r.random();
            }
        }
    }
    b
}
