//! Hierarchical, replayable randomness.
//!
//! A [`SeedStream`] is a root seed plus a derivation path. Every random draw in
//! the crate comes from `stream.rng()`, so two parties holding the same stream
//! observe the same draws. Shared randomness between devices is expressed by
//! handing both of them the same derived stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The concrete generator handed out by [`SeedStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    root: u64,
    path: Vec<u64>,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self {
            root,
            path: Vec::new(),
        }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child stream one level below `self`.
    pub fn child(&self, tag: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(tag);
        Self {
            root: self.root,
            path,
        }
    }

    /// Descendant stream reached by appending `tags` in order.
    pub fn derive(&self, tags: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(tags);
        Self {
            root: self.root,
            path,
        }
    }

    /// 256-bit key for this stream. Each path element is absorbed together
    /// with its position and the path length, so `[1, 2]`, `[2, 1]` and
    /// `[1, 2, 0]` produce unrelated keys.
    fn key(&self) -> [u8; 32] {
        let mut state = self.root;
        let mut acc = splitmix64(&mut state);
        for (depth, &tag) in self.path.iter().enumerate() {
            state ^= acc.rotate_left(17) ^ (depth as u64).wrapping_mul(GOLDEN);
            state = state.wrapping_add(tag);
            acc = splitmix64(&mut state);
        }
        state ^= (self.path.len() as u64).wrapping_mul(0xd6e8_feb8_6659_fd93);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        key
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_path_same_draws() {
        let a = SeedStream::new(7).derive(&[1, 2, 3]);
        let b = SeedStream::new(7).child(1).child(2).child(3);
        assert_eq!(a, b);
        let xa: Vec<u64> = a.rng().random_iter().take(16).collect();
        let xb: Vec<u64> = b.rng().random_iter().take(16).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn distinct_paths_differ() {
        let root = SeedStream::new(7);
        let keys = [
            root.key(),
            root.child(0).key(),
            root.derive(&[1, 2]).key(),
            root.derive(&[2, 1]).key(),
            root.derive(&[1, 2, 0]).key(),
            SeedStream::new(8).derive(&[1, 2]).key(),
        ];
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                assert_ne!(keys[i], keys[j], "paths {i} and {j} collide");
            }
        }
    }

    #[test]
    fn sibling_streams_look_independent() {
        // Correlation of uniform draws between adjacent siblings.
        let root = SeedStream::new(42);
        let n = 20_000;
        let xs: Vec<f64> = root.child(0).rng().random_iter().take(n).collect();
        let ys: Vec<f64> = root.child(1).rng().random_iter().take(n).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let cov: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / n as f64;
        let corr = cov / (1.0 / 12.0);
        // Standard error of a null correlation is 1/sqrt(n).
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr {corr}");
    }
}
