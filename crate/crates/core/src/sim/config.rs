use std::collections::HashMap;

use crate::rng::{word_key, Streams};
use crate::tree::Vertex;

use super::Occupancy;

/// Occupancy field under the Palm law `ν_ρ(· | η(o) = 1)`, revealed on
/// demand. Unrevealed sites are independent Bernoulli(ρ), drawn from a
/// stream keyed by the vertex word so reveal order never matters.
#[derive(Debug, Clone)]
pub struct LazyConfiguration {
    revealed: HashMap<Vertex, bool>,
    rho: f64,
    master_seed: u64,
    streams: Streams,
}

pub fn sample_palm_config(rho: f64, seed: u64) -> LazyConfiguration {
    let mut revealed = HashMap::new();
    revealed.insert(Vertex::root(), true);
    LazyConfiguration {
        revealed,
        rho,
        master_seed: seed,
        streams: Streams::new(seed),
    }
}

/// Initial occupancy of the vertex with word key `key`.
pub(crate) fn initial_occupancy(streams: &Streams, rho: f64, key: u64, is_root: bool) -> bool {
    is_root || streams.bernoulli(key, rho)
}

impl LazyConfiguration {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn reveal(&mut self, v: &Vertex) -> bool {
        if let Some(&b) = self.revealed.get(v) {
            return b;
        }
        let b = initial_occupancy(&self.streams, self.rho, word_key(v.word()), v.is_root());
        self.revealed.insert(v.clone(), b);
        b
    }

    pub fn is_revealed(&self, v: &Vertex) -> bool {
        self.revealed.contains_key(v)
    }

    pub fn revealed_count(&self) -> usize {
        self.revealed.len()
    }

    pub(crate) fn set(&mut self, v: &Vertex, occupied: bool) {
        self.revealed.insert(v.clone(), occupied);
    }

    /// Exchanges the occupancies of `x` and `y`, revealing both first.
    pub(crate) fn swap(&mut self, x: &Vertex, y: &Vertex) {
        let (a, b) = (self.reveal(x), self.reveal(y));
        self.set(x, b);
        self.set(y, a);
    }
}

impl Occupancy for LazyConfiguration {
    fn occupied(&mut self, v: &Vertex) -> bool {
        self.reveal(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ball;

    #[test]
    fn root_always_occupied() {
        for seed in 0..20 {
            assert!(sample_palm_config(0.0, seed).reveal(&Vertex::root()));
        }
    }

    #[test]
    fn density_extremes() {
        let mut empty = sample_palm_config(0.0, 5);
        let mut full = sample_palm_config(1.0, 5);
        for v in ball(4, 3).iter().skip(1) {
            assert!(!empty.reveal(v));
            assert!(full.reveal(v));
        }
    }

    #[test]
    fn reveal_order_is_irrelevant() {
        let sites = ball(3, 3);
        let mut a = sample_palm_config(0.5, 11);
        let mut b = sample_palm_config(0.5, 11);
        let fwd: Vec<bool> = sites.iter().map(|v| a.reveal(v)).collect();
        let mut bwd: Vec<bool> = sites.iter().rev().map(|v| b.reveal(v)).collect();
        bwd.reverse();
        assert_eq!(fwd, bwd);
        assert_eq!(a.revealed_count(), sites.len());
    }

    #[test]
    fn swap_exchanges() {
        let mut c = sample_palm_config(0.0, 1);
        let x: Vertex = "1".parse().unwrap();
        c.swap(&Vertex::root(), &x);
        assert!(!c.reveal(&Vertex::root()));
        assert!(c.reveal(&x));
    }
}
