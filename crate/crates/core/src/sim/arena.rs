//! Interned tree vertices addressed by dense `u32` ids.
//!
//! Nodes are created on first use. Each node caches its depth, Busemann
//! value and word key so the simulation never touches words on its hot path.

use crate::rng::{extend_key, root_key};
use crate::tree::{Ray, Vertex};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    parent: u32,
    last: u8,
    depth: u32,
    on_ray: bool,
    horo: i64,
    key: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct Arena {
    d: u8,
    nodes: Vec<Node>,
    children: Vec<u32>,
}

impl Arena {
    pub fn new(d: u8) -> Self {
        let root = Node {
            parent: NONE,
            last: 0,
            depth: 0,
            on_ray: true,
            horo: 0,
            key: root_key(),
        };
        Self {
            d,
            nodes: vec![root],
            children: vec![NONE; d as usize],
        }
    }

    pub const ROOT: u32 = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn depth(&self, id: u32) -> u32 {
        self.nodes[id as usize].depth
    }

    #[inline]
    pub fn horo(&self, id: u32) -> i64 {
        self.nodes[id as usize].horo
    }

    #[inline]
    pub fn key(&self, id: u32) -> u64 {
        self.nodes[id as usize].key
    }

    /// `id · a_g`, creating the node if needed.
    pub fn neighbor(&mut self, id: u32, g: u8) -> u32 {
        let node = &self.nodes[id as usize];
        if node.last == g {
            return node.parent;
        }
        let slot = id as usize * self.d as usize + (g - 1) as usize;
        let existing = self.children[slot];
        if existing != NONE {
            return existing;
        }
        let depth = node.depth + 1;
        let on_ray = node.on_ray && Ray::standard().letter(node.depth as usize) == g;
        let horo = if on_ray { node.horo - 1 } else { node.horo + 1 };
        let child = Node {
            parent: id,
            last: g,
            depth,
            on_ray,
            horo,
            key: extend_key(node.key, g),
        };
        let new_id = self.nodes.len() as u32;
        self.nodes.push(child);
        self.children
            .extend(std::iter::repeat_n(NONE, self.d as usize));
        self.children[slot] = new_id;
        new_id
    }

    pub fn lookup(&mut self, v: &Vertex) -> u32 {
        v.word().iter().fold(Self::ROOT, |id, &g| self.neighbor(id, g))
    }

    pub fn vertex(&self, mut id: u32) -> Vertex {
        let mut word = Vec::with_capacity(self.depth(id) as usize);
        while id != Self::ROOT {
            let n = &self.nodes[id as usize];
            word.push(n.last);
            id = n.parent;
        }
        word.reverse();
        Vertex::from_reduced(word).expect("arena words are reduced")
    }

    /// Vertices at distance exactly `i` from `id` whose depth is at most
    /// `max_depth`, appended to `out`.
    pub fn sphere_within(&mut self, id: u32, i: u32, max_depth: u32, out: &mut Vec<u32>) {
        if i == 0 {
            out.push(id);
            return;
        }
        self.walk(id, 0, i, max_depth, out);
    }

    fn walk(&mut self, id: u32, prev: u8, remaining: u32, max_depth: u32, out: &mut Vec<u32>) {
        for g in 1..=self.d {
            if g == prev {
                continue;
            }
            let node = &self.nodes[id as usize];
            // Geodesics climb then descend, so once past max_depth they stay past it.
            if node.last != g && node.depth + 1 > max_depth {
                continue;
            }
            let next = self.neighbor(id, g);
            if remaining == 1 {
                out.push(next);
            } else {
                self.walk(next, g, remaining - 1, max_depth, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{busemann, distance, sphere, Vertex};

    #[test]
    fn nodes_agree_with_words() {
        let mut a = Arena::new(3);
        let xi = Ray::standard();
        for v in crate::tree::ball(4, 3) {
            let id = a.lookup(&v);
            assert_eq!(a.vertex(id), v);
            assert_eq!(a.depth(id) as usize, v.depth());
            assert_eq!(a.horo(id), busemann(&v, xi).get());
            assert_eq!(a.key(id), crate::rng::word_key(v.word()));
        }
    }

    #[test]
    fn sphere_matches_word_enumeration() {
        let mut a = Arena::new(3);
        let x: Vertex = "1.2".parse().unwrap();
        let xid = a.lookup(&x);
        for i in 0..4 {
            let mut ids = Vec::new();
            a.sphere_within(xid, i, u32::MAX, &mut ids);
            let mut got: Vec<Vertex> = ids.iter().map(|&id| a.vertex(id)).collect();
            let mut want = sphere(&x, i as usize, 3);
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn sphere_respects_depth_cap() {
        let mut a = Arena::new(3);
        let x: Vertex = "2.1".parse().unwrap();
        let xid = a.lookup(&x);
        let mut ids = Vec::new();
        a.sphere_within(xid, 2, 3, &mut ids);
        let want: Vec<Vertex> = sphere(&x, 2, 3)
            .into_iter()
            .filter(|v| v.depth() <= 3)
            .collect();
        assert_eq!(ids.len(), want.len());
        for id in ids {
            let v = a.vertex(id);
            assert!(v.depth() <= 3 && distance(&v, &x) == 2);
        }
    }
}
