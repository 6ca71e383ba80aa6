//! The d-regular tree as the Cayley graph of the free product of `d`
//! two-element groups `<a_1, ..., a_d | a_i^2 = e>`.
//!
//! Vertices are reduced words over the generator indices `1..=d` (no two
//! adjacent letters equal). The root is the empty word. Neighbours of `b` are
//! `b a_i`, so group addition `b + c` is word concatenation followed by
//! cancellation at the junction.
//!
//! Horodistances are taken with respect to the fixed boundary ray
//! `a_1 a_2 a_1 a_2 ...` and computed with the longest-common-prefix formula.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("generator index {index} outside 1..={d}")]
    InvalidGenerator { index: u8, d: u8 },
    #[error("tree degree {0} unsupported (need 2 <= d <= 255)")]
    InvalidDegree(u32),
    #[error("cannot parse vertex {0:?}")]
    Parse(String),
}

/// A generator `a_i`, stored as its index `i` in `1..=d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorIndex(u8);

impl GeneratorIndex {
    pub fn new(index: u8, d: u8) -> Result<Self, TreeError> {
        if index == 0 || index > d {
            return Err(TreeError::InvalidGenerator { index, d });
        }
        Ok(Self(index))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// A vertex of the tree: a reduced word, one byte per generator index.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Vertex(Vec<u8>);

impl Vertex {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    /// Single-letter vertex `a_i`. Panics on index 0.
    pub fn generator(index: u8) -> Self {
        assert!(index > 0, "generator indices start at 1");
        Self(vec![index])
    }

    /// Builds a vertex from letters already known to be reduced.
    /// Returns `None` if two adjacent letters coincide or a letter is 0.
    pub fn from_reduced(word: Vec<u8>) -> Option<Self> {
        if word.contains(&0) || word.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Self(word))
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Graph distance to the root.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn word(&self) -> &[u8] {
        &self.0
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The neighbour `self · a_g`.
    pub fn neighbor(&self, g: u8) -> Vertex {
        let mut w = self.0.clone();
        push_reduced(&mut w, g);
        Vertex(w)
    }

    /// Parent towards the root; `None` at the root.
    pub fn parent(&self) -> Option<Vertex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The `d` neighbours, in generator order.
    pub fn neighbors(&self, d: u8) -> impl Iterator<Item = Vertex> + '_ {
        (1..=d).map(move |g| self.neighbor(g))
    }

    /// Largest generator index occurring in the word (0 for the root).
    pub fn max_generator(&self) -> u8 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

fn push_reduced(word: &mut Vec<u8>, g: u8) {
    if word.last() == Some(&g) {
        word.pop();
    } else {
        word.push(g);
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("o");
        }
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "o" {
            return Ok(Vertex::root());
        }
        let word = s
            .split('.')
            .map(|t| t.parse::<u8>().map_err(|_| TreeError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Vertex::from_reduced(word).ok_or_else(|| TreeError::Parse(s.to_string()))
    }
}

impl From<Vertex> for String {
    fn from(v: Vertex) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Vertex {
    type Error = TreeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Reduces an arbitrary word by cancelling adjacent equal letters.
pub fn reduce(word: &[u8], d: u8) -> Result<Vertex, TreeError> {
    let mut out = Vec::with_capacity(word.len());
    for &g in word {
        if g == 0 || g > d {
            return Err(TreeError::InvalidGenerator { index: g, d });
        }
        push_reduced(&mut out, g);
    }
    Ok(Vertex(out))
}

/// Group product `b c`.
pub fn add(b: &Vertex, c: &Vertex) -> Vertex {
    let mut out = b.0.clone();
    for &g in &c.0 {
        push_reduced(&mut out, g);
    }
    Vertex(out)
}

/// Inverse in a free product of involutions: the reversed word.
pub fn invert(b: &Vertex) -> Vertex {
    Vertex(b.0.iter().rev().copied().collect())
}

/// `b - c := b c^{-1}`.
pub fn sub(b: &Vertex, c: &Vertex) -> Vertex {
    add(b, &invert(c))
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Shortest-path distance: `|x^{-1} y|`.
pub fn distance(x: &Vertex, y: &Vertex) -> usize {
    let l = common_prefix(&x.0, &y.0);
    (x.0.len() - l) + (y.0.len() - l)
}

/// The fixed boundary ray `a_1 a_2 a_1 a_2 ...`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ray;

impl Ray {
    pub fn standard() -> Self {
        Ray
    }

    /// Letter at 0-based position `n`.
    #[inline]
    pub fn letter(self, n: usize) -> u8 {
        if n.is_multiple_of(2) {
            1
        } else {
            2
        }
    }

    /// The ray vertex at depth `n`.
    pub fn prefix(self, n: usize) -> Vertex {
        Vertex((0..n).map(|k| self.letter(k)).collect())
    }

    /// Length of the longest common prefix of `word` with the ray.
    pub fn common_prefix(self, word: &[u8]) -> usize {
        word.iter()
            .enumerate()
            .take_while(|&(k, &g)| g == self.letter(k))
            .count()
    }
}

/// Signed horodistance in graph-distance units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HoroValue(pub i64);

impl HoroValue {
    pub fn get(self) -> i64 {
        self.0
    }
}

/// Busemann function `<y>` relative to the root: `|y| - 2 L` where `L` is
/// the common-prefix length of `y` with the ray.
pub fn busemann(y: &Vertex, xi: Ray) -> HoroValue {
    let l = xi.common_prefix(&y.0);
    HoroValue(y.0.len() as i64 - 2 * l as i64)
}

/// `<y - x>` as a difference of Busemann values.
pub fn horo_increment(x: &Vertex, y: &Vertex, xi: Ray) -> i64 {
    busemann(y, xi).0 - busemann(x, xi).0
}

/// Number of vertices at distance exactly `i` from any vertex.
pub fn sphere_size(i: u32, d: u8) -> u64 {
    if i == 0 {
        1
    } else {
        d as u64 * (d as u64 - 1).pow(i - 1)
    }
}

/// All reduced words of length exactly `i` over `1..=d`, in lexicographic order.
pub fn reduced_words(i: usize, d: u8) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..i {
        let mut next = Vec::with_capacity(out.len() * d as usize);
        for w in &out {
            for g in 1..=d {
                if w.last() != Some(&g) {
                    let mut e = w.clone();
                    e.push(g);
                    next.push(e);
                }
            }
        }
        out = next;
    }
    out
}

/// All vertices at distance exactly `i` from `x`.
pub fn sphere(x: &Vertex, i: usize, d: u8) -> Vec<Vertex> {
    reduced_words(i, d)
        .into_iter()
        .map(|z| add(x, &Vertex(z)))
        .collect()
}

/// Vertices of the closed ball of radius `r` around the root, in
/// breadth-first (depth, then lexicographic) order.
pub fn ball(r: usize, d: u8) -> Vec<Vertex> {
    (0..=r)
        .flat_map(|i| reduced_words(i, d).into_iter().map(Vertex))
        .collect()
}
