//! Exact 3x3 representation of the proper triangle group `<A, B | A^p, B^q, (AB)^2>`
//! over `Z[xi]`, built from the geometric Coxeter reflections, plus word
//! evaluation and ball enumeration in the Cayley graph.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{rescaled_chebyshev, RingContext, RingElem};

/// Schläfli symbol `{p, q}` of a hyperbolic tessellation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TessellationParams {
    p: u32,
    q: u32,
}

impl TessellationParams {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        // 1/p + 1/q < 1/2  <=>  2(p + q) < pq
        if p < 3 || q < 3 || 2 * (p as u64 + q as u64) >= p as u64 * q as u64 {
            return Err(Error::InvalidTessellation { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Index `n` of the smallest ring `Z[xi_n]` holding the generators.
    pub fn ring_index(&self) -> u64 {
        let (p, q) = (self.p as u64, self.q as u64);
        if q == 3 || p == q {
            2 * p
        } else if p == 3 {
            2 * q
        } else {
            2 * p * q
        }
    }
}

impl fmt::Display for TessellationParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.p, self.q)
    }
}

pub fn ring_index(p: u32, q: u32) -> Result<u64> {
    Ok(TessellationParams::new(p, q)?.ring_index())
}

/// 3x3 matrix over `Z[xi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupMatrix {
    entries: [[RingElem; 3]; 3],
}

impl GroupMatrix {
    pub fn from_entries(entries: [[RingElem; 3]; 3]) -> Self {
        Self { entries }
    }

    pub fn identity(ctx: &Arc<RingContext>) -> Self {
        Self::from_entries(std::array::from_fn(|i| {
            std::array::from_fn(|j| RingElem::from_int(ctx, (i == j) as i64))
        }))
    }

    pub fn ctx(&self) -> &Arc<RingContext> {
        self.entries[0][0].ctx()
    }

    pub fn entry(&self, i: usize, j: usize) -> &RingElem {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[[RingElem; 3]; 3] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        (0..3).all(|i| {
            (0..3).all(|j| {
                let e = &self.entries[i][j];
                if i == j { e.is_one() } else { e.is_zero() }
            })
        })
    }

    /// Matrix product with star-multiplied entries.
    pub fn mul(&self, rhs: &Self) -> Self {
        let ctx = self.ctx();
        Self::from_entries(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut acc = RingElem::zero(ctx);
                for k in 0..3 {
                    let (a, b) = (&self.entries[i][k], &rhs.entries[k][j]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                acc
            })
        }))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.ctx());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> RingElem {
        let m = &self.entries;
        let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
        let t0 = &m[0][0] * &minor(1, 2, 2, 1);
        let t1 = &m[0][1] * &minor(0, 2, 2, 0);
        let t2 = &m[0][2] * &minor(0, 1, 1, 0);
        &(&t0 - &t1) + &t2
    }

    /// Entrywise numerical image.
    pub fn eval(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].eval_real()))
    }

    /// Canonical byte serialization of the 9 d exact coefficients, row-major.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(9 * self.ctx().degree() * 2);
        for row in &self.entries {
            for e in row {
                for c in e.coeffs() {
                    let bytes = if c.is_zero() { Vec::new() } else { c.to_signed_bytes_le() };
                    out.push(bytes.len() as u8);
                    out.extend_from_slice(&bytes);
                }
            }
        }
        out
    }

    /// Coefficients reduced into `[0, m)`, flattened row-major (`9 d` values).
    pub fn mod_reduce_flat(&self, m: u64) -> Vec<u64> {
        self.entries
            .iter()
            .flatten()
            .flat_map(|e| e.mod_reduce(m).coeffs().to_vec())
            .collect()
    }

    fn coeff_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|row| {
                    serde_json::Value::Array(
                        row.iter()
                            .map(|e| {
                                serde_json::Value::Array(
                                    e.coeffs().iter().map(|c| serde_json::Value::String(c.to_string())).collect(),
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Generator tokens, in the fixed BFS order `A, A^-1, B, B^-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A,
    AInv,
    B,
    BInv,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::A, Generator::AInv, Generator::B, Generator::BInv];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn inverse(self) -> Self {
        match self {
            Generator::A => Generator::AInv,
            Generator::AInv => Generator::A,
            Generator::B => Generator::BInv,
            Generator::BInv => Generator::B,
        }
    }

    /// Lowercase letters are the generators, uppercase their inverses.
    pub fn letter(self) -> char {
        match self {
            Generator::A => 'a',
            Generator::AInv => 'A',
            Generator::B => 'b',
            Generator::BInv => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'a' => Some(Generator::A),
            'A' => Some(Generator::AInv),
            'b' => Some(Generator::B),
            'B' => Some(Generator::BInv),
            _ => None,
        }
    }
}

/// A free word in the generators, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(tokens: Vec<Generator>) -> Self {
        Self(tokens)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn tokens(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reversed word with every token inverted.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut t = self.0.clone();
        t.extend_from_slice(&other.0);
        Self(t)
    }

    pub fn pow(&self, k: usize) -> Self {
        Self(self.0.iter().copied().cycle().take(self.0.len() * k).collect())
    }

    pub fn push(&mut self, g: Generator) {
        self.0.push(g);
    }
}

impl From<Vec<Generator>> for Word {
    fn from(v: Vec<Generator>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            write!(f, "{}", g.letter())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Generator::from_letter(c).ok_or_else(|| Error::InvalidArgument(format!("bad word letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `2 cos(pi / m)` inside `Z[xi_n]`.
fn two_cos_pi_over(m: u32, ctx: &Arc<RingContext>) -> RingElem {
    let n = ctx.n();
    if m == 3 {
        return RingElem::one(ctx);
    }
    assert!(n % (2 * m as u64) == 0, "Z[xi_{n}] does not contain 2cos(pi/{m})");
    // P_k(xi_n) = 2 cos(2 pi k / n) with k = n / 2m
    RingElem::from_poly(ctx, &rescaled_chebyshev((n / (2 * m as u64)) as usize))
}

/// Reflections `sigma_x, sigma_y, sigma_z` of the geometric representation.
pub fn reflection_generators(params: TessellationParams, ctx: &Arc<RingContext>) -> [GroupMatrix; 3] {
    let a = two_cos_pi_over(params.p, ctx);
    let b = two_cos_pi_over(params.q, ctx);
    let z = RingElem::zero(ctx);
    let one = RingElem::one(ctx);
    let neg = RingElem::from_int(ctx, -1);
    let sx = [[neg.clone(), a.clone(), z.clone()], [z.clone(), one.clone(), z.clone()], [z.clone(), z.clone(), one.clone()]];
    let sy = [[one.clone(), z.clone(), z.clone()], [a, neg.clone(), b.clone()], [z.clone(), z.clone(), one.clone()]];
    let sz = [[one.clone(), z.clone(), z.clone()], [z.clone(), one, z.clone()], [z.clone(), b, neg]];
    [GroupMatrix::from_entries(sx), GroupMatrix::from_entries(sy), GroupMatrix::from_entries(sz)]
}

/// `A = sigma_x sigma_y`, `B = sigma_y sigma_z`.
pub fn rotation_generators(params: TessellationParams, ctx: &Arc<RingContext>) -> (GroupMatrix, GroupMatrix) {
    let [sx, sy, sz] = reflection_generators(params, ctx);
    (sx.mul(&sy), sy.mul(&sz))
}

/// The exact generator data of `Delta+_{p,q}`.
#[derive(Clone, Debug)]
pub struct TriangleGroup {
    params: TessellationParams,
    ctx: Arc<RingContext>,
    reflections: [GroupMatrix; 3],
    /// Indexed by [`Generator::index`].
    gens: [GroupMatrix; 4],
}

impl TriangleGroup {
    pub fn new(params: TessellationParams) -> Result<Self> {
        let ctx = RingContext::new(params.ring_index())?;
        let reflections = reflection_generators(params, &ctx);
        let a = reflections[0].mul(&reflections[1]);
        let b = reflections[1].mul(&reflections[2]);
        // inverses from the torsion relations
        let a_inv = a.pow(params.p - 1);
        let b_inv = b.pow(params.q - 1);
        Ok(Self { params, ctx, reflections, gens: [a, a_inv, b, b_inv] })
    }

    pub fn from_pq(p: u32, q: u32) -> Result<Self> {
        Self::new(TessellationParams::new(p, q)?)
    }

    pub fn params(&self) -> TessellationParams {
        self.params
    }

    pub fn ctx(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn reflections(&self) -> &[GroupMatrix; 3] {
        &self.reflections
    }

    pub fn generator(&self, g: Generator) -> &GroupMatrix {
        &self.gens[g.index()]
    }

    pub fn a(&self) -> &GroupMatrix {
        &self.gens[0]
    }

    pub fn b(&self) -> &GroupMatrix {
        &self.gens[2]
    }

    pub fn identity(&self) -> GroupMatrix {
        GroupMatrix::identity(&self.ctx)
    }

    pub fn word_matrix(&self, w: &Word) -> GroupMatrix {
        w.tokens()
            .iter()
            .fold(self.identity(), |acc, &g| acc.mul(self.generator(g)))
    }
}

/// Left-to-right product of the generator matrices along `w`.
pub fn word_to_matrix(w: &Word, group: &TriangleGroup) -> GroupMatrix {
    group.word_matrix(w)
}

/// Elements within word distance `R` of the identity.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: usize,
    elements: Vec<GroupMatrix>,
    words: Vec<Word>,
    layers: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `neighbors[i][g]` = index of `elements[i] * g`, if it lies in the ball.
    neighbors: Vec<[Option<usize>; 4]>,
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupMatrix] {
        &self.elements
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// BFS layer (word length) of each element.
    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn lookup(&self, m: &GroupMatrix) -> Option<usize> {
        self.index.get(&m.key()).copied()
    }

    pub fn neighbor(&self, i: usize, g: Generator) -> Option<usize> {
        self.neighbors[i][g.index()]
    }

    /// Index of `elements[start] * w`, or `None` if it lies outside the ball.
    pub fn right_multiply(&self, group: &TriangleGroup, start: usize, w: &Word) -> Option<usize> {
        let mut cur = start;
        for (pos, &g) in w.tokens().iter().enumerate() {
            match self.neighbors[cur][g.index()] {
                Some(next) => cur = next,
                None => {
                    // The path left the ball; finish exactly and look the result up.
                    let rest = Word::new(w.tokens()[pos..].to_vec());
                    let target = self.elements[cur].mul(&group.word_matrix(&rest));
                    return self.lookup(&target);
                }
            }
        }
        Some(cur)
    }

    /// JSON lines: `{"index", "word", "matrix"}` per element.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, (m, w)) in self.elements.iter().zip(&self.words).enumerate() {
            let line = serde_json::json!({
                "index": i,
                "word": w.to_string(),
                "matrix": m.coeff_json(),
            });
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Breadth-first enumeration of the radius-`R` ball, deduplicated by exact
/// matrix equality. Generators are tried in the order `A, A^-1, B, B^-1`.
pub fn ball_enumerate(group: &TriangleGroup, radius: usize) -> Ball {
    let id = group.identity();
    let mut index = HashMap::new();
    index.insert(id.key(), 0);
    let mut elements = vec![id];
    let mut words = vec![Word::empty()];
    let mut layers = vec![0];
    let mut neighbors: Vec<[Option<usize>; 4]> = vec![[None; 4]];
    let mut frontier = 0..1;
    for layer in 0..radius {
        let start = elements.len();
        for i in frontier.clone() {
            for g in Generator::ALL {
                let prod = elements[i].mul(group.generator(g));
                let key = prod.key();
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        let j = elements.len();
                        index.insert(key, j);
                        let mut w = words[i].clone();
                        w.push(g);
                        elements.push(prod);
                        words.push(w);
                        layers.push(layer + 1);
                        neighbors.push([None; 4]);
                        j
                    }
                };
                neighbors[i][g.index()] = Some(j);
            }
        }
        frontier = start..elements.len();
    }
    // Outer layer: link only to elements already inside.
    for i in frontier {
        for g in Generator::ALL {
            let prod = elements[i].mul(group.generator(g));
            neighbors[i][g.index()] = index.get(&prod.key()).copied();
        }
    }
    Ball { radius, elements, words, layers, index, neighbors }
}
