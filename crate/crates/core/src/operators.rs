//! Group-algebra elements and their right-regular realization as sparse
//! Hermitian matrices, either on a finite quotient (periodic boundary) or on a
//! ball of the infinite lattice (open boundary).

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quotient::QuotientGroup;
use crate::triangle_group::{Ball, Generator, TessellationParams, TriangleGroup, Word};

/// Numerical tolerances shared by the operator checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub idempotent: f64,
    pub trace: f64,
    pub simplex: f64,
}

pub const TOLERANCES: Tolerances = Tolerances { hermitian: 1e-12, idempotent: 1e-10, trace: 1e-8, simplex: 1e-12 };

/// Finite formal sum `sum_w c_w w` over free words.
///
/// Words are not reduced: two words naming the same group element are kept as
/// separate terms and only meet when the element is represented.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraElement {
    terms: BTreeMap<Word, Complex64>,
}

impl AlgebraElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        let mut h = Self::new();
        h.add_term(Word::empty(), Complex64::new(1.0, 0.0));
        h
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, Complex64)>>(terms: I) -> Self {
        let mut h = Self::new();
        for (w, c) in terms {
            h.add_term(w, c);
        }
        h
    }

    /// Accumulates onto any existing coefficient of `w`.
    pub fn add_term(&mut self, w: Word, c: Complex64) {
        *self.terms.entry(w).or_default() += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> Complex64 {
        self.terms.get(w).copied().unwrap_or_default()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    /// The adjoint `sum conj(c_w) w^-1`.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.inverse(), c.conj())))
    }

    /// Checks `w_g = conj(w_{g^-1})` after collapsing words onto the group
    /// elements they name in the exact representation.
    pub fn is_hermitian(&self, group: &TriangleGroup, tol: f64) -> bool {
        let collapse = |h: &Self| {
            let mut map: HashMap<Vec<u8>, Complex64> = HashMap::new();
            for (w, c) in &h.terms {
                *map.entry(group.word_matrix(w).key()).or_default() += c;
            }
            map
        };
        let mine = collapse(self);
        let adj = collapse(&self.adjoint());
        let keys: std::collections::HashSet<_> = mine.keys().chain(adj.keys()).collect();
        keys.into_iter().all(|k| {
            let a = mine.get(k).copied().unwrap_or_default();
            let b = adj.get(k).copied().unwrap_or_default();
            (a - b).norm() <= tol
        })
    }

    /// JSON object `{word: [re, im]}`; the identity is the empty word.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.terms
                .iter()
                .map(|(w, c)| (w.to_string(), serde_json::json!([c.re, c.im])))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::InvalidArgument("algebra element must be a JSON object".into()))?;
        let mut h = Self::new();
        for (k, c) in obj {
            let pair: [f64; 2] = serde_json::from_value(c.clone())?;
            h.add_term(k.parse()?, Complex64::new(pair[0], pair[1]));
        }
        Ok(h)
    }
}

/// Point on the standard simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > TOLERANCES.simplex {
            return Err(Error::InvalidArgument(format!("{weights:?} is not on the simplex")));
        }
        Ok(Self(weights))
    }

    /// Vertex `i` of the `n`-simplex.
    pub fn vertex(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Self(w)
    }

    /// `(1 - t) a + t b`, renormalized against rounding.
    pub fn lerp(a: &Self, b: &Self, t: f64) -> Self {
        let w: Vec<f64> = a.0.iter().zip(&b.0).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        let s: f64 = w.iter().sum();
        Self(w.into_iter().map(|x| x / s).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// `Delta = (x_1 + x_1^-1 + x_2 + x_2^-1) / 4` with `x_1 = A`, `x_2 = B`.
pub fn adjacency(_params: TessellationParams) -> AlgebraElement {
    AlgebraElement::from_terms(
        Generator::ALL
            .iter()
            .map(|&g| (Word::new(vec![g]), Complex64::new(0.25, 0.0))),
    )
}

/// Torsion generator `x_alpha` (`A`, `B`, `AB`) and its order `nu_alpha`.
pub fn cyclic_generator(alpha: usize, params: TessellationParams) -> Result<(Word, usize)> {
    match alpha {
        1 => Ok((Word::new(vec![Generator::A]), params.p() as usize)),
        2 => Ok((Word::new(vec![Generator::B]), params.q() as usize)),
        3 => Ok((Word::new(vec![Generator::A, Generator::B]), 2)),
        _ => Err(Error::InvalidArgument(format!("alpha must be 1, 2 or 3, got {alpha}"))),
    }
}

/// `p_alpha(lambda_k) = (1/nu) sum_{j<nu} lambda_k^j x_alpha^j`,
/// `lambda_k = exp(2 pi i k / nu)`, `1 <= k <= nu`.
pub fn cyclic_projection(alpha: usize, kidx: usize, params: TessellationParams) -> Result<AlgebraElement> {
    let (x, nu) = cyclic_generator(alpha, params)?;
    if kidx < 1 || kidx > nu {
        return Err(Error::InvalidArgument(format!("kidx must lie in 1..={nu}, got {kidx}")));
    }
    Ok(AlgebraElement::from_terms((0..nu).map(|j| {
        let phase = 2.0 * PI * ((kidx * j) % nu) as f64 / nu as f64;
        (x.pow(j), Complex64::from_polar(1.0 / nu as f64, phase))
    })))
}

/// Model Hamiltonian `eps (1 - 2 p_alpha(lambda)) + (1 - eps) Delta`.
pub fn model_hamiltonian(alpha: usize, kidx: usize, eps: f64, params: TessellationParams) -> Result<AlgebraElement> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    let proj = cyclic_projection(alpha, kidx, params)?;
    let mut h = AlgebraElement::identity().scale(eps.into());
    h = h.add(&proj.scale((-2.0 * eps).into()));
    h = h.add(&adjacency(params).scale((1.0 - eps).into()));
    // drop terms that cancelled exactly (eps = 0 or 1)
    h.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
    Ok(h)
}

/// Term-wise convex combination `sum_i lambda_i h_i`.
pub fn interpolate(hs: &[AlgebraElement], lambda: &SimplexPoint) -> Result<AlgebraElement> {
    if hs.len() != lambda.weights().len() {
        return Err(Error::InvalidArgument(format!(
            "{} operators but a {}-component simplex point",
            hs.len(),
            lambda.weights().len()
        )));
    }
    let mut out = AlgebraElement::new();
    for (h, &w) in hs.iter().zip(lambda.weights()) {
        if w != 0.0 {
            out = out.add(&h.scale(w.into()));
        }
    }
    Ok(out)
}

/// Compressed-row complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseHermitian {
    /// Sums duplicate `(row, col)` entries.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut acc: HashMap<(usize, usize), Complex64> = HashMap::new();
        for (r, c, v) in triplets {
            *acc.entry((r, c)).or_default() += v;
        }
        let mut entries: Vec<_> = acc.into_iter().filter(|(_, v)| v.norm() > 0.0).collect();
        entries.sort_unstable_by_key(|&((r, c), _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        for &((r, _), _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = entries.iter().map(|&((_, c), _)| c).collect();
        let vals = entries.iter().map(|&(_, v)| v).collect();
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(pos) => self.vals[r.start + pos],
            Err(_) => Complex64::default(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = H x`.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = Complex64::default();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn row_sums(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `(H + H^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = Complex64::new(0.5, 0.0);
        Self::from_triplets(
            self.dim,
            self.triplets()
                .flat_map(|(i, j, v)| [(i, j, v * half), (j, i, v.conj() * half)]),
        )
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut center = 0.0;
            let mut radius = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.dim == 0 { (0.0, 0.0) } else { (lo, hi) }
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::default(); self.dim]; self.dim];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// MatrixMarket coordinate format, `complex hermitian` (lower triangle).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        let lower: Vec<_> = self.triplets().filter(|&(i, j, _)| i >= j).collect();
        writeln!(out, "%%MatrixMarket matrix coordinate complex hermitian")?;
        writeln!(out, "{} {} {}", self.dim, self.dim, lower.len())?;
        for (i, j, v) in lower {
            writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        }
        Ok(())
    }
}

/// Right-regular representation on `l2(G_k)`: the term `w_g g` sends `|g'>`
/// to `|g' g^-1>`.
pub fn represent_periodic(h: &AlgebraElement, group: &QuotientGroup) -> SparseHermitian {
    let n = group.order();
    let mut triplets = Vec::with_capacity(n * h.len());
    for (w, &c) in h.terms() {
        let winv = w.inverse();
        for src in 0..n {
            triplets.push((group.apply(src, &winv), src, c));
        }
    }
    SparseHermitian::from_triplets(n, triplets)
}

/// Right-regular representation truncated to a ball: an entry is kept only
/// when both endpoints lie in the ball. The result is the Hermitian part of
/// the truncation.
pub fn represent_open(h: &AlgebraElement, ball: &Ball, group: &TriangleGroup) -> SparseHermitian {
    let n = ball.len();
    let mut triplets = Vec::with_capacity(n * h.len());
    for (w, &c) in h.terms() {
        let winv = w.inverse();
        for src in 0..n {
            if let Some(dst) = ball.right_multiply(group, src, &winv) {
                triplets.push((dst, src, c));
            }
        }
    }
    SparseHermitian::from_triplets(n, triplets).hermitian_part()
}
