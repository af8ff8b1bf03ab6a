//! Finite quotients `G_k` of `Delta+_{p,q}` obtained by reducing the matrix
//! coefficients mod `s^k`.
//!
//! Only the right actions of the four generators and the inverse table are
//! stored; products of arbitrary elements go through words.

use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{ModKernel, MAX_MODULUS};
use crate::triangle_group::{Generator, TessellationParams, TriangleGroup, Word};

pub const DEFAULT_ELEMENT_CAP: usize = 500_000;

/// Orders of the torsion generators in the quotient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub a: usize,
    pub b: usize,
    pub ab: usize,
    pub expected: (usize, usize, usize),
}

impl TorsionReport {
    /// True if some torsion element lost order in the quotient.
    pub fn collapsed(&self) -> bool {
        (self.a, self.b, self.ab) != self.expected
    }

    /// Order of `x_alpha` (`x_1 = A`, `x_2 = B`, `x_3 = AB`).
    pub fn order_of(&self, alpha: usize) -> Option<usize> {
        match alpha {
            1 => Some(self.a),
            2 => Some(self.b),
            3 => Some(self.ab),
            _ => None,
        }
    }

    pub fn preserved(&self, alpha: usize) -> bool {
        let expected = match alpha {
            1 => self.expected.0,
            2 => self.expected.1,
            3 => self.expected.2,
            _ => return false,
        };
        self.order_of(alpha) == Some(expected)
    }
}

/// Packed mod-`m` residues of the group elements, used for coherence maps.
#[derive(Clone, Debug)]
struct ElementStore {
    bits: u32,
    values_per_key: usize,
    key_len: usize,
    keys: Vec<u8>,
    index: HashMap<Vec<u8>, u32>,
}

fn bits_for(m: u64) -> u32 {
    64 - (m - 1).leading_zeros()
}

fn pack(values: &[u64], bits: u32, out: &mut Vec<u8>) {
    out.clear();
    let mut acc: u64 = 0;
    let mut filled = 0u32;
    for &v in values {
        acc |= v << filled;
        filled += bits;
        while filled >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out.push(acc as u8);
    }
}

fn unpack(bytes: &[u8], bits: u32, count: usize, out: &mut [u64]) {
    let mask = (1u64 << bits) - 1;
    let mut acc: u64 = 0;
    let mut filled = 0u32;
    let mut it = bytes.iter();
    for o in out.iter_mut().take(count) {
        while filled < bits {
            acc |= (*it.next().expect("key too short") as u64) << filled;
            filled += 8;
        }
        *o = acc & mask;
        acc >>= bits;
        filled -= bits;
    }
}

impl ElementStore {
    fn key(&self, i: usize) -> &[u8] {
        &self.keys[i * self.key_len..(i + 1) * self.key_len]
    }
}

/// 3x3 matrix product over `Z_m[xi]` on flat row-major residue arrays.
fn mat_mul_mod(kernel: &ModKernel, x: &[u64], y: &[u64], out: &mut [u64], scratch: &mut [u64]) {
    let d = kernel.degree();
    for i in 0..3 {
        for j in 0..3 {
            scratch.fill(0);
            for k in 0..3 {
                let a = &x[(3 * i + k) * d..(3 * i + k + 1) * d];
                let b = &y[(3 * k + j) * d..(3 * k + j + 1) * d];
                kernel.mul_acc(a, b, scratch);
            }
            kernel.fold_into(scratch, &mut out[(3 * i + j) * d..(3 * i + j + 1) * d]);
        }
    }
}

/// `G_k = Delta+_{p,q} / N_k`, `N_k = Delta+ ∩ SL(3, s^k Z[xi])`.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    params: TessellationParams,
    s: u64,
    k: u32,
    order: usize,
    /// Right multiplication by `A, A^-1, B, B^-1`.
    gen_perm: [Vec<u32>; 4],
    inv: Vec<u32>,
    /// BFS discovery tree: parent index and the generator that reached each element.
    parent: Vec<(u32, Generator)>,
    torsion: TorsionReport,
    store: Option<ElementStore>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    p: u32,
    q: u32,
    s: u64,
    k: u32,
    order: usize,
    gen_perm: Vec<Vec<u32>>,
    inv: Vec<u32>,
}

impl QuotientGroup {
    /// Enumerate `G_k` by BFS from the identity. Fails with
    /// [`Error::ResourceCap`] once more than `cap` elements are discovered.
    pub fn build(params: TessellationParams, s: u64, k: u32, cap: usize) -> Result<Self> {
        if s < 2 || k < 1 {
            return Err(Error::InvalidArgument(format!("need s >= 2 and k >= 1, got s = {s}, k = {k}")));
        }
        let m = s
            .checked_pow(k)
            .filter(|&m| m <= MAX_MODULUS)
            .ok_or_else(|| Error::InvalidArgument(format!("modulus {s}^{k} too large")))?;
        let group = TriangleGroup::new(params)?;
        let kernel = ModKernel::new(group.ctx(), m)?;
        let d = kernel.degree();
        let values_per_key = 9 * d;
        let bits = bits_for(m);
        let gens: Vec<Vec<u64>> = Generator::ALL
            .iter()
            .map(|&g| group.generator(g).mod_reduce_flat(m))
            .collect();
        let identity = group.identity().mod_reduce_flat(m);

        let mut key_buf = Vec::new();
        pack(&identity, bits, &mut key_buf);
        let key_len = key_buf.len();
        let mut keys = key_buf.clone();
        let mut index: HashMap<Vec<u8>, u32> = HashMap::new();
        index.insert(key_buf.clone(), 0);
        let mut layer_of: Vec<u32> = vec![0];
        let mut gen_perm: [Vec<u32>; 4] = Default::default();

        let mut cur = vec![0u64; values_per_key];
        let mut prod = vec![0u64; values_per_key];
        let mut scratch = kernel.scratch();
        let mut i = 0usize;
        while i < layer_of.len() {
            unpack(&keys[i * key_len..(i + 1) * key_len], bits, values_per_key, &mut cur);
            for (gi, gmat) in gens.iter().enumerate() {
                mat_mul_mod(&kernel, &cur, gmat, &mut prod, &mut scratch);
                pack(&prod, bits, &mut key_buf);
                let j = match index.get(&key_buf) {
                    Some(&j) => j,
                    None => {
                        let j = layer_of.len() as u32;
                        if layer_of.len() >= cap {
                            return Err(Error::ResourceCap {
                                cap,
                                discovered: layer_of.len(),
                                layers: layer_of[i] as usize + 1,
                            });
                        }
                        index.insert(key_buf.clone(), j);
                        keys.extend_from_slice(&key_buf);
                        layer_of.push(layer_of[i] + 1);
                        j
                    }
                };
                gen_perm[gi].push(j);
            }
            i += 1;
        }
        let order = layer_of.len();
        let store = ElementStore { bits, values_per_key, key_len, keys, index };
        Self::from_perms(params, s, k, order, gen_perm, Some(store))
    }

    fn from_perms(
        params: TessellationParams,
        s: u64,
        k: u32,
        order: usize,
        gen_perm: [Vec<u32>; 4],
        store: Option<ElementStore>,
    ) -> Result<Self> {
        let parent = discovery_tree(&gen_perm, order)?;
        let mut g = Self {
            params,
            s,
            k,
            order,
            gen_perm,
            inv: Vec::new(),
            parent,
            torsion: TorsionReport { a: 0, b: 0, ab: 0, expected: (0, 0, 0) },
            store,
        };
        g.inv = (0..order).map(|i| g.apply(0, &g.word_of(i).inverse()) as u32).collect();
        let a = g.project(&Word::new(vec![Generator::A]));
        let b = g.project(&Word::new(vec![Generator::B]));
        let ab = g.project(&Word::new(vec![Generator::A, Generator::B]));
        g.torsion = TorsionReport {
            a: g.element_order(a),
            b: g.element_order(b),
            ab: g.element_order(ab),
            expected: (params.p() as usize, params.q() as usize, 2),
        };
        if g.torsion.collapsed() {
            log::warn!(
                "torsion collapse in {} mod {}^{}: orders (A, B, AB) = ({}, {}, {}), expected {:?}",
                params, s, k, g.torsion.a, g.torsion.b, g.torsion.ab, g.torsion.expected
            );
        }
        Ok(g)
    }

    pub fn params(&self) -> TessellationParams {
        self.params
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.s.pow(self.k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn torsion(&self) -> &TorsionReport {
        &self.torsion
    }

    pub fn gen_perm(&self, g: Generator) -> &[u32] {
        &self.gen_perm[g.index()]
    }

    pub fn inverse(&self, idx: usize) -> usize {
        self.inv[idx] as usize
    }

    pub fn inverse_table(&self) -> &[u32] {
        &self.inv
    }

    /// Right multiplication of element `idx` by the generator `g`.
    #[inline]
    pub fn right_mul_gen(&self, idx: usize, g: Generator) -> usize {
        self.gen_perm[g.index()][idx] as usize
    }

    /// `idx * w`.
    pub fn apply(&self, idx: usize, w: &Word) -> usize {
        w.tokens().iter().fold(idx, |i, &g| self.right_mul_gen(i, g))
    }

    /// Image of a word under the canonical projection onto `G_k`.
    pub fn project(&self, w: &Word) -> usize {
        self.apply(0, w)
    }

    /// Shortest (BFS-tree) word for element `idx`.
    pub fn word_of(&self, idx: usize) -> Word {
        let mut tokens = Vec::new();
        let mut cur = idx;
        while cur != 0 {
            let (p, g) = self.parent[cur];
            tokens.push(g);
            cur = p as usize;
        }
        tokens.reverse();
        Word::new(tokens)
    }

    /// Product of two elements.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.apply(a, &self.word_of(b))
    }

    /// Least `m >= 1` with `g^m = 1`.
    pub fn element_order(&self, idx: usize) -> usize {
        let w = self.word_of(idx);
        let mut cur = idx;
        let mut m = 1;
        while cur != 0 {
            cur = self.apply(cur, &w);
            m += 1;
        }
        m
    }

    /// Mod-`s^k` coefficients of element `idx`, flattened row-major, if the
    /// group was enumerated (not loaded from a cache).
    pub fn residues(&self, idx: usize) -> Option<Vec<u64>> {
        let st = self.store.as_ref()?;
        let mut out = vec![0; st.values_per_key];
        unpack(st.key(idx), st.bits, st.values_per_key, &mut out);
        Some(out)
    }

    /// Index of the element with the given residues.
    pub fn lookup_residues(&self, residues: &[u64]) -> Option<usize> {
        let st = self.store.as_ref()?;
        let mut key = Vec::new();
        pack(residues, st.bits, &mut key);
        st.index.get(&key).map(|&i| i as usize)
    }

    /// The natural map `self -> coarse` obtained by reducing coefficients
    /// modulo `coarse.modulus()`. Fails unless both groups share `(p, q, s)`,
    /// the coarse level is lower, and every image exists in `coarse`.
    pub fn reduction_map(&self, coarse: &QuotientGroup) -> Result<Vec<usize>> {
        if self.params != coarse.params || self.s != coarse.s || coarse.k > self.k {
            return Err(Error::InvalidArgument("reduction map needs matching (p, q, s) and a coarser level".into()));
        }
        if self.store.is_none() || coarse.store.is_none() {
            return Err(Error::InvalidArgument("reduction map needs enumerated (not cached) groups".into()));
        }
        let m = coarse.modulus();
        (0..self.order)
            .map(|i| {
                let r: Vec<u64> = self.residues(i).unwrap().iter().map(|v| v % m).collect();
                coarse
                    .lookup_residues(&r)
                    .ok_or_else(|| Error::InvalidArgument(format!("element {i} has no image in the coarse quotient")))
            })
            .collect()
    }

    pub fn cache_path(dir: &Path, params: TessellationParams, s: u64, k: u32) -> PathBuf {
        dir.join(format!("quotient_p{}_q{}_s{}_k{}.json", params.p(), params.q(), s, k))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CacheFile {
            p: self.params.p(),
            q: self.params.q(),
            s: self.s,
            k: self.k,
            order: self.order,
            gen_perm: self.gen_perm.to_vec(),
            inv: self.inv.clone(),
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, serde_json::to_vec(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: CacheFile = serde_json::from_slice(&fs::read(path)?)?;
        let params = TessellationParams::new(file.p, file.q)?;
        let perms: [Vec<u32>; 4] = file
            .gen_perm
            .try_into()
            .map_err(|_| Error::Cache("expected four generator permutations".into()))?;
        if perms.iter().any(|p| p.len() != file.order) || file.inv.len() != file.order {
            return Err(Error::Cache("table length does not match order".into()));
        }
        if perms.iter().flatten().any(|&v| v as usize >= file.order) {
            return Err(Error::Cache("permutation entry out of range".into()));
        }
        let g = Self::from_perms(params, file.s, file.k, file.order, perms, None)?;
        if g.inv != file.inv {
            return Err(Error::Cache("inverse table inconsistent with permutations".into()));
        }
        Ok(g)
    }

    /// Load from `dir` if a cache file exists, otherwise enumerate and save.
    pub fn load_or_build(dir: Option<&Path>, params: TessellationParams, s: u64, k: u32, cap: usize) -> Result<Self> {
        if let Some(dir) = dir {
            let path = Self::cache_path(dir, params, s, k);
            if path.exists() {
                return Self::load(&path);
            }
            let g = Self::build(params, s, k, cap)?;
            g.save(&path)?;
            return Ok(g);
        }
        Self::build(params, s, k, cap)
    }
}

/// BFS over the generator permutations in the fixed generator order. Since
/// enumeration indexes elements in exactly this order, the tree coincides
/// with the discovery tree; any mismatch means the tables are corrupt.
fn discovery_tree(gen_perm: &[Vec<u32>; 4], order: usize) -> Result<Vec<(u32, Generator)>> {
    let mut parent = vec![(u32::MAX, Generator::A); order];
    parent[0] = (0, Generator::A);
    let mut seen = vec![false; order];
    seen[0] = true;
    let mut next = 1usize;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in Generator::ALL {
            let j = gen_perm[g.index()][i] as usize;
            if !seen[j] {
                if j != next {
                    return Err(Error::Cache(format!("element {j} is not in BFS order (expected {next})")));
                }
                seen[j] = true;
                parent[j] = (i as u32, g);
                next += 1;
                queue.push_back(j);
            }
        }
    }
    if next != order {
        return Err(Error::Cache(format!("generators reach {next} of {order} elements")));
    }
    Ok(parent)
}

/// Free-function form of [`QuotientGroup::build`] with the default cap.
pub fn build_quotient(p: u32, q: u32, s: u64, k: u32) -> Result<QuotientGroup> {
    QuotientGroup::build(TessellationParams::new(p, q)?, s, k, DEFAULT_ELEMENT_CAP)
}

pub fn quotient_project(w: &Word, g: &QuotientGroup) -> usize {
    g.project(w)
}

pub fn element_order(idx: usize, g: &QuotientGroup) -> usize {
    g.element_order(idx)
}
