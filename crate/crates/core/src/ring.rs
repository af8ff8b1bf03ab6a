//! Exact arithmetic in the ring `Z[xi_n]`, `xi_n = 2 cos(2 pi / n)`.
//!
//! Elements are coefficient vectors over the power basis `1, xi, ..., xi^(d-1)`
//! with `d = deg Psi_n`. Multiplication (the star product) multiplies the
//! polynomials and folds every power `xi^e`, `e >= d`, back with
//! `xi^d = r_n(xi)`, highest exponent first.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense integer polynomial, lowest degree first. The zero polynomial has no
/// coefficients; otherwise the last coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        Self::from_i64(&[c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    /// Coefficients as `i64`, or `None` if any coefficient overflows.
    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Euclidean division. Returns `None` if some step needs a non-integer
    /// quotient coefficient or the divisor is zero.
    pub fn div_rem(&self, divisor: &Self) -> Option<(Self, Self)> {
        let ddeg = divisor.degree()?;
        let lead = divisor.leading()?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= ddeg {
            return Some((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigInt::zero(); rem.len() - ddeg];
        for i in (0..quot.len()).rev() {
            let top = &rem[i + ddeg];
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(lead);
            if !r.is_zero() {
                return None;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &q * dc;
            }
            quot[i] = q;
        }
        Some((Self::new(quot), Self::new(rem)))
    }

    /// Decimal-string coefficients, lowest degree first.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|c| serde_json::Value::String(c.to_string()))
                .collect(),
        )
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (e, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{e}")?,
                (_, false) => write!(f, "{mag}x^{e}")?,
            }
        }
        Ok(())
    }
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_default();
                let b = rhs.coeffs.get(i).cloned().unwrap_or_default();
                a + b
            })
            .collect();
        IntPolynomial::new(coeffs)
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_default();
                let b = rhs.coeffs.get(i).cloned().unwrap_or_default();
                a - b
            })
            .collect();
        IntPolynomial::new(coeffs)
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

/// Rescaled Chebyshev polynomial `P_n(x) = 2 T_n(x / 2)`:
/// `P_0 = 2`, `P_1 = x`, `P_{n+1} = x P_n - P_{n-1}`.
pub fn rescaled_chebyshev(n: usize) -> IntPolynomial {
    let mut prev = IntPolynomial::constant(2);
    if n == 0 {
        return prev;
    }
    let mut cur = IntPolynomial::x();
    for _ in 1..n {
        let next = &cur.shift(1) - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

pub fn euler_totient(n: u64) -> u64 {
    assert!(n >= 1, "totient of 0 is undefined");
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            small.push(i);
            if i * i != n {
                large.push(n / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn psi_cache() -> &'static Mutex<HashMap<u64, IntPolynomial>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, IntPolynomial>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn minimal_polynomial_rec(n: u64, memo: &mut HashMap<u64, IntPolynomial>) -> Result<IntPolynomial> {
    if let Some(p) = memo.get(&n) {
        return Ok(p.clone());
    }
    // prod_{d | n} Psi_d = P_{s+1} - P_{s-1} (n = 2s) or P_{s+1} - P_s (n = 2s + 1)
    let s = (n / 2) as usize;
    let rhs = if n % 2 == 0 {
        &rescaled_chebyshev(s + 1) - &rescaled_chebyshev(s - 1)
    } else {
        &rescaled_chebyshev(s + 1) - &rescaled_chebyshev(s)
    };
    let mut denom = IntPolynomial::constant(1);
    for d in divisors(n).into_iter().filter(|&d| d < n) {
        let psi_d = minimal_polynomial_rec(d, memo)?;
        denom = &denom * &psi_d;
    }
    let (quot, rem) = rhs.div_rem(&denom).ok_or(Error::InexactDivision { n })?;
    if !rem.is_zero() {
        return Err(Error::InexactDivision { n });
    }
    memo.insert(n, quot.clone());
    Ok(quot)
}

/// Minimal polynomial `Psi_n` of `xi_n = 2 cos(2 pi / n)`, via the divisor
/// recursion over rescaled Chebyshev polynomials. Results are memoized
/// process-wide.
pub fn minimal_polynomial(n: u64) -> Result<IntPolynomial> {
    if n == 0 {
        return Err(Error::InvalidArgument("minimal polynomial index must be >= 1".into()));
    }
    let mut memo = psi_cache().lock().unwrap_or_else(|e| e.into_inner());
    minimal_polynomial_rec(n, &mut memo)
}

/// The ring `Z[xi_n]` together with its reduction data.
#[derive(Debug, Clone, PartialEq)]
pub struct RingContext {
    n: u64,
    d: usize,
    psi: IntPolynomial,
    /// `r_n = x^d - Psi_n`, stored densely with length `d`.
    r: Vec<BigInt>,
    xi: f64,
}

impl RingContext {
    pub fn new(n: u64) -> Result<Arc<Self>> {
        let psi = minimal_polynomial(n)?;
        let d = psi.degree().expect("minimal polynomial is nonzero");
        debug_assert!(psi.is_monic());
        let r = (0..d).map(|i| -psi.coeffs()[i].clone()).collect();
        let xi = 2.0 * (2.0 * std::f64::consts::PI / n as f64).cos();
        Ok(Arc::new(Self { n, d, psi, r, xi }))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn psi(&self) -> &IntPolynomial {
        &self.psi
    }

    pub fn r(&self) -> IntPolynomial {
        IntPolynomial::new(self.r.clone())
    }

    pub fn r_coeffs(&self) -> &[BigInt] {
        &self.r
    }

    pub fn xi_numeric(&self) -> f64 {
        self.xi
    }

    /// Fold a coefficient vector of any length down to length `d`.
    fn fold(&self, mut poly: Vec<BigInt>) -> Vec<BigInt> {
        let d = self.d;
        for e in (d..poly.len()).rev() {
            let c = std::mem::take(&mut poly[e]);
            if c.is_zero() {
                continue;
            }
            for (l, rl) in self.r.iter().enumerate() {
                if !rl.is_zero() {
                    poly[e - d + l] += &c * rl;
                }
            }
        }
        poly.resize(d, BigInt::zero());
        poly
    }
}

/// Make the ring context for index `n`.
pub fn make_context(n: u64) -> Result<Arc<RingContext>> {
    RingContext::new(n)
}

/// Element `sum_r c_r xi^r` of `Z[xi_n]`.
#[derive(Clone, Debug)]
pub struct RingElem {
    ctx: Arc<RingContext>,
    c: Vec<BigInt>,
}

impl PartialEq for RingElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.c == other.c
    }
}

impl Eq for RingElem {}

impl RingElem {
    /// Panics if `coeffs.len() != d`.
    pub fn new(ctx: &Arc<RingContext>, coeffs: Vec<BigInt>) -> Self {
        assert_eq!(coeffs.len(), ctx.d, "coefficient vector must have length d");
        Self { ctx: ctx.clone(), c: coeffs }
    }

    pub fn from_i64(ctx: &Arc<RingContext>, coeffs: &[i64]) -> Self {
        Self::new(ctx, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(ctx: &Arc<RingContext>) -> Self {
        Self::new(ctx, vec![BigInt::zero(); ctx.d])
    }

    pub fn from_int(ctx: &Arc<RingContext>, v: i64) -> Self {
        let mut c = vec![BigInt::zero(); ctx.d];
        c[0] = BigInt::from(v);
        Self::new(ctx, c)
    }

    pub fn one(ctx: &Arc<RingContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    /// The image of an arbitrary integer polynomial evaluated at `xi`.
    pub fn from_poly(ctx: &Arc<RingContext>, poly: &IntPolynomial) -> Self {
        let c = ctx.fold(poly.coeffs().to_vec());
        Self::new(ctx, c)
    }

    /// The generator `xi_n` itself.
    pub fn xi(ctx: &Arc<RingContext>) -> Self {
        Self::from_poly(ctx, &IntPolynomial::x())
    }

    pub fn ctx(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.c[0].is_one() && self.c[1..].iter().all(Zero::is_zero)
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx.n != other.ctx.n {
            return Err(Error::ContextMismatch { left: self.ctx.n, right: other.ctx.n });
        }
        Ok(())
    }

    /// The star product: polynomial product folded back into degree `< d`.
    pub fn star_mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(self.star_mul_unchecked(other))
    }

    fn star_mul_unchecked(&self, other: &Self) -> Self {
        let d = self.ctx.d;
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Self { ctx: self.ctx.clone(), c: self.ctx.fold(prod) }
    }

    pub fn eval_real(&self) -> f64 {
        let xi = self.ctx.xi;
        self.c
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * xi + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Coefficient-wise reduction into `[0, m)`.
    pub fn mod_reduce(&self, m: u64) -> ModRingElem {
        let mb = BigInt::from(m);
        let c = self
            .c
            .iter()
            .map(|v| v.mod_floor(&mb).to_u64().expect("residue fits in u64"))
            .collect();
        ModRingElem { ctx: self.ctx.clone(), m, c }
    }
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        self.check_ctx(rhs).expect("ring context mismatch");
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect();
        RingElem { ctx: self.ctx.clone(), c }
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        self.check_ctx(rhs).expect("ring context mismatch");
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect();
        RingElem { ctx: self.ctx.clone(), c }
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { ctx: self.ctx.clone(), c: self.c.iter().map(|a| -a).collect() }
    }
}

/// Panics on context mismatch; use [`RingElem::star_mul`] for a checked product.
impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        self.star_mul(rhs).expect("ring context mismatch")
    }
}

/// Largest modulus accepted for `Z_m[xi]` arithmetic; keeps the `u64`
/// accumulators of [`ModKernel`] overflow free.
pub const MAX_MODULUS: u64 = 1 << 24;

/// Element of `Z_m[xi_n]` with coefficients in `[0, m)`.
#[derive(Clone, Debug)]
pub struct ModRingElem {
    ctx: Arc<RingContext>,
    m: u64,
    c: Vec<u64>,
}

impl PartialEq for ModRingElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.m == other.m && self.c == other.c
    }
}

impl Eq for ModRingElem {}

impl ModRingElem {
    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn ctx(&self) -> &Arc<RingContext> {
        &self.ctx
    }

    /// Representative in `Z[xi]` with coefficients in `[0, m)`.
    pub fn lift(&self) -> RingElem {
        RingElem { ctx: self.ctx.clone(), c: self.c.iter().map(|&v| BigInt::from(v)).collect() }
    }

    pub fn star_mul_mod(&self, other: &Self) -> Result<Self> {
        if self.ctx.n != other.ctx.n {
            return Err(Error::ContextMismatch { left: self.ctx.n, right: other.ctx.n });
        }
        if self.m != other.m {
            return Err(Error::ModulusMismatch { left: self.m, right: other.m });
        }
        let kernel = ModKernel::new(&self.ctx, self.m)?;
        let mut out = vec![0; self.ctx.d];
        let mut scratch = kernel.scratch();
        kernel.mul_into(&self.c, &other.c, &mut out, &mut scratch);
        Ok(Self { ctx: self.ctx.clone(), m: self.m, c: out })
    }
}

/// Free-function form of [`RingElem::star_mul`].
pub fn star_mul(a: &RingElem, b: &RingElem) -> Result<RingElem> {
    a.star_mul(b)
}

/// Free-function form of [`RingElem::mod_reduce`].
pub fn mod_reduce(a: &RingElem, m: u64) -> Result<ModRingElem> {
    if !(2..=MAX_MODULUS).contains(&m) {
        return Err(Error::InvalidArgument(format!("modulus {m} outside [2, {MAX_MODULUS}]")));
    }
    Ok(a.mod_reduce(m))
}

/// Free-function form of [`ModRingElem::star_mul_mod`].
pub fn star_mul_mod(a: &ModRingElem, b: &ModRingElem) -> Result<ModRingElem> {
    a.star_mul_mod(b)
}

/// Allocation-free star product on raw residue slices, used by the quotient
/// enumeration hot loop.
#[derive(Clone, Debug)]
pub struct ModKernel {
    d: usize,
    m: u64,
    r: Vec<u64>,
}

impl ModKernel {
    pub fn new(ctx: &RingContext, m: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&m) {
            return Err(Error::InvalidArgument(format!("modulus {m} outside [2, {MAX_MODULUS}]")));
        }
        let mb = BigInt::from(m);
        let r = ctx.r.iter().map(|c| c.mod_floor(&mb).to_u64().unwrap()).collect();
        Ok(Self { d: ctx.d, m, r })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn scratch(&self) -> Vec<u64> {
        vec![0; 2 * self.d - 1]
    }

    pub fn reduce(&self, v: i64) -> u64 {
        v.rem_euclid(self.m as i64) as u64
    }

    /// `out = a * b mod m`; `scratch` must have length `2d - 1`.
    pub fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
        scratch.fill(0);
        self.mul_acc(a, b, scratch);
        self.fold_into(scratch, out);
    }

    /// `scratch += a * b` as unreduced polynomials (no folding).
    #[inline]
    pub fn mul_acc(&self, a: &[u64], b: &[u64], scratch: &mut [u64]) {
        let m = self.m;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                scratch[i + j] = (scratch[i + j] + ai * bj) % m;
            }
        }
    }

    /// Fold an unreduced product back to length `d` and store it in `out`.
    #[inline]
    pub fn fold_into(&self, scratch: &mut [u64], out: &mut [u64]) {
        let (d, m) = (self.d, self.m);
        for e in (d..scratch.len()).rev() {
            let c = scratch[e] % m;
            scratch[e] = 0;
            if c == 0 {
                continue;
            }
            for (l, &rl) in self.r.iter().enumerate() {
                scratch[e - d + l] = (scratch[e - d + l] + c * rl) % m;
            }
        }
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o = s % m;
        }
    }
}
