//! Exact and stochastic spectral analysis of represented Hamiltonians.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{interpolate, AlgebraElement, SimplexPoint, SparseHermitian};
use crate::quotient::QuotientGroup;

pub const DEFAULT_DENSE_CAP: usize = 6000;
pub const DEFAULT_GRID_POINTS: usize = 1024;
pub const DEFAULT_MIN_GAP: f64 = 0.05;

/// Sorted eigenvalues and, optionally, the matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    eigenvalues: Vec<f64>,
    // column-major, one column per eigenvalue
    vectors: Option<Vec<Complex64>>,
}

impl SpectrumResult {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues, vectors: None }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Eigenvector for `eigenvalues()[n]`.
    pub fn vector(&self, n: usize) -> Option<&[Complex64]> {
        let d = self.dim();
        self.vectors.as_ref().map(|v| &v[n * d..(n + 1) * d])
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Number of eigenvalues `<= e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.partition_point(|&x| x <= e)
    }

    /// Distance from `e` to the nearest eigenvalue.
    pub fn distance_to(&self, e: f64) -> f64 {
        let i = self.eigenvalues.partition_point(|&x| x < e);
        let mut best = f64::INFINITY;
        if i < self.dim() {
            best = best.min(self.eigenvalues[i] - e);
        }
        if i > 0 {
            best = best.min(e - self.eigenvalues[i - 1]);
        }
        best
    }
}

pub fn exact_spectrum(h: &SparseHermitian, want_vectors: bool) -> Result<SpectrumResult> {
    exact_spectrum_capped(h, want_vectors, DEFAULT_DENSE_CAP)
}

/// Full dense Hermitian eigensolve; a real solver is used when `h` is real.
pub fn exact_spectrum_capped(h: &SparseHermitian, want_vectors: bool, cap: usize) -> Result<SpectrumResult> {
    let n = h.dim();
    if n > cap {
        return Err(Error::DenseCap { dim: n, cap });
    }
    if n == 0 {
        return Ok(SpectrumResult { eigenvalues: vec![], vectors: want_vectors.then(Vec::new) });
    }
    let fail = |e: faer::linalg::evd::EvdError| Error::Eigensolver(format!("{e:?}"));
    if h.is_real() {
        let mut m = Mat::<f64>::zeros(n, n);
        for (i, j, v) in h.triplets() {
            m[(i, j)] = v.re;
        }
        if !want_vectors {
            return Ok(SpectrumResult::from_eigenvalues(m.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?));
        }
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let eigenvalues = (0..n).map(|i| s[i]).collect();
        let vectors = (0..n).flat_map(|c| (0..n).map(move |r| Complex64::new(u[(r, c)], 0.0))).collect();
        Ok(SpectrumResult { eigenvalues, vectors: Some(vectors) })
    } else {
        let mut m = Mat::<faer::c64>::zeros(n, n);
        for (i, j, v) in h.triplets() {
            m[(i, j)] = v;
        }
        if !want_vectors {
            return Ok(SpectrumResult::from_eigenvalues(m.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?));
        }
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(fail)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let eigenvalues = (0..n).map(|i| s[i].re).collect();
        let vectors = (0..n).flat_map(|c| (0..n).map(move |r| u[(r, c)])).collect();
        Ok(SpectrumResult { eigenvalues, vectors: Some(vectors) })
    }
}

/// Fraction of eigenvalues `<= e`.
pub fn idos(spec: &SpectrumResult, e: f64) -> f64 {
    if spec.dim() == 0 {
        return 0.0;
    }
    spec.count_below(e) as f64 / spec.dim() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Density,
    Integrated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub method: String,
    pub kind: CurveKind,
    pub moments: Option<usize>,
    pub random_vectors: Option<usize>,
    pub seed: Option<u64>,
    pub dim: usize,
    /// Spectral window `[center - half_width, center + half_width]` used for rescaling.
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// Density or integrated density sampled on an energy grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DOSCurve {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: CurveMeta,
}

impl DOSCurve {
    /// `energy,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "energy,value")?;
        for (e, v) in self.energies.iter().zip(&self.values) {
            writeln!(out, "{e:.17e},{v:.17e}")?;
        }
        Ok(())
    }

    /// Writes `<stem>.csv` and the metadata sidecar `<stem>.json`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{stem}.csv")))?))?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&self.meta)?)?;
        Ok(())
    }
}

/// Uniform grid of bin midpoints on `[lo, hi]`.
pub fn energy_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / points as f64;
    (0..points).map(|j| lo + (j as f64 + 0.5) * step).collect()
}

/// Exact IDOS sampled on `grid`.
pub fn idos_curve(spec: &SpectrumResult, grid: &[f64]) -> DOSCurve {
    DOSCurve {
        energies: grid.to_vec(),
        values: grid.iter().map(|&e| idos(spec, e)).collect(),
        meta: CurveMeta {
            method: "exact".into(),
            kind: CurveKind::Integrated,
            moments: None,
            random_vectors: None,
            seed: None,
            dim: spec.dim(),
            window: None,
            params: serde_json::Value::Null,
        },
    }
}

/// Mean squared difference of two curves on a shared grid.
pub fn idos_mse(a: &DOSCurve, b: &DOSCurve) -> Result<f64> {
    if a.energies.len() != b.energies.len()
        || a.energies.iter().zip(&b.energies).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs()))
    {
        return Err(Error::GridMismatch);
    }
    if a.values.is_empty() {
        return Ok(0.0);
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.values.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpmConfig {
    pub moments: usize,
    pub random_vectors: usize,
    pub seed: u64,
    pub power_iterations: usize,
    pub margin: f64,
    pub grid_points: usize,
}

impl Default for KpmConfig {
    fn default() -> Self {
        Self { moments: 500, random_vectors: 10, seed: 0, power_iterations: 50, margin: 0.01, grid_points: DEFAULT_GRID_POINTS }
    }
}

/// Spectral window used to map `H` into `(-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub center: f64,
    pub half_width: f64,
}

impl SpectralWindow {
    pub fn from_bounds(lo: f64, hi: f64, margin: f64) -> Self {
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo) * (1.0 + margin);
        // degenerate spectra still need a nonzero window
        let half_width = if half > 1e-12 { half } else { 1.0 };
        Self { center, half_width }
    }

    pub fn to_rescaled(&self, e: f64) -> f64 {
        (e - self.center) / self.half_width
    }

    pub fn to_energy(&self, x: f64) -> f64 {
        self.center + self.half_width * x
    }

    pub fn grid(&self, points: usize) -> Vec<f64> {
        energy_grid(-1.0, 1.0, points).into_iter().map(|x| self.to_energy(x)).collect()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = dot(v, v).re.sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Unit-normalized complex Gaussian vector from stream `stream` of `seed`.
pub fn random_state(dim: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    normalize(&mut v);
    v
}

/// Largest eigenvalue of `sign * H` by power iteration on the shifted,
/// positive semidefinite `sign * H + shift`.
fn power_extreme(h: &SparseHermitian, sign: f64, shift: f64, iters: usize, seed: u64) -> Result<f64> {
    let n = h.dim();
    let mut v = random_state(n, seed, u64::MAX);
    let mut w = vec![Complex64::default(); n];
    let mut rayleigh = 0.0;
    for _ in 0..iters {
        h.matvec(&v, &mut w);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = *wi * sign + vi * shift;
        }
        rayleigh = dot(&v, &w).re;
        if normalize(&mut w) == 0.0 {
            return Ok(-shift);
        }
        std::mem::swap(&mut v, &mut w);
    }
    if !rayleigh.is_finite() {
        return Err(Error::BoundEstimate("power iteration diverged".into()));
    }
    Ok(rayleigh - shift)
}

/// Spectral bounds from power iteration on `H` and `-H`, widened by `margin`.
pub fn estimate_window(h: &SparseHermitian, iters: usize, margin: f64, seed: u64) -> Result<SpectralWindow> {
    if h.dim() == 0 {
        return Err(Error::BoundEstimate("empty operator".into()));
    }
    let (glo, ghi) = h.gershgorin_bounds();
    let shift = glo.abs().max(ghi.abs());
    if !shift.is_finite() {
        return Err(Error::BoundEstimate("non-finite matrix entries".into()));
    }
    let hi = power_extreme(h, 1.0, shift, iters, seed)?;
    let lo = -power_extreme(h, -1.0, shift, iters, seed)?;
    if lo > hi + 1e-9 * (1.0 + shift) {
        return Err(Error::BoundEstimate(format!("inconsistent bounds [{lo}, {hi}]")));
    }
    Ok(SpectralWindow::from_bounds(lo, hi.max(lo), margin))
}

/// Jackson damping factors `g_m`, `m < moments`.
pub fn jackson_kernel(moments: usize) -> Vec<f64> {
    let np1 = moments as f64 + 1.0;
    let c = PI / np1;
    (0..moments)
        .map(|m| {
            let m = m as f64;
            ((np1 - m) * (c * m).cos() + (c * m).sin() / c.tan()) / np1
        })
        .collect()
}

/// Jackson-damped Chebyshev moments of the normalized DOS of `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct KpmExpansion {
    pub window: SpectralWindow,
    /// Raw stochastic moments `mu_m = tr T_m(H~) / dim`.
    pub moments: Vec<f64>,
    pub config: KpmConfig,
    pub dim: usize,
}

/// `<a0| T_m(H~) |a0>` for `m < moments`, two moments per matrix-vector product.
pub fn chebyshev_moments(h: &SparseHermitian, window: SpectralWindow, a0: &[Complex64], moments: usize) -> Vec<f64> {
    let n = h.dim();
    let half = moments.max(2).div_ceil(2);
    let scale = |v: &[Complex64], out: &mut [Complex64]| {
        h.matvec(v, out);
        for (o, x) in out.iter_mut().zip(v) {
            *o = (*o - x * window.center) / window.half_width;
        }
    };
    let mut mu = vec![0.0; 2 * half];
    // prev = T_{j-1} a0, cur = T_j a0
    let mut prev = a0.to_vec();
    let mut cur = vec![Complex64::default(); n];
    let mut next = vec![Complex64::default(); n];
    scale(&prev, &mut cur);
    let mu0 = dot(a0, a0).re;
    let mu1 = dot(a0, &cur).re;
    mu[0] = mu0;
    mu[1] = mu1;
    for j in 1..half {
        // T_{2j} = 2 T_j^2 - T_0, T_{2j+1} = 2 T_{j+1} T_j - T_1
        mu[2 * j] = 2.0 * dot(&cur, &cur).re - mu0;
        scale(&cur, &mut next);
        for (nx, p) in next.iter_mut().zip(&prev) {
            *nx = *nx * 2.0 - p;
        }
        mu[2 * j + 1] = 2.0 * dot(&next, &cur).re - mu1;
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    mu.truncate(moments.max(2));
    mu
}

fn stochastic_moments(h: &SparseHermitian, window: SpectralWindow, cfg: &KpmConfig) -> Vec<f64> {
    let per_vector: Vec<Vec<f64>> = (0..cfg.random_vectors as u64)
        .into_par_iter()
        .map(|r| chebyshev_moments(h, window, &random_state(h.dim(), cfg.seed, r), cfg.moments))
        .collect();
    let r = per_vector.len().max(1) as f64;
    (0..cfg.moments.max(2))
        .map(|k| per_vector.iter().map(|mu| mu[k]).sum::<f64>() / r)
        .collect()
}

impl KpmExpansion {
    /// Moments of `H`, rescaled with power-iteration bounds; falls back to the
    /// Gershgorin enclosure when those bounds prove too tight.
    pub fn compute(h: &SparseHermitian, cfg: &KpmConfig) -> Result<Self> {
        let window = estimate_window(h, cfg.power_iterations, cfg.margin, cfg.seed)?;
        let moments = stochastic_moments(h, window, cfg);
        if moments.iter().all(|m| m.abs() <= 1.0 + 1e-8) {
            return Ok(Self { window, moments, config: *cfg, dim: h.dim() });
        }
        let (lo, hi) = h.gershgorin_bounds();
        let window = SpectralWindow::from_bounds(lo, hi, cfg.margin);
        log::warn!("power-iteration window too tight; using Gershgorin bounds [{lo}, {hi}]");
        let moments = stochastic_moments(h, window, cfg);
        if moments.iter().any(|m| !m.is_finite() || m.abs() > 1.0 + 1e-8) {
            return Err(Error::BoundEstimate("Chebyshev moments diverged".into()));
        }
        Ok(Self { window, moments, config: *cfg, dim: h.dim() })
    }

    fn damped(&self) -> Vec<f64> {
        jackson_kernel(self.moments.len()).iter().zip(&self.moments).map(|(g, m)| g * m).collect()
    }

    fn meta(&self, kind: CurveKind) -> CurveMeta {
        CurveMeta {
            method: "kpm-jackson".into(),
            kind,
            moments: Some(self.moments.len()),
            random_vectors: Some(self.config.random_vectors),
            seed: Some(self.config.seed),
            dim: self.dim,
            window: Some((self.window.to_energy(-1.0), self.window.to_energy(1.0))),
            params: serde_json::Value::Null,
        }
    }

    /// Density per unit energy at each grid energy; zero outside the window.
    pub fn density(&self, grid: &[f64]) -> Vec<f64> {
        let g = self.damped();
        grid.iter()
            .map(|&e| {
                let x = self.window.to_rescaled(e);
                if x.abs() >= 1.0 {
                    return 0.0;
                }
                let theta = x.acos();
                let s: f64 = g[0] + 2.0 * g.iter().enumerate().skip(1).map(|(m, gm)| gm * (m as f64 * theta).cos()).sum::<f64>();
                s / (PI * (1.0 - x * x).sqrt()) / self.window.half_width
            })
            .collect()
    }

    /// Integrated density, analytic in the Chebyshev expansion.
    pub fn integrated(&self, grid: &[f64]) -> Vec<f64> {
        let g = self.damped();
        grid.iter()
            .map(|&e| {
                let x = self.window.to_rescaled(e);
                if x <= -1.0 {
                    return 0.0;
                }
                if x >= 1.0 {
                    return g[0];
                }
                let theta = x.acos();
                let tail: f64 = g.iter().enumerate().skip(1).map(|(m, gm)| gm * (m as f64 * theta).sin() / m as f64).sum();
                g[0] * (1.0 - theta / PI) - 2.0 / PI * tail
            })
            .collect()
    }

    /// DOS on the default grid of the window, normalized to unit integral.
    pub fn dos_curve(&self) -> DOSCurve {
        let energies = self.window.grid(self.config.grid_points);
        let mut values = self.density(&energies);
        let step = 2.0 * self.window.half_width / energies.len() as f64;
        let total: f64 = values.iter().map(|v| v * step).sum();
        if total > 0.0 {
            values.iter_mut().for_each(|v| *v /= total);
        }
        DOSCurve { energies, values, meta: self.meta(CurveKind::Density) }
    }

    /// IDOS on the given grid.
    pub fn idos_curve(&self, grid: &[f64]) -> DOSCurve {
        DOSCurve { energies: grid.to_vec(), values: self.integrated(grid), meta: self.meta(CurveKind::Integrated) }
    }
}

/// KPM density of states on the default grid.
pub fn kpm_dos(h: &SparseHermitian, cfg: &KpmConfig) -> Result<DOSCurve> {
    Ok(KpmExpansion::compute(h, cfg)?.dos_curve())
}

/// Eigenvalue-free interval strictly inside the spectral hull.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub states_below: usize,
}

impl Gap {
    pub fn contains(&self, e: f64) -> bool {
        self.lower < e && e < self.upper
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
}

impl GapReport {
    pub fn containing(&self, e: f64) -> Option<&Gap> {
        self.gaps.iter().find(|g| g.contains(e))
    }
}

pub fn detect_gaps(spec: &SpectrumResult, min_width: f64) -> GapReport {
    let ev = spec.eigenvalues();
    let gaps = ev
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] >= min_width)
        .map(|(i, w)| Gap { lower: w[0], upper: w[1], width: w[1] - w[0], states_below: i + 1 })
        .collect();
    GapReport { gaps }
}

/// Closed piecewise-linear loop through the simplex vertices, `per_edge`
/// samples per edge; the first point is repeated at the end.
pub fn simplex_loop(vertices: usize, per_edge: usize) -> Vec<SimplexPoint> {
    let per_edge = per_edge.max(1);
    let mut path = Vec::with_capacity(vertices * per_edge + 1);
    for v in 0..vertices {
        let a = SimplexPoint::vertex(vertices, v);
        let b = SimplexPoint::vertex(vertices, (v + 1) % vertices);
        for s in 0..per_edge {
            path.push(SimplexPoint::lerp(&a, &b, s as f64 / per_edge as f64));
        }
    }
    path.push(SimplexPoint::vertex(vertices, 0));
    path
}

/// Levels along a path through the simplex spanned by `models`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFlow {
    pub path: Vec<SimplexPoint>,
    pub levels: Vec<Vec<f64>>,
}

impl SpectralFlow {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "point,{},level,energy", (1..=self.path.first().map_or(0, |p| p.weights().len())).map(|i| format!("lambda{i}")).collect::<Vec<_>>().join(","))?;
        for (i, (p, lv)) in self.path.iter().zip(&self.levels).enumerate() {
            let w = p.weights().iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
            for (l, e) in lv.iter().enumerate() {
                writeln!(out, "{i},{w},{l},{e:.17e}")?;
            }
        }
        Ok(())
    }
}

pub fn spectrum_at(models: &[AlgebraElement], point: &SimplexPoint, group: &QuotientGroup) -> Result<SpectrumResult> {
    let h = interpolate(models, point)?;
    exact_spectrum(&crate::operators::represent_periodic(&h, group), false)
}

pub fn spectral_flow(models: &[AlgebraElement], path: &[SimplexPoint], group: &QuotientGroup) -> Result<SpectralFlow> {
    let levels = path
        .iter()
        .map(|p| spectrum_at(models, p, group).map(|s| s.eigenvalues().to_vec()))
        .collect::<Result<_>>()?;
    Ok(SpectralFlow { path: path.to_vec(), levels })
}

/// Point on the segment `a -> b` where a level crosses `e`, found by
/// bisection on the number of levels below `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub point: SimplexPoint,
    pub t: f64,
    pub distance: f64,
}

pub fn locate_crossing(
    models: &[AlgebraElement],
    a: &SimplexPoint,
    b: &SimplexPoint,
    group: &QuotientGroup,
    e: f64,
    tol: f64,
) -> Result<Option<Crossing>> {
    let count = |t: f64| -> Result<(usize, f64)> {
        let s = spectrum_at(models, &SimplexPoint::lerp(a, b, t), group)?;
        Ok((s.count_below(e), s.distance_to(e)))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (c_lo, _) = count(lo)?;
    let (c_hi, _) = count(hi)?;
    if c_lo == c_hi {
        return Ok(None);
    }
    let mut best = (f64::INFINITY, 0.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let (c, d) = count(mid)?;
        if d < best.0 {
            best = (d, mid);
        }
        if best.0 <= tol {
            break;
        }
        if c == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(Crossing { point: SimplexPoint::lerp(a, b, best.1), t: best.1, distance: best.0 }))
}

/// Gaussian-broadened local density of states at every site.
pub fn ldos(spec: &SpectrumResult, e: f64, de: f64) -> Result<Vec<f64>> {
    if de <= 0.0 || !de.is_finite() {
        return Err(Error::InvalidArgument(format!("broadening must be positive, got {de}")));
    }
    if !spec.has_vectors() {
        return Err(Error::InvalidArgument("LDOS needs eigenvectors".into()));
    }
    let d = spec.dim();
    let mut out = vec![0.0; d];
    for (n, &en) in spec.eigenvalues().iter().enumerate() {
        let w = (-(en - e) * (en - e) / (2.0 * de * de)).exp();
        if w < 1e-300 {
            continue;
        }
        for (o, psi) in out.iter_mut().zip(spec.vector(n).unwrap()) {
            *o += w * psi.norm_sqr();
        }
    }
    Ok(out)
}
