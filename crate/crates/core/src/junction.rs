//! Y-junction of three topological phases on an open ball of the lattice.
//!
//! Phase labels and ray indices run over `1..=3`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_from_origin, midpoint, DiskPoint};
use crate::operators::{model_hamiltonian, represent_open, SparseHermitian};
use crate::spectral::{ldos, SpectrumResult};
use crate::triangle_group::{Ball, TessellationParams, TriangleGroup};

/// Cyclic-projection model `h_alpha(lambda_kidx, eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub alpha: usize,
    pub kidx: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JunctionConfig {
    /// Angle of the first ray; `None` means `pi / (2p)`.
    pub phi_y: Option<f64>,
    pub ell: f64,
    pub eps: f64,
    pub models: [ModelSpec; 3],
    pub interface_radius: f64,
}

impl Default for JunctionConfig {
    fn default() -> Self {
        Self {
            phi_y: None,
            ell: 0.1,
            eps: 0.8,
            models: [ModelSpec { alpha: 1, kidx: 1 }, ModelSpec { alpha: 2, kidx: 1 }, ModelSpec { alpha: 3, kidx: 1 }],
            interface_radius: 0.75,
        }
    }
}

impl JunctionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::InvalidArgument(format!("ell must be positive, got {}", self.ell)));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {}", self.eps)));
        }
        if !(self.interface_radius >= 0.0) {
            return Err(Error::InvalidArgument("interface radius must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn phi(&self, params: TessellationParams) -> f64 {
        self.phi_y.unwrap_or(PI / (2.0 * params.p() as f64))
    }
}

/// Boundary points `e^{i phi}`, `e^{i (phi + 2pi/3)}`, `e^{i (phi + 4pi/3)}`.
pub fn junction_rays(phi_y: f64) -> [Complex64; 3] {
    std::array::from_fn(|i| Complex64::from_polar(1.0, phi_y + 2.0 * PI * i as f64 / 3.0))
}

/// `kappa_i(z) = arg(conj(z) Y_i)` on the principal branch.
pub fn kappa(z: DiskPoint, ray: Complex64) -> f64 {
    (z.z().conj() * ray).arg()
}

/// Region `i` lies between rays `i` and `i + 1`; the origin is labeled 1.
pub fn sector_label(z: DiskPoint, rays: &[Complex64; 3]) -> usize {
    if z.z() == Complex64::new(0.0, 0.0) {
        return 1;
    }
    (0..3)
        .find(|&i| kappa(z, rays[i]) <= 0.0 && kappa(z, rays[(i + 1) % 3]) > 0.0)
        .map_or(1, |i| i + 1)
}

fn check_index(i: usize) {
    assert!((1..=3).contains(&i), "ray index {i} outside 1..=3");
}

/// Distance from `z` to ray `i`.
pub fn boundary_distance(z: DiskPoint, i: usize, rays: &[Complex64; 3]) -> f64 {
    check_index(i);
    let d = distance_from_origin(z);
    if d == 0.0 {
        return 0.0;
    }
    let k = kappa(z, rays[i - 1]);
    if k.abs() < PI / 2.0 {
        (k.sin().abs() * d.sinh()).asinh()
    } else {
        d
    }
}

/// Signed distance to phase region `i`: negative inside, positive outside.
pub fn signed_distance(z: DiskPoint, i: usize, rays: &[Complex64; 3]) -> f64 {
    check_index(i);
    let own = boundary_distance(z, i, rays).min(boundary_distance(z, i % 3 + 1, rays));
    if sector_label(z, rays) == i { -own } else { own }
}

/// Partition of unity `chi_i = sigma_i / sum sigma`, `sigma_i = 1 / (1 + e^{D_i / ell})`.
pub fn partition(z: DiskPoint, rays: &[Complex64; 3], ell: f64) -> [f64; 3] {
    let sigma: [f64; 3] = std::array::from_fn(|i| 1.0 / (1.0 + (signed_distance(z, i + 1, rays) / ell).exp()));
    let total: f64 = sigma.iter().sum();
    sigma.map(|s| s / total)
}

/// Distance from `z` to the union of the three rays.
pub fn distance_to_rays(z: DiskPoint, rays: &[Complex64; 3]) -> f64 {
    (1..=3).map(|i| boundary_distance(z, i, rays)).fold(f64::INFINITY, f64::min)
}

/// `<z|H_Y|z'> = sum_i chi_i(mu(z, z')) <z|H_i|z'>` over a ball.
pub fn assemble_junction(
    ball: &Ball,
    group: &TriangleGroup,
    positions: &[DiskPoint],
    config: &JunctionConfig,
) -> Result<SparseHermitian> {
    config.validate()?;
    if positions.len() != ball.len() {
        return Err(Error::InvalidArgument(format!(
            "{} positions for a ball of {} sites",
            positions.len(),
            ball.len()
        )));
    }
    let params = group.params();
    let rays = junction_rays(config.phi(params));
    let hs = config
        .models
        .iter()
        .map(|m| Ok(represent_open(&model_hamiltonian(m.alpha, m.kidx, config.eps, params)?, ball, group)))
        .collect::<Result<Vec<_>>>()?;
    let bonds: BTreeSet<(usize, usize)> = hs.iter().flat_map(|h| h.triplets().map(|(i, j, _)| (i, j))).collect();
    let triplets = bonds.into_iter().map(|(i, j)| {
        // fixed argument order keeps the weights symmetric bit for bit
        let mu = midpoint(positions[i.min(j)], positions[i.max(j)]);
        let chi = partition(mu, &rays, config.ell);
        let v: Complex64 = hs.iter().zip(chi).map(|(h, c)| h.get(i, j) * c).sum();
        (i, j, v)
    });
    Ok(SparseHermitian::from_triplets(ball.len(), triplets.collect::<Vec<_>>()))
}

/// Per-site partition values.
pub fn partition_field(positions: &[DiskPoint], rays: &[Complex64; 3], ell: f64) -> Vec<[f64; 3]> {
    positions.iter().map(|&z| partition(z, rays, ell)).collect()
}

pub fn write_partition_csv<W: Write>(field: &[[f64; 3]], mut out: W) -> Result<()> {
    writeln!(out, "index,chi1,chi2,chi3")?;
    for (i, c) in field.iter().enumerate() {
        writeln!(out, "{i},{:.17e},{:.17e},{:.17e}", c[0], c[1], c[2])?;
    }
    Ok(())
}

/// LDOS split between sites near the rays and the rest of the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceMetrics {
    pub energy: f64,
    pub broadening: f64,
    pub midgap_states: usize,
    pub interface_sites: usize,
    pub bulk_sites: usize,
    pub interface_ldos: f64,
    pub bulk_ldos: f64,
    pub interface_mean: f64,
    pub bulk_mean: f64,
}

impl InterfaceMetrics {
    pub fn ratio(&self) -> f64 {
        self.interface_ldos / self.bulk_ldos
    }
}

pub fn interface_metrics(
    spec: &SpectrumResult,
    positions: &[DiskPoint],
    rays: &[Complex64; 3],
    radius: f64,
    energy: f64,
    broadening: f64,
    midgap_window: f64,
) -> Result<InterfaceMetrics> {
    let values = ldos(spec, energy, broadening)?;
    let mut m = InterfaceMetrics {
        energy,
        broadening,
        midgap_states: spec.eigenvalues().iter().filter(|e| (*e - energy).abs() < midgap_window).count(),
        interface_sites: 0,
        bulk_sites: 0,
        interface_ldos: 0.0,
        bulk_ldos: 0.0,
        interface_mean: 0.0,
        bulk_mean: 0.0,
    };
    for (z, v) in positions.iter().zip(&values) {
        if distance_to_rays(*z, rays) <= radius {
            m.interface_sites += 1;
            m.interface_ldos += v;
        } else {
            m.bulk_sites += 1;
            m.bulk_ldos += v;
        }
    }
    m.interface_mean = m.interface_ldos / m.interface_sites.max(1) as f64;
    m.bulk_mean = m.bulk_ldos / m.bulk_sites.max(1) as f64;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{default_seed, hyp_distance, site_positions, GammaBasis};
    use crate::triangle_group::ball_enumerate;
    use proptest::prelude::*;

    fn dp(r: f64, t: f64) -> DiskPoint {
        DiskPoint::new(Complex64::from_polar(r, t)).unwrap()
    }

    #[test]
    fn rays() {
        let y = junction_rays(0.0);
        assert!((y[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((y[1] - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-15);
        assert!((y[2] - Complex64::from_polar(1.0, 4.0 * PI / 3.0)).norm() < 1e-15);
        let params = TessellationParams::new(5, 4).unwrap();
        let y = junction_rays(JunctionConfig::default().phi(params));
        assert!((y[0] - Complex64::from_polar(1.0, PI / 10.0)).norm() < 1e-15);
        assert!(y.iter().all(|r| (r.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn labels() {
        let rays = junction_rays(0.3);
        assert_eq!(sector_label(DiskPoint::origin(), &rays), 1);
        // on ray 2 itself: kappa_2 = 0 puts the point in region 2
        assert_eq!(sector_label(dp(0.5, 0.3 + 2.0 * PI / 3.0), &rays), 2);
        assert_eq!(sector_label(dp(0.5, 0.3 + PI / 3.0), &rays), 1);
        let n = 3000;
        let mut counts = [0usize; 3];
        for j in 0..n {
            let t = 2.0 * PI * (j as f64 + 0.5) / n as f64;
            counts[sector_label(dp(0.4, t), &rays) - 1] += 1;
        }
        assert!(counts.iter().all(|&c| c.abs_diff(n / 3) <= 1), "{counts:?}");
        for j in 0..60 {
            let t = 0.05 + 0.1 * j as f64;
            let a = sector_label(dp(0.7, t), &rays);
            let b = sector_label(dp(0.7, t + 2.0 * PI / 3.0), &rays);
            assert_eq!(b, a % 3 + 1);
        }
    }

    #[test]
    fn boundary_distances() {
        let rays = junction_rays(0.2);
        for i in 1..=3 {
            assert_eq!(boundary_distance(DiskPoint::origin(), i, &rays), 0.0);
            let on = DiskPoint::new(rays[i - 1] * 0.8).unwrap();
            assert!(boundary_distance(on, i, &rays) < 1e-12);
        }
        // at kappa = pi/2 both branches give d(0, z)
        let z = DiskPoint::new(rays[0] * Complex64::new(0.0, -0.6)).unwrap();
        assert!((kappa(z, rays[0]) - PI / 2.0).abs() < 1e-12);
        let d = distance_from_origin(z);
        assert!((boundary_distance(z, 1, &rays) - d).abs() < 1e-12);
        // behind the ray the nearest point is the origin
        let behind = DiskPoint::new(-rays[0] * 0.5).unwrap();
        assert!((boundary_distance(behind, 1, &rays) - distance_from_origin(behind)).abs() < 1e-15);
    }

    #[test]
    fn boundary_distance_matches_brute_force() {
        let rays = junction_rays(0.7);
        for j in 0..40 {
            let z = dp(0.1 + 0.02 * j as f64, 0.37 * j as f64);
            for i in 1..=3 {
                let brute = (0..20000)
                    .map(|s| hyp_distance(z, DiskPoint::new(rays[i - 1] * (s as f64 / 20000.0)).unwrap()))
                    .fold(f64::INFINITY, f64::min);
                assert!((boundary_distance(z, i, &rays) - brute).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn signed_distances() {
        let rays = junction_rays(0.0);
        // bisector of region 1
        let deep = dp(0.9, PI / 3.0);
        assert!(signed_distance(deep, 1, &rays) < 0.0);
        assert!(signed_distance(deep, 2, &rays) > 0.0);
        assert!(signed_distance(deep, 3, &rays) > 0.0);
        // on ray 2, between regions 1 and 2
        let edge = dp(0.6, 2.0 * PI / 3.0);
        assert!(signed_distance(edge, 1, &rays).abs() < 1e-12);
        assert!(signed_distance(edge, 2, &rays).abs() < 1e-12);
        assert!(signed_distance(edge, 3, &rays) > 0.1);
    }

    #[test]
    fn partition_values() {
        let rays = junction_rays(0.4);
        let chi = partition(DiskPoint::origin(), &rays, 0.1);
        assert!(chi.iter().all(|c| (c - 1.0 / 3.0).abs() < 1e-15));
        // hard indicator as ell shrinks
        let z = dp(0.5, 0.4 + 1.0);
        let chi = partition(z, &rays, 1e-4);
        assert!((chi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deep_region_threshold() {
        let rays = junction_rays(0.0);
        let ell = 0.1;
        for k in 1..=3 {
            let t = PI / 3.0 + 2.0 * PI * (k - 1) as f64 / 3.0;
            // walk outward along the bisector until depth 10 ell
            let mut r = 0.0;
            let z = loop {
                r += 1e-4;
                let z = dp(r, t);
                if -signed_distance(z, k, &rays) >= 10.0 * ell {
                    break z;
                }
            };
            let chi = partition(z, &rays, ell);
            assert!(chi[k - 1] > 0.99);
            // sigmoid tails: 1 - chi_k <= 2 e^{-10}
            assert!(1.0 - chi[k - 1] <= 2.0 * (-10.0f64).exp() + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(r in 0.0f64..0.999, t in -PI..PI, phi in 0.0f64..6.3, ell in 0.01f64..2.0) {
            let chi = partition(dp(r, t), &junction_rays(phi), ell);
            prop_assert!((chi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(chi.iter().all(|c| (0.0..=1.0).contains(c)));
        }

        #[test]
        fn rotation_covariance(r in 0.01f64..0.99, t in -PI..PI, phi in 0.0f64..6.3) {
            let rays = junction_rays(phi);
            let z = dp(r, t);
            let w = dp(r, t + 2.0 * PI / 3.0);
            for i in 1..=3 {
                let a = signed_distance(z, i, &rays).abs();
                let b = signed_distance(w, i % 3 + 1, &rays).abs();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    fn setup(radius: usize) -> (TriangleGroup, Ball, Vec<DiskPoint>) {
        let params = TessellationParams::new(5, 4).unwrap();
        let group = TriangleGroup::new(params).unwrap();
        let ball = ball_enumerate(&group, radius);
        let basis = GammaBasis::new(params);
        let pos = site_positions(ball.elements(), default_seed(&basis), &basis).unwrap();
        (group, ball, pos)
    }

    #[test]
    fn identical_models_reduce_to_open_hamiltonian() {
        let (group, ball, pos) = setup(4);
        let spec = ModelSpec { alpha: 1, kidx: 2 };
        let cfg = JunctionConfig { models: [spec; 3], ..JunctionConfig::default() };
        let hy = assemble_junction(&ball, &group, &pos, &cfg).unwrap();
        let h = represent_open(&model_hamiltonian(1, 2, 0.8, group.params()).unwrap(), &ball, &group);
        assert_eq!(hy.nnz(), h.nnz());
        for (i, j, v) in h.triplets() {
            assert!((hy.get(i, j) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn junction_hamiltonian() {
        let (group, ball, pos) = setup(5);
        let cfg = JunctionConfig::default();
        let hy = assemble_junction(&ball, &group, &pos, &cfg).unwrap();
        assert_eq!(hy.hermiticity_error(), 0.0);
        let rays = junction_rays(cfg.phi(group.params()));
        let hs: Vec<_> = cfg
            .models
            .iter()
            .map(|m| represent_open(&model_hamiltonian(m.alpha, m.kidx, cfg.eps, group.params()).unwrap(), &ball, &group))
            .collect();
        let mut checked = [0usize; 2];
        for (i, j, v) in hy.triplets() {
            let mu = midpoint(pos[i.min(j)], pos[i.max(j)]);
            if i == j {
                let chi = partition(pos[i], &rays, cfg.ell);
                let expected: Complex64 = hs.iter().zip(chi).map(|(h, c)| h.get(i, i) * c).sum();
                assert!((v - expected).norm() < 1e-14);
            }
            let k = sector_label(mu, &rays);
            let depth = -signed_distance(mu, k, &rays);
            let diff = (v - hs[k - 1].get(i, j)).norm();
            let spread = hs.iter().map(|h| (h.get(i, j) - hs[k - 1].get(i, j)).norm()).fold(0.0, f64::max);
            if depth >= 10.0 * cfg.ell {
                assert!(diff <= 2.0 * (-depth / cfg.ell).exp() * spread + 1e-15);
                checked[0] += 1;
            }
            if depth >= 16.0 * cfg.ell {
                assert!(diff < 1e-6);
                checked[1] += 1;
            }
        }
        assert!(checked[0] > 0 && checked[1] > 0, "{checked:?}");
        let field = partition_field(&pos, &rays, cfg.ell);
        assert!(field.iter().all(|c| (c.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        let mut buf = Vec::new();
        write_partition_csv(&field, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), ball.len() + 1);
    }

    #[test]
    fn config_validation() {
        let (group, ball, pos) = setup(1);
        let bad = JunctionConfig { ell: 0.0, ..JunctionConfig::default() };
        assert!(assemble_junction(&ball, &group, &pos, &bad).is_err());
        let bad = JunctionConfig { eps: 1.5, ..JunctionConfig::default() };
        assert!(assemble_junction(&ball, &group, &pos, &bad).is_err());
        assert!(assemble_junction(&ball, &group, &pos[..1], &JunctionConfig::default()).is_err());
        let json = serde_json::json!({"ell": 0.2});
        let cfg: JunctionConfig = serde_json::from_value(json).unwrap();
        assert_eq!(cfg.ell, 0.2);
        assert_eq!(cfg.models, JunctionConfig::default().models);
    }
}
