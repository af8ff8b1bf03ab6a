//! Hyperboloid and Poincaré-disk geometry for the geometric Coxeter
//! representation.
//!
//! Distances use curvature -1 throughout.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triangle_group::{GroupMatrix, TessellationParams};

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

const SHEET_TOL: f64 = 1e-8;

fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
}

fn unit(v: Vec3) -> Vec3 {
    let n = dot3(&v, &v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// The Coxeter form `B(e_s, e_s') = -cos(pi / m_ss')` on the reflection basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearForm {
    matrix: Mat3,
}

impl BilinearForm {
    pub fn new(params: TessellationParams) -> Self {
        let eta = (PI / params.p() as f64).cos();
        let zeta = (PI / params.q() as f64).cos();
        Self { matrix: [[1.0, -eta, 0.0], [-eta, 1.0, -zeta], [0.0, -zeta, 1.0]] }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    pub fn apply(&self, u: &Vec3, v: &Vec3) -> f64 {
        dot3(u, &mat_vec(&self.matrix, v))
    }

    /// `max |M^T B M - B|` over entries.
    pub fn isometry_defect(&self, m: &Mat3) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let ci = [m[0][i], m[1][i], m[2][i]];
                let cj = [m[0][j], m[1][j], m[2][j]];
                worst = worst.max((self.apply(&ci, &cj) - self.matrix[i][j]).abs());
            }
        }
        worst
    }
}

/// Eigenbasis of the Coxeter form, with eigenvalues `1`, `1 + Y`, `1 - Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaBasis {
    pub gamma: [Vec3; 3],
    pub upsilon: f64,
    form: BilinearForm,
}

impl GammaBasis {
    pub fn new(params: TessellationParams) -> Self {
        let eta = (PI / params.p() as f64).cos();
        let zeta = (PI / params.q() as f64).cos();
        let upsilon = (eta * eta + zeta * zeta).sqrt();
        Self {
            gamma: [
                [-zeta / eta, 0.0, 1.0],
                [eta / zeta, -upsilon / zeta, 1.0],
                [eta / zeta, upsilon / zeta, 1.0],
            ],
            upsilon,
            form: BilinearForm::new(params),
        }
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        [1.0, 1.0 + self.upsilon, 1.0 - self.upsilon]
    }

    /// Largest `|B G_i - mu_i G_i|` component.
    pub fn eigen_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (g, mu) in self.gamma.iter().zip(self.eigenvalues()) {
            let bg = mat_vec(self.form.matrix(), g);
            for k in 0..3 {
                worst = worst.max((bg[k] - mu * g[k]).abs());
            }
        }
        worst
    }

    // Basis vectors scaled so that B(v, v) = q1^2 + q2^2 - q0^2.
    fn frame(&self) -> [Vec3; 3] {
        let s = |v: Vec3, c: f64| {
            let u = unit(v);
            [u[0] * c, u[1] * c, u[2] * c]
        };
        [
            s(self.gamma[0], 1.0),
            s(self.gamma[1], 1.0 / (1.0 + self.upsilon).sqrt()),
            s(self.gamma[2], 1.0 / (self.upsilon - 1.0).sqrt()),
        ]
    }

    /// Reflection-basis vector with hyperboloid coordinates `(q0, q1, q2)`.
    pub fn embed(&self, q: Hyperboloid) -> Vec3 {
        let [f1, f2, f0] = self.frame();
        std::array::from_fn(|k| q.q1 * f1[k] + q.q2 * f2[k] + q.q0 * f0[k])
    }

    /// Hyperboloid coordinates of a reflection-basis vector.
    pub fn coordinates(&self, v: &Vec3) -> Hyperboloid {
        let u = self.gamma.map(unit);
        Hyperboloid {
            q0: (self.upsilon - 1.0).sqrt() * dot3(&u[2], v),
            q1: dot3(&u[0], v),
            q2: (1.0 + self.upsilon).sqrt() * dot3(&u[1], v),
        }
    }
}

/// Point of the Minkowski quadric `q1^2 + q2^2 - q0^2 = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperboloid {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

impl Hyperboloid {
    pub fn new(q0: f64, q1: f64, q2: f64) -> Self {
        Self { q0, q1, q2 }
    }

    pub fn sheet_residual(&self) -> f64 {
        (self.q1 * self.q1 + self.q2 * self.q2 - self.q0 * self.q0 + 1.0).abs()
    }

    /// `<u, v> = q1 q1' + q2 q2' - q0 q0'`.
    pub fn minkowski(&self, other: &Self) -> f64 {
        self.q1 * other.q1 + self.q2 * other.q2 - self.q0 * other.q0
    }
}

/// Point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.norm_sqr() < 1.0) {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        Ok(Self(z))
    }

    pub fn from_re_im(re: f64, im: f64) -> Result<Self> {
        Self::new(Complex64::new(re, im))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }
}

pub fn hyperboloid_to_disk(q: Hyperboloid) -> Result<DiskPoint> {
    let residual = q.sheet_residual();
    if residual > SHEET_TOL * (1.0 + q.q0.abs()) || q.q0 <= 0.0 {
        return Err(Error::OffSheet { residual });
    }
    DiskPoint::new(Complex64::new(q.q1, q.q2) / (1.0 + q.q0))
}

pub fn disk_to_hyperboloid(z: DiskPoint) -> Hyperboloid {
    let z = z.z();
    let r2 = z.norm_sqr();
    let w = 2.0 * z / (1.0 - r2);
    Hyperboloid { q0: (1.0 + r2) / (1.0 - r2), q1: w.re, q2: w.im }
}

/// Image of `z` under the isometry with reflection-basis matrix `m`.
pub fn act_numeric(m: &Mat3, z: DiskPoint, basis: &GammaBasis) -> Result<DiskPoint> {
    let v = mat_vec(m, &basis.embed(disk_to_hyperboloid(z)));
    let mut q = basis.coordinates(&v);
    let norm2 = q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2;
    if !(norm2 > 0.0) || q.q0 <= 0.0 {
        return Err(Error::OffSheet { residual: q.sheet_residual() });
    }
    if (norm2 - 1.0).abs() > SHEET_TOL {
        log::warn!("renormalizing drifted hyperboloid point (residual {:e})", (norm2 - 1.0).abs());
        let s = norm2.sqrt();
        q = Hyperboloid { q0: q.q0 / s, q1: q.q1 / s, q2: q.q2 / s };
    }
    let w = Complex64::new(q.q1, q.q2) / (1.0 + q.q0);
    // points extremely far out can round onto the circle
    DiskPoint::new(w)
}

pub fn act(g: &GroupMatrix, z: DiskPoint, basis: &GammaBasis) -> Result<DiskPoint> {
    act_numeric(&g.eval(), z, basis)
}

/// Positions `g z0` for each element, in element order.
pub fn site_positions(elements: &[GroupMatrix], z0: DiskPoint, basis: &GammaBasis) -> Result<Vec<DiskPoint>> {
    elements.iter().map(|g| act(g, z0, basis)).collect()
}

pub fn write_sites_csv<W: Write>(positions: &[DiskPoint], mut out: W) -> Result<()> {
    writeln!(out, "index,re,im")?;
    for (i, z) in positions.iter().enumerate() {
        writeln!(out, "{i},{:.17e},{:.17e}", z.z().re, z.z().im)?;
    }
    Ok(())
}

/// `(1 - |z|^2)(1 - |z'|^2) + |z - z'|^2`.
pub fn ahlfors_bracket(z: DiskPoint, w: DiskPoint) -> f64 {
    let (z, w) = (z.z(), w.z());
    (1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) + (z - w).norm_sqr()
}

pub fn hyp_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let (a, b) = (z.z(), w.z());
    let num = (a - b).norm_sqr();
    let den = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr());
    // 2 asinh(sqrt(x)) equals acosh(1 + 2x) and stays accurate near 0
    2.0 * (num / den).sqrt().asinh()
}

/// Distance from the disk center, `2 artanh |z|`.
pub fn distance_from_origin(z: DiskPoint) -> f64 {
    2.0 * z.z().norm().atanh()
}

/// Geodesic midpoint of `z` and `w`.
pub fn midpoint(z: DiskPoint, w: DiskPoint) -> DiskPoint {
    let (a, b) = (z.z(), w.z());
    let fa = 1.0 - a.norm_sqr();
    let fb = 1.0 - b.norm_sqr();
    let num = a * fb + b * fa;
    let den = 1.0 - a.norm_sqr() * b.norm_sqr() + (ahlfors_bracket(z, w) * fa * fb).sqrt();
    DiskPoint(num / den)
}

/// Timelike fixed vector of the rotation about the vertex opposite `e_s`,
/// normalized onto the sheet.
fn vertex(basis: &GammaBasis, s: usize) -> Hyperboloid {
    // B v is proportional to the dual vector e_s^*
    let m = basis.form().matrix();
    let mut rhs = [0.0; 3];
    rhs[s] = 1.0;
    let v = solve3(m, &rhs);
    let q = basis.coordinates(&v);
    let n = (q.q0 * q.q0 - q.q1 * q.q1 - q.q2 * q.q2).sqrt();
    let sign = q.q0.signum();
    Hyperboloid { q0: sign * q.q0 / n, q1: sign * q.q1 / n, q2: sign * q.q2 / n }
}

fn solve3(m: &Mat3, b: &Vec3) -> Vec3 {
    let det = |m: &Mat3| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    std::array::from_fn(|c| {
        let mut mc = *m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        det(&mc) / d
    })
}

/// Vertices of the fundamental triangle: the fixed points of `A`, `B` and `AB`.
pub fn fundamental_triangle(basis: &GammaBasis) -> [Hyperboloid; 3] {
    [vertex(basis, 2), vertex(basis, 0), vertex(basis, 1)]
}

/// Disk image of the incenter of the fundamental triangle.
pub fn default_seed(basis: &GammaBasis) -> DiskPoint {
    let v = fundamental_triangle(basis);
    let side = |a: &Hyperboloid, b: &Hyperboloid| (-a.minkowski(b)).max(1.0).acosh();
    let w = [side(&v[1], &v[2]).sinh(), side(&v[0], &v[2]).sinh(), side(&v[0], &v[1]).sinh()];
    let mut c = Hyperboloid::new(0.0, 0.0, 0.0);
    for (vi, wi) in v.iter().zip(w) {
        c.q0 += wi * vi.q0;
        c.q1 += wi * vi.q1;
        c.q2 += wi * vi.q2;
    }
    let n = (-c.minkowski(&c)).sqrt();
    let c = Hyperboloid::new(c.q0 / n, c.q1 / n, c.q2 / n);
    DiskPoint(Complex64::new(c.q1, c.q2) / (1.0 + c.q0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangle_group::{ball_enumerate, Generator, TriangleGroup, Word};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ROWS: [(u32, u32); 15] = [
        (6, 6), (8, 4), (6, 4), (8, 8), (6, 5), (5, 5), (8, 3), (8, 6),
        (5, 4), (7, 7), (7, 3), (7, 6), (7, 4), (8, 5), (7, 5),
    ];

    fn params(p: u32, q: u32) -> TessellationParams {
        TessellationParams::new(p, q).unwrap()
    }

    fn random_disk(rng: &mut ChaCha8Rng, rmax: f64) -> DiskPoint {
        let r = rmax * rng.random::<f64>().sqrt();
        let t = 2.0 * PI * rng.random::<f64>();
        DiskPoint::new(Complex64::from_polar(r, t)).unwrap()
    }

    /// `sinh` of the distance from `x` to the geodesic through `a` and `b`.
    fn sinh_distance_to_line(x: &Hyperboloid, a: &Hyperboloid, b: &Hyperboloid) -> f64 {
        // Minkowski normal: cross product followed by the metric sign flip
        let n = Hyperboloid::new(
            -(a.q1 * b.q2 - a.q2 * b.q1),
            a.q2 * b.q0 - a.q0 * b.q2,
            a.q0 * b.q1 - a.q1 * b.q0,
        );
        x.minkowski(&n).abs() / n.minkowski(&n).sqrt()
    }

    #[test]
    fn gamma_basis_rows() {
        let b = GammaBasis::new(params(5, 4));
        let expected = ((PI / 5.0).cos().powi(2) + (PI / 4.0).cos().powi(2)).sqrt();
        assert!((b.upsilon - expected).abs() < 1e-15);
        assert!((b.upsilon - 1.07448).abs() < 1e-5);
        for (p, q) in ROWS {
            let b = GammaBasis::new(params(p, q));
            assert!(b.upsilon > 1.0);
            assert!(b.eigen_residual() < 1e-12);
        }
    }

    #[test]
    fn embedding_realizes_minkowski_form() {
        let b = GammaBasis::new(params(7, 3));
        let q = disk_to_hyperboloid(DiskPoint::from_re_im(0.3, -0.5).unwrap());
        let v = b.embed(q);
        assert!((b.form().apply(&v, &v) + 1.0).abs() < 1e-12);
        let back = b.coordinates(&v);
        assert!((back.q0 - q.q0).abs() < 1e-12 && (back.q1 - q.q1).abs() < 1e-12 && (back.q2 - q.q2).abs() < 1e-12);
    }

    #[test]
    fn disk_maps() {
        let z = hyperboloid_to_disk(Hyperboloid::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(z.z(), Complex64::new(0.0, 0.0));
        let z = hyperboloid_to_disk(Hyperboloid::new(2f64.sqrt(), 1.0, 0.0)).unwrap();
        assert!((z.z().re - 1.0 / (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((z.z().re - 0.41421).abs() < 1e-5);
        assert_eq!(disk_to_hyperboloid(DiskPoint::origin()), Hyperboloid::new(1.0, 0.0, 0.0));
        assert!(matches!(hyperboloid_to_disk(Hyperboloid::new(1.0, 1.0, 0.0)), Err(Error::OffSheet { .. })));
        assert!(hyperboloid_to_disk(Hyperboloid::new(-1.0, 0.0, 0.0)).is_err());
        assert!(matches!(DiskPoint::from_re_im(0.6, 0.8), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn generators_are_form_isometries() {
        for (p, q) in ROWS {
            let g = TriangleGroup::new(params(p, q)).unwrap();
            let form = BilinearForm::new(params(p, q));
            for m in [g.a(), g.b()] {
                assert!(form.isometry_defect(&m.eval()) < 1e-9, "{p},{q}");
            }
        }
    }

    #[test]
    fn group_action() {
        let pr = params(5, 4);
        let g = TriangleGroup::new(pr).unwrap();
        let basis = GammaBasis::new(pr);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words: Vec<Word> = ["aB", "abAb", "BBa", "aaab"].iter().map(|s| s.parse().unwrap()).collect();
        for _ in 0..50 {
            let z = random_disk(&mut rng, 0.9);
            let w = random_disk(&mut rng, 0.9);
            assert!((act(&g.identity(), z, &basis).unwrap().z() - z.z()).norm() < 1e-12);
            for word in &words {
                let m = g.word_matrix(word);
                let minv = g.word_matrix(&word.inverse());
                let back = act(&m, act(&minv, z, &basis).unwrap(), &basis).unwrap();
                assert!((back.z() - z.z()).norm() < 1e-10);
                let d0 = hyp_distance(z, w);
                let d1 = hyp_distance(act(&m, z, &basis).unwrap(), act(&m, w, &basis).unwrap());
                assert!((d0 - d1).abs() < 1e-9);
                let q = disk_to_hyperboloid(z);
                let v = mat_vec(&m.eval(), &basis.embed(q));
                assert!(basis.coordinates(&v).sheet_residual() < 1e-8);
            }
        }
    }

    #[test]
    fn rotations_fix_triangle_vertices() {
        for (p, q) in [(5, 4), (7, 3), (8, 8)] {
            let pr = params(p, q);
            let g = TriangleGroup::new(pr).unwrap();
            let basis = GammaBasis::new(pr);
            let [va, vb, vab] = fundamental_triangle(&basis);
            let ab = g.a().mul(g.b());
            for (m, v) in [(g.a(), va), (g.b(), vb), (&ab, vab)] {
                let z = hyperboloid_to_disk(v).unwrap();
                assert!((act(m, z, &basis).unwrap().z() - z.z()).norm() < 1e-10);
            }
            // angles pi/p, pi/q, pi/2 at the three vertices
            let angle = |o: &Hyperboloid, a: &Hyperboloid, b: &Hyperboloid| {
                let (c, ca, cb) = (-a.minkowski(b), -o.minkowski(a), -o.minkowski(b));
                let (sa, sb) = ((ca * ca - 1.0).sqrt(), (cb * cb - 1.0).sqrt());
                ((ca * cb - c) / (sa * sb)).acos()
            };
            assert!((angle(&va, &vb, &vab) - PI / p as f64).abs() < 1e-10);
            assert!((angle(&vb, &va, &vab) - PI / q as f64).abs() < 1e-10);
            assert!((angle(&vab, &va, &vb) - PI / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn seed_is_the_incenter() {
        for (p, q) in ROWS {
            let basis = GammaBasis::new(params(p, q));
            let z0 = default_seed(&basis);
            let x = disk_to_hyperboloid(z0);
            let [a, b, c] = fundamental_triangle(&basis);
            let d = [
                sinh_distance_to_line(&x, &b, &c),
                sinh_distance_to_line(&x, &a, &c),
                sinh_distance_to_line(&x, &a, &b),
            ];
            assert!((d[0] - d[1]).abs() < 1e-10 && (d[1] - d[2]).abs() < 1e-10, "{p},{q}: {d:?}");
            assert!(d[0] > 1e-3);
        }
    }

    #[test]
    fn site_positions_are_distinct() {
        let pr = params(5, 4);
        let g = TriangleGroup::new(pr).unwrap();
        let basis = GammaBasis::new(pr);
        let z0 = default_seed(&basis);
        let ball = ball_enumerate(&g, 3);
        let pos = site_positions(ball.elements(), z0, &basis).unwrap();
        assert!((pos[0].z() - z0.z()).norm() < 1e-14);
        assert!(pos.iter().all(|z| z.z().norm() < 1.0));
        for i in 0..pos.len() {
            for j in 0..i {
                assert!(hyp_distance(pos[i], pos[j]) > 1e-6);
            }
        }
        // generator neighbors sit at a common distance from z0
        let da = hyp_distance(z0, pos[ball.neighbor(0, Generator::A).unwrap()]);
        let dai = hyp_distance(z0, pos[ball.neighbor(0, Generator::AInv).unwrap()]);
        assert!((da - dai).abs() < 1e-12);
        let mut buf = Vec::new();
        write_sites_csv(&pos, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), pos.len() + 1);
    }

    #[test]
    fn distance_basics() {
        let z = DiskPoint::from_re_im(0.2, 0.4).unwrap();
        let w = DiskPoint::from_re_im(-0.5, 0.1).unwrap();
        assert_eq!(hyp_distance(z, z), 0.0);
        assert!((hyp_distance(z, w) - hyp_distance(w, z)).abs() < 1e-15);
        let r = DiskPoint::from_re_im(0.6, 0.0).unwrap();
        assert!((hyp_distance(DiskPoint::origin(), r) - 2.0 * 0.6f64.atanh()).abs() < 1e-14);
        assert!((distance_from_origin(r) - hyp_distance(DiskPoint::origin(), r)).abs() < 1e-14);
        let expected = (1.0 + 2.0 * (z.z() - w.z()).norm_sqr() / ((1.0 - z.z().norm_sqr()) * (1.0 - w.z().norm_sqr()))).acosh();
        assert!((hyp_distance(z, w) - expected).abs() < 1e-13);
    }

    #[test]
    fn midpoint_examples() {
        let m = midpoint(DiskPoint::origin(), DiskPoint::from_re_im(0.6, 0.0).unwrap());
        let oracle = (0.6f64.atanh() / 2.0).tanh();
        assert!((m.z().re - oracle).abs() < 1e-12);
        assert!((m.z().re - 1.0 / 3.0).abs() < 1e-12);
        assert!(m.z().im.abs() < 1e-15);
        let z = DiskPoint::from_re_im(-0.3, 0.7).unwrap();
        assert!((midpoint(z, z).z() - z.z()).norm() < 1e-15);
        let r2 = z.z().norm_sqr();
        assert_eq!(ahlfors_bracket(z, z), (1.0 - r2) * (1.0 - r2));
    }

    #[test]
    fn midpoint_contract_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let z = random_disk(&mut rng, 0.95);
            let w = random_disk(&mut rng, 0.95);
            let m = midpoint(z, w);
            let d = hyp_distance(z, w);
            assert!((hyp_distance(z, m) - d / 2.0).abs() < 1e-10);
            assert!((hyp_distance(w, m) - d / 2.0).abs() < 1e-10);
            assert!((midpoint(w, z).z() - m.z()).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn disk_hyperboloid_round_trip(r in 0.0f64..0.999, t in 0.0f64..(2.0 * PI)) {
            let z = DiskPoint::new(Complex64::from_polar(r, t)).unwrap();
            let q = disk_to_hyperboloid(z);
            prop_assert!(q.q0 > 0.0);
            prop_assert!(q.sheet_residual() < 1e-12 * q.q0 * q.q0);
            let back = hyperboloid_to_disk(q).unwrap();
            prop_assert!((back.z() - z.z()).norm() < 1e-12);
        }

        #[test]
        fn midpoint_lies_between(a in 0.0f64..0.9, b in 0.0f64..0.9, ta in 0.0f64..6.28, tb in 0.0f64..6.28) {
            let z = DiskPoint::new(Complex64::from_polar(a, ta)).unwrap();
            let w = DiskPoint::new(Complex64::from_polar(b, tb)).unwrap();
            let m = midpoint(z, w);
            let d = hyp_distance(z, w);
            prop_assert!((hyp_distance(z, m) + hyp_distance(m, w) - d).abs() < 1e-10);
        }
    }
}
