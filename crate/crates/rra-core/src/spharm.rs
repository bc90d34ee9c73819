//! Spherical-harmonic analysis and synthesis on volume shells, Wigner-d
//! matrices, and rotation of volumes in coefficient space.
//!
//! Harmonics are orthonormal with the Condon-Shortley phase folded into the
//! normalized associated Legendre recurrence:
//! `Y_l^m = Pbar_l^m(cos theta) e^{i m phi}` for `m >= 0` and
//! `Y_l^{-m} = (-1)^m conj(Y_l^m)`. On the grid of [`crate::grids::SphereGrid`]
//! (Gauss-Legendre in `cos theta`, equispaced azimuths) the forward transform
//! is exact for band-limited data.
//!
//! A rotation by ZYZ Euler angles `tau = (gamma, beta, alpha)`, meaning
//! `R = R_z(alpha) R_y(beta) R_z(gamma)`, maps coefficients degree by degree:
//! `B_l^{m1} = sum_{m2} e^{-i m1 alpha} d^l_{m1,m2}(beta) e^{-i m2 gamma} A_l^{m2}`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grids::{lm_index, SphereGrid};

/// Signed order for a natural (FFT-layout) index with `M = 2 l_max + 1`.
pub fn signed_order(idx: usize, l_max: usize) -> i64 {
    let m_count = (2 * l_max + 1) as i64;
    let i = idx as i64;
    if i <= l_max as i64 {
        i
    } else {
        i - m_count
    }
}

pub(crate) fn same_sphere_grid(a: &Arc<SphereGrid>, b: &Arc<SphereGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// ZYZ Euler angles `(gamma, beta, alpha)`: `R = R_z(alpha) R_y(beta) R_z(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZYZ {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl EulerZYZ {
    pub fn new(gamma: f64, beta: f64, alpha: f64) -> Self {
        Self { gamma, beta, alpha }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let (sg, cg) = self.gamma.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        // R_z(alpha) R_y(beta) R_z(gamma)
        [
            [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
            [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
            [-sb * cg, sb * sg, cb],
        ]
    }

    pub fn from_matrix(r: &[[f64; 3]; 3]) -> Self {
        let sb = (r[0][2] * r[0][2] + r[1][2] * r[1][2]).sqrt();
        if sb > 1e-12 {
            Self {
                alpha: r[1][2].atan2(r[0][2]),
                beta: sb.atan2(r[2][2]),
                gamma: r[2][1].atan2(-r[2][0]),
            }
        } else if r[2][2] > 0.0 {
            // beta ~ 0: only alpha + gamma is determined
            Self {
                alpha: r[1][0].atan2(r[0][0]),
                beta: 0.0,
                gamma: 0.0,
            }
        } else {
            // beta ~ pi: only alpha - gamma is determined
            Self {
                alpha: (-r[1][0]).atan2(-r[0][0]),
                beta: PI,
                gamma: 0.0,
            }
        }
    }

    /// Euler angles of `R(self) . R(first)` (apply `first`, then `self`).
    pub fn compose(self, first: EulerZYZ) -> Self {
        let a = self.to_matrix();
        let b = first.to_matrix();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Self::from_matrix(&m)
    }

    pub fn apply(self, v: [f64; 3]) -> [f64; 3] {
        let m = self.to_matrix();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn inverse(self) -> Self {
        Self::new(-self.alpha, -self.beta, -self.gamma)
    }
}

/// Normalized associated Legendre values `Pbar_l^m(x)` for `0 <= m <= l <= l_max`,
/// with the Condon-Shortley phase, packed at `l (l + 1) / 2 + m`.
///
/// `Y_l^m = Pbar_l^m(cos theta) e^{i m phi}` is orthonormal over the sphere.
pub fn legendre_table(l_max: usize, x: f64) -> Vec<f64> {
    let count = (l_max + 1) * (l_max + 2) / 2;
    let mut p = vec![0.0; count];
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let s = (1.0 - x * x).max(0.0).sqrt();

    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=l_max {
        // sectoral: Pbar_m^m from Pbar_{m-1}^{m-1}
        p[idx(m, m)] =
            -(((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt() * s * p[idx(m - 1, m - 1)];
    }
    for m in 0..l_max {
        p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// Spherical harmonic `Y_l^m` at `(cos theta, phi)` for any `|m| <= l`.
/// Convenience for oracles; transforms use [`legendre_table`] in bulk.
pub fn spherical_harmonic(l: usize, m: i64, cos_theta: f64, phi: f64) -> Complex64 {
    let table = legendre_table(l, cos_theta);
    let mu = m.unsigned_abs() as usize;
    let pbar = table[l * (l + 1) / 2 + mu];
    let e = Complex64::from_polar(1.0, m as f64 * phi);
    if m >= 0 {
        pbar * e
    } else {
        let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
        sign * pbar * e
    }
}

/// Spherical-harmonic coefficients of a volume, per radial shell, packed as
/// `(l, m) -> l^2 + l + m` (components with `l < |m|` do not exist).
#[derive(Debug, Clone)]
pub struct SphVolume {
    grid: Arc<SphereGrid>,
    coeffs: Array2<Complex64>,
}

impl SphVolume {
    pub fn new(grid: Arc<SphereGrid>, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.radial_count(), grid.coeff_count()) {
            return Err(Error::DimensionMismatch(format!(
                "volume coefficients must be {} x {}, got {} x {}",
                grid.radial_count(),
                grid.coeff_count(),
                coeffs.dim().0,
                coeffs.dim().1
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Arc<SphereGrid>) -> Self {
        let coeffs = Array2::zeros((grid.radial_count(), grid.coeff_count()));
        Self { grid, coeffs }
    }

    /// Random band-limited volume; handy as test/bench input.
    pub fn random(grid: &Arc<SphereGrid>, seed: u64) -> Self {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let coeffs = Array2::from_shape_fn(
            (grid.radial_count(), grid.coeff_count()),
            |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn coeff(&self, shell: usize, l: usize, m: i64) -> Complex64 {
        self.coeffs[(shell, lm_index(l, m))]
    }

    /// `sum_m |A_l^m(k_r)|^2`, preserved under rotation.
    pub fn degree_power(&self, shell: usize, l: usize) -> f64 {
        (-(l as i64)..=(l as i64))
            .map(|m| self.coeffs[(shell, lm_index(l, m))].norm_sqr())
            .sum()
    }
}

/// Forward transform of one shell: samples on the sphere grid (layout
/// `theta-major`: `samples[i_theta * n_phi + i_phi]`) to packed coefficients.
/// Exact for band-limited input.
pub fn sph_forward(grid: &SphereGrid, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let n_theta = grid.cos_theta_nodes().len();
    let n_phi = grid.phi_count();
    if samples.len() != n_theta * n_phi {
        return Err(Error::DimensionMismatch(format!(
            "expected {} sphere samples, got {}",
            n_theta * n_phi,
            samples.len()
        )));
    }
    let l_max = grid.l_max();
    let mut coeffs = vec![Complex64::default(); grid.coeff_count()];

    // azimuthal analysis per polar row: G(theta, m) = (2 pi / n_phi) sum_phi f e^{-i m phi}
    let mut g = vec![Complex64::default(); n_theta * (2 * l_max + 1)];
    let m_count = 2 * l_max + 1;
    for it in 0..n_theta {
        let row = &samples[it * n_phi..(it + 1) * n_phi];
        for mi in 0..m_count {
            let m = signed_order(mi, l_max) as f64;
            let mut acc = Complex64::default();
            for (j, &v) in row.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, -m * grid.phi(j));
            }
            g[it * m_count + mi] = acc * (2.0 * PI / n_phi as f64);
        }
    }

    // polar quadrature against the normalized Legendre functions
    for (it, &x) in grid.cos_theta_nodes().iter().enumerate() {
        let w = grid.theta_weights()[it];
        let table = legendre_table(l_max, x);
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                let mu = m.unsigned_abs() as usize;
                let mut pbar = table[l * (l + 1) / 2 + mu];
                if m < 0 && mu % 2 == 1 {
                    pbar = -pbar;
                }
                let mi = m.rem_euclid(m_count as i64) as usize;
                coeffs[lm_index(l, m)] += g[it * m_count + mi] * (w * pbar);
            }
        }
    }
    Ok(coeffs)
}

/// Inverse of [`sph_forward`]: synthesize shell samples from packed coefficients.
pub fn sph_synthesis(grid: &SphereGrid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() != grid.coeff_count() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} coefficients, got {}",
            grid.coeff_count(),
            coeffs.len()
        )));
    }
    let n_theta = grid.cos_theta_nodes().len();
    let n_phi = grid.phi_count();
    let l_max = grid.l_max();
    let m_count = 2 * l_max + 1;
    let mut samples = vec![Complex64::default(); n_theta * n_phi];

    for (it, &x) in grid.cos_theta_nodes().iter().enumerate() {
        let table = legendre_table(l_max, x);
        // accumulate T(theta, m) = sum_l A_l^m Pbar_l^{|m|} (with the negative-m sign)
        let mut t = vec![Complex64::default(); m_count];
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                let mu = m.unsigned_abs() as usize;
                let mut pbar = table[l * (l + 1) / 2 + mu];
                if m < 0 && mu % 2 == 1 {
                    pbar = -pbar;
                }
                let mi = m.rem_euclid(m_count as i64) as usize;
                t[mi] += coeffs[lm_index(l, m)] * pbar;
            }
        }
        for j in 0..n_phi {
            let phi = grid.phi(j);
            let mut acc = Complex64::default();
            for (mi, tv) in t.iter().enumerate() {
                let m = signed_order(mi, l_max) as f64;
                acc += tv * Complex64::from_polar(1.0, m * phi);
            }
            samples[it * n_phi + j] = acc;
        }
    }
    Ok(samples)
}

/// Transform every shell of sphere-node samples into a [`SphVolume`].
/// `shell_samples[r]` follows the layout of [`sph_forward`].
pub fn sph_forward_volume(
    grid: &Arc<SphereGrid>,
    shell_samples: &[Vec<Complex64>],
) -> Result<SphVolume> {
    if shell_samples.len() != grid.radial_count() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} shells, got {}",
            grid.radial_count(),
            shell_samples.len()
        )));
    }
    let mut vol = SphVolume::zeros(grid.clone());
    for (r, samples) in shell_samples.iter().enumerate() {
        let coeffs = sph_forward(grid, samples)?;
        for (dst, src) in vol.coeffs_mut().row_mut(r).iter_mut().zip(&coeffs) {
            *dst = *src;
        }
    }
    Ok(vol)
}

/// Wigner-d blocks `d^l(beta)` for all `l <= l_max`.
///
/// Each block is computed through the Jacobi-polynomial representation with a
/// stable upward three-term recurrence in the degree; the square-root
/// prefactor is evaluated in log space.
#[derive(Debug, Clone)]
pub struct WignerDTable {
    beta: f64,
    blocks: Vec<Array2<f64>>,
}

impl WignerDTable {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn l_max(&self) -> usize {
        self.blocks.len() - 1
    }

    /// The `(2l + 1) x (2l + 1)` block for degree `l`; entry `(m1 + l, m2 + l)`.
    pub fn block(&self, l: usize) -> &Array2<f64> {
        &self.blocks[l]
    }

    pub fn entry(&self, l: usize, m1: i64, m2: i64) -> f64 {
        let off = l as i64;
        self.blocks[l][((m1 + off) as usize, (m2 + off) as usize)]
    }

    /// Dense rearrangement in natural order: `out[i1, i2, l]` is
    /// `d^l_{m1,m2}(beta)` for the signed orders of `(i1, i2)`, zero where
    /// `l < max(|m1|, |m2|)`. Layout is `l`-fastest so that degree sums are
    /// contiguous.
    pub fn dense_natural(&self) -> ndarray::Array3<f64> {
        let l_max = self.l_max();
        let m_count = 2 * l_max + 1;
        let mut out = ndarray::Array3::<f64>::zeros((m_count, m_count, l_max + 1));
        for i1 in 0..m_count {
            let m1 = signed_order(i1, l_max);
            for i2 in 0..m_count {
                let m2 = signed_order(i2, l_max);
                let lmin = m1.abs().max(m2.abs()) as usize;
                for l in lmin..=l_max {
                    out[(i1, i2, l)] = self.entry(l, m1, m2);
                }
            }
        }
        out
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// Build the Wigner-d table at interior angle `beta` for degrees up to `l_max`.
pub fn wigner_d(beta: f64, l_max: usize) -> WignerDTable {
    let lnf = ln_factorials(2 * l_max + 2);
    let half = 0.5 * beta;
    let (sh, ch) = (half.sin(), half.cos());

    let mut blocks: Vec<Array2<f64>> = (0..=l_max)
        .map(|l| Array2::zeros((2 * l + 1, 2 * l + 1)))
        .collect();

    for m1 in -(l_max as i64)..=(l_max as i64) {
        for m2 in -(l_max as i64)..=(l_max as i64) {
            let mu = (m1 - m2).unsigned_abs() as usize;
            let nu = (m1 + m2).unsigned_abs() as usize;
            let lmin = ((mu + nu) / 2) as usize;
            let xi = if m2 >= m1 || (m1 - m2) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let angular = sh.powi(mu as i32) * ch.powi(nu as i32);

            // three-term Jacobi recurrence P_s^{(mu, nu)}(cos beta)
            let x = beta.cos();
            let (a, b) = (mu as f64, nu as f64);
            let mut p_prev = 0.0;
            let mut p = 1.0;
            for (s, l) in (lmin..=l_max).enumerate() {
                if s >= 1 {
                    let n = s as f64;
                    let next = if s == 1 {
                        0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
                    } else {
                        let c1 = 2.0 * n * (n + a + b) * (2.0 * n + a + b - 2.0);
                        let c2 = (2.0 * n + a + b - 1.0) * (a * a - b * b);
                        let c3 = (2.0 * n + a + b - 2.0)
                            * (2.0 * n + a + b - 1.0)
                            * (2.0 * n + a + b);
                        let c4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * (2.0 * n + a + b);
                        ((c2 + c3 * x) * p - c4 * p_prev) / c1
                    };
                    p_prev = p;
                    p = next;
                }
                let s_us = s;
                let log_pref = 0.5
                    * (lnf[s_us] + lnf[s_us + mu + nu] - lnf[s_us + mu] - lnf[s_us + nu]);
                let val = xi * log_pref.exp() * angular * p;
                let off = l as i64;
                blocks[l][((m1 + off) as usize, (m2 + off) as usize)] = val;
            }
        }
    }
    WignerDTable { beta, blocks }
}

/// Rotate a volume in coefficient space by ZYZ Euler angles.
pub fn rotate_sph(vol: &SphVolume, tau: EulerZYZ) -> SphVolume {
    let table = wigner_d(tau.beta, vol.grid().l_max());
    rotate_sph_with_table(vol, tau, &table)
}

/// Rotation with a precomputed Wigner table for `tau.beta`.
pub fn rotate_sph_with_table(vol: &SphVolume, tau: EulerZYZ, table: &WignerDTable) -> SphVolume {
    let grid = vol.grid().clone();
    let l_max = grid.l_max();
    debug_assert!(table.l_max() >= l_max);
    let mut out = SphVolume::zeros(grid.clone());
    let mut scratch = vec![Complex64::default(); 2 * l_max + 1];
    for r in 0..grid.radial_count() {
        for l in 0..=l_max {
            let d = table.block(l);
            let off = l as i64;
            // phase the input orders by exp(-i m2 gamma)
            for m2 in -(off)..=off {
                scratch[(m2 + off) as usize] = vol.coeff(r, l, m2)
                    * Complex64::from_polar(1.0, -(m2 as f64) * tau.gamma);
            }
            for m1 in -(off)..=off {
                let mut acc = Complex64::default();
                for m2 in -(off)..=off {
                    acc += scratch[(m2 + off) as usize]
                        * d[((m1 + off) as usize, (m2 + off) as usize)];
                }
                out.coeffs_mut()[(r, lm_index(l, m1))] =
                    acc * Complex64::from_polar(1.0, -(m1 as f64) * tau.alpha);
            }
        }
    }
    out
}
