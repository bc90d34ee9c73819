//! Radial compression of image rings.
//!
//! The alignment-quality kernel over radii is
//! `C[r, r'] = (1/N_B) sum_targets sum_{q != 0} eta_r conj(B(k_r, q)) B(k_r', q) eta_r'`
//! with `eta_r = sqrt(w_r dpsi)`; the `q = 0` (rotation-invariant) content is
//! excluded. Its dominant eigenvectors define principal rings
//! `[u^T A](q) = sum_r u_r eta_r A(k_r, q)`, and landscapes evaluated on `H`
//! principal rings cost `O(H Q)` per pair instead of `O(R Q)`.
//!
//! A translation-averaged variant of the kernel is available for targets
//! given as spherical-harmonic coefficients of a reference volume, with the
//! in-plane offsets drawn from an isotropic Gaussian of width `sigma_delta`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::align2d::{Landscape1D, LandscapePlan};
use crate::error::{Error, Result};
use crate::grids::{lm_index, PolarGrid};
use crate::polarfft::{same_grid, BesselImage};
use crate::spharm::SphVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Radial2d,
    Radial3d,
    Degree3d,
    Radial2dTranslated,
}

/// Real symmetric positive semi-definite alignment-quality kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    kind: KernelKind,
    entries: Array2<f64>,
    /// Rescaling factors baked into the kernel rows/columns; carried over to
    /// any basis extracted from it.
    scale_factors: Vec<f64>,
}

impl KernelMatrix {
    pub(crate) fn from_entries(
        kind: KernelKind,
        mut entries: Array2<f64>,
        scale_factors: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(entries.dim().0, entries.dim().1);
        debug_assert_eq!(entries.dim().0, scale_factors.len());
        // The finite sums can leave rounding-level asymmetry.
        let dim = entries.dim().0;
        for r in 0..dim {
            for c in (r + 1)..dim {
                let s = 0.5 * (entries[(r, c)] + entries[(c, r)]);
                entries[(r, c)] = s;
                entries[(c, r)] = s;
            }
        }
        Self {
            kind,
            entries,
            scale_factors,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.dim().0
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn scale_factors(&self) -> &[f64] {
        &self.scale_factors
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// Largest symmetry residual, for validation.
    pub fn asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)]).abs());
            }
        }
        worst
    }
}

/// Top eigenvectors of a kernel, orthonormal, eigenvalues descending.
///
/// The sign of each vector is fixed so its first non-negligible component is
/// positive, making test baselines deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalBasis {
    kind: KernelKind,
    /// `H x dim`, row `h` is the principal vector `u_h`.
    vectors: Array2<f64>,
    eigenvalues: Vec<f64>,
    scale_factors: Vec<f64>,
}

impl PrincipalBasis {
    pub fn rank(&self) -> usize {
        self.vectors.dim().0
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim().1
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn vector(&self, h: usize) -> ndarray::ArrayView1<'_, f64> {
        self.vectors.row(h)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn scale_factors(&self) -> &[f64] {
        &self.scale_factors
    }

    /// `u_h[r] * eta_r`, the weights actually applied to ring `r`.
    pub fn scaled_vector(&self, h: usize) -> Array1<f64> {
        Array1::from_iter(
            self.vector(h)
                .iter()
                .zip(&self.scale_factors)
                .map(|(u, s)| u * s),
        )
    }

    /// Build a basis directly from rows; eigenvalues are taken as given.
    /// Intended for synthetic bases in tests and full-rank reductions.
    pub fn from_vectors(
        kind: KernelKind,
        vectors: Array2<f64>,
        eigenvalues: Vec<f64>,
        scale_factors: Vec<f64>,
    ) -> Result<Self> {
        if vectors.dim().0 != eigenvalues.len() || vectors.dim().1 != scale_factors.len() {
            return Err(Error::DimensionMismatch(
                "basis rows must match eigenvalue count and columns the scale factors".into(),
            ));
        }
        Ok(Self {
            kind,
            vectors,
            eigenvalues,
            scale_factors,
        })
    }
}

fn eta_2d(grid: &PolarGrid) -> Vec<f64> {
    let dpsi = grid.dpsi();
    grid.w_radial().iter().map(|w| (w * dpsi).sqrt()).collect()
}

/// Unnormalized kernel accumulation over a batch of targets (real part of the
/// `q != 0` ring products, eta-rescaled). Exposed so callers can parallelize
/// over target chunks and combine partial sums deterministically.
pub fn kernel_2d_partial(targets: &[BesselImage]) -> Result<Array2<f64>> {
    let first = targets.first().ok_or(Error::EmptyInput("kernel targets"))?;
    let grid = first.grid();
    let r_count = grid.radial_count();
    let q_count = grid.angular_count();
    let eta = eta_2d(grid);
    let mut sum = Array2::<f64>::zeros((r_count, r_count));
    for t in targets {
        if !same_grid(t.grid(), grid) {
            return Err(Error::GridMismatch);
        }
        for r in 0..r_count {
            let row_r = t.coeffs().row(r);
            let row_r = row_r.to_slice().unwrap();
            for rp in r..r_count {
                let row_rp = t.coeffs().row(rp);
                let row_rp = row_rp.to_slice().unwrap();
                // natural index 0 is the only q = 0 coefficient
                let mut acc = 0.0;
                for j in 1..q_count {
                    let a = row_r[j];
                    let b = row_rp[j];
                    acc += a.re * b.re + a.im * b.im;
                }
                let v = acc * eta[r] * eta[rp];
                sum[(r, rp)] += v;
                if rp != r {
                    sum[(rp, r)] += v;
                }
            }
        }
    }
    Ok(sum)
}

/// Target-averaged radial kernel of a group of targets.
pub fn kernel_2d(targets: &[BesselImage]) -> Result<KernelMatrix> {
    let sum = kernel_2d_partial(targets)?;
    let grid = targets[0].grid();
    finalize_kernel_2d(sum, targets.len(), grid)
}

/// Finish a kernel from (possibly chunk-wise) partial sums.
pub fn finalize_kernel_2d(
    sum: Array2<f64>,
    target_count: usize,
    grid: &PolarGrid,
) -> Result<KernelMatrix> {
    if target_count == 0 {
        return Err(Error::EmptyInput("kernel targets"));
    }
    let entries = sum / target_count as f64;
    Ok(KernelMatrix::from_entries(
        KernelKind::Radial2d,
        entries,
        eta_2d(grid),
    ))
}

/// Translation-averaged Gaussian factor `exp(-sigma^2 (k - k')^2 / 2)`.
fn e_plus(k1: f64, k2: f64, sigma_delta: f64) -> f64 {
    let d = (k1 - k2) * sigma_delta;
    (-0.5 * d * d).exp()
}

/// `E^-(k) = ktilde sqrt(pi/2) e^{-ktilde^2} (I_{-1/2} - I_{+1/2})(ktilde^2)`
/// with `ktilde = k sigma_delta / 2`, evaluated through the exponentially
/// scaled half-integer modified Bessel functions
/// `e^{-x} I_{-1/2}(x) = sqrt(2/(pi x)) (1 + e^{-2x}) / 2` and
/// `e^{-x} I_{+1/2}(x) = sqrt(2/(pi x)) (1 - e^{-2x}) / 2`.
pub fn e_minus(k: f64, sigma_delta: f64) -> f64 {
    let kt = k * sigma_delta / 2.0;
    let x = kt * kt;
    if x == 0.0 {
        return 1.0;
    }
    let pref = (2.0 / (PI * x)).sqrt();
    let em2x = (-2.0 * x).exp();
    let scaled_minus_half = pref * (1.0 + em2x) / 2.0;
    let scaled_plus_half = pref * (1.0 - em2x) / 2.0;
    kt * (PI / 2.0).sqrt() * (scaled_minus_half - scaled_plus_half)
}

/// Translation-averaged radial kernel for a target given as spherical-harmonic
/// coefficients of a reference volume whose viewing angles are uniform over
/// SO(3); in-plane offsets are isotropic Gaussian with deviation `sigma_delta`.
pub fn kernel_2d_translated(target: &SphVolume, sigma_delta: f64) -> Result<KernelMatrix> {
    if !(sigma_delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_delta must be >= 0, got {sigma_delta}"
        )));
    }
    let grid = target.grid();
    let r_count = grid.radial_count();
    let l_max = grid.l_max();
    let k = grid.k_nodes();

    // sum_{l,m} conj(B_l^m(k_r)) B_l^m(k_r') and the bare (0,0) product
    let mut full = Array2::<Complex64>::zeros((r_count, r_count));
    for r in 0..r_count {
        for rp in r..r_count {
            let mut acc = Complex64::default();
            for l in 0..=l_max {
                for m in -(l as i64)..=(l as i64) {
                    let idx = lm_index(l, m);
                    acc += target.coeffs()[(r, idx)].conj() * target.coeffs()[(rp, idx)];
                }
            }
            full[(r, rp)] = acc;
            full[(rp, r)] = acc.conj();
        }
    }

    let mut entries = Array2::<f64>::zeros((r_count, r_count));
    for r in 0..r_count {
        let em_r = e_minus(k[r], sigma_delta);
        for rp in 0..r_count {
            let dc = target.coeffs()[(r, 0)].conj() * target.coeffs()[(rp, 0)];
            let v = full[(r, rp)].re * e_plus(k[r], k[rp], sigma_delta)
                - dc.re * em_r * e_minus(k[rp], sigma_delta);
            entries[(r, rp)] = v;
        }
    }
    Ok(KernelMatrix::from_entries(
        KernelKind::Radial2dTranslated,
        entries,
        vec![1.0; r_count],
    ))
}

/// Top-`rank` eigenpairs of a kernel by symmetric eigendecomposition.
pub fn principal_basis(kern: &KernelMatrix, rank: usize) -> Result<PrincipalBasis> {
    let dim = kern.dim();
    if rank == 0 || rank > dim {
        return Err(Error::RankOutOfRange { rank, max: dim });
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| kern.entries()[(r, c)]);
    let eigen = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    // Stable descending sort keeps the solver's order within degenerate groups.
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
    });

    let mut vectors = Array2::<f64>::zeros((rank, dim));
    let mut eigenvalues = Vec::with_capacity(rank);
    for (h, &src) in order.iter().take(rank).enumerate() {
        eigenvalues.push(eigen.eigenvalues[src]);
        let col = eigen.eigenvectors.column(src);
        let peak = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-12 * peak.max(1e-300))
            .map_or(1.0, |v| if *v < 0.0 { -1.0 } else { 1.0 });
        for (dst, v) in vectors.row_mut(h).iter_mut().zip(col.iter()) {
            *dst = v * flip;
        }
    }
    Ok(PrincipalBasis {
        kind: kern.kind(),
        vectors,
        eigenvalues,
        scale_factors: kern.scale_factors().to_vec(),
    })
}

/// An image projected onto principal rings: row `h` holds
/// `[u_h^T A](q) = sum_r u_h[r] eta_r A(k_r, q)`.
#[derive(Debug, Clone)]
pub struct CompressedImage {
    grid: Arc<PolarGrid>,
    basis: Arc<PrincipalBasis>,
    coeffs: Array2<Complex64>,
}

impl CompressedImage {
    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn basis(&self) -> &Arc<PrincipalBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn rank(&self) -> usize {
        self.coeffs.dim().0
    }
}

fn same_basis(a: &Arc<PrincipalBasis>, b: &Arc<PrincipalBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Project an image onto the principal rings of `basis`; `O(R Q H)`.
pub fn compress_image(b: &BesselImage, basis: &Arc<PrincipalBasis>) -> Result<CompressedImage> {
    let grid = b.grid();
    if basis.dim() != grid.radial_count() {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} does not match radial count {}",
            basis.dim(),
            grid.radial_count()
        )));
    }
    let q_count = grid.angular_count();
    let mut coeffs = Array2::<Complex64>::zeros((basis.rank(), q_count));
    for h in 0..basis.rank() {
        let su = basis.scaled_vector(h);
        let mut out = coeffs.row_mut(h);
        for (r, &weight) in su.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let row = b.coeffs().row(r);
            let row = row.to_slice().unwrap();
            for (acc, c) in out.iter_mut().zip(row) {
                *acc += c * weight;
            }
        }
    }
    Ok(CompressedImage {
        grid: grid.clone(),
        basis: basis.clone(),
        coeffs,
    })
}

/// Step 1 of the compressed landscape:
/// `Xhat(q) = (2 pi / dpsi) sum_h conj([u_h^T A](q)) [u_h^T B](q)`.
///
/// The `1 / dpsi` compensates the `eta_r^2 = w_r dpsi` carried by the
/// principal rings, so a complete orthonormal basis reproduces the full
/// landscape exactly.
pub fn accumulate_compressed(plan: &mut LandscapePlan, a: &CompressedImage, b: &CompressedImage) {
    let scale = 2.0 * PI / a.grid.dpsi();
    plan.xhat.fill(Complex64::default());
    for h in 0..a.rank() {
        let ra = a.coeffs.row(h);
        let rb = b.coeffs.row(h);
        let (ra, rb) = (ra.to_slice().unwrap(), rb.to_slice().unwrap());
        for (acc, (ca, cb)) in plan.xhat.iter_mut().zip(ra.iter().zip(rb)) {
            *acc += ca.conj() * cb;
        }
    }
    for acc in &mut plan.xhat {
        *acc *= scale;
    }
}

/// Compressed inner-product landscape; `O(H Q + Q_out log Q_out)` per pair.
pub fn landscape_2d_compressed(
    a: &CompressedImage,
    b: &CompressedImage,
    q_out: usize,
) -> Result<Landscape1D> {
    if !same_basis(&a.basis, &b.basis) {
        return Err(Error::BasisMismatch);
    }
    let mut plan = LandscapePlan::new(a.grid.angular_count(), q_out)?;
    accumulate_compressed(&mut plan, a, b);
    Ok(plan.finish(&a.grid))
}
