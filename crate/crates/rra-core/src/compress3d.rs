//! Radial and degree compression for volumes.
//!
//! Two kernels drive the compression: the radial kernel
//! `C[r, r'] = sum_{l >= 1} sum_m sqrt(w_r) conj(B_l^m(k_r)) B_l^m(k_r') sqrt(w_r')`
//! and the degree kernel
//! `D[l, l'] = sum_r w_r sum_m conj(B_l^m(k_r)) B_l'^m(k_r)` for `l, l' >= 1`
//! (row and column 0 vanish; rotation-invariant content carries no alignment
//! information). Principal shells `[u^T A]_l^m = sum_r u_r sqrt(w_r) A_l^m(k_r)`
//! and principal degrees `[v^T .]` shrink the landscape steps 1 and 2 from
//! `R` and `L + 1` terms down to `H_C` and `H_D`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::align3d::{fft2_forward, BetaTables, Landscape3D};
use crate::compress2d::{KernelKind, KernelMatrix, PrincipalBasis};
use crate::error::{Error, Result};
use crate::grids::{lm_index, SphereGrid};
use crate::spharm::{signed_order, SphVolume, WignerDTable};

/// Radial alignment-quality kernel of a volume; degree 0 is excluded.
pub fn kernel_3d_radial(b: &SphVolume) -> KernelMatrix {
    let grid = b.grid();
    let r_count = grid.radial_count();
    let eta: Vec<f64> = grid.w_radial().iter().map(|w| w.sqrt()).collect();
    let mut entries = Array2::<f64>::zeros((r_count, r_count));
    let dc = 1; // packed index of (0, 0) is 0; degrees l >= 1 start at index 1
    for r in 0..r_count {
        let row_r = b.coeffs().row(r);
        for rp in r..r_count {
            let row_rp = b.coeffs().row(rp);
            let mut acc = 0.0;
            for idx in dc..grid.coeff_count() {
                let x = row_r[idx];
                let y = row_rp[idx];
                acc += x.re * y.re + x.im * y.im;
            }
            let v = acc * eta[r] * eta[rp];
            entries[(r, rp)] = v;
            entries[(rp, r)] = v;
        }
    }
    KernelMatrix::from_entries(KernelKind::Radial3d, entries, eta)
}

/// Degree alignment-quality kernel of a volume; row/column 0 are zero and the
/// order sum runs over `|m| <= min(l, l')` (the remaining terms vanish since
/// coefficients with `l < |m|` do not exist).
pub fn kernel_3d_degree(b: &SphVolume) -> KernelMatrix {
    let grid = b.grid();
    let l_max = grid.l_max();
    let mut entries = Array2::<f64>::zeros((l_max + 1, l_max + 1));
    for l in 1..=l_max {
        for lp in l..=l_max {
            let m_lim = l.min(lp) as i64;
            let mut acc = 0.0;
            for (r, &w) in grid.w_radial().iter().enumerate() {
                let row = b.coeffs().row(r);
                let mut shell = 0.0;
                for m in -m_lim..=m_lim {
                    let x = row[lm_index(l, m)];
                    let y = row[lm_index(lp, m)];
                    shell += x.re * y.re + x.im * y.im;
                }
                acc += w * shell;
            }
            entries[(l, lp)] = acc;
            entries[(lp, l)] = acc;
        }
    }
    KernelMatrix::from_entries(KernelKind::Degree3d, entries, vec![1.0; l_max + 1])
}

/// A volume projected onto principal shells: row `h` holds the packed
/// coefficients of `[u_h^T A]_l^m = sum_r u_h[r] sqrt(w_r) A_l^m(k_r)`.
#[derive(Debug, Clone)]
pub struct CompressedVolume {
    grid: Arc<SphereGrid>,
    basis: Arc<PrincipalBasis>,
    coeffs: Array2<Complex64>,
}

impl CompressedVolume {
    pub fn grid(&self) -> &Arc<SphereGrid> {
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

/// Project a volume onto principal shells; `O(R (L+1)^2 H_C)`.
pub fn compress_volume(a: &SphVolume, basis: &Arc<PrincipalBasis>) -> Result<CompressedVolume> {
    let grid = a.grid();
    if basis.dim() != grid.radial_count() {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} does not match radial count {}",
            basis.dim(),
            grid.radial_count()
        )));
    }
    let mut coeffs = Array2::<Complex64>::zeros((basis.rank(), grid.coeff_count()));
    for h in 0..basis.rank() {
        let su = basis.scaled_vector(h);
        let mut out = coeffs.row_mut(h);
        for (r, &weight) in su.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let row = a.coeffs().row(r);
            for (acc, c) in out.iter_mut().zip(row.iter()) {
                *acc += c * weight;
            }
        }
    }
    Ok(CompressedVolume {
        grid: grid.clone(),
        basis: basis.clone(),
        coeffs,
    })
}

/// Degree-compressed Wigner tables `[v_j^T d]_{m1,m2}(beta) = sum_l v_j[l] d^l_{m1,m2}(beta)`
/// in dense natural order, one `M x M` matrix per retained degree vector.
pub fn compress_wigner(table: &WignerDTable, v_basis: &PrincipalBasis) -> Result<Vec<Array2<f64>>> {
    let l_max = table.l_max();
    if v_basis.dim() != l_max + 1 {
        return Err(Error::DimensionMismatch(format!(
            "degree basis dimension {} does not match degree count {}",
            v_basis.dim(),
            l_max + 1
        )));
    }
    let m_count = 2 * l_max + 1;
    let mut out = Vec::with_capacity(v_basis.rank());
    for j in 0..v_basis.rank() {
        let v = v_basis.vector(j);
        let mut m = Array2::<f64>::zeros((m_count, m_count));
        for i1 in 0..m_count {
            let m1 = signed_order(i1, l_max);
            for i2 in 0..m_count {
                let m2 = signed_order(i2, l_max);
                let lmin = m1.abs().max(m2.abs()) as usize;
                let mut acc = 0.0;
                for l in lmin..=l_max {
                    acc += v[l] * table.entry(l, m1, m2);
                }
                m[(i1, i2)] = acc;
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Per-beta degree-compressed Wigner tables, the compressed analog of
/// [`BetaTables`]; precomputed once and shared across pairs.
pub struct CompressedBetaTables {
    betas: Vec<f64>,
    tables: Vec<Vec<Array2<f64>>>,
    rank: usize,
}

impl CompressedBetaTables {
    pub fn new(betas: &[f64], l_max: usize, v_basis: &PrincipalBasis) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::EmptyInput("beta grid"));
        }
        let tables = betas
            .iter()
            .map(|&b| compress_wigner(&crate::spharm::wigner_d(b, l_max), v_basis))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            betas: betas.to_vec(),
            tables,
            rank: v_basis.rank(),
        })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tables(&self, i: usize) -> &[Array2<f64>] {
        &self.tables[i]
    }
}

/// Step 1 over principal shells, dense `(M, M, L + 1)`.
pub fn step1_compressed(a: &CompressedVolume, b: &CompressedVolume) -> Array3<Complex64> {
    let grid = a.grid();
    let l_max = grid.l_max();
    let m_count = grid.order_count();
    let mut xt = Array3::<Complex64>::zeros((m_count, m_count, l_max + 1));
    for h in 0..a.rank() {
        let ra = a.coeffs().row(h);
        let rb = b.coeffs().row(h);
        for l in 0..=l_max {
            let off = l as i64;
            for m1 in -off..=off {
                let ca = ra[lm_index(l, m1)].conj();
                let i1 = m1.rem_euclid(m_count as i64) as usize;
                for m2 in -off..=off {
                    let i2 = m2.rem_euclid(m_count as i64) as usize;
                    xt[(i1, i2, l)] += ca * rb[lm_index(l, m2)];
                }
            }
        }
    }
    xt
}

/// Step 1b: project the degree axis onto the principal degrees.
pub fn project_degrees(xt: &Array3<Complex64>, v_basis: &PrincipalBasis) -> Vec<Array2<Complex64>> {
    let (m_count, _, lp1) = xt.dim();
    let xt_flat = xt.as_slice().unwrap();
    (0..v_basis.rank())
        .map(|j| {
            let v = v_basis.vector(j);
            let mut out = Array2::<Complex64>::zeros((m_count, m_count));
            for i1 in 0..m_count {
                for i2 in 0..m_count {
                    let base = (i1 * m_count + i2) * lp1;
                    let mut acc = Complex64::default();
                    for l in 0..lp1 {
                        acc += xt_flat[base + l] * v[l];
                    }
                    out[(i1, i2)] = acc;
                }
            }
            out
        })
        .collect()
}

/// Compressed three-step landscape: principal shells for the radial sum,
/// principal degrees for the Wigner sum, FFT over the orders.
pub fn landscape_3d_compressed(
    a: &CompressedVolume,
    b: &CompressedVolume,
    v_basis: &PrincipalBasis,
    betas: &[f64],
) -> Result<Landscape3D> {
    let tables = CompressedBetaTables::new(betas, a.grid().l_max(), v_basis)?;
    landscape_3d_compressed_run(a, b, v_basis, &tables)
}

/// Compressed landscape with precomputed tables (`tables` must have been
/// built from `v_basis`).
pub fn landscape_3d_compressed_run(
    a: &CompressedVolume,
    b: &CompressedVolume,
    v_basis: &PrincipalBasis,
    tables: &CompressedBetaTables,
) -> Result<Landscape3D> {
    if !same_basis(a.basis(), b.basis()) {
        return Err(Error::BasisMismatch);
    }
    if v_basis.rank() != tables.rank() {
        return Err(Error::DimensionMismatch(
            "degree tables were built for a different degree basis rank".into(),
        ));
    }
    if v_basis.dim() != a.grid().l_max() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "degree basis dimension {} does not match degree count {}",
            v_basis.dim(),
            a.grid().l_max() + 1
        )));
    }
    let m_count = a.grid().order_count();
    let xt = step1_compressed(a, b);
    let vxt = project_degrees(&xt, v_basis);
    let mut values = Array3::<f64>::zeros((tables.betas().len(), m_count, m_count));
    let mut xhat = Array2::<Complex64>::zeros((m_count, m_count));
    for ib in 0..tables.betas().len() {
        xhat.fill(Complex64::default());
        for (j, vd) in tables.tables(ib).iter().enumerate() {
            let vx = &vxt[j];
            for ((acc, &d), &x) in xhat.iter_mut().zip(vd.iter()).zip(vx.iter()) {
                *acc += x * d;
            }
        }
        fft2_forward(&mut xhat);
        let mut slice = values.index_axis_mut(ndarray::Axis(0), ib);
        for (dst, src) in slice.iter_mut().zip(xhat.iter()) {
            *dst = src.re;
        }
    }
    Landscape3D::from_values(tables.betas().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align3d::{brute_force_landscape_3d, landscape_3d};
    use crate::compress2d::principal_basis;
    use crate::grids::{build_sphere_grid, gauss_legendre};
    use crate::spharm::{rotate_sph, wigner_d, EulerZYZ};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let (mut num, mut va, mut vb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        num / (va.sqrt() * vb.sqrt())
    }

    /// Random volume with decaying shell/degree spectra.
    fn smooth_volume(grid: &Arc<SphereGrid>, seed: u64) -> SphVolume {
        let mut vol = SphVolume::random(grid, seed);
        let l_max = grid.l_max();
        let k_max = grid.k_max();
        for r in 0..grid.radial_count() {
            let k = grid.k_nodes()[r] / k_max;
            for l in 0..=l_max {
                let decay = (-2.0 * (l as f64 / (l_max as f64 + 1.0)).powi(2)
                    - 1.0 * k * k)
                    .exp();
                for m in -(l as i64)..=(l as i64) {
                    vol.coeffs_mut()[(r, lm_index(l, m))] *= decay;
                }
            }
        }
        vol
    }

    #[test]
    fn radial_kernel_ignores_isotropic_content() {
        let grid = build_sphere_grid(2.0, 4, 3).unwrap();
        let mut vol = SphVolume::zeros(grid.clone());
        for r in 0..4 {
            vol.coeffs_mut()[(r, 0)] = Complex64::new(r as f64 + 1.0, -0.5);
        }
        let kern = kernel_3d_radial(&vol);
        assert!(kern.entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn radial_kernel_is_rotation_invariant() {
        let grid = build_sphere_grid(2.0, 4, 4).unwrap();
        let vol = SphVolume::random(&grid, 3);
        let base = kernel_3d_radial(&vol);
        let rot = kernel_3d_radial(&rotate_sph(&vol, EulerZYZ::new(0.7, 1.9, -0.4)));
        let scale = base.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in rot.entries().iter().zip(base.entries()) {
            assert!((x - y).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn radial_kernel_matches_so3_double_integral_oracle() {
        // Literal double integral of the defining objective over SO(3) x SO(3),
        // discretized with uniform alpha/gamma grids and Gauss-Legendre in
        // cos(beta); the double sum over rotation pairs is evaluated through
        // its exact single-sum refactoring.
        let grid = build_sphere_grid(2.0, 4, 3).unwrap();
        let vol = SphVolume::random(&grid, 9);
        let kern = kernel_3d_radial(&vol);

        let n_ang = 8usize;
        let n_beta = 24usize;
        let (xb, wb) = gauss_legendre(n_beta);
        let r_count = grid.radial_count();
        let sqrt_w: Vec<f64> = grid.w_radial().iter().map(|w| w.sqrt()).collect();
        let coeff_count = grid.coeff_count();

        let mut accum = Array2::<f64>::zeros((r_count, r_count));
        let mut mean: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); coeff_count]; r_count];
        let mut total_weight = 0.0;
        for ib in 0..n_beta {
            let beta = xb[ib].acos();
            let table = wigner_d(beta, grid.l_max());
            for ia in 0..n_ang {
                for ig in 0..n_ang {
                    let tau = EulerZYZ::new(
                        2.0 * PI * ig as f64 / n_ang as f64,
                        beta,
                        2.0 * PI * ia as f64 / n_ang as f64,
                    );
                    let w = wb[ib] / (n_ang * n_ang) as f64;
                    total_weight += w;
                    let rot = rotate_sph_with_table(&vol, tau, &table);
                    for r in 0..r_count {
                        let row_r = rot.coeffs().row(r);
                        for rp in r..r_count {
                            let row_rp = rot.coeffs().row(rp);
                            let mut acc = 0.0;
                            for (x, y) in row_r.iter().zip(row_rp.iter()) {
                                acc += x.re * y.re + x.im * y.im;
                            }
                            accum[(r, rp)] += w * acc * sqrt_w[r] * sqrt_w[rp];
                        }
                    }
                    for r in 0..r_count {
                        for (mc, c) in mean[r].iter_mut().zip(rot.coeffs().row(r).iter()) {
                            *mc += c * w;
                        }
                    }
                }
            }
        }
        let mut oracle = Array2::<f64>::zeros((r_count, r_count));
        for r in 0..r_count {
            for rp in r..r_count {
                let mut cross = 0.0;
                for (x, y) in mean[r].iter().zip(&mean[rp]) {
                    cross += x.re * y.re + x.im * y.im;
                }
                let v = 2.0 * total_weight * accum[(r, rp)]
                    - 2.0 * cross * sqrt_w[r] * sqrt_w[rp];
                oracle[(r, rp)] = v;
                oracle[(rp, r)] = v;
            }
        }
        let corr = pearson(
            kern.entries().as_slice().unwrap(),
            oracle.as_slice().unwrap(),
        );
        assert!(corr >= 0.999, "correlation vs SO(3) oracle: {corr}");
    }

    #[test]
    fn degree_kernel_zero_row_and_column() {
        let grid = build_sphere_grid(2.0, 3, 4).unwrap();
        let vol = SphVolume::random(&grid, 5);
        let kern = kernel_3d_degree(&vol);
        for l in 0..=4usize {
            assert_eq!(kern.entries()[(0, l)], 0.0);
            assert_eq!(kern.entries()[(l, 0)], 0.0);
        }
    }

    #[test]
    fn degree_kernel_single_degree_support() {
        let grid = build_sphere_grid(2.0, 3, 4).unwrap();
        let mut vol = SphVolume::zeros(grid.clone());
        let l0 = 2usize;
        for r in 0..3 {
            for m in -(l0 as i64)..=(l0 as i64) {
                vol.coeffs_mut()[(r, lm_index(l0, m))] =
                    Complex64::new(0.3 * r as f64 + 1.0, m as f64);
            }
        }
        let kern = kernel_3d_degree(&vol);
        for l in 0..=4usize {
            for lp in 0..=4usize {
                if (l, lp) == (l0, l0) {
                    assert!(kern.entries()[(l, lp)] > 0.0);
                } else {
                    assert_eq!(kern.entries()[(l, lp)], 0.0);
                }
            }
        }
    }

    #[test]
    fn degree_kernel_diagonal_is_rotation_invariant() {
        let grid = build_sphere_grid(2.0, 3, 5).unwrap();
        let vol = SphVolume::random(&grid, 7);
        let base = kernel_3d_degree(&vol);
        let rot = kernel_3d_degree(&rotate_sph(&vol, EulerZYZ::new(-0.9, 0.6, 2.2)));
        for l in 0..=5usize {
            let scale = base.entries()[(l, l)].abs().max(1.0);
            assert!((base.entries()[(l, l)] - rot.entries()[(l, l)]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn unit_vector_compression_extracts_scaled_shell() {
        let grid = build_sphere_grid(2.0, 4, 3).unwrap();
        let vol = SphVolume::random(&grid, 11);
        let shell = 2usize;
        let mut vectors = Array2::<f64>::zeros((1, 4));
        vectors[(0, shell)] = 1.0;
        let eta: Vec<f64> = grid.w_radial().iter().map(|w| w.sqrt()).collect();
        let basis = Arc::new(
            PrincipalBasis::from_vectors(KernelKind::Radial3d, vectors, vec![1.0], eta.clone())
                .unwrap(),
        );
        let c = compress_volume(&vol, &basis).unwrap();
        for idx in 0..grid.coeff_count() {
            let expect = vol.coeffs()[(shell, idx)] * eta[shell];
            assert!((c.coeffs()[(0, idx)] - expect).norm() <= 1e-14);
        }
        // zero volume compresses to zero
        let z = compress_volume(&SphVolume::zeros(grid.clone()), &basis).unwrap();
        assert!(z.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn full_rank_compression_is_invertible() {
        let grid = build_sphere_grid(2.0, 4, 3).unwrap();
        let vol = SphVolume::random(&grid, 13);
        let kern = kernel_3d_radial(&vol);
        let basis = Arc::new(principal_basis(&kern, 4).unwrap());
        let c = compress_volume(&vol, &basis).unwrap();

        // Reconstruct shells: solve (U * diag(eta)) x = principal column.
        let r_count = 4usize;
        let mut m = nalgebra::DMatrix::<f64>::zeros(r_count, r_count);
        for h in 0..r_count {
            for r in 0..r_count {
                m[(h, r)] = basis.vectors()[(h, r)] * basis.scale_factors()[r];
            }
        }
        let lu = m.lu();
        for idx in 0..grid.coeff_count() {
            let rhs_re =
                nalgebra::DVector::from_iterator(r_count, (0..r_count).map(|h| c.coeffs()[(h, idx)].re));
            let rhs_im =
                nalgebra::DVector::from_iterator(r_count, (0..r_count).map(|h| c.coeffs()[(h, idx)].im));
            let x_re = lu.solve(&rhs_re).unwrap();
            let x_im = lu.solve(&rhs_im).unwrap();
            for r in 0..r_count {
                let got = Complex64::new(x_re[r], x_im[r]);
                let expect = vol.coeffs()[(r, idx)];
                assert!((got - expect).norm() <= 1e-11 * expect.norm().max(1.0));
            }
        }
    }

    #[test]
    fn compress_wigner_examples() {
        let l_max = 4usize;
        let m_count = 2 * l_max + 1;
        let beta = 1.3;
        let table = wigner_d(beta, l_max);

        // v = e_l picks out the single block, zero-padded.
        let l_pick = 2usize;
        let mut vectors = Array2::<f64>::zeros((1, l_max + 1));
        vectors[(0, l_pick)] = 1.0;
        let basis = PrincipalBasis::from_vectors(
            KernelKind::Degree3d,
            vectors,
            vec![1.0],
            vec![1.0; l_max + 1],
        )
        .unwrap();
        let vd = compress_wigner(&table, &basis).unwrap();
        for i1 in 0..m_count {
            for i2 in 0..m_count {
                let m1 = signed_order(i1, l_max);
                let m2 = signed_order(i2, l_max);
                let expect = if m1.abs().max(m2.abs()) <= l_pick as i64 {
                    table.entry(l_pick, m1, m2)
                } else {
                    0.0
                };
                assert_eq!(vd[0][(i1, i2)], expect);
            }
        }

        // beta = 0: diagonal sum of v over the supported degrees.
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..=l_max).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let basis = PrincipalBasis::from_vectors(
            KernelKind::Degree3d,
            Array2::from_shape_vec((1, l_max + 1), v.clone()).unwrap(),
            vec![1.0],
            vec![1.0; l_max + 1],
        )
        .unwrap();
        let vd0 = compress_wigner(&wigner_d(0.0, l_max), &basis).unwrap();
        for i1 in 0..m_count {
            for i2 in 0..m_count {
                let m1 = signed_order(i1, l_max);
                let m2 = signed_order(i2, l_max);
                if i1 == i2 {
                    let expect: f64 = (m1.unsigned_abs() as usize..=l_max)
                        .map(|l| v[l])
                        .sum();
                    assert_relative_eq!(vd0[0][(i1, i2)], expect, epsilon = 1e-12);
                } else if m1.abs().max(m2.abs()) <= l_max as i64 {
                    assert!(vd0[0][(i1, i2)].abs() <= 1e-12);
                }
            }
        }

        // random v: matches the direct degree sum at sampled entries
        let vd = compress_wigner(&table, &basis).unwrap();
        for _ in 0..5 {
            let i1 = rng.gen_range(0..m_count);
            let i2 = rng.gen_range(0..m_count);
            let m1 = signed_order(i1, l_max);
            let m2 = signed_order(i2, l_max);
            let lmin = m1.abs().max(m2.abs()) as usize;
            let direct: f64 = (lmin..=l_max).map(|l| v[l] * table.entry(l, m1, m2)).sum();
            assert!((vd[0][(i1, i2)] - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn full_rank_reduction_matches_full_landscape() {
        let grid = build_sphere_grid(2.0, 4, 3).unwrap();
        let a = SphVolume::random(&grid, 17);
        let b = SphVolume::random(&grid, 19);
        let betas = vec![-2.0, 0.4, 1.7];
        let full = landscape_3d(&a, &b, &betas).unwrap();

        // Artificial complete bases: identity over shells (with the radial
        // rescaling) and identity over degrees including l = 0.
        let r_count = grid.radial_count();
        let eta: Vec<f64> = grid.w_radial().iter().map(|w| w.sqrt()).collect();
        let u_basis = Arc::new(
            PrincipalBasis::from_vectors(
                KernelKind::Radial3d,
                Array2::eye(r_count),
                vec![1.0; r_count],
                eta,
            )
            .unwrap(),
        );
        let v_basis = PrincipalBasis::from_vectors(
            KernelKind::Degree3d,
            Array2::eye(grid.l_max() + 1),
            vec![1.0; grid.l_max() + 1],
            vec![1.0; grid.l_max() + 1],
        )
        .unwrap();

        let ca = compress_volume(&a, &u_basis).unwrap();
        let cb = compress_volume(&b, &u_basis).unwrap();
        let comp = landscape_3d_compressed(&ca, &cb, &v_basis, &betas).unwrap();
        let scale = full.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in comp.values().iter().zip(full.values()) {
            assert!((x - y).abs() <= 1e-9 * scale);
        }

        // Bases extracted from the kernels at full rank also agree with the
        // oracle path up to the same tolerance.
        let cu = Arc::new(principal_basis(&kernel_3d_radial(&b), r_count).unwrap());
        let cv = principal_basis(&kernel_3d_degree(&b), grid.l_max() + 1).unwrap();
        let ca = compress_volume(&a, &cu).unwrap();
        let cb = compress_volume(&b, &cu).unwrap();
        let comp = landscape_3d_compressed(&ca, &cb, &cv, &betas).unwrap();
        let slow = brute_force_landscape_3d(&a, &b, &betas).unwrap();
        for (x, y) in comp.values().iter().zip(slow.values()) {
            assert!((x - y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn mean_subtracted_error_nonincreasing_in_rank() {
        let grid = build_sphere_grid(2.0, 8, 6).unwrap();
        let target = smooth_volume(&grid, 23);
        let probe = rotate_sph(&smooth_volume(&grid, 29), EulerZYZ::new(0.5, 1.1, -0.7));
        let betas = default_betas(&grid);
        let full = landscape_3d(&probe, &target, &betas).unwrap();
        let full_mean = full.values().mean().unwrap();

        let kern_c = kernel_3d_radial(&target);
        let kern_d = kernel_3d_degree(&target);
        let mut last = f64::INFINITY;
        for rank in [1usize, 2, 4, 7] {
            let h_d = rank.min(grid.l_max() + 1);
            let u = Arc::new(principal_basis(&kern_c, rank.min(8)).unwrap());
            let v = principal_basis(&kern_d, h_d).unwrap();
            let ca = compress_volume(&probe, &u).unwrap();
            let cb = compress_volume(&target, &u).unwrap();
            let comp = landscape_3d_compressed(&ca, &cb, &v, &betas).unwrap();
            let comp_mean = comp.values().mean().unwrap();
            let mut err = 0.0;
            for (x, y) in comp.values().iter().zip(full.values()) {
                let d = (x - comp_mean) - (y - full_mean);
                err += d * d;
            }
            let err = err.sqrt();
            assert!(
                err <= last + 1e-9,
                "mean-subtracted error grew from {last} to {err} at rank {rank}"
            );
            last = err;
        }
    }

    fn default_betas(grid: &Arc<SphereGrid>) -> Vec<f64> {
        crate::align3d::default_beta_grid(grid.order_count())
    }
}
