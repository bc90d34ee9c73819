//! Inner-product landscapes over SO(3) for volumes.
//!
//! `X(tau) = <a, R_tau b>` on the Euler grid
//! `tau = (gamma_m2', beta, alpha_m1')` with `alpha, gamma` uniform over `M`
//! angles and `beta` over a caller-supplied list:
//!
//! ```text
//! [Step 1]  Xt(m1, m2; l)    = sum_r w_r conj(A_l^m1(k_r)) B_l^m2(k_r)
//! [Step 2]  Xhat(m1, m2; b)  = sum_l d^l_{m1,m2}(beta) Xt(m1, m2; l)
//! [Step 3]  X(tau)           = 2-D FFT of Xhat over (m1, m2)
//! ```
//!
//! Step 1 is beta-independent and computed once per pair; steps 2-3 repeat
//! per beta. `Xt` is stored dense over `(m1, m2, l)` with entries below the
//! degree support left at zero.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grids::{lm_index, SphereGrid};
use crate::polarfft::plan_fft;
use crate::spharm::{
    rotate_sph_with_table, same_sphere_grid, signed_order, wigner_d, EulerZYZ, SphVolume,
};

/// Inner products over the Euler grid; `values[(i_beta, i_alpha, i_gamma)]`.
#[derive(Debug, Clone)]
pub struct Landscape3D {
    betas: Vec<f64>,
    order_count: usize,
    values: Array3<f64>,
    argmax: (usize, usize, usize),
    max_value: f64,
}

impl Landscape3D {
    pub fn from_values(betas: Vec<f64>, values: Array3<f64>) -> Result<Self> {
        let (nb, na, ng) = values.dim();
        if betas.len() != nb || na != ng || na == 0 {
            return Err(Error::DimensionMismatch(format!(
                "landscape dims ({nb}, {na}, {ng}) inconsistent with {} beta values",
                betas.len()
            )));
        }
        let mut argmax = (0, 0, 0);
        let mut max_value = f64::NEG_INFINITY;
        for (idx, &v) in values.indexed_iter() {
            if v > max_value {
                max_value = v;
                argmax = idx;
            }
        }
        Ok(Self {
            betas,
            order_count: na,
            values,
            argmax,
            max_value,
        })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn order_count(&self) -> usize {
        self.order_count
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn argmax_indices(&self) -> (usize, usize, usize) {
        self.argmax
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    /// Euler angles `(gamma, beta, alpha)` at the grid argmax.
    pub fn argmax_euler(&self) -> EulerZYZ {
        let (ib, ia, ig) = self.argmax;
        EulerZYZ::new(
            2.0 * PI * ig as f64 / self.order_count as f64,
            self.betas[ib],
            2.0 * PI * ia as f64 / self.order_count as f64,
        )
    }
}

/// `M` equispaced interior angles covering `[-pi, +pi)`.
pub fn default_beta_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| -PI + 2.0 * PI * j as f64 / count as f64)
        .collect()
}

/// Precomputed per-beta Wigner tables in dense natural layout, shared across
/// volume-target pairs.
pub struct BetaTables {
    betas: Vec<f64>,
    l_max: usize,
    dense: Vec<Array3<f64>>,
}

impl BetaTables {
    pub fn new(betas: &[f64], l_max: usize) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::EmptyInput("beta grid"));
        }
        let dense = betas
            .iter()
            .map(|&b| wigner_d(b, l_max).dense_natural())
            .collect();
        Ok(Self {
            betas: betas.to_vec(),
            l_max,
            dense,
        })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn dense(&self, i: usize) -> &Array3<f64> {
        &self.dense[i]
    }
}

/// Step 1: the beta-independent radial accumulation, dense `(M, M, L + 1)`
/// with the degree axis contiguous.
pub fn step1_radial(a: &SphVolume, b: &SphVolume) -> Array3<Complex64> {
    let grid = a.grid();
    let l_max = grid.l_max();
    let m_count = grid.order_count();
    let mut xt = Array3::<Complex64>::zeros((m_count, m_count, l_max + 1));
    for (r, &w) in grid.w_radial().iter().enumerate() {
        let ra = a.coeffs().row(r);
        let rb = b.coeffs().row(r);
        for l in 0..=l_max {
            let off = l as i64;
            for m1 in -off..=off {
                let ca = ra[lm_index(l, m1)].conj() * w;
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

/// In-place 2-D forward FFT over both axes of a square complex array.
pub(crate) fn fft2_forward(buf: &mut Array2<Complex64>) {
    let n = buf.dim().0;
    let fft = plan_fft(n, FftDirection::Forward);
    for mut row in buf.rows_mut() {
        fft.process(row.as_slice_mut().unwrap());
    }
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[(i, j)];
        }
        fft.process(&mut col);
        for i in 0..n {
            buf[(i, j)] = col[i];
        }
    }
}

/// Steps 2-3 for one beta given the dense Wigner table; returns the real
/// landscape slice over `(alpha, gamma)`.
pub(crate) fn finish_beta(xt: &Array3<Complex64>, dense: &Array3<f64>) -> Array2<f64> {
    let (m_count, _, lp1) = xt.dim();
    let mut xhat = Array2::<Complex64>::zeros((m_count, m_count));
    let xt_flat = xt.as_slice().unwrap();
    let d_flat = dense.as_slice().unwrap();
    for i1 in 0..m_count {
        for i2 in 0..m_count {
            let base = (i1 * m_count + i2) * lp1;
            let mut acc = Complex64::default();
            for l in 0..lp1 {
                acc += xt_flat[base + l] * d_flat[base + l];
            }
            xhat[(i1, i2)] = acc;
        }
    }
    fft2_forward(&mut xhat);
    xhat.mapv(|c| c.re)
}

/// Full landscape with precomputed beta tables.
pub fn landscape_3d_with_tables(
    a: &SphVolume,
    b: &SphVolume,
    tables: &BetaTables,
) -> Result<Landscape3D> {
    if !same_sphere_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    if tables.l_max() != a.grid().l_max() {
        return Err(Error::DimensionMismatch(
            "beta tables were built for a different degree cutoff".into(),
        ));
    }
    let m_count = a.grid().order_count();
    let xt = step1_radial(a, b);
    let mut values = Array3::<f64>::zeros((tables.betas().len(), m_count, m_count));
    for (ib, _) in tables.betas().iter().enumerate() {
        let slice = finish_beta(&xt, tables.dense(ib));
        values.index_axis_mut(ndarray::Axis(0), ib).assign(&slice);
    }
    Landscape3D::from_values(tables.betas().to_vec(), values)
}

/// Full inner-product landscape `X(tau) = <a, R_tau b>` over the Euler grid.
pub fn landscape_3d(a: &SphVolume, b: &SphVolume, betas: &[f64]) -> Result<Landscape3D> {
    if !same_sphere_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    let tables = BetaTables::new(betas, a.grid().l_max())?;
    landscape_3d_with_tables(a, b, &tables)
}

/// Literal reference: rotate `b` for every grid Euler angle and take the
/// weighted coefficient inner product. `O(#tau R (L+1)^3)`.
pub fn brute_force_landscape_3d(
    a: &SphVolume,
    b: &SphVolume,
    betas: &[f64],
) -> Result<Landscape3D> {
    if !same_sphere_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    if betas.is_empty() {
        return Err(Error::EmptyInput("beta grid"));
    }
    let grid = a.grid();
    let m_count = grid.order_count();
    let mut values = Array3::<f64>::zeros((betas.len(), m_count, m_count));
    for (ib, &beta) in betas.iter().enumerate() {
        let table = wigner_d(beta, grid.l_max());
        for ia in 0..m_count {
            let alpha = 2.0 * PI * ia as f64 / m_count as f64;
            for ig in 0..m_count {
                let gamma = 2.0 * PI * ig as f64 / m_count as f64;
                let rotated =
                    rotate_sph_with_table(b, EulerZYZ::new(gamma, beta, alpha), &table);
                let mut acc = Complex64::default();
                for (r, &w) in grid.w_radial().iter().enumerate() {
                    let ra = a.coeffs().row(r);
                    let rb = rotated.coeffs().row(r);
                    let mut shell = Complex64::default();
                    for (ca, cb) in ra.iter().zip(rb.iter()) {
                        shell += ca.conj() * cb;
                    }
                    acc += shell * w;
                }
                values[(ib, ia, ig)] = acc.re;
            }
        }
    }
    Landscape3D::from_values(betas.to_vec(), values)
}
