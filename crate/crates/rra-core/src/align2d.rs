//! Inner-product landscapes over in-plane rotation.
//!
//! The landscape value at `gamma` is the inner product between the first
//! image rotated by `gamma` and the second image,
//! `X(gamma) = <R_gamma a, b>`, evaluated over the uniform angle grid
//! `gamma_q' = 2 pi q' / Q_out`. In ring coefficients this is
//!
//! ```text
//! [Step 1]  Xhat(q)      = 2 pi * sum_r w_r conj(a(k_r, q)) b(k_r, q)
//! [Step 2]  X(gamma_q')  = sum_q exp(+i q gamma_q') Xhat(q)
//! ```
//!
//! Step 2 is an inverse FFT (zero-padded to `Q_out` when a finer angle grid
//! is requested); the real part is reported. For real source images the
//! imaginary part is discretization noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grids::PolarGrid;
use crate::polarfft::{plan_fft, same_grid, BesselImage};

/// Inner products over a uniform rotation grid `gamma_i = 2 pi i / Q_out`.
#[derive(Debug, Clone)]
pub struct Landscape1D {
    values: Vec<f64>,
    argmax_index: usize,
    max_value: f64,
}

impl Landscape1D {
    /// Wrap raw values, locating the argmax (ties break to the smallest index).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("landscape values"));
        }
        let mut argmax_index = 0;
        let mut max_value = values[0];
        for (i, &v) in values.iter().enumerate().skip(1) {
            if v > max_value {
                max_value = v;
                argmax_index = i;
            }
        }
        Ok(Self {
            values,
            argmax_index,
            max_value,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gamma(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.values.len() as f64
    }

    pub fn argmax_index(&self) -> usize {
        self.argmax_index
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    /// Angle of the grid argmax.
    pub fn argmax_gamma(&self) -> f64 {
        self.gamma(self.argmax_index)
    }
}

/// Reusable workspace for step 2 (zero-padded inverse FFT of `Xhat`).
///
/// Batch alignment reuses one plan per worker; the free functions below
/// construct a throwaway plan.
pub struct LandscapePlan {
    q_in: usize,
    q_out: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex64>,
    pub(crate) xhat: Vec<Complex64>,
}

impl LandscapePlan {
    pub fn new(q_in: usize, q_out: usize) -> Result<Self> {
        if q_out < q_in {
            return Err(Error::InvalidParameter(format!(
                "output angle count {q_out} must be >= coefficient count {q_in}"
            )));
        }
        Ok(Self {
            q_in,
            q_out,
            fft: plan_fft(q_out, FftDirection::Inverse),
            buf: vec![Complex64::default(); q_out],
            xhat: vec![Complex64::default(); q_in],
        })
    }

    /// Step 1 for a full (uncompressed) pair.
    pub fn accumulate_full(&mut self, a: &BesselImage, b: &BesselImage) {
        let grid = a.grid();
        let weights = grid.w_radial();
        self.xhat.fill(Complex64::default());
        for (r, &w) in weights.iter().enumerate() {
            let ra = a.coeffs().row(r);
            let rb = b.coeffs().row(r);
            let (ra, rb) = (ra.to_slice().unwrap(), rb.to_slice().unwrap());
            for (acc, (ca, cb)) in self.xhat.iter_mut().zip(ra.iter().zip(rb)) {
                *acc += ca.conj() * cb * w;
            }
        }
        for acc in &mut self.xhat {
            *acc *= 2.0 * PI;
        }
    }

    /// Step 2: signed placement of `Xhat` into the padded buffer, inverse FFT,
    /// real part, argmax.
    pub fn finish(&mut self, grid: &PolarGrid) -> Landscape1D {
        self.buf.fill(Complex64::default());
        for (j, &v) in self.xhat.iter().enumerate() {
            let q = grid.signed_freq(j);
            let pos = q.rem_euclid(self.q_out as i64) as usize;
            self.buf[pos] = v;
        }
        self.fft.process(&mut self.buf);
        let values = self.buf.iter().map(|c| c.re).collect();
        Landscape1D::from_values(values).expect("padded landscape is nonempty")
    }

    pub fn q_in(&self) -> usize {
        self.q_in
    }

    pub fn q_out(&self) -> usize {
        self.q_out
    }
}

/// Full inner-product landscape of a pair over `q_out` rotation angles.
pub fn landscape_2d(a: &BesselImage, b: &BesselImage, q_out: usize) -> Result<Landscape1D> {
    if !same_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    let mut plan = LandscapePlan::new(a.grid().angular_count(), q_out)?;
    plan.accumulate_full(a, b);
    Ok(plan.finish(a.grid()))
}

/// Literal double-sum reference for [`landscape_2d`] on the native angle grid;
/// `O(R Q^2)`, independent of the FFT path.
pub fn brute_force_landscape_2d(a: &BesselImage, b: &BesselImage) -> Result<Landscape1D> {
    if !same_grid(a.grid(), b.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = a.grid();
    let q_count = grid.angular_count();
    let weights = grid.w_radial();
    let mut values = Vec::with_capacity(q_count);
    for qp in 0..q_count {
        let gamma = grid.psi(qp);
        let mut total = Complex64::default();
        for j in 0..q_count {
            let q = grid.signed_freq(j) as f64;
            let phase = Complex64::from_polar(1.0, q * gamma);
            let mut radial = Complex64::default();
            for (r, &w) in weights.iter().enumerate() {
                radial += a.coeffs()[(r, j)].conj() * b.coeffs()[(r, j)] * w;
            }
            total += phase * radial;
        }
        values.push(2.0 * PI * total.re);
    }
    Landscape1D::from_values(values)
}

/// Angle at the landscape maximum, refined by quadratic interpolation through
/// the three neighboring samples when the local curvature supports it.
pub fn argmax_refine(l: &Landscape1D) -> f64 {
    let n = l.len();
    let i = l.argmax_index();
    if n < 3 {
        return l.argmax_gamma();
    }
    let left = l.values()[(i + n - 1) % n];
    let mid = l.values()[i];
    let right = l.values()[(i + 1) % n];
    let denom = left - 2.0 * mid + right;
    if denom >= 0.0 {
        return l.argmax_gamma();
    }
    let delta = 0.5 * (left - right) / denom;
    let step = 2.0 * PI / n as f64;
    (l.argmax_gamma() + delta * step).rem_euclid(2.0 * PI)
}
