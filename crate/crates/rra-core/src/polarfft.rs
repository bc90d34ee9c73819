//! Transforms between Cartesian pixel arrays, polar-grid Fourier samples and
//! per-ring Fourier (Bessel) coefficients, plus in-plane rotation in
//! coefficient space.
//!
//! Conventions: the polar sample at node `(k_r, psi_q)` is the plain sum
//! `dx^2 * sum A[n1,n2] exp(-i k . x)` over pixel centers; the ring
//! coefficient is the trapezoidal quadrature
//! `sum_q' F(k, psi_q') exp(-i q psi_q') dpsi`, and the inverse carries the
//! compensating `1 / (2 pi)` so the pair round-trips exactly. Rotating an
//! image by `gamma` multiplies coefficient `q` by `exp(-i q gamma)` with `q`
//! the signed periodic index.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grids::PolarGrid;

pub(crate) fn plan_fft(len: usize, dir: FftDirection) -> Arc<dyn rustfft::Fft<f64>> {
    rustfft::FftPlanner::new().plan_fft(len, dir)
}

pub(crate) fn same_grid(a: &Arc<PolarGrid>, b: &Arc<PolarGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Real pixel image on `[-1, 1]^2` with pixel centers at `dx (n + 1/2) - 1`.
#[derive(Debug, Clone)]
pub struct CartImage {
    values: Array2<f64>,
}

impl CartImage {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n1, n2) = values.dim();
        if n1 != n2 || n1 < 2 {
            return Err(Error::DimensionMismatch(format!(
                "image must be square with side >= 2, got {n1} x {n2}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "image values must be finite".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn side(&self) -> usize {
        self.values.dim().0
    }

    /// Pixel spacing `2 / N`.
    pub fn dx(&self) -> f64 {
        2.0 / self.side() as f64
    }

    /// Center coordinate of pixel index `n` along either axis.
    pub fn coord(&self, n: usize) -> f64 {
        self.dx() * (n as f64 + 0.5) - 1.0
    }

    /// Nyquist frequency `pi / dx = (pi / 2) N`.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }
}

/// Fourier samples of an image on the nodes of a [`PolarGrid`], `R x Q`.
#[derive(Debug, Clone)]
pub struct PolarImage {
    grid: Arc<PolarGrid>,
    values: Array2<Complex64>,
}

impl PolarImage {
    pub fn new(grid: Arc<PolarGrid>, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.radial_count(), grid.angular_count()) {
            return Err(Error::DimensionMismatch(format!(
                "polar samples must be {} x {}, got {} x {}",
                grid.radial_count(),
                grid.angular_count(),
                values.dim().0,
                values.dim().1
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let values = Array2::zeros((grid.radial_count(), grid.angular_count()));
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }
}

/// Per-ring Fourier coefficients of an image, `R x Q` in natural FFT order.
#[derive(Debug, Clone)]
pub struct BesselImage {
    grid: Arc<PolarGrid>,
    coeffs: Array2<Complex64>,
}

impl BesselImage {
    pub fn new(grid: Arc<PolarGrid>, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.radial_count(), grid.angular_count()) {
            return Err(Error::DimensionMismatch(format!(
                "ring coefficients must be {} x {}, got {} x {}",
                grid.radial_count(),
                grid.angular_count(),
                coeffs.dim().0,
                coeffs.dim().1
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Arc<PolarGrid>) -> Self {
        let coeffs = Array2::zeros((grid.radial_count(), grid.angular_count()));
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    /// Per-ring power `sum_q |coeff|^2`.
    pub fn ring_power(&self, ring: usize) -> f64 {
        self.coeffs.row(ring).iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Evaluate the Fourier transform of a pixel image on every polar-grid node by
/// direct summation over pixel centers.
///
/// The sum is evaluated separably per node (row phases times column phases),
/// which is algebraically identical to the double loop over pixels. Grids
/// extending beyond the image Nyquist frequency are accepted with a warning.
pub fn sample_polar(img: &CartImage, grid: &Arc<PolarGrid>) -> PolarImage {
    if grid.k_max() > img.nyquist() {
        log::warn!(
            "polar grid k_max {:.3} exceeds image Nyquist frequency {:.3}",
            grid.k_max(),
            img.nyquist()
        );
    }
    let n = img.side();
    let dx2 = img.dx() * img.dx();
    let coords: Vec<f64> = (0..n).map(|i| img.coord(i)).collect();
    let a = img.values();

    let mut out = PolarImage::zeros(grid.clone());
    let mut phase_col = vec![Complex64::default(); n];
    let mut row_acc = vec![Complex64::default(); n];
    for (r, &k) in grid.k_nodes().iter().enumerate() {
        for q in 0..grid.angular_count() {
            let psi = grid.psi(q);
            let kx = k * psi.cos();
            let ky = k * psi.sin();
            for (j, &x) in coords.iter().enumerate() {
                phase_col[j] = Complex64::from_polar(1.0, -ky * x);
            }
            for (i, acc) in row_acc.iter_mut().enumerate() {
                let mut s = Complex64::default();
                let row = a.row(i);
                for (j, &v) in row.iter().enumerate() {
                    s += phase_col[j] * v;
                }
                *acc = s;
            }
            let mut total = Complex64::default();
            for (i, &x) in coords.iter().enumerate() {
                total += Complex64::from_polar(1.0, -kx * x) * row_acc[i];
            }
            out.values_mut()[(r, q)] = total * dx2;
        }
    }
    out
}

/// Ring-wise Fourier analysis: `coeff(k, q) = sum_q' F(k, psi_q') e^{-i q psi_q'} dpsi`.
pub fn bessel_forward(p: &PolarImage) -> BesselImage {
    let grid = p.grid().clone();
    let q_count = grid.angular_count();
    let dpsi = grid.dpsi();
    let fft = plan_fft(q_count, FftDirection::Forward);
    let mut out = BesselImage::zeros(grid);
    let mut buf = vec![Complex64::default(); q_count];
    for r in 0..p.values().dim().0 {
        buf.copy_from_slice(p.values().row(r).to_slice().unwrap());
        fft.process(&mut buf);
        for (dst, src) in out.coeffs_mut().row_mut(r).iter_mut().zip(&buf) {
            *dst = src * dpsi;
        }
    }
    out
}

/// Ring-wise Fourier synthesis; exact inverse of [`bessel_forward`].
pub fn bessel_inverse(b: &BesselImage) -> PolarImage {
    let grid = b.grid().clone();
    let q_count = grid.angular_count();
    let fft = plan_fft(q_count, FftDirection::Inverse);
    let mut out = PolarImage::zeros(grid);
    let mut buf = vec![Complex64::default(); q_count];
    let scale = 1.0 / (2.0 * PI);
    for r in 0..b.coeffs().dim().0 {
        buf.copy_from_slice(b.coeffs().row(r).to_slice().unwrap());
        fft.process(&mut buf);
        for (dst, src) in out.values_mut().row_mut(r).iter_mut().zip(&buf) {
            *dst = src * scale;
        }
    }
    out
}

/// Rotate in coefficient space: coefficient `q` picks up `exp(-i q gamma)`.
/// Any real angle is allowed, on-grid or not.
pub fn rotate_bessel(b: &BesselImage, gamma: f64) -> BesselImage {
    let mut out = b.clone();
    rotate_bessel_inplace(&mut out, gamma);
    out
}

pub fn rotate_bessel_inplace(b: &mut BesselImage, gamma: f64) {
    let grid = b.grid().clone();
    let phases: Vec<Complex64> = (0..grid.angular_count())
        .map(|j| Complex64::from_polar(1.0, -(grid.signed_freq(j) as f64) * gamma))
        .collect();
    for mut row in b.coeffs_mut().rows_mut() {
        for (c, ph) in row.iter_mut().zip(&phases) {
            *c *= ph;
        }
    }
}
