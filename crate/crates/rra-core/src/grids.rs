//! Quadrature grids for polar (2-D) and spherical (3-D) frequency space.
//!
//! Radial nodes and weights come from a Gauss-Jacobi rule with weight
//! `(1 + t)^p` on `[-1, 1]`, mapped affinely to `[0, k_max]`; `p = 1`
//! realizes the `k dk` measure of the plane and `p = 2` the `k^2 dk`
//! measure of space. Gaussian exactness holds for polynomials of degree
//! `<= 2R - 1` against the respective measure.
//!
//! The sphere is sampled on a Gauss-Legendre grid in `cos(theta)` crossed
//! with equispaced azimuths, which makes the forward spherical-harmonic
//! transform exact for band-limited data (see [`crate::spharm`]).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Nodes and weights of the Gauss-Jacobi rule for `(1 + t)^exponent` on `[-1, 1]`,
/// computed with the Golub-Welsch eigenvalue method. Nodes are ascending.
fn gauss_jacobi_unit(n: usize, exponent: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let beta = f64::from(exponent);
    // Total mass of the weight: integral of (1+t)^p over [-1, 1].
    let mu0 = 2f64.powi(exponent as i32 + 1) / (beta + 1.0);

    if n == 1 {
        return (vec![beta / (2.0 + beta)], vec![mu0]);
    }

    // Symmetric tridiagonal Jacobi matrix for alpha = 0.
    let mut m = DMatrix::<f64>::zeros(n, n);
    m[(0, 0)] = beta / (2.0 + beta);
    for i in 1..n {
        let k = i as f64;
        let denom = 2.0 * k + beta;
        m[(i, i)] = beta * beta / (denom * (denom + 2.0));
        let off = 2.0 * k * (k + beta) / (denom * ((denom * denom - 1.0).sqrt()));
        m[(i - 1, i)] = off;
        m[(i, i - 1)] = off;
    }

    let eigen = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .copied()
        .zip(eigen.eigenvectors.row(0).iter().map(|v| v * v * mu0))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Radial rule on `[0, k_max]` for the measure `k^exponent dk`.
fn radial_rule(k_max: f64, n: usize, exponent: u32) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_jacobi_unit(n, exponent);
    let half = k_max / 2.0;
    let scale = half.powi(exponent as i32 + 1);
    let nodes = t.iter().map(|t| half * (t + 1.0)).collect();
    let weights = w.iter().map(|w| scale * w).collect();
    (nodes, weights)
}

/// Polar quadrature grid: Gauss-Jacobi radii against `k dk` crossed with
/// equispaced angles.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    k_max: f64,
    k_nodes: Vec<f64>,
    w_radial: Vec<f64>,
    angular: usize,
}

impl PolarGrid {
    /// Maximum retained frequency magnitude.
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// Number of radial nodes.
    pub fn radial_count(&self) -> usize {
        self.k_nodes.len()
    }

    /// Number of equispaced angular nodes.
    pub fn angular_count(&self) -> usize {
        self.angular
    }

    /// Radial nodes, strictly increasing within `(0, k_max)`.
    pub fn k_nodes(&self) -> &[f64] {
        &self.k_nodes
    }

    /// Radial weights for the `k dk` measure; they sum to `k_max^2 / 2`.
    pub fn w_radial(&self) -> &[f64] {
        &self.w_radial
    }

    /// Angular spacing `2 pi / Q`.
    pub fn dpsi(&self) -> f64 {
        2.0 * PI / self.angular as f64
    }

    /// Angular node `psi_q = q * dpsi`.
    pub fn psi(&self, q: usize) -> f64 {
        self.dpsi() * q as f64
    }

    /// Signed periodic angular frequency for the natural (FFT) index.
    /// Indices run over `[-Q/2 + 1, ..., Q/2]`.
    pub fn signed_freq(&self, idx: usize) -> i64 {
        let q = self.angular as i64;
        let i = idx as i64;
        if i <= q / 2 {
            i
        } else {
            i - q
        }
    }
}

/// Spherical quadrature grid: Gauss-Jacobi radii against `k^2 dk`, Gauss-Legendre
/// polar nodes in `cos(theta)`, equispaced azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    k_max: f64,
    k_nodes: Vec<f64>,
    w_radial: Vec<f64>,
    l_max: usize,
    cos_theta: Vec<f64>,
    w_theta: Vec<f64>,
    phi_count: usize,
}

impl SphereGrid {
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn radial_count(&self) -> usize {
        self.k_nodes.len()
    }

    /// Maximum spherical-harmonic degree.
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Order count `M = 1 + 2L`.
    pub fn order_count(&self) -> usize {
        1 + 2 * self.l_max
    }

    pub fn k_nodes(&self) -> &[f64] {
        &self.k_nodes
    }

    /// Radial weights for the `k^2 dk` measure; they sum to `k_max^3 / 3`.
    pub fn w_radial(&self) -> &[f64] {
        &self.w_radial
    }

    /// Gauss-Legendre nodes in `cos(theta)`, ascending.
    pub fn cos_theta_nodes(&self) -> &[f64] {
        &self.cos_theta
    }

    /// Gauss-Legendre weights; they sum to 2.
    pub fn theta_weights(&self) -> &[f64] {
        &self.w_theta
    }

    pub fn phi_count(&self) -> usize {
        self.phi_count
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.phi_count as f64
    }

    /// Packed coefficient count per shell, `(L + 1)^2`.
    pub fn coeff_count(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    /// Quadrature weight of the sphere node `(i_theta, i_phi)`, approximating
    /// the surface measure `d(cos theta) d(phi)`.
    pub fn sphere_weight(&self, i_theta: usize) -> f64 {
        self.w_theta[i_theta] * 2.0 * PI / self.phi_count as f64
    }
}

/// Packed index of the spherical-harmonic coefficient `(l, m)`, `|m| <= l`.
pub fn lm_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    l * l + (l as i64 + m) as usize
}

/// Build a polar grid with `radial` Gauss-Jacobi nodes out to `k_max` and
/// `angular` equispaced angles (`angular` must be even).
pub fn build_polar_grid(k_max: f64, radial: usize, angular: usize) -> Result<Arc<PolarGrid>> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::GridParameter(format!(
            "k_max must be positive and finite, got {k_max}"
        )));
    }
    if radial == 0 {
        return Err(Error::GridParameter("radial node count must be >= 1".into()));
    }
    if angular < 2 || angular % 2 != 0 {
        return Err(Error::GridParameter(format!(
            "angular node count must be even and >= 2, got {angular}"
        )));
    }
    let (k_nodes, w_radial) = radial_rule(k_max, radial, 1);
    Ok(Arc::new(PolarGrid {
        k_max,
        k_nodes,
        w_radial,
        angular,
    }))
}

/// Build a sphere grid with `radial` Gauss-Jacobi nodes out to `k_max` and
/// angular resolution for spherical-harmonic degrees up to `l_max`:
/// `l_max + 1` Gauss-Legendre polar nodes and `2 l_max + 2` azimuths.
pub fn build_sphere_grid(k_max: f64, radial: usize, l_max: usize) -> Result<Arc<SphereGrid>> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::GridParameter(format!(
            "k_max must be positive and finite, got {k_max}"
        )));
    }
    if radial == 0 {
        return Err(Error::GridParameter("radial node count must be >= 1".into()));
    }
    let (k_nodes, w_radial) = radial_rule(k_max, radial, 2);
    let (cos_theta, w_theta) = gauss_jacobi_unit(l_max + 1, 0);
    Ok(Arc::new(SphereGrid {
        k_max,
        k_nodes,
        w_radial,
        l_max,
        cos_theta,
        w_theta,
        phi_count: 2 * l_max + 2,
    }))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (exposed for quadrature
/// oracles that need to integrate over rotation angles).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_unit(n, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn monomial_integral(k_max: f64, deg: u32, exponent: u32) -> f64 {
        // integral of k^deg * k^exponent dk over [0, k_max]
        let p = (deg + exponent + 1) as f64;
        k_max.powf(p) / p
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_polar_grid(-1.0, 4, 8).is_err());
        assert!(build_polar_grid(0.0, 4, 8).is_err());
        assert!(build_polar_grid(1.0, 0, 8).is_err());
        assert!(build_polar_grid(1.0, 4, 7).is_err());
        assert!(build_sphere_grid(f64::NAN, 4, 2).is_err());
        assert!(build_sphere_grid(1.0, 0, 2).is_err());
    }

    #[test]
    fn fig_scale_grid_shape() {
        let g = build_polar_grid(48.0, 49, 98).unwrap();
        assert_eq!(g.radial_count(), 49);
        assert_eq!(g.angular_count(), 98);
        assert_relative_eq!(g.dpsi(), 2.0 * PI / 98.0, max_relative = 1e-15);
        assert!(g.k_nodes().iter().all(|&k| k > 0.0 && k < 48.0));
        assert!(g.k_nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn weights_sum_to_disc_mass() {
        for (r, k) in [(1usize, 2.0), (5, 1.0), (16, 3.5), (49, 48.0)] {
            let g = build_polar_grid(k, r, 8).unwrap();
            let sum: f64 = g.w_radial().iter().sum();
            assert_relative_eq!(sum, k * k / 2.0, max_relative = 1e-12);
        }
        for (r, k) in [(1usize, 2.0), (7, 1.0), (25, 24.0)] {
            let g = build_sphere_grid(k, r, 4).unwrap();
            let sum: f64 = g.w_radial().iter().sum();
            assert_relative_eq!(sum, k * k * k / 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn gaussian_exactness_k_cubed() {
        // R = 16, K = 1: integral of k^2 against k dk is 1/4.
        let g = build_polar_grid(1.0, 16, 8).unwrap();
        let s: f64 = g
            .k_nodes()
            .iter()
            .zip(g.w_radial())
            .map(|(k, w)| k * k * w)
            .sum();
        assert_relative_eq!(s, 0.25, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_exactness_all_degrees() {
        // Monomials up to degree 2R - 1 integrate exactly under both measures.
        let k_max = 2.75;
        for r in [1usize, 2, 5, 12] {
            let polar = build_polar_grid(k_max, r, 8).unwrap();
            let sphere = build_sphere_grid(k_max, r, 2).unwrap();
            for deg in 0..(2 * r as u32) {
                let s: f64 = polar
                    .k_nodes()
                    .iter()
                    .zip(polar.w_radial())
                    .map(|(k, w)| k.powi(deg as i32) * w)
                    .sum();
                assert_relative_eq!(
                    s,
                    monomial_integral(k_max, deg, 1),
                    max_relative = 1e-12
                );
                let s: f64 = sphere
                    .k_nodes()
                    .iter()
                    .zip(sphere.w_radial())
                    .map(|(k, w)| k.powi(deg as i32) * w)
                    .sum();
                assert_relative_eq!(
                    s,
                    monomial_integral(k_max, deg, 2),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn sphere_orders_and_legendre_mass() {
        let g = build_sphere_grid(8.0, 9, 16).unwrap();
        assert_eq!(g.order_count(), 33);
        assert_eq!(g.cos_theta_nodes().len(), 17);
        assert_eq!(g.phi_count(), 34);
        let sum: f64 = g.theta_weights().iter().sum();
        assert_relative_eq!(sum, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn construction_is_deterministic() {
        let a = build_polar_grid(48.0, 49, 98).unwrap();
        let b = build_polar_grid(48.0, 49, 98).unwrap();
        assert_eq!(a.k_nodes(), b.k_nodes());
        assert_eq!(a.w_radial(), b.w_radial());
        let a = build_sphere_grid(24.0, 25, 24).unwrap();
        let b = build_sphere_grid(24.0, 25, 24).unwrap();
        assert_eq!(a.k_nodes(), b.k_nodes());
        assert_eq!(a.cos_theta_nodes(), b.cos_theta_nodes());
    }

    #[test]
    fn signed_frequency_convention() {
        let g = build_polar_grid(1.0, 1, 8).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.signed_freq(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn legendre_matches_known_five_point_rule() {
        let (x, w) = gauss_legendre(5);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert_relative_eq!(x[i], x_ref[i], epsilon = 1e-13);
            assert_relative_eq!(w[i], w_ref[i], epsilon = 1e-13);
        }
    }
}
