//! Comparison metrics between approximate and full landscapes: relative
//! Frobenius error, Pearson correlation over the flattened arrays, and the
//! backward-error fraction `f` (the true percentile of the approximately
//! optimal rotation within the list of true inner products).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `||approx - full||_F / ||full||_F` over arrays of matching shape.
pub fn rel_frobenius(approx: &[f64], full: &[f64]) -> Result<f64> {
    if approx.len() != full.len() || full.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "array lengths differ: {} vs {}",
            approx.len(),
            full.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, f) in approx.iter().zip(full) {
        num += (a - f) * (a - f);
        den += f * f;
    }
    Ok(num.sqrt() / den.sqrt())
}

/// Pearson correlation of the flattened entries (mean-subtracted); constant
/// arrays have no defined correlation.
pub fn correlation(approx: &[f64], full: &[f64]) -> Result<f64> {
    if approx.len() != full.len() || full.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "array lengths differ: {} vs {}",
            approx.len(),
            full.len()
        )));
    }
    let n = approx.len() as f64;
    let ma = approx.iter().sum::<f64>() / n;
    let mf = full.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vf = 0.0;
    for (a, f) in approx.iter().zip(full) {
        num += (a - ma) * (f - mf);
        va += (a - ma) * (a - ma);
        vf += (f - mf) * (f - mf);
    }
    if va == 0.0 || vf == 0.0 {
        return Err(Error::ConstantArray);
    }
    Ok(num / (va.sqrt() * vf.sqrt()))
}

/// Backward-error fraction: locate the argmax of `approx` (ties to the
/// smallest index), read the true value there, and report the fraction of
/// true values less than or equal to it.
pub fn backward_fraction(approx: &[f64], full: &[f64]) -> Result<f64> {
    if approx.len() != full.len() || full.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "array lengths differ: {} vs {}",
            approx.len(),
            full.len()
        )));
    }
    let mut best = 0usize;
    for (i, &v) in approx.iter().enumerate().skip(1) {
        if v > approx[best] {
            best = i;
        }
    }
    let threshold = full[best];
    let count = full.iter().filter(|&&v| v <= threshold).count();
    Ok(count as f64 / full.len() as f64)
}

/// Wall-clock seconds split the way the cost ledgers split the work.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PhaseTiming {
    /// Kernel builds, eigendecompositions, compressions, Wigner tables.
    pub precompute_secs: f64,
    /// Landscape evaluation summed over pairs.
    pub per_pair_secs: f64,
}

impl PhaseTiming {
    pub fn total(&self) -> f64 {
        self.precompute_secs + self.per_pair_secs
    }
}

/// Aggregated comparison of a compressed run against the full run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rank: usize,
    pub rel_frobenius: f64,
    pub correlation: f64,
    pub backward_fraction_mean: f64,
    pub per_pair_f: Vec<f64>,
    pub timing: PhaseTiming,
}

impl ComparisonReport {
    /// Aggregate per-pair metric triples `(rel_frobenius, correlation, f)`.
    pub fn from_pairs(rank: usize, pairs: &[(f64, f64, f64)], timing: PhaseTiming) -> Self {
        let n = pairs.len().max(1) as f64;
        Self {
            rank,
            rel_frobenius: pairs.iter().map(|p| p.0).sum::<f64>() / n,
            correlation: pairs.iter().map(|p| p.1).sum::<f64>() / n,
            backward_fraction_mean: pairs.iter().map(|p| p.2).sum::<f64>() / n,
            per_pair_f: pairs.iter().map(|p| p.2).collect(),
            timing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn frobenius_basics() {
        let full = [1.0, -2.0, 3.0];
        assert_eq!(rel_frobenius(&full, &full).unwrap(), 0.0);
        assert_relative_eq!(
            rel_frobenius(&[0.0, 0.0, 0.0], &full).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let doubled = [2.0, -4.0, 6.0];
        assert_relative_eq!(rel_frobenius(&doubled, &full).unwrap(), 1.0, epsilon = 1e-15);
        assert!(rel_frobenius(&[1.0], &full).is_err());
    }

    #[test]
    fn correlation_basics() {
        let full = [0.3, -1.0, 2.5, 0.4];
        assert_relative_eq!(correlation(&full, &full).unwrap(), 1.0, epsilon = 1e-12);
        let neg: Vec<f64> = full.iter().map(|v| -v).collect();
        assert_relative_eq!(correlation(&neg, &full).unwrap(), -1.0, epsilon = 1e-12);
        let shifted: Vec<f64> = full.iter().map(|v| v + 10.0).collect();
        assert_relative_eq!(correlation(&shifted, &full).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            correlation(&[1.0, 1.0, 1.0, 1.0], &full),
            Err(Error::ConstantArray)
        ));
    }

    #[test]
    fn correlation_is_affine_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let full: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let approx: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = correlation(&approx, &full).unwrap();
        let mapped: Vec<f64> = approx.iter().map(|v| 3.7 * v - 11.0).collect();
        assert_relative_eq!(
            correlation(&mapped, &full).unwrap(),
            base,
            epsilon = 1e-12
        );
    }

    #[test]
    fn backward_fraction_basics() {
        let full = [0.1, 0.9, 0.5, 0.3];
        assert_eq!(backward_fraction(&full, &full).unwrap(), 1.0);

        // Constant approx ties to index 0; the percentile of full[0] follows.
        let f = backward_fraction(&[1.0, 1.0, 1.0, 1.0], &full).unwrap();
        assert_relative_eq!(f, 0.25, epsilon = 1e-15);

        // counting oracle on random pairs
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..20 {
            let full: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let approx: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = backward_fraction(&approx, &full).unwrap();
            let mut best = 0usize;
            for i in 1..50 {
                if approx[i] > approx[best] {
                    best = i;
                }
            }
            let mut count = 0usize;
            for &v in &full {
                if v <= full[best] {
                    count += 1;
                }
            }
            assert_eq!(got, count as f64 / 50.0);
        }
    }

    #[test]
    fn argmax_preserving_approximations_keep_f_at_one() {
        let full = [0.1, 0.9, 0.5, 0.3];
        let approx = [0.0, 100.0, -5.0, 99.0];
        assert_eq!(backward_fraction(&approx, &full).unwrap(), 1.0);
    }

    #[test]
    fn report_aggregates_pairs() {
        let pairs = vec![(0.5, 0.9, 1.0), (0.3, 0.7, 0.5)];
        let report = ComparisonReport::from_pairs(8, &pairs, PhaseTiming::default());
        assert_relative_eq!(report.rel_frobenius, 0.4, epsilon = 1e-15);
        assert_relative_eq!(report.correlation, 0.8, epsilon = 1e-15);
        assert_relative_eq!(report.backward_fraction_mean, 0.75, epsilon = 1e-15);
        assert_eq!(report.per_pair_f, vec![1.0, 0.5]);
    }
}
