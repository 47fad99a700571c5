//! Quality figures comparing a model state against a reference.
//!
//! Fidelity and KL divergence act on `|c_i|^2` distributions, the complex
//! distances on raw amplitudes. Nothing is renormalized, so fixed-point
//! drift in the probability sum shows up in the figures; the report carries
//! both sums for diagnosis. Distances are not corrected for global phase.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Floor applied to reference probabilities inside the KL logarithm.
pub const KLD_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("length mismatch: {0} vs {1}")]
pub struct LengthMismatch(pub usize, pub usize);

fn same_len(a: usize, b: usize) -> Result<(), LengthMismatch> {
    if a == b {
        Ok(())
    } else {
        Err(LengthMismatch(a, b))
    }
}

/// Hellinger distance `sqrt(sum (sqrt I - sqrt R)^2) / sqrt 2`.
pub fn hellinger_distance(i: &[f64], r: &[f64]) -> Result<f64, LengthMismatch> {
    same_len(i.len(), r.len())?;
    let s: f64 = i.iter().zip(r).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((s / 2.0).sqrt())
}

/// `(1 - H^2)^2`.
pub fn hellinger_fidelity(i: &[f64], r: &[f64]) -> Result<f64, LengthMismatch> {
    let h = hellinger_distance(i, r)?;
    Ok((1.0 - h * h).powi(2))
}

/// Kullback-Leibler divergence `sum I log(I / R)` in its unnormalized form
/// `sum [I log(I / R) - I + R]`.
///
/// The two agree whenever both inputs sum to one. For fixed-point states,
/// whose probability mass drifts, the extra terms keep the result
/// non-negative and zero only for identical inputs. `R` is floored at
/// `epsilon` inside the logarithm; `0 log 0` is taken as 0.
pub fn kld(i: &[f64], r: &[f64], epsilon: f64) -> Result<f64, LengthMismatch> {
    same_len(i.len(), r.len())?;
    Ok(i.iter()
        .zip(r)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b.max(epsilon)).ln() - a + b } else { b })
        .sum())
}

/// `(max, mean)` of `|I_i - R_i|`.
pub fn complex_distances(model: &[Complex64], reference: &[Complex64]) -> Result<(f64, f64), LengthMismatch> {
    same_len(model.len(), reference.len())?;
    if model.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (max, sum) = model
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).norm())
        .fold((0.0f64, 0.0), |(m, s), d| (m.max(d), s + d));
    Ok((max, sum / model.len() as f64))
}

pub fn probabilities(state: &[Complex64]) -> Vec<f64> {
    state.iter().map(|c| c.norm_sqr()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityReport {
    pub fidelity: f64,
    pub kld: f64,
    pub mcd: f64,
    pub acd: f64,
    pub prob_sum_model: f64,
    pub prob_sum_reference: f64,
}

impl QualityReport {
    pub fn identical() -> Self {
        QualityReport { fidelity: 1.0, kld: 0.0, mcd: 0.0, acd: 0.0, prob_sum_model: 1.0, prob_sum_reference: 1.0 }
    }
}

impl std::fmt::Display for QualityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "fidelity {:.9}  kld {:.3e}  mcd {:.3e}  acd {:.3e}  sum(model) {:.9}  sum(ref) {:.9}",
            self.fidelity, self.kld, self.mcd, self.acd, self.prob_sum_model, self.prob_sum_reference
        )
    }
}

/// All four figures of `model` against `reference`.
pub fn report(model: &[Complex64], reference: &[Complex64]) -> Result<QualityReport, LengthMismatch> {
    let pm = probabilities(model);
    let pr = probabilities(reference);
    let (mcd, acd) = complex_distances(model, reference)?;
    Ok(QualityReport {
        fidelity: hellinger_fidelity(&pm, &pr)?,
        kld: kld(&pm, &pr, KLD_EPSILON)?,
        mcd,
        acd,
        prob_sum_model: pm.iter().sum(),
        prob_sum_reference: pr.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

    fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum::<f64>().max(1e-300);
            v.iter().map(|x| x / s).collect()
        })
    }

    fn amps(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(hellinger_fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((hellinger_fidelity(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let h = hellinger_distance(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!((h * h - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!((kld(&[1.0, 0.0], &[0.5, 0.5], KLD_EPSILON).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(kld(&[0.0, 1.0], &[0.0, 1.0], KLD_EPSILON).unwrap(), 0.0);
    }

    #[test]
    fn kld_floors_reference() {
        let got = kld(&[1.0, 0.0], &[0.0, 1.0], KLD_EPSILON).unwrap();
        assert!((got - (1e12f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn kld_counts_lost_mass() {
        // A uniformly shrunk model: the plain sum would be negative.
        let got = kld(&[0.4, 0.4], &[0.5, 0.5], KLD_EPSILON).unwrap();
        let want = 0.8 * (0.8f64).ln() - 0.8 + 1.0;
        assert!(got > 0.0 && (got - want).abs() < 1e-15);
    }

    #[test]
    fn kld_is_asymmetric() {
        let a = [0.9, 0.1];
        let b = [0.5, 0.5];
        let ab = kld(&a, &b, KLD_EPSILON).unwrap();
        let ba = kld(&b, &a, KLD_EPSILON).unwrap();
        assert!((ab - ba).abs() > 1e-3);
    }

    #[test]
    fn distance_examples() {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let (m, a) = complex_distances(&[c, c], &[-c, -c]).unwrap();
        assert!((m - SQRT_2).abs() < 1e-15 && (a - SQRT_2).abs() < 1e-15);

        let mut s = vec![Complex64::new(0.25, 0.0); 8];
        let r = s.clone();
        s[3].im += 0.125;
        let (m, a) = complex_distances(&s, &r).unwrap();
        assert_eq!((m, a), (0.125, 0.125 / 8.0));
    }

    #[test]
    fn identical_report() {
        let s = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let r = report(&s, &s).unwrap();
        assert_eq!((r.fidelity, r.kld, r.mcd, r.acd), (1.0, 0.0, 0.0, 0.0));
        assert!((r.prob_sum_model - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(hellinger_fidelity(&[1.0], &[1.0, 0.0]), Err(LengthMismatch(1, 2)));
        assert!(kld(&[1.0], &[], 1e-12).is_err());
        assert!(complex_distances(&[Complex64::ONE], &[]).is_err());
    }

    proptest! {
        #[test]
        fn self_comparison_is_perfect(p in dist(16), s in amps(16)) {
            prop_assert!((hellinger_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
            prop_assert_eq!(kld(&p, &p, KLD_EPSILON).unwrap(), 0.0);
            prop_assert_eq!(complex_distances(&s, &s).unwrap(), (0.0, 0.0));
        }

        #[test]
        fn fidelity_in_unit_interval(p in dist(8), q in dist(8)) {
            let f = hellinger_fidelity(&p, &q).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }

        #[test]
        fn kld_nonnegative_on_distributions(p in dist(8), q in dist(8)) {
            prop_assert!(kld(&p, &q, KLD_EPSILON).unwrap() >= -1e-12);
        }

        #[test]
        fn kld_nonnegative_without_normalization(p in prop::collection::vec(0.0f64..1.0, 8), q in prop::collection::vec(1e-6f64..1.0, 8)) {
            prop_assert!(kld(&p, &q, KLD_EPSILON).unwrap() >= -1e-12);
        }

        #[test]
        fn kld_matches_plain_sum_on_distributions(p in dist(8), q in dist(8)) {
            let plain: f64 = p.iter().zip(&q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b.max(KLD_EPSILON)).ln()).sum();
            prop_assert!((kld(&p, &q, KLD_EPSILON).unwrap() - plain).abs() < 1e-12);
        }

        #[test]
        fn acd_at_most_mcd_and_symmetric(a in amps(12), b in amps(12)) {
            let (m, c) = complex_distances(&a, &b).unwrap();
            prop_assert!(c <= m + 1e-15);
            prop_assert_eq!((m, c), complex_distances(&b, &a).unwrap());
        }

        #[test]
        fn fidelity_permutation_invariant(p in dist(6), q in dist(6), rot in 0usize..6) {
            let mut pp = p.clone();
            let mut qq = q.clone();
            pp.rotate_left(rot);
            qq.rotate_left(rot);
            let a = hellinger_fidelity(&p, &q).unwrap();
            let b = hellinger_fidelity(&pp, &qq).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
