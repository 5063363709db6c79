//! The 2^d → 1 quantum random access code and noise thresholds.
//!
//! With decoding measurements `B¹, B²` and the best encoding state for each
//! input pair, the average success probability is
//! `R = (1/2d²) Σ_{a,b} λ_max(B¹_a + B²_b)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cglmp::{chi_max, chi_of_state_unchecked, check_state, CglmpSetting, Party, LOCAL_BOUND};
use crate::error::{Error, Result};
use crate::incompat::{incompatibility, max_incompatibility};
use crate::linalg::{eig_hermitian, ComplexMatrix, SchattenP, C64};
use crate::measurement::{add_white_noise, Povm};
use crate::random::{haar_pvm, stream};

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QracResult {
    pub dim: usize,
    pub success: f64,
    /// `per_pair_norms[a][b] = ‖B¹_a + B²_b‖_∞`.
    pub per_pair_norms: Vec<Vec<f64>>,
}

/// Best classical success probability, `(1 + 1/d)/2`.
pub fn classical_bound(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / d as f64)
}

/// Quantum optimum over all decodings, `(1 + 1/√d)/2`.
pub fn quantum_bound(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (d as f64).sqrt())
}

fn check_pair(b1: &Povm, b2: &Povm) -> Result<usize> {
    let d = b1.dim();
    if b2.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "decodings act on dimensions {d} and {}",
            b2.dim()
        )));
    }
    for m in [b1, b2] {
        if m.outcomes() != d {
            return Err(Error::DimensionMismatch(format!(
                "decoding has {} outcomes, expected {d}",
                m.outcomes()
            )));
        }
    }
    Ok(d)
}

/// Top eigenvalue and eigenvector.
type Eigenpair = (f64, Vec<C64>);

/// Top eigenpair of `B¹_a + B²_b` for every input pair.
fn encodings(b1: &Povm, b2: &Povm) -> Result<Vec<Vec<Eigenpair>>> {
    b1.effects()
        .iter()
        .map(|x| {
            b2.effects()
                .iter()
                .map(|y| {
                    let mut e = eig_hermitian(&x.try_add(y)?)?;
                    Ok((e.eigenvalues[0], e.eigenvectors.swap_remove(0)))
                })
                .collect()
        })
        .collect()
}

pub fn qrac_success(b1: &Povm, b2: &Povm) -> Result<QracResult> {
    let d = check_pair(b1, b2)?;
    let per_pair_norms: Vec<Vec<f64>> = encodings(b1, b2)?
        .into_iter()
        .map(|row| row.into_iter().map(|(l, _)| l).collect())
        .collect();
    let success = per_pair_norms.iter().flatten().sum::<f64>() / (2 * d * d) as f64;
    Ok(QracResult {
        dim: d,
        success,
        per_pair_norms,
    })
}

/// Closed form for qubits: `1/2 + (1/4)√(1 + I_p/2^{1+1/p})`.
pub fn qrac_closed_form_d2(i_p: f64, p: SchattenP) -> Result<f64> {
    let max = max_incompatibility(2, p);
    if !(i_p >= 0.0 && i_p <= max + 1e-9) {
        return Err(Error::OutOfRange(format!("I_p = {i_p} outside [0, {max}]")));
    }
    Ok(0.5 + 0.25 * (1.0 + i_p / (2.0 * p.two_pow_inv())).sqrt())
}

/// Qubit success probability from the maximal CHSH value of the same
/// decodings used as Bob's settings against MUBs: `1/2 + χ₂/8`.
pub fn r2_from_chi2(chi2: f64) -> f64 {
    0.5 + chi2 / 8.0
}

/// Success probability with noisy decodings, keeping the sharp-decoding
/// encoding states fixed.
pub fn noisy_qrac(b1: &Povm, b2: &Povm, eta: f64) -> Result<f64> {
    let d = check_pair(b1, b2)?;
    let enc = encodings(b1, b2)?;
    noisy_qrac_with(b1, b2, &enc, eta, d)
}

fn noisy_qrac_with(
    b1: &Povm,
    b2: &Povm,
    enc: &[Vec<(f64, Vec<C64>)>],
    eta: f64,
    d: usize,
) -> Result<f64> {
    let n1 = add_white_noise(b1, eta)?;
    let n2 = add_white_noise(b2, eta)?;
    let mut total = 0.0;
    for (a, row) in enc.iter().enumerate() {
        for (b, (_, v)) in row.iter().enumerate() {
            let sum = n1.effect(a).try_add(n2.effect(b))?;
            total += sum.expectation(v)?.re;
        }
    }
    Ok(total / (2 * d * d) as f64)
}

/// Smallest `η` in `[0, 1]` with `f(η) > 0`, assuming `f` is increasing.
fn bisect(mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    if f(1.0)? <= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Noise level above which the decodings beat the classical bound.
pub fn threshold_eta_r(b1: &Povm, b2: &Povm) -> Result<f64> {
    let d = check_pair(b1, b2)?;
    let enc = encodings(b1, b2)?;
    let bound = classical_bound(d);
    bisect(|eta| Ok(noisy_qrac_with(b1, b2, &enc, eta, d)? - bound))
}

/// Noise level on `noisy_side` above which the fixed state `rho` violates
/// the CGLMP inequality.
pub fn threshold_eta_c(s: &CglmpSetting, rho: &ComplexMatrix, noisy_side: Party) -> Result<f64> {
    let d = s.dim();
    check_state(rho, d * d)?;
    bisect(|eta| Ok(chi_of_state_unchecked(&s.with_noise_on(noisy_side, eta)?, rho) - LOCAL_BOUND))
}

/// Thresholds of one strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub dim: usize,
    /// Stream index within the scan that produced this strategy.
    pub sample_index: u64,
    pub seed: u64,
    pub eta_r: f64,
    pub eta_c: f64,
    pub i_bob: f64,
    /// Noiseless QRAC success probability of Bob's decodings.
    pub qrac: f64,
    /// Noiseless CGLMP value; the shared state is the top eigenvector of the
    /// noiseless operator.
    pub chi: f64,
}

impl ThresholdReport {
    pub fn is_balanced(&self, tol: f64) -> bool {
        (self.eta_r - self.eta_c).abs() <= tol
    }
}

/// Thresholds for a setting, with Bob's measurements doubling as the QRAC
/// decodings and noise applied on Bob's side.
pub fn strategy_thresholds(s: &CglmpSetting, sample_index: u64, seed: u64) -> Result<ThresholdReport> {
    let (b1, b2) = s.bob();
    let best = chi_max(s)?;
    let rho = ComplexMatrix::outer(&best.optimal_state);
    Ok(ThresholdReport {
        dim: s.dim(),
        sample_index,
        seed,
        eta_r: threshold_eta_r(b1, b2)?,
        eta_c: threshold_eta_c(s, &rho, Party::Bob)?,
        i_bob: incompatibility(b1, b2, SchattenP::INF)?.value,
        qrac: qrac_success(b1, b2)?.success,
        chi: best.chi,
    })
}

/// Result of [`equal_robustness_scan`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EqualRobustScan {
    pub dim: usize,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Strategies with `|η_r − η_c| ≤ tol`, by sample index.
    pub hits: Vec<ThresholdReport>,
}

impl EqualRobustScan {
    pub fn hit_fraction(&self) -> f64 {
        self.hits.len() as f64 / self.samples as f64
    }
}

/// Samples Haar-random Alice pairs, sets Bob's measurements equal to
/// Alice's, and keeps the strategies whose two thresholds agree within `tol`.
pub fn equal_robustness_scan(samples: usize, d: usize, tol: f64, seed: u64) -> Result<EqualRobustScan> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let all: Vec<ThresholdReport> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let a1: Povm = haar_pvm(d, &mut rng)?.into();
            let a2: Povm = haar_pvm(d, &mut rng)?.into();
            let s = CglmpSetting::new((a1.clone(), a2.clone()), (a1, a2))?;
            strategy_thresholds(&s, i, seed)
        })
        .collect::<Result<_>>()?;
    Ok(EqualRobustScan {
        dim: d,
        samples,
        tol,
        seed,
        hits: all.into_iter().filter(|r| r.is_balanced(tol)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{computational_pvm, mub_pair};

    #[test]
    fn classical_value_for_identical_bases() {
        for d in 2..=4 {
            let e = computational_pvm(d).unwrap();
            let r = qrac_success(&e, &e).unwrap();
            assert!((r.success - classical_bound(d)).abs() < 1e-15);
        }
    }

    #[test]
    fn mub_values() {
        for d in 2..=4 {
            let (a, b) = mub_pair(d).unwrap();
            let r = qrac_success(&a, &b).unwrap();
            assert!((r.success - quantum_bound(d)).abs() < 1e-10);
            let sum: f64 = r.per_pair_norms.iter().flatten().sum();
            assert!((r.success - sum / (2 * d * d) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((qrac_closed_form_d2(0.0, SchattenP::INF).unwrap() - 0.75).abs() < 1e-15);
        let v = qrac_closed_form_d2(2.0, SchattenP::INF).unwrap();
        assert!((v - quantum_bound(2)).abs() < 1e-12);
        assert!(qrac_closed_form_d2(2.1, SchattenP::INF).is_err());
    }

    #[test]
    fn noisy_examples() {
        let (a, b) = mub_pair(3).unwrap();
        let sharp = qrac_success(&a, &b).unwrap().success;
        assert!((noisy_qrac(&a, &b, 1.0).unwrap() - sharp).abs() < 1e-14);
        assert!((noisy_qrac(&a, &b, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let (b1, b2) = s.bob();
        assert!((noisy_qrac(b1, b2, 0.75).unwrap() - 2.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn thresholds_d2_and_d3() {
        let (a, b) = mub_pair(2).unwrap();
        let r = threshold_eta_r(&a, &b).unwrap();
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 2e-6);

        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let (b1, b2) = s.bob();
        assert!((threshold_eta_r(b1, b2).unwrap() - 0.75).abs() < 2e-6);
        let best = chi_max(&s).unwrap();
        let rho = ComplexMatrix::outer(&best.optimal_state);
        let c = threshold_eta_c(&s, &rho, Party::Bob).unwrap();
        assert!((c - 2.0 / best.chi).abs() < 2e-6);
    }

    #[test]
    fn compatible_setting_never_violates() {
        let e: Povm = computational_pvm(3).unwrap().into();
        let s = CglmpSetting::new((e.clone(), e.clone()), (e.clone(), e)).unwrap();
        let rho = ComplexMatrix::identity(9).scale_real(1.0 / 9.0);
        assert_eq!(threshold_eta_c(&s, &rho, Party::Bob).unwrap(), 1.0);
    }

    #[test]
    fn r2_identity_at_tsirelson() {
        assert!((r2_from_chi2(2.0 * 2f64.sqrt()) - quantum_bound(2)).abs() < 1e-15);
    }
}
