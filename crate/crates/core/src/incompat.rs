//! Incompatibility of pairs of measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, schatten_norm, ComplexMatrix, SchattenP};
use crate::measurement::{Povm, MEASUREMENT_TOL};

/// `I_p(M¹, M²) = Σ_{j,k} ‖[M¹_j, M²_k]‖_p` with the individual terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncompatReport {
    pub p: SchattenP,
    pub value: f64,
    /// `pair_terms[j][k] = ‖[M¹_j, M²_k]‖_p`.
    pub pair_terms: Vec<Vec<f64>>,
}

fn check_same_dim(m1: &Povm, m2: &Povm) -> Result<()> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "measurements act on dimensions {} and {}",
            m1.dim(),
            m2.dim()
        )));
    }
    Ok(())
}

pub fn incompatibility(m1: &Povm, m2: &Povm, p: SchattenP) -> Result<IncompatReport> {
    check_same_dim(m1, m2)?;
    let pair_terms = m1
        .effects()
        .iter()
        .map(|a| {
            m2.effects()
                .iter()
                .map(|b| schatten_norm(&commutator(a, b)?, p))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let value = pair_terms.iter().flatten().sum();
    Ok(IncompatReport {
        p,
        value,
        pair_terms,
    })
}

/// Squared overlaps `x_ij² = tr(P_i Q_j)` between two rank-1 PVMs.
pub fn squared_overlaps(m1: &Povm, m2: &Povm) -> Result<Vec<Vec<f64>>> {
    check_same_dim(m1, m2)?;
    if !m1.is_rank1_projective() || !m2.is_rank1_projective() {
        return Err(Error::NotRank1);
    }
    m1.effects()
        .iter()
        .map(|a| {
            m2.effects()
                .iter()
                .map(|b| Ok(a.trace_product(b)?.re.clamp(0.0, 1.0)))
                .collect()
        })
        .collect()
}

/// Closed form for rank-1 PVMs: `2^{1/p} Σ x_ij √(1 − x_ij²)` where `x_ij` is
/// the modulus of the overlap between the basis vectors.
pub fn incompatibility_rank1(m1: &Povm, m2: &Povm, p: SchattenP) -> Result<f64> {
    let x2 = squared_overlaps(m1, m2)?;
    let sum: f64 = x2.iter().flatten().map(|&s| (s * (1.0 - s)).sqrt()).sum();
    Ok(p.two_pow_inv() * sum)
}

/// Upper end of `I_p` over rank-1 PVM pairs, `2^{1/p} d √(d−1)`.
pub fn max_incompatibility(d: usize, p: SchattenP) -> f64 {
    p.two_pow_inv() * d as f64 * ((d - 1) as f64).sqrt()
}

/// True iff every pair of effects commutes, each commutator being at most
/// `1e-9` in Frobenius norm.
pub fn jointly_measurable_projective(m1: &Povm, m2: &Povm) -> Result<bool> {
    check_same_dim(m1, m2)?;
    for a in m1.effects() {
        for b in m2.effects() {
            if commutator(a, b)?.frobenius_norm() > MEASUREMENT_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Analytic upper bound on the white-noise robustness of joint
/// measurability. `max_{j,i}` is read as `max ‖M_j + N_i‖_∞`. The raw ratio
/// can exceed 1 for compatible inputs; the result is clamped to `[0, 1]`.
pub fn robustness_upper_bound(m1: &Povm, m2: &Povm) -> Result<f64> {
    check_same_dim(m1, m2)?;
    if m1.outcomes() != m2.outcomes() {
        return Err(Error::OutcomeCountMismatch {
            left: m1.outcomes(),
            right: m2.outcomes(),
        });
    }
    let d = m1.dim() as f64;
    let l = m1.outcomes() as f64;
    let mut max_norm: f64 = 0.0;
    for a in m1.effects() {
        for b in m2.effects() {
            max_norm = max_norm.max(schatten_norm(&a.try_add(b)?, SchattenP::INF)?);
        }
    }
    let sq_traces = |m: &Povm| m.effects().iter().map(|e| e.trace().re.powi(2)).sum::<f64>();
    let purities = |m: &Povm| -> Result<f64> {
        m.effects()
            .iter()
            .map(|e| Ok(e.trace_product(e)?.re))
            .sum()
    };
    let (tm, tn) = (sq_traces(m1), sq_traces(m2));
    let num = l * l * max_norm - tm - tn;
    let den = l * purities(m1)? + d * purities(m2)? - tm - tn;
    if den <= 1e-12 {
        // trivial measurements: nothing to make compatible
        return Ok(1.0);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// `‖[A, B]‖_p` for a single effect pair; exposed for diagnostics.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix, p: SchattenP) -> Result<f64> {
    schatten_norm(&commutator(a, b)?, p)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::measurement::{interferometric_pvm, mub_pair, pvm_from_unitary, PhaseVector};

    fn qubit_pair(theta: f64) -> (crate::measurement::Pvm, crate::measurement::Pvm) {
        let (c, s) = (theta.cos(), theta.sin());
        let rot = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).unwrap();
        (
            pvm_from_unitary(&ComplexMatrix::identity(2)).unwrap(),
            pvm_from_unitary(&rot).unwrap(),
        )
    }

    #[test]
    fn self_pair_is_compatible() {
        let (a, b) = mub_pair(3).unwrap();
        for m in [&a, &b] {
            let r = incompatibility(m, m, SchattenP::INF).unwrap();
            assert!(r.value < 1e-14);
            assert!(jointly_measurable_projective(m, m).unwrap());
            assert!(jointly_measurable_projective(m, &m.relabel(&[1, 2, 0]).unwrap()).unwrap());
        }
    }

    #[test]
    fn qutrit_mub_examples() {
        let (a, b) = mub_pair(3).unwrap();
        let r = incompatibility(&a, &b, SchattenP::INF).unwrap();
        assert!((r.value - 3.0 * 2f64.sqrt()).abs() < 1e-10);
        let total: f64 = r.pair_terms.iter().flatten().sum();
        assert!((total - r.value).abs() < 1e-10);
        assert!(!jointly_measurable_projective(&a, &b).unwrap());
        let r1 = incompatibility_rank1(&a, &b, SchattenP::ONE).unwrap();
        let full = incompatibility(&a, &b, SchattenP::ONE).unwrap().value;
        assert!((r1 - 6.0 * 2f64.sqrt()).abs() < 1e-10);
        assert!((full - r1).abs() < 1e-10);
    }

    #[test]
    fn qubit_overlap_formula() {
        for &theta in &[0.1, 0.4, PI / 4.0, 1.2] {
            let (a, b) = qubit_pair(theta);
            let x = theta.cos().abs();
            for p in [SchattenP::ONE, SchattenP::TWO, SchattenP::INF] {
                let want = 2f64.powi(2) * p.two_pow_inv() * x * (1.0 - x * x).sqrt();
                let got = incompatibility(&a, &b, p).unwrap().value;
                assert!((got - want).abs() < 1e-12, "{got} vs {want}");
            }
        }
        let (a, b) = mub_pair(2).unwrap();
        assert!((incompatibility_rank1(&a, &b, SchattenP::INF).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank1_shortcut_rejects_povms() {
        let (a, _) = mub_pair(2).unwrap();
        let noisy = crate::measurement::add_white_noise(&a, 0.5).unwrap();
        assert!(matches!(
            incompatibility_rank1(&noisy, &a, SchattenP::INF),
            Err(Error::NotRank1)
        ));
    }

    #[test]
    fn robustness_examples() {
        let (a, b) = mub_pair(2).unwrap();
        let bound = robustness_upper_bound(&a, &b).unwrap();
        assert!((bound - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        let a1 = interferometric_pvm(&PhaseVector::zeros(3), false);
        let a2 = interferometric_pvm(&PhaseVector::linear(3, PI / 3.0), false);
        assert!((robustness_upper_bound(&a1, &a2).unwrap() - 0.75).abs() < 1e-10);

        assert!((robustness_upper_bound(&a1, &a1).unwrap() - 1.0).abs() < 1e-12);
        let (e, _) = mub_pair(3).unwrap();
        assert_eq!(robustness_upper_bound(&e, &e).unwrap(), 1.0);

        let two = crate::measurement::Povm::new(vec![
            ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]),
            ComplexMatrix::from_real_diag(&[0.0, 1.0, 1.0]),
        ])
        .unwrap();
        assert!(matches!(
            robustness_upper_bound(&two, &a1),
            Err(Error::OutcomeCountMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let (a, _) = mub_pair(2).unwrap();
        let (b, _) = mub_pair(3).unwrap();
        assert!(matches!(
            incompatibility(&a, &b, SchattenP::INF),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
