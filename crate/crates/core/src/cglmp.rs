//! CGLMP Bell operator for two parties, two settings and `d` outcomes.
//!
//! The operator form
//!
//! ```text
//! C_d = Σ_{k=0}^{⌊d/2⌋−1} (1 − 2k/(d−1)) Σ_j [ A1_{j+k}⊗B1_j + A2_j⊗B1_{j+k+1}
//!        + A2_{j+k}⊗B2_j + A1_j⊗B2_{j+k} − A1_{j−k−1}⊗B1_j − A2_j⊗B1_{j−k}
//!        − A2_{j−k−1}⊗B2_j − A1_j⊗B2_{j−k−1} ]
//! ```
//!
//! uses zero-based outcome labels and Euclidean reduction mod `d`. The
//! probability form in [`chi_of_state`] computes the same quantity from the
//! joint outcome distribution and is kept as an independent check.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_kron_scaled, eig_hermitian, ComplexMatrix, C64};
use crate::measurement::{add_white_noise, interferometric_pvm, mub_pair, PhaseVector, Povm};
use crate::random::{haar_pvm, stream};

/// Local bound of the CGLMP expression.
pub const LOCAL_BOUND: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Ok(Party::Alice),
            "bob" | "b" => Ok(Party::Bob),
            _ => Err(Error::config("side", format!("unknown party `{s}`"))),
        }
    }
}

/// Two measurements for each party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SettingJson")]
pub struct CglmpSetting {
    dim: usize,
    alice: (Povm, Povm),
    bob: (Povm, Povm),
}

#[derive(Deserialize)]
struct SettingJson {
    dim: usize,
    alice: (Povm, Povm),
    bob: (Povm, Povm),
}

impl TryFrom<SettingJson> for CglmpSetting {
    type Error = Error;

    fn try_from(j: SettingJson) -> Result<Self> {
        let s = CglmpSetting::new(j.alice, j.bob)?;
        if s.dim != j.dim {
            return Err(Error::DimensionMismatch(format!(
                "declared dim {} but measurements act on {}",
                j.dim, s.dim
            )));
        }
        Ok(s)
    }
}

impl CglmpSetting {
    pub fn new(alice: (Povm, Povm), bob: (Povm, Povm)) -> Result<Self> {
        let dim = alice.0.dim();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        for m in [&alice.0, &alice.1, &bob.0, &bob.1] {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "measurement on dimension {} in a dimension-{dim} setting",
                    m.dim()
                )));
            }
            if m.outcomes() != dim {
                return Err(Error::OutcomeCountMismatch {
                    left: m.outcomes(),
                    right: dim,
                });
            }
        }
        Ok(Self { dim, alice, bob })
    }

    /// Interferometric settings with phases `φ1 = 0`, `φ2(j) = jπ/d` for
    /// Alice and `ζ1(j) = jπ/2d`, `ζ2(j) = −jπ/2d` for Bob, who uses the
    /// conjugated Fourier transform.
    pub fn optimal_interferometric(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let df = d as f64;
        Self::interferometric(
            &PhaseVector::zeros(d),
            &PhaseVector::linear(d, PI / df),
            &PhaseVector::linear(d, PI / (2.0 * df)),
            &PhaseVector::linear(d, -PI / (2.0 * df)),
        )
    }

    pub fn interferometric(
        a1: &PhaseVector,
        a2: &PhaseVector,
        b1: &PhaseVector,
        b2: &PhaseVector,
    ) -> Result<Self> {
        Self::new(
            (
                interferometric_pvm(a1, false).into(),
                interferometric_pvm(a2, false).into(),
            ),
            (
                interferometric_pvm(b1, true).into(),
                interferometric_pvm(b2, true).into(),
            ),
        )
    }

    /// Computational and Fourier bases on both sides.
    pub fn mub(d: usize) -> Result<Self> {
        let (e, f) = mub_pair(d)?;
        Self::new(
            (e.clone().into(), f.clone().into()),
            (e.into(), f.into()),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alice(&self) -> (&Povm, &Povm) {
        (&self.alice.0, &self.alice.1)
    }

    pub fn bob(&self) -> (&Povm, &Povm) {
        (&self.bob.0, &self.bob.1)
    }

    pub fn side(&self, party: Party) -> (&Povm, &Povm) {
        match party {
            Party::Alice => self.alice(),
            Party::Bob => self.bob(),
        }
    }

    /// White noise with parameter `eta_a` on Alice and `eta_b` on Bob.
    pub fn with_noise(&self, eta_a: f64, eta_b: f64) -> Result<Self> {
        Ok(Self {
            dim: self.dim,
            alice: (
                add_white_noise(&self.alice.0, eta_a)?,
                add_white_noise(&self.alice.1, eta_a)?,
            ),
            bob: (
                add_white_noise(&self.bob.0, eta_b)?,
                add_white_noise(&self.bob.1, eta_b)?,
            ),
        })
    }

    pub fn with_noise_on(&self, party: Party, eta: f64) -> Result<Self> {
        match party {
            Party::Alice => self.with_noise(eta, 1.0),
            Party::Bob => self.with_noise(1.0, eta),
        }
    }
}

/// Maximal quantum value for a fixed setting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CglmpResult {
    pub chi: f64,
    /// One unit vector from the top eigenspace, index `a·d + b`.
    pub optimal_state: Vec<C64>,
    /// Full spectrum, descending.
    pub spectrum: Vec<f64>,
}

/// Weight of the `k`-th block, `1 − 2k/(d−1)`.
fn weight(d: usize, k: usize) -> f64 {
    1.0 - 2.0 * k as f64 / (d - 1) as f64
}

/// `(j + shift) mod d`, result in `0..d`.
fn wrap(j: usize, shift: i64, d: usize) -> usize {
    (j as i64 + shift).rem_euclid(d as i64) as usize
}

pub fn cglmp_operator(s: &CglmpSetting) -> ComplexMatrix {
    let d = s.dim;
    let (a1, a2) = (s.alice.0.effects(), s.alice.1.effects());
    let (b1, b2) = (s.bob.0.effects(), s.bob.1.effects());
    let mut c = ComplexMatrix::zeros(d * d, d * d);
    for k in 0..d / 2 {
        let w = weight(d, k);
        let ki = k as i64;
        for j in 0..d {
            add_kron_scaled(&mut c, w, &a1[wrap(j, ki, d)], &b1[j]);
            add_kron_scaled(&mut c, w, &a2[j], &b1[wrap(j, ki + 1, d)]);
            add_kron_scaled(&mut c, w, &a2[wrap(j, ki, d)], &b2[j]);
            add_kron_scaled(&mut c, w, &a1[j], &b2[wrap(j, ki, d)]);
            add_kron_scaled(&mut c, -w, &a1[wrap(j, -ki - 1, d)], &b1[j]);
            add_kron_scaled(&mut c, -w, &a2[j], &b1[wrap(j, -ki, d)]);
            add_kron_scaled(&mut c, -w, &a2[wrap(j, -ki - 1, d)], &b2[j]);
            add_kron_scaled(&mut c, -w, &a1[j], &b2[wrap(j, -ki - 1, d)]);
        }
    }
    c
}

pub fn chi_max(s: &CglmpSetting) -> Result<CglmpResult> {
    let eig = eig_hermitian(&cglmp_operator(s))?;
    Ok(CglmpResult {
        chi: eig.eigenvalues[0],
        optimal_state: eig.eigenvectors.into_iter().next().expect("non-empty"),
        spectrum: eig.eigenvalues,
    })
}

/// Top eigenvalue only.
pub fn chi_value(s: &CglmpSetting) -> Result<f64> {
    Ok(eig_hermitian(&cglmp_operator(s))?.max_eigenvalue())
}

pub fn noisy_chi(s: &CglmpSetting, eta_a: f64, eta_b: f64) -> Result<CglmpResult> {
    chi_max(&s.with_noise(eta_a, eta_b)?)
}

pub(crate) fn check_state(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if !rho.is_square() || rho.rows() != dim {
        return Err(Error::InvalidState(format!(
            "expected a {dim}x{dim} density matrix, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    if !rho.is_hermitian(1e-9) {
        return Err(Error::InvalidState("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = eig_hermitian(rho)?.min_eigenvalue();
    if min < -1e-9 {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Joint distribution `P[j][k] = tr[(A_j ⊗ B_k) ρ]`.
fn joint_distribution(a: &Povm, b: &Povm, rho: &ComplexMatrix) -> Vec<Vec<f64>> {
    let d = a.dim();
    a.effects()
        .iter()
        .map(|ea| {
            b.effects()
                .iter()
                .map(|eb| {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..d {
                        for c in 0..d {
                            let x = ea[(r, c)];
                            if x.norm_sqr() == 0.0 {
                                continue;
                            }
                            for u in 0..d {
                                for v in 0..d {
                                    acc += x * eb[(u, v)] * rho[(c * d + v, r * d + u)];
                                }
                            }
                        }
                    }
                    acc.re
                })
                .collect()
        })
        .collect()
}

/// `P(X = Y + shift)` from a table indexed `[x][y]`.
fn prob_shifted(p: &[Vec<f64>], shift: i64) -> f64 {
    let d = p.len();
    (0..d).map(|y| p[wrap(y, shift, d)][y]).sum()
}

fn transpose(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = p.len();
    (0..d).map(|i| (0..d).map(|j| p[j][i]).collect()).collect()
}

/// CGLMP value of `rho` computed from explicit outcome probabilities.
pub fn chi_of_state(s: &CglmpSetting, rho: &ComplexMatrix) -> Result<f64> {
    check_state(rho, s.dim * s.dim)?;
    Ok(chi_of_state_unchecked(s, rho))
}

pub(crate) fn chi_of_state_unchecked(s: &CglmpSetting, rho: &ComplexMatrix) -> f64 {
    let d = s.dim;
    // tables indexed [alice outcome][bob outcome]
    let p11 = joint_distribution(&s.alice.0, &s.bob.0, rho);
    let p21 = joint_distribution(&s.alice.1, &s.bob.0, rho);
    let p22 = joint_distribution(&s.alice.1, &s.bob.1, rho);
    let p12 = joint_distribution(&s.alice.0, &s.bob.1, rho);
    // tables indexed [bob outcome][alice outcome]
    let q21 = transpose(&p21);
    let q12 = transpose(&p12);

    let mut total = 0.0;
    for k in 0..d / 2 {
        let k = k as i64;
        let plus = prob_shifted(&p11, k)
            + prob_shifted(&q21, k + 1)
            + prob_shifted(&p22, k)
            + prob_shifted(&q12, k);
        let minus = prob_shifted(&p11, -k - 1)
            + prob_shifted(&q21, -k)
            + prob_shifted(&p22, -k - 1)
            + prob_shifted(&q12, -k - 1);
        total += weight(d, k as usize) * (plus - minus);
    }
    total
}

/// Pure-state convenience wrapper around [`chi_of_state`].
pub fn chi_of_pure_state(s: &CglmpSetting, psi: &[C64]) -> Result<f64> {
    chi_of_state(s, &ComplexMatrix::outer(psi))
}

/// Maximal CHSH value for two-outcome projective measurements with
/// incompatibilities `i_a`, `i_b`: `2√(1 + i_a·i_b/(4·2^{2/p}))`.
pub fn chsh_closed_form(i_a: f64, i_b: f64, p: crate::linalg::SchattenP) -> Result<f64> {
    let max = crate::incompat::max_incompatibility(2, p);
    for (name, v) in [("i_a", i_a), ("i_b", i_b)] {
        if !(v >= 0.0 && v <= max + 1e-9) {
            return Err(Error::OutOfRange(format!(
                "{name} = {v} outside [0, {max}]"
            )));
        }
    }
    let t = p.two_pow_inv();
    Ok(2.0 * (1.0 + i_a * i_b / (4.0 * t * t)).sqrt())
}

/// Outcome of [`verify_necessity`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NecessityReport {
    pub trials: usize,
    pub evaluations: usize,
    pub max_lambda: f64,
    /// Largest top eigenvalue for each relabeling, in [`permutations`] order.
    pub per_permutation_max: Vec<f64>,
    /// Cases with `λ_max > 2 + 1e-9`.
    pub violations: usize,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Checks that a compatible pair on one side never yields a violation.
///
/// For each of `trials` Haar-random PVMs `M` (stream `t` of `seed`), the
/// `compatible_side` gets `(M, M relabeled)` for every outcome permutation
/// while the other side uses `fixed`.
pub fn verify_necessity(
    fixed: (&Povm, &Povm),
    compatible_side: Party,
    trials: usize,
    seed: u64,
) -> Result<NecessityReport> {
    let d = fixed.0.dim();
    let perms = permutations(d);
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let m = haar_pvm(d, &mut stream(seed, t as u64))?;
            perms
                .iter()
                .map(|perm| {
                    let pair = (m.as_povm().clone(), m.relabel(perm)?.into_povm());
                    let other = (fixed.0.clone(), fixed.1.clone());
                    let s = match compatible_side {
                        Party::Alice => CglmpSetting::new(pair, other)?,
                        Party::Bob => CglmpSetting::new(other, pair)?,
                    };
                    chi_value(&s)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut per_permutation_max = vec![f64::NEG_INFINITY; perms.len()];
    let mut violations = 0;
    for row in &per_trial {
        for (slot, &v) in per_permutation_max.iter_mut().zip(row) {
            *slot = slot.max(v);
            if v > LOCAL_BOUND + 1e-9 {
                violations += 1;
            }
        }
    }
    Ok(NecessityReport {
        trials,
        evaluations: trials * perms.len(),
        max_lambda: per_permutation_max.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_permutation_max,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, SchattenP, Subsystem};
    use crate::measurement::computational_pvm;

    const CHI3: f64 = 2.914_854_215_512_676;

    #[test]
    fn optimum_value_d3() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let r = chi_max(&s).unwrap();
        assert!((r.chi - (1.0 + (11.0f64 / 3.0).sqrt())).abs() < 1e-10);
        assert!((r.chi - CHI3).abs() < 1e-10);
        assert_eq!(r.chi, r.spectrum[0]);
    }

    #[test]
    fn tsirelson_d2() {
        let r = chi_max(&CglmpSetting::mub(2).unwrap()).unwrap();
        assert!((r.chi - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let cf = chsh_closed_form(2.0, 2.0, SchattenP::INF).unwrap();
        assert!((cf - r.chi).abs() < 1e-12);
    }

    #[test]
    fn equal_alice_settings_give_projector_form() {
        let s0 = CglmpSetting::optimal_interferometric(3).unwrap();
        let a = s0.alice().0.clone();
        let s = CglmpSetting::new((a.clone(), a), (s0.bob().0.clone(), s0.bob().1.clone())).unwrap();
        let c = cglmp_operator(&s);
        // H = (C + I)/3 must be a projector
        let mut h = c.clone();
        h.add_scaled(1.0, &ComplexMatrix::identity(9)).unwrap();
        let h = h.scale_real(1.0 / 3.0);
        assert!((&(&h * &h) - &h).frobenius_norm() < 1e-9);
        assert!(chi_value(&s).unwrap() <= 2.0 + 1e-9);
    }

    #[test]
    fn operator_is_hermitian() {
        for d in 2..=6 {
            let c = cglmp_operator(&CglmpSetting::optimal_interferometric(d).unwrap());
            assert!(c.hermitian_deviation() < 1e-12);
        }
    }

    #[test]
    fn probability_form_matches_operator() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let r = chi_max(&s).unwrap();
        let v = chi_of_pure_state(&s, &r.optimal_state).unwrap();
        assert!((v - r.chi).abs() < 1e-10);

        let mixed = ComplexMatrix::identity(9).scale_real(1.0 / 9.0);
        assert!(chi_of_state(&s, &mixed).unwrap().abs() < 1e-12);
    }

    #[test]
    fn optimal_state_has_one_gamma_one_schmidt_form() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let r = chi_max(&s).unwrap();
        let rho = ComplexMatrix::outer(&r.optimal_state);
        let red = partial_trace(&rho, (3, 3), Subsystem::A).unwrap();
        let mut p = eig_hermitian(&red).unwrap().eigenvalues;
        p.sort_by(|a, b| b.total_cmp(a));
        let c: Vec<f64> = p.iter().map(|x| x.max(0.0).sqrt()).collect();
        let gamma = (11f64.sqrt() - 3f64.sqrt()) / 2.0;
        assert!((c[0] - c[1]).abs() < 1e-8);
        assert!((c[2] / c[0] - gamma).abs() < 1e-8);
    }

    #[test]
    fn noisy_chi_is_quadratic() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        for eta in [0.0, 0.5, 0.8, 1.0] {
            let v = noisy_chi(&s, eta, eta).unwrap().chi;
            assert!((v - CHI3 * eta * eta).abs() < 1e-9, "eta {eta}: {v}");
        }
        assert!(noisy_chi(&s, 0.8, 0.8).unwrap().chi < 2.0);
        assert!(matches!(noisy_chi(&s, -0.1, 1.0), Err(Error::InvalidEta(_))));
    }

    #[test]
    fn chsh_closed_form_range() {
        assert_eq!(chsh_closed_form(0.0, 0.0, SchattenP::INF).unwrap(), 2.0);
        let i = 1.3;
        let want = 2.0 * (1.0 + i / 2.0f64).sqrt();
        assert!((chsh_closed_form(2.0, i, SchattenP::INF).unwrap() - want).abs() < 1e-15);
        assert!(chsh_closed_form(2.5, 1.0, SchattenP::INF).is_err());
        assert!(chsh_closed_form(-0.1, 1.0, SchattenP::INF).is_err());
    }

    #[test]
    fn permutations_of_three() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
    }

    #[test]
    fn necessity_small_run() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let (b1, b2) = s.bob();
        let rep = verify_necessity((b1, b2), Party::Alice, 20, 5).unwrap();
        assert_eq!(rep.evaluations, 120);
        assert_eq!(rep.violations, 0);
        let (a1, a2) = s.alice();
        let rep = verify_necessity((a1, a2), Party::Bob, 20, 5).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn setting_validation() {
        let e3 = computational_pvm(3).unwrap().into_povm();
        let e2 = computational_pvm(2).unwrap().into_povm();
        let r = CglmpSetting::new((e3.clone(), e3.clone()), (e3, e2));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn setting_json_round_trip() {
        let s = CglmpSetting::optimal_interferometric(3).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: CglmpSetting = serde_json::from_str(&text).unwrap();
        assert!((chi_value(&back).unwrap() - CHI3).abs() < 1e-12);
    }
}
