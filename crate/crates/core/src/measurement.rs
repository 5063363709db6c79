//! Measurements on a single qudit: general POVMs, rank-1 PVMs, the Fourier
//! and interferometric families, and white-noise mixing.
//!
//! Fourier convention used everywhere: `F[j][k] = exp(2πi·jk/d)/√d` with
//! zero-based indices.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64, ONE};

/// Tolerance on completeness, positivity, idempotence and orthogonality.
pub const MEASUREMENT_TOL: f64 = 1e-9;

/// Tolerance on `‖U†U − I‖_F` accepted by [`pvm_from_unitary`].
pub const UNITARY_TOL: f64 = 1e-8;

/// An ordered list of effects on `C^d`, outcome `j` ↔ `effects[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct Povm {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (j, e) in effects.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "effect {j} is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
            if !e.is_hermitian(MEASUREMENT_TOL) {
                return Err(Error::InvalidPovm(format!("effect {j} is not Hermitian")));
            }
            let min = eig_hermitian(e)?.min_eigenvalue();
            if min < -MEASUREMENT_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {j} has negative eigenvalue {min:.3e}"
                )));
            }
            sum.add_scaled(1.0, e)?;
        }
        let gap = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if gap > MEASUREMENT_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {gap:.3e}"
            )));
        }
        Ok(Self { dim, effects })
    }

    /// Skips validation. Only for effects that are valid by construction.
    pub(crate) fn from_effects_unchecked(effects: Vec<ComplexMatrix>) -> Self {
        let dim = effects[0].rows();
        Self { dim, effects }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, j: usize) -> &ComplexMatrix {
        &self.effects[j]
    }

    /// New outcome `j` is old outcome `perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.outcomes();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidPovm(format!(
                "{perm:?} is not a permutation of {n} outcomes"
            )));
        }
        Ok(Self {
            dim: self.dim,
            effects: perm.iter().map(|&k| self.effects[k].clone()).collect(),
        })
    }

    /// Every effect mapped to `W E W†`.
    pub fn conjugated_by(&self, w: &ComplexMatrix) -> Result<Self> {
        if !w.is_square() || w.rows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "conjugating a dimension-{} POVM by a {}x{} matrix",
                self.dim,
                w.rows(),
                w.cols()
            )));
        }
        let dev = w.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let effects = self
            .effects
            .iter()
            .map(|e| e.conjugate_by(w))
            .collect::<Result<_>>()?;
        Ok(Self::from_effects_unchecked(effects))
    }

    /// Is every effect a rank-1 projector, with `d` of them mutually orthogonal?
    pub fn is_rank1_projective(&self) -> bool {
        self.outcomes() == self.dim
            && self.effects.iter().all(|e| {
                (e.trace() - ONE).norm() <= MEASUREMENT_TOL
                    && (&(e * e) - e).frobenius_norm() <= MEASUREMENT_TOL
            })
            && self.effects.iter().enumerate().all(|(i, a)| {
                self.effects[i + 1..]
                    .iter()
                    .all(|b| (a * b).frobenius_norm() <= MEASUREMENT_TOL)
            })
    }
}

/// Serialized form: `{dim, outcomes, effects}` with every effect stored as a
/// flat row-major list of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct PovmJson {
    dim: usize,
    outcomes: usize,
    effects: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;

    fn try_from(j: PovmJson) -> Result<Self> {
        if j.effects.len() != j.outcomes {
            return Err(Error::InvalidPovm(format!(
                "declared {} outcomes but found {} effects",
                j.outcomes,
                j.effects.len()
            )));
        }
        let effects = j
            .effects
            .into_iter()
            .map(|e| {
                let data = e.into_iter().map(|[re, im]| C64::new(re, im)).collect();
                ComplexMatrix::new(j.dim, j.dim, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(effects)
    }
}

impl From<Povm> for PovmJson {
    fn from(p: Povm) -> Self {
        PovmJson {
            dim: p.dim,
            outcomes: p.effects.len(),
            effects: p
                .effects
                .iter()
                .map(|e| e.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// A POVM whose `d` effects are orthogonal rank-1 projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Povm", into = "Povm")]
pub struct Pvm(Povm);

impl Pvm {
    pub fn new(povm: Povm) -> Result<Self> {
        if !povm.is_rank1_projective() {
            return Err(Error::InvalidPvm(
                "effects are not d orthogonal rank-1 projectors".into(),
            ));
        }
        Ok(Self(povm))
    }

    pub fn as_povm(&self) -> &Povm {
        &self.0
    }

    pub fn into_povm(self) -> Povm {
        self.0
    }

    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        Ok(Self(self.0.relabel(perm)?))
    }

    pub fn conjugated_by(&self, w: &ComplexMatrix) -> Result<Self> {
        Ok(Self(self.0.conjugated_by(w)?))
    }

    /// A unitary whose `j`-th column spans the range of effect `j`.
    pub fn basis(&self) -> Result<ComplexMatrix> {
        let d = self.0.dim;
        let mut u = ComplexMatrix::zeros(d, d);
        for (j, e) in self.0.effects.iter().enumerate() {
            let v = eig_hermitian(e)?.eigenvectors.swap_remove(0);
            for (i, z) in v.into_iter().enumerate() {
                u[(i, j)] = z;
            }
        }
        Ok(u)
    }
}

impl Deref for Pvm {
    type Target = Povm;

    fn deref(&self) -> &Povm {
        &self.0
    }
}

impl From<Pvm> for Povm {
    fn from(p: Pvm) -> Povm {
        p.0
    }
}

impl TryFrom<Povm> for Pvm {
    type Error = Error;

    fn try_from(p: Povm) -> Result<Self> {
        Pvm::new(p)
    }
}

/// `d` phases defining `V(φ) = F·diag(e^{iφ})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if phases.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { phases })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            phases: vec![0.0; d],
        }
    }

    /// `φ(j) = slope · j`.
    pub fn linear(d: usize, slope: f64) -> Self {
        Self {
            phases: (0..d).map(|j| slope * j as f64).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

/// The discrete Fourier transform on `C^d`.
pub fn fourier(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        let angle = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
        C64::from_polar(norm, angle)
    })
}

pub fn pvm_from_unitary(u: &ComplexMatrix) -> Result<Pvm> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "basis matrix must be square, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(pvm_from_columns(u))
}

/// Column projectors of a matrix already known to be unitary.
pub(crate) fn pvm_from_columns(u: &ComplexMatrix) -> Pvm {
    let effects = (0..u.cols())
        .map(|j| ComplexMatrix::outer(&u.column(j)))
        .collect();
    Pvm(Povm::from_effects_unchecked(effects))
}

pub fn computational_pvm(d: usize) -> Result<Pvm> {
    check_dim(d)?;
    Ok(pvm_from_columns(&ComplexMatrix::identity(d)))
}

/// Computational and Fourier bases.
pub fn mub_pair(d: usize) -> Result<(Pvm, Pvm)> {
    check_dim(d)?;
    Ok((
        pvm_from_columns(&ComplexMatrix::identity(d)),
        pvm_from_columns(&fourier(d)),
    ))
}

/// `V = F·diag(e^{iφ})`, or `F*·diag(e^{iφ})` when `conjugate_fourier`.
pub fn interferometer(phases: &PhaseVector, conjugate_fourier: bool) -> ComplexMatrix {
    let d = phases.dim();
    let f = if conjugate_fourier { fourier(d).conj() } else { fourier(d) };
    let diag: Vec<C64> = phases
        .phases()
        .iter()
        .map(|&x| C64::from_polar(1.0, x))
        .collect();
    f.matmul(&ComplexMatrix::from_diag(&diag))
        .expect("square factors of equal size")
}

/// PVM with effects `V†|j⟩⟨j|V`.
pub fn interferometric_pvm(phases: &PhaseVector, conjugate_fourier: bool) -> Pvm {
    pvm_from_columns(&interferometer(phases, conjugate_fourier).dagger())
}

/// Mixes every effect with white noise: `E → ηE + (1−η)·tr(E)·I/d`.
pub fn add_white_noise(m: &Povm, eta: f64) -> Result<Povm> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidEta(eta));
    }
    let d = m.dim();
    let id = ComplexMatrix::identity(d);
    let effects = m
        .effects()
        .iter()
        .map(|e| {
            let mut out = e.scale_real(eta);
            let w = (1.0 - eta) * e.trace().re / d as f64;
            out.add_scaled(w, &id).expect("effect is d x d");
            out
        })
        .collect();
    Ok(Povm::from_effects_unchecked(effects))
}
