//! Measurement parametrizations, constrained extremization of the CGLMP
//! value at fixed incompatibility, and Schmidt analysis of optimal states.
//!
//! # Search space
//!
//! The CGLMP value and both incompatibilities are invariant under a local
//! unitary applied to both settings of one party, so the first setting of
//! each party is fixed to the computational basis (unitary manifold) or to
//! zero phases (interferometric manifold). What remains is
//!
//! * unitary manifold: one `d×d` complex matrix per party, `4d²` reals in
//!   total, mapped to a unitary by QR with phase-fixed diagonal;
//! * interferometric manifold: `d − 1` relative phases per party.
//!
//! # Constraint handling
//!
//! Each candidate is first repaired: if its incompatibility misses the
//! target band `|I − I_target| ≤ tol/2`, it is moved along the straight
//! line toward an anchor on the other side of the band (the compatible point
//! to lower `I`, a nearby MUB to raise it) and the crossing is located by
//! bisection. Whatever residual survives is charged a quadratic penalty
//! `μ·(I − I_target)²`, with `μ` growing by a factor of 10 per restart slot.
//! Only points within `tol` of the target are eligible as the reported
//! optimum.
//!
//! # Search
//!
//! CMA-ES in `restarts` independent slots, each with `budget / restarts`
//! objective evaluations and its own RNG stream. A slot that converges early
//! starts over from a fresh random mean. Slots run in parallel and are merged
//! by slot index, so the result depends only on the problem (seed included).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cglmp::{chi_max, cglmp_operator, CglmpSetting};
use crate::cmaes::Cma;
use crate::error::{Error, Result};
use crate::incompat::{incompatibility_rank1, max_incompatibility};
use crate::linalg::{eig_hermitian, orthonormalize, singular_values, ComplexMatrix, SchattenP, C64};
use crate::measurement::{fourier, interferometric_pvm, pvm_from_columns, PhaseVector, Pvm};
use crate::random::{stream, SampleRng};
use rand::Rng;

/// Nine Euler-type angles of a `U(3)` element.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct U3Params {
    pub phi: f64,
    pub theta: f64,
    pub varphi: f64,
    pub chi: f64,
    pub mu: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub beta2: f64,
}

impl U3Params {
    /// Inclusive bounds of every angle, in field order. `phi` excludes its
    /// lower end.
    pub const RANGES: [(&'static str, f64, f64); 9] = [
        ("phi", -PI, PI),
        ("theta", -PI / 2.0, PI / 2.0),
        ("varphi", 0.0, PI),
        ("chi", -PI / 4.0, PI / 4.0),
        ("mu", 0.0, PI / 2.0),
        ("alpha1", 0.0, PI),
        ("alpha2", 0.0, PI),
        ("alpha3", 0.0, PI),
        ("beta2", 0.0, PI),
    ];

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.phi,
            self.theta,
            self.varphi,
            self.chi,
            self.mu,
            self.alpha1,
            self.alpha2,
            self.alpha3,
            self.beta2,
        ]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self {
            phi: a[0],
            theta: a[1],
            varphi: a[2],
            chi: a[3],
            mu: a[4],
            alpha1: a[5],
            alpha2: a[6],
            alpha3: a[7],
            beta2: a[8],
        }
    }

    /// Uniform draw from the parameter box.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut a = [0.0; 9];
        for (slot, (_, lo, hi)) in a.iter_mut().zip(Self::RANGES) {
            *slot = rng.gen_range(lo..=hi);
        }
        if a[0] == -PI {
            a[0] = PI;
        }
        Self::from_array(a)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (v, (name, lo, hi))) in self.to_array().into_iter().zip(Self::RANGES).enumerate() {
            let below = if i == 0 { v <= lo } else { v < lo };
            if !v.is_finite() || below || v > hi {
                return Err(Error::AngleOutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

fn rot_z(a: f64) -> ComplexMatrix {
    let (c, s) = (a.cos(), a.sin());
    ComplexMatrix::from_real_rows(&[&[c, -s, 0.0], &[s, c, 0.0], &[0.0, 0.0, 1.0]]).expect("3x3")
}

fn rot_y(a: f64) -> ComplexMatrix {
    let (c, s) = (a.cos(), a.sin());
    ComplexMatrix::from_real_rows(&[&[c, 0.0, -s], &[0.0, 1.0, 0.0], &[s, 0.0, c]]).expect("3x3")
}

/// `Q M Qᵀ` with `Q = Q_φ Q_θ Q_ϕ` real rotations and `M` the phase-carrying
/// core.
pub fn u3_from_params(p: &U3Params) -> Result<ComplexMatrix> {
    p.validate()?;
    let e = |a: f64| C64::from_polar(1.0, a);
    let i = C64::new(0.0, 1.0);
    let (cx, sx) = (p.chi.cos(), p.chi.sin());
    let (cm, sm) = (p.mu.cos(), p.mu.sin());
    let core = ComplexMatrix::new(
        3,
        3,
        vec![
            e(p.alpha1) * cx,
            i * e(p.alpha2) * cm * sx,
            i * e(p.alpha3) * sm * sx,
            i * e(p.alpha1) * sx,
            e(p.alpha2) * cm * cx,
            e(p.alpha3) * sm * cx,
            C64::new(0.0, 0.0),
            e(p.beta2) * sm,
            -e(p.beta2 - p.alpha2 + p.alpha3) * cm,
        ],
    )?;
    let q = &(&rot_z(p.phi) * &rot_y(p.theta)) * &rot_z(p.varphi);
    Ok(&(&q * &core) * &q.transpose())
}

/// Schmidt coefficients (descending) and entanglement entropy in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub entropy: f64,
}

pub fn schmidt_and_entropy(state: &[C64], dims: (usize, usize)) -> Result<Schmidt> {
    let (da, db) = dims;
    if state.len() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} is not in a {da}x{db} space",
            state.len()
        )));
    }
    let norm = crate::linalg::vec_norm(state);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    let m = ComplexMatrix::new(da, db, state.to_vec())?;
    let coefficients = singular_values(&m);
    let entropy = coefficients
        .iter()
        .map(|c| c * c)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0);
    Ok(Schmidt {
        coefficients,
        entropy,
    })
}

/// For three Schmidt coefficients with two (nearly) equal, the ratio of the
/// odd one to the equal pair, i.e. `γ` in `(1, γ, 1)/√(2+γ²)`.
pub fn mvs_gamma(coefficients: &[f64]) -> Option<f64> {
    let [c0, c1, c2] = coefficients else {
        return None;
    };
    Some(if c0 - c1 <= c1 - c2 {
        c2 / (0.5 * (c0 + c1))
    } else {
        c0 / (0.5 * (c1 + c2))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Unitary,
    Interferometric,
}

/// Which party's incompatibility is pinned to the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
    Both,
}

macro_rules! text_enum {
    ($t:ty, $field:literal, $($name:literal => $v:expr),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $v { return f.write_str($name); })+
                unreachable!()
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($v),)+
                    _ => Err(Error::config($field, format!("unknown value `{s}`"))),
                }
            }
        }
    };
}

text_enum!(Sense, "sense", "min" => Sense::Min, "max" => Sense::Max);
text_enum!(Manifold, "manifold", "unitary" => Manifold::Unitary, "interferometric" => Manifold::Interferometric);
text_enum!(Side, "side", "alice" => Side::Alice, "bob" => Side::Bob, "both" => Side::Both);

impl Side {
    fn constrains_alice(self) -> bool {
        matches!(self, Side::Alice | Side::Both)
    }

    fn constrains_bob(self) -> bool {
        matches!(self, Side::Bob | Side::Both)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstrainedProblem {
    pub dim: usize,
    pub sense: Sense,
    /// `None` optimizes over all incompatibilities.
    pub i_target: Option<f64>,
    pub side: Side,
    pub tol: f64,
    pub manifold: Manifold,
    /// Objective evaluations.
    pub budget: usize,
    pub seed: u64,
    pub p: SchattenP,
    pub restarts: usize,
    /// Optional starting point for the first restart slot (unitary manifold).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<CglmpSetting>,
}

impl Default for ConstrainedProblem {
    fn default() -> Self {
        Self {
            dim: 3,
            sense: Sense::Max,
            i_target: None,
            side: Side::Bob,
            tol: 1e-3,
            manifold: Manifold::Unitary,
            budget: 20_000,
            seed: 0,
            p: SchattenP::INF,
            restarts: 4,
            warm_start: None,
        }
    }
}

impl ConstrainedProblem {
    pub fn validate(&self) -> Result<()> {
        if !(2..=9).contains(&self.dim) {
            return Err(Error::InvalidDimension(self.dim));
        }
        if self.manifold == Manifold::Interferometric && self.dim != 3 {
            return Err(Error::config(
                "manifold",
                "the interferometric manifold is only supported for d = 3",
            ));
        }
        if self.budget == 0 {
            return Err(Error::config("budget", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::config("tol", "must be positive"));
        }
        if let Some(t) = self.i_target {
            let max = max_incompatibility(self.dim, self.p);
            if !(0.0..=max).contains(&t) {
                return Err(Error::config(
                    "i_target",
                    format!("{t} outside [0, {max}] for d = {}", self.dim),
                ));
            }
        }
        if let Some(w) = &self.warm_start {
            if self.manifold != Manifold::Unitary {
                return Err(Error::config("warm_start", "only supported on the unitary manifold"));
            }
            if w.dim() != self.dim {
                return Err(Error::config("warm_start", "dimension differs from the problem"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimumReport {
    pub problem: ConstrainedProblem,
    pub value: f64,
    pub setting: CglmpSetting,
    pub i_alice: f64,
    pub i_bob: f64,
    /// Largest `|I − I_target|` over the constrained sides; 0 when
    /// unconstrained.
    pub residual: f64,
    pub evaluations: usize,
    /// The run that produced the optimum was stopped by the budget rather
    /// than by convergence.
    pub budget_exhausted: bool,
    pub state: Vec<C64>,
    pub schmidt: Vec<f64>,
    pub entropy: f64,
}

/// Maps search vectors to settings.
struct Space {
    dim: usize,
    manifold: Manifold,
    p: SchattenP,
    alice_first: Pvm,
    bob_first: Pvm,
    /// Upper anchors for the interferometric manifold, per party.
    phase_anchors: [Vec<Vec<f64>>; 2],
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Who {
    A = 0,
    B = 1,
}

impl Space {
    fn new(dim: usize, manifold: Manifold, p: SchattenP) -> Result<Self> {
        let (alice_first, bob_first) = match manifold {
            Manifold::Unitary => {
                let e = pvm_from_columns(&ComplexMatrix::identity(dim));
                (e.clone(), e)
            }
            Manifold::Interferometric => (
                interferometric_pvm(&PhaseVector::zeros(dim), false),
                interferometric_pvm(&PhaseVector::zeros(dim), true),
            ),
        };
        let mut space = Self {
            dim,
            manifold,
            p,
            alice_first,
            bob_first,
            phase_anchors: [Vec::new(), Vec::new()],
        };
        if manifold == Manifold::Interferometric {
            space.phase_anchors = [space.grid_anchors(Who::A)?, space.grid_anchors(Who::B)?];
        }
        Ok(space)
    }

    fn block_len(&self) -> usize {
        match self.manifold {
            Manifold::Unitary => 2 * self.dim * self.dim,
            Manifold::Interferometric => self.dim - 1,
        }
    }

    fn len(&self) -> usize {
        2 * self.block_len()
    }

    fn first(&self, who: Who) -> &Pvm {
        match who {
            Who::A => &self.alice_first,
            Who::B => &self.bob_first,
        }
    }

    /// The free measurement of one party, `None` if the block is singular.
    fn measurement(&self, who: Who, block: &[f64]) -> Result<Option<Pvm>> {
        Ok(match self.manifold {
            Manifold::Unitary => {
                let d = self.dim;
                let raw = ComplexMatrix::from_fn(d, d, |i, j| {
                    let k = 2 * (i * d + j);
                    C64::new(block[k], block[k + 1])
                });
                orthonormalize(&raw)?.map(|u| pvm_from_columns(&u))
            }
            Manifold::Interferometric => {
                let mut phases = vec![0.0];
                phases.extend_from_slice(block);
                Some(interferometric_pvm(&PhaseVector::new(phases)?, who == Who::B))
            }
        })
    }

    fn incompat(&self, who: Who, m: &Pvm) -> Result<f64> {
        incompatibility_rank1(self.first(who), m, self.p)
    }

    fn block_incompat(&self, who: Who, block: &[f64]) -> Result<Option<f64>> {
        match self.measurement(who, block)? {
            Some(m) => Ok(Some(self.incompat(who, &m)?)),
            None => Ok(None),
        }
    }

    fn setting(&self, x: &[f64]) -> Result<Option<(CglmpSetting, f64, f64)>> {
        let n = self.block_len();
        let (Some(a2), Some(b2)) = (
            self.measurement(Who::A, &x[..n])?,
            self.measurement(Who::B, &x[n..])?,
        ) else {
            return Ok(None);
        };
        let ia = self.incompat(Who::A, &a2)?;
        let ib = self.incompat(Who::B, &b2)?;
        let s = CglmpSetting::new(
            (self.alice_first.as_povm().clone(), a2.into_povm()),
            (self.bob_first.as_povm().clone(), b2.into_povm()),
        )?;
        Ok(Some((s, ia, ib)))
    }

    fn random_point(&self, rng: &mut SampleRng) -> Vec<f64> {
        match self.manifold {
            // Gaussian entries orthonormalize to a Haar-random unitary
            Manifold::Unitary => (0..self.len())
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal) * std::f64::consts::FRAC_1_SQRT_2)
                .collect(),
            Manifold::Interferometric => (0..self.len()).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
        }
    }

    fn initial_sigma(&self) -> f64 {
        match self.manifold {
            Manifold::Unitary => 0.3,
            Manifold::Interferometric => 1.0,
        }
    }

    /// Phase vectors on the `2π/d` grid whose measurement is maximally
    /// incompatible with the party's first setting.
    fn grid_anchors(&self, who: Who) -> Result<Vec<Vec<f64>>> {
        let d = self.dim;
        let max = max_incompatibility(d, self.p);
        let step = 2.0 * PI / d as f64;
        let mut out = Vec::new();
        let count = d.pow(d as u32 - 1);
        for code in 0..count {
            let mut c = code;
            let block: Vec<f64> = (1..d)
                .map(|_| {
                    let k = c % d;
                    c /= d;
                    k as f64 * step
                })
                .collect();
            if let Some(i) = self.block_incompat(who, &block)? {
                if i >= max - 1e-9 {
                    out.push(block);
                }
            }
        }
        Ok(out)
    }

    /// Anchor with incompatibility 0.
    fn low_anchor(&self, _block: &[f64]) -> Vec<f64> {
        match self.manifold {
            Manifold::Unitary => {
                let d = self.dim;
                let mut v = vec![0.0; 2 * d * d];
                for i in 0..d {
                    v[2 * (i * d + i)] = 1.0;
                }
                v
            }
            Manifold::Interferometric => vec![0.0; self.dim - 1],
        }
    }

    /// Maximally incompatible anchor close to `block`.
    fn high_anchor(&self, who: Who, block: &[f64]) -> Result<Option<Vec<f64>>> {
        match self.manifold {
            Manifold::Unitary => {
                let d = self.dim;
                let Some(u) = self.measurement(who, block)?.map(|m| m.basis()).transpose()? else {
                    return Ok(None);
                };
                // Fourier columns greedily matched to the candidate's columns,
                // each rotated to the candidate's phase
                let f = fourier(d);
                let mut used = vec![false; d];
                let mut anchor = ComplexMatrix::zeros(d, d);
                for j in 0..d {
                    let uc = u.column(j);
                    let (best, ov) = (0..d)
                        .filter(|&k| !used[k])
                        .map(|k| (k, crate::linalg::inner(&f.column(k), &uc)))
                        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                        .expect("unused column");
                    used[best] = true;
                    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
                    for i in 0..d {
                        anchor[(i, j)] = f[(i, best)] * phase;
                    }
                }
                let mut v = vec![0.0; 2 * d * d];
                for i in 0..d {
                    for j in 0..d {
                        v[2 * (i * d + j)] = anchor[(i, j)].re;
                        v[2 * (i * d + j) + 1] = anchor[(i, j)].im;
                    }
                }
                Ok(Some(v))
            }
            Manifold::Interferometric => {
                let wrap = |x: f64| (x + PI).rem_euclid(2.0 * PI) - PI;
                let best = self.phase_anchors[who as usize]
                    .iter()
                    .map(|a| {
                        let lifted: Vec<f64> = a.iter().zip(block).map(|(t, x)| x + wrap(t - x)).collect();
                        let dist: f64 = lifted.iter().zip(block).map(|(t, x)| (t - x).powi(2)).sum();
                        (dist, lifted)
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                Ok(best.map(|(_, v)| v))
            }
        }
    }

    /// Moves `block` toward an anchor until its incompatibility lies within
    /// `tol/2` of `target`. Returns the original block when no anchor
    /// brackets the band.
    fn repair(&self, who: Who, block: &[f64], target: f64, tol: f64) -> Result<Vec<f64>> {
        let Some(i0) = self.block_incompat(who, block)? else {
            return Ok(block.to_vec());
        };
        let half = 0.5 * tol;
        if (i0 - target).abs() <= half {
            return Ok(block.to_vec());
        }
        let above = i0 > target;
        // aim for the middle of the near half of the band
        let level = if above { target + 0.5 * half } else { target - 0.5 * half };
        let fine = 0.5 * half;
        let anchor = if above {
            Some(self.low_anchor(block))
        } else {
            self.high_anchor(who, block)?
        };
        let Some(anchor) = anchor else {
            return Ok(block.to_vec());
        };
        match self.block_incompat(who, &anchor)? {
            Some(ia) if (ia > level) != above || (ia - level).abs() <= fine => {}
            _ => return Ok(block.to_vec()),
        }
        let at = |s: f64| -> Vec<f64> {
            block.iter().zip(&anchor).map(|(x, a)| (1.0 - s) * x + s * a).collect()
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = anchor.clone();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let cand = at(mid);
            let Some(i) = self.block_incompat(who, &cand)? else {
                return Ok(block.to_vec());
            };
            if (i - level).abs() <= fine {
                return Ok(cand);
            }
            if (i > level) == above {
                lo = mid;
            } else {
                hi = mid;
                best = cand;
            }
        }
        Ok(best)
    }

    /// Converts a setting whose measurements are rank-1 PVMs into a search
    /// vector, fixing each party's first setting to the computational basis.
    fn encode_unitary(&self, s: &CglmpSetting) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut out = Vec::with_capacity(self.len());
        for (first, second) in [s.alice(), s.bob()] {
            let u1 = Pvm::new(first.clone())?.basis()?;
            let u2 = Pvm::new(second.clone())?.basis()?;
            let rel = u1.dagger().matmul(&u2)?;
            for i in 0..d {
                for j in 0..d {
                    out.push(rel[(i, j)].re);
                    out.push(rel[(i, j)].im);
                }
            }
        }
        Ok(out)
    }
}

/// One evaluated, repaired point.
#[derive(Clone)]
struct Evaluated {
    x: Vec<f64>,
    chi: f64,
    residual: f64,
}

struct SlotOutcome {
    best: Option<Evaluated>,
    evaluations: usize,
    converged: bool,
}

struct Runner<'a> {
    problem: &'a ConstrainedProblem,
    space: Space,
}

impl Runner<'_> {
    fn residual(&self, ia: f64, ib: f64) -> f64 {
        let Some(t) = self.problem.i_target else {
            return 0.0;
        };
        let side = self.problem.side;
        let mut r: f64 = 0.0;
        if side.constrains_alice() {
            r = r.max((ia - t).abs());
        }
        if side.constrains_bob() {
            r = r.max((ib - t).abs());
        }
        r
    }

    fn repair(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Some(t) = self.problem.i_target else {
            return Ok(x.to_vec());
        };
        let n = self.space.block_len();
        let tol = self.problem.tol;
        let side = self.problem.side;
        let mut out = Vec::with_capacity(x.len());
        out.extend(if side.constrains_alice() {
            self.space.repair(Who::A, &x[..n], t, tol)?
        } else {
            x[..n].to_vec()
        });
        out.extend(if side.constrains_bob() {
            self.space.repair(Who::B, &x[n..], t, tol)?
        } else {
            x[n..].to_vec()
        });
        Ok(out)
    }

    fn evaluate(&self, x: &[f64]) -> Result<Option<Evaluated>> {
        let x = self.repair(x)?;
        let Some((s, ia, ib)) = self.space.setting(&x)? else {
            return Ok(None);
        };
        let chi = eig_hermitian(&cglmp_operator(&s))?.max_eigenvalue();
        Ok(Some(Evaluated {
            residual: self.residual(ia, ib),
            x,
            chi,
        }))
    }

    /// Lower is better.
    fn fitness(&self, e: &Option<Evaluated>, mu: f64) -> f64 {
        match e {
            None => f64::INFINITY,
            Some(e) => {
                let signed = match self.problem.sense {
                    Sense::Max => -e.chi,
                    Sense::Min => e.chi,
                };
                signed + mu * e.residual * e.residual
            }
        }
    }

    fn better(&self, a: &Evaluated, b: &Evaluated) -> bool {
        match self.problem.sense {
            Sense::Max => a.chi > b.chi,
            Sense::Min => a.chi < b.chi,
        }
    }

    fn feasible(&self, e: &Evaluated) -> bool {
        e.residual <= self.problem.tol
    }

    fn consider(&self, best: &mut Option<Evaluated>, cand: &Option<Evaluated>) {
        if let Some(c) = cand {
            if self.feasible(c) && best.as_ref().is_none_or(|b| self.better(c, b)) {
                *best = Some(c.clone());
            }
        }
    }

    fn run_slot(&self, slot: usize, budget: usize) -> Result<SlotOutcome> {
        let mut rng = stream(self.problem.seed, slot as u64);
        let mu = 10.0 * 10f64.powi(slot as i32);
        let mut best: Option<Evaluated> = None;
        let mut evaluations = 0;
        let mut converged = false;
        let mut first_run = true;

        while evaluations < budget {
            let (mean, sigma) = match (&self.problem.warm_start, first_run && slot == 0) {
                (Some(w), true) => {
                    let x0 = self.space.encode_unitary(w)?;
                    let e = self.evaluate(&x0)?;
                    evaluations += 1;
                    self.consider(&mut best, &e);
                    (x0, 0.05)
                }
                _ => (self.space.random_point(&mut rng), self.space.initial_sigma()),
            };
            first_run = false;
            let mut cma = Cma::new(mean, sigma);
            converged = false;
            while evaluations < budget {
                let xs = cma.ask(&mut rng);
                let take = xs.len().min(budget - evaluations);
                let evals = xs[..take]
                    .iter()
                    .map(|x| self.evaluate(x))
                    .collect::<Result<Vec<_>>>()?;
                evaluations += take;
                for e in &evals {
                    self.consider(&mut best, e);
                }
                if take < xs.len() {
                    break;
                }
                let fs: Vec<f64> = evals.iter().map(|e| self.fitness(e, mu)).collect();
                cma.tell(&xs, &fs);
                if cma.converged() {
                    converged = true;
                    break;
                }
            }
        }
        Ok(SlotOutcome {
            best,
            evaluations,
            converged,
        })
    }
}

/// Seeded stochastic search for the extremal CGLMP value at fixed
/// incompatibility. Identical problems give identical reports.
pub fn constrained_chi_extremum(problem: &ConstrainedProblem) -> Result<OptimumReport> {
    problem.validate()?;
    let runner = Runner {
        problem,
        space: Space::new(problem.dim, problem.manifold, problem.p)?,
    };
    let k = problem.restarts.min(problem.budget);
    let base = problem.budget / k;
    let extra = problem.budget % k;
    let outcomes = (0..k)
        .into_par_iter()
        .map(|slot| runner.run_slot(slot, base + usize::from(slot < extra)))
        .collect::<Result<Vec<_>>>()?;

    let evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let mut winner: Option<(&Evaluated, bool)> = None;
    for o in &outcomes {
        if let Some(b) = &o.best {
            if winner.is_none_or(|(w, _)| runner.better(b, w)) {
                winner = Some((b, o.converged));
            }
        }
    }
    let Some((best, converged)) = winner else {
        return Err(Error::InfeasibleTarget(format!(
            "no point within {} of I = {:?} after {evaluations} evaluations",
            problem.tol, problem.i_target
        )));
    };
    let (setting, i_alice, i_bob) = runner
        .space
        .setting(&best.x)?
        .expect("best point was evaluated successfully");
    let result = chi_max(&setting)?;
    let schmidt = schmidt_and_entropy(&result.optimal_state, (problem.dim, problem.dim))?;
    Ok(OptimumReport {
        problem: problem.clone(),
        value: result.chi,
        setting,
        i_alice,
        i_bob,
        residual: best.residual,
        evaluations,
        budget_exhausted: !converged,
        state: result.optimal_state,
        schmidt: schmidt.coefficients,
        entropy: schmidt.entropy,
    })
}

/// One point of [`interferometric_scan`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub xi: f64,
    pub i_alice: f64,
    pub i_bob: f64,
    pub chi: f64,
}

/// Qutrit interferometric setting with Alice's second phases `(0, ξ, 2π/3)`
/// and the optimal phases everywhere else.
pub fn scan_setting(xi: f64) -> Result<CglmpSetting> {
    CglmpSetting::interferometric(
        &PhaseVector::zeros(3),
        &PhaseVector::new(vec![0.0, xi, 2.0 * PI / 3.0])?,
        &PhaseVector::linear(3, PI / 6.0),
        &PhaseVector::linear(3, -PI / 6.0),
    )
}

pub fn scan_point(xi: f64) -> Result<ScanPoint> {
    let s = scan_setting(xi)?;
    let (a1, a2) = s.alice();
    let (b1, b2) = s.bob();
    Ok(ScanPoint {
        xi,
        i_alice: incompatibility_rank1(a1, a2, SchattenP::INF)?,
        i_bob: incompatibility_rank1(b1, b2, SchattenP::INF)?,
        chi: crate::cglmp::chi_value(&s)?,
    })
}

/// `ξ_k = 2πk/(grid − 1)` for `k = 0..grid`.
pub fn interferometric_scan(grid: usize) -> Result<Vec<ScanPoint>> {
    if grid < 2 {
        return Err(Error::config("grid", "needs at least 2 points"));
    }
    (0..grid)
        .into_par_iter()
        .map(|k| scan_point(2.0 * PI * k as f64 / (grid - 1) as f64))
        .collect()
}
