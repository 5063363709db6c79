//! Seeded randomness: per-sample streams and Haar-distributed unitaries.
//!
//! Stream `i` of master seed `s` is ChaCha8 seeded with `s` and switched to
//! stream number `i`. Streams are independent, so samples can be evaluated
//! in any order on any number of workers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, ComplexMatrix, C64};
use crate::measurement::{pvm_from_columns, Pvm};

pub type SampleRng = ChaCha8Rng;

/// The RNG owned by sample `index` of a run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    loop {
        // singular draws have probability zero; redraw if one shows up
        if let Some(u) = orthonormalize(&ginibre(d, d, rng))? {
            return Ok(u);
        }
    }
}

pub fn haar_pvm<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Pvm> {
    Ok(pvm_from_columns(&haar_unitary(d, rng)?))
}

/// Uniformly random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let g = ginibre(dim, 1, rng);
    let v = g.column(0);
    let n = crate::linalg::vec_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Random full-rank density matrix `GG†/tr(GG†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let rho = &g * &g.dagger();
    let t = rho.trace().re;
    rho.scale_real(1.0 / t).hermitian_part()
}
