//! Minimal CMA-ES (minimization) with full covariance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) struct Cma {
    n: usize,
    pub(crate) lambda: usize,
    mu: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chin: f64,
    pub(crate) mean: DVector<f64>,
    sigma: f64,
    pc: DVector<f64>,
    ps: DVector<f64>,
    c: DMatrix<f64>,
    b: DMatrix<f64>,
    d: DVector<f64>,
    generation: usize,
}

impl Cma {
    pub(crate) fn new(mean: Vec<f64>, sigma: f64) -> Self {
        let n = mean.len();
        let nf = n as f64;
        let lambda = 4 + (3.0 * nf.ln()).floor() as usize;
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu)
            .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chin = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            n,
            lambda,
            mu,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chin,
            mean: DVector::from_vec(mean),
            sigma,
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            c: DMatrix::identity(n, n),
            b: DMatrix::identity(n, n),
            d: DVector::from_element(n, 1.0),
            generation: 0,
        }
    }

    pub(crate) fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        (0..self.lambda)
            .map(|_| {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = &self.b * z.component_mul(&self.d);
                (&self.mean + y * self.sigma).iter().copied().collect()
            })
            .collect()
    }

    /// Updates the search distribution from one generation, `fs` lower is better.
    pub(crate) fn tell(&mut self, xs: &[Vec<f64>], fs: &[f64]) {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        let old = self.mean.clone();
        let ys: Vec<DVector<f64>> = order[..self.mu]
            .iter()
            .map(|&i| (DVector::from_column_slice(&xs[i]) - &old) / self.sigma)
            .collect();
        let mut step = DVector::zeros(self.n);
        for (w, y) in self.weights.iter().zip(&ys) {
            step += y * *w;
        }
        self.mean = &old + &step * self.sigma;

        let inv_d = self.d.map(|x| 1.0 / x);
        let c_inv_half_step = &self.b * (self.b.transpose() * &step).component_mul(&inv_d);
        self.ps = &self.ps * (1.0 - self.cs)
            + c_inv_half_step * (self.cs * (2.0 - self.cs) * self.mueff).sqrt();
        self.generation += 1;
        let denom = (1.0 - (1.0 - self.cs).powi(2 * self.generation as i32)).sqrt();
        let hsig = self.ps.norm() / denom / self.chin < 1.4 + 2.0 / (self.n as f64 + 1.0);
        let h = if hsig { 1.0 } else { 0.0 };
        self.pc = &self.pc * (1.0 - self.cc) + &step * (h * (self.cc * (2.0 - self.cc) * self.mueff).sqrt());

        let mut rank_mu = DMatrix::zeros(self.n, self.n);
        for (w, y) in self.weights.iter().zip(&ys) {
            rank_mu += y * y.transpose() * *w;
        }
        let old_c = self.c.clone();
        self.c = &old_c * (1.0 - self.c1 - self.cmu)
            + (&self.pc * self.pc.transpose() + &old_c * ((1.0 - h) * self.cc * (2.0 - self.cc))) * self.c1
            + rank_mu * self.cmu;
        self.sigma *= ((self.cs / self.damps) * (self.ps.norm() / self.chin - 1.0)).exp();

        let sym = (&self.c + self.c.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        self.b = eig.eigenvectors;
        self.d = eig.eigenvalues.map(|x| x.max(1e-20).sqrt());
        self.c = &self.b * DMatrix::from_diagonal(&self.d.map(|x| x * x)) * self.b.transpose();
    }

    pub(crate) fn converged(&self) -> bool {
        let spread = self.sigma * self.d.max();
        !spread.is_finite() || spread < 1e-9 || self.d.max() > 1e7 * self.d.min().max(1e-300)
    }
}
