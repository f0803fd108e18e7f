//! Monte-Carlo and direct-product oracles for the MP machinery.

use grokklab_core::quadrature::{integrate, Tolerance};
use grokklab_core::rmt::{
    eigenvalues_of, ks_distance, mp_cdf, mp_density, mp_expectation, sample_gram, spectrum_of, GaussianDataset,
    MpParams,
};
use grokklab_core::rng::Stream;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::ChiSquared;

/// Tridiagonal Laguerre model: the eigenvalues of T/m share the joint law of
/// the spectrum of XᵀX/m for an m×n standard Gaussian X (m ≥ n).
struct Laguerre {
    diag: Vec<f64>,
    off_sq: Vec<f64>,
}

impl Laguerre {
    fn sample(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let chi = |k: usize, rng: &mut ChaCha8Rng| rng.sample(ChiSquared::new(k as f64).unwrap()).sqrt();
        let b_diag: Vec<f64> = (0..n).map(|i| chi(m - i, rng)).collect();
        let b_sub: Vec<f64> = (0..n - 1).map(|i| chi(n - 1 - i, rng)).collect();
        let scale = 1.0 / m as f64;
        let diag = (0..n)
            .map(|i| {
                let below = if i > 0 { b_sub[i - 1].powi(2) } else { 0.0 };
                (b_diag[i].powi(2) + below) * scale
            })
            .collect();
        let off_sq = (0..n - 1).map(|i| (b_diag[i] * b_sub[i] * scale).powi(2)).collect();
        Self { diag, off_sq }
    }

    /// Number of eigenvalues below x (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let prev = if i > 0 { self.off_sq[i - 1] / q } else { 0.0 };
            q = self.diag[i] - x - prev;
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// All eigenvalues to within `tol`, by recursive bisection on Sturm counts.
    fn eigenvalues(&self, hi: f64, tol: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.diag.len());
        self.split(0.0, hi, self.count_below(0.0), self.count_below(hi), tol, &mut out);
        out
    }

    fn split(&self, lo: f64, hi: f64, c_lo: usize, c_hi: usize, tol: f64, out: &mut Vec<f64>) {
        if c_hi == c_lo {
            return;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol {
            out.extend(std::iter::repeat_n(mid, c_hi - c_lo));
            return;
        }
        let c_mid = self.count_below(mid);
        self.split(lo, mid, c_lo, c_mid, tol, out);
        self.split(mid, hi, c_mid, c_hi, tol, out);
    }
}

#[test]
fn laguerre_model_matches_dense_gram() {
    // Sanity check of the oracle itself at a size where both are cheap.
    let (n, m) = (200, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut lag_mean = 0.0;
    let mut dense_mean = 0.0;
    let reps = 10;
    for s in 0..reps {
        let t = Laguerre::sample(n, m, &mut rng);
        lag_mean += t.eigenvalues(10.0, 1e-10).iter().map(|v| v * v).sum::<f64>() / n as f64;
        let g = sample_gram(n, m, 100 + s).unwrap();
        dense_mean += eigenvalues_of(&g).unwrap().iter().map(|v| v * v).sum::<f64>() / n as f64;
    }
    // Both estimate E[ν²] ≈ 1 + λ + O(1/n).
    assert!((lag_mean / reps as f64 - dense_mean / reps as f64).abs() < 0.02);
}

#[test]
fn density_matches_spectral_histogram() {
    let p = MpParams::new(0.5).unwrap();
    let (n, m, reps) = (2000, 4000, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let width = 0.05;
    let edges: Vec<f64> = (0..=(p.lambda_plus() / width).ceil() as usize).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; edges.len() - 1];
    for _ in 0..reps {
        let t = Laguerre::sample(n, m, &mut rng);
        let below: Vec<usize> = edges.iter().map(|&e| t.count_below(e)).collect();
        for b in 0..counts.len() {
            counts[b] += below[b + 1] - below[b];
        }
    }
    let total = (n * reps) as f64;
    for b in 0..counts.len() {
        let mass = integrate(|x| mp_density(p, x), edges[b], edges[b + 1], Tolerance::absolute(1e-12)).unwrap().value;
        let expected = total * mass;
        let sigma = expected.sqrt().max(1.0);
        assert!(
            (counts[b] as f64 - expected).abs() <= 3.0 * sigma,
            "bin [{}, {}): {} vs {expected}",
            edges[b],
            edges[b + 1],
            counts[b]
        );
    }
    // The bin containing ν = 1 read as a density.
    let b = (1.0 / width) as usize;
    let hist_density = counts[b] as f64 / total / width;
    let mid = mp_density(p, 1.0 + 0.5 * width);
    assert!((hist_density / mid - 1.0).abs() < 0.02);
}

#[test]
fn expectation_matches_monte_carlo() {
    let p = MpParams::new(0.5).unwrap();
    let exact = mp_expectation(p, |nu| (-nu).exp(), 1e-12).unwrap();
    let (n, m, reps) = (2000, 4000, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut acc = 0.0;
    for _ in 0..reps {
        let t = Laguerre::sample(n, m, &mut rng);
        acc += t.eigenvalues(p.lambda_plus() * 1.5, 1e-8).iter().map(|&v| (-v).exp()).sum::<f64>() / n as f64;
    }
    let mc = acc / reps as f64;
    assert!((mc - exact).abs() < 1e-4, "MC {mc} vs quadrature {exact}");
}

#[test]
fn sampled_gram_follows_mp_cdf() {
    let g = sample_gram(1000, 1111, 7).unwrap();
    let ev = eigenvalues_of(&g).unwrap();
    let d = ks_distance(&ev, MpParams::new(1000.0 / 1111.0).unwrap(), 1e-10).unwrap();
    assert!(d <= 0.03, "KS = {d}");
    let mean = ev.iter().sum::<f64>() / ev.len() as f64;
    assert!((mean - 1.0).abs() < 0.01);
}

#[test]
fn zero_fraction_overparameterized() {
    let g = sample_gram(1000, 667, 3).unwrap();
    let ev = eigenvalues_of(&g).unwrap();
    let frac = ev.iter().filter(|&&v| v < 1e-10).count() as f64 / ev.len() as f64;
    assert!((frac - (1.0 - 667.0 / 1000.0)).abs() < 0.02);
    assert!((frac - 1.0 / 3.0).abs() < 0.02);
}

#[test]
fn dataset_moments() {
    let ds = GaussianDataset::sample(400, 100, 9, Stream::Data).unwrap();
    let n = ds.samples.len() as f64;
    let mean = ds.samples.sum() / n;
    let var = ds.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let band = 5.0 / n.sqrt();
    assert!(mean.abs() < band);
    assert!((var - 1.0).abs() < band);
    let again = GaussianDataset::sample(400, 100, 9, Stream::Data).unwrap();
    assert_eq!(ds.samples, again.samples);
}

#[test]
fn reconstruction_random_64() {
    let ds = GaussianDataset::sample(50, 64, 21, Stream::Data).unwrap();
    let g = ds.gram();
    let d0 = GaussianDataset::sample(64, 3, 22, Stream::Student).unwrap().samples;
    let s = spectrum_of(&g, &d0).unwrap();
    let direct = (d0.transpose() * &g * &d0).trace();
    let recon = s.weighted_sum(|nu| nu);
    assert!((recon / direct - 1.0).abs() < 1e-8);
    // 50 samples in 64 dimensions leave at least 14 null directions.
    assert!(s.count_zero(1e-10) >= 14);
}

fn sym_exp(g: &DMatrix<f64>, c: f64) -> DMatrix<f64> {
    // Matrix exponential of -c·g by scaling and squaring of a Taylor series.
    let n = g.nrows();
    let mut a = g * (-c / 1024.0);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    a = sum;
    for _ in 0..10 {
        a = &a * &a;
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn prop_normalization_and_mean(lambda in 0.02f64..6.0) {
        let p = MpParams::new(lambda).unwrap();
        let m0 = mp_expectation(p, |_| 1.0, 1e-10).unwrap();
        let m1 = mp_expectation(p, |nu| nu, 1e-10).unwrap();
        prop_assert!((m0 - 1.0).abs() < 1e-10);
        prop_assert!((m1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn prop_cdf_monotone(lambda in 0.05f64..4.0, a in 0.0f64..6.0, b in 0.0f64..6.0) {
        let p = MpParams::new(lambda).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(mp_cdf(p, lo).unwrap() <= mp_cdf(p, hi).unwrap() + 1e-12);
    }

    #[test]
    fn prop_spectral_reconstruction(d in 2usize..24, n in 1usize..40, c in 0.01f64..3.0, seed in 0u64..1000) {
        let g = GaussianDataset::sample(n, d, seed, Stream::Data).unwrap().gram();
        let d0 = GaussianDataset::sample(d, 2, seed, Stream::Student).unwrap().samples;
        let s = spectrum_of(&g, &d0).unwrap();
        let total: f64 = s.d0_projections.iter().sum();
        prop_assert!((total / d0.norm_squared() - 1.0).abs() < 1e-8);
        let lin = (d0.transpose() * &g * &d0).trace();
        prop_assert!((s.weighted_sum(|nu| nu) - lin).abs() <= 1e-8 * lin.abs().max(1e-300) + 1e-12);
        let e = (d0.transpose() * sym_exp(&g, c) * &d0).trace();
        prop_assert!((s.weighted_sum(|nu| (-c * nu).exp()) / e - 1.0).abs() < 1e-8);
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        if d > n {
            prop_assert!(s.count_zero(1e-10) >= d - n);
        }
    }
}
