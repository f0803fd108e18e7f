//! Marchenko–Pastur law, Gaussian data and empirical Gram spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Integral, Tolerance};
use crate::rng::{self, Stream};

pub const DEFAULT_MAX_DIM: usize = 4096;
pub const MAX_DIM_ENV: &str = "GROKKLAB_MAX_DIM";
/// Eigenvalues in `[-CLAMP_TOL, 0)` are roundoff and are set to zero.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpParams {
    lambda: f64,
}

impl MpParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!("MP ratio must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_minus(&self) -> f64 {
        (1.0 - self.lambda.sqrt()).powi(2)
    }

    pub fn lambda_plus(&self) -> f64 {
        (1.0 + self.lambda.sqrt()).powi(2)
    }

    fn width(&self) -> f64 {
        4.0 * self.lambda.sqrt()
    }
}

/// Continuous part of the MP density.
pub fn mp_density(params: MpParams, nu: f64) -> f64 {
    let (lo, hi) = (params.lambda_minus(), params.lambda_plus());
    if !(nu > lo && nu < hi) || nu <= 0.0 {
        return 0.0;
    }
    ((hi - nu) * (nu - lo)).sqrt() / (2.0 * std::f64::consts::PI * params.lambda * nu)
}

/// Weight of the atom at ν = 0.
pub fn mp_zero_mass(params: MpParams) -> f64 {
    (1.0 - 1.0 / params.lambda).max(0.0)
}

/// ∫ f(ν) p(ν) dν over the continuous part, after ν = λ₋ + (λ₊ − λ₋) sin²θ.
pub fn mp_continuous(params: MpParams, f: impl Fn(f64) -> f64, tol: Tolerance) -> Result<Integral> {
    mp_continuous_to(params, |nu, _| f(nu), std::f64::consts::FRAC_PI_2, tol)
}

/// As `mp_continuous`, with f also given ν − λ₋ computed without cancellation,
/// for integrands like e^{-c(ν−λ₋)} at very large c.
pub fn mp_continuous_edge(params: MpParams, f: impl Fn(f64, f64) -> f64, tol: Tolerance) -> Result<Integral> {
    mp_continuous_to(params, f, std::f64::consts::FRAC_PI_2, tol)
}

fn mp_continuous_to(params: MpParams, f: impl Fn(f64, f64) -> f64, theta_max: f64, tol: Tolerance) -> Result<Integral> {
    let lo = params.lambda_minus();
    let w = params.width();
    let scale = w * w / (std::f64::consts::PI * params.lambda);
    let g = |th: f64| {
        let (s, c) = th.sin_cos();
        let s2 = s * s;
        let off = w * s2;
        let nu = lo + off;
        if nu <= 0.0 {
            // Only reachable at λ = 1, θ = 0, where the integrand tends to f(0)·scale/w.
            return f(0.0, 0.0) * scale * c * c / w;
        }
        f(nu, off) * scale * s2 * c * c / nu
    };
    integrate(g, 0.0, theta_max, tol)
}

/// E_MP[f] including the atom at zero.
pub fn mp_expectation(params: MpParams, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    mp_expectation_tol(params, f, Tolerance::absolute(tol))
}

pub fn mp_expectation_tol(params: MpParams, f: impl Fn(f64) -> f64, tol: Tolerance) -> Result<f64> {
    let atom = mp_zero_mass(params);
    let f0 = if atom > 0.0 { f(0.0) } else { 0.0 };
    let cont = mp_continuous(params, f, tol)?;
    Ok(atom * f0 + cont.value)
}

/// MP cumulative distribution function, F(x) = P(ν ≤ x).
pub fn mp_cdf(params: MpParams, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Ok(0.0);
    }
    let atom = mp_zero_mass(params);
    let (lo, hi) = (params.lambda_minus(), params.lambda_plus());
    if x <= lo {
        return Ok(atom);
    }
    if x >= hi {
        return Ok(1.0);
    }
    let theta = ((x - lo) / params.width()).sqrt().min(1.0).asin();
    let cont = mp_continuous_to(params, |_, _| 1.0, theta, Tolerance::absolute(1e-13))?;
    Ok((atom + cont.value).min(1.0))
}

/// Kolmogorov–Smirnov distance between an empirical spectrum and the MP law.
/// Values at or below `zero_tol` count as exact zeros, matching the atom.
pub fn ks_distance(eigenvalues: &[f64], params: MpParams, zero_tol: f64) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(Error::invalid("KS distance of an empty spectrum"));
    }
    let mut v: Vec<f64> = eigenvalues.iter().map(|&x| if x <= zero_tol { 0.0 } else { x }).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] == x {
            j += 1;
        }
        let f = mp_cdf(params, x)?;
        let f_left = if x == 0.0 { 0.0 } else { f };
        d = d.max((f - j as f64 / n).abs()).max((f_left - i as f64 / n).abs());
        i = j;
    }
    Ok(d)
}

/// Matrix-size cap, overridable through `GROKKLAB_MAX_DIM`.
pub fn max_dim() -> usize {
    std::env::var(MAX_DIM_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_DIM)
}

fn check_dim(d: usize) -> Result<()> {
    let cap = max_dim();
    if d > cap {
        return Err(Error::SizeLimit { requested: d, cap });
    }
    Ok(())
}

/// N × d_in matrix of i.i.d. standard normal inputs.
#[derive(Debug, Clone)]
pub struct GaussianDataset {
    pub samples: DMatrix<f64>,
    pub seed: u64,
}

impl GaussianDataset {
    pub fn sample(n: usize, d_in: usize, seed: u64, which: Stream) -> Result<Self> {
        if n == 0 || d_in == 0 {
            return Err(Error::invalid("dataset dimensions must be at least 1"));
        }
        check_dim(d_in)?;
        let mut rng = rng::stream(seed, which);
        let samples = DMatrix::from_fn(n, d_in, |_, _| rng.sample::<f64, _>(StandardNormal));
        Ok(Self { samples, seed })
    }

    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn d_in(&self) -> usize {
        self.samples.ncols()
    }

    /// (1/N) XᵀX.
    pub fn gram(&self) -> DMatrix<f64> {
        let xt = self.samples.transpose();
        let mut g = &xt * &self.samples;
        g /= self.n() as f64;
        g
    }
}

/// Empirical Gram matrix of `n` standard Gaussian samples in `d_in` dimensions.
pub fn sample_gram(d_in: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    Ok(GaussianDataset::sample(n, d_in, seed, Stream::Data)?.gram())
}

fn clamp_eigenvalues(values: &mut [f64]) -> Result<()> {
    for v in values.iter_mut() {
        if !v.is_finite() {
            return Err(Error::NumericFailure("eigensolver produced a non-finite value".into()));
        }
        if *v < -CLAMP_TOL {
            return Err(Error::NumericFailure(format!("eigenvalue {v:e} of a PSD matrix is below -{CLAMP_TOL:e}")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

fn check_square(gram: &DMatrix<f64>) -> Result<()> {
    if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
        return Err(Error::invalid(format!(
            "Gram matrix must be square and non-empty, got {}x{}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    check_dim(gram.nrows())
}

/// Ascending, clamped eigenvalues of a symmetric PSD matrix.
pub fn eigenvalues_of(gram: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(gram)?;
    let mut v: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    clamp_eigenvalues(&mut v)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Eigendecomposition with eigenvalues ascending and eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenBasis {
    pub fn of(gram: &DMatrix<f64>) -> Result<Self> {
        check_square(gram)?;
        let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 1_000_000)
            .ok_or_else(|| Error::NumericFailure("symmetric eigensolver did not converge".into()))?;
        let n = gram.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        clamp_eigenvalues(&mut eigenvalues)?;
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { eigenvalues, vectors })
    }

    /// Coordinates of the columns of `m` in the eigenbasis, Vᵀm.
    pub fn project(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.vectors.tr_mul(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Σ over output columns of ⟨vᵢ, d0_col⟩².
    pub d0_projections: Vec<f64>,
}

impl Spectrum {
    pub fn from_basis(basis: &EigenBasis, d0: &DMatrix<f64>) -> Result<Self> {
        if d0.nrows() != basis.eigenvalues.len() {
            return Err(Error::invalid(format!(
                "D0 has {} rows, Gram matrix is {}-dimensional",
                d0.nrows(),
                basis.eigenvalues.len()
            )));
        }
        let p = basis.project(d0);
        let d0_projections = p.row_iter().map(|r| r.norm_squared()).collect();
        Ok(Self { eigenvalues: basis.eigenvalues.clone(), d0_projections })
    }

    /// Σᵢ f(νᵢ)·projᵢ, i.e. tr[D0ᵀ f(Σ) D0].
    pub fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.eigenvalues.iter().zip(&self.d0_projections).map(|(&nu, &p)| f(nu) * p).sum()
    }

    pub fn count_zero(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&v| v <= tol).count()
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.eigenvalues.len() as f64
    }

    /// Compare the exact projection-weighted sum with the approximation in which
    /// D0 projects equally on every eigenvector.
    pub fn equal_projection_gap(&self, f: impl Fn(f64) -> f64) -> ProjectionGap {
        let total: f64 = self.d0_projections.iter().sum();
        let n = self.eigenvalues.len() as f64;
        let exact = self.weighted_sum(&f);
        let equal = total / n * self.eigenvalues.iter().map(|&nu| f(nu)).sum::<f64>();
        let relative_gap = if exact != 0.0 { (equal - exact).abs() / exact.abs() } else { equal.abs() };
        ProjectionGap { exact, equal, relative_gap }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionGap {
    pub exact: f64,
    pub equal: f64,
    pub relative_gap: f64,
}

pub fn spectrum_of(gram: &DMatrix<f64>, d0: &DMatrix<f64>) -> Result<Spectrum> {
    Spectrum::from_basis(&EigenBasis::of(gram)?, d0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [f64; 6] = [0.1, 0.5, 0.9, 1.0, 1.5, 3.0];

    #[test]
    fn support_and_atom() {
        let p = MpParams::new(0.9).unwrap();
        assert!((p.lambda_minus() - 0.002_634_1).abs() < 1e-6);
        assert_eq!(mp_density(p, 0.002), 0.0);
        assert_eq!(mp_density(p, 3.8), 0.0);
        assert_eq!(mp_density(MpParams::new(1.0).unwrap(), 4.0001), 0.0);
        assert_eq!(mp_zero_mass(p), 0.0);
        assert!((mp_zero_mass(MpParams::new(1.5).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mp_zero_mass(MpParams::new(2.0).unwrap()), 0.5);
        assert!(MpParams::new(0.0).is_err());
        assert!(MpParams::new(-1.0).is_err());
    }

    #[test]
    fn normalization_and_first_moment() {
        for &l in &GRID {
            let p = MpParams::new(l).unwrap();
            let m0 = mp_expectation(p, |_| 1.0, 1e-10).unwrap();
            let m1 = mp_expectation(p, |nu| nu, 1e-10).unwrap();
            assert!((m0 - 1.0).abs() < 1e-10, "λ={l}: {m0}");
            assert!((m1 - 1.0).abs() < 1e-10, "λ={l}: {m1}");
        }
    }

    #[test]
    fn second_moment_oracle() {
        // E[ν²] = 1 + λ for the MP law.
        for &l in &GRID {
            let p = MpParams::new(l).unwrap();
            let m2 = mp_expectation(p, |nu| nu * nu, 1e-10).unwrap();
            assert!((m2 - (1.0 + l)).abs() < 1e-9);
        }
    }

    #[test]
    fn cdf_is_consistent_with_density() {
        let p = MpParams::new(0.5).unwrap();
        let (a, b) = (0.8, 1.2);
        let direct = integrate(|x| mp_density(p, x), a, b, Tolerance::absolute(1e-12)).unwrap();
        let via_cdf = mp_cdf(p, b).unwrap() - mp_cdf(p, a).unwrap();
        assert!((direct.value - via_cdf).abs() < 1e-10);
        let q = MpParams::new(1.5).unwrap();
        assert!((mp_cdf(q, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(mp_cdf(q, -1e-9).unwrap(), 0.0);
        assert_eq!(mp_cdf(q, 10.0).unwrap(), 1.0);
    }

    #[test]
    fn gram_of_tiny_and_rank_deficient() {
        let g = sample_gram(2, 1_000_000, 3).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((g[(r, c)] - target).abs() < 0.01);
            }
        }
        let g = sample_gram(4, 2, 3).unwrap();
        let ev = eigenvalues_of(&g).unwrap();
        assert!(ev.iter().filter(|&&v| v < 1e-10).count() >= 2);
    }

    #[test]
    fn spectrum_trivial_cases() {
        let id = DMatrix::<f64>::identity(5, 5);
        let d0 = DMatrix::from_fn(5, 2, |r, c| (r + 2 * c) as f64 * 0.3 - 0.5);
        let s = spectrum_of(&id, &d0).unwrap();
        assert!(s.eigenvalues.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let total: f64 = s.d0_projections.iter().sum();
        assert!((total - d0.norm_squared()).abs() < 1e-12);

        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let d0 = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let s = spectrum_of(&g, &d0).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 2.0]);
        assert!((s.d0_projections[0] - 1.0).abs() < 1e-14);
        assert!((s.d0_projections[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn clamp_rules() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        assert_eq!(eigenvalues_of(&g).unwrap()[0], 0.0);
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-6]);
        assert!(matches!(eigenvalues_of(&g), Err(Error::NumericFailure(_))));
    }

    #[test]
    fn ks_handles_ties_and_atom() {
        let p = MpParams::new(2.0).unwrap();
        // Half zeros exactly matches the atom; the rest sits at λ₊ so F jumps late.
        let mut v = vec![0.0; 50];
        v.extend(std::iter::repeat_n(p.lambda_plus(), 50));
        let d = ks_distance(&v, p, 1e-10).unwrap();
        assert!((d - 0.5).abs() < 1e-9, "{d}");
    }

    #[test]
    fn size_cap() {
        assert!(matches!(
            GaussianDataset::sample(2, DEFAULT_MAX_DIM + 1, 0, Stream::Data),
            Err(Error::SizeLimit { .. })
        ));
    }
}
