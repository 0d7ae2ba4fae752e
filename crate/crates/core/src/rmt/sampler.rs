//! Two independent samplers for eigenphases of Haar-random `USp(2g)`.
//!
//! Method A builds the matrix. Method B samples the Weyl eigenphase density
//! `prod_{i<j} (cos t_i - cos t_j)^2 prod_i sin^2 t_i` on `[0, pi]^g` directly.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Residual norm below which a Gram-Schmidt step is treated as singular.
const SINGULAR_TOL: f64 = 1e-10;

/// Rejection sampling is used up to this half-rank; Metropolis above it.
pub const REJECTION_MAX_G: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerMethod {
    /// Symplectic Gram-Schmidt on complex Gaussian vectors.
    Matrix,
    /// Weyl density: rejection for small `g`, Metropolis otherwise.
    Density,
}

/// Eigenphases `0 <= theta_1 <= ... <= theta_g <= pi` of one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymplecticSample {
    pub g: u32,
    pub phases: Vec<f64>,
}

impl SymplecticSample {
    /// Sorts and validates the phases.
    pub fn new(mut phases: Vec<f64>) -> Self {
        assert!(phases.iter().all(|t| (0.0..=PI).contains(t)), "phases must lie in [0, pi]");
        phases.sort_by(f64::total_cmp);
        Self {
            g: phases.len() as u32,
            phases,
        }
    }

    /// `t_k = Tr(M^k) = 2 sum_j cos(k theta_j)`.
    pub fn trace(&self, k: u32) -> f64 {
        2.0 * self.phases.iter().map(|t| (f64::from(k) * t).cos()).sum::<f64>()
    }

    pub fn traces(&self, m: u32) -> Vec<f64> {
        (1..=m).map(|k| self.trace(k)).collect()
    }
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<Complex<f64>> {
    DVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re, im)
    })
}

/// `(x; y) -> (-conj y; conj x)`: the column paired with `u` in a matrix
/// satisfying `U^T J U = J`, `J = [[0, I], [-I, 0]]`.
fn partner(u: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    let g = u.len() / 2;
    DVector::from_fn(2 * g, |i, _| if i < g { -u[g + i].conj() } else { u[i - g].conj() })
}

/// Haar-random element of `USp(2g)` as a `2g x 2g` unitary matrix, with the
/// number of resampled (numerically singular) Gram-Schmidt steps.
///
/// Column `k` is uniform on the unit sphere of the quaternionic complement
/// of the previous columns and their partners, which is exactly Haar.
pub fn haar_usp_matrix<R: Rng + ?Sized>(g: u32, rng: &mut R) -> (DMatrix<Complex<f64>>, u32) {
    let g = g as usize;
    let n = 2 * g;
    let mut cols: Vec<DVector<Complex<f64>>> = Vec::with_capacity(n);
    let mut retries = 0;
    while cols.len() < n {
        let mut v = gaussian_vector(n, rng);
        // Two passes keep the basis orthonormal to working precision.
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm < SINGULAR_TOL {
            retries += 1;
            continue;
        }
        v /= Complex::new(norm, 0.0);
        let w = partner(&v);
        cols.push(v);
        cols.push(w);
    }
    // Reorder as [u_1..u_g | w_1..w_g].
    let m = DMatrix::from_fn(n, n, |i, j| if j < g { cols[2 * j][i] } else { cols[2 * (j - g) + 1][i] });
    (m, retries)
}

/// Eigenphases of a unitary symplectic matrix: the Hermitian part
/// `(U + U*)/2` has eigenvalues `cos theta_j`, each twice.
pub fn eigenphases(u: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let h = (u + u.adjoint()) * Complex::new(0.5, 0.0);
    let mut cos: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    cos.sort_by(f64::total_cmp);
    cos.chunks(2)
        .map(|pair| ((pair[0] + pair[1]) / 2.0).clamp(-1.0, 1.0).acos())
        .collect()
}

/// Method A.
pub fn sample_haar_usp<R: Rng + ?Sized>(g: u32, rng: &mut R) -> (SymplecticSample, u32) {
    assert!(g >= 1);
    let (m, retries) = haar_usp_matrix(g, rng);
    (SymplecticSample::new(eigenphases(&m)), retries)
}

/// `log` of the unnormalized Weyl density.
pub fn log_weyl_density(phases: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, a) in phases.iter().enumerate() {
        let (ca, sa) = (a.cos(), a.sin());
        s += 2.0 * sa.abs().ln();
        for b in &phases[i + 1..] {
            s += 2.0 * (ca - b.cos()).abs().ln();
        }
    }
    s
}

/// Rejection from the uniform proposal; the density is bounded by `4^{g(g-1)/2}`.
pub fn sample_weyl_rejection<R: Rng + ?Sized>(g: u32, rng: &mut R) -> SymplecticSample {
    assert!(g >= 1);
    let log_bound = f64::from(g * (g - 1)) * 2f64.ln();
    loop {
        let phases: Vec<f64> = (0..g).map(|_| rng.random::<f64>() * PI).collect();
        let u: f64 = rng.random();
        if u.ln() <= log_weyl_density(&phases) - log_bound {
            return SymplecticSample::new(phases);
        }
    }
}

/// Reflect into `[0, pi]`.
fn reflect(mut x: f64) -> f64 {
    let period = 2.0 * PI;
    x = x.rem_euclid(period);
    if x > PI {
        period - x
    } else {
        x
    }
}

/// Single-phase random-walk Metropolis chain on the Weyl density.
///
/// Burn-in is `1000 g` steps, during which the step size adapts towards
/// [`Metropolis::TARGET_ACCEPTANCE`]; it is frozen afterwards so the chain is
/// time-homogeneous. Each emitted sample is `g` steps after the previous one.
#[derive(Debug, Clone)]
pub struct Metropolis {
    phases: Vec<f64>,
    log_density: f64,
    step: f64,
    proposed: u64,
    accepted: u64,
}

impl Metropolis {
    pub const TARGET_ACCEPTANCE: f64 = 0.4;

    pub fn new<R: Rng + ?Sized>(g: u32, rng: &mut R) -> Self {
        assert!(g >= 1);
        // Distinct interior starting point keeps the log density finite.
        let phases: Vec<f64> = (0..g).map(|j| PI * (f64::from(j) + 0.5) / f64::from(g)).collect();
        let log_density = log_weyl_density(&phases);
        let mut chain = Self {
            phases,
            log_density,
            step: 0.5,
            proposed: 0,
            accepted: 0,
        };
        let burn_in = 1000 * u64::from(g);
        let window = 100;
        let mut window_accepts = 0u32;
        for i in 1..=burn_in {
            window_accepts += u32::from(chain.step_once(rng));
            if i % window == 0 {
                let rate = f64::from(window_accepts) / window as f64;
                chain.step = (chain.step * (1.0 + (rate - Self::TARGET_ACCEPTANCE))).clamp(1e-3, PI);
                window_accepts = 0;
            }
        }
        chain.proposed = 0;
        chain.accepted = 0;
        chain
    }

    fn step_once<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let j = rng.random_range(0..self.phases.len());
        let z: f64 = rng.sample(StandardNormal);
        let old = self.phases[j];
        self.phases[j] = reflect(old + self.step * z);
        let proposal = log_weyl_density(&self.phases);
        self.proposed += 1;
        let u: f64 = rng.random();
        if u.ln() < proposal - self.log_density {
            self.log_density = proposal;
            self.accepted += 1;
            true
        } else {
            self.phases[j] = old;
            false
        }
    }

    pub fn next_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SymplecticSample {
        for _ in 0..self.phases.len() {
            self.step_once(rng);
        }
        SymplecticSample::new(self.phases.clone())
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Draws `count` samples of one method from a single generator.
/// Returns the samples and the Gram-Schmidt retry count (method A only).
pub fn sample_block<R: Rng + ?Sized>(
    method: SamplerMethod,
    g: u32,
    count: usize,
    rng: &mut R,
) -> (Vec<SymplecticSample>, u32) {
    let mut retries = 0;
    let samples = match method {
        SamplerMethod::Matrix => (0..count)
            .map(|_| {
                let (s, r) = sample_haar_usp(g, rng);
                retries += r;
                s
            })
            .collect(),
        SamplerMethod::Density if g <= REJECTION_MAX_G => (0..count).map(|_| sample_weyl_rejection(g, rng)).collect(),
        SamplerMethod::Density => {
            let mut chain = Metropolis::new(g, rng);
            (0..count).map(|_| chain.next_sample(rng)).collect()
        }
    };
    (samples, retries)
}

/// CDF of the `g = 1` phase density `(2/pi) sin^2 theta`.
pub fn weyl_cdf_g1(theta: f64) -> f64 {
    (2.0 * theta - (2.0 * theta).sin()) / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_is_unitary_and_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for g in 1..=4u32 {
            let (u, _) = haar_usp_matrix(g, &mut rng);
            let n = 2 * g as usize;
            let id = DMatrix::<Complex<f64>>::identity(n, n);
            assert!((u.adjoint() * &u - &id).norm() < 1e-12);
            let j = DMatrix::from_fn(n, n, |r, c| {
                let g = g as usize;
                match (r < g, c < g) {
                    (true, false) if c - g == r => Complex::new(1.0, 0.0),
                    (false, true) if r - g == c => Complex::new(-1.0, 0.0),
                    _ => Complex::new(0.0, 0.0),
                }
            });
            assert!((u.transpose() * &j * &u - &j).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenphases_reproduce_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in 1..=5u32 {
            let (u, _) = haar_usp_matrix(g, &mut rng);
            let s = SymplecticSample::new(eigenphases(&u));
            for k in 1..=3u32 {
                let mut p = DMatrix::<Complex<f64>>::identity(u.nrows(), u.ncols());
                for _ in 0..k {
                    p *= &u;
                }
                assert!((p.trace().re - s.trace(k)).abs() < 1e-8, "g={g} k={k}");
                assert!(p.trace().im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn reflection_stays_in_range() {
        for x in [-7.0, -0.1, 0.0, 1.0, PI, 3.5, 10.0] {
            let r = reflect(x);
            assert!((0.0..=PI).contains(&r));
        }
        assert!((reflect(-0.25) - 0.25).abs() < 1e-15);
        assert!((reflect(PI + 0.25) - (PI - 0.25)).abs() < 1e-12);
    }

    #[test]
    fn metropolis_tunes_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut chain = Metropolis::new(5, &mut rng);
        for _ in 0..4000 {
            chain.next_sample(&mut rng);
        }
        assert!((chain.acceptance_rate() - 0.4).abs() < 0.1, "{}", chain.acceptance_rate());
    }
}
