use crate::scalar::Real;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Symmetric coupling matrices `C^S` for `S = 0..=s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSample<T> {
    /// `c[S][j * (S+1) + k]`.
    pub c: Vec<Vec<T>>,
}

impl<T: Real> CouplingSample<T> {
    pub fn s_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn get(&self, s: usize, j: usize, k: usize) -> T {
        self.c[s][j * (s + 1) + k]
    }

    pub fn negated(&self) -> Self {
        Self {
            c: self.c.iter().map(|m| m.iter().map(|&x| -x).collect()).collect(),
        }
    }

    /// True iff every matrix obeys all four symmetries bit for bit.
    pub fn is_symmetric(&self) -> bool {
        self.c.iter().enumerate().all(|(s, m)| {
            let at = |j: usize, k: usize| m[j * (s + 1) + k];
            (0..=s).all(|j| {
                (0..=s).all(|k| {
                    let x = at(j, k);
                    x == at(k, j) && x == at(s - j, k) && x == at(j, s - k)
                })
            })
        })
    }
}

/// The eight images of `(j, k)` under the symmetry group of `C^S`.
fn orbit(s: usize, j: usize, k: usize) -> [(usize, usize); 8] {
    [
        (j, k),
        (s - j, k),
        (j, s - k),
        (s - j, s - k),
        (k, j),
        (s - k, j),
        (k, s - j),
        (s - k, s - j),
    ]
}

/// Project i.i.d. standard normals onto the symmetric subspace by averaging
/// over the group. The result has the eight-term covariance.
pub fn sample_couplings_with<T: Real, R: Rng>(s_max: usize, rng: &mut R) -> CouplingSample<T> {
    let mut c = Vec::with_capacity(s_max + 1);
    for s in 0..=s_max {
        let d = s + 1;
        let x: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        let mut m = vec![T::zero(); d * d];
        let mut done = vec![false; d * d];
        for j in 0..d {
            for k in 0..d {
                if done[j * d + k] {
                    continue;
                }
                let orb = orbit(s, j, k);
                let v = orb.iter().map(|&(a, b)| x[a * d + b]).sum::<f64>() / 8.0;
                for (a, b) in orb {
                    m[a * d + b] = T::of(v);
                    done[a * d + b] = true;
                }
            }
        }
        c.push(m);
    }
    CouplingSample { c }
}

/// Generator for ensemble member `stream` of run `seed`.
pub fn member_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_couplings<T: Real>(s_max: usize, seed: u64) -> CouplingSample<T> {
    sample_couplings_with(s_max, &mut member_rng(seed, 0))
}

/// Mode amplitudes at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T> {
    pub alpha: Vec<Complex<T>>,
    pub t: T,
    pub p: T,
}

/// `alpha_j = sqrt(p^j / 2N) (g1 + i g2)`.
pub fn sample_initial_with<T: Real, R: Rng>(p: T, j_max: usize, rng: &mut R) -> ModeState<T> {
    let n = T::one() / (T::one() - p);
    let alpha = (0..j_max)
        .map(|j| {
            let sd = (p.powi(j as i32) / (T::of(2.0) * n)).sqrt();
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            Complex::new(T::of(g1) * sd, T::of(g2) * sd)
        })
        .collect();
    ModeState { alpha, t: T::zero(), p }
}

pub fn sample_initial<T: Real>(p: T, j_max: usize, seed: u64) -> ModeState<T> {
    sample_initial_with(p, j_max, &mut member_rng(seed, 0))
}
