//! Truncated resonant flow `d alpha_j/dt = -i sum_S sum_k C^S_jk conj(alpha_{S-j}) alpha_k alpha_{S-k}`.
//! Only terms with all four indices below `J` are kept.

use super::couplings::CouplingSample;
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    /// Gragg-Bulirsch-Stoer, substeps 2, 4, 6, 8, extrapolated to eighth order.
    Gbs8,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "gbs8" => Ok(Method::Gbs8),
            _ => Err(Error::Parse(format!("unknown integrator {s}"))),
        }
    }
}

pub struct Flow<'a, T> {
    c: &'a CouplingSample<T>,
    j: usize,
    pairs: Vec<Complex<T>>,
    q: Vec<Complex<T>>,
}

impl<'a, T: Real> Flow<'a, T> {
    pub fn new(c: &'a CouplingSample<T>, j_max: usize) -> Result<Self> {
        if j_max > 0 && c.s_max() < 2 * (j_max - 1) {
            return Err(Error::Domain(format!("couplings up to S={} but J={j_max} needs {}", c.s_max(), 2 * (j_max - 1))));
        }
        Ok(Self {
            c,
            j: j_max,
            pairs: vec![Complex::default(); j_max],
            q: vec![Complex::default(); j_max],
        })
    }

    /// Index range of `k` with `k < J` and `S - k < J`.
    fn range(&self, s: usize) -> std::ops::RangeInclusive<usize> {
        s.saturating_sub(self.j - 1)..=s.min(self.j - 1)
    }

    pub fn rhs(&mut self, a: &[Complex<T>], out: &mut [Complex<T>]) {
        let jm = self.j;
        out.iter_mut().for_each(|x| *x = Complex::default());
        if jm == 0 {
            return;
        }
        for s in 0..=2 * (jm - 1) {
            let rg = self.range(s);
            for k in rg.clone() {
                self.pairs[k] = a[k] * a[s - k];
            }
            let row = &self.c.c[s];
            for j in rg.clone() {
                let mut acc = Complex::default();
                for k in rg.clone() {
                    acc += self.pairs[k] * row[j * (s + 1) + k];
                }
                self.q[j] = acc;
            }
            for j in rg {
                let v = a[s - j].conj() * self.q[j];
                // multiply by -i
                out[j] += Complex::new(v.im, -v.re);
            }
        }
    }

    pub fn hamiltonian(&self, a: &[Complex<T>]) -> T {
        let jm = self.j;
        let mut h = T::zero();
        if jm == 0 {
            return h;
        }
        for s in 0..=2 * (jm - 1) {
            let rg = self.range(s);
            for j in rg.clone() {
                let pj = (a[j] * a[s - j]).conj();
                for k in rg.clone() {
                    h += (pj * a[k] * a[s - k]).re * self.c.get(s, j, k);
                }
            }
        }
        h / T::of(2.0)
    }

    fn rk4(&mut self, y: &mut [Complex<T>], dt: T) {
        let n = y.len();
        let (mut k1, mut k2, mut k3, mut k4) = (vec![Complex::default(); n], vec![Complex::default(); n], vec![Complex::default(); n], vec![Complex::default(); n]);
        let mut tmp = vec![Complex::default(); n];
        let half = dt / T::of(2.0);
        self.rhs(y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * half;
        }
        self.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * half;
        }
        self.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * dt;
        }
        self.rhs(&tmp, &mut k4);
        let sixth = dt / T::of(6.0);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * T::of(2.0) + k4[i]) * sixth;
        }
    }

    fn midpoint(&mut self, y: &[Complex<T>], dt: T, m: usize) -> Vec<Complex<T>> {
        let n = y.len();
        let h = dt / T::of_usize(m);
        let mut f = vec![Complex::default(); n];
        let mut z0 = y.to_vec();
        self.rhs(&z0, &mut f);
        let mut z1: Vec<Complex<T>> = (0..n).map(|i| z0[i] + f[i] * h).collect();
        for _ in 1..m {
            self.rhs(&z1, &mut f);
            let z2: Vec<Complex<T>> = (0..n).map(|i| z0[i] + f[i] * (h * T::of(2.0))).collect();
            z0 = z1;
            z1 = z2;
        }
        self.rhs(&z1, &mut f);
        (0..n).map(|i| (z0[i] + z1[i] + f[i] * h) / T::of(2.0)).collect()
    }

    fn gbs8(&mut self, y: &mut [Complex<T>], dt: T) {
        const STEPS: [usize; 4] = [2, 4, 6, 8];
        let mut prev: Vec<Vec<Complex<T>>> = Vec::new();
        for (i, &m) in STEPS.iter().enumerate() {
            let mut row = vec![self.midpoint(y, dt, m)];
            for k in 1..=i {
                let ratio = T::of_usize(m) / T::of_usize(STEPS[i - k]);
                let den = ratio * ratio - T::one();
                let next = row[k - 1].iter().zip(&prev[k - 1]).map(|(&a, &b)| a + (a - b) / den).collect();
                row.push(next);
            }
            prev = row;
        }
        y.copy_from_slice(&prev[3]);
    }

    pub fn step(&mut self, y: &mut [Complex<T>], dt: T, method: Method) {
        match method {
            Method::Rk4 => self.rk4(y, dt),
            Method::Gbs8 => self.gbs8(y, dt),
        }
    }
}
