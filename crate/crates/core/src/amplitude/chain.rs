//! Chain functions `F_L(j) = sum_{k_1..k_L} p^{|j-k_1|} p^{|k_1-k_2|} ... p^{|k_L|}`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `F_0, ..., F_L` on the window `|j| <= w`.
#[derive(Debug, Clone)]
pub struct ChainTable<T> {
    pub p: T,
    pub window: usize,
    /// `f[l][j + window]`.
    pub f: Vec<Vec<T>>,
}

impl<T: Real> ChainTable<T> {
    /// Window wide enough that `p^w` is below machine precision.
    pub fn new(p: T, max_len: usize) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::Domain(format!("p = {p} not in (0, 1)")));
        }
        let w = ((T::epsilon() * T::of(1e-3)).ln() / p.ln()).to_f64().unwrap_or(f64::MAX);
        let window = (w.ceil() as usize + 2 * max_len + 8).min(1 << 16);
        Self::with_window(p, max_len, window)
    }

    pub fn with_window(p: T, max_len: usize, window: usize) -> Result<Self> {
        let size = 2 * window + 1;
        let f0: Vec<T> = (0..size).map(|i| p.powi((i as i64 - window as i64).unsigned_abs() as i32)).collect();
        let mut f = vec![f0.clone()];
        for _ in 0..max_len {
            let prev = f.last().unwrap();
            let next = (0..size)
                .map(|i| {
                    let j = i as i64 - window as i64;
                    let lo = (j - window as i64).max(-(window as i64));
                    let hi = (j + window as i64).min(window as i64);
                    (lo..=hi)
                        .map(|k| prev[(j - k + window as i64) as usize] * f0[(k + window as i64) as usize])
                        .sum()
                })
                .collect();
            f.push(next);
        }
        Ok(Self { p, window, f })
    }

    pub fn get(&self, len: usize, j: i64) -> Option<T> {
        let idx = j + self.window as i64;
        if idx < 0 {
            return None;
        }
        self.f.get(len)?.get(idx as usize).copied()
    }
}

pub fn chain_function<T: Real>(len: usize, j: i64, p: T) -> Result<T> {
    let t = ChainTable::new(p, len)?;
    t.get(len, j)
        .ok_or_else(|| Error::Domain(format!("momentum {j} outside window {}", t.window)))
}
