//! Banded LU factorization with partial pivoting and row equilibration.
//!
//! The step operator of the 1D scheme couples each node to its two
//! neighbours on either side, so the monolithic system matrix is banded
//! with half-bandwidth `5*2 + 4` in the interleaved unknown ordering.
//! Storage follows the usual band layout: the factored band needs
//! `kl` extra superdiagonals for pivoting fill.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row-band storage including pivot fill: entry (i, j) with
    /// j in [i-kl, i+ku+kl] lives at band[i][j - i + kl].
    band: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix {
            n,
            kl,
            ku,
            band: vec![vec![0.0; kl + ku + kl + 1]; n],
        }
    }


    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        self.band[i][j + self.kl - i] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl || j >= self.n {
            0.0
        } else {
            self.band[i][j + self.kl - i]
        }
    }

    /// Factor in place (partial pivoting, rows equilibrated by their max
    /// absolute entry first).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut scale = vec![1.0; n];
        for i in 0..n {
            let m = self.band[i].iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            if m == 0.0 {
                return Err(Error::SolverFailure(format!("row {i} of the system is zero")));
            }
            scale[i] = 1.0 / m;
            for v in self.band[i].iter_mut() {
                *v *= scale[i];
            }
        }
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            // pivot search among rows k..=k+kl (column k)
            let reach = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in (k + 1)..=reach {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(Error::SolverFailure(format!(
                    "singular system at elimination step {k}"
                )));
            }
            pivots[k] = p;
            if p != k {
                // swap the overlapping parts of rows k and p
                for j in k..=(k + ku + kl).min(n - 1) {
                    let a = self.get(k, j);
                    let b = self.get(p, j);
                    self.set(k, j, b);
                    self.set(p, j, a);
                }
            }
            let pivot = self.get(k, k);
            for r in (k + 1)..=reach {
                let factor = self.get(r, k) / pivot;
                if factor != 0.0 {
                    for j in (k + 1)..=(k + ku + kl).min(n - 1) {
                        let v = self.get(r, j) - factor * self.get(k, j);
                        self.set(r, j, v);
                    }
                }
                // store the multiplier in place of the eliminated entry
                self.set(r, k, factor);
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            band: self.band,
            pivots,
            scale,
        })
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.band[i][j + self.kl - i] = v;
    }

    /// y = A x (over the original, unequilibrated matrix); only valid before
    /// factoring.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
    }
}

/// Factored banded system.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    scale: Vec<f64>,
}

impl BandedLu {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.band[i][j + self.kl - i]
    }

    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        assert_eq!(b.len(), n);
        for i in 0..n {
            b[i] *= self.scale[i];
        }
        // forward elimination, replaying pivots
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let reach = (k + self.kl).min(n - 1);
            for r in (k + 1)..=reach {
                b[r] -= self.get(r, k) * b[k];
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let hi = (k + self.ku + self.kl).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=hi {
                acc -= self.get(k, j) * b[j];
            }
            let pivot = self.get(k, k);
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SolverFailure(format!("zero pivot at row {k}")));
            }
            b[k] = acc / pivot;
        }
        Ok(())
    }
}
