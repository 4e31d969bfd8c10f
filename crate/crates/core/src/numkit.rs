//! Small dense linear algebra, a seeded generator and a finite-difference
//! gradient oracle.
//!
//! Everything is `f64`. Matrices are row-major.
//!
//! # Random numbers
//!
//! [`Rng`] wraps the ChaCha8 stream cipher generator (`rand_chacha::ChaCha8Rng`)
//! seeded with `SeedableRng::seed_from_u64`. ChaCha is counter based and its
//! output is specified bit-for-bit, so a recorded seed replays the same run on
//! any platform. Uniform doubles take the top 53 bits of `next_u64`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower/upper clamp for [`Rng::uniform_open`].
pub const UNIFORM_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(len: usize) -> Self {
        Self { data: vec![0.0; len] }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        Self { data: (0..len).map(f).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector { data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self::new(data)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Gathers the listed rows into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn column(&self, c: usize) -> Vector {
        Vector::from_fn(self.rows, |r| self.get(r, c))
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Matrix-vector product `m · v`.
pub fn matvec(m: &Matrix, v: &Vector) -> Result<Vector> {
    check_len(m.cols, v.len())?;
    Ok(Vector::from_fn(m.rows, |r| {
        m.row(r).iter().zip(v.iter()).map(|(a, b)| a * b).sum()
    }))
}

/// `mᵀ · v`, without materializing the transpose.
pub fn matvec_t(m: &Matrix, v: &Vector) -> Result<Vector> {
    check_len(m.rows, v.len())?;
    let mut out = Vector::zeros(m.cols);
    for r in 0..m.rows {
        let vr = v[r];
        for (o, a) in out.as_mut_slice().iter_mut().zip(m.row(r)) {
            *o += a * vr;
        }
    }
    Ok(out)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// Deterministic generator; see the module docs for the algorithm.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform clamped to `[UNIFORM_EPS, 1 - UNIFORM_EPS]`, so `ln(u)` and
    /// `ln(-ln u)` are finite.
    pub fn uniform_open(&mut self) -> f64 {
        self.next_f64().clamp(UNIFORM_EPS, 1.0 - UNIFORM_EPS)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via the Box-Muller cosine branch. Consumes two
    /// uniforms per call; the sine branch is discarded so the stream position
    /// depends only on the number of calls.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        // Lemire-style multiply-shift; bias is below 2^-64 * n, irrelevant here.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// Free-function form of [`Rng::uniform_open`].
pub fn uniform_open(rng: &mut Rng) -> f64 {
    rng.uniform_open()
}

/// Central-difference gradient of `f` at `x`.
///
/// Fails with [`Error::Oracle`] if any probe evaluates to a non-finite value.
pub fn finite_diff_grad<F>(f: F, x: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
{
    stencil_grad(f, x, h, &[(1.0, 0.5), (-1.0, -0.5)])
}

/// Fourth-order central differences,
/// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h`.
///
/// Truncation error is `O(h⁴)`, so a step around `1e-3` keeps both rounding
/// and truncation near `1e-12` for smooth functions, which the two-point
/// rule cannot do for gradients much smaller than the function value.
pub fn finite_diff_grad_fourth<F>(f: F, x: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
{
    const W: [(f64, f64); 4] = [(2.0, -1.0 / 12.0), (1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (-2.0, 1.0 / 12.0)];
    stencil_grad(f, x, h, &W)
}

/// `Σ w · f(x + o·h·e_k) / h` for each coordinate `k`.
fn stencil_grad<F>(f: F, x: &Vector, h: f64, stencil: &[(f64, f64)]) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("finite-difference step must be > 0, got {h}")));
    }
    let mut probe = x.clone();
    let mut grad = Vector::zeros(x.len());
    for k in 0..x.len() {
        let orig = probe[k];
        let mut acc = 0.0;
        for &(offset, weight) in stencil {
            probe[k] = orig + offset * h;
            let v = f(&probe);
            if !v.is_finite() {
                probe[k] = orig;
                return Err(Error::Oracle(format!("non-finite probe at coordinate {k}")));
            }
            acc += weight * v;
        }
        probe[k] = orig;
        grad[k] = acc / h;
    }
    Ok(grad)
}

/// Symmetric relative error `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
