//! Truncated matrix-valued power series.
//!
//! A [`TaylorSeries`] holds coefficients `c₀ … c_{N-1}` (complex `p×q`
//! matrices) and models elements of `H₂^{p×q}` by truncation. The H₂
//! pairing `[f,g] = Σ fₙ* gₙ` is a `q×q` matrix; `trace [f,f]` is the
//! squared norm. Rational functions occurring here have geometrically
//! decaying coefficients, so truncating at `N = 256` keeps tails far below
//! all working tolerances.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Complex64, HardyError, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Truncated power series with `p×q` complex matrix coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    rows: usize,
    cols: usize,
    coeffs: Vec<DMatrix<Complex64>>,
}

impl TaylorSeries {
    /// Builds a series from its coefficient list. The list must be
    /// non-empty, the matrices of identical shape with finite entries.
    pub fn new(coeffs: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| HardyError::InvalidArgument("series needs at least one coefficient".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(HardyError::InvalidArgument("coefficient matrices must be non-empty".into()));
        }
        for (n, c) in coeffs.iter().enumerate() {
            if c.shape() != (rows, cols) {
                return Err(HardyError::DimensionMismatch(format!(
                    "coefficient {n} is {:?}, expected {:?}",
                    c.shape(),
                    (rows, cols)
                )));
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(HardyError::InvalidArgument(format!("coefficient {n} has non-finite entries")));
            }
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// Zero series of shape `p×q` with truncation `n`.
    pub fn zero(rows: usize, cols: usize, n: usize) -> Self {
        let n = n.max(1);
        Self {
            rows,
            cols,
            coeffs: vec![DMatrix::zeros(rows, cols); n],
        }
    }

    /// Constant series `c₀ = value`.
    pub fn constant(value: DMatrix<Complex64>, n: usize) -> Self {
        let (rows, cols) = value.shape();
        let mut s = Self::zero(rows, cols, n);
        s.coeffs[0] = value;
        s
    }

    /// Identity constant of size `q`.
    pub fn identity(q: usize, n: usize) -> Self {
        Self::constant(DMatrix::identity(q, q), n)
    }

    /// Scalar (1×1) series from a coefficient slice, padded to `n`.
    pub fn from_scalars(coeffs: &[Complex64], n: usize) -> Self {
        let n = n.max(coeffs.len()).max(1);
        let mut s = Self::zero(1, 1, n);
        for (k, &z) in coeffs.iter().enumerate() {
            s.coeffs[k][(0, 0)] = z;
        }
        s
    }

    /// Scalar monomial `zᵏ`.
    pub fn monomial(k: usize, n: usize) -> Self {
        let mut s = Self::zero(1, 1, n.max(k + 1));
        s.coeffs[k][(0, 0)] = ONE;
        s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Truncation length `N` (number of stored coefficients).
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &DMatrix<Complex64> {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[DMatrix<Complex64>] {
        &self.coeffs
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    fn scalar_coeffs(&self) -> Vec<Complex64> {
        debug_assert!(self.is_scalar());
        self.coeffs.iter().map(|c| c[(0, 0)]).collect()
    }

    /// The H₂ form `[f,g] = Σ fₙ* gₙ` (a `q×q` matrix). Requires identical
    /// shape and truncation.
    pub fn h2_form(&self, g: &TaylorSeries) -> Result<DMatrix<Complex64>> {
        if self.rows != g.rows || self.cols != g.cols || self.truncation() != g.truncation() {
            return Err(HardyError::DimensionMismatch(format!(
                "h2_form needs identical shape and truncation, got {}x{}/{} vs {}x{}/{}",
                self.rows,
                self.cols,
                self.truncation(),
                g.rows,
                g.cols,
                g.truncation()
            )));
        }
        let mut acc = DMatrix::<Complex64>::zeros(self.cols, self.cols);
        for (fc, gc) in self.coeffs.iter().zip(&g.coeffs) {
            acc.gemm(ONE, &fc.adjoint(), gc, ONE);
        }
        Ok(acc)
    }

    /// Squared H₂ norm, `trace [f,f]`.
    pub fn norm_sq(&self) -> f64 {
        self.h2_form(self).expect("same series").trace().re
    }

    /// Evaluates the truncation at `z` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Cauchy product truncated at the shorter factor.
    pub fn mul(&self, g: &TaylorSeries) -> Result<TaylorSeries> {
        if self.cols != g.rows {
            return Err(HardyError::DimensionMismatch(format!(
                "mul needs f.cols == g.rows, got {} vs {}",
                self.cols, g.rows
            )));
        }
        let n = self.truncation().min(g.truncation());
        if self.is_scalar() && g.is_scalar() {
            let a = self.scalar_coeffs();
            let b = g.scalar_coeffs();
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (k, &ak) in a.iter().enumerate().take(n) {
                if ak.norm_sqr() == 0.0 {
                    continue;
                }
                for (m, &bm) in b.iter().enumerate().take(n - k) {
                    out[k + m] += ak * bm;
                }
            }
            return Ok(TaylorSeries::from_scalars(&out, n));
        }
        let mut coeffs = vec![DMatrix::<Complex64>::zeros(self.rows, g.cols); n];
        for k in 0..n {
            for m in 0..(n - k) {
                coeffs[k + m].gemm(ONE, &self.coeffs[k], &g.coeffs[m], ONE);
            }
        }
        TaylorSeries::new(coeffs)
    }

    /// `k`-th complex derivative; truncation shrinks to `N - k`.
    pub fn derivative(&self, k: usize) -> Result<TaylorSeries> {
        if k == 0 {
            return Ok(self.clone());
        }
        let n = self.truncation();
        if k >= n {
            return Err(HardyError::DerivativeOrder {
                order: k,
                truncation: n,
            });
        }
        let mut coeffs = Vec::with_capacity(n - k);
        for m in 0..(n - k) {
            let mut factor = 1.0f64;
            for i in 1..=k {
                factor *= (m + i) as f64;
            }
            coeffs.push(self.coeffs[m + k].map(|z| z * factor));
        }
        TaylorSeries::new(coeffs)
    }

    /// Sum; requires identical shape, truncates at the shorter series.
    pub fn add(&self, g: &TaylorSeries) -> Result<TaylorSeries> {
        if self.rows != g.rows || self.cols != g.cols {
            return Err(HardyError::DimensionMismatch("add needs identical shape".into()));
        }
        let n = self.truncation().min(g.truncation());
        let coeffs = (0..n).map(|k| &self.coeffs[k] + &g.coeffs[k]).collect();
        TaylorSeries::new(coeffs)
    }

    pub fn sub(&self, g: &TaylorSeries) -> Result<TaylorSeries> {
        self.add(&g.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Complex64) -> TaylorSeries {
        TaylorSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|c| c.map(|z| z * a)).collect(),
        }
    }

    /// Coefficient-wise adjoint `fₙ ↦ fₙ*`; shape flips to `q×p`.
    pub fn conj_flip(&self) -> TaylorSeries {
        TaylorSeries {
            rows: self.cols,
            cols: self.rows,
            coeffs: self.coeffs.iter().map(|c| c.adjoint()).collect(),
        }
    }

    /// Pads with zeros or truncates to exactly `n` coefficients.
    pub fn resized(&self, n: usize) -> TaylorSeries {
        let n = n.max(1);
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(n);
        while coeffs.len() < n {
            coeffs.push(DMatrix::zeros(self.rows, self.cols));
        }
        TaylorSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    /// Multiplies by `zᵏ` keeping the truncation length.
    pub fn shift(&self, k: usize) -> TaylorSeries {
        let n = self.truncation();
        let mut coeffs = vec![DMatrix::zeros(self.rows, self.cols); n];
        for m in 0..n.saturating_sub(k) {
            coeffs[m + k] = self.coeffs[m].clone();
        }
        TaylorSeries {
            rows: self.rows,
            cols: self.cols,
            coeffs,
        }
    }

    /// Left-multiplies every coefficient by a constant matrix.
    pub fn left_mul_matrix(&self, m: &DMatrix<Complex64>) -> Result<TaylorSeries> {
        if m.ncols() != self.rows {
            return Err(HardyError::DimensionMismatch("left matrix factor shape".into()));
        }
        TaylorSeries::new(self.coeffs.iter().map(|c| m * c).collect())
    }

    /// Right-multiplies every coefficient by a constant matrix.
    pub fn right_mul_matrix(&self, m: &DMatrix<Complex64>) -> Result<TaylorSeries> {
        if m.nrows() != self.cols {
            return Err(HardyError::DimensionMismatch("right matrix factor shape".into()));
        }
        TaylorSeries::new(self.coeffs.iter().map(|c| c * m).collect())
    }

    /// Extracts a coefficient sub-block as a series.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Result<TaylorSeries> {
        if row + rows > self.rows || col + cols > self.cols || rows == 0 || cols == 0 {
            return Err(HardyError::DimensionMismatch("block exceeds series shape".into()));
        }
        TaylorSeries::new(
            self.coeffs
                .iter()
                .map(|c| c.view((row, col), (rows, cols)).into_owned())
                .collect(),
        )
    }

    /// Stacks series vertically; all must share `cols` and truncation.
    pub fn stack_rows(parts: &[TaylorSeries]) -> Result<TaylorSeries> {
        let first = parts
            .first()
            .ok_or_else(|| HardyError::InvalidArgument("stack of zero series".into()))?;
        let cols = first.cols;
        let n = first.truncation();
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let mut coeffs = vec![DMatrix::<Complex64>::zeros(rows, cols); n];
        let mut offset = 0;
        for p in parts {
            if p.cols != cols || p.truncation() != n {
                return Err(HardyError::DimensionMismatch(
                    "stacked series must share cols and truncation".into(),
                ));
            }
            for (k, c) in p.coeffs.iter().enumerate() {
                coeffs[k].view_mut((offset, 0), (p.rows, cols)).copy_from(c);
            }
            offset += p.rows;
        }
        TaylorSeries::new(coeffs)
    }

    /// Splits into horizontal blocks of row sizes `sizes`.
    pub fn split_rows(&self, sizes: &[usize]) -> Result<Vec<TaylorSeries>> {
        if sizes.iter().sum::<usize>() != self.rows {
            return Err(HardyError::DimensionMismatch(format!(
                "row partition {:?} does not sum to {}",
                sizes, self.rows
            )));
        }
        let mut out = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for &s in sizes {
            let coeffs = self
                .coeffs
                .iter()
                .map(|c| c.view((offset, 0), (s, self.cols)).into_owned())
                .collect();
            out.push(TaylorSeries::new(coeffs)?);
            offset += s;
        }
        Ok(out)
    }

    /// Composition `f ∘ g` with a scalar inner series, by accumulating
    /// `Σ fₖ gᵏ` with truncated powers of `g`. The result carries the inner
    /// series' truncation. Never forms a composition operator, so `g(0) ≠ 0`
    /// needs no special treatment.
    pub fn compose_with(&self, inner: &TaylorSeries) -> Result<TaylorSeries> {
        if !inner.is_scalar() {
            return Err(HardyError::DimensionMismatch("composition needs a scalar inner series".into()));
        }
        let n = inner.truncation();
        let mut acc = TaylorSeries::zero(self.rows, self.cols, n);
        let mut power = TaylorSeries::from_scalars(&[ONE], n);
        for k in 0..self.truncation() {
            let ck = &self.coeffs[k];
            if ck.iter().any(|z| z.norm_sqr() > 0.0) {
                for (m, pm) in power.coeffs.iter().enumerate() {
                    let w = pm[(0, 0)];
                    if w.norm_sqr() > 0.0 {
                        acc.coeffs[m].zip_apply(ck, |a, c| *a += w * c);
                    }
                }
            }
            if k + 1 < self.truncation() {
                power = power.mul(inner)?;
                if power.coeffs.iter().all(|c| c[(0, 0)].norm_sqr() == 0.0) {
                    break;
                }
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a square series with invertible `c₀`,
    /// by the standard convolution recurrence.
    pub fn inverse(&self) -> Result<TaylorSeries> {
        if self.rows != self.cols {
            return Err(HardyError::DimensionMismatch("inverse needs a square series".into()));
        }
        let c0_inv = self.coeffs[0]
            .clone()
            .try_inverse()
            .ok_or_else(|| HardyError::InvalidArgument("series has singular constant term".into()))?;
        let n = self.truncation();
        let mut inv = Vec::with_capacity(n);
        inv.push(c0_inv.clone());
        for m in 1..n {
            let mut s = DMatrix::<Complex64>::zeros(self.rows, self.rows);
            for k in 1..=m {
                s.gemm(ONE, &self.coeffs[k], &inv[m - k], ONE);
            }
            inv.push(-&c0_inv * s);
        }
        TaylorSeries::new(inv)
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesWire {
    p: usize,
    q: usize,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl Serialize for TaylorSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut flat = Vec::with_capacity(self.rows * self.cols);
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let z = c[(i, j)];
                        flat.push([z.re, z.im]);
                    }
                }
                flat
            })
            .collect();
        SeriesWire {
            p: self.rows,
            q: self.cols,
            coeffs,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TaylorSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = SeriesWire::deserialize(deserializer)?;
        if wire.p == 0 || wire.q == 0 {
            return Err(D::Error::custom("series dimensions must be positive"));
        }
        if wire.coeffs.is_empty() {
            return Err(D::Error::custom("series needs at least one coefficient"));
        }
        let mut coeffs = Vec::with_capacity(wire.coeffs.len());
        for (n, flat) in wire.coeffs.iter().enumerate() {
            if flat.len() != wire.p * wire.q {
                return Err(D::Error::custom(format!(
                    "coefficient {n} has {} entries, expected {}",
                    flat.len(),
                    wire.p * wire.q
                )));
            }
            let m = DMatrix::from_fn(wire.p, wire.q, |i, j| {
                let [re, im] = flat[i * wire.q + j];
                Complex64::new(re, im)
            });
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(D::Error::custom(format!("coefficient {n} has non-finite entries")));
            }
            coeffs.push(m);
        }
        TaylorSeries::new(coeffs).map_err(|e| D::Error::custom(e.to_string()))
    }
}
