//! Tangential Nevanlinna–Pick interpolation and Schur-class machinery.
//!
//! Data `(wⱼ, ξⱼ, ηⱼ)` prescribes `σ(wⱼ)* ξⱼ = ηⱼ` for a `p×q` Schur
//! function `σ`. Solvability is governed by the Pick matrix
//! `P_{ℓj} = (ξₗ*ξⱼ − ηₗ*ηⱼ)/(1 − wₗ wⱼ*)`; when `P > 0` the solver peels
//! off one condition at a time with an elementary J-inner factor and
//! re-targets the remaining conditions, ending in a linear-fractional
//! parametrization of solutions. Each elementary factor is normalized so
//! that its zero parameter reproduces the minimal constant interpolant of
//! its own condition; with the zero final parameter the chain then agrees
//! with the classical recursive Schur/Nevanlinna construction.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::series::TaylorSeries;
use crate::{linalg, Complex64, HardyError, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tangential interpolation data: nodes in the open disk, directions
/// `ξⱼ ∈ ℂᵖ` (non-zero) and targets `ηⱼ ∈ ℂ^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct NPData {
    nodes: Vec<Complex64>,
    xi: Vec<DVector<Complex64>>,
    eta: Vec<DVector<Complex64>>,
}

impl NPData {
    pub fn new(
        nodes: Vec<Complex64>,
        xi: Vec<DVector<Complex64>>,
        eta: Vec<DVector<Complex64>>,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != xi.len() || nodes.len() != eta.len() {
            return Err(HardyError::DimensionMismatch(
                "nodes, xi, eta must be non-empty and of equal length".into(),
            ));
        }
        let p = xi[0].len();
        let q = eta[0].len();
        for (j, w) in nodes.iter().enumerate() {
            if !(w.norm() < 1.0) {
                return Err(HardyError::InvalidArgument(format!(
                    "node {j} must lie strictly inside the unit disk"
                )));
            }
            if xi[j].len() != p || eta[j].len() != q {
                return Err(HardyError::DimensionMismatch("ragged xi/eta entries".into()));
            }
            if xi[j].norm() == 0.0 {
                return Err(HardyError::InvalidArgument(format!("direction xi_{j} must be non-zero")));
            }
        }
        Ok(Self { nodes, xi, eta })
    }

    /// Scalar data `σ(wⱼ) = sⱼ`, encoded tangentially with `ξ = 1`.
    pub fn scalar(nodes: &[Complex64], values: &[Complex64]) -> Result<Self> {
        let xi = values.iter().map(|_| DVector::from_element(1, ONE)).collect();
        let eta = values.iter().map(|&s| DVector::from_element(1, s.conj())).collect();
        Self::new(nodes.to_vec(), xi, eta)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn p(&self) -> usize {
        self.xi[0].len()
    }

    pub fn q(&self) -> usize {
        self.eta[0].len()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn xi(&self) -> &[DVector<Complex64>] {
        &self.xi
    }

    pub fn eta(&self) -> &[DVector<Complex64>] {
        &self.eta
    }

    /// Largest interpolation defect `max_j ‖σ(wⱼ)*ξⱼ − ηⱼ‖` of a candidate.
    pub fn residual(&self, sigma: &SchurFunction) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.len() {
            let v = sigma.eval(self.nodes[j]).adjoint() * &self.xi[j] - &self.eta[j];
            worst = worst.max(v.norm());
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct NPDataWire {
    nodes: Vec<[f64; 2]>,
    xi: Vec<Vec<[f64; 2]>>,
    eta: Vec<Vec<[f64; 2]>>,
}

impl Serialize for NPData {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        NPDataWire {
            nodes: self.nodes.iter().map(|w| [w.re, w.im]).collect(),
            xi: self
                .xi
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            eta: self
                .eta
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NPData {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = NPDataWire::deserialize(deserializer)?;
        let nodes = wire.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let vecs = |src: &Vec<Vec<[f64; 2]>>| -> Vec<DVector<Complex64>> {
            src.iter()
                .map(|v| DVector::from_iterator(v.len(), v.iter().map(|p| Complex64::new(p[0], p[1]))))
                .collect()
        };
        NPData::new(nodes, vecs(&wire.xi), vecs(&wire.eta)).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// The Pick matrix `P_{ℓj} = (ξₗ*ξⱼ − ηₗ*ηⱼ)/(1 − wₗ wⱼ*)`.
pub fn pick_matrix(data: &NPData) -> DMatrix<Complex64> {
    let n = data.len();
    DMatrix::from_fn(n, n, |l, j| {
        let num = data.xi[l].dotc(&data.xi[j]) - data.eta[l].dotc(&data.eta[j]);
        num / (ONE - data.nodes[l] * data.nodes[j].conj())
    })
}

/// Feasibility test: `true` iff the Pick matrix has min eigenvalue ≥ −tol.
/// Returns the minimum eigenvalue alongside.
pub fn np_feasible(data: &NPData, tol: f64) -> (bool, f64) {
    let min_eig = linalg::hermitian_min_eig(&pick_matrix(data));
    (min_eig >= -tol, min_eig)
}

/// One elementary J-inner factor of the solver chain:
/// `θ(z) = (I + c(z)·x x* J) · V` with `c(z) = (z−1)/((1−z w*)(1−w) p₁)`,
/// `x = [ξ; η]`, `p₁ = (‖ξ‖²−‖η‖²)/(1−|w|²)`, and `V` the constant
/// J-unitary rotation fixing the minimal constant interpolant.
#[derive(Clone, Debug)]
struct ElementaryFactor {
    node: Complex64,
    outer: DMatrix<Complex64>,
    rot: DMatrix<Complex64>,
    scale: Complex64,
}

impl ElementaryFactor {
    fn build(w: Complex64, xi: &DVector<Complex64>, eta: &DVector<Complex64>) -> Result<Self> {
        let p = xi.len();
        let q = eta.len();
        let nx = xi.norm_squared();
        let p_step = (nx - eta.norm_squared()) / (1.0 - w.norm_sqr());
        if !(p_step > 0.0) {
            return Err(HardyError::DegenerateSolve(format!(
                "interpolation step at node {w} has non-positive Pick weight {p_step:.3e}"
            )));
        }
        let mut x = DVector::<Complex64>::zeros(p + q);
        x.rows_mut(0, p).copy_from(xi);
        x.rows_mut(p, q).copy_from(eta);
        // x x* J with J = diag(I_p, -I_q)
        let mut outer = &x * x.adjoint();
        for i in 0..(p + q) {
            for j in p..(p + q) {
                outer[(i, j)] = -outer[(i, j)];
            }
        }
        // k = η ξ* / ‖ξ‖², the adjoint of the minimal constant interpolant.
        let k = eta * xi.adjoint() / Complex64::new(nx, 0.0);
        let rot = halmos(&k)?;
        let scale = ONE / ((ONE - w) * Complex64::new(p_step, 0.0));
        Ok(Self {
            node: w,
            outer,
            rot,
            scale,
        })
    }

    fn coefficient(&self, z: Complex64) -> Complex64 {
        (z - ONE) / (ONE - z * self.node.conj()) * self.scale
    }

    fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        let d = self.outer.nrows();
        let mut theta = self.outer.map(|t| t * self.coefficient(z));
        for i in 0..d {
            theta[(i, i)] += ONE;
        }
        theta * &self.rot
    }

    /// Truncated Taylor series of the factor.
    fn series(&self, n: usize) -> TaylorSeries {
        let d = self.outer.nrows();
        let wc = self.node.conj();
        // (z-1)/(1-z w*) = -1 + Σ_{k>=1} (w*^{k-1} - w*^k) z^k
        let mut coeffs = Vec::with_capacity(n);
        let mut eye = DMatrix::<Complex64>::identity(d, d);
        eye += self.outer.map(|t| -t * self.scale);
        coeffs.push(eye);
        let mut pw = ONE;
        for _ in 1..n {
            let ck = (pw - wc * pw) * self.scale;
            coeffs.push(self.outer.map(|t| t * ck));
            pw *= wc;
        }
        TaylorSeries::new(coeffs)
            .expect("consistent shapes")
            .right_mul_matrix(&self.rot)
            .expect("square rotation")
    }
}

/// The constant J-unitary hyperbolic rotation built from a strict
/// contraction `k` (`q×p`); its zero-parameter LFT value is `k*`.
fn halmos(k: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let q = k.nrows();
    let p = k.ncols();
    let ip = DMatrix::<Complex64>::identity(p, p);
    let iq = DMatrix::<Complex64>::identity(q, q);
    let left = linalg::hermitian_inv_sqrt(&(&ip - k.adjoint() * k)).map_err(|_| {
        HardyError::DegenerateSolve("interpolant reaches the Schur-class boundary; no parametrization".into())
    })?;
    let right = linalg::hermitian_inv_sqrt(&(&iq - k * k.adjoint())).map_err(|_| {
        HardyError::DegenerateSolve("interpolant reaches the Schur-class boundary; no parametrization".into())
    })?;
    let mut v = DMatrix::<Complex64>::zeros(p + q, p + q);
    v.view_mut((0, 0), (p, p)).copy_from(&left);
    v.view_mut((0, p), (p, q)).copy_from(&(k.adjoint() * &right));
    v.view_mut((p, 0), (q, p)).copy_from(&(k * &left));
    v.view_mut((p, p), (q, q)).copy_from(&right);
    Ok(v)
}

#[derive(Clone, Debug)]
struct LftRepr {
    factors: Vec<ElementaryFactor>,
    tail_rot: Option<DMatrix<Complex64>>,
    shift_param: bool,
    top: usize,
    bottom: usize,
    param: Box<SchurFunction>,
}

impl LftRepr {
    fn theta(&self, z: Complex64) -> DMatrix<Complex64> {
        let d = self.top + self.bottom;
        let mut theta = DMatrix::<Complex64>::identity(d, d);
        for f in &self.factors {
            theta *= f.eval(z);
        }
        if let Some(rot) = &self.tail_rot {
            theta *= rot;
        }
        theta
    }

    fn theta_series(&self, n: usize) -> TaylorSeries {
        let d = self.top + self.bottom;
        let mut theta = TaylorSeries::identity(d, n);
        for f in &self.factors {
            theta = theta.mul(&f.series(n)).expect("square series");
        }
        if let Some(rot) = &self.tail_rot {
            theta = theta.right_mul_matrix(rot).expect("square rotation");
        }
        theta
    }
}

/// An evaluable Schur-class function `𝔻 → ℂ^{p×q}` with block-row
/// partition markers. Values come from a constant, a truncated series, or
/// a linear-fractional transform of a parameter along a J-inner chain.
#[derive(Clone, Debug)]
pub struct SchurFunction {
    rows: usize,
    cols: usize,
    partition: Vec<usize>,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Constant(DMatrix<Complex64>),
    Series(TaylorSeries),
    Lft(LftRepr),
}

impl SchurFunction {
    /// Constant function. Contractivity is certified separately.
    pub fn constant(value: DMatrix<Complex64>) -> Self {
        let (rows, cols) = value.shape();
        Self {
            rows,
            cols,
            partition: vec![rows],
            repr: Repr::Constant(value),
        }
    }

    /// Zero function of shape `p×q`.
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    /// Function given by a truncated Taylor series.
    pub fn from_series(series: TaylorSeries) -> Self {
        let (rows, cols) = (series.rows(), series.cols());
        Self {
            rows,
            cols,
            partition: vec![rows],
            repr: Repr::Series(series),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Block-row sizes; defaults to a single block.
    pub fn partition(&self) -> &[usize] {
        &self.partition
    }

    pub fn with_partition(mut self, partition: Vec<usize>) -> Result<Self> {
        if partition.iter().sum::<usize>() != self.rows || partition.iter().any(|&s| s == 0) {
            return Err(HardyError::DimensionMismatch(format!(
                "partition {:?} does not tile {} rows",
                partition, self.rows
            )));
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn eval(&self, z: Complex64) -> DMatrix<Complex64> {
        match &self.repr {
            Repr::Constant(m) => m.clone(),
            Repr::Series(s) => s.eval(z),
            Repr::Lft(lft) => {
                let theta = lft.theta(z);
                let (p, q) = (lft.top, lft.bottom);
                let mut eps = lft.param.eval(z);
                if lft.shift_param {
                    eps *= z;
                }
                let num = theta.view((0, 0), (p, p)) * &eps + theta.view((0, p), (p, q));
                let den = theta.view((p, 0), (q, p)) * &eps + theta.view((p, p), (q, q));
                solve_right(&num, &den)
            }
        }
    }

    /// Taylor series of the function, truncated at `n`.
    pub fn to_series(&self, n: usize) -> TaylorSeries {
        match &self.repr {
            Repr::Constant(m) => TaylorSeries::constant(m.clone(), n),
            Repr::Series(s) => s.resized(n),
            Repr::Lft(lft) => {
                let theta = lft.theta_series(n);
                let (p, q) = (lft.top, lft.bottom);
                let mut eps = lft.param.to_series(n);
                if lft.shift_param {
                    eps = eps.shift(1);
                }
                let num = theta
                    .block(0, 0, p, p)
                    .and_then(|t| t.mul(&eps))
                    .and_then(|t| t.add(&theta.block(0, p, p, q)?))
                    .expect("consistent blocks");
                let den = theta
                    .block(p, 0, q, p)
                    .and_then(|t| t.mul(&eps))
                    .and_then(|t| t.add(&theta.block(p, p, q, q)?))
                    .expect("consistent blocks");
                let den_inv = den.inverse().expect("denominator invertible at the origin");
                num.mul(&den_inv).expect("consistent blocks")
            }
        }
    }

    /// Splits an evaluation into the partition blocks.
    pub fn eval_blocks(&self, z: Complex64) -> Vec<DMatrix<Complex64>> {
        let m = self.eval(z);
        let mut out = Vec::with_capacity(self.partition.len());
        let mut offset = 0;
        for &s in &self.partition {
            out.push(m.view((offset, 0), (s, self.cols)).into_owned());
            offset += s;
        }
        out
    }

    /// Boundary-sampling and Pick-kernel certificate of contractivity.
    pub fn certify(&self, samples: usize, radius: f64) -> SchurCertificate {
        let samples = samples.max(8);
        let mut max_sv = 0.0f64;
        for k in 0..samples {
            let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let z = Complex64::new(radius * t.cos(), radius * t.sin());
            max_sv = max_sv.max(linalg::max_singular_value(&self.eval(z)));
        }

        let pts = interior_ring_points(24);
        let vals: Vec<DMatrix<Complex64>> = pts.iter().map(|&z| self.eval(z)).collect();
        let p = self.rows;
        let count = pts.len();
        let mut gram = DMatrix::<Complex64>::zeros(count * p, count * p);
        for i in 0..count {
            for j in 0..count {
                let block = (DMatrix::<Complex64>::identity(p, p) - &vals[i] * vals[j].adjoint())
                    / (ONE - pts[i] * pts[j].conj());
                gram.view_mut((i * p, j * p), (p, p)).copy_from(&block);
            }
        }
        SchurCertificate {
            samples,
            radius,
            max_singular_value: max_sv,
            min_pick_eigenvalue: linalg::hermitian_min_eig(&gram),
        }
    }
}

/// Deterministic interior sample points on two rings (radii 0.35 / 0.65).
fn interior_ring_points(count: usize) -> Vec<Complex64> {
    let half = count / 2;
    let mut pts = Vec::with_capacity(count);
    for k in 0..half {
        let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / half as f64;
        pts.push(Complex64::new(0.35 * t.cos(), 0.35 * t.sin()));
    }
    for k in 0..(count - half) {
        let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.6) / (count - half) as f64;
        pts.push(Complex64::new(0.65 * t.cos(), 0.65 * t.sin()));
    }
    pts
}

/// Result of [`SchurFunction::certify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchurCertificate {
    pub samples: usize,
    pub radius: f64,
    pub max_singular_value: f64,
    pub min_pick_eigenvalue: f64,
}

impl SchurCertificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_singular_value <= 1.0 + tol && self.min_pick_eigenvalue >= -tol
    }
}

fn solve_right(num: &DMatrix<Complex64>, den: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // num · den⁻¹ via denᵀ xᵀ = numᵀ.
    match den.transpose().lu().solve(&num.transpose()) {
        Some(xt) => xt.transpose(),
        None => num * linalg::pinv(den, 1e-13),
    }
}

/// Solves the tangential Nevanlinna–Pick problem. With `parameter = None`
/// the zero parameter is used, which reproduces the classical recursive
/// central solution. Requires a strictly positive Pick matrix; degenerate
/// problems are rejected, not reduced.
pub fn np_solve(data: &NPData, parameter: Option<SchurFunction>, tol: f64) -> Result<SchurFunction> {
    let p = data.p();
    let q = data.q();
    if let Some(eps) = &parameter {
        if eps.rows() != p || eps.cols() != q {
            return Err(HardyError::DimensionMismatch(format!(
                "parameter must be {p}x{q}, got {}x{}",
                eps.rows(),
                eps.cols()
            )));
        }
    }

    let pick = pick_matrix(data);
    let scale = linalg::hermitian_max_eig(&pick).abs().max(1.0);
    let min_eig = linalg::hermitian_min_eig(&pick);
    if min_eig < -tol * scale {
        return Err(HardyError::Infeasible(format!(
            "Pick matrix has negative eigenvalue {min_eig:.6e}"
        )));
    }
    // Singular-to-working-precision data is rejected, not reduced. Positive
    // but ill-conditioned matrices proceed; the per-step weight checks
    // below fail loudly if the conditioning actually collapses.
    if min_eig <= 1e-13 * scale * data.len() as f64 {
        return Err(HardyError::DegenerateSolve(format!(
            "Pick matrix is singular to working precision (min eigenvalue {min_eig:.6e}); \
             boundary-rigid problems are not reduced"
        )));
    }

    let mut nodes = data.nodes.clone();
    let mut xi = data.xi.clone();
    let mut eta = data.eta.clone();
    let mut factors = Vec::with_capacity(nodes.len());
    let node_count = nodes.len();
    for step in 0..node_count {
        let w = nodes[step];
        let factor = ElementaryFactor::build(w, &xi[step], &eta[step])?;
        // Re-target the remaining conditions through this factor:
        // [ξ'*, -η'*] = x* J θ(w), and x* J = (Jx)* with Jx = [ξ; -η].
        for j in (step + 1)..node_count {
            let theta = factor.eval(nodes[j]);
            let mut jx = DVector::<Complex64>::zeros(p + q);
            jx.rows_mut(0, p).copy_from(&xi[j]);
            jx.rows_mut(p, q).copy_from(&(-&eta[j]));
            let mut row = (jx.adjoint() * theta).transpose().conjugate();
            // row now holds [ξ'; -η']: negate the bottom block.
            for t in p..(p + q) {
                row[t] = -row[t];
            }
            let new_xi = row.rows(0, p).into_owned();
            let new_eta = row.rows(p, q).into_owned();
            if new_xi.norm() <= 1e-14 {
                return Err(HardyError::DegenerateSolve(format!(
                    "condition {j} becomes rank-deficient after step {step}"
                )));
            }
            xi[j] = new_xi;
            eta[j] = new_eta;
        }
        nodes[step] = w;
        factors.push(factor);
    }

    let param = parameter.unwrap_or_else(|| SchurFunction::zero(p, q));
    Ok(SchurFunction {
        rows: p,
        cols: q,
        partition: vec![p],
        repr: Repr::Lft(LftRepr {
            factors,
            tail_rot: None,
            shift_param: false,
            top: p,
            bottom: q,
            param: Box::new(param),
        }),
    })
}

/// Solves `X σ(0) = γ` over Schur functions `σ : 𝔻 → ℂ^{n×q}` for
/// `X ∈ ℂ^{r×n}`. The central solution is the minimal-norm constant
/// `σ₀ = X⁺γ`, feasible iff `γ` is in the range of `X` and `σ₀` is a
/// contraction. A parameter adds a correction vanishing at the origin
/// while keeping `σ(0) = σ₀`.
pub fn origin_tangential_solve(
    x: &DMatrix<Complex64>,
    gamma: &DMatrix<Complex64>,
    parameter: Option<SchurFunction>,
    tol: f64,
) -> Result<SchurFunction> {
    let (r, n) = x.shape();
    if gamma.nrows() != r {
        return Err(HardyError::DimensionMismatch(format!(
            "target must have {r} rows, got {}",
            gamma.nrows()
        )));
    }
    let q = gamma.ncols();
    let sigma0 = linalg::pinv(x, 1e-12) * gamma;
    let range_gap = (x * &sigma0 - gamma).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gamma_scale = gamma.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if range_gap > tol.max(1e-12) * gamma_scale {
        return Err(HardyError::Infeasible(format!(
            "target is not in the range of the constraint matrix (gap {range_gap:.3e})"
        )));
    }
    let sv = linalg::max_singular_value(&sigma0);
    if sv > 1.0 + tol {
        return Err(HardyError::Infeasible(format!(
            "norm budget exceeded: minimal constant has singular value {sv:.12} > 1"
        )));
    }
    let param = match parameter {
        None => {
            return Ok(SchurFunction::constant(sigma0));
        }
        Some(eps) => {
            if eps.rows() != n || eps.cols() != q {
                return Err(HardyError::DimensionMismatch(format!(
                    "parameter must be {n}x{q}, got {}x{}",
                    eps.rows(),
                    eps.cols()
                )));
            }
            eps
        }
    };
    let rot = halmos(&sigma0.adjoint())?;
    Ok(SchurFunction {
        rows: n,
        cols: q,
        partition: vec![n],
        repr: Repr::Lft(LftRepr {
            factors: Vec::new(),
            tail_rot: Some(rot),
            shift_param: true,
            top: n,
            bottom: q,
            param: Box::new(param),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_df(v: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, v)
    }

    // Independent classical oracle: the recursive Schur/Nevanlinna
    // algorithm on scalar data (σ(wⱼ) = sⱼ) with zero final parameter.
    fn nevanlinna_central(data: &[(Complex64, Complex64)], z: Complex64) -> Complex64 {
        if data.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let (w1, s1) = data[0];
        let bw = |t: Complex64| (t - w1) / (ONE - t * w1.conj());
        let reduced: Vec<(Complex64, Complex64)> = data[1..]
            .iter()
            .map(|&(wj, sj)| {
                let moved = (sj - s1) / (ONE - s1.conj() * sj);
                (wj, moved / bw(wj))
            })
            .collect();
        let tau = nevanlinna_central(&reduced, z);
        let b = bw(z);
        (b * tau + s1) / (ONE + s1.conj() * b * tau)
    }

    #[test]
    fn pick_matrix_single_node() {
        let data = NPData::scalar(&[c(0.0, 0.0)], &[c(0.6, 0.0)]).unwrap();
        let p = pick_matrix(&data);
        assert_relative_eq!(p[(0, 0)].re, 1.0 - 0.36, epsilon = 1e-14);
    }

    #[test]
    fn pick_matrix_zero_targets_is_cauchy_gram() {
        let nodes = [c(0.0, 0.0), c(0.5, 0.0)];
        let data = NPData::scalar(&nodes, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = pick_matrix(&data);
        assert_relative_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p[(0, 1)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p[(1, 1)].re, 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn pick_matrix_is_hermitian() {
        let nodes = [c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.1)];
        let vals = [c(0.2, 0.1), c(-0.3, 0.2), c(0.1, 0.4)];
        let p = pick_matrix(&NPData::scalar(&nodes, &vals).unwrap());
        let gap = (&p - p.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-14);
    }

    #[test]
    fn pick_matrix_satisfies_stein_identity() {
        // P - A P A* = C* J C with A = diag(w_j), C the stacked data.
        let nodes = [c(0.1, 0.2), c(-0.4, 0.3)];
        let vals = [c(0.2, 0.1), c(-0.3, 0.2)];
        let data = NPData::scalar(&nodes, &vals).unwrap();
        let p = pick_matrix(&data);
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&nodes));
        let cjc = DMatrix::from_fn(2, 2, |l, j| {
            data.xi()[l].dotc(&data.xi()[j]) - data.eta()[l].dotc(&data.eta()[j])
        });
        let res = &p - &a * &p * a.adjoint() - cjc;
        assert!(res.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn feasibility_examples() {
        let bad = NPData::scalar(&[c(0.0, 0.0)], &[c(2.0, 0.0)]).unwrap();
        let (ok, eig) = np_feasible(&bad, 1e-10);
        assert!(!ok);
        assert_relative_eq!(eig, -3.0, epsilon = 1e-12);

        let zero = NPData::scalar(&[c(0.0, 0.0), c(0.5, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(np_feasible(&zero, 1e-10).0);

        let boundary = NPData::scalar(&[c(0.3, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let (ok, eig) = np_feasible(&boundary, 1e-10);
        assert!(ok);
        assert!(eig.abs() < 1e-12);
    }

    #[test]
    fn central_single_node_at_origin_is_constant() {
        // σ(0) = 0.5: tangential data ξ = 1, η = 0.5.
        let data = NPData::scalar(&[c(0.0, 0.0)], &[c(0.5, 0.0)]).unwrap();
        let sigma = np_solve(&data, None, 1e-10).unwrap();
        for &t in &[0.0, 0.3, -0.7, 0.5] {
            let v = sigma.eval(c(t, 0.1))[(0, 0)];
            assert!((v - c(0.5, 0.0)).norm() < 1e-12, "value {v} at {t}");
        }
    }

    #[test]
    fn central_matches_classical_recursion_one_and_two_nodes() {
        // Values sampled from genuine Schur functions keep the data feasible.
        let s3 = |w: Complex64| w * c(0.5, 0.2) + c(0.1, -0.05);
        let cases: Vec<Vec<(Complex64, Complex64)>> = vec![
            vec![(c(0.3, -0.2), c(0.4, 0.1))],
            vec![(c(0.0, 0.0), c(0.0, 0.0)), (c(0.5, 0.0), c(0.25, 0.0))],
            vec![
                (c(-0.4, 0.1), s3(c(-0.4, 0.1))),
                (c(0.2, 0.6), s3(c(0.2, 0.6))),
            ],
        ];
        for case in cases {
            let nodes: Vec<Complex64> = case.iter().map(|x| x.0).collect();
            let values: Vec<Complex64> = case.iter().map(|x| x.1).collect();
            let data = NPData::scalar(&nodes, &values).unwrap();
            let sigma = np_solve(&data, None, 1e-10).unwrap();
            for k in 0..64 {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                let z = Complex64::new(0.8 * t.cos(), 0.8 * t.sin());
                let got = sigma.eval(z)[(0, 0)];
                let want = nevanlinna_central(&case, z);
                assert!(
                    (got - want).norm() < 1e-8,
                    "mismatch at {z}: {got} vs {want} for case {case:?}"
                );
            }
        }
    }

    #[test]
    fn recovers_interpolation_values_two_nodes() {
        // Data sampled from σ0(z) = z/2.
        let nodes = [c(0.2, 0.3), c(-0.5, 0.1)];
        let values: Vec<Complex64> = nodes.iter().map(|&w| w * 0.5).collect();
        let data = NPData::scalar(&nodes, &values).unwrap();
        let sigma = np_solve(&data, None, 1e-10).unwrap();
        assert!(data.residual(&sigma) < 1e-10);
        let cert = sigma.certify(512, 0.999);
        assert!(cert.passes(1e-8), "certificate {cert:?}");
    }

    #[test]
    fn parametrized_solutions_still_interpolate() {
        let nodes = [c(0.0, 0.0), c(0.4, -0.2), c(-0.3, 0.5)];
        let values: Vec<Complex64> = nodes.iter().map(|&w| (w * w) * 0.3 + c(0.1, 0.0)).collect();
        let data = NPData::scalar(&nodes, &values).unwrap();
        for &par in &[c(0.0, 0.0), c(0.5, 0.2), c(-0.8, 0.1)] {
            let eps = SchurFunction::constant(scalar_df(par));
            let sigma = np_solve(&data, Some(eps), 1e-10).unwrap();
            assert!(data.residual(&sigma) < 1e-9, "parameter {par}");
            assert!(sigma.certify(256, 0.999).passes(1e-8));
        }
    }

    #[test]
    fn matrix_tangential_problem() {
        // 2x1 Schur target σ(w)* ξ = η with vector directions.
        let nodes = vec![c(0.2, 0.0), c(-0.1, 0.4)];
        let xi = vec![
            DVector::from_row_slice(&[c(1.0, 0.0), c(0.5, 0.0)]),
            DVector::from_row_slice(&[c(0.0, 1.0), c(1.0, 0.0)]),
        ];
        let eta = vec![
            DVector::from_row_slice(&[c(0.3, 0.0)]),
            DVector::from_row_slice(&[c(0.1, -0.2)]),
        ];
        let data = NPData::new(nodes, xi, eta).unwrap();
        let sigma = np_solve(&data, None, 1e-10).unwrap();
        assert!(data.residual(&sigma) < 1e-10);
        assert!(sigma.certify(256, 0.999).passes(1e-8));
    }

    #[test]
    fn infeasible_detected_exactly() {
        let data = NPData::scalar(&[c(0.0, 0.0)], &[c(1.2, 0.0)]).unwrap();
        assert!(matches!(np_solve(&data, None, 1e-10), Err(HardyError::Infeasible(_))));
    }

    #[test]
    fn boundary_rigid_data_is_degenerate_not_silently_solved() {
        let data = NPData::scalar(&[c(0.3, 0.0)], &[c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            np_solve(&data, None, 1e-10),
            Err(HardyError::DegenerateSolve(_))
        ));
    }

    #[test]
    fn to_series_matches_eval() {
        let nodes = [c(0.1, 0.3), c(-0.4, 0.0)];
        let values = [c(0.5, -0.1), c(0.2, 0.2)];
        let data = NPData::scalar(&nodes, &values).unwrap();
        let sigma = np_solve(&data, None, 1e-10).unwrap();
        let series = sigma.to_series(256);
        for &t in &[c(0.3, 0.2), c(-0.5, -0.4), c(0.0, 0.0)] {
            let gap = (series.eval(t)[(0, 0)] - sigma.eval(t)[(0, 0)]).norm();
            assert!(gap < 1e-9, "series/eval gap {gap} at {t}");
        }
    }

    #[test]
    fn origin_solve_least_norm_example() {
        let x = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let gamma = scalar_df(c(0.5, 0.0));
        let sigma = origin_tangential_solve(&x, &gamma, None, 1e-10).unwrap();
        let v = sigma.eval(c(0.2, 0.1));
        assert!((v[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(v[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn origin_solve_infeasible_when_budget_exceeded() {
        let x = DMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]);
        let gamma = scalar_df(c(1.2, 0.0));
        assert!(matches!(
            origin_tangential_solve(&x, &gamma, None, 1e-10),
            Err(HardyError::Infeasible(_))
        ));
    }

    #[test]
    fn origin_solve_feasibility_boundary() {
        // X = u P^{1/2} with u = (1,1), P = [[1,1],[1,4/3]]: X X* = u P u* = 13/3.
        let p = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(4.0 / 3.0, 0.0)]);
        let sqrt_p = crate::linalg::hermitian_sqrt(&p).unwrap();
        let u = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let x = &u * &sqrt_p;
        let xx = (&x * x.adjoint())[(0, 0)].re;
        assert_relative_eq!(xx, 13.0 / 3.0, epsilon = 1e-12);
        let gamma = scalar_df(c(1.0, 0.0));
        let sigma = origin_tangential_solve(&x, &gamma, None, 1e-10).unwrap();
        let sv = crate::linalg::max_singular_value(&sigma.eval(c(0.0, 0.0)));
        assert_relative_eq!(sv * sv, 3.0 / 13.0, epsilon = 1e-10);
    }

    #[test]
    fn origin_solve_parametrized_keeps_origin_value() {
        let x = DMatrix::from_row_slice(1, 2, &[c(0.8, 0.0), c(0.4, 0.2)]);
        let gamma = scalar_df(c(0.3, -0.2));
        let eps = SchurFunction::constant(DMatrix::from_row_slice(2, 1, &[c(0.4, 0.1), c(-0.3, 0.0)]));
        let sigma = origin_tangential_solve(&x, &gamma, Some(eps), 1e-10).unwrap();
        let at0 = sigma.eval(c(0.0, 0.0));
        let gap = (&x * &at0 - &gamma).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-12);
        // Away from 0 the correction is active but σ stays Schur.
        assert!(sigma.certify(256, 0.999).passes(1e-8));
        let off = sigma.eval(c(0.5, 0.2));
        assert!((off - at0).iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-3);
    }

    #[test]
    fn np_data_serde_round_trip() {
        let nodes = vec![c(0.1, 0.2)];
        let xi = vec![DVector::from_row_slice(&[c(1.0, 0.0), c(0.0, -1.0)])];
        let eta = vec![DVector::from_row_slice(&[c(0.3, 0.1)])];
        let data = NPData::new(nodes, xi, eta).unwrap();
        let json = serde_json::to_string(&data).unwrap();
        let back: NPData = serde_json::from_str(&json).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn theta_chain_is_j_contractive_inside() {
        let nodes = [c(0.2, 0.1), c(-0.3, 0.4), c(0.5, 0.0)];
        let values: Vec<Complex64> = nodes.iter().map(|&w| w * w * 0.3 + c(0.1, 0.0)).collect();
        let data = NPData::scalar(&nodes, &values).unwrap();
        let sigma = np_solve(&data, None, 1e-10).unwrap();
        let Repr::Lft(lft) = &sigma.repr else {
            panic!("expected LFT repr");
        };
        let j = DMatrix::from_diagonal(&DVector::from_row_slice(&[ONE, -ONE]));
        for &z in &[c(0.0, 0.0), c(0.5, 0.3), c(-0.7, 0.1)] {
            let th = lft.theta(z);
            let gap = &j - &th * &j * th.adjoint();
            assert!(
                crate::linalg::hermitian_min_eig(&gap) > -1e-10,
                "J-contractivity fails at {z}"
            );
        }
    }
}
