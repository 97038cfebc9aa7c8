//! Constructive Leech factorization and Schur representations of
//! contractive H₂ functions.
//!
//! Given samples of `A` and `B` with the kernel
//! `(A(z)A(w)* − B(z)B(w)*)/(1 − zw*)` positive on the samples,
//! [`leech_factor`] produces a Schur `σ` with `A σ = B` at the samples by
//! turning every row of every sample into a tangential condition and
//! calling the Nevanlinna–Pick solver. The continuum density argument is
//! replaced by a fixed finite sample set plus residual verification.
//!
//! On top of this sit the representation maps: a contractive `H` is
//! carried to a Schur `σ = (σ₁; σ₂)` with `H = σ₁ (I − zσ₂)⁻¹`, and, for a
//! preassigned Blaschke product `b`, to the sub-band form
//! `H = (Σⱼ eⱼ σ₁ⱼ(b)) (I − b σ₂(b))⁻¹`.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::blaschke::ModelBasis;
use crate::cuntz::CuntzSystem;
use crate::pick::{np_solve, NPData, SchurFunction};
use crate::series::TaylorSeries;
use crate::{linalg, Complex64, HardyError, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sampled Leech data: points `zₗ` with `k×p` values `A(zₗ)` and `k×q`
/// values `B(zₗ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeechData {
    points: Vec<Complex64>,
    a_values: Vec<DMatrix<Complex64>>,
    b_values: Vec<DMatrix<Complex64>>,
}

impl LeechData {
    pub fn new(
        points: Vec<Complex64>,
        a_values: Vec<DMatrix<Complex64>>,
        b_values: Vec<DMatrix<Complex64>>,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != a_values.len() || points.len() != b_values.len() {
            return Err(HardyError::DimensionMismatch(
                "points, A-values and B-values must be non-empty and of equal length".into(),
            ));
        }
        let (k, p) = a_values[0].shape();
        let q = b_values[0].ncols();
        for (l, z) in points.iter().enumerate() {
            if !(z.norm() < 1.0) {
                return Err(HardyError::InvalidArgument(format!(
                    "sample point {l} must lie inside the unit disk"
                )));
            }
            if a_values[l].shape() != (k, p) || b_values[l].shape() != (k, q) {
                return Err(HardyError::DimensionMismatch("ragged A/B sample shapes".into()));
            }
        }
        Ok(Self {
            points,
            a_values,
            b_values,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn a_values(&self) -> &[DMatrix<Complex64>] {
        &self.a_values
    }

    pub fn b_values(&self) -> &[DMatrix<Complex64>] {
        &self.b_values
    }

    pub fn rows(&self) -> usize {
        self.a_values[0].nrows()
    }

    pub fn p(&self) -> usize {
        self.a_values[0].ncols()
    }

    pub fn q(&self) -> usize {
        self.b_values[0].ncols()
    }

    /// The sampled kernel Gram with blocks
    /// `(A(zₗ)A(zⱼ)* − B(zₗ)B(zⱼ)*)/(1 − zₗ zⱼ*)`.
    pub fn kernel_gram(&self) -> DMatrix<Complex64> {
        let k = self.rows();
        let count = self.points.len();
        let mut gram = DMatrix::<Complex64>::zeros(count * k, count * k);
        for l in 0..count {
            for j in 0..count {
                let num = &self.a_values[l] * self.a_values[j].adjoint()
                    - &self.b_values[l] * self.b_values[j].adjoint();
                let block = num / (ONE - self.points[l] * self.points[j].conj());
                gram.view_mut((l * k, j * k), (k, k)).copy_from(&block);
            }
        }
        gram
    }

    /// Largest defect `max_l ‖A(zₗ)σ(zₗ) − B(zₗ)‖` of a candidate factor.
    pub fn residual(&self, sigma: &SchurFunction) -> f64 {
        let mut worst = 0.0f64;
        for l in 0..self.points.len() {
            let gap = &self.a_values[l] * sigma.eval(self.points[l]) - &self.b_values[l];
            worst = worst.max(gap.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct LeechWire {
    points: Vec<[f64; 2]>,
    k: usize,
    p: usize,
    q: usize,
    /// Row-major entries of each A(z_l).
    a_values: Vec<Vec<[f64; 2]>>,
    b_values: Vec<Vec<[f64; 2]>>,
}

fn matrix_to_wire(m: &DMatrix<Complex64>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

fn matrix_from_wire(flat: &[[f64; 2]], rows: usize, cols: usize) -> Option<DMatrix<Complex64>> {
    if flat.len() != rows * cols {
        return None;
    }
    Some(DMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = flat[i * cols + j];
        Complex64::new(re, im)
    }))
}

impl Serialize for LeechData {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LeechWire {
            points: self.points.iter().map(|z| [z.re, z.im]).collect(),
            k: self.rows(),
            p: self.p(),
            q: self.q(),
            a_values: self.a_values.iter().map(matrix_to_wire).collect(),
            b_values: self.b_values.iter().map(matrix_to_wire).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LeechData {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = LeechWire::deserialize(deserializer)?;
        let points: Vec<Complex64> = wire.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let a_values = wire
            .a_values
            .iter()
            .map(|f| matrix_from_wire(f, wire.k, wire.p).ok_or_else(|| D::Error::custom("bad A-value shape")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let b_values = wire
            .b_values
            .iter()
            .map(|f| matrix_from_wire(f, wire.k, wire.q).ok_or_else(|| D::Error::custom("bad B-value shape")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        LeechData::new(points, a_values, b_values).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Deterministic sample points on two concentric rings (radii 0.4 and
/// 0.75), rotated by a seed-derived phase.
pub fn ring_samples(count: usize, seed: u64) -> Vec<Complex64> {
    let count = count.max(2);
    let phase = (seed as f64 * 0.618_033_988_749_894_9).fract();
    let half = count / 2;
    let mut pts = Vec::with_capacity(count);
    for k in 0..half {
        let t = 2.0 * std::f64::consts::PI * (k as f64 + phase) / half as f64;
        pts.push(Complex64::new(0.4 * t.cos(), 0.4 * t.sin()));
    }
    for k in 0..(count - half) {
        let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5 + phase) / (count - half) as f64;
        pts.push(Complex64::new(0.75 * t.cos(), 0.75 * t.sin()));
    }
    pts
}

/// Finite-sample Leech factorization: finds a Schur `σ` with
/// `A(zₗ) σ(zₗ) = B(zₗ)` for all samples.
///
/// Rows whose tangential condition sits on the Schur-class boundary
/// (`‖ξ‖ = ‖η‖`) force rigidity: if every condition is of that kind and
/// consistent with a single constant unitary, that unitary is returned;
/// mixed or inconsistent boundary data is rejected as degenerate.
pub fn leech_factor(data: &LeechData, tol: f64) -> Result<SchurFunction> {
    let gram = data.kernel_gram();
    let scale = linalg::hermitian_max_eig(&gram).abs().max(1.0);
    let min_eig = linalg::hermitian_min_eig(&gram);
    if min_eig < -tol * scale {
        return Err(HardyError::Infeasible(format!(
            "Leech kernel is not positive on the samples (min eigenvalue {min_eig:.6e})"
        )));
    }

    let p = data.p();
    let q = data.q();
    let mut nodes = Vec::new();
    let mut xi = Vec::new();
    let mut eta = Vec::new();
    let mut boundary_pairs: Vec<(DVector<Complex64>, DVector<Complex64>)> = Vec::new();
    for (l, &z) in data.points.iter().enumerate() {
        for i in 0..data.rows() {
            let xi_v = data.a_values[l].row(i).adjoint();
            let eta_v = data.b_values[l].row(i).adjoint();
            let nx = xi_v.norm();
            let ne = eta_v.norm();
            if nx <= 1e-14 {
                if ne > tol.max(1e-14) {
                    return Err(HardyError::Infeasible(format!(
                        "sample {l} row {i} demands 0·σ = B with B ≠ 0"
                    )));
                }
                continue; // trivially satisfied row
            }
            if (nx - ne).abs() <= tol * nx.max(1.0) {
                boundary_pairs.push((xi_v, eta_v));
            } else {
                nodes.push(z);
                xi.push(xi_v);
                eta.push(eta_v);
            }
        }
    }

    if !boundary_pairs.is_empty() {
        if !nodes.is_empty() {
            return Err(HardyError::DegenerateSolve(
                "mixed boundary and interior tangential conditions in Leech data".into(),
            ));
        }
        return unitary_rigidity_factor(&boundary_pairs, p, q, tol);
    }
    if nodes.is_empty() {
        return Err(HardyError::DegenerateSolve("no effective conditions in Leech data".into()));
    }

    let np = NPData::new(nodes, xi, eta)?;
    np_solve(&np, None, tol)
}

/// All conditions pin `σ(zₗ)` to unitary behaviour; by interior rigidity
/// the only candidates are constant unitaries. Solved as a Procrustes
/// problem and verified against every pair.
fn unitary_rigidity_factor(
    pairs: &[(DVector<Complex64>, DVector<Complex64>)],
    p: usize,
    q: usize,
    tol: f64,
) -> Result<SchurFunction> {
    if p != q {
        return Err(HardyError::DegenerateSolve(
            "boundary-rigid Leech data needs square values".into(),
        ));
    }
    // σ* ξ = η for all pairs with ‖ξ‖ = ‖η‖: best unitary from the polar
    // factor of Σ ξ η*.
    let mut m = DMatrix::<Complex64>::zeros(p, q);
    for (xi_v, eta_v) in pairs {
        m += xi_v * eta_v.adjoint();
    }
    let e = linalg::embed(&m);
    let svd = e.svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let unitary = linalg::unembed(&(u * vt));
    for (xi_v, eta_v) in pairs {
        let gap = (unitary.adjoint() * xi_v - eta_v).norm();
        if gap > tol.max(1e-9) * xi_v.norm().max(1.0) {
            return Err(HardyError::DegenerateSolve(format!(
                "boundary-rigid Leech data is not consistent with a single unitary (gap {gap:.3e})"
            )));
        }
    }
    Ok(SchurFunction::constant(unitary))
}

/// `H(z) = σ₁(z)(I − zσ₂(z))⁻¹` as a truncated series, for a Schur `σ`
/// partitioned into `p` rows `σ₁` over `q` rows `σ₂`.
pub fn schur_to_h2(sigma: &SchurFunction, truncation: usize) -> Result<TaylorSeries> {
    let q = sigma.cols();
    let partition = sigma.partition();
    if partition.len() != 2 || partition[1] != q {
        return Err(HardyError::DimensionMismatch(format!(
            "expected partition [p, q={q}], got {:?}",
            partition
        )));
    }
    let series = sigma.to_series(truncation);
    let blocks = series.split_rows(partition)?;
    let denom = TaylorSeries::identity(q, truncation).sub(&blocks[1].shift(1))?;
    blocks[0].mul(&denom.inverse()?)
}

/// Pointwise evaluation of the same representation.
pub fn eval_schur_rep(sigma: &SchurFunction, z: Complex64) -> Result<DMatrix<Complex64>> {
    let q = sigma.cols();
    let partition = sigma.partition();
    if partition.len() != 2 || partition[1] != q {
        return Err(HardyError::DimensionMismatch("partition must be [p, q]".into()));
    }
    let blocks = sigma.eval_blocks(z);
    let denom = DMatrix::<Complex64>::identity(q, q) - &blocks[1] * z;
    let inv = denom
        .try_inverse()
        .ok_or_else(|| HardyError::InvalidArgument("representation denominator is singular".into()))?;
    Ok(&blocks[0] * inv)
}

/// Inverse representation: samples `A = (I_p, zH(z))`, `B = H(z)` at
/// deterministic interior points and factors through Leech. Requires
/// `[H,H] ≼ I_q` up to `tol`.
pub fn h2_to_schur(h: &TaylorSeries, sample_count: usize, seed: u64, tol: f64) -> Result<SchurFunction> {
    let p = h.rows();
    let q = h.cols();
    let form = h.h2_form(h)?;
    let excess = linalg::hermitian_max_eig(&form) - 1.0;
    if excess > tol {
        return Err(HardyError::NormBound(format!(
            "[H,H] exceeds the identity by {excess:.3e}; representation needs a contraction"
        )));
    }
    let points = ring_samples(sample_count, seed);
    let mut a_values = Vec::with_capacity(points.len());
    let mut b_values = Vec::with_capacity(points.len());
    for &z in &points {
        let hz = h.eval(z);
        let mut a = DMatrix::<Complex64>::zeros(p, p + q);
        a.view_mut((0, 0), (p, p)).copy_from(&DMatrix::identity(p, p));
        a.view_mut((0, p), (p, q)).copy_from(&(&hz * z));
        a_values.push(a);
        b_values.push(hz);
    }
    let data = LeechData::new(points, a_values, b_values)?;
    let sigma = leech_factor(&data, tol)?;
    sigma.with_partition(vec![p, q])
}

/// `H(z) = (Σⱼ eⱼ(z) σ₁ⱼ(b(z))) (I_q − b(z) σ₂(b(z)))⁻¹` as a truncated
/// series, for `σ` partitioned into `M` blocks of `p` rows over `q` rows.
pub fn generalized_schur_to_h2(
    sigma: &SchurFunction,
    basis: &ModelBasis,
    truncation: usize,
) -> Result<TaylorSeries> {
    let (p, q, m) = generalized_dims(sigma, basis)?;
    let series = sigma.to_series(truncation);
    let b_series = basis.blaschke().series(truncation);
    let mut numerator = TaylorSeries::zero(p, q, truncation);
    for j in 0..m {
        let block = series.block(j * p, 0, p, q)?;
        let composed = block.compose_with(&b_series)?;
        let ej = basis.channel_series(j + 1, truncation)?;
        // e_j is scalar: accumulate e_j · (σ₁ⱼ ∘ b) coefficientwise.
        let mut cs = numerator.coeffs().to_vec();
        for (n, ec) in ej.coeffs().iter().enumerate() {
            let w = ec[(0, 0)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for (t, cc) in composed.coeffs().iter().enumerate().take(truncation - n) {
                cs[n + t].zip_apply(cc, |acc, v| *acc += w * v);
            }
        }
        numerator = TaylorSeries::new(cs)?;
    }
    let sigma2 = series.block(m * p, 0, q, q)?.compose_with(&b_series)?;
    let denom = TaylorSeries::identity(q, truncation).sub(&sigma2.mul(&b_series_embed(&b_series, q))?)?;
    numerator.mul(&denom.inverse()?)
}

/// Scalar series promoted to `q×q` diagonal for matrix multiplication.
fn b_series_embed(b: &TaylorSeries, q: usize) -> TaylorSeries {
    let coeffs = b
        .coeffs()
        .iter()
        .map(|c| DMatrix::from_diagonal_element(q, q, c[(0, 0)]))
        .collect();
    TaylorSeries::new(coeffs).expect("diagonal embedding")
}

/// Pointwise evaluation of the generalized representation.
pub fn eval_generalized_rep(
    sigma: &SchurFunction,
    basis: &ModelBasis,
    z: Complex64,
) -> Result<DMatrix<Complex64>> {
    let (p, q, m) = generalized_dims(sigma, basis)?;
    let bz = basis.blaschke().eval(z);
    let value = sigma.eval(bz);
    let row = basis.eval_row(z);
    let mut numerator = DMatrix::<Complex64>::zeros(p, q);
    for j in 0..m {
        let block = value.view((j * p, 0), (p, q));
        numerator += block.map(|t| t * row[j]);
    }
    let sigma2 = value.view((m * p, 0), (q, q)).into_owned();
    let denom = DMatrix::<Complex64>::identity(q, q) - sigma2 * bz;
    let inv = denom
        .try_inverse()
        .ok_or_else(|| HardyError::InvalidArgument("representation denominator is singular".into()))?;
    Ok(numerator * inv)
}

fn generalized_dims(sigma: &SchurFunction, basis: &ModelBasis) -> Result<(usize, usize, usize)> {
    let m = basis.degree();
    let q = sigma.cols();
    let rows = sigma.rows();
    if rows <= q || (rows - q) % m != 0 {
        return Err(HardyError::DimensionMismatch(format!(
            "sigma has {rows} rows, expected M·p + q with M = {m}, q = {q}"
        )));
    }
    let p = (rows - q) / m;
    let expected: Vec<usize> = std::iter::repeat(p).take(m).chain(std::iter::once(q)).collect();
    if sigma.partition() != expected.as_slice() {
        return Err(HardyError::DimensionMismatch(format!(
            "partition {:?} does not match M blocks of {p} rows plus {q}",
            sigma.partition()
        )));
    }
    Ok((p, q, m))
}

/// Inverse generalized representation: sub-band analysis of `H`, stacking
/// of the parts, and the plain representation of the stack.
pub fn generalized_h2_to_schur(
    h: &TaylorSeries,
    basis: &ModelBasis,
    sample_count: usize,
    seed: u64,
    tol: f64,
) -> Result<SchurFunction> {
    let p = h.rows();
    let q = h.cols();
    let m = basis.degree();
    let system = CuntzSystem::new(basis, h.truncation());
    let decomposition = system.analyze(h)?;
    let stacked = decomposition.stacked();
    let sigma = h2_to_schur(&stacked, sample_count, seed, tol)?;
    let partition: Vec<usize> = std::iter::repeat(p).take(m).chain(std::iter::once(q)).collect();
    sigma.with_partition(partition)
}
