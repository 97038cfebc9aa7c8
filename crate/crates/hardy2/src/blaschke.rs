//! Finite Blaschke products and model-space bases.
//!
//! A degree-`M` Blaschke product `b` determines the model space
//! `H(b) = H₂ ⊖ bH₂` of dimension `M`. A basis row is realized in
//! state-space form `C (I - zA)⁻¹` from an observable pair `(C, A)`; its
//! Gram matrix in H₂ is the observability Gramian `P` solving the Stein
//! equation `P - A*PA = C*C`, and `C (I - zA)⁻¹ P^{-1/2}` is an
//! orthonormal basis row.
//!
//! Repeated zeros are realized with a Jordan block (eigenvalue `a*`, ones
//! on the superdiagonal) and `C = (1, 0, …, 0)`, which makes the raw basis
//! row at a zero `a` of multiplicity `m` equal to
//! `(1/(1-za*), z/(1-za*)², …, z^{m-1}/(1-za*)^m)`.

use nalgebra::{DMatrix, RowDVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::series::TaylorSeries;
use crate::{linalg, Complex64, HardyError, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Maximum derivative order accepted by [`ModelBasis::row_derivatives`].
pub const MAX_DERIVATIVE_ORDER: usize = 16;

/// A zero of a Blaschke product with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlaschkeZero {
    pub center: Complex64,
    pub multiplicity: usize,
}

/// Finite Blaschke product `c · Π ((z - aₗ)/(1 - z aₗ*))^{mₗ}` with
/// `|aₗ| < 1` and `|c| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<BlaschkeZero>,
    constant: Complex64,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<BlaschkeZero>, constant: Complex64) -> Result<Self> {
        if zeros.is_empty() {
            return Err(HardyError::InvalidArgument("Blaschke product needs at least one zero".into()));
        }
        for z in &zeros {
            if z.multiplicity == 0 {
                return Err(HardyError::InvalidArgument("zero multiplicity must be >= 1".into()));
            }
            if !(z.center.norm() < 1.0) {
                return Err(HardyError::InvalidArgument(format!(
                    "zero {} must lie strictly inside the unit disk",
                    z.center
                )));
            }
        }
        if (constant.norm() - 1.0).abs() > 1e-12 {
            return Err(HardyError::InvalidArgument("multiplicative constant must be unimodular".into()));
        }
        Ok(Self { zeros, constant })
    }

    /// Product with constant 1 from a zero list.
    pub fn from_zeros(zeros: Vec<BlaschkeZero>) -> Result<Self> {
        Self::new(zeros, ONE)
    }

    /// Product with simple zeros at the given points.
    pub fn from_distinct(centers: &[Complex64]) -> Result<Self> {
        Self::from_zeros(
            centers
                .iter()
                .map(|&center| BlaschkeZero {
                    center,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    /// Single elementary factor `b_a`.
    pub fn single(a: Complex64) -> Result<Self> {
        Self::power(a, 1)
    }

    /// `b_a^m`, one zero of multiplicity `m`.
    pub fn power(a: Complex64, m: usize) -> Result<Self> {
        Self::from_zeros(vec![BlaschkeZero {
            center: a,
            multiplicity: m,
        }])
    }

    pub fn zeros(&self) -> &[BlaschkeZero] {
        &self.zeros
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    /// Degree `M = Σ mₗ`.
    pub fn degree(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// The distinct zero centers, with multiplicity expanded.
    pub fn expanded_zeros(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.degree());
        for z in &self.zeros {
            for _ in 0..z.multiplicity {
                out.push(z.center);
            }
        }
        out
    }

    /// Evaluates `b(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = self.constant;
        for zero in &self.zeros {
            let factor = (z - zero.center) / (ONE - z * zero.center.conj());
            for _ in 0..zero.multiplicity {
                acc *= factor;
            }
        }
        acc
    }

    /// Taylor series of `b` truncated at `n`.
    pub fn series(&self, n: usize) -> TaylorSeries {
        let mut acc = TaylorSeries::from_scalars(&[self.constant], n);
        for zero in &self.zeros {
            let a = zero.center;
            let ac = a.conj();
            // (z - a) / (1 - z a*) = -a + Σ_{k>=1} (a*^{k-1} - a a*^k) z^k
            let mut coeffs = Vec::with_capacity(n);
            coeffs.push(-a);
            let mut pw = ONE;
            for _ in 1..n {
                coeffs.push(pw - a * ac * pw);
                pw *= ac;
            }
            let factor = TaylorSeries::from_scalars(&coeffs, n);
            for _ in 0..zero.multiplicity {
                acc = acc.mul(&factor).expect("scalar series");
            }
        }
        acc
    }
}

#[derive(Serialize, Deserialize)]
struct BlaschkeWire {
    zeros: Vec<ZeroWire>,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ZeroWire {
    a: [f64; 2],
    m: usize,
}

impl Serialize for BlaschkeProduct {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BlaschkeWire {
            zeros: self
                .zeros
                .iter()
                .map(|z| ZeroWire {
                    a: [z.center.re, z.center.im],
                    m: z.multiplicity,
                })
                .collect(),
            c: [self.constant.re, self.constant.im],
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BlaschkeProduct {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = BlaschkeWire::deserialize(deserializer)?;
        let zeros = wire
            .zeros
            .iter()
            .map(|z| BlaschkeZero {
                center: Complex64::new(z.a[0], z.a[1]),
                multiplicity: z.m,
            })
            .collect();
        BlaschkeProduct::new(zeros, Complex64::new(wire.c[0], wire.c[1]))
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Observable state-space pair `(C, A)` realizing a basis row
/// `C (I - zA)⁻¹` of a model space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpacePair {
    c_row: RowDVector<Complex64>,
    a_mat: DMatrix<Complex64>,
}

impl StateSpacePair {
    pub fn new(c_row: RowDVector<Complex64>, a_mat: DMatrix<Complex64>) -> Result<Self> {
        let m = a_mat.nrows();
        if a_mat.ncols() != m || c_row.len() != m || m == 0 {
            return Err(HardyError::DimensionMismatch("state-space pair needs C 1xM and A MxM".into()));
        }
        Ok(Self { c_row, a_mat })
    }

    pub fn dim(&self) -> usize {
        self.a_mat.nrows()
    }

    pub fn output_row(&self) -> &RowDVector<Complex64> {
        &self.c_row
    }

    pub fn state_matrix(&self) -> &DMatrix<Complex64> {
        &self.a_mat
    }

    /// The raw basis row `C (I - zA)⁻¹`.
    pub fn basis_row(&self, z: Complex64) -> RowDVector<Complex64> {
        let m = self.dim();
        let resolvent = (DMatrix::identity(m, m) - self.a_mat.map(|t| t * z))
            .try_inverse()
            .expect("spectrum of A inside the disk, |z| bounded");
        &self.c_row * resolvent
    }

    /// Rows `d^k/dz^k [C (I - zA)⁻¹]` at `z = a`, for `k = 0..=k_max`, from
    /// the closed form `k! · C Aᵏ (I - aA)^{-(k+1)}`.
    pub fn row_derivatives(&self, a: Complex64, k_max: usize) -> Vec<RowDVector<Complex64>> {
        let m = self.dim();
        let resolvent = (DMatrix::identity(m, m) - self.a_mat.map(|t| t * a))
            .try_inverse()
            .expect("spectrum of A inside the disk, |a| < 1");
        let step = &self.a_mat * &resolvent;
        let mut rows = Vec::with_capacity(k_max + 1);
        rows.push(&self.c_row * &resolvent);
        for k in 1..=k_max {
            let prev = rows.last().unwrap();
            rows.push((prev * &step).map(|t| t * k as f64));
        }
        rows
    }

    /// Observability Gramian `P = Σ A^{ℓ*} C* C A^ℓ`, obtained as the exact
    /// solution of the Stein equation `P - A*PA = C*C` via vectorization.
    pub fn gramian(&self) -> Result<DMatrix<Complex64>> {
        let m = self.dim();
        let cc = self.c_row.adjoint() * &self.c_row;
        // vec(A* P A) = (Aᵀ ⊗ A*) vec(P)
        let kron = self.a_mat.transpose().kronecker(&self.a_mat.adjoint());
        let system = DMatrix::<Complex64>::identity(m * m, m * m) - kron;
        let rhs = DMatrix::from_column_slice(m * m, 1, cc.as_slice());
        let sol = linalg::solve(&system, &rhs).ok_or_else(|| {
            HardyError::InvalidArgument("Stein equation is singular; spectral radius of A must be < 1".into())
        })?;
        let p = DMatrix::from_column_slice(m, m, sol.as_slice());
        // Hermitize against round-off and check definiteness loudly.
        let p = (&p + p.adjoint()).map(|t| t * 0.5);
        let residual = (&p - self.a_mat.adjoint() * &p * &self.a_mat - &cc)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = linalg::hermitian_max_eig(&p).max(1.0);
        if residual > 1e-10 * scale {
            return Err(HardyError::InvalidArgument(format!(
                "Stein equation residual {residual:.3e} too large; A is not a stable state matrix"
            )));
        }
        let min_eig = linalg::hermitian_min_eig(&p);
        if min_eig <= 1e-12 * scale {
            return Err(HardyError::SingularGramian { min_eig });
        }
        Ok(p)
    }
}

/// State-space realization of the model space of `b`: Jordan blocks with
/// eigenvalues `aₗ*` and `C` the indicator row of the block starts. For
/// distinct zeros this is `A = diag(a₁*, …, a_M*)`, `C = (1, …, 1)`.
pub fn state_space(b: &BlaschkeProduct) -> StateSpacePair {
    let m = b.degree();
    let mut a_mat = DMatrix::<Complex64>::zeros(m, m);
    let mut c_row = RowDVector::<Complex64>::zeros(m);
    let mut offset = 0;
    for zero in b.zeros() {
        let ac = zero.center.conj();
        c_row[offset] = ONE;
        for k in 0..zero.multiplicity {
            a_mat[(offset + k, offset + k)] = ac;
            if k + 1 < zero.multiplicity {
                a_mat[(offset + k, offset + k + 1)] = ONE;
            }
        }
        offset += zero.multiplicity;
    }
    StateSpacePair::new(c_row, a_mat).expect("shapes consistent by construction")
}

/// A model space `H(b)` with an orthonormal basis row
/// `e(z) = C (I - zA)⁻¹ P^{-1/2}`.
#[derive(Clone, Debug)]
pub struct ModelBasis {
    product: BlaschkeProduct,
    pair: StateSpacePair,
    gramian: DMatrix<Complex64>,
    ortho: DMatrix<Complex64>,
}

/// Builds the orthonormal model basis of `b`. Fails loudly when the
/// Gramian is numerically singular (nearly coincident zeros).
pub fn orthonormal_basis(b: &BlaschkeProduct) -> Result<ModelBasis> {
    let pair = state_space(b);
    let gramian = pair.gramian()?;
    let ortho = linalg::hermitian_inv_sqrt(&gramian)?;
    Ok(ModelBasis {
        product: b.clone(),
        pair,
        gramian,
        ortho,
    })
}

impl ModelBasis {
    pub fn blaschke(&self) -> &BlaschkeProduct {
        &self.product
    }

    pub fn pair(&self) -> &StateSpacePair {
        &self.pair
    }

    pub fn gramian(&self) -> &DMatrix<Complex64> {
        &self.gramian
    }

    /// The mixing matrix `W` with `e(z) = C (I - zA)⁻¹ W`; here `W = P^{-1/2}`,
    /// possibly re-mixed by a unitary (see [`ModelBasis::remixed`]).
    pub fn ortho_map(&self) -> &DMatrix<Complex64> {
        &self.ortho
    }

    /// Number of channels `M = deg b`.
    pub fn degree(&self) -> usize {
        self.pair.dim()
    }

    /// Orthonormal basis row `e(z)`.
    pub fn eval_row(&self, z: Complex64) -> RowDVector<Complex64> {
        self.pair.basis_row(z) * &self.ortho
    }

    /// Raw basis row `E(z) = C (I - zA)⁻¹` (not orthonormal).
    pub fn eval_raw_row(&self, z: Complex64) -> RowDVector<Complex64> {
        self.pair.basis_row(z)
    }

    /// Derivative rows `e(a), e'(a), …, e^{(k_max)}(a)` of the orthonormal
    /// row, in closed form.
    pub fn row_derivatives(&self, a: Complex64, k_max: usize) -> Result<Vec<RowDVector<Complex64>>> {
        self.guard_derivative(a, k_max)?;
        Ok(self
            .pair
            .row_derivatives(a, k_max)
            .into_iter()
            .map(|r| r * &self.ortho)
            .collect())
    }

    /// Derivative rows of the raw row `E(z)`.
    pub fn raw_row_derivatives(&self, a: Complex64, k_max: usize) -> Result<Vec<RowDVector<Complex64>>> {
        self.guard_derivative(a, k_max)?;
        Ok(self.pair.row_derivatives(a, k_max))
    }

    fn guard_derivative(&self, a: Complex64, k_max: usize) -> Result<()> {
        if !(a.norm() < 1.0) {
            return Err(HardyError::InvalidArgument("derivative point must lie inside the disk".into()));
        }
        if k_max > MAX_DERIVATIVE_ORDER {
            return Err(HardyError::InvalidArgument(format!(
                "derivative order {k_max} exceeds cap {MAX_DERIVATIVE_ORDER}"
            )));
        }
        Ok(())
    }

    /// Taylor series of the orthonormal row, a `1×M` series with
    /// coefficients `C Aⁿ W`.
    pub fn series_row(&self, n: usize) -> TaylorSeries {
        let n = n.max(1);
        let mut coeffs = Vec::with_capacity(n);
        let mut row = self.pair.c_row.clone();
        for _ in 0..n {
            coeffs.push(DMatrix::from_rows(&[(&row * &self.ortho)]));
            row = &row * &self.pair.a_mat;
        }
        TaylorSeries::new(coeffs).expect("consistent shapes")
    }

    /// Scalar series of the channel function `e_j` (1-based `j`).
    pub fn channel_series(&self, j: usize, n: usize) -> Result<TaylorSeries> {
        let m = self.degree();
        if j == 0 || j > m {
            return Err(HardyError::ChannelOutOfRange {
                channel: j,
                channels: m,
            });
        }
        Ok(self.series_row(n).split_cols_single(j - 1))
    }

    /// Replaces the orthonormal row by `e(z) · U` for a unitary `U`. The
    /// spanned space and the Gram identity are unchanged; downstream
    /// results must be invariant under this re-mixing.
    pub fn remixed(&self, u: &DMatrix<Complex64>) -> Result<ModelBasis> {
        let m = self.degree();
        if u.shape() != (m, m) {
            return Err(HardyError::DimensionMismatch("unitary must be MxM".into()));
        }
        let gap = (u.adjoint() * u - DMatrix::<Complex64>::identity(m, m))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if gap > 1e-10 {
            return Err(HardyError::InvalidArgument(format!(
                "re-mixing matrix is not unitary (deviation {gap:.3e})"
            )));
        }
        Ok(ModelBasis {
            product: self.product.clone(),
            pair: self.pair.clone(),
            gramian: self.gramian.clone(),
            ortho: &self.ortho * u,
        })
    }
}

impl TaylorSeries {
    /// Extracts column `j` of a row-vector-valued series as a scalar series.
    fn split_cols_single(&self, j: usize) -> TaylorSeries {
        let coeffs = self
            .coeffs()
            .iter()
            .map(|c| DMatrix::from_fn(1, 1, |_, _| c[(0, j)]))
            .collect();
        TaylorSeries::new(coeffs).expect("scalar series")
    }
}
