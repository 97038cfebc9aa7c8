//! Sub-band decomposition through the isometries `Sⱼh = eⱼ·(h∘b)`.
//!
//! For a degree-`M` Blaschke product `b` with orthonormal model basis
//! `e₁, …, e_M`, the family `{eⱼ bⁿ}` is orthonormal in H₂ and complete, so
//! every `f` decomposes uniquely as `f = Σⱼ eⱼ·(fⱼ∘b)` with
//! `‖f‖² = Σⱼ ‖fⱼ‖²`. Analysis pairs `f` against the orthonormal system;
//! synthesis rebuilds from the same system. [`CuntzSystem`] precomputes the
//! truncated coefficients of every `eⱼ bⁿ` once, after which analysis,
//! synthesis and the relation checks are linear passes over that table.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blaschke::{orthonormal_basis, BlaschkeProduct, ModelBasis};
use crate::series::TaylorSeries;
use crate::{Complex64, HardyError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Margin kept between `deg·M` and the truncation in relation checks.
const VERIFY_MARGIN: usize = 32;

/// The parts `f₁ … f_M` of a sub-band decomposition, together with the
/// basis that produced them.
#[derive(Clone, Debug)]
pub struct SubbandDecomposition {
    basis: ModelBasis,
    parts: Vec<TaylorSeries>,
    truncation: usize,
}

impl SubbandDecomposition {
    pub fn from_parts(basis: ModelBasis, parts: Vec<TaylorSeries>) -> Result<Self> {
        if parts.len() != basis.degree() {
            return Err(HardyError::DimensionMismatch(format!(
                "{} parts for a degree-{} basis",
                parts.len(),
                basis.degree()
            )));
        }
        let first = &parts[0];
        let truncation = first.truncation();
        if parts
            .iter()
            .any(|p| p.rows() != first.rows() || p.cols() != first.cols() || p.truncation() != truncation)
        {
            return Err(HardyError::DimensionMismatch("parts must share shape and truncation".into()));
        }
        Ok(Self {
            basis,
            parts,
            truncation,
        })
    }

    pub fn basis(&self) -> &ModelBasis {
        &self.basis
    }

    pub fn parts(&self) -> &[TaylorSeries] {
        &self.parts
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Σⱼ [fⱼ, fⱼ], the part-wise energy form.
    pub fn parts_form(&self) -> DMatrix<Complex64> {
        let q = self.parts[0].cols();
        let mut acc = DMatrix::<Complex64>::zeros(q, q);
        for p in &self.parts {
            acc += p.h2_form(p).expect("same series");
        }
        acc
    }

    /// Parts stacked vertically into an `(M·p)×q` series.
    pub fn stacked(&self) -> TaylorSeries {
        TaylorSeries::stack_rows(&self.parts).expect("consistent parts")
    }
}

/// Residual report of the Cuntz-relation checks, together with the
/// geometric tail estimate of the truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuntzReport {
    pub channels: usize,
    pub truncation: usize,
    pub degree: usize,
    /// max over test monomials of ‖Σⱼ SⱼSⱼ* g − g‖₂
    pub completeness_residual: f64,
    /// max over channels and monomial pairs of |⟨Sⱼg, Sⱼh⟩ − ⟨g,h⟩|
    pub isometry_residual: f64,
    /// max over j ≠ k and monomial pairs of |⟨Sⱼg, Sₖh⟩|
    pub cross_residual: f64,
    /// geometric bound (max|aₗ|)^(N − (deg+1)·M) / (1 − max|aₗ|)
    pub tail_estimate: f64,
}

impl CuntzReport {
    pub fn max_residual(&self) -> f64 {
        self.completeness_residual
            .max(self.isometry_residual)
            .max(self.cross_residual)
    }
}

/// Precomputed orthonormal system `{eⱼ bⁿ}` at a fixed truncation.
#[derive(Clone, Debug)]
pub struct CuntzSystem {
    basis: ModelBasis,
    truncation: usize,
    /// `table[j][n]` holds the first `N` Taylor coefficients of `eⱼ bⁿ`.
    table: Vec<Vec<Vec<Complex64>>>,
}

impl CuntzSystem {
    pub fn new(basis: &ModelBasis, truncation: usize) -> Self {
        let n = truncation.max(1);
        let m = basis.degree();
        let b_series = basis.blaschke().series(n);
        let mut table = Vec::with_capacity(m);
        for j in 1..=m {
            let mut rows = Vec::with_capacity(n);
            let mut current = basis.channel_series(j, n).expect("channel in range");
            for step in 0..n {
                rows.push(current.coeffs().iter().map(|c| c[(0, 0)]).collect::<Vec<_>>());
                if step + 1 < n {
                    current = current.mul(&b_series).expect("scalar series");
                }
            }
            table.push(rows);
        }
        Self {
            basis: basis.clone(),
            truncation: n,
            table,
        }
    }

    pub fn basis(&self) -> &ModelBasis {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn channels(&self) -> usize {
        self.table.len()
    }

    fn guard_channel(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.channels() {
            return Err(HardyError::ChannelOutOfRange {
                channel: j,
                channels: self.channels(),
            });
        }
        Ok(())
    }

    /// `Sⱼ h = eⱼ · (h ∘ b)`, truncated at the system truncation.
    pub fn apply_s(&self, j: usize, h: &TaylorSeries) -> Result<TaylorSeries> {
        self.guard_channel(j)?;
        let n = self.truncation;
        let rows = &self.table[j - 1];
        let mut coeffs = vec![DMatrix::<Complex64>::zeros(h.rows(), h.cols()); n];
        for (k, hk) in h.coeffs().iter().enumerate().take(n) {
            if hk.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for (m, &w) in rows[k].iter().enumerate() {
                if w.norm_sqr() > 0.0 {
                    coeffs[m].zip_apply(hk, |acc, c| *acc += w * c);
                }
            }
        }
        TaylorSeries::new(coeffs)
    }

    /// `Sⱼ* f`, the part of `f` in channel `j`: coefficients `[eⱼ bⁿ, f]`.
    pub fn adjoint_s(&self, j: usize, f: &TaylorSeries) -> Result<TaylorSeries> {
        self.guard_channel(j)?;
        let n = self.truncation;
        let f = f.resized(n);
        let rows = &self.table[j - 1];
        let mut coeffs = Vec::with_capacity(n);
        for row in rows.iter() {
            let mut acc = DMatrix::<Complex64>::zeros(f.rows(), f.cols());
            for (m, fm) in f.coeffs().iter().enumerate() {
                let w = row[m].conj();
                if w.norm_sqr() > 0.0 {
                    acc.zip_apply(fm, |a, c| *a += w * c);
                }
            }
            coeffs.push(acc);
        }
        TaylorSeries::new(coeffs)
    }

    /// Full analysis: all channel parts of `f`.
    pub fn analyze(&self, f: &TaylorSeries) -> Result<SubbandDecomposition> {
        let parts = (1..=self.channels())
            .map(|j| self.adjoint_s(j, f))
            .collect::<Result<Vec<_>>>()?;
        SubbandDecomposition::from_parts(self.basis.clone(), parts)
    }

    /// Synthesis `Σⱼ Sⱼ fⱼ` from channel parts.
    pub fn synthesize(&self, parts: &[TaylorSeries]) -> Result<TaylorSeries> {
        if parts.len() != self.channels() {
            return Err(HardyError::DimensionMismatch(format!(
                "{} parts for {} channels",
                parts.len(),
                self.channels()
            )));
        }
        let first = &parts[0];
        if parts
            .iter()
            .any(|p| p.rows() != first.rows() || p.cols() != first.cols())
        {
            return Err(HardyError::DimensionMismatch("parts must share shape".into()));
        }
        let mut acc = TaylorSeries::zero(first.rows(), first.cols(), self.truncation);
        for (j, part) in parts.iter().enumerate() {
            acc = acc.add(&self.apply_s(j + 1, part)?)?;
        }
        Ok(acc)
    }

    /// ⟨Sⱼ zᵐ, Sₖ zⁿ⟩ from the precomputed table (scalar test functions).
    fn monomial_pairing(&self, j: usize, m: usize, k: usize, n: usize) -> Complex64 {
        let a = &self.table[j - 1][m];
        let b = &self.table[k - 1][n];
        let mut acc = ZERO;
        for t in 0..self.truncation {
            acc += a[t].conj() * b[t];
        }
        acc
    }

    /// Runs the Cuntz-relation checks on monomials up to `deg`.
    pub fn verify(&self, deg: usize) -> Result<CuntzReport> {
        let m = self.channels();
        let n = self.truncation;
        if deg * m + VERIFY_MARGIN >= n {
            return Err(HardyError::TruncationTooSmall {
                truncation: n,
                degree: deg,
                channels: m,
            });
        }

        // Completeness: reconstruct every monomial through analysis+synthesis.
        let mut completeness = 0.0f64;
        for k in 0..=deg {
            let g = TaylorSeries::monomial(k, n);
            let rebuilt = self.synthesize(self.analyze(&g)?.parts())?;
            let gap = rebuilt.sub(&g.resized(n))?.norm_sq().sqrt();
            completeness = completeness.max(gap);
        }

        // Isometry and cross-range orthogonality on monomial pairs.
        let mut isometry = 0.0f64;
        let mut cross = 0.0f64;
        for j in 1..=m {
            for k in 1..=m {
                for dm in 0..=deg {
                    for dn in 0..=deg {
                        let pairing = self.monomial_pairing(j, dm, k, dn);
                        if j == k {
                            let want = if dm == dn { 1.0 } else { 0.0 };
                            isometry = isometry.max((pairing - Complex64::new(want, 0.0)).norm());
                        } else {
                            cross = cross.max(pairing.norm());
                        }
                    }
                }
            }
        }

        let r = self
            .basis
            .blaschke()
            .zeros()
            .iter()
            .map(|z| z.center.norm())
            .fold(0.0, f64::max);
        let tail_estimate = if r == 0.0 {
            0.0
        } else {
            r.powi((n - (deg + 1) * m) as i32) / (1.0 - r)
        };

        Ok(CuntzReport {
            channels: m,
            truncation: n,
            degree: deg,
            completeness_residual: completeness,
            isometry_residual: isometry,
            cross_residual: cross,
            tail_estimate,
        })
    }
}

/// `Sⱼ h` for a basis built on the fly; see [`CuntzSystem::apply_s`].
pub fn apply_s(j: usize, h: &TaylorSeries, basis: &ModelBasis, truncation: usize) -> Result<TaylorSeries> {
    CuntzSystem::new(basis, truncation).apply_s(j, h)
}

/// Analyzes `f` against the basis at the truncation of `f`.
pub fn analyze(f: &TaylorSeries, basis: &ModelBasis) -> Result<SubbandDecomposition> {
    CuntzSystem::new(basis, f.truncation()).analyze(f)
}

/// Rebuilds `Σⱼ Sⱼ fⱼ` from a decomposition.
pub fn synthesize(d: &SubbandDecomposition) -> Result<TaylorSeries> {
    CuntzSystem::new(d.basis(), d.truncation()).synthesize(d.parts())
}

/// The unitary weighted composition
/// `T_a f = sqrt(1-|a|²)/(1-za*) · f(b_a(z))`.
pub fn t_a(f: &TaylorSeries, a: Complex64) -> Result<TaylorSeries> {
    if !(a.norm() < 1.0) {
        return Err(HardyError::InvalidArgument("center of T_a must lie inside the disk".into()));
    }
    let b = BlaschkeProduct::single(a)?;
    let basis = orthonormal_basis(&b)?;
    CuntzSystem::new(&basis, f.truncation()).apply_s(1, f)
}

/// Builds the system and runs [`CuntzSystem::verify`].
pub fn verify_cuntz(basis: &ModelBasis, truncation: usize, deg: usize) -> Result<CuntzReport> {
    CuntzSystem::new(basis, truncation).verify(deg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::BlaschkeZero;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> TaylorSeries {
        let cs: Vec<Complex64> = coeffs.iter().map(|&x| c(x, 0.0)).collect();
        TaylorSeries::from_scalars(&cs, cs.len())
    }

    fn basis_z2() -> ModelBasis {
        orthonormal_basis(&BlaschkeProduct::power(c(0.0, 0.0), 2).unwrap()).unwrap()
    }

    #[test]
    fn apply_s_constant_on_first_channel() {
        let sys = CuntzSystem::new(&basis_z2(), 8);
        let out = sys.apply_s(1, &poly(&[1.0])).unwrap();
        assert_relative_eq!(out.coeff(0)[(0, 0)].re, 1.0, epsilon = 1e-14);
        for k in 1..8 {
            assert!(out.coeff(k)[(0, 0)].norm() < 1e-14);
        }
    }

    #[test]
    fn apply_s_second_channel_of_w() {
        // S₂ w = z · z² = z³ for b = z².
        let sys = CuntzSystem::new(&basis_z2(), 8);
        let out = sys.apply_s(2, &poly(&[0.0, 1.0])).unwrap();
        for k in 0..8 {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((out.coeff(k)[(0, 0)].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn apply_s_rejects_bad_channel() {
        let sys = CuntzSystem::new(&basis_z2(), 8);
        assert!(matches!(
            sys.apply_s(3, &poly(&[1.0])),
            Err(HardyError::ChannelOutOfRange { .. })
        ));
    }

    #[test]
    fn isometry_on_random_polynomial() {
        // e_j b^32 carries a pole of order 33 at 1/a*, so its coefficients
        // peak near n = 32/ln(1/|a|); truncation 512 keeps the tail below
        // the 1e-10 target for |a| <= 0.8.
        let zeros = [c(0.7, 0.2), c(-0.5, -0.3)];
        let basis = orthonormal_basis(&BlaschkeProduct::from_distinct(&zeros).unwrap()).unwrap();
        let sys = CuntzSystem::new(&basis, 512);
        let h: Vec<Complex64> = (0..33)
            .map(|k| c((k as f64 * 0.37).sin(), (k as f64 * 0.73).cos() * 0.5))
            .collect();
        let h = TaylorSeries::from_scalars(&h, 512);
        for j in 1..=2 {
            let sh = sys.apply_s(j, &h).unwrap();
            assert!(
                (sh.norm_sq() - h.norm_sq()).abs() < 1e-10 * h.norm_sq(),
                "channel {j}"
            );
        }
    }

    #[test]
    fn even_odd_analysis_example() {
        // b = z², f = 1 + 2z + 3z² + 4z³ → f₁ = 1 + 3w, f₂ = 2 + 4w.
        let d = analyze(&poly(&[1.0, 2.0, 3.0, 4.0]), &basis_z2()).unwrap();
        let f1 = &d.parts()[0];
        let f2 = &d.parts()[1];
        assert_relative_eq!(f1.coeff(0)[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f1.coeff(1)[(0, 0)].re, 3.0, epsilon = 1e-12);
        assert_relative_eq!(f2.coeff(0)[(0, 0)].re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(f2.coeff(1)[(0, 0)].re, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn single_channel_analysis_is_identity() {
        let basis = orthonormal_basis(&BlaschkeProduct::power(c(0.0, 0.0), 1).unwrap()).unwrap();
        let f = poly(&[0.3, -0.7, 0.1, 0.0]);
        let d = analyze(&f, &basis).unwrap();
        assert_eq!(d.parts().len(), 1);
        let gap = d.parts()[0].sub(&f).unwrap().norm_sq().sqrt();
        assert!(gap < 1e-13);
    }

    #[test]
    fn round_trip_on_nontrivial_blaschke() {
        let zeros = [c(0.0, 0.0), c(0.5, 0.0)];
        let basis = orthonormal_basis(&BlaschkeProduct::from_distinct(&zeros).unwrap()).unwrap();
        let sys = CuntzSystem::new(&basis, 256);
        let f: Vec<Complex64> = (0..24)
            .map(|k| c((1.1 * k as f64).sin(), (0.7 * k as f64).cos()))
            .collect();
        let f = TaylorSeries::from_scalars(&f, 256);
        let rebuilt = sys.synthesize(sys.analyze(&f).unwrap().parts()).unwrap();
        let gap = rebuilt.sub(&f).unwrap().norm_sq().sqrt();
        assert!(gap < 1e-10, "round trip residual {gap}");
    }

    #[test]
    fn synthesize_even_odd_example() {
        let sys = CuntzSystem::new(&basis_z2(), 8);
        let parts = vec![poly(&[1.0, 3.0]).resized(8), poly(&[2.0, 4.0]).resized(8)];
        let f = sys.synthesize(&parts).unwrap();
        let want = [1.0, 2.0, 3.0, 4.0];
        for (k, w) in want.iter().enumerate() {
            assert_relative_eq!(f.coeff(k)[(0, 0)].re, *w, epsilon = 1e-13);
        }
    }

    #[test]
    fn synthesize_zero_parts() {
        let sys = CuntzSystem::new(&basis_z2(), 8);
        let parts = vec![TaylorSeries::zero(1, 1, 8), TaylorSeries::zero(1, 1, 8)];
        assert!(sys.synthesize(&parts).unwrap().norm_sq() < 1e-30);
    }

    #[test]
    fn parseval_even_odd_numbers() {
        // ‖f‖² = 30 splits as 10 + 20.
        let d = analyze(&poly(&[1.0, 2.0, 3.0, 4.0]), &basis_z2()).unwrap();
        assert_relative_eq!(d.parts()[0].norm_sq(), 10.0, epsilon = 1e-12);
        assert_relative_eq!(d.parts()[1].norm_sq(), 20.0, epsilon = 1e-12);
        assert_relative_eq!(d.parts_form()[(0, 0)].re, 30.0, epsilon = 1e-12);
    }

    #[test]
    fn parseval_matrix_valued() {
        let zeros = [c(0.3, 0.0), c(-0.4, 0.0)];
        let basis = orthonormal_basis(&BlaschkeProduct::from_distinct(&zeros).unwrap()).unwrap();
        let sys = CuntzSystem::new(&basis, 256);
        let coeffs: Vec<DMatrix<Complex64>> = (0..20)
            .map(|k| {
                DMatrix::from_fn(2, 2, |i, j| {
                    c(
                        ((k * 4 + i * 2 + j) as f64 * 0.31).sin(),
                        ((k * 4 + i * 2 + j) as f64 * 0.17).cos(),
                    )
                })
            })
            .collect();
        let f = TaylorSeries::new(coeffs).unwrap().resized(256);
        let d = sys.analyze(&f).unwrap();
        let lhs = f.h2_form(&f).unwrap();
        let rhs = d.parts_form();
        let gap = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-8 * lhs.trace().re, "Parseval gap {gap}");
    }

    #[test]
    fn t_a_at_origin_is_identity() {
        let f = poly(&[1.0, -2.0, 0.5]);
        let out = t_a(&f, c(0.0, 0.0)).unwrap();
        let gap = out.sub(&f).unwrap().norm_sq().sqrt();
        assert!(gap < 1e-15);
    }

    #[test]
    fn t_a_of_constant_closed_form() {
        // T_a 1 = sqrt(0.75)/(1 - z/2) for a = 0.5.
        let out = t_a(&poly(&[1.0]).resized(64), c(0.5, 0.0)).unwrap();
        let w = 0.75f64.sqrt();
        for k in 0..64 {
            let want = w * 0.5f64.powi(k as i32);
            assert!((out.coeff(k)[(0, 0)].re - want).abs() < 1e-13);
        }
    }

    #[test]
    fn t_a_preserves_norm() {
        let a = c(0.6, 0.0);
        let f: Vec<Complex64> = (0..40)
            .map(|k| c((0.9 * k as f64).cos(), (1.3 * k as f64).sin()))
            .collect();
        let f = TaylorSeries::from_scalars(&f, 256);
        let out = t_a(&f, a).unwrap();
        assert!((out.norm_sq() - f.norm_sq()).abs() < 1e-10 * f.norm_sq());
    }

    #[test]
    fn verify_monomial_blaschke_is_exact() {
        let report = verify_cuntz(&basis_z2(), 256, 16).unwrap();
        assert!(report.max_residual() < 1e-12, "report {report:?}");
    }

    #[test]
    fn verify_generic_degree_two() {
        let zeros = [c(0.3, 0.0), c(-0.4, 0.0)];
        let basis = orthonormal_basis(&BlaschkeProduct::from_distinct(&zeros).unwrap()).unwrap();
        let report = verify_cuntz(&basis, 256, 16).unwrap();
        assert!(report.max_residual() < 1e-9, "report {report:?}");
    }

    #[test]
    fn verify_single_channel_unitarity() {
        let basis = orthonormal_basis(&BlaschkeProduct::single(c(0.5, 0.0)).unwrap()).unwrap();
        let report = verify_cuntz(&basis, 256, 16).unwrap();
        assert!(report.completeness_residual < 1e-10);
    }

    #[test]
    fn verify_rejects_small_truncation() {
        assert!(matches!(
            verify_cuntz(&basis_z2(), 64, 32),
            Err(HardyError::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn repeated_zero_round_trip() {
        let b = BlaschkeProduct::from_zeros(vec![BlaschkeZero {
            center: c(0.4, 0.3),
            multiplicity: 2,
        }])
        .unwrap();
        let basis = orthonormal_basis(&b).unwrap();
        let sys = CuntzSystem::new(&basis, 256);
        let f: Vec<Complex64> = (0..16).map(|k| c((0.3 * k as f64).sin(), 0.1)).collect();
        let f = TaylorSeries::from_scalars(&f, 256);
        let rebuilt = sys.synthesize(sys.analyze(&f).unwrap().parts()).unwrap();
        assert!(rebuilt.sub(&f).unwrap().norm_sq().sqrt() < 1e-10);
    }

    #[test]
    fn basis_remixing_leaves_synthesis_invariant() {
        let zeros = [c(0.2, 0.3), c(-0.5, 0.1)];
        let basis = orthonormal_basis(&BlaschkeProduct::from_distinct(&zeros).unwrap()).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                c(inv_sqrt2, 0.0),
                c(-inv_sqrt2, 0.0),
                c(inv_sqrt2, 0.0),
                c(inv_sqrt2, 0.0),
            ],
        );
        let remixed = basis.remixed(&u).unwrap();
        let f: Vec<Complex64> = (0..20).map(|k| c((0.5 * k as f64).cos(), -0.2)).collect();
        let f = TaylorSeries::from_scalars(&f, 256);

        let d1 = analyze(&f, &basis).unwrap();
        let d2 = analyze(&f, &remixed).unwrap();
        // Parts differ, but the reconstruction and the energy split do not.
        let r1 = synthesize(&d1).unwrap();
        let r2 = synthesize(&d2).unwrap();
        assert!(r1.sub(&r2).unwrap().norm_sq().sqrt() < 1e-10);
        let e1 = d1.parts_form()[(0, 0)].re;
        let e2 = d2.parts_form()[(0, 0)].re;
        assert!((e1 - e2).abs() < 1e-10 * e1.max(1.0));
    }
}
