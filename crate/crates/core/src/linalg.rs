//! Hamiltonians, spectra and matrix exponentials for two-site systems and
//! open tight-binding chains in the single-particle sector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{C64, CONSTRUCTION_TOL};

/// Physical parameters of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Hopping matrix element. Negative values are allowed.
    pub gamma: f64,
    /// On-site potential (bias for the two-site system).
    pub u: f64,
    /// Stroboscopic measurement period.
    pub tau: f64,
    /// Chain length.
    pub l: usize,
}

impl ModelParams {
    pub fn new(gamma: f64, u: f64, tau: f64, l: usize) -> Result<Self> {
        let p = Self { gamma, u, tau, l };
        p.validate()?;
        Ok(p)
    }

    pub fn two_site(gamma: f64, u: f64, tau: f64) -> Result<Self> {
        Self::new(gamma, u, tau, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be finite"));
        }
        if !self.u.is_finite() {
            return Err(Error::param("u", "must be finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param(
                "tau",
                format!("must be > 0, got {}", self.tau),
            ));
        }
        if self.l < 2 {
            return Err(Error::param("l", format!("must be >= 2, got {}", self.l)));
        }
        Ok(())
    }

    /// Level splitting half-width `sqrt(U² + γ²)` of the two-site system.
    pub fn omega(&self) -> f64 {
        self.u.hypot(self.gamma)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_entry_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    max_abs(&(a - b))
}

fn check_square(m: &DMatrix<C64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.nrows() < 2 {
        return Err(Error::param("dim", "must be >= 2"));
    }
    Ok(m.nrows())
}

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        check_square(&m)?;
        if max_entry_diff(&m, &m.adjoint()) > CONSTRUCTION_TOL {
            return Err(Error::NotWellFormed("Hermitian"));
        }
        Ok(Self(m))
    }

    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: rows.len(),
            });
        }
        let entries: Vec<C64> = rows.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(DMatrix::from_row_slice(dim, dim, &entries))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }
}

/// Dense unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let dim = check_square(&m)?;
        let residual = m.adjoint() * &m - DMatrix::identity(dim, dim);
        if max_abs(&residual) > CONSTRUCTION_TOL {
            return Err(Error::NotWellFormed("unitary"));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be unitary by construction (products of gates,
    /// exponentials of Hermitian matrices). Accumulated rounding may exceed
    /// the construction tolerance for long products.
    pub(crate) fn from_trusted(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// `self · rhs`: apply `rhs` first, then `self`.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }

    /// `max |U†U - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.0.adjoint() * &self.0 - DMatrix::identity(dim, dim)))
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Restricts to the subspace spanned by the given basis indices.
    pub fn restrict(&self, basis: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(basis.len(), basis.len(), |r, c| {
            self.0[(basis[r], basis[c])]
        })
    }
}

/// Normalized pure state over the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotWellFormed("normalized"));
        }
        Ok(Self(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param(
                "index",
                format!("basis index {index} out of range for dimension {dim}"),
            ));
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub(crate) fn from_trusted(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<C64> {
        &mut self.0
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.0[index].norm_sqr()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn evolve(&self, u: &UnitaryMatrix) -> Result<StateVector> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                actual: self.dim(),
            });
        }
        Ok(Self(u.matrix() * &self.0))
    }
}

/// Eigen-decomposition of a Hamiltonian plus the two-site return parameter.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `energies`.
    pub eigenvectors: UnitaryMatrix,
    /// `cos((E_2 - E_1)·τ/2)`, equal to `cos(sqrt(U² + γ²)·τ)` for the
    /// two-site system. `None` for dim > 2.
    pub c_parameter: Option<f64>,
}

/// Two-site matrix `[[U, -γ], [-γ, -U]]` in the basis `{|01>, |10>}`.
pub fn build_two_site_hamiltonian(params: &ModelParams) -> Result<HermitianMatrix> {
    params.validate()?;
    if params.l != 2 {
        return Err(Error::param(
            "l",
            format!("two-site Hamiltonian needs l = 2, got {}", params.l),
        ));
    }
    let (g, u) = (params.gamma, params.u);
    HermitianMatrix::from_real_rows(2, &[u, -g, -g, -u])
}

/// Open chain of `params.l` sites with uniform potential `params.u`.
///
/// For `l = 2` this equals the two-site matrix at `U = 0` plus `u·I`.
pub fn build_chain_hamiltonian(params: &ModelParams) -> Result<HermitianMatrix> {
    params.validate()?;
    chain_hamiltonian_with_potentials(params.gamma, &vec![params.u; params.l])
}

/// Open chain with site-dependent potentials: `H[j][j] = potentials[j]`,
/// `H[j][j±1] = -γ`.
pub fn chain_hamiltonian_with_potentials(
    gamma: f64,
    potentials: &[f64],
) -> Result<HermitianMatrix> {
    let l = potentials.len();
    if l < 2 {
        return Err(Error::param("l", format!("must be >= 2, got {l}")));
    }
    if !gamma.is_finite() || potentials.iter().any(|u| !u.is_finite()) {
        return Err(Error::param("potentials", "must be finite"));
    }
    let m = DMatrix::from_fn(l, l, |r, c| {
        if r == c {
            C64::new(potentials[r], 0.0)
        } else if r.abs_diff(c) == 1 {
            C64::new(-gamma, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    HermitianMatrix::new(m)
}

/// `exp(-i·h·t)`. Closed Pauli form for dim 2, eigendecomposition otherwise.
pub fn exact_unitary(h: &HermitianMatrix, t: f64) -> UnitaryMatrix {
    if h.dim() == 2 {
        pauli_exponential(h, t)
    } else {
        eigen_exponential(h, t)
    }
}

/// Coefficients `(a0, ax, ay, az)` with `h = a0·I + ax·X + ay·Y + az·Z`.
pub fn pauli_coefficients(h: &HermitianMatrix) -> [f64; 4] {
    assert_eq!(h.dim(), 2, "Pauli decomposition needs a 2x2 matrix");
    let m = h.matrix();
    let a0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let az = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let ax = m[(0, 1)].re;
    let ay = -m[(0, 1)].im;
    [a0, ax, ay, az]
}

/// `e^{-i a0 t} [cos(ωt)·I - i·sin(ωt)·(n̂·σ)]` with `ω = |a|`.
pub fn pauli_exponential(h: &HermitianMatrix, t: f64) -> UnitaryMatrix {
    let [a0, ax, ay, az] = pauli_coefficients(h);
    let omega = (ax * ax + ay * ay + az * az).sqrt();
    let phase = C64::from_polar(1.0, -a0 * t);
    let (cos, sinc) = if omega == 0.0 {
        (1.0, t)
    } else {
        let wt = omega * t;
        (wt.cos(), wt.sin() / omega)
    };
    let i = C64::i();
    // -i·sin(ωt)/ω · (ax X + ay Y + az Z)
    let d0 = C64::new(cos, 0.0) - i * sinc * az;
    let d1 = C64::new(cos, 0.0) + i * sinc * az;
    let off01 = -i * sinc * C64::new(ax, -ay);
    let off10 = -i * sinc * C64::new(ax, ay);
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[d0 * phase, off01 * phase, off10 * phase, d1 * phase],
    );
    UnitaryMatrix::from_trusted(m)
}

/// `V·diag(e^{-i E_k t})·V†` from the Hermitian eigendecomposition.
pub fn eigen_exponential(h: &HermitianMatrix, t: f64) -> UnitaryMatrix {
    let eig = SymmetricEigen::new(h.matrix().clone());
    let v = eig.eigenvectors;
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t)),
    );
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * phases[c]);
    UnitaryMatrix::from_trusted(scaled * v.adjoint())
}

pub fn spectral_data(h: &HermitianMatrix, tau: f64) -> SpectralData {
    let eig = SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let dim = h.dim();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    let c_parameter = (dim == 2).then(|| {
        // The splitting is taken from the Pauli form so that it is exact for
        // the two-site matrix instead of inheriting eigensolver rounding.
        let [_, ax, ay, az] = pauli_coefficients(h);
        ((ax * ax + ay * ay + az * az).sqrt() * tau).cos()
    });
    SpectralData {
        energies,
        eigenvectors: UnitaryMatrix::from_trusted(vectors),
        c_parameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_site_matrix_layout() {
        let h = build_two_site_hamiltonian(&ModelParams::two_site(1.0, 0.0, 0.4).unwrap()).unwrap();
        assert_eq!(h.matrix()[(0, 1)], c(-1.0, 0.0));
        assert_eq!(h.matrix()[(1, 0)], c(-1.0, 0.0));
        assert_eq!(h.matrix()[(0, 0)], c(0.0, 0.0));

        let h = build_two_site_hamiltonian(&ModelParams::two_site(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(h.matrix().iter().all(|z| *z == c(0.0, 0.0)));

        let h =
            build_two_site_hamiltonian(&ModelParams::two_site(-1.0, 2.0, 1.0).unwrap()).unwrap();
        let expected =
            DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(h.matrix(), &expected);
    }

    #[test]
    fn two_site_rejects_longer_chains() {
        let p = ModelParams::new(1.0, 0.0, 1.0, 3).unwrap();
        assert!(matches!(
            build_two_site_hamiltonian(&p),
            Err(Error::InvalidParameter { name: "l", .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.0, 0.0, 2).is_err());
        assert!(ModelParams::new(1.0, 0.0, -1.0, 2).is_err());
        assert!(ModelParams::new(1.0, 0.0, 1.0, 1).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0, 1.0, 2).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 1.0, 2).is_ok());
    }

    #[test]
    fn uniform_chain_is_shifted_two_site() {
        let p = ModelParams::two_site(0.7, 0.3, 1.0).unwrap();
        let chain = build_chain_hamiltonian(&p).unwrap();
        let base =
            build_two_site_hamiltonian(&ModelParams::two_site(0.7, 0.0, 1.0).unwrap()).unwrap();
        let shifted = base.matrix() + DMatrix::identity(2, 2) * c(0.3, 0.0);
        assert!(max_entry_diff(chain.matrix(), &shifted) < 1e-15);

        // A staggered profile reproduces the biased two-site matrix exactly.
        let staggered = chain_hamiltonian_with_potentials(0.7, &[0.3, -0.3]).unwrap();
        let two = build_two_site_hamiltonian(&p).unwrap();
        assert_eq!(staggered.matrix(), two.matrix());

        let flat = build_chain_hamiltonian(&ModelParams::two_site(0.0, 1.5, 1.0).unwrap()).unwrap();
        assert_eq!(flat.matrix(), &(DMatrix::identity(2, 2) * c(1.5, 0.0)));
    }

    #[test]
    fn three_site_chain_spectrum() {
        let h = build_chain_hamiltonian(&ModelParams::new(1.0, 0.0, 1.0, 3).unwrap()).unwrap();
        let s = spectral_data(&h, 1.0);
        let r2 = 2f64.sqrt();
        for (got, want) in s.energies.iter().zip([-r2, 0.0, r2]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(s.c_parameter.is_none());
        assert!(s.eigenvectors.unitarity_defect() < 1e-12);
    }

    #[test]
    fn exponential_at_zero_time_is_identity() {
        let h =
            build_two_site_hamiltonian(&ModelParams::two_site(-1.0, 1.0, 3.0).unwrap()).unwrap();
        let u = exact_unitary(&h, 0.0);
        assert!(max_entry_diff(u.matrix(), &DMatrix::identity(2, 2)) < 1e-15);
        let h3 = build_chain_hamiltonian(&ModelParams::new(1.0, 0.2, 1.0, 4).unwrap()).unwrap();
        assert!(max_entry_diff(exact_unitary(&h3, 0.0).matrix(), &DMatrix::identity(4, 4)) < 1e-12);
    }

    #[test]
    fn hopping_only_exponential_entries() {
        let (gamma, t) = (1.3, 0.4);
        let h = build_two_site_hamiltonian(&ModelParams::two_site(gamma, 0.0, t).unwrap()).unwrap();
        let u = exact_unitary(&h, t);
        let (cg, sg) = ((gamma * t).cos(), (gamma * t).sin());
        assert!((u.entry(0, 0) - c(cg, 0.0)).norm() < 1e-15);
        assert!((u.entry(1, 1) - c(cg, 0.0)).norm() < 1e-15);
        assert!((u.entry(0, 1) - c(0.0, sg)).norm() < 1e-15);
        assert!((u.entry(1, 0) - c(0.0, sg)).norm() < 1e-15);
        assert!((u.entry(1, 1).norm_sqr() - cg * cg).abs() < 1e-15);
    }

    #[test]
    fn c_parameter_values() {
        let s = spectral_data(
            &build_two_site_hamiltonian(&ModelParams::two_site(1.0, 0.0, 0.4).unwrap()).unwrap(),
            0.4,
        );
        assert!((s.c_parameter.unwrap() - 0.4f64.cos()).abs() < 1e-15);

        let s = spectral_data(
            &build_two_site_hamiltonian(&ModelParams::two_site(0.0, 0.0, 0.4).unwrap()).unwrap(),
            0.4,
        );
        assert_eq!(s.c_parameter, Some(1.0));

        let u_d = (PI * PI / 9.0 - 1.0).sqrt();
        assert!((u_d - 0.31).abs() < 0.01);
        let s = spectral_data(
            &build_two_site_hamiltonian(&ModelParams::two_site(-1.0, u_d, 3.0).unwrap()).unwrap(),
            3.0,
        );
        assert!((s.c_parameter.unwrap().abs() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_malformed_matrices() {
        let m =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(
            HermitianMatrix::new(m.clone()),
            Err(Error::NotWellFormed("Hermitian"))
        );
        assert_eq!(UnitaryMatrix::new(m), Err(Error::NotWellFormed("unitary")));
        assert!(StateVector::new(DVector::from_element(2, c(1.0, 0.0))).is_err());
        assert!(StateVector::basis(2, 2).is_err());
    }
}
