//! Dense complex linear algebra and quantum-state primitives for small
//! (dimension ≤ 16) Hilbert spaces: state vectors, density matrices,
//! Kraus channels, fidelity, tensor structure and partial traces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for validity checks (Hermiticity, trace, positivity, unitarity).
pub const TOL_VALID: f64 = 1e-10;
/// Tolerance for algebraic identities on exact permutation/tensor arithmetic.
pub const TOL_EXACT: f64 = 1e-12;

pub type C64 = Complex64;

fn all_finite_vec(v: &DVector<C64>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn all_finite_mat(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A pure state: a normalized complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Builds a state from amplitudes, normalizing them. Rejects empty,
    /// non-finite, and zero vectors.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state vector must be non-empty".into()));
        }
        let amps = DVector::from_vec(amplitudes);
        if !all_finite_vec(&amps) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Self { amps }.normalize()
    }

    /// Builds a state from real amplitudes.
    pub fn from_reals(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.amps.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        self.amps /= C64::new(norm, 0.0);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        // a normalized outer product always satisfies the density invariants
        DensityMatrix { m }
    }

    /// Kronecker product; entry i·dim(b)+k is a_i·b_k.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut out = DVector::zeros(self.dim() * other.dim());
        for i in 0..self.dim() {
            for k in 0..other.dim() {
                out[i * other.dim() + k] = self.amps[i] * other.amps[k];
            }
        }
        StateVector { amps: out }
    }
}

/// A mixed state: Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (eigenvalues
    /// ≥ −1e-10). Diagonal noise in [−1e-10, 0) is clamped to zero.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !all_finite_mat(&m) {
            return Err(Error::InvalidState("non-finite matrix entry".into()));
        }
        let herm_err = (&m - m.adjoint()).camax();
        if herm_err > TOL_VALID {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (max deviation {herm_err:.3e})"
            )));
        }
        let tr = m.diagonal().sum();
        if (tr.re - 1.0).abs() > TOL_VALID || tr.im.abs() > TOL_VALID {
            return Err(Error::InvalidState(format!(
                "trace must be 1, got {}+{}i",
                tr.re, tr.im
            )));
        }
        let mut m = m;
        for i in 0..m.nrows() {
            let d = m[(i, i)].re;
            if d < 0.0 {
                if d < -TOL_VALID {
                    return Err(Error::InvalidState(format!(
                        "negative diagonal entry {d:.3e} at index {i}"
                    )));
                }
                m[(i, i)] = C64::new(0.0, 0.0);
            }
        }
        let min_eig = min_eigenvalue(&m);
        if min_eig < -TOL_VALID {
            return Err(Error::InvalidState(format!(
                "matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { m })
    }

    /// Builds from a row-major entry list of length dim².
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, entries))
    }

    /// The maximally mixed state I/dim.
    pub fn maximally_mixed(dim: usize) -> DensityMatrix {
        let m = DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0);
        DensityMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.diagonal().sum()
    }

    /// Kronecker product; entry (i·db+k, j·db+l) is a(i,j)·b(k,l).
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { m: self.m.kronecker(&other.m) }
    }

    /// Conjugation ρ ↦ UρU† without revalidation; `u` must be unitary.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.nrows() });
        }
        Ok(DensityMatrix { m: u * &self.m * u.adjoint() })
    }

    pub(crate) fn from_raw_unchecked(m: DMatrix<C64>) -> DensityMatrix {
        DensityMatrix { m }
    }
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<DMatrix<C64>>,
}

impl KrausChannel {
    /// Validates Σ K†K = I within 1e-10.
    pub fn new(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim = match operators.first() {
            Some(k) => k.nrows(),
            None => return Err(Error::InvalidParam("channel needs at least one Kraus operator".into())),
        };
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.nrows() });
            }
            if !all_finite_mat(k) {
                return Err(Error::InvalidState("non-finite Kraus entry".into()));
            }
            sum += k.adjoint() * k;
        }
        let dev = (&sum - DMatrix::<C64>::identity(dim, dim)).camax();
        if dev > TOL_VALID {
            return Err(Error::InvalidState(format!(
                "channel is not trace-preserving (max deviation {dev:.3e})"
            )));
        }
        Ok(Self { ops: operators })
    }

    pub fn identity(dim: usize) -> KrausChannel {
        KrausChannel { ops: vec![DMatrix::identity(dim, dim)] }
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.ops
    }
}

/// ⟨ψ|ρ|ψ⟩, clamped to [0, 1].
pub fn fidelity_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: psi.dim() });
    }
    let v = psi.amplitudes();
    let f = (v.adjoint() * rho.matrix() * v)[(0, 0)];
    debug_assert!(f.im.abs() < TOL_VALID);
    Ok(f.re.clamp(0.0, 1.0))
}

/// Traces out the subsystems not listed in `keep`; kept subsystems retain
/// their original relative order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: total });
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidParam("keep index out of range".into()));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kdim: usize = keep.iter().map(|&i| dims[i]).product();
    let tdim: usize = traced.iter().map(|&i| dims[i]).product();

    // flat index from a full multi-index
    let flatten = |multi: &[usize]| -> usize {
        let mut idx = 0;
        for (i, &d) in dims.iter().enumerate() {
            idx = idx * d + multi[i];
        }
        idx
    };
    let unrank = |mut r: usize, subsys: &[usize]| -> Vec<usize> {
        let mut multi = vec![0; subsys.len()];
        for (slot, &s) in subsys.iter().enumerate().rev() {
            multi[slot] = r % dims[s];
            r /= dims[s];
        }
        multi
    };

    let mut out = DMatrix::<C64>::zeros(kdim, kdim);
    for ki in 0..kdim {
        let mi = unrank(ki, &keep);
        for kj in 0..kdim {
            let mj = unrank(kj, &keep);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..tdim {
                let mt = unrank(t, &traced);
                let mut full_i = vec![0; dims.len()];
                let mut full_j = vec![0; dims.len()];
                for (slot, &s) in keep.iter().enumerate() {
                    full_i[s] = mi[slot];
                    full_j[s] = mj[slot];
                }
                for (slot, &s) in traced.iter().enumerate() {
                    full_i[s] = mt[slot];
                    full_j[s] = mt[slot];
                }
                acc += rho.entry(flatten(&full_i), flatten(&full_j));
            }
            out[(ki, kj)] = acc;
        }
    }
    Ok(DensityMatrix::from_raw_unchecked(out))
}

/// Σ K ρ K†.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: ch.dim() });
    }
    let mut out = DMatrix::<C64>::zeros(rho.dim(), rho.dim());
    for k in ch.operators() {
        out += k * rho.matrix() * k.adjoint();
    }
    DensityMatrix::new(out)
}

/// True iff U†U = I within 1e-10.
pub fn is_unitary(m: &DMatrix<C64>) -> bool {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return false;
    }
    let dev = (m.adjoint() * m - DMatrix::<C64>::identity(m.nrows(), m.ncols())).camax();
    dev <= TOL_VALID
}

/// True iff `m` satisfies the DensityMatrix invariants.
pub fn is_density(m: &DMatrix<C64>) -> bool {
    DensityMatrix::new(m.clone()).is_ok()
}

/// The four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] =
        [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];
}

/// Amplitudes in HH, HV, VH, VV order: φ± = (1,0,0,±1)/√2, ψ± = (0,1,±1,0)/√2.
pub fn bell_state(kind: BellKind) -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PhiPlus => [s, 0.0, 0.0, s],
        BellKind::PhiMinus => [s, 0.0, 0.0, -s],
        BellKind::PsiPlus => [0.0, s, s, 0.0],
        BellKind::PsiMinus => [0.0, s, -s, 0.0],
    };
    StateVector::from_reals(&amps).expect("bell state amplitudes are valid")
}

/// 2×2 Pauli matrices.
pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)])
}
