//! Noisy polarization states (Bell-diagonal mixtures), the product-basis
//! dephased form, the spatially entangled source state with parameters
//! (r, θ), and optional noise channels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{
    bell_state, pauli_x, pauli_y, pauli_z, BellKind, DensityMatrix, KrausChannel, StateVector,
    C64, TOL_EXACT,
};

/// Which photon of the pair a single-qubit channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Photon {
    A,
    B,
}

/// Bell-basis mixture weights (F, F1, F2, F3) with F+F1+F2+F3 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalParams {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl BellDiagonalParams {
    pub fn new(f: f64, f1: f64, f2: f64, f3: f64) -> Result<Self> {
        for (name, v) in [("F", f), ("F1", f1), ("F2", f2), ("F3", f3)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!("{name}={v} is not in [0,1]")));
            }
        }
        let sum = f + f1 + f2 + f3;
        if (sum - 1.0).abs() > TOL_EXACT {
            return Err(Error::InvalidParam(format!(
                "F+F1+F2+F3 must equal 1, got {sum}"
            )));
        }
        Ok(Self { f, f1, f2, f3 })
    }

    /// Werner weights (F, (1−F)/3, (1−F)/3, (1−F)/3).
    pub fn werner(f: f64) -> Result<Self> {
        let rest = (1.0 - f) / 3.0;
        Self::new(f, rest, rest, rest)
    }
}

/// PDC source parameters: relative emission amplitude r and phase θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    r: f64,
    theta: f64,
}

impl SourceConfig {
    /// θ is reduced to [0, 2π).
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::InvalidParam(format!("r={r} must be nonnegative")));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParam("theta must be finite".into()));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let mut theta = theta.rem_euclid(tau);
        if theta >= tau {
            theta = 0.0;
        }
        Ok(Self { r, theta })
    }

    pub fn ideal() -> Self {
        Self { r: 1.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Product-basis diagonal weights: α=⟨HH|ρ|HH⟩, β=⟨VV|ρ|VV⟩,
/// γ=⟨HV|ρ|HV⟩, δ=⟨VH|ρ|VH⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductDiagonalParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ProductDiagonalParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam(format!("{name}={v} is not in [0,1]")));
            }
        }
        let sum = alpha + beta + gamma + delta;
        if (sum - 1.0).abs() > TOL_EXACT {
            return Err(Error::InvalidParam(format!(
                "alpha+beta+gamma+delta must equal 1, got {sum}"
            )));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }
}

/// The post-selected single-pair spatial state
/// (|a1b1⟩ + r·e^{iθ}|a2b2⟩)/√(1+r²) over (spa_A ⊗ spa_B).
pub fn make_spatial_state(cfg: &SourceConfig) -> StateVector {
    let norm = (1.0 + cfg.r * cfg.r).sqrt();
    let lower = Complex64::from_polar(cfg.r, cfg.theta) / norm;
    StateVector::new(vec![
        C64::new(1.0 / norm, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        lower,
    ])
    .expect("spatial amplitudes are valid")
}

/// F|φ+⟩⟨φ+| + F1|φ−⟩⟨φ−| + F2|ψ+⟩⟨ψ+| + F3|ψ−⟩⟨ψ−|.
pub fn make_bell_diagonal(p: &BellDiagonalParams) -> DensityMatrix {
    let weights = [p.f, p.f1, p.f2, p.f3];
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (kind, w) in BellKind::ALL.iter().zip(weights) {
        m += bell_state(*kind).to_density().matrix() * C64::new(w, 0.0);
    }
    DensityMatrix::new(m).expect("Bell mixture is a valid density matrix")
}

fn lift_single_qubit(op: &DMatrix<C64>, target: Photon) -> DMatrix<C64> {
    let i2 = DMatrix::<C64>::identity(2, 2);
    match target {
        Photon::A => op.kronecker(&i2),
        Photon::B => i2.kronecker(op),
    }
}

/// Single-photon Pauli channel on the 4-dim polarization space:
/// {√(1−px−py−pz)·I, √px·σx, √py·σy, √pz·σz} on the chosen photon.
pub fn pauli_channel(px: f64, py: f64, pz: f64, target: Photon) -> Result<KrausChannel> {
    for (name, v) in [("px", px), ("py", py), ("pz", pz)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParam(format!("{name}={v} is not in [0,1]")));
        }
    }
    let p0 = 1.0 - px - py - pz;
    if p0 < -TOL_EXACT {
        return Err(Error::InvalidParam(format!(
            "px+py+pz must be at most 1, got {}",
            px + py + pz
        )));
    }
    let p0 = p0.max(0.0);
    let mut ops = vec![DMatrix::<C64>::identity(4, 4) * C64::new(p0.sqrt(), 0.0)];
    for (p, sigma) in [(px, pauli_x()), (py, pauli_y()), (pz, pauli_z())] {
        if p > 0.0 {
            ops.push(lift_single_qubit(&sigma, target) * C64::new(p.sqrt(), 0.0));
        }
    }
    KrausChannel::new(ops)
}

/// Drops all off-diagonal entries of a 4-dim polarization state, returning
/// the product-basis weights and the dephased matrix.
pub fn product_dephase(rho_p: &DensityMatrix) -> Result<(ProductDiagonalParams, DensityMatrix)> {
    if rho_p.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho_p.dim() });
    }
    let alpha = rho_p.entry(0, 0).re.max(0.0); // HH
    let gamma = rho_p.entry(1, 1).re.max(0.0); // HV
    let delta = rho_p.entry(2, 2).re.max(0.0); // VH
    let beta = rho_p.entry(3, 3).re.max(0.0); // VV
    let params = ProductDiagonalParams::new(alpha, beta, gamma, delta)?;
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (i, v) in [alpha, gamma, delta, beta].iter().enumerate() {
        m[(i, i)] = C64::new(*v, 0.0);
    }
    Ok((params, DensityMatrix::from_raw_unchecked(m)))
}

/// Spatial dephasing: with probability λ the coherence between the
/// spatial product components is destroyed. Kraus set
/// {√(1−λ)·I, √λ·P_a1b1, √λ·P_a1b2, √λ·P_a2b1, √λ·P_a2b2} on the
/// 4-dim spatial space (the two cross projectors carry zero weight for
/// every in-scope source state and make the channel trace-preserving on
/// the full space).
pub fn spatial_dephasing(lambda: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParam(format!("lambda={lambda} is not in [0,1]")));
    }
    let mut ops = vec![DMatrix::<C64>::identity(4, 4) * C64::new((1.0 - lambda).sqrt(), 0.0)];
    if lambda > 0.0 {
        for i in 0..4 {
            let mut p = DMatrix::<C64>::zeros(4, 4);
            p[(i, i)] = C64::new(lambda.sqrt(), 0.0);
            ops.push(p);
        }
    }
    KrausChannel::new(ops)
}
