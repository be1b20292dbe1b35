//! The linear-optical network: per-side single-photon mode permutations,
//! the joint two-photon unitary, coincidence-pattern projection and
//! detector labeling.
//!
//! Basis conventions (fixed globally):
//! - polarization H = 0, V = 1;
//! - single-photon 4-level space [(H,p1), (V,p1), (H,p2), (V,p2)] where
//!   p1/p2 are the upper/lower input paths (outputs use the port pair
//!   c/e on Alice's side and d/f on Bob's);
//! - joint 16-level space (pol_A, spa_A) ⊗ (pol_B, spa_B), index
//!   (2·pol_A + spa_A)·4 + (2·pol_B + spa_B).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{is_unitary, DensityMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

/// Input ports a1/a2 (Alice), b1/b2 (Bob); output ports c/e (Alice), d/f (Bob).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    A1,
    A2,
    B1,
    B2,
    C,
    E,
    D,
    F,
}

impl Port {
    pub fn is_output(self) -> bool {
        matches!(self, Port::C | Port::E | Port::D | Port::F)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SingleMode {
    pub pol: Polarization,
    pub port: Port,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliceOut {
    C,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BobOut {
    D,
    F,
}

/// One of the four accepted two-photon output port combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoincidencePattern {
    pub alice: AliceOut,
    pub bob: BobOut,
}

impl CoincidencePattern {
    /// Fixed enumeration order: (c,d), (c,f), (e,d), (e,f).
    pub const ALL: [CoincidencePattern; 4] = [
        CoincidencePattern { alice: AliceOut::C, bob: BobOut::D },
        CoincidencePattern { alice: AliceOut::C, bob: BobOut::F },
        CoincidencePattern { alice: AliceOut::E, bob: BobOut::D },
        CoincidencePattern { alice: AliceOut::E, bob: BobOut::F },
    ];

    pub fn detector_pair(&self) -> (&'static str, &'static str) {
        let a = match self.alice {
            AliceOut::C => "D2",
            AliceOut::E => "D5",
        };
        let b = match self.bob {
            BobOut::D => "D4",
            BobOut::F => "D7",
        };
        (a, b)
    }

    /// Short label used in reports and CSV columns: cd, cf, ed, ef.
    pub fn label(&self) -> &'static str {
        match (self.alice, self.bob) {
            (AliceOut::C, BobOut::D) => "cd",
            (AliceOut::C, BobOut::F) => "cf",
            (AliceOut::E, BobOut::D) => "ed",
            (AliceOut::E, BobOut::F) => "ef",
        }
    }
}

/// Detector name for an output port: c→D2, d→D4, e→D5, f→D7.
pub fn detector_label(port: Port) -> Result<&'static str> {
    match port {
        Port::C => Ok("D2"),
        Port::D => Ok("D4"),
        Port::E => Ok("D5"),
        Port::F => Ok("D7"),
        _ => Err(Error::InvalidParam(format!("{port:?} is not an output port"))),
    }
}

fn zeros(n: usize) -> DMatrix<C64> {
    DMatrix::zeros(n, n)
}

/// PBS routing on the 4-level (polarization, arm) space
/// [(H,1),(V,1),(H,2),(V,2)]: H transmits (keeps its arm), V reflects
/// (switches arm).
pub fn pbs_map() -> DMatrix<C64> {
    let one = C64::new(1.0, 0.0);
    let mut m = zeros(4);
    m[(0, 0)] = one; // (H,1) -> (H,1)
    m[(3, 1)] = one; // (V,1) -> (V,2)
    m[(2, 2)] = one; // (H,2) -> (H,2)
    m[(1, 3)] = one; // (V,2) -> (V,1)
    m
}

/// HWP polarization flip H↔V on a single path.
pub fn hwp_map() -> DMatrix<C64> {
    crate::qcore::pauli_x()
}

/// The net single-photon permutation of the purification network for one
/// side, over [(H,p1),(V,p1),(H,p2),(V,p2)] → [(H,x),(V,x),(H,y),(V,y)]
/// with (x,y) = (c,e) for Alice and (d,f) for Bob:
/// (H,p1)→(H,x), (V,p1)→(V,y), (H,p2)→(V,x), (V,p2)→(H,y).
pub fn fig1_side_map(_side: Side) -> DMatrix<C64> {
    // the same permutation on both sides under the fixed basis ordering
    let one = C64::new(1.0, 0.0);
    let mut m = zeros(4);
    m[(0, 0)] = one; // (H,p1) -> (H,x)
    m[(3, 1)] = one; // (V,p1) -> (V,y)
    m[(1, 2)] = one; // (H,p2) -> (V,x)
    m[(2, 3)] = one; // (V,p2) -> (H,y)
    m
}

/// A two-sided linear-optical network given by one 4×4 unitary per side.
#[derive(Debug, Clone)]
pub struct OpticalNetwork {
    alice_map: DMatrix<C64>,
    bob_map: DMatrix<C64>,
}

impl OpticalNetwork {
    pub fn new(alice_map: DMatrix<C64>, bob_map: DMatrix<C64>) -> Result<Self> {
        for (name, m) in [("alice", &alice_map), ("bob", &bob_map)] {
            if m.nrows() != 4 || m.ncols() != 4 {
                return Err(Error::DimensionMismatch { expected: 4, got: m.nrows() });
            }
            if !is_unitary(m) {
                return Err(Error::InvalidState(format!("{name} map is not unitary")));
            }
        }
        Ok(Self { alice_map, bob_map })
    }

    /// The purification network preset.
    pub fn fig1() -> Self {
        Self {
            alice_map: fig1_side_map(Side::Alice),
            bob_map: fig1_side_map(Side::Bob),
        }
    }

    pub fn alice_map(&self) -> &DMatrix<C64> {
        &self.alice_map
    }

    pub fn bob_map(&self) -> &DMatrix<C64> {
        &self.bob_map
    }
}

/// Permutation taking kron(ρ_p, ρ_s) index order (pA,pB,sA,sB) to the
/// joint convention (pA,sA,pB,sB).
fn embed_permutation() -> DMatrix<C64> {
    let mut p = zeros(16);
    for pa in 0..2usize {
        for pb in 0..2usize {
            for sa in 0..2usize {
                for sb in 0..2usize {
                    let src = ((pa * 2 + pb) * 2 + sa) * 2 + sb;
                    let dst = ((pa * 2 + sa) * 2 + pb) * 2 + sb;
                    p[(dst, src)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    p
}

/// Joint 16-dim state over (pol_A, spa_A) ⊗ (pol_B, spa_B) from a 4-dim
/// polarization state and a 4-dim spatial state.
pub fn embed(rho_p: &DensityMatrix, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    if rho_p.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho_p.dim() });
    }
    if rho_s.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho_s.dim() });
    }
    rho_p.tensor(rho_s).conjugate_by(&embed_permutation())
}

/// Reorders a side map from its [(H,p1),(V,p1),(H,p2),(V,p2)] basis to
/// the per-photon embed index 2·pol + path, which swaps indices 1 and 2.
fn to_embed_basis(m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut s = zeros(4);
    let one = C64::new(1.0, 0.0);
    s[(0, 0)] = one;
    s[(2, 1)] = one;
    s[(1, 2)] = one;
    s[(3, 3)] = one;
    &s * m * s.adjoint()
}

/// The joint two-photon unitary alice_map ⊗ bob_map under the embed
/// basis convention.
pub fn two_photon_unitary(net: &OpticalNetwork) -> DMatrix<C64> {
    to_embed_basis(&net.alice_map).kronecker(&to_embed_basis(&net.bob_map))
}

/// Probability below which a conditional state is reported absent.
pub const PROJECTION_FLOOR: f64 = 1e-14;

/// Projects the 16-dim output state onto a coincidence pattern. Returns
/// the pattern probability and, when it exceeds `PROJECTION_FLOOR`, the
/// normalized 4×4 polarization state of the surviving pair (HH, HV, VH,
/// VV order).
pub fn project_pattern(
    rho_out: &DensityMatrix,
    pat: CoincidencePattern,
) -> Result<(f64, Option<DensityMatrix>)> {
    if rho_out.dim() != 16 {
        return Err(Error::DimensionMismatch { expected: 16, got: rho_out.dim() });
    }
    let sa = match pat.alice {
        AliceOut::C => 0usize,
        AliceOut::E => 1,
    };
    let sb = match pat.bob {
        BobOut::D => 0usize,
        BobOut::F => 1,
    };
    let joint_index = |pa: usize, pb: usize| (pa * 2 + sa) * 4 + pb * 2 + sb;

    let mut block = DMatrix::<C64>::zeros(4, 4);
    for pa in 0..2 {
        for pb in 0..2 {
            for qa in 0..2 {
                for qb in 0..2 {
                    block[(pa * 2 + pb, qa * 2 + qb)] =
                        rho_out.entry(joint_index(pa, pb), joint_index(qa, qb));
                }
            }
        }
    }
    let prob = block.diagonal().sum().re;
    debug_assert!(prob > -1e-12);
    let prob = prob.max(0.0);
    if prob < PROJECTION_FLOOR {
        return Ok((prob, None));
    }
    let cond = DensityMatrix::from_raw_unchecked(block / Complex64::new(prob, 0.0));
    Ok((prob, Some(cond)))
}
