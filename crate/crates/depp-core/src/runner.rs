//! Executes a parsed scenario: builds the noisy polarization state and
//! the spatial state, dispatches the configured protocol, and optionally
//! samples coincidence outcomes.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::montecarlo::sample_patterns;
use crate::noise::{
    make_bell_diagonal, make_spatial_state, pauli_channel, spatial_dephasing,
    BellDiagonalParams,
};
use crate::protocols::{bennett_iterate, compare_protocols, one_step_depp, simon_pan_model};
use crate::qcore::{apply_channel, bell_state, fidelity_pure, BellKind, DensityMatrix};
use crate::report::ProtocolOutput;
use crate::scenario::{PolarizationNoise, ProtocolKind, ScenarioConfig};

/// Builds the 4-dim polarization input state described by the noise
/// config. Matrix files are resolved relative to `base_dir`.
pub fn build_polarization_state(
    noise: &PolarizationNoise,
    base_dir: Option<&Path>,
) -> Result<DensityMatrix> {
    match noise {
        PolarizationNoise::BellDiagonal(p) => Ok(make_bell_diagonal(p)),
        PolarizationNoise::Pauli { px, py, pz, target } => {
            let ch = pauli_channel(*px, *py, *pz, *target)?;
            apply_channel(&bell_state(BellKind::PhiPlus).to_density(), &ch)
        }
        PolarizationNoise::MatrixFile(path) => {
            let resolved = match base_dir {
                Some(dir) => dir.join(path),
                None => path.into(),
            };
            load_matrix_file(&resolved)
        }
    }
}

/// Reads a 4×4 density matrix from a text file: 32 whitespace-separated
/// numbers (row-major re/im pairs); `#` starts a comment.
pub fn load_matrix_file(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let mut numbers = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let x: f64 = token.parse().map_err(|_| {
                Error::InvalidParam(format!("{}: malformed number `{token}`", path.display()))
            })?;
            numbers.push(x);
        }
    }
    if numbers.len() != 32 {
        return Err(Error::InvalidParam(format!(
            "{}: expected 32 numbers (4x4 re/im pairs), got {}",
            path.display(),
            numbers.len()
        )));
    }
    let entries: Vec<Complex64> =
        numbers.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
    DensityMatrix::from_entries(4, entries)
}

/// Bell-basis diagonal weights of an arbitrary polarization state, used
/// when a recurrence or Simon-Pan run is configured with non-Bell-diagonal
/// noise.
pub fn bell_weights(rho_p: &DensityMatrix) -> Result<BellDiagonalParams> {
    let mut w = [0.0; 4];
    for (i, kind) in BellKind::ALL.iter().enumerate() {
        w[i] = fidelity_pure(rho_p, &bell_state(*kind))?;
    }
    let sum: f64 = w.iter().sum();
    BellDiagonalParams::new(w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum)
}

/// Runs the configured protocol analytically, plus shot sampling when
/// `run.shots > 0`. Analytic-only runs perform no PRNG calls.
pub fn run_scenario(cfg: &ScenarioConfig, base_dir: Option<&Path>) -> Result<ProtocolOutput> {
    let rho_p = build_polarization_state(&cfg.noise, base_dir)?;
    match cfg.protocol {
        ProtocolKind::OneStepDepp => {
            let mut spatial = make_spatial_state(&cfg.source).to_density();
            if cfg.spatial_dephasing > 0.0 {
                spatial = apply_channel(&spatial, &spatial_dephasing(cfg.spatial_dephasing)?)?;
            }
            let run = one_step_depp(&rho_p, &spatial)?;
            let sampling = if cfg.run.shots > 0 {
                Some(sample_patterns(&run, cfg.run.shots, cfg.run.seed)?)
            } else {
                None
            };
            Ok(ProtocolOutput::Run { run, sampling })
        }
        ProtocolKind::Bennett => {
            let f0 = fidelity_pure(&rho_p, &bell_state(BellKind::PhiPlus))?;
            Ok(ProtocolOutput::Trace(bennett_iterate(f0, cfg.run.rounds)))
        }
        ProtocolKind::SimonPan => {
            let input = bell_weights(&rho_p)?;
            let (output, efficiency) = simon_pan_model(&input);
            Ok(ProtocolOutput::SimonPan { input, output, efficiency })
        }
        ProtocolKind::Compare => {
            let params = bell_weights(&rho_p)?;
            let target = cfg.run.target_fidelity.ok_or_else(|| {
                Error::InvalidParam("compare protocol requires a target fidelity".into())
            })?;
            Ok(ProtocolOutput::Comparison(compare_protocols(&params, target)?))
        }
    }
}
