//! Built-in invariant suite behind the `validate` CLI command. Each
//! check runs against a caller-supplied network so a deliberately
//! perturbed network can be shown to fail the affected invariants.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::montecarlo::RngState;
use crate::noise::{
    make_bell_diagonal, make_spatial_state, pauli_channel, spatial_dephasing,
    BellDiagonalParams, Photon, SourceConfig,
};
use crate::optics::{two_photon_unitary, CoincidencePattern, OpticalNetwork};
use crate::protocols::{
    bennett_recurrence, bennett_step_exact, bennett_success_probability, one_step_depp_with,
};
use crate::qcore::{
    apply_channel, bell_state, is_unitary, BellKind, DensityMatrix, StateVector, C64,
};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl InvariantReport {
    fn pass(name: &'static str) -> Self {
        Self { name, passed: true, detail: "ok".into() }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self { name, passed: false, detail }
    }
}

/// A random mixed state via a normalized G·G† with uniform complex
/// entries; always a valid density matrix.
pub fn random_density_matrix(rng: &mut RngState, dim: usize) -> DensityMatrix {
    let g = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)
    });
    let m = &g * g.adjoint();
    let tr = m.diagonal().sum().re;
    DensityMatrix::new(m / Complex64::new(tr, 0.0)).expect("Gram matrix is a valid state")
}

/// A random point on the probability simplex.
pub fn random_simplex(rng: &mut RngState) -> [f64; 4] {
    let mut w = [0.0; 4];
    let mut sum = 0.0;
    for x in &mut w {
        *x = -(1.0 - rng.next_f64()).ln();
        sum += *x;
    }
    for x in &mut w {
        *x /= sum;
    }
    w
}

pub fn random_bell_diagonal(rng: &mut RngState) -> DensityMatrix {
    let w = random_simplex(rng);
    make_bell_diagonal(&BellDiagonalParams::new(w[0], w[1], w[2], w[3]).expect("simplex point"))
}

pub fn random_product_diagonal(rng: &mut RngState) -> DensityMatrix {
    let w = random_simplex(rng);
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        m[(i, i)] = Complex64::new(w[i], 0.0);
    }
    DensityMatrix::new(m).expect("diagonal simplex point")
}

fn ideal_spatial() -> DensityMatrix {
    make_spatial_state(&SourceConfig::ideal()).to_density()
}

/// Runs every invariant check and reports pass/fail per invariant.
pub fn run_invariant_suite(net: &OpticalNetwork) -> Vec<InvariantReport> {
    vec![
        check_bell_orthonormality(),
        check_side_map_unitarity(net),
        check_joint_map_unitarity(net),
        check_pattern_completeness(net),
        check_branch_orthogonality(net),
        check_phase_flip_invisibility(net),
        check_deterministic_purification(net),
        check_pattern_statistics(net),
        check_decomposition_equivalence(net),
        check_channel_trace_preservation(),
        check_pauli_bell_weights(),
        check_recurrence_fixed_points(),
        check_recurrence_oracle_agreement(),
        check_source_imperfection(net),
        check_prng_golden_sequence(),
        check_parser_totality(),
        check_serialization_canonicality(),
    ]
}

fn check_bell_orthonormality() -> InvariantReport {
    const NAME: &str = "bell-basis-orthonormality";
    for a in BellKind::ALL {
        for b in BellKind::ALL {
            let ip = bell_state(a).inner(&bell_state(b)).expect("dims match");
            let expect = if a == b { 1.0 } else { 0.0 };
            if (ip.re - expect).abs() > TOL || ip.im.abs() > TOL {
                return InvariantReport::fail(NAME, format!("Gram deviation at ({a:?},{b:?})"));
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn check_side_map_unitarity(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "side-map-unitarity";
    if is_unitary(net.alice_map()) && is_unitary(net.bob_map()) {
        InvariantReport::pass(NAME)
    } else {
        InvariantReport::fail(NAME, "a side map is not unitary".into())
    }
}

fn check_joint_map_unitarity(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "joint-map-unitarity";
    let u = two_photon_unitary(net);
    if is_unitary(&u) && is_unitary(&(&u * &u)) {
        InvariantReport::pass(NAME)
    } else {
        InvariantReport::fail(NAME, "joint map is not unitary".into())
    }
}

fn check_pattern_completeness(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "pattern-completeness";
    let mut rng = RngState::new(0x7001);
    for _ in 0..5 {
        let rho_p = random_density_matrix(&mut rng, 4);
        let rr = match one_step_depp_with(net, &rho_p, &ideal_spatial()) {
            Ok(rr) => rr,
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        };
        let total: f64 = rr.pattern_probabilities().iter().sum();
        if (total - 1.0).abs() > TOL {
            return InvariantReport::fail(NAME, format!("pattern probabilities sum to {total}"));
        }
    }
    InvariantReport::pass(NAME)
}

fn check_branch_orthogonality(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "branch-orthogonality";
    let spatial = ideal_spatial();
    for input in 0..4usize {
        let mut amps = [0.0; 4];
        amps[input] = 1.0;
        let rho_p = StateVector::from_reals(&amps).expect("basis state").to_density();
        let rr = match one_step_depp_with(net, &rho_p, &spatial) {
            Ok(rr) => rr,
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        };
        let probs = rr.pattern_probabilities();
        for (pi, &p) in probs.iter().enumerate() {
            let expect = if pi == input { 1.0 } else { 0.0 };
            if (p - expect).abs() > TOL {
                return InvariantReport::fail(
                    NAME,
                    format!(
                        "product input {} maps to pattern {} with probability {p}, expected {expect}",
                        ["HH", "HV", "VH", "VV"][input],
                        CoincidencePattern::ALL[pi].label()
                    ),
                );
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn runs_equal(a: &crate::protocols::RunResult, b: &crate::protocols::RunResult) -> Option<String> {
    for (x, y) in a.patterns.iter().zip(&b.patterns) {
        if (x.probability - y.probability).abs() > TOL {
            return Some(format!("probability differs on {}", x.pattern.label()));
        }
        match (&x.corrected_state, &y.corrected_state) {
            (Some(sx), Some(sy)) => {
                if (sx.matrix() - sy.matrix()).camax() > TOL {
                    return Some(format!("corrected state differs on {}", x.pattern.label()));
                }
            }
            (None, None) => {}
            _ => return Some(format!("pattern presence differs on {}", x.pattern.label())),
        }
    }
    None
}

fn check_phase_flip_invisibility(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "phase-flip-invisibility";
    let spatial = ideal_spatial();
    for (a, b) in [
        (BellKind::PhiPlus, BellKind::PhiMinus),
        (BellKind::PsiPlus, BellKind::PsiMinus),
    ] {
        let ra = one_step_depp_with(net, &bell_state(a).to_density(), &spatial);
        let rb = one_step_depp_with(net, &bell_state(b).to_density(), &spatial);
        match (ra, rb) {
            (Ok(ra), Ok(rb)) => {
                if let Some(diff) = runs_equal(&ra, &rb) {
                    return InvariantReport::fail(NAME, format!("{a:?} vs {b:?}: {diff}"));
                }
            }
            _ => return InvariantReport::fail(NAME, "protocol run failed".into()),
        }
    }
    InvariantReport::pass(NAME)
}

fn check_deterministic_purification(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "deterministic-purification";
    let mut rng = RngState::new(0x7002);
    let spatial = ideal_spatial();
    for i in 0..20 {
        let rho_p = match i % 3 {
            0 => random_bell_diagonal(&mut rng),
            1 => random_product_diagonal(&mut rng),
            _ => random_density_matrix(&mut rng, 4),
        };
        let rr = match one_step_depp_with(net, &rho_p, &spatial) {
            Ok(rr) => rr,
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        };
        if (rr.acceptance_probability - 1.0).abs() > TOL {
            return InvariantReport::fail(
                NAME,
                format!("acceptance {} != 1", rr.acceptance_probability),
            );
        }
        for rec in &rr.patterns {
            if let Some(f) = rec.corrected_fidelity {
                if (f - 1.0).abs() > TOL {
                    return InvariantReport::fail(
                        NAME,
                        format!("corrected fidelity {f} != 1 on {}", rec.pattern.label()),
                    );
                }
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn check_pattern_statistics(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "pattern-statistics";
    let mut rng = RngState::new(0x7003);
    let spatial = ideal_spatial();
    for _ in 0..10 {
        let w = random_simplex(&mut rng);
        let params = BellDiagonalParams::new(w[0], w[1], w[2], w[3]).expect("simplex point");
        let rr = match one_step_depp_with(net, &make_bell_diagonal(&params), &spatial) {
            Ok(rr) => rr,
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        };
        let probs = rr.pattern_probabilities();
        let phi = (params.f + params.f1) / 2.0;
        let psi = (params.f2 + params.f3) / 2.0;
        for (got, expect) in probs.iter().zip([phi, psi, psi, phi]) {
            if (got - expect).abs() > TOL {
                return InvariantReport::fail(
                    NAME,
                    format!("pattern probability {got} != {expect}"),
                );
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn check_decomposition_equivalence(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "decomposition-equivalence";
    let mut rng = RngState::new(0x7004);
    let spatial = ideal_spatial();
    for _ in 0..10 {
        let rho_p = random_density_matrix(&mut rng, 4);
        if let Some(diff) = decomposition_deviation(net, &rho_p, &spatial) {
            return InvariantReport::fail(NAME, diff);
        }
    }
    InvariantReport::pass(NAME)
}

/// Compares the direct run against the product-basis mixture of runs;
/// returns a description of the first deviation beyond tolerance.
pub fn decomposition_deviation(
    net: &OpticalNetwork,
    rho_p: &DensityMatrix,
    spatial: &DensityMatrix,
) -> Option<String> {
    let direct = one_step_depp_with(net, rho_p, spatial).ok()?;
    let (weights, _) = crate::noise::product_dephase(rho_p).ok()?;
    let weights = [weights.alpha, weights.gamma, weights.delta, weights.beta];

    let mut mixed_probs = [0.0f64; 4];
    let mut mixed_states: [Option<DMatrix<C64>>; 4] = [None, None, None, None];
    for (basis, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut amps = [0.0; 4];
        amps[basis] = 1.0;
        let branch = StateVector::from_reals(&amps).expect("basis state").to_density();
        let rr = one_step_depp_with(net, &branch, spatial).ok()?;
        for (pi, rec) in rr.patterns.iter().enumerate() {
            mixed_probs[pi] += w * rec.probability;
            if let Some(state) = &rec.corrected_state {
                let weighted = state.matrix() * Complex64::new(w * rec.probability, 0.0);
                match &mut mixed_states[pi] {
                    Some(acc) => *acc += weighted,
                    slot => *slot = Some(weighted),
                }
            }
        }
    }

    for (pi, rec) in direct.patterns.iter().enumerate() {
        if (rec.probability - mixed_probs[pi]).abs() > TOL {
            return Some(format!(
                "pattern {} probability {} vs mixture {}",
                rec.pattern.label(),
                rec.probability,
                mixed_probs[pi]
            ));
        }
        if let (Some(direct_state), Some(acc)) = (&rec.corrected_state, &mixed_states[pi]) {
            if mixed_probs[pi] > 1e-14 {
                let mixture = acc / Complex64::new(mixed_probs[pi], 0.0);
                if (direct_state.matrix() - mixture).camax() > TOL {
                    return Some(format!(
                        "pattern {} corrected state differs from mixture",
                        rec.pattern.label()
                    ));
                }
            }
        }
    }
    None
}

fn check_channel_trace_preservation() -> InvariantReport {
    const NAME: &str = "channel-trace-preservation";
    let mut rng = RngState::new(0x7005);
    let channels = [
        pauli_channel(0.2, 0.1, 0.3, Photon::A),
        pauli_channel(0.5, 0.0, 0.5, Photon::B),
        spatial_dephasing(0.4),
        spatial_dephasing(1.0),
    ];
    for ch in channels {
        let ch = match ch {
            Ok(ch) => ch,
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        };
        let rho = random_density_matrix(&mut rng, 4);
        match apply_channel(&rho, &ch) {
            Ok(out) => {
                if (out.trace().re - 1.0).abs() > 1e-10 {
                    return InvariantReport::fail(NAME, format!("trace {}", out.trace().re));
                }
            }
            Err(e) => return InvariantReport::fail(NAME, e.to_string()),
        }
    }
    InvariantReport::pass(NAME)
}

fn check_pauli_bell_weights() -> InvariantReport {
    const NAME: &str = "pauli-channel-bell-weights";
    let phi_p = bell_state(BellKind::PhiPlus).to_density();
    for px in [0.0, 0.1, 0.25] {
        for py in [0.0, 0.2] {
            for pz in [0.0, 0.15, 0.3] {
                for target in [Photon::A, Photon::B] {
                    let ch = pauli_channel(px, py, pz, target).expect("valid probabilities");
                    let out = apply_channel(&phi_p, &ch).expect("dims match");
                    let expect = make_bell_diagonal(
                        &BellDiagonalParams::new(1.0 - px - py - pz, pz, px, py)
                            .expect("valid weights"),
                    );
                    if (out.matrix() - expect.matrix()).camax() > TOL {
                        return InvariantReport::fail(
                            NAME,
                            format!("weight mapping broken at px={px} py={py} pz={pz}"),
                        );
                    }
                }
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn check_recurrence_fixed_points() -> InvariantReport {
    const NAME: &str = "recurrence-fixed-points";
    for f in [0.25, 0.5, 1.0] {
        if (bennett_recurrence(f) - f).abs() > TOL {
            return InvariantReport::fail(NAME, format!("F={f} is not fixed"));
        }
    }
    for i in 1..50 {
        let f = 0.5 + 0.5 * i as f64 / 50.0;
        if bennett_recurrence(f) <= f {
            return InvariantReport::fail(NAME, format!("no strict increase at F={f}"));
        }
    }
    InvariantReport::pass(NAME)
}

fn check_recurrence_oracle_agreement() -> InvariantReport {
    const NAME: &str = "recurrence-oracle-agreement";
    for i in 0..=10 {
        let f = i as f64 / 10.0;
        let (fp, p) = bennett_step_exact(f);
        if (fp - bennett_recurrence(f)).abs() > TOL
            || (p - bennett_success_probability(f)).abs() > TOL
        {
            return InvariantReport::fail(NAME, format!("oracle disagrees at F={f}"));
        }
    }
    InvariantReport::pass(NAME)
}

fn check_source_imperfection(net: &OpticalNetwork) -> InvariantReport {
    const NAME: &str = "source-imperfection-closed-form";
    let hh = StateVector::from_reals(&[1.0, 0.0, 0.0, 0.0]).expect("basis state").to_density();
    for r in [0.0, 0.5, 1.0, 2.0] {
        for theta in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            let spatial =
                make_spatial_state(&SourceConfig::new(r, theta).expect("valid source"));
            let rr = match one_step_depp_with(net, &hh, &spatial.to_density()) {
                Ok(rr) => rr,
                Err(e) => return InvariantReport::fail(NAME, e.to_string()),
            };
            let expect = ((1.0 + r * theta.cos()).powi(2) + (r * theta.sin()).powi(2))
                / (2.0 * (1.0 + r * r));
            let got = match rr.patterns[0].corrected_fidelity {
                Some(f) => f,
                None => return InvariantReport::fail(NAME, format!("(c,d) absent at r={r}")),
            };
            if (got - expect).abs() > TOL {
                return InvariantReport::fail(
                    NAME,
                    format!("r={r} theta={theta}: fidelity {got} != {expect}"),
                );
            }
        }
    }
    InvariantReport::pass(NAME)
}

fn check_prng_golden_sequence() -> InvariantReport {
    const NAME: &str = "prng-golden-sequence";
    let mut rng = RngState::new(1);
    let golden = [5180492295206395165u64, 12380297144915551517, 13389498078930870103];
    for g in golden {
        if rng.next() != g {
            return InvariantReport::fail(NAME, "seed-1 stream mismatch".into());
        }
    }
    let mut zero = RngState::new(0);
    if zero.next() != 973819730272012410 {
        return InvariantReport::fail(NAME, "zero-seed remap mismatch".into());
    }
    InvariantReport::pass(NAME)
}

fn check_parser_totality() -> InvariantReport {
    const NAME: &str = "parser-totality";
    let mut rng = RngState::new(0x7006);
    for _ in 0..200 {
        let len = (rng.next() % 256) as usize;
        let bytes: Vec<u8> = (0..len).map(|_| (rng.next() % 256) as u8).collect();
        let text = String::from_utf8_lossy(&bytes);
        let _ = crate::scenario::parse_scenario(&text);
    }
    // and the minimal well-formed scenario still parses
    let minimal = "[noise.polarization]\nmodel = bell_diagonal\nF = 1\nF1 = 0\nF2 = 0\nF3 = 0\n[protocol]\nname = one_step_depp\n";
    if crate::scenario::parse_scenario(minimal).is_err() {
        return InvariantReport::fail(NAME, "minimal scenario rejected".into());
    }
    InvariantReport::pass(NAME)
}

fn check_serialization_canonicality() -> InvariantReport {
    const NAME: &str = "serialization-canonicality";
    let cfg = match crate::scenario::parse_scenario(
        "[noise.polarization]\nmodel = bell_diagonal\nF = 0.7\nF1 = 0.1\nF2 = 0.15\nF3 = 0.05\n[protocol]\nname = one_step_depp\n",
    ) {
        Ok(cfg) => cfg,
        Err(e) => return InvariantReport::fail(NAME, e.to_string()),
    };
    let out = match crate::runner::run_scenario(&cfg, None) {
        Ok(out) => out,
        Err(e) => return InvariantReport::fail(NAME, e.to_string()),
    };
    let first = crate::report::serialize_result(&cfg, &out);
    let parsed: serde_json::Value = match serde_json::from_str(&first) {
        Ok(v) => v,
        Err(e) => return InvariantReport::fail(NAME, e.to_string()),
    };
    if crate::report::canonical_json(&parsed) != first {
        return InvariantReport::fail(NAME, "document is not canonical".into());
    }
    InvariantReport::pass(NAME)
}


/// A unitary but wrong network (two Alice output rows on different
/// ports swapped, so a horizontal photon exits the wrong port): the
/// deliberate-mutation hook used to show the suite catches broken maps.
pub fn perturbed_network() -> OpticalNetwork {
    let mut alice = crate::optics::fig1_side_map(crate::optics::Side::Alice);
    alice.swap_rows(0, 2);
    OpticalNetwork::new(alice, crate::optics::fig1_side_map(crate::optics::Side::Bob))
        .expect("row swap keeps the map unitary")
}
