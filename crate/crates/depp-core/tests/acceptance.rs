//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Criterion 10 (the `validate` command exit codes)
//! lives in the CLI crate's acceptance test.

use std::time::Instant;

use depp_core::*;

const TOL: f64 = 1e-12;

struct Criterion {
    label: &'static str,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Self { label }
    }

    fn finish(self, failure: Option<String>) {
        match failure {
            None => println!("PASS {}", self.label),
            Some(why) => {
                println!("FAIL {}: {why}", self.label);
                panic!("{}: {why}", self.label);
            }
        }
    }
}

fn ideal_spatial() -> DensityMatrix {
    make_spatial_state(&SourceConfig::ideal()).to_density()
}

#[test]
fn criterion_01_deterministic_purification() {
    let c = Criterion::new("criterion 1: deterministic purification over 100 random inputs");
    let mut rng = RngState::new(0xACC1);
    let mut inputs = Vec::new();
    for _ in 0..25 {
        inputs.push(random_bell_diagonal(&mut rng));
    }
    for _ in 0..25 {
        inputs.push(random_product_diagonal(&mut rng));
    }
    for _ in 0..50 {
        inputs.push(random_density_matrix(&mut rng, 4));
    }
    let spatial = ideal_spatial();
    let started = Instant::now();
    let mut failure = None;
    'outer: for (i, rho_p) in inputs.iter().enumerate() {
        let rr = one_step_depp(rho_p, &spatial).expect("valid input");
        if (rr.acceptance_probability - 1.0).abs() > TOL {
            failure = Some(format!(
                "input {i}: acceptance probability {}",
                rr.acceptance_probability
            ));
            break;
        }
        for rec in &rr.patterns {
            if let Some(f) = rec.corrected_fidelity {
                if (f - 1.0).abs() > TOL {
                    failure = Some(format!(
                        "input {i}: corrected fidelity {f} on pattern {}",
                        rec.pattern.label()
                    ));
                    break 'outer;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if failure.is_none() && elapsed.as_secs_f64() >= 1.0 {
        failure = Some(format!("took {elapsed:?}, budget is 1 s"));
    }
    c.finish(failure);
}

#[test]
fn criterion_02_pattern_statistics() {
    let c = Criterion::new("criterion 2: Bell-diagonal pattern statistics on a 20-point grid");
    let spatial = ideal_spatial();
    let psi_plus = bell_state(BellKind::PsiPlus);
    let mut failure = None;
    // all integer compositions of 3 into 4 parts: exactly 20 grid points
    let mut grid = Vec::new();
    for i in 0..=3u32 {
        for j in 0..=3 - i {
            for k in 0..=3 - i - j {
                grid.push([i, j, k, 3 - i - j - k]);
            }
        }
    }
    assert_eq!(grid.len(), 20);
    'outer: for point in grid {
        let w: Vec<f64> = point.iter().map(|&n| n as f64 / 3.0).collect();
        let params = BellDiagonalParams::new(w[0], w[1], w[2], w[3]).expect("grid point");
        let rr = one_step_depp(&make_bell_diagonal(&params), &spatial).expect("valid input");
        let probs = rr.pattern_probabilities();
        let phi = (params.f + params.f1) / 2.0;
        let psi = (params.f2 + params.f3) / 2.0;
        for (got, expect) in probs.iter().zip([phi, psi, psi, phi]) {
            if (got - expect).abs() > TOL {
                failure = Some(format!("grid point {point:?}: probability {got} != {expect}"));
                break 'outer;
            }
        }
        // the cross patterns (D2,D7) and (D5,D4) herald the raw state ψ+
        for rec in [&rr.patterns[1], &rr.patterns[2]] {
            if let Some(raw) = &rec.raw_state {
                let f = fidelity_pure(raw, &psi_plus).expect("dims match");
                if (f - 1.0).abs() > TOL {
                    failure = Some(format!(
                        "grid point {point:?}: raw state on {} has ψ+ fidelity {f}",
                        rec.pattern.label()
                    ));
                    break 'outer;
                }
            }
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_03_bennett_recurrence() {
    let c = Criterion::new("criterion 3: Bennett recurrence matches the brute-force oracle");
    let started = Instant::now();
    let mut failure = None;
    for i in 0..=10 {
        let f = i as f64 / 10.0;
        let (fp, p) = bennett_step_exact(f);
        if (fp - bennett_recurrence(f)).abs() > TOL
            || (p - bennett_success_probability(f)).abs() > TOL
        {
            failure = Some(format!("oracle disagrees at F={f}"));
            break;
        }
    }
    if failure.is_none() {
        for f in [0.25, 0.5, 1.0] {
            if (bennett_recurrence(f) - f).abs() > TOL {
                failure = Some(format!("F={f} is not a fixed point"));
            }
        }
    }
    if failure.is_none() {
        for i in 1..50 {
            let f = 0.5 + 0.5 * i as f64 / 50.0;
            if bennett_recurrence(f) <= f {
                failure = Some(format!("no strict increase at F={f}"));
                break;
            }
        }
    }
    if failure.is_none() && (bennett_recurrence(0.7) - 25.0 / 34.0).abs() > TOL {
        failure = Some(format!("F=0.7 gives {}", bennett_recurrence(0.7)));
    }
    let elapsed = started.elapsed();
    if failure.is_none() && elapsed.as_secs_f64() >= 1.0 {
        failure = Some(format!("took {elapsed:?}, budget is 1 s"));
    }
    c.finish(failure);
}

#[test]
fn criterion_04_decomposition_equivalence() {
    let c = Criterion::new("criterion 4: product-basis decomposition matches direct simulation");
    let net = OpticalNetwork::fig1();
    let spatial = ideal_spatial();
    let mut rng = RngState::new(0xACC4);
    let mut failure = None;
    for i in 0..50 {
        let rho_p = random_density_matrix(&mut rng, 4);
        if let Some(diff) = validation::decomposition_deviation(&net, &rho_p, &spatial) {
            failure = Some(format!("input {i}: {diff}"));
            break;
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_05_phase_flip_invisibility() {
    let c = Criterion::new("criterion 5: phase flips are invisible to the protocol");
    let spatial = ideal_spatial();
    let mut failure = None;
    'outer: for (a, b) in [
        (BellKind::PhiPlus, BellKind::PhiMinus),
        (BellKind::PsiPlus, BellKind::PsiMinus),
    ] {
        let ra = one_step_depp(&bell_state(a).to_density(), &spatial).expect("valid input");
        let rb = one_step_depp(&bell_state(b).to_density(), &spatial).expect("valid input");
        if (ra.acceptance_probability - rb.acceptance_probability).abs() > TOL
            || (ra.mean_corrected_fidelity - rb.mean_corrected_fidelity).abs() > TOL
        {
            failure = Some(format!("{a:?} vs {b:?}: summary fields differ"));
            break;
        }
        for (x, y) in ra.patterns.iter().zip(&rb.patterns) {
            if (x.probability - y.probability).abs() > TOL {
                failure = Some(format!("{a:?} vs {b:?}: probability on {}", x.pattern.label()));
                break 'outer;
            }
            match (&x.corrected_state, &y.corrected_state) {
                (Some(sx), Some(sy)) => {
                    if (sx.matrix() - sy.matrix()).camax() > TOL {
                        failure =
                            Some(format!("{a:?} vs {b:?}: state on {}", x.pattern.label()));
                        break 'outer;
                    }
                }
                (None, None) => {}
                _ => {
                    failure = Some(format!("{a:?} vs {b:?}: presence on {}", x.pattern.label()));
                    break 'outer;
                }
            }
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_06_source_imperfection_sweep() {
    let c = Criterion::new("criterion 6: source-imperfection fidelity matches the closed form");
    let hh = StateVector::from_reals(&[1.0, 0.0, 0.0, 0.0]).unwrap().to_density();
    let mut failure = None;
    'outer: for r in [0.0, 0.5, 1.0, 2.0] {
        for theta in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            let spatial = make_spatial_state(&SourceConfig::new(r, theta).unwrap()).to_density();
            let rr = one_step_depp(&hh, &spatial).expect("valid input");
            let expect = ((1.0 + r * theta.cos()).powi(2) + (r * theta.sin()).powi(2))
                / (2.0 * (1.0 + r * r));
            let got = match rr.patterns[0].corrected_fidelity {
                Some(f) => f,
                None if expect.abs() <= TOL => continue,
                None => {
                    failure = Some(format!("pattern (c,d) absent at r={r} theta={theta}"));
                    break 'outer;
                }
            };
            if (got - expect).abs() > TOL {
                failure = Some(format!("r={r} theta={theta}: fidelity {got} != {expect}"));
                break 'outer;
            }
        }
    }
    if failure.is_none() {
        let perfect = make_spatial_state(&SourceConfig::new(1.0, 0.0).unwrap()).to_density();
        let f = one_step_depp(&hh, &perfect).unwrap().patterns[0]
            .corrected_fidelity
            .unwrap();
        if (f - 1.0).abs() > TOL {
            failure = Some(format!("r=1 theta=0 gives {f}, expected 1"));
        }
        let worst = make_spatial_state(&SourceConfig::new(1.0, std::f64::consts::PI).unwrap())
            .to_density();
        let f = one_step_depp(&hh, &worst).unwrap().patterns[0]
            .corrected_fidelity
            .unwrap_or(0.0);
        if f.abs() > TOL {
            failure = Some(format!("r=1 theta=pi gives {f}, expected 0"));
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_07_monte_carlo_soundness() {
    let c = Criterion::new("criterion 7: Monte Carlo frequencies, determinism, Wilson coverage");
    let spatial = ideal_spatial();
    let uniform = one_step_depp(&DensityMatrix::maximally_mixed(4), &spatial).unwrap();
    let mut failure = None;

    let report = sample_patterns(&uniform, 100_000, 20240 /* fixed seed */).unwrap();
    for (i, f) in report.frequencies.iter().enumerate() {
        if (f - 0.25).abs() > 0.0055 {
            failure = Some(format!("frequency {f} on pattern {i} outside 0.25 ± 0.0055"));
        }
    }

    if failure.is_none() {
        let cfg = parse_scenario(
            "[noise.polarization]\nmodel = bell_diagonal\nF = 0.25\nF1 = 0.25\nF2 = 0.25\nF3 = 0.25\n[protocol]\nname = one_step_depp\n[run]\nshots = 100000\nseed = 20240\n",
        )
        .unwrap();
        let a = serialize_result(&cfg, &run_scenario(&cfg, None).unwrap());
        let b = serialize_result(&cfg, &run_scenario(&cfg, None).unwrap());
        if a != b {
            failure = Some("identical seeds produced different reports".into());
        }
    }

    if failure.is_none() {
        let mut covered = 0;
        for seed in 1..=50u64 {
            let report = sample_patterns(&uniform, 10_000, seed).unwrap();
            let (lo, hi) = wilson_interval(report.counts[0], report.shots);
            if lo <= 0.25 && 0.25 <= hi {
                covered += 1;
            }
        }
        if covered < 44 {
            failure = Some(format!("Wilson interval covered 0.25 in only {covered}/50 seeds"));
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_08_protocol_comparison() {
    let c = Criterion::new("criterion 8: Simon-Pan efficiency and Bennett attractor");
    let params = BellDiagonalParams::new(0.7, 0.1, 0.15, 0.05).unwrap();
    let (out, eff) = simon_pan_model(&params);
    let mut failure = None;
    if eff != 0.5 {
        failure = Some(format!("efficiency {eff} != 0.5"));
    } else if out.f2 != 0.0 || out.f3 != 0.0 {
        failure = Some(format!("psi-sector weights not zeroed: {} {}", out.f2, out.f3));
    } else if (out.f - 0.85).abs() > TOL || (out.f1 - 0.15).abs() > TOL {
        failure = Some(format!("output weights {} {}", out.f, out.f1));
    } else {
        let cmp = compare_protocols(&params, 1.0).expect("valid target");
        if cmp.bennett.reachable {
            failure = Some("Bennett marked reachable at target 1.0".into());
        } else if (cmp.depp.final_fidelity - 1.0).abs() > TOL {
            failure = Some(format!("one-step fidelity {}", cmp.depp.final_fidelity));
        }
    }
    c.finish(failure);
}

#[test]
fn criterion_09_structural_checks() {
    let c = Criterion::new("criterion 9: unitarity, trace preservation, parser fuzz, canonical JSON");
    let mut failure = None;

    let net = OpticalNetwork::fig1();
    if !is_unitary(net.alice_map()) || !is_unitary(net.bob_map()) {
        failure = Some("a side map is not unitary".into());
    } else if !is_unitary(&two_photon_unitary(&net)) {
        failure = Some("joint map is not unitary".into());
    }

    if failure.is_none() {
        let mut rng = RngState::new(0xACC9);
        let channels = [
            pauli_channel(0.1, 0.2, 0.3, Photon::A).unwrap(),
            pauli_channel(0.0, 0.0, 0.5, Photon::B).unwrap(),
            spatial_dephasing(0.3).unwrap(),
            spatial_dephasing(1.0).unwrap(),
        ];
        for ch in &channels {
            let rho = random_density_matrix(&mut rng, 4);
            let out = apply_channel(&rho, ch).unwrap();
            if (out.trace().re - 1.0).abs() > 1e-10 {
                failure = Some(format!("channel output trace {}", out.trace().re));
                break;
            }
        }
    }

    if failure.is_none() {
        let mut rng = RngState::new(0xF022);
        for _ in 0..10_000 {
            let len = (rng.next() % 1024) as usize;
            let bytes: Vec<u8> = (0..len).map(|_| (rng.next() % 256) as u8).collect();
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_scenario(&text);
        }
    }

    if failure.is_none() {
        let cfg = parse_scenario(
            "[source]\nr = 0.8\ntheta = 0.3\n[noise.polarization]\nmodel = bell_diagonal\nF = 0.6\nF1 = 0.2\nF2 = 0.1\nF3 = 0.1\n[protocol]\nname = one_step_depp\n[run]\nshots = 500\nseed = 11\n",
        )
        .unwrap();
        let out = run_scenario(&cfg, None).unwrap();
        let first = serialize_result(&cfg, &out);
        let reparsed: serde_json::Value = serde_json::from_str(&first).unwrap();
        if canonical_json(&reparsed) != first {
            failure = Some("results document is not canonical".into());
        }
    }
    c.finish(failure);
}
