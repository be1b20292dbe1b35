//! End-to-end checks of the run, sweep and compare subcommands.

use std::path::PathBuf;
use std::process::{Command, Output};

fn depp() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_depp"));
    cmd.env_remove("DEPP_TEST_PERTURB_NETWORK").env_remove("DEPP_SEED");
    cmd
}

struct Workdir {
    dir: PathBuf,
}

impl Workdir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("depp-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self { dir }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let path = self.dir.join(name);
        std::fs::write(&path, body).unwrap();
        path
    }
}

impl Drop for Workdir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.dir).ok();
    }
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const PSI_MINUS: &str = "\
[noise.polarization]
model = bell_diagonal
F = 0
F1 = 0
F2 = 0
F3 = 1
[protocol]
name = one_step_depp
";

#[test]
fn run_psi_minus_scenario() {
    let wd = Workdir::new("run");
    let scenario = wd.file("psi_minus.epp", PSI_MINUS);
    let out = depp().arg("run").arg(&scenario).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("\"D2\"") && text.contains("\"D7\""));
    assert!(text.contains("\"D4\"") && text.contains("\"D5\""));
    // the two surviving patterns carry probability 1/2 each at fidelity 1
    assert!(text.matches("5.0000000000000000e-1").count() >= 2);
    assert!(text.contains("1.0000000000000000e0"));
}

#[test]
fn run_is_deterministic_with_seed_override() {
    let wd = Workdir::new("seed");
    let scenario = wd.file(
        "sampled.epp",
        "[noise.polarization]\nmodel = bell_diagonal\nF = 0.25\nF1 = 0.25\nF2 = 0.25\nF3 = 0.25\n[protocol]\nname = one_step_depp\n[run]\nshots = 5000\n",
    );
    let run = || {
        depp()
            .arg("run")
            .arg(&scenario)
            .args(["--set", "run.seed=7"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("\"seed\": 7"));
}

#[test]
fn depp_seed_env_overrides_run_seed() {
    let wd = Workdir::new("env");
    let scenario = wd.file("plain.epp", PSI_MINUS);
    let out = depp()
        .arg("run")
        .arg(&scenario)
        .env("DEPP_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"seed\": 99"));

    let bad = depp()
        .arg("run")
        .arg(&scenario)
        .env("DEPP_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_scenario_exits_2_with_position() {
    let wd = Workdir::new("bad");
    let scenario = wd.file("bad.epp", "[protocol]\nname ==\n");
    let out = depp().arg("run").arg(&scenario).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn missing_scenario_file_exits_3() {
    let out = depp().arg("run").arg("/nonexistent/path.epp").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_writes_to_output_file() {
    let wd = Workdir::new("outfile");
    let target = wd.dir.join("results.json");
    let scenario = wd.file(
        "towrite.epp",
        &format!("{PSI_MINUS}[run]\noutput = \"{}\"\n", target.display()),
    );
    let out = depp().arg("run").arg(&scenario).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.contains("\"analytic\""));
}

#[test]
fn sweep_theta_follows_the_closed_form() {
    let wd = Workdir::new("sweep");
    // pure |HH> polarization input via the matrix noise model
    let mut matrix = String::new();
    for i in 0..4 {
        for j in 0..4 {
            let v = if i == 0 && j == 0 { 1.0 } else { 0.0 };
            matrix.push_str(&format!("{v} 0 "));
        }
        matrix.push('\n');
    }
    wd.file("hh.mat", &matrix);
    let scenario = wd.file(
        "hh.epp",
        "[noise.polarization]\nmodel = matrix\nfile = hh.mat\n[protocol]\nname = one_step_depp\n",
    );
    let out = depp()
        .arg("sweep")
        .arg(&scenario)
        .args(["--param", "source.theta", "--from", "0", "--to", "3.141592653589793", "--steps", "5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("param,value,"));
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], "source.theta");
        let theta: f64 = cols[1].parse().unwrap();
        let fidelity: f64 = cols[3].parse().unwrap();
        let expect = (theta / 2.0).cos().powi(2);
        assert!(
            (fidelity - expect).abs() < 1e-12,
            "row {i}: fidelity {fidelity} vs cos^2(theta/2) {expect}"
        );
    }
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn sweep_with_one_step_is_rejected() {
    let wd = Workdir::new("steps");
    let scenario = wd.file("plain.epp", PSI_MINUS);
    let out = depp()
        .arg("sweep")
        .arg(&scenario)
        .args(["--param", "source.theta", "--from", "0", "--to", "1", "--steps", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_unknown_param_is_rejected() {
    let wd = Workdir::new("unknown");
    let scenario = wd.file("plain.epp", PSI_MINUS);
    let out = depp()
        .arg("sweep")
        .arg(&scenario)
        .args(["--param", "source.bogus", "--from", "0", "--to", "1", "--steps", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_tabulates_all_three_protocols() {
    let wd = Workdir::new("compare");
    let scenario = wd.file(
        "werner.epp",
        "[noise.polarization]\nmodel = bell_diagonal\nF = 0.7\nF1 = 0.1\nF2 = 0.1\nF3 = 0.1\n[protocol]\nname = one_step_depp\n",
    );
    let out = depp()
        .arg("compare")
        .arg(&scenario)
        .args(["--target", "0.99"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("one_step_depp"));
    assert!(text.contains("bennett"));
    assert!(text.contains("rounds"));
    assert!(text.contains("simon_pan"));
    assert!(text.contains("efficiency 0.50"));

    let unreachable = depp()
        .arg("compare")
        .arg(&scenario)
        .args(["--target", "1.0"])
        .output()
        .unwrap();
    assert!(unreachable.status.success());
    assert!(stdout(&unreachable).contains("unreachable"));
}

#[test]
fn csv_format_for_run() {
    let wd = Workdir::new("csv");
    let scenario = wd.file("plain.epp", PSI_MINUS);
    let out = depp()
        .arg("run")
        .arg(&scenario)
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("param,value,acceptance,fidelity,"));
    assert_eq!(text.lines().count(), 2);
}
