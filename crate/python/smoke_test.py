#!/usr/bin/env python3
"""Smoke test for the depp_py bindings.

Builds (or reuses) the cdylib from crates/depp-py, imports it as a
Python extension module and checks a handful of known values.

Usage: python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module(workdir: Path) -> Path:
    lib = ROOT / "target" / "debug" / "libdepp_py.so"
    if not lib.exists():
        subprocess.run(
            ["cargo", "build", "-p", "depp-py"], cwd=ROOT, check=True
        )
    if not lib.exists():
        sys.exit(f"missing {lib}; build the workspace first")
    target = workdir / "depp_py.so"
    shutil.copyfile(lib, target)
    return target


def approx(a, b, tol=1e-12):
    assert abs(a - b) < tol, f"{a} != {b} (tol {tol})"


def main():
    with tempfile.TemporaryDirectory() as tmp:
        build_module(Path(tmp))
        sys.path.insert(0, tmp)
        import depp_py

        # Bennett recurrence: F = 0.7 -> 25/34, success probability 0.68
        approx(depp_py.bennett_recurrence(0.7), 25 / 34)
        approx(depp_py.bennett_success_probability(0.7), 0.68)
        fids, probs, pairs = depp_py.bennett_iterate(0.7, 2)
        assert len(fids) == 3 and fids[0] == 0.7
        approx(fids[1], 25 / 34)

        # deterministic purification of a noisy Bell-diagonal input
        rho = depp_py.DensityMatrix.bell_diagonal(0.7, 0.1, 0.15, 0.05)
        spatial = depp_py.spatial_state(r=1.0, theta=0.0)
        run = depp_py.one_step_depp(rho, spatial)
        approx(run.acceptance_probability, 1.0)
        approx(run.mean_corrected_fidelity, 1.0)
        assert [p.pattern for p in run.patterns] == ["cd", "cf", "ed", "ef"]
        approx(run.patterns[0].probability, 0.4)
        assert run.patterns[1].detectors == ("D2", "D7")

        # imperfect source: |HH> input and theta = pi kills the (c,d) branch
        hh = depp_py.DensityMatrix([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
        bad = depp_py.spatial_state(r=1.0, theta=math.pi)
        run = depp_py.one_step_depp(hh, bad)
        approx(run.patterns[0].corrected_fidelity, 0.0)

        # Bell state helpers
        approx(depp_py.bell_state("psi-").bell_fidelity("psi-"), 1.0)
        approx(depp_py.bell_state("psi-").bell_fidelity("phi+"), 0.0)

        # Simon-Pan model zeroes the psi sector at 50% efficiency
        (f, f1, f2, f3), eff = depp_py.simon_pan_model(0.7, 0.1, 0.15, 0.05)
        assert eff == 0.5 and f2 == 0.0 and f3 == 0.0
        approx(f, 0.85)

        # reproducible sampling
        counts = depp_py.sample_run(depp_py.DensityMatrix.maximally_mixed(4), spatial, 1000, 7)
        assert sum(counts) == 1000
        assert counts == depp_py.sample_run(
            depp_py.DensityMatrix.maximally_mixed(4), spatial, 1000, 7
        )

        # scenario execution returns a canonical JSON document
        doc = depp_py.run_scenario(
            "[noise.polarization]\n"
            "model = bell_diagonal\n"
            "F = 0\nF1 = 0\nF2 = 0\nF3 = 1\n"
            "[protocol]\nname = one_step_depp\n"
        )
        parsed = json.loads(doc)
        approx(parsed["analytic"]["acceptance_probability"], 1.0)

        # the built-in invariant suite passes
        reports = depp_py.validate()
        assert len(reports) >= 10
        failed = [name for name, ok, _ in reports if not ok]
        assert not failed, f"failing invariants: {failed}"

    print("smoke test passed")


if __name__ == "__main__":
    main()
