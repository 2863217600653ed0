import json
import math
import os
import subprocess
import xml.etree.ElementTree as ET

import pytest

import gpjet


def test_default_groups_and_slope():
    g = gpjet.default_pcl_groups()
    assert g.Ca == pytest.approx(1048.276)
    assert g.valid()
    assert gpjet.initial_radius_slope(g) == pytest.approx(-0.127756638297492, abs=1e-12)


def test_jet_profile_shape():
    z, r = gpjet.solve_jet_profile(gpjet.default_pcl_groups(), 93)
    assert len(z) == len(r) == 93
    assert r[0] == 1.0
    assert all(b < a for a, b in zip(r, r[1:]))


def test_gp_reverts_to_prior_far_from_data():
    x = [0.0, 0.3, 0.7, 1.0]
    y = [math.sin(3 * v) for v in x]
    model = gpjet.fit_gp(x, y, restarts=4, seed=1)
    _, var_near = model.predict(0.3)
    mean_far, var_far = model.predict(1e3)
    assert mean_far == pytest.approx(sum(y) / len(y), abs=1e-9)
    assert 0.0 <= var_near < var_far
    assert set(model.summary()) >= {"lengthscale", "signal_variance", "noise_variance"}


def test_multi_fidelity_scale():
    x = [i / 9 for i in range(10)]
    low = [math.sin(6 * v) for v in x]
    high = [2.0 * v for v in low]
    model = gpjet.fit_mf(x, low, x, high)
    assert model.rho == pytest.approx(2.0, abs=1e-3)


def test_acquisition_closed_form():
    assert gpjet.acquire("ExpectedImprovement", 1.0, 0.0, 0.5) == 0.0
    assert gpjet.acquire("ExpectedImprovement", 0.0, 1.0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)


def test_sewing_classes():
    assert gpjet.classify_pattern(0.0) == "SteadyCoiling"
    assert gpjet.classify_pattern(0.48) == "AlternatingLoops"
    assert gpjet.classify_pattern(1.0) == "Straight"


def test_metrology_round_trip():
    z, r = gpjet.solve_jet_profile(gpjet.default_pcl_groups(), 93)
    diameters, lag = gpjet.render_and_scan(z, r, 0.25)
    assert diameters and all(d > 0 for d in diameters)
    assert abs(lag - 0.25) <= 0.008


def test_errors_carry_codes():
    with pytest.raises(gpjet.GpjetError) as info:
        gpjet.VirtualMachine().observe_lag(0.5, 0)
    assert info.value.code == "UnstableRegime"


def test_run_experiment_from_python():
    names = gpjet.experiment_names()
    assert "fig5b" in names and "metrology-bench" in names
    result = gpjet.run("fig5b", seed=2)
    assert result["rmse"] > 0.0
    assert gpjet.run("fig5b", seed=2) == result


def _cli():
    exe = os.environ.get("GPJET_EXE")
    if not exe:
        pytest.skip("GPJET_EXE not set")
    return exe


def test_cli_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    subprocess.run([_cli(), "fig5b", "--seed", "1", "--plot", "--out", str(out)], check=True)
    result = json.loads((out / "result.json").read_text())
    assert result["rmse"] > 0.0
    root = ET.parse(out / "plot.svg").getroot()
    assert root.tag.endswith("svg")


@pytest.mark.parametrize("args", [["nosuch"], ["fig5b", "--config", "{missing}"]])
def test_cli_rejects_bad_input(tmp_path, args):
    args = [a.replace("{missing}", str(tmp_path / "missing.json")) for a in args]
    proc = subprocess.run([_cli(), *args, "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "gpjet:" in proc.stderr
