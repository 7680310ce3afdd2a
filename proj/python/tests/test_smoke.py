import math
import pathlib

import numpy as np
import pytest

yd = pytest.importorskip("yudovich")

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def test_disk_green_symmetry_and_closed_form():
    g = yd.green("disk")
    x, y = (0.3, -0.2), (-0.1, 0.55)
    assert abs(g.G(x, y) - g.G(y, x)) < 1e-12
    # G(x, y) = (1/2π) log(|x − y| / |x| |x − y*|)
    xs = np.array(x) / np.dot(x, x)
    ref = math.log(np.linalg.norm(np.subtract(x, y)) / (np.linalg.norm(x) * np.linalg.norm(np.subtract(xs, y)))) / (2 * math.pi)
    assert g.G(x, y) == pytest.approx(ref, abs=1e-12)


def test_annulus_period_matrix():
    g = yd.green("annulus", r0=math.exp(-1.0))
    assert g.holes == 1
    assert g.period_matrix[0, 0] == pytest.approx(-2 * math.pi, abs=1e-9)


def test_single_vortex_circular_orbit():
    tr = yd.integrate_vortices(yd.green("disk"), [(0.5, 0.0)], [1.0], T=5.0, tol=1e-10)
    z = np.array(tr["positions"])[:, 0, :]
    assert np.max(np.abs(np.hypot(z[:, 0], z[:, 1]) - 0.5)) < 1e-8
    assert tr["hamiltonian_drift"] < 1e-8
    assert tr["end_time"] == pytest.approx(5.0)


def test_gamma_closed_form():
    fam = yd.GammaFamily(yd.Modulus.h_log(0.5, math.exp(-1.0)), 1.0, 2.0)
    for h in (1e-12, 1e-6):
        assert fam(1.0, h) == pytest.approx(h ** math.exp(-1.0), rel=1e-8)


def test_newton_uniform_disk():
    one = yd.Density.constant(1.0)
    assert yd.newton_potential(one, (0.3, 0.4)) == pytest.approx((0.25 - 1) / 4, abs=1e-9)
    d = yd.newton_second_derivatives(one, (0.2, -0.1))
    assert d["u"] == pytest.approx(0.5 * np.eye(2), abs=1e-9)
    assert d["asymmetry"] < 1e-8


def test_radial_density_from_python_profile():
    f = yd.Density.radial(lambda r: 1.0 + r * r)
    d = yd.newton_second_derivatives(f, (0.3, 0.1))
    assert d["trace"] == pytest.approx(f((0.3, 0.1)), abs=1e-8)


def test_run_scenario_in_memory():
    out = yd.run_scenario("vortices", (SCENARIOS / "disk_single_vortex.json").read_text())
    assert out["exit"] == 0
    assert out["diagnostics"]["period"] == pytest.approx(1.5 * math.pi, abs=1e-6)
    assert "trajectory.csv" in out["files"]


def test_schema_error_is_value_error():
    with pytest.raises(ValueError):
        yd.run_scenario("vortices", {"domain": {"kind": "disk"}, "bogus": 1})


def test_argument_errors_map_to_value_error():
    with pytest.raises(ValueError):
        yd.Modulus.h_log(1.0, 0.9)


def test_self_check_passes():
    assert all(state != "fail" for _, state, _ in yd.self_check())
