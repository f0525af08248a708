import math
import os

import pytest

import vagflow

DATA = os.environ.get("VAGFLOW_TEST_DATA", os.path.join(os.path.dirname(__file__), "..", "data"))


def test_generated_mesh_counts():
    mesh = vagflow.generate_mesh("split-triangles", 2)
    assert mesh.n_cells == 8
    assert mesh.n_vertices == 9
    assert mesh.area == pytest.approx(1.0)


def test_mesh_round_trip_and_quality():
    mesh = vagflow.read_mesh(os.path.join(DATA, "unit_square.vagmesh"))
    assert mesh.n_boundary_vertices == 4
    assert mesh.quality(0.1)["zeta"] == pytest.approx(0.15)
    again = vagflow.parse_mesh(mesh.serialize())
    assert again.vertices == mesh.vertices
    assert again.cells == mesh.cells


def test_model_and_solution_values():
    assert vagflow.model_functions("fokker_planck_log", 4.0)["xi"] == pytest.approx(4.0)
    assert vagflow.model_functions("pme_b", -2.0)["pressure"] == -2.0
    assert vagflow.analytical_solution("t2_1d", 0.5, 0.25, 0.25) == 0.0


def test_rates_and_fit():
    assert vagflow.convergence_rates([4.0, 1.0], [2.0, 1.0])[0] == pytest.approx(2.0)
    series = [(0.1 * i, math.exp(-0.3 * i)) for i in range(20)]
    fit = vagflow.entropy_decay_fit(series, 0.0, 2.0)
    assert fit["slope"] == pytest.approx(-3.0)
    assert fit["r_squared"] == pytest.approx(1.0)


def test_run_conserves_mass():
    text = vagflow.bench_config("t1_nonlinear", 0, 4).replace("time.final = 0.25", "time.final = 0.02")
    out = vagflow.run(text)
    masses = [s["mass"] for s in out["steps"]]
    assert max(abs(m - masses[0]) for m in masses) <= 1e-12 * masses[0]
    assert out["u_min"] > 0.0
    assert out["entropy"][-1][1] < out["entropy"][0][1]


def test_errors_are_python_exceptions():
    with pytest.raises(ValueError):
        vagflow.normalize_config("scheme = quasilinear\n")
    with pytest.raises(ValueError):
        vagflow.parse_mesh("VAGMESH 2\nVERTICES 1\n0 x\n")


def test_normalized_config_is_idempotent():
    text = vagflow.bench_config("t4")
    assert vagflow.normalize_config(text) == text
