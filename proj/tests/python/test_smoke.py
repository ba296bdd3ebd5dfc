import math

import numpy as np
import pytest

import pstokes


def test_grid_shapes():
    xy, tri = pstokes.build_grid(4)
    assert xy.shape == (25, 2)
    assert tri.shape == (32, 3)
    assert tri.min() == 0 and tri.max() == 24


def test_delta_law_round_trip():
    h, nu = 0.05, 0.01
    delta = pstokes.choose_delta(h, nu, 10.0)
    assert math.isclose(delta, h * h / (nu * 100.0))
    assert math.isclose(pstokes.rho_of(h, nu, delta), 10.0)


def test_steady_solve_is_accurate():
    out = pstokes.steady_solve(16, degree=1, rho=10.0)
    assert out["vel_l2_exact"] < 1e-2
    assert out["pres_l2_exact"] < 1.0
    assert np.all(np.isfinite(out["velocity"]))


def test_matrices_are_symmetric():
    sp = pytest.importorskip("scipy.sparse")
    mats = pstokes.system_matrices(3, 1)
    data, indices, indptr, shape = mats["stiffness"]
    a = sp.csr_matrix((data, indices, indptr), shape=shape)
    assert abs(a - a.T).max() < 1e-14
    assert math.isclose(mats["pressure_weights"].sum(), 1.0)


def test_scheme_records():
    delta = pstokes.choose_delta(1.0 / 8, 0.01, 10.0)
    recs = pstokes.run_scheme(8, rho=10.0, final_time=4 * delta, scheme="inc")
    assert [r["n"] for r in recs] == [0, 1, 2, 3, 4]
    assert all(math.isfinite(r["energy"]) for r in recs)


def test_config_round_trip_and_errors():
    text = pstokes.default_config("steady_sweep")
    assert pstokes.normalize_config(text) == text
    with pytest.raises(pstokes.ConfigError, match="line 2"):
        pstokes.normalize_config("[steady_sweep]\nrhoo = 1\n")


def test_run_experiment_csv():
    csv = pstokes.run_experiment("[steady_sweep]\nN = 4, 8\nrho = 10\n", "steady_sweep")
    lines = csv.splitlines()
    header = [l for l in lines if not l.startswith("#")]
    assert header[0].startswith("kind,status,degree,N")
    assert len(header) == 1 + 2 + 1
