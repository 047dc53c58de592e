import math

import numpy as np
import pytest

import weakkam as wk


def classes(half, step):
    return [step * j for j in range(-half, half + 1)]


def test_integrable_alpha_is_half_c_squared():
    f = wk.GeneratingFamily.integrable()
    for c in (0.0, 0.3, -0.7):
        s = wk.solve_alpha(f, c, n_grid=256)
        assert abs(s["alpha"] - 0.5 * c * c) <= 1e-6
        assert s["u"].shape == (256,)


def test_integrable_map_is_a_shear():
    f = wk.GeneratingFamily.integrable()
    theta, r = f.forward(0.25, 0.4)
    assert theta == pytest.approx(0.65, abs=1e-12)
    assert r == pytest.approx(0.4, abs=1e-12)


def test_standard_map_round_trip():
    f = wk.GeneratingFamily.parse("standard:k=0.9")
    assert "standard" in f.token
    theta, r = f.inverse(*f.forward(0.1, 0.3))
    assert theta == pytest.approx(0.1, abs=1e-10)
    assert r == pytest.approx(0.3, abs=1e-10)


def test_errors_map_to_python_exceptions():
    f = wk.GeneratingFamily.standard(0.9)
    with pytest.raises(wk.NoConvergence):
        wk.solve_alpha(f, 0.37, n_grid=256, max_iters=2)
    assert issubclass(wk.NoConvergence, wk.Error)


def test_weak_kam_pseudograph_of_a_flat_solution():
    f = wk.GeneratingFamily.integrable()
    w = wk.weak_kam_solution(f, 0.3, n_grid=256)
    g = wk.full_pseudograph(0.3, w.u)
    assert len(g) == 256
    assert np.allclose(g.lower, 0.3, atol=1e-9)
    assert np.allclose(g.upper, 0.3, atol=1e-9)
    assert g.corner_count == 0
    assert wk.hausdorff_distance(g, g) == 0.0


def test_mather_orbits_of_the_standard_map():
    s = wk.mather_set(wk.GeneratingFamily.standard(0.9), 1, 2)
    assert s["orbits"]
    for o in s["orbits"]:
        assert len(o["thetas"]) == 2
        assert o["stationarity"] <= 1e-8
    x = s["orbits"][0]["thetas"]
    seq = [x[0], x[1], x[0] + 1, x[1] + 1]
    assert wk.crossing_count(seq, seq) == 4


def test_integrable_green_slopes():
    g = wk.green_slopes(wk.GeneratingFamily.integrable(), 0.3, 0.7, 10)
    k = np.arange(1, 11)
    assert np.allclose(g["forward"], 1.0 / k, atol=1e-10)
    assert np.allclose(g["backward"], -1.0 / k, atol=1e-10)
    assert g["nesting_margin"] > 0.0


def test_foliation_verdicts():
    c = classes(10, 0.05)
    tri = wk.straighten_test(wk.triangle_wave_foliation(256, c))
    assert tri["verdict"] == "NOT"
    assert tri["witness"][0] == 0.0
    std = wk.straighten_test(wk.standard_foliation(256, c))
    assert std["verdict"] == "STRAIGHTENABLE"


def test_foliation_surface_from_numpy():
    n, c = 128, classes(5, 0.1)
    theta = np.arange(n) / n
    u = np.array([[cj * 0.3 * math.sin(2 * math.pi * t) / (2 * math.pi) for cj in c] for t in theta])
    s = wk.FoliationSurface(u, c)
    assert (s.n, s.m) == (n, len(c))
    assert np.array_equal(s.u, u)
    assert wk.straighten_test(s)["verdict"] == "STRAIGHTENABLE"
    assert wk.lipschitz_integrability_test(s)["pass"]


def test_acceptance_entry_points():
    criteria = wk.acceptance_criteria()
    assert [c[0] for c in criteria] == list(range(1, 15))
    (result,) = wk.run_acceptance("lipschitz", n_grid=256)
    assert result["name"] == "lipschitz"
    assert result["pass"]
