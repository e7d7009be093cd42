import json
import math
import os
import pathlib

import pytest

import mcmc_certify as mc

SOURCE_DIR = pathlib.Path(os.environ.get("MCMC_CERTIFY_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def test_minorization_and_rate():
    eps = mc.gaussian_minorization_epsilon(10, 0.5, 4.0)
    assert eps == pytest.approx(2.2767085001476143e-7, rel=1e-6)
    opt = mc.optimize_rho(10, 0.5, 4.0)
    assert opt["eps"] == eps
    assert 3e-8 <= opt["one_minus_rho"] <= 1.2e-7


def test_closed_form_bounds():
    assert mc.doeblin_tv_bound(1.0 / 3.0, 2) == pytest.approx(4.0 / 9.0)
    assert mc.imh_doeblin_epsilon("cosine") == pytest.approx(2.0 / 3.0)
    # W1 bound: alpha^t (m + sqrt(p)).
    assert mc.gaussian_w1_bound(1.0, 4, 0.5, 3) == pytest.approx(0.125 * 3.0)
    assert mc.gaussian_tv_bound(1.0, 4, 0.5, 0) == 1.0
    assert mc.dm_tv_bound(1.0, 10, 0.5, 4.0, 10**6) >= mc.gaussian_tv_bound(math.sqrt(10), 10, 0.5, 10**6)
    assert mc.gaussian_tv_mixing_time(10.0, 10, 0.5, 0.01) >= 1
    assert mc.normal_cdf(-0.5) == pytest.approx(0.30853753872598689636, rel=1e-15)


def test_grids_and_spectral_quantities():
    grid = mc.discretize_imh("cosine", 200)
    assert grid.size == 200 and grid.reversible
    assert grid.matrix.shape == (200, 200)
    assert mc.operator_norm(grid) == pytest.approx(1.0 / 3.0, abs=1e-3)

    g = mc.discretize_gaussian1d(0.5, 60)
    assert mc.operator_norm(g) == pytest.approx(0.5, abs=1e-6)
    assert mc.rayleigh_lower(g, g.points) == pytest.approx(0.5, abs=1e-6)

    two = mc.GridChain.make([0.0, 1.0], [0.6, 0.4], [[0.8, 0.2], [0.3, 0.7]])
    phi, subset = mc.conductance_exact(two)
    assert phi == pytest.approx(0.5)
    assert mc.spectral_gap(two) == pytest.approx(0.5)
    lo, hi = mc.cheeger_bracket(phi)
    assert lo - 1e-12 <= mc.spectral_gap(two) <= hi + 1e-12
    assert len(subset) == 2

    mu = [1.0] + [0.0] * 199
    later = mc.propagate(grid, mu, 3)
    assert mc.l2_distance(grid, later) <= mc.l2_distance(grid, mu) * mc.operator_norm(grid) ** 3 + 1e-10
    assert 2.0 * mc.tv_distance(grid, later) <= mc.l2_distance(grid, later) + 1e-12


def test_isoperimetric_and_rwmh():
    assert mc.gaussian_norm_upper_iso(0.5) == pytest.approx(mc.gaussian_norm_upper_iso_closed_form(0.5), rel=1e-12)
    assert mc.rwmh_norm_lower(10, 1.0) == 0.96875
    v = mc.sigma_star(100) ** 2
    assert 1.0 / 100 <= v <= 2.0 * math.log(100) / 100
    assert mc.operator_norm(mc.discretize_rwmh1d(1.0, 100)) <= 1.0 + 1e-12


def test_coupling_simulations():
    crn = mc.simulate_crn(2, 0.5, [1.0, 0.0], [0.0, 0.0], 5, 100, seed=1, threads=2)
    assert crn["mean_psi"][5] == pytest.approx(0.5**5, rel=1e-12)
    assert crn["se_psi"][5] == 0.0
    one_shot = mc.simulate_crn_one_shot(2, 0.5, [1.0, 1.0], 5, 2000, seed=2)
    assert len(one_shot["p_unequal"]) == 6
    assert one_shot["p_unequal"][0] == 1.0
    dbl = mc.simulate_doeblin_imh("cosine", 0.5, 4, 4000, seed=3)
    assert dbl["p_unequal"][4] - 3 * dbl["se_unequal"][4] <= mc.doeblin_tv_bound(2.0 / 3.0, 4)


def test_configs(tmp_path):
    assert "norm_bracket" in mc.method_names()
    with pytest.raises(ValueError, match="chain.alpha"):
        mc.validate_config('{"chain": {"family": "gaussian", "p": 2, "alpha": 2}, "analyses": []}')
    text = json.dumps(
        {
            "chain": {"family": "imh", "density": "cosine"},
            "analyses": [{"method": "doeblin_tv_bound", "t_max": 3}],
            "output": {"formats": ["csv", "json"]},
        }
    )
    mc.validate_config(text)
    report = json.loads(mc.run_config(text, str(tmp_path)))
    assert report["results"][0]["curves"][0]["value"][3] == pytest.approx((1.0 / 3.0) ** 3)
    assert (tmp_path / "report.json").exists()


def test_reproduction_config_validates():
    mc.validate_config((SOURCE_DIR / "configs" / "gaussian_p10.json").read_text())
