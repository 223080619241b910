import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pytest

from stablehit import hitting
from stablehit.hitting import (CANDIDATE_1, CANDIDATE_ASIN, AmbiguousCalibrationError, SurvivalQuery,
                               constant_candidates, hitting_density, laplace_residual, paired_survival,
                               resolve_constant, survival, survival_curve, survival_direct,
                               survival_quotient_route, survival_with_error)
from stablehit.model import make_model, model_from_theta
from stablehit.testfn import explog

ORACLE = json.loads((Path(__file__).parent / "fixtures" / "oracle_values.json").read_text())
MODEL = make_model(1.5, 0.55)


def _s(m, x, t):
    return survival(SurvivalQuery(m, x, t))


def test_matches_frozen_brute_force_oracle():
    q = SurvivalQuery(model_from_theta(1.5, 0.0), 1.0, 1.0)
    value, err = survival_with_error(q)
    assert value == pytest.approx(ORACLE["survival_alpha1.5_theta0_x1_t1"], abs=1e-10)
    assert 0 <= err < 1e-8


def test_small_time_limit():
    for x in (1.0, -1.0, 3.0):
        assert _s(MODEL, x, 1e-8 * abs(x) ** MODEL.alpha) == pytest.approx(1.0, abs=1e-6)


def test_direct_route_agrees():
    for x in (1.0, -1.0, 0.3):
        q = SurvivalQuery(MODEL, x, 1.0)
        assert survival_direct(q) == pytest.approx(survival(q), rel=1e-10)


@pytest.mark.parametrize("x", [1.0, -1.0])
def test_density_is_minus_time_derivative(x):
    h = 1e-4
    fd = -(_s(MODEL, x, 1 + h) - _s(MODEL, x, 1 - h)) / (2 * h)
    assert hitting_density(SurvivalQuery(MODEL, x, 1.0)) == pytest.approx(fd, rel=1e-6)


def test_density_scaling():
    a = MODEL.alpha
    c = 2.0
    lhs = hitting_density(SurvivalQuery(MODEL, c * 0.8, c ** a * 1.3))
    assert lhs == pytest.approx(c ** (-a) * hitting_density(SurvivalQuery(MODEL, 0.8, 1.3)), rel=1e-9)


def test_density_mass_balance():
    t_end = 10.0
    # Gauss-Legendre in log t; the stretch below 1e-8 carries mass 1 - S(1e-8) ~ 0
    u, w = np.polynomial.legendre.leggauss(200)
    lo, hi = math.log(1e-8), math.log(t_end)
    lt = 0.5 * (hi - lo) * u + 0.5 * (hi + lo)
    t = np.exp(lt)
    curve = survival_curve(MODEL, 1.0, t, kind="density")
    mass = float(np.sum(0.5 * (hi - lo) * w * t * curve.values))
    assert mass + _s(MODEL, 1.0, t_end) == pytest.approx(1.0, abs=1e-3)


def test_curve_shapes_and_monotonicity():
    t = np.geomspace(1e-3, 100.0, 25)
    curve = survival_curve(MODEL, 1.0, t)
    assert curve.values.shape == t.shape and np.all(curve.abs_err >= 0)
    assert np.all((curve.values > 0) & (curve.values < 1))
    assert np.all(np.diff(curve.values) < 0)
    assert curve.constant_used == resolve_constant(MODEL)


def test_symmetric_case_is_even_in_x():
    m = model_from_theta(1.5, 0.0)
    for x in (0.4, 2.0):
        assert _s(m, x, 1.0) == pytest.approx(_s(m, -x, 1.0), rel=1e-12)


def test_quotient_route_matches_pairing():
    g = explog("+", 1.0)
    quotient = float(survival_quotient_route(g, MODEL, 1.0)[0])
    assert quotient == pytest.approx(paired_survival(MODEL, g, 1.0, resolve_constant(MODEL)), rel=1e-4)


def test_laplace_identity_with_selected_constant():
    c = resolve_constant(MODEL)
    assert laplace_residual(MODEL, 1.0, 1.0, c) < 1e-10
    assert laplace_residual(MODEL, 1.0, 1.0, constant_candidates(MODEL)[CANDIDATE_1]) > 1e-2


def test_constant_modes():
    cands = constant_candidates(MODEL)
    a, th = MODEL.alpha, MODEL.theta
    assert cands[CANDIDATE_ASIN] == pytest.approx(a * math.sin(math.pi / a) / (math.pi * math.cos(th)), rel=1e-15)
    assert resolve_constant(MODEL, CANDIDATE_1) == cands[CANDIDATE_1]
    with pytest.raises(ValueError):
        resolve_constant(MODEL, "other")
    with pytest.raises(ValueError):
        survival(SurvivalQuery(MODEL, 1.0, 1.0, constant_mode="other"))


def test_stored_calibration_report_is_consistent():
    report = json.loads(hitting.CALIBRATION_FILE.read_text())
    assert report["selected"] == CANDIDATE_ASIN
    body = {k: v for k, v in report.items() if k != "sha256"}
    assert hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest() == report["sha256"]
    assert [k for k, v in report["candidates"].items() if v["passes"]] == [CANDIDATE_ASIN]


def test_missing_calibration_is_refused(monkeypatch, tmp_path):
    monkeypatch.setattr(hitting, "CALIBRATION_FILE", tmp_path / "absent.json")
    with pytest.raises(AmbiguousCalibrationError):
        resolve_constant(MODEL)
    # explicit candidates stay usable without the report
    assert resolve_constant(MODEL, CANDIDATE_ASIN) > 0
