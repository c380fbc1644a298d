import numpy as np
import pytest

from lckverify.errors import DegeneracyError, DomainError, StructureError
from lckverify.fields import Field
from lckverify.lck import (Geometry, LckStructure, Tolerances, check_gauduchon, check_holomorphic, check_killing,
                           check_lck, check_potential, check_vaisman, lee_form, make_verdict, validate_structure)
from lckverify.models import DEFAULT_A, sample_points
from lckverify import tensors as tn

PTS = sample_points(2, DEFAULT_A, 32, seed=11)


def test_verdict_aggregation():
    v = make_verdict("x", [1e-3, 5e-3, 2e-3], 1e-2, np.arange(6.0).reshape(3, 2))
    assert v.passed and v.max_residual == 5e-3 and v.witness == (2.0, 3.0)
    assert v.mean_residual == pytest.approx(8e-3 / 3)
    bad = make_verdict("x", [np.nan, 0.0], 1.0, np.zeros((2, 2)))
    assert not bad.passed and bad.max_residual == float("inf")
    d = v.as_dict("anchor")
    assert list(d)[:3] == ["id", "paper_anchor", "max_residual"] and d["pass"] is True


def test_tolerance_ladder():
    assert Tolerances.scaled(1e-9, "ad") == 1e-9
    assert Tolerances.scaled(1e-9, "fd") == pytest.approx(1e-7)


def test_predicates_hopf(hopf2):
    for check in (check_lck, check_vaisman, check_gauduchon, check_potential, check_holomorphic, check_killing):
        assert check(hopf2, PTS).passed, check.__name__


def test_predicates_deformed(deformed2):
    geo = Geometry(deformed2, PTS)
    assert check_lck(deformed2, geo).passed
    assert check_holomorphic(deformed2, geo).passed
    assert check_killing(deformed2, geo, X=geo.JT).passed
    for check in (check_vaisman, check_gauduchon, check_potential, check_killing):
        v = check(deformed2, geo)
        assert not v.passed and v.max_residual > 0.01, check.__name__


def test_flat_all_zero(flat2):
    geo = Geometry(flat2, PTS)
    assert check_lck(flat2, geo).max_residual == 0.0
    assert check_vaisman(flat2, geo).max_residual == 0.0


def test_lee_form_recovery(deformed2):
    geo = Geometry(deformed2, PTS)
    rec = lee_form(geo.g, geo.J, 2, geo.ginv)
    np.testing.assert_allclose(rec.packed.val, geo.theta.packed.val, atol=1e-13)


def test_hopf_delta_theta_zero(hopf2):
    geo = Geometry(hopf2, PTS)
    assert np.abs(geo.delta_theta.val).max() < 1e-10


def test_validate_structure_rejects_bad_metric(hopf2):
    J = hopf2.J
    bad_g = Field("metric", _scaled_metric, 4, name="g")
    s = LckStructure("bad", 2, bad_g, J, hopf2.omega, hopf2.theta)
    with pytest.raises(StructureError):
        validate_structure(s, PTS)
    neg = Field("metric", lambda x: _scaled_metric(x, -1.0), 4)
    with pytest.raises((DegeneracyError, StructureError)):
        validate_structure(LckStructure("neg", 2, neg, J, hopf2.omega, hopf2.theta), PTS)


def _scaled_metric(x, sign=1.0):
    from lckverify.jets import constant_jet
    m = np.diag([1.0, 2.0, 1.0, 1.0]) * sign
    return constant_jet(np.broadcast_to(m, (x.npoints, 4, 4)).copy(), 4, x.order)


def test_punctured_fields_reject_origin(hopf2):
    with pytest.raises(DomainError):
        hopf2.g.jet_eval(np.zeros((1, 4)))


def test_validate_reports(hopf2):
    out = validate_structure(hopf2, PTS)
    assert out["J_squared"] == 0.0 and out["min_eigenvalue"] > 0
    assert tn.check_compatible(hopf2.g.value(PTS), hopf2.J.value(PTS)) < 1e-15
