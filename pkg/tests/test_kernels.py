import os
import subprocess
import sys

import numpy as np
import pytest

from lckverify import _accel, _kernels
from lckverify.errors import DegeneracyError


def spd_batch(n, d, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, d, d))
    val = a @ np.swapaxes(a, 1, 2) + d * np.eye(d)
    grad = rng.normal(size=(n, d, d, d))
    grad = grad + np.swapaxes(grad, 1, 2)
    hess = rng.normal(size=(n, d, d, d, d))
    hess = hess + np.swapaxes(hess, -1, -2)
    return val, grad, hess


@pytest.mark.parametrize("order", [0, 1, 2])
def test_inv_jet_paths_agree(order):
    val, grad, hess = spd_batch(50, 4)
    args = (val, grad if order >= 1 else None, hess if order >= 2 else None)
    a = _kernels.inv_jet_np(*args)
    b = _kernels.inv_jet_nb(*args)
    for x, y in zip(a, b):
        if x is None:
            assert y is None
        else:
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-13)


def test_inv_jet_singular_both_paths():
    z = np.zeros((2, 3, 3))
    for fn in (_kernels.inv_jet_np, _kernels.inv_jet_nb):
        with pytest.raises(DegeneracyError):
            fn(z)


@pytest.mark.parametrize("n", [0, 1, 63, 64, 65, 1000, 4097])
def test_weighted_sum_bit_identical(n):
    rng = np.random.default_rng(n)
    v, w = rng.normal(size=n) * 1e3, rng.random(n)
    a = _kernels.weighted_sum_np(v, w)
    b = _kernels.weighted_sum_nb(v, w)
    assert a == b
    if n:
        assert a == pytest.approx(float(np.dot(v, w)), rel=1e-12, abs=1e-9)


def test_env_flag_disables_jit():
    code = "from lckverify import _accel, _kernels; print(_accel.USE_JIT, _kernels.inv_jet is _kernels.inv_jet_np)"
    env = dict(os.environ, LCKVERIFY_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]


def test_suite_identical_across_paths():
    code = ("import json; from lckverify.suite import run_suite; "
            "print(json.dumps(run_suite({'model': 'hopf-deformed'}, samples=16).to_dict()))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LCKVERIFY_DISABLE_JIT=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout)
    a, b = (__import__("json").loads(o) for o in outs)
    for ca, cb in zip(a["checks"], b["checks"]):
        assert ca["pass"] == cb["pass"]
        assert ca["max_residual"] == pytest.approx(cb["max_residual"], rel=1e-6, abs=1e-14)
    assert _accel.njit  # decorator importable either way
