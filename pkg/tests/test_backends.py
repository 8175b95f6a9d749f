"""Agreement between the compiled kernels and the pure-Python fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from commitgate._core import PURE_PYTHON_ENV_VAR, _purepy, backend_name

try:
    from commitgate._core import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(
    _speedups is None, reason="compiled extension not built"
)


def cox_inputs(seed, n=60, p=4):
    rng = np.random.default_rng(seed)
    start = np.where(rng.random(n) < 0.25, rng.uniform(0.0, 2.0, n), 0.0)
    stop = start + np.ceil(rng.uniform(0.5, 9.0, size=n))
    y = (rng.random(n) < 0.45).astype(float)
    if y.sum() < 1:
        y[0] = 1.0
    x = rng.normal(size=(n, p))
    eta = x @ rng.normal(scale=0.4, size=p)
    return start, stop, y, x, eta


def pwe_inputs(seed, n=80, p=3, k=4):
    rng = np.random.default_rng(seed)
    exposure = rng.uniform(0.1, 2.0, size=n)
    event = (rng.random(n) < 0.3).astype(float)
    interval = rng.integers(0, k, size=n)
    x = rng.normal(size=(n, p))
    a = rng.normal(scale=0.5, size=k)
    beta = rng.normal(scale=0.4, size=p)
    return exposure, event, interval, x, a, beta


@needs_compiled
class TestKernelAgreement:
    def test_cox_kernels_agree(self):
        for seed in range(5):
            for efron in (True, False):
                args = cox_inputs(seed)
                ll_c, g_c, i_c = _speedups.cox_loglik_grad_info(*args, efron)
                ll_p, g_p, i_p = _purepy.cox_loglik_grad_info(*args, efron)

                assert ll_c == pytest.approx(ll_p, rel=1e-12), (seed, efron)
                assert np.allclose(g_c, g_p, rtol=1e-12, atol=1e-12)
                assert np.allclose(i_c, i_p, rtol=1e-12, atol=1e-12)

    def test_pwe_kernels_agree(self):
        for seed in range(5):
            args = pwe_inputs(seed)
            ll_c, g_c, i_c = _speedups.pwe_loglik_grad_info(*args)
            ll_p, g_p, i_p = _purepy.pwe_loglik_grad_info(*args)

            assert ll_c == pytest.approx(ll_p, rel=1e-12), seed
            assert np.allclose(g_c, g_p, rtol=1e-12, atol=1e-12)
            assert np.allclose(i_c, i_p, rtol=1e-12, atol=1e-12)


class TestBackendSelection:
    def test_backend_names(self):
        assert _purepy.BACKEND == "pure-python"
        assert backend_name() in ("compiled", "pure-python")
        if _speedups is not None:
            assert _speedups.BACKEND == "compiled"
            assert backend_name() == "compiled"

    def test_env_var_forces_pure_python(self):
        env = dict(os.environ)
        env[PURE_PYTHON_ENV_VAR] = "1"
        out = subprocess.run(
            [
                sys.executable,
                "-c",
                "from commitgate._core import backend_name; print(backend_name())",
            ],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "pure-python"

    def test_env_var_zero_keeps_the_default(self):
        env = dict(os.environ)
        env[PURE_PYTHON_ENV_VAR] = "0"
        out = subprocess.run(
            [
                sys.executable,
                "-c",
                "from commitgate._core import backend_name; print(backend_name())",
            ],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        want = "compiled" if _speedups is not None else "pure-python"
        assert out.stdout.strip() == want


@needs_compiled
def test_full_fit_identical_across_backends():
    # the demo-scale fit must converge to the same estimates either way
    from commitgate.survival.cox import fit_cox

    start, stop, y, x, _ = cox_inputs(11, n=80)
    fit = fit_cox(start, stop, y, x)

    code = (
        "import numpy as np\n"
        "from commitgate.survival.cox import fit_cox\n"
        "rng = np.random.default_rng(11)\n"
        "n = 80\n"
        "start = np.where(rng.random(n) < 0.25, rng.uniform(0.0, 2.0, n), 0.0)\n"
        "stop = start + np.ceil(rng.uniform(0.5, 9.0, size=n))\n"
        "y = (rng.random(n) < 0.45).astype(float)\n"
        "x = rng.normal(size=(n, 4))\n"
        "eta = x @ rng.normal(scale=0.4, size=4)\n"
        "fit = fit_cox(start, stop, y, x)\n"
        "print(repr(list(fit.beta)))\n"
        "print(fit.iterations, fit.converged)\n"
    )
    env = dict(os.environ)
    env[PURE_PYTHON_ENV_VAR] = "1"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    beta_line, status_line = out.stdout.strip().splitlines()
    pure_beta = eval(beta_line)  # repr of a list of floats from our own code
    iters, converged = status_line.split()

    assert converged == "True"
    assert int(iters) == fit.iterations
    assert np.allclose(pure_beta, fit.beta, rtol=1e-10, atol=1e-12)
