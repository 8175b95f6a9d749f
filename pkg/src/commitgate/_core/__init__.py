"""Likelihood kernel backend selection.

The compiled extension is used when it built successfully; otherwise the
numpy fallback takes over with identical semantics. Set the environment
variable COMMITGATE_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import logging
import os

from . import _purepy

log = logging.getLogger(__name__)

PURE_PYTHON_ENV_VAR = "COMMITGATE_PURE_PYTHON"

if os.environ.get(PURE_PYTHON_ENV_VAR, "").strip() not in ("", "0"):
    _impl = _purepy
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _purepy
        log.info("compiled kernels unavailable; using the pure-Python backend")

cox_loglik_grad_info = _impl.cox_loglik_grad_info
pwe_loglik_grad_info = _impl.pwe_loglik_grad_info
BACKEND = _impl.BACKEND
USING_COMPILED = BACKEND == "compiled"


def backend_name() -> str:
    return BACKEND
