"""Kernel selection: the compiled extension when it imports, else pure Python.

Set ``QASPAN_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("QASPAN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using pure Python")

BACKEND = "cython" if _compiled is not None else "python"
score_spans = (_compiled or _kernels_py).score_spans
score_spans_py = _kernels_py.score_spans
score_spans_compiled = _compiled.score_spans if _compiled is not None else None
