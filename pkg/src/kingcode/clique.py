"""Clique search on orthogonality graphs.

The compiled ``_clique`` extension is used when it was built; otherwise the
pure-Python module with the same functions is used. Setting
``KINGCODE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _clique_py

if os.environ.get("KINGCODE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _clique_py
else:
    try:
        from . import _clique as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _clique_py

BACKEND = "compiled" if _impl is not _clique_py else "python"

max_clique = _impl.max_clique
greedy_clique = _impl.greedy_clique

__all__ = ["BACKEND", "max_clique", "greedy_clique"]
