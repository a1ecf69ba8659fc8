"""Kernel backend selection.

The compiled Cython backend is used when available; set MATGAMES_PURE_PYTHON=1
to force the pure-python fallback.
"""

import os

if os.environ.get("MATGAMES_PURE_PYTHON") == "1":
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
alias_build = _impl.alias_build
alias_draw = _impl.alias_draw
alias_draw_batch = _impl.alias_draw_batch
tree_build = _impl.tree_build
tree_path_add = _impl.tree_path_add
tree_descend_dot = _impl.tree_descend_dot
