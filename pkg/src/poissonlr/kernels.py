"""Kernel selection: the compiled extension when built, else pure Python.

Set ``POISSONLR_PURE=1`` to force the fallback.
"""

import os

BACKEND = "python"

if not os.environ.get("POISSONLR_PURE"):
    try:
        from poissonlr._ckernels import (  # type: ignore[no-redef]
            binomial_row, poly_add, poly_diff, poly_mul, poly_scale, poly_sub,
            weyl_pairs,
        )
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from poissonlr._kernels_py import (  # noqa: F401
        binomial_row, poly_add, poly_diff, poly_mul, poly_scale, poly_sub,
        weyl_pairs,
    )

from poissonlr._kernels_py import FIELD, MASK  # noqa: E402,F401
