"""Kernel backend selection.

The numba backend is used when available; set ``L2GTX_NUMBA=0`` to force the
pure-numpy reference kernels (same code, interpreted). Both backends produce
bit-identical results; see ``benchmarks/bench_kernels.py`` for the speed gap.
"""

import os

_FALSY = {"0", "false", "off", "no"}


def _numba_wanted() -> bool:
    return os.environ.get("L2GTX_NUMBA", "1").strip().lower() not in _FALSY


if _numba_wanted():
    try:
        from .jit import (  # noqa: F401
            assign_to_centroids,
            average_linkage,
            dtw_band,
            silhouette_mean,
        )

        BACKEND = "numba"
    except ImportError:
        from .reference import (  # noqa: F401
            assign_to_centroids,
            average_linkage,
            dtw_band,
            silhouette_mean,
        )

        BACKEND = "numpy"
else:
    from .reference import (  # noqa: F401
        assign_to_centroids,
        average_linkage,
        dtw_band,
        silhouette_mean,
    )

    BACKEND = "numpy"
