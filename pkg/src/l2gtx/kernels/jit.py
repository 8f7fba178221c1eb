"""Numba-compiled twins of the reference kernels.

The reference functions are written to be nopython-compatible, so the JIT
variants are just `njit` applied to the same code objects. `cache=True`
persists compiled kernels to disk, which keeps repeat CLI runs fast.
"""

from numba import njit

from . import reference as _ref

_jit = njit(cache=True, fastmath=False)

dtw_band = _jit(_ref.dtw_band)
assign_to_centroids = _jit(_ref.assign_to_centroids)
silhouette_mean = _jit(_ref.silhouette_mean)
average_linkage = _jit(_ref.average_linkage)
