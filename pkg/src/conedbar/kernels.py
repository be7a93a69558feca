"""Singularity-subtracted Cauchy sums with a compiled and a numpy backend.

The compiled kernel is used when it was built and ``CONEDBAR_PURE`` is unset.
"""
import os

import numpy as np

try:
    from ._ckernels import cauchy_sum as _cauchy_sum_ext
except ImportError:  # extension not built
    _cauchy_sum_ext = None

_CHUNK_BYTES = 64 * 2**20


def backend():
    if _cauchy_sum_ext is None or os.environ.get("CONEDBAR_PURE"):
        return "numpy"
    return "cython"


def cauchy_sum_numpy(nodes, weights, values, targets, target_values, tol=1e-13):
    """out[i, k] = sum_j w_j (values[j, k] - target_values[i, k]) / (targets[i] - nodes[j])."""
    m = targets.shape[0]
    out = np.empty((m, values.shape[1]), dtype=complex)
    rows = max(1, _CHUNK_BYTES // (16 * max(nodes.shape[0], 1)))
    for lo in range(0, m, rows):
        a = targets[lo:lo + rows]
        d = a[:, None] - nodes[None, :]
        near = np.abs(d) <= tol
        d[near] = 1.0
        kern = weights[None, :] / d
        kern[near] = 0.0
        out[lo:lo + rows] = kern @ values - kern.sum(axis=1)[:, None] * target_values[lo:lo + rows]
    return out


def cauchy_sum(nodes, weights, values, targets, target_values, tol=1e-13):
    """Dispatch to the selected backend; all arrays are coerced to contiguous complex/float."""
    nodes = np.ascontiguousarray(nodes, dtype=complex).ravel()
    weights = np.ascontiguousarray(weights, dtype=float).ravel()
    values = np.ascontiguousarray(values, dtype=complex)
    if values.ndim == 1:
        values = values[:, None]
    targets = np.ascontiguousarray(targets, dtype=complex).ravel()
    target_values = np.ascontiguousarray(target_values, dtype=complex)
    if target_values.ndim == 1:
        target_values = target_values[:, None]
    target_values = np.ascontiguousarray(np.broadcast_to(target_values, (targets.size, values.shape[1])))
    if nodes.size == 0:
        raise ValueError("empty quadrature grid")
    if backend() == "cython":
        return np.asarray(_cauchy_sum_ext(nodes, weights, values, targets, target_values, float(tol)))
    return cauchy_sum_numpy(nodes, weights, values, targets, target_values, tol)
