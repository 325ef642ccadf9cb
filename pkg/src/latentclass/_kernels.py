"""Inner loops of the EM iteration, with a numba and a pure-numpy implementation.

The backend is chosen once at import time from ``LATENTCLASS_BACKEND``
(``numba`` or ``numpy``; default ``numba``, falling back to numpy when numba
cannot be imported). Both implementations are always importable as
``numba_*`` / ``numpy_*`` so they can be compared directly.

All kernels take 0-based codes of shape (m, J) and log conditionals of shape
(R, J, K_max). Padding entries beyond K_j are never read.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def numpy_joint_log_density(codes, log_cond):
    m, n_ind = codes.shape
    out = np.zeros((m, log_cond.shape[0]))
    for j in range(n_ind):
        out += log_cond[:, j, codes[:, j]].T
    return out


def numpy_e_step(codes, log_cond, log_shares):
    """Return (posterior, row_log_density) for each response pattern."""
    log_joint = numpy_joint_log_density(codes, log_cond) + log_shares
    top = log_joint.max(axis=1)
    finite = np.isfinite(top)
    safe_top = np.where(finite, top, 0.0)
    with np.errstate(under="ignore"):
        scaled = np.exp(log_joint - safe_top[:, None])
    total = scaled.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        post = scaled / total[:, None]
        row_ll = np.where(finite, safe_top + np.log(total), -np.inf)
    return post, row_ll


def numpy_m_step_counts(codes, weighted_post, k_max):
    """counts[r, j, k] = sum_i weighted_post[i, r] * [codes[i, j] == k]."""
    n_class = weighted_post.shape[1]
    n_ind = codes.shape[1]
    counts = np.zeros((n_class, n_ind, k_max))
    eye = np.eye(k_max)
    for j in range(n_ind):
        counts[:, j, :] = weighted_post.T @ eye[codes[:, j]]
    return counts


if numba is not None:

    @numba.njit(cache=True)
    def numba_joint_log_density(codes, log_cond):
        m, n_ind = codes.shape
        n_class = log_cond.shape[0]
        out = np.zeros((m, n_class))
        for i in range(m):
            for r in range(n_class):
                acc = 0.0
                for j in range(n_ind):
                    acc += log_cond[r, j, codes[i, j]]
                out[i, r] = acc
        return out

    @numba.njit(cache=True)
    def numba_e_step(codes, log_cond, log_shares):
        m, n_ind = codes.shape
        n_class = log_cond.shape[0]
        post = np.empty((m, n_class))
        row_ll = np.empty(m)
        buf = np.empty(n_class)
        for i in range(m):
            top = -np.inf
            for r in range(n_class):
                acc = log_shares[r]
                for j in range(n_ind):
                    acc += log_cond[r, j, codes[i, j]]
                buf[r] = acc
                if acc > top:
                    top = acc
            if top == -np.inf:
                for r in range(n_class):
                    post[i, r] = np.nan
                row_ll[i] = -np.inf
                continue
            total = 0.0
            for r in range(n_class):
                buf[r] = np.exp(buf[r] - top)
                total += buf[r]
            for r in range(n_class):
                post[i, r] = buf[r] / total
            row_ll[i] = top + np.log(total)
        return post, row_ll

    @numba.njit(cache=True)
    def numba_m_step_counts(codes, weighted_post, k_max):
        m, n_ind = codes.shape
        n_class = weighted_post.shape[1]
        counts = np.zeros((n_class, n_ind, k_max))
        for i in range(m):
            for j in range(n_ind):
                k = codes[i, j]
                for r in range(n_class):
                    counts[r, j, k] += weighted_post[i, r]
        return counts

else:  # pragma: no cover
    numba_joint_log_density = numpy_joint_log_density
    numba_e_step = numpy_e_step
    numba_m_step_counts = numpy_m_step_counts


def _select_backend():
    requested = os.environ.get("LATENTCLASS_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"LATENTCLASS_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and numba is None:  # pragma: no cover
        return "numpy"
    return requested


BACKEND = _select_backend()

if BACKEND == "numba":
    joint_log_density = numba_joint_log_density
    e_step = numba_e_step
    m_step_counts = numba_m_step_counts
else:
    joint_log_density = numpy_joint_log_density
    e_step = numpy_e_step
    m_step_counts = numpy_m_step_counts
