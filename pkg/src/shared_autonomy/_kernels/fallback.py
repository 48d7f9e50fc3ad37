"""Pure-numpy value iteration sweeps. Reference implementation; the compiled
extension in native.pyx must match this bit-for-bit in semantics (same update
order, same stopping rule)."""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def hard_vi(values, costs, absorbing, idx, wts, tol, max_sweeps):
    """Jacobi value iteration for the hard (min) Bellman backup.

    values: (C,) float64, updated in place.
    costs: (K, C) per-input per-cell step cost.
    absorbing: (C,) bool, cells pinned to zero.
    idx, wts: (K, C, J) interpolation corners and weights for the next state
              reached from each cell under each input.
    Returns (sweeps_used, final_residual).
    """
    absorbing = np.asarray(absorbing).astype(bool)
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        cont = (wts * values[idx]).sum(axis=2)
        new = (costs + cont).min(axis=0)
        new[absorbing] = 0.0
        resid = float(np.abs(new - values).max())
        values[:] = new
        if resid < tol:
            return sweep, resid
    return max_sweeps, resid


def soft_vi(values, costs, absorbing, idx, wts, tol, max_sweeps):
    """Jacobi value iteration for the soft-minimum Bellman backup
    (negative log-sum-exp over inputs, shifted by the minimum for stability)."""
    absorbing = np.asarray(absorbing).astype(bool)
    resid = np.inf
    for sweep in range(1, max_sweeps + 1):
        q = costs + (wts * values[idx]).sum(axis=2)
        m = q.min(axis=0)
        new = m - np.log(np.exp(m - q).sum(axis=0))
        new[absorbing] = 0.0
        resid = float(np.abs(new - values).max())
        values[:] = new
        if resid < tol:
            return sweep, resid
    return max_sweeps, resid
