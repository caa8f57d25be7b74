"""Finite-difference Schroedinger eigensolver used as an independent check.

H = -hbar^2 d^2/dx^2 + V (m = 1/2) on the grid points of ``V`` with Dirichlet
walls one spacing beyond each end, discretized with the 3-point Laplacian.
Eigenvalues come from Sturm-sequence bisection on the symmetric tridiagonal
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .grid import GridFunction
from .sicheck import SpectrumReport

__all__ = ["DiscretizedHamiltonian", "discretize", "count_below", "eigen_lowest",
           "compare_spectra", "solve"]

MIN_POINTS = 50


@dataclass(frozen=True)
class DiscretizedHamiltonian:
    x0: float
    dx: float
    diagonal: np.ndarray
    offdiag: np.ndarray

    @property
    def n(self):
        return len(self.diagonal)

    def dense(self):
        return np.diag(self.diagonal) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def gershgorin(self):
        off = np.zeros(self.n)
        off[:-1] += np.abs(self.offdiag)
        off[1:] += np.abs(self.offdiag)
        return float(np.min(self.diagonal - off)), float(np.max(self.diagonal + off))


def discretize(V: GridFunction, hbar: float) -> DiscretizedHamiltonian:
    if len(V) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} grid points, got {len(V)}")
    k = hbar * hbar / (V.dx * V.dx)
    diag = V.values + 2.0 * k
    off = np.full(len(V) - 1, -k)
    return DiscretizedHamiltonian(V.x0, V.dx, diag, off)


def count_below(h: DiscretizedHamiltonian, sigma: float) -> int:
    """Number of eigenvalues strictly below ``sigma`` (Sturm sequence count)."""
    d = h.diagonal.tolist()
    e2 = (h.offdiag * h.offdiag).tolist()
    return _sturm(d, e2, sigma)


def _sturm(d, e2, sigma):
    tiny = 1e-300
    count = 0
    q = d[0] - sigma
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = d[i] - sigma - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def eigen_lowest(h: DiscretizedHamiltonian, k: int, tol: float = 1e-10) -> list:
    """The ``k`` smallest eigenvalues in ascending order, each bracketed to ``tol``."""
    if not 0 < k < h.n:
        raise ValueError(f"need 0 < k < n = {h.n}, got k = {k}")
    d = h.diagonal.tolist()
    e2 = (h.offdiag * h.offdiag).tolist()
    lo0, hi0 = h.gershgorin()
    # every count refines the brackets of all requested levels
    lo = [lo0] * k
    hi = [hi0] * k
    out = []
    for j in range(k):
        while hi[j] - lo[j] > tol:
            mid = 0.5 * (lo[j] + hi[j])
            c = _sturm(d, e2, mid)
            for m in range(j, k):
                if c > m:
                    hi[m] = min(hi[m], mid)
                else:
                    lo[m] = max(lo[m], mid)
        out.append(0.5 * (lo[j] + hi[j]))
    return out


def compare_spectra(analytic: SpectrumReport, numeric, tol: float) -> SpectrumReport:
    """Fill oracle energies and per-level deltas over the bound levels."""
    n = min(analytic.bound_count, len(numeric))
    deltas = [float(numeric[i] - analytic.energies[i]) for i in range(n)]
    warnings = list(analytic.warnings)
    if len(numeric) < analytic.bound_count:
        warnings.append(f"oracle returned {len(numeric)} levels for {analytic.bound_count} bound states")
    return replace(analytic, oracle=[float(v) for v in numeric], deltas=deltas, tol=tol,
                   warnings=warnings)


def solve(V: GridFunction, hbar: float, k: int) -> list:
    """Shortcut: lowest ``k`` eigenvalues of -hbar^2 d^2/dx^2 + V."""
    return eigen_lowest(discretize(V, hbar), k)
