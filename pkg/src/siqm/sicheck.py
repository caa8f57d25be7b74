"""Shape-invariance residuals and the analytic spectrum E_n = g(a + n hbar) - g(a)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import symexpr as sx
from .catalog import SuperpotentialEntry
from .grid import Grid, PoleError

__all__ = ["SICheckReport", "SpectrumReport", "si_residual", "analytic_spectrum",
           "continuum_threshold", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


@dataclass
class SICheckReport:
    entry: str
    a: float
    hbar: float
    x: np.ndarray
    residual: np.ndarray
    expected_shift: float
    tol: float = 1e-10

    @property
    def spread(self):
        return float(self.residual.max() - self.residual.min())

    @property
    def inferred_shift(self):
        return float(self.residual.mean())

    @property
    def passed(self):
        return (
            self.spread < self.tol * (1 + abs(self.inferred_shift))
            and abs(self.inferred_shift - self.expected_shift) < self.tol
        )

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "si_check",
            "entry": self.entry,
            "a": self.a,
            "hbar": self.hbar,
            "grid": {"xmin": float(self.x[0]), "xmax": float(self.x[-1]), "n": len(self.x)},
            "spread": self.spread,
            "inferred_shift": self.inferred_shift,
            "expected_shift": self.expected_shift,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass
class SpectrumReport:
    entry: str
    a: float
    hbar: float
    energies: list
    bound_count: int
    threshold: float
    oracle: list | None = None
    deltas: list | None = None
    tol: float | None = None
    warnings: list = field(default_factory=list)

    @property
    def bound_energies(self):
        return self.energies[: self.bound_count]

    @property
    def passed(self):
        if self.deltas is None:
            return None
        return all(abs(d) < self.tol for d in self.deltas)

    def to_json(self):
        out = {
            "schema_version": SCHEMA_VERSION,
            "kind": "spectrum",
            "entry": self.entry,
            "a": self.a,
            "hbar": self.hbar,
            "analytic": list(self.energies),
            "bound_count": self.bound_count,
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
        }
        if self.oracle is not None:
            out.update(oracle=list(self.oracle), deltas=list(self.deltas), tol=self.tol,
                       passed=self.passed)
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


def si_residual(entry: SuperpotentialEntry, a, hbar, grid: Grid, tol=1e-10) -> SICheckReport:
    """R(x) = W^2(x,a) + hbar W'(x,a) - W^2(x,a+hbar) + hbar W'(x,a+hbar).

    Shape invariance means R is the constant g(a+hbar) - g(a).
    """
    x = grid.x
    dw = entry.derivative("x")
    try:
        w0 = sx.evaluate(entry.W, x, entry.binding(a, hbar))
        d0 = sx.evaluate(dw, x, entry.binding(a, hbar))
        w1 = sx.evaluate(entry.W, x, entry.binding(a + hbar, hbar))
        d1 = sx.evaluate(dw, x, entry.binding(a + hbar, hbar))
    except sx.DomainError as err:
        raise PoleError(f"W of {entry.name} is singular on the grid", err.where) from err
    residual = w0 * w0 + hbar * d0 - w1 * w1 + hbar * d1
    expected = entry.g_at(a + hbar) - entry.g_at(a)
    return SICheckReport(entry.name, a, hbar, x, residual, expected, tol)


def _limit_at(entry, a, hbar, side):
    """lim W^2 at one infinite end (None if it diverges).

    A value already settled between |x| = 15 and 20 (exponential approach)
    is taken as is; otherwise two Richardson steps in 1/|x| over
    |x| = 10, 20, 40 remove algebraic tails.
    """
    def w2(x):
        try:
            v = sx.evaluate(entry.W, side * x, entry.binding(a, hbar))
        except sx.DomainError:
            return math.nan
        return v * v

    v10, v15, v20 = w2(10.0), w2(15.0), w2(20.0)
    if not all(map(math.isfinite, (v10, v15, v20))):
        return None
    scale = 1.0 + abs(v20)
    if abs(v20 - v15) < 1e-4 * scale:
        return v20
    v40 = w2(40.0)
    if not math.isfinite(v40):
        return None
    d1, d2 = abs(v20 - v10), abs(v40 - v20)
    if d2 >= d1 or d1 > 0.5 * scale:
        return None
    r1 = 2 * v20 - v10
    r2 = 2 * v40 - v20
    return (4 * r2 - r1) / 3


def continuum_threshold(entry: SuperpotentialEntry, a, hbar=None) -> float:
    """Smallest finite limit of W^2 at the infinite ends of the domain."""
    limits = [_limit_at(entry, a, hbar, s) for s in entry.domain.infinite_ends]
    finite = [v for v in limits if v is not None]
    return min(finite) if finite else math.inf


def analytic_spectrum(entry: SuperpotentialEntry, a, hbar, n_max: int, bound_rtol=1e-6) -> SpectrumReport:
    """E_n = g(a + n hbar) - g(a) for n = 0..n_max.

    Levels count as bound while they increase and stay strictly below the
    continuum threshold; a level sitting on the threshold is not bound.
    """
    warnings = []
    energies = []
    g0 = entry.g_at(a)
    for n in range(n_max + 1):
        try:
            energies.append(entry.g_at(a + n * hbar) - g0)
        except sx.DomainError:
            warnings.append(f"g undefined at a = {a + n * hbar:g}; levels from n = {n} omitted")
            break
    threshold = continuum_threshold(entry, a, hbar)
    margin = bound_rtol * (1 + abs(threshold)) if math.isfinite(threshold) else 0.0
    count = 0
    for n, e in enumerate(energies):
        if not e < threshold - margin:
            break
        if n and not e > energies[n - 1]:
            break
        count += 1
    return SpectrumReport(entry.name, a, hbar, energies, count, threshold, warnings=warnings)
