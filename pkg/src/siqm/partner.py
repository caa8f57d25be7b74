"""Partner potentials, ladder operators and the shape-invariant eigenfunctions.

Units follow m = 1/2, so H = -hbar^2 d^2/dx^2 + V with
V_-/+ = W^2 -/+ hbar W' and A^-/+ = +/- hbar d/dx + W.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import symexpr as sx
from .catalog import SuperpotentialEntry
from .grid import Grid, GridFunction, PoleError, derivative, trapezoid
from .sicheck import analytic_spectrum

__all__ = [
    "GridDomainError", "PoleError", "NotNormalizableError", "BoundStateError",
    "WavefunctionSet", "partner_potentials", "ground_state", "apply_A",
    "excited_states", "normalize", "fix_sign", "nodes", "superpotential_on",
]

COARSE_DX = 0.1

# 3-point Gauss-Legendre on [0, 1]
_GL_NODES = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


class GridDomainError(ValueError):
    pass


class NotNormalizableError(ValueError):
    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class BoundStateError(ValueError):
    pass


def _check_grid(entry, grid):
    if not entry.domain.contains([grid.xmin, grid.xmax]):
        raise GridDomainError(
            f"grid [{grid.xmin:g}, {grid.xmax:g}] leaves the domain {entry.domain.label} of {entry.name}"
        )


def _eval_on(expr, entry, x, a, hbar, what):
    try:
        return sx.evaluate(expr, x, entry.binding(a, hbar))
    except sx.DomainError as err:
        raise PoleError(f"{what} of {entry.name} is singular", err.where) from err


def superpotential_on(entry, a, hbar, grid: Grid):
    """W(x, a) sampled on ``grid``."""
    _check_grid(entry, grid)
    return GridFunction.on(grid, _eval_on(entry.W, entry, grid.x, a, hbar, "W"), "W", a=a, hbar=hbar)


def partner_potentials(entry: SuperpotentialEntry, a, hbar, grid: Grid):
    """Return ``(V_minus, V_plus)`` on ``grid`` using the analytic W'."""
    _check_grid(entry, grid)
    x = grid.x
    w = _eval_on(entry.W, entry, x, a, hbar, "W")
    dw = _eval_on(entry.derivative("x"), entry, x, a, hbar, "dW/dx")
    meta = {"entry": entry.name, "a": a, "hbar": hbar}
    return (
        GridFunction.on(grid, w * w - hbar * dw, "V_minus", **meta),
        GridFunction.on(grid, w * w + hbar * dw, "V_plus", **meta),
    )


def _cumulative_integral(entry, a, hbar, grid):
    x = grid.x
    dx = grid.dx
    pts = (x[:-1, None] + dx * _GL_NODES[None, :]).ravel()
    w = _eval_on(entry.W, entry, pts, a, hbar, "W").reshape(-1, 3)
    cells = dx * (w @ _GL_WEIGHTS)
    return np.concatenate(([0.0], np.cumsum(cells)))


def normalize(values, dx):
    values = np.asarray(values, dtype=float)
    norm = np.sqrt(trapezoid(values * values, dx))
    if not norm > 0:
        raise NotNormalizableError("zero function cannot be normalized")
    return values / norm, norm


def fix_sign(values, rel=1e-3):
    """Flip so the leftmost local maximum of |psi| is positive."""
    mag = np.abs(values)
    big = mag >= rel * mag.max()
    interior = np.zeros_like(big)
    interior[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:]) & big[1:-1]
    idx = np.flatnonzero(interior)
    i = idx[0] if len(idx) else int(np.argmax(mag))
    return values if values[i] >= 0 else -values


def nodes(gf: GridFunction, rel=1e-8):
    """x positions of sign changes, ignoring samples below ``rel`` * max|psi|."""
    v = gf.values
    x = gf.x
    keep = np.flatnonzero(np.abs(v) > rel * np.abs(v).max())
    out = []
    for i, j in zip(keep[:-1], keep[1:]):
        if np.sign(v[i]) != np.sign(v[j]):
            # the zero lies between the last kept sample and the next kept one
            k = i
            while k + 1 < j and np.sign(v[k + 1]) == np.sign(v[i]):
                k += 1
            x0, x1, y0, y1 = x[k], x[k + 1], v[k], v[k + 1]
            out.append(float(x0 - y0 * (x1 - x0) / (y1 - y0)))
    return out


def ground_state(entry: SuperpotentialEntry, a, hbar, grid: Grid, tail_tol=1e-6) -> GridFunction:
    """Normalized zero-mode of A^-: psi_0 = N exp(-(1/hbar) int W dx).

    The integral runs from the left grid edge (Gauss-Legendre per cell); the
    constant is absorbed by the normalization.  Raises
    :class:`NotNormalizableError` when psi_0 has not decayed to ``tail_tol``
    of its peak at either grid edge.
    """
    _check_grid(entry, grid)
    expo = -_cumulative_integral(entry, a, hbar, grid) / hbar
    psi = np.exp(expo - expo.max())
    failing = [side for side, v in (("left", psi[0]), ("right", psi[-1])) if v > tail_tol]
    if failing:
        raise NotNormalizableError(
            f"{entry.name}: ground state at a={a:g} is not normalizable; "
            f"|psi0| at the {' and '.join(failing)} edge is "
            f"{max(psi[0], psi[-1]):.3g} of its peak",
            tail=failing,
        )
    psi, _ = normalize(psi, grid.dx)
    w = _eval_on(entry.W, entry, grid.x, a, hbar, "W")
    residual = np.max(np.abs(hbar * derivative(psi, grid.dx) + w * psi))
    return GridFunction.on(
        grid, psi, "psi_0", entry=entry.name, a=a, hbar=hbar, energy=0.0,
        zero_mode_residual=float(residual),
    )


def apply_A(entry: SuperpotentialEntry, a, hbar, sign, psi: GridFunction) -> GridFunction:
    """Apply A^+ (sign '+': -hbar d/dx + W) or A^- (sign '-': hbar d/dx + W)."""
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    grid = psi.grid
    w = _eval_on(entry.W, entry, grid.x, a, hbar, "W")
    d = derivative(psi.values, psi.dx)
    out = (-hbar if sign == "+" else hbar) * d + w * psi.values
    meta = {"entry": entry.name, "a": a, "hbar": hbar, "operator": f"A{sign}"}
    if psi.dx > COARSE_DX:
        meta["warning"] = f"grid spacing {psi.dx:g} exceeds {COARSE_DX:g}; derivative may be inaccurate"
    return GridFunction(psi.x0, psi.dx, out, f"A{sign} {psi.label}".strip(), meta)


@dataclass
class WavefunctionSet:
    states: list
    energies: list
    tol: float = 1e-6
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, n):
        return self.states[n]

    def gram(self):
        m = np.array([s.values for s in self.states])
        dx = self.states[0].dx
        return trapezoid(m[:, None, :] * m[None, :, :], dx)

    def node_counts(self):
        return [len(nodes(s)) for s in self.states]


def excited_states(entry: SuperpotentialEntry, a, hbar, n_max: int, grid: Grid,
                   tol=1e-6) -> WavefunctionSet:
    """psi_0 ... psi_{n_max} of V_- via the raising chain.

    psi_n(a) is proportional to A+(a) A+(a+hbar) ... A+(a+(n-1)hbar) psi_0(a+n hbar).
    Each state is normalized by quadrature and given the sign convention of
    :func:`fix_sign`.  Levels at or above the bound-state limit raise
    :class:`BoundStateError`.
    """
    spectrum = analytic_spectrum(entry, a, hbar, n_max)
    if n_max >= spectrum.bound_count:
        e = spectrum.energies[spectrum.bound_count]
        raise BoundStateError(
            f"{entry.name}: level n={spectrum.bound_count} (E={e:g}) is not bound "
            f"(continuum threshold {spectrum.threshold:g}); its eigenfunction is not "
            f"square integrable"
        )
    states = []
    for n in range(n_max + 1):
        psi = ground_state(entry, a + n * hbar, hbar, grid)
        scale = 1.0
        for k in range(n - 1, -1, -1):
            psi = apply_A(entry, a + k * hbar, hbar, "+", psi)
            # |A+(a_k) phi|^2 = E_{n-k}(a_k) = g(a_n) - g(a_k) for normalized phi
            scale *= entry.g_at(a + n * hbar) - entry.g_at(a + k * hbar)
        values, norm = normalize(psi.values, grid.dx)
        values = fix_sign(values)
        gf = GridFunction.on(
            grid, values, f"psi_{n}", entry=entry.name, a=a, hbar=hbar,
            energy=spectrum.energies[n],
            chain_norm_ratio=float(norm / np.sqrt(scale)) if n else 1.0,
        )
        count = len(nodes(gf))
        if count != n:
            raise BoundStateError(f"psi_{n} has {count} nodes; refine the grid or widen it")
        states.append(gf)
    return WavefunctionSet(states, list(spectrum.energies[: n_max + 1]), tol)
