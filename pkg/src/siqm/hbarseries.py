"""Order-by-order hbar expansion of the shape-invariance condition.

W(x, a, hbar) = sum_j hbar^j W_j(x, a).  For the extended Morse
superpotential the terms are known in closed form; this module builds
them, evaluates the residual of the order-j equation for any candidate set
of terms, and measures how the partial sums approach the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import symexpr as sx
from .catalog import make_extended_morse
from .symexpr import Expression

__all__ = [
    "SeriesTerm", "MissingTermError", "ConvergenceError", "w_term", "exact_terms",
    "order_equation", "pde_residual", "partial_sum", "partial_sum_error",
    "closed_form", "shifted_series", "convergence_ratio",
]

MORSE_KERNEL = "(alpha - a) - exp(-x)"
_BRACKET = "2 * P + Q * exp(-2 * x) - 2 * (alpha - a) * Q * exp(-x)"


class MissingTermError(ValueError):
    pass


class ConvergenceError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesTerm:
    order: int
    expr: Expression

    def __call__(self, x, a):
        return sx.evaluate(self.expr, x, {"a": a})


def w_term(j: int, P: float, Q: float, alpha: float) -> SeriesTerm:
    """The hbar^j coefficient of the extended Morse superpotential.

    W_0 is the Morse kernel, odd orders vanish and
    W_2k = (-Q)^(k-1) exp(-(2k-1) x) (2P + Q e^{-2x} - 2 (alpha - a) Q e^{-x}).
    """
    if j < 0:
        raise ValueError(f"order must be >= 0, got {j}")
    if j == 0:
        return SeriesTerm(0, sx.substitute(sx.parse(MORSE_KERNEL), {"alpha": alpha}))
    if j % 2:
        return SeriesTerm(j, sx.Const(0.0))
    k = j // 2
    bracket = sx.substitute(sx.parse(_BRACKET), {"P": P, "Q": Q, "alpha": alpha})
    decay = sx.func("exp", sx.mul(sx.Const(-(2 * k - 1)), sx.X))
    coeff = sx.Const((-Q) ** (k - 1))
    return SeriesTerm(j, sx.mul(coeff, sx.mul(decay, bracket)))


def exact_terms(max_order: int, P: float, Q: float, alpha: float) -> list:
    return [w_term(j, P, Q, alpha) for j in range(max_order + 1)]


@lru_cache(maxsize=4096)
def _da(e: Expression, m: int) -> Expression:
    if m == 0:
        return e
    return sx.differentiate(_da(e, m - 1), "a")


def _dx(e):
    return sx.differentiate(e, "x")


def _as_map(terms):
    if isinstance(terms, dict):
        return {int(k): (v.expr if isinstance(v, SeriesTerm) else v) for k, v in terms.items()}
    out = {}
    for i, t in enumerate(terms):
        if isinstance(t, SeriesTerm):
            out[t.order] = t.expr
        else:
            out[i] = t
    return out


def order_equation(j: int, terms, g: Expression | None = None) -> Expression:
    """Left-hand side of the order-j equation as an expression in x and a.

    j = 1:  2 dW0/dx - d/da (W0^2 + g)
    j = 2:  dW1/dx - d/da (W0 W1)
    j >= 3: 2 dW_{j-1}/dx
            - sum_{s=1}^{j-1} sum_{k=0}^{s} 1/(j-s)! d^{j-s}/da^{j-s} (W_k W_{s-k})
            + sum_{k=2}^{j-1} 1/(k-1)! d^k W_{j-k} / da^{k-1} dx
            + (j-2)/j! d^j W0 / da^{j-1} dx
    """
    if j < 1:
        raise ValueError(f"order must be >= 1, got {j}")
    w = _as_map(terms)
    for i in range(j):
        if i not in w:
            raise MissingTermError(f"order-{j} equation needs W_{i}")
    if j == 1:
        if g is None:
            raise MissingTermError("order-1 equation needs g(a)")
        g = sx.parse(g) if isinstance(g, str) else g
        inner = sx.add(sx.mul(w[0], w[0]), g)
        return sx.sub(sx.mul(sx.Const(2.0), _dx(w[0])), _da(inner, 1))
    if j == 2:
        return sx.sub(_dx(w[1]), _da(sx.mul(w[0], w[1]), 1))

    total = sx.mul(sx.Const(2.0), _dx(w[j - 1]))
    for s in range(1, j):
        weight = 1.0 / math.factorial(j - s)
        for k in range(s + 1):
            product = sx.mul(w[k], w[s - k])
            total = sx.sub(total, sx.mul(sx.Const(weight), _da(product, j - s)))
    for k in range(2, j):
        weight = 1.0 / math.factorial(k - 1)
        total = sx.add(total, sx.mul(sx.Const(weight), _dx(_da(w[j - k], k - 1))))
    weight = (j - 2) / math.factorial(j)
    total = sx.add(total, sx.mul(sx.Const(weight), _dx(_da(w[0], j - 1))))
    return total


def pde_residual(j: int, terms, samples, g=None) -> float:
    """max |order-j equation| over ``samples`` of (x, a)."""
    expr = order_equation(j, terms, g)
    xs, avals = np.asarray(samples, dtype=float).T
    return float(np.max(np.abs(sx.evaluate(expr, xs, {"a": avals}))))


# ---------------------------------------------------------------------------
# resummation


def closed_form(x, a, P, Q, alpha, hbar):
    entry = make_extended_morse(P, Q, alpha, hbar if hbar > 0 else 1.0)
    return sx.evaluate(entry.W, x, {**entry.aux, "a": a, "hbar": hbar})


def convergence_ratio(x, Q, hbar):
    """Ratio of successive even terms, Q hbar^2 e^{-2x}."""
    return Q * hbar * hbar * math.exp(-2.0 * x)


def partial_sum(K, x, a, P, Q, alpha, hbar):
    """sum_{j <= 2K} hbar^j W_j(x, a)."""
    return sum(hbar ** j * w_term(j, P, Q, alpha)(x, a) for j in range(0, 2 * K + 1, 2))


def partial_sum_error(K, x, a, P, Q, alpha, hbar, strict=True) -> float:
    """|partial sum through hbar^{2K} - closed form|.

    With ``strict`` the point must satisfy Q hbar^2 e^{-2x} < 1, where the
    geometric series converges.
    """
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    r = convergence_ratio(x, Q, hbar)
    if strict and not r < 1:
        bound = 0.5 * math.log(Q * hbar * hbar) if hbar > 0 else -math.inf
        raise ConvergenceError(
            f"series diverges at x = {x:g}: ratio Q hbar^2 exp(-2x) = {r:.4g} >= 1; "
            f"need x > {bound:.6g}"
        )
    return abs(partial_sum(K, x, a, P, Q, alpha, hbar) - closed_form(x, a, P, Q, alpha, hbar))


# ---------------------------------------------------------------------------
# truncated expansions about a_1 = a + hbar


def shifted_series(kind: str, terms, x, a, hbar, J: int) -> float:
    """Truncate the hbar expansion of W, W^2 or dW/dx at a + hbar after order J.

    kind "W":    sum_j sum_{k<=j} hbar^j/k! d^k W_{j-k}/da^k
    kind "W2":   sum_j sum_{s<=j} sum_{k<=s} hbar^j/(j-s)! d^{j-s}(W_k W_{s-k})/da^{j-s}
    kind "dWdx": sum_j sum_{k<=j} hbar^j/k! d^{k+1} W_{j-k}/da^k dx
    """
    w = _as_map(terms)
    missing = [i for i in range(J + 1) if i not in w]
    if missing:
        raise MissingTermError(f"expansion to order {J} needs W_{missing[0]}")
    env = {"a": a}
    total = 0.0
    for j in range(J + 1):
        if kind == "W":
            c = sum(sx.evaluate(_da(w[j - k], k), x, env) / math.factorial(k) for k in range(j + 1))
        elif kind == "dWdx":
            c = sum(sx.evaluate(_dx(_da(w[j - k], k)), x, env) / math.factorial(k)
                    for k in range(j + 1))
        elif kind == "W2":
            c = sum(
                sx.evaluate(_da(sx.mul(w[k], w[s - k]), j - s), x, env) / math.factorial(j - s)
                for s in range(j + 1) for k in range(s + 1)
            )
        else:
            raise ValueError(f"kind must be 'W', 'W2' or 'dWdx', got {kind!r}")
        total += hbar ** j * c
    return total
