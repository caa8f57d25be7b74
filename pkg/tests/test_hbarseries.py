import math

import numpy as np
import pytest
import sympy as sp

from siqm import hbarseries as hs
from siqm import symexpr as sx

P, Q, ALPHA = 3.0, 5.0, 5.0


def _samples(n=100, seed=3):
    rng = np.random.default_rng(seed)
    return list(zip(rng.uniform(-0.5, 5, n), rng.uniform(ALPHA - 5, ALPHA - 0.5, n)))


def test_terms_against_sympy_expansion():
    # independent Taylor expansion of the closed form in hbar
    x, a, h = sp.symbols("x a h")
    A = ALPHA - a
    W = A - sp.exp(-x) + h**2 * (2 * P * sp.exp(x) - 2 * A * Q + Q * sp.exp(-x)) / (sp.exp(2 * x) + Q * h**2)
    ser = sp.series(W, h, 0, 9).removeO()
    rng = np.random.default_rng(0)
    for j in range(9):
        coeff = sp.lambdify((x, a), ser.coeff(h, j))
        term = hs.w_term(j, P, Q, ALPHA)
        for xv, av in zip(rng.uniform(-1, 4, 5), rng.uniform(0, 4, 5)):
            assert term(xv, av) == pytest.approx(float(coeff(xv, av)), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("j", range(1, 9))
def test_exact_terms_solve_order_equations(j):
    terms = hs.exact_terms(8, P, Q, ALPHA)
    g = sx.parse("-(alpha - a)^2")
    g = sx.substitute(g, {"alpha": ALPHA})
    assert hs.pde_residual(j, terms, _samples(), g=g) < 1e-9


def test_wrong_term_fails():
    terms = hs.exact_terms(4, P, Q, ALPHA)
    bad = list(terms)
    # order 3 is homogeneous in W2, so perturb its shape rather than its scale
    bad[2] = hs.SeriesTerm(2, sx.add(terms[2].expr, sx.parse("0.01 * x")))
    assert hs.pde_residual(3, bad, _samples()) > 1e-3


def test_missing_term():
    terms = hs.exact_terms(2, P, Q, ALPHA)
    with pytest.raises(hs.MissingTermError):
        hs.order_equation(5, terms)
    with pytest.raises(hs.MissingTermError):
        hs.order_equation(1, terms)
    with pytest.raises(hs.MissingTermError):
        hs.shifted_series("W", terms, 1.0, 2.0, 0.1, 4)


def test_partial_sum_converges():
    errs = [hs.partial_sum_error(K, 2.0, 2.0, P, Q, ALPHA, 1.0) for K in (1, 2, 3, 4)]
    ratios = [errs[i + 1] / errs[i] for i in range(3)]
    r = hs.convergence_ratio(2.0, Q, 1.0)
    for q in ratios:
        assert q == pytest.approx(r, rel=0.1)
    assert hs.partial_sum_error(0, 1.0, 2.0, P, Q, ALPHA, 0.0) == 0.0


def test_partial_sum_outside_region():
    with pytest.raises(hs.ConvergenceError):
        hs.partial_sum_error(3, 0.5, 2.0, P, Q, ALPHA, 1.0)
    grow = [hs.partial_sum_error(K, 0.5, 2.0, P, Q, ALPHA, 1.0, strict=False) for K in (5, 10)]
    assert grow[1] > grow[0]


@pytest.mark.parametrize("kind", ["W", "W2", "dWdx"])
def test_shifted_series_order(kind):
    # truncation error at a + hbar scales as hbar^(J+1)
    J = 3
    terms = hs.exact_terms(J, P, Q, ALPHA)
    x, a = 1.0, 2.0

    def exact(h):
        if kind == "W":
            return hs.closed_form(x, a + h, P, Q, ALPHA, h)
        if kind == "W2":
            return hs.closed_form(x, a + h, P, Q, ALPHA, h) ** 2
        step = 1e-5
        return (hs.closed_form(x + step, a + h, P, Q, ALPHA, h)
                - hs.closed_form(x - step, a + h, P, Q, ALPHA, h)) / (2 * step)

    hs_ = [0.1, 0.05, 0.025]
    errs = [abs(hs.shifted_series(kind, terms, x, a, h, J) - exact(h)) for h in hs_]
    slopes = [math.log(errs[i] / errs[i + 1]) / math.log(2) for i in range(2)]
    assert min(slopes) >= J + 1 - 0.3


def test_bad_kind():
    with pytest.raises(ValueError):
        hs.shifted_series("V", hs.exact_terms(1, P, Q, ALPHA), 1.0, 2.0, 0.1, 1)
