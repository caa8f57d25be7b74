import numpy as np
import pytest

from siqm import catalog as cat
from siqm.grid import Grid, PoleError
from siqm.sicheck import analytic_spectrum, continuum_threshold, si_residual


def test_extended_morse_si_residual():
    e = cat.make_extended_morse(3, 5, 5)
    r = si_residual(e, 2.0, 1.0, Grid(-8, 12, 4001))
    assert r.passed
    assert r.inferred_shift == pytest.approx(5.0, abs=1e-10)
    assert r.spread < 1e-10


@pytest.mark.parametrize("name", ["harmonic", "morse", "scarf-2", "rosen-morse-2"])
def test_conventional_si(name):
    e = cat.get_entry(name)
    lo, hi = e.x_sample
    r = si_residual(e, e.default_a, 0.5, Grid(lo, hi, 501))
    assert r.passed, r.to_json()


def test_non_shape_invariant_fails():
    e = cat.custom_entry("quad", "a * x^2", "a^2")
    r = si_residual(e, 1.0, 1.0, Grid(-3, 3, 301))
    assert not r.passed
    assert r.spread > 1.0


def test_pole_on_grid():
    e = cat.get_entry("coulomb")
    with pytest.raises(PoleError):
        si_residual(e, 1.0, 1.0, Grid(-1.0, 1.0, 201))


def test_analytic_spectrum_example():
    e = cat.make_extended_morse(3, 5, 5)
    s = analytic_spectrum(e, 2.0, 1.0, 5)
    assert s.energies[:4] == [0.0, 5.0, 8.0, 9.0]
    assert s.bound_count == 3
    assert s.threshold == pytest.approx(9.0, abs=1e-6)


def test_threshold_cases():
    assert continuum_threshold(cat.get_entry("harmonic"), 1.0, 1.0) == np.inf
    # Eckart: W -> B/a - a at infinity
    e = cat.get_entry("eckart")
    assert continuum_threshold(e, 2.0, 1.0) == pytest.approx((5 / 2 - 2) ** 2, rel=1e-6)


def test_harmonic_spectrum_unbounded():
    s = analytic_spectrum(cat.get_entry("harmonic"), 1.0, 1.0, 4)
    assert s.bound_count == 5
    np.testing.assert_allclose(s.energies, [0, 2, 4, 6, 8])


def test_undefined_g_truncates_with_warning():
    e = cat.get_entry("rosen-morse-2")
    alpha = e.aux["alpha"]
    s = analytic_spectrum(e, alpha - 2.0, 1.0, 4)
    assert len(s.energies) == 2
    assert s.warnings
