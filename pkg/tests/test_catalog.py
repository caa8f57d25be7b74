import math

import numpy as np
import pytest

from siqm import catalog as cat
from siqm import symexpr as sx


def test_names():
    assert len(cat.CONVENTIONAL) == 10
    assert len(cat.NAMES) == 11
    assert "extended-morse" in cat.NAMES


@pytest.mark.parametrize("name", cat.CONVENTIONAL)
def test_conventional_entries_pass_gate(name):
    entry = cat.get_entry(name)
    rng = np.random.default_rng(1)
    report = cat.validate_conventional(entry, entry.sample_points(rng, 200))
    assert report.passed, report.to_json()


def test_broken_entry_fails_gate():
    # a*x^2 is not shape invariant
    entry = cat.custom_entry("broken", "a * x^2", "a^2")
    rng = np.random.default_rng(0)
    report = cat.validate_conventional(entry, entry.sample_points(rng, 50))
    assert not report.passed


def test_unknown_entry_and_parameter():
    with pytest.raises(cat.CatalogError):
        cat.get_entry("nope")
    with pytest.raises(cat.CatalogError):
        cat.get_entry("extended-morse", {"Z": 1.0})


def test_extended_morse_values():
    e = cat.make_extended_morse(3, 5, 5)
    assert e.W_at(0.0, 2.0, 1.0) == pytest.approx(-7.0 / 6.0, rel=1e-14)
    assert e.g_at(2.0) == pytest.approx(-9.0)
    # large x tends to the Morse value alpha - a
    assert e.W_at(30.0, 2.0, 1.0) == pytest.approx(3.0, abs=1e-10)


def test_extended_morse_rejects_bad_q():
    with pytest.raises(cat.ConstraintError):
        cat.make_extended_morse(3, 0, 5)
    with pytest.raises(cat.ConstraintError):
        cat.make_extended_morse(3, -1, 5)


def test_constraint_violations():
    e = cat.get_entry("morse")
    assert e.violations(2.0) == []
    assert e.violations(6.0)
    with pytest.raises(cat.ConstraintError):
        e.require(6.0)


def test_catalog_document_is_json_ready():
    import json
    doc = cat.catalog_document()
    assert len(doc) == 11
    json.dumps(doc)
    for item in doc:
        # text forms parse back to the stored trees
        e = cat.get_entry(item["name"])
        assert sx.parse(item["W"]) == e.W


def test_domains():
    assert cat.REAL_LINE.contains([-1e6, 1e6])
    assert not cat.HALF_LINE.contains([-1.0, 1.0])
    assert cat.get_entry("scarf-1").domain.contains([-1.5, 1.5])
    assert not cat.get_entry("scarf-1").domain.contains([-1.6, 0.0])
    assert cat.get_entry("rosen-morse-1").domain.contains([0.1, math.pi - 0.1])


def test_extended_morse_reduces_to_morse_as_hbar_vanishes():
    e = cat.make_extended_morse(3, 5, 5)
    m = cat.get_entry("morse", {"alpha": 5.0, "B": 1.0})
    x = np.linspace(-2, 6, 801)
    gaps = [np.max(np.abs(e.W_at(x, 2.0, h) - m.W_at(x, 2.0))) for h in (1e-3, 5e-4, 2.5e-4)]
    # leading correction is hbar^2 W_2; the hbar^4 term is ~Q hbar^2 e^4 relative
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.01)
    assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.01)
